//! Fourier differentiation on periodic 1D/2D grids.
//!
//! Samples are row-major with axis 0 (x) outermost: index `ix * ny + iy`.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Real;

pub struct Spectral<T: Real> {
    shape: Vec<usize>,
    /// Angular wavenumbers per axis in FFT order.
    k: Vec<Vec<T>>,
    forward: Vec<Arc<dyn Fft<T>>>,
    inverse: Vec<Arc<dyn Fft<T>>>,
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("shape", &self.shape).finish()
    }
}

/// `2π/L · (j for j < n/2, j − n otherwise)`.
pub fn wavenumbers<T: Real>(n: usize, length: T) -> Vec<T> {
    let base = T::TAU() / length;
    (0..n)
        .map(|j| {
            let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
            base * T::from_i64(m).unwrap()
        })
        .collect()
}

impl<T: Real> Spectral<T> {
    pub fn new(shape: &[usize], lengths: &[T]) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            shape: shape.to_vec(),
            k: shape.iter().zip(lengths).map(|(&n, &l)| wavenumbers(n, l)).collect(),
            forward: shape.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn wavenumbers(&self, axis: usize) -> &[T] {
        &self.k[axis]
    }

    fn transform(&self, data: &mut [Complex<T>], plans: &[Arc<dyn Fft<T>>]) {
        match self.shape.len() {
            1 => plans[0].process(data),
            2 => {
                let (nx, ny) = (self.shape[0], self.shape[1]);
                plans[1].process(data);
                let mut column = vec![Complex::new(T::zero(), T::zero()); nx];
                for iy in 0..ny {
                    for ix in 0..nx {
                        column[ix] = data[ix * ny + iy];
                    }
                    plans[0].process(&mut column);
                    for ix in 0..nx {
                        data[ix * ny + iy] = column[ix];
                    }
                }
            }
            d => panic!("unsupported dimension {d}"),
        }
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.inverse);
        let scale = T::one() / T::from_usize(self.len()).unwrap();
        data.iter_mut().for_each(|z| *z = z.scale(scale));
    }

    /// Multiply every Fourier mode by `f(k_x[, k_y])`.
    pub fn apply_multiplier(&self, spectrum: &mut [Complex<T>], f: impl Fn(&[T]) -> Complex<T>) {
        match self.shape.len() {
            1 => {
                for (z, &kx) in spectrum.iter_mut().zip(&self.k[0]) {
                    *z = *z * f(&[kx]);
                }
            }
            _ => {
                let ny = self.shape[1];
                for (idx, z) in spectrum.iter_mut().enumerate() {
                    *z = *z * f(&[self.k[0][idx / ny], self.k[1][idx % ny]]);
                }
            }
        }
    }

    fn is_nyquist(&self, axis: usize, k: T) -> bool {
        let n = self.shape[axis];
        n % 2 == 0 && k == self.k[axis][n / 2]
    }

    /// `∂ψ/∂x_axis` with the Nyquist mode dropped.
    pub fn gradient(&self, field: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        let mut data = field.to_vec();
        self.forward(&mut data);
        self.apply_multiplier(&mut data, |k| {
            if self.is_nyquist(axis, k[axis]) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(T::zero(), k[axis])
            }
        });
        self.inverse(&mut data);
        data
    }

    pub fn laplacian(&self, field: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut data = field.to_vec();
        self.forward(&mut data);
        self.apply_multiplier(&mut data, |k| {
            let k2 = k.iter().fold(T::zero(), |acc, &ki| acc + ki * ki);
            Complex::new(-k2, T::zero())
        });
        self.inverse(&mut data);
        data
    }

    /// Exact free evolution `exp(−iħk²dt/2m)` over a step `dt`.
    pub fn kinetic_step(&self, field: &mut [Complex<T>], hbar: T, mass: T, dt: T) {
        self.forward(field);
        let two = T::one() + T::one();
        self.apply_multiplier(field, |k| {
            let k2 = k.iter().fold(T::zero(), |acc, &ki| acc + ki * ki);
            Complex::from_polar(T::one(), -hbar * k2 * dt / (two * mass))
        });
        self.inverse(field);
    }
}
