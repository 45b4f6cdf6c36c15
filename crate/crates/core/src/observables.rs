//! Norm, energy, momentum, width and peak amplitude of a field on its grid.

use num_complex::Complex;

use crate::compile::{CompileError, CompiledRhs};
use crate::solver::FieldGrid;
use crate::spectral::Spectral;
use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord<T> {
    pub t: T,
    pub norm: T,
    /// Complex only when couplings are complex.
    pub energy: Complex<T>,
    pub momentum: Vec<T>,
    pub width: Vec<T>,
    pub peak: T,
}

const AXES: [&str; 2] = ["x", "y"];

impl<T: Real> ObservableRecord<T> {
    pub fn csv_header(dim: usize, complex_energy: bool) -> Vec<String> {
        let mut h = vec!["t".to_string(), "norm".into(), "energy".into()];
        h.extend(AXES[..dim].iter().map(|a| format!("momentum_{a}")));
        h.extend(AXES[..dim].iter().map(|a| format!("width_{a}")));
        h.push("peak".into());
        if complex_energy {
            h.push("energy_imag".into());
        }
        h
    }

    pub fn csv_row(&self, complex_energy: bool) -> Vec<String> {
        let mut r = vec![self.t.to_string(), self.norm.to_string(), self.energy.re.to_string()];
        r.extend(self.momentum.iter().map(T::to_string));
        r.extend(self.width.iter().map(T::to_string));
        r.push(self.peak.to_string());
        if complex_energy {
            r.push(self.energy.im.to_string());
        }
        r
    }
}

/// `Σ|ψⱼ|² Δx^D`.
pub fn norm<T: Real>(field: &FieldGrid<T>) -> T {
    field.samples().iter().fold(T::zero(), |s, z| s + z.norm_sqr()) * field.cell_volume()
}

pub fn peak<T: Real>(field: &FieldGrid<T>) -> T {
    field.samples().iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Standard deviation of `|ψ|²` along each axis, never below `Δx/2`.
pub fn width<T: Real>(field: &FieldGrid<T>) -> Vec<T> {
    let dim = field.dim();
    let mut total = T::zero();
    let mut first = vec![T::zero(); dim];
    let mut second = vec![T::zero(); dim];
    let mut x = vec![T::zero(); dim];
    for (j, z) in field.samples().iter().enumerate() {
        let w = z.norm_sqr();
        field.position_into(j, &mut x);
        total = total + w;
        for a in 0..dim {
            first[a] = first[a] + w * x[a];
            second[a] = second[a] + w * x[a] * x[a];
        }
    }
    let two = T::one() + T::one();
    (0..dim)
        .map(|a| {
            let floor = field.spacing(a) / two;
            if total == T::zero() {
                return floor;
            }
            let mean = first[a] / total;
            let var = (second[a] / total - mean * mean).max(T::zero());
            var.sqrt().max(floor)
        })
        .collect()
}

/// Evaluates observables on grids of one shape, reusing FFT plans.
#[derive(Debug)]
pub struct Observer<T: Real> {
    spectral: Spectral<T>,
}

impl<T: Real> Observer<T> {
    pub fn new(field: &FieldGrid<T>) -> Self {
        Observer {
            spectral: Spectral::new(field.points(), field.lengths()),
        }
    }

    /// `ħ Im ∫ψ*∂ᵢψ` per axis.
    pub fn momentum(&self, field: &FieldGrid<T>, hbar: T) -> Vec<T> {
        let psi = field.samples();
        (0..field.dim())
            .map(|a| {
                let g = self.spectral.gradient(psi, a);
                let s = psi.iter().zip(&g).fold(T::zero(), |s, (p, d)| s + (p.conj() * d).im);
                hbar * s * field.cell_volume()
            })
            .collect()
    }

    /// `∫[ħ²/2m|∇ψ|² + V|ψ|² − L_int]`.
    pub fn energy(&self, field: &FieldGrid<T>, rhs: &CompiledRhs<T>, v: &[T]) -> Result<Complex<T>, CompileError> {
        if field.dim() != rhs.dim() {
            return Err(CompileError::DimensionMismatch {
                expected: rhs.dim(),
                got: field.dim(),
            });
        }
        let density = rhs.energy_density_samples(&self.spectral, field.samples(), v)?;
        let sum = density.iter().fold(Complex::new(T::zero(), T::zero()), |s, z| s + z);
        Ok(sum.scale(field.cell_volume()))
    }

    pub fn record(
        &self,
        t: T,
        field: &FieldGrid<T>,
        rhs: &CompiledRhs<T>,
        v: &[T],
    ) -> Result<ObservableRecord<T>, CompileError> {
        Ok(ObservableRecord {
            t,
            norm: norm(field),
            energy: self.energy(field, rhs, v)?,
            momentum: self.momentum(field, rhs.options.hbar),
            width: width(field),
            peak: peak(field),
        })
    }
}

pub fn momentum<T: Real>(field: &FieldGrid<T>, hbar: T) -> Vec<T> {
    Observer::new(field).momentum(field, hbar)
}

pub fn energy<T: Real>(field: &FieldGrid<T>, rhs: &CompiledRhs<T>, v: &[T]) -> Result<Complex<T>, CompileError> {
    Observer::new(field).energy(field, rhs, v)
}
