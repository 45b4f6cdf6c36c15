use num_complex::Complex;
use thiserror::Error;

use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    Dimension(usize),
    #[error("points per axis must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("box length must be positive and finite")]
    Length,
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
}

/// Complex field on a periodic box `[−L/2, L/2)^D`, row-major with x outermost.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGrid<T> {
    points: Vec<usize>,
    lengths: Vec<T>,
    samples: Vec<Complex<T>>,
}

impl<T: Real> FieldGrid<T> {
    pub fn zeros(points: &[usize], lengths: &[T]) -> Result<Self, GridError> {
        let n = validate_shape(points, lengths)?;
        Ok(FieldGrid {
            points: points.to_vec(),
            lengths: lengths.to_vec(),
            samples: vec![Complex::new(T::zero(), T::zero()); n],
        })
    }

    pub fn from_samples(points: &[usize], lengths: &[T], samples: Vec<Complex<T>>) -> Result<Self, GridError> {
        let n = validate_shape(points, lengths)?;
        if samples.len() != n {
            return Err(GridError::SampleCount {
                expected: n,
                got: samples.len(),
            });
        }
        if let Some(j) = first_non_finite(&samples) {
            return Err(GridError::NonFinite(j));
        }
        Ok(FieldGrid {
            points: points.to_vec(),
            lengths: lengths.to_vec(),
            samples,
        })
    }

    /// Sample `f` at every node coordinate.
    pub fn from_fn(points: &[usize], lengths: &[T], f: impl Fn(&[T]) -> Complex<T>) -> Result<Self, GridError> {
        let mut g = Self::zeros(points, lengths)?;
        let mut x = vec![T::zero(); g.dim()];
        for j in 0..g.len() {
            g.position_into(j, &mut x);
            g.samples[j] = f(&x);
        }
        if let Some(j) = first_non_finite(&g.samples) {
            return Err(GridError::NonFinite(j));
        }
        Ok(g)
    }

    /// Same shape, new samples. Finiteness is not checked.
    pub fn with_samples(&self, samples: Vec<Complex<T>>) -> Self {
        assert_eq!(samples.len(), self.samples.len(), "sample count");
        FieldGrid {
            points: self.points.clone(),
            lengths: self.lengths.clone(),
            samples,
        }
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex<T>> {
        self.samples
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.lengths[axis] / T::from_usize(self.points[axis]).unwrap()
    }

    /// `Δx^D`.
    pub fn cell_volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |v, a| v * self.spacing(a))
    }

    /// Node coordinates along one axis.
    pub fn axis_coordinates(&self, axis: usize) -> Vec<T> {
        let half = self.lengths[axis] / (T::one() + T::one());
        let dx = self.spacing(axis);
        (0..self.points[axis])
            .map(|j| -half + T::from_usize(j).unwrap() * dx)
            .collect()
    }

    pub fn position_into(&self, index: usize, out: &mut [T]) {
        let two = T::one() + T::one();
        let mut rest = index;
        for axis in (0..self.dim()).rev() {
            let n = self.points[axis];
            let j = rest % n;
            rest /= n;
            out[axis] = -self.lengths[axis] / two + T::from_usize(j).unwrap() * self.spacing(axis);
        }
    }

    pub fn position(&self, index: usize) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim()];
        self.position_into(index, &mut x);
        x
    }

    pub fn same_shape(&self, other: &FieldGrid<T>) -> bool {
        self.points == other.points && self.lengths == other.lengths
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        first_non_finite(&self.samples)
    }

    /// `max_j |a_j − b_j|`.
    pub fn max_abs_diff(&self, other: &FieldGrid<T>) -> T {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        self.with_samples(self.samples.iter().map(|&z| f(z)).collect())
    }
}

pub(crate) fn first_non_finite<T: Real>(samples: &[Complex<T>]) -> Option<usize> {
    samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite()))
}

fn validate_shape<T: Real>(points: &[usize], lengths: &[T]) -> Result<usize, GridError> {
    if !(1..=2).contains(&points.len()) {
        return Err(GridError::Dimension(points.len()));
    }
    if lengths.len() != points.len() {
        return Err(GridError::Dimension(lengths.len()));
    }
    for &n in points {
        if n < 2 || !n.is_power_of_two() {
            return Err(GridError::NotPowerOfTwo(n));
        }
    }
    if lengths.iter().any(|l| !(l.is_finite() && *l > T::zero())) {
        return Err(GridError::Length);
    }
    Ok(points.iter().product())
}
