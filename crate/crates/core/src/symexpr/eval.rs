//! Pointwise numeric evaluation, treating every field symbol as an
//! independent complex number.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::{FieldExpr, FieldSymbol, Rational};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("constant `{0}` has no value")]
    Unbound(String),
    #[error("residual term `{0}` cannot be evaluated pointwise")]
    Residual(String),
    #[error("axis {0} outside the assigned dimension")]
    AxisOutOfRange(usize),
}

/// Values for every symbol at a single point.
#[derive(Clone, Debug)]
pub struct PointValues<T> {
    pub psi: Complex<T>,
    pub psi_star: Complex<T>,
    pub psi_dot: Complex<T>,
    pub psi_star_dot: Complex<T>,
    pub grad_psi: Vec<Complex<T>>,
    pub grad_psi_star: Vec<Complex<T>>,
    pub lap_psi: Complex<T>,
    pub lap_psi_star: Complex<T>,
    pub params: BTreeMap<String, Complex<T>>,
}

impl<T: Real> PointValues<T> {
    pub fn zeros(dim: usize) -> Self {
        PointValues {
            psi: Complex::zero(),
            psi_star: Complex::zero(),
            psi_dot: Complex::zero(),
            psi_star_dot: Complex::zero(),
            grad_psi: vec![Complex::zero(); dim],
            grad_psi_star: vec![Complex::zero(); dim],
            lap_psi: Complex::zero(),
            lap_psi_star: Complex::zero(),
            params: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad_psi.len()
    }

    pub fn symbol(&self, s: FieldSymbol) -> Result<Complex<T>, EvalError> {
        Ok(match s {
            FieldSymbol::Psi => self.psi,
            FieldSymbol::PsiStar => self.psi_star,
            FieldSymbol::PsiDot => self.psi_dot,
            FieldSymbol::PsiStarDot => self.psi_star_dot,
            FieldSymbol::GradPsi(a) => *self.grad_psi.get(a.index()).ok_or(EvalError::AxisOutOfRange(a.number()))?,
            FieldSymbol::GradPsiStar(a) => {
                *self.grad_psi_star.get(a.index()).ok_or(EvalError::AxisOutOfRange(a.number()))?
            }
            FieldSymbol::LaplacianPsi => self.lap_psi,
            FieldSymbol::LaplacianPsiStar => self.lap_psi_star,
        })
    }

    pub fn symbol_mut(&mut self, s: FieldSymbol) -> &mut Complex<T> {
        match s {
            FieldSymbol::Psi => &mut self.psi,
            FieldSymbol::PsiStar => &mut self.psi_star,
            FieldSymbol::PsiDot => &mut self.psi_dot,
            FieldSymbol::PsiStarDot => &mut self.psi_star_dot,
            FieldSymbol::GradPsi(a) => &mut self.grad_psi[a.index()],
            FieldSymbol::GradPsiStar(a) => &mut self.grad_psi_star[a.index()],
            FieldSymbol::LaplacianPsi => &mut self.lap_psi,
            FieldSymbol::LaplacianPsiStar => &mut self.lap_psi_star,
        }
    }

    fn grads(&self, f: super::Field) -> &[Complex<T>] {
        match f {
            super::Field::Psi => &self.grad_psi,
            super::Field::PsiStar => &self.grad_psi_star,
        }
    }
}

pub(crate) fn rational_to<T: Real>(q: &Rational) -> T {
    T::from_f64(q.to_f64().unwrap_or(f64::NAN)).unwrap()
}

pub fn evaluate<T: Real>(e: &FieldExpr, at: &PointValues<T>) -> Result<Complex<T>, EvalError> {
    Ok(match e {
        FieldExpr::Num(c) => Complex::new(rational_to(&c.re), rational_to(&c.im)),
        FieldExpr::Sym(s) => at.symbol(*s)?,
        FieldExpr::Param(p) => {
            let v = *at
                .params
                .get(p.name())
                .ok_or_else(|| EvalError::Unbound(p.name().to_string()))?;
            if p.is_conjugated() {
                v.conj()
            } else {
                v
            }
        }
        FieldExpr::DotGrad(a, b) => at
            .grads(*a)
            .iter()
            .zip(at.grads(*b))
            .fold(Complex::zero(), |acc, (x, y)| acc + x * y),
        FieldExpr::Residual(_) => return Err(EvalError::Residual(e.to_string())),
        FieldExpr::Log(a) => evaluate(a, at)?.ln(),
        FieldExpr::Pow(b, r) => {
            let base = evaluate(b, at)?;
            match r.to_integer().to_i32().filter(|_| r.is_integer()) {
                Some(n) => base.powi(n),
                None => base.powf(rational_to(r)),
            }
        }
        FieldExpr::Product(fs) => {
            let mut acc = Complex::new(T::one(), T::zero());
            for f in fs {
                acc = acc * evaluate(f, at)?;
            }
            acc
        }
        FieldExpr::Sum(ts) => {
            let mut acc = Complex::zero();
            for t in ts {
                acc = acc + evaluate(t, at)?;
            }
            acc
        }
    })
}
