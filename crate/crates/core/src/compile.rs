//! Numeric right-hand side `−(ħ²/2m)∇²ψ + Vψ + N[ψ]` compiled from a derived
//! equation.
//!
//! Nonlinearities that are singular at nodes of ψ are regularized by
//! `|ψ|² → |ψ|² + ε`: `ψ^{-k}` becomes `(ψ*/(|ψ|²+ε))^k`, grouped density
//! powers become `(|ψ|²+ε)^r`, and `ln(c ψ^p ψ*^q)` is split into
//! `ln c + (p+q)/2 · ln(|ψ|²+ε) + i(p−q)·arg ψ`. With `ε = 0` a node where
//! `ψ = 0` is an error instead.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::solver::FieldGrid;
use crate::spectral::Spectral;
use crate::symexpr::{canonicalize, rational_to, Coeff, Field, FieldExpr, FieldSymbol, Rational};
use crate::variational::{derive_equation_in, EvolutionEquation, VariationalError};
use crate::Real;

pub const DEFAULT_EPSILON: f64 = 1e-30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("unbound constant `{0}`")]
    Unbound(String),
    #[error("grid dimension {got} does not match compiled dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("derivation in D={0} leaves residual terms that cannot be evaluated (D=1 only)")]
    Residual(usize),
    #[error("re-deriving for the grid dimension: {0}")]
    Variational(#[from] VariationalError),
    #[error("`{0}` cannot appear in a right-hand side")]
    Unsupported(String),
    #[error("nonlinearity singular at zero amplitude (node {index}); set a regularization epsilon")]
    SingularAtZeroAmplitude { index: usize },
    #[error("non-finite right-hand side at node {index}")]
    NonFinite { index: usize },
    #[error("potential has {got} samples, grid has {expected}")]
    PotentialLength { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Locality {
    PointwiseLocal,
    DerivativeCoupled,
}

/// Values of named couplings. ħ and m come from [`CompileOptions`].
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Bindings<T> {
    values: BTreeMap<String, Complex<T>>,
}

impl<T: Real> Bindings<T> {
    pub fn new() -> Self {
        Bindings { values: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: Complex<T>) -> Self {
        self.set(name, value);
        self
    }

    pub fn with_real(self, name: &str, value: T) -> Self {
        self.with(name, Complex::new(value, T::zero()))
    }

    pub fn set(&mut self, name: &str, value: Complex<T>) {
        self.values.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<Complex<T>> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Complex<T>)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompileOptions<T> {
    pub epsilon: T,
    pub hbar: T,
    pub mass: T,
    /// Spatial dimension of the target grid.
    pub dim: usize,
}

impl<T: Real> Default for CompileOptions<T> {
    fn default() -> Self {
        CompileOptions {
            epsilon: T::from_f64_lossy(DEFAULT_EPSILON),
            hbar: T::one(),
            mass: T::one(),
            dim: 1,
        }
    }
}

impl<T: Real> CompileOptions<T> {
    pub fn dim(self, dim: usize) -> Self {
        CompileOptions { dim, ..self }
    }

    pub fn epsilon(self, epsilon: T) -> Self {
        CompileOptions { epsilon, ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node<T> {
    Const(Complex<T>),
    Psi,
    PsiStar,
    Grad(Field, usize),
    Lap(Field),
    Potential,
    DotGrad(Field, Field),
    /// `(ψ*/(|ψ|²+ε))^k` for `ψ^{-k}`, or `(ψ/(|ψ|²+ε))^k` for `ψ*^{-k}`.
    InversePower(Field, i32),
    /// `(|ψ|²+ε)^r`.
    DensityPower(T),
    /// `a·ln(|ψ|²+ε) + i·b·arg ψ`.
    LogAmplitudePhase { amplitude: T, phase: T },
    Log(Box<Node<T>>),
    PowI(Box<Node<T>>, i32),
    PowF(Box<Node<T>>, T),
    Product(Vec<Node<T>>),
    Sum(Vec<Node<T>>),
}

/// Values available at one grid node.
#[derive(Clone, Copy, Debug)]
struct Point<T> {
    psi: Complex<T>,
    grad: [Complex<T>; 2],
    lap: Complex<T>,
    v: T,
}

struct Singular;

impl<T: Real> Node<T> {
    fn is_singular(&self) -> bool {
        match self {
            Node::InversePower(..) | Node::LogAmplitudePhase { .. } => true,
            Node::DensityPower(r) => *r < T::zero(),
            Node::Log(a) | Node::PowI(a, _) | Node::PowF(a, _) => a.is_singular(),
            Node::Product(xs) | Node::Sum(xs) => xs.iter().any(Node::is_singular),
            _ => false,
        }
    }

    fn uses_phase(&self) -> bool {
        match self {
            Node::LogAmplitudePhase { phase, .. } => *phase != T::zero(),
            Node::Log(a) | Node::PowI(a, _) | Node::PowF(a, _) => a.uses_phase(),
            Node::Product(xs) | Node::Sum(xs) => xs.iter().any(Node::uses_phase),
            _ => false,
        }
    }

    fn eval(&self, p: &Point<T>, dim: usize, eps: T) -> Result<Complex<T>, Singular> {
        let density = || {
            let d = p.psi.norm_sqr();
            if eps == T::zero() && d == T::zero() {
                Err(Singular)
            } else {
                Ok(d + eps)
            }
        };
        Ok(match self {
            Node::Const(c) => *c,
            Node::Psi => p.psi,
            Node::PsiStar => p.psi.conj(),
            Node::Grad(Field::Psi, a) => p.grad[*a],
            Node::Grad(Field::PsiStar, a) => p.grad[*a].conj(),
            Node::Lap(Field::Psi) => p.lap,
            Node::Lap(Field::PsiStar) => p.lap.conj(),
            Node::Potential => Complex::new(p.v, T::zero()),
            Node::DotGrad(a, b) => (0..dim).fold(Complex::zero(), |acc, axis| {
                let g = |f: &Field| match f {
                    Field::Psi => p.grad[axis],
                    Field::PsiStar => p.grad[axis].conj(),
                };
                acc + g(a) * g(b)
            }),
            Node::InversePower(f, k) => {
                let d = density()?;
                let z = match f {
                    Field::Psi => p.psi.conj(),
                    Field::PsiStar => p.psi,
                };
                z.unscale(d).powi(*k)
            }
            Node::DensityPower(r) => {
                if *r < T::zero() {
                    Complex::new(density()?.powf(*r), T::zero())
                } else {
                    Complex::new((p.psi.norm_sqr() + eps).powf(*r), T::zero())
                }
            }
            Node::LogAmplitudePhase { amplitude, phase } => {
                let d = density()?;
                let re = if *amplitude == T::zero() { T::zero() } else { *amplitude * d.ln() };
                Complex::new(re, *phase * p.psi.arg())
            }
            Node::Log(a) => a.eval(p, dim, eps)?.ln(),
            Node::PowI(a, n) => a.eval(p, dim, eps)?.powi(*n),
            Node::PowF(a, r) => a.eval(p, dim, eps)?.powf(*r),
            Node::Product(xs) => {
                let mut acc = Complex::one();
                for x in xs {
                    acc = acc * x.eval(p, dim, eps)?;
                }
                acc
            }
            Node::Sum(xs) => {
                let mut acc = Complex::zero();
                for x in xs {
                    acc = acc + x.eval(p, dim, eps)?;
                }
                acc
            }
        })
    }
}

fn coeff_to<T: Real>(c: &Coeff) -> Complex<T> {
    Complex::new(rational_to(&c.re), rational_to(&c.im))
}

/// `(c, p, q)` for `c·ψ^p·ψ*^q`; a grouped `(ψψ*)^r` counts as `p = q = r`.
fn density_monomial(e: &FieldExpr) -> Option<(Coeff, Rational, Rational)> {
    fn factor(f: &FieldExpr, p: &mut Rational, q: &mut Rational) -> bool {
        match f {
            FieldExpr::Sym(FieldSymbol::Psi) => *p += Rational::one(),
            FieldExpr::Sym(FieldSymbol::PsiStar) => *q += Rational::one(),
            FieldExpr::Pow(b, r) => match &**b {
                FieldExpr::Sym(FieldSymbol::Psi) => *p += r,
                FieldExpr::Sym(FieldSymbol::PsiStar) => *q += r,
                FieldExpr::Product(_) => {
                    let Some((c, bp, bq)) = density_monomial(b) else {
                        return false;
                    };
                    if !c.is_one() || bp != bq {
                        return false;
                    }
                    *p += &bp * r;
                    *q += &bq * r;
                }
                _ => return false,
            },
            _ => return false,
        }
        true
    }
    let (c, rest) = e.split_coefficient();
    let (mut p, mut q) = (Rational::zero(), Rational::zero());
    let factors = match &rest {
        FieldExpr::Product(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    for f in &factors {
        if !factor(f, &mut p, &mut q) {
            return None;
        }
    }
    Some((c, p, q))
}

fn small_int(r: &Rational) -> Option<i32> {
    if r.is_integer() {
        r.to_integer().to_i32()
    } else {
        None
    }
}

struct Lowering<'a, T> {
    bindings: &'a Bindings<T>,
    options: &'a CompileOptions<T>,
}

impl<T: Real> Lowering<'_, T> {
    fn lower(&self, e: &FieldExpr) -> Result<Node<T>, CompileError> {
        Ok(match e {
            FieldExpr::Num(c) => Node::Const(coeff_to(c)),
            FieldExpr::Sym(s) => match s {
                FieldSymbol::Psi => Node::Psi,
                FieldSymbol::PsiStar => Node::PsiStar,
                FieldSymbol::GradPsi(a) => self.grad(Field::Psi, a.index())?,
                FieldSymbol::GradPsiStar(a) => self.grad(Field::PsiStar, a.index())?,
                FieldSymbol::LaplacianPsi => Node::Lap(Field::Psi),
                FieldSymbol::LaplacianPsiStar => Node::Lap(Field::PsiStar),
                FieldSymbol::PsiDot | FieldSymbol::PsiStarDot => {
                    return Err(CompileError::Unsupported(e.to_string()))
                }
            },
            FieldExpr::Param(p) => {
                let value = match p.name() {
                    "V" => return Ok(Node::Potential),
                    "hbar" => Complex::new(self.options.hbar, T::zero()),
                    "m" => Complex::new(self.options.mass, T::zero()),
                    name => self
                        .bindings
                        .get(name)
                        .ok_or_else(|| CompileError::Unbound(name.to_string()))?,
                };
                Node::Const(if p.is_conjugated() { value.conj() } else { value })
            }
            FieldExpr::DotGrad(a, b) => Node::DotGrad(*a, *b),
            FieldExpr::Residual(_) => return Err(CompileError::Residual(self.options.dim)),
            FieldExpr::Log(arg) => match density_monomial(arg) {
                Some((c, p, q)) => {
                    let two = Rational::from_integer(2.into());
                    let amplitude: T = rational_to(&((&p + &q) / two));
                    let phase: T = rational_to(&(&p - &q));
                    let log_amp = Node::LogAmplitudePhase { amplitude, phase };
                    if c.is_one() {
                        log_amp
                    } else {
                        Node::Sum(vec![Node::Const(coeff_to::<T>(&c).ln()), log_amp])
                    }
                }
                None => Node::Log(Box::new(self.lower(arg)?)),
            },
            FieldExpr::Pow(base, r) => {
                let grouped_density = matches!(**base, FieldExpr::Product(_))
                    && density_monomial(base).is_some_and(|(c, p, q)| c.is_one() && p == q && p.is_one());
                match (&**base, small_int(r)) {
                    (FieldExpr::Sym(FieldSymbol::Psi), Some(k)) if k < 0 => Node::InversePower(Field::Psi, -k),
                    (FieldExpr::Sym(FieldSymbol::PsiStar), Some(k)) if k < 0 => Node::InversePower(Field::PsiStar, -k),
                    _ if grouped_density => Node::DensityPower(rational_to(r)),
                    (_, Some(k)) => Node::PowI(Box::new(self.lower(base)?), k),
                    _ => Node::PowF(Box::new(self.lower(base)?), rational_to(r)),
                }
            }
            FieldExpr::Product(fs) => Node::Product(fs.iter().map(|f| self.lower(f)).collect::<Result<_, _>>()?),
            FieldExpr::Sum(ts) => Node::Sum(ts.iter().map(|t| self.lower(t)).collect::<Result<_, _>>()?),
        })
    }

    fn grad(&self, f: Field, axis: usize) -> Result<Node<T>, CompileError> {
        if axis >= self.options.dim {
            return Err(CompileError::DimensionMismatch {
                expected: axis + 1,
                got: self.options.dim,
            });
        }
        Ok(Node::Grad(f, axis))
    }
}

fn needs(e: &FieldExpr, gradients: bool) -> bool {
    e.any(|n| match n {
        FieldExpr::DotGrad(..) => gradients,
        FieldExpr::Sym(s) => match s {
            FieldSymbol::GradPsi(_) | FieldSymbol::GradPsiStar(_) => gradients,
            FieldSymbol::LaplacianPsi | FieldSymbol::LaplacianPsiStar => !gradients,
            _ => false,
        },
        _ => false,
    })
}

/// Compiled right-hand side. Immutable; evaluation is pure.
#[derive(Clone, Debug)]
pub struct CompiledRhs<T> {
    pub source_equation: EvolutionEquation,
    pub needs_gradients: bool,
    pub needs_laplacians: bool,
    pub bound_constants: BTreeMap<String, Complex<T>>,
    pub locality: Locality,
    pub options: CompileOptions<T>,
    nonlinearity: Node<T>,
    local_potential: Result<Node<T>, String>,
    hamiltonian: Node<T>,
    hamiltonian_needs_gradients: bool,
    complex_couplings: bool,
}

pub fn compile<T: Real>(
    eq: &EvolutionEquation,
    bindings: &Bindings<T>,
    options: &CompileOptions<T>,
) -> Result<CompiledRhs<T>, CompileError> {
    if !(1..=2).contains(&options.dim) {
        return Err(CompileError::DimensionMismatch {
            expected: eq.dim,
            got: options.dim,
        });
    }
    let eq = if eq.dim != options.dim && eq.nonlinearity.has_spatial_derivatives() {
        derive_equation_in(&eq.lagrangian, options.dim)?
    } else {
        eq.clone()
    };
    if eq.residual || eq.nonlinearity.has_residual() {
        return Err(CompileError::Residual(options.dim));
    }

    let lowering = Lowering { bindings, options };
    let nonlinearity = lowering.lower(&eq.nonlinearity)?;
    let hamiltonian = lowering.lower(&eq.hamiltonian_density)?;

    let mut bound_constants = BTreeMap::new();
    let mut complex_couplings = false;
    for name in eq.couplings() {
        let value = bindings.get(&name).ok_or_else(|| CompileError::Unbound(name.clone()))?;
        complex_couplings |= value.im != T::zero();
        bound_constants.insert(name, value);
    }

    let locality = if eq.nonlinearity.has_spatial_derivatives() {
        Locality::DerivativeCoupled
    } else {
        Locality::PointwiseLocal
    };
    let local_potential = match locality {
        Locality::DerivativeCoupled => Err("nonlinearity contains spatial derivatives".to_string()),
        Locality::PointwiseLocal => {
            let real: Vec<&str> = bound_constants
                .iter()
                .filter(|(_, v)| v.im == T::zero())
                .map(|(k, _)| k.as_str())
                .collect();
            let n_pot = canonicalize(&(eq.nonlinearity.clone() * FieldExpr::psi().recip())).assume_real(&real);
            if n_pot.phase_weight().is_none_or(|w| !w.is_zero()) {
                Err("nonlinearity is not of the form N_pot(|ψ|)·ψ".to_string())
            } else if canonicalize(&n_pot.conjugate()) != n_pot {
                Err("local potential is not real for the bound couplings".to_string())
            } else {
                lowering.lower(&n_pot)
                    .map_err(|e| e.to_string())
            }
        }
    };

    Ok(CompiledRhs {
        needs_gradients: needs(&eq.nonlinearity, true),
        needs_laplacians: needs(&eq.nonlinearity, false),
        hamiltonian_needs_gradients: needs(&eq.hamiltonian_density, true),
        source_equation: eq,
        bound_constants,
        locality,
        options: *options,
        nonlinearity,
        local_potential,
        hamiltonian,
        complex_couplings,
    })
}

/// Spatial derivatives of a field needed at every node.
pub(crate) struct Derivatives<T> {
    pub grad: Vec<Vec<Complex<T>>>,
    pub lap: Vec<Complex<T>>,
}

impl<T: Real> Derivatives<T> {
    pub fn compute(spectral: &Spectral<T>, psi: &[Complex<T>], gradients: bool) -> Self {
        let dim = spectral.shape().len();
        Derivatives {
            grad: if gradients {
                (0..dim).map(|a| spectral.gradient(psi, a)).collect()
            } else {
                Vec::new()
            },
            lap: spectral.laplacian(psi),
        }
    }

    fn point(&self, psi: &[Complex<T>], v: &[T], j: usize) -> Point<T> {
        let mut grad = [Complex::zero(); 2];
        for (a, g) in self.grad.iter().enumerate() {
            grad[a] = g[j];
        }
        Point {
            psi: psi[j],
            grad,
            lap: self.lap[j],
            v: v.get(j).copied().unwrap_or_else(T::zero),
        }
    }
}

impl<T: Real> CompiledRhs<T> {
    pub fn dim(&self) -> usize {
        self.options.dim
    }

    /// Whether any node needs the `|ψ|² + ε` regularization.
    pub fn is_singular(&self) -> bool {
        self.nonlinearity.is_singular()
    }

    /// Whether the nonlinearity reads `arg ψ` directly.
    pub fn uses_phase(&self) -> bool {
        self.nonlinearity.uses_phase()
    }

    pub fn has_complex_couplings(&self) -> bool {
        self.complex_couplings
    }

    /// Reason the split-step integrator cannot be used, if any.
    pub fn strang_unavailable(&self) -> Option<&str> {
        self.local_potential.as_ref().err().map(String::as_str)
    }

    fn check(&self, field: &FieldGrid<T>, v: &[T]) -> Result<(), CompileError> {
        if field.dim() != self.dim() {
            return Err(CompileError::DimensionMismatch {
                expected: self.dim(),
                got: field.dim(),
            });
        }
        if !v.is_empty() && v.len() != field.len() {
            return Err(CompileError::PotentialLength {
                expected: field.len(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Full right-hand side on the grid. An empty `v` means `V = 0`.
    pub fn evaluate(&self, field: &FieldGrid<T>, v: &[T]) -> Result<FieldGrid<T>, CompileError> {
        self.check(field, v)?;
        let spectral = Spectral::new(field.points(), field.lengths());
        let out = self.evaluate_samples(&spectral, field.samples(), v)?;
        Ok(field.with_samples(out))
    }

    /// `N[ψ]` alone.
    pub fn nonlinearity(&self, field: &FieldGrid<T>, v: &[T]) -> Result<FieldGrid<T>, CompileError> {
        self.check(field, v)?;
        let spectral = Spectral::new(field.points(), field.lengths());
        let psi = field.samples();
        let d = Derivatives::compute(&spectral, psi, self.needs_gradients);
        let mut out = Vec::with_capacity(psi.len());
        for j in 0..psi.len() {
            out.push(self.nonlinearity_at(&d.point(psi, v, j), j)?);
        }
        Ok(field.with_samples(out))
    }

    fn nonlinearity_at(&self, p: &Point<T>, j: usize) -> Result<Complex<T>, CompileError> {
        self.nonlinearity
            .eval(p, self.dim(), self.options.epsilon)
            .map_err(|_| CompileError::SingularAtZeroAmplitude { index: j })
    }

    pub(crate) fn evaluate_samples(
        &self,
        spectral: &Spectral<T>,
        psi: &[Complex<T>],
        v: &[T],
    ) -> Result<Vec<Complex<T>>, CompileError> {
        let d = Derivatives::compute(spectral, psi, self.needs_gradients);
        let two = T::one() + T::one();
        let kinetic = -self.options.hbar * self.options.hbar / (two * self.options.mass);
        let with_potential = self.source_equation.potential_present && !v.is_empty();
        let mut out = Vec::with_capacity(psi.len());
        for j in 0..psi.len() {
            let p = d.point(psi, v, j);
            let mut z = d.lap[j].scale(kinetic) + self.nonlinearity_at(&p, j)?;
            if with_potential {
                z = z + psi[j].scale(v[j]);
            }
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(CompileError::NonFinite { index: j });
            }
            out.push(z);
        }
        Ok(out)
    }

    /// Real local potential `N_pot = N/ψ` at every node, for split stepping.
    pub(crate) fn local_potential_samples(&self, psi: &[Complex<T>], out: &mut Vec<T>) -> Result<(), CompileError> {
        let node = self
            .local_potential
            .as_ref()
            .map_err(|e| CompileError::Unsupported(e.clone()))?;
        out.clear();
        for (j, &z) in psi.iter().enumerate() {
            let p = Point {
                psi: z,
                grad: [Complex::zero(); 2],
                lap: Complex::zero(),
                v: T::zero(),
            };
            let u = node
                .eval(&p, self.dim(), self.options.epsilon)
                .map_err(|_| CompileError::SingularAtZeroAmplitude { index: j })?;
            if !u.re.is_finite() {
                return Err(CompileError::NonFinite { index: j });
            }
            out.push(u.re);
        }
        Ok(())
    }

    /// Energy density `ħ²/2m|∇ψ|² + V|ψ|² − L_int` at every node.
    pub(crate) fn energy_density_samples(
        &self,
        spectral: &Spectral<T>,
        psi: &[Complex<T>],
        v: &[T],
    ) -> Result<Vec<Complex<T>>, CompileError> {
        let d = Derivatives::compute(spectral, psi, self.hamiltonian_needs_gradients);
        (0..psi.len())
            .map(|j| {
                self.hamiltonian
                    .eval(&d.point(psi, v, j), self.dim(), self.options.epsilon)
                    .map_err(|_| CompileError::SingularAtZeroAmplitude { index: j })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::variational::{derive_equation, Corpus};

    fn eq(file: &str) -> EvolutionEquation {
        derive_equation(&parse(Corpus::bundled().get(file).unwrap()).unwrap()).unwrap()
    }

    fn grid(f: impl Fn(f64) -> Complex<f64>) -> FieldGrid<f64> {
        FieldGrid::from_fn(&[32], &[10.0], |x| f(x[0])).unwrap()
    }

    #[test]
    fn plane_wave_is_an_eigenfunction() {
        let rhs = compile(&eq("linear.lag"), &Bindings::new(), &CompileOptions::default()).unwrap();
        let k = std::f64::consts::TAU * 3.0 / 10.0;
        let f = grid(|x| Complex::from_polar(1.0, k * x));
        let out = rhs.evaluate(&f, &[]).unwrap();
        for (o, z) in out.samples().iter().zip(f.samples()) {
            assert!((o - z * (k * k / 2.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_field_cubic() {
        let b = Bindings::new().with("e", Complex::new(0.3, 0.2));
        let rhs = compile(&eq("gp_m2.lag"), &b, &CompileOptions::default()).unwrap();
        assert_eq!(rhs.locality, Locality::PointwiseLocal);
        let a = Complex::new(0.7, -0.4);
        let out = rhs.evaluate(&grid(|_| a), &[]).unwrap();
        let expected = Complex::new(-2.0, 0.0) * Complex::new(0.3, -0.2) * a.norm_sqr() * a;
        for o in out.samples() {
            assert!((o - expected).norm() < 1e-13);
        }
        assert!(rhs.strang_unavailable().is_some());
        let real = compile(&eq("gp_m2.lag"), &Bindings::new().with_real("e", 0.5), &CompileOptions::default()).unwrap();
        assert!(real.strang_unavailable().is_none());
    }

    #[test]
    fn gradient_coupling_is_derivative_coupled() {
        let rhs = compile(&eq("gradient_coupling.lag"), &Bindings::new().with_real("a", 0.1), &CompileOptions::default()).unwrap();
        assert_eq!(rhs.locality, Locality::DerivativeCoupled);
        assert!(rhs.needs_gradients && rhs.needs_laplacians);
        assert!(rhs.strang_unavailable().is_some());
    }

    #[test]
    fn unbound_constant() {
        let err = compile(&eq("gp_m2.lag"), &Bindings::<f64>::new(), &CompileOptions::default()).unwrap_err();
        assert_eq!(err, CompileError::Unbound("e".into()));
    }

    #[test]
    fn quartic_gradient_needs_one_dimension() {
        let b = Bindings::new().with_real("b", 0.01);
        assert!(compile(&eq("gradient_quartic.lag"), &b, &CompileOptions::default()).is_ok());
        let err = compile(&eq("gradient_quartic.lag"), &b, &CompileOptions::default().dim(2)).unwrap_err();
        assert_eq!(err, CompileError::Residual(2));
    }

    #[test]
    fn singular_nonlinearity_at_a_node() {
        let b = Bindings::new().with_real("c", 1.0);
        let f = grid(|x| Complex::new(x, 0.0));
        let strict = compile(&eq("log_power_m2.lag"), &b, &CompileOptions::default().epsilon(0.0)).unwrap();
        let err = strict.evaluate(&f, &[]).unwrap_err();
        assert_eq!(err, CompileError::SingularAtZeroAmplitude { index: 16 });
        assert!(err.to_string().contains("nonlinearity singular at zero amplitude"));
        let regular = compile(&eq("log_power_m2.lag"), &b, &CompileOptions::default()).unwrap();
        assert!(regular.evaluate(&f, &[]).is_ok());
        assert!(regular.is_singular());
    }

    #[test]
    fn phase_logarithm_uses_the_argument() {
        let b = Bindings::new().with_real("g", 1.0);
        let rhs = compile(&eq("phase_log.lag"), &b, &CompileOptions::default()).unwrap();
        assert!(rhs.uses_phase());
        assert!(rhs.strang_unavailable().is_some());
        let z = Complex::from_polar(0.8, 2.5);
        let n = rhs.nonlinearity(&grid(|_| z), &[]).unwrap();
        // N = −g ln(ψ*/ψ)ψ − gψ with ln(ψ*/ψ) = −2i·arg ψ
        let expected = -(Complex::new(0.0, -5.0)) * z - z;
        assert!((n.samples()[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn log_density_local_potential() {
        let b = Bindings::new().with_real("f", 0.7);
        let rhs = compile(&eq("log_density.lag"), &b, &CompileOptions::default()).unwrap();
        assert!(rhs.strang_unavailable().is_none());
        let psi = vec![Complex::new(0.3, 0.4); 4];
        let mut u = Vec::new();
        rhs.local_potential_samples(&psi, &mut u).unwrap();
        let expected = -0.7 * (0.25f64).ln() - 0.7;
        assert!((u[0] - expected).abs() < 1e-12);
    }
}
