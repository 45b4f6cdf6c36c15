//! Immutable symbolic algebra over a complex scalar field and its conjugate.
//!
//! Expressions are plain trees. Builders (`+`, `*`, [`FieldExpr::pow`], ...)
//! produce raw trees; [`canonicalize`] brings them to the normal form that
//! every comparison and derivation works on.

mod canon;
mod diff;
mod eval;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use canon::{canonicalize, structural_equal};
pub use diff::{
    partial_wrt, spatial_divergence_of_momenta, Derivative, Divergence, DomainWarning,
};
pub(crate) use diff::partial_atom;
pub use eval::{evaluate, EvalError, PointValues};
pub(crate) use eval::rational_to;

/// Exact rational number used for exponents and coefficients.
pub type Rational = BigRational;
/// Exact Gaussian-rational coefficient.
pub type Coeff = Complex<Rational>;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn coeff_real(q: Rational) -> Coeff {
    Complex::new(q, Rational::zero())
}

/// One of the two independent variation variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Psi,
    PsiStar,
}

impl Field {
    pub fn conjugate(self) -> Field {
        match self {
            Field::Psi => Field::PsiStar,
            Field::PsiStar => Field::Psi,
        }
    }

    pub fn value(self) -> FieldSymbol {
        match self {
            Field::Psi => FieldSymbol::Psi,
            Field::PsiStar => FieldSymbol::PsiStar,
        }
    }

    pub fn grad(self, axis: Axis) -> FieldSymbol {
        match self {
            Field::Psi => FieldSymbol::GradPsi(axis),
            Field::PsiStar => FieldSymbol::GradPsiStar(axis),
        }
    }

    pub fn laplacian(self) -> FieldSymbol {
        match self {
            Field::Psi => FieldSymbol::LaplacianPsi,
            Field::PsiStar => FieldSymbol::LaplacianPsiStar,
        }
    }

    pub fn time_derivative(self) -> FieldSymbol {
        match self {
            Field::Psi => FieldSymbol::PsiDot,
            Field::PsiStar => FieldSymbol::PsiStarDot,
        }
    }
}

/// Spatial axis, 1-based as in `∂ᵢ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Axis(u8);

impl Axis {
    pub const X: Axis = Axis(1);

    pub fn new(number: usize) -> Option<Axis> {
        (1..=u8::MAX as usize).contains(&number).then(|| Axis(number as u8))
    }

    pub fn number(self) -> usize {
        self.0 as usize
    }

    /// Zero-based index into per-axis arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSymbol {
    Psi,
    PsiStar,
    PsiDot,
    PsiStarDot,
    GradPsi(Axis),
    GradPsiStar(Axis),
    LaplacianPsi,
    LaplacianPsiStar,
}

impl FieldSymbol {
    pub fn conjugate(self) -> FieldSymbol {
        use FieldSymbol::*;
        match self {
            Psi => PsiStar,
            PsiStar => Psi,
            PsiDot => PsiStarDot,
            PsiStarDot => PsiDot,
            GradPsi(a) => GradPsiStar(a),
            GradPsiStar(a) => GradPsi(a),
            LaplacianPsi => LaplacianPsiStar,
            LaplacianPsiStar => LaplacianPsi,
        }
    }

    pub fn field(self) -> Field {
        use FieldSymbol::*;
        match self {
            Psi | PsiDot | GradPsi(_) | LaplacianPsi => Field::Psi,
            PsiStar | PsiStarDot | GradPsiStar(_) | LaplacianPsiStar => Field::PsiStar,
        }
    }

    pub fn axis(self) -> Option<Axis> {
        match self {
            FieldSymbol::GradPsi(a) | FieldSymbol::GradPsiStar(a) => Some(a),
            _ => None,
        }
    }

    /// True for symbols carrying spatial derivatives.
    pub fn is_spatial_derivative(self) -> bool {
        use FieldSymbol::*;
        matches!(
            self,
            GradPsi(_) | GradPsiStar(_) | LaplacianPsi | LaplacianPsiStar
        )
    }

    pub fn is_time_derivative(self) -> bool {
        matches!(self, FieldSymbol::PsiDot | FieldSymbol::PsiStarDot)
    }

    pub fn valid_in(self, dim: usize) -> bool {
        self.axis().map_or(true, |a| a.number() <= dim)
    }
}

/// Named constant. `hbar`, `m` and `V` are real; everything else is a
/// complex coupling whose conjugate is tracked by a flag.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Param {
    name: Arc<str>,
    conjugated: bool,
    real: bool,
}

pub const HBAR: &str = "hbar";
pub const MASS: &str = "m";
pub const POTENTIAL: &str = "V";

impl Param {
    pub fn new(name: &str) -> Param {
        let real = matches!(name, HBAR | MASS | POTENTIAL);
        Param {
            name: Arc::from(name),
            conjugated: false,
            real,
        }
    }

    /// A coupling known to be real; its conjugate is itself.
    pub fn real(name: &str) -> Param {
        Param {
            name: Arc::from(name),
            conjugated: false,
            real: true,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_conjugated(&self) -> bool {
        self.conjugated
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn conjugate(&self) -> Param {
        let mut p = self.clone();
        if !p.real {
            p.conjugated = !p.conjugated;
        }
        p
    }

    /// The potential is the only named quantity that varies in space.
    pub fn is_spatially_varying(&self) -> bool {
        &*self.name == POTENTIAL
    }
}

/// Spatial terms that cannot be written with Laplacians and `DotGrad`
/// nodes. They are kept explicitly and flagged rather than dropped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Residual {
    /// `Σᵢ ∂ᵢ(inner) ∂ᵢX`.
    GradDot(Box<FieldExpr>, Field),
    /// `Σᵢ ∂ᵢ(expr)`, where `expr` is written for the x axis.
    Divergence(Box<FieldExpr>),
}

impl Residual {
    pub fn conjugate(&self) -> Residual {
        match self {
            Residual::GradDot(inner, f) => Residual::GradDot(Box::new(inner.conjugate()), f.conjugate()),
            Residual::Divergence(e) => Residual::Divergence(Box::new(e.conjugate())),
        }
    }
}

/// Symbolic expression tree. Variant order is the primary canonical sort key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldExpr {
    Num(Coeff),
    Sym(FieldSymbol),
    Param(Param),
    /// `Σᵢ ∂ᵢa ∂ᵢb`.
    DotGrad(Field, Field),
    Residual(Residual),
    Log(Box<FieldExpr>),
    Pow(Box<FieldExpr>, Rational),
    Product(Vec<FieldExpr>),
    Sum(Vec<FieldExpr>),
}

impl FieldExpr {
    pub fn zero() -> FieldExpr {
        FieldExpr::Num(Coeff::zero())
    }

    pub fn one() -> FieldExpr {
        FieldExpr::Num(Coeff::one())
    }

    pub fn int(n: i64) -> FieldExpr {
        FieldExpr::Num(coeff_real(rational_int(n)))
    }

    pub fn rational(numer: i64, denom: i64) -> FieldExpr {
        FieldExpr::Num(coeff_real(rational(numer, denom)))
    }

    pub fn num(q: Rational) -> FieldExpr {
        FieldExpr::Num(coeff_real(q))
    }

    pub fn imag_unit() -> FieldExpr {
        FieldExpr::Num(Complex::new(Rational::zero(), Rational::one()))
    }

    pub fn sym(s: FieldSymbol) -> FieldExpr {
        FieldExpr::Sym(s)
    }

    pub fn psi() -> FieldExpr {
        FieldExpr::Sym(FieldSymbol::Psi)
    }

    pub fn psi_star() -> FieldExpr {
        FieldExpr::Sym(FieldSymbol::PsiStar)
    }

    pub fn field(f: Field) -> FieldExpr {
        FieldExpr::Sym(f.value())
    }

    pub fn lap(f: Field) -> FieldExpr {
        FieldExpr::Sym(f.laplacian())
    }

    pub fn param(name: &str) -> FieldExpr {
        FieldExpr::Param(Param::new(name))
    }

    pub fn hbar() -> FieldExpr {
        FieldExpr::param(HBAR)
    }

    pub fn mass() -> FieldExpr {
        FieldExpr::param(MASS)
    }

    pub fn potential() -> FieldExpr {
        FieldExpr::param(POTENTIAL)
    }

    pub fn dot_grad(a: Field, b: Field) -> FieldExpr {
        FieldExpr::DotGrad(a, b)
    }

    pub fn ln(arg: FieldExpr) -> FieldExpr {
        FieldExpr::Log(Box::new(arg))
    }

    pub fn pow(self, exp: Rational) -> FieldExpr {
        FieldExpr::Pow(Box::new(self), exp)
    }

    pub fn powi(self, exp: i64) -> FieldExpr {
        self.pow(rational_int(exp))
    }

    pub fn recip(self) -> FieldExpr {
        self.powi(-1)
    }

    pub fn sum(terms: Vec<FieldExpr>) -> FieldExpr {
        FieldExpr::Sum(terms)
    }

    pub fn product(factors: Vec<FieldExpr>) -> FieldExpr {
        FieldExpr::Product(factors)
    }

    pub fn canonical(&self) -> FieldExpr {
        canonicalize(self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldExpr::Num(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, FieldExpr::Num(c) if c.is_one())
    }

    /// Complex conjugation: constants, symbols and `i` are conjugated.
    pub fn conjugate(&self) -> FieldExpr {
        match self {
            FieldExpr::Num(c) => FieldExpr::Num(c.conj()),
            FieldExpr::Sym(s) => FieldExpr::Sym(s.conjugate()),
            FieldExpr::Param(p) => FieldExpr::Param(p.conjugate()),
            FieldExpr::DotGrad(a, b) => FieldExpr::DotGrad(a.conjugate(), b.conjugate()),
            FieldExpr::Residual(r) => FieldExpr::Residual(r.conjugate()),
            FieldExpr::Log(a) => FieldExpr::Log(Box::new(a.conjugate())),
            FieldExpr::Pow(b, r) => FieldExpr::Pow(Box::new(b.conjugate()), r.clone()),
            FieldExpr::Product(fs) => FieldExpr::Product(fs.iter().map(|f| f.conjugate()).collect()),
            FieldExpr::Sum(ts) => FieldExpr::Sum(ts.iter().map(|t| t.conjugate()).collect()),
        }
    }

    /// Visit every node, parents before children.
    pub fn walk(&self, visit: &mut impl FnMut(&FieldExpr)) {
        visit(self);
        match self {
            FieldExpr::Residual(Residual::GradDot(inner, _)) => inner.walk(visit),
            FieldExpr::Residual(Residual::Divergence(inner)) => inner.walk(visit),
            FieldExpr::Log(a) => a.walk(visit),
            FieldExpr::Pow(b, _) => b.walk(visit),
            FieldExpr::Product(xs) | FieldExpr::Sum(xs) => xs.iter().for_each(|x| x.walk(visit)),
            _ => {}
        }
    }

    pub fn any(&self, pred: impl Fn(&FieldExpr) -> bool) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= pred(e));
        found
    }

    pub fn contains_symbol(&self, s: FieldSymbol) -> bool {
        self.any(|e| matches!(e, FieldExpr::Sym(t) if *t == s))
    }

    pub fn contains_param(&self, name: &str) -> bool {
        self.any(|e| matches!(e, FieldExpr::Param(p) if p.name() == name))
    }

    pub fn has_residual(&self) -> bool {
        self.any(|e| matches!(e, FieldExpr::Residual(_)))
    }

    /// True if any spatial derivative (gradient, Laplacian, `DotGrad`,
    /// residual) occurs.
    pub fn has_spatial_derivatives(&self) -> bool {
        self.any(|e| match e {
            FieldExpr::Sym(s) => s.is_spatial_derivative(),
            FieldExpr::DotGrad(..) | FieldExpr::Residual(_) => true,
            _ => false,
        })
    }

    /// Names of all named constants, sorted and deduplicated.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.walk(&mut |e| {
            if let FieldExpr::Param(p) = e {
                names.push(p.name().to_string());
            }
        });
        names.sort();
        names.dedup();
        names
    }

    /// Replace the named couplings by real-valued ones (`a* → a`).
    pub fn assume_real(&self, names: &[&str]) -> FieldExpr {
        self.map_params(&|p| {
            if names.contains(&p.name()) {
                Param::real(p.name())
            } else {
                p.clone()
            }
        })
    }

    pub(crate) fn map_params(&self, f: &impl Fn(&Param) -> Param) -> FieldExpr {
        match self {
            FieldExpr::Param(p) => FieldExpr::Param(f(p)),
            FieldExpr::Residual(Residual::GradDot(inner, x)) => {
                FieldExpr::Residual(Residual::GradDot(Box::new(inner.map_params(f)), *x))
            }
            FieldExpr::Residual(Residual::Divergence(inner)) => {
                FieldExpr::Residual(Residual::Divergence(Box::new(inner.map_params(f))))
            }
            FieldExpr::Log(a) => FieldExpr::Log(Box::new(a.map_params(f))),
            FieldExpr::Pow(b, r) => FieldExpr::Pow(Box::new(b.map_params(f)), r.clone()),
            FieldExpr::Product(xs) => FieldExpr::Product(xs.iter().map(|x| x.map_params(f)).collect()),
            FieldExpr::Sum(xs) => FieldExpr::Sum(xs.iter().map(|x| x.map_params(f)).collect()),
            other => other.clone(),
        }
    }

    /// Terms of a canonical expression (a non-sum is a single term).
    pub fn terms(&self) -> Vec<FieldExpr> {
        match self {
            FieldExpr::Sum(ts) => ts.clone(),
            e if e.is_zero() => Vec::new(),
            e => vec![e.clone()],
        }
    }

    /// Split a canonical monomial into its numeric coefficient and the rest.
    /// The rest is `1` for a bare number.
    pub fn split_coefficient(&self) -> (Coeff, FieldExpr) {
        match self {
            FieldExpr::Num(c) => (c.clone(), FieldExpr::one()),
            FieldExpr::Product(fs) => match fs.first() {
                Some(FieldExpr::Num(c)) => {
                    let rest: Vec<_> = fs[1..].to_vec();
                    let rest = if rest.len() == 1 {
                        rest.into_iter().next().unwrap()
                    } else {
                        FieldExpr::Product(rest)
                    };
                    (c.clone(), rest)
                }
                _ => (Coeff::one(), self.clone()),
            },
            _ => (Coeff::one(), self.clone()),
        }
    }

    /// Phase weight under `ψ → e^{iθ}ψ`: `ψ` counts +1, `ψ*` counts −1.
    /// `None` when the expression is not a pure phase eigenfunction
    /// (mixed weights in a sum, a logarithm of a non-invariant argument,
    /// or a non-integer power of a non-invariant base).
    pub fn phase_weight(&self) -> Option<Rational> {
        match self {
            FieldExpr::Num(_) | FieldExpr::Param(_) => Some(Rational::zero()),
            FieldExpr::Sym(s) => Some(match s.field() {
                Field::Psi => rational_int(1),
                Field::PsiStar => rational_int(-1),
            }),
            FieldExpr::DotGrad(a, b) => {
                Some(FieldExpr::field(*a).phase_weight()? + FieldExpr::field(*b).phase_weight()?)
            }
            FieldExpr::Residual(Residual::GradDot(inner, x)) => {
                Some(inner.phase_weight()? + FieldExpr::field(*x).phase_weight()?)
            }
            FieldExpr::Residual(Residual::Divergence(inner)) => inner.phase_weight(),
            FieldExpr::Log(a) => a.phase_weight().filter(|w| w.is_zero()),
            FieldExpr::Pow(b, r) => {
                let w = b.phase_weight()?;
                if w.is_zero() || r.is_integer() {
                    Some(w * r)
                } else {
                    None
                }
            }
            FieldExpr::Product(fs) => fs.iter().try_fold(Rational::zero(), |acc, f| Some(acc + f.phase_weight()?)),
            FieldExpr::Sum(ts) => {
                let mut weights = ts.iter().map(|t| t.phase_weight());
                let first = weights.next()??;
                for w in weights {
                    if w? != first {
                        return None;
                    }
                }
                Some(first)
            }
        }
    }

    pub(crate) fn kind_rank(&self) -> u8 {
        match self {
            FieldExpr::Num(_) => 0,
            FieldExpr::Sym(_) => 1,
            FieldExpr::Param(_) => 2,
            FieldExpr::DotGrad(..) => 3,
            FieldExpr::Residual(_) => 4,
            FieldExpr::Log(_) => 5,
            FieldExpr::Pow(..) => 6,
            FieldExpr::Product(_) => 7,
            FieldExpr::Sum(_) => 8,
        }
    }
}

fn cmp_coeff(a: &Coeff, b: &Coeff) -> Ordering {
    a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
}

impl Ord for Residual {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Residual::GradDot(a, f), Residual::GradDot(b, g)) => a.cmp(b).then(f.cmp(g)),
            (Residual::Divergence(a), Residual::Divergence(b)) => a.cmp(b),
            (Residual::GradDot(..), Residual::Divergence(_)) => Ordering::Less,
            (Residual::Divergence(_), Residual::GradDot(..)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Residual {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldExpr {
    fn cmp(&self, other: &Self) -> Ordering {
        use FieldExpr::*;
        match (self, other) {
            (Num(a), Num(b)) => cmp_coeff(a, b),
            (Sym(a), Sym(b)) => a.cmp(b),
            (Param(a), Param(b)) => a.cmp(b),
            (DotGrad(a1, b1), DotGrad(a2, b2)) => (a1, b1).cmp(&(a2, b2)),
            (Residual(a), Residual(b)) => a.cmp(b),
            (Log(a), Log(b)) => a.cmp(b),
            (Pow(b1, r1), Pow(b2, r2)) => b1.cmp(b2).then_with(|| r1.cmp(r2)),
            (Product(a), Product(b)) | (Sum(a), Sum(b)) => a.cmp(b),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl PartialOrd for FieldExpr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for FieldExpr {
    type Output = FieldExpr;
    fn add(self, rhs: FieldExpr) -> FieldExpr {
        FieldExpr::Sum(vec![self, rhs])
    }
}

impl Sub for FieldExpr {
    type Output = FieldExpr;
    fn sub(self, rhs: FieldExpr) -> FieldExpr {
        FieldExpr::Sum(vec![self, -rhs])
    }
}

impl Mul for FieldExpr {
    type Output = FieldExpr;
    fn mul(self, rhs: FieldExpr) -> FieldExpr {
        FieldExpr::Product(vec![self, rhs])
    }
}

impl Div for FieldExpr {
    type Output = FieldExpr;
    fn div(self, rhs: FieldExpr) -> FieldExpr {
        FieldExpr::Product(vec![self, rhs.recip()])
    }
}

impl Neg for FieldExpr {
    type Output = FieldExpr;
    fn neg(self) -> FieldExpr {
        FieldExpr::Product(vec![FieldExpr::int(-1), self])
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::pretty_print(self))
    }
}

pub(crate) fn is_negative_real(c: &Coeff) -> bool {
    c.im.is_zero() && c.re.is_negative()
}
