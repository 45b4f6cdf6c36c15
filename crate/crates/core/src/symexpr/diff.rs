//! Partial derivatives with respect to field symbols, and the symbolic
//! spatial divergence `Σᵢ ∂ᵢ(∂e/∂(∂ᵢX))` needed by the Euler-Lagrange operator.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use super::{canonicalize, Axis, Field, FieldExpr, FieldSymbol, Rational, Residual};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainWarning {
    /// Logarithm of an argument that is neither `(ψ*ψ)^r` nor `ψ/ψ*`.
    LogArgumentNotPositive(FieldExpr),
    /// A residual node was differentiated; its contribution is dropped.
    OpaqueResidual(FieldExpr),
}

impl fmt::Display for DomainWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainWarning::LogArgumentNotPositive(arg) => {
                write!(f, "logarithm argument `{arg}` is not positive by construction")
            }
            DomainWarning::OpaqueResidual(e) => {
                write!(f, "residual term `{e}` treated as constant under differentiation")
            }
        }
    }
}

/// Result of [`partial_wrt`]: the canonical derivative plus domain warnings.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivative {
    pub expr: FieldExpr,
    pub warnings: Vec<DomainWarning>,
}

#[derive(Clone, Copy)]
enum Var<'a> {
    /// Field symbol; `DotGrad` nodes are functions of the gradient components.
    Symbol(FieldSymbol),
    /// Any leaf treated as an independent variable (`DotGrad` included).
    Atom(&'a FieldExpr),
}

/// `∂e/∂s` with every other field symbol held fixed (ψ and ψ* independent).
pub fn partial_wrt(e: &FieldExpr, s: FieldSymbol) -> Derivative {
    let mut warnings = Vec::new();
    let raw = derive(e, Var::Symbol(s), &mut warnings);
    warnings.dedup();
    Derivative {
        expr: canonicalize(&raw),
        warnings,
    }
}

/// Derivative with respect to a leaf node treated as opaque.
pub(crate) fn partial_atom(e: &FieldExpr, atom: &FieldExpr) -> FieldExpr {
    let mut warnings = Vec::new();
    canonicalize(&derive(e, Var::Atom(atom), &mut warnings))
}

fn indicator(b: bool) -> FieldExpr {
    if b {
        FieldExpr::one()
    } else {
        FieldExpr::zero()
    }
}

fn derive(e: &FieldExpr, var: Var<'_>, warnings: &mut Vec<DomainWarning>) -> FieldExpr {
    match e {
        FieldExpr::Num(_) => FieldExpr::zero(),
        FieldExpr::Sym(s) => match var {
            Var::Symbol(t) => indicator(*s == t),
            Var::Atom(a) => indicator(a == e),
        },
        FieldExpr::Param(_) => match var {
            Var::Atom(a) => indicator(a == e),
            Var::Symbol(_) => FieldExpr::zero(),
        },
        FieldExpr::DotGrad(a, b) => match var {
            Var::Atom(x) => indicator(x == e),
            Var::Symbol(s) => match s.axis() {
                Some(axis) => {
                    let mut terms = Vec::new();
                    if a.grad(axis) == s {
                        terms.push(FieldExpr::sym(b.grad(axis)));
                    }
                    if b.grad(axis) == s {
                        terms.push(FieldExpr::sym(a.grad(axis)));
                    }
                    FieldExpr::sum(terms)
                }
                None => FieldExpr::zero(),
            },
        },
        FieldExpr::Residual(_) => match var {
            Var::Atom(x) => indicator(x == e),
            Var::Symbol(s) if s.is_spatial_derivative() => {
                warnings.push(DomainWarning::OpaqueResidual(e.clone()));
                FieldExpr::zero()
            }
            Var::Symbol(_) => {
                if e.any(|n| matches!(n, FieldExpr::Sym(_) | FieldExpr::DotGrad(..))) {
                    warnings.push(DomainWarning::OpaqueResidual(e.clone()));
                }
                FieldExpr::zero()
            }
        },
        FieldExpr::Log(arg) => {
            let d = derive(arg, var, warnings);
            if d.is_zero() {
                return d;
            }
            let canon_arg = canonicalize(arg);
            if !log_argument_is_positive(&canon_arg) {
                warnings.push(DomainWarning::LogArgumentNotPositive(canon_arg));
            }
            FieldExpr::product(vec![(**arg).clone().recip(), d])
        }
        FieldExpr::Pow(base, r) => {
            let d = derive(base, var, warnings);
            if d.is_zero() {
                return d;
            }
            FieldExpr::product(vec![
                FieldExpr::num(r.clone()),
                (**base).clone().pow(r - Rational::one()),
                d,
            ])
        }
        FieldExpr::Product(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let d = derive(f, var, warnings);
                if d.is_zero() {
                    continue;
                }
                let mut factors: Vec<FieldExpr> = fs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, g)| g.clone())
                    .collect();
                factors.push(d);
                terms.push(FieldExpr::product(factors));
            }
            if terms.is_empty() {
                FieldExpr::zero()
            } else {
                FieldExpr::sum(terms)
            }
        }
        FieldExpr::Sum(ts) => {
            let terms: Vec<_> = ts
                .iter()
                .map(|t| derive(t, var, warnings))
                .filter(|d| !d.is_zero())
                .collect();
            if terms.is_empty() {
                FieldExpr::zero()
            } else {
                FieldExpr::sum(terms)
            }
        }
    }
}

/// Exponents of ψ and ψ* in a canonical monomial made only of those two
/// fields and a positive rational coefficient.
fn density_exponents(e: &FieldExpr) -> Option<(Rational, Rational)> {
    let (c, rest) = e.split_coefficient();
    if !c.im.is_zero() || c.re <= Rational::zero() {
        return None;
    }
    let factors = match rest {
        FieldExpr::Product(fs) => fs,
        other => vec![other],
    };
    let (mut p, mut q) = (Rational::zero(), Rational::zero());
    for f in factors {
        match f {
            FieldExpr::Sym(FieldSymbol::Psi) => p += Rational::one(),
            FieldExpr::Sym(FieldSymbol::PsiStar) => q += Rational::one(),
            FieldExpr::Pow(b, r) => match *b {
                FieldExpr::Sym(FieldSymbol::Psi) => p += r,
                FieldExpr::Sym(FieldSymbol::PsiStar) => q += r,
                ref base => {
                    let (bp, bq) = density_exponents(base)?;
                    p += bp * r.clone();
                    q += bq * r;
                }
            },
            _ => return None,
        }
    }
    Some((p, q))
}

/// `(ψ*ψ)^r` (positive by construction) or `ψ/ψ*` and its inverse.
pub(crate) fn log_argument_is_positive(arg: &FieldExpr) -> bool {
    match density_exponents(arg) {
        Some((p, q)) => {
            (p == q && !p.is_zero()) || (p == -q.clone() && (p.is_one() || q.is_one()))
        }
        None => false,
    }
}

/// Result of [`spatial_divergence_of_momenta`].
#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    pub expr: FieldExpr,
    /// Set when terms outside the Laplacian/`DotGrad` vocabulary were kept
    /// as [`Residual`] nodes.
    pub residual: bool,
}

/// `Σᵢ ∂ᵢ[∂e/∂(∂ᵢF)]` for the gradient family of `family`, expanded with
/// the product and chain rules. `dim` is the number of spatial axes; in one
/// dimension every Hessian contraction reduces to Laplacian × `DotGrad`.
pub fn spatial_divergence_of_momenta(e: &FieldExpr, family: Field, dim: usize) -> Divergence {
    let e = canonicalize(e);
    let momentum = partial_wrt(&e, family.grad(Axis::X)).expr;
    if momentum.is_zero() {
        return Divergence {
            expr: FieldExpr::zero(),
            residual: false,
        };
    }
    let mut residual = false;
    // Momentum written as Σ_X c_X ∂ₓX with c_X free of bare components.
    let mut coefficients = Vec::new();
    let mut reassembled = Vec::new();
    let mut regular = true;
    for x in [Field::Psi, Field::PsiStar] {
        let component = FieldExpr::sym(x.grad(Axis::X));
        let c = partial_atom(&momentum, &component);
        if c.is_zero() {
            continue;
        }
        if has_bare_components(&c) {
            regular = false;
        }
        reassembled.push(c.clone() * component);
        coefficients.push((x, c));
    }
    let remainder = canonicalize(&(momentum.clone() - FieldExpr::sum(reassembled)));
    if !remainder.is_zero() {
        regular = false;
    }
    if !regular {
        return Divergence {
            expr: FieldExpr::Residual(Residual::Divergence(Box::new(momentum))),
            residual: true,
        };
    }
    let mut terms = Vec::new();
    for (x, c) in coefficients {
        terms.push(grad_dot(&c, x, dim, &mut residual));
        terms.push(c * FieldExpr::lap(x));
    }
    Divergence {
        expr: canonicalize(&FieldExpr::sum(terms)),
        residual,
    }
}

fn has_bare_components(e: &FieldExpr) -> bool {
    e.any(|n| matches!(n, FieldExpr::Sym(s) if s.axis().is_some()))
}

fn collect_atoms(e: &FieldExpr) -> BTreeSet<FieldExpr> {
    let mut atoms = BTreeSet::new();
    e.walk(&mut |n| match n {
        FieldExpr::Sym(_) | FieldExpr::DotGrad(..) | FieldExpr::Residual(_) => {
            atoms.insert(n.clone());
        }
        FieldExpr::Param(p) if p.is_spatially_varying() => {
            atoms.insert(n.clone());
        }
        _ => {}
    });
    // Atoms nested inside residuals are covered by the residual itself.
    atoms
}

/// `∇c · ∇X` by the chain rule over the atoms of `c`.
fn grad_dot(c: &FieldExpr, x: Field, dim: usize, residual: &mut bool) -> FieldExpr {
    let mut terms = Vec::new();
    for atom in collect_atoms(c) {
        let dc = partial_atom(c, &atom);
        if dc.is_zero() {
            continue;
        }
        terms.push(dc * atom_grad_dot(&atom, x, dim, residual));
    }
    FieldExpr::sum(terms)
}

fn atom_grad_dot(atom: &FieldExpr, x: Field, dim: usize, residual: &mut bool) -> FieldExpr {
    match atom {
        FieldExpr::Sym(FieldSymbol::Psi) => FieldExpr::dot_grad(Field::Psi, x),
        FieldExpr::Sym(FieldSymbol::PsiStar) => FieldExpr::dot_grad(Field::PsiStar, x),
        FieldExpr::Sym(s @ (FieldSymbol::GradPsi(_) | FieldSymbol::GradPsiStar(_))) if dim == 1 => {
            FieldExpr::lap(s.field()) * FieldExpr::sym(x.grad(Axis::X))
        }
        FieldExpr::DotGrad(a, b) if dim == 1 => {
            FieldExpr::lap(*a) * FieldExpr::dot_grad(*b, x)
                + FieldExpr::lap(*b) * FieldExpr::dot_grad(*a, x)
        }
        other => {
            *residual = true;
            FieldExpr::Residual(Residual::GradDot(Box::new(other.clone()), x))
        }
    }
}
