//! Euler-Lagrange operator for Schrödinger-field Lagrangian densities.
//!
//! The equation for ψ is obtained by varying ψ, which yields the equation
//! for ψ*, and conjugating the result. Constants therefore appear
//! conjugated (`a^*`, `e^*`, ...) in derived equations.

mod corpus;
mod errata;
mod reference;

use thiserror::Error;

use crate::dsl::pretty_print;
use crate::symexpr::{
    canonicalize, partial_atom, partial_wrt, spatial_divergence_of_momenta, structural_equal, DomainWarning, Field,
    FieldExpr, FieldSymbol,
};

pub use corpus::{Corpus, CorpusError, LINEAR_LAGRANGIAN};
pub use errata::{errata_for, Erratum, ErratumKind, ERRATA};
pub use reference::{
    reference_rhs, reproduction_table, verify_against_reference, FactorMismatch, ReferenceReport, ReproductionRow, RowStatus,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variation {
    Psi,
    PsiStar,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("no canonical time term: the Lagrangian must contain i*hbar*psi^* * dpsi/dt")]
    NoCanonicalTimeTerm,
    #[error("nonstandard symplectic structure: {0}")]
    NonstandardSymplectic(String),
    #[error("second spatial derivatives in the Lagrangian are not supported")]
    HigherDerivatives,
    #[error("gradient along axis {axis} in a {dim}-dimensional derivation")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("kinetic term is `{0}`, expected -(hbar^2/(2*m))*lap(psi)")]
    KineticMismatch(String),
    #[error("spatial dimension must be at least 1")]
    ZeroDimension,
}

/// Right-hand side of the equation produced by varying one field.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerLagrange {
    /// Varying ψ: the equation reads `-iħ ∂ψ*/∂t = rhs`.
    /// Varying ψ*: the equation reads `iħ ∂ψ/∂t = rhs`.
    pub rhs: FieldExpr,
    /// True if some spatial terms could only be kept as residual nodes.
    pub residual: bool,
    pub warnings: Vec<DomainWarning>,
}

fn time_term() -> FieldExpr {
    FieldExpr::imag_unit() * FieldExpr::hbar() * FieldExpr::psi_star() * FieldExpr::sym(FieldSymbol::PsiDot)
}

fn check_time_structure(l: &FieldExpr) -> Result<(), VariationalError> {
    let p = partial_wrt(l, FieldSymbol::PsiDot).expr;
    if p.is_zero() {
        return Err(VariationalError::NoCanonicalTimeTerm);
    }
    let expected = FieldExpr::imag_unit() * FieldExpr::hbar() * FieldExpr::psi_star();
    if !structural_equal(&p, &expected) {
        return Err(VariationalError::NonstandardSymplectic(format!(
            "dL/d(dpsi/dt) = {}, expected i*hbar*psi^*",
            pretty_print(&p)
        )));
    }
    let q = partial_wrt(l, FieldSymbol::PsiStarDot).expr;
    if !q.is_zero() {
        return Err(VariationalError::NonstandardSymplectic(format!(
            "dL/d(dpsi^*/dt) = {}, expected 0",
            pretty_print(&q)
        )));
    }
    Ok(())
}

fn check_spatial_symbols(l: &FieldExpr, dim: usize) -> Result<(), VariationalError> {
    if dim == 0 {
        return Err(VariationalError::ZeroDimension);
    }
    let mut result = Ok(());
    l.walk(&mut |e| {
        if let FieldExpr::Sym(s) = e {
            if matches!(s, FieldSymbol::LaplacianPsi | FieldSymbol::LaplacianPsiStar) {
                result = Err(VariationalError::HigherDerivatives);
            } else if !s.valid_in(dim) {
                result = Err(VariationalError::AxisOutOfRange {
                    axis: s.axis().map_or(0, |a| a.number()),
                    dim,
                });
            }
        }
        if let FieldExpr::Residual(_) = e {
            result = Err(VariationalError::HigherDerivatives);
        }
    });
    result
}

/// Apply `∂L/∂X − ∂ₜ(∂L/∂Ẋ) − Σᵢ∂ᵢ(∂L/∂(∂ᵢX)) = 0` for `X = vary` in `dim`
/// spatial dimensions and isolate the time derivative.
pub fn euler_lagrange(l: &FieldExpr, vary: Variation, dim: usize) -> Result<EulerLagrange, VariationalError> {
    let l = canonicalize(l);
    check_time_structure(&l)?;
    check_spatial_symbols(&l, dim)?;
    let field = match vary {
        Variation::Psi => Field::Psi,
        Variation::PsiStar => Field::PsiStar,
    };
    let value = partial_wrt(&l, field.value());
    let div = spatial_divergence_of_momenta(&l, field, dim);
    let mut warnings = value.warnings;
    // The time term contributes iħψ̇* (varying ψ) or iħψ̇ inside ∂L/∂ψ*.
    let rhs = match vary {
        Variation::Psi => FieldExpr::sum(vec![-value.expr, div.expr]),
        Variation::PsiStar => {
            let rest = canonicalize(&(value.expr - partial_atom(&time_term(), &FieldExpr::psi_star())));
            FieldExpr::sum(vec![div.expr, -rest])
        }
    };
    let rhs = canonicalize(&rhs);
    if rhs.contains_symbol(FieldSymbol::PsiDot) || rhs.contains_symbol(FieldSymbol::PsiStarDot) {
        return Err(VariationalError::NonstandardSymplectic(
            "time derivatives outside the canonical time term".into(),
        ));
    }
    warnings.dedup();
    Ok(EulerLagrange {
        rhs,
        residual: div.residual,
        warnings,
    })
}

/// Canonical form `iħ ∂ψ/∂t = −(ħ²/2m)∇²ψ + Vψ + N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionEquation {
    /// Coefficient of ∇²ψ free of fields; always `−ħ²/2m`.
    pub kinetic_coefficient: FieldExpr,
    pub potential_present: bool,
    pub nonlinearity: FieldExpr,
    pub raw_form: FieldExpr,
    pub derived_for: Variation,
    pub lagrangian: FieldExpr,
    /// Lagrangian minus the linear Schrödinger-field part.
    pub interaction: FieldExpr,
    /// `−(L − iħψ*ψ̇)`: kinetic plus potential energy density minus the interaction.
    pub hamiltonian_density: FieldExpr,
    pub dim: usize,
    pub residual: bool,
    pub warnings: Vec<DomainWarning>,
}

impl EvolutionEquation {
    pub fn is_linear(&self) -> bool {
        self.nonlinearity.is_zero()
    }

    /// Couplings appearing in the nonlinearity, excluding ħ, m and V.
    pub fn couplings(&self) -> Vec<String> {
        let mut names = self.lagrangian.param_names();
        names.retain(|n| !matches!(n.as_str(), "hbar" | "m" | "V"));
        names
    }
}

pub fn kinetic_coefficient() -> FieldExpr {
    canonicalize(&-(FieldExpr::hbar().powi(2) / (FieldExpr::int(2) * FieldExpr::mass())))
}

/// Linear Schrödinger-field Lagrangian `iħψ*ψ̇ − (ħ²/2m)∇ψ*·∇ψ − Vψ*ψ`.
pub fn linear_lagrangian() -> FieldExpr {
    crate::dsl::parse(LINEAR_LAGRANGIAN).expect("built-in Lagrangian parses")
}

fn is_field_free(e: &FieldExpr) -> bool {
    !e.any(|n| matches!(n, FieldExpr::Sym(_) | FieldExpr::DotGrad(..) | FieldExpr::Residual(_)))
        && !e.contains_param("V")
}

/// Derive the ψ equation in one spatial dimension.
pub fn derive_equation(l: &FieldExpr) -> Result<EvolutionEquation, VariationalError> {
    derive_equation_in(l, 1)
}

pub fn derive_equation_in(l: &FieldExpr, dim: usize) -> Result<EvolutionEquation, VariationalError> {
    let l = canonicalize(l);
    let el = euler_lagrange(&l, Variation::Psi, dim)?;
    let raw = canonicalize(&el.rhs.conjugate());

    let lap_psi = FieldExpr::lap(Field::Psi);
    let lap_coeff = partial_atom(&raw, &lap_psi);
    let field_free: Vec<FieldExpr> = lap_coeff.terms().into_iter().filter(is_field_free).collect();
    let kinetic = canonicalize(&FieldExpr::sum(field_free));
    if kinetic != kinetic_coefficient() {
        return Err(VariationalError::KineticMismatch(pretty_print(&canonicalize(&(kinetic * lap_psi)))));
    }

    let potential_term = canonicalize(&(FieldExpr::potential() * FieldExpr::psi()));
    let potential_present = raw.terms().contains(&potential_term);
    let mut linear_part = vec![kinetic_coefficient() * FieldExpr::lap(Field::Psi)];
    let mut linear_lagrangian_part = vec![
        time_term(),
        kinetic_coefficient() * FieldExpr::dot_grad(Field::PsiStar, Field::Psi),
    ];
    if potential_present {
        linear_part.push(potential_term);
        linear_lagrangian_part.push(-(FieldExpr::potential() * FieldExpr::psi_star() * FieldExpr::psi()));
    }
    let nonlinearity = canonicalize(&(raw.clone() - FieldExpr::sum(linear_part)));
    let interaction = canonicalize(&(l.clone() - FieldExpr::sum(linear_lagrangian_part)));
    let hamiltonian_density = canonicalize(&-(l.clone() - time_term()));

    Ok(EvolutionEquation {
        kinetic_coefficient: kinetic_coefficient(),
        potential_present,
        nonlinearity,
        raw_form: raw,
        derived_for: Variation::Psi,
        lagrangian: l,
        interaction,
        hamiltonian_density,
        dim,
        residual: el.residual,
        warnings: el.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn p(s: &str) -> FieldExpr {
        parse(s).unwrap()
    }

    #[test]
    fn linear_equations() {
        let l = linear_lagrangian();
        let star = euler_lagrange(&l, Variation::Psi, 3).unwrap();
        assert_eq!(star.rhs, p("-(hbar^2/(2*m))*lap(psi*) + V*psi^*"));
        let direct = euler_lagrange(&l, Variation::PsiStar, 3).unwrap();
        assert_eq!(direct.rhs, p("-(hbar^2/(2*m))*lap(psi) + V*psi"));
        let eq = derive_equation(&l).unwrap();
        assert!(eq.is_linear());
        assert!(eq.potential_present);
        assert!(eq.interaction.is_zero());
        assert_eq!(eq.hamiltonian_density, p("(hbar^2/(2*m))*dot(grad(psi*),grad(psi)) + V*psi^* *psi"));
    }

    #[test]
    fn missing_time_term() {
        assert_eq!(derive_equation(&p("a")), Err(VariationalError::NoCanonicalTimeTerm));
        assert_eq!(derive_equation(&p("V*psi*psi^*")), Err(VariationalError::NoCanonicalTimeTerm));
    }

    #[test]
    fn wrong_symplectic_factor() {
        let l = p("2*i*hbar*psi^* * dpsi/dt - (hbar^2/(2*m))*dot(grad(psi*),grad(psi))");
        assert!(matches!(euler_lagrange(&l, Variation::Psi, 1), Err(VariationalError::NonstandardSymplectic(_))));
        let l = p("i*hbar*psi^* * dpsi/dt + psi*dpsi^*/dt");
        assert!(matches!(euler_lagrange(&l, Variation::Psi, 1), Err(VariationalError::NonstandardSymplectic(_))));
    }

    #[test]
    fn gp_from_quartic_density() {
        let l = p(&format!("{LINEAR_LAGRANGIAN} + e*(psi^* *psi)^2"));
        let eq = derive_equation(&l).unwrap();
        assert_eq!(eq.nonlinearity, p("-2*e^* *psi^* *psi*psi"));
        assert_eq!(eq.interaction, p("e*(psi^* *psi)^2"));
    }

    #[test]
    fn missing_potential_is_recorded() {
        let l = p("i*hbar*psi^* * dpsi/dt - (hbar^2/(2*m))*dot(grad(psi*),grad(psi)) + e*(psi^* *psi)^2");
        let eq = derive_equation(&l).unwrap();
        assert!(!eq.potential_present);
        assert_eq!(eq.nonlinearity, p("-2*e^* *psi^* *psi*psi"));
    }

    #[test]
    fn wrong_kinetic_factor() {
        let l = p("i*hbar*psi^* * dpsi/dt - hbar^2*dot(grad(psi*),grad(psi))");
        assert!(matches!(derive_equation(&l), Err(VariationalError::KineticMismatch(_))));
    }

    #[test]
    fn gradient_axis_must_exist() {
        let l = p(&format!("{LINEAR_LAGRANGIAN} + a*grad(psi)[2]*grad(psi*)[2]"));
        assert!(matches!(derive_equation_in(&l, 1), Err(VariationalError::AxisOutOfRange { axis: 2, dim: 1 })));
        assert!(derive_equation_in(&l, 2).is_ok());
    }
}
