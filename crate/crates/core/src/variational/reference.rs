use std::collections::BTreeMap;
use std::fmt;

use super::corpus::Corpus;
use super::errata::{errata_for, ErratumKind};
use super::{derive_equation_in, euler_lagrange, EvolutionEquation, Variation};
use crate::dimension::{coupling_dimension, express_in_hbar_m_c, DimensionContext};
use crate::dsl::{parse, pretty_print};
use crate::symexpr::{canonicalize, rational_int, Coeff, FieldExpr};

#[derive(Clone, Debug, PartialEq)]
pub struct FactorMismatch {
    /// Monomial without its numeric coefficient.
    pub term: FieldExpr,
    pub derived: Coeff,
    pub reference: Coeff,
}

/// Term-by-term comparison of a derived right-hand side with a reference.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ReferenceReport {
    pub matched: Vec<FieldExpr>,
    /// In the reference but not derived.
    pub missing: Vec<FieldExpr>,
    /// Derived but absent from the reference.
    pub extra: Vec<FieldExpr>,
    pub factor_mismatches: Vec<FactorMismatch>,
}

impl ReferenceReport {
    pub fn is_exact(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.factor_mismatches.is_empty()
    }
}

impl fmt::Display for ReferenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} matched", self.matched.len())?;
        for m in &self.missing {
            write!(f, "; missing `{}`", pretty_print(m))?;
        }
        for e in &self.extra {
            write!(f, "; extra `{}`", pretty_print(e))?;
        }
        for m in &self.factor_mismatches {
            write!(
                f,
                "; `{}` has factor {} (reference {})",
                pretty_print(&m.term),
                pretty_print(&FieldExpr::Num(m.derived.clone())),
                pretty_print(&FieldExpr::Num(m.reference.clone()))
            )?;
        }
        Ok(())
    }
}

fn by_monomial(e: &FieldExpr) -> BTreeMap<FieldExpr, Coeff> {
    canonicalize(e)
        .terms()
        .into_iter()
        .map(|t| {
            let (c, rest) = t.split_coefficient();
            (rest, c)
        })
        .collect()
}

fn compare(derived: &FieldExpr, reference: &FieldExpr) -> ReferenceReport {
    let d = by_monomial(derived);
    let r = by_monomial(reference);
    let mut report = ReferenceReport::default();
    for (term, dc) in &d {
        match r.get(term) {
            Some(rc) if rc == dc => report.matched.push(term.clone()),
            Some(rc) => report.factor_mismatches.push(FactorMismatch {
                term: term.clone(),
                derived: dc.clone(),
                reference: rc.clone(),
            }),
            None => report.extra.push(attach(dc, term)),
        }
    }
    for (term, rc) in &r {
        if !d.contains_key(term) {
            report.missing.push(attach(rc, term));
        }
    }
    report
}

fn attach(c: &Coeff, term: &FieldExpr) -> FieldExpr {
    canonicalize(&(FieldExpr::Num(c.clone()) * term.clone()))
}

/// Compare the full right-hand side of `eq` with a hand-entered reference.
pub fn verify_against_reference(eq: &EvolutionEquation, reference: &FieldExpr) -> ReferenceReport {
    compare(&eq.raw_form, reference)
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Exact,
    /// Matches once a registered erratum is taken into account.
    Erratum(&'static str),
    Fail(String),
}

impl RowStatus {
    pub fn is_fail(&self) -> bool {
        matches!(self, RowStatus::Fail(_))
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowStatus::Exact => f.write_str("exact"),
            RowStatus::Erratum(note) => f.write_str(note),
            RowStatus::Fail(why) => write!(f, "FAIL: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproductionRow {
    pub equation: &'static str,
    pub source: &'static str,
    pub status: RowStatus,
    pub note: Option<&'static str>,
}

enum Target {
    /// Equation for ψ* obtained by varying ψ.
    ConjugateField,
    Equation { dim: usize },
    CouplingDimension { coupling: &'static str, expected: [i64; 3] },
}

struct RowSpec {
    equation: &'static str,
    source: &'static str,
    target: Target,
    /// Nonlinear part of the right-hand side as printed, in DSL syntax.
    reference: &'static str,
}

const LINEAR_RHS: &str = "-(hbar^2/(2*m))*lap(psi) + V*psi";

const ROWS: &[RowSpec] = &[
    RowSpec {
        equation: "(10)",
        source: "linear.lag",
        target: Target::ConjugateField,
        reference: "-(hbar^2/(2*m))*lap(psi*) + V*psi^*",
    },
    RowSpec {
        equation: "(11)",
        source: "linear.lag",
        target: Target::Equation { dim: 3 },
        reference: "0",
    },
    RowSpec {
        equation: "(17)",
        source: "gradient_coupling.lag",
        target: Target::Equation { dim: 3 },
        reference: "- a^* *dot(grad(psi*),grad(psi))*psi + a^* *dot(grad(psi^* *psi),grad(psi)) + a^* *(psi^* *psi)*lap(psi)",
    },
    RowSpec {
        equation: "(23)",
        source: "gradient_quartic.lag",
        target: Target::Equation { dim: 1 },
        reference: "4*b^* *lap(psi)*dot(grad(psi),grad(psi*)) + 2*b^* *dot(grad(psi),grad(psi))*lap(psi*)",
    },
    RowSpec {
        equation: "(29)",
        source: "log_power_m2.lag",
        target: Target::Equation { dim: 3 },
        reference: "- c^* *2*psi/(psi^* *psi)",
    },
    RowSpec {
        equation: "(35)",
        source: "root_n3.lag",
        target: Target::Equation { dim: 3 },
        reference: "- (1/3)*d^* *(psi^* *psi)^(-2/3)*psi",
    },
    RowSpec {
        equation: "(41)",
        source: "power_m4.lag",
        target: Target::Equation { dim: 3 },
        reference: "- e^* *4*(psi^* *psi)^3*psi",
    },
    RowSpec {
        equation: "(46)",
        source: "log_density.lag",
        target: Target::Equation { dim: 3 },
        reference: "- f^* *ln(psi^* *psi)*psi + f^* *psi",
    },
    RowSpec {
        equation: "(51)",
        source: "phase_log.lag",
        target: Target::Equation { dim: 3 },
        reference: "- g^* *conj(ln(psi/psi^*))*psi - g^* *psi",
    },
    RowSpec {
        equation: "(55)",
        source: "gp_m2.lag",
        target: Target::Equation { dim: 3 },
        reference: "- 2*e^* *(psi^* *psi)*psi",
    },
    RowSpec {
        equation: "(59)",
        source: "quintic_m3.lag",
        target: Target::Equation { dim: 3 },
        reference: "- 3*e^* *(psi^* *psi)^2*psi",
    },
    RowSpec {
        equation: "(57)",
        source: "gp_m2.lag",
        target: Target::CouplingDimension {
            coupling: "e",
            expected: [3, -2, -1],
        },
        reference: "",
    },
    RowSpec {
        equation: "(61)",
        source: "quintic_m3.lag",
        target: Target::CouplingDimension {
            coupling: "e",
            expected: [6, -5, -4],
        },
        reference: "",
    },
];

/// Reference right-hand side for an equation label, in DSL syntax.
pub fn reference_rhs(equation: &str) -> Option<String> {
    let row = ROWS.iter().find(|r| r.equation == equation)?;
    match row.target {
        Target::ConjugateField => Some(row.reference.to_string()),
        Target::Equation { .. } => Some(format!("{LINEAR_RHS} + ({})", row.reference)),
        Target::CouplingDimension { .. } => None,
    }
}

/// Derive every reference equation from `corpus` and classify the outcome.
pub fn reproduction_table(corpus: &Corpus) -> Vec<ReproductionRow> {
    ROWS.iter()
        .map(|spec| {
            let trailing = errata_for(spec.equation)
                .find(|e| e.kind == ErratumKind::TrailingEqualsZero)
                .map(|e| e.note);
            ReproductionRow {
                equation: spec.equation,
                source: spec.source,
                status: evaluate_row(spec, corpus).unwrap_or_else(RowStatus::Fail),
                note: trailing,
            }
        })
        .collect()
}

fn evaluate_row(spec: &RowSpec, corpus: &Corpus) -> Result<RowStatus, String> {
    let text = corpus.get(spec.source).ok_or_else(|| format!("{} not in corpus", spec.source))?;
    let lagrangian = parse(text).map_err(|d| format!("{}: {}", spec.source, d[0]))?;
    match spec.target {
        Target::CouplingDimension { coupling, expected } => {
            let ctx = DimensionContext::default();
            let dim = coupling_dimension(&lagrangian, coupling, &ctx).map_err(|e| e.to_string())?;
            let exp = express_in_hbar_m_c(&dim);
            let got = [exp.hbar_exp.clone(), exp.mass_exp.clone(), exp.c_exp.clone()];
            if got.iter().zip(expected).all(|(g, e)| *g == rational_int(e)) && exp.dimensionless_residual {
                Ok(RowStatus::Exact)
            } else {
                Err(format!("coupling dimension {dim} expands to {exp}"))
            }
        }
        Target::ConjugateField => {
            let el = euler_lagrange(&lagrangian, Variation::Psi, 3).map_err(|e| e.to_string())?;
            let reference = parse(spec.reference).map_err(|d| d[0].to_string())?;
            let report = compare(&el.rhs, &reference);
            if report.is_exact() {
                Ok(RowStatus::Exact)
            } else {
                Err(report.to_string())
            }
        }
        Target::Equation { dim } => {
            let eq = derive_equation_in(&lagrangian, dim).map_err(|e| e.to_string())?;
            let reference_text = reference_rhs(spec.equation).unwrap();
            let reference = parse(&reference_text).map_err(|d| d[0].to_string())?;
            let report = verify_against_reference(&eq, &reference);
            classify(spec, &lagrangian, &eq, &report)
        }
    }
}

fn classify(
    spec: &RowSpec,
    lagrangian: &FieldExpr,
    eq: &EvolutionEquation,
    report: &ReferenceReport,
) -> Result<RowStatus, String> {
    if eq.residual {
        return Err("derivation left residual terms".into());
    }
    for erratum in errata_for(spec.equation) {
        match erratum.kind {
            ErratumKind::ConstantTermSign => {
                let term = parse(erratum.term.unwrap()).map_err(|d| d[0].to_string())?;
                let (_, key) = term.split_coefficient();
                let explained = report.missing.is_empty()
                    && report.extra.is_empty()
                    && report.factor_mismatches.len() == 1
                    && report.factor_mismatches[0].term == key
                    && report.factor_mismatches[0].derived == -report.factor_mismatches[0].reference.clone();
                if explained {
                    return Ok(RowStatus::Erratum(erratum.note));
                }
            }
            ErratumKind::OneDimensionalOnly if report.is_exact() => {
                let higher = derive_equation_in(lagrangian, 2).map_err(|e| e.to_string())?;
                if higher.residual {
                    return Ok(RowStatus::Erratum(erratum.note));
                }
            }
            _ => {}
        }
    }
    if report.is_exact() {
        Ok(RowStatus::Exact)
    } else {
        Err(report.to_string())
    }
}
