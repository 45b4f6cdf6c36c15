//! Dimensional analysis over the (energy, length, time) basis.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::dsl::{pretty_print, superscript};
use crate::symexpr::{canonicalize, rational, rational_int, FieldExpr, FieldSymbol, Rational, Residual};

pub const HBAR_SI: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT_SI: f64 = 299_792_458.0;
pub const ELECTRON_MASS_KG: f64 = 9.109_383_7015e-31;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DimensionVector {
    pub energy: Rational,
    pub length: Rational,
    pub time: Rational,
}

impl DimensionVector {
    pub fn new(energy: Rational, length: Rational, time: Rational) -> Self {
        DimensionVector { energy, length, time }
    }

    pub fn ints(energy: i64, length: i64, time: i64) -> Self {
        Self::new(rational_int(energy), rational_int(length), rational_int(time))
    }

    pub fn dimensionless() -> Self {
        Self::default()
    }

    pub fn energy() -> Self {
        Self::ints(1, 0, 0)
    }

    pub fn length() -> Self {
        Self::ints(0, 1, 0)
    }

    pub fn time() -> Self {
        Self::ints(0, 0, 1)
    }

    /// `[E][L]^-3`.
    pub fn energy_density() -> Self {
        Self::ints(1, -3, 0)
    }

    pub fn is_dimensionless(&self) -> bool {
        self.energy.is_zero() && self.length.is_zero() && self.time.is_zero()
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::new(&self.energy * r, &self.length * r, &self.time * r)
    }
}

impl Add for DimensionVector {
    type Output = DimensionVector;
    fn add(self, o: DimensionVector) -> DimensionVector {
        DimensionVector::new(self.energy + o.energy, self.length + o.length, self.time + o.time)
    }
}

impl Sub for DimensionVector {
    type Output = DimensionVector;
    fn sub(self, o: DimensionVector) -> DimensionVector {
        self + (-o)
    }
}

impl Neg for DimensionVector {
    type Output = DimensionVector;
    fn neg(self) -> DimensionVector {
        DimensionVector::new(-self.energy, -self.length, -self.time)
    }
}

impl Mul<&Rational> for DimensionVector {
    type Output = DimensionVector;
    fn mul(self, r: &Rational) -> DimensionVector {
        self.scale(r)
    }
}

fn exponent_text(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

impl fmt::Display for DimensionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        for (name, r) in [("E", &self.energy), ("L", &self.length), ("T", &self.time)] {
            if r.is_zero() {
                continue;
            }
            write!(f, "[{name}]")?;
            if *r != rational_int(1) {
                write!(f, "^{}", exponent_text(r))?;
            }
        }
        Ok(())
    }
}

/// Dimensions of the field and the named physical quantities.
#[derive(Clone, Debug)]
pub struct DimensionContext {
    pub psi: DimensionVector,
    pub known: BTreeMap<String, DimensionVector>,
}

impl Default for DimensionContext {
    fn default() -> Self {
        let mut known = BTreeMap::new();
        known.insert("hbar".to_string(), DimensionVector::ints(1, 0, 1));
        known.insert("m".to_string(), DimensionVector::ints(1, -2, 2));
        known.insert("V".to_string(), DimensionVector::energy());
        DimensionContext {
            psi: DimensionVector::new(rational_int(0), rational(-3, 2), rational_int(0)),
            known,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DimensionError {
    #[error("inhomogeneous sum: `{first}` has dimension {first_dim} but `{second}` has {second_dim}")]
    Inhomogeneous {
        first: String,
        first_dim: DimensionVector,
        second: String,
        second_dim: DimensionVector,
    },
    #[error("constant `{0}` has no known dimension")]
    Unknown(String),
    #[error("coupling `{0}` does not appear in the Lagrangian")]
    CouplingAbsent(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DimensionWarning {
    /// `ln(x)` with `x` carrying the given dimension; treated as dimensionless.
    DimensionedLogArgument(String, DimensionVector),
}

impl fmt::Display for DimensionWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionWarning::DimensionedLogArgument(arg, d) => {
                write!(f, "logarithm of `{arg}`, which has dimension {d}; treated as dimensionless")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dimensioned {
    pub dimension: DimensionVector,
    pub warnings: Vec<DimensionWarning>,
}

pub fn dimension_of(e: &FieldExpr, ctx: &DimensionContext) -> Result<Dimensioned, DimensionError> {
    let mut warnings = Vec::new();
    let dimension = dim_rec(&canonicalize(e), ctx, &mut warnings)?;
    Ok(Dimensioned { dimension, warnings })
}

fn dim_rec(e: &FieldExpr, ctx: &DimensionContext, w: &mut Vec<DimensionWarning>) -> Result<DimensionVector, DimensionError> {
    let psi = || ctx.psi.clone();
    let inv_len = || DimensionVector::ints(0, -1, 0);
    Ok(match e {
        FieldExpr::Num(_) => DimensionVector::dimensionless(),
        FieldExpr::Sym(s) => match s {
            FieldSymbol::Psi | FieldSymbol::PsiStar => psi(),
            FieldSymbol::PsiDot | FieldSymbol::PsiStarDot => psi() - DimensionVector::time(),
            FieldSymbol::GradPsi(_) | FieldSymbol::GradPsiStar(_) => psi() + inv_len(),
            FieldSymbol::LaplacianPsi | FieldSymbol::LaplacianPsiStar => psi() + inv_len() + inv_len(),
        },
        FieldExpr::Param(p) => ctx
            .known
            .get(p.name())
            .cloned()
            .ok_or_else(|| DimensionError::Unknown(p.name().to_string()))?,
        FieldExpr::DotGrad(..) => psi() + psi() + inv_len() + inv_len(),
        FieldExpr::Residual(Residual::GradDot(inner, _)) => dim_rec(inner, ctx, w)? + psi() + inv_len() + inv_len(),
        FieldExpr::Residual(Residual::Divergence(inner)) => dim_rec(inner, ctx, w)? + inv_len(),
        FieldExpr::Log(arg) => {
            let d = dim_rec(arg, ctx, w)?;
            if !d.is_dimensionless() {
                w.push(DimensionWarning::DimensionedLogArgument(pretty_print(arg), d));
            }
            DimensionVector::dimensionless()
        }
        FieldExpr::Pow(b, r) => dim_rec(b, ctx, w)?.scale(r),
        FieldExpr::Product(fs) => {
            let mut acc = DimensionVector::dimensionless();
            for f in fs {
                acc = acc + dim_rec(f, ctx, w)?;
            }
            acc
        }
        FieldExpr::Sum(ts) => {
            let first = dim_rec(&ts[0], ctx, w)?;
            for t in &ts[1..] {
                let d = dim_rec(t, ctx, w)?;
                if d != first {
                    return Err(DimensionError::Inhomogeneous {
                        first: pretty_print(&ts[0]),
                        first_dim: first,
                        second: pretty_print(t),
                        second_dim: d,
                    });
                }
            }
            first
        }
    })
}

/// Exponent of the coupling in a canonical monomial, and the monomial
/// without it.
fn split_coupling(term: &FieldExpr, name: &str) -> Option<(Rational, FieldExpr)> {
    let factors = match term {
        FieldExpr::Product(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    let mut exponent = Rational::zero();
    let mut rest = Vec::new();
    for f in factors {
        match &f {
            FieldExpr::Param(p) if p.name() == name => exponent += rational_int(1),
            FieldExpr::Pow(b, r) if matches!(b.as_ref(), FieldExpr::Param(p) if p.name() == name) => exponent += r,
            _ => rest.push(f),
        }
    }
    (!exponent.is_zero()).then(|| (exponent, FieldExpr::product(rest)))
}

/// Dimension a coupling must carry so that every Lagrangian term it
/// multiplies is an energy density.
pub fn coupling_dimension(l: &FieldExpr, name: &str, ctx: &DimensionContext) -> Result<DimensionVector, DimensionError> {
    coupling_dimension_with_warnings(l, name, ctx).map(|d| d.dimension)
}

pub fn coupling_dimension_with_warnings(
    l: &FieldExpr,
    name: &str,
    ctx: &DimensionContext,
) -> Result<Dimensioned, DimensionError> {
    let l = canonicalize(l);
    let mut found: Option<(DimensionVector, FieldExpr)> = None;
    let mut warnings = Vec::new();
    for term in l.terms() {
        let Some((exponent, rest)) = split_coupling(&term, name) else {
            continue;
        };
        let rest_dim = dimension_of(&rest, ctx)?;
        warnings.extend(rest_dim.warnings);
        let d = (DimensionVector::energy_density() - rest_dim.dimension).scale(&(rational_int(1) / exponent));
        match &found {
            Some((prev, prev_term)) if *prev != d => {
                return Err(DimensionError::Inhomogeneous {
                    first: pretty_print(prev_term),
                    first_dim: prev.clone(),
                    second: pretty_print(&term),
                    second_dim: d,
                })
            }
            Some(_) => {}
            None => found = Some((d, term)),
        }
    }
    let (dimension, _) = found.ok_or_else(|| DimensionError::CouplingAbsent(name.to_string()))?;
    Ok(Dimensioned { dimension, warnings })
}

/// `ħ^a m^b c^d` with the same dimension as a given vector.
#[derive(Clone, Debug, PartialEq)]
pub struct HbarMcExpansion {
    pub hbar_exp: Rational,
    pub mass_exp: Rational,
    pub c_exp: Rational,
    /// True when `ħ^a m^b c^d` reproduces the target exactly, so the
    /// remaining factor is dimensionless.
    pub dimensionless_residual: bool,
}

impl HbarMcExpansion {
    pub fn to_dimension(&self) -> DimensionVector {
        DimensionVector::ints(1, 0, 1).scale(&self.hbar_exp)
            + DimensionVector::ints(1, -2, 2).scale(&self.mass_exp)
            + DimensionVector::ints(0, 1, -1).scale(&self.c_exp)
    }

    /// SI value of `ħ^a m^b c^d` for the given mass.
    pub fn magnitude_si(&self, mass_kg: f64) -> f64 {
        let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
        HBAR_SI.powf(f(&self.hbar_exp)) * mass_kg.powf(f(&self.mass_exp)) * SPEED_OF_LIGHT_SI.powf(f(&self.c_exp))
    }
}

impl fmt::Display for HbarMcExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (sym, r) in [("ħ", &self.hbar_exp), ("m", &self.mass_exp), ("c", &self.c_exp)] {
            if r.is_zero() {
                continue;
            }
            if r.is_integer() {
                let n = r.to_integer().to_i64().unwrap_or(i64::MAX);
                parts.push(if n == 1 { sym.to_string() } else { format!("{sym}{}", superscript(n)) });
            } else {
                parts.push(format!("{sym}^({}/{})", r.numer(), r.denom()));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Solve `a + b = E`, `−2b + d = L`, `a + 2b − d = T` exactly.
pub fn express_in_hbar_m_c(target: &DimensionVector) -> HbarMcExpansion {
    let (e, l, t) = (&target.energy, &target.length, &target.time);
    let mass_exp = e - l - t;
    let c_exp = l + &mass_exp * rational_int(2);
    let hbar_exp = e - &mass_exp;
    let mut out = HbarMcExpansion {
        hbar_exp,
        mass_exp,
        c_exp,
        dimensionless_residual: false,
    };
    out.dimensionless_residual = out.to_dimension() == *target;
    out
}

/// Size of a coupling `g·ħ^a m^b c^d` compared with the kinetic energy
/// `ħ²/(2mℓ²)` at a length scale ℓ.
#[derive(Clone, Debug, PartialEq)]
pub struct WeaknessReport {
    pub expansion: HbarMcExpansion,
    pub mass_kg: f64,
    pub length_m: f64,
    pub coupling_value: f64,
    /// `g·ħ^a m^b c^d` in SI units.
    pub magnitude: f64,
    pub kinetic_energy: f64,
    /// Coupling times `ℓ^{-p}` for a coupling of dimension `[E][L]^p`.
    pub nonlinear_energy: Option<f64>,
    pub kinetic_to_nonlinear: Option<f64>,
    pub nonlinear_to_kinetic: Option<f64>,
}

pub fn weakness_report(expansion: &HbarMcExpansion, mass_kg: f64, length_m: f64, coupling_value: f64) -> WeaknessReport {
    let dimension = expansion.to_dimension();
    let magnitude = coupling_value * expansion.magnitude_si(mass_kg);
    let kinetic_energy = HBAR_SI * HBAR_SI / (2.0 * mass_kg * length_m * length_m);
    let (nonlinear_energy, nonlinear_to_kinetic) = if dimension.is_dimensionless() {
        (None, Some(coupling_value.abs()))
    } else if dimension.energy == rational_int(1) && dimension.time.is_zero() {
        let p = dimension.length.to_f64().unwrap_or(f64::NAN);
        let e_nl = magnitude.abs() * length_m.powf(-p);
        (Some(e_nl), Some(e_nl / kinetic_energy))
    } else {
        (None, None)
    };
    WeaknessReport {
        expansion: expansion.clone(),
        mass_kg,
        length_m,
        coupling_value,
        magnitude,
        kinetic_energy,
        nonlinear_energy,
        kinetic_to_nonlinear: nonlinear_to_kinetic.map(|r| 1.0 / r),
        nonlinear_to_kinetic,
    }
}

impl fmt::Display for WeaknessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "coupling magnitude {} × {} = {:.6e} (SI, mass {:.6e} kg)",
            self.coupling_value, self.expansion, self.magnitude, self.mass_kg
        )?;
        writeln!(f, "kinetic scale ħ²/(2mℓ²) at ℓ = {:.3e} m: {:.6e} J", self.length_m, self.kinetic_energy)?;
        match (self.nonlinear_energy, self.kinetic_to_nonlinear, self.nonlinear_to_kinetic) {
            (Some(e), Some(k2n), Some(n2k)) => {
                writeln!(f, "nonlinear scale: {e:.6e} J")?;
                writeln!(f, "kinetic-to-nonlinear ratio: {k2n:.6e}")?;
                write!(f, "nonlinear-to-kinetic ratio: {n2k:.6e}")
            }
            (None, Some(k2n), Some(n2k)) => {
                writeln!(f, "dimensionless coupling; kinetic-to-nonlinear ratio: {k2n:.6e}")?;
                write!(f, "nonlinear-to-kinetic ratio: {n2k:.6e}")
            }
            _ => write!(f, "coupling is not an energy times a power of length; no ratio"),
        }
    }
}
