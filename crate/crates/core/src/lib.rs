//! Symbolic derivation and numerical integration of nonlinear Schrödinger
//! equations obtained from Lagrangian densities.
//!
//! The symbolic half ([`symexpr`], [`dsl`], [`variational`], [`dimension`])
//! works with exact rationals. The numeric half ([`compile`], [`solver`],
//! [`observables`]) is generic over the floating-point type through [`Real`];
//! the `f64` aliases below are what the CLI uses.

pub mod compile;
pub mod dimension;
pub mod dsl;
pub mod observables;
pub mod solver;
pub mod spectral;
pub mod symexpr;
pub mod variational;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use compile::{compile, CompileError, CompileOptions, CompiledRhs, Locality};
pub use dsl::{parse, pretty_print, ParseDiagnostic, Severity, SourceSpan};
pub use solver::FieldGrid;
pub use symexpr::{canonicalize, structural_equal, FieldExpr, FieldSymbol};
pub use variational::{derive_equation, EvolutionEquation};

/// Floating-point scalar usable by the compiled right-hand side, the
/// spectral operators and the integrators.
pub trait Real:
    Float + FloatConst + FromPrimitive + rustfft::FftNum + Display + Debug + Send + Sync + 'static
{
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("representable value")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + rustfft::FftNum + Display + Debug + Send + Sync + 'static
{
}

pub type Complex64 = num_complex::Complex<f64>;
pub type Complex32 = num_complex::Complex<f32>;

pub type Grid = solver::FieldGrid<f64>;
pub type GridF32 = solver::FieldGrid<f32>;
pub type Rhs = compile::CompiledRhs<f64>;
pub type RhsF32 = compile::CompiledRhs<f32>;
pub type Bindings = compile::Bindings<f64>;
pub type Observables = observables::ObservableRecord<f64>;
