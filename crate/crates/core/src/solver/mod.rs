//! Time integration on periodic grids: Strang split-step Fourier for local
//! nonlinearities, classical RK4 method of lines otherwise.

mod grid;
pub mod output;
pub mod snapshot;

use std::io;
use std::time::{Duration, Instant};

use num_complex::Complex;
use thiserror::Error;

use crate::compile::{compile, Bindings, CompileError, CompileOptions, CompiledRhs, Locality};
use crate::dimension::HBAR_SI;
use crate::observables::{norm, ObservableRecord, Observer};
use crate::spectral::Spectral;
use crate::variational::EvolutionEquation;
use crate::Real;

pub use grid::{FieldGrid, GridError};

/// Norm growth factor treated as blow-up.
pub const INSTABILITY_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    StrangSplitStep,
    Rk4SpectralMol,
    Auto,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::StrangSplitStep => "strang",
            Method::Rk4SpectralMol => "rk4",
            Method::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Units {
    /// ħ = m = 1.
    Natural,
    /// SI ħ with the given particle mass in kg.
    Si { mass_kg: f64 },
}

impl Units {
    pub fn hbar_and_mass<T: Real>(self) -> (T, T) {
        match self {
            Units::Natural => (T::one(), T::one()),
            Units::Si { mass_kg } => (T::from_f64_lossy(HBAR_SI), T::from_f64_lossy(mass_kg)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig<T> {
    pub dt: T,
    pub t_final: T,
    pub method: Method,
    pub snapshot_stride: usize,
    pub observable_stride: usize,
    pub units: Units,
    pub epsilon_regularization: T,
}

impl<T: Real> RunConfig<T> {
    pub fn new(dt: T, t_final: T) -> Self {
        RunConfig {
            dt,
            t_final,
            method: Method::Auto,
            snapshot_stride: 1000,
            observable_stride: 100,
            units: Units::Natural,
            epsilon_regularization: T::from_f64_lossy(crate::compile::DEFAULT_EPSILON),
        }
    }

    pub fn method(self, method: Method) -> Self {
        RunConfig { method, ..self }
    }

    pub fn observable_stride(self, observable_stride: usize) -> Self {
        RunConfig {
            observable_stride,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return fail("dt must be positive");
        }
        if !(self.t_final.is_finite() && self.t_final > T::zero()) {
            return fail("t_final must be positive");
        }
        if self.dt > self.t_final {
            return fail("dt must not exceed t_final");
        }
        if self.snapshot_stride == 0 || self.observable_stride == 0 {
            return fail("strides must be at least 1");
        }
        if !(self.epsilon_regularization >= T::zero()) {
            return fail("regularization epsilon must be nonnegative");
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_final`.
    pub fn steps(&self) -> usize {
        let ratio = (self.t_final / self.dt).to_f64().unwrap();
        let n = ratio.round();
        if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
            n as usize
        } else {
            ratio.ceil() as usize
        }
    }

    pub fn compile_options(&self, dim: usize) -> CompileOptions<T> {
        let (hbar, mass) = self.units.hbar_and_mass();
        CompileOptions {
            epsilon: self.epsilon_regularization,
            hbar,
            mass,
            dim,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("split-step integration unavailable: {0}")]
    StrangUnavailable(String),
    #[error("non-finite field at step {step}, node {index}")]
    NonFinite { step: usize, index: usize },
    #[error("instability at step {step} (t = {t}): norm grew from {initial} to {norm}")]
    Unstable { step: usize, t: f64, initial: f64, norm: f64 },
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

/// Receives observables and snapshots in time order.
pub trait RunSink<T: Real> {
    fn observe(&mut self, _record: &ObservableRecord<T>) -> io::Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _index: usize, _t: T, _field: &FieldGrid<T>) -> io::Result<()> {
        Ok(())
    }

    fn finish(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Keeps every record in memory.
#[derive(Clone, Debug, Default)]
pub struct MemorySink<T> {
    pub records: Vec<ObservableRecord<T>>,
    pub snapshots: Vec<(usize, T, FieldGrid<T>)>,
}

impl<T: Real> RunSink<T> for MemorySink<T> {
    fn observe(&mut self, record: &ObservableRecord<T>) -> io::Result<()> {
        self.records.push(record.clone());
        Ok(())
    }

    fn snapshot(&mut self, index: usize, t: T, field: &FieldGrid<T>) -> io::Result<()> {
        self.snapshots.push((index, t, field.clone()));
        Ok(())
    }
}

/// Reusable integrator state for one grid shape.
pub struct Stepper<'a, T: Real> {
    rhs: &'a CompiledRhs<T>,
    spectral: Spectral<T>,
    potential: Vec<T>,
    local: Vec<T>,
    stage: Vec<Complex<T>>,
    acc: Vec<Complex<T>>,
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(rhs: &'a CompiledRhs<T>, field: &FieldGrid<T>, v: &[T]) -> Result<Self, CompileError> {
        if field.dim() != rhs.dim() {
            return Err(CompileError::DimensionMismatch {
                expected: rhs.dim(),
                got: field.dim(),
            });
        }
        if !v.is_empty() && v.len() != field.len() {
            return Err(CompileError::PotentialLength {
                expected: field.len(),
                got: v.len(),
            });
        }
        Ok(Stepper {
            rhs,
            spectral: Spectral::new(field.points(), field.lengths()),
            potential: v.to_vec(),
            local: Vec::with_capacity(field.len()),
            stage: vec![Complex::new(T::zero(), T::zero()); field.len()],
            acc: vec![Complex::new(T::zero(), T::zero()); field.len()],
        })
    }

    fn local_phase(&mut self, psi: &mut [Complex<T>], dt: T) -> Result<(), CompileError> {
        self.rhs.local_potential_samples(psi, &mut self.local)?;
        let hbar = self.rhs.options.hbar;
        let with_v = self.rhs.source_equation.potential_present && !self.potential.is_empty();
        for (j, z) in psi.iter_mut().enumerate() {
            let mut u = self.local[j];
            if with_v {
                u = u + self.potential[j];
            }
            *z = *z * Complex::from_polar(T::one(), -u * dt / hbar);
        }
        Ok(())
    }

    /// Half local phase, full kinetic step, half local phase.
    pub fn strang(&mut self, psi: &mut [Complex<T>], dt: T) -> Result<(), CompileError> {
        let half = dt / (T::one() + T::one());
        self.local_phase(psi, half)?;
        self.spectral
            .kinetic_step(psi, self.rhs.options.hbar, self.rhs.options.mass, dt);
        self.local_phase(psi, half)
    }

    /// `∂ψ/∂t = RHS/(iħ)` into `out`.
    fn derivative(&self, psi: &[Complex<T>], out: &mut [Complex<T>]) -> Result<(), CompileError> {
        let rhs = self.rhs.evaluate_samples(&self.spectral, psi, &self.potential)?;
        let factor = Complex::new(T::zero(), -T::one() / self.rhs.options.hbar);
        for (o, r) in out.iter_mut().zip(rhs) {
            *o = r * factor;
        }
        Ok(())
    }

    pub fn rk4(&mut self, psi: &mut [Complex<T>], dt: T) -> Result<(), CompileError> {
        let two = T::one() + T::one();
        let sixth = dt / T::from_f64_lossy(6.0);
        let mut k = vec![Complex::new(T::zero(), T::zero()); psi.len()];
        let weights = [T::one(), two, two, T::one()];
        let offsets = [dt / two, dt / two, dt, T::zero()];
        self.acc.copy_from_slice(psi);
        self.stage.copy_from_slice(psi);
        for s in 0..4 {
            let stage = std::mem::take(&mut self.stage);
            self.derivative(&stage, &mut k)?;
            self.stage = stage;
            for j in 0..psi.len() {
                self.acc[j] = self.acc[j] + k[j] * (sixth * weights[s]);
                self.stage[j] = psi[j] + k[j] * offsets[s];
            }
        }
        psi.copy_from_slice(&self.acc);
        Ok(())
    }
}

/// One split step. `dt = 0` is the identity.
pub fn step_strang<T: Real>(
    field: &FieldGrid<T>,
    rhs: &CompiledRhs<T>,
    v: &[T],
    dt: T,
) -> Result<FieldGrid<T>, SolverError> {
    if rhs.locality != Locality::PointwiseLocal {
        return Err(SolverError::StrangUnavailable("nonlinearity contains spatial derivatives".into()));
    }
    if let Some(reason) = rhs.strang_unavailable() {
        return Err(SolverError::StrangUnavailable(reason.to_string()));
    }
    let mut out = field.clone();
    if dt == T::zero() {
        return Ok(out);
    }
    Stepper::new(rhs, field, v)?.strang(out.samples_mut(), dt)?;
    finite_or(out, 0)
}

pub fn step_rk4<T: Real>(
    field: &FieldGrid<T>,
    rhs: &CompiledRhs<T>,
    v: &[T],
    dt: T,
) -> Result<FieldGrid<T>, SolverError> {
    let mut out = field.clone();
    Stepper::new(rhs, field, v)?.rk4(out.samples_mut(), dt)?;
    finite_or(out, 0)
}

fn finite_or<T: Real>(field: FieldGrid<T>, step: usize) -> Result<FieldGrid<T>, SolverError> {
    match field.first_non_finite() {
        Some(index) => Err(SolverError::NonFinite { step, index }),
        None => Ok(field),
    }
}

/// Pick the integrator; explicit Strang on an unsuitable equation falls back to RK4.
pub fn resolve_method<T: Real>(requested: Method, rhs: &CompiledRhs<T>) -> (Method, Option<String>) {
    let reason = rhs.strang_unavailable();
    match (requested, reason) {
        (Method::Rk4SpectralMol, _) => (Method::Rk4SpectralMol, None),
        (_, None) => (Method::StrangSplitStep, None),
        (Method::Auto, Some(_)) if rhs.locality == Locality::DerivativeCoupled => (Method::Rk4SpectralMol, None),
        (_, Some(r)) => (
            Method::Rk4SpectralMol,
            Some(format!("falling back to RK4: {r}; norm is not conserved by construction")),
        ),
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary<T> {
    pub final_field: FieldGrid<T>,
    pub t_final: T,
    pub steps: usize,
    pub method: Method,
    pub wall_time: Duration,
    pub initial: ObservableRecord<T>,
    pub last: ObservableRecord<T>,
    /// Relative to the initial value.
    pub max_norm_drift: T,
    /// Relative to `|E₀|`, absolute when `E₀ = 0`.
    pub max_energy_drift: T,
    /// Largest absolute change of any momentum component.
    pub max_momentum_drift: T,
    /// Per-node jumps of `arg ψ` across the branch cut, for phase-logarithm equations.
    pub branch_cut_crossings: u64,
    /// Node-steps where `|ψ|²` was small enough for `ε` to matter.
    pub regularized_nodes: u64,
    pub warnings: Vec<String>,
}

struct Drift<T> {
    initial: ObservableRecord<T>,
    norm: T,
    energy: T,
    momentum: T,
}

impl<T: Real> Drift<T> {
    fn update(&mut self, r: &ObservableRecord<T>) {
        let rel = |now: T, then: T| {
            if then == T::zero() {
                now.abs()
            } else {
                ((now - then) / then).abs()
            }
        };
        self.norm = self.norm.max(rel(r.norm, self.initial.norm));
        let e0 = self.initial.energy.norm();
        let de = (r.energy - self.initial.energy).norm();
        self.energy = self.energy.max(if e0 == T::zero() { de } else { de / e0 });
        for (p, p0) in r.momentum.iter().zip(&self.initial.momentum) {
            self.momentum = self.momentum.max((*p - *p0).abs());
        }
    }
}

pub fn run<T: Real>(
    initial: &FieldGrid<T>,
    eq: &EvolutionEquation,
    bindings: &Bindings<T>,
    v: &[T],
    config: &RunConfig<T>,
    sinks: &mut [&mut dyn RunSink<T>],
) -> Result<RunSummary<T>, SolverError> {
    config.validate()?;
    if let Some(index) = initial.first_non_finite() {
        return Err(SolverError::NonFinite { step: 0, index });
    }
    let rhs = compile(eq, bindings, &config.compile_options(initial.dim()))?;
    run_compiled(initial, &rhs, v, config, sinks)
}

/// [`run`] with an already compiled right-hand side; ħ, m and ε come from `rhs`.
pub fn run_compiled<T: Real>(
    initial: &FieldGrid<T>,
    rhs: &CompiledRhs<T>,
    v: &[T],
    config: &RunConfig<T>,
    sinks: &mut [&mut dyn RunSink<T>],
) -> Result<RunSummary<T>, SolverError> {
    config.validate()?;
    let start = Instant::now();
    let mut warnings = Vec::new();
    if rhs.has_complex_couplings() {
        warnings.push("complex couplings: energy is reported as a complex number".to_string());
    }
    let (method, fallback) = resolve_method(config.method, rhs);
    warnings.extend(fallback);
    for w in &warnings {
        log::warn!("{w}");
    }

    let observer = Observer::new(initial);
    let mut stepper = Stepper::new(rhs, initial, v)?;
    let mut field = initial.clone();
    let first = observer.record(T::zero(), &field, rhs, v)?;
    let mut drift = Drift {
        initial: first.clone(),
        norm: T::zero(),
        energy: T::zero(),
        momentum: T::zero(),
    };
    for s in sinks.iter_mut() {
        s.observe(&first)?;
        s.snapshot(0, T::zero(), &field)?;
    }
    let mut last = first.clone();
    let limit = first.norm * T::from_f64_lossy(INSTABILITY_FACTOR);

    let steps = config.steps();
    let mut snapshots = 1;
    let mut branch_cut_crossings = 0u64;
    let mut regularized_nodes = 0u64;
    let small = rhs.options.epsilon / T::epsilon();
    let mut phases: Vec<T> = Vec::new();
    let pi = T::PI();
    let mut t = T::zero();
    for step in 1..=steps {
        let dt = if step == steps {
            config.t_final - t
        } else {
            config.dt
        };
        if rhs.uses_phase() {
            phases.clear();
            phases.extend(field.samples().iter().map(|z| z.arg()));
        }
        match method {
            Method::StrangSplitStep => stepper.strang(field.samples_mut(), dt),
            _ => stepper.rk4(field.samples_mut(), dt),
        }
        .map_err(|e| match e {
            CompileError::NonFinite { index } => SolverError::NonFinite { step, index },
            other => SolverError::Compile(other),
        })?;
        t = if step == steps {
            config.t_final
        } else {
            T::from_usize(step).unwrap() * config.dt
        };
        if let Some(index) = field.first_non_finite() {
            return Err(SolverError::NonFinite { step, index });
        }
        let n = norm(&field);
        if n > limit {
            return Err(SolverError::Unstable {
                step,
                t: t.to_f64().unwrap(),
                initial: first.norm.to_f64().unwrap(),
                norm: n.to_f64().unwrap(),
            });
        }
        if rhs.uses_phase() {
            branch_cut_crossings += field
                .samples()
                .iter()
                .zip(&phases)
                .filter(|(z, &a)| (z.arg() - a).abs() > pi)
                .count() as u64;
        }
        if rhs.is_singular() {
            regularized_nodes += field.samples().iter().filter(|z| z.norm_sqr() < small).count() as u64;
        }
        if step % config.observable_stride == 0 || step == steps {
            last = observer.record(t, &field, rhs, v)?;
            drift.update(&last);
            for s in sinks.iter_mut() {
                s.observe(&last)?;
            }
        }
        if step % config.snapshot_stride == 0 || step == steps {
            for s in sinks.iter_mut() {
                s.snapshot(snapshots, t, &field)?;
            }
            snapshots += 1;
        }
    }
    for s in sinks.iter_mut() {
        s.finish()?;
    }

    Ok(RunSummary {
        final_field: field,
        t_final: t,
        steps,
        method,
        wall_time: start.elapsed(),
        initial: first,
        last,
        max_norm_drift: drift.norm,
        max_energy_drift: drift.energy,
        max_momentum_drift: drift.momentum,
        branch_cut_crossings,
        regularized_nodes,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::variational::{derive_equation, Corpus};

    fn eq(file: &str) -> EvolutionEquation {
        derive_equation(&parse(Corpus::bundled().get(file).unwrap()).unwrap()).unwrap()
    }

    fn gaussian() -> FieldGrid<f64> {
        FieldGrid::<f64>::from_fn(&[64], &[20.0], |x| Complex::new((-x[0] * x[0]).exp(), 0.0)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::new(0.1, 0.05).validate().is_err());
        assert!(RunConfig::new(0.0, 1.0).validate().is_err());
        assert!(RunConfig::new(0.1, 1.0).validate().is_ok());
        assert_eq!(RunConfig::new(1e-4, 1.0).steps(), 10000);
        assert_eq!(RunConfig::new(0.3, 1.0).steps(), 4);
    }

    #[test]
    fn zero_step_is_identity() {
        let rhs = compile(&eq("gp_m2.lag"), &Bindings::new().with_real("e", 0.5), &CompileOptions::default()).unwrap();
        let g = gaussian();
        assert_eq!(step_strang(&g, &rhs, &[], 0.0).unwrap().max_abs_diff(&g), 0.0);
    }

    #[test]
    fn linear_plane_wave_step() {
        let rhs = compile(&eq("linear.lag"), &Bindings::new(), &CompileOptions::default()).unwrap();
        let k = std::f64::consts::TAU * 4.0 / 20.0;
        let g = FieldGrid::from_fn(&[64], &[20.0], |x| Complex::from_polar(1.0, k * x[0])).unwrap();
        let dt = 0.01;
        let exact = g.map(|z| z * Complex::from_polar(1.0, -k * k * dt / 2.0));
        assert!(step_strang(&g, &rhs, &[], dt).unwrap().max_abs_diff(&exact) < 1e-13);
        assert!(step_rk4(&g, &rhs, &[], dt).unwrap().max_abs_diff(&exact) < 1e-9);
    }

    #[test]
    fn auto_method_follows_locality() {
        let gp = compile(&eq("gp_m2.lag"), &Bindings::new().with_real("e", 0.5), &CompileOptions::default()).unwrap();
        assert_eq!(resolve_method(Method::Auto, &gp), (Method::StrangSplitStep, None));
        let grad = compile(&eq("gradient_coupling.lag"), &Bindings::new().with_real("a", 0.1), &CompileOptions::default()).unwrap();
        assert_eq!(resolve_method(Method::Auto, &grad), (Method::Rk4SpectralMol, None));
        let complex = compile(&eq("gp_m2.lag"), &Bindings::new().with("e", Complex::new(0.5, 0.1)), &CompileOptions::default()).unwrap();
        let (m, warning) = resolve_method(Method::StrangSplitStep, &complex);
        assert_eq!(m, Method::Rk4SpectralMol);
        assert!(warning.unwrap().contains("falling back to RK4"));
    }

    #[test]
    fn blow_up_is_detected() {
        // RK4 far beyond its stability limit for the fastest kinetic mode.
        let cfg = RunConfig::new(0.2, 5.0).method(Method::Rk4SpectralMol);
        let err = run(&gaussian(), &eq("linear.lag"), &Bindings::new(), &[], &cfg, &mut []).unwrap_err();
        assert!(matches!(err, SolverError::Unstable { .. }), "{err}");
    }
}
