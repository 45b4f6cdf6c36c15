//! `nlse`: derive evolution equations from Lagrangian densities, analyse
//! coupling dimensions, integrate the equations and re-check the reference
//! derivations.

mod jobspec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use nlse_core::dimension::{
    coupling_dimension_with_warnings, express_in_hbar_m_c, weakness_report, DimensionContext, ELECTRON_MASS_KG,
};
use nlse_core::dsl::pretty_unicode;
use nlse_core::observables::width;
use nlse_core::solver::output::{CsvSink, SnapshotSink};
use nlse_core::solver::snapshot::read_snapshot;
use nlse_core::solver::{resolve_method, run_compiled, RunSummary, Units};
use nlse_core::variational::{derive_equation_in, reproduction_table, Corpus};
use nlse_core::{compile, parse, pretty_print, structural_equal, Bindings, Complex64, EvolutionEquation, FieldExpr, Grid};

use jobspec::{InitialCondition, JobSpec, Potential};

#[derive(Parser)]
#[command(name = "nlse", version, about = "Nonlinear Schrödinger equations from Lagrangian densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive and print the evolution equation of a Lagrangian file.
    Derive {
        file: PathBuf,
        /// Number of spatial dimensions.
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Dimension of a coupling and its size against the kinetic energy.
    Dimension {
        file: PathBuf,
        coupling: String,
        /// Particle mass in kg.
        #[arg(long, default_value_t = ELECTRON_MASS_KG)]
        mass: f64,
        /// Length scale in m.
        #[arg(long, default_value_t = 1e-9)]
        length: f64,
        /// Value of the dimensionless coupling factor.
        #[arg(long, default_value_t = 1.0)]
        value: f64,
    },
    /// Integrate the equation described by a job file.
    Evolve { jobspec: PathBuf },
    /// Re-derive the reference equations and coupling dimensions.
    Verify {
        /// Directory of .lag files; defaults to $NLSE_CORPUS, then the bundled corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

/// Failure classes, mapped to exit codes 2 and 3.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Derive { file, dim } => derive(&file, dim),
        Command::Dimension {
            file,
            coupling,
            mass,
            length,
            value,
        } => dimension(&file, &coupling, mass, length, value),
        Command::Evolve { jobspec } => evolve(&jobspec),
        Command::Verify { corpus } => verify(corpus),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn load_lagrangian(file: &Path) -> Result<FieldExpr, Failure> {
    let src = fs::read_to_string(file)
        .with_context(|| format!("no such file {}", file.display()))
        .usage()?;
    parse(&src).map_err(|diagnostics| {
        let rendered: Vec<String> = diagnostics.iter().map(|d| d.render(&src)).collect();
        Failure::Usage(anyhow!("{}:\n{}", file.display(), rendered.join("\n")))
    })
}

fn derive(file: &Path, dim: usize) -> Result<u8, Failure> {
    if !(1..=3).contains(&dim) {
        return Err(Failure::Usage(anyhow!("--dim must be 1, 2 or 3")));
    }
    let eq = derive_equation_in(&load_lagrangian(file)?, dim).usage()?;
    let linear_part = if eq.potential_present {
        "−(ħ²/2m)∇²ψ + Vψ"
    } else {
        "−(ħ²/2m)∇²ψ"
    };
    if eq.is_linear() {
        println!("iħ∂ψ/∂t = {linear_part}");
        println!("nonlinearity: linear (N = 0)");
    } else {
        let n = pretty_unicode(&eq.nonlinearity);
        match n.strip_prefix('−') {
            Some(rest) => println!("iħ∂ψ/∂t = {linear_part} − {rest}"),
            None => println!("iħ∂ψ/∂t = {linear_part} + {n}"),
        }
        println!("nonlinearity: {n}");
        let locality = if eq.nonlinearity.has_spatial_derivatives() {
            "derivative-coupled"
        } else {
            "pointwise"
        };
        println!("locality: {locality}");
    }
    println!("dsl: {}", pretty_print(&eq.raw_form));
    for w in &eq.warnings {
        eprintln!("warning: {w}");
    }
    if eq.residual {
        eprintln!("warning: divergence terms could not be expanded in D={dim}; they are kept symbolically");
    }
    Ok(0)
}

fn dimension(file: &Path, coupling: &str, mass: f64, length: f64, value: f64) -> Result<u8, Failure> {
    let l = load_lagrangian(file)?;
    let found = coupling_dimension_with_warnings(&l, coupling, &DimensionContext::default()).usage()?;
    for w in &found.warnings {
        eprintln!("warning: {w}");
    }
    let expansion = express_in_hbar_m_c(&found.dimension);
    if expansion.dimensionless_residual {
        println!("{coupling}: {} = {expansion} × dimensionless g", found.dimension);
    } else {
        println!("{coupling}: {} has no expansion in ħ, m and c", found.dimension);
        return Ok(0);
    }
    println!("{}", weakness_report(&expansion, mass, length, value));
    Ok(0)
}

fn verify(corpus_dir: Option<PathBuf>) -> Result<u8, Failure> {
    let dir = corpus_dir.or_else(|| std::env::var_os("NLSE_CORPUS").map(PathBuf::from));
    let corpus = match dir {
        Some(dir) => Corpus::load(&dir).usage()?,
        None if Corpus::default_dir().is_dir() => Corpus::load(&Corpus::default_dir()).usage()?,
        None => Corpus::bundled(),
    };
    let rows = reproduction_table(&corpus);
    println!("{:<10}{:<24}status", "equation", "source");
    for row in &rows {
        let note = row.note.map(|n| format!(" ({n})")).unwrap_or_default();
        println!("{:<10}{:<24}{}{note}", row.equation, row.source, row.status);
    }
    let failed = rows.iter().filter(|r| r.status.is_fail()).count();
    if failed > 0 {
        println!("{failed} of {} rows failed", rows.len());
        Ok(1)
    } else {
        println!("all {} rows reproduced", rows.len());
        Ok(0)
    }
}

fn is_cubic(eq: &EvolutionEquation) -> bool {
    structural_equal(&eq.nonlinearity, &parse("-2*e^* *psi^2*psi^*").unwrap())
}

fn is_logarithmic(eq: &EvolutionEquation) -> bool {
    structural_equal(&eq.nonlinearity, &parse("-f^* *ln(psi*psi^*)*psi - f^* *psi").unwrap())
}

fn real_binding(job: &JobSpec, name: &str) -> Option<f64> {
    job.constant_bindings
        .iter()
        .find(|(k, _)| k == name)
        .filter(|(_, v)| v.im == 0.0)
        .map(|(_, v)| v.re)
}

/// `g` in `iψ_t = −½ψ_xx − g|ψ|²ψ`, when the job integrates that equation.
fn focusing_strength(job: &JobSpec, eq: &EvolutionEquation) -> Option<f64> {
    let g = 2.0 * real_binding(job, "e")?;
    (is_cubic(eq) && g > 0.0).then_some(g)
}

/// Bright soliton `B sech(κ(x − vt)) e^{i(vx + (κ² − v²)t/2)}` with `κ = √g B`,
/// the distance to the centre wrapped into the periodic box.
fn soliton(grid_len: f64, g: f64, amplitude: f64, velocity: f64, x: f64, t: f64) -> Complex64 {
    let kappa = g.sqrt() * amplitude;
    let d = (x - velocity * t + grid_len / 2.0).rem_euclid(grid_len) - grid_len / 2.0;
    Complex64::from_polar(
        amplitude / (kappa * d).cosh(),
        velocity * x + 0.5 * (kappa * kappa - velocity * velocity) * t,
    )
}

fn initial_field(job: &JobSpec, eq: &EvolutionEquation) -> Result<Grid, Failure> {
    let (points, lengths) = (&job.points[..], &job.lengths[..]);
    let field = match &job.initial_condition {
        InitialCondition::Gaussian { sigma, k, center } => Grid::from_fn(points, lengths, |x| {
            let r2: f64 = x.iter().zip(center).map(|(xi, c)| (xi - c).powi(2)).sum();
            Complex64::from_polar((-r2 / (4.0 * sigma * sigma)).exp(), k * x[0])
        }),
        InitialCondition::Sech { amplitude, velocity } => {
            let g = focusing_strength(job, eq).unwrap_or(1.0);
            Grid::from_fn(points, lengths, |x| soliton(lengths[0], g, *amplitude, *velocity, x[0], 0.0))
        }
        InitialCondition::Gausson { b, amplitude } => Grid::from_fn(points, lengths, |x| {
            let r2: f64 = x.iter().map(|xi| xi * xi).sum();
            Complex64::new(amplitude * (-b * r2).exp(), 0.0)
        }),
        InitialCondition::FromFile(path) => {
            let file = fs::File::open(path).usage()?;
            let (field, _) = read_snapshot(std::io::BufReader::new(file))
                .with_context(|| format!("reading {}", path.display()))
                .usage()?;
            if field.points() != points || field.lengths() != lengths {
                return Err(Failure::Usage(anyhow!("snapshot {} does not match [grid]", path.display())));
            }
            Ok(field)
        }
    };
    field.context("[grid]").usage()
}

fn potential(job: &JobSpec, template: &Grid) -> Result<Vec<f64>, Failure> {
    match &job.potential {
        Potential::Zero => Ok(Vec::new()),
        Potential::Harmonic(omega) => {
            let (_, mass) = job.run.units.hbar_and_mass::<f64>();
            Ok((0..template.len())
                .map(|j| 0.5 * mass * omega * omega * template.position(j).iter().map(|x| x * x).sum::<f64>())
                .collect())
        }
        Potential::FromFile(path) => {
            let text = fs::read_to_string(path).usage()?;
            let v = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| anyhow!("{}: `{t}` is not a number", path.display())))
                .collect::<Result<Vec<_>>>()
                .usage()?;
            if v.len() != template.len() {
                return Err(Failure::Usage(anyhow!(
                    "{}: {} values for {} grid points",
                    path.display(),
                    v.len(),
                    template.len()
                )));
            }
            Ok(v)
        }
    }
}

/// Closed-form comparisons available for this job, as (description, error).
fn analytic_checks(job: &JobSpec, eq: &EvolutionEquation, initial: &Grid, summary: &RunSummary<f64>) -> Vec<(String, f64)> {
    let plain = job.potential == Potential::Zero && job.run.units == Units::Natural;
    let t = summary.t_final;
    let last = &summary.final_field;
    let mut checks = Vec::new();
    match &job.initial_condition {
        InitialCondition::Sech { amplitude, velocity } if plain => {
            if let Some(g) = focusing_strength(job, eq) {
                let exact = Grid::from_fn(&job.points, &job.lengths, |x| {
                    soliton(job.lengths[0], g, *amplitude, *velocity, x[0], t)
                })
                .unwrap();
                checks.push(("soliton profile L∞ error".to_string(), last.max_abs_diff(&exact)));
            }
        }
        InitialCondition::Gaussian { sigma, .. } if plain && eq.is_linear() => {
            let expected = sigma * (1.0 + (t / (2.0 * sigma * sigma)).powi(2)).sqrt();
            let err = width(last).iter().map(|w| ((w - expected) / expected).abs()).fold(0.0, f64::max);
            checks.push((format!("width-law relative error (σ(t) = {expected:.6})"), err));
        }
        InitialCondition::Gausson { b, .. } if plain && is_logarithmic(eq) && real_binding(job, "f") == Some(*b) => {
            let drift = last
                .samples()
                .iter()
                .zip(initial.samples())
                .map(|(p, q)| (p.norm_sqr() - q.norm_sqr()).abs())
                .fold(0.0, f64::max);
            checks.push(("gausson density L∞ drift".to_string(), drift));
        }
        _ => {}
    }
    checks
}

fn evolve(path: &Path) -> Result<u8, Failure> {
    let job = JobSpec::load(path).usage()?;
    let dim = job.points.len();
    let eq = derive_equation_in(&load_lagrangian(&job.lagrangian_path)?, dim).usage()?;
    let couplings = eq.couplings();
    let mut bindings = Bindings::new();
    for (name, value) in &job.constant_bindings {
        if !couplings.contains(name) {
            return Err(Failure::Usage(anyhow!("[constants] `{name}` does not appear in the Lagrangian")));
        }
        bindings.set(name, *value);
    }
    let rhs = compile(&eq, &bindings, &job.run.compile_options(dim)).usage()?;
    let initial = initial_field(&job, &eq)?;
    let v = potential(&job, &initial)?;

    let (method, _) = resolve_method(job.run.method, &rhs);
    let (hbar, mass) = job.run.units.hbar_and_mass::<f64>();
    fs::create_dir_all(&job.output_dir)
        .with_context(|| format!("creating {}", job.output_dir.display()))
        .runtime()?;
    let manifest = job.manifest(&[
        ("equation", pretty_print(&eq.raw_form)),
        ("method", method.to_string()),
        ("hbar", hbar.to_string()),
        ("mass", mass.to_string()),
        ("steps", job.run.steps().to_string()),
        ("version", env!("CARGO_PKG_VERSION").to_string()),
    ]);
    fs::write(job.output_dir.join("manifest.txt"), manifest).runtime()?;

    let mut csv = CsvSink::create(&job.output_dir.join("observables.csv"), dim, rhs.has_complex_couplings()).runtime()?;
    let mut snapshots = SnapshotSink::create(&job.output_dir.join("snapshots")).runtime()?;
    let summary = run_compiled(&initial, &rhs, &v, &job.run, &mut [&mut csv, &mut snapshots]).runtime()?;

    println!("method: {}", summary.method);
    println!("steps: {} to t = {}", summary.steps, summary.t_final);
    println!("wall time: {:.3} s", summary.wall_time.as_secs_f64());
    println!("norm: {} -> {}", summary.initial.norm, summary.last.norm);
    if rhs.has_complex_couplings() {
        println!("energy: {} -> {}", summary.initial.energy, summary.last.energy);
    } else {
        println!("energy: {} -> {}", summary.initial.energy.re, summary.last.energy.re);
    }
    println!("max relative norm drift: {:.3e}", summary.max_norm_drift);
    println!("max relative energy drift: {:.3e}", summary.max_energy_drift);
    println!("max momentum drift: {:.3e}", summary.max_momentum_drift);
    if rhs.uses_phase() {
        println!("branch-cut crossings: {}", summary.branch_cut_crossings);
    }
    if rhs.is_singular() {
        println!("regularized node-steps: {}", summary.regularized_nodes);
    }
    println!("snapshots: {}", snapshots.written().len());
    println!("output: {}", job.output_dir.display());

    let mut code = 0;
    for (what, err) in analytic_checks(&job, &eq, &initial, &summary) {
        match job.tolerance {
            Some(tol) if err > tol => {
                println!("{what}: {err:.3e} exceeds tolerance {tol:.1e}");
                code = 1;
            }
            Some(tol) => println!("{what}: {err:.3e} (tolerance {tol:.1e})"),
            None => println!("{what}: {err:.3e}"),
        }
    }
    Ok(code)
}
