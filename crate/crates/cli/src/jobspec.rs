//! Job files for `evolve`: flat `key = value` INI with bracketed sections.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use nlse_core::solver::{Method, RunConfig, Units};
use nlse_core::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Zero,
    /// `V = ½ m ω² |x|²`.
    Harmonic(f64),
    /// Whitespace-separated real values in row-major grid order.
    FromFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    /// `exp(−|x−c|²/4σ²) e^{ik x₁}`; the density has standard deviation σ.
    Gaussian { sigma: f64, k: f64, center: Vec<f64> },
    /// Bright soliton of the cubic equation with peak `amplitude`, moving at `velocity`.
    Sech { amplitude: f64, velocity: f64 },
    /// `A exp(−b|x|²)`, stationary under the logarithmic equation with coupling `b`.
    Gausson { b: f64, amplitude: f64 },
    /// A snapshot file.
    FromFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobSpec {
    pub lagrangian_path: PathBuf,
    pub constant_bindings: Vec<(String, Complex64)>,
    pub potential: Potential,
    pub initial_condition: InitialCondition,
    pub points: Vec<usize>,
    pub lengths: Vec<f64>,
    pub run: RunConfig<f64>,
    pub output_dir: PathBuf,
    /// Bound on the analytic-check error reported after the run.
    pub tolerance: Option<f64>,
}

/// `re+imi`, `re-imi`, `re` or `imi`, in the C locale.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || anyhow!("`{text}` is not a complex constant (expected re+imi, e.g. 0.5+0i)");
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0));
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| anyhow!("{what}: cannot parse `{}`", t.trim())))
        .collect()
}

struct Section<'a> {
    name: &'a str,
    props: Option<&'a ini::Properties>,
}

impl Section<'_> {
    fn get(&self, key: &str) -> Option<&str> {
        self.props.and_then(|p| p.get(key))
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| anyhow!("[{}] is missing `{key}`", self.name))
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.get(key) {
            Some(v) => v.trim().parse().map_err(|_| anyhow!("[{}] {key}: `{v}` is not a number", self.name)),
            None => default.ok_or_else(|| anyhow!("[{}] is missing `{key}`", self.name)),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            Some(v) => v.trim().parse().map_err(|_| anyhow!("[{}] {key}: `{v}` is not a count", self.name)),
            None => Ok(default),
        }
    }

    fn path(&self, key: &str, base: &Path) -> Result<PathBuf> {
        let p = base.join(self.required(key)?.trim());
        if !p.exists() {
            bail!("[{}] {key}: no such file {}", self.name, p.display());
        }
        Ok(p)
    }
}

impl JobSpec {
    /// Read and validate a job file; relative paths are taken from its directory.
    pub fn load(path: &Path) -> Result<JobSpec> {
        let text = std::fs::read_to_string(path).with_context(|| format!("no such file {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        JobSpec::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<JobSpec> {
        let ini = Ini::load_from_str(text).context("malformed job file")?;
        let section = |name| Section {
            name,
            props: ini.section(Some(name)),
        };

        let equation = section("equation");
        let lagrangian_path = equation.path("lagrangian", base)?;

        let constant_bindings = match ini.section(Some("constants")) {
            Some(props) => props
                .iter()
                .map(|(k, v)| Ok((k.to_string(), parse_complex(v).with_context(|| format!("[constants] {k}"))?)))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };

        let grid = section("grid");
        let points: Vec<usize> = list(grid.required("points")?, "[grid] points")?;
        let lengths: Vec<f64> = list(grid.required("lengths")?, "[grid] lengths")?;
        if points.len() != lengths.len() || !(1..=2).contains(&points.len()) {
            bail!("[grid] points and lengths must both list one or two axes");
        }

        let pot = section("potential");
        let potential = match pot.get("kind").unwrap_or("zero").trim() {
            "zero" => Potential::Zero,
            "harmonic" => Potential::Harmonic(pot.number("omega", None)?),
            "file" => Potential::FromFile(pot.path("path", base)?),
            other => bail!("[potential] kind `{other}` is not zero, harmonic or file"),
        };

        let init = section("initial");
        let dim = points.len();
        let initial_condition = match init.required("kind")?.trim() {
            "gaussian" => InitialCondition::Gaussian {
                sigma: init.number("sigma", None)?,
                k: init.number("k", Some(0.0))?,
                center: match init.get("center") {
                    Some(c) => list(c, "[initial] center")?,
                    None => vec![0.0; dim],
                },
            },
            "sech" => InitialCondition::Sech {
                amplitude: init.number("amplitude", None)?,
                velocity: init.number("velocity", Some(0.0))?,
            },
            "gausson" => InitialCondition::Gausson {
                b: init.number("b", None)?,
                amplitude: init.number("amplitude", Some(1.0))?,
            },
            "file" => InitialCondition::FromFile(init.path("path", base)?),
            other => bail!("[initial] kind `{other}` is not gaussian, sech, gausson or file"),
        };
        match &initial_condition {
            InitialCondition::Gaussian { sigma, center, .. } => {
                if center.len() != dim {
                    bail!("[initial] center needs {dim} coordinates");
                }
                if !(*sigma > 0.0) {
                    bail!("[initial] sigma must be positive");
                }
            }
            InitialCondition::Sech { .. } if dim != 1 => bail!("[initial] sech is one-dimensional"),
            _ => {}
        }

        let r = section("run");
        let method = match r.get("method").unwrap_or("auto").trim() {
            "auto" => Method::Auto,
            "strang" => Method::StrangSplitStep,
            "rk4" => Method::Rk4SpectralMol,
            other => bail!("[run] method `{other}` is not auto, strang or rk4"),
        };
        let units = match r.get("units").unwrap_or("natural").trim() {
            "natural" => Units::Natural,
            "si" => Units::Si {
                mass_kg: r.number("mass_kg", None)?,
            },
            other => bail!("[run] units `{other}` is not natural or si"),
        };
        let mut run = RunConfig::new(r.number("dt", None)?, r.number("t_final", None)?).method(method);
        run.units = units;
        run.snapshot_stride = r.count("snapshot_stride", run.snapshot_stride)?;
        run.observable_stride = r.count("observable_stride", run.observable_stride)?;
        run.epsilon_regularization = r.number("epsilon", Some(run.epsilon_regularization))?;
        run.validate()?;

        let output_dir = base.join(section("output").get("dir").unwrap_or("out").trim());
        let tolerance = match section("check").get("tolerance") {
            Some(_) => Some(section("check").number("tolerance", None)?),
            None => None,
        };

        Ok(JobSpec {
            lagrangian_path,
            constant_bindings,
            potential,
            initial_condition,
            points,
            lengths,
            run,
            output_dir,
            tolerance,
        })
    }

    /// The resolved job as a job file, with every default spelled out and
    /// absolute paths, followed by `extra` lines in a `[resolved]` section.
    pub fn manifest(&self, extra: &[(&str, String)]) -> String {
        let join = |xs: &[String]| xs.join(",");
        let abs = |p: &Path| std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf()).display().to_string();
        let mut s = String::new();
        let _ = writeln!(s, "[equation]\nlagrangian = {}\n", abs(&self.lagrangian_path));
        s.push_str("[constants]\n");
        for (k, v) in &self.constant_bindings {
            let _ = writeln!(s, "{k} = {}", format_complex(*v));
        }
        let _ = writeln!(s);
        s.push_str("[potential]\n");
        match &self.potential {
            Potential::Zero => s.push_str("kind = zero\n"),
            Potential::Harmonic(w) => {
                let _ = writeln!(s, "kind = harmonic\nomega = {w}");
            }
            Potential::FromFile(p) => {
                let _ = writeln!(s, "kind = file\npath = {}", abs(p));
            }
        }
        s.push_str("\n[initial]\n");
        match &self.initial_condition {
            InitialCondition::Gaussian { sigma, k, center } => {
                let c: Vec<String> = center.iter().map(f64::to_string).collect();
                let _ = writeln!(s, "kind = gaussian\nsigma = {sigma}\nk = {k}\ncenter = {}", join(&c));
            }
            InitialCondition::Sech { amplitude, velocity } => {
                let _ = writeln!(s, "kind = sech\namplitude = {amplitude}\nvelocity = {velocity}");
            }
            InitialCondition::Gausson { b, amplitude } => {
                let _ = writeln!(s, "kind = gausson\nb = {b}\namplitude = {amplitude}");
            }
            InitialCondition::FromFile(p) => {
                let _ = writeln!(s, "kind = file\npath = {}", abs(p));
            }
        }
        let points: Vec<String> = self.points.iter().map(usize::to_string).collect();
        let lengths: Vec<String> = self.lengths.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "\n[grid]\npoints = {}\nlengths = {}\n", join(&points), join(&lengths));
        let r = &self.run;
        let method = match r.method {
            Method::StrangSplitStep => "strang",
            Method::Rk4SpectralMol => "rk4",
            Method::Auto => "auto",
        };
        let _ = writeln!(
            s,
            "[run]\ndt = {}\nt_final = {}\nmethod = {method}\nsnapshot_stride = {}\nobservable_stride = {}\nepsilon = {}",
            r.dt, r.t_final, r.snapshot_stride, r.observable_stride, r.epsilon_regularization
        );
        match r.units {
            Units::Natural => s.push_str("units = natural\n"),
            Units::Si { mass_kg } => {
                let _ = writeln!(s, "units = si\nmass_kg = {mass_kg}");
            }
        }
        let _ = writeln!(s, "\n[output]\ndir = {}", abs(&self.output_dir));
        if let Some(t) = self.tolerance {
            let _ = writeln!(s, "\n[check]\ntolerance = {t}");
        }
        s.push_str("\n[resolved]\n");
        for (k, v) in extra {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_constants() {
        assert_eq!(parse_complex("0.5+0i").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("-1-2i").unwrap(), Complex64::new(-1.0, -2.0));
        assert_eq!(parse_complex("1e-3+2.5e-4i").unwrap(), Complex64::new(1e-3, 2.5e-4));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("0,5").is_err());
        for z in [Complex64::new(0.5, -0.25), Complex64::new(-1.0, 0.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
