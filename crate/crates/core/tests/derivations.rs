mod common;

use common::{compiled, equation, rng};
use nlse_core::compile::{compile, Bindings, CompileOptions, Locality};
use nlse_core::spectral::Spectral;
use nlse_core::symexpr::{evaluate, FieldExpr, PointValues};
use nlse_core::variational::{euler_lagrange, Corpus, Variation};
use nlse_core::{parse, FieldGrid};
use num_complex::Complex64;
use rand::Rng;

const COUPLINGS: [&str; 7] = ["a", "b", "c", "d", "e", "f", "g"];

/// Smooth field with positive real part, so `ψ/ψ*` stays off the branch cut.
fn tame_field(rng: &mut impl Rng, points: &[usize], lengths: &[f64]) -> Vec<Complex64> {
    let modes: Vec<(Vec<f64>, Complex64)> = (0..4)
        .map(|_| {
            let k = lengths
                .iter()
                .map(|l| std::f64::consts::TAU / l * rng.random_range(-2i32..=2) as f64)
                .collect();
            (k, Complex64::from_polar(rng.random_range(0.05..0.15), rng.random_range(-3.0..3.0)))
        })
        .collect();
    let amplitude = rng.random_range(1.2..1.6);
    FieldGrid::from_fn(points, lengths, |x| {
        modes.iter().fold(Complex64::new(amplitude, 0.0), |acc, (k, c)| {
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            acc + c * Complex64::from_polar(1.0, phase)
        })
    })
    .unwrap()
    .into_samples()
}

struct Configuration {
    psi: Vec<Complex64>,
    psi_star: Vec<Complex64>,
    psi_dot: Vec<Complex64>,
    psi_star_dot: Vec<Complex64>,
    v: Vec<f64>,
    params: Vec<(String, Complex64)>,
}

/// Point values at node `j`, with spatial derivatives taken spectrally.
fn point_values(cfg: &Configuration, spectral: &Spectral<f64>, dim: usize) -> Vec<PointValues<f64>> {
    let grad_psi: Vec<_> = (0..dim).map(|a| spectral.gradient(&cfg.psi, a)).collect();
    let grad_star: Vec<_> = (0..dim).map(|a| spectral.gradient(&cfg.psi_star, a)).collect();
    let lap_psi = spectral.laplacian(&cfg.psi);
    let lap_star = spectral.laplacian(&cfg.psi_star);
    (0..cfg.psi.len())
        .map(|j| {
            let mut at = PointValues::zeros(dim);
            at.psi = cfg.psi[j];
            at.psi_star = cfg.psi_star[j];
            at.psi_dot = cfg.psi_dot[j];
            at.psi_star_dot = cfg.psi_star_dot[j];
            for a in 0..dim {
                at.grad_psi[a] = grad_psi[a][j];
                at.grad_psi_star[a] = grad_star[a][j];
            }
            at.lap_psi = lap_psi[j];
            at.lap_psi_star = lap_star[j];
            at.params.insert("V".into(), Complex64::new(cfg.v[j], 0.0));
            for (k, v) in &cfg.params {
                at.params.insert(k.clone(), *v);
            }
            at
        })
        .collect()
}

fn action(l: &FieldExpr, cfg: &Configuration, spectral: &Spectral<f64>, dim: usize, cell: f64) -> Complex64 {
    point_values(cfg, spectral, dim)
        .iter()
        .map(|at| evaluate(l, at).unwrap())
        .sum::<Complex64>()
        * cell
}

fn random_configuration(rng: &mut impl Rng, points: &[usize], lengths: &[f64]) -> Configuration {
    let psi = tame_field(rng, points, lengths);
    // ψ* independent of ψ but close to its conjugate, keeping ψψ* near the positive axis.
    let wobble = tame_field(rng, points, lengths);
    let psi_star = psi
        .iter()
        .zip(&wobble)
        .map(|(p, w)| p.conj() * (Complex64::new(0.9, 0.0) + w.scale(0.05)))
        .collect();
    let n = psi.len();
    Configuration {
        psi,
        psi_star,
        psi_dot: (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
        psi_star_dot: (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
        v: (0..n).map(|_| rng.random_range(0.0..1.0)).collect(),
        params: COUPLINGS
            .iter()
            .map(|c| (c.to_string(), Complex64::from_polar(rng.random_range(0.05..0.2), rng.random_range(-3.0..3.0))))
            .chain([("hbar".to_string(), Complex64::new(1.0, 0.0)), ("m".to_string(), Complex64::new(1.3, 0.0))])
            .collect(),
    }
}

/// `δS/δψ_k` by central differences of the discretized action equals minus the
/// symbolic right-hand side obtained by varying ψ.
fn check_variational_derivative(file: &str, points: &[usize], lengths: &[f64], seed: u64) {
    let l = parse(Corpus::bundled().get(file).unwrap()).unwrap();
    let dim = points.len();
    let el = euler_lagrange(&l, Variation::Psi, dim).unwrap();
    assert!(!el.residual, "{file} leaves residual terms in D={dim}");
    let spectral = Spectral::new(points, lengths);
    let cell: f64 = lengths.iter().zip(points).map(|(l, n)| l / *n as f64).product();
    let mut rng = rng(seed);
    let mut cfg = random_configuration(&mut rng, points, lengths);
    let symbolic: Vec<Complex64> = point_values(&cfg, &spectral, dim)
        .iter()
        .map(|at| evaluate(&el.rhs, at).unwrap())
        .collect();
    let scale = symbolic.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let h = 1e-5;
    for k in (0..cfg.psi.len()).step_by(5) {
        let orig = cfg.psi[k];
        cfg.psi[k] = orig + h;
        let plus = action(&l, &cfg, &spectral, dim, cell);
        cfg.psi[k] = orig - h;
        let minus = action(&l, &cfg, &spectral, dim, cell);
        cfg.psi[k] = orig;
        let discrete = (plus - minus) / (2.0 * h * cell);
        let err = (discrete + symbolic[k]).norm() / scale;
        assert!(err <= 1e-5, "{file} D={dim} node {k}: discrete {discrete} vs symbolic {}", -symbolic[k]);
    }
}

#[test]
fn euler_lagrange_matches_discrete_variation_in_one_dimension() {
    for (i, file) in Corpus::bundled().names().enumerate() {
        check_variational_derivative(file, &[64], &[8.0], 100 + i as u64);
    }
}

#[test]
fn euler_lagrange_matches_discrete_variation_in_two_dimensions() {
    for (i, file) in ["gradient_coupling.lag", "gp_m2.lag", "log_density.lag", "linear.lag"].iter().enumerate() {
        check_variational_derivative(file, &[32, 32], &[8.0, 6.0], 200 + i as u64);
    }
}

#[test]
fn gauge_covariant_nonlinearities() {
    let mut rng = rng(7);
    for (file, name) in [
        ("log_power_m2.lag", "c"),
        ("root_n3.lag", "d"),
        ("power_m4.lag", "e"),
        ("gp_m2.lag", "e"),
        ("log_density.lag", "f"),
    ] {
        let b = Bindings::new().with(name, Complex64::new(rng.random_range(0.1..1.0), rng.random_range(-1.0..1.0)));
        let rhs = compile(&equation(file), &b, &CompileOptions::default()).unwrap();
        for _ in 0..5 {
            let field = FieldGrid::from_samples(&[32], &[6.0], tame_field(&mut rng, &[32], &[6.0])).unwrap();
            let theta: f64 = rng.random_range(-3.0..3.0);
            let phase = Complex64::from_polar(1.0, theta);
            let base = rhs.nonlinearity(&field, &[]).unwrap();
            let rotated = rhs.nonlinearity(&field.map(|z| z * phase), &[]).unwrap();
            for (r, b) in rotated.samples().iter().zip(base.samples()) {
                assert!((r - b * phase).norm() <= 1e-12 * b.norm().max(1.0), "{file}");
            }
        }
    }
}

#[test]
fn varying_either_field_gives_conjugate_equations() {
    let corpus = Corpus::bundled();
    for file in corpus.names() {
        let l = parse(corpus.get(file).unwrap()).unwrap().assume_real(&COUPLINGS);
        let by_psi = euler_lagrange(&l, Variation::Psi, 1).unwrap().rhs;
        let by_star = euler_lagrange(&l, Variation::PsiStar, 1).unwrap().rhs;
        let consistent = nlse_core::structural_equal(&by_psi.conjugate(), &by_star);
        // g ψψ* ln(ψ/ψ*) is real only for imaginary g.
        assert_eq!(consistent, file != "phase_log.lag", "{file}");
    }
    let text = corpus.get("phase_log.lag").unwrap().replace("+ g*", "+ i*a*");
    let imaginary_g = parse(&text).unwrap().assume_real(&["a"]);
    let by_psi = euler_lagrange(&imaginary_g, Variation::Psi, 1).unwrap().rhs;
    let by_star = euler_lagrange(&imaginary_g, Variation::PsiStar, 1).unwrap().rhs;
    // Equal only through ln(ψ*/ψ) = −ln(ψ/ψ*), so compare values off the branch cut.
    let mut rng = rng(13);
    for _ in 0..50 {
        let mut at = PointValues::zeros(1);
        at.psi = Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(-1.5..1.5));
        at.psi_star = at.psi.conj();
        at.grad_psi[0] = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        at.grad_psi_star[0] = at.grad_psi[0].conj();
        at.lap_psi = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        at.lap_psi_star = at.lap_psi.conj();
        for (k, v) in [("a", 0.7), ("hbar", 1.0), ("m", 1.0), ("V", 0.2)] {
            at.params.insert(k.into(), Complex64::new(v, 0.0));
        }
        let lhs = evaluate(&by_psi, &at).unwrap().conj();
        let rhs = evaluate(&by_star, &at).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }
}

/// Compiled right-hand side against tree-walking evaluation of the symbolic
/// equation with spectral derivatives substituted.
#[test]
fn compiled_matches_naive_interpretation() {
    let mut rng = rng(11);
    let corpus = Corpus::bundled();
    let files: Vec<&str> = corpus.names().collect();
    for case in 0..100 {
        let file = files[case % files.len()];
        let eq = equation(file);
        let (points, lengths): (Vec<usize>, Vec<f64>) = if case % 3 == 0 && file != "gradient_quartic.lag" {
            (vec![8, 16], vec![5.0, 7.0])
        } else {
            (vec![16], vec![5.0])
        };
        let mut bindings = Bindings::new();
        let mut params = Vec::new();
        for name in eq.couplings() {
            let value = Complex64::from_polar(rng.random_range(0.1..1.0), rng.random_range(-3.0..3.0));
            bindings.set(&name, value);
            params.push((name, value));
        }
        params.push(("hbar".into(), Complex64::new(1.0, 0.0)));
        params.push(("m".into(), Complex64::new(1.0, 0.0)));
        let rhs = compile(&eq, &bindings, &CompileOptions::default().dim(points.len())).unwrap();
        let psi = tame_field(&mut rng, &points, &lengths);
        let v: Vec<f64> = (0..psi.len()).map(|_| rng.random_range(0.0..2.0)).collect();
        let field = FieldGrid::from_samples(&points, &lengths, psi.clone()).unwrap();
        let fast = rhs.evaluate(&field, &v).unwrap();

        let cfg = Configuration {
            psi_star: psi.iter().map(|z| z.conj()).collect(),
            psi_dot: vec![Complex64::new(0.0, 0.0); psi.len()],
            psi_star_dot: vec![Complex64::new(0.0, 0.0); psi.len()],
            psi,
            v,
            params,
        };
        let spectral = Spectral::new(&points, &lengths);
        let naive_eq = &rhs.source_equation;
        for (j, at) in point_values(&cfg, &spectral, points.len()).iter().enumerate() {
            let naive = evaluate(&naive_eq.raw_form, at).unwrap();
            let got = fast.samples()[j];
            assert!((got - naive).norm() <= 1e-12 * naive.norm().max(1.0), "{file} case {case} node {j}: {got} vs {naive}");
        }
    }
}

#[test]
fn quintic_right_hand_side_matches_direct_formula() {
    let mut rng = rng(3);
    let e = Complex64::new(0.4, -0.3);
    let rhs = compile(&equation("quintic_m3.lag"), &Bindings::new().with("e", e), &CompileOptions::default()).unwrap();
    let field = FieldGrid::from_samples(&[64], &[10.0], tame_field(&mut rng, &[64], &[10.0])).unwrap();
    let v = vec![0.0; 64];
    let got = rhs.evaluate(&field, &v).unwrap();
    let lap = Spectral::new(&[64], &[10.0]).laplacian(field.samples());
    for (j, z) in field.samples().iter().enumerate() {
        let expected = -0.5 * lap[j] - 3.0 * e.conj() * z.norm_sqr().powi(2) * z;
        assert!((got.samples()[j] - expected).norm() <= 1e-12 * expected.norm().max(1.0));
    }
}

#[test]
fn local_nonlinearities_read_only_their_own_node() {
    let mut rng = rng(5);
    for (file, name, local) in [
        ("gp_m2.lag", "e", true),
        ("log_density.lag", "f", true),
        ("phase_log.lag", "g", true),
        ("gradient_coupling.lag", "a", false),
    ] {
        let rhs = compiled(file, &[(name, 0.3)]);
        assert_eq!(rhs.locality == Locality::PointwiseLocal, local, "{file}");
        let field = FieldGrid::from_samples(&[32], &[6.0], tame_field(&mut rng, &[32], &[6.0])).unwrap();
        let mut moved = field.clone();
        for j in 0..32 {
            if j != 10 {
                moved.samples_mut()[j] *= Complex64::new(0.7, 0.2);
            }
        }
        let a = rhs.nonlinearity(&field, &[]).unwrap().samples()[10];
        let b = rhs.nonlinearity(&moved, &[]).unwrap().samples()[10];
        assert_eq!((a - b).norm() < 1e-14, local, "{file}");
    }
}

#[test]
fn linear_energy_is_the_hamiltonian_expectation() {
    let mut rng = rng(9);
    let rhs = compiled("linear.lag", &[]);
    for _ in 0..5 {
        let field = FieldGrid::from_samples(&[64], &[10.0], tame_field(&mut rng, &[64], &[10.0])).unwrap();
        let v: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..1.0)).collect();
        let h_psi = rhs.evaluate(&field, &v).unwrap();
        let expectation: f64 = field
            .samples()
            .iter()
            .zip(h_psi.samples())
            .map(|(p, h)| (p.conj() * h).re)
            .sum::<f64>()
            * field.cell_volume();
        let energy = nlse_core::observables::energy(&field, &rhs, &v).unwrap();
        assert!((energy.re - expectation).abs() <= 1e-10 * expectation.abs());
        assert!(energy.im.abs() <= 1e-12);
    }
}
