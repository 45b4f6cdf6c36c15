//! Shared generators and closed-form oracles for the integration tests.
#![allow(dead_code)]

use nlse_core::compile::{compile, Bindings, CompileOptions, CompiledRhs};
use nlse_core::symexpr::{rational, Axis, Field, FieldExpr, FieldSymbol, PointValues};
use nlse_core::variational::Corpus;
use nlse_core::{derive_equation, parse, EvolutionEquation, FieldGrid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn equation(file: &str) -> EvolutionEquation {
    let corpus = Corpus::bundled();
    derive_equation(&parse(corpus.get(file).expect("bundled file")).unwrap()).unwrap()
}

pub fn compiled(file: &str, couplings: &[(&str, f64)]) -> CompiledRhs<f64> {
    let b = couplings
        .iter()
        .fold(Bindings::new(), |b, (k, v)| b.with_real(k, *v));
    compile(&equation(file), &b, &CompileOptions::default()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.random_range(lo..hi), rng.random_range(-3.1..3.1))
}

/// Smooth band-limited random field: a few low Fourier modes.
pub fn random_smooth_field(rng: &mut impl Rng, points: &[usize], lengths: &[f64]) -> FieldGrid<f64> {
    let modes: Vec<(Vec<f64>, Complex64)> = (0..6)
        .map(|_| {
            let k: Vec<f64> = lengths
                .iter()
                .map(|l| std::f64::consts::TAU / l * rng.random_range(-3i32..=3) as f64)
                .collect();
            (k, random_complex(rng, 0.1, 0.5))
        })
        .collect();
    let offset = random_complex(rng, 0.8, 1.2);
    FieldGrid::from_fn(points, lengths, |x| {
        modes.iter().fold(offset, |acc, (k, c)| {
            let phase: f64 = k.iter().zip(x).map(|(ki, xi)| ki * xi).sum();
            acc + c * Complex64::from_polar(1.0, phase)
        })
    })
    .unwrap()
}

pub fn random_point(rng: &mut impl Rng, dim: usize, params: &[&str]) -> PointValues<f64> {
    let mut at = PointValues::zeros(dim);
    at.psi = random_complex(rng, 0.5, 1.5);
    at.psi_star = random_complex(rng, 0.5, 1.5);
    at.psi_dot = random_complex(rng, 0.5, 1.5);
    at.psi_star_dot = random_complex(rng, 0.5, 1.5);
    for a in 0..dim {
        at.grad_psi[a] = random_complex(rng, 0.5, 1.5);
        at.grad_psi_star[a] = random_complex(rng, 0.5, 1.5);
    }
    at.lap_psi = random_complex(rng, 0.5, 1.5);
    at.lap_psi_star = random_complex(rng, 0.5, 1.5);
    for p in params {
        at.params.insert(p.to_string(), random_complex(rng, 0.5, 1.5));
    }
    at
}

pub const PARAMS: [&str; 5] = ["a", "b", "c", "hbar", "m"];

pub fn symbols() -> Vec<FieldSymbol> {
    let x = Axis::new(1).unwrap();
    vec![
        FieldSymbol::Psi,
        FieldSymbol::PsiStar,
        FieldSymbol::GradPsi(x),
        FieldSymbol::GradPsiStar(x),
        FieldSymbol::LaplacianPsi,
        FieldSymbol::LaplacianPsiStar,
    ]
}

fn leaf() -> impl Strategy<Value = FieldExpr> {
    prop_oneof![
        4 => prop::sample::select(symbols()).prop_map(FieldExpr::sym),
        2 => (prop::sample::select(PARAMS.to_vec()), any::<bool>()).prop_map(|(p, conj)| {
            let e = FieldExpr::param(p);
            if conj { e.conjugate() } else { e }
        }),
        2 => (-4i64..=4, 1i64..=3).prop_map(|(n, d)| FieldExpr::rational(n, d)),
        1 => Just(FieldExpr::imag_unit()),
        1 => prop::sample::select(vec![(Field::PsiStar, Field::Psi), (Field::Psi, Field::Psi), (Field::PsiStar, Field::PsiStar)])
            .prop_map(|(a, b)| FieldExpr::dot_grad(a, b)),
    ]
}

/// Random raw trees of depth at most `depth`.
pub fn expr_tree(depth: u32) -> impl Strategy<Value = FieldExpr> {
    leaf().prop_recursive(depth, 48, 3, |inner| {
        prop_oneof![
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(FieldExpr::sum),
            3 => prop::collection::vec(inner.clone(), 2..=3).prop_map(FieldExpr::product),
            2 => (inner.clone(), prop::sample::select(vec![(-2, 1), (-1, 1), (2, 1), (3, 1), (1, 2), (-1, 3)]))
                .prop_map(|(b, (n, d))| b.pow(rational(n, d))),
            1 => inner.prop_map(FieldExpr::ln),
        ]
    })
}

/// Complex rational coefficient `n/d + k·i`.
pub fn coefficient() -> impl Strategy<Value = FieldExpr> {
    (-5i64..=5, 1i64..=4, -3i64..=3).prop_map(|(n, d, im)| FieldExpr::rational(n, d) + FieldExpr::int(im) * FieldExpr::imag_unit())
}

/// Bright soliton of `iψ_t = −½ψ_xx − |ψ|²ψ` moving with velocity `v`.
pub fn sech_soliton(amplitude: f64, v: f64, x: f64, t: f64) -> Complex64 {
    let profile = amplitude / (amplitude * (x - v * t)).cosh();
    Complex64::from_polar(profile, v * x + 0.5 * (amplitude * amplitude - v * v) * t)
}

/// Gaussian solution of `iψ_t = −½ψ_xx − b ln|ψ|²ψ − bψ`:
/// width condition `α = b`, frequency `ω = b − 2b ln A − b`.
pub fn gausson(b: f64, amplitude: f64, x: f64, t: f64) -> Complex64 {
    let alpha = b;
    let omega = -2.0 * b * amplitude.ln();
    Complex64::from_polar(amplitude * (-alpha * x * x).exp(), -omega * t)
}

/// Pointwise residual of a 1D trajectory `f(x, t)` in `iψ_t = −½ψ_xx + n(ψ)`,
/// by central differences with step `h` in x and t.
pub fn fd_residual(
    f: impl Fn(f64, f64) -> Complex64,
    n: impl Fn(Complex64) -> Complex64,
    x: f64,
    t: f64,
    h: f64,
) -> Complex64 {
    let psi = f(x, t);
    let psi_t = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
    let psi_xx = (f(x + h, t) - 2.0 * psi + f(x - h, t)) / (h * h);
    Complex64::i() * psi_t + 0.5 * psi_xx - n(psi)
}

/// Density standard deviation of a free Gaussian, `ħ = m = 1`.
pub fn free_gaussian_width(sigma0: f64, t: f64) -> f64 {
    sigma0 * (1.0 + (t / (2.0 * sigma0 * sigma0)).powi(2)).sqrt()
}

/// `exp(−|x|²/4σ²)`, whose density has standard deviation σ per axis.
pub fn gaussian(points: &[usize], lengths: &[f64], sigma: f64, k: f64) -> FieldGrid<f64> {
    FieldGrid::from_fn(points, lengths, |x| {
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        Complex64::from_polar((-r2 / (4.0 * sigma * sigma)).exp(), k * x[0])
    })
    .unwrap()
}

/// Least-squares slope of `log2(error)` against `log2(dt)`.
pub fn convergence_slope(dts: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub mod props {
    use nlse_core::symexpr::{evaluate, partial_wrt, FieldExpr, FieldSymbol, PointValues};
    use nlse_core::{canonicalize, parse, pretty_print, structural_equal};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn same(lhs: &FieldExpr, rhs: &FieldExpr, what: &str) -> Result<(), TestCaseError> {
        prop_assert!(
            structural_equal(lhs, rhs),
            "{what}: `{}` vs `{}`",
            pretty_print(&canonicalize(lhs)),
            pretty_print(&canonicalize(rhs))
        );
        Ok(())
    }

    pub fn linearity(e1: &FieldExpr, e2: &FieldExpr, a: &FieldExpr, b: &FieldExpr, s: FieldSymbol) -> Result<(), TestCaseError> {
        let combined = a.clone() * e1.clone() + b.clone() * e2.clone();
        let lhs = partial_wrt(&combined, s).expr;
        let rhs = a.clone() * partial_wrt(e1, s).expr + b.clone() * partial_wrt(e2, s).expr;
        same(&lhs, &rhs, "linearity")
    }

    pub fn product_rule(e1: &FieldExpr, e2: &FieldExpr, s: FieldSymbol) -> Result<(), TestCaseError> {
        let lhs = partial_wrt(&(e1.clone() * e2.clone()), s).expr;
        let rhs = partial_wrt(e1, s).expr * e2.clone() + e1.clone() * partial_wrt(e2, s).expr;
        same(&lhs, &rhs, "product rule")
    }

    pub fn conjugation(e: &FieldExpr, s: FieldSymbol) -> Result<(), TestCaseError> {
        let lhs = partial_wrt(e, s).expr.conjugate();
        let rhs = partial_wrt(&e.conjugate(), s.conjugate()).expr;
        same(&lhs, &rhs, "conjugation")
    }

    pub fn idempotent(e: &FieldExpr) -> Result<(), TestCaseError> {
        let once = canonicalize(e);
        prop_assert_eq!(canonicalize(&once), once);
        Ok(())
    }

    pub fn round_trip(e: &FieldExpr) -> Result<(), TestCaseError> {
        let c = canonicalize(e);
        let text = pretty_print(&c);
        let back = parse(&text).map_err(|d| TestCaseError::fail(format!("`{text}`: {}", d[0])))?;
        prop_assert_eq!(back, c, "printed as `{}`", text);
        Ok(())
    }

    /// Central difference in `s` against the symbolic derivative. Logarithms
    /// are simplified formally (`ln x^r = r ln x`), so the canonical form is
    /// what gets differenced.
    pub fn finite_difference(e: &FieldExpr, s: FieldSymbol, at: &PointValues<f64>) -> Result<(), TestCaseError> {
        let e = canonicalize(e);
        let h = 1e-5;
        let shifted = |delta: f64| {
            let mut p = at.clone();
            *p.symbol_mut(s) += Complex64::new(delta, 0.0);
            evaluate(&e, &p)
        };
        let (Ok(plus), Ok(minus)) = (shifted(h), shifted(-h)) else {
            return Ok(());
        };
        let exact = evaluate(&partial_wrt(&e, s).expr, at).map_err(|err| TestCaseError::fail(err.to_string()))?;
        let fd = (plus - minus) / (2.0 * h);
        // Outside the domain, or across a principal-branch jump.
        if (plus - minus).norm() > 1.0 || !(fd.norm().is_finite() && exact.norm().is_finite()) {
            return Ok(());
        }
        let scale = exact.norm().max(fd.norm()).max(1.0);
        prop_assert!(
            (exact - fd).norm() <= 1e-6 * scale,
            "d/d{:?} of `{}`: symbolic {} vs finite difference {}",
            s,
            pretty_print(&e),
            exact,
            fd
        );
        Ok(())
    }
}
