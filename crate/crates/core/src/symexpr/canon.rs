//! Normal form: a sum of monomials, each a Gaussian-rational coefficient
//! times a sorted product of atoms raised to merged rational exponents.
//!
//! Rewrites applied:
//! - nested sums and products are flattened, products are expanded over sums,
//! - like terms are collected, equal bases have their exponents added,
//! - integer powers distribute over products and expand positive powers of sums,
//! - `(x^a)^b → x^(ab)` when `b` is an integer or `|a| ≤ 1`,
//! - `ln(x^r) → r ln x`, `ln 1 → 0`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::{Coeff, FieldExpr, Param, Rational, Residual};

pub fn canonicalize(e: &FieldExpr) -> FieldExpr {
    match e {
        FieldExpr::Num(_) | FieldExpr::Sym(_) => e.clone(),
        FieldExpr::Param(p) => FieldExpr::Param(normalize_param(p)),
        FieldExpr::DotGrad(a, b) => {
            if a <= b {
                FieldExpr::DotGrad(*a, *b)
            } else {
                FieldExpr::DotGrad(*b, *a)
            }
        }
        FieldExpr::Residual(Residual::GradDot(inner, x)) => {
            let inner = canonicalize(inner);
            if matches!(inner, FieldExpr::Num(_)) {
                FieldExpr::zero()
            } else {
                FieldExpr::Residual(Residual::GradDot(Box::new(inner), *x))
            }
        }
        FieldExpr::Residual(Residual::Divergence(inner)) => {
            let inner = canonicalize(inner);
            if matches!(inner, FieldExpr::Num(_)) {
                FieldExpr::zero()
            } else {
                FieldExpr::Residual(Residual::Divergence(Box::new(inner)))
            }
        }
        FieldExpr::Log(arg) => canon_log(arg),
        FieldExpr::Pow(b, r) => canon_pow(canonicalize(b), r.clone()),
        FieldExpr::Product(fs) => canon_product(fs.iter().map(canonicalize).collect()),
        FieldExpr::Sum(ts) => canon_sum(ts.iter().map(canonicalize).collect()),
    }
}

/// True iff both sides have identical canonical trees.
pub fn structural_equal(a: &FieldExpr, b: &FieldExpr) -> bool {
    canonicalize(a) == canonicalize(b)
}

fn normalize_param(p: &Param) -> Param {
    if p.real && p.conjugated {
        let mut q = p.clone();
        q.conjugated = false;
        q
    } else {
        p.clone()
    }
}

fn canon_log(raw_arg: &FieldExpr) -> FieldExpr {
    if let FieldExpr::Pow(base, r) = raw_arg {
        return canon_product(vec![FieldExpr::num(r.clone()), canon_log(base)]);
    }
    let arg = canonicalize(raw_arg);
    match arg {
        FieldExpr::Pow(base, r) => canon_product(vec![FieldExpr::num(r), canon_log(&base)]),
        ref a if a.is_one() => FieldExpr::zero(),
        a => FieldExpr::Log(Box::new(a)),
    }
}

pub(super) fn canon_pow(base: FieldExpr, r: Rational) -> FieldExpr {
    if r.is_zero() {
        return FieldExpr::one();
    }
    if r.is_one() {
        return base;
    }
    match base {
        FieldExpr::Num(ref q) => {
            if q.is_zero() {
                return if r.is_positive() { FieldExpr::zero() } else { FieldExpr::Pow(Box::new(base), r) };
            }
            if q.is_one() {
                return FieldExpr::one();
            }
            if r.is_integer() {
                FieldExpr::Num(coeff_powi(q, &r))
            } else {
                FieldExpr::Pow(Box::new(base), r)
            }
        }
        FieldExpr::Pow(inner, a) => {
            if r.is_integer() || a.abs() <= Rational::one() {
                canon_pow(*inner, a * r)
            } else {
                FieldExpr::Pow(Box::new(FieldExpr::Pow(inner, a)), r)
            }
        }
        FieldExpr::Product(fs) if r.is_integer() => {
            canon_product(fs.into_iter().map(|f| canon_pow(f, r.clone())).collect())
        }
        FieldExpr::Sum(ts) if r.is_integer() && r.is_positive() => {
            let n = r.to_integer().try_into().unwrap_or(u32::MAX);
            let sum = FieldExpr::Sum(ts);
            canon_product(std::iter::repeat_n(sum, n as usize).collect())
        }
        other => FieldExpr::Pow(Box::new(other), r),
    }
}

fn coeff_powi(q: &Coeff, r: &Rational) -> Coeff {
    let n: i64 = r.to_integer().try_into().expect("exponent too large");
    let mut acc = Coeff::one();
    for _ in 0..n.unsigned_abs() {
        acc = acc * q.clone();
    }
    if n < 0 {
        Coeff::one() / acc
    } else {
        acc
    }
}

fn split_power(f: FieldExpr) -> (FieldExpr, Rational) {
    match f {
        FieldExpr::Pow(b, r) => (*b, r),
        other => (other, Rational::one()),
    }
}

/// Factors must already be canonical.
pub(super) fn canon_product(factors: Vec<FieldExpr>) -> FieldExpr {
    let mut coeff = Coeff::one();
    let mut pending = factors;
    let mut bases: BTreeMap<FieldExpr, Rational> = BTreeMap::new();
    let mut sums: Vec<FieldExpr> = Vec::new();

    // Merging exponents can produce new products (integer powers of product
    // bases), so iterate until nothing new appears.
    loop {
        for f in pending.drain(..) {
            match f {
                FieldExpr::Num(c) => coeff = coeff * c,
                FieldExpr::Product(gs) => {
                    for g in gs {
                        match g {
                            FieldExpr::Num(c) => coeff = coeff * c,
                            s @ FieldExpr::Sum(_) => sums.push(s),
                            other => {
                                let (b, r) = split_power(other);
                                *bases.entry(b).or_insert_with(Rational::zero) += r;
                            }
                        }
                    }
                }
                s @ FieldExpr::Sum(_) => sums.push(s),
                other => {
                    let (b, r) = split_power(other);
                    *bases.entry(b).or_insert_with(Rational::zero) += r;
                }
            }
        }
        if coeff.is_zero() {
            return FieldExpr::zero();
        }
        let mut stable = Vec::new();
        for (b, r) in std::mem::take(&mut bases) {
            if r.is_zero() {
                continue;
            }
            let is_sum_base = matches!(b, FieldExpr::Sum(_));
            if r.is_one() && !is_sum_base && !matches!(b, FieldExpr::Num(_)) {
                stable.push(b);
                continue;
            }
            if is_sum_base && r.is_one() {
                sums.push(b);
                continue;
            }
            match canon_pow(b, r) {
                FieldExpr::Num(c) => coeff = coeff * c,
                p @ FieldExpr::Product(_) => pending.push(p),
                s @ FieldExpr::Sum(_) => sums.push(s),
                other => stable.push(other),
            }
        }
        if pending.is_empty() {
            if coeff.is_zero() {
                return FieldExpr::zero();
            }
            if let Some(first) = sums.pop() {
                let mut rest = stable;
                rest.extend(sums);
                rest.push(FieldExpr::Num(coeff));
                let FieldExpr::Sum(terms) = first else { unreachable!() };
                let expanded = terms
                    .into_iter()
                    .map(|t| {
                        let mut fs = rest.clone();
                        fs.push(t);
                        canon_product(fs)
                    })
                    .collect();
                return canon_sum(expanded);
            }
            return build_product(coeff, stable);
        }
        // Return the stable factors to the pool for the next pass.
        for b in stable {
            let (b, r) = split_power(b);
            *bases.entry(b).or_insert_with(Rational::zero) += r;
        }
    }
}

fn build_product(coeff: Coeff, mut factors: Vec<FieldExpr>) -> FieldExpr {
    factors.sort();
    if factors.is_empty() {
        return FieldExpr::Num(coeff);
    }
    if coeff.is_one() {
        if factors.len() == 1 {
            return factors.pop().unwrap();
        }
        return FieldExpr::Product(factors);
    }
    let mut all = Vec::with_capacity(factors.len() + 1);
    all.push(FieldExpr::Num(coeff));
    all.extend(factors);
    FieldExpr::Product(all)
}

/// Terms must already be canonical.
pub(super) fn canon_sum(terms: Vec<FieldExpr>) -> FieldExpr {
    let mut collected: BTreeMap<FieldExpr, Coeff> = BTreeMap::new();
    let mut push = |t: FieldExpr| {
        let (c, key) = t.split_coefficient();
        let slot = collected.entry(key).or_insert_with(Coeff::zero);
        *slot = slot.clone() + c;
    };
    for t in terms {
        match t {
            FieldExpr::Sum(inner) => inner.into_iter().for_each(&mut push),
            other => push(other),
        }
    }
    let mut out: Vec<FieldExpr> = collected
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(key, c)| attach_coefficient(c, key))
        .collect();
    match out.len() {
        0 => FieldExpr::zero(),
        1 => out.pop().unwrap(),
        _ => FieldExpr::Sum(out),
    }
}

fn attach_coefficient(c: Coeff, key: FieldExpr) -> FieldExpr {
    if key.is_one() {
        return FieldExpr::Num(c);
    }
    if c.is_one() {
        return key;
    }
    match key {
        FieldExpr::Product(fs) => {
            let mut all = Vec::with_capacity(fs.len() + 1);
            all.push(FieldExpr::Num(c));
            all.extend(fs);
            FieldExpr::Product(all)
        }
        other => FieldExpr::Product(vec![FieldExpr::Num(c), other]),
    }
}
