use num_traits::{One, Signed, Zero};

use crate::symexpr::{is_negative_real, Coeff, FieldExpr, FieldSymbol, Rational, Residual};
use crate::symexpr::{Field, Param};

/// Text in the Lagrangian language that parses back to `e`.
pub fn pretty_print(e: &FieldExpr) -> String {
    let terms = e.terms();
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        let (negative, body) = term(t);
        match (k, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&body);
    }
    out
}

fn rational(q: &Rational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("({}/{})", q.numer(), q.denom())
    }
}

fn coefficient(c: &Coeff) -> String {
    if c.im.is_zero() {
        return rational(&c.re);
    }
    let imag = if c.im.is_one() {
        "i".to_string()
    } else if (-c.im.clone()).is_one() {
        "-i".to_string()
    } else {
        format!("{}*i", rational(&c.im))
    };
    if c.re.is_zero() {
        if c.im.is_one() {
            imag
        } else {
            format!("({imag})")
        }
    } else if c.im.is_negative() {
        let magnitude = -c.im.clone();
        let imag = if magnitude.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", rational(&magnitude))
        };
        format!("({}-{imag})", rational(&c.re))
    } else {
        format!("({}+{imag})", rational(&c.re))
    }
}

/// `(negative, text)` for one term of a sum.
fn term(t: &FieldExpr) -> (bool, String) {
    let (mut c, rest) = t.split_coefficient();
    let negative = is_negative_real(&c);
    if negative {
        c = -c;
    }
    let factors = match &rest {
        FieldExpr::Product(fs) => fs.clone(),
        r if r.is_one() => Vec::new(),
        r => vec![r.clone()],
    };
    let mut parts = Vec::new();
    if !c.is_one() || factors.is_empty() {
        parts.push(coefficient(&c));
    }
    parts.extend(factors.iter().map(factor));
    (negative, join_factors(&parts))
}

fn join_factors(parts: &[String]) -> String {
    let mut out = String::new();
    for (k, p) in parts.iter().enumerate() {
        if k > 0 {
            if out.ends_with("^*") {
                out.push(' ');
            }
            out.push('*');
        }
        out.push_str(p);
    }
    out
}

fn symbol(s: FieldSymbol) -> String {
    match s {
        FieldSymbol::Psi => "psi".into(),
        FieldSymbol::PsiStar => "psi^*".into(),
        FieldSymbol::PsiDot => "dpsi/dt".into(),
        FieldSymbol::PsiStarDot => "dpsi^*/dt".into(),
        FieldSymbol::GradPsi(a) | FieldSymbol::GradPsiStar(a) => {
            let f = if s.field() == Field::Psi { "psi" } else { "psi*" };
            if a.number() == 1 {
                format!("grad({f})")
            } else {
                format!("grad({f})[{}]", a.number())
            }
        }
        FieldSymbol::LaplacianPsi => "lap(psi)".into(),
        FieldSymbol::LaplacianPsiStar => "lap(psi*)".into(),
    }
}

fn field_name(f: Field) -> &'static str {
    match f {
        Field::Psi => "psi",
        Field::PsiStar => "psi*",
    }
}

fn param(p: &Param) -> String {
    if p.is_conjugated() {
        format!("{}^*", p.name())
    } else {
        p.name().to_string()
    }
}

/// A factor of a product, parenthesized where needed.
fn factor(f: &FieldExpr) -> String {
    match f {
        FieldExpr::Pow(base, r) => {
            let b = if needs_no_parens(base) {
                factor(base)
            } else {
                format!("({})", pretty_print(base))
            };
            let exp = if r.is_integer() && r.is_positive() {
                r.to_integer().to_string()
            } else if r.is_integer() {
                format!("({})", r.to_integer())
            } else {
                format!("({}/{})", r.numer(), r.denom())
            };
            format!("{b}^{exp}")
        }
        FieldExpr::Sum(_) | FieldExpr::Product(_) | FieldExpr::Num(_) => format!("({})", pretty_print(f)),
        other => atom(other),
    }
}

fn needs_no_parens(e: &FieldExpr) -> bool {
    match e {
        FieldExpr::Sym(s) => *s != FieldSymbol::PsiStar && *s != FieldSymbol::PsiStarDot,
        FieldExpr::Param(p) => !p.is_conjugated(),
        FieldExpr::DotGrad(..) | FieldExpr::Log(_) | FieldExpr::Residual(_) => true,
        _ => false,
    }
}

fn atom(e: &FieldExpr) -> String {
    match e {
        FieldExpr::Sym(s) => symbol(*s),
        FieldExpr::Param(p) => param(p),
        FieldExpr::DotGrad(a, b) => format!("dot(grad({}),grad({}))", field_name(*a), field_name(*b)),
        FieldExpr::Residual(Residual::GradDot(inner, x)) => {
            format!("graddot({}, {})", pretty_print(inner), field_name(*x))
        }
        FieldExpr::Residual(Residual::Divergence(inner)) => format!("div({})", pretty_print(inner)),
        FieldExpr::Log(arg) => format!("ln({})", pretty_print(arg)),
        other => factor(other),
    }
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

/// Superscript form of an integer, e.g. `⁻²`.
pub fn superscript(n: i64) -> String {
    let mut s = String::new();
    if n < 0 {
        s.push('⁻');
    }
    for d in n.unsigned_abs().to_string().chars() {
        s.push(SUPERSCRIPTS[d.to_digit(10).unwrap() as usize]);
    }
    s
}

fn unicode_exponent(r: &Rational) -> String {
    if r.is_integer() {
        let n: i64 = r.to_integer().try_into().unwrap_or(i64::MAX);
        if n == 1 {
            String::new()
        } else {
            superscript(n)
        }
    } else {
        format!("^({}/{})", r.numer(), r.denom())
    }
}

fn unicode_symbol(s: FieldSymbol) -> String {
    match s {
        FieldSymbol::Psi => "ψ".into(),
        FieldSymbol::PsiStar => "ψ*".into(),
        FieldSymbol::PsiDot => "∂ψ/∂t".into(),
        FieldSymbol::PsiStarDot => "∂ψ*/∂t".into(),
        FieldSymbol::GradPsi(a) => format!("∂{}ψ", axis_name(a.number())),
        FieldSymbol::GradPsiStar(a) => format!("∂{}ψ*", axis_name(a.number())),
        FieldSymbol::LaplacianPsi => "∇²ψ".into(),
        FieldSymbol::LaplacianPsiStar => "∇²ψ*".into(),
    }
}

fn axis_name(n: usize) -> String {
    match n {
        1 => "ₓ".into(),
        2 => "ᵧ".into(),
        n => format!("_{n}"),
    }
}

fn unicode_field(f: Field) -> &'static str {
    match f {
        Field::Psi => "ψ",
        Field::PsiStar => "ψ*",
    }
}

/// Human-readable form using ψ, ∇, |ψ|² and superscripts.
pub fn pretty_unicode(e: &FieldExpr) -> String {
    let terms = e.terms();
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        let (mut c, rest) = t.split_coefficient();
        let negative = is_negative_real(&c);
        if negative {
            c = -c;
        }
        out.push_str(match (k, negative) {
            (0, true) => "−",
            (0, false) => "",
            (_, true) => " − ",
            (_, false) => " + ",
        });
        let body = unicode_monomial(&rest);
        if body.is_empty() {
            out.push_str(&unicode_coefficient(&c));
        } else if c.is_one() {
            out.push_str(&body);
        } else {
            out.push_str(&unicode_coefficient(&c));
            out.push_str(&body);
        }
    }
    out
}

fn unicode_coefficient(c: &Coeff) -> String {
    let r = |q: &Rational| {
        if q.is_integer() {
            q.to_integer().to_string()
        } else {
            format!("({}/{})", q.numer(), q.denom())
        }
    };
    if c.im.is_zero() {
        r(&c.re)
    } else if c.re.is_zero() {
        if c.im.is_one() {
            "i".into()
        } else {
            format!("{}i", r(&c.im))
        }
    } else {
        format!("({} + {}i)", r(&c.re), r(&c.im))
    }
}

fn unicode_monomial(rest: &FieldExpr) -> String {
    if rest.is_one() {
        return String::new();
    }
    let factors = match rest {
        FieldExpr::Product(fs) => fs.clone(),
        other => vec![other.clone()],
    };
    let mut params = Vec::new();
    let mut others = Vec::new();
    let (mut p, mut q) = (Rational::zero(), Rational::zero());
    let mut density = Rational::zero();
    for f in &factors {
        match f {
            FieldExpr::Param(_) => params.push(f.clone()),
            FieldExpr::Sym(FieldSymbol::Psi) => p += Rational::one(),
            FieldExpr::Sym(FieldSymbol::PsiStar) => q += Rational::one(),
            FieldExpr::Pow(b, r) => match b.as_ref() {
                FieldExpr::Sym(FieldSymbol::Psi) => p += r,
                FieldExpr::Sym(FieldSymbol::PsiStar) => q += r,
                FieldExpr::Product(bs)
                    if bs.len() == 2
                        && bs[0] == FieldExpr::psi()
                        && bs[1] == FieldExpr::psi_star() =>
                {
                    density += r
                }
                FieldExpr::Param(_) => params.push(f.clone()),
                _ => others.push(f.clone()),
            },
            _ => others.push(f.clone()),
        }
    }
    // |ψ|^{2k} absorbs the common part of ψ^p ψ*^q.
    if p.is_positive() && q.is_positive() {
        let k = if p < q { p.clone() } else { q.clone() };
        density += k.clone();
        p -= k.clone();
        q -= k;
    }
    let mut out = String::new();
    for f in &params {
        out.push_str(&unicode_factor(f));
    }
    if !density.is_zero() {
        out.push_str("|ψ|");
        out.push_str(&unicode_exponent(&(density * Rational::from_integer(2.into()))));
    }
    if !p.is_zero() {
        out.push('ψ');
        out.push_str(&unicode_exponent(&p));
    }
    if !q.is_zero() {
        out.push_str("ψ*");
        out.push_str(&unicode_exponent(&q));
    }
    for f in &others {
        out.push_str(&unicode_factor(f));
    }
    out
}

fn unicode_factor(f: &FieldExpr) -> String {
    match f {
        FieldExpr::Param(p) => {
            let name = match p.name() {
                "hbar" => "ħ".to_string(),
                other => other.to_string(),
            };
            if p.is_conjugated() {
                format!("{name}*")
            } else {
                name
            }
        }
        FieldExpr::Sym(s) => unicode_symbol(*s),
        FieldExpr::DotGrad(a, b) if a == b => format!("(∇{})²", unicode_field(*a)),
        FieldExpr::DotGrad(a, b) => format!("(∇{}·∇{})", unicode_field(*a), unicode_field(*b)),
        FieldExpr::Log(arg) => format!("ln({})", pretty_unicode(arg)),
        FieldExpr::Residual(Residual::GradDot(inner, x)) => {
            format!("(∇[{}]·∇{})", pretty_unicode(inner), unicode_field(*x))
        }
        FieldExpr::Residual(Residual::Divergence(inner)) => format!("∇·[{}]", pretty_unicode(inner)),
        FieldExpr::Pow(b, r) => {
            let base = match b.as_ref() {
                FieldExpr::Sym(FieldSymbol::Psi) | FieldExpr::Param(_) | FieldExpr::Log(_) => unicode_factor(b),
                FieldExpr::Sym(_) | FieldExpr::DotGrad(..) => unicode_factor(b),
                other => format!("({})", pretty_unicode(other)),
            };
            format!("{base}{}", unicode_exponent(r))
        }
        other => format!("({})", pretty_unicode(other)),
    }
}
