use num_traits::{ToPrimitive, Zero};

use super::lexer::{tokenize, Tok, Token};
use super::{ParseDiagnostic, SourceSpan};
use crate::symexpr::{
    canonicalize, partial_wrt, Axis, Field, FieldExpr, FieldSymbol, Rational, Residual,
};

pub fn parse(src: &str) -> Result<FieldExpr, Vec<ParseDiagnostic>> {
    let tokens = tokenize(src).map_err(|d| vec![d])?;
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.expr().map_err(|d| vec![d])?;
    let end = p.peek();
    if end.tok != Tok::Eof {
        let msg = if end.tok == Tok::RParen {
            "unbalanced parentheses: unmatched `)`".to_string()
        } else {
            format!("unexpected {}", end.tok.describe())
        };
        return Err(vec![ParseDiagnostic::error(end.span, msg)]);
    }
    Ok(canonicalize(&expr))
}

type PResult<T> = Result<T, ParseDiagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn is_constant_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    if !('a'..='g').contains(&first) {
        return false;
    }
    let rest: String = chars.collect();
    rest.is_empty()
        || rest.chars().all(|c| c.is_ascii_digit())
        || (rest.len() > 1 && rest.starts_with('_') && rest[1..].chars().all(|c| c.is_ascii_alphanumeric()))
}

const RESERVED: &[&str] = &[
    "psi", "dpsi", "dt", "grad", "lap", "dot", "ln", "conj", "graddot", "div", "i", "hbar", "m", "V",
];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, context: &str) -> PResult<Token> {
        if self.peek().tok == tok {
            return Ok(self.bump());
        }
        let found = self.peek().clone();
        let msg = if tok == Tok::RParen {
            format!("unbalanced parentheses: expected `)` {context}, found {}", found.tok.describe())
        } else {
            format!("expected {} {context}, found {}", tok.describe(), found.tok.describe())
        };
        Err(ParseDiagnostic::error(found.span, msg))
    }

    fn expr(&mut self) -> PResult<FieldExpr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term()?);
            } else if self.eat(&Tok::Minus) {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { FieldExpr::sum(terms) })
    }

    fn term(&mut self) -> PResult<FieldExpr> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat(&Tok::Star) {
                factors.push(self.factor()?);
            } else if self.eat(&Tok::Slash) {
                factors.push(self.factor()?.recip());
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { FieldExpr::product(factors) })
    }

    fn factor(&mut self) -> PResult<FieldExpr> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.factor()?);
        }
        if self.eat(&Tok::Plus) {
            return self.factor();
        }
        let mut base = self.primary()?;
        while self.peek().tok == Tok::Caret {
            let caret = self.bump();
            if self.eat(&Tok::Star) {
                base = base.conjugate();
                continue;
            }
            let exp = self.exponent(caret.span)?;
            base = base.pow(exp);
        }
        Ok(base)
    }

    fn non_rational(&self, span: SourceSpan) -> ParseDiagnostic {
        ParseDiagnostic::error(span, "non-rational exponent: use an integer or a parenthesized ratio like (1/3)")
    }

    fn integer(&mut self) -> PResult<Rational> {
        let t = self.bump();
        match t.tok {
            Tok::Number(q, false) => Ok(q),
            Tok::Number(_, true) | Tok::Ident(_) => Err(self.non_rational(t.span)),
            other => Err(ParseDiagnostic::error(
                t.span,
                format!("expected an exponent, found {}", other.describe()),
            )),
        }
    }

    fn exponent(&mut self, caret: SourceSpan) -> PResult<Rational> {
        match self.peek().tok.clone() {
            Tok::Caret => Err(ParseDiagnostic::error(
                SourceSpan::new(caret.line, caret.column, 2),
                "unexpected `^^`: expected an exponent or `*` after `^`",
            )),
            Tok::Minus => {
                self.bump();
                Ok(-self.integer()?)
            }
            Tok::LParen => {
                self.bump();
                let negative = self.eat(&Tok::Minus);
                let mut q = self.integer()?;
                if self.eat(&Tok::Slash) {
                    let den = self.integer()?;
                    if den.is_zero() {
                        return Err(ParseDiagnostic::error(self.tokens[self.pos - 1].span, "zero denominator in exponent"));
                    }
                    q /= den;
                }
                if self.peek().tok != Tok::RParen {
                    let t = self.peek().clone();
                    return Err(match t.tok {
                        Tok::Ident(_) | Tok::Number(..) | Tok::Plus | Tok::Minus | Tok::Star | Tok::Caret => {
                            self.non_rational(t.span)
                        }
                        _ => ParseDiagnostic::error(t.span, "unbalanced parentheses: expected `)` after exponent"),
                    });
                }
                self.bump();
                Ok(if negative { -q } else { q })
            }
            _ => self.integer(),
        }
    }

    fn primary(&mut self) -> PResult<FieldExpr> {
        let t = self.bump();
        match t.tok {
            Tok::Number(q, _) => Ok(FieldExpr::num(q)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "to close `(`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(&name, t.span),
            other => Err(ParseDiagnostic::error(t.span, format!("unexpected {}", other.describe()))),
        }
    }

    /// `psi*` immediately before a closing delimiter is the conjugate field.
    fn trailing_star(&mut self) -> bool {
        if self.peek().tok == Tok::Star
            && matches!(self.peek_at(1), Tok::RParen | Tok::Comma | Tok::RBracket | Tok::Eof)
        {
            self.bump();
            true
        } else {
            false
        }
    }

    fn call_arg(&mut self, name: &str) -> PResult<FieldExpr> {
        self.expect(Tok::LParen, &format!("after `{name}`"))?;
        let e = self.expr()?;
        self.expect(Tok::RParen, &format!("to close `{name}(`"))?;
        Ok(e)
    }

    fn identifier(&mut self, name: &str, span: SourceSpan) -> PResult<FieldExpr> {
        match name {
            "psi" => Ok(if self.trailing_star() { FieldExpr::psi_star() } else { FieldExpr::psi() }),
            "dpsi" => {
                let star = if self.peek().tok == Tok::Caret && *self.peek_at(1) == Tok::Star {
                    self.bump();
                    self.bump();
                    true
                } else {
                    self.eat(&Tok::Star)
                };
                self.expect(Tok::Slash, "in `dpsi/dt`")?;
                let dt = self.bump();
                if dt.tok != Tok::Ident("dt".into()) {
                    return Err(ParseDiagnostic::error(dt.span, "expected `dt` in `dpsi/dt`"));
                }
                Ok(FieldExpr::sym(if star { FieldSymbol::PsiStarDot } else { FieldSymbol::PsiDot }))
            }
            "grad" => {
                let arg = self.call_arg("grad")?;
                let axis = if self.eat(&Tok::LBracket) {
                    let t = self.bump();
                    let axis = match &t.tok {
                        Tok::Number(q, false) => q.to_integer().to_usize().and_then(Axis::new),
                        _ => None,
                    };
                    self.expect(Tok::RBracket, "after axis index")?;
                    axis.ok_or_else(|| ParseDiagnostic::error(t.span, "axis index must be a positive integer"))?
                } else {
                    Axis::X
                };
                let grads = field_gradients(&arg, span)?;
                Ok(FieldExpr::sum(
                    grads.into_iter().map(|(x, d)| d * FieldExpr::sym(x.grad(axis))).collect(),
                ))
            }
            "lap" => {
                let arg = self.call_arg("lap")?;
                let grads = field_gradients(&arg, span)?;
                let mut terms = Vec::new();
                for (x, d) in grads {
                    terms.push(d.clone() * FieldExpr::lap(x));
                    for (y, dd) in field_gradients(&d, span)? {
                        terms.push(dd * FieldExpr::dot_grad(x, y));
                    }
                }
                Ok(FieldExpr::sum(terms))
            }
            "dot" => {
                self.expect(Tok::LParen, "after `dot`")?;
                let a = self.grad_arg()?;
                self.expect(Tok::Comma, "between `dot` arguments")?;
                let b = self.grad_arg()?;
                self.expect(Tok::RParen, "to close `dot(`")?;
                let mut terms = Vec::new();
                for (x, da) in field_gradients(&a, span)? {
                    for (y, db) in field_gradients(&b, span)? {
                        terms.push(da.clone() * db * FieldExpr::dot_grad(x, y));
                    }
                }
                Ok(FieldExpr::sum(terms))
            }
            "ln" => Ok(FieldExpr::ln(self.call_arg("ln")?)),
            "conj" => Ok(self.call_arg("conj")?.conjugate()),
            "div" => Ok(FieldExpr::Residual(Residual::Divergence(Box::new(canonicalize(
                &self.call_arg("div")?,
            ))))),
            "graddot" => {
                self.expect(Tok::LParen, "after `graddot`")?;
                let inner = self.expr()?;
                self.expect(Tok::Comma, "between `graddot` arguments")?;
                let at = self.peek().span;
                let field = match canonicalize(&self.expr()?) {
                    FieldExpr::Sym(FieldSymbol::Psi) => Field::Psi,
                    FieldExpr::Sym(FieldSymbol::PsiStar) => Field::PsiStar,
                    _ => return Err(ParseDiagnostic::error(at, "second `graddot` argument must be `psi` or `psi^*`")),
                };
                self.expect(Tok::RParen, "to close `graddot(`")?;
                Ok(FieldExpr::Residual(Residual::GradDot(Box::new(canonicalize(&inner)), field)))
            }
            "i" => Ok(FieldExpr::imag_unit()),
            "hbar" => Ok(FieldExpr::hbar()),
            "m" => Ok(FieldExpr::mass()),
            "V" => Ok(FieldExpr::potential()),
            other if !RESERVED.contains(&other) && is_constant_name(other) => Ok(FieldExpr::param(other)),
            other => Err(ParseDiagnostic::error(span, format!("unknown identifier `{other}`"))),
        }
    }

    fn grad_arg(&mut self) -> PResult<FieldExpr> {
        let t = self.bump();
        if t.tok != Tok::Ident("grad".into()) {
            return Err(ParseDiagnostic::error(t.span, "`dot` takes two `grad(...)` arguments"));
        }
        self.call_arg("grad")
    }
}

/// `∂A/∂ψ` and `∂A/∂ψ*` for an expression of the fields and constants only.
fn field_gradients(a: &FieldExpr, span: SourceSpan) -> PResult<Vec<(Field, FieldExpr)>> {
    let a = canonicalize(a);
    let ok = !a.any(|n| match n {
        FieldExpr::Sym(s) => !matches!(s, FieldSymbol::Psi | FieldSymbol::PsiStar),
        FieldExpr::Param(p) => p.is_spatially_varying(),
        FieldExpr::DotGrad(..) | FieldExpr::Residual(_) => true,
        _ => false,
    });
    if !ok {
        return Err(ParseDiagnostic::error(
            span,
            "spatial derivatives apply only to expressions of `psi`, `psi^*` and constants",
        ));
    }
    Ok([Field::Psi, Field::PsiStar]
        .into_iter()
        .map(|x| (x, partial_wrt(&a, x.value()).expr))
        .filter(|(_, d)| !d.is_zero())
        .collect())
}
