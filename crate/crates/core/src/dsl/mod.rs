//! Plain-text Lagrangian-density language.
//!
//! ```text
//! i*hbar*psi^* * dpsi/dt - (hbar^2/(2*m))*dot(grad(psi*),grad(psi)) - V*psi^* *psi
//! ```
//!
//! `psi^*` and `conj(expr)` conjugate; `^` otherwise takes an integer or a
//! parenthesized ratio such as `^(1/3)`. Spatial derivatives are written
//! `grad(psi)`, `lap(psi)` and `dot(grad(A),grad(B))`; the arguments may be
//! any expression of `psi`, `psi^*` and constants and are expanded with the
//! chain rule. Constants `a` through `g` (optionally suffixed, `e2`, `g_p`)
//! are complex couplings. `#` starts a comment.

mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use parser::parse;
pub use printer::{pretty_print, pretty_unicode, superscript};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> SourceSpan {
        SourceSpan { line, column, length }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> ParseDiagnostic {
        ParseDiagnostic {
            span,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    /// Render with a caret line under the offending source text.
    pub fn render(&self, src: &str) -> String {
        let line = src.lines().nth(self.span.line - 1).unwrap_or("");
        let pad: String = line
            .chars()
            .take(self.span.column - 1)
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        format!(
            "{}:{}: {}\n  {line}\n  {pad}{}",
            self.span.line,
            self.span.column,
            self.message,
            "^".repeat(self.span.length.max(1))
        )
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{kind} at {}:{}: {}", self.span.line, self.span.column, self.message)
    }
}
