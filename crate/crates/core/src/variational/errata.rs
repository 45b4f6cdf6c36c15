/// Known discrepancies between printed reference equations and the
/// mechanical derivation. Consulted by the reproduction table so that a
/// registered discrepancy is reported as such instead of as a failure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErratumKind {
    /// One term's printed sign is opposite to the derived one.
    ConstantTermSign,
    /// The printed divergence identity holds only in one spatial dimension.
    OneDimensionalOnly,
    /// A trailing `= 0` after the right-hand side; ignored.
    TrailingEqualsZero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Erratum {
    pub equation: &'static str,
    pub kind: ErratumKind,
    /// For `ConstantTermSign`: the printed term (DSL syntax, without sign).
    pub term: Option<&'static str>,
    pub note: &'static str,
}

pub const ERRATA: &[Erratum] = &[
    Erratum {
        equation: "(46)",
        kind: ErratumKind::ConstantTermSign,
        term: Some("f^* *psi"),
        note: "erratum: constant-term sign",
    },
    Erratum {
        equation: "(22)",
        kind: ErratumKind::OneDimensionalOnly,
        term: None,
        note: "D=1 only",
    },
    Erratum {
        equation: "(23)",
        kind: ErratumKind::OneDimensionalOnly,
        term: None,
        note: "D=1 only",
    },
    Erratum {
        equation: "(55)",
        kind: ErratumKind::TrailingEqualsZero,
        term: None,
        note: "trailing \"=0\" ignored",
    },
    Erratum {
        equation: "(58)",
        kind: ErratumKind::TrailingEqualsZero,
        term: None,
        note: "trailing \"=0\" ignored",
    },
    Erratum {
        equation: "(59)",
        kind: ErratumKind::TrailingEqualsZero,
        term: None,
        note: "trailing \"=0\" ignored",
    },
    Erratum {
        equation: "(62)",
        kind: ErratumKind::TrailingEqualsZero,
        term: None,
        note: "trailing \"=0\" ignored",
    },
];

pub fn errata_for(equation: &str) -> impl Iterator<Item = &'static Erratum> + '_ {
    ERRATA.iter().filter(move |e| e.equation == equation)
}
