use std::fmt;

use serde::{Deserialize, Serialize};

use super::LtlfError;

/// Ordered set of atomic propositions. Symbol bitmasks index into it, so
/// the declaration order is part of every downstream artifact (DFA symbol
/// tables, trace serializations) and must stay stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    /// Builds an alphabet from proposition names, rejecting duplicates and
    /// the reserved operator letters.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, LtlfError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(LtlfError::BadAlphabet("no propositions declared".into()));
        }
        if names.len() > 16 {
            return Err(LtlfError::BadAlphabet(format!(
                "{} propositions declared, at most 16 supported",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if matches!(n.as_str(), "X" | "F" | "G" | "U") {
                return Err(LtlfError::BadAlphabet(format!(
                    "`{n}` is a reserved operator name"
                )));
            }
            if names[..i].contains(n) {
                return Err(LtlfError::BadAlphabet(format!("duplicate proposition `{n}`")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// Number of distinct symbols, `2^|AP|`.
    pub fn symbol_count(&self) -> usize {
        1usize << self.names.len()
    }

    /// Symbol containing exactly the given propositions. Panics on unknown
    /// names; use [`Alphabet::index_of`] to validate first.
    pub fn symbol(&self, props: &[&str]) -> Symbol {
        let mut bits = 0u16;
        for p in props {
            let i = self
                .index_of(p)
                .unwrap_or_else(|| panic!("proposition `{p}` not in alphabet"));
            bits |= 1 << i;
        }
        Symbol(bits)
    }

    /// Renders a symbol as `{a,b}` (or `{}` for the empty symbol).
    pub fn render_symbol(&self, sym: Symbol) -> String {
        let mut parts = Vec::new();
        for (i, n) in self.names.iter().enumerate() {
            if sym.contains(i) {
                parts.push(n.as_str());
            }
        }
        format!("{{{}}}", parts.join(","))
    }
}

/// One trace position: the set of propositions holding there, as a bitmask
/// over the alphabet's declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol(pub u16);

impl Symbol {
    pub const EMPTY: Symbol = Symbol(0);

    pub fn singleton(prop_index: usize) -> Symbol {
        Symbol(1 << prop_index)
    }

    pub fn contains(self, prop_index: usize) -> bool {
        self.0 & (1 << prop_index) != 0
    }

    pub fn prop_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Index of the only proposition, for singleton symbols.
    pub fn single_prop(self) -> Option<usize> {
        (self.prop_count() == 1).then(|| self.0.trailing_zeros() as usize)
    }
}

/// A finite trace: a sequence of symbols.
pub type Trace = Vec<Symbol>;

/// Abstract syntax tree of a finite-trace temporal-logic formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Always(Box<Formula>),
    Eventually(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn until(l: Formula, r: Formula) -> Self {
        Formula::Until(Box::new(l), Box::new(r))
    }

    /// All atom names appearing in the formula, in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Atom(a) => {
                if !out.contains(&a.as_str()) {
                    out.push(a);
                }
            }
            Formula::Not(f) | Formula::Next(f) | Formula::Always(f) | Formula::Eventually(f) => {
                f.collect_atoms(out)
            }
            Formula::And(l, r)
            | Formula::Or(l, r)
            | Formula::Implies(l, r)
            | Formula::Until(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!{x}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Implies(l, r) => write!(f, "({l} -> {r})"),
            Formula::Next(x) => write!(f, "X {x}"),
            Formula::Always(x) => write!(f, "G {x}"),
            Formula::Eventually(x) => write!(f, "F {x}"),
            Formula::Until(l, r) => write!(f, "({l} U {r})"),
        }
    }
}
