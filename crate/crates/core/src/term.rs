//! Provenance-carrying element names.
//!
//! Every point and line carries a [`Term`]: either a declared base name, or a
//! generated `meet(l1,l2)` / `join(p1,p2)` built from the elements it was
//! created from. Terms are compared structurally, so two runs of the same
//! construction name their elements identically without any counters.
//!
//! Grammar of the textual form:
//!
//! ```text
//! term := base | "meet(" term "," term ")" | "join(" term "," term ")"
//! base := one or more characters other than whitespace, '(', ')', ',' and '"'
//! ```
//!
//! The names `0` and `1` are reserved for the bottom and top of the lattice view.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Names reserved for the lattice bounds.
pub const RESERVED_NAMES: [&str; 2] = ["0", "1"];

/// Whether an element is a point or a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Point,
    Line,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementKind::Point => f.write_str("point"),
            ElementKind::Line => f.write_str("line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TermKind {
    Base(Arc<str>),
    /// Line through two points.
    Join(Term, Term),
    /// Point on two lines.
    Meet(Term, Term),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TermNode {
    kind: TermKind,
    stage: u32,
}

/// A shared, immutable element name.
///
/// The stage of a base term is 0; the stage of a generated term is one more
/// than the larger stage of its two arguments. Arguments are stored in
/// canonical order (smaller first).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Term(Arc<TermNode>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("empty name")]
    Empty,
    #[error("name {0:?} is reserved")]
    Reserved(String),
    #[error("invalid character {ch:?} in name {name:?}")]
    InvalidChar { name: String, ch: char },
    #[error("malformed term {text:?}: {reason}")]
    Malformed { text: String, reason: &'static str },
    #[error("term {0} has identical arguments")]
    DegenerateArguments(String),
    #[error("term {term} has arguments in non-canonical order")]
    NonCanonicalOrder { term: String },
}

fn valid_base_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"'))
}

impl Term {
    /// A declared base element. Rejects reserved and syntactically unusable names.
    pub fn base(name: &str) -> Result<Self, TermError> {
        if name.is_empty() {
            return Err(TermError::Empty);
        }
        if RESERVED_NAMES.contains(&name) {
            return Err(TermError::Reserved(name.to_string()));
        }
        if let Some(ch) = name.chars().find(|c| !valid_base_char(*c)) {
            return Err(TermError::InvalidChar {
                name: name.to_string(),
                ch,
            });
        }
        Ok(Self::base_unchecked(name))
    }

    fn base_unchecked(name: &str) -> Self {
        Term(Arc::new(TermNode {
            kind: TermKind::Base(Arc::from(name)),
            stage: 0,
        }))
    }

    /// The point on lines `a` and `b`. Argument order does not matter.
    ///
    /// # Panics
    /// If `a == b`.
    pub fn meet(a: &Term, b: &Term) -> Self {
        let (x, y) = Self::ordered(a, b);
        Self::generated(TermKind::Meet(x, y))
    }

    /// The line through points `a` and `b`. Argument order does not matter.
    ///
    /// # Panics
    /// If `a == b`.
    pub fn join(a: &Term, b: &Term) -> Self {
        let (x, y) = Self::ordered(a, b);
        Self::generated(TermKind::Join(x, y))
    }

    fn ordered(a: &Term, b: &Term) -> (Term, Term) {
        match a.cmp(b) {
            Ordering::Less => (a.clone(), b.clone()),
            Ordering::Greater => (b.clone(), a.clone()),
            Ordering::Equal => panic!("generated term over identical arguments {a}"),
        }
    }

    fn generated(kind: TermKind) -> Self {
        let stage = match &kind {
            TermKind::Base(_) => 0,
            TermKind::Join(a, b) | TermKind::Meet(a, b) => a.stage().max(b.stage()) + 1,
        };
        Term(Arc::new(TermNode { kind, stage }))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn stage(&self) -> u32 {
        self.0.stage
    }

    pub fn is_base(&self) -> bool {
        matches!(self.0.kind, TermKind::Base(_))
    }

    /// The element kind implied by the term's shape: meets are points, joins are
    /// lines, base terms carry no kind of their own.
    pub fn implied_kind(&self) -> Option<ElementKind> {
        match self.0.kind {
            TermKind::Base(_) => None,
            TermKind::Join(..) => Some(ElementKind::Line),
            TermKind::Meet(..) => Some(ElementKind::Point),
        }
    }

    fn kind_rank(&self) -> u8 {
        match self.0.kind {
            TermKind::Base(_) => 0,
            TermKind::Join(..) => 1,
            TermKind::Meet(..) => 2,
        }
    }

    /// Parses the textual form. Arguments must already be in canonical order so
    /// that every element has exactly one spelling.
    pub fn parse(text: &str) -> Result<Self, TermError> {
        let mut parser = Parser { text, pos: 0 };
        let term = parser.term()?;
        if parser.pos != text.len() {
            return Err(TermError::Malformed {
                text: text.to_string(),
                reason: "trailing characters",
            });
        }
        Ok(term)
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn malformed(&self, reason: &'static str) -> TermError {
        TermError::Malformed {
            text: self.text.to_string(),
            reason,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TermError> {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(match c {
                ',' => self.malformed("expected ','"),
                ')' => self.malformed("expected ')'"),
                _ => self.malformed("unexpected character"),
            })
        }
    }

    fn term(&mut self) -> Result<Term, TermError> {
        let rest = self.rest();
        for (prefix, is_meet) in [("meet(", true), ("join(", false)] {
            if rest.starts_with(prefix) {
                self.pos += prefix.len();
                let a = self.term()?;
                self.expect(',')?;
                let b = self.term()?;
                self.expect(')')?;
                let kind_ok = |t: &Term| match t.implied_kind() {
                    None => true,
                    Some(ElementKind::Line) => is_meet,
                    Some(ElementKind::Point) => !is_meet,
                };
                if !kind_ok(&a) || !kind_ok(&b) {
                    return Err(self.malformed("argument of the wrong element kind"));
                }
                let term = if is_meet {
                    Term::generated(TermKind::Meet(a.clone(), b.clone()))
                } else {
                    Term::generated(TermKind::Join(a.clone(), b.clone()))
                };
                return match a.cmp(&b) {
                    Ordering::Less => Ok(term),
                    Ordering::Equal => Err(TermError::DegenerateArguments(term.to_string())),
                    Ordering::Greater => Err(TermError::NonCanonicalOrder {
                        term: term.to_string(),
                    }),
                };
            }
        }
        let len = rest
            .char_indices()
            .find(|(_, c)| !valid_base_char(*c))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.malformed("expected a name"));
        }
        let name = rest[..len].to_owned();
        self.pos += len;
        if RESERVED_NAMES.contains(&name.as_str()) {
            return Err(TermError::Reserved(name));
        }
        Ok(Term::base_unchecked(&name))
    }
}

/// Canonical total order: by stage, then base < join < meet, then base names
/// lexicographically or arguments lexicographically.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.stage()
            .cmp(&other.stage())
            .then_with(|| self.kind_rank().cmp(&other.kind_rank()))
            .then_with(|| match (&self.0.kind, &other.0.kind) {
                (TermKind::Base(a), TermKind::Base(b)) => a.cmp(b),
                (TermKind::Join(a1, a2), TermKind::Join(b1, b2))
                | (TermKind::Meet(a1, a2), TermKind::Meet(b1, b2)) => {
                    a1.cmp(b1).then_with(|| a2.cmp(b2))
                }
                _ => unreachable!("kind ranks already differ"),
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.kind {
            TermKind::Base(name) => f.write_str(name),
            TermKind::Join(a, b) => write!(f, "join({a},{b})"),
            TermKind::Meet(a, b) => write!(f, "meet({a},{b})"),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}@{}", self.stage())
    }
}
