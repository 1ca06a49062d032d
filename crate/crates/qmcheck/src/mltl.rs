//! Measurement-based temporal logic: atomic propositions, formulas, the
//! parser, and the labeling of states.
//!
//! An atomic proposition pairs a measurement operator M with a probability
//! interval I and holds on a state rho exactly when tr(M rho) lies in I.
//! Formulas combine such atoms with the usual linear-time connectives. The
//! concrete syntax is ASCII: `ap(name)`, `! & | ->`, `X U F G`, `true`,
//! `false`, with precedence unary > U > & > | > -> and right-associative
//! U and ->.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::linalg::{DensityMatrix, MeasurementOperator, Tolerances};

/// Errors from formula parsing and proposition evaluation.
#[derive(Debug, Error)]
pub enum MltlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown atomic proposition `{name}` at byte {pos}")]
    UnknownAp { name: String, pos: usize },
    #[error("dimension mismatch: operator is {operator}, state is {state}")]
    DimensionMismatch { operator: usize, state: usize },
    #[error("invalid interval [{lo}, {hi}]: {msg}")]
    BadInterval { lo: f64, hi: f64, msg: String },
}

/// A sub-interval of [0,1] with independently open or closed endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl ProbInterval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Result<Self, MltlError> {
        let reject = |msg: &str| {
            Err(MltlError::BadInterval { lo, hi, msg: msg.to_string() })
        };
        if !lo.is_finite() || !hi.is_finite() {
            return reject("endpoints must be finite");
        }
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return reject("endpoints must lie in [0,1]");
        }
        if lo > hi {
            return reject("lower endpoint exceeds upper");
        }
        if lo == hi && !(lo_closed && hi_closed) {
            return reject("a single point must have both endpoints closed");
        }
        Ok(ProbInterval { lo, hi, lo_closed, hi_closed })
    }

    /// Closed interval [lo, hi].
    pub fn closed(lo: f64, hi: f64) -> Result<Self, MltlError> {
        Self::new(lo, hi, true, true)
    }

    pub fn contains(&self, p: f64) -> bool {
        let above_lo = if self.lo_closed { p >= self.lo } else { p > self.lo };
        let below_hi = if self.hi_closed { p <= self.hi } else { p < self.hi };
        above_lo && below_hi
    }
}

impl fmt::Display for ProbInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' },
        )
    }
}

/// A named atomic proposition: "the probability of observing M lies in I".
#[derive(Debug, Clone)]
pub struct AtomicProp {
    pub name: String,
    pub operator: MeasurementOperator,
    pub interval: ProbInterval,
}

impl AtomicProp {
    pub fn new(name: impl Into<String>, operator: MeasurementOperator, interval: ProbInterval) -> Self {
        AtomicProp { name: name.into(), operator, interval }
    }
}

/// Evaluates one atomic proposition on a state.
///
/// The trace tr(M rho) of a measurement operator against a density matrix
/// is real and lies in [0,1] up to rounding; values within `tol.trace`
/// outside are clamped so closed endpoints at 0 and 1 behave as written.
pub fn eval_ap(rho: &DensityMatrix, ap: &AtomicProp, tol: &Tolerances) -> Result<bool, MltlError> {
    Ok(ap.interval.contains(measure(rho, ap, tol)?))
}

/// The clamped measurement probability tr(M rho) itself.
pub fn measure(rho: &DensityMatrix, ap: &AtomicProp, tol: &Tolerances) -> Result<f64, MltlError> {
    if ap.operator.dim() != rho.dim() {
        return Err(MltlError::DimensionMismatch { operator: ap.operator.dim(), state: rho.dim() });
    }
    let mut t = rho.expect(ap.operator.matrix()).re;
    if t < 0.0 && t >= -tol.trace {
        t = 0.0;
    }
    if t > 1.0 && t <= 1.0 + tol.trace {
        t = 1.0;
    }
    Ok(t)
}

/// One position of a word over the alphabet 2^AP: the set of proposition
/// names that hold there.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(BTreeSet<String>);

impl Letter {
    pub fn new() -> Self {
        Letter(BTreeSet::new())
    }

    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        Letter(names.into_iter().map(Into::into).collect())
    }

    pub fn insert(&mut self, name: impl Into<String>) {
        self.0.insert(name.into());
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(String::as_str).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Labels a state with the set of satisfied propositions.
pub fn label(rho: &DensityMatrix, aps: &[AtomicProp], tol: &Tolerances) -> Result<Letter, MltlError> {
    let mut letter = Letter::new();
    for ap in aps {
        if eval_ap(rho, ap, tol)? {
            letter.insert(ap.name.clone());
        }
    }
    Ok(letter)
}

/// A linear-time formula over named atomic propositions.
///
/// `And`, `Implies`, `Eventually`, and `Always` are sugar over the core
/// grammar (true, atoms, not, or, next, until); the automata translation
/// eliminates them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Ap(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }

    pub fn ap(name: impl Into<String>) -> Formula {
        Formula::Ap(name.into())
    }

    /// Names of all atomic propositions appearing in the formula.
    pub fn ap_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_aps(&mut out);
        out
    }

    fn collect_aps(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Ap(n) => {
                out.insert(n.clone());
            }
            Formula::Not(f) | Formula::Next(f) | Formula::Eventually(f) | Formula::Always(f) => {
                f.collect_aps(out)
            }
            Formula::Or(a, b) | Formula::And(a, b) | Formula::Implies(a, b)
            | Formula::Until(a, b) => {
                a.collect_aps(out);
                b.collect_aps(out);
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Fully parenthesized below the top level; re-parses to the same AST.
        fn sub(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match g {
                Formula::True | Formula::Ap(_) | Formula::Not(_) | Formula::Next(_)
                | Formula::Eventually(_) | Formula::Always(_) => write!(f, "{g}"),
                _ => write!(f, "({g})"),
            }
        }
        match self {
            Formula::True => write!(f, "true"),
            Formula::Ap(n) => write!(f, "ap({n})"),
            Formula::Not(g) => {
                write!(f, "!")?;
                sub(g, f)
            }
            Formula::Next(g) => {
                write!(f, "X ")?;
                sub(g, f)
            }
            Formula::Eventually(g) => {
                write!(f, "F ")?;
                sub(g, f)
            }
            Formula::Always(g) => {
                write!(f, "G ")?;
                sub(g, f)
            }
            Formula::Or(a, b) => {
                sub(a, f)?;
                write!(f, " | ")?;
                sub(b, f)
            }
            Formula::And(a, b) => {
                sub(a, f)?;
                write!(f, " & ")?;
                sub(b, f)
            }
            Formula::Implies(a, b) => {
                sub(a, f)?;
                write!(f, " -> ")?;
                sub(b, f)
            }
            Formula::Until(a, b) => {
                sub(a, f)?;
                write!(f, " U ")?;
                sub(b, f)
            }
        }
    }
}

/// Parses the ASCII formula syntax against a set of declared AP names.
pub fn parse(text: &str, declared: &BTreeSet<String>) -> Result<Formula, MltlError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, declared };
    let formula = p.parse_implies()?;
    if let Some(tok) = p.peek() {
        return Err(MltlError::Syntax {
            pos: tok.pos,
            msg: format!("unexpected `{}` after end of formula", tok.kind),
        });
    }
    Ok(formula)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ap(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Eventually,
    Always,
    LParen,
    RParen,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ap(n) => write!(f, "ap({n})"),
            TokenKind::True => write!(f, "true"),
            TokenKind::False => write!(f, "false"),
            TokenKind::Not => write!(f, "!"),
            TokenKind::And => write!(f, "&"),
            TokenKind::Or => write!(f, "|"),
            TokenKind::Implies => write!(f, "->"),
            TokenKind::Next => write!(f, "X"),
            TokenKind::Until => write!(f, "U"),
            TokenKind::Eventually => write!(f, "F"),
            TokenKind::Always => write!(f, "G"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
        }
    }
}

struct Token {
    kind: TokenKind,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, MltlError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                out.push(Token { kind: TokenKind::LParen, pos: i });
                i += 1;
            }
            b')' => {
                out.push(Token { kind: TokenKind::RParen, pos: i });
                i += 1;
            }
            b'!' => {
                out.push(Token { kind: TokenKind::Not, pos: i });
                i += 1;
            }
            b'&' => {
                out.push(Token { kind: TokenKind::And, pos: i });
                i += 1;
            }
            b'|' => {
                out.push(Token { kind: TokenKind::Or, pos: i });
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push(Token { kind: TokenKind::Implies, pos: i });
                    i += 2;
                } else {
                    return Err(MltlError::Syntax { pos: i, msg: "expected `->`".into() });
                }
            }
            _ if b.is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let kind = match word {
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    "X" => TokenKind::Next,
                    "U" => TokenKind::Until,
                    "F" => TokenKind::Eventually,
                    "G" => TokenKind::Always,
                    "ap" => {
                        // Expect `( name )` immediately after.
                        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                            i += 1;
                        }
                        if bytes.get(i) != Some(&b'(') {
                            return Err(MltlError::Syntax {
                                pos: i,
                                msg: "expected `(` after `ap`".into(),
                            });
                        }
                        i += 1;
                        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                            i += 1;
                        }
                        let name_start = i;
                        while i < bytes.len()
                            && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                        {
                            i += 1;
                        }
                        if i == name_start {
                            return Err(MltlError::Syntax {
                                pos: i,
                                msg: "expected a proposition name inside `ap(...)`".into(),
                            });
                        }
                        let name = text[name_start..i].to_string();
                        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                            i += 1;
                        }
                        if bytes.get(i) != Some(&b')') {
                            return Err(MltlError::Syntax {
                                pos: i,
                                msg: "expected `)` closing `ap(...)`".into(),
                            });
                        }
                        i += 1;
                        TokenKind::Ap(name)
                    }
                    other => {
                        return Err(MltlError::Syntax {
                            pos: start,
                            msg: format!("unknown keyword `{other}`"),
                        })
                    }
                };
                out.push(Token { kind, pos: start });
            }
            other => {
                return Err(MltlError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    declared: &'a BTreeSet<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map_or(0, |t| t.pos + 1)
    }

    // implies := or ('->' implies)?    right-associative
    fn parse_implies(&mut self) -> Result<Formula, MltlError> {
        let lhs = self.parse_or()?;
        if self.eat(&TokenKind::Implies) {
            let rhs = self.parse_implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    // or := and ('|' and)*
    fn parse_or(&mut self) -> Result<Formula, MltlError> {
        let mut lhs = self.parse_and()?;
        while self.eat(&TokenKind::Or) {
            let rhs = self.parse_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    // and := until ('&' until)*
    fn parse_and(&mut self) -> Result<Formula, MltlError> {
        let mut lhs = self.parse_until()?;
        while self.eat(&TokenKind::And) {
            let rhs = self.parse_until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // until := unary ('U' until)?    right-associative
    fn parse_until(&mut self) -> Result<Formula, MltlError> {
        let lhs = self.parse_unary()?;
        if self.eat(&TokenKind::Until) {
            let rhs = self.parse_until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Formula, MltlError> {
        let end = self.end_pos();
        let Some(tok) = self.bump() else {
            return Err(MltlError::Syntax { pos: end, msg: "unexpected end of formula".into() });
        };
        let pos = tok.pos;
        match tok.kind.clone() {
            TokenKind::Not => Ok(Formula::not(self.parse_unary()?)),
            TokenKind::Next => Ok(Formula::next(self.parse_unary()?)),
            TokenKind::Eventually => Ok(Formula::eventually(self.parse_unary()?)),
            TokenKind::Always => Ok(Formula::always(self.parse_unary()?)),
            TokenKind::True => Ok(Formula::True),
            TokenKind::False => Ok(Formula::not(Formula::True)),
            TokenKind::Ap(name) => {
                if !self.declared.contains(&name) {
                    return Err(MltlError::UnknownAp { name, pos });
                }
                Ok(Formula::Ap(name))
            }
            TokenKind::LParen => {
                let inner = self.parse_implies()?;
                if !self.eat(&TokenKind::RParen) {
                    let at = self.peek().map_or_else(|| self.end_pos(), |t| t.pos);
                    return Err(MltlError::Syntax { pos: at, msg: "expected `)`".into() });
                }
                Ok(inner)
            }
            other => Err(MltlError::Syntax {
                pos,
                msg: format!("unexpected `{other}`"),
            }),
        }
    }
}
