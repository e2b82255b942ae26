//! Safety LTL: architecture, formulas, parsing, normal form, and a lasso
//! evaluation oracle used as ground truth by the test suites.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown proposition `{name}` at position {pos}")]
    UnknownProposition { name: String, pos: usize },
    #[error("formula is outside the safety fragment: `{operator}` remains after NNF")]
    SafetyFragmentViolation { operator: &'static str },
    #[error("invalid architecture: {0}")]
    BadArchitecture(String),
}

/// The fixed partition of atomic propositions into the outputs of the
/// environment, the controller, and the plant. Inputs of a process are the
/// outputs of the other two. AP order is env, then ctrl, then plant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    env: Vec<String>,
    ctrl: Vec<String>,
    plant: Vec<String>,
    index: HashMap<String, usize>,
}

impl Architecture {
    pub fn new<S: Into<String>>(
        env: Vec<S>,
        ctrl: Vec<S>,
        plant: Vec<S>,
    ) -> Result<Self, LogicError> {
        let env: Vec<String> = env.into_iter().map(Into::into).collect();
        let ctrl: Vec<String> = ctrl.into_iter().map(Into::into).collect();
        let plant: Vec<String> = plant.into_iter().map(Into::into).collect();
        if env.is_empty() && ctrl.is_empty() && plant.is_empty() {
            return Err(LogicError::BadArchitecture(
                "at least one proposition is required".into(),
            ));
        }
        let mut index = HashMap::new();
        for (i, name) in env.iter().chain(&ctrl).chain(&plant).enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(LogicError::BadArchitecture(format!(
                    "proposition `{name}` occurs in more than one output set"
                )));
            }
        }
        if index.len() > 20 {
            return Err(LogicError::BadArchitecture(
                "more than 20 atomic propositions are not supported".into(),
            ));
        }
        Ok(Self { env, ctrl, plant, index })
    }

    pub fn env_props(&self) -> &[String] {
        &self.env
    }

    pub fn ctrl_props(&self) -> &[String] {
        &self.ctrl
    }

    pub fn plant_props(&self) -> &[String] {
        &self.plant
    }

    pub fn ap_count(&self) -> usize {
        self.index.len()
    }

    /// Number of letters in the alphabet, `2^|AP|`.
    pub fn letter_count(&self) -> usize {
        1 << self.ap_count()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn ap_name(&self, i: usize) -> &str {
        self.env
            .iter()
            .chain(&self.ctrl)
            .chain(&self.plant)
            .nth(i)
            .expect("proposition index out of range")
    }

    pub fn ap_names(&self) -> impl Iterator<Item = &str> {
        self.env.iter().chain(&self.ctrl).chain(&self.plant).map(String::as_str)
    }

    pub fn env_mask(&self) -> u32 {
        ((1u32 << self.env.len()) - 1) << 0
    }

    pub fn ctrl_mask(&self) -> u32 {
        ((1u32 << self.ctrl.len()) - 1) << self.env.len()
    }

    pub fn plant_mask(&self) -> u32 {
        ((1u32 << self.plant.len()) - 1) << (self.env.len() + self.ctrl.len())
    }

    /// Inputs of the plant process: env and ctrl outputs.
    pub fn plant_input_mask(&self) -> u32 {
        self.env_mask() | self.ctrl_mask()
    }

    /// Inputs of the controller process: env and plant outputs.
    pub fn ctrl_input_mask(&self) -> u32 {
        self.env_mask() | self.plant_mask()
    }
}

/// One letter over an ordered proposition set, stored as a bitset. Bit `i`
/// corresponds to proposition `i` of the owning set's order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Valuation(pub u32);

impl Valuation {
    pub const EMPTY: Valuation = Valuation(0);

    pub fn contains(self, bit: usize) -> bool {
        self.0 >> bit & 1 == 1
    }

    /// Projection to a subset of the propositions (the `σ ∩ Y` of letters).
    pub fn project(self, mask: u32) -> Valuation {
        Valuation(self.0 & mask)
    }

    pub fn union(self, other: Valuation) -> Valuation {
        Valuation(self.0 | other.0)
    }

    /// Builds a valuation from proposition names.
    pub fn from_names(arch: &Architecture, names: &[&str]) -> Valuation {
        let mut bits = 0;
        for n in names {
            let i = arch.index_of(n).expect("unknown proposition");
            bits |= 1 << i;
        }
        Valuation(bits)
    }

    pub fn describe(self, arch: &Architecture) -> String {
        let parts: Vec<String> = (0..arch.ap_count())
            .map(|i| {
                if self.contains(i) {
                    arch.ap_name(i).to_string()
                } else {
                    format!("!{}", arch.ap_name(i))
                }
            })
            .collect();
        format!("{{{}}}", parts.join(" "))
    }
}

/// An ultimately periodic word `prefix · loop^ω`; the finite certificate
/// object that all trace-level tests are run against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Valuation>,
    pub cycle: Vec<Valuation>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Valuation>, cycle: Vec<Valuation>) -> Self {
        assert!(!cycle.is_empty(), "lasso loop must be nonempty");
        Self { prefix, cycle }
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Letter at unfolded position `i`.
    pub fn at(&self, i: usize) -> Valuation {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }
}

/// LTL formula tree. `And`/`Or` are n-ary and kept flattened, sorted and
/// deduplicated by the smart constructors, which gives cheap structural
/// canonicalization of progression residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Vec<Ltl>),
    Or(Vec<Ltl>),
    Next(Box<Ltl>),
    Globally(Box<Ltl>),
    Finally(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    WeakUntil(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
}

impl Ltl {
    pub fn atom(name: impl Into<String>) -> Ltl {
        Ltl::Atom(name.into())
    }

    pub fn not(f: Ltl) -> Ltl {
        match f {
            Ltl::True => Ltl::False,
            Ltl::False => Ltl::True,
            Ltl::Not(inner) => *inner,
            other => Ltl::Not(Box::new(other)),
        }
    }

    pub fn and(children: Vec<Ltl>) -> Ltl {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Ltl::True => {}
                Ltl::False => return Ltl::False,
                Ltl::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Ltl::True,
            1 => flat.pop().unwrap(),
            _ => Ltl::And(flat),
        }
    }

    pub fn or(children: Vec<Ltl>) -> Ltl {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Ltl::False => {}
                Ltl::True => return Ltl::True,
                Ltl::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Ltl::False,
            1 => flat.pop().unwrap(),
            _ => Ltl::Or(flat),
        }
    }

    pub fn next(f: Ltl) -> Ltl {
        Ltl::Next(Box::new(f))
    }

    pub fn globally(f: Ltl) -> Ltl {
        Ltl::Globally(Box::new(f))
    }

    pub fn finally(f: Ltl) -> Ltl {
        Ltl::Finally(Box::new(f))
    }

    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    pub fn weak_until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::WeakUntil(Box::new(a), Box::new(b))
    }

    pub fn release(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Release(Box::new(a), Box::new(b))
    }

    /// All atom names occurring in the formula.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(n) => out.push(n),
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Globally(f) | Ltl::Finally(f) => {
                f.collect_atoms(out)
            }
            Ltl::And(v) | Ltl::Or(v) => {
                for f in v {
                    f.collect_atoms(out)
                }
            }
            Ltl::Until(a, b) | Ltl::WeakUntil(a, b) | Ltl::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

// Printing with minimal parentheses. Precedence: unary > & > | > W/U/R.
fn prec(f: &Ltl) -> u8 {
    match f {
        Ltl::And(_) => 3,
        Ltl::Or(_) => 2,
        Ltl::Until(..) | Ltl::WeakUntil(..) | Ltl::Release(..) => 1,
        _ => 4,
    }
}

fn fmt_child(f: &Ltl, parent: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(f) <= parent {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ltl::True => write!(out, "true"),
            Ltl::False => write!(out, "false"),
            Ltl::Atom(n) => write!(out, "{n}"),
            Ltl::Not(f) => {
                write!(out, "!")?;
                fmt_child(f, 3, out)
            }
            Ltl::Next(f) => {
                write!(out, "X ")?;
                fmt_child(f, 3, out)
            }
            Ltl::Globally(f) => {
                write!(out, "G ")?;
                fmt_child(f, 3, out)
            }
            Ltl::Finally(f) => {
                write!(out, "F ")?;
                fmt_child(f, 3, out)
            }
            Ltl::And(v) => {
                for (i, f) in v.iter().enumerate() {
                    if i > 0 {
                        write!(out, " & ")?;
                    }
                    fmt_child(f, 2, out)?;
                }
                Ok(())
            }
            Ltl::Or(v) => {
                for (i, f) in v.iter().enumerate() {
                    if i > 0 {
                        write!(out, " | ")?;
                    }
                    fmt_child(f, 1, out)?;
                }
                Ok(())
            }
            Ltl::Until(a, b) => {
                fmt_child(a, 1, out)?;
                write!(out, " U ")?;
                fmt_child(b, 0, out)
            }
            Ltl::WeakUntil(a, b) => {
                fmt_child(a, 1, out)?;
                write!(out, " W ")?;
                fmt_child(b, 0, out)
            }
            Ltl::Release(a, b) => {
                fmt_child(a, 1, out)?;
                write!(out, " R ")?;
                fmt_child(b, 0, out)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Iff,
    LPar,
    RPar,
    Next,
    Glob,
    Fin,
    U,
    W,
    R,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((i, Tok::LPar));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RPar));
                i += 1;
            }
            '!' => {
                toks.push((i, Tok::Bang));
                i += 1;
            }
            '&' => {
                toks.push((i, Tok::Amp));
                i += 1;
            }
            '|' => {
                toks.push((i, Tok::Pipe));
                i += 1;
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return Err(LogicError::Syntax { pos: i, msg: "expected `->`".into() });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    toks.push((i, Tok::Iff));
                    i += 3;
                } else {
                    return Err(LogicError::Syntax { pos: i, msg: "expected `<->`".into() });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "G" => Tok::Glob,
                    "F" => Tok::Fin,
                    "U" => Tok::U,
                    "W" => Tok::W,
                    "R" => Tok::R,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((start, tok));
            }
            _ => {
                return Err(LogicError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    atom_check: Option<&'a Architecture>,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(LogicError::Syntax { pos: self.here(), msg: format!("expected {what}") })
        }
    }

    // Lowest precedence: U / W / R, right associative.
    fn formula(&mut self) -> Result<Ltl, LogicError> {
        let lhs = self.iff()?;
        match self.peek() {
            Some(Tok::U) => {
                self.pos += 1;
                Ok(Ltl::until(lhs, self.formula()?))
            }
            Some(Tok::W) => {
                self.pos += 1;
                Ok(Ltl::weak_until(lhs, self.formula()?))
            }
            Some(Tok::R) => {
                self.pos += 1;
                Ok(Ltl::release(lhs, self.formula()?))
            }
            _ => Ok(lhs),
        }
    }

    fn iff(&mut self) -> Result<Ltl, LogicError> {
        let lhs = self.implication()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.implication()?;
            // a <-> b desugars to (a & b) | (!a & !b)
            Ok(Ltl::or(vec![
                Ltl::and(vec![lhs.clone(), rhs.clone()]),
                Ltl::and(vec![Ltl::not(lhs), Ltl::not(rhs)]),
            ]))
        } else {
            Ok(lhs)
        }
    }

    fn implication(&mut self) -> Result<Ltl, LogicError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implication()?;
            Ok(Ltl::or(vec![Ltl::not(lhs), rhs]))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Ltl, LogicError> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            parts.push(self.conjunction()?);
        }
        Ok(Ltl::or(parts))
    }

    fn conjunction(&mut self) -> Result<Ltl, LogicError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(Ltl::and(parts))
    }

    fn unary(&mut self) -> Result<Ltl, LogicError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Bang) => Ok(Ltl::not(self.unary()?)),
            Some(Tok::Next) => Ok(Ltl::next(self.unary()?)),
            Some(Tok::Glob) => Ok(Ltl::globally(self.unary()?)),
            Some(Tok::Fin) => Ok(Ltl::finally(self.unary()?)),
            Some(Tok::True) => Ok(Ltl::True),
            Some(Tok::False) => Ok(Ltl::False),
            Some(Tok::Ident(name)) => {
                if let Some(arch) = self.atom_check {
                    if arch.index_of(&name).is_none() {
                        return Err(LogicError::UnknownProposition { name, pos });
                    }
                }
                Ok(Ltl::Atom(name))
            }
            Some(Tok::LPar) => {
                let inner = self.formula()?;
                self.expect(Tok::RPar, "closing `)`")?;
                Ok(inner)
            }
            _ => Err(LogicError::Syntax { pos, msg: "expected a formula".into() }),
        }
    }
}

/// Parses the ASCII LTL grammar. `->` and `<->` are surface sugar and are
/// eliminated here; every atom must occur in the architecture.
pub fn parse_ltl(text: &str, arch: &Architecture) -> Result<Ltl, LogicError> {
    parse_with(text, Some(arch))
}

/// Parses without checking atom names; used for guard formulas in machine
/// files, where the proposition set comes from the file header.
pub fn parse_unchecked(text: &str) -> Result<Ltl, LogicError> {
    parse_with(text, None)
}

fn parse_with(text: &str, arch: Option<&Architecture>) -> Result<Ltl, LogicError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, atom_check: arch, end: text.len() };
    let f = p.formula()?;
    if p.pos != p.toks.len() {
        return Err(LogicError::Syntax {
            pos: p.here(),
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Negation normal form and the safety fragment

pub struct NnfResult {
    pub formula: Ltl,
    /// True iff the NNF contains neither `U` nor `F`; this is the syntactic
    /// safety fragment accepted by the automaton translation.
    pub is_safety: bool,
}

/// Rewrites into negation normal form: negations pushed onto atoms, `¬X` to
/// `X¬`, `¬G`/`¬F` to their duals, `¬W` via the Until dual.
pub fn to_safety_nnf(f: &Ltl) -> NnfResult {
    let formula = nnf(f, false);
    let is_safety = in_safety_fragment(&formula);
    NnfResult { formula, is_safety }
}

/// NNF plus the fragment gate used by the synthesis pipeline.
pub fn safety_nnf(f: &Ltl) -> Result<Ltl, LogicError> {
    let r = to_safety_nnf(f);
    if r.is_safety {
        Ok(r.formula)
    } else {
        let operator = if contains_until(&r.formula) { "U" } else { "F" };
        Err(LogicError::SafetyFragmentViolation { operator })
    }
}

fn nnf(f: &Ltl, neg: bool) -> Ltl {
    match (f, neg) {
        (Ltl::True, false) | (Ltl::False, true) => Ltl::True,
        (Ltl::True, true) | (Ltl::False, false) => Ltl::False,
        (Ltl::Atom(n), false) => Ltl::Atom(n.clone()),
        (Ltl::Atom(n), true) => Ltl::not(Ltl::Atom(n.clone())),
        (Ltl::Not(g), _) => nnf(g, !neg),
        (Ltl::And(v), false) => Ltl::and(v.iter().map(|g| nnf(g, false)).collect()),
        (Ltl::And(v), true) => Ltl::or(v.iter().map(|g| nnf(g, true)).collect()),
        (Ltl::Or(v), false) => Ltl::or(v.iter().map(|g| nnf(g, false)).collect()),
        (Ltl::Or(v), true) => Ltl::and(v.iter().map(|g| nnf(g, true)).collect()),
        (Ltl::Next(g), _) => Ltl::next(nnf(g, neg)),
        (Ltl::Globally(g), false) => Ltl::globally(nnf(g, false)),
        (Ltl::Globally(g), true) => Ltl::finally(nnf(g, true)),
        (Ltl::Finally(g), false) => Ltl::finally(nnf(g, false)),
        (Ltl::Finally(g), true) => Ltl::globally(nnf(g, true)),
        (Ltl::Until(a, b), false) => Ltl::until(nnf(a, false), nnf(b, false)),
        // ¬(a U b) = ¬a R ¬b
        (Ltl::Until(a, b), true) => Ltl::release(nnf(a, true), nnf(b, true)),
        (Ltl::WeakUntil(a, b), false) => Ltl::weak_until(nnf(a, false), nnf(b, false)),
        // ¬(a W b) = ¬b U (¬a & ¬b)
        (Ltl::WeakUntil(a, b), true) => {
            let na = nnf(a, true);
            let nb = nnf(b, true);
            Ltl::until(nb.clone(), Ltl::and(vec![na, nb]))
        }
        (Ltl::Release(a, b), false) => Ltl::release(nnf(a, false), nnf(b, false)),
        // ¬(a R b) = ¬a U ¬b
        (Ltl::Release(a, b), true) => Ltl::until(nnf(a, true), nnf(b, true)),
    }
}

fn in_safety_fragment(f: &Ltl) -> bool {
    !contains_until(f) && !contains_finally(f)
}

fn contains_until(f: &Ltl) -> bool {
    match f {
        Ltl::Until(..) => true,
        Ltl::Not(g) | Ltl::Next(g) | Ltl::Globally(g) | Ltl::Finally(g) => contains_until(g),
        Ltl::And(v) | Ltl::Or(v) => v.iter().any(contains_until),
        Ltl::WeakUntil(a, b) | Ltl::Release(a, b) => contains_until(a) || contains_until(b),
        _ => false,
    }
}

fn contains_finally(f: &Ltl) -> bool {
    match f {
        Ltl::Finally(_) => true,
        Ltl::Not(g) | Ltl::Next(g) | Ltl::Globally(g) => contains_finally(g),
        Ltl::And(v) | Ltl::Or(v) => v.iter().any(contains_finally),
        Ltl::Until(a, b) | Ltl::WeakUntil(a, b) | Ltl::Release(a, b) => {
            contains_finally(a) || contains_finally(b)
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Lasso oracle

/// Evaluates `prefix · loop^ω ⊨ f` positionally. Temporal operators are
/// solved as fixpoints over the loop positions: greatest fixpoints for
/// G/W/R, least fixpoints for F/U. This is the designated ground truth for
/// all semantic tests and never consults the automata module.
pub fn eval_lasso(f: &Ltl, w: &LassoWord, arch: &Architecture) -> bool {
    truth_vector(f, w, arch)[0]
}

fn truth_vector(f: &Ltl, w: &LassoWord, arch: &Architecture) -> Vec<bool> {
    let n = w.len();
    let next = |i: usize| if i + 1 < n { i + 1 } else { w.prefix.len() };
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(name) => {
            let bit = arch.index_of(name).expect("atom not in architecture");
            (0..n).map(|i| w.at(i).contains(bit)).collect()
        }
        Ltl::Not(g) => truth_vector(g, w, arch).into_iter().map(|b| !b).collect(),
        Ltl::And(v) => {
            let mut acc = vec![true; n];
            for g in v {
                let t = truth_vector(g, w, arch);
                for i in 0..n {
                    acc[i] &= t[i];
                }
            }
            acc
        }
        Ltl::Or(v) => {
            let mut acc = vec![false; n];
            for g in v {
                let t = truth_vector(g, w, arch);
                for i in 0..n {
                    acc[i] |= t[i];
                }
            }
            acc
        }
        Ltl::Next(g) => {
            let t = truth_vector(g, w, arch);
            (0..n).map(|i| t[next(i)]).collect()
        }
        Ltl::Globally(g) => {
            let t = truth_vector(g, w, arch);
            fixpoint(n, true, |x, i| t[i] && x[next(i)])
        }
        Ltl::Finally(g) => {
            let t = truth_vector(g, w, arch);
            fixpoint(n, false, |x, i| t[i] || x[next(i)])
        }
        Ltl::Until(a, b) => {
            let ta = truth_vector(a, w, arch);
            let tb = truth_vector(b, w, arch);
            fixpoint(n, false, |x, i| tb[i] || (ta[i] && x[next(i)]))
        }
        Ltl::WeakUntil(a, b) => {
            let ta = truth_vector(a, w, arch);
            let tb = truth_vector(b, w, arch);
            fixpoint(n, true, |x, i| tb[i] || (ta[i] && x[next(i)]))
        }
        Ltl::Release(a, b) => {
            let ta = truth_vector(a, w, arch);
            let tb = truth_vector(b, w, arch);
            fixpoint(n, true, |x, i| tb[i] && (ta[i] || x[next(i)]))
        }
    }
}

fn fixpoint(n: usize, init: bool, step: impl Fn(&[bool], usize) -> bool) -> Vec<bool> {
    let mut x = vec![init; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let v = step(&x, i);
            if v != x[i] {
                x[i] = v;
                changed = true;
            }
        }
        if !changed {
            return x;
        }
    }
}
