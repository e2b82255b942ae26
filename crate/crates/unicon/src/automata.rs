//! Deterministic safety automata: formula-progression construction from
//! safety LTL, lasso acceptance, products with Moore machines, and I/O.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::logic::{
    safety_nnf, Architecture, LassoWord, LogicError, Ltl, Valuation,
};
use crate::machines::{self, MooreMachine};

#[derive(Debug, Error)]
pub enum AutomataError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("state cap exceeded: more than {cap} progression residues")]
    ResourceCap { cap: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state `{state}` violates the safety trap invariant (an unsafe state reaches a safe one)")]
    TrapViolation { state: String },
}

/// A deterministic safety word automaton over the full alphabet `2^AP` of an
/// architecture, with explicit per-letter transition tables.
#[derive(Debug, Clone)]
pub struct SafetyAutomaton {
    pub arch: Architecture,
    pub init: usize,
    names: Vec<String>,
    /// `trans[q][letter]` for letters over the architecture's AP order.
    trans: Vec<Vec<usize>>,
    safe: Vec<bool>,
}

impl SafetyAutomaton {
    pub fn new(
        arch: Architecture,
        init: usize,
        names: Vec<String>,
        trans: Vec<Vec<usize>>,
        safe: Vec<bool>,
    ) -> Result<Self, AutomataError> {
        let width = arch.letter_count();
        assert_eq!(names.len(), trans.len());
        assert_eq!(names.len(), safe.len());
        assert!(init < names.len());
        for row in &trans {
            assert_eq!(row.len(), width, "transition table must be total");
        }
        let a = Self { arch, init, names, trans, safe };
        // Trap invariant: once outside the safe set, the safe set is never
        // re-entered.
        for q in 0..a.state_count() {
            if !a.safe[q] {
                for letter in 0..width {
                    if a.safe[a.trans[q][letter]] {
                        return Err(AutomataError::TrapViolation {
                            state: a.names[q].clone(),
                        });
                    }
                }
            }
        }
        Ok(a)
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.names[q]
    }

    pub fn is_safe(&self, q: usize) -> bool {
        self.safe[q]
    }

    pub fn safe_count(&self) -> usize {
        self.safe.iter().filter(|&&s| s).count()
    }

    pub fn step(&self, q: usize, letter: Valuation) -> usize {
        self.trans[q][letter.0 as usize]
    }

    /// True iff the run over prefix·cycle^ω never leaves the safe set. The
    /// run is followed until a (state, cycle position) pair repeats.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let mut q = self.init;
        if !self.safe[q] {
            return false;
        }
        for &letter in &w.prefix {
            q = self.step(q, letter);
            if !self.safe[q] {
                return false;
            }
        }
        let mut seen = vec![false; self.state_count() * w.cycle.len()];
        let mut pos = 0;
        while !seen[q * w.cycle.len() + pos] {
            seen[q * w.cycle.len() + pos] = true;
            q = self.step(q, w.cycle[pos]);
            if !self.safe[q] {
                return false;
            }
            pos = (pos + 1) % w.cycle.len();
        }
        true
    }
}

pub fn dsa_accepts_lasso(a: &SafetyAutomaton, w: &LassoWord) -> bool {
    a.accepts_lasso(w)
}

pub const DEFAULT_STATE_CAP: usize = 1_000_000;
/// Residue count beyond which canonicalization switches from the syntactic
/// normal form to exact propositional collapse over temporal atoms.
pub const COLLAPSE_THRESHOLD: usize = 256;

pub fn ltl_to_dsa(f: &Ltl, arch: &Architecture) -> Result<SafetyAutomaton, AutomataError> {
    ltl_to_dsa_capped(f, arch, DEFAULT_STATE_CAP)
}

/// Translates a safety formula to a DSA by formula progression. States are
/// canonicalized progression residues; `safe` is every residue except
/// `false`. Residue count above [`COLLAPSE_THRESHOLD`] triggers a rebuild
/// keyed by truth tables over the (≤ 16) temporal atoms; `cap` is a hard
/// resource limit.
pub fn ltl_to_dsa_capped(
    f: &Ltl,
    arch: &Architecture,
    cap: usize,
) -> Result<SafetyAutomaton, AutomataError> {
    let f = safety_nnf(f)?;
    match build(&f, arch, cap, None)? {
        Some(a) => Ok(a),
        None => {
            // Too many syntactic residues: retry with semantic keys.
            let atoms = temporal_atoms(&f);
            if atoms.len() > 16 {
                return Err(AutomataError::ResourceCap { cap: COLLAPSE_THRESHOLD });
            }
            build(&f, arch, cap, Some(&atoms))?
                .ok_or(AutomataError::ResourceCap { cap })
        }
    }
}

/// Bounded renormalization of a progression residue. Residues are NNF with
/// negation on propositional atoms only, so they are positive boolean
/// combinations of "residue atoms" (literals and temporal-rooted
/// subformulas). Rewriting to disjunctive normal form with absorption and
/// contradictory-clause pruning therefore yields the prime implicants — a
/// small canonical form — and stops the otherwise unbounded growth of
/// alternating ∧/∨ nesting that per-level flattening cannot collapse. If
/// the residue has more than 24 atoms or the intermediate clause sets blow
/// up, the residue is returned unchanged and the semantic-collapse phase
/// remains the backstop.
fn canonical_residue(f: &Ltl) -> Ltl {
    fn collect_atoms(f: &Ltl, out: &mut Vec<Ltl>) {
        match f {
            Ltl::True | Ltl::False => {}
            Ltl::And(v) | Ltl::Or(v) => {
                for g in v {
                    collect_atoms(g, out);
                }
            }
            other => {
                if !out.contains(other) {
                    out.push(other.clone());
                }
            }
        }
    }
    let mut atoms = Vec::new();
    collect_atoms(f, &mut atoms);
    if atoms.len() > 24 {
        return f.clone();
    }
    atoms.sort_by_key(|a| a.to_string());
    // Mask of the complementary literal per atom, for pruning clauses that
    // require both a and ¬a at the same instant.
    let complement: Vec<u32> = atoms
        .iter()
        .map(|a| {
            let other = match a {
                Ltl::Atom(_) => Ltl::not(a.clone()),
                Ltl::Not(inner) => (**inner).clone(),
                _ => return 0,
            };
            atoms.iter().position(|b| *b == other).map_or(0, |i| 1u32 << i)
        })
        .collect();

    // Clauses as atom bitmasks; absorption keeps only minimal clauses.
    fn absorb(mut clauses: Vec<u32>) -> Vec<u32> {
        clauses.sort_unstable_by_key(|c| c.count_ones());
        let mut kept: Vec<u32> = Vec::new();
        for c in clauses {
            if !kept.iter().any(|&k| k & c == k) {
                kept.push(c);
            }
        }
        kept
    }
    fn dnf(f: &Ltl, atoms: &[Ltl], complement: &[u32]) -> Option<Vec<u32>> {
        match f {
            Ltl::True => Some(vec![0]),
            Ltl::False => Some(Vec::new()),
            Ltl::Or(v) => {
                let mut clauses = Vec::new();
                for g in v {
                    clauses.extend(dnf(g, atoms, complement)?);
                }
                Some(absorb(clauses))
            }
            Ltl::And(v) => {
                let mut clauses = vec![0u32];
                for g in v {
                    let rhs = dnf(g, atoms, complement)?;
                    let mut product = Vec::with_capacity(clauses.len() * rhs.len());
                    for &a in &clauses {
                        for &b in &rhs {
                            let c = a | b;
                            if atoms
                                .iter()
                                .enumerate()
                                .all(|(i, _)| c >> i & 1 == 0 || c & complement[i] == 0)
                            {
                                product.push(c);
                            }
                        }
                    }
                    clauses = absorb(product);
                    if clauses.len() > 10_000 {
                        return None;
                    }
                }
                Some(clauses)
            }
            other => {
                let i = atoms.iter().position(|a| a == other).expect("atom was collected");
                Some(vec![1u32 << i])
            }
        }
    }
    match dnf(f, &atoms, &complement) {
        None => f.clone(),
        Some(clauses) => Ltl::or(
            clauses
                .into_iter()
                .map(|c| {
                    Ltl::and(
                        atoms
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| c >> i & 1 == 1)
                            .map(|(_, a)| a.clone())
                            .collect(),
                    )
                })
                .collect(),
        ),
    }
}

/// One BFS over progression residues. With `atoms = None` states are keyed
/// by the syntactic canonical form and the function bails out (Ok(None))
/// past [`COLLAPSE_THRESHOLD`]; with atoms given, states are keyed by their
/// truth table and only `cap` limits growth.
fn build(
    f: &Ltl,
    arch: &Architecture,
    cap: usize,
    atoms: Option<&[Ltl]>,
) -> Result<Option<SafetyAutomaton>, AutomataError> {
    enum Key {
        Syntactic(HashMap<Ltl, usize>),
        Semantic(HashMap<Vec<u64>, usize>),
    }
    let mut key = match atoms {
        None => Key::Syntactic(HashMap::new()),
        Some(_) => Key::Semantic(HashMap::new()),
    };
    let limit = match atoms {
        None => cap.min(COLLAPSE_THRESHOLD),
        Some(_) => cap,
    };
    let f = canonical_residue(f);
    let mut residues: Vec<Ltl> = vec![f.clone()];
    match &mut key {
        Key::Syntactic(m) => {
            m.insert(f.clone(), 0);
        }
        Key::Semantic(m) => {
            m.insert(truth_table(&f, atoms.unwrap()), 0);
        }
    }
    let width = arch.letter_count();
    let mut trans: Vec<Vec<usize>> = Vec::new();
    let mut frontier = 0;
    while frontier < residues.len() {
        let cur = residues[frontier].clone();
        let mut row = Vec::with_capacity(width);
        for letter in 0..width {
            let next = canonical_residue(&progress(&cur, Valuation(letter as u32), arch));
            let id = match &mut key {
                Key::Syntactic(m) => match m.get(&next) {
                    Some(&id) => id,
                    None => {
                        residues.push(next.clone());
                        m.insert(next, residues.len() - 1);
                        residues.len() - 1
                    }
                },
                Key::Semantic(m) => {
                    let tt = truth_table(&next, atoms.unwrap());
                    match m.get(&tt) {
                        Some(&id) => id,
                        None => {
                            residues.push(next);
                            m.insert(tt, residues.len() - 1);
                            residues.len() - 1
                        }
                    }
                }
            };
            row.push(id);
        }
        trans.push(row);
        if residues.len() > limit {
            return if matches!(key, Key::Syntactic(_)) && residues.len() <= cap {
                Ok(None)
            } else {
                Err(AutomataError::ResourceCap { cap })
            };
        }
        frontier += 1;
    }
    let safe: Vec<bool> = residues.iter().map(|r| *r != Ltl::False).collect();
    let names = (0..residues.len()).map(|i| format!("q{i}")).collect();
    Ok(Some(SafetyAutomaton::new(arch.clone(), 0, names, trans, safe)?))
}

/// One-step formula progression: the residual obligation after reading one
/// letter. Defined on the safety NNF fragment only.
fn progress(f: &Ltl, letter: Valuation, arch: &Architecture) -> Ltl {
    let truth = |holds: bool| if holds { Ltl::True } else { Ltl::False };
    match f {
        Ltl::True | Ltl::False => f.clone(),
        Ltl::Atom(a) => {
            let bit = arch.index_of(a).expect("atoms checked at parse time");
            truth(letter.contains(bit))
        }
        Ltl::Not(inner) => match inner.as_ref() {
            Ltl::Atom(a) => {
                let bit = arch.index_of(a).expect("atoms checked at parse time");
                truth(!letter.contains(bit))
            }
            _ => unreachable!("NNF keeps negations on atoms"),
        },
        Ltl::And(v) => Ltl::and(v.iter().map(|g| progress(g, letter, arch)).collect()),
        Ltl::Or(v) => Ltl::or(v.iter().map(|g| progress(g, letter, arch)).collect()),
        Ltl::Next(g) => (**g).clone(),
        Ltl::Globally(g) => Ltl::and(vec![progress(g, letter, arch), f.clone()]),
        Ltl::WeakUntil(a, b) => Ltl::or(vec![
            progress(b, letter, arch),
            Ltl::and(vec![progress(a, letter, arch), f.clone()]),
        ]),
        Ltl::Release(a, b) => Ltl::and(vec![
            progress(b, letter, arch),
            Ltl::or(vec![progress(a, letter, arch), f.clone()]),
        ]),
        Ltl::Until(_, _) | Ltl::Finally(_) => {
            unreachable!("rejected by the safety fragment gate")
        }
    }
}

/// All distinct subformulas that act as opaque atoms in a residue's
/// propositional structure: literals and temporal-rooted nodes. Progression
/// never invents new temporal subformulas, so this universe is closed.
fn temporal_atoms(f: &Ltl) -> Vec<Ltl> {
    fn walk(f: &Ltl, out: &mut Vec<Ltl>) {
        match f {
            Ltl::True | Ltl::False => {}
            Ltl::And(v) | Ltl::Or(v) => {
                for g in v {
                    walk(g, out);
                }
            }
            Ltl::Not(inner) => walk(inner, out),
            Ltl::Atom(_) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Ltl::Next(g) | Ltl::Globally(g) | Ltl::Finally(g) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
                walk(g, out);
            }
            Ltl::WeakUntil(a, b) | Ltl::Release(a, b) | Ltl::Until(a, b) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
                walk(a, out);
                walk(b, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(f, &mut out);
    out
}

/// Truth table of a residue over the atom universe, as a packed bit vector
/// indexed by assignments.
fn truth_table(f: &Ltl, atoms: &[Ltl]) -> Vec<u64> {
    fn eval(f: &Ltl, atoms: &[Ltl], assignment: usize) -> bool {
        match f {
            Ltl::True => true,
            Ltl::False => false,
            Ltl::And(v) => v.iter().all(|g| eval(g, atoms, assignment)),
            Ltl::Or(v) => v.iter().any(|g| eval(g, atoms, assignment)),
            Ltl::Not(inner) => !eval(inner, atoms, assignment),
            other => {
                let i = atoms
                    .iter()
                    .position(|a| a == other)
                    .expect("residue atom outside the closed universe");
                assignment >> i & 1 == 1
            }
        }
    }
    let n = 1usize << atoms.len();
    let mut table = vec![0u64; n.div_ceil(64)];
    for a in 0..n {
        if eval(f, atoms, a) {
            table[a / 64] |= 1 << (a % 64);
        }
    }
    table
}

/// The set of (automaton state, machine state) pairs reachable in the
/// product, branching over all valuations of the propositions the machine
/// does not output.
pub fn product_reach(a: &SafetyAutomaton, m: &MooreMachine) -> Vec<(usize, usize)> {
    let in_pos = MooreMachine::positions_in(&m.inputs, |p| a.arch.index_of(p))
        .expect("machine propositions belong to the architecture");
    let out_pos = MooreMachine::positions_in(&m.outputs, |p| a.arch.index_of(p))
        .expect("machine propositions belong to the architecture");
    let out_mask: u32 = out_pos.iter().map(|&b| 1u32 << b).sum();
    let free: Vec<usize> =
        (0..a.arch.ap_count()).filter(|b| out_mask >> b & 1 == 0).collect();

    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order = vec![(a.init, m.init)];
    seen.insert((a.init, m.init), 0);
    let mut frontier = 0;
    while frontier < order.len() {
        let (q, s) = order[frontier];
        let out_letter = MooreMachine::local_to_letter(m.output(s), &out_pos);
        for bits in 0..1usize << free.len() {
            let mut letter = out_letter;
            for (i, &b) in free.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    letter = letter.union(Valuation(1 << b));
                }
            }
            let q2 = a.step(q, letter);
            let s2 = m.step(s, MooreMachine::input_from_letter(letter, &in_pos));
            seen.entry((q2, s2)).or_insert_with(|| {
                order.push((q2, s2));
                order.len() - 1
            });
        }
        frontier += 1;
    }
    order
}

/// Isomorphism check for deterministic total automata over the same
/// architecture, via the canonical run pairing from the initial states.
pub fn isomorphic(a: &SafetyAutomaton, b: &SafetyAutomaton) -> bool {
    if a.arch.ap_count() != b.arch.ap_count() || a.state_count() != b.state_count() {
        return false;
    }
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut stack = vec![(a.init, b.init)];
    map.insert(a.init, b.init);
    while let Some((qa, qb)) = stack.pop() {
        if a.safe[qa] != b.safe[qb] {
            return false;
        }
        for letter in 0..a.arch.letter_count() {
            let ta = a.trans[qa][letter];
            let tb = b.trans[qb][letter];
            match map.get(&ta) {
                Some(&expect) if expect != tb => return false,
                Some(_) => {}
                None => {
                    map.insert(ta, tb);
                    stack.push((ta, tb));
                }
            }
        }
    }
    // Both automata are reachable-only, so the pairing must be a bijection.
    map.len() == a.state_count()
}

// ---------------------------------------------------------------------------
// Text format and DOT

/// Writes the automaton text format: an `arch:` header with the three output
/// sets separated by `|`, a `safe:` state list, and per-state guarded edges
/// as in the Moore-machine format.
pub fn write_dsa(a: &SafetyAutomaton) -> String {
    let mut s = String::from("dsa\n");
    let _ = writeln!(
        s,
        "arch: {} | {} | {}",
        a.arch.env_props().join(" "),
        a.arch.ctrl_props().join(" "),
        a.arch.plant_props().join(" ")
    );
    let _ = writeln!(s, "init: {}", a.names[a.init]);
    let safe_names: Vec<&str> = (0..a.state_count())
        .filter(|&q| a.safe[q])
        .map(|q| a.names[q].as_str())
        .collect();
    let _ = writeln!(s, "safe: {}", safe_names.join(" "));
    let ap_names: Vec<String> = a.arch.ap_names().map(String::from).collect();
    for q in 0..a.state_count() {
        let _ = writeln!(s, "state {}", a.names[q]);
        let mut groups: Vec<(usize, Vec<u32>)> = Vec::new();
        for letter in 0..a.arch.letter_count() {
            let t = a.trans[q][letter];
            match groups.iter_mut().find(|(g, _)| *g == t) {
                Some((_, v)) => v.push(letter as u32),
                None => groups.push((t, vec![letter as u32])),
            }
        }
        let last = groups.len() - 1;
        for (gi, (t, letters)) in groups.iter().enumerate() {
            if gi == last && groups.len() > 1 {
                let _ = writeln!(s, "  else -> {}", a.names[*t]);
            } else {
                let pred =
                    machines::predicate_text(letters, a.arch.ap_count(), &ap_names);
                let _ = writeln!(s, "  {pred} -> {}", a.names[*t]);
            }
        }
    }
    s
}

/// Reads the automaton text format; `expect_header` is `dsa` for plain
/// automata and `uc` for universal-controller files, which share the body.
pub fn read_dsa_with_header(
    text: &str,
    expect_header: &str,
) -> Result<SafetyAutomaton, AutomataError> {
    let mut arch: Option<Architecture> = None;
    let mut init_name: Option<String> = None;
    let mut safe_names: Option<Vec<String>> = None;
    let mut states: Vec<(String, Vec<(usize, Option<String>, String)>)> = Vec::new();
    let mut saw_header = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let perr = |msg: String| AutomataError::Parse { line, msg };
        if !saw_header {
            if trimmed != expect_header {
                return Err(perr(format!(
                    "expected `{expect_header}` header, found `{trimmed}`"
                )));
            }
            saw_header = true;
        } else if let Some(rest) = trimmed.strip_prefix("arch:") {
            let parts: Vec<&str> = rest.split('|').collect();
            if parts.len() != 3 {
                return Err(perr("expected `arch: <env> | <ctrl> | <plant>`".into()));
            }
            let split = |s: &str| -> Vec<String> {
                s.split_whitespace().map(String::from).collect()
            };
            arch = Some(
                Architecture::new(split(parts[0]), split(parts[1]), split(parts[2]))
                    .map_err(|e| perr(format!("bad architecture: {e}")))?,
            );
        } else if let Some(rest) = trimmed.strip_prefix("init:") {
            init_name = Some(rest.trim().to_string());
        } else if let Some(rest) = trimmed.strip_prefix("safe:") {
            safe_names = Some(rest.split_whitespace().map(String::from).collect());
        } else if let Some(rest) = trimmed.strip_prefix("state ") {
            let name = rest.trim().to_string();
            if states.iter().any(|(n, _)| *n == name) {
                return Err(perr(format!("duplicate state `{name}`")));
            }
            states.push((name, Vec::new()));
        } else if let Some(arrow) = trimmed.find("->") {
            let (_, edges) = states
                .last_mut()
                .ok_or_else(|| perr("transition before any `state` line".into()))?;
            let guard = trimmed[..arrow].trim();
            let target = trimmed[arrow + 2..].trim().to_string();
            if guard == "else" {
                edges.push((line, None, target));
            } else {
                edges.push((line, Some(guard.to_string()), target));
            }
        } else {
            return Err(perr(format!("unrecognized line `{trimmed}`")));
        }
    }

    let fail = |msg: &str| AutomataError::Parse { line: 0, msg: msg.into() };
    let arch = arch.ok_or_else(|| fail("missing `arch:`"))?;
    let init_name = init_name.ok_or_else(|| fail("missing `init:`"))?;
    let safe_names = safe_names.ok_or_else(|| fail("missing `safe:`"))?;
    if states.is_empty() {
        return Err(fail("no states declared"));
    }
    let state_index: HashMap<&str, usize> =
        states.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let init = *state_index
        .get(init_name.as_str())
        .ok_or_else(|| fail(&format!("unknown init state `{init_name}`")))?;
    let mut safe = vec![false; states.len()];
    for n in &safe_names {
        let &q = state_index
            .get(n.as_str())
            .ok_or_else(|| fail(&format!("unknown safe state `{n}`")))?;
        safe[q] = true;
    }

    let ap_index: HashMap<&str, usize> =
        (0..arch.ap_count()).map(|i| (arch.ap_name(i), i)).collect();
    let width = arch.letter_count();
    let mut trans: Vec<Vec<usize>> = Vec::new();
    for (name, edges) in &states {
        let mut row: Vec<Option<usize>> = vec![None; width];
        let mut else_target = None;
        for (line, guard, target) in edges {
            let &tgt = state_index.get(target.as_str()).ok_or(AutomataError::Parse {
                line: *line,
                msg: format!("unknown target state `{target}`"),
            })?;
            match guard {
                None => else_target = Some(tgt),
                Some(text) => {
                    let formula =
                        crate::logic::parse_unchecked(text).map_err(|e| {
                            AutomataError::Parse {
                                line: *line,
                                msg: format!("bad guard: {e}"),
                            }
                        })?;
                    for v in 0..width {
                        let holds =
                            machines::eval_guard(&formula, Valuation(v as u32), &ap_index, *line)
                                .map_err(|e| AutomataError::Parse {
                                    line: *line,
                                    msg: e.to_string(),
                                })?;
                        if holds {
                            if row[v].is_some() {
                                return Err(AutomataError::Parse {
                                    line: *line,
                                    msg: format!("state `{name}`: overlapping guards"),
                                });
                            }
                            row[v] = Some(tgt);
                        }
                    }
                }
            }
        }
        let full: Vec<usize> = row
            .into_iter()
            .map(|slot| {
                slot.or(else_target).ok_or_else(|| {
                    fail(&format!("state `{name}`: guards do not cover all letters"))
                })
            })
            .collect::<Result<_, _>>()?;
        trans.push(full);
    }

    SafetyAutomaton::new(
        arch,
        init,
        states.into_iter().map(|(n, _)| n).collect(),
        trans,
        safe,
    )
}

pub fn read_dsa(text: &str) -> Result<SafetyAutomaton, AutomataError> {
    read_dsa_with_header(text, "dsa")
}

/// DOT export with edges grouped by predicate; unsafe states are drawn as
/// double octagons.
pub fn dsa_to_dot(a: &SafetyAutomaton) -> String {
    let ap_names: Vec<String> = a.arch.ap_names().map(String::from).collect();
    let mut s = String::from("digraph dsa {\n  rankdir=LR;\n  node [shape=circle];\n");
    let _ = writeln!(s, "  init [shape=point];");
    let _ = writeln!(s, "  init -> \"{}\";", a.names[a.init]);
    for q in 0..a.state_count() {
        if !a.safe[q] {
            let _ = writeln!(s, "  \"{}\" [shape=doubleoctagon];", a.names[q]);
        }
        let mut groups: Vec<(usize, Vec<u32>)> = Vec::new();
        for letter in 0..a.arch.letter_count() {
            let t = a.trans[q][letter];
            match groups.iter_mut().find(|(g, _)| *g == t) {
                Some((_, v)) => v.push(letter as u32),
                None => groups.push((t, vec![letter as u32])),
            }
        }
        for (t, letters) in groups {
            let pred = machines::predicate_text(&letters, a.arch.ap_count(), &ap_names);
            let _ = writeln!(
                s,
                "  \"{}\" -> \"{}\" [label=\"{}\"];",
                a.names[q],
                a.names[t],
                pred.replace('"', "\\\"")
            );
        }
    }
    s.push_str("}\n");
    s
}
