//! Moore machines: process strategies, parallel composition, re-rooting and
//! the line-based on-disk format.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::logic::{parse_unchecked, Ltl, Valuation};

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state `{state}`: overlapping guards for input {input}")]
    OverlappingGuards { state: String, input: String },
    #[error("state `{state}`: no guard covers input {input}")]
    IncompleteGuards { state: String, input: String },
    #[error("parallel composition: output proposition `{0}` occurs in both machines")]
    OutputOverlap(String),
    #[error("unknown state id {0}")]
    UnknownState(usize),
    #[error("proposition `{0}` does not occur in the architecture")]
    UnknownProposition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Plant,
    Controller,
    Environment,
    Composite,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Plant => "plant",
            Role::Controller => "controller",
            Role::Environment => "environment",
            Role::Composite => "composite",
        };
        write!(f, "{s}")
    }
}

impl Role {
    fn parse(s: &str) -> Option<Role> {
        match s {
            "plant" => Some(Role::Plant),
            "controller" => Some(Role::Controller),
            "environment" => Some(Role::Environment),
            "composite" => Some(Role::Composite),
            _ => None,
        }
    }
}

/// A finite-state transducer with state-labeled outputs: the strategy model
/// for plants, controllers and their compositions. The transition table is
/// total and deterministic by construction, indexed by valuations over the
/// machine's own ordered input list.
#[derive(Debug, Clone)]
pub struct MooreMachine {
    pub role: Role,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub init: usize,
    names: Vec<String>,
    /// `trans[s][i]` is the successor of state `s` on input valuation `i`.
    trans: Vec<Vec<usize>>,
    /// `out[s]` is the output valuation of state `s` over `outputs`.
    out: Vec<Valuation>,
}

impl MooreMachine {
    pub fn new(
        role: Role,
        inputs: Vec<String>,
        outputs: Vec<String>,
        init: usize,
        names: Vec<String>,
        trans: Vec<Vec<usize>>,
        out: Vec<Valuation>,
    ) -> Self {
        let width = 1usize << inputs.len();
        assert_eq!(names.len(), trans.len());
        assert_eq!(names.len(), out.len());
        assert!(init < names.len());
        for row in &trans {
            assert_eq!(row.len(), width, "transition table must be total");
            for &t in row {
                assert!(t < names.len());
            }
        }
        for name in inputs.iter() {
            assert!(!outputs.contains(name), "inputs and outputs must be disjoint");
        }
        Self { role, inputs, outputs, init, names, trans, out }
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn input_letter_count(&self) -> usize {
        1 << self.inputs.len()
    }

    /// Successor on an input valuation over this machine's input order.
    pub fn step(&self, s: usize, input: Valuation) -> usize {
        self.trans[s][input.0 as usize]
    }

    /// Output valuation of a state, over this machine's output order.
    pub fn output(&self, s: usize) -> Valuation {
        self.out[s]
    }

    /// Positions of this machine's propositions inside an ambient ordered
    /// proposition set, used to move between machine-local valuations and
    /// full letters.
    pub fn positions_in(
        props: &[String],
        index_of: impl Fn(&str) -> Option<usize>,
    ) -> Result<Vec<usize>, MachineError> {
        props
            .iter()
            .map(|p| index_of(p).ok_or_else(|| MachineError::UnknownProposition(p.clone())))
            .collect()
    }

    /// Extracts this machine's input valuation from a full letter, given the
    /// ambient positions of the machine inputs.
    pub fn input_from_letter(letter: Valuation, positions: &[usize]) -> Valuation {
        let mut bits = 0;
        for (local, &ap) in positions.iter().enumerate() {
            if letter.contains(ap) {
                bits |= 1 << local;
            }
        }
        Valuation(bits)
    }

    /// Embeds a machine-local valuation into a full letter.
    pub fn local_to_letter(local: Valuation, positions: &[usize]) -> Valuation {
        let mut bits = 0;
        for (i, &ap) in positions.iter().enumerate() {
            if local.contains(i) {
                bits |= 1 << ap;
            }
        }
        Valuation(bits)
    }
}

/// Parallel composition of two strategies: a Moore machine over the joint
/// outputs whose inputs are the remaining free propositions. Restricted to
/// states reachable from the joint initial state.
pub fn parallel(m1: &MooreMachine, m2: &MooreMachine) -> Result<MooreMachine, MachineError> {
    Ok(parallel_pairs(m1, m2)?.0)
}

/// Like [`parallel`], additionally returning the (m1 state, m2 state) origin
/// of every composite state.
pub fn parallel_pairs(
    m1: &MooreMachine,
    m2: &MooreMachine,
) -> Result<(MooreMachine, Vec<(usize, usize)>), MachineError> {
    for o in &m1.outputs {
        if m2.outputs.contains(o) {
            return Err(MachineError::OutputOverlap(o.clone()));
        }
    }
    let outputs: Vec<String> = m1.outputs.iter().chain(&m2.outputs).cloned().collect();
    let mut inputs: Vec<String> = Vec::new();
    for p in m1.inputs.iter().chain(&m2.inputs) {
        if !inputs.contains(p) && !outputs.contains(p) {
            inputs.push(p.clone());
        }
    }

    // For each component, every input is read either from the joint input
    // valuation or from the other component's current output.
    #[derive(Clone, Copy)]
    enum Src {
        Joint(usize),
        Other(usize),
    }
    let feeds = |m: &MooreMachine, other: &MooreMachine| -> Vec<Src> {
        m.inputs
            .iter()
            .map(|p| {
                if let Some(i) = inputs.iter().position(|q| q == p) {
                    Src::Joint(i)
                } else if let Some(i) = other.outputs.iter().position(|q| q == p) {
                    Src::Other(i)
                } else {
                    // Input fed by neither side: the proposition is free but
                    // shadowed by an output name clash checked above.
                    unreachable!("input `{p}` unaccounted for in composition")
                }
            })
            .collect()
    };
    let feed1 = feeds(m1, m2);
    let feed2 = feeds(m2, m1);

    let local_input = |feeds: &[Src], joint: Valuation, other_out: Valuation| -> Valuation {
        let mut bits = 0;
        for (i, src) in feeds.iter().enumerate() {
            let b = match src {
                Src::Joint(j) => joint.contains(*j),
                Src::Other(j) => other_out.contains(*j),
            };
            if b {
                bits |= 1 << i;
            }
        }
        Valuation(bits)
    };

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut origins: Vec<(usize, usize)> = vec![(m1.init, m2.init)];
    index.insert((m1.init, m2.init), 0);
    let mut trans: Vec<Vec<usize>> = Vec::new();
    let mut out: Vec<Valuation> = Vec::new();
    let width = 1usize << inputs.len();
    let mut frontier = 0;
    while frontier < origins.len() {
        let (s1, s2) = origins[frontier];
        let o1 = m1.output(s1);
        let o2 = m2.output(s2);
        let mut joint_out = 0u32;
        for i in 0..m1.outputs.len() {
            if o1.contains(i) {
                joint_out |= 1 << i;
            }
        }
        for i in 0..m2.outputs.len() {
            if o2.contains(i) {
                joint_out |= 1 << (m1.outputs.len() + i);
            }
        }
        out.push(Valuation(joint_out));
        let mut row = Vec::with_capacity(width);
        for bits in 0..width {
            let joint = Valuation(bits as u32);
            let t1 = m1.step(s1, local_input(&feed1, joint, o2));
            let t2 = m2.step(s2, local_input(&feed2, joint, o1));
            let id = *index.entry((t1, t2)).or_insert_with(|| {
                origins.push((t1, t2));
                origins.len() - 1
            });
            row.push(id);
        }
        trans.push(row);
        frontier += 1;
    }
    let names = (0..origins.len()).map(|i| format!("s{i}")).collect();
    let machine =
        MooreMachine::new(Role::Composite, inputs, outputs, 0, names, trans, out);
    Ok((machine, origins))
}

/// The same machine restarted at state `s`, restricted to states reachable
/// from `s`.
pub fn reroot(m: &MooreMachine, s: usize) -> Result<MooreMachine, MachineError> {
    if s >= m.state_count() {
        return Err(MachineError::UnknownState(s));
    }
    let mut order = vec![s];
    let mut index: HashMap<usize, usize> = HashMap::new();
    index.insert(s, 0);
    let mut frontier = 0;
    while frontier < order.len() {
        let cur = order[frontier];
        for i in 0..m.input_letter_count() {
            let t = m.step(cur, Valuation(i as u32));
            index.entry(t).or_insert_with(|| {
                order.push(t);
                order.len() - 1
            });
        }
        frontier += 1;
    }
    let trans = order
        .iter()
        .map(|&old| {
            (0..m.input_letter_count())
                .map(|i| index[&m.step(old, Valuation(i as u32))])
                .collect()
        })
        .collect();
    Ok(MooreMachine::new(
        m.role,
        m.inputs.clone(),
        m.outputs.clone(),
        0,
        order.iter().map(|&old| m.names[old].clone()).collect(),
        trans,
        order.iter().map(|&old| m.out[old]).collect(),
    ))
}

// ---------------------------------------------------------------------------
// Text format

pub(crate) fn eval_guard(
    guard: &Ltl,
    val: Valuation,
    index: &HashMap<&str, usize>,
    line: usize,
) -> Result<bool, MachineError> {
    match guard {
        Ltl::True => Ok(true),
        Ltl::False => Ok(false),
        Ltl::Atom(name) => match index.get(name.as_str()) {
            Some(&bit) => Ok(val.contains(bit)),
            None => Err(MachineError::Parse {
                line,
                msg: format!("guard proposition `{name}` is not an input"),
            }),
        },
        Ltl::Not(g) => Ok(!eval_guard(g, val, index, line)?),
        Ltl::And(v) => {
            for g in v {
                if !eval_guard(g, val, index, line)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Ltl::Or(v) => {
            for g in v {
                if eval_guard(g, val, index, line)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        _ => Err(MachineError::Parse {
            line,
            msg: "guards must be propositional".into(),
        }),
    }
}

/// Reads the Moore-machine text format. Guards are boolean formulas over the
/// declared inputs, expanded to explicit letters; overlapping or incomplete
/// guard sets are rejected. One `else` guard per state is allowed.
pub fn read_mm(text: &str) -> Result<MooreMachine, MachineError> {
    let mut role = None;
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut init_name: Option<String> = None;
    // (name, output names, [(line, guard text or else, target name)])
    let mut states: Vec<(String, Vec<String>, Vec<(usize, Option<String>, String)>)> =
        Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let perr = |msg: String| MachineError::Parse { line, msg };
        if let Some(rest) = trimmed.strip_prefix("mm") {
            let rest = rest.trim();
            let role_str = rest
                .strip_prefix("role=")
                .ok_or_else(|| perr("expected `mm role=<role>`".into()))?;
            role = Some(
                Role::parse(role_str.trim())
                    .ok_or_else(|| perr(format!("unknown role `{role_str}`")))?,
            );
        } else if let Some(rest) = trimmed.strip_prefix("inputs:") {
            inputs = Some(rest.split_whitespace().map(String::from).collect());
        } else if let Some(rest) = trimmed.strip_prefix("outputs:") {
            outputs = Some(rest.split_whitespace().map(String::from).collect());
        } else if let Some(rest) = trimmed.strip_prefix("init:") {
            init_name = Some(rest.trim().to_string());
        } else if let Some(rest) = trimmed.strip_prefix("state ") {
            let rest = rest.trim();
            let brace = rest
                .find('{')
                .ok_or_else(|| perr("expected `state <name> {<outputs>}`".into()))?;
            let name = rest[..brace].trim().to_string();
            let close = rest
                .find('}')
                .ok_or_else(|| perr("missing `}` in state output set".into()))?;
            let outs = rest[brace + 1..close]
                .split_whitespace()
                .map(String::from)
                .collect();
            if states.iter().any(|(n, _, _)| *n == name) {
                return Err(perr(format!("duplicate state `{name}`")));
            }
            states.push((name, outs, Vec::new()));
        } else if let Some(arrow) = trimmed.find("->") {
            let (state_name, _, edges) = states
                .last_mut()
                .ok_or_else(|| perr("transition before any `state` line".into()))?;
            let guard_text = trimmed[..arrow].trim();
            let target = trimmed[arrow + 2..].trim().to_string();
            if target.is_empty() {
                return Err(perr("missing transition target".into()));
            }
            if guard_text == "else" {
                if edges.iter().any(|(_, g, _)| g.is_none()) {
                    return Err(perr(format!(
                        "state `{state_name}` has more than one `else` guard"
                    )));
                }
                edges.push((line, None, target));
            } else {
                edges.push((line, Some(guard_text.to_string()), target));
            }
        } else {
            return Err(perr(format!("unrecognized line `{trimmed}`")));
        }
    }

    let inputs = inputs.ok_or(MachineError::Parse { line: 0, msg: "missing `inputs:`".into() })?;
    let outputs =
        outputs.ok_or(MachineError::Parse { line: 0, msg: "missing `outputs:`".into() })?;
    let role = role.ok_or(MachineError::Parse { line: 0, msg: "missing `mm role=`".into() })?;
    if states.is_empty() {
        return Err(MachineError::Parse { line: 0, msg: "no states declared".into() });
    }
    let init_name = init_name
        .ok_or(MachineError::Parse { line: 0, msg: "missing `init:`".into() })?;

    let state_index: HashMap<&str, usize> =
        states.iter().enumerate().map(|(i, (n, _, _))| (n.as_str(), i)).collect();
    let input_index: HashMap<&str, usize> =
        inputs.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let output_index: HashMap<&str, usize> =
        outputs.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let init = *state_index
        .get(init_name.as_str())
        .ok_or(MachineError::Parse { line: 0, msg: format!("unknown init state `{init_name}`") })?;

    let width = 1usize << inputs.len();
    let mut trans: Vec<Vec<usize>> = Vec::new();
    let mut out: Vec<Valuation> = Vec::new();
    for (name, outs, edges) in &states {
        let mut bits = 0u32;
        for o in outs {
            let &b = output_index.get(o.as_str()).ok_or(MachineError::Parse {
                line: 0,
                msg: format!("state `{name}` outputs undeclared proposition `{o}`"),
            })?;
            bits |= 1 << b;
        }
        out.push(Valuation(bits));

        let mut row: Vec<Option<usize>> = vec![None; width];
        let mut else_target: Option<usize> = None;
        for (line, guard, target) in edges {
            let &tgt = state_index.get(target.as_str()).ok_or(MachineError::Parse {
                line: *line,
                msg: format!("unknown target state `{target}`"),
            })?;
            match guard {
                None => else_target = Some(tgt),
                Some(text) => {
                    let formula = parse_unchecked(text).map_err(|e| MachineError::Parse {
                        line: *line,
                        msg: format!("bad guard: {e}"),
                    })?;
                    for v in 0..width {
                        if eval_guard(&formula, Valuation(v as u32), &input_index, *line)? {
                            if row[v].is_some() {
                                return Err(MachineError::OverlappingGuards {
                                    state: name.clone(),
                                    input: describe_input(v as u32, &inputs),
                                });
                            }
                            row[v] = Some(tgt);
                        }
                    }
                }
            }
        }
        let full: Vec<usize> = row
            .iter()
            .enumerate()
            .map(|(v, slot)| {
                slot.or(else_target).ok_or(MachineError::IncompleteGuards {
                    state: name.clone(),
                    input: describe_input(v as u32, &inputs),
                })
            })
            .collect::<Result<_, _>>()?;
        trans.push(full);
    }

    Ok(MooreMachine::new(
        role,
        inputs,
        outputs,
        init,
        states.into_iter().map(|(n, _, _)| n).collect(),
        trans,
        out,
    ))
}

fn describe_input(bits: u32, inputs: &[String]) -> String {
    let lits: Vec<String> = inputs
        .iter()
        .enumerate()
        .map(|(i, n)| if bits >> i & 1 == 1 { n.clone() } else { format!("!{n}") })
        .collect();
    format!("{{{}}}", lits.join(" "))
}

/// Writes the Moore-machine text format. Transitions are grouped per target
/// and printed as merged-cube predicates; the final group becomes `else`.
pub fn write_mm(m: &MooreMachine) -> String {
    let mut s = String::new();
    s.push_str(&format!("mm role={}\n", m.role));
    s.push_str(&format!("inputs: {}\n", m.inputs.join(" ")));
    s.push_str(&format!("outputs: {}\n", m.outputs.join(" ")));
    s.push_str(&format!("init: {}\n", m.names[m.init]));
    for st in 0..m.state_count() {
        let outs: Vec<&str> = m
            .outputs
            .iter()
            .enumerate()
            .filter(|(i, _)| m.out[st].contains(*i))
            .map(|(_, n)| n.as_str())
            .collect();
        s.push_str(&format!("state {} {{{}}}\n", m.names[st], outs.join(" ")));
        // Group input valuations per target, in order of first occurrence.
        let mut groups: Vec<(usize, Vec<u32>)> = Vec::new();
        for v in 0..m.input_letter_count() {
            let tgt = m.step(st, Valuation(v as u32));
            match groups.iter_mut().find(|(t, _)| *t == tgt) {
                Some((_, vs)) => vs.push(v as u32),
                None => groups.push((tgt, vec![v as u32])),
            }
        }
        let last = groups.len() - 1;
        for (gi, (tgt, vs)) in groups.iter().enumerate() {
            if gi == last && groups.len() > 1 {
                s.push_str(&format!("  else -> {}\n", m.names[*tgt]));
            } else {
                let pred = predicate_text(vs, m.inputs.len(), &m.inputs);
                s.push_str(&format!("  {pred} -> {}\n", m.names[*tgt]));
            }
        }
    }
    s
}

/// Prints a set of valuations over `k` ordered propositions as a disjunction
/// of conjunction cubes, after greedy cube merging.
pub fn predicate_text(minterms: &[u32], k: usize, names: &[String]) -> String {
    let cubes = merge_cubes(minterms, k);
    if cubes.is_empty() {
        return "false".to_string();
    }
    let parts: Vec<String> = cubes
        .iter()
        .map(|&(care, value)| {
            if care == 0 {
                return "true".to_string();
            }
            let lits: Vec<String> = (0..k)
                .filter(|i| care >> i & 1 == 1)
                .map(|i| {
                    if value >> i & 1 == 1 {
                        names[i].clone()
                    } else {
                        format!("!{}", names[i])
                    }
                })
                .collect();
            lits.join(" & ")
        })
        .collect();
    parts.join(" | ")
}

/// Cube merging: starts from minterms and repeatedly joins cubes that agree
/// everywhere except one cared bit, then drops cubes covered by others.
fn merge_cubes(minterms: &[u32], k: usize) -> Vec<(u32, u32)> {
    let full: u32 = if k == 32 { u32::MAX } else { (1 << k) - 1 };
    if minterms.len() == 1 << k {
        return vec![(0, 0)];
    }
    let mut cubes: Vec<(u32, u32)> = minterms.iter().map(|&m| (full, m)).collect();
    loop {
        let mut next: Vec<(u32, u32)> = Vec::new();
        let mut merged = vec![false; cubes.len()];
        let mut any = false;
        for i in 0..cubes.len() {
            for j in i + 1..cubes.len() {
                let (ca, va) = cubes[i];
                let (cb, vb) = cubes[j];
                if ca == cb {
                    let diff = (va ^ vb) & ca;
                    if diff.count_ones() == 1 {
                        let cube = (ca & !diff, va & !diff);
                        if !next.contains(&cube) {
                            next.push(cube);
                        }
                        merged[i] = true;
                        merged[j] = true;
                        any = true;
                    }
                }
            }
        }
        for (i, c) in cubes.iter().enumerate() {
            if !merged[i] && !next.contains(c) {
                next.push(*c);
            }
        }
        if !any {
            break;
        }
        cubes = next;
    }
    // Greedy cover of the original minterms by the widest cubes first.
    cubes.sort_by_key(|&(care, value)| (care.count_ones(), value, care));
    let mut covered: Vec<bool> = vec![false; minterms.len()];
    let mut chosen = Vec::new();
    for &(care, value) in &cubes {
        let mut useful = false;
        for (i, &m) in minterms.iter().enumerate() {
            if !covered[i] && m & care == value & care {
                covered[i] = true;
                useful = true;
            }
        }
        if useful {
            chosen.push((care, value));
        }
        if covered.iter().all(|&c| c) {
            break;
        }
    }
    chosen
}

/// The running-example plant: two states toggling `o_p` on `!o_e`.
pub fn running_example_plant() -> MooreMachine {
    read_mm(
        "mm role=plant\n\
         inputs: o_e o_c\n\
         outputs: o_p\n\
         init: s0\n\
         state s0 {o_p}\n\
           !o_e -> s1\n\
           else -> s0\n\
         state s1 {}\n\
           o_e -> s0\n\
           else -> s1\n",
    )
    .expect("running example plant is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm_isomorphic(a: &MooreMachine, b: &MooreMachine) -> bool {
        // Deterministic total machines over the same ordered alphabets are
        // isomorphic iff their reachable parts match under the canonical
        // run-pairing from the initial states.
        if a.inputs != b.inputs || a.outputs != b.outputs {
            return false;
        }
        if a.state_count() != b.state_count() {
            return false;
        }
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut queue = vec![(a.init, b.init)];
        map.insert(a.init, b.init);
        while let Some((sa, sb)) = queue.pop() {
            if a.output(sa) != b.output(sb) {
                return false;
            }
            for v in 0..a.input_letter_count() {
                let ta = a.step(sa, Valuation(v as u32));
                let tb = b.step(sb, Valuation(v as u32));
                match map.get(&ta) {
                    Some(&expect) if expect != tb => return false,
                    Some(_) => {}
                    None => {
                        map.insert(ta, tb);
                        queue.push((ta, tb));
                    }
                }
            }
        }
        true
    }

    fn running_controller() -> MooreMachine {
        // Reference controller: output o_c until !o_e, then !o_c forever.
        read_mm(
            "mm role=controller\n\
             inputs: o_e o_p\n\
             outputs: o_c\n\
             init: c0\n\
             state c0 {o_c}\n\
               !o_e -> c1\n\
               else -> c0\n\
             state c1 {}\n\
               true -> c1\n",
        )
        .unwrap()
    }

    #[test]
    fn read_running_example_plant() {
        let m = running_example_plant();
        assert_eq!(m.state_count(), 2);
        assert_eq!(m.role, Role::Plant);
        assert_eq!(m.output(0), Valuation(1));
        assert_eq!(m.output(1), Valuation(0));
        // !o_e (input bit 0 unset) moves s0 -> s1 regardless of o_c.
        assert_eq!(m.step(0, Valuation(0b00)), 1);
        assert_eq!(m.step(0, Valuation(0b10)), 1);
        assert_eq!(m.step(0, Valuation(0b01)), 0);
    }

    #[test]
    fn round_trip_is_normalizing_fixpoint() {
        let m = running_example_plant();
        let text = write_mm(&m);
        let m2 = read_mm(&text).unwrap();
        assert_eq!(write_mm(&m2), text);
        assert!(mm_isomorphic(&m, &m2));
    }

    #[test]
    fn overlapping_guards_rejected() {
        let err = read_mm(
            "mm role=plant\n\
             inputs: o_e\n\
             outputs: o_p\n\
             init: s0\n\
             state s0 {}\n\
               o_e -> s0\n\
               true -> s0\n",
        )
        .unwrap_err();
        assert!(matches!(err, MachineError::OverlappingGuards { .. }));
    }

    #[test]
    fn incomplete_guards_rejected() {
        let err = read_mm(
            "mm role=plant\n\
             inputs: o_e\n\
             outputs: o_p\n\
             init: s0\n\
             state s0 {}\n\
               o_e -> s0\n",
        )
        .unwrap_err();
        assert!(matches!(err, MachineError::IncompleteGuards { .. }));
    }

    #[test]
    fn parallel_plant_controller_running_example() {
        let plant = running_example_plant();
        let ctrl = running_controller();
        let joint = parallel(&plant, &ctrl).unwrap();
        assert_eq!(joint.inputs, vec!["o_e".to_string()]);
        assert_eq!(joint.outputs, vec!["o_p".to_string(), "o_c".to_string()]);
        // Initially both outputs hold; after !o_e neither does. Once the
        // controller has switched to !o_c it never goes back, while the
        // plant keeps toggling o_p with o_e, so a third pair is reachable.
        assert_eq!(joint.output(joint.init), Valuation(0b11));
        assert_eq!(joint.step(joint.init, Valuation(1)), joint.init);
        let after = joint.step(joint.init, Valuation(0));
        assert_eq!(joint.output(after), Valuation(0));
        assert_eq!(joint.step(after, Valuation(0)), after);
        let back = joint.step(after, Valuation(1));
        assert_eq!(joint.output(back), Valuation(0b01)); // o_p, !o_c
        assert_eq!(joint.state_count(), 3);
    }

    #[test]
    fn parallel_identity_element() {
        let plant = running_example_plant();
        let unit = MooreMachine::new(
            Role::Environment,
            vec![],
            vec![],
            0,
            vec!["u".into()],
            vec![vec![0]],
            vec![Valuation(0)],
        );
        let joint = parallel(&plant, &unit).unwrap();
        assert!(mm_isomorphic(&joint, &MooreMachine {
            role: Role::Composite,
            ..plant.clone()
        }));
    }

    #[test]
    fn parallel_is_symmetric_up_to_iso() {
        let plant = running_example_plant();
        let ctrl = running_controller();
        let ab = parallel(&plant, &ctrl).unwrap();
        let ba = parallel(&ctrl, &plant).unwrap();
        assert_eq!(ab.state_count(), ba.state_count());
        // Outputs are ordered differently; compare traces instead.
        let mut sa = ab.init;
        let mut sb = ba.init;
        for step in [0u32, 1, 0, 1, 1, 0] {
            let oa = ab.output(sa);
            let ob = ba.output(sb);
            let get = |m: &MooreMachine, o: Valuation, name: &str| {
                o.contains(m.outputs.iter().position(|p| p == name).unwrap())
            };
            assert_eq!(get(&ab, oa, "o_p"), get(&ba, ob, "o_p"));
            assert_eq!(get(&ab, oa, "o_c"), get(&ba, ob, "o_c"));
            sa = ab.step(sa, Valuation(step));
            sb = ba.step(sb, Valuation(step));
        }
    }

    #[test]
    fn parallel_rejects_output_overlap() {
        let plant = running_example_plant();
        assert!(matches!(
            parallel(&plant, &plant),
            Err(MachineError::OutputOverlap(_))
        ));
    }

    #[test]
    fn reroot_running_plant() {
        let plant = running_example_plant();
        let at_init = reroot(&plant, 0).unwrap();
        assert!(mm_isomorphic(&plant, &at_init));
        let at_s1 = reroot(&plant, 1).unwrap();
        assert_eq!(at_s1.output(at_s1.init), Valuation(0)); // !o_p
        assert!(matches!(reroot(&plant, 7), Err(MachineError::UnknownState(7))));
    }

    #[test]
    fn reroot_is_idempotent() {
        let plant = running_example_plant();
        let once = reroot(&plant, 1).unwrap();
        let twice = reroot(&once, once.init).unwrap();
        assert!(mm_isomorphic(&once, &twice));
    }

    #[test]
    fn reroot_from_unreachable_state_succeeds() {
        // s2 is unreachable from s0 but rerooting at it works; reachability
        // is computed from the new root.
        let m = read_mm(
            "mm role=plant\n\
             inputs: o_e\n\
             outputs: o_p\n\
             init: s0\n\
             state s0 {}\n\
               true -> s0\n\
             state s2 {o_p}\n\
               true -> s0\n",
        )
        .unwrap();
        let r = reroot(&m, 1).unwrap();
        assert_eq!(r.state_count(), 2);
        assert_eq!(r.output(0), Valuation(1));
    }
}
