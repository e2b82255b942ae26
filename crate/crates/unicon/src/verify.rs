//! Model checking a (possibly open) Moore machine against a safety
//! specification: universal branching over the free propositions, with a
//! shortest lasso counterexample on failure.

use std::collections::HashMap;

use crate::logic::{Architecture, LassoWord, Ltl, Valuation};
use crate::machines::MooreMachine;
use crate::synthesis::SynthesisError;

pub struct VerifyResult {
    pub ok: bool,
    /// A violating input/output word (over the full AP) when `ok` is false;
    /// guaranteed to falsify the specification under `eval_lasso`.
    pub counterexample: Option<LassoWord>,
}

/// Checks system ⊨ f for every valuation sequence of the propositions the
/// system does not determine. The product with the specification automaton
/// is explored breadth-first, so a discovered violation has a shortest
/// prefix; the prefix is closed into a lasso inside the unsafe trap.
pub fn verify(
    system: &MooreMachine,
    f: &Ltl,
    arch: &Architecture,
) -> Result<VerifyResult, SynthesisError> {
    let a = crate::automata::ltl_to_dsa(f, arch)?;
    let in_pos = MooreMachine::positions_in(&system.inputs, |p| arch.index_of(p))
        .map_err(SynthesisError::Machine)?;
    let out_pos = MooreMachine::positions_in(&system.outputs, |p| arch.index_of(p))
        .map_err(SynthesisError::Machine)?;
    let out_mask: u32 = out_pos.iter().map(|&b| 1u32 << b).sum();
    let free: Vec<usize> =
        (0..arch.ap_count()).filter(|b| out_mask >> b & 1 == 0).collect();

    // BFS with parents for shortest-counterexample reconstruction.
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut nodes = vec![(a.init, system.init)];
    let mut parent: Vec<Option<(usize, Valuation)>> = vec![None];
    index.insert(nodes[0], 0);
    let mut violating: Option<usize> = if a.is_safe(a.init) { None } else { Some(0) };
    let mut frontier = 0;
    while violating.is_none() && frontier < nodes.len() {
        let (q, s) = nodes[frontier];
        let out_letter = MooreMachine::local_to_letter(system.output(s), &out_pos);
        for bits in 0..1usize << free.len() {
            let mut letter = out_letter;
            for (i, &b) in free.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    letter = letter.union(Valuation(1 << b));
                }
            }
            let q2 = a.step(q, letter);
            let s2 = system.step(s, MooreMachine::input_from_letter(letter, &in_pos));
            if let Some(&_known) = index.get(&(q2, s2)) {
                continue;
            }
            nodes.push((q2, s2));
            parent.push(Some((frontier, letter)));
            index.insert((q2, s2), nodes.len() - 1);
            if !a.is_safe(q2) {
                violating = Some(nodes.len() - 1);
                break;
            }
        }
        frontier += 1;
    }

    let Some(bad) = violating else {
        return Ok(VerifyResult { ok: true, counterexample: None });
    };

    // Prefix: letters from the initial node to the unsafe one.
    let mut prefix = Vec::new();
    let mut cur = bad;
    while let Some((p, letter)) = parent[cur] {
        prefix.push(letter);
        cur = p;
    }
    prefix.reverse();

    // Cycle: the unsafe set is a trap, so any continuation stays violating;
    // follow the all-free-false letters until a product state repeats.
    let (mut q, mut s) = nodes[bad];
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut tail: Vec<Valuation> = Vec::new();
    loop {
        if let Some(&at) = seen.get(&(q, s)) {
            prefix.extend(tail[..at].iter().copied());
            let cycle = tail[at..].to_vec();
            return Ok(VerifyResult {
                ok: false,
                counterexample: Some(LassoWord::new(prefix, cycle)),
            });
        }
        seen.insert((q, s), tail.len());
        let letter = MooreMachine::local_to_letter(system.output(s), &out_pos);
        tail.push(letter);
        s = system.step(s, MooreMachine::input_from_letter(letter, &in_pos));
        q = a.step(q, letter);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval_lasso, parse_ltl};
    use crate::machines::{parallel, read_mm, running_example_plant, Role};

    fn running_arch() -> Architecture {
        Architecture::new(vec!["o_e"], vec!["o_c"], vec!["o_p"]).unwrap()
    }

    fn good_controller() -> MooreMachine {
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
    fn consistent_closed_loop_passes() {
        let arch = running_arch();
        let f = parse_ltl("(o_c <-> o_p) W !o_e", &arch).unwrap();
        let system = parallel(&running_example_plant(), &good_controller()).unwrap();
        let r = verify(&system, &f, &arch).unwrap();
        assert!(r.ok);
        assert!(r.counterexample.is_none());
    }

    #[test]
    fn mismatching_controller_fails_with_valid_lasso() {
        let arch = running_arch();
        let f = parse_ltl("(o_c <-> o_p) W !o_e", &arch).unwrap();
        let never_c = read_mm(
            "mm role=controller\n\
             inputs: o_e o_p\n\
             outputs: o_c\n\
             init: c0\n\
             state c0 {}\n\
               true -> c0\n",
        )
        .unwrap();
        let system = parallel(&running_example_plant(), &never_c).unwrap();
        let r = verify(&system, &f, &arch).unwrap();
        assert!(!r.ok);
        let w = r.counterexample.expect("violations carry a witness");
        // Shortest violation: the first step keeps o_e while the outputs
        // mismatch (later letters only close the lasso inside the trap).
        assert!(w.prefix[0].contains(0)); // o_e chosen by the environment
        assert!(w.prefix[0].contains(2) && !w.prefix[0].contains(1)); // o_p, !o_c
        assert!(!eval_lasso(&f, &w, &arch));
    }

    #[test]
    fn anything_models_true() {
        let arch = running_arch();
        let system = parallel(&running_example_plant(), &good_controller()).unwrap();
        assert!(verify(&system, &Ltl::True, &arch).unwrap().ok);
    }

    #[test]
    fn open_plant_checked_over_free_controller_outputs() {
        let arch = running_arch();
        // The plant alone violates the matching obligation for some
        // controller behavior, but satisfies a pure plant property.
        let f = parse_ltl("(o_c <-> o_p) W !o_e", &arch).unwrap();
        let plant = running_example_plant();
        assert!(!verify(&plant, &f, &arch).unwrap().ok);
        let g = parse_ltl("o_p", &arch).unwrap();
        assert!(verify(&plant, &g, &arch).unwrap().ok);
    }

    #[test]
    fn unsatisfiable_spec_yields_immediate_counterexample() {
        let arch = running_arch();
        let system = MooreMachine::new(
            Role::Composite,
            vec![],
            vec!["o_e".into(), "o_c".into(), "o_p".into()],
            0,
            vec!["s0".into()],
            vec![vec![0]],
            vec![Valuation(0)],
        );
        let r = verify(&system, &Ltl::False, &arch).unwrap();
        assert!(!r.ok);
        let w = r.counterexample.unwrap();
        assert!(w.prefix.is_empty());
        assert!(!eval_lasso(&Ltl::False, &w, &arch));
    }
}
