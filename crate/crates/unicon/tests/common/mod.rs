//! Shared randomized generators and an independent brute-force membership
//! oracle for the integration suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use unicon::automata::SafetyAutomaton;
use unicon::logic::{Architecture, LassoWord, Ltl, Valuation};
use unicon::machines::{MooreMachine, Role};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Three propositions, one per role: the smallest architecture where every
/// player matters.
pub fn small_arch() -> Architecture {
    Architecture::new(vec!["o_e"], vec!["o_c"], vec!["o_p"]).unwrap()
}

/// A random formula in the syntactic safety fragment (negation on atoms
/// only; no U/F) of the given nesting depth.
pub fn random_safety_formula(r: &mut ChaCha8Rng, arch: &Architecture, depth: usize) -> Ltl {
    let literal = |r: &mut ChaCha8Rng| -> Ltl {
        let name = arch.ap_name(r.gen_range(0..arch.ap_count())).to_string();
        match r.gen_range(0..4) {
            0 => Ltl::True,
            1 => Ltl::atom(name),
            2 => Ltl::not(Ltl::atom(name)),
            _ => {
                if r.gen_bool(0.2) {
                    Ltl::False
                } else {
                    Ltl::atom(name)
                }
            }
        }
    };
    if depth == 0 {
        return literal(r);
    }
    match r.gen_range(0..8) {
        0 => literal(r),
        1 => Ltl::and(vec![
            random_safety_formula(r, arch, depth - 1),
            random_safety_formula(r, arch, depth - 1),
        ]),
        2 => Ltl::or(vec![
            random_safety_formula(r, arch, depth - 1),
            random_safety_formula(r, arch, depth - 1),
        ]),
        3 => Ltl::next(random_safety_formula(r, arch, depth - 1)),
        4 => Ltl::globally(random_safety_formula(r, arch, depth - 1)),
        5 => Ltl::weak_until(
            random_safety_formula(r, arch, depth - 1),
            random_safety_formula(r, arch, depth - 1),
        ),
        6 => Ltl::release(
            random_safety_formula(r, arch, depth - 1),
            random_safety_formula(r, arch, depth - 1),
        ),
        _ => Ltl::globally(Ltl::or(vec![
            literal(r),
            random_safety_formula(r, arch, depth - 1),
        ])),
    }
}

/// A random ultimately-periodic word: prefix length ≤ 4, cycle length 1–4.
pub fn random_lasso(r: &mut ChaCha8Rng, arch: &Architecture) -> LassoWord {
    let letter = |r: &mut ChaCha8Rng| Valuation(r.gen_range(0..arch.letter_count()) as u32);
    let prefix: Vec<Valuation> = (0..r.gen_range(0..=4)).map(|_| letter(r)).collect();
    let cycle: Vec<Valuation> = (0..r.gen_range(1..=4)).map(|_| letter(r)).collect();
    LassoWord::new(prefix, cycle)
}

/// A random complete plant over the architecture: inputs are env ∪ ctrl
/// propositions, outputs the plant propositions.
pub fn random_plant(r: &mut ChaCha8Rng, arch: &Architecture, max_states: usize) -> MooreMachine {
    let inputs: Vec<String> =
        arch.env_props().iter().chain(arch.ctrl_props()).cloned().collect();
    let outputs: Vec<String> = arch.plant_props().to_vec();
    let ns = r.gen_range(1..=max_states);
    let width = 1usize << inputs.len();
    let trans: Vec<Vec<usize>> =
        (0..ns).map(|_| (0..width).map(|_| r.gen_range(0..ns)).collect()).collect();
    let out: Vec<Valuation> =
        (0..ns).map(|_| Valuation(r.gen_range(0..1u32 << outputs.len()))).collect();
    let names = (0..ns).map(|i| format!("s{i}")).collect();
    MooreMachine::new(Role::Plant, inputs, outputs, 0, names, trans, out)
}

/// A random deterministic safety automaton satisfying the trap invariant:
/// unsafe states only move among unsafe states.
pub fn random_dsa(r: &mut ChaCha8Rng, arch: &Architecture, max_states: usize) -> SafetyAutomaton {
    let nq = r.gen_range(1..=max_states);
    let width = arch.letter_count();
    let safe: Vec<bool> = (0..nq).map(|_| r.gen_bool(0.7)).collect();
    let unsafe_states: Vec<usize> = (0..nq).filter(|&q| !safe[q]).collect();
    let trans: Vec<Vec<usize>> = (0..nq)
        .map(|q| {
            (0..width)
                .map(|_| {
                    if safe[q] {
                        r.gen_range(0..nq)
                    } else {
                        unsafe_states[r.gen_range(0..unsafe_states.len())]
                    }
                })
                .collect()
        })
        .collect();
    let names = (0..nq).map(|i| format!("q{i}")).collect();
    SafetyAutomaton::new(arch.clone(), r.gen_range(0..nq), names, trans, safe)
        .expect("construction respects the trap invariant")
}

/// Independent brute-force membership oracle: a dense greatest fixpoint over
/// (prophecy state, plant state) pairs of the tree-automaton acceptance
/// relation, with the prophecy transition structure written out from its
/// definition (fresh initial state forcing the anchor output; base states
/// offering every controller output; mismatching branches absorbed by an
/// always-accepting sink).
pub fn oracle_member(
    base: &SafetyAutomaton,
    plant: &MooreMachine,
    plant_state: usize,
    anchor: usize,
    alpha: Valuation,
) -> bool {
    let arch = &base.arch;
    let alpha = alpha.project(arch.ctrl_mask());
    let in_pos = MooreMachine::positions_in(&plant.inputs, |p| arch.index_of(p)).unwrap();
    let out_pos = MooreMachine::positions_in(&plant.outputs, |p| arch.index_of(p)).unwrap();
    let input_bits: Vec<usize> = (0..arch.ap_count())
        .filter(|&b| arch.plant_input_mask() >> b & 1 == 1)
        .collect();
    let ctrl_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.ctrl_mask() >> b & 1 == 1).collect();
    let betas: Vec<Valuation> = (0..1u32 << input_bits.len())
        .map(|compact| {
            let mut v = Valuation::EMPTY;
            for (i, &b) in input_bits.iter().enumerate() {
                if compact >> i & 1 == 1 {
                    v = v.union(Valuation(1 << b));
                }
            }
            v
        })
        .collect();
    let alphas: Vec<Valuation> = (0..1u32 << ctrl_bits.len())
        .map(|compact| {
            let mut v = Valuation::EMPTY;
            for (i, &b) in ctrl_bits.iter().enumerate() {
                if compact >> i & 1 == 1 {
                    v = v.union(Valuation(1 << b));
                }
            }
            v
        })
        .collect();

    // Prophecy states indexed densely: 0 = Init, 1 + q = Base(q),
    // nq + 1 = Sink.
    let nq = base.state_count();
    let np = nq + 2;
    let sink = nq + 1;
    let ns = plant.state_count();
    let accepting =
        |p: usize| -> bool { p == 0 || p == sink || base.is_safe(p - 1) };
    // Child prophecy state when the automaton runs from base state `q`, the
    // chosen controller output is `beta_c` and the branch input is `beta`.
    let child = |q: usize, beta_c: Valuation, beta: Valuation, label: Valuation| -> usize {
        if beta.project(arch.ctrl_mask()) == beta_c {
            1 + base.step(q, label.union(beta))
        } else {
            sink
        }
    };

    let mut win = vec![true; np * ns];
    loop {
        let mut changed = false;
        for p in 0..np {
            for s in 0..ns {
                if !win[p * ns + s] {
                    continue;
                }
                if !accepting(p) {
                    win[p * ns + s] = false;
                    changed = true;
                    continue;
                }
                if p == sink {
                    continue;
                }
                let q = if p == 0 { anchor } else { p - 1 };
                let label = MooreMachine::local_to_letter(plant.output(s), &out_pos);
                let choices: &[Valuation] =
                    if p == 0 { std::slice::from_ref(&alpha) } else { &alphas };
                let ok = choices.iter().any(|&beta_c| {
                    betas.iter().all(|&beta| {
                        let cp = child(q, beta_c, beta, label);
                        let cs =
                            plant.step(s, MooreMachine::input_from_letter(beta, &in_pos));
                        win[cp * ns + cs]
                    })
                });
                if !ok {
                    win[p * ns + s] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    win[plant_state]
}
