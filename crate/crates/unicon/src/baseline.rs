//! Standard game-based controller synthesis on the full specification ×
//! plant product, used for cross-validation and benchmarking.

use std::collections::HashMap;

use crate::logic::{Architecture, Ltl, Valuation};
use crate::machines::{MooreMachine, Role};
use crate::synthesis::{SynthesisError, TieBreak};

pub struct StandardResult {
    /// `None` means the initial game node is losing: unrealizable.
    pub controller: Option<MooreMachine>,
    pub dsa_states: usize,
    pub game_nodes: usize,
}

/// Solves the safety game on ltl_to_dsa(f) × plant where the system picks a
/// controller output and the environment answers with an environment output,
/// then extracts a positional controller with the given tie-break.
pub fn standard_synthesis(
    f: &Ltl,
    arch: &Architecture,
    plant: &MooreMachine,
    tie_break: TieBreak,
) -> Result<StandardResult, SynthesisError> {
    standard_synthesis_capped(f, arch, plant, tie_break, crate::automata::DEFAULT_STATE_CAP)
}

pub fn standard_synthesis_capped(
    f: &Ltl,
    arch: &Architecture,
    plant: &MooreMachine,
    tie_break: TieBreak,
    cap: usize,
) -> Result<StandardResult, SynthesisError> {
    let a = crate::automata::ltl_to_dsa_capped(f, arch, cap)?;
    let arch = a.arch.clone();
    let in_pos = MooreMachine::positions_in(&plant.inputs, |p| arch.index_of(p))
        .map_err(SynthesisError::Machine)?;
    let out_pos = MooreMachine::positions_in(&plant.outputs, |p| arch.index_of(p))
        .map_err(SynthesisError::Machine)?;
    let ctrl_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.ctrl_mask() >> b & 1 == 1).collect();
    let env_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.env_mask() >> b & 1 == 1).collect();
    let embed = |compact: u32, bits: &[usize]| -> Valuation {
        let mut v = Valuation::EMPTY;
        for (i, &b) in bits.iter().enumerate() {
            if compact >> i & 1 == 1 {
                v = v.union(Valuation(1 << b));
            }
        }
        v
    };

    // Dense greatest fixpoint over (automaton state, plant state): a node is
    // winning if its automaton state is safe and some controller output is
    // winning against every environment output.
    let nq = a.state_count();
    let ns = plant.state_count();
    let node = |q: usize, s: usize| q * ns + s;
    let succ = |q: usize, s: usize, sigma: Valuation| -> (usize, usize) {
        (
            a.step(q, sigma),
            plant.step(s, MooreMachine::input_from_letter(sigma, &in_pos)),
        )
    };
    let mut winning: Vec<bool> = (0..nq * ns).map(|i| a.is_safe(i / ns)).collect();
    loop {
        let mut changed = false;
        for q in 0..nq {
            for s in 0..ns {
                if !winning[node(q, s)] {
                    continue;
                }
                let plant_label = MooreMachine::local_to_letter(plant.output(s), &out_pos);
                let ok = (0..1u32 << ctrl_bits.len()).any(|c| {
                    let alpha = embed(c, &ctrl_bits);
                    (0..1u32 << env_bits.len()).all(|e| {
                        let sigma = plant_label.union(alpha).union(embed(e, &env_bits));
                        let (q2, s2) = succ(q, s, sigma);
                        winning[node(q2, s2)]
                    })
                });
                if !ok {
                    winning[node(q, s)] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    if !winning[node(a.init, plant.init)] {
        return Ok(StandardResult {
            controller: None,
            dsa_states: nq,
            game_nodes: nq * ns,
        });
    }

    // Positional extraction over the reachable winning part, branching on
    // the environment output only (the product tracks the plant).
    let winning_output = |q: usize, s: usize| -> Valuation {
        let plant_label = MooreMachine::local_to_letter(plant.output(s), &out_pos);
        let mut good: Vec<u32> = (0..1u32 << ctrl_bits.len())
            .filter(|&c| {
                let alpha = embed(c, &ctrl_bits);
                (0..1u32 << env_bits.len()).all(|e| {
                    let sigma = plant_label.union(alpha).union(embed(e, &env_bits));
                    let (q2, s2) = succ(q, s, sigma);
                    winning[node(q2, s2)]
                })
            })
            .collect();
        good.sort_unstable();
        let c = match tie_break {
            TieBreak::LexMin => *good.first().expect("winning node has a winning output"),
            TieBreak::LexMax => *good.last().expect("winning node has a winning output"),
        };
        embed(c, &ctrl_bits)
    };

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order = vec![(a.init, plant.init)];
    index.insert(order[0], 0);
    let mut outputs_full: Vec<Valuation> = Vec::new();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let inputs: Vec<String> =
        arch.env_props().iter().chain(arch.plant_props()).cloned().collect();
    let ctrl_in_pos: Vec<usize> = inputs
        .iter()
        .map(|p| arch.index_of(p).expect("architecture proposition"))
        .collect();
    let width = 1usize << inputs.len();
    let mut frontier = 0;
    while frontier < order.len() {
        let (q, s) = order[frontier];
        let alpha = winning_output(q, s);
        outputs_full.push(alpha);
        let plant_label = MooreMachine::local_to_letter(plant.output(s), &out_pos);
        let mut row = Vec::with_capacity(width);
        for v in 0..width {
            let letter = MooreMachine::local_to_letter(Valuation(v as u32), &ctrl_in_pos);
            let sigma = letter.project(arch.env_mask()).union(plant_label).union(alpha);
            let target = succ(q, s, sigma);
            debug_assert!(winning[node(target.0, target.1)]);
            let id = *index.entry(target).or_insert_with(|| {
                order.push(target);
                order.len() - 1
            });
            row.push(id);
        }
        rows.push(row);
        frontier += 1;
    }

    let out: Vec<Valuation> = outputs_full
        .iter()
        .map(|alpha| {
            let mut local = 0u32;
            for (i, &b) in ctrl_bits.iter().enumerate() {
                if alpha.contains(b) {
                    local |= 1 << i;
                }
            }
            Valuation(local)
        })
        .collect();
    let names = (0..order.len()).map(|i| format!("c{i}")).collect();
    let controller = MooreMachine::new(
        Role::Controller,
        inputs,
        arch.ctrl_props().to_vec(),
        0,
        names,
        rows,
        out,
    );
    Ok(StandardResult {
        controller: Some(controller),
        dsa_states: nq,
        game_nodes: nq * ns,
    })
}
