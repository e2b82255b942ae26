//! Safe-prophecy tree automata as lazy views over a shared safety
//! automaton. A prophecy denotes the set of plants for which some controller
//! whose first output is the anchor output keeps the automaton safe forever.

use thiserror::Error;

use crate::automata::SafetyAutomaton;
use crate::logic::Valuation;

#[derive(Debug, Error)]
pub enum ProphecyError {
    #[error("unknown automaton state {0}")]
    UnknownState(usize),
}

/// A state of the (implied) tree automaton: the fresh initial state, a state
/// of the base automaton, or the universally-accepting sink reached on
/// branches whose controller output differs from the chosen one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PState {
    Init,
    Base(usize),
    Sink,
}

/// A prophecy automaton is never materialized: it is the base automaton plus
/// an anchor state and a forced first controller output. The implied state
/// set is `{Init} ∪ Q ∪ {Sink}` with safe set `F ∪ {Init, Sink}`.
#[derive(Clone, Copy)]
pub struct ProphecyAutomaton<'a> {
    pub base: &'a SafetyAutomaton,
    pub anchor_state: usize,
    /// Valuation over the controller outputs, positioned in the
    /// architecture's AP order (i.e. already masked to the ctrl bits).
    pub anchor_output: Valuation,
}

pub fn prophecy(
    q: usize,
    alpha: Valuation,
    a: &SafetyAutomaton,
) -> Result<ProphecyAutomaton<'_>, ProphecyError> {
    if q >= a.state_count() {
        return Err(ProphecyError::UnknownState(q));
    }
    Ok(ProphecyAutomaton {
        base: a,
        anchor_state: q,
        anchor_output: alpha.project(a.arch.ctrl_mask()),
    })
}

impl<'a> ProphecyAutomaton<'a> {
    /// The implied state count |Q| + 2.
    pub fn implied_state_count(&self) -> usize {
        self.base.state_count() + 2
    }

    pub fn is_accepting(&self, s: PState) -> bool {
        match s {
            PState::Init | PState::Sink => true,
            PState::Base(q) => self.base.is_safe(q),
        }
    }

    /// Tree transitions from `state` when the plant labels the current node
    /// with `plant_label` (a valuation over O_p in AP positions): one entry
    /// per available controller-output choice, paired with the branch
    /// function over all plant-input valuations. Branch vectors are indexed
    /// by compact valuations over the plant inputs (env ∪ ctrl, AP order).
    pub fn expand_transitions(
        &self,
        state: PState,
        plant_label: Valuation,
    ) -> Vec<(Valuation, Vec<PState>)> {
        let arch = &self.base.arch;
        let input_bits: Vec<usize> = (0..arch.ap_count())
            .filter(|&b| arch.plant_input_mask() >> b & 1 == 1)
            .collect();
        let ctrl_mask = arch.ctrl_mask();
        let branch = |q: usize, beta_c: Valuation| -> Vec<PState> {
            (0..1u32 << input_bits.len())
                .map(|compact| {
                    let mut beta = Valuation::EMPTY;
                    for (i, &b) in input_bits.iter().enumerate() {
                        if compact >> i & 1 == 1 {
                            beta = beta.union(Valuation(1 << b));
                        }
                    }
                    if beta.project(ctrl_mask) == beta_c {
                        PState::Base(self.base.step(q, plant_label.union(beta)))
                    } else {
                        PState::Sink
                    }
                })
                .collect()
        };
        match state {
            PState::Init => {
                vec![(self.anchor_output, branch(self.anchor_state, self.anchor_output))]
            }
            PState::Base(q) => {
                let ctrl_bits: Vec<usize> = (0..arch.ap_count())
                    .filter(|&b| ctrl_mask >> b & 1 == 1)
                    .collect();
                (0..1u32 << ctrl_bits.len())
                    .map(|compact| {
                        let mut beta_c = Valuation::EMPTY;
                        for (i, &b) in ctrl_bits.iter().enumerate() {
                            if compact >> i & 1 == 1 {
                                beta_c = beta_c.union(Valuation(1 << b));
                            }
                        }
                        (beta_c, branch(q, beta_c))
                    })
                    .collect()
            }
            PState::Sink => {
                let width = 1usize << input_bits.len();
                vec![(Valuation::EMPTY, vec![PState::Sink; width])]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::ltl_to_dsa;
    use crate::logic::{parse_ltl, Architecture};

    fn running() -> (Architecture, SafetyAutomaton) {
        let arch = Architecture::new(vec!["o_e"], vec!["o_c"], vec!["o_p"]).unwrap();
        let f = parse_ltl("(o_c <-> o_p) W !o_e", &arch).unwrap();
        let a = ltl_to_dsa(&f, &arch).unwrap();
        (arch, a)
    }

    #[test]
    fn implied_size_is_base_plus_two() {
        let (arch, a) = running();
        let p = prophecy(0, Valuation::from_names(&arch, &["o_c"]), &a).unwrap();
        assert_eq!(p.implied_state_count(), 5);
        assert!(p.is_accepting(PState::Init));
        assert!(p.is_accepting(PState::Sink));
        assert!(prophecy(9, Valuation::EMPTY, &a).is_err());
    }

    #[test]
    fn init_expansion_forces_anchor_output() {
        let (arch, a) = running();
        let alpha = Valuation::from_names(&arch, &["o_c"]);
        let p = prophecy(a.init, alpha, &a).unwrap();
        let plant_label = Valuation::from_names(&arch, &["o_p"]);
        let ts = p.expand_transitions(PState::Init, plant_label);
        assert_eq!(ts.len(), 1);
        let (beta_c, branches) = &ts[0];
        assert_eq!(*beta_c, alpha);
        // Plant inputs are {o_e, o_c}: 4 branches. Branches where the
        // controller output differs from alpha go to the sink; consistent
        // ones follow the base automaton: with o_p and o_c matching, o_e
        // stays at q0 and !o_e moves to the accepting loop.
        assert_eq!(branches.len(), 4);
        let q0 = a.init;
        let q1 = a.step(q0, Valuation::EMPTY);
        for (i, b) in branches.iter().enumerate() {
            let beta = Valuation(i as u32); // compact == AP order here
            let full = crate::machines::MooreMachine::local_to_letter(
                beta,
                &[0usize, 1],
            );
            if full.project(arch.ctrl_mask()) != alpha {
                assert_eq!(*b, PState::Sink);
            } else if full.contains(0) {
                assert_eq!(*b, PState::Base(q0));
            } else {
                assert_eq!(*b, PState::Base(q1));
            }
        }
    }

    #[test]
    fn base_expansion_offers_all_controller_outputs() {
        let (arch, a) = running();
        let q1 = a.step(a.init, Valuation::EMPTY);
        let p = prophecy(a.init, Valuation::EMPTY, &a).unwrap();
        let ts = p.expand_transitions(PState::Base(q1), Valuation::EMPTY);
        assert_eq!(ts.len(), 2); // |2^{O_c}| choices
        // q1 accepts everything: all consistent branches stay at q1.
        for (beta_c, branches) in &ts {
            for (i, b) in branches.iter().enumerate() {
                let full = crate::machines::MooreMachine::local_to_letter(
                    Valuation(i as u32),
                    &[0usize, 1],
                );
                if full.project(arch.ctrl_mask()) == *beta_c {
                    assert_eq!(*b, PState::Base(q1));
                } else {
                    assert_eq!(*b, PState::Sink);
                }
            }
        }
    }

    #[test]
    fn sink_self_loops() {
        let (_, a) = running();
        let p = prophecy(0, Valuation::EMPTY, &a).unwrap();
        let ts = p.expand_transitions(PState::Sink, Valuation::EMPTY);
        assert_eq!(ts.len(), 1);
        assert!(ts[0].1.iter().all(|&b| b == PState::Sink));
    }
}
