//! Universal controller synthesis and on-the-fly composition with a concrete
//! plant: building the prophecy-annotated specification automaton, adapting
//! it to a plant via membership games, extracting a Moore controller, and
//! checking consistency of a given controller.

use std::collections::HashMap;

use thiserror::Error;

use crate::automata::{ltl_to_dsa, product_reach, AutomataError, SafetyAutomaton};
use crate::logic::{Architecture, Ltl, Valuation};
use crate::machines::{parallel_pairs, MachineError, MooreMachine, Role};
use crate::membership::{member_from, GameOptions, MembershipCache};
use crate::prophecy::{prophecy, ProphecyAutomaton};

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("architecture mismatch: {0}")]
    ArchitectureMismatch(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

/// A universal controller is its specification automaton: the prophecy
/// annotation κ(q, α) is fully determined by the skeleton and reconstructed
/// lazily, so nothing else needs to be stored or serialized.
pub struct UniversalController {
    pub skeleton: SafetyAutomaton,
}

impl UniversalController {
    pub fn kappa(&self, q: usize, alpha: Valuation) -> ProphecyAutomaton<'_> {
        prophecy(q, alpha, &self.skeleton).expect("kappa is total over skeleton states")
    }

    pub fn state_count(&self) -> usize {
        self.skeleton.state_count()
    }
}

pub fn universal_controller(
    f: &Ltl,
    arch: &Architecture,
) -> Result<UniversalController, SynthesisError> {
    Ok(UniversalController { skeleton: ltl_to_dsa(f, arch)? })
}

pub fn universal_controller_capped(
    f: &Ltl,
    arch: &Architecture,
    cap: usize,
) -> Result<UniversalController, SynthesisError> {
    Ok(UniversalController { skeleton: crate::automata::ltl_to_dsa_capped(f, arch, cap)? })
}

/// UC file: the automaton text format under a `uc` header.
pub fn write_uc(u: &UniversalController) -> String {
    let body = crate::automata::write_dsa(&u.skeleton);
    let rest = body.strip_prefix("dsa\n").expect("automaton format starts with header");
    format!("uc\n{rest}")
}

pub fn read_uc(text: &str) -> Result<UniversalController, AutomataError> {
    Ok(UniversalController {
        skeleton: crate::automata::read_dsa_with_header(text, "uc")?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    LexMin,
    LexMax,
}

impl Default for TieBreak {
    fn default() -> Self {
        TieBreak::LexMin
    }
}

#[derive(Clone, Copy)]
pub struct ComposeOptions {
    /// Early-termination heuristics: keep only the first passing controller
    /// output per composition state (covering every environment valuation)
    /// and prefer candidates leading to already-explored states.
    pub heuristics: bool,
    /// Direction used both for candidate ordering (heuristics on) and for
    /// output selection during extraction (heuristics off).
    pub tie_break: TieBreak,
    /// Membership-game terminal-sink shortcut (off by default).
    pub terminal_sink_shortcut: bool,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        Self {
            heuristics: true,
            tie_break: TieBreak::LexMin,
            terminal_sink_shortcut: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComposeStats {
    pub games_built: u64,
    pub games_solved: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
}

/// The adapted product of universal controller and plant: only edges whose
/// controller output passed its prophecy check are present.
pub struct Composition {
    pub arch: Architecture,
    /// (skeleton state, plant state) per composition state; index 0 is
    /// initial.
    pub states: Vec<(usize, usize)>,
    /// Kept edges per state: full letters σ with their target state index.
    pub edges: Vec<Vec<(Valuation, usize)>>,
    /// Plant output (in AP positions) at each composition state.
    pub plant_out: Vec<Valuation>,
    pub stats: ComposeStats,
}

pub enum ComposeResult {
    Realizable(Composition),
    Unrealizable,
}

fn check_plant(arch: &Architecture, plant: &MooreMachine) -> Result<(), SynthesisError> {
    if plant.role != Role::Plant {
        return Err(SynthesisError::ArchitectureMismatch(format!(
            "expected a plant machine, got role {}",
            plant.role
        )));
    }
    let mut expected_out: Vec<&str> = arch.plant_props().iter().map(|s| s.as_str()).collect();
    let mut got_out: Vec<&str> = plant.outputs.iter().map(|s| s.as_str()).collect();
    expected_out.sort_unstable();
    got_out.sort_unstable();
    if expected_out != got_out {
        return Err(SynthesisError::ArchitectureMismatch(format!(
            "plant outputs {{{}}} do not match the architecture's plant propositions {{{}}}",
            plant.outputs.join(" "),
            arch.plant_props().join(" ")
        )));
    }
    let mut expected_in: Vec<&str> = arch
        .env_props()
        .iter()
        .chain(arch.ctrl_props())
        .map(|s| s.as_str())
        .collect();
    let mut got_in: Vec<&str> = plant.inputs.iter().map(|s| s.as_str()).collect();
    expected_in.sort_unstable();
    got_in.sort_unstable();
    if expected_in != got_in {
        return Err(SynthesisError::ArchitectureMismatch(format!(
            "plant inputs {{{}}} do not match the architecture's env ∪ ctrl propositions",
            plant.inputs.join(" ")
        )));
    }
    Ok(())
}

/// All candidate edges from one product state: every letter σ agreeing with
/// the plant output there, with successors following the skeleton and the
/// plant independently. Ordered by environment valuation ascending, then
/// controller output ascending.
pub fn step_composition(
    q_c: usize,
    q_p: usize,
    u: &UniversalController,
    plant: &MooreMachine,
) -> Vec<(Valuation, (usize, usize))> {
    let arch = &u.skeleton.arch;
    let in_pos = MooreMachine::positions_in(&plant.inputs, |p| arch.index_of(p))
        .expect("plant propositions belong to the architecture");
    let out_pos = MooreMachine::positions_in(&plant.outputs, |p| arch.index_of(p))
        .expect("plant propositions belong to the architecture");
    let plant_label = MooreMachine::local_to_letter(plant.output(q_p), &out_pos);
    let env_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.env_mask() >> b & 1 == 1).collect();
    let ctrl_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.ctrl_mask() >> b & 1 == 1).collect();
    let embed = |compact: u32, bits: &[usize]| -> Valuation {
        let mut v = Valuation::EMPTY;
        for (i, &b) in bits.iter().enumerate() {
            if compact >> i & 1 == 1 {
                v = v.union(Valuation(1 << b));
            }
        }
        v
    };
    let mut out = Vec::with_capacity(1 << (env_bits.len() + ctrl_bits.len()));
    for e in 0..1u32 << env_bits.len() {
        for c in 0..1u32 << ctrl_bits.len() {
            let sigma = plant_label.union(embed(e, &env_bits)).union(embed(c, &ctrl_bits));
            let q_c2 = u.skeleton.step(q_c, sigma);
            let q_p2 = plant.step(q_p, MooreMachine::input_from_letter(sigma, &in_pos));
            out.push((sigma, (q_c2, q_p2)));
        }
    }
    out
}

/// On-the-fly composition: explores (skeleton state, plant state) pairs from
/// the initial pair, keeping an edge iff the plant rerooted at the current
/// plant state satisfies the prophecy of the edge's controller output.
/// Membership verdicts do not depend on the environment valuation, so
/// candidates are grouped per controller output: with heuristics on, the
/// first passing output keeps its edges for every environment valuation;
/// with heuristics off, all passing outputs do.
pub fn compose(
    u: &UniversalController,
    plant: &MooreMachine,
    opts: ComposeOptions,
) -> Result<ComposeResult, SynthesisError> {
    let arch = &u.skeleton.arch;
    check_plant(arch, plant)?;
    let cache = MembershipCache::new();
    let game_opts = GameOptions { terminal_sink_shortcut: opts.terminal_sink_shortcut };
    let ctrl_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.ctrl_mask() >> b & 1 == 1).collect();
    let embed_ctrl = |compact: u32| -> Valuation {
        let mut v = Valuation::EMPTY;
        for (i, &b) in ctrl_bits.iter().enumerate() {
            if compact >> i & 1 == 1 {
                v = v.union(Valuation(1 << b));
            }
        }
        v
    };

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut states = vec![(u.skeleton.init, plant.init)];
    index.insert(states[0], 0);
    let mut edges: Vec<Vec<(Valuation, usize)>> = Vec::new();
    let mut plant_out: Vec<Valuation> = Vec::new();
    let out_pos = MooreMachine::positions_in(&plant.outputs, |p| arch.index_of(p))
        .expect("checked against the architecture above");

    let mut frontier = 0;
    while frontier < states.len() {
        let (q_c, q_p) = states[frontier];
        plant_out.push(MooreMachine::local_to_letter(plant.output(q_p), &out_pos));
        let candidates = step_composition(q_c, q_p, u, plant);

        // Candidate controller outputs with their per-environment successor
        // lists (successors do not depend on how we got the letter).
        let ctrl_count = 1u32 << ctrl_bits.len();
        let mut passing: Vec<u32> = Vec::new();
        for c in 0..ctrl_count {
            let alpha = embed_ctrl(c);
            if member_from(&u.skeleton, plant, q_p, q_c, alpha, &cache, game_opts) {
                passing.push(c);
            }
        }
        if passing.is_empty() {
            return if frontier == 0 {
                Ok(ComposeResult::Unrealizable)
            } else {
                Err(SynthesisError::InternalInvariant(format!(
                    "composition state {frontier} (skeleton {q_c}, plant {q_p}) is \
                     reachable over kept edges but has no passing controller output"
                )))
            };
        }
        let kept_ctrl: Vec<u32> = if opts.heuristics {
            // Heuristic (b): prefer the passing output whose successors are
            // already explored; then the tie-break direction.
            let unexplored = |c: u32| -> usize {
                candidates
                    .iter()
                    .filter(|(sigma, target)| {
                        sigma.project(arch.ctrl_mask()) == embed_ctrl(c)
                            && !index.contains_key(target)
                    })
                    .count()
            };
            let best = passing
                .iter()
                .copied()
                .min_by_key(|&c| {
                    let dir = match opts.tie_break {
                        TieBreak::LexMin => c,
                        TieBreak::LexMax => ctrl_count - 1 - c,
                    };
                    (unexplored(c), dir)
                })
                .expect("nonempty passing set");
            vec![best]
        } else {
            passing
        };

        let mut kept_edges = Vec::new();
        for (sigma, target) in &candidates {
            let c_part = sigma.project(arch.ctrl_mask());
            if !kept_ctrl.iter().any(|&c| embed_ctrl(c) == c_part) {
                continue;
            }
            let id = *index.entry(*target).or_insert_with(|| {
                states.push(*target);
                states.len() - 1
            });
            kept_edges.push((*sigma, id));
        }
        edges.push(kept_edges);
        frontier += 1;
    }

    let (games_built, games_solved, cache_hits, cache_misses) = cache.stats.snapshot();
    Ok(ComposeResult::Realizable(Composition {
        arch: arch.clone(),
        states,
        edges,
        plant_out,
        stats: ComposeStats { games_built, games_solved, cache_hits, cache_misses },
    }))
}

/// Turns a composition into a Moore controller over inputs O_e ∪ O_p and
/// outputs O_c: per composition state one controller output is selected by
/// the tie-break among outputs kept with full environment coverage, and the
/// output moves to the source state of its edges. The composition already
/// tracks the plant, so the plant-output part of the input is redundant:
/// transitions branch on the environment part only.
pub fn extract_controller(c: &Composition, tie_break: TieBreak) -> MooreMachine {
    let arch = &c.arch;
    let inputs: Vec<String> =
        arch.env_props().iter().chain(arch.plant_props()).cloned().collect();
    let outputs: Vec<String> = arch.ctrl_props().to_vec();
    let in_pos: Vec<usize> = inputs
        .iter()
        .map(|p| arch.index_of(p).expect("architecture propositions"))
        .collect();
    let ctrl_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.ctrl_mask() >> b & 1 == 1).collect();

    // Selected output per composition state: smallest/largest controller
    // output (as a compact O_c valuation) that covers every environment
    // valuation among the kept edges.
    let env_count = 1usize << arch.env_props().len();
    let selected: Vec<Valuation> = (0..c.states.len())
        .map(|i| {
            let mut coverage: HashMap<u32, usize> = HashMap::new();
            for (sigma, _) in &c.edges[i] {
                *coverage.entry(sigma.project(arch.ctrl_mask()).0).or_insert(0) += 1;
            }
            let mut full: Vec<u32> = coverage
                .into_iter()
                .filter(|&(_, n)| n == env_count)
                .map(|(a, _)| a)
                .collect();
            full.sort_unstable();
            let bits = match tie_break {
                TieBreak::LexMin => *full.first().expect("composition states are covered"),
                TieBreak::LexMax => *full.last().expect("composition states are covered"),
            };
            Valuation(bits)
        })
        .collect();

    let width = 1usize << inputs.len();
    let mut trans = Vec::with_capacity(c.states.len());
    for i in 0..c.states.len() {
        let alpha = selected[i];
        let mut row = Vec::with_capacity(width);
        for v in 0..width {
            let letter = MooreMachine::local_to_letter(Valuation(v as u32), &in_pos);
            let sigma = letter.project(arch.env_mask()).union(c.plant_out[i]).union(alpha);
            let target = c.edges[i]
                .iter()
                .find(|(s, _)| *s == sigma)
                .map(|(_, t)| *t)
                .expect("selected output covers every environment valuation");
            row.push(target);
        }
        trans.push(row);
    }
    let out: Vec<Valuation> = selected
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
    let names = (0..c.states.len()).map(|i| format!("c{i}")).collect();
    MooreMachine::new(Role::Controller, inputs, outputs, 0, names, trans, out)
}

/// Consistency: at every reachable joint state of skeleton, plant and
/// controller, the plant (from its current state) must satisfy the prophecy
/// of the controller's current output.
pub fn is_consistent(
    ctrl: &MooreMachine,
    u: &UniversalController,
    plant: &MooreMachine,
) -> Result<bool, SynthesisError> {
    let arch = &u.skeleton.arch;
    let (joint, origins) = parallel_pairs(plant, ctrl)?;
    let reach = product_reach(&u.skeleton, &joint);
    let ctrl_out_pos = MooreMachine::positions_in(&ctrl.outputs, |p| arch.index_of(p))
        .map_err(SynthesisError::Machine)?;
    let cache = MembershipCache::new();
    for (q, joint_state) in reach {
        let (s_p, s_c) = origins[joint_state];
        let alpha = MooreMachine::local_to_letter(ctrl.output(s_c), &ctrl_out_pos);
        if !member_from(
            &u.skeleton,
            plant,
            s_p,
            q,
            alpha,
            &cache,
            GameOptions::default(),
        ) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_ltl;
    use crate::machines::{read_mm, running_example_plant};

    fn running() -> (Architecture, UniversalController, MooreMachine) {
        let arch = Architecture::new(vec!["o_e"], vec!["o_c"], vec!["o_p"]).unwrap();
        let f = parse_ltl("(o_c <-> o_p) W !o_e", &arch).unwrap();
        let u = universal_controller(&f, &arch).unwrap();
        (arch, u, running_example_plant())
    }

    fn reference_controller() -> MooreMachine {
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

    fn mm_bisimilar(a: &MooreMachine, b: &MooreMachine) -> bool {
        // For deterministic total machines, trace equivalence coincides with
        // the canonical run pairing being output-consistent.
        if a.inputs != b.inputs || a.outputs != b.outputs {
            return false;
        }
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![(a.init, b.init)];
        while let Some((sa, sb)) = stack.pop() {
            if !seen.insert((sa, sb)) {
                continue;
            }
            if a.output(sa) != b.output(sb) {
                return false;
            }
            for v in 0..a.input_letter_count() {
                stack.push((a.step(sa, Valuation(v as u32)), b.step(sb, Valuation(v as u32))));
            }
        }
        true
    }

    #[test]
    fn running_example_composition_matches_reference_controller() {
        let (_, u, plant) = running();
        assert_eq!(u.state_count(), 3);
        let result = compose(&u, &plant, ComposeOptions::default()).unwrap();
        let comp = match result {
            ComposeResult::Realizable(c) => c,
            ComposeResult::Unrealizable => panic!("running example is realizable"),
        };
        let ctrl = extract_controller(&comp, TieBreak::LexMin);
        assert!(mm_bisimilar(&ctrl, &reference_controller()));
    }

    #[test]
    fn running_example_composition_without_heuristics() {
        let (_, u, plant) = running();
        let opts = ComposeOptions { heuristics: false, ..Default::default() };
        let comp = match compose(&u, &plant, opts).unwrap() {
            ComposeResult::Realizable(c) => c,
            ComposeResult::Unrealizable => panic!("running example is realizable"),
        };
        let ctrl = extract_controller(&comp, TieBreak::LexMin);
        assert!(mm_bisimilar(&ctrl, &reference_controller()));
        // Without pruning, more than one output may be kept per state.
        assert!(comp.edges.iter().map(|e| e.len()).sum::<usize>() >= 4);
    }

    #[test]
    fn step_composition_running_example_edges() {
        let (arch, u, plant) = running();
        let edges = step_composition(u.skeleton.init, plant.init, &u, &plant);
        assert_eq!(edges.len(), 4);
        for (sigma, (q2, s2)) in &edges {
            assert_eq!(sigma.project(arch.plant_mask()), Valuation::from_names(&arch, &["o_p"]));
            // Skeleton and plant move independently: !o_e sends the plant to
            // s1 and the skeleton to the accepting loop.
            if !sigma.contains(0) {
                assert_eq!(*s2, 1);
                assert_eq!(*q2, u.skeleton.step(u.skeleton.init, *sigma));
            }
        }
    }

    #[test]
    fn unrealizable_at_initial_state() {
        let arch = Architecture::new(vec!["e"], vec!["c"], vec!["col"]).unwrap();
        let f = parse_ltl("G !col", &arch).unwrap();
        let u = universal_controller(&f, &arch).unwrap();
        let always_col = read_mm(
            "mm role=plant\n\
             inputs: e c\n\
             outputs: col\n\
             init: s0\n\
             state s0 {col}\n\
               true -> s0\n",
        )
        .unwrap();
        assert!(matches!(
            compose(&u, &always_col, ComposeOptions::default()).unwrap(),
            ComposeResult::Unrealizable
        ));
    }

    #[test]
    fn true_spec_keeps_everything() {
        let (arch, _, plant) = running();
        let u = universal_controller(&Ltl::True, &arch).unwrap();
        let comp = match compose(
            &u,
            &plant,
            ComposeOptions { heuristics: false, ..Default::default() },
        )
        .unwrap()
        {
            ComposeResult::Realizable(c) => c,
            ComposeResult::Unrealizable => panic!("true is always realizable"),
        };
        // Every candidate edge passes: 4 letters per state.
        for e in &comp.edges {
            assert_eq!(e.len(), 4);
        }
        let ctrl = extract_controller(&comp, TieBreak::LexMin);
        assert_eq!(ctrl.output(ctrl.init), Valuation::EMPTY);
    }

    #[test]
    fn tie_break_max_keeps_output_where_permitted() {
        let (_, u, plant) = running();
        let opts = ComposeOptions {
            heuristics: false,
            tie_break: TieBreak::LexMax,
            ..Default::default()
        };
        let comp = match compose(&u, &plant, opts).unwrap() {
            ComposeResult::Realizable(c) => c,
            ComposeResult::Unrealizable => panic!("running example is realizable"),
        };
        let ctrl = extract_controller(&comp, TieBreak::LexMax);
        // Initially only o_c passes, so min and max agree there; after !o_e
        // the skeleton accepts everything and max keeps o_c on.
        assert_eq!(ctrl.output(ctrl.init), Valuation(1));
        let after = ctrl.step(ctrl.init, Valuation(0b10)); // !o_e, o_p
        assert_ne!(after, ctrl.init);
        assert_eq!(ctrl.output(after), Valuation(1));
    }

    #[test]
    fn composition_stats_report_single_solved_game() {
        let (_, u, plant) = running();
        let comp = match compose(&u, &plant, ComposeOptions::default()).unwrap() {
            ComposeResult::Realizable(c) => c,
            ComposeResult::Unrealizable => panic!("realizable"),
        };
        // A solved game's region covers later queries: far fewer games than
        // membership questions, bounded by the skeleton state count.
        assert!(comp.stats.games_solved >= 1);
        assert!(comp.stats.games_solved <= u.state_count() as u64);
        assert!(comp.stats.cache_hits > 0);
    }

    #[test]
    fn consistency_running_example() {
        let (arch, u, plant) = running();
        assert!(is_consistent(&reference_controller(), &u, &plant).unwrap());
        // A controller starting with !o_c violates the q0 prophecy ⟨o_p⟩.
        let bad = read_mm(
            "mm role=controller\n\
             inputs: o_e o_p\n\
             outputs: o_c\n\
             init: c0\n\
             state c0 {}\n\
               true -> c0\n",
        )
        .unwrap();
        assert!(!is_consistent(&bad, &u, &plant).unwrap());
        // Against the trivial specification everything is consistent.
        let trivial = universal_controller(&Ltl::True, &arch).unwrap();
        assert!(is_consistent(&bad, &trivial, &plant).unwrap());
    }

    #[test]
    fn architecture_mismatch_detected() {
        let (_, u, _) = running();
        let wrong = read_mm(
            "mm role=plant\n\
             inputs: o_e o_c\n\
             outputs: wrong\n\
             init: s0\n\
             state s0 {}\n\
               true -> s0\n",
        )
        .unwrap();
        assert!(matches!(
            compose(&u, &wrong, ComposeOptions::default()),
            Err(SynthesisError::ArchitectureMismatch(_))
        ));
    }

    #[test]
    fn uc_file_round_trip() {
        let (_, u, _) = running();
        let text = write_uc(&u);
        assert!(text.starts_with("uc\n"));
        let back = read_uc(&text).unwrap();
        assert!(crate::automata::isomorphic(&u.skeleton, &back.skeleton));
        assert_eq!(write_uc(&back), text);
    }
}
