//! Membership of a plant in a safe prophecy, decided by a two-player safety
//! game between the system (choosing controller outputs) and the environment
//! (choosing environment outputs), with a write-once memoization cache.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::automata::SafetyAutomaton;
use crate::logic::Valuation;
use crate::machines::MooreMachine;
use crate::prophecy::ProphecyAutomaton;

/// Explicit game graph for one membership query. System nodes are
/// (automaton state, plant state) pairs — the fresh initial tree state is
/// node 0, which is always expanded (its safety never matters) and offers
/// every controller output; the forced anchor output is selected when the
/// verdict is read off, so a single game answers all forced-output queries
/// at its anchor. Environment nodes are (system node, chosen controller
/// output). Branches that would enter the universally-accepting sink are
/// elided, so environment moves range over `2^{O_e}` only. The graph is
/// stored flat: the environment nodes of a system node are contiguous, and
/// every environment node has exactly `env_stride` successors.
pub struct SafetyGame {
    /// (base automaton state, plant state); node 0 is the initial node.
    pub sys_nodes: Vec<(usize, usize)>,
    /// First environment-node id per system node (they are contiguous).
    sys_env_start: Vec<u32>,
    sys_env_len: Vec<u32>,
    /// Owning system node per environment node.
    env_owner: Vec<u32>,
    /// Controller output chosen at each environment node.
    env_choice: Vec<Valuation>,
    /// Flat successor table: `env_stride` system-node ids per env node.
    env_succ: Vec<u32>,
    env_stride: usize,
    /// System nodes whose automaton state is outside the safe set. The
    /// initial node is never unsafe (the fresh tree state is accepting).
    unsafe_sys: Vec<bool>,
    /// Winning leaves (terminal-sink shortcut): not expanded, never lost.
    leaf_win: Vec<bool>,
}

impl SafetyGame {
    pub fn sys_count(&self) -> usize {
        self.sys_nodes.len()
    }

    pub fn env_count(&self) -> usize {
        self.env_choice.len()
    }

    /// Environment-node ids reachable by the system player's moves at `s`.
    pub fn moves_of(&self, s: usize) -> std::ops::Range<usize> {
        let start = self.sys_env_start[s] as usize;
        start..start + self.sys_env_len[s] as usize
    }

    pub fn choice_of(&self, e: usize) -> Valuation {
        self.env_choice[e]
    }
}

/// Result of solving: per-node winning flags for both layers.
pub struct WinningRegion {
    pub sys: Vec<bool>,
    pub env: Vec<bool>,
}

#[derive(Default)]
pub struct MembershipStats {
    pub games_built: AtomicU64,
    pub games_solved: AtomicU64,
    pub cache_hits: AtomicU64,
    pub cache_misses: AtomicU64,
}

impl MembershipStats {
    pub fn snapshot(&self) -> (u64, u64, u64, u64) {
        (
            self.games_built.load(Ordering::Relaxed),
            self.games_solved.load(Ordering::Relaxed),
            self.cache_hits.load(Ordering::Relaxed),
            self.cache_misses.load(Ordering::Relaxed),
        )
    }
}

/// Write-once map from (anchor state, forced controller output, plant state)
/// to the membership verdict. Whole solved regions are bulk-inserted so that
/// later queries against the same automaton/plant usually hit. A cache is
/// scoped to one (automaton, plant) pair: plant state ids are part of the
/// key, so machines with different state numbering must not share a cache.
/// Entries per (anchor, output) pair live in a dense per-plant-state table
/// (0 unknown, 1 non-member, 2 member).
#[derive(Default)]
pub struct MembershipCache {
    map: Mutex<HashMap<(usize, u32), Vec<u8>>>,
    pub stats: MembershipStats,
}

impl MembershipCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lookup(&self, anchor: usize, alpha: Valuation, plant_state: usize) -> Option<bool> {
        let got = self
            .map
            .lock()
            .unwrap()
            .get(&(anchor, alpha.0))
            .and_then(|row| match row.get(plant_state) {
                Some(1) => Some(false),
                Some(2) => Some(true),
                _ => None,
            });
        match got {
            Some(v) => {
                self.stats.cache_hits.fetch_add(1, Ordering::Relaxed);
                Some(v)
            }
            None => {
                self.stats.cache_misses.fetch_add(1, Ordering::Relaxed);
                None
            }
        }
    }

    fn insert_region(
        &self,
        plant_states: usize,
        entries: impl Iterator<Item = ((usize, u32, usize), bool)>,
    ) {
        let mut map = self.map.lock().unwrap();
        for ((anchor, alpha, s), value) in entries {
            let row =
                map.entry((anchor, alpha)).or_insert_with(|| vec![0u8; plant_states]);
            let encoded = if value { 2 } else { 1 };
            debug_assert!(
                row[s] == 0 || row[s] == encoded,
                "cache entries are final and must never be contradicted"
            );
            row[s] = encoded;
        }
    }

    pub fn len(&self) -> usize {
        self.map
            .lock()
            .unwrap()
            .values()
            .map(|row| row.iter().filter(|&&v| v != 0).count())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Options for game construction. The terminal-sink shortcut stops exploring
/// below system nodes whose automaton state can only ever see safe states
/// (an all-safe trap); such nodes are winning leaves. Off by default.
#[derive(Clone, Copy, Default)]
pub struct GameOptions {
    pub terminal_sink_shortcut: bool,
}

/// Builds the reachable game graph for deciding membership of the plant
/// (started at `plant_state`) in the prophecy.
pub fn build_game(
    p: &ProphecyAutomaton<'_>,
    plant: &MooreMachine,
    plant_state: usize,
) -> SafetyGame {
    build_game_with(p.base, plant, plant_state, p.anchor_state, GameOptions::default())
}

fn all_safe_trap(base: &SafetyAutomaton) -> Vec<bool> {
    // A state is an all-safe trap iff no unsafe state is reachable from it:
    // compute backward closure of unsafe states under predecessors.
    let n = base.state_count();
    let mut can_reach_unsafe: Vec<bool> = (0..n).map(|q| !base.is_safe(q)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for q in 0..n {
            if !can_reach_unsafe[q] {
                for letter in 0..base.arch.letter_count() {
                    if can_reach_unsafe[base.step(q, Valuation(letter as u32))] {
                        can_reach_unsafe[q] = true;
                        changed = true;
                        break;
                    }
                }
            }
        }
    }
    can_reach_unsafe.into_iter().map(|b| !b).collect()
}

fn build_game_with(
    base: &SafetyAutomaton,
    plant: &MooreMachine,
    plant_state: usize,
    anchor: usize,
    opts: GameOptions,
) -> SafetyGame {
    let arch = &base.arch;
    let in_pos = MooreMachine::positions_in(&plant.inputs, |p| arch.index_of(p))
        .expect("plant propositions belong to the architecture");
    let out_pos = MooreMachine::positions_in(&plant.outputs, |p| arch.index_of(p))
        .expect("plant propositions belong to the architecture");
    let ctrl_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.ctrl_mask() >> b & 1 == 1).collect();
    let env_bits: Vec<usize> =
        (0..arch.ap_count()).filter(|&b| arch.env_mask() >> b & 1 == 1).collect();
    let safe_trap = if opts.terminal_sink_shortcut {
        Some(all_safe_trap(base))
    } else {
        None
    };

    let embed = |compact: u32, bits: &[usize]| -> Valuation {
        let mut v = Valuation::EMPTY;
        for (i, &b) in bits.iter().enumerate() {
            if compact >> i & 1 == 1 {
                v = v.union(Valuation(1 << b));
            }
        }
        v
    };

    // Per (controller output, environment output) combination: the combined
    // valuation over the AP order and the plant's local input, both of which
    // are independent of the plant label (the plant reads env ∪ ctrl only).
    let ctrl_count = 1usize << ctrl_bits.len();
    let env_stride = 1usize << env_bits.len();
    let ctrl_letters: Vec<Valuation> =
        (0..ctrl_count as u32).map(|c| embed(c, &ctrl_bits)).collect();
    let combos_for = |beta_c: Valuation| -> Vec<(Valuation, Valuation)> {
        (0..env_stride as u32)
            .map(|e| {
                let v = beta_c.union(embed(e, &env_bits));
                (v, MooreMachine::input_from_letter(v, &in_pos))
            })
            .collect()
    };
    let ctrl_combos: Vec<Vec<(Valuation, Valuation)>> =
        ctrl_letters.iter().map(|&c| combos_for(c)).collect();

    let nq = base.state_count();
    let ns = plant.state_count();
    // Dense discovery index over (automaton state, plant state). The initial
    // node is deliberately NOT entered: a later visit of the same
    // (anchor, plant_state) pair is an ordinary node whose automaton state's
    // safety matters and whose outputs are unconstrained.
    let mut sys_index = vec![u32::MAX; nq * ns];
    let mut sys_nodes = vec![(anchor, plant_state)];
    let mut sys_env_start: Vec<u32> = Vec::new();
    let mut sys_env_len: Vec<u32> = Vec::new();
    let mut unsafe_sys = vec![false];
    let mut leaf_win = vec![false];
    let mut env_owner: Vec<u32> = Vec::new();
    let mut env_choice: Vec<Valuation> = Vec::new();
    let mut env_succ: Vec<u32> = Vec::new();

    let mut frontier = 0;
    while frontier < sys_nodes.len() {
        let (q, s) = sys_nodes[frontier];
        let initial = frontier == 0;
        sys_env_start.push(env_choice.len() as u32);
        if !initial && !base.is_safe(q) {
            unsafe_sys[frontier] = true;
            sys_env_len.push(0);
            frontier += 1;
            continue;
        }
        if let Some(trap) = &safe_trap {
            if !initial && trap[q] {
                leaf_win[frontier] = true;
                sys_env_len.push(0);
                frontier += 1;
                continue;
            }
        }
        let plant_label = MooreMachine::local_to_letter(plant.output(s), &out_pos);
        sys_env_len.push(ctrl_count as u32);
        for (&beta_c, combos) in ctrl_letters.iter().zip(&ctrl_combos) {
            env_owner.push(frontier as u32);
            env_choice.push(beta_c);
            for &(combined, plant_in) in combos {
                let q2 = base.step(q, plant_label.union(combined));
                let s2 = plant.step(s, plant_in);
                let slot = &mut sys_index[q2 * ns + s2];
                if *slot == u32::MAX {
                    sys_nodes.push((q2, s2));
                    unsafe_sys.push(false);
                    leaf_win.push(false);
                    *slot = (sys_nodes.len() - 1) as u32;
                }
                env_succ.push(*slot);
            }
        }
        frontier += 1;
    }

    SafetyGame {
        sys_nodes,
        sys_env_start,
        sys_env_len,
        env_owner,
        env_choice,
        env_succ,
        env_stride,
        unsafe_sys,
        leaf_win,
    }
}

/// Solves the safety game by removing the environment attractor of the
/// unsafe nodes, with a work list and per-node out-degree counters (linear
/// in the number of edges). Returns the system player's winning region.
pub fn solve_safety(g: &SafetyGame) -> WinningRegion {
    let ns = g.sys_nodes.len();
    let ne = g.env_choice.len();
    let stride = g.env_stride;

    // Predecessor lists (env node -> sys successor) in CSR form.
    let mut deg = vec![0u32; ns];
    for &t in &g.env_succ {
        deg[t as usize] += 1;
    }
    let mut offset = vec![0u32; ns + 1];
    for i in 0..ns {
        offset[i + 1] = offset[i] + deg[i];
    }
    let mut cursor = offset[..ns].to_vec();
    let mut preds = vec![0u32; g.env_succ.len()];
    for e in 0..ne {
        for k in 0..stride {
            let t = g.env_succ[e * stride + k] as usize;
            preds[cursor[t] as usize] = e as u32;
            cursor[t] += 1;
        }
    }

    let mut sys_lost = vec![false; ns];
    let mut env_lost = vec![false; ne];
    // A system node falls when all its moves are lost; an environment node
    // falls when any successor is lost.
    let mut remaining: Vec<u32> = g.sys_env_len.clone();
    let mut work: Vec<usize> = Vec::new();
    for s in 0..ns {
        if g.unsafe_sys[s] || (g.sys_env_len[s] == 0 && !g.leaf_win[s]) {
            sys_lost[s] = true;
            work.push(s);
        }
    }
    while let Some(s) = work.pop() {
        for &e in &preds[offset[s] as usize..offset[s + 1] as usize] {
            let e = e as usize;
            if env_lost[e] {
                continue;
            }
            env_lost[e] = true;
            let owner = g.env_owner[e] as usize;
            if !sys_lost[owner] {
                remaining[owner] -= 1;
                if remaining[owner] == 0 {
                    sys_lost[owner] = true;
                    work.push(owner);
                }
            }
        }
    }

    WinningRegion {
        sys: sys_lost.iter().map(|&l| !l).collect(),
        env: env_lost.iter().map(|&l| !l).collect(),
    }
}

/// Decides plant ∈ prophecy for a plant whose initial state is already the
/// relevant one (callers reroot beforehand, or use [`member_from`]).
pub fn is_member(
    plant: &MooreMachine,
    p: &ProphecyAutomaton<'_>,
    cache: &MembershipCache,
) -> bool {
    member_from(
        p.base,
        plant,
        plant.init,
        p.anchor_state,
        p.anchor_output,
        cache,
        GameOptions::default(),
    )
}

/// Core membership query against the original plant indexed by its own state
/// ids, avoiding the renumbering a literal reroot would introduce in cache
/// keys. Solved games are bulk-inserted into the cache: every environment
/// node's verdict is a final (anchor, output, plant state) entry.
pub fn member_from(
    base: &SafetyAutomaton,
    plant: &MooreMachine,
    plant_state: usize,
    anchor: usize,
    alpha: Valuation,
    cache: &MembershipCache,
    opts: GameOptions,
) -> bool {
    let alpha = alpha.project(base.arch.ctrl_mask());
    if let Some(v) = cache.lookup(anchor, alpha, plant_state) {
        return v;
    }
    let game = build_game_with(base, plant, plant_state, anchor, opts);
    cache.stats.games_built.fetch_add(1, Ordering::Relaxed);
    let region = solve_safety(&game);
    cache.stats.games_solved.fetch_add(1, Ordering::Relaxed);

    // An environment node ((q, s), β_c) is winning iff every β_e-successor
    // is winning — exactly the membership verdict for anchor q, forced
    // output β_c, plant state s. Node 0 offers every controller output, so
    // one game answers all forced-output queries at the anchor at once.
    // With the terminal-sink shortcut enabled, leaves have no environment
    // nodes, so fewer entries are produced.
    let entries = (0..game.env_count()).map(|e| {
        let owner = game.env_owner[e] as usize;
        let (q, s) = game.sys_nodes[owner];
        let q = if owner == 0 { anchor } else { q };
        ((q, game.env_choice[e].0, s), region.env[e])
    });
    let verdict = game
        .moves_of(0)
        .find(|&e| game.env_choice[e] == alpha)
        .map(|e| region.env[e])
        .expect("every projected controller output is offered at the initial node");
    cache.insert_region(plant.state_count(), entries);
    verdict
}
