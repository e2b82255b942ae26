//! The robot-in-a-maze benchmark family: an n×n grid with a controlled robot
//! and an uncontrolled one, both moving simultaneously, plus the three
//! specification types used for evaluation.

use std::collections::HashSet;

use thiserror::Error;

use crate::logic::{Architecture, Ltl, Valuation};
use crate::machines::{MooreMachine, Role};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("grid size must be at least 2, got {0}")]
    GridTooSmall(usize),
    #[error("unknown specification type {0} (expected 1, 2 or 3)")]
    BadSpecType(u8),
}

pub type Cell = (usize, usize); // (row, col)

#[derive(Debug, Clone)]
pub struct GridWorld {
    pub n: usize,
    /// Blocked adjacencies between in-bounds cells, stored with the smaller
    /// cell first. The outer boundary is implicitly walled.
    pub walls: HashSet<(Cell, Cell)>,
    pub ctrl_start: Cell,
    pub plant_start: Cell,
}

impl GridWorld {
    pub fn open(n: usize) -> Result<Self, BenchError> {
        if n < 2 {
            return Err(BenchError::GridTooSmall(n));
        }
        Ok(Self {
            n,
            walls: HashSet::new(),
            ctrl_start: (n / 2, n / 2),
            plant_start: (0, 0),
        })
    }

    /// A perfect maze carved by randomized depth-first search: every pair of
    /// cells stays connected, all other adjacencies are walled.
    pub fn maze(n: usize, seed: u64) -> Result<Self, BenchError> {
        let mut g = Self::open(n)?;
        let mut rng = SplitMix64::new(seed);
        let mut carved: HashSet<(Cell, Cell)> = HashSet::new();
        let mut visited = vec![false; n * n];
        let mut stack = vec![(0usize, 0usize)];
        visited[0] = true;
        while let Some(&cell) = stack.last() {
            let mut next: Vec<Cell> = neighbors(cell, n)
                .into_iter()
                .filter(|&(r, c)| !visited[r * n + c])
                .collect();
            if next.is_empty() {
                stack.pop();
                continue;
            }
            let pick = next.remove(rng.next_below(next.len()));
            visited[pick.0 * n + pick.1] = true;
            carved.insert(edge(cell, pick));
            stack.push(pick);
        }
        for r in 0..n {
            for c in 0..n {
                for nb in neighbors((r, c), n) {
                    let e = edge((r, c), nb);
                    if !carved.contains(&e) {
                        g.walls.insert(e);
                    }
                }
            }
        }
        Ok(g)
    }

    fn blocked(&self, from: Cell, to: Cell) -> bool {
        self.walls.contains(&edge(from, to))
    }

    /// The cell reached by applying a move code, staying in place when the
    /// move is invalid, leaves the grid, or crosses a wall.
    pub fn apply_move(&self, pos: Cell, code: u32) -> Cell {
        let (r, c) = pos;
        let target = match code {
            1 if r > 0 => (r - 1, c),             // up
            2 if r + 1 < self.n => (r + 1, c),    // down
            3 if c > 0 => (r, c - 1),             // left
            4 if c + 1 < self.n => (r, c + 1),    // right
            _ => return pos,                      // stay / invalid / boundary
        };
        if self.blocked(pos, target) {
            pos
        } else {
            target
        }
    }
}

fn neighbors((r, c): Cell, n: usize) -> Vec<Cell> {
    let mut v = Vec::with_capacity(4);
    if r > 0 {
        v.push((r - 1, c));
    }
    if r + 1 < n {
        v.push((r + 1, c));
    }
    if c > 0 {
        v.push((r, c - 1));
    }
    if c + 1 < n {
        v.push((r, c + 1));
    }
    v
}

fn edge(a: Cell, b: Cell) -> (Cell, Cell) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// The benchmark architecture: 3-bit move codes for the environment-driven
/// robot and the controller, and the five sensor bits as plant outputs.
pub fn grid_arch() -> Architecture {
    Architecture::new(
        vec!["e0", "e1", "e2"],
        vec!["mv0", "mv1", "mv2"],
        vec!["u_obs", "d_obs", "l_obs", "r_obs", "col"],
    )
    .expect("fixed disjoint proposition sets")
}

/// Sensor valuation (over the plant outputs, machine-local order) at a
/// configuration: a direction bit is set iff the adjacent cell is walled,
/// out of bounds, or holds the other robot; `col` iff the robots share a
/// cell.
fn sensors(g: &GridWorld, ctrl: Cell, other: Cell) -> Valuation {
    let mut bits = 0u32;
    let dirs = [(1u32, 0), (2, 1), (3, 2), (4, 3)]; // (move code, bit)
    for (code, bit) in dirs {
        let target = g.apply_move(ctrl, code);
        let obstructed = target == ctrl || target == other;
        if obstructed {
            bits |= 1 << bit;
        }
    }
    if ctrl == other {
        bits |= 1 << 4;
    }
    Valuation(bits)
}

/// Builds the plant Moore machine: states are (controller robot position,
/// other robot position) pairs reachable from the start configuration, both
/// robots move simultaneously per step, and outputs are the sensor bits.
pub fn gen_plant(g: &GridWorld) -> Result<MooreMachine, BenchError> {
    if g.n < 2 {
        return Err(BenchError::GridTooSmall(g.n));
    }
    let arch = grid_arch();
    let inputs: Vec<String> =
        arch.env_props().iter().chain(arch.ctrl_props()).cloned().collect();
    let outputs: Vec<String> = arch.plant_props().to_vec();
    // Input valuation bits: e0 e1 e2 mv0 mv1 mv2 (machine-local order).
    let env_code = |v: Valuation| -> u32 { v.0 & 0b111 };
    let ctrl_code = |v: Valuation| -> u32 { (v.0 >> 3) & 0b111 };

    let key = |ctrl: Cell, other: Cell| -> (Cell, Cell) { (ctrl, other) };
    let mut index = std::collections::HashMap::new();
    let mut order = vec![key(g.ctrl_start, g.plant_start)];
    index.insert(order[0], 0usize);
    let width = 1usize << inputs.len();
    let mut trans: Vec<Vec<usize>> = Vec::new();
    let mut out: Vec<Valuation> = Vec::new();
    let mut frontier = 0;
    while frontier < order.len() {
        let (ctrl, other) = order[frontier];
        out.push(sensors(g, ctrl, other));
        let mut row = Vec::with_capacity(width);
        for v in 0..width {
            let val = Valuation(v as u32);
            let ctrl2 = g.apply_move(ctrl, ctrl_code(val));
            let other2 = g.apply_move(other, env_code(val));
            let k = key(ctrl2, other2);
            let id = *index.entry(k).or_insert_with(|| {
                order.push(k);
                order.len() - 1
            });
            row.push(id);
        }
        trans.push(row);
        frontier += 1;
    }
    let names = (0..order.len()).map(|i| format!("s{i}")).collect();
    Ok(MooreMachine::new(Role::Plant, inputs, outputs, 0, names, trans, out))
}

fn atom(n: &str) -> Ltl {
    Ltl::atom(n)
}

/// Move-code predicates over mv0 (bit value 1), mv1 (2), mv2 (4).
fn mv_code(code: u32) -> Ltl {
    Ltl::and(
        (0..3)
            .map(|i| {
                let a = atom(&format!("mv{i}"));
                if code >> i & 1 == 1 {
                    a
                } else {
                    Ltl::not(a)
                }
            })
            .collect(),
    )
}

fn mv_stay() -> Ltl {
    // Codes 0, 5, 6 and 7 all decode to "stay".
    Ltl::or(vec![mv_code(0), mv_code(5), mv_code(6), mv_code(7)])
}

/// The three specification types: an invariant, a collision obligation
/// conditioned on an assumption about how collisions can arise, and a
/// three-step obstacle-avoidance horizon.
pub fn gen_spec(t: u8) -> Result<Ltl, BenchError> {
    match t {
        1 => Ok(Ltl::globally(Ltl::not(atom("col")))),
        2 => {
            // A collision is excused only when, in the step before, some
            // direction was obstructed and the controller moved there or
            // stayed: ¬col W ¬((X col) → excuse).
            let excuse = Ltl::or(vec![
                Ltl::and(vec![atom("u_obs"), mv_code(1)]),
                Ltl::and(vec![atom("d_obs"), mv_code(2)]),
                Ltl::and(vec![atom("l_obs"), mv_code(3)]),
                Ltl::and(vec![atom("r_obs"), mv_code(4)]),
                mv_stay(),
            ]);
            let assump = Ltl::or(vec![
                Ltl::not(Ltl::next(atom("col"))),
                excuse,
            ]);
            Ok(Ltl::weak_until(Ltl::not(atom("col")), Ltl::not(assump)))
        }
        3 => {
            let no_u = |depth: usize| {
                let mut f = Ltl::not(atom("u_obs"));
                for _ in 0..depth {
                    f = Ltl::next(f);
                }
                f
            };
            Ok(Ltl::and(vec![no_u(1), no_u(2), no_u(3)]))
        }
        other => Err(BenchError::BadSpecType(other)),
    }
}

/// Small deterministic RNG for maze generation (keeps the library free of
/// external randomness; tests use a full-featured RNG separately).
struct SplitMix64(u64);

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn next_below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{safety_nnf, to_safety_nnf};

    #[test]
    fn two_by_two_grid_shape() {
        let g = GridWorld::open(2).unwrap();
        assert_eq!(g.ctrl_start, (1, 1));
        assert_eq!(g.plant_start, (0, 0));
        let plant = gen_plant(&g).unwrap();
        // All 16 configurations are reachable on the open 2×2 grid.
        assert_eq!(plant.state_count(), 16);
        // Initially the robots differ, so col is false; on a 2×2 grid every
        // direction is either a boundary or faces the other robot: from
        // (1,1), up and left hit the other robot's row/column cells (empty),
        // down and right hit the boundary.
        let init_out = plant.output(plant.init);
        assert!(!init_out.contains(4), "no initial collision");
        assert!(init_out.contains(1), "down blocked by boundary");
        assert!(init_out.contains(3), "right blocked by boundary");
        assert!(!init_out.contains(0), "up cell (0,1) is free");
        assert!(!init_out.contains(2), "left cell (1,0) is free");
    }

    #[test]
    fn blocked_moves_stay() {
        let g = GridWorld::open(3).unwrap();
        assert_eq!(g.apply_move((0, 0), 1), (0, 0)); // up off the grid
        assert_eq!(g.apply_move((0, 0), 3), (0, 0)); // left off the grid
        assert_eq!(g.apply_move((0, 0), 2), (1, 0));
        assert_eq!(g.apply_move((0, 0), 4), (0, 1));
        for code in [0, 5, 6, 7] {
            assert_eq!(g.apply_move((1, 1), code), (1, 1));
        }
        let mut walled = g.clone();
        walled.walls.insert(edge((0, 0), (1, 0)));
        assert_eq!(walled.apply_move((0, 0), 2), (0, 0));
    }

    #[test]
    fn sensors_match_recomputation() {
        let g = GridWorld::maze(4, 7).unwrap();
        let plant = gen_plant(&g).unwrap();
        // Walk a fixed input pattern and recheck each sensor bit from the
        // simulated positions.
        let mut s = plant.init;
        let mut ctrl = g.ctrl_start;
        let mut other = g.plant_start;
        for step in 0..200u32 {
            let input = Valuation(step.wrapping_mul(2654435761) & 0x3f);
            let expect = sensors(&g, ctrl, other);
            assert_eq!(plant.output(s), expect, "step {step}");
            ctrl = g.apply_move(ctrl, (input.0 >> 3) & 7);
            other = g.apply_move(other, input.0 & 7);
            s = plant.step(s, input);
        }
    }

    #[test]
    fn simultaneous_swap_is_not_a_collision() {
        let g = GridWorld::open(2).unwrap();
        let plant = gen_plant(&g).unwrap();
        // Put the robots side by side: controller (1,1) moves up to (0,1),
        // other robot (0,1)... first steer the other robot from (0,0) to
        // (0,1) while the controller stays.
        let stay_env_right = Valuation(0b000_100); // e=4 (right), mv=0
        let s1 = plant.step(plant.init, stay_env_right);
        // Now controller at (1,1), other at (0,1): swap attempt — controller
        // up (code 1), other down (code 2).
        let swap = Valuation(0b001_010); // mv=1, e=2
        let s2 = plant.step(s1, swap);
        assert!(!plant.output(s2).contains(4), "passing through is allowed");
    }

    #[test]
    fn spec_types_are_safety() {
        for t in 1..=3u8 {
            let f = gen_spec(t).unwrap();
            let nnf = to_safety_nnf(&f);
            assert!(nnf.is_safety, "type {t} must be in the safety fragment");
            assert!(safety_nnf(&f).is_ok());
        }
        assert!(matches!(gen_spec(4), Err(BenchError::BadSpecType(4))));
    }

    #[test]
    fn spec_shapes() {
        assert_eq!(gen_spec(1).unwrap().to_string(), "G !col");
        let t3 = gen_spec(3).unwrap().to_string();
        assert!(t3.contains("X !u_obs"));
        assert!(t3.contains("X X X !u_obs"));
        // Type 2 references the sensors and the move decodings.
        let t2 = gen_spec(2).unwrap().to_string();
        for p in ["col", "u_obs", "r_obs", "mv0", "mv2", "W"] {
            assert!(t2.contains(p), "type 2 should mention {p}");
        }
    }

    #[test]
    fn maze_is_deterministic_and_walled() {
        let a = GridWorld::maze(5, 42).unwrap();
        let b = GridWorld::maze(5, 42).unwrap();
        assert_eq!(a.walls, b.walls);
        let c = GridWorld::maze(5, 43).unwrap();
        assert_ne!(a.walls, c.walls);
        // A perfect maze on 25 cells has 24 carved edges out of 40.
        assert_eq!(a.walls.len(), 2 * 5 * 4 - 24);
    }

    #[test]
    fn grid_too_small_rejected() {
        assert!(matches!(GridWorld::open(1), Err(BenchError::GridTooSmall(1))));
    }
}
