//! Physically executed search: every expansion costs travel.
//!
//! The planner is an incremental best-first search, but the agent must
//! stand on a node to expand it. Reaching a non-adjacent expansion target
//! means walking the search tree through parent pointers (up to the
//! deepest common ancestor, down to the target), revisiting every node on
//! the way. Under partial sensing the planner sees only what has been
//! observed; unobserved cells are assumed free, and a plan branch is
//! dropped when its node is discovered to be blocked.
//!
//! The [`Trace`] records the physical execution: the ordered moves, the
//! per-node visit counts, and the set of nodes that ever entered the
//! planner's attention with the `f` value they carried when first seen.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dea::{select_branch, PacParams, PerimeterBranch, PerimeterDecision};
use crate::grid::{Cell, GridMap, Heuristic, TerrainView};
use crate::offline::{AlphaParams, AlphaSearch};
use crate::rng::SplitMix64;

/// Default cap on physical moves before a run is declared runaway.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// What the agent can sense of the true map.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SensingMode {
    /// The planner sees the true map.
    Omniscient,
    /// Cells within Chebyshev distance `radius` of the agent are observed
    /// on every entry; everything else is assumed free until observed.
    Radius { radius: u32 },
}

/// The physical execution record of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    /// Cell initially occupied by the agent.
    pub start: Cell,
    /// Cells physically entered, in order. Excludes the initial occupancy
    /// of the start cell.
    pub moves: Vec<Cell>,
    /// Visit counts: occurrences in `moves`, plus one for the start cell.
    pub visit_count: BTreeMap<Cell, u64>,
    /// Cells that entered the planner's attention, in first-seen order.
    pub considered: Vec<Cell>,
    /// `f = g + h` each considered cell carried when first considered.
    pub per_cell_f: BTreeMap<Cell, u64>,
    pub reached_goal: bool,
    pub seed: u64,
}

impl Trace {
    pub fn new(start: Cell, seed: u64) -> Self {
        let mut visit_count = BTreeMap::new();
        visit_count.insert(start, 1);
        Self {
            start,
            moves: Vec::new(),
            visit_count,
            considered: Vec::new(),
            per_cell_f: BTreeMap::new(),
            reached_goal: false,
            seed,
        }
    }

    fn record_move(&mut self, cell: Cell) {
        self.moves.push(cell);
        *self.visit_count.entry(cell).or_insert(0) += 1;
    }

    fn record_consider(&mut self, cell: Cell, f: u64) {
        if let std::collections::btree_map::Entry::Vacant(e) = self.per_cell_f.entry(cell) {
            e.insert(f);
            self.considered.push(cell);
        }
    }

    /// Accounting-only constructor for synthetic traces used in dominance
    /// analysis. Such traces carry no move list and do not satisfy
    /// [`Trace::validate`].
    pub fn synthetic(seed: u64) -> Self {
        Self {
            start: Cell::new(0, 0),
            moves: Vec::new(),
            visit_count: BTreeMap::new(),
            considered: Vec::new(),
            per_cell_f: BTreeMap::new(),
            reached_goal: false,
            seed,
        }
    }

    /// Declares a considered node with its frozen `f` and its visit count
    /// (`sigma == 0` means considered but never visited). Synthetic-trace
    /// counterpart of the engine's internal bookkeeping.
    pub fn declare(&mut self, cell: Cell, f: u64, sigma: u64) {
        self.record_consider(cell, f);
        if sigma > 0 {
            self.visit_count.insert(cell, sigma);
        }
    }

    /// Number of nodes considered.
    pub fn mu(&self) -> u64 {
        self.considered.len() as u64
    }

    /// Physical distance traveled, in unit steps.
    pub fn traveled_cost(&self) -> u64 {
        self.moves.len() as u64
    }

    /// Sum of visit counts over all visited cells.
    pub fn sum_sigma(&self) -> u64 {
        self.visit_count.values().sum()
    }

    /// The literal accumulated cost: the sum over considered cells of
    /// `sigma(n) * f(n)`, where `sigma` is zero for cells considered but
    /// never visited and `f` is the value frozen at first consideration.
    ///
    /// This mixes heuristic content into a distance-flavored sum; see
    /// [`Trace::traveled_cost`] for the plain step count. Both are
    /// reported, neither is silently substituted for the other.
    pub fn literal_cost(&self) -> u64 {
        self.considered
            .iter()
            .map(|cell| {
                let sigma = self.visit_count.get(cell).copied().unwrap_or(0);
                sigma * self.per_cell_f[cell]
            })
            .sum()
    }

    /// Checks the structural invariants of a physically executed trace
    /// against the true map.
    pub fn validate(&self, map: &GridMap) -> Result<(), TraceError> {
        let mut prev = self.start;
        for (i, &cell) in self.moves.iter().enumerate() {
            if !map.in_bounds(cell) || map.is_blocked(cell) {
                return Err(TraceError::BlockedMove { index: i, cell });
            }
            if !prev.adjacent(cell) {
                return Err(TraceError::NonAdjacentMove {
                    index: i,
                    from: prev,
                    to: cell,
                });
            }
            prev = cell;
        }

        let mut recomputed: BTreeMap<Cell, u64> = BTreeMap::new();
        recomputed.insert(self.start, 1);
        for &cell in &self.moves {
            *recomputed.entry(cell).or_insert(0) += 1;
        }
        if recomputed != self.visit_count {
            return Err(TraceError::VisitCountMismatch);
        }

        if self.considered.len() != self.per_cell_f.len() {
            return Err(TraceError::ConsideredSetCorrupt);
        }
        for cell in &self.considered {
            if !self.per_cell_f.contains_key(cell) {
                return Err(TraceError::ConsideredSetCorrupt);
            }
        }

        if self.reached_goal && self.moves.last() != Some(&map.goal()) {
            return Err(TraceError::GoalClaimMismatch);
        }
        Ok(())
    }

    /// Serializes the trace in its exchange format.
    pub fn to_json(&self) -> serde_json::Value {
        let sigma: serde_json::Map<String, serde_json::Value> = self
            .visit_count
            .iter()
            .map(|(c, n)| (format!("{},{}", c.x, c.y), serde_json::json!(n)))
            .collect();
        serde_json::json!({
            "moves": self.moves,
            "sigma": sigma,
            "mu": self.mu(),
            "literal_cost": self.literal_cost(),
            "traveled_cost": self.traveled_cost(),
            "reached_goal": self.reached_goal,
            "seed": self.seed,
        })
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum TraceError {
    #[error("move {index} enters blocked or out-of-bounds cell {cell}")]
    BlockedMove { index: usize, cell: Cell },
    #[error("move {index} from {from} to {to} is not grid-adjacent")]
    NonAdjacentMove { index: usize, from: Cell, to: Cell },
    #[error("stored visit counts disagree with the move list")]
    VisitCountMismatch,
    #[error("considered list and per-cell f map are inconsistent")]
    ConsideredSetCorrupt,
    #[error("trace claims the goal was reached but does not end on it")]
    GoalClaimMismatch,
}

/// Outcome of comparing two traces under the pointwise accounting order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dominance {
    /// The first trace considers a subset of nodes and visits each at most
    /// as often; its literal cost is then necessarily no larger.
    Dominates,
    /// Consideration sets are nested but some visit count is larger on the
    /// first trace.
    NotDominated,
    /// Consideration sets are not nested (or `f` values disagree on shared
    /// nodes), so the sums cannot be compared pointwise.
    Incomparable,
}

/// Checks whether `bounded` pointwise-dominates `unbounded`: every node it
/// considered was also considered by `unbounded` with the same `f`, and
/// each is visited at most as often. When it does, the literal costs obey
/// `bounded <= unbounded`, which this function asserts.
pub fn dominance_check(bounded: &Trace, unbounded: &Trace) -> Dominance {
    for (cell, f) in &bounded.per_cell_f {
        match unbounded.per_cell_f.get(cell) {
            Some(uf) if uf == f => {}
            _ => return Dominance::Incomparable,
        }
    }
    for cell in &bounded.considered {
        let sb = bounded.visit_count.get(cell).copied().unwrap_or(0);
        let su = unbounded.visit_count.get(cell).copied().unwrap_or(0);
        if sb > su {
            return Dominance::NotDominated;
        }
    }
    assert!(
        bounded.literal_cost() <= unbounded.literal_cost(),
        "pointwise-dominated trace must not cost more"
    );
    Dominance::Dominates
}

/// The agent's accumulated knowledge of the terrain.
#[derive(Clone)]
struct KnownMap {
    width: u32,
    height: u32,
    knowledge: Vec<Knowledge>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Knowledge {
    Unknown,
    Free,
    Blocked,
}

impl KnownMap {
    fn unknown(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            knowledge: vec![Knowledge::Unknown; width as usize * height as usize],
        }
    }

    fn fully_known(map: &GridMap) -> Self {
        let mut known = Self::unknown(map.width(), map.height());
        for y in 0..map.height() {
            for x in 0..map.width() {
                let cell = Cell::new(x, y);
                known.set(cell, map.is_blocked(cell));
            }
        }
        known
    }

    fn set(&mut self, cell: Cell, blocked: bool) {
        self.knowledge[(cell.y * self.width + cell.x) as usize] = if blocked {
            Knowledge::Blocked
        } else {
            Knowledge::Free
        };
    }

    /// Marks every cell within Chebyshev distance `radius` of `center`
    /// with its true state.
    fn observe(&mut self, map: &GridMap, center: Cell, radius: u32) {
        let r = i64::from(radius);
        for dy in -r..=r {
            for dx in -r..=r {
                let x = i64::from(center.x) + dx;
                let y = i64::from(center.y) + dy;
                if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
                    continue;
                }
                let cell = Cell::new(x as u32, y as u32);
                self.set(cell, map.is_blocked(cell));
            }
        }
    }
}

impl TerrainView for KnownMap {
    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    // Free-space assumption: unknown cells are planned through.
    fn passable(&self, cell: Cell) -> bool {
        if cell.x >= self.width || cell.y >= self.height {
            return false;
        }
        self.knowledge[(cell.y * self.width + cell.x) as usize] != Knowledge::Blocked
    }
}

/// The planning policy executed by the engine.
#[derive(Clone, Debug)]
pub enum PlannerPolicy {
    /// Plain best-first order (`f = g + h`), replanning around observed
    /// obstacles.
    AstarReplan,
    /// Perimeter-weighted order with a fixed perimeter.
    AlphaStar(AlphaParams),
    /// Perimeter-weighted order with the stochastically gated perimeter
    /// switch.
    DeaStar(PacParams),
}

impl PlannerPolicy {
    fn initial_params(&self) -> AlphaParams {
        match self {
            PlannerPolicy::AstarReplan => {
                AlphaParams::unweighted(crate::offline::PerimeterKind::GNonAggressive)
            }
            PlannerPolicy::AlphaStar(p) => *p,
            // The gated policy starts out committed to its path: the
            // aggressive perimeter of the configured axis.
            PlannerPolicy::DeaStar(p) => {
                let axis = p.base.perimeter.axis();
                let mut base = p.base;
                base.perimeter = axis.aggressive();
                base
            }
        }
    }
}

/// A completed run: the physical trace and, for the gated policy, the log
/// of perimeter decisions.
#[derive(Clone, Debug)]
pub struct RealtimeRun {
    pub trace: Trace,
    pub decisions: Vec<PerimeterDecision>,
}

#[derive(Error, Debug)]
pub enum EngineError {
    /// The move budget was exhausted; the partial trace is attached for
    /// diagnosis.
    #[error("step budget of {budget} moves exceeded")]
    Runaway { budget: u64, trace: Box<Trace> },
    #[error("sensing radius must be at least 1, got {0}")]
    BadRadius(u32),
}

/// Runs a policy under the physical execution contract with the default
/// move budget.
pub fn execute_realtime(
    map: &GridMap,
    heuristic: Heuristic,
    policy: &PlannerPolicy,
    sensing: SensingMode,
    seed: u64,
) -> Result<RealtimeRun, EngineError> {
    execute_realtime_with_budget(map, heuristic, policy, sensing, seed, DEFAULT_STEP_BUDGET)
}

/// As [`execute_realtime`] with an explicit move budget.
pub fn execute_realtime_with_budget(
    map: &GridMap,
    heuristic: Heuristic,
    policy: &PlannerPolicy,
    sensing: SensingMode,
    seed: u64,
    budget: u64,
) -> Result<RealtimeRun, EngineError> {
    let radius = match sensing {
        SensingMode::Omniscient => None,
        SensingMode::Radius { radius } => {
            if radius < 1 {
                return Err(EngineError::BadRadius(radius));
            }
            Some(radius)
        }
    };
    let mut known = match radius {
        None => KnownMap::fully_known(map),
        Some(r) => {
            let mut k = KnownMap::unknown(map.width(), map.height());
            k.observe(map, map.start(), r);
            k
        }
    };

    let (mut search, first_considered) = AlphaSearch::new(
        map.width(),
        map.height(),
        heuristic,
        map.start(),
        map.goal(),
        policy.initial_params(),
    );
    let mut trace = Trace::new(map.start(), seed);
    trace.record_consider(first_considered.0, first_considered.1);

    let mut rng = SplitMix64::new(seed);
    let mut decisions: Vec<PerimeterDecision> = Vec::new();
    let mut agent = map.start();
    let goal = map.goal();

    loop {
        // Select the next expansion target.
        let target = match policy {
            PlannerPolicy::AstarReplan | PlannerPolicy::AlphaStar(_) => search.pop_best(),
            PlannerPolicy::DeaStar(pac) => match search.peek_best() {
                None => None,
                Some((_, cand_f)) => {
                    let open_min_f = search.state().open_min_f().expect("open list is nonempty");
                    if crate::dea::promissory_terminated(cand_f, open_min_f) {
                        let (branch, rng_draw) = select_branch(pac, &mut rng);
                        decisions.push(PerimeterDecision {
                            event_index: decisions.len() as u64,
                            f_next: cand_f,
                            open_min_f,
                            rng_draw,
                            branch,
                        });
                        let axis = pac.base.perimeter.axis();
                        match branch {
                            PerimeterBranch::Aggressive => {
                                search.set_perimeter(axis.aggressive());
                                search.pop_best()
                            }
                            PerimeterBranch::NonAggressive => {
                                search.set_perimeter(axis.non_aggressive());
                                search.pop_min_plain_f()
                            }
                            PerimeterBranch::AdmissibleContinue => {
                                unreachable!("gate never selects the continue branch")
                            }
                        }
                    } else {
                        search.pop_best()
                    }
                }
            },
        };
        let Some(target) = target else {
            // Open list exhausted: unreachable given everything observed.
            break;
        };
        if !known.passable(target) {
            // The branch was invalidated by an observation made since
            // insertion; drop it and replan from the queue.
            search.discard(target);
            continue;
        }

        // Walk to the target. All route cells except the target itself
        // have been physically visited before and are known free.
        if target != agent {
            let route = if agent.adjacent(target) {
                vec![target]
            } else {
                tree_route(&search, agent, target)
            };
            let mut aborted = false;
            for step in route {
                if step == target && !known.passable(step) {
                    aborted = true;
                    break;
                }
                if trace.traveled_cost() >= budget {
                    return Err(EngineError::Runaway {
                        budget,
                        trace: Box::new(trace),
                    });
                }
                trace.record_move(step);
                agent = step;
                if let Some(r) = radius {
                    known.observe(map, agent, r);
                }
            }
            if aborted {
                search.discard(target);
                continue;
            }
        }

        search.close(target);
        if target == goal {
            trace.reached_goal = true;
            break;
        }
        for (cell, f) in search.expand_successors(target, &known) {
            trace.record_consider(cell, f);
        }
    }

    debug_assert!(trace.validate(map).is_ok());
    Ok(RealtimeRun { trace, decisions })
}

/// The unique route between two tree nodes: up the parent chain from
/// `from` to the deepest common ancestor, then down to `target`. The
/// returned route excludes `from` and ends with `target`.
fn tree_route(search: &AlphaSearch, from: Cell, target: Cell) -> Vec<Cell> {
    let parent_of = |cell: Cell| search.state().record(cell).and_then(|r| r.parent);

    let mut from_chain = vec![from];
    let mut cur = from;
    while let Some(p) = parent_of(cur) {
        from_chain.push(p);
        cur = p;
    }
    let chain_pos: HashMap<Cell, usize> =
        from_chain.iter().enumerate().map(|(i, c)| (*c, i)).collect();

    let mut descent = Vec::new();
    let mut cur = parent_of(target).expect("expansion target has a parent");
    while !chain_pos.contains_key(&cur) {
        descent.push(cur);
        cur = parent_of(cur).expect("parent chains meet at the root");
    }
    let ancestor_idx = chain_pos[&cur];

    let mut route: Vec<Cell> = from_chain[1..=ancestor_idx].to_vec();
    route.extend(descent.iter().rev().copied());
    route.push(target);
    route
}
