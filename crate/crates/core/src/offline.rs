//! Best-first search with perimeter-weighted priorities.
//!
//! Nodes are ordered by `f_w = (1 + w) * f` where `f = g + h` and the
//! weight `w` is either the favored value or the penalty value depending
//! on a perimeter predicate evaluated against the search history. With
//! both weights at zero this is plain A*. Priorities are exact rationals;
//! there is no floating-point comparison anywhere on the search path.
//!
//! The weight of a node is frozen when it is inserted into the open list
//! (and refreshed if the node is re-keyed with a cheaper cost); it is not
//! re-evaluated as the search history evolves.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_rational::Ratio;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{Cell, GridMap, Heuristic, TerrainView, DIRECTIONS};

/// Exact rational weight. Construct from decimal text with
/// [`parse_decimal_weight`] to avoid binary-float rounding.
pub type Weight = Ratio<i64>;

#[derive(Error, Debug, PartialEq)]
pub enum ParamError {
    #[error("favored weight must be greater than -1, got {0}")]
    FavoredTooSmall(Weight),
    #[error("favored weight {favored} must not exceed penalty weight {penalty}")]
    WeightsOutOfOrder { favored: Weight, penalty: Weight },
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    DeltaOutOfRange(f64),
    #[error("epsilon must be nonnegative, got {0}")]
    NegativeEpsilon(Weight),
}

#[derive(Error, Debug, PartialEq, Eq)]
#[error("not a decimal number: {0:?}")]
pub struct ParseWeightError(pub String);

/// Parses a plain decimal string (`"0.2"`, `"-0.5"`, `"1"`) into an exact
/// rational, so that `0.2` really means one fifth.
pub fn parse_decimal_weight(s: &str) -> Result<Weight, ParseWeightError> {
    let err = || ParseWeightError(s.to_string());
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1i64, r),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if int_part.len() + frac_part.len() > 18 {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let digits: String = format!("{int_part}{frac_part}");
    let num: i64 = if digits.is_empty() {
        return Err(err());
    } else {
        digits.parse().map_err(|_| err())?
    };
    let den = 10i64.pow(frac_part.len() as u32);
    Ok(Ratio::new(sign * num, den))
}

/// Which history aggregate the perimeter predicate compares against, and
/// along which quantity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, serde::Deserialize)]
pub enum PerimeterKind {
    /// Parent cost at least the cost of the most recently expanded node.
    #[serde(rename = "g_nonaggressive")]
    GNonAggressive,
    /// Parent heuristic at most that of the most recently expanded node.
    #[serde(rename = "h_nonaggressive")]
    HNonAggressive,
    /// Parent cost at least the maximum cost over all closed nodes.
    #[serde(rename = "g_aggressive")]
    GAggressive,
    /// Parent heuristic at most the minimum over all closed nodes.
    #[serde(rename = "h_aggressive")]
    HAggressive,
}

pub const ALL_PERIMETERS: [PerimeterKind; 4] = [
    PerimeterKind::GNonAggressive,
    PerimeterKind::HNonAggressive,
    PerimeterKind::GAggressive,
    PerimeterKind::HAggressive,
];

/// The cost-based or heuristic-based family of perimeters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerimeterAxis {
    G,
    H,
}

impl PerimeterAxis {
    pub fn aggressive(self) -> PerimeterKind {
        match self {
            PerimeterAxis::G => PerimeterKind::GAggressive,
            PerimeterAxis::H => PerimeterKind::HAggressive,
        }
    }

    pub fn non_aggressive(self) -> PerimeterKind {
        match self {
            PerimeterAxis::G => PerimeterKind::GNonAggressive,
            PerimeterAxis::H => PerimeterKind::HNonAggressive,
        }
    }
}

impl PerimeterKind {
    pub fn axis(self) -> PerimeterAxis {
        match self {
            PerimeterKind::GNonAggressive | PerimeterKind::GAggressive => PerimeterAxis::G,
            PerimeterKind::HNonAggressive | PerimeterKind::HAggressive => PerimeterAxis::H,
        }
    }

    pub fn is_aggressive(self) -> bool {
        matches!(
            self,
            PerimeterKind::GAggressive | PerimeterKind::HAggressive
        )
    }
}

/// Weight configuration: the favored weight is applied inside the
/// perimeter, the penalty weight outside. Validated so that
/// `-1 < favored <= penalty`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct AlphaParams {
    favored: Weight,
    penalty: Weight,
    pub perimeter: PerimeterKind,
}

impl AlphaParams {
    pub fn new(
        favored: Weight,
        penalty: Weight,
        perimeter: PerimeterKind,
    ) -> Result<Self, ParamError> {
        if favored <= Ratio::from_integer(-1) {
            return Err(ParamError::FavoredTooSmall(favored));
        }
        if favored > penalty {
            return Err(ParamError::WeightsOutOfOrder { favored, penalty });
        }
        Ok(Self {
            favored,
            penalty,
            perimeter,
        })
    }

    /// Both weights zero: plain A* ordering regardless of perimeter.
    pub fn unweighted(perimeter: PerimeterKind) -> Self {
        Self {
            favored: Ratio::from_integer(0),
            penalty: Ratio::from_integer(0),
            perimeter,
        }
    }

    pub fn favored_weight(&self) -> Weight {
        self.favored
    }

    pub fn penalty_weight(&self) -> Weight {
        self.penalty
    }
}

/// `(1 + penalty) / (1 + favored)`, the guaranteed suboptimality factor.
pub fn suboptimality_factor(params: &AlphaParams) -> Weight {
    (Weight::one() + params.penalty) / (Weight::one() + params.favored)
}

/// The minimal epsilon for which solutions are guaranteed within
/// `(1 + epsilon)` of optimal: `(1 + penalty) / (1 + favored) - 1`.
pub fn epsilon_bound(params: &AlphaParams) -> Weight {
    suboptimality_factor(params) - Weight::one()
}

/// History aggregates the perimeter predicates compare against.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct ClosedStats {
    /// `(g, h)` of the most recently expanded node.
    pub last_expanded: Option<(u64, u64)>,
    /// Maximum `g` over all closed nodes.
    pub max_g: Option<u64>,
    /// Minimum `h` over all closed nodes.
    pub min_h: Option<u64>,
}

impl ClosedStats {
    pub fn is_empty(&self) -> bool {
        self.last_expanded.is_none()
    }
}

/// Evaluates the perimeter predicate for a candidate whose parent has the
/// given `(g, h)`. Vacuously true when the candidate has no parent or
/// nothing has been expanded yet.
pub fn alpha_predicate(
    perimeter: PerimeterKind,
    parent: Option<(u64, u64)>,
    stats: &ClosedStats,
) -> bool {
    let Some((pg, ph)) = parent else {
        return true;
    };
    if stats.is_empty() {
        return true;
    }
    match perimeter {
        PerimeterKind::GNonAggressive => pg >= stats.last_expanded.unwrap().0,
        PerimeterKind::HNonAggressive => ph <= stats.last_expanded.unwrap().1,
        PerimeterKind::GAggressive => pg >= stats.max_g.unwrap(),
        PerimeterKind::HAggressive => ph <= stats.min_h.unwrap(),
    }
}

/// Selects the favored weight when the perimeter predicate holds, the
/// penalty weight otherwise.
pub fn weight(alpha_true: bool, params: &AlphaParams) -> Weight {
    if alpha_true {
        params.favored
    } else {
        params.penalty
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum NodeStatus {
    /// In the open list under the given insertion sequence number.
    Open { seq: u64 },
    /// Removed from the open list, not yet closed (in transit).
    Selected,
    Closed,
}

/// Bookkeeping for one node the search has touched.
#[derive(Clone, Debug)]
pub struct NodeRecord {
    pub cell: Cell,
    pub g: u64,
    pub h: u64,
    pub parent: Option<Cell>,
    /// Weight frozen at (re-)insertion time.
    pub weight: Weight,
    pub f_alpha: Weight,
    pub alpha_true: bool,
    status: NodeStatus,
}

impl NodeRecord {
    pub fn f(&self) -> u64 {
        self.g + self.h
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct OpenEntry {
    f_alpha: Weight,
    h: u64,
    seq: u64,
    cell: Cell,
}

/// One line of the expansion audit trail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionRecord {
    pub cell: Cell,
    pub g: u64,
    pub h: u64,
    pub f: u64,
    pub weight: Weight,
    pub f_alpha: Weight,
    pub alpha_true: bool,
}

/// Open and closed bookkeeping with incrementally maintained aggregates.
///
/// A cell is never simultaneously open and closed; the aggregates always
/// equal the true extrema over the closed set.
pub struct SearchState {
    width: u32,
    records: Vec<Option<NodeRecord>>,
    heap: BinaryHeap<Reverse<OpenEntry>>,
    next_seq: u64,
    open_count: usize,
    closed_count: usize,
    last_expanded: Option<Cell>,
    stats: ClosedStats,
}

impl SearchState {
    fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            records: vec![None; width as usize * height as usize],
            heap: BinaryHeap::new(),
            next_seq: 0,
            open_count: 0,
            closed_count: 0,
            last_expanded: None,
            stats: ClosedStats::default(),
        }
    }

    fn idx(&self, cell: Cell) -> usize {
        (cell.y * self.width + cell.x) as usize
    }

    pub fn record(&self, cell: Cell) -> Option<&NodeRecord> {
        self.records[self.idx(cell)].as_ref()
    }

    pub fn is_open(&self, cell: Cell) -> bool {
        matches!(
            self.record(cell),
            Some(NodeRecord {
                status: NodeStatus::Open { .. },
                ..
            })
        )
    }

    pub fn is_closed(&self, cell: Cell) -> bool {
        matches!(
            self.record(cell),
            Some(NodeRecord {
                status: NodeStatus::Closed,
                ..
            })
        )
    }

    pub fn open_len(&self) -> usize {
        self.open_count
    }

    pub fn closed_len(&self) -> usize {
        self.closed_count
    }

    /// The most recently expanded cell.
    pub fn last_expanded(&self) -> Option<Cell> {
        self.last_expanded
    }

    pub fn max_closed_g(&self) -> Option<u64> {
        self.stats.max_g
    }

    pub fn min_closed_h(&self) -> Option<u64> {
        self.stats.min_h
    }

    pub fn closed_stats(&self) -> ClosedStats {
        self.stats
    }

    /// Minimum plain `f` over the open list, by scan.
    pub fn open_min_f(&self) -> Option<u64> {
        self.open_records().map(|r| r.f()).min()
    }

    fn open_records(&self) -> impl Iterator<Item = &NodeRecord> {
        self.records.iter().flatten().filter(|r| {
            matches!(
                r.status,
                NodeStatus::Open { .. }
            )
        })
    }

    /// Minimum `f_alpha` over the open list (the next pop), by scan.
    pub fn open_min_f_alpha(&self) -> Option<Weight> {
        self.open_records().map(|r| r.f_alpha).min()
    }
}

/// Driver for the weighted best-first search. The terrain view is passed
/// per call so a caller may refine its knowledge of the world between
/// expansions.
pub struct AlphaSearch {
    state: SearchState,
    params: AlphaParams,
    heuristic: Heuristic,
    goal: Cell,
    audit: Vec<ExpansionRecord>,
}

impl AlphaSearch {
    /// Sets up the search and inserts `start` into the open list. Returns
    /// the search and the `(cell, f)` of that first consideration.
    pub fn new(
        width: u32,
        height: u32,
        heuristic: Heuristic,
        start: Cell,
        goal: Cell,
        params: AlphaParams,
    ) -> (Self, (Cell, u64)) {
        let mut search = Self {
            state: SearchState::new(width, height),
            params,
            heuristic,
            goal,
            audit: Vec::new(),
        };
        let h = heuristic.value(start, goal);
        search.insert(start, 0, h, None, true);
        (search, (start, h))
    }

    pub fn state(&self) -> &SearchState {
        &self.state
    }

    pub fn params(&self) -> &AlphaParams {
        &self.params
    }

    pub fn audit(&self) -> &[ExpansionRecord] {
        &self.audit
    }

    pub fn into_audit(self) -> Vec<ExpansionRecord> {
        self.audit
    }

    /// Switches the active perimeter for all future insertions.
    pub fn set_perimeter(&mut self, perimeter: PerimeterKind) {
        self.params.perimeter = perimeter;
    }

    fn insert(&mut self, cell: Cell, g: u64, h: u64, parent: Option<Cell>, fresh: bool) {
        let parent_gh = parent.and_then(|p| self.state.record(p)).map(|r| (r.g, r.h));
        let alpha_true = alpha_predicate(self.params.perimeter, parent_gh, &self.state.stats);
        let w = weight(alpha_true, &self.params);
        let f_alpha = (Weight::one() + w) * Weight::from_integer((g + h) as i64);
        let seq = self.state.next_seq;
        self.state.next_seq += 1;
        let idx = self.state.idx(cell);
        self.state.records[idx] = Some(NodeRecord {
            cell,
            g,
            h,
            parent,
            weight: w,
            f_alpha,
            alpha_true,
            status: NodeStatus::Open { seq },
        });
        self.state.heap.push(Reverse(OpenEntry {
            f_alpha,
            h,
            seq,
            cell,
        }));
        if fresh {
            self.state.open_count += 1;
        }
    }

    fn entry_is_current(&self, entry: &OpenEntry) -> bool {
        matches!(
            self.state.record(entry.cell),
            Some(NodeRecord {
                status: NodeStatus::Open { seq },
                ..
            }) if *seq == entry.seq
        )
    }

    fn drop_stale_top(&mut self) {
        while let Some(Reverse(top)) = self.state.heap.peek() {
            if self.entry_is_current(&top.clone()) {
                return;
            }
            self.state.heap.pop();
        }
    }

    /// The cell the search would pop next and its plain `f`, without
    /// removing it.
    pub fn peek_best(&mut self) -> Option<(Cell, u64)> {
        self.drop_stale_top();
        let Reverse(top) = self.state.heap.peek()?;
        let rec = self.state.record(top.cell).expect("current entry");
        Some((top.cell, rec.f()))
    }

    fn mark_selected(&mut self, cell: Cell) {
        let idx = self.state.idx(cell);
        let rec = self.state.records[idx].as_mut().expect("open record");
        rec.status = NodeStatus::Selected;
        self.state.open_count -= 1;
    }

    /// Removes and returns the open cell with the least `f_alpha`
    /// (tie-break: lower `h`, then first inserted).
    pub fn pop_best(&mut self) -> Option<Cell> {
        self.drop_stale_top();
        let Reverse(top) = self.state.heap.pop()?;
        self.mark_selected(top.cell);
        Some(top.cell)
    }

    /// Removes and returns the open cell with the least plain `f`
    /// (tie-break: lower `h`, then first inserted). Used when the policy
    /// decides to fall back to the globally most promising node.
    pub fn pop_min_plain_f(&mut self) -> Option<Cell> {
        let best = self
            .state
            .open_records()
            .map(|r| {
                let seq = match r.status {
                    NodeStatus::Open { seq } => seq,
                    _ => unreachable!(),
                };
                (r.f(), r.h, seq, r.cell)
            })
            .min()?;
        self.mark_selected(best.3);
        Some(best.3)
    }

    /// Forgets a selected cell entirely, e.g. when it turns out to be
    /// blocked. It may be re-inserted later through another parent if the
    /// terrain view allows it.
    pub fn discard(&mut self, cell: Cell) {
        let idx = self.state.idx(cell);
        let rec = self.state.records[idx].take().expect("record to discard");
        debug_assert_eq!(rec.status, NodeStatus::Selected);
    }

    /// Closes a selected cell: appends it to the audit trail and updates
    /// the history aggregates. Does not generate successors.
    pub fn close(&mut self, cell: Cell) {
        let idx = self.state.idx(cell);
        let rec = self.state.records[idx].as_mut().expect("selected record");
        debug_assert_eq!(rec.status, NodeStatus::Selected);
        rec.status = NodeStatus::Closed;
        let (g, h) = (rec.g, rec.h);
        self.audit.push(ExpansionRecord {
            cell,
            g,
            h,
            f: g + h,
            weight: rec.weight,
            f_alpha: rec.f_alpha,
            alpha_true: rec.alpha_true,
        });
        self.state.closed_count += 1;
        self.state.last_expanded = Some(cell);
        self.state.stats.last_expanded = Some((g, h));
        self.state.stats.max_g = Some(self.state.stats.max_g.map_or(g, |m| m.max(g)));
        self.state.stats.min_h = Some(self.state.stats.min_h.map_or(h, |m| m.min(h)));
    }

    /// Generates the successors of a closed cell under the given terrain
    /// view. Returns `(cell, f)` for each cell that entered the open list
    /// for the first time.
    pub fn expand_successors<V: TerrainView>(
        &mut self,
        cell: Cell,
        view: &V,
    ) -> Vec<(Cell, u64)> {
        let rec = self.state.record(cell).expect("closed record");
        debug_assert_eq!(rec.status, NodeStatus::Closed);
        let g = rec.g;
        let mut fresh = Vec::new();
        for (dx, dy) in DIRECTIONS {
            let nx = i64::from(cell.x) + dx;
            let ny = i64::from(cell.y) + dy;
            if nx < 0 || ny < 0 || nx >= i64::from(view.width()) || ny >= i64::from(view.height())
            {
                continue;
            }
            let next = Cell::new(nx as u32, ny as u32);
            if !view.passable(next) {
                continue;
            }
            let tentative = g + 1;
            match self.state.record(next) {
                Some(r) => match r.status {
                    NodeStatus::Closed | NodeStatus::Selected => continue,
                    NodeStatus::Open { .. } => {
                        if tentative < r.g {
                            let h = r.h;
                            self.insert(next, tentative, h, Some(cell), false);
                        }
                    }
                },
                None => {
                    let h = self.heuristic.value(next, self.goal);
                    self.insert(next, tentative, h, Some(cell), true);
                    fresh.push((next, tentative + h));
                }
            }
        }
        fresh
    }

    /// The path from the start to `cell` through the parent pointers.
    pub fn reconstruct_path(&self, cell: Cell) -> Vec<Cell> {
        let mut path = vec![cell];
        let mut cur = cell;
        while let Some(p) = self.state.record(cur).and_then(|r| r.parent) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

/// A found goal path and its cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathFound {
    pub path: Vec<Cell>,
    pub cost: u64,
}

/// Result of an offline search: the path (absent when the goal is
/// unreachable), the expansion count, and the full audit trail.
#[derive(Clone, Debug)]
pub struct AlphaStarRun {
    pub found: Option<PathFound>,
    pub expansions: usize,
    pub audit: Vec<ExpansionRecord>,
}

/// Offline weighted best-first search on a fully known map.
///
/// With both weights zero the returned cost is exactly the optimal cost.
/// An unsolvable map yields `found: None`, not an error.
pub fn alpha_star(map: &GridMap, heuristic: Heuristic, params: &AlphaParams) -> AlphaStarRun {
    let (mut search, _) = AlphaSearch::new(
        map.width(),
        map.height(),
        heuristic,
        map.start(),
        map.goal(),
        *params,
    );
    let mut found = None;
    while let Some(cell) = search.pop_best() {
        search.close(cell);
        if cell == map.goal() {
            let path = search.reconstruct_path(cell);
            let cost = search.state().record(cell).unwrap().g;
            found = Some(PathFound { path, cost });
            break;
        }
        search.expand_successors(cell, map);
    }
    let expansions = search.audit().len();
    AlphaStarRun {
        found,
        expansions,
        audit: search.into_audit(),
    }
}

/// Serializes an audit trail as JSON lines, one record per expansion.
/// Rational values are rendered exactly (`"1/5"`), not as decimals.
pub fn audit_to_jsonl(audit: &[ExpansionRecord]) -> String {
    let mut out = String::new();
    for rec in audit {
        let line = serde_json::json!({
            "cell": [rec.cell.x, rec.cell.y],
            "g": rec.g,
            "h": rec.h,
            "f": rec.f,
            "w": rec.weight.to_string(),
            "f_alpha": rec.f_alpha.to_string(),
            "alpha_true": rec.alpha_true,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
