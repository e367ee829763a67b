//! Stochastically gated perimeter switching.
//!
//! While the next node of the committed path is still the globally most
//! promising node (its `f` equals the open-list minimum), the search just
//! continues. When that stops being true the path has terminated, and a
//! seeded coin decides what happens: with probability `1 - delta` the
//! search stays aggressive and keeps extending the path anyway; with
//! probability `delta` it switches to the non-aggressive perimeter and
//! backtracks to the open-list minimum.
//!
//! So `delta` is the per-termination probability of backtracking. Neither
//! 0 nor 1 is a legal `delta`; the fixed-perimeter behaviors those values
//! would produce are available directly through a fixed-perimeter search.

use serde::{Deserialize, Serialize};

use crate::grid::{GridMap, Heuristic};
use crate::offline::{epsilon_bound, AlphaParams, ParamError, Weight};
use crate::realtime::{execute_realtime, EngineError, PlannerPolicy, RealtimeRun, SensingMode, Trace};
use crate::rng::SplitMix64;

/// Tolerance parameters: `epsilon` bounds the acceptable cost excess over
/// the optimum, `delta` the probability of exceeding it. The weight pair
/// in `base` drives the underlying perimeter-weighted search; the
/// perimeter's axis (cost or heuristic based) selects which
/// aggressive/non-aggressive pair the gate switches between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PacParams {
    pub epsilon: Weight,
    pub delta: f64,
    pub base: AlphaParams,
}

impl PacParams {
    pub fn new(epsilon: Weight, delta: f64, base: AlphaParams) -> Result<Self, ParamError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(ParamError::DeltaOutOfRange(delta));
        }
        if epsilon < Weight::from_integer(0) {
            return Err(ParamError::NegativeEpsilon(epsilon));
        }
        Ok(Self {
            epsilon,
            delta,
            base,
        })
    }

    /// True when `epsilon` is below `(1 + penalty) / (1 + favored) - 1`,
    /// the smallest excess the weight pair can guarantee even offline.
    /// Worth a warning wherever configurations are loaded.
    pub fn epsilon_below_guarantee_floor(&self) -> bool {
        self.epsilon < epsilon_bound(&self.base)
    }
}

/// Which way the gate resolved a path-termination event.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerimeterBranch {
    /// Keep extending the committed path under the aggressive perimeter.
    Aggressive,
    /// Switch to the non-aggressive perimeter and backtrack to the
    /// open-list minimum.
    NonAggressive,
    /// The termination test was false; no gate draw happened.
    AdmissibleContinue,
}

/// One logged gate event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerimeterDecision {
    pub event_index: u64,
    /// Plain `f` of the node the current ordering would expand next.
    pub f_next: u64,
    /// Minimum plain `f` over the open list at decision time.
    pub open_min_f: u64,
    /// The uniform draw that resolved the gate.
    pub rng_draw: f64,
    pub branch: PerimeterBranch,
}

/// True when the committed path has terminated: the node the ordering
/// would expand next is strictly worse (by plain `f`) than the best open
/// node. Equality keeps the path alive.
pub fn promissory_terminated(next_f: u64, open_min_f: u64) -> bool {
    next_f > open_min_f
}

/// Resolves the gate for a given uniform draw: aggressive iff
/// `draw < 1 - delta`.
pub fn branch_for_draw(draw: f64, delta: f64) -> PerimeterBranch {
    if draw < 1.0 - delta {
        PerimeterBranch::Aggressive
    } else {
        PerimeterBranch::NonAggressive
    }
}

/// Draws the gate from the run's generator. Returns the branch and the
/// draw itself for the decision log. Never returns
/// [`PerimeterBranch::AdmissibleContinue`]; callers only invoke the gate
/// once the termination test is true.
pub fn select_branch(params: &PacParams, rng: &mut SplitMix64) -> (PerimeterBranch, f64) {
    let draw = rng.next_f64();
    (branch_for_draw(draw, params.delta), draw)
}

/// Runs the gated policy under the physical execution contract. The
/// decision log in the result records every termination event.
pub fn dea_star(
    map: &GridMap,
    heuristic: Heuristic,
    params: &PacParams,
    sensing: SensingMode,
    seed: u64,
) -> Result<RealtimeRun, EngineError> {
    execute_realtime(
        map,
        heuristic,
        &PlannerPolicy::DeaStar(*params),
        sensing,
        seed,
    )
}

/// The per-trial exceedance event: the run failed to stay within
/// `(1 + epsilon)` of the optimal cost. Runs that never reached the goal
/// count as exceedances; the caller reports the reached flag separately.
pub fn exceedance_indicator(trace: &Trace, c_star: u64, epsilon: Weight) -> bool {
    if !trace.reached_goal {
        return true;
    }
    let threshold = (Weight::from_integer(1) + epsilon) * Weight::from_integer(c_star as i64);
    Weight::from_integer(trace.traveled_cost() as i64) > threshold
}

/// Serializes a decision log as JSON lines.
pub fn decision_log_jsonl(decisions: &[PerimeterDecision]) -> String {
    let mut out = String::new();
    for d in decisions {
        let branch = match d.branch {
            PerimeterBranch::Aggressive => "aggressive",
            PerimeterBranch::NonAggressive => "non_aggressive",
            PerimeterBranch::AdmissibleContinue => "admissible_continue",
        };
        let line = serde_json::json!({
            "event_index": d.event_index,
            "f_next": d.f_next,
            "open_min_f": d.open_min_f,
            "rng_draw": d.rng_draw,
            "branch": branch,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
