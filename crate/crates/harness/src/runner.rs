//! Experiment execution: corpus construction, seeded trials, aggregation,
//! and deterministic emission.
//!
//! Seed discipline: the corpus map for index `i` draws its seed from
//! `derive_seed(master_seed, [1, i])`, and the trial for (map `m`,
//! algorithm `a`, trial `t`) from `derive_seed(master_seed, [2, m, a, t])`.
//! Trial results therefore do not depend on execution order, and serial
//! and parallel runs produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use deastar_core::dea::{exceedance_indicator, PerimeterBranch};
use deastar_core::gen::{generate_maze, generate_obstacle_field};
use deastar_core::grid::{parse_map, GridMap, Heuristic};
use deastar_core::offline::Weight;
use deastar_core::oracle::dijkstra_cost;
use deastar_core::realtime::{execute_realtime, EngineError, PlannerPolicy};
use deastar_core::rng::derive_seed;

use crate::config::{AlgorithmSpec, CorpusSpec, ExperimentConfig, HarnessError};
use crate::format::{div_round_half_even, format_scaled, scaled_6dp, SCALE};

/// Seed-derivation domain for corpus generation.
pub const SEED_DOMAIN_CORPUS: u64 = 1;
/// Seed-derivation domain for per-trial seeds.
pub const SEED_DOMAIN_TRIAL: u64 = 2;

/// One corpus entry with its precomputed optimal cost.
pub struct CorpusMap {
    pub map_id: String,
    pub map: GridMap,
    pub c_star: u64,
}

/// One (map, algorithm, trial) outcome. `ratio_scaled` is
/// `traveled / c_star` rounded once to six decimals and scaled by 10^6.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRow {
    pub map_id: String,
    pub algorithm_id: String,
    pub trial: u32,
    pub seed: u64,
    pub c_star: u64,
    pub traveled: u64,
    pub literal: u64,
    pub ratio_scaled: u64,
    pub exceeded_epsilon: bool,
    pub mu: u64,
    pub sum_sigma: u64,
    pub aggressive_count: u64,
    pub nonaggressive_count: u64,
    pub reached_goal: bool,
}

pub const CSV_HEADER: &str = "map_id,algorithm_id,trial,seed,c_star,traveled,literal,ratio,\
exceeded_epsilon,mu,sum_sigma,aggressive_count,nonaggressive_count,reached_goal";

impl RunRow {
    pub fn to_csv_line(&self) -> String {
        let line = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.map_id,
            self.algorithm_id,
            self.trial,
            self.seed,
            self.c_star,
            self.traveled,
            self.literal,
            format_scaled(self.ratio_scaled),
            self.exceeded_epsilon,
            self.mu,
            self.sum_sigma,
            self.aggressive_count,
            self.nonaggressive_count,
            self.reached_goal
        );
        debug_assert_eq!(line.matches(',').count(), 13);
        line
    }

    pub fn from_csv_line(line: &str) -> Result<Self, HarnessError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(HarnessError::config(format!(
                "expected 14 CSV fields, got {}: {line:?}",
                fields.len()
            )));
        }
        let parse_u64 = |s: &str, name: &str| {
            s.parse::<u64>()
                .map_err(|_| HarnessError::config(format!("bad {name} value {s:?}")))
        };
        let parse_bool = |s: &str, name: &str| match s {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(HarnessError::config(format!("bad {name} value {s:?}"))),
        };
        let ratio_scaled = {
            let (int_part, frac_part) = fields[7]
                .split_once('.')
                .ok_or_else(|| HarnessError::config(format!("bad ratio {:?}", fields[7])))?;
            if frac_part.len() != 6 {
                return Err(HarnessError::config(format!("bad ratio {:?}", fields[7])));
            }
            parse_u64(int_part, "ratio")? * SCALE as u64 + parse_u64(frac_part, "ratio")?
        };
        Ok(RunRow {
            map_id: fields[0].to_string(),
            algorithm_id: fields[1].to_string(),
            trial: fields[2]
                .parse()
                .map_err(|_| HarnessError::config("bad trial value"))?,
            seed: parse_u64(fields[3], "seed")?,
            c_star: parse_u64(fields[4], "c_star")?,
            traveled: parse_u64(fields[5], "traveled")?,
            literal: parse_u64(fields[6], "literal")?,
            ratio_scaled,
            exceeded_epsilon: parse_bool(fields[8], "exceeded_epsilon")?,
            mu: parse_u64(fields[9], "mu")?,
            sum_sigma: parse_u64(fields[10], "sum_sigma")?,
            aggressive_count: parse_u64(fields[11], "aggressive_count")?,
            nonaggressive_count: parse_u64(fields[12], "nonaggressive_count")?,
            reached_goal: parse_bool(fields[13], "reached_goal")?,
        })
    }
}

/// Per-algorithm aggregates, all 10^6-scaled decimals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgoAggregate {
    pub algorithm_id: String,
    pub rows: u64,
    pub mean_ratio_scaled: u64,
    pub median_ratio_scaled: u64,
    pub exceedance_rate_scaled: u64,
    pub mean_mu_scaled: u64,
    pub mean_sum_sigma_scaled: u64,
}

/// All rows of an experiment plus per-algorithm aggregates. Rows are
/// ordered by (map_id, algorithm_id, trial) ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultSet {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<AlgoAggregate>,
}

impl ResultSet {
    /// Builds a result set from rows, sorting them into the canonical
    /// order and recomputing every aggregate.
    pub fn from_rows(mut rows: Vec<RunRow>) -> Self {
        rows.sort_by(|a, b| {
            (&a.map_id, &a.algorithm_id, a.trial).cmp(&(&b.map_id, &b.algorithm_id, b.trial))
        });
        let aggregates = compute_aggregates(&rows);
        ResultSet { rows, aggregates }
    }

    pub fn algorithm_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .aggregates
            .iter()
            .map(|a| a.algorithm_id.clone())
            .collect();
        ids.sort();
        ids
    }
}

/// Aggregates in ascending algorithm_id order. The mean and median are
/// taken over the per-row six-decimal ratios; the exceedance rate is the
/// exceeded-row fraction.
pub fn compute_aggregates(rows: &[RunRow]) -> Vec<AlgoAggregate> {
    let mut by_algo: BTreeMap<&str, Vec<&RunRow>> = BTreeMap::new();
    for row in rows {
        by_algo.entry(&row.algorithm_id).or_default().push(row);
    }
    by_algo
        .into_iter()
        .map(|(id, rows)| {
            let n = rows.len() as u128;
            let mut ratios: Vec<u64> = rows.iter().map(|r| r.ratio_scaled).collect();
            ratios.sort_unstable();
            let median = if ratios.len() % 2 == 1 {
                ratios[ratios.len() / 2]
            } else {
                let a = u128::from(ratios[ratios.len() / 2 - 1]);
                let b = u128::from(ratios[ratios.len() / 2]);
                div_round_half_even(a + b, 2) as u64
            };
            let sum_ratio: u128 = rows.iter().map(|r| u128::from(r.ratio_scaled)).sum();
            let exceeded = rows.iter().filter(|r| r.exceeded_epsilon).count() as u128;
            let sum_mu: u128 = rows.iter().map(|r| u128::from(r.mu)).sum();
            let sum_sigma: u128 = rows.iter().map(|r| u128::from(r.sum_sigma)).sum();
            AlgoAggregate {
                algorithm_id: id.to_string(),
                rows: n as u64,
                mean_ratio_scaled: div_round_half_even(sum_ratio, n) as u64,
                median_ratio_scaled: median,
                exceedance_rate_scaled: scaled_6dp(exceeded, n),
                mean_mu_scaled: scaled_6dp(sum_mu, n),
                mean_sum_sigma_scaled: scaled_6dp(sum_sigma, n),
            }
        })
        .collect()
}

/// Fraction of an algorithm's rows flagged as exceedances. Unknown
/// algorithm ids are a usage error.
pub fn exceedance_rate(results: &ResultSet, algorithm_id: &str) -> Result<f64, HarnessError> {
    let rows: Vec<&RunRow> = results
        .rows
        .iter()
        .filter(|r| r.algorithm_id == algorithm_id)
        .collect();
    if rows.is_empty() {
        return Err(HarnessError::config(format!(
            "unknown algorithm id {algorithm_id:?}"
        )));
    }
    let exceeded = rows.iter().filter(|r| r.exceeded_epsilon).count();
    Ok(exceeded as f64 / rows.len() as f64)
}

/// Builds the corpus: generated worlds or loaded files, each checked
/// solvable, with the optimal cost computed once.
pub fn build_corpus(config: &ExperimentConfig) -> Result<Vec<CorpusMap>, HarnessError> {
    let mut corpus = Vec::new();
    match &config.corpus {
        CorpusSpec::Field {
            width,
            height,
            density,
            count,
        } => {
            for i in 0..*count {
                let seed = derive_seed(config.master_seed, &[SEED_DOMAIN_CORPUS, u64::from(i)]);
                let gen = generate_obstacle_field(*width, *height, *density, seed)
                    .map_err(HarnessError::config)?;
                corpus.push(make_entry(format!("map{i:03}"), gen.map)?);
            }
        }
        CorpusSpec::Maze {
            width,
            height,
            count,
        } => {
            for i in 0..*count {
                let seed = derive_seed(config.master_seed, &[SEED_DOMAIN_CORPUS, u64::from(i)]);
                let map = generate_maze(*width, *height, seed).map_err(HarnessError::config)?;
                corpus.push(make_entry(format!("map{i:03}"), map)?);
            }
        }
        CorpusSpec::Files { files } => {
            for path in files {
                let text = fs::read_to_string(path).map_err(|e| {
                    HarnessError::config(format!("cannot read {}: {e}", path.display()))
                })?;
                let map = parse_map(&text).map_err(|e| {
                    HarnessError::config(format!("{}: {e}", path.display()))
                })?;
                let map_id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                if map_id.contains([',', '"', '\n']) {
                    return Err(HarnessError::config(format!(
                        "map id {map_id:?} contains characters not allowed in CSV"
                    )));
                }
                corpus.push(make_entry(map_id, map)?);
            }
        }
    }
    Ok(corpus)
}

fn make_entry(map_id: String, map: GridMap) -> Result<CorpusMap, HarnessError> {
    let c_star = dijkstra_cost(&map, map.start(), map.goal())
        .map_err(HarnessError::config)?
        .cost()
        .ok_or_else(|| {
            HarnessError::config(format!("map {map_id} is unsolvable; cost ratios undefined"))
        })?;
    Ok(CorpusMap { map_id, map, c_star })
}

/// Resolved algorithm: id, policy, and the tolerance for the exceedance
/// flag.
pub struct ResolvedAlgorithm {
    pub id: String,
    pub policy: PlannerPolicy,
    pub epsilon: Weight,
}

/// Resolves algorithm specs, disambiguating duplicate ids with a `#n`
/// suffix so repeated specs stay distinguishable in reports.
pub fn resolve_algorithms(
    specs: &[AlgorithmSpec],
) -> Result<Vec<ResolvedAlgorithm>, HarnessError> {
    let mut seen: BTreeMap<String, u32> = BTreeMap::new();
    let mut resolved = Vec::new();
    for spec in specs {
        let base_id = spec.id();
        let n = seen.entry(base_id.clone()).or_insert(0);
        *n += 1;
        let id = if *n == 1 {
            base_id
        } else {
            format!("{base_id}#{n}")
        };
        let policy = spec.to_policy()?;
        if let PlannerPolicy::DeaStar(pac) = &policy {
            if pac.epsilon_below_guarantee_floor() {
                eprintln!(
                    "warning: {id}: epsilon {} is below the guarantee floor {}",
                    pac.epsilon,
                    deastar_core::offline::epsilon_bound(&pac.base)
                );
            }
        }
        resolved.push(ResolvedAlgorithm {
            id,
            policy,
            epsilon: spec.exceedance_epsilon()?,
        });
    }
    Ok(resolved)
}

fn run_one_trial(
    config: &ExperimentConfig,
    corpus: &[CorpusMap],
    algorithms: &[ResolvedAlgorithm],
    map_idx: usize,
    algo_idx: usize,
    trial: u32,
) -> RunRow {
    let entry = &corpus[map_idx];
    let algo = &algorithms[algo_idx];
    let seed = derive_seed(
        config.master_seed,
        &[
            SEED_DOMAIN_TRIAL,
            map_idx as u64,
            algo_idx as u64,
            u64::from(trial),
        ],
    );
    let outcome = execute_realtime(
        &entry.map,
        Heuristic::Manhattan,
        &algo.policy,
        config.sensing,
        seed,
    );
    let (trace, decisions) = match outcome {
        Ok(run) => (run.trace, run.decisions),
        // A runaway trial is a recorded failure, not an abort.
        Err(EngineError::Runaway { trace, .. }) => (*trace, Vec::new()),
        Err(EngineError::BadRadius(_)) => unreachable!("radius validated at config load"),
    };
    let aggressive_count = decisions
        .iter()
        .filter(|d| d.branch == PerimeterBranch::Aggressive)
        .count() as u64;
    let nonaggressive_count = decisions.len() as u64 - aggressive_count;
    RunRow {
        map_id: entry.map_id.clone(),
        algorithm_id: algo.id.clone(),
        trial,
        seed,
        c_star: entry.c_star,
        traveled: trace.traveled_cost(),
        literal: trace.literal_cost(),
        ratio_scaled: scaled_6dp(u128::from(trace.traveled_cost()), u128::from(entry.c_star)),
        exceeded_epsilon: exceedance_indicator(&trace, entry.c_star, algo.epsilon),
        mu: trace.mu(),
        sum_sigma: trace.sum_sigma(),
        aggressive_count,
        nonaggressive_count,
        reached_goal: trace.reached_goal,
    }
}

/// Runs the full experiment grid. With `parallel` the trials run on a
/// rayon pool; output is identical either way.
pub fn run_experiment(
    config: &ExperimentConfig,
    parallel: bool,
) -> Result<ResultSet, HarnessError> {
    config.validate()?;
    let corpus = build_corpus(config)?;
    let algorithms = resolve_algorithms(&config.algorithms)?;

    let n_trials = config.trials_per_map as usize;
    let total = corpus.len() * algorithms.len() * n_trials;
    let index = |k: usize| {
        let map_idx = k / (algorithms.len() * n_trials);
        let rest = k % (algorithms.len() * n_trials);
        (map_idx, rest / n_trials, (rest % n_trials) as u32)
    };

    let rows: Vec<RunRow> = if parallel {
        (0..total)
            .into_par_iter()
            .map(|k| {
                let (m, a, t) = index(k);
                run_one_trial(config, &corpus, &algorithms, m, a, t)
            })
            .collect()
    } else {
        (0..total)
            .map(|k| {
                let (m, a, t) = index(k);
                run_one_trial(config, &corpus, &algorithms, m, a, t)
            })
            .collect()
    };

    Ok(ResultSet::from_rows(rows))
}

/// Renders the result rows and aggregates as CSV text (LF endings,
/// trailing newline, frozen column order).
pub fn results_to_csv(results: &ResultSet) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &results.rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Renders the whole result set (with the config it came from) as
/// deterministic pretty JSON. Scaled decimals are emitted as fixed
/// six-place strings.
pub fn results_to_json(config: &ExperimentConfig, results: &ResultSet) -> String {
    let rows: Vec<serde_json::Value> = results
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "map_id": r.map_id,
                "algorithm_id": r.algorithm_id,
                "trial": r.trial,
                "seed": r.seed,
                "c_star": r.c_star,
                "traveled": r.traveled,
                "literal": r.literal,
                "ratio": format_scaled(r.ratio_scaled),
                "exceeded_epsilon": r.exceeded_epsilon,
                "mu": r.mu,
                "sum_sigma": r.sum_sigma,
                "aggressive_count": r.aggressive_count,
                "nonaggressive_count": r.nonaggressive_count,
                "reached_goal": r.reached_goal,
            })
        })
        .collect();
    let aggregates: Vec<serde_json::Value> = results
        .aggregates
        .iter()
        .map(|a| {
            serde_json::json!({
                "algorithm_id": a.algorithm_id,
                "rows": a.rows,
                "mean_ratio": format_scaled(a.mean_ratio_scaled),
                "median_ratio": format_scaled(a.median_ratio_scaled),
                "exceedance_rate": format_scaled(a.exceedance_rate_scaled),
                "mean_mu": format_scaled(a.mean_mu_scaled),
                "mean_sum_sigma": format_scaled(a.mean_sum_sigma_scaled),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "config": config,
        "rows": rows,
        "aggregates": aggregates,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("valid JSON document");
    text.push('\n');
    text
}

/// Writes the CSV and JSON reports to the paths named in the config,
/// creating parent directories as needed.
pub fn write_outputs(config: &ExperimentConfig, results: &ResultSet) -> Result<(), HarnessError> {
    for (path, text) in [
        (&config.output.csv, results_to_csv(results)),
        (&config.output.json, results_to_json(config, results)),
    ] {
        write_text(path, &text)?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                HarnessError::config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, text)
        .map_err(|e| HarnessError::config(format!("cannot write {}: {e}", path.display())))
}
