//! Side-by-side policy comparison.

use std::collections::BTreeMap;

use crate::config::HarnessError;
use crate::format::format_scaled;
use crate::runner::{AlgoAggregate, ResultSet, RunRow};

/// One algorithm's column in the comparison: its aggregates plus the
/// number of maps it won (lowest total traveled over the map's trials;
/// ties credit every tied algorithm).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgoSummary {
    pub aggregate: AlgoAggregate,
    pub wins: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub algorithms: Vec<AlgoSummary>,
}

pub const COMPARISON_CSV_HEADER: &str =
    "algorithm_id,rows,mean_ratio,median_ratio,exceedance_rate,mean_mu,mean_sum_sigma,wins";

/// Builds the comparison table. Requires at least two distinct
/// algorithms.
pub fn compare_policies(results: &ResultSet) -> Result<Comparison, HarnessError> {
    if results.aggregates.len() < 2 {
        return Err(HarnessError::config(
            "policy comparison requires at least two algorithms",
        ));
    }

    // Total traveled per (map, algorithm).
    let mut totals: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for row in &results.rows {
        *totals
            .entry((row.map_id.as_str(), row.algorithm_id.as_str()))
            .or_insert(0) += row.traveled;
    }
    let map_ids: Vec<&str> = {
        let mut ids: Vec<&str> = results.rows.iter().map(|r| r.map_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let mut wins: BTreeMap<&str, u64> = BTreeMap::new();
    for map_id in map_ids {
        let entries: Vec<(&str, u64)> = results
            .aggregates
            .iter()
            .filter_map(|a| {
                totals
                    .get(&(map_id, a.algorithm_id.as_str()))
                    .map(|t| (a.algorithm_id.as_str(), *t))
            })
            .collect();
        if let Some(best) = entries.iter().map(|(_, t)| *t).min() {
            for (algo, total) in entries {
                if total == best {
                    *wins.entry(algo).or_insert(0) += 1;
                }
            }
        }
    }

    Ok(Comparison {
        algorithms: results
            .aggregates
            .iter()
            .map(|a| AlgoSummary {
                aggregate: a.clone(),
                wins: wins.get(a.algorithm_id.as_str()).copied().unwrap_or(0),
            })
            .collect(),
    })
}

/// Comparison rows as CSV (LF, trailing newline).
pub fn comparison_to_csv(comparison: &Comparison) -> String {
    let mut out = String::from(COMPARISON_CSV_HEADER);
    out.push('\n');
    for s in &comparison.algorithms {
        let a = &s.aggregate;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            a.algorithm_id,
            a.rows,
            format_scaled(a.mean_ratio_scaled),
            format_scaled(a.median_ratio_scaled),
            format_scaled(a.exceedance_rate_scaled),
            format_scaled(a.mean_mu_scaled),
            format_scaled(a.mean_sum_sigma_scaled),
            s.wins
        ));
    }
    out
}

/// Human-readable aligned table.
pub fn comparison_to_table(comparison: &Comparison) -> String {
    let headers = [
        "algorithm",
        "rows",
        "mean_ratio",
        "median_ratio",
        "exceed_rate",
        "mean_mu",
        "mean_sum_sigma",
        "wins",
    ];
    let rows: Vec<[String; 8]> = comparison
        .algorithms
        .iter()
        .map(|s| {
            let a = &s.aggregate;
            [
                a.algorithm_id.clone(),
                a.rows.to_string(),
                format_scaled(a.mean_ratio_scaled),
                format_scaled(a.median_ratio_scaled),
                format_scaled(a.exceedance_rate_scaled),
                format_scaled(a.mean_mu_scaled),
                format_scaled(a.mean_sum_sigma_scaled),
                s.wins.to_string(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:width$}", c, width = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    emit(
        &mut out,
        &headers.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
    );
    for row in &rows {
        emit(&mut out, row);
    }
    out
}

/// Reads rows back from a results CSV produced by this harness.
pub fn parse_results_csv(text: &str) -> Result<ResultSet, HarnessError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == crate::runner::CSV_HEADER => {}
        other => {
            return Err(HarnessError::config(format!(
                "unrecognized results CSV header: {other:?}"
            )))
        }
    }
    let rows: Result<Vec<RunRow>, HarnessError> = lines.map(RunRow::from_csv_line).collect();
    Ok(ResultSet::from_rows(rows?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AlgorithmSpec, CorpusSpec, ExperimentConfig, OutputSpec};
    use crate::runner::run_experiment;
    use deastar_core::offline::{PerimeterAxis, Weight};
    use deastar_core::realtime::SensingMode;

    fn config(algorithms: Vec<AlgorithmSpec>) -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 13,
            trials_per_map: 2,
            corpus: CorpusSpec::Field {
                width: 10,
                height: 10,
                density: 0.25,
                count: 3,
            },
            algorithms,
            sensing: SensingMode::Radius { radius: 1 },
            output: OutputSpec {
                csv: "unused.csv".into(),
                json: "unused.json".into(),
            },
        }
    }

    #[test]
    fn self_comparison_has_identical_columns() {
        let results = run_experiment(
            &config(vec![AlgorithmSpec::AstarReplan, AlgorithmSpec::AstarReplan]),
            false,
        )
        .unwrap();
        let cmp = compare_policies(&results).unwrap();
        assert_eq!(cmp.algorithms.len(), 2);
        let a = &cmp.algorithms[0];
        let b = &cmp.algorithms[1];
        assert_eq!(a.aggregate.mean_ratio_scaled, b.aggregate.mean_ratio_scaled);
        assert_eq!(a.aggregate.mean_mu_scaled, b.aggregate.mean_mu_scaled);
        assert_eq!(a.wins, b.wins); // every map is a tie
    }

    #[test]
    fn single_algorithm_is_a_usage_error() {
        let results = run_experiment(&config(vec![AlgorithmSpec::AstarReplan]), false).unwrap();
        assert!(compare_policies(&results).is_err());
    }

    #[test]
    fn comparison_runs_on_mixed_policies() {
        let results = run_experiment(
            &config(vec![
                AlgorithmSpec::AstarReplan,
                AlgorithmSpec::DeaStar {
                    epsilon: Weight::from_integer(1),
                    delta: 0.5,
                    lambda: Weight::from_integer(0),
                    upper_lambda: Weight::from_integer(1),
                    axis: PerimeterAxis::G,
                },
            ]),
            false,
        )
        .unwrap();
        let cmp = compare_policies(&results).unwrap();
        let total_wins: u64 = cmp.algorithms.iter().map(|a| a.wins).sum();
        assert!(total_wins >= 3); // one win per map, more on ties
        let csv = comparison_to_csv(&cmp);
        assert!(csv.starts_with(COMPARISON_CSV_HEADER));
        let table = comparison_to_table(&cmp);
        assert!(table.contains("astar_replan"));
    }

    #[test]
    fn results_csv_parses_back_with_identical_aggregates() {
        let results = run_experiment(
            &config(vec![AlgorithmSpec::AstarReplan, AlgorithmSpec::AstarReplan]),
            false,
        )
        .unwrap();
        let csv = crate::runner::results_to_csv(&results);
        let parsed = parse_results_csv(&csv).unwrap();
        assert_eq!(parsed, results);
    }
}
