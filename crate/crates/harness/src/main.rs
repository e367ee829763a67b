//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 for configuration errors (bad arguments,
//! bad config files, bad maps), 2 for runtime failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use deastar_core::gen::{generate_maze, generate_obstacle_field};
use deastar_core::grid::{parse_map, render_map};
use deastar_core::oracle::{dijkstra_cost, OracleResult};
use deastar_core::rng::derive_seed;

use deastar_harness::compare::{
    compare_policies, comparison_to_csv, comparison_to_table, parse_results_csv,
};
use deastar_harness::config::{ExperimentConfig, HarnessError};
use deastar_harness::runner::{run_experiment, write_outputs, write_text, SEED_DOMAIN_CORPUS};

#[derive(Parser)]
#[command(
    name = "deastar",
    version,
    about = "Grid-search experiment harness with deterministic seeding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    Maze,
    Field,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run trials on one thread instead of the rayon pool.
        #[arg(long)]
        serial: bool,
    },
    /// Generate a batch of map files.
    GenMaps {
        #[arg(long, value_enum)]
        kind: MapKind,
        /// Output directory for map_NNN.txt files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: u32,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        /// Blocking probability for field maps; ignored for mazes.
        #[arg(long, default_value_t = 0.25)]
        density: f64,
    },
    /// Print the exact optimal cost and a witness path for a map file.
    Oracle {
        #[arg(long)]
        map: PathBuf,
    },
    /// Summarize a results CSV into a side-by-side policy comparison.
    Compare {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Treat argument misuse as a configuration error, but let
            // --help and --version exit cleanly.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            serial,
        } => {
            let text = fs::read_to_string(&config).map_err(|e| {
                HarnessError::config(format!("cannot read {}: {e}", config.display()))
            })?;
            let mut config = ExperimentConfig::from_toml(&text)?;
            if let Some(seed) = seed {
                config.master_seed = seed;
            }
            let results = run_experiment(&config, !serial)?;
            write_outputs(&config, &results)?;
            println!(
                "wrote {} rows to {} and {}",
                results.rows.len(),
                config.output.csv.display(),
                config.output.json.display()
            );
            Ok(())
        }
        Command::GenMaps {
            kind,
            out,
            seed,
            count,
            width,
            height,
            density,
        } => {
            if count == 0 {
                return Err(HarnessError::config("count must be at least 1"));
            }
            fs::create_dir_all(&out).map_err(|e| {
                HarnessError::config(format!("cannot create {}: {e}", out.display()))
            })?;
            for i in 0..count {
                let map_seed = derive_seed(seed, &[SEED_DOMAIN_CORPUS, u64::from(i)]);
                let map = match kind {
                    MapKind::Maze => {
                        generate_maze(width, height, map_seed).map_err(HarnessError::config)?
                    }
                    MapKind::Field => {
                        generate_obstacle_field(width, height, density, map_seed)
                            .map_err(HarnessError::config)?
                            .map
                    }
                };
                let path = out.join(format!("map_{i:03}.txt"));
                write_text(&path, &render_map(&map))?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Oracle { map } => {
            let text = fs::read_to_string(&map).map_err(|e| {
                HarnessError::config(format!("cannot read {}: {e}", map.display()))
            })?;
            let map = parse_map(&text)
                .map_err(|e| HarnessError::config(format!("invalid map: {e}")))?;
            match dijkstra_cost(&map, map.start(), map.goal())
                .map_err(HarnessError::runtime)?
            {
                OracleResult::Reachable { cost, witness } => {
                    println!("c_star: {cost}");
                    let path: Vec<String> = witness
                        .iter()
                        .map(|c| format!("[{},{}]", c.x, c.y))
                        .collect();
                    println!("witness: {}", path.join(" "));
                }
                OracleResult::Unreachable => println!("unreachable"),
            }
            Ok(())
        }
        Command::Compare { results, out } => {
            let text = fs::read_to_string(&results).map_err(|e| {
                HarnessError::config(format!("cannot read {}: {e}", results.display()))
            })?;
            let results = parse_results_csv(&text)?;
            let comparison = compare_policies(&results)?;
            write_text(&out, &comparison_to_csv(&comparison))?;
            print!("{}", comparison_to_table(&comparison));
            Ok(())
        }
    }
}
