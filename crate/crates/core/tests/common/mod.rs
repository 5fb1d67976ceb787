#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use stl_core::experiment::{run, Command, ExperimentConfig};

/// Small configurations of every command, quick enough for repeated runs.
pub fn small_configs() -> Vec<ExperimentConfig> {
    Command::ALL
        .into_iter()
        .map(|cmd| {
            let mut c = ExperimentConfig::defaults(cmd);
            match cmd {
                Command::Spectrum => {
                    c.n = 40;
                    c.trials = 3;
                    c.restarts = 3;
                }
                Command::PowerTrace => {
                    c.n = 30;
                    c.lambdas = vec![0.0, 4.0];
                    c.trials = 2;
                }
                Command::PhaseSweep => {
                    c.n = 25;
                    c.lambdas = vec![0.5, 2.0, 3.5];
                    c.trials = 4;
                    c.restarts = 3;
                }
                Command::FixedPoint => c.lambdas = vec![1.0, 1.5, 2.0, 4.0],
                Command::DerivativeCheck => {
                    c.n = 12;
                    c.trials = 6;
                    c.restarts = 3;
                }
            }
            c.seed = 314;
            c
        })
        .collect()
}

/// Runs `config` with `threads` workers into `dir` and returns every output file by name.
pub fn run_into(
    config: &ExperimentConfig,
    dir: &Path,
    threads: usize,
) -> BTreeMap<String, Vec<u8>> {
    let mut c = config.clone();
    c.output_dir = dir.to_path_buf();
    c.threads = Some(threads);
    let outcome = run(&c).unwrap();
    outcome
        .files
        .iter()
        .map(|f| {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read(f).unwrap())
        })
        .collect()
}

/// Whether every command writes byte-identical files under 1 and 8 threads.
pub fn thread_count_invariant(configs: &[ExperimentConfig]) -> Result<(), String> {
    for c in configs {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let one = run_into(c, a.path(), 1);
        let eight = run_into(c, b.path(), 8);
        if one.is_empty() {
            return Err(format!("{}: no files written", c.command));
        }
        if one != eight {
            let differing: Vec<&String> = one
                .keys()
                .filter(|k| one.get(*k) != eight.get(*k))
                .collect();
            return Err(format!(
                "{}: files differ between 1 and 8 threads: {differing:?}",
                c.command
            ));
        }
    }
    Ok(())
}
