use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::planner::{write_roadmap, GoalPolicy};
use crate::sim::{policy_name, run_policy, write_run_log, RunConfig, RunLog, Scenario};
use crate::slam::write_graph;
use crate::tfg::io::write_tfg;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub policy: GoalPolicy,
    /// Seeds to run; the scenario's own list when empty.
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub dump_graph: bool,
    pub dump_roadmap: bool,
    pub dump_scores: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub status: String,
    pub coverage: f64,
    pub distance: f64,
    pub position_rmse: f64,
    pub dead_reckoning_rmse: f64,
    pub landmark_rmse: f64,
    pub entropy: f64,
    pub stages: usize,
}

impl SeedSummary {
    pub fn from_log(log: &RunLog) -> Self {
        let last = log.final_stage();
        Self {
            seed: log.seed,
            status: log.status.as_str().to_string(),
            coverage: last.coverage,
            distance: last.distance_travelled,
            position_rmse: log.position_rmse(),
            dead_reckoning_rmse: log.dead_reckoning_rmse(),
            landmark_rmse: log.final_landmark_rmse,
            entropy: last.entropy_after,
            stages: log.stages.len() - 1,
        }
    }

    fn metrics(&self) -> [f64; 6] {
        [
            self.coverage,
            self.distance,
            self.position_rmse,
            self.dead_reckoning_rmse,
            self.landmark_rmse,
            self.entropy,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub scenario: String,
    pub policy: GoalPolicy,
    pub per_seed: Vec<SeedSummary>,
}

const METRICS: &str = "coverage distance position_rmse dead_reckoning_rmse landmark_rmse entropy";

impl AggregateReport {
    pub fn mean(&self) -> [f64; 6] {
        let n = self.per_seed.len() as f64;
        let mut m = [0.0; 6];
        for s in &self.per_seed {
            for (a, v) in m.iter_mut().zip(s.metrics()) {
                *a += v / n;
            }
        }
        m
    }

    pub fn range(&self) -> ([f64; 6], [f64; 6]) {
        let mut lo = [f64::INFINITY; 6];
        let mut hi = [f64::NEG_INFINITY; 6];
        for s in &self.per_seed {
            for (i, v) in s.metrics().iter().enumerate() {
                lo[i] = lo[i].min(*v);
                hi[i] = hi[i].max(*v);
            }
        }
        (lo, hi)
    }

    /// Tabular report: one `SEED` row per seed, then `MEAN`, `MIN`, `MAX`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# aggregate report");
        let _ = writeln!(out, "# scenario {}", self.scenario);
        let _ = writeln!(out, "# policy {}", policy_name(self.policy));
        let _ = writeln!(out, "# SEED seed status stages {METRICS}");
        let _ = writeln!(out, "# MEAN|MIN|MAX {METRICS}");
        for s in &self.per_seed {
            let _ = write!(out, "SEED {} {} {}", s.seed, s.status, s.stages);
            for v in s.metrics() {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        let (lo, hi) = self.range();
        for (label, row) in [("MEAN", self.mean()), ("MIN", lo), ("MAX", hi)] {
            let _ = write!(out, "{label}");
            for v in row {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs the selected policy on every seed and writes one log per seed plus
/// the aggregate report into `opts.out`.
pub fn cmd_run(opts: &RunOptions) -> Result<AggregateReport> {
    let scenario = Scenario::load(&opts.scenario)?;
    let seeds = if opts.seeds.is_empty() {
        scenario.run.seeds.clone()
    } else {
        opts.seeds.clone()
    };
    if seeds.is_empty() {
        return Err(Error::ScenarioParse("no seeds to run".into()));
    }
    std::fs::create_dir_all(&opts.out)
        .map_err(|e| Error::Io(format!("{}: {e}", opts.out.display())))?;
    let keep_plans = opts.dump_roadmap || opts.dump_scores;
    let logs: Vec<Result<RunLog>> = seeds
        .par_iter()
        .map(|&seed| {
            run_policy(
                &scenario,
                RunConfig {
                    policy: opts.policy,
                    seed,
                    keep_plans,
                },
            )
            .map_err(|e| Error::RunFailed {
                seed,
                cause: e.to_string(),
            })
        })
        .collect();
    let policy = policy_name(opts.policy);
    let mut per_seed = Vec::new();
    for log in logs {
        let log = log?;
        let stem = format!("{policy}_seed{}", log.seed);
        write_file(&opts.out.join(format!("{stem}.log")), &write_run_log(&log))?;
        if opts.dump_graph {
            write_file(
                &opts.out.join(format!("{stem}.graph")),
                &write_graph(&log.graph),
            )?;
            write_file(&opts.out.join(format!("{stem}.tfg")), &write_tfg(&log.tfg))?;
        }
        if opts.dump_roadmap {
            let mut text = String::new();
            for p in &log.plans {
                let _ = writeln!(text, "# stage {}", p.stage);
                text.push_str(&write_roadmap(&p.roadmap));
            }
            write_file(&opts.out.join(format!("{stem}.roadmap")), &text)?;
        }
        if opts.dump_scores {
            let mut text = String::from("# stage x y dh_o dh_u total reachable\n");
            for p in &log.plans {
                let mut rows = p.candidates.clone();
                rows.sort_by_key(|c| c.index);
                for c in rows {
                    let _ = writeln!(
                        text,
                        "{} {} {} {} {} {} {}",
                        p.stage, c.pose.x, c.pose.y, c.dh_o, c.dh_u, c.total, c.reachable as u8
                    );
                }
            }
            write_file(&opts.out.join(format!("{stem}.scores")), &text)?;
        }
        per_seed.push(SeedSummary::from_log(&log));
    }
    let report = AggregateReport {
        scenario: scenario.name.clone(),
        policy: opts.policy,
        per_seed,
    };
    write_file(
        &opts.out.join(format!("report_{policy}.txt")),
        &report.to_text(),
    )?;
    Ok(report)
}
