use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::info_gain::{delta_h, gain_terms, ExplorationPrior, Reachability};
use crate::planner::clearance;
use crate::sim::Scenario;
use crate::slam::Pose2;
use crate::tfg::detect_frontiers;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaLevel {
    High,
    Medium,
    Low,
}

impl std::str::FromStr for SigmaLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(SigmaLevel::High),
            "medium" => Ok(SigmaLevel::Medium),
            "low" => Ok(SigmaLevel::Low),
            other => Err(Error::ScenarioParse(format!(
                "unknown sigma-u level {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCell {
    pub x: f64,
    pub y: f64,
    pub dh_o: f64,
    pub dh_u: f64,
    pub total: f64,
    pub reachable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfoMap {
    pub sigma_u: f64,
    pub cells: Vec<ScoreCell>,
}

impl InfoMap {
    /// Best reachable cell; ties go to the earlier cell.
    pub fn argmax(&self) -> Option<&ScoreCell> {
        self.cells
            .iter()
            .filter(|c| c.reachable)
            .fold(None, |best: Option<&ScoreCell>, c| match best {
                Some(b) if b.total >= c.total => Some(b),
                _ => Some(c),
            })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# sigma_u {}", self.sigma_u);
        if let Some(a) = self.argmax() {
            let _ = writeln!(out, "# argmax {} {}", a.x, a.y);
        }
        let _ = writeln!(out, "# x y dh_o dh_u total reachable");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                c.x, c.y, c.dh_o, c.dh_u, c.total, c.reachable as u8
            );
        }
        out
    }
}

/// Unseen-landmark variance for a level: the scenario value for high, the
/// mean mapped marginal variance for low, their geometric mean for medium.
pub fn sigma_for_level(scenario: &Scenario, level: SigmaLevel) -> Result<f64> {
    let map = scenario
        .partial_map
        .as_ref()
        .ok_or_else(|| Error::ScenarioParse("scenario has no partial_map section".into()))?;
    let cov = map.tfg.covariance();
    let n = cov.nrows();
    let low = if n == 0 {
        scenario.sigma_u
    } else {
        (0..n).map(|i| cov[(i, i)]).sum::<f64>() / n as f64
    };
    Ok(match level {
        SigmaLevel::High => scenario.sigma_u,
        SigmaLevel::Low => low,
        SigmaLevel::Medium => (scenario.sigma_u * low).sqrt(),
    })
}

/// Scores a regular grid over the scenario bounds against its partial map.
/// Cells closer than the robot radius to the map are skipped.
pub fn infomap(scenario: &Scenario, step: f64, sigma_u: f64) -> Result<InfoMap> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::ScenarioParse("grid step must be positive".into()));
    }
    let map = scenario
        .partial_map
        .as_ref()
        .ok_or_else(|| Error::ScenarioParse("scenario has no partial_map section".into()))?;
    let b = scenario.world.bounds;
    let nx = (b.width() / step + 1e-9).floor() as usize;
    let ny = (b.height() / step + 1e-9).floor() as usize;
    let mut poses = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let p = Pose2::new(b.min_x + i as f64 * step, b.min_y + j as f64 * step, 0.0);
            if clearance(&p.translation(), &map.tfg) >= scenario.robot_radius {
                poses.push(p);
            }
        }
    }
    let prior = ExplorationPrior::isotropic(
        sigma_u,
        scenario.sensing.measurement_information,
        scenario.density,
    );
    let reach = if map.goals.is_empty() {
        Reachability::unrestricted()
    } else {
        Reachability::new(map.goals.clone(), scenario.reach_range())
    };
    let sensing = &scenario.sensing;
    let cells = poses
        .par_iter()
        .map(|p| {
            let frontiers = detect_frontiers(&map.tfg, p, &sensing.full_rotation());
            let terms = gain_terms(&map.tfg, p, sensing, &prior, &frontiers)?;
            let (dh_o, dh_u) = delta_h(&terms, terms.n_x, &prior)?;
            Ok(ScoreCell {
                x: p.x,
                y: p.y,
                dh_o,
                dh_u,
                total: dh_o + dh_u,
                reachable: reach.is_reachable(&map.tfg, p),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InfoMap { sigma_u, cells })
}

pub fn cmd_infomap(scenario: &Path, step: f64, level: SigmaLevel) -> Result<InfoMap> {
    let scenario = Scenario::load(scenario)?;
    let sigma_u = sigma_for_level(&scenario, level)?;
    infomap(&scenario, step, sigma_u)
}
