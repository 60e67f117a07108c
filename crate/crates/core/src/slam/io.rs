//! Line-oriented text format for factor graphs.
//!
//! One record per line, whitespace separated, `#` starts a comment:
//!
//! ```text
//! POSE <id> <x> <y> <theta>
//! LANDMARK <id> <x> <y>
//! POSE_PRIOR <pose> <x> <y> <theta> <I11 I12 I13 I22 I23 I33>
//! LANDMARK_PRIOR <landmark> <x> <y> <I11 I12 I22>
//! ODOMETRY <from> <to> <dx> <dy> <dtheta> <I11 I12 I13 I22 I23 I33>
//! MEASUREMENT <pose> <landmark> <zx> <zy> <I11 I12 I22>
//! ```
//!
//! Information matrices are written as their upper triangle, row-major.
//! Variable records must precede the factors that reference them.

use std::fmt::Write as _;

use nalgebra::{Matrix2, Matrix3, Vector2};

use super::factor::Factor;
use super::graph::FactorGraph;
use super::pose::Pose2;
use crate::error::{Error, Result};

pub(crate) fn upper2(m: &Matrix2<f64>) -> String {
    format!("{} {} {}", m[(0, 0)], m[(0, 1)], m[(1, 1)])
}

pub(crate) fn upper3(m: &Matrix3<f64>) -> String {
    format!(
        "{} {} {} {} {} {}",
        m[(0, 0)],
        m[(0, 1)],
        m[(0, 2)],
        m[(1, 1)],
        m[(1, 2)],
        m[(2, 2)]
    )
}

pub fn write_graph(graph: &FactorGraph) -> String {
    let mut out = String::from("# tfg-slam factor graph v1\n");
    for (id, p) in graph.poses() {
        let _ = writeln!(out, "POSE {id} {} {} {}", p.x, p.y, p.theta);
    }
    for (id, l) in graph.landmarks() {
        let _ = writeln!(out, "LANDMARK {id} {} {}", l.position.x, l.position.y);
    }
    for f in graph.factors() {
        let _ = match f {
            Factor::PosePrior {
                pose,
                mean,
                information,
            } => writeln!(
                out,
                "POSE_PRIOR {pose} {} {} {} {}",
                mean.x,
                mean.y,
                mean.theta,
                upper3(information)
            ),
            Factor::LandmarkPrior {
                landmark,
                mean,
                information,
            } => writeln!(
                out,
                "LANDMARK_PRIOR {landmark} {} {} {}",
                mean.x,
                mean.y,
                upper2(information)
            ),
            Factor::Odometry {
                from,
                to,
                delta,
                information,
            } => writeln!(
                out,
                "ODOMETRY {from} {to} {} {} {} {}",
                delta.x,
                delta.y,
                delta.theta,
                upper3(information)
            ),
            Factor::Measurement {
                pose,
                landmark,
                relative,
                information,
            } => writeln!(
                out,
                "MEASUREMENT {pose} {landmark} {} {} {}",
                relative.x,
                relative.y,
                upper2(information)
            ),
        };
    }
    out
}

pub(crate) struct Fields<'a> {
    line: usize,
    items: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    pub(crate) fn new(line: usize, rest: &'a str) -> Self {
        Self {
            line,
            items: rest.split_whitespace(),
        }
    }

    pub(crate) fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    pub(crate) fn id(&mut self) -> Result<u64> {
        let s = self.items.next().ok_or_else(|| self.err("missing id"))?;
        s.parse().map_err(|_| self.err(format!("bad id {s:?}")))
    }

    pub(crate) fn real(&mut self) -> Result<f64> {
        let s = self.items.next().ok_or_else(|| self.err("missing value"))?;
        s.parse().map_err(|_| self.err(format!("bad number {s:?}")))
    }

    pub(crate) fn upper2(&mut self) -> Result<Matrix2<f64>> {
        let (a, b, c) = (self.real()?, self.real()?, self.real()?);
        Ok(Matrix2::new(a, b, b, c))
    }

    pub(crate) fn upper3(&mut self) -> Result<Matrix3<f64>> {
        let v: Vec<f64> = (0..6).map(|_| self.real()).collect::<Result<_>>()?;
        Ok(Matrix3::new(
            v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5],
        ))
    }

    pub(crate) fn finish(mut self) -> Result<()> {
        match self.items.next() {
            Some(extra) => Err(self.err(format!("unexpected trailing field {extra:?}"))),
            None => Ok(()),
        }
    }
}

pub fn read_graph(text: &str) -> Result<FactorGraph> {
    let mut g = FactorGraph::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let mut f = Fields::new(i + 1, rest);
        let at = |e: Error| match e {
            Error::Parse { .. } => e,
            other => Error::Parse {
                line: i + 1,
                message: other.to_string(),
            },
        };
        match kind {
            "POSE" => {
                let id = f.id()?;
                let p = Pose2::new(f.real()?, f.real()?, f.real()?);
                f.finish()?;
                g.add_pose(id, p).map_err(at)?;
            }
            "LANDMARK" => {
                let id = f.id()?;
                let p = Vector2::new(f.real()?, f.real()?);
                f.finish()?;
                g.add_landmark(id, p).map_err(at)?;
            }
            "POSE_PRIOR" => {
                let pose = f.id()?;
                let mean = Pose2::new(f.real()?, f.real()?, f.real()?);
                let information = f.upper3()?;
                f.finish()?;
                g.add_factor(Factor::PosePrior {
                    pose,
                    mean,
                    information,
                })
                .map_err(at)?;
            }
            "LANDMARK_PRIOR" => {
                let landmark = f.id()?;
                let mean = Vector2::new(f.real()?, f.real()?);
                let information = f.upper2()?;
                f.finish()?;
                g.add_factor(Factor::LandmarkPrior {
                    landmark,
                    mean,
                    information,
                })
                .map_err(at)?;
            }
            "ODOMETRY" => {
                let from = f.id()?;
                let to = f.id()?;
                let delta = Pose2::new(f.real()?, f.real()?, f.real()?);
                let information = f.upper3()?;
                f.finish()?;
                g.add_factor(Factor::Odometry {
                    from,
                    to,
                    delta,
                    information,
                })
                .map_err(at)?;
            }
            "MEASUREMENT" => {
                let pose = f.id()?;
                let landmark = f.id()?;
                let relative = Vector2::new(f.real()?, f.real()?);
                let information = f.upper2()?;
                f.finish()?;
                g.add_factor(Factor::Measurement {
                    pose,
                    landmark,
                    relative,
                    information,
                })
                .map_err(at)?;
            }
            other => return Err(f.err(format!("unknown record {other:?}"))),
        }
    }
    Ok(g)
}
