//! Text records for a topological feature graph:
//!
//! ```text
//! LANDMARK <id> <x> <y>
//! EDGE <a> <b>
//! MARGINAL_ORDER <id> <id> ...
//! MARGINAL_UPPER <v11> <v12> ... <vNN>
//! ```
//!
//! `MARGINAL_UPPER` holds the upper triangle of `Λ_L` row-major, with rows
//! laid out as `x, y` per landmark in `MARGINAL_ORDER` order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::geometry::Point;
use super::{SurfaceEdge, TopologicalFeatureGraph};
use crate::error::{Error, Result};
use crate::slam::io::Fields;
use crate::slam::MarginalInfo;

pub fn write_tfg(tfg: &TopologicalFeatureGraph) -> String {
    let mut out = String::from("# tfg-slam topological feature graph v1\n");
    for (id, p) in tfg.landmarks() {
        let _ = writeln!(out, "LANDMARK {id} {} {}", p.x, p.y);
    }
    for e in tfg.edges() {
        let _ = writeln!(out, "EDGE {} {}", e.a, e.b);
    }
    let m = tfg.marginal();
    out.push_str("MARGINAL_ORDER");
    for id in &m.landmark_order {
        let _ = write!(out, " {id}");
    }
    out.push_str("\nMARGINAL_UPPER");
    let n = m.lambda.nrows();
    for r in 0..n {
        for c in r..n {
            let _ = write!(out, " {}", m.lambda[(r, c)]);
        }
    }
    out.push('\n');
    out
}

pub fn read_tfg(text: &str) -> Result<TopologicalFeatureGraph> {
    let mut landmarks = BTreeMap::new();
    let mut edges = Vec::new();
    let mut order: Option<Vec<u64>> = None;
    let mut upper: Option<Vec<f64>> = None;
    let mut marginal_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (kind, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let mut f = Fields::new(i + 1, rest);
        match kind {
            "LANDMARK" => {
                let id = f.id()?;
                let p = Point::new(f.real()?, f.real()?);
                f.finish()?;
                landmarks.insert(id, p);
            }
            "EDGE" => {
                let (a, b) = (f.id()?, f.id()?);
                f.finish()?;
                edges.push(SurfaceEdge::new(a, b).ok_or_else(|| f_err(i, "self edge"))?);
            }
            "MARGINAL_ORDER" => {
                order = Some(
                    rest.split_whitespace()
                        .map(|s| s.parse().map_err(|_| f_err(i, "bad landmark id")))
                        .collect::<Result<_>>()?,
                );
            }
            "MARGINAL_UPPER" => {
                marginal_line = i + 1;
                upper = Some(
                    rest.split_whitespace()
                        .map(|s| s.parse().map_err(|_| f_err(i, "bad number")))
                        .collect::<Result<_>>()?,
                );
            }
            other => return Err(f_err(i, &format!("unknown record {other:?}"))),
        }
    }
    let order = order.unwrap_or_default();
    let upper = upper.unwrap_or_default();
    let n = 2 * order.len();
    if upper.len() != n * (n + 1) / 2 {
        return Err(Error::Parse {
            line: marginal_line,
            message: format!(
                "expected {} upper-triangular entries, found {}",
                n * (n + 1) / 2,
                upper.len()
            ),
        });
    }
    let mut lambda = DMatrix::zeros(n, n);
    let mut k = 0;
    for r in 0..n {
        for c in r..n {
            lambda[(r, c)] = upper[k];
            lambda[(c, r)] = upper[k];
            k += 1;
        }
    }
    TopologicalFeatureGraph::new(
        landmarks,
        edges,
        MarginalInfo {
            landmark_order: order,
            lambda,
        },
    )
}

fn f_err(i: usize, message: &str) -> Error {
    Error::Parse {
        line: i + 1,
        message: message.into(),
    }
}
