use std::collections::BTreeMap;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::planner::Bounds;
use crate::slam::LandmarkId;
use crate::tfg::geometry::{point_segment_distance, segment_intersects, Point, Segment};
use crate::tfg::SIGHT_EPS;

const ON_BOUNDARY: f64 = 1e-9;

/// Ground-truth world: polygonal obstacles whose boundaries are walls, and
/// point landmarks, usually lying on those walls. A landmark off every wall
/// is a free-standing feature such as a post.
#[derive(Debug, Clone)]
pub struct WorldModel {
    pub obstacles: Vec<Vec<Point>>,
    pub true_landmarks: BTreeMap<LandmarkId, Point>,
    pub bounds: Bounds,
    walls: Vec<Segment>,
    /// For each wall, the landmarks on it ordered by distance from its start.
    on_wall: Vec<Vec<LandmarkId>>,
}

fn polygon_edges(poly: &[Point]) -> impl Iterator<Item = Segment> + '_ {
    (0..poly.len()).map(move |i| Segment::new(poly[i], poly[(i + 1) % poly.len()]))
}

fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let edges: Vec<Segment> = polygon_edges(poly).collect();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segment_intersects(&edges[i], &edges[j]) {
                return false;
            }
        }
    }
    true
}

impl WorldModel {
    /// World with the given landmarks.
    pub fn new(
        obstacles: Vec<Vec<Point>>,
        true_landmarks: BTreeMap<LandmarkId, Point>,
        bounds: Bounds,
    ) -> Result<Self> {
        for (i, poly) in obstacles.iter().enumerate() {
            if !is_simple(poly) {
                return Err(Error::ScenarioParse(format!("polygon {i} is not simple")));
            }
        }
        let walls: Vec<Segment> = obstacles.iter().flat_map(|p| polygon_edges(p)).collect();
        let mut on_wall: Vec<Vec<(f64, LandmarkId)>> = vec![Vec::new(); walls.len()];
        for (id, p) in &true_landmarks {
            for (w, s) in walls.iter().enumerate() {
                if point_segment_distance(p, s) <= ON_BOUNDARY {
                    on_wall[w].push(((p - s.a).norm(), *id));
                }
            }
        }
        let on_wall = on_wall
            .into_iter()
            .map(|mut v| {
                v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                v.into_iter().map(|(_, id)| id).collect()
            })
            .collect();
        Ok(Self {
            obstacles,
            true_landmarks,
            bounds,
            walls,
            on_wall,
        })
    }

    /// World with landmarks every `spacing` metres along each obstacle
    /// boundary, starting at the vertices. Coincident points are merged.
    pub fn with_spacing(obstacles: Vec<Vec<Point>>, spacing: f64, bounds: Bounds) -> Result<Self> {
        if spacing <= 0.0 {
            return Err(Error::ScenarioParse(
                "landmark spacing must be positive".into(),
            ));
        }
        let mut points: Vec<Point> = Vec::new();
        for poly in &obstacles {
            for s in polygon_edges(poly) {
                let n = (s.length() / spacing).round().max(1.0) as usize;
                for i in 0..n {
                    let p = s.a + (s.b - s.a) * (i as f64 / n as f64);
                    if !points.iter().any(|q| (q - p).norm() <= ON_BOUNDARY) {
                        points.push(p);
                    }
                }
            }
        }
        let landmarks = points
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i as LandmarkId, p))
            .collect();
        Self::new(obstacles, landmarks, bounds)
    }

    pub fn walls(&self) -> &[Segment] {
        &self.walls
    }

    /// Landmarks on wall `index`, ordered along it.
    pub fn landmarks_on_wall(&self, index: usize) -> &[LandmarkId] {
        &self.on_wall[index]
    }

    pub fn wall_clearance(&self, s: &Segment) -> f64 {
        self.walls
            .iter()
            .map(|w| crate::tfg::segment_segment_distance(s, w))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether the true landmark `id` is visible from `from` through the
    /// walls.
    pub fn unoccluded(&self, from: &Point, id: LandmarkId) -> bool {
        let Some(l) = self.true_landmarks.get(&id) else {
            return false;
        };
        let sight = Segment::new(*from, *l).shortened_end(SIGHT_EPS);
        !self.walls.iter().any(|w| segment_intersects(&sight, w))
    }

    pub fn landmark(&self, id: LandmarkId) -> Option<&Vector2<f64>> {
        self.true_landmarks.get(&id)
    }
}
