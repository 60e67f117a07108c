use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::roadmap::{NodeId, Roadmap};
use crate::error::{Error, Result};
use crate::slam::Pose2;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub nodes: Vec<NodeId>,
    pub waypoints: Vec<Pose2>,
    pub total_cost: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Min-heap on (cost, node).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source minimum costs from the current node.
#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub source: NodeId,
    pub cost: Vec<f64>,
    parent: Vec<Option<(NodeId, usize)>>,
}

impl ShortestPaths {
    pub fn compute(roadmap: &Roadmap) -> Self {
        let source = roadmap.current();
        let n = roadmap.nodes.len();
        let mut cost = vec![f64::INFINITY; n];
        let mut parent: Vec<Option<(NodeId, usize)>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        cost[source] = 0.0;
        heap.push(Entry {
            cost: 0.0,
            node: source,
        });
        while let Some(Entry { cost: c, node }) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            for &(next, k) in roadmap.neighbours(node) {
                let nc = c + roadmap.edges[k].cost;
                // Equal-cost ties keep the lower-numbered predecessor.
                let better = nc < cost[next]
                    || (nc == cost[next] && parent[next].is_some_and(|(p, _)| node < p));
                if !done[next] && better {
                    cost[next] = nc;
                    parent[next] = Some((node, k));
                    heap.push(Entry {
                        cost: nc,
                        node: next,
                    });
                }
            }
        }
        Self {
            source,
            cost,
            parent,
        }
    }

    pub fn path_to(&self, roadmap: &Roadmap, goal: NodeId) -> Result<PlannedPath> {
        if goal >= roadmap.nodes.len() || !self.cost[goal].is_finite() {
            return Err(Error::Unreachable(goal));
        }
        let mut nodes = vec![goal];
        let mut length = 0.0;
        let mut at = goal;
        while let Some((p, k)) = self.parent[at] {
            length += roadmap.edges[k].length;
            nodes.push(p);
            at = p;
        }
        nodes.reverse();
        Ok(PlannedPath {
            waypoints: nodes.iter().map(|&i| roadmap.nodes[i].pose).collect(),
            nodes,
            total_cost: self.cost[goal],
            length,
        })
    }
}

/// Minimum-cost path from the current node to `goal`.
pub fn shortest_path(roadmap: &Roadmap, goal: NodeId) -> Result<PlannedPath> {
    ShortestPaths::compute(roadmap).path_to(roadmap, goal)
}
