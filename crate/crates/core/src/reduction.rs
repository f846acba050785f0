//! Iterative graph reduction: boxes of side `kΔx` around seed nodes are
//! collapsed into their mean position, inheriting every external edge,
//! until the sample points stop moving.

use crate::error::{Error, Result};
use crate::graph::{Component, VortexGraph};
use crate::grid::{GridFrame, Vec3};

pub const K_RANGE: std::ops::RangeInclusive<usize> = 3..=8;
pub const MAX_PASSES: usize = 10;
/// Convergence threshold on the per-pass displacement, in units of `Δx`.
pub const CONVERGENCE_TOL: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleGraph {
    pub points: Vec<Vec3>,
    /// Sorted neighbor lists.
    pub adjacency: Vec<Vec<usize>>,
    pub origin_component: usize,
    pub frame: GridFrame,
}

impl SampleGraph {
    pub fn new(
        points: Vec<Vec3>,
        adjacency: Vec<Vec<usize>>,
        origin_component: usize,
        frame: GridFrame,
    ) -> Result<Self> {
        let g = SampleGraph { points, adjacency, origin_component, frame };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from an undirected edge list.
    pub fn from_edges(
        points: Vec<Vec3>,
        edges: &[(usize, usize)],
        origin_component: usize,
        frame: GridFrame,
    ) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); points.len()];
        for &(a, b) in edges {
            if a >= points.len() || b >= points.len() {
                return Err(Error::contract(format!("edge ({a}, {b}) out of range")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Self::new(points, adjacency, origin_component, frame)
    }

    /// The sub-graph of `graph` spanned by `component`, at node positions.
    pub fn from_component(graph: &VortexGraph, component: &Component, origin: usize, spacing: f64) -> Self {
        let frame = GridFrame::new(graph.dims, spacing, graph.boundary);
        let local = |g: usize| component.node_ids.binary_search(&g).ok();
        let points = component
            .node_ids
            .iter()
            .map(|&g| {
                let [i, j, k] = graph.nodes[g].index;
                Vec3::new(i as f64, j as f64, k as f64) * spacing
            })
            .collect();
        let adjacency = component
            .node_ids
            .iter()
            .map(|&g| graph.adjacency[g].iter().filter_map(|&m| local(m)).collect())
            .collect();
        SampleGraph { points, adjacency, origin_component: origin, frame }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, adj)| adj.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(n) = stack.pop() {
                for &m in &self.adjacency[n] {
                    if !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
        }
        count
    }

    /// Cyclomatic number `E − V + C`: the count of independent cycles.
    pub fn cycle_rank(&self) -> usize {
        self.edge_count() + self.component_count() - self.len()
    }

    fn validate(&self) -> Result<()> {
        if self.adjacency.len() != self.points.len() {
            return Err(Error::contract("adjacency length differs from point count"));
        }
        for (a, adj) in self.adjacency.iter().enumerate() {
            for (n, &b) in adj.iter().enumerate() {
                if b >= self.points.len() || b == a {
                    return Err(Error::contract(format!("invalid edge ({a}, {b})")));
                }
                if n > 0 && adj[n - 1] >= b {
                    return Err(Error::contract(format!("neighbor list of {a} not sorted/unique")));
                }
                if self.adjacency[b].binary_search(&a).is_err() {
                    return Err(Error::contract(format!("edge ({a}, {b}) not symmetric")));
                }
            }
        }
        Ok(())
    }
}

fn check_k(k: usize) -> Result<()> {
    if !K_RANGE.contains(&k) {
        return Err(Error::contract(format!(
            "box size k = {k} outside {}..={}",
            K_RANGE.start(),
            K_RANGE.end()
        )));
    }
    Ok(())
}

/// Nodes reachable from `seed` through nodes inside the closed box of side
/// `kΔx` centered at the seed.
pub fn box_subgraph(graph: &SampleGraph, seed: usize, k: usize) -> Result<Vec<usize>> {
    check_k(k)?;
    if seed >= graph.len() {
        return Err(Error::contract(format!("seed {seed} not in graph")));
    }
    let eligible = vec![true; graph.len()];
    Ok(box_subgraph_within(graph, seed, k, &eligible))
}

fn box_subgraph_within(graph: &SampleGraph, seed: usize, k: usize, eligible: &[bool]) -> Vec<usize> {
    let half = 0.5 * k as f64 * graph.frame.spacing;
    // closed bounds, with slack for coordinates built as multiples of Δx
    let half = half * (1.0 + 1e-12);
    let center = graph.points[seed];
    let inside = |p: &Vec3| {
        let d = graph.frame.delta(&center, p);
        d.iter().all(|c| c.abs() <= half)
    };
    let mut taken = vec![false; graph.len()];
    let mut stack = vec![seed];
    taken[seed] = true;
    let mut out = Vec::new();
    while let Some(n) = stack.pop() {
        out.push(n);
        for &m in &graph.adjacency[n] {
            if !taken[m] && eligible[m] && inside(&graph.points[m]) {
                taken[m] = true;
                stack.push(m);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Arithmetic mean of the positions.
pub fn mean_estimator(positions: &[Vec3]) -> Result<Vec3> {
    if positions.is_empty() {
        return Err(Error::contract("mean of an empty point set"));
    }
    let sum = positions.iter().fold(Vec3::zeros(), |acc, p| acc + p);
    Ok(sum / positions.len() as f64)
}

/// Result of one sweep: the contracted graph and, for every input point, the
/// sample it was merged into.
#[derive(Clone, Debug)]
pub struct Pass {
    pub graph: SampleGraph,
    pub assignment: Vec<usize>,
}

/// One reduction sweep over the whole graph.
pub fn reduction_pass(graph: &SampleGraph, k: usize) -> Result<Pass> {
    check_k(k)?;
    let n = graph.len();
    let mut unprocessed = vec![true; n];
    let mut assignment = vec![usize::MAX; n];
    let mut points = Vec::new();
    let mut cursor = 0;
    let mut last_merged: Vec<usize> = Vec::new();
    let mut remaining = n;
    while remaining > 0 {
        let follow = last_merged
            .iter()
            .flat_map(|&m| graph.adjacency[m].iter().copied())
            .filter(|&c| unprocessed[c])
            .min();
        let seed = match follow {
            Some(s) => s,
            None => {
                while !unprocessed[cursor] {
                    cursor += 1;
                }
                cursor
            }
        };
        let members = box_subgraph_within(graph, seed, k, &unprocessed);
        let anchor = graph.points[seed];
        let offsets: Vec<Vec3> = members
            .iter()
            .map(|&m| graph.frame.delta(&anchor, &graph.points[m]))
            .collect();
        let mean = anchor + mean_estimator(&offsets)?;
        let sample = points.len();
        points.push(graph.frame.canonical(mean));
        for &m in &members {
            unprocessed[m] = false;
            assignment[m] = sample;
        }
        remaining -= members.len();
        last_merged = members;
    }
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .map(|(a, b)| (assignment[a], assignment[b]))
        .filter(|(a, b)| a != b)
        .collect();
    let reduced = SampleGraph::from_edges(points, &edges, graph.origin_component, graph.frame)?;
    Ok(Pass { graph: reduced, assignment })
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub graph: SampleGraph,
    pub passes: usize,
    /// Largest displacement of the final pass, domain units.
    pub last_displacement: f64,
    pub converged: bool,
}

/// Repeats [`reduction_pass`] until no point moves by more than
/// `0.01·Δx`, or ten passes have run.
pub fn reduce(graph: &SampleGraph, k: usize) -> Result<Reduction> {
    check_k(k)?;
    if graph.is_empty() {
        return Err(Error::contract("cannot reduce an empty graph"));
    }
    let tol = CONVERGENCE_TOL * graph.frame.spacing;
    let mut current = graph.clone();
    let mut passes = 0;
    loop {
        let pass = reduction_pass(&current, k)?;
        passes += 1;
        let displacement = current
            .points
            .iter()
            .zip(&pass.assignment)
            .map(|(p, &s)| current.frame.distance(p, &pass.graph.points[s]))
            .fold(0.0, f64::max);
        current = pass.graph;
        let converged = displacement < tol;
        if converged || passes >= MAX_PASSES {
            return Ok(Reduction { graph: current, passes, last_displacement: displacement, converged });
        }
    }
}

/// Reduces one component of the global vortex graph.
pub fn reduce_component(
    graph: &VortexGraph,
    component: &Component,
    origin: usize,
    spacing: f64,
    k: usize,
) -> Result<Reduction> {
    if component.node_ids.is_empty() {
        return Err(Error::contract("empty component"));
    }
    reduce(&SampleGraph::from_component(graph, component, origin, spacing), k)
}
