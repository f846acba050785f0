//! Sparse graph over vortex nodes and its connected components.
//!
//! Vortex nodes are linearized x-fastest and linked to their 6-neighbors
//! along grid lines. Construction can be split into blocks that each build a
//! local graph with local indices; the local graphs are then merged and
//! their indices rewritten to global ones.

use rayon::prelude::*;

use crate::circulation::VortexNode;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Dims};

const NEIGHBORS: [[i64; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

#[derive(Clone, Debug, PartialEq)]
pub struct VortexGraph {
    pub nodes: Vec<VortexNode>,
    /// Sorted neighbor lists, indices into `nodes`.
    pub adjacency: Vec<Vec<usize>>,
    pub dims: Dims,
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Ascending indices into the parent graph's nodes.
    pub node_ids: Vec<usize>,
}

impl VortexGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Position of the node with linear grid index `linear`, if present.
    pub fn find(&self, linear: usize) -> Option<usize> {
        self.nodes
            .binary_search_by_key(&linear, |n| self.dims.linear(n.index))
            .ok()
    }
}

struct LocalGraph {
    /// Global positions of the block's nodes, ascending.
    members: Vec<usize>,
    /// Edges between block members, in local indices.
    local_edges: Vec<Vec<usize>>,
    /// Edges leaving the block, as linear grid indices of the far node.
    external: Vec<Vec<usize>>,
}

fn block_ranges(n: usize, blocks: usize) -> Vec<usize> {
    (0..=blocks).map(|b| n * b / blocks).collect()
}

/// Builds the 6-connected graph over `nodes`, optionally in `blocks`
/// independent pieces. The result does not depend on `blocks`.
pub fn build_global_graph(
    nodes: Vec<VortexNode>,
    dims: Dims,
    boundary: Boundary,
    blocks: [usize; 3],
) -> Result<VortexGraph> {
    for a in 0..3 {
        if blocks[a] == 0 || blocks[a] > dims.0[a] {
            return Err(Error::contract(format!(
                "block counts {blocks:?} must lie in 1..=dims {dims}"
            )));
        }
    }
    let linear: Vec<usize> = nodes.iter().map(|n| n.linear(dims)).collect();
    for (i, n) in nodes.iter().enumerate() {
        if !dims.contains(n.index) {
            return Err(Error::contract(format!("node {:?} outside grid {dims}", n.index)));
        }
        if i > 0 && linear[i] <= linear[i - 1] {
            return Err(Error::contract(format!(
                "vortex nodes must be sorted and unique by linear index (position {i})"
            )));
        }
    }

    let cuts: [Vec<usize>; 3] = std::array::from_fn(|a| block_ranges(dims.0[a], blocks[a]));
    let block_of = |index: [usize; 3]| -> usize {
        let b: [usize; 3] = std::array::from_fn(|a| cuts[a].partition_point(|&c| c <= index[a]) - 1);
        b[0] + blocks[0] * (b[1] + blocks[1] * b[2])
    };
    let block_count = blocks.iter().product::<usize>();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); block_count];
    for (g, n) in nodes.iter().enumerate() {
        members[block_of(n.index)].push(g);
    }

    let locals: Vec<LocalGraph> = members
        .into_par_iter()
        .map(|members| {
            let keys: Vec<usize> = members.iter().map(|&g| linear[g]).collect();
            let mut local_edges = vec![Vec::new(); members.len()];
            let mut external = vec![Vec::new(); members.len()];
            for (li, &g) in members.iter().enumerate() {
                let index = nodes[g].index;
                for delta in NEIGHBORS {
                    let Some(nb) = dims.offset(index, delta, boundary) else {
                        continue;
                    };
                    let key = dims.linear(nb);
                    match keys.binary_search(&key) {
                        Ok(lj) => local_edges[li].push(lj),
                        Err(_) => external[li].push(key),
                    }
                }
            }
            LocalGraph { members, local_edges, external }
        })
        .collect();

    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for local in locals {
        for (li, &g) in local.members.iter().enumerate() {
            let adj = &mut adjacency[g];
            adj.extend(local.local_edges[li].iter().map(|&lj| local.members[lj]));
            adj.extend(
                local.external[li]
                    .iter()
                    .filter_map(|key| linear.binary_search(key).ok()),
            );
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    Ok(VortexGraph { nodes, adjacency, dims, boundary })
}

/// Connected components by iterative depth-first traversal, ordered by
/// their smallest node index.
pub fn extract_components(graph: &VortexGraph) -> Vec<Component> {
    let mut visited = vec![false; graph.len()];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in 0..graph.len() {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let mut node_ids = Vec::new();
        while let Some(n) = stack.pop() {
            node_ids.push(n);
            for &m in &graph.adjacency[n] {
                if !visited[m] {
                    visited[m] = true;
                    stack.push(m);
                }
            }
        }
        node_ids.sort_unstable();
        components.push(Component { node_ids });
    }
    components
}
