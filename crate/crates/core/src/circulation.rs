//! Ring-path circulation and vortex-node identification.
//!
//! Each node gets three circulations, one per coordinate plane, summed over
//! the closed path through its eight in-plane neighbors. A core piercing
//! the enclosed square yields `±2π`; otherwise the sum is zero.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{phase_of, wrap_phase, ComplexField3D};
use crate::grid::{Axis, Dims};

pub const DEFAULT_EPSILON: f64 = PI;

/// In-plane `(u, v)` offsets of the ring path, counter-clockwise about the
/// plane normal.
pub const RING_PATH: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexNode {
    pub index: [usize; 3],
    /// Signed circulation of the plane with the largest `|C|`.
    pub circulation: f64,
    /// Normal of that plane.
    pub axis: Axis,
}

impl VortexNode {
    pub fn linear(&self, dims: Dims) -> usize {
        dims.linear(self.index)
    }

    /// `+1` or `-1` by circulation sense.
    pub fn sign(&self) -> i32 {
        if self.circulation >= 0.0 {
            1
        } else {
            -1
        }
    }
}

/// Vortex nodes plus the nodes that could not be evaluated.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Detection {
    pub nodes: Vec<VortexNode>,
    /// Nodes with a singular (exactly zero) value on some ring path.
    pub singular_skips: usize,
    /// Clamped-boundary nodes where no plane path fits inside the grid.
    pub boundary_skips: usize,
}

fn path_nodes(dims: Dims, field: &ComplexField3D, index: [usize; 3], axis: Axis) -> Result<[[usize; 3]; 8]> {
    let (u, v) = axis.in_plane();
    let mut out = [[0usize; 3]; 8];
    for (slot, &(du, dv)) in out.iter_mut().zip(RING_PATH.iter()) {
        let mut delta = [0i64; 3];
        delta[u.index()] = du;
        delta[v.index()] = dv;
        *slot = dims
            .offset(index, delta, field.boundary())
            .ok_or(Error::PathOutsideGrid { index, axis })?;
    }
    Ok(out)
}

fn ring_sum(phases: [f64; 8]) -> f64 {
    (0..8).map(|j| wrap_phase(phases[(j + 1) % 8] - phases[j])).sum()
}

/// Circulation around `index` in the plane normal to `axis`.
pub fn plane_circulation(field: &ComplexField3D, index: [usize; 3], axis: Axis) -> Result<f64> {
    let dims = field.dims();
    if !dims.contains(index) {
        return Err(Error::contract(format!("node {index:?} outside grid {dims}")));
    }
    let nodes = path_nodes(dims, field, index, axis)?;
    let mut phases = [0.0; 8];
    for (p, n) in phases.iter_mut().zip(nodes) {
        *p = phase_of(field.value(n)).ok_or(Error::SingularPath { index, axis, at: n })?;
    }
    Ok(ring_sum(phases))
}

/// Scans every node and keeps those whose largest plane circulation exceeds
/// `epsilon` in magnitude. Output is sorted by linear index.
pub fn identify_vortex_nodes(field: &ComplexField3D, epsilon: f64) -> Result<Detection> {
    if !(epsilon > 0.0) {
        return Err(Error::contract(format!("epsilon must be positive, got {epsilon}")));
    }
    let dims = field.dims();
    // phases once per node; NaN marks a singular node
    let phases: Vec<f64> = field
        .values()
        .par_iter()
        .map(|&z| phase_of(z).unwrap_or(f64::NAN))
        .collect();
    let slab = dims.nx() * dims.ny();

    #[derive(Default)]
    struct Partial {
        nodes: Vec<VortexNode>,
        singular: usize,
        boundary: usize,
    }

    let partials: Vec<Partial> = (0..dims.nz())
        .into_par_iter()
        .map(|k| {
            let mut part = Partial::default();
            for offset in 0..slab {
                let index = [offset % dims.nx(), offset / dims.nx(), k];
                let mut best: Option<(f64, Axis)> = None;
                let mut evaluated = false;
                let mut singular = false;
                for axis in Axis::ALL {
                    let Ok(path) = path_nodes(dims, field, index, axis) else {
                        continue;
                    };
                    evaluated = true;
                    let ring: [f64; 8] = std::array::from_fn(|j| phases[dims.linear(path[j])]);
                    if ring.iter().any(|p| p.is_nan()) {
                        singular = true;
                        continue;
                    }
                    let c = ring_sum(ring);
                    // strict comparison keeps the earliest axis on ties
                    if best.is_none_or(|(b, _)| c.abs() > b.abs()) {
                        best = Some((c, axis));
                    }
                }
                if !evaluated {
                    part.boundary += 1;
                    continue;
                }
                if singular {
                    part.singular += 1;
                }
                if let Some((c, axis)) = best {
                    if c.abs() > epsilon {
                        part.nodes.push(VortexNode { index, circulation: c, axis });
                    }
                }
            }
            part
        })
        .collect();

    let mut detection = Detection::default();
    for part in partials {
        detection.nodes.extend(part.nodes);
        detection.singular_skips += part.singular;
        detection.boundary_skips += part.boundary;
    }
    Ok(detection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gen_straight_vortex, gen_uniform};
    use num_complex::Complex64;

    fn two_pi_multiple(c: f64) -> bool {
        let m = c / (2.0 * PI);
        (c - 2.0 * PI * m.round()).abs() < 1e-9
    }

    #[test]
    fn uniform_field_has_zero_circulation_and_no_nodes() {
        let f = gen_uniform(Dims::cube(6).unwrap(), 1.0, Complex64::new(0.3, -0.4)).unwrap();
        for axis in Axis::ALL {
            assert_eq!(plane_circulation(&f, [2, 2, 2], axis).unwrap(), 0.0);
        }
        let d = identify_vortex_nodes(&f, DEFAULT_EPSILON).unwrap();
        assert!(d.nodes.is_empty());
        assert_eq!(d.singular_skips, 0);
    }

    #[test]
    fn node_next_to_z_core() {
        let dims = Dims::cube(12).unwrap();
        // core at node coords (5.3, 5.6)
        let f = gen_straight_vortex(dims, 0.5, Axis::Z, [2.65, 2.8], 1).unwrap();
        let c = plane_circulation(&f, [5, 5, 4], Axis::Z).unwrap();
        assert!((c - 2.0 * PI).abs() < 1e-9);
        let cx = plane_circulation(&f, [5, 5, 4], Axis::X).unwrap();
        assert!(cx.abs() < 1e-9);
        let far = plane_circulation(&f, [9, 2, 4], Axis::Z).unwrap();
        assert!(far.abs() < 1e-9);
    }

    #[test]
    fn circulations_are_quantized() {
        let dims = Dims::cube(10).unwrap();
        let f = gen_straight_vortex(dims, 0.5, Axis::Y, [2.13, 1.91], -1).unwrap();
        for l in 0..dims.len() {
            for axis in Axis::ALL {
                if let Ok(c) = plane_circulation(&f, dims.coords(l), axis) {
                    assert!(two_pi_multiple(c), "{c}");
                }
            }
        }
    }

    #[test]
    fn path_outside_clamped_grid_is_signalled() {
        let f = gen_uniform(Dims::cube(5).unwrap(), 1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            plane_circulation(&f, [0, 2, 2], Axis::Z),
            Err(Error::PathOutsideGrid { .. })
        ));
        assert!(plane_circulation(&f, [0, 2, 2], Axis::X).is_ok());
    }

    #[test]
    fn singular_path_is_signalled_and_counted() {
        let dims = Dims::cube(5).unwrap();
        let mut values = vec![Complex64::new(1.0, 0.0); dims.len()];
        values[dims.linear([2, 2, 2])] = Complex64::new(0.0, 0.0);
        let f = ComplexField3D::new(dims, 1.0, 0.0, Default::default(), values).unwrap();
        assert!(matches!(
            plane_circulation(&f, [1, 2, 2], Axis::Z),
            Err(Error::SingularPath { at: [2, 2, 2], .. })
        ));
        let d = identify_vortex_nodes(&f, PI).unwrap();
        assert!(d.singular_skips > 0);
        assert!(d.nodes.is_empty());
    }

    #[test]
    fn nonpositive_epsilon_rejected() {
        let f = gen_uniform(Dims::cube(5).unwrap(), 1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!(identify_vortex_nodes(&f, 0.0).is_err());
    }
}
