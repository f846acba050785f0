//! Analytic vortex fields with known singularity sets, used as oracles.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ComplexField3D;
use crate::error::{Error, Result};
use crate::grid::{Axis, Boundary, Dims, Vec3};

/// Amplitude profile `f(r) = r / √(r² + 1)` of an isolated core: a simple
/// zero at the axis, unit density far away.
#[inline]
pub fn core_profile(r: f64) -> f64 {
    r / (r * r + 1.0).sqrt()
}

pub fn gen_uniform(dims: Dims, spacing: f64, value: Complex64) -> Result<ComplexField3D> {
    ComplexField3D::from_fn(dims, spacing, Boundary::Clamped, |_| value)
}

/// Calm state `Φ = 1` plus uniform complex noise of amplitude `noise` per
/// component, on the given boundary. A purely real start stays real under
/// real forcing; the noise breaks that symmetry so phase defects can form.
pub fn gen_calm(dims: Dims, spacing: f64, boundary: Boundary, noise: f64, seed: u64) -> Result<ComplexField3D> {
    dims.validate()?;
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::contract(format!("noise amplitude must be non-negative, got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..dims.len())
        .map(|_| {
            let (re, im): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            Complex64::new(1.0 + noise * re, noise * im)
        })
        .collect();
    ComplexField3D::new(dims, spacing, 0.0, boundary, values)
}

/// Straight vortex parallel to `axis`, core at `core_offset` (domain units,
/// in-plane coordinates ordered as [`Axis::in_plane`]).
pub fn gen_straight_vortex(
    dims: Dims,
    spacing: f64,
    axis: Axis,
    core_offset: [f64; 2],
    winding: i32,
) -> Result<ComplexField3D> {
    dims.validate()?;
    if winding != 1 && winding != -1 {
        return Err(Error::contract(format!("winding must be ±1, got {winding}")));
    }
    let (u, v) = axis.in_plane();
    let hi = [
        (dims.0[u.index()] - 1) as f64 * spacing,
        (dims.0[v.index()] - 1) as f64 * spacing,
    ];
    for (c, h) in core_offset.iter().zip(hi) {
        if !(*c > 0.0 && *c < h) {
            return Err(Error::contract(format!(
                "core offset {core_offset:?} must lie strictly inside the cross-section"
            )));
        }
    }
    let on_grid = |c: f64| {
        let s = c / spacing;
        (s - s.round()).abs() < 1e-9
    };
    if on_grid(core_offset[0]) && on_grid(core_offset[1]) {
        return Err(Error::contract(format!(
            "core offset {core_offset:?} coincides with a grid node"
        )));
    }
    let w = winding as f64;
    ComplexField3D::from_fn(dims, spacing, Boundary::Clamped, |p| {
        let du = p[u.index()] - core_offset[0];
        let dv = p[v.index()] - core_offset[1];
        let r = du.hypot(dv);
        Complex64::from_polar(core_profile(r), w * dv.atan2(du))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub center: [f64; 3],
    pub radius: f64,
    pub normal: Axis,
}

impl RingSpec {
    /// Point on the analytic circle at angle `t` (measured from the first
    /// in-plane axis toward the second).
    pub fn point(&self, t: f64) -> Vec3 {
        let (u, v) = self.normal.in_plane();
        Vec3::from(self.center) + self.radius * (t.cos() * u.unit() + t.sin() * v.unit())
    }

    /// Euclidean distance from `p` to the circle.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let d = p - Vec3::from(self.center);
        let n = self.normal.unit();
        let h = d.dot(&n);
        let s = (d - h * n).norm();
        (s - self.radius).hypot(h)
    }
}

/// Vortex ring: the product of two opposite-winding 2D vortices placed at
/// `±radius` in every meridional half-plane about the ring axis.
pub fn gen_vortex_ring(
    dims: Dims,
    spacing: f64,
    center: Vec3,
    radius: f64,
    normal_axis: Axis,
) -> Result<ComplexField3D> {
    dims.validate()?;
    let clearance = 4.0 * spacing;
    if radius < clearance {
        return Err(Error::contract(format!(
            "ring radius {radius} below the minimum {clearance}"
        )));
    }
    for a in Axis::ALL {
        let reach = if a == normal_axis { clearance } else { radius + clearance };
        let hi = (dims.0[a.index()] - 1) as f64 * spacing;
        let c = center[a.index()];
        if c - reach < 0.0 || c + reach > hi {
            return Err(Error::contract(format!(
                "ring at {:?} radius {radius} violates the {clearance} boundary clearance along {a}",
                <[f64; 3]>::from(center)
            )));
        }
    }
    let n = normal_axis.unit();
    ComplexField3D::from_fn(dims, spacing, Boundary::Clamped, |p| {
        let d = p - center;
        let h = d.dot(&n);
        let s = (d - h * n).norm();
        let (r1, t1) = ((s - radius).hypot(h), h.atan2(s - radius));
        let (r2, t2) = ((s + radius).hypot(h), h.atan2(s + radius));
        Complex64::from_polar(core_profile(r1) * core_profile(r2), t1 - t2)
    })
}

/// A `+z` and a `+x` straight vortex whose cores intersect at `point`.
pub fn gen_crossing_vortices(dims: Dims, spacing: f64, point: Vec3) -> Result<ComplexField3D> {
    let along_z = gen_straight_vortex(dims, spacing, Axis::Z, [point.x, point.y], 1)?;
    let along_x = gen_straight_vortex(dims, spacing, Axis::X, [point.y, point.z], 1)?;
    along_z.product(&along_x)
}

/// Product of `count` non-touching rings with random centers, radii and
/// orientations, seeded for reproducibility.
pub fn random_ring_scene(
    dims: Dims,
    spacing: f64,
    count: usize,
    radius_range: (f64, f64),
    seed: u64,
) -> Result<(ComplexField3D, Vec<RingSpec>)> {
    dims.validate()?;
    let (rmin, rmax) = radius_range;
    if !(rmin >= 4.0 * spacing && rmax >= rmin) {
        return Err(Error::contract(format!("invalid radius range {radius_range:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clearance = 4.0 * spacing;
    let mut rings: Vec<RingSpec> = Vec::with_capacity(count);
    let mut attempts = 0;
    while rings.len() < count {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::contract(format!(
                "could not place {count} disjoint rings in {dims}"
            )));
        }
        let radius = rng.gen_range(rmin..=rmax);
        let normal = Axis::ALL[rng.gen_range(0..3)];
        let mut center = [0.0; 3];
        let mut fits = true;
        for a in Axis::ALL {
            let reach = if a == normal { clearance } else { radius + clearance };
            let hi = (dims.0[a.index()] - 1) as f64 * spacing - reach;
            if hi <= reach {
                fits = false;
                break;
            }
            center[a.index()] = rng.gen_range(reach..hi);
        }
        if !fits {
            continue;
        }
        let c = Vec3::from(center);
        let clear = rings.iter().all(|other| {
            (Vec3::from(other.center) - c).norm() > other.radius + radius + 3.0 * spacing
        });
        if clear {
            rings.push(RingSpec { center, radius, normal });
        }
    }
    let mut field = gen_uniform(dims, spacing, Complex64::new(1.0, 0.0))?;
    for ring in &rings {
        let f = gen_vortex_ring(dims, spacing, Vec3::from(ring.center), ring.radius, ring.normal)?;
        field = field.product(&f)?;
    }
    Ok((field, rings))
}
