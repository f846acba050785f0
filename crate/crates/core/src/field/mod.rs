//! The discretized complex order parameter and the quantities derived from
//! it: density `|Φ|²`, phase `arg Φ`, and superfluid velocity `∇σ`.

mod generators;
mod nlkg;
mod potential;

use std::f64::consts::PI;

pub use num_complex::Complex64;

pub use generators::{
    core_profile, gen_calm, gen_crossing_vortices, gen_straight_vortex, gen_uniform, gen_vortex_ring,
    random_ring_scene, RingSpec,
};
pub use nlkg::NlkgState;
pub use potential::{PotentialParams, RandomPotential};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Dims, GridFrame, Vec3};

/// A complex scalar field sampled on a regular grid with uniform spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField3D {
    dims: Dims,
    spacing: f64,
    time: f64,
    boundary: Boundary,
    values: Vec<Complex64>,
}

impl ComplexField3D {
    pub fn new(
        dims: Dims,
        spacing: f64,
        time: f64,
        boundary: Boundary,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        dims.validate()?;
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::contract(format!("spacing must be positive, got {spacing}")));
        }
        if values.len() != dims.len() {
            return Err(Error::contract(format!(
                "value count {} does not match dims {dims} ({} nodes)",
                values.len(),
                dims.len()
            )));
        }
        Ok(ComplexField3D { dims, spacing, time, boundary, values })
    }

    /// Builds a field by evaluating `f` at every node position.
    pub fn from_fn(
        dims: Dims,
        spacing: f64,
        boundary: Boundary,
        f: impl Fn(Vec3) -> Complex64,
    ) -> Result<Self> {
        dims.validate()?;
        let values = (0..dims.len())
            .map(|l| {
                let [i, j, k] = dims.coords(l);
                f(Vec3::new(i as f64, j as f64, k as f64) * spacing)
            })
            .collect();
        Self::new(dims, spacing, 0.0, boundary, values)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn frame(&self) -> GridFrame {
        GridFrame::new(self.dims, self.spacing, self.boundary)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn value(&self, index: [usize; 3]) -> Complex64 {
        self.values[self.dims.linear(index)]
    }

    pub fn node_position(&self, [i, j, k]: [usize; 3]) -> Vec3 {
        Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    /// Upper corner of the box in which positions are valid: the last node
    /// for clamped grids, one full period for periodic ones.
    pub fn extent(&self) -> Vec3 {
        let n = |a: usize| match self.boundary {
            Boundary::Clamped => (self.dims.0[a] - 1) as f64,
            Boundary::Periodic => self.dims.0[a] as f64,
        };
        Vec3::new(n(0), n(1), n(2)) * self.spacing
    }

    /// Clamps `p` into the valid box (identity for periodic grids).
    pub fn clamp_position(&self, p: Vec3) -> Vec3 {
        match self.boundary {
            Boundary::Periodic => p,
            Boundary::Clamped => {
                let hi = self.extent();
                Vec3::from_fn(|a, _| p[a].clamp(0.0, hi[a]))
            }
        }
    }

    /// Trilinear interpolation of the complex value at `position`.
    pub fn interpolate(&self, position: Vec3) -> Result<Complex64> {
        let mut base = [0usize; 3];
        let mut next = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..3 {
            let n = self.dims.0[a];
            let s = position[a] / self.spacing;
            match self.boundary {
                Boundary::Clamped => {
                    let hi = (n - 1) as f64;
                    let tol = 1e-9;
                    if !(s >= -tol && s <= hi + tol) {
                        return Err(Error::OutOfDomain { position: position.into() });
                    }
                    let s = s.clamp(0.0, hi);
                    let i = (s.floor() as usize).min(n - 2);
                    base[a] = i;
                    next[a] = i + 1;
                    frac[a] = s - i as f64;
                }
                Boundary::Periodic => {
                    if !s.is_finite() {
                        return Err(Error::OutOfDomain { position: position.into() });
                    }
                    let f = s.floor();
                    let i = (f as i64).rem_euclid(n as i64) as usize;
                    base[a] = i;
                    next[a] = (i + 1) % n;
                    frac[a] = s - f;
                }
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..8 {
            let mut idx = [0usize; 3];
            let mut w = 1.0;
            for a in 0..3 {
                if corner >> a & 1 == 1 {
                    idx[a] = next[a];
                    w *= frac[a];
                } else {
                    idx[a] = base[a];
                    w *= 1.0 - frac[a];
                }
            }
            acc += self.value(idx) * w;
        }
        Ok(acc)
    }

    /// Density `ρ = |Φ|²` with `Φ` trilinearly interpolated.
    pub fn density_at(&self, position: Vec3) -> Result<f64> {
        Ok(self.interpolate(position)?.norm_sqr())
    }

    /// Phase `arg Φ` in `(−π, π]`.
    pub fn phase_at_node(&self, index: [usize; 3]) -> Result<f64> {
        let index = self.wrap_index(index)?;
        phase_of(self.value(index)).ok_or(Error::SingularNode { index })
    }

    /// Central-difference gradient of the phase, each difference wrapped into
    /// `(−π, π]` before dividing by `2Δx`.
    pub fn velocity_at_node(&self, index: [usize; 3]) -> Result<Vec3> {
        let index = self.wrap_index(index)?;
        let mut u = Vec3::zeros();
        for a in 0..3 {
            let mut fwd = [0i64; 3];
            fwd[a] = 1;
            let mut bwd = [0i64; 3];
            bwd[a] = -1;
            let (Some(p), Some(m)) = (
                self.dims.offset(index, fwd, self.boundary),
                self.dims.offset(index, bwd, self.boundary),
            ) else {
                return Err(Error::UndefinedVelocity { index });
            };
            let (Some(sp), Some(sm)) = (phase_of(self.value(p)), phase_of(self.value(m))) else {
                return Err(Error::UndefinedVelocity { index });
            };
            u[a] = wrap_phase(sp - sm) / (2.0 * self.spacing);
        }
        if phase_of(self.value(index)).is_none() {
            return Err(Error::UndefinedVelocity { index });
        }
        Ok(u)
    }

    /// Mean of `|Φ|²` over all nodes.
    pub fn mean_density(&self) -> f64 {
        crate::analysis::compensated_sum(self.values.iter().map(|v| v.norm_sqr()))
            / self.values.len() as f64
    }

    /// Pointwise product; phases add and zero sets unite, which is how
    /// composite analytic scenes are assembled.
    pub fn product(&self, other: &ComplexField3D) -> Result<ComplexField3D> {
        if self.dims != other.dims || self.spacing != other.spacing {
            return Err(Error::contract("field product requires matching grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        ComplexField3D::new(self.dims, self.spacing, self.time, self.boundary, values)
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: Complex64) -> ComplexField3D {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    fn wrap_index(&self, index: [usize; 3]) -> Result<[usize; 3]> {
        match self.boundary {
            Boundary::Periodic => Ok(std::array::from_fn(|a| index[a] % self.dims.0[a])),
            Boundary::Clamped if self.dims.contains(index) => Ok(index),
            Boundary::Clamped => Err(Error::contract(format!(
                "node {index:?} outside grid {}",
                self.dims
            ))),
        }
    }
}

/// `arg z` with the branch cut placed so that `−1 ↦ +π`; `None` at `z = 0`.
#[inline]
pub fn phase_of(z: Complex64) -> Option<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return None;
    }
    let s = z.im.atan2(z.re);
    // atan2 returns −π for (negative, −0.0)
    Some(if s == -PI { PI } else { s })
}

/// Maps a phase difference into `(−π, π]`.
#[inline]
pub fn wrap_phase(d: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = d - two_pi * (d / two_pi).round();
    if w <= -PI {
        w += two_pi;
    } else if w > PI {
        w -= two_pi;
    }
    w
}
