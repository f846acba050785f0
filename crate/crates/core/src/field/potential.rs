//! Space-time correlated random forcing: i.i.d. uniform values on a coarse
//! lattice, blended by separable cosine easing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Dims, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    /// Spatial lattice pitch.
    pub x0: f64,
    /// Temporal lattice pitch.
    pub t0: f64,
    /// Upper bound of the lattice values.
    pub v0: f64,
    pub seed: u64,
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams { x0: 2.0, t0: 0.16, v0: 55.0, seed: 0 }
    }
}

impl PotentialParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 > 0.0 && self.t0 > 0.0 && self.v0 >= 0.0) {
            return Err(Error::contract(format!(
                "potential requires X0 > 0, T0 > 0, V0 >= 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Deterministic sampler `P(x, t)`.
#[derive(Clone, Debug)]
pub struct RandomPotential {
    params: PotentialParams,
    /// Lattice period per axis when the domain length is a whole number of
    /// pitches, so the forcing is itself periodic.
    period: [Option<i64>; 3],
}

#[inline]
fn ease(s: f64) -> f64 {
    0.5 * (1.0 - (PI * s).cos())
}

// SplitMix64 finalizer; gives every lattice point an independent stream.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomPotential {
    pub fn new(params: PotentialParams) -> Result<Self> {
        params.validate()?;
        Ok(RandomPotential { params, period: [None; 3] })
    }

    /// Sampler whose lattice wraps with a periodic box of size `extent`
    /// along every axis where the extent is a whole number of pitches.
    pub fn periodic(params: PotentialParams, extent: Vec3) -> Result<Self> {
        params.validate()?;
        let period = std::array::from_fn(|a| {
            let m = extent[a] / params.x0;
            let r = m.round();
            ((m - r).abs() < 1e-9 && r >= 1.0).then_some(r as i64)
        });
        Ok(RandomPotential { params, period })
    }

    pub fn params(&self) -> &PotentialParams {
        &self.params
    }

    /// The i.i.d. value drawn at lattice point `cell` of time slab `slab`.
    pub fn lattice_value(&self, cell: [i64; 3], slab: i64) -> f64 {
        let mut h = mix(self.params.seed);
        for (a, &c) in cell.iter().enumerate() {
            let c = match self.period[a] {
                Some(p) => c.rem_euclid(p),
                None => c,
            };
            h = mix(h ^ c as u64);
        }
        h = mix(h ^ slab as u64);
        let unit = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        unit * self.params.v0
    }

    pub fn sample(&self, position: Vec3, time: f64) -> f64 {
        let st = time / self.params.t0;
        let n0 = st.floor();
        let wt = ease(st - n0);
        let mut cell = [0i64; 3];
        let mut w = [0.0; 3];
        for a in 0..3 {
            let s = position[a] / self.params.x0;
            let f = s.floor();
            cell[a] = f as i64;
            w[a] = ease(s - f);
        }
        let mut acc = 0.0;
        for dt in 0..2 {
            let tw = if dt == 1 { wt } else { 1.0 - wt };
            if tw == 0.0 {
                continue;
            }
            for corner in 0..8 {
                let mut weight = tw;
                let mut c = cell;
                for a in 0..3 {
                    if corner >> a & 1 == 1 {
                        c[a] += 1;
                        weight *= w[a];
                    } else {
                        weight *= 1.0 - w[a];
                    }
                }
                if weight != 0.0 {
                    acc += weight * self.lattice_value(c, n0 as i64 + dt);
                }
            }
        }
        acc
    }

    /// Evaluates `P(x, t)` at every node of a grid (x-fastest), reusing the
    /// lattice values across nodes.
    pub fn fill(&self, dims: Dims, spacing: f64, time: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), dims.len());
        let st = time / self.params.t0;
        let n0 = st.floor() as i64;
        let wt = ease(st - st.floor());
        // per-axis lattice cell and easing weight of every grid line
        let axis_tables: [Vec<(i64, f64)>; 3] = std::array::from_fn(|a| {
            (0..dims.0[a])
                .map(|i| {
                    let s = i as f64 * spacing / self.params.x0;
                    let f = s.floor();
                    (f as i64, ease(s - f))
                })
                .collect()
        });
        let lo: [i64; 3] = std::array::from_fn(|a| axis_tables[a].first().map_or(0, |c| c.0));
        let hi: [i64; 3] = std::array::from_fn(|a| axis_tables[a].last().map_or(0, |c| c.0) + 1);
        let span: [usize; 3] = std::array::from_fn(|a| (hi[a] - lo[a] + 1) as usize);
        let slab = |n: i64| -> Vec<f64> {
            let mut v = Vec::with_capacity(span.iter().product());
            for k in lo[2]..=hi[2] {
                for j in lo[1]..=hi[1] {
                    for i in lo[0]..=hi[0] {
                        v.push(self.lattice_value([i, j, k], n));
                    }
                }
            }
            v
        };
        let slabs = [slab(n0), slab(n0 + 1)];
        let lattice = |s: usize, c: [i64; 3]| {
            let l = (c[0] - lo[0]) as usize
                + span[0] * ((c[1] - lo[1]) as usize + span[1] * (c[2] - lo[2]) as usize);
            slabs[s][l]
        };
        let [nx, ny, _] = dims.0;
        for (l, slot) in out.iter_mut().enumerate() {
            let idx = [l % nx, (l / nx) % ny, l / (nx * ny)];
            let mut acc = 0.0;
            for (s, tw) in [(0usize, 1.0 - wt), (1, wt)] {
                for corner in 0..8 {
                    let mut weight = tw;
                    let mut c = [0i64; 3];
                    for a in 0..3 {
                        let (cell, w) = axis_tables[a][idx[a]];
                        if corner >> a & 1 == 1 {
                            c[a] = cell + 1;
                            weight *= w;
                        } else {
                            c[a] = cell;
                            weight *= 1.0 - w;
                        }
                    }
                    acc += weight * lattice(s, c);
                }
            }
            *slot = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampler() -> RandomPotential {
        RandomPotential::new(PotentialParams { x0: 2.0, t0: 0.16, v0: 55.0, seed: 7 }).unwrap()
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = PotentialParams { x0: 0.0, ..Default::default() };
        assert!(RandomPotential::new(bad).is_err());
        let bad = PotentialParams { v0: -1.0, ..Default::default() };
        assert!(RandomPotential::new(bad).is_err());
    }

    #[test]
    fn lattice_points_return_drawn_values() {
        let p = sampler();
        let v = p.sample(Vec3::new(4.0, -2.0, 6.0), 0.0);
        assert_eq!(v, p.lattice_value([2, -1, 3], 0));
    }

    #[test]
    fn spatial_midpoint_is_arithmetic_mean() {
        let p = sampler();
        let a = p.lattice_value([1, 1, 1], 0);
        let b = p.lattice_value([2, 1, 1], 0);
        let mid = p.sample(Vec3::new(3.0, 2.0, 2.0), 0.0);
        assert!((mid - 0.5 * (a + b)).abs() < 1e-12);
    }

    #[test]
    fn values_bounded() {
        let p = sampler();
        for n in 0..500 {
            let x = Vec3::new(n as f64 * 0.37, n as f64 * -0.91, (n * n) as f64 * 0.013);
            let v = p.sample(x, n as f64 * 0.0571);
            assert!((0.0..=55.0).contains(&v));
        }
    }

    #[test]
    fn fill_matches_pointwise_sampling() {
        let p = sampler();
        let dims = Dims::new(6, 5, 4).unwrap();
        let mut out = vec![0.0; dims.len()];
        p.fill(dims, 0.7, 0.21, &mut out);
        for (l, &v) in out.iter().enumerate() {
            let [i, j, k] = dims.coords(l);
            let x = Vec3::new(i as f64, j as f64, k as f64) * 0.7;
            assert!((v - p.sample(x, 0.21)).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_lattice_wraps() {
        let p = RandomPotential::periodic(
            PotentialParams { seed: 3, ..Default::default() },
            Vec3::new(32.0, 32.0, 32.0),
        )
        .unwrap();
        assert_eq!(p.lattice_value([16, 0, 0], 1), p.lattice_value([0, 0, 0], 1));
        let a = p.sample(Vec3::new(0.3, 1.0, 5.0), 0.5);
        let b = p.sample(Vec3::new(32.3, 1.0, 5.0), 0.5);
        assert!((a - b).abs() < 1e-12);
    }
}
