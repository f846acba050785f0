//! Leapfrog integration of the nonlinear Klein-Gordon equation
//!
//! ```text
//! ∂²Φ/∂t² = ∇²Φ − (|Φ|² − 1)Φ − (λ + P(x, t))Φ
//! ```
//!
//! with a 7-point Laplacian. Clamped grids use zero-gradient (mirrored)
//! neighbors at the faces; periodic grids wrap.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ComplexField3D, RandomPotential};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Dims};

#[derive(Clone, Debug)]
pub struct NlkgState {
    pub current: ComplexField3D,
    pub previous: ComplexField3D,
    pub lambda: f64,
    pub dt: f64,
    step: u64,
}

/// Largest stable step for the 3D wave part: `Δx / √3`.
pub fn max_stable_dt(spacing: f64) -> f64 {
    spacing / 3f64.sqrt()
}

impl NlkgState {
    /// Starts from `initial` at rest (`∂ₜΦ = 0`): the previous slice is the
    /// Taylor estimate `Φ(−dt) ≈ Φ(0) + dt²/2 · ∂²ₜΦ(0)`.
    pub fn new(
        initial: ComplexField3D,
        lambda: f64,
        dt: f64,
        potential: Option<&RandomPotential>,
    ) -> Result<Self> {
        Self::with_velocity(initial, None, lambda, dt, potential)
    }

    /// As [`NlkgState::new`], with initial time derivative `velocity`
    /// (`None` for rest): `Φ(−dt) ≈ Φ(0) − dt·∂ₜΦ(0) + dt²/2 · ∂²ₜΦ(0)`.
    pub fn with_velocity(
        initial: ComplexField3D,
        velocity: Option<&[Complex64]>,
        lambda: f64,
        dt: f64,
        potential: Option<&RandomPotential>,
    ) -> Result<Self> {
        check_dt(dt, initial.spacing())?;
        if velocity.is_some_and(|v| v.len() != initial.values().len()) {
            return Err(Error::contract("velocity length does not match the field"));
        }
        let accel = acceleration(&initial, lambda, potential);
        let half = 0.5 * dt * dt;
        let values = initial
            .values()
            .iter()
            .zip(&accel)
            .enumerate()
            .map(|(i, (v, a))| v + a * half - velocity.map_or(Complex64::new(0.0, 0.0), |u| u[i] * dt))
            .collect();
        let previous = ComplexField3D::new(
            initial.dims(),
            initial.spacing(),
            initial.time() - dt,
            initial.boundary(),
            values,
        )?;
        Ok(NlkgState { current: initial, previous, lambda, dt, step: 0 })
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.current.time()
    }

    /// One leapfrog step, leaving `self` untouched.
    pub fn step(&self, potential: Option<&RandomPotential>) -> Result<NlkgState> {
        let mut next = self.clone();
        next.advance(potential)?;
        Ok(next)
    }

    /// One leapfrog step in place: `previous ← current`, `current ← next`.
    pub fn advance(&mut self, potential: Option<&RandomPotential>) -> Result<()> {
        check_dt(self.dt, self.current.spacing())?;
        if self.current.dims() != self.previous.dims() {
            return Err(Error::contract("current and previous slices differ in dims"));
        }
        let accel = acceleration(&self.current, self.lambda, potential);
        let dt2 = self.dt * self.dt;
        let step = self.step + 1;
        let cur = self.current.values();
        let mut next: Vec<Complex64> = self.previous.values().to_vec();
        next.par_iter_mut()
            .zip(cur.par_iter())
            .zip(accel.par_iter())
            .for_each(|((p, c), a)| *p = 2.0 * c - *p + a * dt2);
        if next.par_iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NumericalBlowup { step });
        }
        let time = self.current.time() + self.dt;
        let next = ComplexField3D::new(
            self.current.dims(),
            self.current.spacing(),
            time,
            self.current.boundary(),
            next,
        )?;
        self.previous = std::mem::replace(&mut self.current, next);
        self.step = step;
        Ok(())
    }

    /// Discrete energy at the half step between `previous` and `current`:
    /// `Σ (|∂ₜΦ|² + |∇Φ|² + (|Φ|² − 1)²/2 + λ|Φ|²) Δx³`, with gradient and
    /// potential terms averaged over the two slices.
    pub fn energy(&self) -> f64 {
        let dx3 = self.current.spacing().powi(3);
        let kinetic: f64 = self
            .current
            .values()
            .par_iter()
            .zip(self.previous.values().par_iter())
            .map(|(c, p)| (c - p).norm_sqr() / (self.dt * self.dt))
            .sum();
        let static_part = |f: &ComplexField3D| -> f64 {
            let dims = f.dims();
            let h2 = f.spacing() * f.spacing();
            (0..dims.len())
                .into_par_iter()
                .map(|l| {
                    let idx = dims.coords(l);
                    let v = f.values()[l];
                    let mut grad = 0.0;
                    for a in 0..3 {
                        let mut d = [0i64; 3];
                        d[a] = 1;
                        if let Some(n) = dims.offset(idx, d, f.boundary()) {
                            grad += (f.value(n) - v).norm_sqr() / h2;
                        }
                    }
                    let rho = v.norm_sqr();
                    grad + 0.5 * (rho - 1.0).powi(2) + self.lambda * rho
                })
                .sum()
        };
        (kinetic + 0.5 * (static_part(&self.current) + static_part(&self.previous))) * dx3
    }
}

fn check_dt(dt: f64, spacing: f64) -> Result<()> {
    let bound = max_stable_dt(spacing);
    if !(dt > 0.0 && dt <= bound * (1.0 + 1e-12)) {
        return Err(Error::contract(format!(
            "time step {dt} violates the stability bound 0 < dt <= {bound}"
        )));
    }
    Ok(())
}

/// `∇²Φ − (|Φ|² − 1)Φ − (λ + P)Φ` at every node.
fn acceleration(
    field: &ComplexField3D,
    lambda: f64,
    potential: Option<&RandomPotential>,
) -> Vec<Complex64> {
    let dims = field.dims();
    let potential_values = potential.map(|p| {
        let mut out = vec![0.0; dims.len()];
        p.fill(dims, field.spacing(), field.time(), &mut out);
        out
    });
    let inv_h2 = 1.0 / (field.spacing() * field.spacing());
    let values = field.values();
    let slab = dims.nx() * dims.ny();
    let mut out = vec![Complex64::new(0.0, 0.0); dims.len()];
    out.par_chunks_mut(slab).enumerate().for_each(|(k, chunk)| {
        for (offset, slot) in chunk.iter_mut().enumerate() {
            let l = k * slab + offset;
            let idx = [offset % dims.nx(), offset / dims.nx(), k];
            let v = values[l];
            let lap = laplacian(values, dims, field.boundary(), idx, v) * inv_h2;
            let p = potential_values.as_ref().map_or(0.0, |pv| pv[l]);
            *slot = lap - v * (v.norm_sqr() - 1.0) - v * (lambda + p);
        }
    });
    out
}

#[inline]
fn laplacian(
    values: &[Complex64],
    dims: Dims,
    boundary: Boundary,
    idx: [usize; 3],
    center: Complex64,
) -> Complex64 {
    let mut acc = -6.0 * center;
    for a in 0..3 {
        for step in [-1i64, 1] {
            let mut d = [0i64; 3];
            d[a] = step;
            let neighbor = match dims.offset(idx, d, boundary) {
                Some(n) => n,
                // zero-gradient face: mirror onto the interior neighbor
                None => {
                    d[a] = -step;
                    dims.offset(idx, d, boundary).unwrap_or(idx)
                }
            };
            acc += values[dims.linear(neighbor)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Vec3;

    fn uniform(n: usize, v: Complex64, boundary: Boundary) -> ComplexField3D {
        ComplexField3D::from_fn(Dims::cube(n).unwrap(), 1.0, boundary, |_| v).unwrap()
    }

    #[test]
    fn zero_field_is_fixed_point() {
        let f = uniform(6, Complex64::new(0.0, 0.0), Boundary::Periodic);
        let mut s = NlkgState::new(f.clone(), 1.0, 0.3, None).unwrap();
        for _ in 0..5 {
            s.advance(None).unwrap();
        }
        assert!(s.current.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn unit_field_is_stationary_without_coupling() {
        let f = uniform(6, Complex64::new(1.0, 0.0), Boundary::Clamped);
        let mut s = NlkgState::new(f, 0.0, 0.3, None).unwrap();
        for _ in 0..5 {
            s.advance(None).unwrap();
        }
        assert!(s.current.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!((s.time() - 1.5).abs() < 1e-12);
        assert_eq!(s.steps_taken(), 5);
    }

    #[test]
    fn step_is_pure() {
        let f = uniform(5, Complex64::new(0.5, 0.1), Boundary::Periodic);
        let s = NlkgState::new(f, 1.0, 0.2, None).unwrap();
        let a = s.step(None).unwrap();
        let b = s.step(None).unwrap();
        assert_eq!(a.current, b.current);
        assert_eq!(a.previous, s.current);
    }

    #[test]
    fn unstable_dt_rejected() {
        let f = uniform(5, Complex64::new(1.0, 0.0), Boundary::Periodic);
        assert!(matches!(NlkgState::new(f, 1.0, 0.6, None), Err(Error::Contract(_))));
    }

    #[test]
    fn blowup_is_reported_with_step() {
        let mut f = uniform(5, Complex64::new(1.0, 0.0), Boundary::Periodic);
        let dims = f.dims();
        let mut values = f.clone().into_values();
        values[dims.linear([2, 2, 2])] = Complex64::new(1e200, 0.0);
        f = ComplexField3D::new(dims, 1.0, 0.0, Boundary::Periodic, values).unwrap();
        let mut s = NlkgState::new(f, 1.0, 0.5, None).unwrap();
        let mut err = None;
        for _ in 0..10 {
            if let Err(e) = s.advance(None) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(err, Some(Error::NumericalBlowup { step }) if step >= 1));
    }

    #[test]
    fn laplacian_of_quadratic_is_exact_in_interior() {
        let f = ComplexField3D::from_fn(Dims::cube(6).unwrap(), 1.0, Boundary::Clamped, |p: Vec3| {
            Complex64::new(p.x * p.x + 2.0 * p.z * p.z, p.y * p.y)
        })
        .unwrap();
        let idx = [2, 3, 2];
        let lap = laplacian(f.values(), f.dims(), f.boundary(), idx, f.value(idx));
        assert!((lap - Complex64::new(6.0, 2.0)).norm() < 1e-12);
    }
}
