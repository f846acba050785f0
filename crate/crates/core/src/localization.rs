//! Sub-grid refinement of sample points: minimize the interpolated density
//! inside the plane through the point normal to the local core tangent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField3D;
use crate::grid::Vec3;
use crate::reduction::SampleGraph;

/// Below this magnitude the pseudo-vorticity gives no usable direction.
pub const DEGENERATE_MAGNITUDE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizeConfig {
    pub max_iters: usize,
    /// Stop once the projected density gradient falls below this.
    pub grad_tol: f64,
    /// Initial line-search step, domain units.
    pub step_init: f64,
    /// Maximum displacement from the starting point, domain units.
    pub trust_radius: f64,
}

impl LocalizeConfig {
    /// Defaults scaled to `field`: tolerance `1e-6` of the mean density,
    /// first step `Δx/4`, trust radius `Δx`.
    pub fn for_field(field: &ComplexField3D) -> Self {
        let dx = field.spacing();
        LocalizeConfig {
            max_iters: 100,
            grad_tol: 1e-6 * field.mean_density(),
            step_init: 0.25 * dx,
            trust_radius: dx,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.grad_tol > 0.0 && self.step_init > 0.0 && self.trust_radius > 0.0) {
            return Err(Error::contract(format!("localization config must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Symmetric difference `(f(p + h·e) − f(p − h·e)) / |Δ|` with the stencil
/// clipped to the domain on clamped grids.
fn directional_difference<T, F>(field: &ComplexField3D, p: Vec3, e: Vec3, h: f64, f: F) -> Result<T>
where
    T: std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
    F: Fn(Vec3) -> Result<T>,
{
    let plus = field.clamp_position(p + h * e);
    let minus = field.clamp_position(p - h * e);
    let span = (plus - minus).dot(&e);
    if span <= 0.0 {
        return Err(Error::OutOfDomain { position: p.into() });
    }
    Ok((f(plus)? - f(minus)?) / span)
}

/// `∇(Re Φ) × ∇(Im Φ)` from half-cell central differences of the
/// trilinearly interpolated field. Aligned with the core tangent in the
/// positive circulation sense; not normalized.
pub fn pseudo_vorticity(field: &ComplexField3D, point: Vec3) -> Result<Vec3> {
    field.interpolate(point)?;
    let h = 0.5 * field.spacing();
    let mut grad_re = Vec3::zeros();
    let mut grad_im = Vec3::zeros();
    for a in 0..3 {
        let mut e = Vec3::zeros();
        e[a] = 1.0;
        let d = directional_difference(field, point, e, h, |q| field.interpolate(q))?;
        grad_re[a] = d.re;
        grad_im[a] = d.im;
    }
    let w = grad_re.cross(&grad_im);
    if !(w.norm() >= DEGENERATE_MAGNITUDE) {
        return Err(Error::DegenerateDirection { position: point.into() });
    }
    Ok(w)
}

fn density_gradient(field: &ComplexField3D, p: Vec3) -> Result<Vec3> {
    let h = 0.1 * field.spacing();
    let mut g = Vec3::zeros();
    for a in 0..3 {
        let mut e = Vec3::zeros();
        e[a] = 1.0;
        g[a] = directional_difference(field, p, e, h, |q| field.density_at(q))?;
    }
    Ok(g)
}

/// Projected gradient descent of the density within the plane through
/// `point` normal to `tangent`, with halving backtracking. The result never
/// has higher density than `point` and never leaves the trust radius.
pub fn localize_sample(
    field: &ComplexField3D,
    point: Vec3,
    tangent: Vec3,
    config: &LocalizeConfig,
) -> Result<Vec3> {
    config.validate()?;
    let norm = tangent.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::contract("tangent must be nonzero"));
    }
    let t = tangent / norm;
    let project = |v: Vec3| v - v.dot(&t) * t;
    let min_step = 1e-9 * field.spacing();

    let mut x = point;
    let mut rho = field.density_at(x)?;
    for _ in 0..config.max_iters {
        let g = project(density_gradient(field, x)?);
        let gnorm = g.norm();
        if gnorm < config.grad_tol {
            break;
        }
        let dir = -g / gnorm;
        let mut step = config.step_init;
        let mut accepted = None;
        while step >= min_step {
            // re-project the displacement so it stays exactly in-plane
            let mut candidate = point + project(x + step * dir - point);
            let mut clipped = false;
            let disp = candidate - point;
            if disp.norm() > config.trust_radius {
                candidate = point + disp * (config.trust_radius / disp.norm());
                clipped = true;
            }
            if let Ok(r) = field.density_at(candidate) {
                if r < rho {
                    accepted = Some((candidate, r, clipped));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((candidate, r, clipped)) => {
                x = candidate;
                rho = r;
                if clipped {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalizeReport {
    /// Points whose pseudo-vorticity was degenerate; the chord to an
    /// adjacent sample was used instead.
    pub chord_fallbacks: usize,
    /// Points left in place: no tangent could be formed at all.
    pub unmoved: usize,
}

/// Tangent at sample `i`: pseudo-vorticity, else the chord through the
/// adjacent samples.
pub fn sample_tangent(field: &ComplexField3D, graph: &SampleGraph, i: usize) -> Option<(Vec3, bool)> {
    if let Ok(w) = pseudo_vorticity(field, graph.points[i]) {
        return Some((w, false));
    }
    let p = graph.points[i];
    let adj = &graph.adjacency[i];
    let chord = match adj.as_slice() {
        [] => return None,
        [a] => graph.frame.delta(&p, &graph.points[*a]),
        [a, b, ..] => graph.frame.delta(&graph.points[*a], &graph.points[*b]),
    };
    (chord.norm() > 0.0).then_some((chord, true))
}

/// Localizes every sample point; adjacency is untouched.
pub fn localize_graph(
    field: &ComplexField3D,
    samples: &SampleGraph,
    config: &LocalizeConfig,
) -> Result<(SampleGraph, LocalizeReport)> {
    config.validate()?;
    let moved: Vec<Result<(Vec3, u8)>> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let p = samples.points[i];
            match sample_tangent(field, samples, i) {
                Some((t, chord)) => {
                    let q = localize_sample(field, p, t, config)?;
                    Ok((q, if chord { 1 } else { 0 }))
                }
                None => Ok((p, 2)),
            }
        })
        .collect();
    let mut report = LocalizeReport::default();
    let mut points = Vec::with_capacity(samples.len());
    for m in moved {
        let (q, tag) = m?;
        match tag {
            1 => report.chord_fallbacks += 1,
            2 => report.unmoved += 1,
            _ => {}
        }
        points.push(q);
    }
    let mut out = samples.clone();
    out.points = points;
    Ok((out, report))
}
