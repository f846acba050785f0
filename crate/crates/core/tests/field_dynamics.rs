//! Field-level oracles: superfluid velocity, ring circulation, forcing
//! determinism and NLKG dispersion/energy behavior.

use std::f64::consts::PI;

use qvortex::field::{
    gen_straight_vortex, gen_vortex_ring, wrap_phase, Complex64, NlkgState, PotentialParams, RandomPotential,
};
use qvortex::{Axis, Boundary, ComplexField3D, Dims, Vec3};

#[test]
fn velocity_around_straight_core_follows_inverse_distance() {
    let dx = 0.5;
    let (cx, cy) = (7.83, 8.21);
    let f = gen_straight_vortex(Dims::cube(33).unwrap(), dx, Axis::Z, [cx, cy], 1).unwrap();
    let mut checked = 0;
    for j in 1..32 {
        for i in 1..32 {
            let p = f.node_position([i, j, 16]);
            let r = (p.x - cx).hypot(p.y - cy);
            if r < 3.0 * dx {
                continue;
            }
            let u = f.velocity_at_node([i, j, 16]).unwrap();
            let speed = u.xy().norm();
            assert!((speed * r - 1.0).abs() < 0.1, "r = {r}: speed {speed}");
            // tangential, counter-clockwise for winding +1
            let radial = Vec3::new(p.x - cx, p.y - cy, 0.0) / r;
            assert!(u.dot(&radial).abs() < 0.1 * speed);
            assert!(radial.cross(&u).z > 0.0);
            checked += 1;
        }
    }
    assert!(checked > 500);
}

/// Wrapped phase differences summed around the node loop `path`.
fn loop_circulation(f: &ComplexField3D, path: &[[usize; 3]]) -> f64 {
    (0..path.len())
        .map(|i| {
            let a = f.value(path[i]).arg();
            let b = f.value(path[(i + 1) % path.len()]).arg();
            wrap_phase(b - a)
        })
        .sum()
}

#[test]
fn small_loop_threading_a_ring_carries_one_quantum() {
    let dx = 0.5;
    let center = Vec3::new(8.1, 7.9, 8.05);
    let f = gen_vortex_ring(Dims::cube(33).unwrap(), dx, center, 4.0, Axis::Z).unwrap();
    // the ring pierces the y = const plane near x = 12.1, z = 8.05
    let j = (center.y / dx).round() as usize;
    let square = |i0: usize, k0: usize, h: usize| -> Vec<[usize; 3]> {
        let mut p = Vec::new();
        for i in i0..i0 + h {
            p.push([i, j, k0]);
        }
        for k in k0..k0 + h {
            p.push([i0 + h, j, k]);
        }
        for i in (i0 + 1..=i0 + h).rev() {
            p.push([i, j, k0 + h]);
        }
        for k in (k0 + 1..=k0 + h).rev() {
            p.push([i0, j, k]);
        }
        p
    };
    let threading = loop_circulation(&f, &square(22, 14, 4));
    assert!((threading.abs() - 2.0 * PI).abs() < 1e-9, "{threading}");
    let far = loop_circulation(&f, &square(2, 2, 4));
    assert!(far.abs() < 1e-9, "{far}");
}

#[test]
fn potential_is_reproducible_from_its_seed() {
    let params = PotentialParams { seed: 42, ..Default::default() };
    let a = RandomPotential::new(params).unwrap();
    let b = RandomPotential::new(params).unwrap();
    let c = RandomPotential::new(PotentialParams { seed: 43, ..params }).unwrap();
    let mut differs = 0;
    for i in 0..1000 {
        let s = i as f64;
        let p = Vec3::new((s * 0.731).sin() * 40.0, (s * 1.37).cos() * 40.0, s * 0.041);
        let t = s * 0.013;
        assert_eq!(a.sample(p, t).to_bits(), b.sample(p, t).to_bits());
        differs += usize::from(a.sample(p, t) != c.sample(p, t));
    }
    assert!(differs > 900);
}

#[test]
fn small_plane_wave_oscillates_at_its_wavenumber() {
    // λ = 1 linearized about Φ = 0: ∂²ₜΦ = ∇²Φ, so ω = |k|
    let (n, dx, dt) = (64, 0.5, 0.1);
    let k = 2.0 * PI * 4.0 / (n as f64 * dx);
    let amp = 1e-4;
    let f = ComplexField3D::from_fn(Dims::cube(n).unwrap(), dx, Boundary::Periodic, |p| {
        Complex64::new(0.0, amp * (k * p.z).cos())
    })
    .unwrap();
    let mut state = NlkgState::new(f, 1.0, dt, None).unwrap();
    let node = [3, 5, 0];
    let mut series = vec![(0.0, state.current.value(node).im / amp)];
    for _ in 0..100 {
        state.advance(None).unwrap();
        series.push((state.time(), state.current.value(node).im / amp));
    }
    // least squares over ω for cos(ωt), by fine scan
    let residual = |w: f64| series.iter().map(|(t, a)| (a - (w * t).cos()).powi(2)).sum::<f64>();
    let omega = (0..=20_000)
        .map(|i| k * (0.8 + 0.4 * i as f64 / 20_000.0))
        .min_by(|a, b| residual(*a).total_cmp(&residual(*b)))
        .unwrap();
    assert!((omega - k).abs() / k < 0.02, "ω = {omega}, |k| = {k}");
}

#[test]
fn unforced_energy_drift_stays_below_one_percent() {
    let (n, dx) = (32, 0.5);
    let k = 2.0 * PI / (n as f64 * dx);
    let f = ComplexField3D::from_fn(Dims::cube(n).unwrap(), dx, Boundary::Periodic, |p| {
        Complex64::from_polar(1.0 + 0.2 * (k * p.x).cos() * (k * p.y).sin(), 0.5 * (k * p.z).sin())
    })
    .unwrap();
    let mut state = NlkgState::new(f, 0.0, 0.05, None).unwrap();
    state.advance(None).unwrap();
    let e0 = state.energy();
    for _ in 0..1000 {
        state.advance(None).unwrap();
    }
    let drift = (state.energy() - e0).abs() / e0;
    assert!(drift < 0.01, "drift {drift}");
}
