//! Graph reduction and sub-grid localization on analytic vortices.

use qvortex::circulation::{identify_vortex_nodes, DEFAULT_EPSILON};
use qvortex::field::{gen_straight_vortex, gen_vortex_ring};
use qvortex::graph::{build_global_graph, extract_components, Component};
use qvortex::localization::{localize_graph, LocalizeConfig};
use qvortex::reduction::{box_subgraph, mean_estimator, reduce, reduce_component, SampleGraph};
use qvortex::vectorize::{classify, LineType};
use qvortex::{Axis, ComplexField3D, Dims, Vec3};

fn samples_of(f: &ComplexField3D) -> (SampleGraph, usize) {
    let nodes = identify_vortex_nodes(f, DEFAULT_EPSILON).unwrap().nodes;
    let g = build_global_graph(nodes, f.dims(), f.boundary(), [2, 2, 2]).unwrap();
    let all = Component { node_ids: (0..g.len()).collect() };
    let comps = extract_components(&g).len();
    (SampleGraph::from_component(&g, &all, 0, f.spacing()), comps)
}

#[test]
fn box_never_reaches_a_parallel_column() {
    let dx = 0.5;
    let dims = Dims::cube(32).unwrap();
    let a = gen_straight_vortex(dims, dx, Axis::Z, [5.3, 8.2], 1).unwrap();
    let b = gen_straight_vortex(dims, dx, Axis::Z, [10.3, 8.2], 1).unwrap();
    let f = a.product(&b).unwrap();
    let (s, comps) = samples_of(&f);
    assert_eq!(comps, 2);
    for seed in 0..s.len() {
        let left = s.points[seed].x < 7.8;
        let members = box_subgraph(&s, seed, 4).unwrap();
        assert!(members.iter().all(|&m| (s.points[m].x < 7.8) == left));
    }
}

#[test]
fn mean_of_column_nodes_is_within_a_cell_of_the_core() {
    let dx = 0.5;
    let core = [(15.0 + 0.3) * dx, (16.0 + 0.4) * dx];
    let f = gen_straight_vortex(Dims::cube(32).unwrap(), dx, Axis::Z, core, 1).unwrap();
    let (s, _) = samples_of(&f);
    let slab: Vec<Vec3> = s.points.iter().copied().filter(|p| (p.z - 8.0).abs() < 1e-9).collect();
    assert_eq!(slab.len(), 4);
    let m = mean_estimator(&slab).unwrap();
    assert!((m.x - core[0]).abs() < dx && (m.y - core[1]).abs() < dx);
}

#[test]
fn straight_vortex_reduces_to_a_short_path() {
    let dx = 0.5;
    let dims = Dims::new(16, 16, 41).unwrap();
    let f = gen_straight_vortex(dims, dx, Axis::Z, [3.9, 4.15], 1).unwrap();
    let (s, _) = samples_of(&f);
    let r = reduce(&s, 4).unwrap();
    let n = r.graph.len();
    assert!((8..=14).contains(&n), "{n} samples");
    assert_eq!(classify(&r.graph).unwrap().0, LineType::TypeI);
    assert!(r.converged && r.passes <= 10);
}

#[test]
fn ring_reduces_to_a_cycle() {
    let dx = 0.5;
    let f = gen_vortex_ring(Dims::cube(40).unwrap(), dx, Vec3::new(9.9, 10.1, 9.8), 10.0 * dx, Axis::X).unwrap();
    let nodes = identify_vortex_nodes(&f, DEFAULT_EPSILON).unwrap().nodes;
    let g = build_global_graph(nodes, f.dims(), f.boundary(), [4, 4, 4]).unwrap();
    let comps = extract_components(&g);
    assert_eq!(comps.len(), 1);
    let r = reduce_component(&g, &comps[0], 0, dx, 5).unwrap();
    assert!((0..r.graph.len()).all(|i| r.graph.degree(i) == 2));
    assert_eq!(r.graph.cycle_rank(), 1);
    assert_eq!(classify(&r.graph).unwrap().0, LineType::TypeII);
}

#[test]
fn localization_lowers_ring_density_and_is_idempotent() {
    let dx = 0.5;
    let f = gen_vortex_ring(Dims::cube(40).unwrap(), dx, Vec3::new(9.9, 10.1, 9.8), 10.0 * dx, Axis::Z).unwrap();
    let nodes = identify_vortex_nodes(&f, DEFAULT_EPSILON).unwrap().nodes;
    let g = build_global_graph(nodes, f.dims(), f.boundary(), [4, 4, 4]).unwrap();
    let comps = extract_components(&g);
    let r = reduce_component(&g, &comps[0], 0, dx, 5).unwrap();
    let cfg = LocalizeConfig::for_field(&f);
    let mean_density = |s: &SampleGraph| {
        s.points.iter().map(|p| f.density_at(*p).unwrap()).sum::<f64>() / s.len() as f64
    };
    let (once, report) = localize_graph(&f, &r.graph, &cfg).unwrap();
    assert_eq!(report.unmoved, 0);
    assert!(mean_density(&once) < mean_density(&r.graph));
    for (a, b) in r.graph.points.iter().zip(&once.points) {
        assert!(f.density_at(*b).unwrap() <= f.density_at(*a).unwrap());
        assert!((b - a).norm() <= dx + 1e-12);
    }
    let (twice, _) = localize_graph(&f, &once, &cfg).unwrap();
    for (a, b) in once.points.iter().zip(&twice.points) {
        assert!((b - a).norm() < 0.01 * dx, "moved {}", (b - a).norm() / dx);
    }
}
