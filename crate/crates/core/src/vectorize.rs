//! From reduced sample graphs to oriented, spline-smoothed vortex lines.
//!
//! A connected sample graph is an open path (Type-I), a single loop
//! (Type-II), or a branched structure (Type-III). Branched graphs are split
//! at every point of degree > 2; each split point becomes a reconnection
//! event and is duplicated as an endpoint of every incident piece.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField3D;
use crate::grid::{GridFrame, Vec3};
use crate::localization::pseudo_vorticity;
use crate::reduction::SampleGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineType {
    /// Simple open line.
    TypeI,
    /// Simple closed loop.
    TypeII,
    /// Contains branch points.
    TypeIII,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Open,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Traversal follows the positive circulation sense.
    Positive,
    /// No usable pseudo-vorticity anywhere along the line.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconnectionEvent {
    pub id: u32,
    pub position: Vec3,
    pub degree: u32,
    pub frame: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VortexLine {
    pub id: u32,
    pub kind: LineKind,
    pub control_points: Vec<Vec3>,
    pub polyline: Vec<Vec3>,
    pub orientation: Orientation,
    pub length: f64,
    /// Ids of the reconnection events at this line's ends.
    pub branch_endpoints: Vec<u32>,
}

impl VortexLine {
    pub fn is_closed(&self) -> bool {
        self.kind == LineKind::Closed
    }
}

fn require_connected(samples: &SampleGraph) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::contract("cannot classify an empty sample graph"));
    }
    if samples.component_count() != 1 {
        return Err(Error::contract("sample graph must be connected; split components first"));
    }
    Ok(())
}

/// Classifies a connected sample graph by its degree sequence; also returns
/// the branch points (degree > 2).
pub fn classify(samples: &SampleGraph) -> Result<(LineType, Vec<usize>)> {
    require_connected(samples)?;
    let degrees: Vec<usize> = (0..samples.len()).map(|i| samples.degree(i)).collect();
    let branches: Vec<usize> = (0..samples.len()).filter(|&i| degrees[i] > 2).collect();
    if !branches.is_empty() {
        return Ok((LineType::TypeIII, branches));
    }
    let ends = degrees.iter().filter(|&&d| d == 1).count();
    if ends == 2 {
        return Ok((LineType::TypeI, branches));
    }
    if ends == 0 && degrees.iter().all(|&d| d == 2) {
        return Ok((LineType::TypeII, branches));
    }
    Err(Error::contract(format!(
        "isolated sample point cannot form a line ({} point graph)",
        samples.len()
    )))
}

/// One simple piece produced by [`split_at_branches`].
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPiece {
    pub graph: SampleGraph,
    /// For each point of `graph`, its index in the input graph.
    pub source: Vec<usize>,
    /// Events (indices into the returned event list) at this piece's ends.
    pub events: Vec<usize>,
    /// Set when the piece is a loop that starts and ends on one branch.
    pub branch_loop: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub pieces: Vec<SplitPiece>,
    pub events: Vec<ReconnectionEvent>,
}

fn piece_from_walk(samples: &SampleGraph, walk: &[usize], closed: bool) -> Result<SampleGraph> {
    let points = walk.iter().map(|&i| samples.points[i]).collect();
    let mut edges: Vec<(usize, usize)> = (1..walk.len()).map(|i| (i - 1, i)).collect();
    if closed {
        edges.push((walk.len() - 1, 0));
    }
    SampleGraph::from_edges(points, &edges, samples.origin_component, samples.frame)
}

/// Splits a sample graph into simple (Type-I/II) pieces at its branch
/// points. Every edge of the input lands in exactly one piece.
pub fn split_at_branches(samples: &SampleGraph) -> Result<Split> {
    let n = samples.len();
    let branch: Vec<bool> = (0..n).map(|i| samples.degree(i) > 2).collect();
    let mut event_of = vec![usize::MAX; n];
    let mut events = Vec::new();
    for i in (0..n).filter(|&i| branch[i]) {
        event_of[i] = events.len();
        events.push(ReconnectionEvent {
            id: events.len() as u32,
            position: samples.points[i],
            degree: samples.degree(i) as u32,
            frame: 0,
        });
    }
    let edge_key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut used = std::collections::HashSet::new();
    let mut pieces = Vec::new();

    // walks that start at branch points, then at path ends, then loops
    let starts: Vec<usize> = (0..n)
        .filter(|&i| branch[i])
        .chain((0..n).filter(|&i| samples.degree(i) == 1))
        .chain(0..n)
        .collect();
    for start in starts {
        for &first in &samples.adjacency[start] {
            if used.contains(&edge_key(start, first)) {
                continue;
            }
            used.insert(edge_key(start, first));
            let mut walk = vec![start, first];
            let mut prev = start;
            let mut cur = first;
            while cur != start && !branch[cur] && samples.degree(cur) == 2 {
                let next = samples.adjacency[cur]
                    .iter()
                    .copied()
                    .find(|&m| m != prev && !used.contains(&edge_key(cur, m)));
                let Some(next) = next else { break };
                if !used.insert(edge_key(cur, next)) {
                    break;
                }
                walk.push(next);
                prev = cur;
                cur = next;
            }
            let closed = cur == start;
            if closed {
                walk.pop();
            }
            let mut piece_events: Vec<usize> = Vec::new();
            for &end in [walk[0], *walk.last().unwrap()].iter() {
                if branch[end] && !piece_events.contains(&event_of[end]) {
                    piece_events.push(event_of[end]);
                }
            }
            let graph = piece_from_walk(samples, &walk, closed)?;
            pieces.push(SplitPiece {
                graph,
                source: walk.clone(),
                events: piece_events,
                branch_loop: closed && branch[start],
            });
        }
    }
    Ok(Split { pieces, events })
}

/// Lexicographic `(z, y, x)` key; matches the x-fastest linearization.
fn position_key(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.z.total_cmp(&b.z)
        .then(a.y.total_cmp(&b.y))
        .then(a.x.total_cmp(&b.x))
}

fn argmin_key(samples: &SampleGraph, candidates: impl Iterator<Item = usize>) -> Option<usize> {
    candidates.min_by(|&a, &b| position_key(&samples.points[a], &samples.points[b]).then(a.cmp(&b)))
}

/// Orders the points of a simple graph along the line. Returns the ordered
/// positions and whether the line is closed.
pub fn reorder(samples: &SampleGraph) -> Result<(Vec<Vec3>, bool)> {
    let (kind, _) = classify(samples)?;
    let (start, closed) = match kind {
        LineType::TypeIII => {
            return Err(Error::contract("branch point encountered while re-ordering"));
        }
        LineType::TypeI => {
            let ends = (0..samples.len()).filter(|&i| samples.degree(i) == 1);
            (argmin_key(samples, ends).expect("Type-I has two ends"), false)
        }
        LineType::TypeII => (argmin_key(samples, 0..samples.len()).expect("non-empty"), true),
    };
    let mut order = vec![start];
    let mut cur = start;
    let first_step = if closed {
        argmin_key(samples, samples.adjacency[start].iter().copied())
    } else {
        samples.adjacency[start].first().copied()
    };
    let mut next = first_step;
    while let Some(nx) = next {
        if nx == start {
            break;
        }
        order.push(nx);
        let prev = cur;
        cur = nx;
        next = samples.adjacency[cur].iter().copied().find(|&m| m != prev);
    }
    debug_assert_eq!(order.len(), samples.len());
    Ok((order.into_iter().map(|i| samples.points[i]).collect(), closed))
}

#[inline]
fn catmull_rom(p0: &Vec3, p1: &Vec3, p2: &Vec3, p3: &Vec3, t: f64) -> Vec3 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * ((2.0 * p1)
        + (p2 - p0) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
        + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3)
}

/// Uniform Catmull-Rom spline through `points`, sampled so that consecutive
/// output points are at most `resample_step` apart. Open lines use
/// reflected phantom ends; closed lines wrap. The output passes through
/// every control point and does not repeat the first point when closed.
pub fn fit_and_resample(points: &[Vec3], closed: bool, resample_step: f64) -> Result<Vec<Vec3>> {
    let min = if closed { 3 } else { 2 };
    if points.len() < min {
        return Err(Error::contract(format!(
            "{} control points given; need at least {min}",
            points.len()
        )));
    }
    if !(resample_step > 0.0) {
        return Err(Error::contract("resample step must be positive"));
    }
    let n = points.len();
    let at = |i: isize| -> Vec3 {
        if closed {
            points[i.rem_euclid(n as isize) as usize]
        } else if i < 0 {
            2.0 * points[0] - points[1]
        } else if i as usize >= n {
            2.0 * points[n - 1] - points[n - 2]
        } else {
            points[i as usize]
        }
    };
    let segments = if closed { n } else { n - 1 };
    let mut out = Vec::new();
    for s in 0..segments {
        let i = s as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // Bézier hull length bounds the arc length from above
        let b1 = p1 + (p2 - p0) / 6.0;
        let b2 = p2 - (p3 - p1) / 6.0;
        let hull = (b1 - p1).norm() + (b2 - b1).norm() + (p2 - b2).norm();
        let mut m = ((hull / resample_step).ceil() as usize).max(1);
        let samples = loop {
            let pts: Vec<Vec3> = (0..=m)
                .map(|j| {
                    if j == 0 {
                        p1
                    } else if j == m {
                        p2
                    } else {
                        catmull_rom(&p0, &p1, &p2, &p3, j as f64 / m as f64)
                    }
                })
                .collect();
            if pts.windows(2).all(|w| (w[1] - w[0]).norm() <= resample_step) || m > 1 << 20 {
                break pts;
            }
            m *= 2;
        };
        out.extend_from_slice(&samples[..m]);
    }
    if !closed {
        out.push(points[n - 1]);
    }
    Ok(out)
}

/// Arc length of a polyline, including the closing segment when `closed`.
pub fn polyline_length(points: &[Vec3], closed: bool, frame: Option<&GridFrame>) -> f64 {
    let dist = |a: &Vec3, b: &Vec3| match frame {
        Some(f) => f.distance(a, b),
        None => (b - a).norm(),
    };
    let mut sum = crate::analysis::KahanSum::default();
    for w in points.windows(2) {
        sum.add(dist(&w[0], &w[1]));
    }
    if closed && points.len() > 2 {
        sum.add(dist(points.last().unwrap(), &points[0]));
    }
    sum.total()
}

fn polyline_tangent(poly: &[Vec3], closed: bool, i: usize) -> Vec3 {
    let n = poly.len();
    if closed {
        poly[(i + 1) % n] - poly[(i + n - 1) % n]
    } else {
        poly[(i + 1).min(n - 1)] - poly[i.saturating_sub(1)]
    }
}

/// Orients `line` so its traversal follows the pseudo-vorticity, probing
/// from the middle of the polyline outward until a usable direction turns
/// up.
pub fn orient_line(field: &ComplexField3D, mut line: VortexLine) -> VortexLine {
    let n = line.polyline.len();
    if n < 2 {
        line.orientation = Orientation::Unknown;
        return line;
    }
    let mid = n / 2;
    let probes = (0..n).map(|d| if d % 2 == 0 { mid + d / 2 } else { mid.wrapping_sub(d / 2 + 1) });
    for i in probes.filter(|&i| i < n) {
        let Ok(w) = pseudo_vorticity(field, line.polyline[i]) else {
            continue;
        };
        let t = polyline_tangent(&line.polyline, line.is_closed(), i);
        let dot = t.dot(&w);
        if dot == 0.0 {
            continue;
        }
        if dot < 0.0 {
            reverse_line(&mut line);
        }
        line.orientation = Orientation::Positive;
        return line;
    }
    line.orientation = Orientation::Unknown;
    line
}

/// Reverses traversal. Closed lines keep their first point.
pub fn reverse_line(line: &mut VortexLine) {
    if line.is_closed() {
        line.control_points[1..].reverse();
        line.polyline[1..].reverse();
    } else {
        line.control_points.reverse();
        line.polyline.reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gen_straight_vortex;
    use crate::grid::{Axis, Dims};
    use std::f64::consts::PI;

    fn frame() -> GridFrame {
        GridFrame { spacing: 1.0, period: None }
    }

    fn graph(points: Vec<Vec3>, edges: &[(usize, usize)]) -> SampleGraph {
        SampleGraph::from_edges(points, edges, 0, frame()).unwrap()
    }

    fn line_points(n: usize) -> Vec<Vec3> {
        (0..n).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect()
    }

    fn plus() -> SampleGraph {
        let pts = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
        ];
        graph(pts, &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 5)])
    }

    /// Cycle 0-1-2-3-4-5 with chord 0-3.
    fn theta() -> SampleGraph {
        let pts = (0..6)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 6.0;
                Vec3::new(t.cos(), t.sin(), 0.0)
            })
            .collect();
        graph(pts, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)])
    }

    #[test]
    fn classify_by_degree() {
        let path = graph(line_points(5), &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(classify(&path).unwrap(), (LineType::TypeI, vec![]));
        let cycle = graph(line_points(6), &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        assert_eq!(classify(&cycle).unwrap().0, LineType::TypeII);
        assert_eq!(classify(&plus()).unwrap(), (LineType::TypeIII, vec![0]));
    }

    #[test]
    fn classify_rejects_disconnected_and_singletons() {
        let g = graph(line_points(4), &[(0, 1), (2, 3)]);
        assert!(classify(&g).is_err());
        assert!(classify(&graph(line_points(1), &[])).is_err());
    }

    #[test]
    fn split_leaves_simple_lines_alone() {
        let path = graph(line_points(4), &[(0, 1), (1, 2), (2, 3)]);
        let split = split_at_branches(&path).unwrap();
        assert!(split.events.is_empty());
        assert_eq!(split.pieces.len(), 1);
        assert_eq!(split.pieces[0].graph.edge_count(), 3);
        let cycle = graph(line_points(4), &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let split = split_at_branches(&cycle).unwrap();
        assert_eq!(split.pieces.len(), 1);
        assert_eq!(classify(&split.pieces[0].graph).unwrap().0, LineType::TypeII);
    }

    fn split_edges(input: &SampleGraph, split: &Split) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = split
            .pieces
            .iter()
            .flat_map(|p| {
                p.graph.edges().map(|(a, b)| {
                    let (x, y) = (p.source[a], p.source[b]);
                    (x.min(y), x.max(y))
                })
            })
            .collect();
        edges.sort_unstable();
        let mut expected: Vec<_> = input.edges().collect();
        expected.sort_unstable();
        assert_eq!(edges, expected);
        edges
    }

    #[test]
    fn plus_splits_into_four_arms() {
        let g = plus();
        let split = split_at_branches(&g).unwrap();
        assert_eq!(split.events.len(), 1);
        assert_eq!(split.events[0].degree, 4);
        assert_eq!(split.pieces.len(), 4);
        for p in &split.pieces {
            assert_eq!(classify(&p.graph).unwrap().0, LineType::TypeI);
            assert!(p.source.contains(&0));
            assert_eq!(p.events, vec![0]);
        }
        split_edges(&g, &split);
    }

    #[test]
    fn theta_splits_into_three_segments() {
        let g = theta();
        let split = split_at_branches(&g).unwrap();
        assert_eq!(split.events.len(), 2);
        assert_eq!(split.pieces.len(), 3);
        for p in &split.pieces {
            assert_eq!(classify(&p.graph).unwrap().0, LineType::TypeI);
            assert_eq!(p.events.len(), 2);
        }
        split_edges(&g, &split);
    }

    #[test]
    fn loop_at_branch_becomes_closed_piece() {
        // lollipop: 0-1-2-0 loop hanging off branch 0, stick 0-3
        let pts = vec![
            Vec3::zeros(),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(-2.0, 0.0, 0.0),
        ];
        let g = graph(pts, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4)]);
        let split = split_at_branches(&g).unwrap();
        assert_eq!(split.events.len(), 1);
        let loops: Vec<_> = split.pieces.iter().filter(|p| p.branch_loop).collect();
        assert_eq!(loops.len(), 1);
        assert_eq!(classify(&loops[0].graph).unwrap().0, LineType::TypeII);
        split_edges(&g, &split);
    }

    #[test]
    fn reorder_two_point_path() {
        let g = graph(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 0.0)], &[(0, 1)]);
        let (order, closed) = reorder(&g).unwrap();
        assert!(!closed);
        assert_eq!(order, vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)]);
    }

    #[test]
    fn reorder_rejects_branches() {
        assert!(reorder(&plus()).is_err());
    }

    #[test]
    fn collinear_controls_stay_on_line() {
        let pts: Vec<Vec3> = [0.0, 0.7, 2.0, 2.4, 5.0]
            .iter()
            .map(|&s| Vec3::new(1.0, 2.0, 3.0) + s * Vec3::new(0.2, -0.5, 0.8))
            .collect();
        let poly = fit_and_resample(&pts, false, 0.1).unwrap();
        let dir = Vec3::new(0.2, -0.5, 0.8).normalize();
        for p in &poly {
            let d = p - pts[0];
            assert!((d - d.dot(&dir) * dir).norm() < 1e-9);
        }
        assert!(poly.windows(2).all(|w| (w[1] - w[0]).norm() <= 0.1));
    }

    #[test]
    fn two_point_line_is_a_segment() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(3.0, 4.0, 0.0);
        let poly = fit_and_resample(&[a, b], false, 0.5).unwrap();
        assert_eq!(poly.first(), Some(&a));
        assert_eq!(poly.last(), Some(&b));
        assert!((polyline_length(&poly, false, None) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(fit_and_resample(&[Vec3::zeros()], false, 0.5).is_err());
        assert!(fit_and_resample(&line_points(2), true, 0.5).is_err());
        assert!(fit_and_resample(&line_points(3), false, 0.0).is_err());
    }

    #[test]
    fn spline_passes_through_controls() {
        let pts: Vec<Vec3> = (0..7)
            .map(|i| Vec3::new(i as f64, (i as f64).sin() * 2.0, 0.3 * i as f64))
            .collect();
        for closed in [false, true] {
            let poly = fit_and_resample(&pts, closed, 0.25).unwrap();
            for c in &pts {
                assert!(poly.iter().any(|p| (p - c).norm() < 1e-6));
            }
            if closed {
                assert!((poly[0] - poly[poly.len() - 1]).norm() <= 0.25);
            }
        }
    }

    fn straight_line(field: &ComplexField3D) -> VortexLine {
        let controls: Vec<Vec3> = (2..6).map(|k| Vec3::new(2.2, 2.3, k as f64)).collect();
        let polyline = fit_and_resample(&controls, false, 0.25).unwrap();
        let _ = field;
        VortexLine {
            id: 0,
            kind: LineKind::Open,
            length: polyline_length(&polyline, false, None),
            control_points: controls,
            polyline,
            orientation: Orientation::Unknown,
            branch_endpoints: vec![],
        }
    }

    #[test]
    fn orientation_follows_winding() {
        let dims = Dims::cube(16).unwrap();
        for w in [1, -1] {
            let f = gen_straight_vortex(dims, 0.5, Axis::Z, [2.2, 2.3], w).unwrap();
            let mut line = straight_line(&f);
            reverse_line(&mut line);
            let oriented = orient_line(&f, line);
            assert_eq!(oriented.orientation, Orientation::Positive);
            let t = oriented.polyline.last().unwrap() - oriented.polyline[0];
            assert!(t.z * w as f64 > 0.0);
        }
    }

    #[test]
    fn reversed_winding_reverses_order() {
        let dims = Dims::cube(16).unwrap();
        let plus = gen_straight_vortex(dims, 0.5, Axis::Z, [2.2, 2.3], 1).unwrap();
        let minus = gen_straight_vortex(dims, 0.5, Axis::Z, [2.2, 2.3], -1).unwrap();
        let a = orient_line(&plus, straight_line(&plus));
        let mut b = orient_line(&minus, straight_line(&minus));
        reverse_line(&mut b);
        assert_eq!(a.polyline, b.polyline);
    }
}
