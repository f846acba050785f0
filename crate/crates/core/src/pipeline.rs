//! The full extraction chain, from a complex field to oriented vortex
//! lines, reconnection events and per-frame analytics.
//!
//! Every stage is deterministic: parallel work is collected in input order
//! and ids are assigned serially, so identical inputs give identical
//! output bytes regardless of thread count.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::FrameAnalytics;
use crate::circulation::{identify_vortex_nodes, DEFAULT_EPSILON};
use crate::error::{Error, ErrorClass};
use crate::field::ComplexField3D;
use crate::graph::{build_global_graph, extract_components};
use crate::grid::{Boundary, GridFrame, Vec3};
use crate::io::{DomainInfo, LineFileFrame};
use crate::localization::{localize_graph, LocalizeConfig};
use crate::reduction::{reduce_component, SampleGraph, K_RANGE};
use crate::vectorize::{
    classify, fit_and_resample, orient_line, polyline_length, reorder, split_at_branches, LineKind,
    LineType, Orientation, ReconnectionEvent, VortexLine,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Detection,
    Graph,
    Reduction,
    Localization,
    Vectorization,
    Analytics,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Config => "config",
            Stage::Detection => "detection",
            Stage::Graph => "graph",
            Stage::Reduction => "reduction",
            Stage::Localization => "localization",
            Stage::Vectorization => "vectorization",
            Stage::Analytics => "analytics",
        };
        f.write_str(name)
    }
}

/// A failure tagged with the stage and, when known, the offending entity.
#[derive(Debug, Error)]
#[error("{stage} stage failed{}: {source}", entity.as_ref().map(|e| format!(" on {e}")).unwrap_or_default())]
pub struct PipelineError {
    pub stage: Stage,
    pub entity: Option<String>,
    #[source]
    pub source: Error,
}

impl PipelineError {
    fn at(stage: Stage, entity: Option<String>) -> impl FnOnce(Error) -> Self {
        move |source| PipelineError { stage, entity, source }
    }

    pub fn class(&self) -> ErrorClass {
        self.source.class()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Reduction box side, in grid cells.
    pub k: usize,
    pub epsilon: f64,
    /// Polyline spacing, in grid cells.
    pub resample_step: f64,
    pub localize: bool,
    pub blocks: [usize; 3],
    /// Frame index stamped on the output.
    pub frame: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: 5,
            epsilon: DEFAULT_EPSILON,
            resample_step: 0.5,
            localize: true,
            blocks: [4, 4, 4],
            frame: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !K_RANGE.contains(&self.k) {
            return Err(Error::contract(format!(
                "k = {} outside {}..={}",
                self.k,
                K_RANGE.start(),
                K_RANGE.end()
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::contract(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.resample_step > 0.0 && self.resample_step.is_finite()) {
            return Err(Error::contract(format!(
                "resample step must be positive, got {}",
                self.resample_step
            )));
        }
        if self.blocks.contains(&0) {
            return Err(Error::contract(format!("block counts must be positive: {:?}", self.blocks)));
        }
        Ok(())
    }
}

/// Counters gathered along the way; not part of the written output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub vortex_nodes: usize,
    pub singular_skips: usize,
    pub boundary_skips: usize,
    pub components: usize,
    /// Components that reduced to a single point and carry no line.
    pub dropped_singletons: usize,
    pub max_reduction_passes: usize,
    pub unconverged_components: usize,
    pub chord_fallbacks: usize,
    pub unmoved_samples: usize,
    pub branched_components: usize,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub lines: Vec<VortexLine>,
    pub events: Vec<ReconnectionEvent>,
    pub analytics: FrameAnalytics,
    pub stats: PipelineStats,
    /// Reduced, localized sample graph of every component, in component
    /// order.
    pub samples: Vec<SampleGraph>,
}

impl PipelineOutput {
    pub fn line_frame(&self, field: &ComplexField3D) -> LineFileFrame {
        LineFileFrame::new(
            self.analytics.frame,
            field.time(),
            DomainInfo::new(field.dims(), field.spacing(), field.boundary()),
            &self.lines,
            &self.events,
        )
    }
}

/// Lays the ordered points of a simple piece out as one continuous curve.
/// On periodic grids consecutive points are moved to their nearest image;
/// a loop that winds around the box cannot close in space and is returned
/// as an open curve ending on the periodic image of its first point.
fn unwrap_path(frame: &GridFrame, points: &[Vec3], closed: bool) -> (Vec<Vec3>, bool) {
    if frame.period.is_none() {
        return (points.to_vec(), closed);
    }
    let mut out = Vec::with_capacity(points.len() + 1);
    let first = frame.canonical(points[0]);
    out.push(first);
    for w in points.windows(2) {
        let last = *out.last().unwrap();
        out.push(last + frame.delta(&w[0], &w[1]));
    }
    if closed {
        let last = *out.last().unwrap();
        let image = last + frame.delta(&last, &first);
        if (image - first).norm() > 1e-9 * frame.spacing {
            out.push(image);
            return (out, false);
        }
    }
    (out, closed)
}

struct Piece {
    component: usize,
    points: Vec<Vec3>,
    closed: bool,
    /// Local event indices within the component.
    events: Vec<usize>,
}

/// Runs detection → graph → reduction → localization → vectorization →
/// analytics on one field.
pub fn run_pipeline(field: &ComplexField3D, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.validate().map_err(PipelineError::at(Stage::Config, None))?;
    let dims = field.dims();
    let dx = field.spacing();
    let mut stats = PipelineStats::default();

    let detection = identify_vortex_nodes(field, config.epsilon).map_err(PipelineError::at(Stage::Detection, None))?;
    stats.vortex_nodes = detection.nodes.len();
    stats.singular_skips = detection.singular_skips;
    stats.boundary_skips = detection.boundary_skips;

    let blocks = std::array::from_fn(|a| config.blocks[a].min(dims.0[a]));
    let graph = build_global_graph(detection.nodes, dims, field.boundary(), blocks)
        .map_err(PipelineError::at(Stage::Graph, None))?;
    let components = extract_components(&graph);
    stats.components = components.len();

    let reduced: Vec<_> = components
        .par_iter()
        .enumerate()
        .map(|(c, comp)| {
            reduce_component(&graph, comp, c, dx, config.k)
                .map_err(PipelineError::at(Stage::Reduction, Some(format!("component {c}"))))
        })
        .collect();
    let mut samples = Vec::with_capacity(reduced.len());
    for r in reduced {
        let r = r?;
        stats.max_reduction_passes = stats.max_reduction_passes.max(r.passes);
        stats.unconverged_components += usize::from(!r.converged);
        samples.push(r.graph);
    }

    if config.localize {
        let localize_config = LocalizeConfig::for_field(field);
        for (c, s) in samples.iter_mut().enumerate() {
            let (moved, report) = localize_graph(field, s, &localize_config)
                .map_err(PipelineError::at(Stage::Localization, Some(format!("component {c}"))))?;
            stats.chord_fallbacks += report.chord_fallbacks;
            stats.unmoved_samples += report.unmoved;
            *s = moved;
        }
    }

    let frame = field.frame();
    let mut pieces = Vec::new();
    let mut events = Vec::new();
    for (c, s) in samples.iter().enumerate() {
        if s.len() == 1 {
            stats.dropped_singletons += 1;
            continue;
        }
        let vect = PipelineError::at(Stage::Vectorization, Some(format!("component {c}")));
        let (kind, _) = match classify(s) {
            Ok(k) => k,
            Err(e) => return Err(vect(e)),
        };
        stats.branched_components += usize::from(kind == LineType::TypeIII);
        let split = split_at_branches(s).map_err(PipelineError::at(Stage::Vectorization, Some(format!("component {c}"))))?;
        let event_base = events.len();
        for mut e in split.events {
            e.id = events.len() as u32;
            e.frame = config.frame;
            e.position = frame.canonical(e.position);
            events.push(e);
        }
        for piece in split.pieces {
            let (ordered, closed) = reorder(&piece.graph)
                .map_err(PipelineError::at(Stage::Vectorization, Some(format!("component {c}"))))?;
            let (points, closed) = unwrap_path(&frame, &ordered, closed);
            pieces.push(Piece {
                component: c,
                points,
                closed,
                events: piece.events.iter().map(|&i| event_base + i).collect(),
            });
        }
    }

    let step = config.resample_step * dx;
    let built: Vec<Result<VortexLine, PipelineError>> = pieces
        .par_iter()
        .enumerate()
        .map(|(id, p)| {
            let err = PipelineError::at(Stage::Vectorization, Some(format!("line {id} (component {})", p.component)));
            let mut polyline = match fit_and_resample(&p.points, p.closed, step) {
                Ok(poly) => poly,
                Err(e) => return Err(err(e)),
            };
            if field.boundary() == Boundary::Clamped {
                // spline overshoot near the walls stays on the grid
                for q in &mut polyline {
                    *q = field.clamp_position(*q);
                }
            }
            let length = polyline_length(&polyline, p.closed, None);
            let line = VortexLine {
                id: id as u32,
                kind: if p.closed { LineKind::Closed } else { LineKind::Open },
                control_points: p.points.clone(),
                polyline,
                orientation: Orientation::Unknown,
                length,
                branch_endpoints: p.events.iter().map(|&e| e as u32).collect(),
            };
            Ok(orient_line(field, line))
        })
        .collect();
    let lines = built.into_iter().collect::<Result<Vec<_>, _>>()?;

    let analytics = FrameAnalytics::compute(config.frame, &lines, &events, Some(field))
        .map_err(PipelineError::at(Stage::Analytics, None))?;
    Ok(PipelineOutput { lines, events, analytics, stats, samples })
}
