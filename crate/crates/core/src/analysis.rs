//! Per-frame analytics over vectorized lines: lengths, length filtering,
//! reconnection statistics and the density error metric.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField3D;
use crate::vectorize::{polyline_length, ReconnectionEvent, VortexLine};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = KahanSum::default();
    values.into_iter().for_each(|v| s.add(v));
    s.total()
}

/// Arc length of the line's polyline, closing segment included.
pub fn line_length(line: &VortexLine) -> f64 {
    polyline_length(&line.polyline, line.is_closed(), None)
}

/// Lines with `min <= length < max`, in input order.
pub fn filter_by_length(lines: &[VortexLine], min: f64, max: f64) -> Result<Vec<&VortexLine>> {
    if !(min < max) {
        return Err(Error::contract(format!("length range [{min}, {max}) is empty")));
    }
    Ok(lines.iter().filter(|l| l.length >= min && l.length < max).collect())
}

/// Tags every event with its frame index; one list per input frame.
pub fn collect_events<'a>(
    frames: impl IntoIterator<Item = (u32, &'a [ReconnectionEvent])>,
) -> Vec<Vec<ReconnectionEvent>> {
    frames
        .into_iter()
        .map(|(frame, events)| {
            events
                .iter()
                .map(|e| ReconnectionEvent { frame, ..e.clone() })
                .collect()
        })
        .collect()
}

/// Mean density sampled at every polyline point, normalized by the mean
/// density of the whole field. Zero for lines exactly on cores; one for
/// lines lying in bulk fluid.
pub fn density_error_metric(field: &ComplexField3D, lines: &[VortexLine]) -> Result<f64> {
    let mean = field.mean_density();
    if !(mean > 0.0) {
        return Err(Error::contract("field has zero mean density"));
    }
    let mut sum = KahanSum::default();
    let mut count = 0usize;
    for line in lines {
        for p in &line.polyline {
            sum.add(field.density_at(*p)?.abs());
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::contract("no polyline points to evaluate"));
    }
    Ok(sum.total() / (mean * count as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthBin {
    pub min: f64,
    /// Exclusive; `None` for the unbounded last bin.
    pub max: Option<f64>,
    pub count: usize,
}

/// Default length bin edges, domain units; the last bin is unbounded.
pub const DEFAULT_BIN_EDGES: [f64; 8] = [0.0, 1.5, 3.0, 6.0, 12.0, 24.0, 48.0, 96.0];

pub fn length_histogram(lines: &[VortexLine], edges: &[f64]) -> Vec<LengthBin> {
    edges
        .iter()
        .enumerate()
        .map(|(i, &min)| {
            let max = edges.get(i + 1).copied();
            let count = lines
                .iter()
                .filter(|l| l.length >= min && max.is_none_or(|m| l.length < m))
                .count();
            LengthBin { min, max, count }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameAnalytics {
    pub frame: u32,
    pub line_count: usize,
    pub total_length: f64,
    pub event_count: usize,
    pub length_histogram: Vec<LengthBin>,
    /// `None` when the frame has no polyline points to evaluate.
    pub error_metric: Option<f64>,
}

impl FrameAnalytics {
    pub fn compute(
        frame: u32,
        lines: &[VortexLine],
        events: &[ReconnectionEvent],
        field: Option<&ComplexField3D>,
    ) -> Result<Self> {
        let error_metric = match field {
            Some(f) if lines.iter().any(|l| !l.polyline.is_empty()) => {
                Some(density_error_metric(f, lines)?)
            }
            _ => None,
        };
        Ok(FrameAnalytics {
            frame,
            line_count: lines.len(),
            total_length: compensated_sum(lines.iter().map(|l| l.length)),
            event_count: events.len(),
            length_histogram: length_histogram(lines, &DEFAULT_BIN_EDGES),
            error_metric,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRow {
    pub frame: u32,
    pub total_length: f64,
    pub event_count: usize,
    pub line_count: usize,
}

pub fn time_series(analytics: &[FrameAnalytics]) -> Vec<TimeSeriesRow> {
    analytics
        .iter()
        .map(|a| TimeSeriesRow {
            frame: a.frame,
            total_length: a.total_length,
            event_count: a.event_count,
            line_count: a.line_count,
        })
        .collect()
}

pub const CSV_HEADER: &str = "frame,lines,total_length,events,error_metric";

/// CSV with one row per frame; the error metric cell is empty when absent.
pub fn analytics_csv(analytics: &[FrameAnalytics]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for a in analytics {
        let metric = a.error_metric.map(|m| m.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", a.frame, a.line_count, a.total_length, a.event_count, metric)
            .expect("writing to a String");
    }
    out
}
