//! Vectorized frames on disk: canonical JSON and the compact `QVL1` binary.
//!
//! ```text
//! "QVL1" | u32 version=1 | u32 frame | f64 time | u32 nx ny nz | f64 spacing
//!        | u32 line count
//!        | per line: u32 id | u8 flags (bit0 closed, bit1 oriented)
//!                    | u32 n, n × f32[3] control points
//!                    | u32 m, m × f32[3] polyline | f64 length
//!        | u32 event count
//!        | per event: u32 id | u16 degree | f32[3] position
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FormatError, Result};
use crate::grid::{Boundary, Dims, Vec3};
use crate::vectorize::{LineKind, Orientation, ReconnectionEvent, VortexLine};

pub const LINE_MAGIC: [u8; 4] = *b"QVL1";
pub const LINE_VERSION: u32 = 1;

const FLAG_CLOSED: u8 = 1;
const FLAG_ORIENTED: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainInfo {
    pub dims: [u32; 3],
    pub spacing: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl DomainInfo {
    pub fn new(dims: Dims, spacing: f64, boundary: Boundary) -> Self {
        DomainInfo { dims: dims.0.map(|n| n as u32), spacing, boundary }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub id: u32,
    pub kind: LineKind,
    pub oriented: bool,
    pub length: f64,
    pub control_points: Vec<[f64; 3]>,
    pub polyline: Vec<[f64; 3]>,
    #[serde(default)]
    pub branch_endpoints: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: u32,
    pub degree: u32,
    pub position: [f64; 3],
}

/// Everything extracted from one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFileFrame {
    pub frame: u32,
    pub time: f64,
    pub domain: DomainInfo,
    pub lines: Vec<LineRecord>,
    pub events: Vec<EventRecord>,
}

impl From<&VortexLine> for LineRecord {
    fn from(l: &VortexLine) -> Self {
        LineRecord {
            id: l.id,
            kind: l.kind,
            oriented: l.orientation == Orientation::Positive,
            length: l.length,
            control_points: l.control_points.iter().map(|p| (*p).into()).collect(),
            polyline: l.polyline.iter().map(|p| (*p).into()).collect(),
            branch_endpoints: l.branch_endpoints.clone(),
        }
    }
}

impl From<&LineRecord> for VortexLine {
    fn from(r: &LineRecord) -> Self {
        VortexLine {
            id: r.id,
            kind: r.kind,
            control_points: r.control_points.iter().map(|&p| Vec3::from(p)).collect(),
            polyline: r.polyline.iter().map(|&p| Vec3::from(p)).collect(),
            orientation: if r.oriented { Orientation::Positive } else { Orientation::Unknown },
            length: r.length,
            branch_endpoints: r.branch_endpoints.clone(),
        }
    }
}

impl From<&ReconnectionEvent> for EventRecord {
    fn from(e: &ReconnectionEvent) -> Self {
        EventRecord { id: e.id, degree: e.degree, position: e.position.into() }
    }
}

impl LineFileFrame {
    pub fn new(
        frame: u32,
        time: f64,
        domain: DomainInfo,
        lines: &[VortexLine],
        events: &[ReconnectionEvent],
    ) -> Self {
        LineFileFrame {
            frame,
            time,
            domain,
            lines: lines.iter().map(LineRecord::from).collect(),
            events: events.iter().map(EventRecord::from).collect(),
        }
    }

    pub fn vortex_lines(&self) -> Vec<VortexLine> {
        self.lines.iter().map(VortexLine::from).collect()
    }

    pub fn reconnection_events(&self) -> Vec<ReconnectionEvent> {
        self.events
            .iter()
            .map(|e| ReconnectionEvent {
                id: e.id,
                position: Vec3::from(e.position),
                degree: e.degree,
                frame: self.frame,
            })
            .collect()
    }

    /// The frame as `QVL1` would store it: positions rounded to `f32`,
    /// boundary and branch references dropped.
    pub fn quantized(&self) -> LineFileFrame {
        let q = |p: &[f64; 3]| p.map(|c| c as f32 as f64);
        LineFileFrame {
            frame: self.frame,
            time: self.time,
            domain: DomainInfo { boundary: Boundary::Clamped, ..self.domain },
            lines: self
                .lines
                .iter()
                .map(|l| LineRecord {
                    control_points: l.control_points.iter().map(q).collect(),
                    polyline: l.polyline.iter().map(q).collect(),
                    branch_endpoints: Vec::new(),
                    ..l.clone()
                })
                .collect(),
            events: self
                .events
                .iter()
                .map(|e| EventRecord { position: q(&e.position), ..e.clone() })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<u32> = self.lines.iter().map(|l| l.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::contract(format!("duplicate line ids in frame {}", self.frame)));
        }
        let mut ids: Vec<u32> = self.events.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::contract(format!("duplicate event ids in frame {}", self.frame)));
        }
        Ok(())
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Format(FormatError::from(e))
}

fn len_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::contract(format!("{what} count {n} exceeds u32")))
}

fn write_points<W: Write>(w: &mut W, points: &[[f64; 3]]) -> Result<()> {
    w.write_u32::<LittleEndian>(len_u32(points.len(), "point")?).map_err(io_err)?;
    for p in points {
        for c in p {
            w.write_f32::<LittleEndian>(*c as f32).map_err(io_err)?;
        }
    }
    Ok(())
}

fn read_points<R: Read>(r: &mut R) -> Result<Vec<[f64; 3]>> {
    let n = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let mut p = [0.0; 3];
        for c in &mut p {
            *c = r.read_f32::<LittleEndian>().map_err(io_err)? as f64;
        }
        out.push(p);
    }
    Ok(out)
}

pub fn encode_lines_binary<W: Write>(mut w: W, frame: &LineFileFrame) -> Result<()> {
    w.write_all(&LINE_MAGIC).map_err(io_err)?;
    w.write_u32::<LittleEndian>(LINE_VERSION).map_err(io_err)?;
    w.write_u32::<LittleEndian>(frame.frame).map_err(io_err)?;
    w.write_f64::<LittleEndian>(frame.time).map_err(io_err)?;
    for n in frame.domain.dims {
        w.write_u32::<LittleEndian>(n).map_err(io_err)?;
    }
    w.write_f64::<LittleEndian>(frame.domain.spacing).map_err(io_err)?;
    w.write_u32::<LittleEndian>(len_u32(frame.lines.len(), "line")?).map_err(io_err)?;
    for line in &frame.lines {
        w.write_u32::<LittleEndian>(line.id).map_err(io_err)?;
        let mut flags = 0u8;
        if line.kind == LineKind::Closed {
            flags |= FLAG_CLOSED;
        }
        if line.oriented {
            flags |= FLAG_ORIENTED;
        }
        w.write_u8(flags).map_err(io_err)?;
        write_points(&mut w, &line.control_points)?;
        write_points(&mut w, &line.polyline)?;
        w.write_f64::<LittleEndian>(line.length).map_err(io_err)?;
    }
    w.write_u32::<LittleEndian>(len_u32(frame.events.len(), "event")?).map_err(io_err)?;
    for e in &frame.events {
        w.write_u32::<LittleEndian>(e.id).map_err(io_err)?;
        let degree = u16::try_from(e.degree)
            .map_err(|_| Error::contract(format!("event degree {} exceeds u16", e.degree)))?;
        w.write_u16::<LittleEndian>(degree).map_err(io_err)?;
        for c in e.position {
            w.write_f32::<LittleEndian>(c as f32).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn decode_lines_binary<R: Read>(mut r: R) -> Result<LineFileFrame> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if magic != LINE_MAGIC {
        return Err(FormatError::BadMagic { expected: LINE_MAGIC, found: magic }.into());
    }
    let version = r.read_u32::<LittleEndian>().map_err(io_err)?;
    if version != LINE_VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    let frame = r.read_u32::<LittleEndian>().map_err(io_err)?;
    let time = r.read_f64::<LittleEndian>().map_err(io_err)?;
    let mut dims = [0u32; 3];
    for n in &mut dims {
        *n = r.read_u32::<LittleEndian>().map_err(io_err)?;
    }
    let spacing = r.read_f64::<LittleEndian>().map_err(io_err)?;
    let line_count = r.read_u32::<LittleEndian>().map_err(io_err)?;
    let mut lines = Vec::with_capacity((line_count as usize).min(1 << 16));
    for _ in 0..line_count {
        let id = r.read_u32::<LittleEndian>().map_err(io_err)?;
        let flags = r.read_u8().map_err(io_err)?;
        if flags & !(FLAG_CLOSED | FLAG_ORIENTED) != 0 {
            return Err(FormatError::InvalidHeader(format!("line {id} has unknown flags {flags:#04x}")).into());
        }
        let control_points = read_points(&mut r)?;
        let polyline = read_points(&mut r)?;
        let length = r.read_f64::<LittleEndian>().map_err(io_err)?;
        lines.push(LineRecord {
            id,
            kind: if flags & FLAG_CLOSED != 0 { LineKind::Closed } else { LineKind::Open },
            oriented: flags & FLAG_ORIENTED != 0,
            length,
            control_points,
            polyline,
            branch_endpoints: Vec::new(),
        });
    }
    let event_count = r.read_u32::<LittleEndian>().map_err(io_err)?;
    let mut events = Vec::with_capacity((event_count as usize).min(1 << 16));
    for _ in 0..event_count {
        let id = r.read_u32::<LittleEndian>().map_err(io_err)?;
        let degree = r.read_u16::<LittleEndian>().map_err(io_err)? as u32;
        let mut position = [0.0; 3];
        for c in &mut position {
            *c = r.read_f32::<LittleEndian>().map_err(io_err)? as f64;
        }
        events.push(EventRecord { id, degree, position });
    }
    // trailing bytes mean the stream is not a single frame
    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(io_err)? != 0 {
        return Err(FormatError::InvalidHeader("trailing bytes after frame".into()).into());
    }
    Ok(LineFileFrame {
        frame,
        time,
        domain: DomainInfo { dims, spacing, boundary: Boundary::Clamped },
        lines,
        events,
    })
}

/// Compact JSON with fixed field order; floats use the shortest decimal
/// that round-trips.
pub fn encode_lines_json(frame: &LineFileFrame) -> Result<String> {
    let mut s = serde_json::to_string(frame).map_err(FormatError::from)?;
    s.push('\n');
    Ok(s)
}

pub fn decode_lines_json(text: &str) -> Result<LineFileFrame> {
    Ok(serde_json::from_str(text).map_err(FormatError::from)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineFormat {
    Json,
    Binary,
}

impl LineFormat {
    /// `.json` → JSON, anything else → `QVL1`.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => LineFormat::Json,
            _ => LineFormat::Binary,
        }
    }
}

pub fn write_lines(path: impl AsRef<Path>, frame: &LineFileFrame) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Format(FormatError::Io(e)))?;
    let mut w = BufWriter::new(file);
    match LineFormat::from_path(path) {
        LineFormat::Json => {
            w.write_all(encode_lines_json(frame)?.as_bytes()).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        LineFormat::Binary => encode_lines_binary(w, frame),
    }
}

pub fn read_lines(path: impl AsRef<Path>) -> Result<LineFileFrame> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Format(FormatError::Io(e)))?;
    let mut r = BufReader::new(file);
    match LineFormat::from_path(path) {
        LineFormat::Json => {
            let mut text = String::new();
            r.read_to_string(&mut text).map_err(io_err)?;
            decode_lines_json(&text)
        }
        LineFormat::Binary => decode_lines_binary(r),
    }
}
