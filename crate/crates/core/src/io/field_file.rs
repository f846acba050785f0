//! `QVF1`: little-endian binary snapshot of a complex field.
//!
//! ```text
//! "QVF1" | u32 version=1 | u32 nx ny nz | f64 spacing | f64 time
//!        | u8 boundary (0 clamped, 1 periodic) | u8 precision (4 | 8)
//!        | 6 reserved bytes | nx·ny·nz (re, im) pairs, x-fastest
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use crate::error::{Error, FormatError, Result};
use crate::field::ComplexField3D;
use crate::grid::{Boundary, Dims};

pub const FIELD_MAGIC: [u8; 4] = *b"QVF1";
pub const FIELD_VERSION: u32 = 1;
pub const FIELD_HEADER_LEN: usize = 44;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Precision {
    pub fn code(self) -> u8 {
        match self {
            Precision::F32 => 4,
            Precision::F64 => 8,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            4 => Some(Precision::F32),
            8 => Some(Precision::F64),
            _ => None,
        }
    }

    pub fn pair_bytes(self) -> usize {
        2 * self.code() as usize
    }
}

/// Size in bytes of a `QVF1` file for `dims` at `precision`.
pub fn field_file_len(dims: Dims, precision: Precision) -> usize {
    FIELD_HEADER_LEN + dims.len() * precision.pair_bytes()
}

pub fn encode_field<W: Write>(mut w: W, field: &ComplexField3D, precision: Precision) -> Result<()> {
    let io = |e: std::io::Error| Error::Format(FormatError::from(e));
    let dims = field.dims();
    w.write_all(&FIELD_MAGIC).map_err(io)?;
    w.write_u32::<LittleEndian>(FIELD_VERSION).map_err(io)?;
    for n in dims.0 {
        let n = u32::try_from(n).map_err(|_| FormatError::InvalidHeader(format!("dimension {n} exceeds u32")))?;
        w.write_u32::<LittleEndian>(n).map_err(io)?;
    }
    w.write_f64::<LittleEndian>(field.spacing()).map_err(io)?;
    w.write_f64::<LittleEndian>(field.time()).map_err(io)?;
    w.write_u8(field.boundary().code()).map_err(io)?;
    w.write_u8(precision.code()).map_err(io)?;
    w.write_all(&[0u8; 6]).map_err(io)?;
    for v in field.values() {
        match precision {
            Precision::F64 => {
                w.write_f64::<LittleEndian>(v.re).map_err(io)?;
                w.write_f64::<LittleEndian>(v.im).map_err(io)?;
            }
            Precision::F32 => {
                w.write_f32::<LittleEndian>(v.re as f32).map_err(io)?;
                w.write_f32::<LittleEndian>(v.im as f32).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Parses a complete `QVF1` stream; nothing is returned unless every byte
/// of the payload is present.
pub fn decode_field<R: Read>(mut r: R) -> Result<ComplexField3D> {
    let io = |e: std::io::Error| Error::Format(FormatError::from(e));
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if magic != FIELD_MAGIC {
        return Err(FormatError::BadMagic { expected: FIELD_MAGIC, found: magic }.into());
    }
    let version = r.read_u32::<LittleEndian>().map_err(io)?;
    if version != FIELD_VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    let mut raw = [0u32; 3];
    for n in &mut raw {
        *n = r.read_u32::<LittleEndian>().map_err(io)?;
    }
    let spacing = r.read_f64::<LittleEndian>().map_err(io)?;
    let time = r.read_f64::<LittleEndian>().map_err(io)?;
    let boundary_code = r.read_u8().map_err(io)?;
    let precision_code = r.read_u8().map_err(io)?;
    let mut reserved = [0u8; 6];
    r.read_exact(&mut reserved).map_err(io)?;

    let boundary = Boundary::from_code(boundary_code)
        .ok_or_else(|| FormatError::InvalidHeader(format!("boundary code {boundary_code}")))?;
    let precision = Precision::from_code(precision_code)
        .ok_or_else(|| FormatError::InvalidHeader(format!("precision code {precision_code}")))?;
    let count = raw
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n as usize))
        .and_then(|c| c.checked_mul(precision.pair_bytes()).map(|_| c))
        .filter(|&c| c <= isize::MAX as usize / 16)
        .ok_or(FormatError::DimensionOverflow(raw))?;
    let dims = Dims(raw.map(|n| n as usize));
    if dims.validate().is_err() {
        return Err(FormatError::InvalidHeader(format!("dimensions {raw:?} below minimum")).into());
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(FormatError::InvalidHeader(format!("spacing {spacing}")).into());
    }

    let mut bytes = vec![0u8; count * precision.pair_bytes()];
    r.read_exact(&mut bytes).map_err(io)?;
    let mut cursor = &bytes[..];
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let v = match precision {
            Precision::F64 => Complex64::new(
                cursor.read_f64::<LittleEndian>().map_err(io)?,
                cursor.read_f64::<LittleEndian>().map_err(io)?,
            ),
            Precision::F32 => Complex64::new(
                cursor.read_f32::<LittleEndian>().map_err(io)? as f64,
                cursor.read_f32::<LittleEndian>().map_err(io)? as f64,
            ),
        };
        values.push(v);
    }
    ComplexField3D::new(dims, spacing, time, boundary, values)
}

pub fn write_field(path: impl AsRef<Path>, field: &ComplexField3D, precision: Precision) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Format(FormatError::Io(e)))?;
    encode_field(BufWriter::new(file), field, precision)
}

pub fn read_field(path: impl AsRef<Path>) -> Result<ComplexField3D> {
    let file = File::open(path).map_err(|e| Error::Format(FormatError::Io(e)))?;
    decode_field(BufReader::new(file))
}
