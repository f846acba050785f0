//! On-disk formats: `QVF1` field snapshots, `QVL1`/JSON line frames and the
//! frame-sequence manifest.

mod field_file;
mod line_file;
mod manifest;

pub use field_file::{
    decode_field, encode_field, field_file_len, read_field, write_field, Precision, FIELD_HEADER_LEN,
    FIELD_MAGIC, FIELD_VERSION,
};
pub use line_file::{
    decode_lines_binary, decode_lines_json, encode_lines_binary, encode_lines_json, read_lines,
    write_lines, DomainInfo, EventRecord, LineFileFrame, LineFormat, LineRecord, LINE_MAGIC,
    LINE_VERSION,
};
pub use manifest::{frame_file_name, Manifest, ManifestEntry};
