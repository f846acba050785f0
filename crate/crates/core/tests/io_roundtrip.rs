//! Field and line-file round trips through every on-disk format.

use qvortex::field::{gen_calm, gen_vortex_ring};
use qvortex::io::{
    decode_field, decode_lines_binary, decode_lines_json, encode_field, encode_lines_binary, encode_lines_json,
    field_file_len, read_field, read_lines, write_field, write_lines, DomainInfo, LineFileFrame, Precision,
};
use qvortex::{run_pipeline, Boundary, Dims, Error, FormatError, PipelineConfig, Vec3};

#[test]
fn f64_field_round_trip_is_bit_exact() {
    let mut f = gen_calm(Dims::cube(16).unwrap(), 0.5, Boundary::Periodic, 0.3, 3).unwrap();
    f.set_time(1.25);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frame_000000.qvf");
    write_field(&path, &f, Precision::F64).unwrap();
    let g = read_field(&path).unwrap();
    assert_eq!(g.dims(), f.dims());
    assert_eq!(g.boundary(), Boundary::Periodic);
    assert_eq!(g.time(), 1.25);
    for (a, b) in f.values().iter().zip(g.values()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}

#[test]
fn f32_field_round_trip_is_quantized_not_exact() {
    let f = gen_calm(Dims::cube(16).unwrap(), 0.5, Boundary::Periodic, 0.3, 3).unwrap();
    let mut bytes = Vec::new();
    encode_field(&mut bytes, &f, Precision::F32).unwrap();
    let g = decode_field(bytes.as_slice()).unwrap();
    let worst = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst > 0.0 && worst < 1e-6, "{worst}");
}

#[test]
fn corrupted_magic_is_a_format_error() {
    let f = gen_calm(Dims::cube(16).unwrap(), 0.5, Boundary::Clamped, 0.1, 5).unwrap();
    let mut bytes = Vec::new();
    encode_field(&mut bytes, &f, Precision::F64).unwrap();
    bytes[0] = b'X';
    assert!(matches!(decode_field(bytes.as_slice()), Err(Error::Format(FormatError::BadMagic { .. }))));
    let mut truncated = Vec::new();
    encode_field(&mut truncated, &f, Precision::F64).unwrap();
    truncated.truncate(truncated.len() - 3);
    assert!(matches!(decode_field(truncated.as_slice()), Err(Error::Format(_))));
}

#[test]
fn ring_line_file_round_trips_through_json_and_binary() {
    let dx = 0.5;
    let f = gen_vortex_ring(Dims::cube(64).unwrap(), dx, Vec3::new(15.83, 16.27, 15.91), 10.0 * dx, qvortex::Axis::Y)
        .unwrap();
    let out = run_pipeline(&f, &PipelineConfig::default()).unwrap();
    assert_eq!(out.lines.len(), 1);
    let frame = out.line_frame(&f);

    let json = encode_lines_json(&frame).unwrap();
    let back = decode_lines_json(&json).unwrap();
    assert_eq!(back, frame);

    let mut bytes = Vec::new();
    encode_lines_binary(&mut bytes, &frame).unwrap();
    // even against the smaller f32 snapshot
    assert!(bytes.len() * 100 <= field_file_len(f.dims(), Precision::F32), "{} bytes", bytes.len());
    let bin = decode_lines_binary(bytes.as_slice()).unwrap();
    assert_eq!(bin, frame.quantized());
    let rel = (bin.lines[0].length - frame.lines[0].length).abs() / frame.lines[0].length;
    assert!(rel <= 0.01, "{rel}");
    for (p, q) in bin.lines[0].polyline.iter().zip(&frame.lines[0].polyline) {
        assert!((Vec3::from(*p) - Vec3::from(*q)).norm() < 1e-5);
    }

    let dir = tempfile::tempdir().unwrap();
    for name in ["frame_000000.qvl", "frame_000000.json"] {
        let path = dir.path().join(name);
        write_lines(&path, &frame).unwrap();
        let read = read_lines(&path).unwrap();
        assert_eq!(read.lines.len(), 1);
        assert_eq!(read.lines[0].kind, frame.lines[0].kind);
    }
}

#[test]
fn trailing_bytes_in_a_line_file_are_rejected() {
    let f = gen_vortex_ring(Dims::cube(32).unwrap(), 0.5, Vec3::new(7.9, 8.1, 7.8), 2.5, qvortex::Axis::Z).unwrap();
    let frame = run_pipeline(&f, &PipelineConfig::default()).unwrap().line_frame(&f);
    let mut bytes = Vec::new();
    encode_lines_binary(&mut bytes, &frame).unwrap();
    bytes.push(0);
    assert!(matches!(decode_lines_binary(bytes.as_slice()), Err(Error::Format(_))));
}

#[test]
fn empty_frame_round_trips_in_both_formats() {
    let domain = DomainInfo::new(Dims::cube(8).unwrap(), 0.5, Boundary::Periodic);
    let frame = LineFileFrame::new(3, 0.75, domain, &[], &[]);
    assert_eq!(decode_lines_json(&encode_lines_json(&frame).unwrap()).unwrap(), frame);
    let mut bytes = Vec::new();
    encode_lines_binary(&mut bytes, &frame).unwrap();
    let back = decode_lines_binary(bytes.as_slice()).unwrap();
    assert!(back.lines.is_empty() && back.events.is_empty());
    assert_eq!((back.frame, back.time), (3, 0.75));
}
