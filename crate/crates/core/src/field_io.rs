//! Field files: one JSON header line `{"n", "N", "L", "labels_included"}`
//! followed by raw little-endian f64 values in node order. When labels are
//! included, a block of node labels (0 exterior, 1 boundary, 2 interior,
//! stored as f64) precedes the field values.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::GridError;
use crate::grid::{DomainMask, GridFunction, GridSpec, Label};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub n: usize,
    #[serde(rename = "N")]
    pub nodes_per_axis: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    pub labels_included: bool,
}

/// A decoded field file.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub field: GridFunction,
    pub labels: Option<Vec<Label>>,
}

pub fn write_field<W: Write>(mut w: W, field: &GridFunction, mask: Option<&DomainMask>) -> Result<(), GridError> {
    let spec = field.spec();
    if let Some(m) = mask {
        field.check_layout(m)?;
    }
    let header = FieldHeader {
        n: spec.n,
        nodes_per_axis: spec.nodes_per_axis,
        half_width: spec.half_width,
        labels_included: mask.is_some(),
    };
    let line = serde_json::to_string(&header).map_err(|e| GridError::Format(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(8 * spec.node_count() * if mask.is_some() { 2 } else { 1 });
    if let Some(m) = mask {
        for l in m.labels() {
            buf.extend_from_slice(&(l.code() as f64).to_le_bytes());
        }
    }
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<FieldFile, GridError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| GridError::Format("missing header line".into()))?;
    let header: FieldHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| GridError::Format(format!("bad header: {e}")))?;
    let spec = GridSpec::new(header.n, header.nodes_per_axis, header.half_width)?;
    let count = spec.node_count();
    let body = &bytes[nl + 1..];
    let blocks = if header.labels_included { 2 } else { 1 };
    if body.len() != 8 * count * blocks {
        return Err(GridError::Format(format!(
            "expected {} payload bytes, found {}",
            8 * count * blocks,
            body.len()
        )));
    }
    let mut floats = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let labels = if header.labels_included {
        let mut labels = Vec::with_capacity(count);
        for node in 0..count {
            let c = floats.next().unwrap();
            let label = if c.fract() == 0.0 && (0.0..=2.0).contains(&c) {
                Label::from_code(c as u8)
            } else {
                None
            };
            labels.push(label.ok_or_else(|| GridError::Format(format!("bad label {c} at node {node}")))?);
        }
        Some(labels)
    } else {
        None
    };
    let values: Vec<f64> = floats.collect();
    let field = GridFunction::from_values(spec, values)?;
    Ok(FieldFile { field, labels })
}

pub fn save_field(path: &Path, field: &GridFunction, mask: Option<&DomainMask>) -> Result<(), GridError> {
    let f = std::fs::File::create(path)?;
    write_field(std::io::BufWriter::new(f), field, mask)
}

pub fn load_field(path: &Path) -> Result<FieldFile, GridError> {
    read_field(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_domain, fubini_study_rho};

    #[test]
    fn roundtrip_with_labels() {
        let spec = GridSpec::new(1, 9, 1.5).unwrap();
        let mask = build_domain(spec, fubini_study_rho, 2f64.ln()).unwrap();
        let f = GridFunction::from_fn(&mask, |z| (z[0].re * 3.7).sin() / 7.0).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f, Some(&mask)).unwrap();
        let back = read_field(&buf[..]).unwrap();
        assert_eq!(back.field, f);
        assert_eq!(back.labels.as_deref(), Some(mask.labels()));
        let first = std::str::from_utf8(&buf[..buf.iter().position(|&b| b == b'\n').unwrap()]).unwrap();
        assert_eq!(first, r#"{"n":1,"N":9,"L":1.5,"labels_included":true}"#);
    }

    #[test]
    fn truncated_payload_rejected() {
        let spec = GridSpec::new(1, 5, 1.0).unwrap();
        let f = GridFunction::zeros(spec);
        let mut buf = Vec::new();
        write_field(&mut buf, &f, None).unwrap();
        buf.pop();
        assert!(matches!(read_field(&buf[..]), Err(GridError::Format(_))));
    }
}
