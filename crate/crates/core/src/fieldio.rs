//! Flat binary node fields with a small plain-text header.
//!
//! ```text
//! MASSLAB-FIELD 1
//! name = u1
//! dims = 97 97 97
//! h = 0.25
//! l_box = 12
//! dtype = f64le
//! end
//! <dims product × sizeof(dtype) bytes, x fastest>
//! ```
//!
//! `dtype` is `f64le` for scalar fields and `u8` for masks (0 or 1).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Lattice;

const MAGIC: &str = "MASSLAB-FIELD";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    F64(Vec<f64>),
    Mask(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub name: String,
    pub lattice: Lattice,
    pub data: FieldData,
}

pub fn write_field<W: Write>(mut out: W, name: &str, lattice: &Lattice, data: &FieldData) -> Result<()> {
    let (len, dtype) = match data {
        FieldData::F64(v) => (v.len(), "f64le"),
        FieldData::Mask(v) => (v.len(), "u8"),
    };
    if len != lattice.len() {
        return Err(Error::Format(format!(
            "field `{name}` has {len} values for a lattice of {}",
            lattice.len()
        )));
    }
    if name.contains(['\n', '=']) {
        return Err(Error::Format(format!("invalid field name `{name}`")));
    }
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "name = {name}")?;
    writeln!(out, "dims = {0} {0} {0}", lattice.n)?;
    writeln!(out, "h = {}", lattice.h)?;
    writeln!(out, "l_box = {}", lattice.l_box)?;
    writeln!(out, "dtype = {dtype}")?;
    writeln!(out, "end")?;
    match data {
        FieldData::F64(v) => {
            let mut buf = Vec::with_capacity(v.len() * 8);
            for x in v {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        FieldData::Mask(v) => {
            let buf: Vec<u8> = v.iter().map(|&b| b as u8).collect();
            out.write_all(&buf)?;
        }
    }
    Ok(())
}

pub fn save_field(path: &Path, name: &str, lattice: &Lattice, data: &FieldData) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(&mut w, name, lattice, data)?;
    w.flush()?;
    Ok(())
}

pub fn read_field<R: Read>(input: R) -> Result<Field> {
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(Error::Format("missing field magic".into()));
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::Format("missing version".into()))?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }

    let mut name = None;
    let mut dims = None;
    let mut h = None;
    let mut l_box = None;
    let mut dtype = None;
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(Error::Format("header not terminated".into()));
        }
        let l = line.trim_end_matches(['\n', '\r']);
        if l == "end" {
            break;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header line `{l}`")))?;
        let v = v.trim();
        match k.trim() {
            "name" => name = Some(v.to_string()),
            "dims" => {
                let d: Vec<usize> = v
                    .split_whitespace()
                    .map(|s| s.parse().map_err(|_| Error::Format(format!("bad dims `{v}`"))))
                    .collect::<Result<_>>()?;
                if d.len() != 3 || d[0] != d[1] || d[1] != d[2] {
                    return Err(Error::Format(format!("unsupported dims `{v}`")));
                }
                dims = Some(d[0]);
            }
            "h" => h = v.parse::<f64>().ok(),
            "l_box" => l_box = v.parse::<f64>().ok(),
            "dtype" => dtype = Some(v.to_string()),
            other => return Err(Error::Format(format!("unknown header key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::Format(format!("header is missing `{k}`"));
    let lattice = Lattice {
        n: dims.ok_or_else(|| missing("dims"))?,
        h: h.ok_or_else(|| missing("h"))?,
        l_box: l_box.ok_or_else(|| missing("l_box"))?,
    };
    let len = lattice.len();
    let data = match dtype.as_deref() {
        Some("f64le") => {
            let mut buf = vec![0u8; len * 8];
            reader.read_exact(&mut buf)?;
            FieldData::F64(
                buf.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            )
        }
        Some("u8") => {
            let mut buf = vec![0u8; len];
            reader.read_exact(&mut buf)?;
            FieldData::Mask(buf.into_iter().map(|b| b != 0).collect())
        }
        Some(other) => return Err(Error::Format(format!("unknown dtype `{other}`"))),
        None => return Err(missing("dtype")),
    };
    Ok(Field {
        name: name.ok_or_else(|| missing("name"))?,
        lattice,
        data,
    })
}

pub fn load_field(path: &Path) -> Result<Field> {
    read_field(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn round_trip_scalar_and_mask() {
        let lat = GridSpec::new(0.5, 1.0).unwrap().lattice().unwrap();
        let values: Vec<f64> = (0..lat.len()).map(|i| (i as f64).sin() * 1e-3).collect();
        let mut bytes = Vec::new();
        write_field(&mut bytes, "u1", &lat, &FieldData::F64(values.clone())).unwrap();
        let f = read_field(bytes.as_slice()).unwrap();
        assert_eq!(f.name, "u1");
        assert_eq!(f.lattice, lat);
        assert_eq!(f.data, FieldData::F64(values));

        let mask: Vec<bool> = (0..lat.len()).map(|i| i % 3 == 0).collect();
        let mut bytes = Vec::new();
        write_field(&mut bytes, "mask", &lat, &FieldData::Mask(mask.clone())).unwrap();
        assert_eq!(read_field(bytes.as_slice()).unwrap().data, FieldData::Mask(mask));
    }

    #[test]
    fn rejects_truncated_payload_and_wrong_length() {
        let lat = GridSpec::new(0.5, 1.0).unwrap().lattice().unwrap();
        let mut bytes = Vec::new();
        write_field(&mut bytes, "q", &lat, &FieldData::F64(vec![0.0; lat.len()])).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(read_field(bytes.as_slice()).is_err());
        assert!(write_field(Vec::new(), "q", &lat, &FieldData::F64(vec![0.0; 3])).is_err());
    }
}
