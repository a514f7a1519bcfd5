//! The `FRF1` binary field format.
//!
//! A text header `FRF1 n=<n> N=<N> L=<L> comps=<c>\n` followed by `Nⁿ·c`
//! little-endian `f64` values, nodes row-major, components innermost.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{FracError, Result};
use crate::field::Field;
use crate::grid::Grid;

/// Header and payload of an `FRF1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawField {
    pub grid: Grid,
    pub comps: usize,
    pub values: Vec<f64>,
}

impl RawField {
    pub fn into_field<F: Field>(self) -> Result<F> {
        let want = F::comps_for(self.grid.n());
        if self.comps != want {
            return Err(FracError::Format(format!(
                "file has {} components per node, expected {want}",
                self.comps
            )));
        }
        F::from_values(self.grid, self.values)
    }
}

pub fn write<F: Field>(out: &mut impl Write, field: &F) -> Result<()> {
    write_raw(out, field.grid(), field.comps(), field.values())
}

pub fn write_raw(out: &mut impl Write, grid: &Grid, comps: usize, values: &[f64]) -> Result<()> {
    // `{:?}` prints the shortest string that round-trips.
    writeln!(
        out,
        "FRF1 n={} N={} L={:?} comps={}",
        grid.n(),
        grid.points(),
        grid.extent(),
        comps
    )?;
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read(input: &mut impl Read) -> Result<RawField> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| FracError::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl])
        .map_err(|_| FracError::Format("header is not UTF-8".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("FRF1") {
        return Err(FracError::Format("bad magic, expected FRF1".into()));
    }
    let (mut n, mut pts, mut ext, mut comps) = (None, None, None, None);
    for tok in parts {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| FracError::Format(format!("malformed header token `{tok}`")))?;
        let bad = || FracError::Format(format!("bad value for `{key}`: `{val}`"));
        match key {
            "n" => n = Some(val.parse::<usize>().map_err(|_| bad())?),
            "N" => pts = Some(val.parse::<usize>().map_err(|_| bad())?),
            "L" => ext = Some(val.parse::<f64>().map_err(|_| bad())?),
            "comps" => comps = Some(val.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(FracError::Format(format!("unknown header key `{key}`"))),
        }
    }
    let missing = |k: &str| FracError::Format(format!("header is missing `{k}`"));
    let n = n.ok_or_else(|| missing("n"))?;
    let pts = pts.ok_or_else(|| missing("N"))?;
    let ext = ext.ok_or_else(|| missing("L"))?;
    let comps = comps.ok_or_else(|| missing("comps"))?;
    let grid = Grid::new(n, ext, pts).map_err(|e| FracError::Format(e.to_string()))?;
    if comps == 0 {
        return Err(FracError::Format("comps must be positive".into()));
    }
    let payload = &bytes[nl + 1..];
    let expected = grid.num_nodes() * comps * 8;
    if payload.len() != expected {
        return Err(FracError::Format(format!(
            "payload has {} bytes, header implies {expected}",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok(RawField { grid, comps, values })
}

pub fn save<F: Field>(path: &Path, field: &F) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(&mut f, field)?;
    f.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<RawField> {
    let mut f = std::fs::File::open(path)?;
    read(&mut f)
}
