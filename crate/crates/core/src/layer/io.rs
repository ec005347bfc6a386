//! Columnar snapshot format.
//!
//! ```text
//! # <label>
//! # t s z c0 c1 ...
//! 0e0 0e0 0e0 0e0 0e0
//! ...
//! ```
//!
//! One row per (time, slow sample, fast node), in that nesting order. Numbers
//! use Rust's shortest round-trip formatting, so files are bit-stable and
//! re-read exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::spaces::ProfileField;

pub fn write_snapshots<W: Write>(
    mut out: W,
    label: &str,
    times: &[f64],
    fields: &[ProfileField],
) -> Result<()> {
    if times.len() != fields.len() {
        return Err(Error::InvalidParameter("one field per stored time required".into()));
    }
    let ncomp = fields.first().map(|f| f.ncomp).unwrap_or(0);
    writeln!(out, "# {label}")?;
    let cols: Vec<String> = (0..ncomp).map(|c| format!("c{c}")).collect();
    writeln!(out, "# t s z {}", cols.join(" "))?;
    for (t, f) in times.iter().zip(fields) {
        for (i, s) in f.slow.s.iter().enumerate() {
            for (j, z) in f.fast.z.iter().enumerate() {
                write!(out, "{t:e} {s:e} {z:e}")?;
                for c in 0..f.ncomp {
                    write!(out, " {:e}", f.get(c, i, j))?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// One snapshot row: `(t, s, z, components)`.
pub type SnapshotRow = (f64, f64, f64, Vec<f64>);

/// Parse rows written by [`write_snapshots`].
pub fn read_snapshots<R: BufRead>(input: R) -> Result<Vec<SnapshotRow>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("bad number {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() < 3 {
            return Err(Error::Config(format!("short snapshot row {line:?}")));
        }
        rows.push((vals[0], vals[1], vals[2], vals[3..].to_vec()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FastGrid, SlowGrid};

    #[test]
    fn round_trip_is_exact() {
        let f = ProfileField::from_fn(
            SlowGrid::single(1.0),
            FastGrid::mapped(8, 2.0, None).unwrap(),
            2,
            |c, _, z| (c as f64 + 1.0) * (-z).exp() / 3.0,
        );
        let mut buf = Vec::new();
        write_snapshots(&mut buf, "test", &[0.25], std::slice::from_ref(&f)).unwrap();
        let rows = read_snapshots(&buf[..]).unwrap();
        assert_eq!(rows.len(), 8);
        for (j, r) in rows.iter().enumerate() {
            assert_eq!(r.2, f.fast.z[j]);
            assert_eq!(r.3, vec![f.get(0, 0, j), f.get(1, 0, j)]);
        }
    }
}
