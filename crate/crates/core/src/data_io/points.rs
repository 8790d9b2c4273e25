//! Whitespace-separated point files: one point per line, coordinates in
//! radians (`theta`; `beta phi`; `alpha beta gamma`). Blank lines and lines
//! starting with `#` are skipped.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldPoint};

pub fn read_points<R: BufRead>(reader: R, manifold: Manifold) -> Result<Vec<ManifoldPoint>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let coords = t
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(i + 1, format!("bad number '{f}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let p = ManifoldPoint::from_coords(manifold, &coords)
            .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

pub fn write_points<W: Write>(mut w: W, points: &[ManifoldPoint]) -> Result<()> {
    for p in points {
        let c: Vec<String> = p.coords().iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", c.join("\t"))?;
    }
    Ok(())
}
