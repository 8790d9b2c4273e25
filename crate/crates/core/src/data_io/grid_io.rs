//! Line-oriented grid tables.
//!
//! ```text
//! # hef-grid 1
//! manifold s2
//! bandlimit 2
//! axis beta <nodes...>
//! axis phi <nodes...>
//! columns beta phi weight value
//! <one tab-separated row per node>
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use crate::transforms::{make_grid, GridFunction};

pub const GRID_MAGIC: &str = "# hef-grid";
pub const GRID_VERSION: u32 = 1;

pub fn export_grid<W: Write>(mut w: W, f: &GridFunction) -> Result<()> {
    let spec = &f.spec;
    writeln!(w, "{GRID_MAGIC} {GRID_VERSION}")?;
    writeln!(w, "manifold {}", spec.manifold().tag())?;
    writeln!(w, "bandlimit {}", spec.bandlimit())?;
    for ax in spec.axes() {
        let nodes: Vec<String> = ax.nodes.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "axis {} {}", ax.name, nodes.join(" "))?;
    }
    let names: Vec<&str> = spec.axes().iter().map(|a| a.name).collect();
    writeln!(w, "columns {} weight value", names.join(" "))?;
    for (i, (wt, v)) in spec.weights().iter().zip(&f.values).enumerate() {
        for c in spec.node_coords(i) {
            write!(w, "{c:?}\t")?;
        }
        writeln!(w, "{wt:?}\t{v:?}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`export_grid`]. The grid is rebuilt from the
/// header and the listed weights and coordinates are checked against it.
pub fn read_grid<R: BufRead>(reader: R) -> Result<GridFunction> {
    let mut manifold = None;
    let mut bandlimit = None;
    let mut spec = None;
    let mut values = Vec::new();
    let mut saw_magic = false;
    for (i, line) in reader.lines().enumerate() {
        let n = i + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if !saw_magic {
            let version = t
                .strip_prefix(GRID_MAGIC)
                .ok_or_else(|| Error::parse(n, "not a grid file"))?
                .trim();
            if version != GRID_VERSION.to_string() {
                return Err(Error::Version(format!("grid file version '{version}'")));
            }
            saw_magic = true;
            continue;
        }
        let mut words = t.split_whitespace();
        let head = words.next().unwrap_or("");
        match head {
            "manifold" => {
                let tag = words.next().unwrap_or("");
                manifold = Some(
                    tag.parse::<Manifold>()
                        .map_err(|_| Error::parse(n, format!("unknown manifold '{tag}'")))?,
                );
            }
            "bandlimit" => {
                let b: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| Error::parse(n, "invalid bandlimit"))?;
                bandlimit = Some(b);
            }
            "axis" | "columns" => {
                if spec.is_none() {
                    let (Some(m), Some(b)) = (manifold, bandlimit) else {
                        return Err(Error::parse(n, "axis listed before manifold and bandlimit"));
                    };
                    spec = Some(make_grid(m, b).map_err(|e| Error::parse(n, e.to_string()))?);
                }
            }
            _ => {
                let Some(s) = &spec else {
                    return Err(Error::parse(n, format!("unexpected line '{head}'")));
                };
                let k = values.len();
                if k >= s.num_nodes() {
                    return Err(Error::parse(n, "more rows than grid nodes"));
                }
                let fields = t
                    .split('\t')
                    .map(|f| {
                        f.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::parse(n, format!("bad number '{f}'")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                let coords = s.node_coords(k);
                if fields.len() != coords.len() + 2 {
                    return Err(Error::parse(n, "wrong number of columns"));
                }
                let tol = 1e-12;
                let off = coords.iter().zip(&fields).any(|(a, b)| (a - b).abs() > tol)
                    || (fields[coords.len()] - s.weights()[k]).abs() > tol;
                if off {
                    return Err(Error::parse(n, "row does not match the grid node"));
                }
                values.push(fields[coords.len() + 1]);
            }
        }
    }
    let Some(s) = spec else {
        return Err(Error::parse(0, "grid header incomplete"));
    };
    if values.len() != s.num_nodes() {
        return Err(Error::parse(
            0,
            format!("expected {} rows, found {}", s.num_nodes(), values.len()),
        ));
    }
    GridFunction::new(s, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_manifold() {
        for m in Manifold::ALL {
            let spec = make_grid(m, 3).unwrap();
            let f = GridFunction::from_fn(&spec, |p| p.coords().iter().sum::<f64>().sin()).unwrap();
            let mut buf = Vec::new();
            export_grid(&mut buf, &f).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            let rows = text.lines().filter(|l| !l.starts_with(|c: char| c.is_alphabetic() || c == '#')).count();
            assert_eq!(rows, spec.num_nodes());
            let back = read_grid(&buf[..]).unwrap();
            assert_eq!(back.values, f.values);
            assert!((back.integral() - f.integral()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_truncated() {
        let spec = make_grid(Manifold::S1, 2).unwrap();
        let f = GridFunction::new(spec, vec![1.0; 4]).unwrap();
        let mut buf = Vec::new();
        export_grid(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(read_grid(cut.as_bytes()).is_err());
        assert!(matches!(read_grid("# hef-grid 9\n".as_bytes()), Err(Error::Version(_))));
    }
}
