//! Text model files.
//!
//! ```text
//! hef-model 1
//! manifold s2
//! bandlimit 2
//! oversample 2
//! regularization plancherel 0.001
//! coefficients 8
//! 0.25
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::expfam::{param_count, NaturalParams, Regularization};
use crate::manifold::Manifold;

pub const MODEL_MAGIC: &str = "hef-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub params: NaturalParams,
    pub oversample: f64,
    pub regularization: Regularization,
}

pub fn write_model<W: Write>(mut w: W, m: &ModelFile) -> Result<()> {
    writeln!(w, "{MODEL_MAGIC} {MODEL_VERSION}")?;
    writeln!(w, "manifold {}", m.params.manifold.tag())?;
    writeln!(w, "bandlimit {}", m.params.bandlimit)?;
    writeln!(w, "oversample {:?}", m.oversample)?;
    match m.regularization {
        Regularization::None => writeln!(w, "regularization none")?,
        Regularization::Plancherel(a) => writeln!(w, "regularization plancherel {a:?}")?,
    }
    writeln!(w, "coefficients {}", m.params.eta.len())?;
    for v in &m.params.eta {
        writeln!(w, "{v:?}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_model(path: &Path, m: &ModelFile) -> Result<()> {
    write_model(BufWriter::new(File::create(path)?), m)
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    read_model(BufReader::new(File::open(path)?))
}

fn number<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{s}'")))
}

pub fn read_model<R: BufRead>(reader: R) -> Result<ModelFile> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |want: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i, l?.trim().to_string())),
            None => Err(Error::parse(0, format!("unexpected end of file, expected {want}"))),
        }
    };

    let (n, head) = next("header")?;
    let mut parts = head.split_whitespace();
    if parts.next() != Some(MODEL_MAGIC) {
        return Err(Error::parse(n, "not a model file"));
    }
    let version = parts.next().unwrap_or("");
    if version != MODEL_VERSION.to_string() {
        return Err(Error::Version(format!("model file version '{version}'")));
    }

    let mut manifold = None;
    let mut bandlimit = None;
    let mut oversample = None;
    let mut regularization = None;
    let count;
    loop {
        let (n, line) = next("header field")?;
        let mut f = line.split_whitespace();
        let key = f.next().unwrap_or("");
        let vals: Vec<&str> = f.collect();
        let one = |what: &str| -> Result<&str> {
            match vals.as_slice() {
                [v] => Ok(*v),
                _ => Err(Error::parse(n, format!("{what} takes exactly one value"))),
            }
        };
        match key {
            "manifold" => {
                let tag = one("manifold")?;
                manifold = Some(
                    tag.parse::<Manifold>()
                        .map_err(|_| Error::parse(n, format!("unknown manifold '{tag}'")))?,
                );
            }
            "bandlimit" => bandlimit = Some(number::<usize>(n, one("bandlimit")?, "bandlimit")?),
            "oversample" => oversample = Some(number::<f64>(n, one("oversample")?, "oversample")?),
            "regularization" => {
                regularization = Some(match vals.as_slice() {
                    ["none"] => Regularization::None,
                    ["plancherel", a] => Regularization::Plancherel(number(n, a, "strength")?),
                    _ => return Err(Error::parse(n, "invalid regularization")),
                });
            }
            "coefficients" => {
                count = number::<usize>(n, one("coefficients")?, "coefficient count")?;
                break;
            }
            other => {
                return Err(Error::Version(format!(
                    "unknown field '{other}' at line {n} for model version {MODEL_VERSION}"
                )))
            }
        }
    }
    let missing = |f: &str| Error::parse(0, format!("missing header field '{f}'"));
    let manifold = manifold.ok_or_else(|| missing("manifold"))?;
    let bandlimit = bandlimit.ok_or_else(|| missing("bandlimit"))?;
    let want = param_count(manifold, bandlimit);
    if count != want {
        return Err(Error::parse(
            0,
            format!("{manifold} bandlimit {bandlimit} has {want} coefficients, header says {count}"),
        ));
    }
    let mut eta = Vec::with_capacity(count);
    while eta.len() < count {
        let (n, line) = next("coefficient").map_err(|_| {
            Error::parse(0, format!("expected {count} coefficients, found {}", eta.len()))
        })?;
        let v: f64 = number(n, &line, "coefficient")?;
        if !v.is_finite() {
            return Err(Error::parse(n, "coefficient is not finite"));
        }
        eta.push(v);
    }
    for (n, rest) in lines {
        if !rest?.trim().is_empty() {
            return Err(Error::parse(n, "trailing data after the coefficients"));
        }
    }
    Ok(ModelFile {
        params: NaturalParams::new(manifold, bandlimit, eta)?,
        oversample: oversample.unwrap_or(crate::expfam::DEFAULT_OVERSAMPLE),
        regularization: regularization.unwrap_or(Regularization::None),
    })
}
