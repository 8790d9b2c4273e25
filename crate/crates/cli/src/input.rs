use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::{Context, Result};
use hef_core::data_io::{parse_earthquakes, read_grid, read_points, ColumnMap};
use hef_core::transforms::GridFunction;
use hef_core::{Manifold, ManifoldPoint};
use log::info;

/// True when the first content line holds something other than numbers,
/// i.e. a header row of a tab-separated table.
fn has_header(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.split_whitespace().any(|w| w.parse::<f64>().is_err()))
}

/// Points from a plain coordinate file, or for S2 also from a tab-separated
/// table with latitude/longitude columns in degrees.
pub fn load_points(path: &Path, manifold: Manifold) -> Result<Vec<ManifoldPoint>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let points = if manifold == Manifold::S2 && has_header(&text) {
        let data = parse_earthquakes(text.as_bytes(), &ColumnMap::default())
            .with_context(|| format!("parsing {}", path.display()))?;
        info!(
            "{}: {} points, {} rows missing coordinates, {} invalid",
            path.display(),
            data.points.len(),
            data.missing,
            data.invalid
        );
        data.points
    } else {
        read_points(text.as_bytes(), manifold)
            .with_context(|| format!("parsing {}", path.display()))?
    };
    anyhow::ensure!(!points.is_empty(), "{} contains no points", path.display());
    Ok(points)
}

pub fn load_grid(path: &Path) -> Result<GridFunction> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader: Box<dyn BufRead> = Box::new(BufReader::new(file));
    read_grid(reader).with_context(|| format!("parsing {}", path.display()))
}
