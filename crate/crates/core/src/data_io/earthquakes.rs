//! Tab-separated event lists with a header row, such as the NGDC significant
//! earthquake download.

use std::io::Read;

use log::warn;

use crate::error::{Error, Result};
use crate::manifold::ManifoldPoint;

/// How to find a column: by header name (case-insensitive) or by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSpec {
    Names(Vec<String>),
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub latitude: ColumnSpec,
    pub longitude: ColumnSpec,
}

impl Default for ColumnMap {
    fn default() -> Self {
        let names = |v: &[&str]| ColumnSpec::Names(v.iter().map(|s| s.to_string()).collect());
        ColumnMap {
            latitude: names(&["latitude", "lat"]),
            longitude: names(&["longitude", "lon", "long"]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EarthquakeData {
    pub points: Vec<ManifoldPoint>,
    /// Rows with an empty latitude or longitude field.
    pub missing: usize,
    /// Rows whose coordinates do not parse or fall out of range.
    pub invalid: usize,
}

impl EarthquakeData {
    pub fn discarded(&self) -> usize {
        self.missing + self.invalid
    }
}

fn locate(spec: &ColumnSpec, header: &csv::StringRecord) -> Option<usize> {
    match spec {
        ColumnSpec::Index(i) => (*i < header.len()).then_some(*i),
        ColumnSpec::Names(names) => header.iter().position(|h| {
            let h = h.trim().trim_matches('"');
            names.iter().any(|n| n.eq_ignore_ascii_case(h))
        }),
    }
}

/// Rows searched for the header line; some downloads prepend a line of
/// search parameters.
const HEADER_SEARCH: usize = 5;

/// Reads latitude/longitude pairs in degrees and converts them to sphere
/// points with colatitude `90 - lat` and east-positive longitude.
pub fn parse_earthquakes<R: Read>(reader: R, columns: &ColumnMap) -> Result<EarthquakeData> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);
    let mut records = rdr.records();
    let mut cols = None;
    for _ in 0..HEADER_SEARCH {
        let Some(rec) = records.next() else { break };
        let rec = rec?;
        if let (Some(a), Some(b)) = (locate(&columns.latitude, &rec), locate(&columns.longitude, &rec)) {
            cols = Some((a, b));
            break;
        }
    }
    let Some((lat_col, lon_col)) = cols else {
        return Err(Error::domain("latitude/longitude columns not found in the header"));
    };

    let mut data = EarthquakeData {
        points: Vec::new(),
        missing: 0,
        invalid: 0,
    };
    for rec in records {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let field = |i: usize| rec.get(i).map(str::trim).unwrap_or("");
        let (lat, lon) = (field(lat_col), field(lon_col));
        if lat.is_empty() || lon.is_empty() {
            data.missing += 1;
            continue;
        }
        match (lat.parse::<f64>(), lon.parse::<f64>()) {
            (Ok(a), Ok(o))
                if (-90.0..=90.0).contains(&a) && (-180.0..=360.0).contains(&o) =>
            {
                data.points.push(ManifoldPoint::from_lat_lon_degrees(a, o));
            }
            _ => data.invalid += 1,
        }
    }
    if data.invalid > 0 {
        warn!("discarded {} rows with unparseable coordinates", data.invalid);
    }
    Ok(data)
}
