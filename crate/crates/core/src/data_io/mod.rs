//! Dataset ingestion, model persistence and grid export.

pub mod earthquakes;
pub mod grid_io;
pub mod model;
pub mod points;

pub use earthquakes::{parse_earthquakes, ColumnMap, ColumnSpec, EarthquakeData};
pub use grid_io::{export_grid, read_grid};
pub use model::{load_model, read_model, save_model, write_model, ModelFile};
pub use points::{read_points, write_points};
