//! On-disk formats: scenario JSON, timeline JSON Lines, search-space JSON,
//! and the CSV exports.

mod csvout;
mod scenario;
mod timeline;

pub use csvout::{write_curves_csv, write_occupancy_csv, write_summary_csv};
pub use scenario::{read_scenario, read_space, write_scenario};
pub use timeline::{format_event, read_timeline, write_timeline};
