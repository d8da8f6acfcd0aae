//! Run a grid experiment from a JSON config and print the markdown table.
//!
//!     cargo run --release --example grid_experiment -- crates/core/examples/grid.json

use std::path::PathBuf;

use ile::harness::{run_grid, GridConfig};

fn main() -> ile::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/grid.json"));
    let cfg = GridConfig::read(&path)?;
    let report = run_grid(&cfg, None)?;
    print!("{}", report.to_markdown());
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} {}: {}", row.model, row.variant.name(), row.error.as_deref().unwrap_or(""));
    }
    Ok(())
}
