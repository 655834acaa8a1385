//! Regenerate the bundled demo fixtures:
//! `cargo run -p prohow-cli --example gen_fixtures [target-dir]`
//! (default target: ./fixtures). Output is deterministic; running twice
//! writes identical files.

use std::path::PathBuf;

fn main() -> anyhow::Result<()> {
    let target = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fixtures"));
    prohow_cli::fixtures::write_fixtures(&target)?;
    println!("fixtures written under {}", target.display());
    Ok(())
}
