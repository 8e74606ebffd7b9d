//! Regenerates `tests/fixtures/derived.txt` from the oracles.
//!
//! cargo run -p saddle-core --features oracle --example gen_fixtures

use std::io::Write;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/derived.txt");
    let fixtures = saddle_core::oracle::derived_fixtures()?;
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "# name,inputs,outputs,tolerance (vectors are ';'-separated)")?;
    writeln!(f, "# generated by examples/gen_fixtures.rs; do not edit by hand")?;
    for fx in &fixtures {
        writeln!(f, "{}", fx.to_line())?;
    }
    println!("wrote {} fixtures to {}", fixtures.len(), path.display());
    Ok(())
}
