//! Writes the frame's beat cube as a binary dump and reads it back.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rts_aoa::cube::read_dump;
use rts_aoa::scenario::{dump_spectrum, Scenario};

fn main() -> rts_aoa::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let scenario = Scenario::load(&dir.join("examples/scenarios/table_one.json"))?;
    let out = dir.join("../../target/dump");
    for f in dump_spectrum(&scenario, &out)? {
        let cube = read_dump(BufReader::new(File::open(&f)?))?;
        println!(
            "{}: {} samples x {} chirps x {} antennas, energy {:.4e}",
            f.display(),
            cube.samples,
            cube.chirps,
            cube.antennas,
            cube.energy()
        );
    }
    Ok(())
}
