//! Snapshot files: write a field, read it back, recompute energies.
//!
//! A snapshot is a one-line JSON header (dimension, grid size, eps,
//! time) followed by the raw little-endian f64 samples. Roundtripping is
//! bit exact, so energies recomputed from a file match the originals to
//! the last bit. The same format is what the command-line tool writes
//! during runs and what its `energy` subcommand reads.
//!
//! Run with `cargo run --example snapshot_roundtrip`.

use phaseflow::energies::energy_report;
use phaseflow::geometry::{initialize, ShapeSpec};
use phaseflow::profile1d::ProfileModel;
use phaseflow::spectral::{read_snapshot, write_snapshot, TorusGrid};

fn main() {
    let grid = TorusGrid::new(2, 64, 1.0 / 16.0);
    let u = initialize(
        grid,
        &ShapeSpec::RandomBalls {
            count: 4,
            radius_range: (0.05, 0.12),
            rng_seed: 7,
        },
    );

    let path = std::env::temp_dir().join("phaseflow_roundtrip.snap");
    write_snapshot(&path, &u, 0.25).expect("write snapshot");
    let (v, time) = read_snapshot(&path).expect("read snapshot");

    let model = ProfileModel::new();
    let before = energy_report(&u, &model, 0.25).expect("energies before");
    let after = energy_report(&v, &model, time).expect("energies after");

    println!("wrote {} samples to {}", u.values.len(), path.display());
    println!("header time restored as {time}");
    let exact = u
        .values
        .iter()
        .zip(&v.values)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("values bit-identical: {exact}");
    println!();
    println!("{:>14} {:>16} {:>16}", "", "written", "reread");
    println!(
        "{:>14} {:>16.12} {:>16.12}",
        "perimeter_ag", before.perimeter_ag, after.perimeter_ag
    );
    println!(
        "{:>14} {:>16.12} {:>16.12}",
        "willmore_ag", before.willmore_ag, after.willmore_ag
    );
    println!("{:>14} {:>16.12} {:>16.12}", "mass", before.mass, after.mass);

    let _ = std::fs::remove_file(&path);
}
