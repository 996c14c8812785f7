//! Writes the two synthetic benchmark datasets to `data/` so the CLI can be
//! tried without an external dataset.
//!
//! Run with: cargo run --release --example make_synthetic

use ggh::data::write_csv;
use ggh::synth;

fn main() -> ggh::Result<()> {
    std::fs::create_dir_all("data")?;
    write_csv(
        &synth::hypothesis_benchmark(600, 7),
        "data/synthetic_hypothesis.csv",
    )?;
    write_csv(&synth::noise_benchmark(600, 7), "data/synthetic_noise.csv")?;
    println!("wrote data/synthetic_hypothesis.csv and data/synthetic_noise.csv");
    Ok(())
}
