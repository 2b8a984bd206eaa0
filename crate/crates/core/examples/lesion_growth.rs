// Inject one and then two lesions into synthetic base images and watch the
// mean QE rise. Runs the full seeded experiment, or the first `n` seeds.
//
// ```text
// cargo run --release --example lesion_growth -- 3
// ```

use somqe::reproduce::{reproduce, Experiment, ReproOptions, DEFAULT_SEEDS};

fn main() -> somqe::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEEDS.end);
    let report = reproduce(Experiment::LesionGrowth, &ReproOptions { seeds: (0..n).collect(), threads: 0 })?;
    print!("{report}");
    Ok(())
}
