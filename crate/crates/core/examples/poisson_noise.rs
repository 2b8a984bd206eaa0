// Clean versus Poisson-noised images: the noised series has the higher QE.
//
// ```text
// cargo run --release --example poisson_noise
// ```

use somqe::reproduce::{noise_corpus, reproduce, Experiment, ReproOptions};

pub fn run_example() -> somqe::Result<()> {
    let [clean, noised] = noise_corpus(0, 1)?;
    let changed = clean[0].pixels().iter().zip(noised[0].pixels()).filter(|(a, b)| a != b).count();
    println!("noise changed {changed} of {} pixels in the first image", clean[0].pixels().len());

    let report = reproduce(Experiment::PoissonNoise, &ReproOptions { seeds: (0..3).collect(), threads: 0 })?;
    print!("{report}");
    Ok(())
}

fn main() -> somqe::Result<()> {
    run_example()
}
