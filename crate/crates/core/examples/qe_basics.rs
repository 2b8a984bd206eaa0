// Train a map on one image and inspect its quantization error.
//
// ```text
// cargo run --release --example qe_basics
// ```

use somqe::synth::{generate_phantom, PhantomSpec};
use somqe::{bmu, extract_samples, quantization_error, train, FeatureMode, TrainConfig};

pub fn run_example() -> somqe::Result<()> {
    let img = generate_phantom(&PhantomSpec::default(), 1)?;
    let samples = extract_samples(&img, FeatureMode::pixel())?;

    let cfg = TrainConfig::new(samples.dim()).with_seed(42);
    let map = train(&cfg, &samples)?;
    let qe = quantization_error(&map, &samples)?;
    println!("{}x{} map, {} samples, QE = {qe:.4}", map.rows(), map.cols(), samples.len());

    // Where do a dark background pixel and a bright tissue pixel land?
    for x in [[20.0], [200.0]] {
        let g = bmu(&map, &x)?;
        println!("intensity {:>5} -> node ({}, {}) weight {:.2}", x[0], g.row, g.col, map.weight(g)[0]);
    }

    // A smaller map quantizes more coarsely.
    let coarse = TrainConfig { rows: 4, cols: 4, radius0: 2.0, ..cfg };
    let coarse_qe = quantization_error(&train(&coarse, &samples)?, &samples)?;
    println!("4x4 map QE = {coarse_qe:.4}");
    Ok(())
}

fn main() -> somqe::Result<()> {
    run_example()
}
