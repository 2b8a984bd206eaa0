// Save a trained map in the SOMQE1 format, reload it and score new images
// against it.
//
// ```text
// cargo run --release --example map_persistence
// ```

use somqe::persist::{load_map, save_map};
use somqe::synth::{add_poisson_noise, generate_phantom, PhantomSpec};
use somqe::{extract_samples, quantization_error, train, FeatureMode, TrainConfig};

pub fn run_example() -> somqe::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| somqe::Error::io(std::env::temp_dir().as_path(), e))?;
    let path = dir.path().join("reference.somqe");

    let reference = generate_phantom(&PhantomSpec::default(), 5)?;
    let samples = extract_samples(&reference, FeatureMode::pixel())?;
    let map = train(&TrainConfig::new(1).with_seed(9), &samples)?;
    save_map(&map, &path)?;
    let bytes = std::fs::metadata(&path).map_err(|e| somqe::Error::io(&path, e))?.len();
    println!("saved {} ({bytes} bytes)", path.display());

    let loaded = load_map(&path)?;
    assert_eq!(loaded, map);
    println!("reference QE  {:.4}", quantization_error(&loaded, &samples)?);

    let noisy = extract_samples(&add_poisson_noise(&reference, 1), FeatureMode::pixel())?;
    println!("noised QE     {:.4}", quantization_error(&loaded, &noisy)?);
    Ok(())
}

fn main() -> somqe::Result<()> {
    run_example()
}
