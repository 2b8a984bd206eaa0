// Enlarge one dot of a random-dot field by 5, 10 and 30 percent and compare
// the QE of each version. Also writes the four images as PGM.
//
// ```text
// cargo run --release --example random_dots -- [seed] [output-dir]
// ```

use std::path::PathBuf;

use somqe::image::write_image;
use somqe::reproduce::{dot_spec, reproduce, Experiment, ReproOptions, DOT_SCALES};
use somqe::synth::generate_dot_field;

fn main() -> somqe::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("somqe-dots"));
    std::fs::create_dir_all(&out).map_err(|e| somqe::Error::io(&out, e))?;

    let spec = dot_spec();
    println!("dot intensity {} on background {}", spec.dot_intensity(), spec.background);
    for scale in DOT_SCALES {
        let path = out.join(format!("dots_{seed}_x{scale:.2}.pgm"));
        write_image(&generate_dot_field(&spec.with_scale(scale), seed)?, &path)?;
        println!("wrote {}", path.display());
    }

    let report = reproduce(Experiment::RandomDots, &ReproOptions { seeds: vec![seed], threads: 0 })?;
    print!("{report}");
    Ok(())
}
