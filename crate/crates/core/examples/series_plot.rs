// Run two image series through the same configuration, compare them and
// chart the result.
//
// ```text
// cargo run --release --example series_plot -- [output-dir]
// ```

use std::path::PathBuf;

use somqe::plot::{emit_plot, PlotSeries};
use somqe::reproduce::{lesion_corpus, lesion_sites};
use somqe::series::{compare_series, run_series_on, SeriesConfig, TrainMode};
use somqe::synth::PhantomSpec;
use somqe::FeatureMode;

pub fn run_example() -> somqe::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("somqe-series"));
    std::fs::create_dir_all(&out).map_err(|e| somqe::Error::io(&out, e))?;

    let [clean, one, two] = lesion_corpus(3, 6)?;
    let spec = PhantomSpec::default();
    println!("lesions at {:?}", lesion_sites(spec.width, spec.height).map(|l| l.center));

    let mut cfg = SeriesConfig::new(Vec::new(), FeatureMode::patch(3)?);
    cfg.train.rows = 8;
    cfg.train.cols = 8;
    cfg.train.radius0 = 3.0;
    cfg.train.iterations = 3000;
    cfg.train_mode = TrainMode::PerImage;

    let named = |prefix: &str, imgs: Vec<_>| -> Vec<_> {
        imgs.into_iter().enumerate().map(|(i, img)| (format!("{prefix}{i}"), img)).collect()
    };
    let reports = [
        ("original", run_series_on(&cfg, &named("orig", clean))?),
        ("one lesion", run_series_on(&cfg, &named("one", one))?),
        ("two lesions", run_series_on(&cfg, &named("two", two))?),
    ];
    for (label, report) in &reports {
        println!("{label:<12} mean {:.4}  sd {:.4}", report.mean(), report.sd());
    }
    println!("two lesions vs original: {}", compare_series(&reports[0].1, &reports[2].1)?);

    reports[0].1.write_to(&out.join("original"))?;
    let plot: Vec<_> = reports.iter().map(|(label, r)| PlotSeries::from_report(*label, r)).collect();
    let svg = out.join("qe.svg");
    emit_plot(&plot, &svg)?;
    println!("wrote {} and {}", out.join("original").display(), svg.display());
    Ok(())
}

fn main() -> somqe::Result<()> {
    run_example()
}
