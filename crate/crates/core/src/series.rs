//! Running one training configuration over an ordered series of images.
//!
//! In [`TrainMode::PerImage`] every image gets a fresh map trained with the
//! same configuration and seed. In [`TrainMode::Reference`] a single map is
//! trained on the first image and every image is scored against it.
//!
//! Results do not depend on the worker count: images are independent, each
//! training run is sequential, and reports are assembled in input order.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::image::{extract_samples, read_image, FeatureMode, ImageBuffer};
use crate::persist;
use crate::rng;
use crate::som::{quantization_error, train, SampleSet, SomMap, TrainConfig};
use crate::stats::{self, StatResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrainMode {
    #[default]
    PerImage,
    Reference,
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::PerImage => "per-image",
            TrainMode::Reference => "reference",
        })
    }
}

impl FromStr for TrainMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "per-image" | "per_image" => Ok(TrainMode::PerImage),
            "reference" => Ok(TrainMode::Reference),
            other => Err(format!("unknown train mode `{other}` (expected per-image or reference)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesConfig {
    pub train_mode: TrainMode,
    /// `dim` is overwritten with the feature dimension of the images.
    pub train: TrainConfig,
    pub feature: FeatureMode,
    pub input: Vec<PathBuf>,
    /// Training runs averaged per image. Run 0 uses `train.seed`, run `r`
    /// uses `rng::derive(train.seed, r)`.
    pub repeats: usize,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
}

impl SeriesConfig {
    pub fn new(input: Vec<PathBuf>, feature: FeatureMode) -> Self {
        SeriesConfig {
            train_mode: TrainMode::PerImage,
            train: TrainConfig::new(1),
            feature,
            input,
            repeats: 1,
            threads: 0,
        }
    }

    /// Seed of training run `r`.
    pub fn run_seed(&self, r: usize) -> u64 {
        if r == 0 {
            self.train.seed
        } else {
            rng::derive(self.train.seed, r as u64)
        }
    }

    /// Every setting that affects QE values, as `key=value` lines.
    pub fn echo(&self) -> String {
        format!("{}feature={}\ntrain_mode={}\nrepeats={}\n", self.train.echo(), self.feature, self.train_mode, self.repeats)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEntry {
    pub image: String,
    /// Mean over `runs`.
    pub qe: f64,
    pub runs: Vec<f64>,
}

impl SeriesEntry {
    /// Run-to-run standard deviation; 0 for a single run.
    pub fn run_sd(&self) -> f64 {
        stats::std_dev(&self.runs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QeSeriesReport {
    pub entries: Vec<SeriesEntry>,
    /// Output of [`SeriesConfig::echo`]; empty for reports read back from CSV.
    pub echo: String,
    /// Maps of training run 0: one per image in per-image mode, a single
    /// one in reference mode.
    pub maps: Vec<SomMap>,
}

pub const CSV_HEADER: &str = "index,image,qe";

impl QeSeriesReport {
    pub fn qe_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.qe).collect()
    }

    pub fn mean(&self) -> f64 {
        stats::mean(&self.qe_values())
    }

    pub fn sd(&self) -> f64 {
        stats::std_dev(&self.qe_values())
    }

    pub fn sem(&self) -> f64 {
        stats::std_error(&self.qe_values())
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{},{:.4}", i, csv_field(&e.image), e.qe);
        }
        out
    }

    /// Reads the `index,image,qe` layout written by [`QeSeriesReport::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(stats::StatsError::from)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["index", "image", "qe"] {
            return Err(Error::Series(format!("expected header `{CSV_HEADER}`")));
        }
        let mut entries = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(stats::StatsError::from)?;
            let qe: f64 = record[2].parse().map_err(|_| stats::StatsError::BadNumber {
                column: "qe".into(),
                value: record[2].to_string(),
            })?;
            entries.push(SeriesEntry { image: record[1].to_string(), qe, runs: vec![qe] });
        }
        if entries.is_empty() {
            return Err(Error::Series("series file has no rows".into()));
        }
        Ok(QeSeriesReport { entries, echo: String::new(), maps: Vec::new() })
    }

    /// Human-readable report: the configuration echo as `#` lines, then one
    /// line per image and the summary statistics.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in self.echo.lines() {
            let _ = writeln!(out, "# {line}");
        }
        let repeated = self.entries.iter().any(|e| e.runs.len() > 1);
        for (i, e) in self.entries.iter().enumerate() {
            if repeated {
                let _ = writeln!(out, "{i:>4}  {:<24} {:.4} ± {:.4}", e.image, e.qe, e.run_sd());
            } else {
                let _ = writeln!(out, "{i:>4}  {:<24} {:.4}", e.image, e.qe);
            }
        }
        let _ = writeln!(out, "mean={:.4} sd={:.4} sem={:.4} n={}", self.mean(), self.sd(), self.sem(), self.entries.len());
        out
    }

    /// Writes `series.csv`, `report.txt` and `maps/NNNN.somqe` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let maps_dir = dir.join("maps");
        fs::create_dir_all(&maps_dir).map_err(|e| Error::io(&maps_dir, e))?;
        let csv_path = dir.join("series.csv");
        fs::write(&csv_path, self.to_csv()).map_err(|e| Error::io(&csv_path, e))?;
        let txt_path = dir.join("report.txt");
        fs::write(&txt_path, self.to_text()).map_err(|e| Error::io(&txt_path, e))?;
        for (i, map) in self.maps.iter().enumerate() {
            persist::save_map(map, maps_dir.join(format!("{i:04}.somqe")))?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads every input image and runs the series. Images are named by file
/// name.
pub fn run_series(cfg: &SeriesConfig) -> Result<QeSeriesReport> {
    if cfg.input.is_empty() {
        return Err(Error::Series("series has no input images".into()));
    }
    let images = cfg
        .input
        .iter()
        .map(|p| {
            let name = p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
            read_image(p).map(|img| (name, img))
        })
        .collect::<Result<Vec<_>>>()?;
    run_series_on(cfg, &images)
}

/// Runs the series on images already in memory; `cfg.input` is ignored.
pub fn run_series_on(cfg: &SeriesConfig, images: &[(String, ImageBuffer)]) -> Result<QeSeriesReport> {
    let Some((_, first)) = images.first() else {
        return Err(Error::Series("series has no input images".into()));
    };
    if cfg.repeats == 0 {
        return Err(Error::Series("repeats must be at least 1".into()));
    }
    for (name, img) in images {
        if !img.same_shape(first) {
            return Err(Error::Series(format!(
                "{name}: {}x{}x{} does not match the first image ({}x{}x{})",
                img.width(),
                img.height(),
                img.channels(),
                first.width(),
                first.height(),
                first.channels()
            )));
        }
    }
    let mut train_cfg = cfg.train.clone();
    train_cfg.dim = cfg.feature.dim(first.channels());
    train_cfg.validate()?;
    let cfg = SeriesConfig { train: train_cfg, ..cfg.clone() };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Series(format!("thread pool: {e}")))?;
    let (runs, maps) = pool.install(|| -> Result<(Vec<Vec<f64>>, Vec<SomMap>)> {
        let samples: Vec<SampleSet> =
            images.par_iter().map(|(_, img)| extract_samples(img, cfg.feature)).collect::<std::result::Result<_, _>>()?;
        match cfg.train_mode {
            TrainMode::PerImage => {
                let per_image: Vec<(Vec<f64>, SomMap)> = samples
                    .par_iter()
                    .map(|s| {
                        let mut qes = Vec::with_capacity(cfg.repeats);
                        let mut first_map = None;
                        for r in 0..cfg.repeats {
                            let map = train(&cfg.train.clone().with_seed(cfg.run_seed(r)), s)?;
                            qes.push(quantization_error(&map, s)?);
                            first_map.get_or_insert(map);
                        }
                        Ok((qes, first_map.expect("repeats >= 1")))
                    })
                    .collect::<Result<_>>()?;
                Ok(per_image.into_iter().unzip())
            }
            TrainMode::Reference => {
                let maps: Vec<SomMap> = (0..cfg.repeats)
                    .into_par_iter()
                    .map(|r| train(&cfg.train.clone().with_seed(cfg.run_seed(r)), &samples[0]))
                    .collect::<std::result::Result<_, _>>()?;
                let runs = samples
                    .par_iter()
                    .map(|s| maps.iter().map(|m| quantization_error(m, s)).collect::<std::result::Result<Vec<_>, _>>())
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok((runs, maps.into_iter().take(1).collect()))
            }
        }
    })?;

    let entries = images
        .iter()
        .zip(runs)
        .map(|((name, _), runs)| SeriesEntry { image: name.clone(), qe: stats::mean(&runs), runs })
        .collect();
    Ok(QeSeriesReport { entries, echo: cfg.echo(), maps })
}

/// Student t of `b` against `a`: positive when `b` has the higher QE.
pub fn compare_series(a: &QeSeriesReport, b: &QeSeriesReport) -> Result<StatResult> {
    Ok(stats::two_sample_t(&b.qe_values(), &a.qe_values(), true)?)
}
