//! Self-contained seeded experiments.
//!
//! Each experiment builds its own synthetic corpus from a seed, runs series
//! through the default training configuration and checks a direction per
//! seed:
//!
//! | experiment      | corpus per seed                                  | check                         | required |
//! |-----------------|--------------------------------------------------|-------------------------------|----------|
//! | `lesion_growth` | 20 phantoms, +1 lesion, +2 lesions, `patch:3`    | mean QE strictly increasing   | 19 of 20 |
//! | `poisson_noise` | 10 phantoms and their Poisson-noised copies      | mean QE of noised > clean     | 20 of 20 |
//! | `random_dots`   | 64×64 field of 4 dots, target at ×1.00/1.05/1.10/1.30, `patch:3`, 5 runs | QE strictly increasing | 18 of 20 |
//!
//! The seeds are [`DEFAULT_SEEDS`] (0 through 19). Corpus image `i` of seed
//! `s` is generated from `rng::derive(s, i)`; training uses `s` itself.

use std::fmt::{self, Write as _};
use std::ops::Range;
use std::str::FromStr;

use crate::image::{FeatureMode, ImageBuffer};
use crate::rng;
use crate::series::{compare_series, run_series_on, QeSeriesReport, SeriesConfig, TrainMode};
use crate::som::TrainConfig;
use crate::stats::tables::{Printed, TABLE7};
use crate::stats::{self, StatResult};
use crate::synth::{
    add_poisson_noise, generate_dot_field, generate_phantom, inject_lesion, DotFieldSpec, LesionSpec, PhantomSpec,
};
use crate::Result;

pub const DEFAULT_SEEDS: Range<u64> = 0..20;

pub const LESION_CORPUS: usize = 20;
pub const NOISE_CORPUS: usize = 10;
pub const DOT_SCALES: [f64; 4] = [1.00, 1.05, 1.10, 1.30];
pub const DOT_REPEATS: usize = 5;
/// Lane offset separating noise seeds from phantom seeds.
const NOISE_LANE: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    LesionGrowth,
    PoissonNoise,
    RandomDots,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::LesionGrowth, Experiment::PoissonNoise, Experiment::RandomDots];

    /// Passing seeds required out of `n`.
    pub fn required(&self, n: usize) -> usize {
        match self {
            Experiment::LesionGrowth => n - n / 20,
            Experiment::PoissonNoise => n,
            Experiment::RandomDots => n - n / 10,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::LesionGrowth => "lesion_growth",
            Experiment::PoissonNoise => "poisson_noise",
            Experiment::RandomDots => "random_dots",
        })
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.replace('-', "_").as_str() {
            "lesion_growth" => Ok(Experiment::LesionGrowth),
            "poisson_noise" => Ok(Experiment::PoissonNoise),
            "random_dots" => Ok(Experiment::RandomDots),
            _ => Err(format!("unknown experiment `{s}` (expected lesion_growth, poisson_noise or random_dots)")),
        }
    }
}

/// Values compared for one seed, in the order that must increase.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub values: Vec<f64>,
    pub pass: bool,
    /// t statistics of each later condition against the first.
    pub t: Vec<StatResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproReport {
    pub experiment: Experiment,
    pub conditions: Vec<String>,
    pub outcomes: Vec<SeedOutcome>,
    pub required: usize,
    pub notes: Vec<String>,
}

impl ReproReport {
    pub fn passes(&self) -> usize {
        self.outcomes.iter().filter(|o| o.pass).count()
    }

    pub fn passed(&self) -> bool {
        self.passes() >= self.required
    }

    pub fn failing_seeds(&self) -> Vec<u64> {
        self.outcomes.iter().filter(|o| !o.pass).map(|o| o.seed).collect()
    }
}

impl fmt::Display for ReproReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "experiment {}: {}", self.experiment, self.conditions.join(" < "))?;
        for o in &self.outcomes {
            let vals: Vec<String> = o.values.iter().map(|v| format!("{v:.4}")).collect();
            write!(f, "seed {:>3}  {}  {}", o.seed, vals.join("  "), if o.pass { "ok" } else { "FAIL" })?;
            for t in &o.t {
                write!(f, "  t={:.3}", t.statistic)?;
            }
            writeln!(f)?;
        }
        for note in &self.notes {
            writeln!(f, "{note}")?;
        }
        let failing = self.failing_seeds();
        write!(
            f,
            "{} seeds passed, {} required: {}",
            self.passes(),
            self.required,
            if self.passed() { "PASS" } else { "FAIL" }
        )?;
        if !failing.is_empty() {
            write!(f, " (failing seeds: {failing:?})")?;
        }
        writeln!(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproOptions {
    pub seeds: Vec<u64>,
    pub threads: usize,
}

impl Default for ReproOptions {
    fn default() -> Self {
        ReproOptions { seeds: DEFAULT_SEEDS.collect(), threads: 0 }
    }
}

pub fn reproduce(experiment: Experiment, opts: &ReproOptions) -> Result<ReproReport> {
    let (conditions, notes) = match experiment {
        Experiment::LesionGrowth => (vec!["original", "one lesion", "two lesions"], Vec::new()),
        Experiment::PoissonNoise => (vec!["clean", "noised"], Vec::new()),
        Experiment::RandomDots => (vec!["x1.00", "x1.05", "x1.10", "x1.30"], table7_notes()),
    };
    let outcomes = opts
        .seeds
        .iter()
        .map(|&seed| match experiment {
            Experiment::LesionGrowth => lesion_growth(seed, opts.threads),
            Experiment::PoissonNoise => poisson_noise(seed, opts.threads),
            Experiment::RandomDots => random_dots(seed, opts.threads),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReproReport {
        experiment,
        conditions: conditions.into_iter().map(String::from).collect(),
        required: experiment.required(outcomes.len()),
        outcomes,
        notes,
    })
}

fn series_config(seed: u64, feature: FeatureMode, repeats: usize, threads: usize) -> SeriesConfig {
    SeriesConfig {
        train_mode: TrainMode::PerImage,
        train: TrainConfig::new(feature.dim(1)).with_seed(seed),
        feature,
        input: Vec::new(),
        repeats,
        threads,
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn named(prefix: &str, imgs: Vec<ImageBuffer>) -> Vec<(String, ImageBuffer)> {
    imgs.into_iter().enumerate().map(|(i, img)| (format!("{prefix}{i:02}"), img)).collect()
}

fn outcome_from_series(seed: u64, reports: &[QeSeriesReport]) -> Result<SeedOutcome> {
    let values: Vec<f64> = reports.iter().map(QeSeriesReport::mean).collect();
    let t = reports[1..].iter().map(|r| compare_series(&reports[0], r)).collect::<Result<Vec<_>>>()?;
    Ok(SeedOutcome { seed, pass: strictly_increasing(&values), values, t })
}

/// Lesion centers for a `w × h` base image: left of center, and right of
/// center slightly lower.
pub fn lesion_sites(w: usize, h: usize) -> [LesionSpec; 2] {
    [LesionSpec::at(w / 2 - w / 6, h / 2), LesionSpec::at(w / 2 + w / 6, h / 2 + h / 8)]
}

pub fn lesion_corpus(seed: u64, n: usize) -> Result<[Vec<ImageBuffer>; 3]> {
    let spec = PhantomSpec::default();
    let [first, second] = lesion_sites(spec.width, spec.height);
    let base = (0..n).map(|i| generate_phantom(&spec, rng::derive(seed, i as u64))).collect::<std::result::Result<Vec<_>, _>>()?;
    let one = base.iter().map(|img| inject_lesion(img, &first)).collect::<std::result::Result<Vec<_>, _>>()?;
    let two = one.iter().map(|img| inject_lesion(img, &second)).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok([base, one, two])
}

fn lesion_growth(seed: u64, threads: usize) -> Result<SeedOutcome> {
    let cfg = series_config(seed, FeatureMode::patch(3)?, 1, threads);
    let reports = lesion_corpus(seed, LESION_CORPUS)?
        .into_iter()
        .zip(["orig", "one", "two"])
        .map(|(imgs, prefix)| run_series_on(&cfg, &named(prefix, imgs)))
        .collect::<Result<Vec<_>>>()?;
    outcome_from_series(seed, &reports)
}

pub fn noise_corpus(seed: u64, n: usize) -> Result<[Vec<ImageBuffer>; 2]> {
    let spec = PhantomSpec::default();
    let clean = (0..n).map(|i| generate_phantom(&spec, rng::derive(seed, i as u64))).collect::<std::result::Result<Vec<_>, _>>()?;
    let noised = clean
        .iter()
        .enumerate()
        .map(|(i, img)| add_poisson_noise(img, rng::derive(seed, NOISE_LANE + i as u64)))
        .collect();
    Ok([clean, noised])
}

fn poisson_noise(seed: u64, threads: usize) -> Result<SeedOutcome> {
    let cfg = series_config(seed, FeatureMode::pixel(), 1, threads);
    let reports = noise_corpus(seed, NOISE_CORPUS)?
        .into_iter()
        .zip(["clean", "noised"])
        .map(|(imgs, prefix)| run_series_on(&cfg, &named(prefix, imgs)))
        .collect::<Result<Vec<_>>>()?;
    outcome_from_series(seed, &reports)
}

/// Dot field used by `random_dots`: small enough that the target dot is a
/// visible share of the image.
pub fn dot_spec() -> DotFieldSpec {
    DotFieldSpec { width: 64, height: 64, n_dots: 4, base_radius: 5.0, ..DotFieldSpec::default() }
}

fn random_dots(seed: u64, threads: usize) -> Result<SeedOutcome> {
    let spec = dot_spec();
    let images = DOT_SCALES
        .iter()
        .map(|&s| Ok((format!("x{s:.2}"), generate_dot_field(&spec.with_scale(s), seed)?)))
        .collect::<Result<Vec<_>>>()?;
    let cfg = series_config(seed, FeatureMode::patch(3)?, DOT_REPEATS, threads);
    let report = run_series_on(&cfg, &images)?;
    let values = report.qe_values();
    Ok(SeedOutcome { seed, pass: strictly_increasing(&values), values, t: Vec::new() })
}

/// Human detectability (CP − FP) for the same scale steps.
fn table7_notes() -> Vec<String> {
    let mut out = vec!["human detectability CP-FP (5 s exposure / observer-controlled):".to_string()];
    for row in TABLE7.iter() {
        let (Some(a), Some(b)) = (row.five_seconds, row.observer_controlled) else { continue };
        let d = |(cp, fp): (Printed, Printed)| {
            stats::detectability(cp.value, fp.value).map_or(f64::NAN, |v| v)
        };
        let mut line = String::new();
        let _ = write!(line, "  {:>4}  {:+.1} / {:+.1}  (published QE {})", row.label, d(a), d(b), row.qe.text);
        out.push(line);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.to_string().parse::<Experiment>().unwrap(), e);
        }
        assert_eq!("random-dots".parse::<Experiment>().unwrap(), Experiment::RandomDots);
        assert!("dots".parse::<Experiment>().is_err());
    }

    #[test]
    fn thresholds() {
        assert_eq!(Experiment::LesionGrowth.required(20), 19);
        assert_eq!(Experiment::PoissonNoise.required(20), 20);
        assert_eq!(Experiment::RandomDots.required(20), 18);
        assert_eq!(Experiment::RandomDots.required(3), 3);
    }

    #[test]
    fn lesion_sites_fit_default_phantom() {
        let spec = PhantomSpec::default();
        let base = ImageBuffer::filled(spec.width, spec.height, 8, 0).unwrap();
        for site in lesion_sites(spec.width, spec.height) {
            inject_lesion(&base, &site).unwrap();
        }
    }

    #[test]
    fn detectability_notes_list_three_steps() {
        let notes = table7_notes();
        assert_eq!(notes.len(), 4);
        assert!(notes[3].contains("+20.6 / +26.1"), "{}", notes[3]);
        assert!(notes[1].contains("-4.4 / -4.4"), "{}", notes[1]);
    }

    #[test]
    fn single_seed_poisson_passes() {
        let rep = reproduce(Experiment::PoissonNoise, &ReproOptions { seeds: vec![3], threads: 1 }).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(rep.to_string().contains("PASS"));
    }

    #[test]
    fn report_lists_failing_seeds() {
        let rep = ReproReport {
            experiment: Experiment::RandomDots,
            conditions: vec!["a".into(), "b".into()],
            outcomes: vec![
                SeedOutcome { seed: 4, values: vec![2.0, 1.0], pass: false, t: vec![] },
                SeedOutcome { seed: 5, values: vec![1.0, 2.0], pass: true, t: vec![] },
            ],
            required: 2,
            notes: vec![],
        };
        assert!(!rep.passed());
        assert_eq!(rep.failing_seeds(), vec![4]);
        assert!(rep.to_string().contains("failing seeds: [4]"));
    }
}
