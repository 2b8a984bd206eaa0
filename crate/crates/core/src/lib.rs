//! Change detection in image series through the quantization error of
//! self-organizing maps.
//!
//! A 16×16 Kohonen map is trained on the per-pixel feature vectors of an
//! image and the mean distance between every pixel and its best matching
//! unit (the quantization error, QE) is used as a whole-image signal. Small
//! local changes such as an injected lesion, Poisson noise or a slightly
//! enlarged dot shift the QE.
//!
//! - [`som`]: training, BMU search, QE.
//! - [`image`]: PGM/PPM/PNG codecs and feature extraction.
//! - [`synth`]: lesions, Poisson noise, random-dot fields, phantoms.
//! - [`stats`]: t-test, ANOVA, detectability, published tables.
//! - [`series`]: running a configuration over an image series.
//! - [`reproduce`]: self-contained seeded experiments.
//! - [`plot`]: SVG charts of QE series.
//! - [`persist`]: the `SOMQE1` map format.

pub mod image;
pub mod persist;
pub mod plot;
pub mod reproduce;
pub mod rng;
pub mod series;
pub mod som;
pub mod stats;
pub mod synth;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use image::{extract_samples, FeatureMode, ImageBuffer, ImageFormat};
pub use som::{bmu, quantization_error, train, GridIndex, SampleSet, SomMap, TrainConfig};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Decode { path: PathBuf, source: image::ImageError },
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Som(#[from] som::SomError),
    #[error(transparent)]
    MapFile(#[from] persist::MapFileError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error("{0}")]
    Series(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
