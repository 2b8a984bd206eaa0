//! Kohonen self-organizing map: initialization, online training, best
//! matching unit search and quantization error.
//!
//! The map is a `rows × cols` grid of weight vectors stored row-major with
//! the components of each node contiguous. Training follows the classic
//! online rule: draw one sample, find its winner, pull every node toward the
//! sample by `alpha(t) * h(grid_dist², sigma(t))`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{self, SomRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("sample set is empty")]
    EmptySamples,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("step {t} outside schedule 0..={total}")]
    StepOutOfRange { t: usize, total: usize },
    #[error("neighborhood radius must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("non-finite value at component {0}")]
    NonFinite(usize),
}

pub type Result<T> = std::result::Result<T, SomError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Neighborhood {
    #[default]
    Gaussian,
    Bubble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Topology {
    #[default]
    Rectangular,
    Hexagonal,
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Neighborhood::Gaussian => "gaussian",
            Neighborhood::Bubble => "bubble",
        })
    }
}

impl FromStr for Neighborhood {
    type Err = SomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Neighborhood::Gaussian),
            "bubble" => Ok(Neighborhood::Bubble),
            other => Err(SomError::InvalidConfig(format!("unknown neighborhood `{other}`"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Rectangular => "rectangular",
            Topology::Hexagonal => "hexagonal",
        })
    }
}

impl FromStr for Topology {
    type Err = SomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" => Ok(Topology::Rectangular),
            "hexagonal" => Ok(Topology::Hexagonal),
            other => Err(SomError::InvalidConfig(format!("unknown topology `{other}`"))),
        }
    }
}

/// Hyperparameters for one training run.
///
/// Defaults: 16×16 map, radius 5 → 1, learning rate 0.2 → 0.01, 10 000
/// iterations, Gaussian neighborhood on a rectangular grid, seed 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    pub radius0: f64,
    pub radius_final: f64,
    pub alpha0: f64,
    pub alpha_final: f64,
    pub iterations: usize,
    pub neighborhood: Neighborhood,
    pub topology: Topology,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(dim: usize) -> Self {
        TrainConfig {
            rows: 16,
            cols: 16,
            dim,
            radius0: 5.0,
            radius_final: 1.0,
            alpha0: 0.2,
            alpha_final: 0.01,
            iterations: 10_000,
            neighborhood: Neighborhood::Gaussian,
            topology: Topology::Rectangular,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(SomError::InvalidConfig(msg.to_string()));
        if self.rows == 0 || self.cols == 0 {
            return bad("map dimensions must be positive");
        }
        if self.dim == 0 {
            return bad("feature dimension must be positive");
        }
        if !(self.radius0 > 0.0 && self.radius_final > 0.0) {
            return bad("radii must be positive");
        }
        if self.radius_final > self.radius0 {
            return bad("radius_final must not exceed radius0");
        }
        if !(self.alpha0 > 0.0 && self.alpha0 <= 1.0 && self.alpha_final > 0.0 && self.alpha_final <= 1.0) {
            return bad("learning rates must lie in (0, 1]");
        }
        if self.alpha_final > self.alpha0 {
            return bad("alpha_final must not exceed alpha0");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        Ok(())
    }

    /// `key=value` lines, one per hyperparameter, in a fixed order.
    pub fn echo(&self) -> String {
        format!(
            "rows={}\ncols={}\ndim={}\nradius0={:?}\nradius_final={:?}\nalpha0={:?}\nalpha_final={:?}\niterations={}\nneighborhood={}\ntopology={}\nseed={}\n",
            self.rows,
            self.cols,
            self.dim,
            self.radius0,
            self.radius_final,
            self.alpha0,
            self.alpha_final,
            self.iterations,
            self.neighborhood,
            self.topology,
            self.seed
        )
    }

    /// Inverse of [`TrainConfig::echo`]. Unknown keys are ignored so the
    /// echo can be embedded in larger reports.
    pub fn from_echo(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::new(1);
        let parse_err = |k: &str, v: &str| SomError::InvalidConfig(format!("bad value `{v}` for `{k}`"));
        for line in text.lines() {
            let line = line.trim_start_matches('#').trim();
            let Some((k, v)) = line.split_once('=') else { continue };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "rows" => cfg.rows = v.parse().map_err(|_| parse_err(k, v))?,
                "cols" => cfg.cols = v.parse().map_err(|_| parse_err(k, v))?,
                "dim" => cfg.dim = v.parse().map_err(|_| parse_err(k, v))?,
                "radius0" => cfg.radius0 = v.parse().map_err(|_| parse_err(k, v))?,
                "radius_final" => cfg.radius_final = v.parse().map_err(|_| parse_err(k, v))?,
                "alpha0" => cfg.alpha0 = v.parse().map_err(|_| parse_err(k, v))?,
                "alpha_final" => cfg.alpha_final = v.parse().map_err(|_| parse_err(k, v))?,
                "iterations" => cfg.iterations = v.parse().map_err(|_| parse_err(k, v))?,
                "neighborhood" => cfg.neighborhood = v.parse()?,
                "topology" => cfg.topology = v.parse()?,
                "seed" => cfg.seed = v.parse().map_err(|_| parse_err(k, v))?,
                _ => {}
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `n` feature vectors of equal length, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
}

impl SampleSet {
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(SomError::InvalidConfig("feature dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(SomError::EmptySamples);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(SomError::DimensionMismatch { expected: dim, found: data.len() % dim });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(SomError::NonFinite(i));
        }
        Ok(SampleSet { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(SomError::EmptySamples)?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(SomError::DimensionMismatch { expected: dim, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(dim, data)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies every component by `k`.
    pub fn scaled(&self, k: f64) -> SampleSet {
        SampleSet { dim: self.dim, data: self.data.iter().map(|v| v * k).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SomMap {
    rows: usize,
    cols: usize,
    dim: usize,
    weights: Vec<f64>,
}

impl SomMap {
    pub fn from_weights(rows: usize, cols: usize, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(SomError::InvalidConfig("map dimensions must be positive".into()));
        }
        let expected = rows * cols * dim;
        if weights.len() != expected {
            return Err(SomError::DimensionMismatch { expected, found: weights.len() });
        }
        if let Some(i) = weights.iter().position(|v| !v.is_finite()) {
            return Err(SomError::NonFinite(i));
        }
        Ok(SomMap { rows, cols, dim, weights })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, linear: usize) -> &[f64] {
        &self.weights[linear * self.dim..(linear + 1) * self.dim]
    }

    pub fn weight(&self, at: GridIndex) -> &[f64] {
        self.node(at.row * self.cols + at.col)
    }

    pub fn grid_index(&self, linear: usize) -> GridIndex {
        GridIndex { row: linear / self.cols, col: linear % self.cols }
    }

    pub fn scaled(&self, k: f64) -> SomMap {
        SomMap { weights: self.weights.iter().map(|v| v * k).collect(), ..*self }
    }

    /// Linear index and squared distance of the winner. Ties go to the
    /// lowest row-major index.
    fn winner(&self, x: &[f64]) -> (usize, f64) {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (i, w) in self.weights.chunks_exact(self.dim).enumerate() {
            let d2 = squared_distance(w, x);
            if d2 < best_d2 {
                best = i;
                best_d2 = d2;
            }
        }
        (best, best_d2)
    }
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(SomError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Builds a map whose nodes are copies of samples drawn with replacement.
pub fn init_map(config: &TrainConfig, data: &SampleSet) -> Result<SomMap> {
    let mut rng = rng::seeded(config.seed);
    init_with(config, data, &mut rng)
}

fn init_with(config: &TrainConfig, data: &SampleSet, rng: &mut SomRng) -> Result<SomMap> {
    config.validate()?;
    check_dim(config.dim, data.dim())?;
    if data.is_empty() {
        return Err(SomError::EmptySamples);
    }
    let nodes = config.rows * config.cols;
    let mut weights = Vec::with_capacity(nodes * config.dim);
    for _ in 0..nodes {
        weights.extend_from_slice(data.get(rng::index(rng, data.len())));
    }
    Ok(SomMap { rows: config.rows, cols: config.cols, dim: config.dim, weights })
}

pub fn bmu(map: &SomMap, x: &[f64]) -> Result<GridIndex> {
    check_dim(map.dim, x.len())?;
    Ok(map.grid_index(map.winner(x).0))
}

/// Linear schedule `start + (end - start) * t / total`.
pub fn decay(t: usize, total: usize, start: f64, end: f64) -> Result<f64> {
    if total == 0 || t > total {
        return Err(SomError::StepOutOfRange { t, total });
    }
    Ok(start + (end - start) * (t as f64 / total as f64))
}

pub fn neighborhood_weight(grid_distance_sq: f64, sigma: f64, kind: Neighborhood) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(SomError::NonPositiveSigma(sigma));
    }
    Ok(neighborhood_unchecked(grid_distance_sq, sigma, kind))
}

#[inline]
fn neighborhood_unchecked(d2: f64, sigma: f64, kind: Neighborhood) -> f64 {
    match kind {
        Neighborhood::Gaussian => (-d2 / (2.0 * sigma * sigma)).exp(),
        Neighborhood::Bubble => {
            if d2 <= sigma * sigma {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn node_position(row: usize, col: usize, topology: Topology) -> (f64, f64) {
    match topology {
        Topology::Rectangular => (row as f64, col as f64),
        Topology::Hexagonal => {
            let shift = if row % 2 == 1 { 0.5 } else { 0.0 };
            (row as f64 * 3f64.sqrt() / 2.0, col as f64 + shift)
        }
    }
}

/// Grid coordinates of every node. Hexagonal grids shift odd rows by half a
/// cell and compress row spacing to `sqrt(3)/2`.
fn node_positions(rows: usize, cols: usize, topology: Topology) -> Vec<(f64, f64)> {
    (0..rows * cols).map(|i| node_position(i / cols, i % cols, topology)).collect()
}

/// Squared grid distance between two nodes given by linear index.
pub fn grid_distance_sq(cols: usize, topology: Topology, a: usize, b: usize) -> f64 {
    let pa = node_position(a / cols, a % cols, topology);
    let pb = node_position(b / cols, b % cols, topology);
    (pa.0 - pb.0).powi(2) + (pa.1 - pb.1).powi(2)
}

/// Initializes from the data and trains with the online rule.
///
/// A single generator seeded from `config.seed` drives first the
/// initialization draws and then the per-iteration sample draws.
pub fn train(config: &TrainConfig, data: &SampleSet) -> Result<SomMap> {
    let mut rng = rng::seeded(config.seed);
    let mut map = init_with(config, data, &mut rng)?;
    train_steps(&mut map, config, data, &mut rng)?;
    Ok(map)
}

/// Continues training an existing map, drawing samples from a generator
/// seeded with `config.seed`.
pub fn train_from(map: &mut SomMap, config: &TrainConfig, data: &SampleSet) -> Result<()> {
    config.validate()?;
    if map.rows != config.rows || map.cols != config.cols {
        return Err(SomError::InvalidConfig(format!(
            "map is {}x{} but config asks for {}x{}",
            map.rows, map.cols, config.rows, config.cols
        )));
    }
    let mut rng = rng::seeded(config.seed);
    train_steps(map, config, data, &mut rng)
}

fn train_steps(map: &mut SomMap, config: &TrainConfig, data: &SampleSet, rng: &mut SomRng) -> Result<()> {
    check_dim(map.dim, data.dim())?;
    if data.is_empty() {
        return Err(SomError::EmptySamples);
    }
    let dim = map.dim;
    let pos = node_positions(map.rows, map.cols, config.topology);
    let total = config.iterations;
    for t in 0..total {
        let x = data.get(rng::index(rng, data.len()));
        let (c, _) = map.winner(x);
        let alpha = decay(t, total, config.alpha0, config.alpha_final)?;
        let sigma = decay(t, total, config.radius0, config.radius_final)?;
        let pc = pos[c];
        for (i, w) in map.weights.chunks_exact_mut(dim).enumerate() {
            let d2 = (pos[i].0 - pc.0).powi(2) + (pos[i].1 - pc.1).powi(2);
            let h = neighborhood_unchecked(d2, sigma, config.neighborhood);
            if h == 0.0 {
                continue;
            }
            let step = alpha * h;
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += step * (xk - *wk);
            }
        }
    }
    Ok(())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

const PARALLEL_MIN_SAMPLES: usize = 4096;

/// Mean Euclidean distance between each sample and its winner.
///
/// Winner search may run in parallel; the reduction always walks the
/// samples in index order so the result is bit-stable across thread counts.
pub fn quantization_error(map: &SomMap, data: &SampleSet) -> Result<f64> {
    check_dim(map.dim, data.dim())?;
    if data.is_empty() {
        return Err(SomError::EmptySamples);
    }
    let dists: Vec<f64> = if data.len() >= PARALLEL_MIN_SAMPLES {
        data.as_flat()
            .par_chunks_exact(data.dim())
            .map(|x| map.winner(x).1.sqrt())
            .collect()
    } else {
        data.iter().map(|x| map.winner(x).1.sqrt()).collect()
    };
    let sum: CompensatedSum = dists.into_iter().collect();
    Ok(sum.total() / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rows: usize, cols: usize, dim: usize) -> TrainConfig {
        TrainConfig { rows, cols, ..TrainConfig::new(dim) }
    }

    #[test]
    fn single_distinct_sample_fills_every_node() {
        let data = SampleSet::from_rows(&[[3.0, -1.5], [3.0, -1.5], [3.0, -1.5]]).unwrap();
        let map = init_map(&cfg(4, 5, 2), &data).unwrap();
        for i in 0..map.len() {
            assert_eq!(map.node(i), &[3.0, -1.5]);
        }
    }

    #[test]
    fn init_rejects_bad_input() {
        let data = SampleSet::from_rows(&[[1.0, 2.0]]).unwrap();
        assert_eq!(
            init_map(&cfg(2, 2, 3), &data),
            Err(SomError::DimensionMismatch { expected: 3, found: 2 })
        );
        assert_eq!(SampleSet::from_flat(2, vec![]), Err(SomError::EmptySamples));
        assert!(SampleSet::from_rows::<[f64; 1]>(&[]).is_err());
    }

    #[test]
    fn bmu_on_single_node_map() {
        let map = SomMap::from_weights(1, 1, 2, vec![10.0, 10.0]).unwrap();
        assert_eq!(bmu(&map, &[-4.0, 7.0]).unwrap(), GridIndex { row: 0, col: 0 });
    }

    #[test]
    fn bmu_exact_match_wins() {
        let (rows, cols) = (6, 8);
        let mut w: Vec<f64> = (0..rows * cols).map(|i| 100.0 + i as f64).collect();
        w[3 * cols + 5] = 0.5;
        let map = SomMap::from_weights(rows, cols, 1, w).unwrap();
        assert_eq!(bmu(&map, &[0.5]).unwrap(), GridIndex { row: 3, col: 5 });
    }

    #[test]
    fn bmu_ties_go_to_lowest_index() {
        let map = SomMap::from_weights(2, 2, 1, vec![5.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(bmu(&map, &[0.0]).unwrap(), GridIndex { row: 0, col: 1 });
        assert!(matches!(bmu(&map, &[0.0, 1.0]), Err(SomError::DimensionMismatch { .. })));
    }

    #[test]
    fn decay_endpoints_and_midpoint() {
        assert_eq!(decay(0, 100, 5.0, 1.0).unwrap(), 5.0);
        assert_eq!(decay(100, 100, 5.0, 1.0).unwrap(), 1.0);
        assert!((decay(50, 100, 0.2, 0.01).unwrap() - 0.105).abs() < 1e-15);
        assert_eq!(decay(101, 100, 5.0, 1.0), Err(SomError::StepOutOfRange { t: 101, total: 100 }));
        assert!(decay(0, 0, 5.0, 1.0).is_err());
    }

    #[test]
    fn neighborhood_values() {
        assert_eq!(neighborhood_weight(0.0, 2.5, Neighborhood::Gaussian).unwrap(), 1.0);
        let s: f64 = 1.7;
        let g = neighborhood_weight(s * s, s, Neighborhood::Gaussian).unwrap();
        assert!((g - 0.606531).abs() < 1e-6);
        let d: f64 = s + 1e-9;
        assert_eq!(neighborhood_weight(d * d, s, Neighborhood::Bubble).unwrap(), 0.0);
        assert_eq!(neighborhood_weight(s * s, s, Neighborhood::Bubble).unwrap(), 1.0);
        assert_eq!(neighborhood_weight(1.0, 0.0, Neighborhood::Gaussian), Err(SomError::NonPositiveSigma(0.0)));
    }

    #[test]
    fn hexagonal_neighbors_are_unit_distance() {
        // node (1,0) sits half a cell right of (0,0) and (2,0)
        let d_up = grid_distance_sq(3, Topology::Hexagonal, 3, 0);
        let d_right = grid_distance_sq(3, Topology::Hexagonal, 3, 1);
        assert!((d_up - 1.0).abs() < 1e-12);
        assert!((d_right - 1.0).abs() < 1e-12);
        assert_eq!(grid_distance_sq(3, Topology::Rectangular, 0, 8), 8.0);
    }

    #[test]
    fn quantization_error_basic_cases() {
        let map = SomMap::from_weights(1, 1, 2, vec![1.0, 1.0]).unwrap();
        let one = SampleSet::from_rows(&[[4.0, 5.0]]).unwrap();
        assert_eq!(quantization_error(&map, &one).unwrap(), 5.0);

        let map = SomMap::from_weights(1, 3, 1, vec![0.0, 2.0, 7.0]).unwrap();
        let on_nodes = SampleSet::from_rows(&[[7.0], [0.0], [2.0], [2.0]]).unwrap();
        assert_eq!(quantization_error(&map, &on_nodes).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::new(1).validate().is_ok());
        let mut c = TrainConfig::new(1);
        c.radius_final = 6.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::new(1);
        c.alpha0 = 1.5;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::new(1);
        c.iterations = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = TrainConfig::new(9).with_seed(123456789);
        c.neighborhood = Neighborhood::Bubble;
        c.topology = Topology::Hexagonal;
        c.alpha_final = 0.1 + 0.02;
        assert_eq!(TrainConfig::from_echo(&c.echo()).unwrap(), c);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.total(), 1000.0);
    }
}
