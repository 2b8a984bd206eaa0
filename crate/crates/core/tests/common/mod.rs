//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use somqe::rng::{self, SomRng};
use somqe::{SampleSet, SomMap};

pub fn uniform(rng: &mut SomRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::unit(rng)
}

pub fn random_map(rng: &mut SomRng, rows: usize, cols: usize, dim: usize) -> SomMap {
    let w = (0..rows * cols * dim).map(|_| uniform(rng, -10.0, 10.0)).collect();
    SomMap::from_weights(rows, cols, dim, w).unwrap()
}

pub fn random_samples(rng: &mut SomRng, n: usize, dim: usize) -> SampleSet {
    SampleSet::from_flat(dim, (0..n * dim).map(|_| uniform(rng, -12.0, 12.0)).collect()).unwrap()
}

/// Exhaustive nearest node; the first strict minimum in row-major order.
pub fn brute_bmu(map: &SomMap, x: &[f64]) -> usize {
    let mut best = None::<(usize, f64)>;
    for i in 0..map.len() {
        let d: f64 = map.node(i).iter().zip(x).map(|(w, v)| (w - v).powi(2)).sum::<f64>().sqrt();
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((i, d)),
        }
    }
    best.unwrap().0
}

/// Plain mean of Euclidean distances to the nearest node.
pub fn brute_qe(map: &SomMap, data: &SampleSet) -> f64 {
    let mut total = 0.0;
    for x in data.iter() {
        total += map.node(brute_bmu(map, x)).iter().zip(x).map(|(w, v)| (w - v).powi(2)).sum::<f64>().sqrt();
    }
    total / data.len() as f64
}

/// `ln Γ(n / 2)` for a positive integer `n`, by exact recursion from
/// `Γ(1) = 1` and `Γ(1/2) = sqrt(π)`.
pub fn ln_gamma_half(n: u32) -> f64 {
    assert!(n > 0);
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| (k as f64).ln()).sum()
    } else {
        0.5 * std::f64::consts::PI.ln() + (0..(n - 1) / 2).map(|j| (j as f64 + 0.5).ln()).sum::<f64>()
    }
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Two-sided Student t p-value by integrating the density over `[0, |t|]`.
pub fn t_p_oracle(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let ln_c = ln_gamma_half(df + 1) - ln_gamma_half(df) - 0.5 * (nu * std::f64::consts::PI).ln();
    let density = |x: f64| (ln_c - 0.5 * (nu + 1.0) * (1.0 + x * x / nu).ln()).exp();
    1.0 - 2.0 * simpson(density, 0.0, t.abs(), 20_000)
}

/// Upper tail of `F(d1, d2)` by integrating the density over `[0, f]`,
/// substituting `x = u²` so the integrand is finite and smooth at zero.
pub fn f_p_oracle(f: f64, d1: u32, d2: u32) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let ln_beta = ln_gamma_half(d1) + ln_gamma_half(d2) - ln_gamma_half(d1 + d2);
    let ln_c = 0.5 * a * (a / b).ln() - ln_beta;
    let integrand = |u: f64| 2.0 * u.powf(a - 1.0) * (ln_c - 0.5 * (a + b) * (1.0 + a * u * u / b).ln()).exp();
    1.0 - simpson(integrand, 0.0, f.sqrt(), 20_000)
}
