//! Path-parallel Monte Carlo with per-path substreams and ordered reduction.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::DriftIntegrand;
use crate::error::{Error, Result};
use crate::integrand::{IntegrandFn, MaskSet};
use crate::simulate::path::{integrate_path, truncation_bound, IntegralSample, PathPlan};
use crate::triplet::Triplet;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
    pub masks: Vec<(String, MaskSet)>,
    /// Beyond this time small jumps are replaced by a Gaussian; `None` is exact.
    pub exact_horizon: Option<f64>,
    /// Window threshold factor of the large-horizon mode.
    pub delta: f64,
}

impl MonteCarloConfig {
    pub fn exact(n_paths: usize, seed: u64, checkpoints: Vec<f64>) -> Self {
        Self { n_paths, seed, checkpoints, masks: Vec::new(), exact_horizon: None, delta: DEFAULT_DELTA }
    }
}

/// Default window threshold factor.
pub const DEFAULT_DELTA: f64 = 1.0 / 16.0;

/// Statistics of one coordinate of `Y_t^p` at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub t: f64,
    pub mask: String,
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub gamma_t: f64,
    pub coordinate: usize,
    pub centered_mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub n_paths: usize,
    pub seed: u64,
    pub truncation_bound: f64,
    pub rows: Vec<StatRow>,
}

impl MonteCarloReport {
    pub fn row(&self, t: f64, mask: &str, coordinate: usize) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.t == t && r.mask == mask && r.coordinate == coordinate)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| Error::InvalidIntegrand(format!("csv: {e}")))?;
        }
        out.flush().map_err(|e| Error::InvalidIntegrand(format!("csv: {e}")))?;
        Ok(())
    }
}

/// One integral sample per path, in path-index order.
pub fn simulate_samples(mu: &Triplet, f: &IntegrandFn, cfg: &MonteCarloConfig) -> Result<Vec<IntegralSample>> {
    let horizon = cfg.checkpoints.iter().copied().fold(0.0, f64::max);
    if horizon <= 0.0 {
        return Err(Error::InvalidIntegrand("at least one positive checkpoint is required".into()));
    }
    let plan = PathPlan::new(mu, horizon, cfg.exact_horizon.unwrap_or(horizon), cfg.delta)?;
    let masks: Vec<MaskSet> = cfg.masks.iter().map(|(_, m)| m.clone()).collect();
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let p = plan.sample(cfg.seed, i)?;
            integrate_path(f, &p, &cfg.checkpoints, &masks)
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn std(&self) -> f64 {
        if self.n > 1.0 {
            (self.m2 / (self.n - 1.0)).sqrt()
        } else {
            0.0
        }
    }
}

/// Summary rows from samples; mask label `all` is the unmasked integral.
pub fn summarize(mu: &Triplet, f: &IntegrandFn, cfg: &MonteCarloConfig, samples: &[IntegralSample]) -> Result<Vec<StatRow>> {
    let d = mu.dim;
    let mut labels = vec!["all".to_string()];
    labels.extend(cfg.masks.iter().map(|(l, _)| l.clone()));
    let mut integrands = vec![f.clone()];
    for (_, m) in &cfg.masks {
        integrands.push(f.apply_mask(m)?);
    }
    let mut rows = Vec::new();
    for (mi, (label, g)) in labels.iter().zip(&integrands).enumerate() {
        let gamma = DriftIntegrand::new(mu, g).partials(&cfg.checkpoints)?;
        for (k, &t) in cfg.checkpoints.iter().enumerate() {
            for j in 0..d {
                let mut w = Welford::default();
                for s in samples {
                    let v = if mi == 0 { &s.values[k] } else { &s.components[mi - 1][k] };
                    w.push(v[j]);
                }
                let std = w.std();
                let se = if w.n > 0.0 { std / w.n.sqrt() } else { 0.0 };
                rows.push(StatRow {
                    t,
                    mask: label.clone(),
                    mean: w.mean,
                    std,
                    ci_lo: w.mean - Z99 * se,
                    ci_hi: w.mean + Z99 * se,
                    gamma_t: gamma[k][j],
                    coordinate: j,
                    centered_mean: w.mean - gamma[k][j],
                    stderr: se,
                });
            }
        }
    }
    Ok(rows)
}

pub fn monte_carlo(mu: &Triplet, f: &IntegrandFn, cfg: &MonteCarloConfig) -> Result<MonteCarloReport> {
    let samples = simulate_samples(mu, f, cfg)?;
    Ok(MonteCarloReport {
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        truncation_bound: truncation_bound(&mu.nu),
        rows: summarize(mu, f, cfg, &samples)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FiniteAtomic, LevyMeasure};

    #[test]
    fn compensated_poisson_is_centered() {
        let nu = LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(1.0, 1.0)]).unwrap());
        // mean zero: γ = -∫ x|x|^2/(1+|x|^2) ν = -1/2
        let mu = Triplet::pure_jump(nu, vec![-0.5]).unwrap();
        let cfg = MonteCarloConfig::exact(4000, 5, vec![10.0, 100.0]);
        let rep = monte_carlo(&mu, &IntegrandFn::inv_s(), &cfg).unwrap();
        for r in &rep.rows {
            assert!(r.mean.abs() < 4.0 * r.stderr, "{r:?}");
        }
        // Var Y_t = ∫_1^t s^{-2} ds
        let r = rep.row(100.0, "all", 0).unwrap();
        assert!((r.std * r.std - 0.99).abs() < 0.1, "{}", r.std);
    }

    #[test]
    fn independent_of_thread_count() {
        let nu = LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(1.0, 1.0), (-2.0, 0.5)]).unwrap());
        let mu = Triplet::new(vec![vec![0.2]], nu, vec![0.0]).unwrap();
        let cfg = MonteCarloConfig::exact(64, 11, vec![5.0, 20.0]);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| monte_carlo(&mu, &IntegrandFn::inv_s(), &cfg)).unwrap();
        let b = monte_carlo(&mu, &IntegrandFn::inv_s(), &cfg).unwrap();
        assert_eq!(a.rows, b.rows);
    }
}
