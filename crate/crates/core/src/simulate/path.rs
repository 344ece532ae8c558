//! Compound Poisson paths with drift and Brownian part, and the pathwise
//! integrals `Y_t = ∫_0^t f dX`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrand::{IntegrandFn, Kind, MaskSet};
use crate::measure::series::mass_tail_bound;
use crate::measure::{norm, LevyMeasure, RadialKernel};
use crate::simulate::sampler::JumpSampler;
use crate::triplet::Triplet;

/// Brownian part `W` with covariance `A`, realised lazily per cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianPart {
    /// `R` with `R Rᵀ = A`.
    pub root: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream: u64,
}

/// Jumps with `|x| <= threshold` on `(lo, hi]`, replaced by a Gaussian with
/// the same first two moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallJumpWindow {
    pub lo: f64,
    pub hi: f64,
    pub threshold: f64,
    /// `∫ x 1{|x| <= threshold} ν(dx)`.
    pub mean: Vec<f64>,
    /// `R` with `R Rᵀ = ∫ x xᵀ 1{|x| <= threshold} ν(dx)`.
    pub root: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRealization {
    pub horizon: f64,
    pub jumps: Vec<(f64, Vec<f64>)>,
    pub gaussian: Option<GaussianPart>,
    pub drift_rate: Vec<f64>,
    pub seed: u64,
    pub path_index: u64,
    /// Upper bound on the mass removed by truncating the measure.
    pub truncation_bound: f64,
    /// Empty for exactly simulated paths.
    #[serde(skip)]
    pub small_jumps: Arc<[SmallJumpWindow]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralSample {
    pub times: Vec<f64>,
    /// `values[k]` is `Y_{t_k}`.
    pub values: Vec<Vec<f64>>,
    /// `components[m][k]` is `∫_0^{t_k} 1_{D_m} f dX`.
    pub components: Vec<Vec<Vec<f64>>>,
}

impl IntegralSample {
    /// `max_k |Y_{t_k} - Σ_m Y^m_{t_k}|`, meaningful when the masks partition the line.
    pub fn decomposition_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, y) in self.values.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                let s: f64 = self.components.iter().map(|c| c[k][j]).sum();
                worst = worst.max((yj - s).abs());
            }
        }
        worst
    }
}

fn matrix_root(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    if a.iter().all(|r| r.iter().all(|&x| x == 0.0)) {
        return None;
    }
    let m = DMatrix::from_fn(d, d, |i, j| a[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut root = vec![vec![0.0; d]; d];
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        for (i, row) in root.iter_mut().enumerate() {
            row[k] = eig.eigenvectors[(i, k)] * s;
        }
    }
    Some(root)
}

/// `b = γ - ∫ x/(1+|x|^2) ν(dx)`, the linear part of the path.
pub fn drift_rate(mu: &Triplet) -> Result<Vec<f64>> {
    if mu.nu.is_zero() {
        return Ok(mu.gamma.clone());
    }
    let c = mu.nu.integral_vector(&RadialKernel::centering())?;
    Ok(mu.gamma.iter().zip(c).map(|(g, c)| g - c).collect())
}

/// Mass of the measure beyond its truncation, bounded above.
pub fn truncation_bound(nu: &LevyMeasure) -> f64 {
    match nu {
        LevyMeasure::BlockE2(m) => match m.truncation {
            Some(n) => m.directions.total() * mass_tail_bound(n as f64),
            None => 0.0,
        },
        _ => 0.0,
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(∫ x 1{|x| <= r} ν, ∫ x xᵀ 1{|x| <= r} ν)`.
pub fn small_jump_moments(nu: &LevyMeasure, r: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = nu.dim();
    let mean = nu.integral_vector(&RadialKernel::at_most(r))?;
    let mut cov = vec![vec![0.0; d]; d];
    let dirs = match nu {
        LevyMeasure::FiniteAtomic(m) => {
            for a in m.atoms.iter().filter(|a| norm(&a.point) <= r) {
                for i in 0..d {
                    for j in 0..d {
                        cov[i][j] += a.mass * a.point[i] * a.point[j];
                    }
                }
            }
            return Ok((mean, cov));
        }
        LevyMeasure::BlockE2(m) => &m.directions,
        LevyMeasure::AnalyticTail(m) => &m.directions,
        LevyMeasure::TimeIntegrated(_) => {
            return Err(Error::InfiniteActivity("time-integrated measures are not sampled directly".into()))
        }
    };
    let second = nu.integral_scalar(&RadialKernel::new(move |x| if x <= r { x * x } else { 0.0 }, 0.0, r, vec![r]))?;
    let lambda = dirs.total();
    for dir in &dirs.0 {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += second * dir.lambda / lambda * dir.xi[i] * dir.xi[j];
            }
        }
    }
    Ok((mean, cov))
}

/// Shared per-run state: the jump sampler and the large-horizon windows.
#[derive(Debug, Clone)]
pub struct PathPlan {
    pub sampler: JumpSampler,
    pub horizon: f64,
    /// Jumps are all simulated up to this time.
    pub exact_horizon: f64,
    pub windows: Arc<[SmallJumpWindow]>,
    drift: Vec<f64>,
    root: Option<Vec<Vec<f64>>>,
    truncation_bound: f64,
}

impl PathPlan {
    /// Exact simulation on `[0, horizon]`.
    pub fn exact(mu: &Triplet, horizon: f64) -> Result<Self> {
        Self::new(mu, horizon, horizon, 0.0)
    }

    /// Exact up to `exact_horizon`; beyond it, on doubling windows `(a, 2a]`,
    /// jumps with `|x| > delta·a` are simulated and the rest replaced by a Gaussian.
    pub fn new(mu: &Triplet, horizon: f64, exact_horizon: f64, delta: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidIntegrand(format!("horizon {horizon} must be positive and finite")));
        }
        let sampler = JumpSampler::new(&mu.nu)?;
        let exact_horizon = exact_horizon.min(horizon);
        let mut windows = Vec::new();
        if exact_horizon < horizon {
            if !(delta > 0.0 && exact_horizon > 0.0) {
                return Err(Error::InvalidIntegrand("large-horizon mode needs delta > 0 and a positive exact horizon".into()));
            }
            let mut lo = exact_horizon;
            while lo < horizon {
                let hi = (2.0 * lo).min(horizon);
                let threshold = delta * lo;
                let (mean, cov) = small_jump_moments(&mu.nu, threshold)?;
                let root = matrix_root(&cov).unwrap_or_else(|| vec![vec![0.0; mu.dim]; mu.dim]);
                windows.push(SmallJumpWindow { lo, hi, threshold, mean, root });
                lo = hi;
            }
        }
        Ok(Self {
            sampler,
            horizon,
            exact_horizon,
            windows: windows.into(),
            drift: drift_rate(mu)?,
            root: matrix_root(&mu.a),
            truncation_bound: truncation_bound(&mu.nu),
        })
    }

    /// Path of index `index` under `seed`; independent of any other index.
    pub fn sample(&self, seed: u64, index: u64) -> Result<PathRealization> {
        let mut rng = rng_for(seed, 2 * index);
        let mut jumps = Vec::new();
        self.poisson_segment(0.0, self.exact_horizon, 0.0, &mut rng, &mut jumps)?;
        for w in self.windows.iter() {
            self.poisson_segment(w.lo, w.hi, w.threshold, &mut rng, &mut jumps)?;
        }
        Ok(PathRealization {
            horizon: self.horizon,
            jumps,
            gaussian: self.root.clone().map(|root| GaussianPart { root, seed, stream: 2 * index + 1 }),
            drift_rate: self.drift.clone(),
            seed,
            path_index: index,
            truncation_bound: self.truncation_bound,
            small_jumps: self.windows.clone(),
        })
    }

    fn poisson_segment(&self, lo: f64, hi: f64, r: f64, rng: &mut ChaCha8Rng, out: &mut Vec<(f64, Vec<f64>)>) -> Result<()> {
        let rate = self.sampler.envelope(r);
        if rate <= 0.0 || hi <= lo {
            return Ok(());
        }
        let n = Poisson::new(rate * (hi - lo))
            .map_err(|e| Error::InfiniteActivity(format!("jump intensity {rate}: {e}")))?
            .sample(rng) as usize;
        let mut times: Vec<f64> = (0..n).map(|_| hi - (hi - lo) * rng.random::<f64>()).collect();
        times.sort_by(f64::total_cmp);
        for s in times {
            if let Some(x) = self.sampler.draw(r, rng) {
                out.push((s, x));
            }
        }
        Ok(())
    }
}

/// Exactly simulated path of index `index` under `seed`.
pub fn sample_path_indexed(mu: &Triplet, horizon: f64, seed: u64, index: u64) -> Result<PathRealization> {
    PathPlan::exact(mu, horizon)?.sample(seed, index)
}

pub fn sample_path(mu: &Triplet, horizon: f64, seed: u64) -> Result<PathRealization> {
    sample_path_indexed(mu, horizon, seed, 0)
}

/// `Y` and its masked parts on sorted `checkpoints <= horizon`.
pub fn integrate_path(f: &IntegrandFn, path: &PathRealization, checkpoints: &[f64], masks: &[MaskSet]) -> Result<IntegralSample> {
    let d = path.drift_rate.len();
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.iter().any(|&t| t < 0.0 || t > path.horizon) {
        return Err(Error::InvalidIntegrand("checkpoints must be sorted and inside [0, horizon]".into()));
    }
    let t_max = checkpoints.last().copied().unwrap_or(0.0);
    // lazily generated masks are resolved once, outside the hot loop
    let resolved: Vec<MaskSet> = masks
        .iter()
        .map(|m| match m.lazy_part() {
            Some(_) => MaskSet::from_intervals(m.window(0.0, t_max + 1.0)?),
            None => Ok(m.clone()),
        })
        .collect::<Result<_>>()?;
    let masks = &resolved[..];
    let masked: Vec<IntegrandFn> = masks.iter().map(|m| f.apply_mask(m)).collect::<Result<_>>()?;
    let all: Vec<&IntegrandFn> = std::iter::once(f).chain(masked.iter()).collect();
    let mut out: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(checkpoints.len()); all.len()];
    let mut acc = vec![vec![0.0; d]; all.len()];

    // Gaussian cells: checkpoints, window ends and mask edges
    let noisy = path.gaussian.is_some() || !path.small_jumps.is_empty();
    let mut edges: Vec<f64> = checkpoints.to_vec();
    edges.push(0.0);
    if noisy {
        for w in path.small_jumps.iter() {
            edges.extend([w.lo, w.hi]);
        }
        for m in masks {
            edges.extend(m.edges(0.0, t_max)?);
        }
    }
    edges.retain(|&e| (0.0..=t_max).contains(&e));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut grng = rng_for(path.seed, 2 * path.path_index + 1);

    let zero = f.is_zero();
    let mut next_jump = 0;
    let mut prev = 0.0;
    let mut cell = 0;
    for &t in checkpoints {
        if !zero {
            while next_jump < path.jumps.len() && path.jumps[next_jump].0 <= t {
                let (s, ref x) = path.jumps[next_jump];
                for (g, a) in all.iter().zip(acc.iter_mut()) {
                    let v = g.eval(s);
                    if v != 0.0 {
                        for (ai, xi) in a.iter_mut().zip(x) {
                            *ai += v * xi;
                        }
                    }
                }
                next_jump += 1;
            }
            if t > prev && path.drift_rate.iter().any(|&b| b != 0.0) {
                for (g, a) in all.iter().zip(acc.iter_mut()) {
                    let w = g.integral(Kind::Plain, prev, t)?;
                    for (ai, bi) in a.iter_mut().zip(&path.drift_rate) {
                        *ai += w * bi;
                    }
                }
            }
            while noisy && cell + 1 < edges.len() && edges[cell + 1] <= t {
                let (lo, hi) = (edges[cell], edges[cell + 1]);
                cell += 1;
                let inc = cell_noise(f, path, lo, hi, &mut grng)?;
                let mid = 0.5 * (lo + hi);
                for (m, a) in acc.iter_mut().enumerate() {
                    if m == 0 || masks[m - 1].contains(mid) {
                        for (ai, ii) in a.iter_mut().zip(&inc) {
                            *ai += ii;
                        }
                    }
                }
            }
        }
        prev = t;
        for (o, a) in out.iter_mut().zip(&acc) {
            o.push(a.clone());
        }
    }
    let mut it = out.into_iter();
    let values = it.next().unwrap_or_default();
    Ok(IntegralSample { times: checkpoints.to_vec(), values, components: it.collect() })
}

fn correlated(root: &[Vec<f64>], sd: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let z: Vec<f64> = (0..root.len()).map(|_| rng.sample(StandardNormal)).collect();
    root.iter().map(|row| sd * row.iter().zip(&z).map(|(r, z)| r * z).sum::<f64>()).collect()
}

/// Brownian and small-jump contribution of `∫_lo^hi f dX`.
fn cell_noise(f: &IntegrandFn, path: &PathRealization, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d = path.drift_rate.len();
    let mut inc = vec![0.0; d];
    let var = if path.gaussian.is_some() || !path.small_jumps.is_empty() { f.integral(Kind::Square, lo, hi)? } else { 0.0 };
    if let Some(gp) = &path.gaussian {
        let z = correlated(&gp.root, var.max(0.0).sqrt(), rng);
        inc.iter_mut().zip(z).for_each(|(a, b)| *a += b);
    }
    let mid = 0.5 * (lo + hi);
    if let Some(w) = path.small_jumps.iter().find(|w| w.lo < mid && mid <= w.hi) {
        let m = f.integral(Kind::Plain, lo, hi)?;
        let z = correlated(&w.root, var.max(0.0).sqrt(), rng);
        for ((a, z), mu) in inc.iter_mut().zip(z).zip(&w.mean) {
            *a += z + m * mu;
        }
    }
    Ok(inc)
}
