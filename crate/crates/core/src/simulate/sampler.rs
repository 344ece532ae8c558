//! Poisson sampling of jumps of a finite Lévy measure above a radius.
//!
//! Every sampler exposes an envelope rate `E(r) >= ν(|x| > r)` and a draw
//! that either returns a jump with law `ν(dx) 1{|x| > r} / E(r)` or rejects;
//! thinning a Poisson stream of rate `E(r)` this way is exact.

use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::counterexample::coefficients::{block_start, is_boundary, mass, signed_weight};
use crate::error::{Error, Result};
use crate::measure::analytic::zeta_tail;
use crate::measure::block::tilde_mass;
use crate::measure::series::{signed_table, TABLE_MAX};
use crate::measure::{norm, LevyMeasure, RadialProfile};

/// Largest block index whose start `2^{m^2}` is a finite double.
const LAST_BLOCK: u32 = 31;

static HEAD_CUM: OnceLock<Arc<Vec<f64>>> = OnceLock::new();

/// `cum[n] = Σ_{k <= n} ν_1({|x| = k})` for the block measure with unit `λ`.
fn head_cumulative() -> Arc<Vec<f64>> {
    HEAD_CUM
        .get_or_init(|| {
            let mut cum = vec![0.0; TABLE_MAX];
            let mut acc = crate::numerics::sum::KahanSum::new();
            for (n, slot) in cum.iter_mut().enumerate().skip(2) {
                acc.add(mass(n as f64));
                *slot = acc.value();
            }
            Arc::new(cum)
        })
        .clone()
}

fn uniform_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

#[derive(Debug, Clone)]
enum RadialLaw {
    /// `bounds` lists the block starts above the table as `(radius, mass, sign)`.
    Block { head: Arc<Vec<f64>>, n_head: usize, truncation: Option<f64>, tilde: bool, bounds: Vec<(f64, f64, f64)> },
    Pareto { c: f64, alpha: f64, r0: f64 },
    Exponential { c: f64, beta: f64 },
    LogAtoms { base: f64, p: f64 },
}

impl RadialLaw {
    /// First index `n` of the log atoms with `base^n > rho`.
    fn log_start(base: f64, rho: f64) -> f64 {
        if rho < base {
            1.0
        } else {
            let mut n = (rho.ln() / base.ln()).floor().max(1.0);
            while base.powf(n) <= rho {
                n += 1.0;
            }
            while n > 1.0 && base.powf(n - 1.0) > rho {
                n -= 1.0;
            }
            n
        }
    }

    /// Radii `n` of the block measure with `n > rho`: first index.
    fn block_first(rho: f64) -> f64 {
        rho.max(1.0).floor() + 1.0
    }

    fn envelope(&self, rho: f64) -> f64 {
        match *self {
            RadialLaw::Block { ref head, n_head, truncation, tilde, ref bounds } => {
                let first = Self::block_first(rho);
                let top = truncation.unwrap_or(f64::INFINITY);
                let mut e = 0.0;
                if first <= n_head as f64 {
                    e += head[n_head] - head[first as usize - 1];
                }
                if top > n_head as f64 {
                    let n0 = (first - 1.0).max(n_head as f64);
                    e += 1.0 / ((n0 + 1.0) * (n0 + 1.0).ln());
                    e += bounds.iter().filter(|b| b.0 > n0).map(|b| b.1).sum::<f64>();
                }
                if tilde && rho < 2.0 {
                    e += tilde_mass();
                }
                e
            }
            RadialLaw::Pareto { c, alpha, r0 } => c / alpha * rho.max(r0).powf(-alpha),
            RadialLaw::Exponential { c, beta } => c * beta * (-rho.max(0.0) / beta).exp(),
            RadialLaw::LogAtoms { base, p } => zeta_tail(p, Self::log_start(base, rho) as u64),
        }
    }

    /// A radius above `rho` with its sign, or `None` when the draw is thinned away.
    fn draw<R: Rng + ?Sized>(&self, rho: f64, rng: &mut R) -> Option<(f64, f64)> {
        match *self {
            RadialLaw::Block { ref head, n_head, truncation, tilde, ref bounds } => {
                let first = Self::block_first(rho);
                let top = truncation.unwrap_or(f64::INFINITY);
                let head_mass = if first <= n_head as f64 { head[n_head] - head[first as usize - 1] } else { 0.0 };
                let n0 = (first - 1.0).max(n_head as f64);
                let tail = top > n_head as f64;
                let env_tail = if tail { 1.0 / ((n0 + 1.0) * (n0 + 1.0).ln()) } else { 0.0 };
                let above = if tail { bounds.partition_point(|b| b.0 <= n0) } else { bounds.len() };
                let bound_mass: f64 = bounds[above..].iter().map(|b| b.1).sum();
                let tilde_part = if tilde && rho < 2.0 { tilde_mass() } else { 0.0 };
                let total = head_mass + env_tail + bound_mass + tilde_part;
                let mut u = rng.random::<f64>() * total;
                if u < tilde_part {
                    return Some((2.0, 1.0));
                }
                u -= tilde_part;
                if u < head_mass {
                    let target = head[first as usize - 1] + u;
                    let i = head[..=n_head].partition_point(|&c| c <= target).clamp(first as usize, n_head);
                    return Some((i as f64, signed_table()[i].signum()));
                }
                u -= head_mass;
                if u < bound_mass {
                    for b in &bounds[above..] {
                        if u < b.1 {
                            return Some((b.0, b.2));
                        }
                        u -= b.1;
                    }
                    return bounds.last().map(|b| (b.0, b.2));
                }
                // P(K >= n) = ln(n0+1)/ln n, accepted with probability (n0+1)/K
                let v = uniform_open(rng);
                let k = ((n0 + 1.0).ln() / v).exp().floor();
                if !k.is_finite() || k > top || is_boundary(k) {
                    return None;
                }
                if rng.random::<f64>() * k < n0 + 1.0 {
                    Some((k, signed_weight(k).signum()))
                } else {
                    None
                }
            }
            RadialLaw::Pareto { alpha, r0, .. } => Some((rho.max(r0) * uniform_open(rng).powf(-1.0 / alpha), 1.0)),
            RadialLaw::Exponential { beta, .. } => Some((rho.max(0.0) - beta * uniform_open(rng).ln(), 1.0)),
            RadialLaw::LogAtoms { base, p } => {
                let n0 = Self::log_start(base, rho);
                let g = |k: f64| k.powf(-p) / (k.powf(1.0 - p) - (k + 1.0).powf(1.0 - p));
                let g0 = g(n0);
                loop {
                    let k = (n0 * uniform_open(rng).powf(-1.0 / (p - 1.0))).floor();
                    let r = base.powf(k);
                    if !r.is_finite() {
                        return None;
                    }
                    if rng.random::<f64>() * g0 <= g(k) {
                        return Some((r, 1.0));
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Empty,
    /// Atoms sorted by decreasing radius with prefix masses.
    Atomic { atoms: Vec<(Vec<f64>, f64)>, radii: Vec<f64>, cum: Vec<f64> },
    Radial { dirs: Vec<Vec<f64>>, dir_cum: Vec<f64>, lambda: f64, scale: f64, law: RadialLaw },
}

#[derive(Debug, Clone)]
pub struct JumpSampler {
    pub dim: usize,
    kind: Kind,
}

impl JumpSampler {
    pub fn new(nu: &LevyMeasure) -> Result<Self> {
        let dim = nu.dim();
        if nu.is_zero() {
            return Ok(Self { dim, kind: Kind::Empty });
        }
        let radial = |dirs: &crate::measure::Directions, scale: f64, law: RadialLaw| {
            let mut acc = 0.0;
            let dir_cum = dirs.0.iter().map(|d| {
                acc += d.lambda;
                acc
            });
            let dir_cum: Vec<f64> = dir_cum.collect();
            Kind::Radial { dirs: dirs.0.iter().map(|d| d.xi.clone()).collect(), lambda: acc, dir_cum, scale, law }
        };
        let kind = match nu {
            LevyMeasure::FiniteAtomic(m) => {
                let mut atoms: Vec<(Vec<f64>, f64)> = m.atoms.iter().map(|a| (a.point.clone(), a.mass)).collect();
                atoms.sort_by(|a, b| norm(&b.0).total_cmp(&norm(&a.0)));
                let radii = atoms.iter().map(|a| norm(&a.0)).collect();
                let mut acc = 0.0;
                let cum = std::iter::once(0.0)
                    .chain(atoms.iter().map(|a| {
                        acc += a.1;
                        acc
                    }))
                    .collect();
                Kind::Atomic { atoms, radii, cum }
            }
            LevyMeasure::BlockE2(m) => {
                let n_head = m.truncation.map_or(TABLE_MAX - 1, |t| (t as usize).min(TABLE_MAX - 1));
                let top = m.truncation.map_or(f64::INFINITY, |t| t as f64);
                let bounds = (1..=LAST_BLOCK)
                    .map(block_start)
                    .filter(|&b| b > n_head as f64 && b <= top)
                    .map(|b| (b, mass(b), signed_weight(b).signum()))
                    .collect();
                let law = RadialLaw::Block {
                    head: head_cumulative(),
                    n_head,
                    truncation: m.truncation.map(|t| t as f64),
                    tilde: m.tilde,
                    bounds,
                };
                radial(&m.directions, m.scale, law)
            }
            LevyMeasure::AnalyticTail(m) => {
                let law = match m.profile {
                    RadialProfile::Pareto { c, alpha, r0 } => RadialLaw::Pareto { c, alpha, r0 },
                    RadialProfile::Exponential { c, beta } => RadialLaw::Exponential { c, beta },
                    RadialProfile::LogAtoms { base, p } => RadialLaw::LogAtoms { base, p },
                };
                radial(&m.directions, m.scale, law)
            }
            LevyMeasure::TimeIntegrated(_) => {
                return Err(Error::InfiniteActivity("time-integrated measures are not sampled directly".into()))
            }
        };
        let s = Self { dim, kind };
        let total = s.envelope(0.0);
        if !total.is_finite() {
            return Err(Error::InfiniteActivity(format!("total jump intensity {total}")));
        }
        Ok(s)
    }

    /// Envelope intensity of jumps with `|x| > r`.
    pub fn envelope(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Empty => 0.0,
            Kind::Atomic { radii, cum, .. } => cum[radii.partition_point(|&x| x > r)],
            Kind::Radial { lambda, scale, law, .. } => lambda * law.envelope(r / scale.abs()),
        }
    }

    /// One candidate jump with `|x| > r`; `None` means thinned away.
    pub fn draw<R: Rng + ?Sized>(&self, r: f64, rng: &mut R) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Empty => None,
            Kind::Atomic { atoms, radii, cum } => {
                let k = radii.partition_point(|&x| x > r);
                if k == 0 {
                    return None;
                }
                let u = rng.random::<f64>() * cum[k];
                let i = cum[1..=k].partition_point(|&c| c <= u).min(k - 1);
                Some(atoms[i].0.clone())
            }
            Kind::Radial { dirs, dir_cum, lambda, scale, law } => {
                let (rad, sign) = law.draw(r / scale.abs(), rng)?;
                let u = rng.random::<f64>() * lambda;
                let i = dir_cum.partition_point(|&c| c <= u).min(dirs.len() - 1);
                let s = sign * rad * scale;
                Some(dirs[i].iter().map(|x| s * x).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::{default_directions, e2_measure};
    use rand::SeedableRng;

    #[test]
    fn block_envelope_matches_mass() {
        let nu = e2_measure(default_directions(1), true).unwrap();
        let s = JumpSampler::new(&nu).unwrap();
        let exact = nu.total_mass();
        let env = s.envelope(0.0);
        assert!(env >= exact && env - exact < 1e-6, "{env} vs {exact}");
    }

    #[test]
    fn block_draws_have_the_right_mean() {
        // E[ΔX] under ν̃/ν̃(R) is ∫x ν̃ / mass = 0; check the accepted draws
        let nu = e2_measure(default_directions(1), true).unwrap();
        let s = JumpSampler::new(&nu).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut n2 = 0usize;
        let total = 200_000;
        for _ in 0..total {
            if let Some(x) = s.draw(0.0, &mut rng) {
                if x[0] == 2.0 {
                    n2 += 1;
                }
            }
        }
        // both ν({2}) = a_2 + a_{-2} and the extra atom sit at |x| = 2
        let p2 = (mass(2.0) + tilde_mass()) / s.envelope(0.0);
        let p_plus2 = tilde_mass() / s.envelope(0.0) + if signed_weight(2.0) > 0.0 { mass(2.0) / s.envelope(0.0) } else { 0.0 };
        let _ = p2;
        let phat = n2 as f64 / total as f64;
        let sd = (p_plus2 * (1.0 - p_plus2) / total as f64).sqrt();
        assert!((phat - p_plus2).abs() < 5.0 * sd, "{phat} vs {p_plus2}");
    }

    #[test]
    fn atomic_threshold() {
        let nu = LevyMeasure::FiniteAtomic(crate::measure::FiniteAtomic::scalar(&[(1.0, 0.5), (-3.0, 0.25)]).unwrap());
        let s = JumpSampler::new(&nu).unwrap();
        assert_eq!(s.envelope(0.0), 0.75);
        assert_eq!(s.envelope(2.0), 0.25);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert_eq!(s.draw(2.0, &mut rng), Some(vec![-3.0]));
    }
}
