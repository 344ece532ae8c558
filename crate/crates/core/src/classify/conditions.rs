//! The four conditions behind the domains, evaluated at finite horizons and
//! combined with closed-form tail information.

use crate::classify::drift::DriftIntegrand;
use crate::classify::rules::analytic_rule;
use crate::classify::verdict::{Convergence, Finiteness};
use crate::error::Result;
use crate::integrand::{Family, IntegrandFn, Kind};
use crate::measure::{norm, LevyMeasure, RadialKernel, TimeIntegrated};
use crate::triplet::Triplet;

/// Cauchy threshold for declaring `∫_a^t h` convergent.
pub const EPS_CONV: f64 = 1e-8;
/// Growth factor over the initial scale beyond which `|G|` counts as divergent.
pub const GROWTH_BOUND: f64 = 1e3;
/// Consecutive monotone checkpoints required for divergence.
pub const MONOTONE_RUN: usize = 4;
/// Largest exponent of the default checkpoint grid `a·2^k`.
pub const MAX_CHECKPOINT_EXP: i32 = 40;

/// `a·2^k`, `k = 1..=k_max`, with `a` the left end of the integrand (at least 1).
pub fn checkpoint_grid(f: &IntegrandFn, k_max: i32) -> Vec<f64> {
    let a = f.family.start().max(1.0);
    (1..=k_max).map(|k| a * 2f64.powi(k)).collect()
}

/// `∫_0^T f(s)^2 ds · tr A`.
pub fn cond_gaussian(mu: &Triplet, f: &IntegrandFn, t: f64) -> Result<(Finiteness, f64)> {
    let tr = mu.trace_a();
    if tr == 0.0 || f.is_zero() {
        return Ok((Finiteness::Finite, 0.0));
    }
    let value = tr * f.integral(Kind::Square, 0.0, t)?;
    Ok((Finiteness::from_bool(f.tail_finite(Kind::Square)), value))
}

/// `∫_lo^hi (c^2 r^2/s^2 ∧ 1) ds` as a radial kernel in `r`, `1 <= lo`.
fn inverse_levy_kernel(c: f64, lo: f64, hi: f64) -> RadialKernel {
    let c = c.abs();
    RadialKernel::new(
        move |r| {
            let cr = c * r;
            if cr <= lo {
                cr * cr * (1.0 / lo - 1.0 / hi)
            } else if cr >= hi {
                hi - lo
            } else {
                2.0 * cr - lo - cr * cr / hi
            }
        },
        hi - lo,
        hi / c,
        vec![lo / c, hi / c],
    )
}

fn levy_value(mu: &Triplet, f: &IntegrandFn, t: f64) -> Result<f64> {
    let inverse = matches!(f.family, Family::InvS | Family::AlternatingInvS)
        || matches!(f.family, Family::PowerDecay { alpha } if alpha == 1.0);
    if inverse && f.coef != 0.0 {
        let mut total = 0.0;
        for (l, r) in f.active_windows(0.0, t)? {
            let (l, r) = (l.max(1.0), r.max(1.0));
            if r > l {
                total += mu.nu.integral_scalar(&inverse_levy_kernel(f.coef, l, r))?;
            }
        }
        return Ok(total);
    }
    let ti = TimeIntegrated::new(mu.nu.clone(), f.clone(), t)?;
    ti.integral_scalar(&RadialKernel::truncated_second(1.0))
}

/// `∫_0^T ds ∫ (|f(s)x|^2 ∧ 1) ν(dx)`.
pub fn cond_levy(mu: &Triplet, f: &IntegrandFn, t: f64) -> Result<(Finiteness, f64)> {
    if mu.nu.is_zero() || f.is_zero() {
        return Ok((Finiteness::Finite, 0.0));
    }
    let value = levy_value(mu, f, t)?;
    let verdict = if f.compactly_supported() {
        Some(true)
    } else {
        analytic_rule(mu, f).and_then(|r| r.levy)
    };
    Ok((Finiteness::from_bool(verdict), value))
}

/// Cauchy / growth test on `G(t_k)`; `partials` are vector values.
pub fn judge_partials(partials: &[Vec<f64>]) -> Convergence {
    let n = partials.len();
    if n < 2 {
        return Convergence::Undetermined;
    }
    let inc: Vec<f64> = partials
        .windows(2)
        .map(|w| norm(&w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect::<Vec<_>>()))
        .collect();
    let size: Vec<f64> = partials.iter().map(|p| norm(p)).collect();
    let last = *inc.last().unwrap();
    let prev = if inc.len() >= 2 { inc[inc.len() - 2] } else { f64::INFINITY };
    let scale = size.iter().copied().fold(0.0, f64::max).max(1.0);
    if last <= EPS_CONV * scale && prev <= EPS_CONV * scale {
        return Convergence::Convergent;
    }
    let initial = size.iter().copied().find(|&x| x > 0.0).unwrap_or(0.0);
    if initial > 0.0 && n > MONOTONE_RUN {
        let tail = &size[n - MONOTONE_RUN - 1..];
        let monotone = tail.windows(2).all(|w| w[1] > w[0]);
        if monotone && size[n - 1] > GROWTH_BOUND * initial {
            return Convergence::Divergent;
        }
    }
    Convergence::Undetermined
}

/// Checkpoints that can be afforded for `(μ, f)`; the alternating family is
/// summed block by block.
pub fn affordable_checkpoints(mu: &Triplet, f: &IntegrandFn, k_max: i32) -> Vec<f64> {
    let k = match f.family {
        Family::AlternatingInvS if !mu.nu.is_zero() => {
            if matches!(mu.nu, LevyMeasure::FiniteAtomic(_)) {
                k_max.min(16)
            } else {
                k_max.min(10)
            }
        }
        Family::ExpDecay { .. } | Family::PowerDecay { .. } | Family::PiecewiseTable(_) | Family::Constant
            if !mu.nu.is_zero() && !matches!(mu.nu, LevyMeasure::FiniteAtomic(_)) =>
        {
            k_max.min(24)
        }
        _ => k_max,
    };
    checkpoint_grid(f, k)
}

/// `G(t) = ∫_a^t h(s) ds` on the checkpoints and the resulting verdict.
/// Closed-form rules override the numerical judgement when they apply.
pub fn cond_drift_convergence(mu: &Triplet, f: &IntegrandFn, checkpoints: &[f64]) -> Result<(Convergence, Vec<(f64, Vec<f64>)>)> {
    let h = DriftIntegrand::new(mu, f);
    if h.is_identically_zero() {
        return Ok((Convergence::Convergent, checkpoints.iter().map(|&t| (t, vec![0.0; mu.dim])).collect()));
    }
    let partials = h.partials(checkpoints)?;
    let numeric = judge_partials(&partials);
    let rule = analytic_rule(mu, f).and_then(|r| if r.de() == Some(true) { r.conv } else { None });
    let verdict = match rule {
        Some(b) => Convergence::from_bool(Some(b)),
        None => numeric,
    };
    Ok((verdict, checkpoints.iter().copied().zip(partials).collect()))
}

/// `∫_0^T |h(s)| ds`.
pub fn cond_drift_absolute(mu: &Triplet, f: &IntegrandFn, t: f64) -> Result<(Finiteness, f64)> {
    let h = DriftIntegrand::new(mu, f);
    if h.is_identically_zero() {
        return Ok((Finiteness::Finite, 0.0));
    }
    let value = h.norm_integral(0.0, t)?;
    let rule = analytic_rule(mu, f).and_then(|r| if r.de() == Some(true) { r.abs } else { None });
    Ok((Finiteness::from_bool(rule), value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FiniteAtomic;

    #[test]
    fn gaussian_exp_decay_closed_form() {
        let mu = Triplet::gaussian(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap();
        let f = IntegrandFn::exp_decay(1.0, 1.0).unwrap();
        let (v, x) = cond_gaussian(&mu, &f, 3.0).unwrap();
        assert_eq!(v, Finiteness::Finite);
        assert!((x - (1.0 - (-6.0f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn levy_single_atom_inverse() {
        let nu = LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(2.0, 1.0)]).unwrap());
        let mu = Triplet::pure_jump(nu, vec![0.0]).unwrap();
        let (v, x) = cond_levy(&mu, &IntegrandFn::inv_s(), 1e12).unwrap();
        assert_eq!(v, Finiteness::Finite);
        assert!((x - (3.0 - 4e-12)).abs() < 1e-9, "{x}");
        let ti = TimeIntegrated::new(mu.nu.clone(), IntegrandFn::inv_s(), 1e3).unwrap();
        let q = ti.integral_scalar(&RadialKernel::truncated_second(1.0)).unwrap();
        let (_, x3) = cond_levy(&mu, &IntegrandFn::inv_s(), 1e3).unwrap();
        assert!((q - x3).abs() < 1e-8, "{q} vs {x3}");
    }

    #[test]
    fn brownian_drift_verdicts() {
        let mu = Triplet::brownian(1.0, 1.0).unwrap();
        let f = IntegrandFn::inv_s();
        let grid = checkpoint_grid(&f, 40);
        let (c, p) = cond_drift_convergence(&mu, &f, &grid).unwrap();
        assert_eq!(c, Convergence::Divergent);
        assert!((p.last().unwrap().1[0] - 2f64.powi(40).ln()).abs() < 1e-9);
        let g = IntegrandFn::alternating_inv_s();
        let (c, _) = cond_drift_convergence(&mu, &g, &checkpoint_grid(&g, 40)).unwrap();
        assert_eq!(c, Convergence::Convergent);
    }
}
