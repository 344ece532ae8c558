//! The telescoping block measures `ν`, `ν̃` and the laws `μ`, `μ̃` built on
//! them, with the numerical checks of their displayed identities.

pub mod coefficients;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::measure::{BlockMeasure, Direction, Directions, LevyMeasure, RadialKernel};
use crate::numerics::quad::{integrate_log, QuadOptions};
use crate::numerics::sum::KahanSum;
use crate::triplet::{mean, Triplet};
use coefficients::{
    abs_moment_closed_form, abs_moment_reverse_dd, abs_moment_to, signed_weight, tail_block_of,
    tail_sum, STREAM_N_MAX,
};

/// Radii at which the tail identity is checked.
pub const TAIL_CHECK_POINTS: [u64; 9] = [3, 5, 16, 17, 100, 512, 513, 1 << 16, (1 << 16) + 1];

/// `λ = δ_{e_1}` in dimension `d`.
pub fn default_directions(d: usize) -> Directions {
    let mut xi = vec![0.0; d.max(1)];
    xi[0] = 1.0;
    Directions(vec![Direction { xi, lambda: 1.0 }])
}

pub fn e2_measure(dirs: Directions, tilde: bool) -> Result<LevyMeasure> {
    Ok(LevyMeasure::BlockE2(BlockMeasure::new(dirs, tilde)?))
}

/// `μ = (A, ν, γ)` with `γ = -∫ x|x|^2/(1+|x|^2) ν(dx)`, so the mean vanishes.
pub fn build_mu(dirs: Directions, a: Option<Vec<Vec<f64>>>) -> Result<Triplet> {
    let d = dirs.dim();
    let nu = e2_measure(dirs, false)?;
    let gamma: Vec<f64> = nu.integral_vector(&RadialKernel::mean_correction())?.into_iter().map(|x| -x).collect();
    Triplet::new(a.unwrap_or_else(|| vec![vec![0.0; d]; d]), nu, gamma)
}

/// `μ̃` with `C(z) = ∫(e^{i<z,x>} - 1) ν̃(dx)`: `A = 0` and
/// `γ = ∫ x/(1+|x|^2) ν̃(dx)`.
pub fn build_mu_tilde(dirs: Directions) -> Result<Triplet> {
    let d = dirs.dim();
    let nu = e2_measure(dirs, true)?;
    let gamma = nu.integral_vector(&RadialKernel::centering())?;
    Triplet::new(vec![vec![0.0; d]; d], nu, gamma)
}

/// `+1` when `k` lies in an odd tail block, `-1` otherwise.
pub fn tail_sign(k: u64) -> f64 {
    if k < 3 {
        return -1.0;
    }
    if tail_block_of(k as f64) % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_{k <= |n| <= n_max} n a_n` for every `k` in `ks`, from one forward
/// compensated pass in parallel chunks reduced in order.
pub fn streamed_tail_sums(ks: &[u64], n_max: u64) -> Vec<f64> {
    const CHUNK: u64 = 1 << 20;
    let starts: Vec<u64> = (2..=n_max).step_by(CHUNK as usize).collect();
    // per chunk: total and partial sums up to each k - 1 that falls inside
    let parts: Vec<(f64, Vec<(usize, f64)>)> = starts
        .par_iter()
        .map(|&s| {
            let e = (s + CHUNK - 1).min(n_max);
            let mut acc = KahanSum::new();
            let mut marks = Vec::new();
            for n in s..=e {
                for (i, &k) in ks.iter().enumerate() {
                    if k == n {
                        marks.push((i, acc.value()));
                    }
                }
                acc.add(signed_weight(n as f64));
            }
            (acc.value(), marks)
        })
        .collect();
    let mut prefix = vec![0.0; ks.len()];
    let mut running = KahanSum::new();
    for (total, marks) in &parts {
        for &(i, v) in marks {
            prefix[i] = running.value() + v;
        }
        running.add(*total);
    }
    let all = running.value();
    ks.iter()
        .enumerate()
        .map(|(i, &k)| if k <= 2 { all } else { all - prefix[i] })
        .collect()
}

/// `∫_1^t s^{-1} ds ∫_{|x|>s} x ν(dx)`, via the radial kernel `ln(min(r, t))`.
pub fn log_average_tail(nu: &LevyMeasure, t: f64) -> Result<Vec<f64>> {
    let lt = t.ln();
    let k = RadialKernel::new(move |r| if r <= 1.0 { 0.0 } else { r.min(t).ln() }, lt, t, vec![1.0, t]);
    nu.integral_vector(&k)
}

/// `∫_1^t s^{-1} |∫_{|x|>s} x ν(dx)| ds` for the block measure `ν`: on
/// `[k, k+1)` the inner integral is `ξ̄ · tail_sum(k+1)`, so the integral
/// is `|ξ̄| Σ_k |tail_sum(k+1)| ln(1 + 1/k)`, summed directly up to `2^20`
/// and by Euler–Maclaurin beyond.
pub fn log_average_abs_tail_block(mean_dir_norm: f64, t: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    // s in [1, 2): the tail is the full sum, |tail_sum(2)| = 1/ln 2
    let mut acc = KahanSum::new();
    acc.add(t.min(2.0).ln() / std::f64::consts::LN_2);
    if t <= 2.0 {
        return mean_dir_norm * acc.value();
    }
    let g = |x: f64| (1.0 / x).ln_1p() / (x + 1.0).ln();
    const DIRECT: f64 = (1u64 << 20) as f64;
    let kt = t.floor();
    let direct_end = kt.min(DIRECT);
    let mut k = 2.0;
    while k < direct_end {
        acc.add(g(k));
        k += 1.0;
    }
    if kt > DIRECT {
        // Σ_{k=DIRECT}^{kt-1} g(k)
        let (a, b) = (DIRECT, kt - 1.0);
        let integral = integrate_log(&g, a, b, QuadOptions::tight()).map(|r| r.value).unwrap_or(f64::NAN);
        let d = |x: f64| (g(x * (1.0 + 1e-4)) - g(x * (1.0 - 1e-4))) / (2e-4 * x);
        acc.add(integral + 0.5 * (g(a) + g(b)) + (d(b) - d(a)) / 12.0);
    }
    // partial last interval [kt, t)
    if t > kt {
        acc.add((t / kt).ln() / (kt + 1.0).ln());
    }
    mean_dir_norm * acc.value()
}

/// `Σ_{2 <= |n| <= N} |n| a_n ln n`, the truncated `∫|x| log|x| ν(dx)`.
pub fn x_log_x_partial(n_max: f64) -> f64 {
    let k = RadialKernel::new(move |r| if r <= n_max { r.ln() } else { 0.0 }, 0.0, n_max, vec![n_max]);
    crate::measure::series::series_sum(crate::measure::Weight::Abs, &k, None)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityRow {
    fn new(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        let error = (value - expected).abs();
        Self { name: name.into(), value, expected, error, tolerance, pass: error <= tolerance }
    }

    fn flag(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self { name: name.into(), value, expected: f64::NAN, error: 0.0, tolerance: 0.0, pass }
    }
}

/// The identity table printed by `counterexample e2 --verify`.
pub fn verify_table(dirs: &Directions) -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for n in [0u64, 1] {
        let (p, m) = coefficients::coeff(n);
        rows.push(IdentityRow::new(format!("a_{n} + a_-{n}"), p + m, 0.0, 0.0));
    }
    let (p2, m2) = coefficients::coeff(2);
    rows.push(IdentityRow::new("a_-2", m2, 0.5 * (1.0 / 2f64.ln() + 1.0 / 3f64.ln()), 1e-15));
    rows.push(IdentityRow::new("a_2", p2, 0.0, 0.0));
    let one_sided = (2..100_000u64).all(|n| {
        let (a, b) = coefficients::coeff(n);
        (a > 0.0) != (b > 0.0) && a >= 0.0 && b >= 0.0
    });
    rows.push(IdentityRow::flag("exactly one of a_n, a_-n nonzero (2<=n<1e5)", 1.0, one_sided));

    let streamed = streamed_tail_sums(&TAIL_CHECK_POINTS, STREAM_N_MAX);
    let rem = tail_sum(STREAM_N_MAX + 1);
    for (k, s) in TAIL_CHECK_POINTS.iter().zip(streamed) {
        let expected = tail_sign(*k) / (*k as f64).ln();
        rows.push(IdentityRow::new(format!("tail_sum({k}) vs sign/ln k"), tail_sum(*k), expected, 1e-9));
        rows.push(IdentityRow::new(format!("streamed tail({k}) to 2^25 + remainder"), s + rem, expected, 1e-9));
    }

    let fwd = abs_moment_to(STREAM_N_MAX);
    let rev = abs_moment_reverse_dd(STREAM_N_MAX);
    rows.push(IdentityRow::new("abs moment: forward Kahan vs reverse double-double", fwd.value, rev, 1e-9));
    rows.push(IdentityRow::new("abs moment: streamed vs per-block closed form", fwd.value, abs_moment_closed_form(), 1e-9));

    let nu_t = e2_measure(dirs.clone(), true)?;
    let first = nu_t.integral_vector(&RadialKernel::constant(1.0))?;
    rows.push(IdentityRow::new("|∫ x ν̃(dx)|", crate::measure::norm(&first), 0.0, 1e-9));
    let mu = build_mu(dirs.clone(), None)?;
    let m = mean(&mu)?.unwrap_or_default();
    rows.push(IdentityRow::new("|mean(μ)|", crate::measure::norm(&m), 0.0, 1e-9));
    let mut prev = 0.0;
    let mut grows = true;
    for blk in 2..=6u32 {
        let v = x_log_x_partial(coefficients::block_start(blk));
        grows &= v > prev + 0.5;
        prev = v;
    }
    rows.push(IdentityRow::flag("∫|x|log|x|ν partial sums grow by >= 1/2 per block (m=2..6)", prev, grows));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_mu_vanishes() {
        let mu = build_mu(default_directions(1), None).unwrap();
        assert!(mean(&mu).unwrap().unwrap()[0].abs() < 1e-12);
        let mt = build_mu_tilde(default_directions(1)).unwrap();
        assert!(mean(&mt).unwrap().unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn streamed_tail_small() {
        let v = streamed_tail_sums(&[3, 17], 1 << 16);
        let rem = tail_sum((1 << 16) + 1);
        assert!((v[0] + rem - tail_sum(3)).abs() < 1e-12);
        assert!((v[1] + rem - tail_sum(17)).abs() < 1e-12);
    }

    #[test]
    fn log_average_tail_matches_direct() {
        let nu = e2_measure(default_directions(1), false).unwrap();
        let t = 300.0;
        let got = log_average_tail(&nu, t).unwrap()[0];
        // direct: Σ_k tail_sum(k+1) ln((k+1)/k) over unit intervals
        let mut direct = tail_sum(2) * 2f64.ln();
        for k in 2..300u64 {
            direct += tail_sum(k + 1) * ((k + 1) as f64 / k as f64).ln();
        }
        assert!((got - direct).abs() < 1e-10, "{got} vs {direct}");
    }

    #[test]
    fn abs_tail_direct_and_em_agree() {
        let t = (1u64 << 21) as f64;
        let em = log_average_abs_tail_block(1.0, t);
        let mut direct = KahanSum::new();
        direct.add(1.0);
        for k in 2..(1u64 << 21) {
            direct.add((1.0 / k as f64).ln_1p() / ((k + 1) as f64).ln());
        }
        assert!((em - direct.value()).abs() < 1e-9, "{em} vs {}", direct.value());
    }
}
