//! Radial series over the block coefficient sequence.
//!
//! Sums `Σ_k w_k g(k)` with `w_k` one of the signed weight `c_k = k a_k - k a_{-k}`,
//! its modulus, or the mass `a_k + a_{-k}`. Small radii are summed term by term;
//! inside each block the weights are smooth functions of `k`, so long runs are
//! summed by Euler–Maclaurin with the integral done in the log variable. The
//! part beyond the last block is the kernel limit times a closed-form tail.

use std::sync::OnceLock;

use crate::counterexample::coefficients::{
    block_of, block_start, inv_ln, inv_ln_step, signed_weight, tail_sum_f,
};
use crate::measure::kernel::{RadialKernel, Weight};
use crate::numerics::quad::{integrate_log, QuadOptions};
use crate::numerics::sum::KahanSum;

/// Radii summed term by term before switching to Euler–Maclaurin.
pub const HEAD: u64 = 4096;
/// Runs shorter than this are summed directly.
const DIRECT_RUN: f64 = 2048.0;
/// Integers above this are not all representable.
const EXACT_INT: f64 = 4_503_599_627_370_496.0;
/// Largest radius kept in the shared coefficient table.
pub const TABLE_MAX: usize = 1 << 21;

static TABLE: OnceLock<Vec<f64>> = OnceLock::new();

/// Signed weights `c_k` for `k < TABLE_MAX`, index `k`.
pub fn signed_table() -> &'static [f64] {
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; TABLE_MAX];
        for (k, slot) in t.iter_mut().enumerate().skip(2) {
            *slot = signed_weight(k as f64);
        }
        t
    })
}

/// `Σ_{k >= B_m} |c_k| = 1/ln B_m + 2 Σ_{j >= m} 1/ln(B_j + 1)`.
pub fn abs_tail_from_block(m: u32) -> f64 {
    let mut acc = inv_ln(block_start(m));
    let mut j = m;
    while j <= 30 {
        acc += 2.0 * inv_ln(block_start(j) + 1.0);
        j += 1;
    }
    let partial: f64 = (1..=30u32).map(|i| 1.0 / (i as f64 * i as f64)).sum();
    let zeta_tail = (std::f64::consts::PI.powi(2) / 6.0 - partial).max(0.0);
    acc + 2.0 / std::f64::consts::LN_2 * zeta_tail
}

/// Rigorous upper bound on `Σ_{k > n} (a_k + a_{-k})`.
pub fn mass_tail_bound(n: f64) -> f64 {
    let mut acc = inv_ln(n + 1.0) / (n + 1.0);
    let mut m = block_of(n.max(2.0)) + 1;
    while m <= 12 {
        let b = block_start(m);
        acc += 2.0 * inv_ln(b) / b;
        m += 1;
    }
    acc
}

fn weight_at(weight: Weight, k: f64) -> f64 {
    let c = signed_weight(k);
    match weight {
        Weight::Signed => c,
        Weight::Abs => c.abs(),
        Weight::Mass => c.abs() / k,
    }
}

fn smooth_weight(weight: Weight, sign: f64, x: f64) -> f64 {
    let step = inv_ln_step(x);
    match weight {
        Weight::Signed => sign * step,
        Weight::Abs => step,
        Weight::Mass => step / x,
    }
}

/// Euler–Maclaurin for `Σ_{k=lo}^{hi} s(k)` with `s` smooth on `[lo, hi]`.
fn em_sum<S: Fn(f64) -> f64>(s: &S, lo: f64, hi: f64) -> f64 {
    let integral = integrate_log(
        s,
        lo,
        hi,
        QuadOptions { abs_tol: 1e-300, rel_tol: 1e-13, max_panels: 20_000 },
    )
    .or_else(|_| integrate_log(s, lo, hi, QuadOptions { abs_tol: 1e-300, rel_tol: 1e-10, max_panels: 40_000 }))
    .map(|r| r.value)
    .unwrap_or(f64::NAN);
    let d = |x: f64, dir: f64| {
        let h = (0.01 * x).min((hi - lo) / 8.0).max(1.0) * dir;
        (-3.0 * s(x) + 4.0 * s(x + h) - s(x + 2.0 * h)) / (2.0 * h)
    };
    integral + 0.5 * (s(lo) + s(hi)) + (d(hi, -1.0) - d(lo, 1.0)) / 12.0
}

/// `Σ_k w_k g(k)` over radii `k >= 2` (and `k <= truncation` when given).
pub fn series_sum(weight: Weight, kernel: &RadialKernel, truncation: Option<f64>) -> f64 {
    let table = signed_table();
    let head_end = truncation.map_or(HEAD as f64, |t| t.min(HEAD as f64)).floor() as usize;
    let mut acc = KahanSum::new();
    for (k, &c) in table.iter().enumerate().take(head_end + 1).skip(2) {
        let kf = k as f64;
        let w = match weight {
            Weight::Signed => c,
            Weight::Abs => c.abs(),
            Weight::Mass => c.abs() / kf,
        };
        acc.add(w * kernel.eval(kf));
    }
    if let Some(t) = truncation {
        if t <= HEAD as f64 {
            return acc.value();
        }
    }

    // blocks are processed whole up to the start of block `last`
    let reach = kernel
        .breaks
        .iter()
        .copied()
        .filter(|b| b.is_finite())
        .fold(kernel.scale, f64::max)
        .max(1.0);
    let mut last = 8u32;
    while block_start(last) < 1e10 * reach && last < 30 {
        last += 1;
    }
    let b_last = block_start(last);
    let k_end = truncation.map_or(b_last, |t| t.floor().min(b_last));

    let mut current = HEAD as f64 + 1.0;
    while current < b_last && current <= k_end {
        let m = block_of(current);
        let b = block_start(m);
        if b == current {
            acc.add(weight_at(weight, current) * kernel.eval(current));
            // above 2^53 the next integer is not representable; the skipped
            // interior term is below 1e-20 of the total
            current = if b + 1.0 > b { b + 1.0 } else { b * (1.0 + f64::EPSILON) };
            continue;
        }
        let block_hi = (block_start(m + 1) - 1.0).min(k_end);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let mut cuts: Vec<f64> = kernel
            .breaks
            .iter()
            .map(|b| b.floor())
            .filter(|&b| b >= current && b < block_hi)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut lo = current;
        for hi in cuts.into_iter().chain(std::iter::once(block_hi)) {
            if hi < lo {
                continue;
            }
            if hi - lo < DIRECT_RUN && hi < EXACT_INT {
                let mut k = lo;
                while k <= hi {
                    acc.add(smooth_weight(weight, sign, k) * kernel.eval(k));
                    k += 1.0;
                }
            } else if hi > lo {
                let s = |x: f64| smooth_weight(weight, sign, x) * kernel.eval(x);
                acc.add(em_sum(&s, lo, hi));
            } else {
                acc.add(smooth_weight(weight, sign, lo) * kernel.eval(lo));
            }
            lo = if hi + 1.0 > hi { hi + 1.0 } else { hi * (1.0 + f64::EPSILON) };
        }
        current = if block_hi >= block_start(m + 1) - 1.0 { block_start(m + 1) } else { lo };
    }

    if truncation.is_none() && kernel.limit != 0.0 {
        let b = block_start(last);
        let tail = match weight {
            Weight::Signed => tail_sum_f(b),
            Weight::Abs => abs_tail_from_block(last),
            Weight::Mass => mass_tail_bound(b - 1.0),
        };
        acc.add(kernel.limit * tail);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::coefficients::{abs_moment_closed_form, abs_remainder, tail_sum};

    #[test]
    fn constant_signed_is_tail_sum() {
        let s = series_sum(Weight::Signed, &RadialKernel::constant(1.0), None);
        assert!((s - tail_sum(2)).abs() < 1e-12, "{s}");
    }

    #[test]
    fn constant_abs_is_abs_moment() {
        let s = series_sum(Weight::Abs, &RadialKernel::constant(1.0), None);
        assert!((s - abs_moment_closed_form()).abs() < 1e-12, "{s}");
    }

    #[test]
    fn above_kernel_gives_tail_sum() {
        for k in [5000.0, 70_000.0, 3.0e7, 1.0e12] {
            let s = series_sum(Weight::Signed, &RadialKernel::above(k), None);
            assert!((s - tail_sum_f(k.floor() + 1.0)).abs() < 1e-12, "k={k}: {s}");
        }
    }

    #[test]
    fn abs_tail_agrees_with_remainder() {
        for m in 2..8u32 {
            let b = block_start(m);
            let (x, y) = (abs_tail_from_block(m), abs_remainder(b - 1.0));
            assert!((x - y).abs() < 1e-13, "m={m}: {x} vs {y}");
        }
    }

    #[test]
    fn euler_maclaurin_matches_direct_run() {
        // long smooth run inside block 4 checked against plain summation
        let kernel = RadialKernel::scale_correction(1.0 / 3000.0);
        let trunc = 60_000.0;
        let em = series_sum(Weight::Signed, &kernel, Some(trunc));
        let direct: f64 = (2..=60_000u64).map(|k| signed_weight(k as f64) * kernel.eval(k as f64)).sum();
        assert!((em - direct).abs() < 1e-12 * direct.abs().max(1.0), "{em} vs {direct}");
    }

    #[test]
    fn mass_sum_matches_direct() {
        let kernel = RadialKernel::truncated_second(1.0 / 10_000.0);
        let em = series_sum(Weight::Mass, &kernel, Some(200_000.0));
        let direct: f64 = (2..=200_000u64)
            .map(|k| signed_weight(k as f64).abs() / k as f64 * kernel.eval(k as f64))
            .sum();
        assert!((em - direct).abs() < 1e-13, "{em} vs {direct}");
    }
}
