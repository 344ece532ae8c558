//! The telescoping block coefficients `a_n`.
//!
//! Integers `n >= 2` are grouped into blocks `2^{m^2} <= n < 2^{(m+1)^2}`.
//! Inside a block all mass sits on one side of the origin (`+n` for odd `m`,
//! `-n` for even `m`), and the boundary atom `n = 2^{m^2}` sits on the
//! opposite side with the doubled weight. Natural logarithms throughout.

use crate::numerics::sum::{DoubleDouble, KahanSum};

/// `1 / ln x`.
#[inline]
pub fn inv_ln(x: f64) -> f64 {
    1.0 / x.ln()
}

/// `1/ln x - 1/ln(x+1)` without cancellation.
#[inline]
pub fn inv_ln_step(x: f64) -> f64 {
    (1.0 / x).ln_1p() / (x.ln() * (x + 1.0).ln())
}

/// Left boundary `2^{m^2}` of block `m`, as a float (exact for every `m` used).
#[inline]
pub fn block_start(m: u32) -> f64 {
    2f64.powi((m * m) as i32)
}

/// Block index `m` with `2^{m^2} <= n < 2^{(m+1)^2}`, for `n >= 2`.
pub fn block_of(n: f64) -> u32 {
    debug_assert!(n >= 2.0);
    let mut m = (n.log2().sqrt().floor() as u32).max(1);
    while block_start(m + 1) <= n {
        m += 1;
    }
    while m > 1 && block_start(m) > n {
        m -= 1;
    }
    m
}

/// Block index used by the tail identity: `2^{m^2} < k <= 2^{(m+1)^2}`.
pub fn tail_block_of(k: f64) -> u32 {
    debug_assert!(k >= 3.0);
    let m = block_of(k);
    if block_start(m) == k {
        m - 1
    } else {
        m
    }
}

#[inline]
pub fn is_boundary(n: f64) -> bool {
    n >= 2.0 && block_start(block_of(n)) == n
}

/// `(a_n, a_{-n})` for `n >= 0`.
pub fn coeff(n: u64) -> (f64, f64) {
    if n < 2 {
        return (0.0, 0.0);
    }
    let x = n as f64;
    let m = block_of(x);
    if block_start(m) == x {
        let w = (inv_ln(x) + inv_ln(x + 1.0)) / x;
        if m % 2 == 0 {
            (w, 0.0)
        } else {
            (0.0, w)
        }
    } else {
        let w = inv_ln_step(x) / x;
        if m % 2 == 1 {
            (w, 0.0)
        } else {
            (0.0, w)
        }
    }
}

/// Signed first-moment weight `n a_n - n a_{-n}` at radius `n`.
pub fn signed_weight(n: f64) -> f64 {
    if n < 2.0 {
        return 0.0;
    }
    let m = block_of(n);
    if block_start(m) == n {
        let w = inv_ln(n) + inv_ln(n + 1.0);
        if m % 2 == 0 {
            w
        } else {
            -w
        }
    } else {
        let w = inv_ln_step(n);
        if m % 2 == 1 {
            w
        } else {
            -w
        }
    }
}

/// Total mass `a_n + a_{-n}` at radius `n`.
pub fn mass(n: f64) -> f64 {
    if n < 2.0 {
        0.0
    } else {
        signed_weight(n).abs() / n
    }
}

/// `Σ_{|n| >= k} n a_n`, closed form `±1/ln k` (valid for `k >= 2`).
pub fn tail_sum(k: u64) -> f64 {
    tail_sum_f(k as f64)
}

pub fn tail_sum_f(k: f64) -> f64 {
    if k < 2.0 {
        return tail_sum_f(2.0);
    }
    if k < 3.0 {
        // the n = 2 boundary atom sits at -2 and pushes the sum to -1/ln 2
        return -inv_ln(2.0);
    }
    let m = tail_block_of(k);
    if m % 2 == 1 {
        inv_ln(k)
    } else {
        -inv_ln(k)
    }
}

/// `Σ_{|n| > n_max} |n| a_n` in closed form.
pub fn abs_remainder(n_max: f64) -> f64 {
    let n_max = n_max.max(1.0).floor();
    let mut acc = inv_ln((n_max + 1.0).max(2.0));
    let mut m = 1;
    while block_start(m) <= n_max {
        m += 1;
    }
    // terms 2/ln(2^{m^2}+1); beyond m = 30 they equal 2/(m^2 ln 2) to double precision
    while m <= 30 {
        acc += 2.0 * inv_ln(block_start(m) + 1.0);
        m += 1;
    }
    let partial: f64 = (1..=30u32).map(|j| 1.0 / (j as f64 * j as f64)).sum();
    acc + 2.0 / std::f64::consts::LN_2 * (std::f64::consts::PI.powi(2) / 6.0 - partial)
}

/// Streamed `Σ_{k <= |n| <= n_max} n a_n`.
pub fn streamed_signed_sum(k: u64, n_max: u64) -> f64 {
    let mut acc = KahanSum::new();
    for n in k.max(2)..=n_max {
        acc.add(signed_weight(n as f64));
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsMoment {
    /// `Σ_{|n|>=2} |n| a_n`.
    pub value: f64,
    /// Streamed part over `2 <= |n| <= n_max`.
    pub streamed: f64,
    /// Closed-form remainder over `|n| > n_max`.
    pub remainder: f64,
    pub n_max: u64,
    pub error_bound: f64,
}

/// Default streaming cut: the `m = 5` block boundary `2^25`.
pub const STREAM_N_MAX: u64 = 1 << 25;

/// `Σ_{|n|>=2} |n| a_n` by forward compensated streaming plus the exact remainder.
pub fn abs_moment() -> AbsMoment {
    abs_moment_to(STREAM_N_MAX)
}

pub fn abs_moment_to(n_max: u64) -> AbsMoment {
    let mut acc = KahanSum::new();
    for n in 2..=n_max {
        acc.add(signed_weight(n as f64).abs());
    }
    let streamed = acc.value();
    let remainder = abs_remainder(n_max as f64);
    let value = streamed + remainder;
    // compensated summation error plus a few ulps for each logarithm in the remainder
    let error_bound = 4.0 * f64::EPSILON * value + (n_max as f64) * f64::EPSILON * f64::EPSILON * value + 1e-15;
    AbsMoment { value, streamed, remainder, n_max, error_bound }
}

/// Same quantity accumulated in reverse order in double-double arithmetic.
pub fn abs_moment_reverse_dd(n_max: u64) -> f64 {
    let mut acc = DoubleDouble::new();
    for n in (2..=n_max).rev() {
        acc.add(signed_weight(n as f64).abs());
    }
    acc.value() + abs_remainder(n_max as f64)
}

/// Closed form per block: `1/ln 2 + 2 Σ_m 1/ln(2^{m^2}+1)`.
pub fn abs_moment_closed_form() -> f64 {
    abs_remainder(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_coefficients() {
        assert_eq!(coeff(0), (0.0, 0.0));
        assert_eq!(coeff(1), (0.0, 0.0));
        let (p, n) = coeff(2);
        assert_eq!(p, 0.0);
        let expect = 0.5 * (1.0 / 2f64.ln() + 1.0 / 3f64.ln());
        assert!((n - expect).abs() < 1e-15);
        assert!((n - 1.176_467).abs() < 1e-6);
        let (p, n) = coeff(5);
        assert!((p - (1.0 / 5.0) * (1.0 / 5f64.ln() - 1.0 / 6f64.ln())).abs() < 1e-16);
        assert_eq!(n, 0.0);
    }

    #[test]
    fn exactly_one_side_nonzero() {
        for n in 2..5000u64 {
            let (p, q) = coeff(n);
            assert!(p >= 0.0 && q >= 0.0);
            assert!((p == 0.0) ^ (q == 0.0), "n = {n}");
        }
    }

    #[test]
    fn block_indices() {
        assert_eq!(block_of(2.0), 1);
        assert_eq!(block_of(15.0), 1);
        assert_eq!(block_of(16.0), 2);
        assert_eq!(block_of(511.0), 2);
        assert_eq!(block_of(512.0), 3);
        assert_eq!(block_of(2f64.powi(49)), 7);
        assert_eq!(tail_block_of(16.0), 1);
        assert_eq!(tail_block_of(17.0), 2);
    }

    #[test]
    fn tail_sum_values() {
        assert!((tail_sum(3) - 1.0 / 3f64.ln()).abs() < 1e-15);
        assert!((tail_sum(3) - 0.910_239).abs() < 1e-6);
        assert!((tail_sum(17) + 1.0 / 17f64.ln()).abs() < 1e-15);
        assert!((tail_sum(2) + 1.0 / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn tail_sum_matches_streaming_small() {
        for k in [3u64, 5, 16, 17, 100, 512, 513] {
            let n_max = 1u64 << 16;
            let s = streamed_signed_sum(k, n_max) + tail_sum(n_max + 1);
            assert!((s - tail_sum(k)).abs() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn abs_remainder_consistent_with_streaming() {
        let direct: f64 = (2..=70_000u64).map(|n| signed_weight(n as f64).abs()).sum();
        let full = direct + abs_remainder(70_000.0);
        assert!((full - abs_moment_closed_form()).abs() < 1e-12);
    }
}
