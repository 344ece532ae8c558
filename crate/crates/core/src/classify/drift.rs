//! The drift function `h(s) = γ^{f(s)}` and its integrals.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrand::{Family, IntegrandFn};
use crate::measure::{norm, RadialKernel};
use crate::numerics::quad::{integrate_with_breaks, QuadOptions};
use crate::triplet::{scaled_gamma, Triplet};

/// Most blocks of the alternating integrand summed one by one.
const ALT_BLOCK_BUDGET: f64 = 200_000.0;

/// Largest number of sign changes isolated in one window.
pub const SIGN_CHANGE_BUDGET: usize = 1_000_000;

/// Sampling density (points per doubling of `s`) used to bracket roots.
const SIGN_SAMPLES_PER_OCTAVE: usize = 24;

#[derive(Debug, Clone)]
pub struct DriftIntegrand {
    pub mu: Arc<Triplet>,
    pub f: IntegrandFn,
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_panels: 20_000 }
}

impl DriftIntegrand {
    pub fn new(mu: &Triplet, f: &IntegrandFn) -> Self {
        Self { mu: Arc::new(mu.clone()), f: f.clone() }
    }

    pub fn dim(&self) -> usize {
        self.mu.dim
    }

    /// Left end `a` of the region where `h` can be nonzero.
    pub fn start(&self) -> f64 {
        self.f.family.start()
    }

    /// `h ≡ 0`: vanishing integrand, or symmetric `ν` with `γ = 0`.
    pub fn is_identically_zero(&self) -> bool {
        self.f.is_zero()
            || (self.mu.gamma.iter().all(|&g| g == 0.0) && (self.mu.nu.is_zero() || self.mu.nu.is_symmetric()))
    }

    pub fn eval(&self, s: f64) -> Result<Vec<f64>> {
        let u = self.f.eval(s);
        scaled_gamma(&self.mu, u)
    }

    pub fn component(&self, j: usize, s: f64) -> Result<f64> {
        Ok(self.eval(s)?[j])
    }

    fn is_inverse_power(&self) -> bool {
        matches!(self.f.family, Family::InvS) || matches!(self.f.family, Family::PowerDecay { alpha } if alpha == 1.0)
    }

    /// `∫_lo^hi c s^{-1} (γ + ∫ x (1/(1+c^2|x|^2/s^2) - 1/(1+|x|^2)) ν(dx)) ds`, `1 <= lo`.
    fn inverse_segment(&self, c: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let l = (hi / lo).ln();
        let mut out: Vec<f64> = self.mu.gamma.iter().map(|g| c * g * l).collect();
        if !self.mu.nu.is_zero() {
            let (lo2, d) = (lo * lo, hi * hi - lo * lo);
            let kernel = RadialKernel::new(
                move |r| 0.5 * (d / (lo2 + c * c * r * r)).ln_1p() - l / (1.0 + r * r),
                0.0,
                hi / c.abs(),
                vec![],
            );
            let v = self.mu.nu.integral_vector(&kernel)?;
            for (o, x) in out.iter_mut().zip(v) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    fn quadrature_segment(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let cuts = self.f.family.breaks(lo, hi)?;
        (0..self.dim())
            .map(|j| {
                let g = |s: f64| {
                    let u = self.f.coef * self.f.family.eval(s);
                    scaled_gamma(&self.mu, u).map_or(f64::NAN, |v| v[j])
                };
                let r = integrate_with_breaks(&g, lo, hi, &cuts, quad_opts())
                    .or_else(|_| integrate_with_breaks(&g, lo, hi, &cuts, QuadOptions { max_panels: 60_000, ..QuadOptions::default() }))?;
                if r.value.is_finite() {
                    Ok(r.value)
                } else {
                    Err(Error::QuadratureFailure { a: lo, b: hi, error: f64::INFINITY })
                }
            })
            .collect()
    }

    /// `∫_lo^hi h` ignoring the mask, for `lo, hi` inside the family support.
    fn unmasked_segment(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let d = self.dim();
        if hi <= lo {
            return Ok(vec![0.0; d]);
        }
        let c = self.f.coef;
        if self.mu.nu.is_zero() {
            let fi = self.f.family.integral(crate::integrand::Kind::Plain, lo, hi)?;
            return Ok(self.mu.gamma.iter().map(|g| c * g * fi).collect());
        }
        match &self.f.family {
            _ if self.is_inverse_power() => self.inverse_segment(c, lo.max(1.0), hi.max(1.0)),
            Family::AlternatingInvS => {
                let (lo, hi) = (lo.max(1.0), hi.max(1.0));
                if hi - lo > ALT_BLOCK_BUDGET {
                    return Err(Error::UnsupportedMeasure(format!(
                        "alternating drift over [{lo}, {hi}] needs more than {ALT_BLOCK_BUDGET} blocks"
                    )));
                }
                let mut out = vec![0.0; d];
                let mut n = lo.floor();
                while n < hi {
                    let (a, b) = (lo.max(n), hi.min(n + 1.0));
                    let sign = if (n as u64) % 2 == 1 { 1.0 } else { -1.0 };
                    if b > a {
                        for (o, x) in out.iter_mut().zip(self.inverse_segment(sign * c, a, b)?) {
                            *o += x;
                        }
                    }
                    n += 1.0;
                }
                Ok(out)
            }
            Family::Constant => Ok(scaled_gamma(&self.mu, c)?.into_iter().map(|g| g * (hi - lo)).collect()),
            _ => self.quadrature_segment(lo, hi),
        }
    }

    /// `∫_lo^hi h(s) ds`, mask included.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        for (l, r) in self.f.active_windows(lo, hi)? {
            for (o, x) in out.iter_mut().zip(self.unmasked_segment(l, r)?) {
                *o += x;
            }
        }
        Ok(out)
    }

    /// `G(t_k) = ∫_0^{t_k} h` at increasing checkpoints, accumulated segment by segment.
    pub fn partials(&self, checkpoints: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut acc = vec![0.0; self.dim()];
        let mut prev = 0.0;
        for &t in checkpoints {
            if t > prev {
                for (a, x) in acc.iter_mut().zip(self.integral(prev, t)?) {
                    *a += x;
                }
                prev = t;
            }
            out.push(acc.clone());
        }
        Ok(out)
    }

    /// Sample points used to bracket sign changes inside `[lo, hi]`.
    fn sample_points(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        let mut pts = vec![lo, hi];
        let base = lo.max(1e-3);
        if hi / base > 2.0 {
            let octaves = (hi / base).log2();
            let n = ((octaves * SIGN_SAMPLES_PER_OCTAVE as f64).ceil() as usize).max(1);
            for i in 1..n {
                pts.push(base * (octaves * i as f64 / n as f64).exp2());
            }
        }
        for i in 1..64 {
            pts.push(lo + (hi - lo) * i as f64 / 64.0);
        }
        for b in self.f.breakpoints(lo, hi)? {
            pts.push(b);
        }
        pts.retain(|&x| x >= lo && x <= hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts)
    }

    /// Sign sets of `h_j` inside `[lo, hi)` as `(plus, minus, zero)` interval lists.
    pub fn sign_intervals(&self, j: usize, lo: f64, hi: f64) -> Result<SignIntervals> {
        let mut out = SignIntervals::default();
        if hi <= lo {
            return Ok(out);
        }
        if self.is_identically_zero() {
            out.zero.push((lo, hi));
            return Ok(out);
        }
        let windows = self.f.active_windows(lo, hi)?;
        let mut cursor = lo;
        for (l, r) in windows {
            if l > cursor {
                out.zero.push((cursor, l));
            }
            self.sign_intervals_active(j, l, r, &mut out)?;
            cursor = r;
        }
        if cursor < hi {
            out.zero.push((cursor, hi));
        }
        out.normalize();
        Ok(out)
    }

    fn sign_intervals_active(&self, j: usize, lo: f64, hi: f64, out: &mut SignIntervals) -> Result<()> {
        let h = |s: f64| self.component(j, s);
        let pts = self.sample_points(lo, hi)?;
        // interior points of each gap carry the sign; evaluate at midpoints of sample gaps
        let mut cuts = vec![lo];
        let mut signs = Vec::new();
        let mut changes = 0usize;
        let mid_sign = |a: f64, b: f64| -> Result<i8> { Ok(sgn(h(0.5 * (a + b))?)) };
        let mut prev: Option<(f64, f64, i8)> = None;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let sg = mid_sign(a, b)?;
            if let Some((pa, pb, ps)) = prev {
                if ps != sg {
                    // locate the change between the two midpoints
                    let (mut x0, mut x1) = (0.5 * (pa + pb), 0.5 * (a + b));
                    for _ in 0..80 {
                        let m = 0.5 * (x0 + x1);
                        if m <= x0 || m >= x1 {
                            break;
                        }
                        if sgn(h(m)?) == ps {
                            x0 = m;
                        } else {
                            x1 = m;
                        }
                    }
                    cuts.push(0.5 * (x0 + x1));
                    signs.push(ps);
                    changes += 1;
                    if changes > SIGN_CHANGE_BUDGET {
                        return Err(Error::RootIsolationFailure(format!(
                            "more than {SIGN_CHANGE_BUDGET} sign changes in [{lo}, {hi}]"
                        )));
                    }
                }
            }
            prev = Some((a, b, sg));
        }
        if let Some((_, _, s)) = prev {
            signs.push(s);
            cuts.push(hi);
        }
        for (w, s) in cuts.windows(2).zip(signs) {
            let iv = (w[0], w[1]);
            if iv.1 <= iv.0 {
                continue;
            }
            match s {
                1 => out.plus.push(iv),
                -1 => out.minus.push(iv),
                _ => out.zero.push(iv),
            }
        }
        Ok(())
    }

    /// `∫_lo^hi |h_j(s)| ds` from the sign decomposition.
    pub fn abs_integral(&self, j: usize, lo: f64, hi: f64) -> Result<f64> {
        let s = self.sign_intervals(j, lo, hi)?;
        let mut total = 0.0;
        for &(a, b) in s.plus.iter().chain(&s.minus) {
            total += self.integral(a, b)?[j].abs();
        }
        Ok(total)
    }

    /// `∫_lo^hi |h(s)| ds` with the Euclidean norm.
    pub fn norm_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        if self.dim() == 1 {
            return self.abs_integral(0, lo, hi);
        }
        let mut total = 0.0;
        for (l, r) in self.f.active_windows(lo, hi)? {
            let cuts = self.f.breakpoints(l, r)?;
            let g = |s: f64| self.eval(s).map_or(f64::NAN, |v| norm(&v));
            total += integrate_with_breaks(&g, l, r, &cuts, quad_opts())?.value;
        }
        Ok(total)
    }
}

fn sgn(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SignIntervals {
    pub plus: Vec<(f64, f64)>,
    pub minus: Vec<(f64, f64)>,
    pub zero: Vec<(f64, f64)>,
}

impl SignIntervals {
    fn normalize(&mut self) {
        for list in [&mut self.plus, &mut self.minus, &mut self.zero] {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut merged: Vec<(f64, f64)> = Vec::with_capacity(list.len());
            for &(l, r) in list.iter() {
                match merged.last_mut() {
                    Some(last) if last.1 >= l => last.1 = last.1.max(r),
                    _ => merged.push((l, r)),
                }
            }
            *list = merged;
        }
    }
}
