//! Lévy measures `λ(dξ) ⊗ ρ(dr)` with a radial law `ρ` whose tail
//! `ρ((r, ∞))` and moments are known in closed form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::kernel::RadialKernel;
use crate::measure::{dot, Directions};
use crate::numerics::quad::{integrate_log, integrate_with_breaks, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    /// Density `c r^{-1-alpha}` on `(r0, ∞)`.
    Pareto { c: f64, alpha: f64, r0: f64 },
    /// Density `c e^{-r/beta}` on `(0, ∞)`.
    Exponential { c: f64, beta: f64 },
    /// Atoms of mass `n^{-p}` at `r = base^n`, `n = 1, 2, ...`.
    LogAtoms { base: f64, p: f64 },
}

/// `Σ_{n >= n0} n^{-p}` for `p > 1`.
pub fn zeta_tail(p: f64, n0: u64) -> f64 {
    let n0 = n0.max(1);
    let start = n0.max(64);
    let mut acc = 0.0;
    for n in n0..start {
        acc += (n as f64).powf(-p);
    }
    let n = start as f64;
    // Euler–Maclaurin from `start`
    acc + n.powf(1.0 - p) / (p - 1.0) + 0.5 * n.powf(-p) + p * n.powf(-p - 1.0) / 12.0
        - p * (p + 1.0) * (p + 2.0) * n.powf(-p - 3.0) / 720.0
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-300, rel_tol: 1e-12, max_panels: 20_000 }
}

fn log_quad<F: Fn(f64) -> f64>(h: &F, a: f64, b: f64) -> f64 {
    integrate_log(h, a, b, quad_opts())
        .or_else(|_| integrate_log(h, a, b, QuadOptions { rel_tol: 1e-9, max_panels: 60_000, ..quad_opts() }))
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialProfile::Pareto { c, alpha, r0 } => c > 0.0 && alpha > 0.0 && r0 > 0.0 && c.is_finite() && alpha.is_finite() && r0.is_finite(),
            RadialProfile::Exponential { c, beta } => c > 0.0 && beta > 0.0 && c.is_finite() && beta.is_finite(),
            RadialProfile::LogAtoms { base, p } => base > 1.0 && p > 1.0 && base.is_finite() && p.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidMeasure(format!("bad radial profile parameters {self:?}")))
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.tail(0.0)
    }

    /// `ρ((r, ∞))`.
    pub fn tail(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Pareto { c, alpha, r0 } => c / alpha * r.max(r0).powf(-alpha),
            RadialProfile::Exponential { c, beta } => c * beta * (-r.max(0.0) / beta).exp(),
            RadialProfile::LogAtoms { base, p } => {
                // first n with base^n > r
                let n0 = if r < base { 1 } else { (r.ln() / base.ln()).floor() as u64 + 1 };
                let n0 = if base.powf(n0 as f64 - 1.0) > r && n0 > 1 { n0 - 1 } else { n0 };
                zeta_tail(p, n0)
            }
        }
    }

    /// `∫ r^k g(r) ρ(dr)` for `k ∈ {0, 1}`.
    pub fn moment_with(&self, k: i32, g: &RadialKernel) -> f64 {
        let reach = g.breaks.iter().copied().filter(|b| b.is_finite()).fold(g.scale, f64::max);
        match *self {
            RadialProfile::Pareto { c, alpha, r0 } => {
                let big = 1e8 * reach.max(r0);
                let h = |r: f64| c * r.powf(k as f64 - 1.0 - alpha) * g.eval(r);
                let mut cuts: Vec<f64> = g.breaks.iter().copied().filter(|&b| b > r0 && b < big).collect();
                cuts.sort_by(f64::total_cmp);
                let mut acc = 0.0;
                let mut lo = r0;
                for hi in cuts.into_iter().chain(std::iter::once(big)) {
                    acc += log_quad(&h, lo, hi);
                    lo = hi;
                }
                if g.limit != 0.0 {
                    if alpha > k as f64 {
                        acc += g.limit * c * big.powf(k as f64 - alpha) / (alpha - k as f64);
                    } else {
                        return g.limit.signum() * f64::INFINITY;
                    }
                }
                acc
            }
            RadialProfile::Exponential { c, beta } => {
                let top = 60.0 * beta;
                let h = |r: f64| c * r.powi(k) * (-r / beta).exp() * g.eval(r);
                integrate_with_breaks(&h, 0.0, top, &g.breaks, quad_opts())
                    .or_else(|_| integrate_with_breaks(&h, 0.0, top, &g.breaks, QuadOptions::default()))
                    .map(|r| r.value)
                    .unwrap_or(f64::NAN)
            }
            RadialProfile::LogAtoms { base, p } => {
                let mut acc = crate::numerics::sum::KahanSum::new();
                let mut n: u64 = 1;
                loop {
                    let r = base.powf(n as f64);
                    if !r.is_finite() {
                        break;
                    }
                    if r > 1e10 * reach && (k == 0 || g.limit == 0.0) {
                        if k == 0 {
                            acc.add(g.limit * zeta_tail(p, n));
                            break;
                        }
                        let term = (n as f64).powf(-p) * r * g.eval(r);
                        if term.abs() < 1e-18 * acc.value().abs().max(1e-300) {
                            break;
                        }
                    }
                    acc.add((n as f64).powf(-p) * r.powi(k) * g.eval(r));
                    n += 1;
                }
                if k == 1 && g.limit != 0.0 {
                    return g.limit.signum() * f64::INFINITY;
                }
                acc.value()
            }
        }
    }

    /// `∫ (e^{iar} - 1) ρ(dr)` to within `tol`.
    pub fn oscillatory(&self, a: f64, tol: f64) -> Result<Complex64> {
        if a == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if a < 0.0 {
            return self.oscillatory(-a, tol).map(|c| c.conj());
        }
        match *self {
            RadialProfile::Exponential { c, beta } => {
                let ib = Complex64::new(0.0, a * beta);
                Ok(c * beta * ib / (1.0 - ib))
            }
            RadialProfile::Pareto { c, alpha, r0 } => {
                // rotate r = r0 + i y / a, along which e^{iar} decays like e^{-y}
                let base = Complex64::new(r0, 0.0);
                let integrand = |y: f64| {
                    let r = base + Complex64::new(0.0, y / a);
                    Complex64::new(0.0, 1.0 / a) * (-y).exp() * c * r.powf(-1.0 - alpha)
                };
                let ar = a * r0;
                let breaks: Vec<f64> = [1e-3, 1e-2, 1e-1, 1.0, 10.0].iter().map(|m| m * ar).filter(|&b| b < 60.0).collect();
                let opts = QuadOptions { abs_tol: tol * 1e-3, rel_tol: 1e-12, max_panels: 20_000 };
                let re = integrate_with_breaks(&|y| integrand(y).re, 0.0, 60.0, &breaks, opts)?;
                let im = integrate_with_breaks(&|y| integrand(y).im, 0.0, 60.0, &breaks, opts)?;
                let head = Complex64::new(0.0, ar).exp() * Complex64::new(re.value, im.value);
                Ok(head - self.total_mass())
            }
            RadialProfile::LogAtoms { base, p } => {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut n: u64 = 1;
                loop {
                    let bound = 2.0 * zeta_tail(p, n);
                    if bound <= tol {
                        return Ok(acc);
                    }
                    let r = base.powf(n as f64);
                    if !(a * r < 1e15) {
                        return Err(Error::UnsupportedMeasure(format!(
                            "log-spaced atoms: phase beyond double precision before the tail drops below {tol:e} (remaining bound {bound:e})"
                        )));
                    }
                    acc += (n as f64).powf(-p) * (Complex64::new(0.0, a * r).exp() - 1.0);
                    n += 1;
                }
            }
        }
    }

    /// Is `∫_{r>1} r^q ρ(dr)` finite?
    pub fn power_moment_finite(&self, q: f64) -> bool {
        match *self {
            RadialProfile::Pareto { alpha, .. } => q < alpha,
            RadialProfile::Exponential { .. } => true,
            RadialProfile::LogAtoms { .. } => q <= 0.0,
        }
    }

    /// Is `∫ (log⁺ r)^q ρ(dr)` finite?
    pub fn log_moment_finite(&self, q: f64) -> bool {
        match *self {
            RadialProfile::LogAtoms { p, .. } => p - q > 1.0,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticTail {
    pub directions: Directions,
    pub profile: RadialProfile,
    /// Image under `x ↦ scale·x`; `1` for the measure itself.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl AnalyticTail {
    pub fn new(directions: Directions, profile: RadialProfile) -> Result<Self> {
        let m = Self { directions, profile, scale: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.directions.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.directions.validate()?;
        self.profile.validate()?;
        if !self.scale.is_finite() || self.scale == 0.0 {
            return Err(Error::InvalidMeasure("analytic tail scale must be finite and nonzero".into()));
        }
        Ok(())
    }

    fn lifted(&self, g: &RadialKernel) -> RadialKernel {
        g.rescaled(self.scale, 1.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.directions.total() * self.profile.total_mass()
    }

    pub fn integral_scalar(&self, g: &RadialKernel) -> f64 {
        self.directions.total() * self.profile.moment_with(0, &self.lifted(g))
    }

    pub fn integral_abs(&self, g: &RadialKernel) -> f64 {
        self.scale.abs() * self.directions.total() * self.profile.moment_with(1, &self.lifted(g))
    }

    pub fn integral_vector(&self, g: &RadialKernel) -> Vec<f64> {
        let mean = self.directions.mean();
        if mean.iter().all(|&m| m == 0.0) {
            return mean;
        }
        let c = self.scale * self.profile.moment_with(1, &self.lifted(g));
        mean.iter().map(|m| c * m).collect()
    }

    pub fn cumulant_jump(&self, z: &[f64], tol: f64) -> Result<Complex64> {
        let share = tol / self.directions.0.len().max(1) as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for d in &self.directions.0 {
            total += d.lambda * self.profile.oscillatory(self.scale * dot(z, &d.xi), share / d.lambda.max(1e-300))?;
        }
        let center = self.integral_vector(&RadialKernel::centering());
        Ok(total - Complex64::new(0.0, dot(z, &center)))
    }

    pub fn pushforward(&self, u: f64) -> Self {
        Self { scale: self.scale * u, ..self.clone() }
    }
}
