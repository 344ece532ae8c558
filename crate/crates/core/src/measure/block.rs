//! The block measure `ν(B) = ∫ λ(dξ) Σ_n 1_B(nξ) a_n` and its variant `ν̃`
//! with the extra mass `(2 ln 2)^{-1} λ` at radius 2.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::kernel::{RadialKernel, Weight};
use crate::measure::series::{mass_tail_bound, series_sum, signed_table, HEAD, TABLE_MAX};
use crate::measure::{dot, norm, Directions};

/// Mass carried by the extra atom of `ν̃` per unit of `λ`.
pub fn tilde_mass() -> f64 {
    0.5 / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockMeasure {
    pub directions: Directions,
    #[serde(default)]
    pub tilde: bool,
    /// Keep only radii `n <= truncation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u64>,
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

impl BlockMeasure {
    pub fn new(directions: Directions, tilde: bool) -> Result<Self> {
        let m = Self { directions, tilde, truncation: None, scale: 1.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.directions.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.directions.validate()?;
        self.directions.check_one_sided()?;
        if !self.scale.is_finite() || self.scale == 0.0 {
            return Err(Error::InvalidMeasure("block measure scale must be finite and nonzero".into()));
        }
        if let Some(t) = self.truncation {
            if t < 2 {
                return Err(Error::InvalidMeasure("truncation below the first atom".into()));
            }
        }
        Ok(())
    }

    fn trunc(&self) -> Option<f64> {
        self.truncation.map(|t| t as f64)
    }

    fn lifted(&self, g: &RadialKernel) -> RadialKernel {
        g.rescaled(self.scale, 1.0)
    }

    pub fn total_mass(&self) -> f64 {
        let lam = self.directions.total();
        let mut m = lam * series_sum(Weight::Mass, &RadialKernel::constant(1.0), self.trunc());
        if self.tilde {
            m += lam * tilde_mass();
        }
        m
    }

    pub fn integral_scalar(&self, g: &RadialKernel) -> f64 {
        let lam = self.directions.total();
        let mut v = lam * series_sum(Weight::Mass, &self.lifted(g), self.trunc());
        if self.tilde {
            v += lam * tilde_mass() * g.eval(2.0 * self.scale.abs());
        }
        v
    }

    pub fn integral_abs(&self, g: &RadialKernel) -> f64 {
        let lam = self.directions.total();
        let u = self.scale.abs();
        let mut v = u * lam * series_sum(Weight::Abs, &self.lifted(g), self.trunc());
        if self.tilde {
            v += lam * tilde_mass() * 2.0 * u * g.eval(2.0 * u);
        }
        v
    }

    pub fn integral_vector(&self, g: &RadialKernel) -> Vec<f64> {
        let xi = self.directions.mean();
        let u = self.scale;
        let mut c = u * series_sum(Weight::Signed, &self.lifted(g), self.trunc());
        if self.tilde {
            c += tilde_mass() * 2.0 * u * g.eval(2.0 * u.abs());
        }
        xi.iter().map(|x| c * x).collect()
    }

    /// Radius beyond which the summed atoms are replaced by the mass bound.
    fn cumulant_cut(&self, tol: f64) -> Result<(usize, f64)> {
        let lam = self.directions.total();
        let cap = self.truncation.map_or(usize::MAX, |t| t as usize);
        let mut k = HEAD as usize;
        loop {
            if k >= cap {
                return Ok((cap, 0.0));
            }
            let bound = 2.0 * lam * mass_tail_bound(k as f64);
            if bound <= tol {
                return Ok((k, bound));
            }
            if 2 * k > TABLE_MAX - 1 {
                if cap <= TABLE_MAX - 1 {
                    return Ok((cap, 0.0));
                }
                return Err(Error::UnsupportedMeasure(format!(
                    "block measure cumulant needs tolerance >= {bound:e}, requested {tol:e}"
                )));
            }
            k *= 2;
        }
    }

    /// Jump part of the cumulant; the atoms beyond the cut contribute at
    /// most `2 ν(|x| > cut)`, which is kept below `tol`.
    pub fn cumulant_jump(&self, z: &[f64], tol: f64) -> Result<Complex64> {
        let (k_max, _) = self.cumulant_cut(tol)?;
        let table = signed_table();
        let u = self.scale;
        let mut total = Complex64::new(0.0, 0.0);
        for d in &self.directions.0 {
            let a = u * dot(z, &d.xi);
            if a == 0.0 {
                continue;
            }
            const CHUNK: usize = 1 << 14;
            let parts: Vec<Complex64> = (2..=k_max)
                .step_by(CHUNK)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&start| {
                    let end = (start + CHUNK - 1).min(k_max);
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for n in start..=end {
                        let c = table[n];
                        let nf = n as f64;
                        let w = c.abs() / nf;
                        let theta = a * nf * c.signum();
                        let (s, co) = theta.sin_cos();
                        re += w * (co - 1.0);
                        im += w * s;
                    }
                    Complex64::new(re, im)
                })
                .collect();
            let sum: Complex64 = parts.into_iter().sum();
            total += d.lambda * sum;
            if self.tilde {
                total += d.lambda * tilde_mass() * (Complex64::new(0.0, 2.0 * a).exp() - 1.0);
            }
        }
        let center = self.integral_vector(&RadialKernel::centering());
        Ok(total - Complex64::new(0.0, dot(z, &center)))
    }

    pub fn pushforward(&self, u: f64) -> Self {
        Self { scale: self.scale * u, ..self.clone() }
    }

    /// Atom location for radius `n` along direction `xi` (`None` off the support).
    pub fn atom(&self, n: u64, xi: &[f64]) -> Option<(Vec<f64>, f64)> {
        let c = crate::counterexample::coefficients::signed_weight(n as f64);
        if c == 0.0 || self.truncation.is_some_and(|t| n > t) {
            return None;
        }
        let s = c.signum() * n as f64 * self.scale;
        Some((xi.iter().map(|x| s * x).collect(), c.abs() / n as f64))
    }

    pub fn check_directions_unit(&self) -> bool {
        self.directions.0.iter().all(|d| (norm(&d.xi) - 1.0).abs() < 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::coefficients::tail_sum;

    #[test]
    fn tilde_first_moment_vanishes() {
        let m = BlockMeasure::new(Directions::unit_1d(), true).unwrap();
        let v = m.integral_vector(&RadialKernel::constant(1.0));
        assert!(v[0].abs() < 1e-12, "{v:?}");
        let plain = BlockMeasure::new(Directions::unit_1d(), false).unwrap();
        assert!((plain.integral_vector(&RadialKernel::constant(1.0))[0] - tail_sum(2)).abs() < 1e-12);
    }

    #[test]
    fn cumulant_matches_truncated_direct_sum() {
        let mut m = BlockMeasure::new(Directions::unit_1d(), true).unwrap();
        m.truncation = Some(3000);
        let z = [0.7];
        let c = m.cumulant_jump(&z, 1e-12).unwrap();
        let mut direct = Complex64::new(0.0, 0.0);
        for n in 2..=3000u64 {
            let (x, w) = m.atom(n, &[1.0]).unwrap();
            let x = x[0];
            direct += w * (Complex64::new(0.0, z[0] * x).exp() - 1.0 - Complex64::new(0.0, z[0] * x / (1.0 + x * x)));
        }
        let w = tilde_mass();
        direct += w * (Complex64::new(0.0, 2.0 * z[0]).exp() - 1.0 - Complex64::new(0.0, 2.0 * z[0] / 5.0));
        assert!((c - direct).norm() < 1e-12, "{c} vs {direct}");
    }

    #[test]
    fn pushforward_scales_radii() {
        let m = BlockMeasure::new(Directions::unit_1d(), false).unwrap();
        let p = m.pushforward(-0.5);
        let k = RadialKernel::truncated_second(1.0);
        let a = p.integral_scalar(&k);
        let b = m.integral_scalar(&RadialKernel::truncated_second(0.5));
        assert!((a - b).abs() < 1e-13);
        let va = p.integral_vector(&RadialKernel::constant(1.0))[0];
        assert!((va + 0.5 * tail_sum(2)).abs() < 1e-12);
    }
}
