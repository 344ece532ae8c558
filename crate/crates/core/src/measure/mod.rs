//! Lévy measures with exactly computable radial functionals.

pub mod analytic;
pub mod atomic;
pub mod block;
pub mod kernel;
pub mod series;
pub mod time_integrated;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use analytic::{AnalyticTail, RadialProfile};
pub use atomic::{Atom, FiniteAtomic};
pub use block::BlockMeasure;
pub use kernel::{RadialKernel, Weight};
pub use time_integrated::TimeIntegrated;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point `ξ` of the unit sphere with weight `λ({ξ})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    pub xi: Vec<f64>,
    pub lambda: f64,
}

/// A finite measure `λ` on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Directions(pub Vec<Direction>);

impl Directions {
    pub fn new(list: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let d = Self(list.into_iter().map(|(xi, lambda)| Direction { xi, lambda }).collect());
        d.validate()?;
        Ok(d)
    }

    /// `λ = δ_{+1}` on the line.
    pub fn unit_1d() -> Self {
        Self(vec![Direction { xi: vec![1.0], lambda: 1.0 }])
    }

    /// `λ = δ_{+1} + δ_{-1}` on the line.
    pub fn symmetric_1d() -> Self {
        Self(vec![Direction { xi: vec![1.0], lambda: 1.0 }, Direction { xi: vec![-1.0], lambda: 1.0 }])
    }

    pub fn dim(&self) -> usize {
        self.0.first().map_or(0, |d| d.xi.len())
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.0.is_empty() || dim == 0 {
            return Err(Error::InvalidDirections("at least one direction is required".into()));
        }
        for d in &self.0 {
            if d.xi.len() != dim {
                return Err(Error::InvalidDirections(format!("direction {:?} is not in dimension {dim}", d.xi)));
            }
            if !d.xi.iter().all(|x| x.is_finite()) || (norm(&d.xi) - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidDirections(format!("direction {:?} is not a unit vector", d.xi)));
            }
            if !(d.lambda > 0.0 && d.lambda.is_finite()) {
                return Err(Error::InvalidDirections(format!("direction weight {} must be positive", d.lambda)));
            }
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|d| d.lambda).sum()
    }

    /// `∫ ξ λ(dξ)`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for d in &self.0 {
            for (o, x) in m.iter_mut().zip(&d.xi) {
                *o += d.lambda * x;
            }
        }
        m
    }

    fn has_antipode(&self, i: usize) -> Option<usize> {
        let a = &self.0[i];
        self.0
            .iter()
            .position(|b| b.xi.iter().zip(&a.xi).all(|(p, q)| (p + q).abs() <= 1e-12))
    }

    /// Invariant under `ξ ↦ -ξ`.
    pub fn is_symmetric(&self) -> bool {
        (0..self.0.len()).all(|i| self.has_antipode(i).is_some_and(|j| (self.0[j].lambda - self.0[i].lambda).abs() <= 1e-12 * self.0[i].lambda))
    }

    /// The support `S_0` must not meet `-S_0` and `∫ ξ λ(dξ)` must not vanish.
    pub fn check_one_sided(&self) -> Result<()> {
        if (0..self.0.len()).any(|i| self.has_antipode(i).is_some()) {
            return Err(Error::InvalidDirections("the support meets its reflection".into()));
        }
        if norm(&self.mean()) <= 1e-12 * self.total() {
            return Err(Error::InvalidDirections("∫ξλ(dξ) vanishes".into()));
        }
        Ok(())
    }
}

/// The supported Lévy measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum LevyMeasure {
    FiniteAtomic(FiniteAtomic),
    #[serde(rename = "block_e2")]
    BlockE2(BlockMeasure),
    AnalyticTail(AnalyticTail),
    /// `ν_t(B) = ∫_0^t ν(f(s)^{-1}B) ds`; built in memory only.
    #[serde(skip)]
    TimeIntegrated(TimeIntegrated),
}

impl LevyMeasure {
    pub fn zero(dim: usize) -> Self {
        LevyMeasure::FiniteAtomic(FiniteAtomic::zero(dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            LevyMeasure::FiniteAtomic(m) => m.dim,
            LevyMeasure::BlockE2(m) => m.dim(),
            LevyMeasure::AnalyticTail(m) => m.dim(),
            LevyMeasure::TimeIntegrated(m) => m.base.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LevyMeasure::FiniteAtomic(m) => m.validate(),
            LevyMeasure::BlockE2(m) => m.validate(),
            LevyMeasure::AnalyticTail(m) => m.validate(),
            LevyMeasure::TimeIntegrated(m) => m.base.validate(),
        }
    }

    /// Whether the measure is known to be invariant under `x ↦ -x`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            LevyMeasure::FiniteAtomic(m) => m.is_symmetric(),
            LevyMeasure::BlockE2(_) => false,
            LevyMeasure::AnalyticTail(m) => m.directions.is_symmetric(),
            LevyMeasure::TimeIntegrated(m) => m.base.is_symmetric(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            LevyMeasure::FiniteAtomic(m) => m.atoms.is_empty(),
            LevyMeasure::TimeIntegrated(m) => m.f.is_zero() || m.base.is_zero(),
            _ => false,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            LevyMeasure::FiniteAtomic(m) => m.total_mass(),
            LevyMeasure::BlockE2(m) => m.total_mass(),
            LevyMeasure::AnalyticTail(m) => m.total_mass(),
            LevyMeasure::TimeIntegrated(m) => m.integral_scalar(&RadialKernel::constant(1.0)).unwrap_or(f64::NAN),
        }
    }

    /// `∫ g(|x|) ν(dx)`.
    pub fn integral_scalar(&self, g: &RadialKernel) -> Result<f64> {
        Ok(match self {
            LevyMeasure::FiniteAtomic(m) => m.integral_scalar(g),
            LevyMeasure::BlockE2(m) => m.integral_scalar(g),
            LevyMeasure::AnalyticTail(m) => m.integral_scalar(g),
            LevyMeasure::TimeIntegrated(m) => m.integral_scalar(g)?,
        })
    }

    /// `∫ |x| g(|x|) ν(dx)`.
    pub fn integral_abs(&self, g: &RadialKernel) -> Result<f64> {
        Ok(match self {
            LevyMeasure::FiniteAtomic(m) => m.integral_abs(g),
            LevyMeasure::BlockE2(m) => m.integral_abs(g),
            LevyMeasure::AnalyticTail(m) => m.integral_abs(g),
            LevyMeasure::TimeIntegrated(m) => m.integral_abs(g)?,
        })
    }

    /// `∫ x g(|x|) ν(dx)`.
    pub fn integral_vector(&self, g: &RadialKernel) -> Result<Vec<f64>> {
        Ok(match self {
            LevyMeasure::FiniteAtomic(m) => m.integral_vector(g),
            LevyMeasure::BlockE2(m) => m.integral_vector(g),
            LevyMeasure::AnalyticTail(m) => m.integral_vector(g),
            LevyMeasure::TimeIntegrated(m) => m.integral_vector(g)?,
        })
    }

    /// `∫(|x|^2 ∧ 1) ν(dx)`.
    pub fn second_truncated_moment(&self) -> Result<f64> {
        self.integral_scalar(&RadialKernel::truncated_second(1.0))
    }

    /// `∫_{|x|>s} x ν(dx)`.
    pub fn tail_vector(&self, s: f64) -> Result<Vec<f64>> {
        self.integral_vector(&RadialKernel::above(s))
    }

    /// `∫ (e^{i<z,x>} - 1 - i<z,x>/(1+|x|^2)) ν(dx)` to absolute accuracy `tol`.
    pub fn cumulant_jump(&self, z: &[f64], tol: f64) -> Result<Complex64> {
        match self {
            LevyMeasure::FiniteAtomic(m) => Ok(m.cumulant_jump(z)),
            LevyMeasure::BlockE2(m) => m.cumulant_jump(z, tol),
            LevyMeasure::AnalyticTail(m) => m.cumulant_jump(z, tol),
            LevyMeasure::TimeIntegrated(m) => m.cumulant_jump(z, tol),
        }
    }

    /// Image under `x ↦ u x` (the zero measure for `u = 0`).
    pub fn pushforward(&self, u: f64) -> Self {
        if u == 0.0 {
            return Self::zero(self.dim());
        }
        match self {
            LevyMeasure::FiniteAtomic(m) => LevyMeasure::FiniteAtomic(m.pushforward(u)),
            LevyMeasure::BlockE2(m) => LevyMeasure::BlockE2(m.pushforward(u)),
            LevyMeasure::AnalyticTail(m) => LevyMeasure::AnalyticTail(m.pushforward(u)),
            LevyMeasure::TimeIntegrated(m) => LevyMeasure::TimeIntegrated(m.pushforward(u)),
        }
    }

    /// Is `∫_{|x|>1} |x|^q ν(dx)` finite? `None` when not known in closed form.
    pub fn power_moment_finite(&self, q: f64) -> Option<bool> {
        match self {
            LevyMeasure::FiniteAtomic(_) => Some(true),
            LevyMeasure::BlockE2(m) => Some(m.truncation.is_some() || q <= 1.0),
            LevyMeasure::AnalyticTail(m) => Some(m.profile.power_moment_finite(q)),
            LevyMeasure::TimeIntegrated(m) => {
                if m.f.compactly_supported() || m.base.power_moment_finite(q) == Some(true) {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    /// Is `∫ (log⁺|x|)^q ν(dx)` finite?
    pub fn log_moment_finite(&self, q: f64) -> Option<bool> {
        match self {
            LevyMeasure::FiniteAtomic(_) | LevyMeasure::BlockE2(_) => Some(true),
            LevyMeasure::AnalyticTail(m) => Some(m.profile.log_moment_finite(q)),
            LevyMeasure::TimeIntegrated(m) => m.base.log_moment_finite(q).filter(|&b| b),
        }
    }

    /// Is `∫_{|x|>1} |x| log|x| ν(dx)` finite?
    pub fn x_log_x_finite(&self) -> Option<bool> {
        match self {
            LevyMeasure::FiniteAtomic(_) => Some(true),
            LevyMeasure::BlockE2(m) => Some(m.truncation.is_some()),
            LevyMeasure::AnalyticTail(m) => Some(match m.profile {
                RadialProfile::Pareto { alpha, .. } => alpha > 1.0,
                RadialProfile::Exponential { .. } => true,
                RadialProfile::LogAtoms { .. } => false,
            }),
            LevyMeasure::TimeIntegrated(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let m = LevyMeasure::BlockE2(BlockMeasure::new(Directions::unit_1d(), true).unwrap());
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"variant\":\"block_e2\""), "{s}");
        let back: LevyMeasure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let a: LevyMeasure =
            serde_json::from_str(r#"{"variant":"finite_atomic","dim":1,"atoms":[{"point":[2.0],"mass":1.0}]}"#).unwrap();
        assert_eq!(a.total_mass(), 1.0);
        let bad = serde_json::from_str::<LevyMeasure>(
            r#"{"variant":"finite_atomic","dim":1,"atoms":[],"extra":1}"#,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn one_sided_directions() {
        assert!(Directions::unit_1d().check_one_sided().is_ok());
        assert!(Directions::symmetric_1d().check_one_sided().is_err());
        assert!(Directions::symmetric_1d().is_symmetric());
    }
}
