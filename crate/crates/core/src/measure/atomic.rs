use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::kernel::RadialKernel;
use crate::measure::{dot, norm};

/// A finite collection of weighted atoms `Σ w_i δ_{x_i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteAtomic {
    pub dim: usize,
    pub atoms: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: Vec<f64>,
    pub mass: f64,
}

impl FiniteAtomic {
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let m = Self {
            dim,
            atoms: atoms.into_iter().map(|(point, mass)| Atom { point, mass }).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, atoms: Vec::new() }
    }

    /// One-dimensional atoms.
    pub fn scalar(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(1, atoms.iter().map(|&(x, w)| (vec![x], w)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        for a in &self.atoms {
            if a.point.len() != self.dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom {:?} does not have dimension {}",
                    a.point, self.dim
                )));
            }
            if !a.point.iter().all(|v| v.is_finite()) || norm(&a.point) == 0.0 {
                return Err(Error::InvalidMeasure(format!("atom at {:?} must be finite and nonzero", a.point)));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom mass {} must be positive", a.mass)));
            }
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// True when the atom multiset is invariant under `x ↦ -x`.
    pub fn is_symmetric(&self) -> bool {
        let mut used = vec![false; self.atoms.len()];
        for i in 0..self.atoms.len() {
            if used[i] {
                continue;
            }
            let a = &self.atoms[i];
            let partner = (0..self.atoms.len()).find(|&j| {
                !used[j]
                    && j != i
                    && (self.atoms[j].mass - a.mass).abs() <= 1e-12 * a.mass
                    && self.atoms[j].point.iter().zip(&a.point).all(|(p, q)| (p + q).abs() <= 1e-12 * (1.0 + q.abs()))
            });
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return false,
            }
        }
        true
    }

    pub fn integral_scalar(&self, g: &RadialKernel) -> f64 {
        self.atoms.iter().map(|a| a.mass * g.eval(norm(&a.point))).sum()
    }

    pub fn integral_abs(&self, g: &RadialKernel) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let r = norm(&a.point);
                a.mass * r * g.eval(r)
            })
            .sum()
    }

    pub fn integral_vector(&self, g: &RadialKernel) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for a in &self.atoms {
            let w = a.mass * g.eval(norm(&a.point));
            for (o, x) in out.iter_mut().zip(&a.point) {
                *o += w * x;
            }
        }
        out
    }

    /// `∫ (e^{i<z,x>} - 1 - i<z,x>/(1+|x|^2)) ν(dx)`, exact.
    pub fn cumulant_jump(&self, z: &[f64]) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| {
                let zx = dot(z, &a.point);
                let r2 = dot(&a.point, &a.point);
                let e = Complex64::new(0.0, zx).exp() - 1.0;
                a.mass * (e - Complex64::new(0.0, zx / (1.0 + r2)))
            })
            .sum()
    }

    pub fn pushforward(&self, u: f64) -> Self {
        if u == 0.0 {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { point: a.point.iter().map(|x| u * x).collect(), mass: a.mass })
                .collect(),
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.atoms.iter().map(|a| norm(&a.point)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_cumulant() {
        let m = FiniteAtomic::scalar(&[(1.0, 1.0)]).unwrap();
        let c = m.cumulant_jump(&[std::f64::consts::PI]);
        assert!((c.re + 2.0).abs() < 1e-14);
        assert!((c.im + std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn symmetry_detection() {
        assert!(FiniteAtomic::scalar(&[(1.0, 0.5), (-1.0, 0.5)]).unwrap().is_symmetric());
        assert!(!FiniteAtomic::scalar(&[(1.0, 0.5), (-1.0, 0.25)]).unwrap().is_symmetric());
        assert!(!FiniteAtomic::scalar(&[(2.0, 1.0)]).unwrap().is_symmetric());
    }

    #[test]
    fn rejects_atom_at_origin() {
        assert!(FiniteAtomic::scalar(&[(0.0, 1.0)]).is_err());
        assert!(FiniteAtomic::scalar(&[(1.0, 0.0)]).is_err());
    }
}
