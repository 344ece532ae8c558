//! The Lévy measure `ν_t(B) = ∫_0^t ds ∫ 1_B(f(s)x) ν(dx)` of `∫_0^t f dX`,
//! kept as the pair `(ν, f)`; functionals are integrated over `s`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrand::IntegrandFn;
use crate::measure::kernel::RadialKernel;
use crate::measure::{dot, norm, LevyMeasure};
use crate::numerics::quad::{integrate_with_breaks, QuadOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeIntegrated {
    pub base: Arc<LevyMeasure>,
    pub f: IntegrandFn,
    pub t: f64,
}

impl TimeIntegrated {
    pub fn new(base: LevyMeasure, f: IntegrandFn, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidIntegrand(format!("horizon {t} must be positive and finite")));
        }
        Ok(Self { base: Arc::new(base), f, t })
    }

    pub fn pushforward(&self, u: f64) -> Self {
        Self { f: self.f.scaled(u), ..self.clone() }
    }

    /// Radii of the base atoms, when the base is atomic.
    fn atom_radii(&self) -> Vec<f64> {
        match self.base.as_ref() {
            LevyMeasure::FiniteAtomic(m) => m.atoms.iter().map(|a| norm(&a.point)).collect(),
            _ => Vec::new(),
        }
    }

    /// Splits `[0, t]` at the breakpoints of `f` and, for atomic bases, at the
    /// times where some atom `f(s)x` crosses a break of the kernel.
    fn integrate_s<H: Fn(f64) -> f64>(&self, h: H, kernel_breaks: &[f64]) -> Result<f64> {
        let radii = self.atom_radii();
        let mut total = 0.0;
        for (l, r) in self.f.active_windows(0.0, self.t)? {
            let mut cuts = self.f.breakpoints(l, r)?;
            for &rho in &radii {
                for &b in kernel_breaks {
                    cuts.extend(self.f.level_crossings(b / rho, l, r)?);
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let res = integrate_with_breaks(&h, l, r, &cuts, QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 20_000 })?;
            total += res.value;
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::QuadratureFailure { a: 0.0, b: self.t, error: f64::INFINITY })
        }
    }

    pub fn integral_scalar(&self, g: &RadialKernel) -> Result<f64> {
        self.integrate_s(
            |s| {
                let u = self.f.eval(s);
                if u == 0.0 {
                    return 0.0;
                }
                self.base.integral_scalar(&g.rescaled(u, 1.0)).unwrap_or(f64::NAN)
            },
            &g.breaks,
        )
    }

    pub fn integral_abs(&self, g: &RadialKernel) -> Result<f64> {
        self.integrate_s(
            |s| {
                let u = self.f.eval(s);
                if u == 0.0 {
                    return 0.0;
                }
                u.abs() * self.base.integral_abs(&g.rescaled(u, 1.0)).unwrap_or(f64::NAN)
            },
            &g.breaks,
        )
    }

    pub fn integral_vector(&self, g: &RadialKernel) -> Result<Vec<f64>> {
        let d = self.base.dim();
        (0..d)
            .map(|j| {
                self.integrate_s(
                    |s| {
                        let u = self.f.eval(s);
                        if u == 0.0 {
                            return 0.0;
                        }
                        self.base
                            .integral_vector(&g.rescaled(u, 1.0))
                            .map_or(f64::NAN, |v| u * v[j])
                    },
                    &g.breaks,
                )
            })
            .collect()
    }

    /// `∫_0^t [C_ν(f(s)z) - i<z, f(s) ∫x(1/(1+|f(s)x|^2) - 1/(1+|x|^2))ν(dx)>] ds`,
    /// the jump part of the cumulant of `ν_t` with its own centering.
    pub fn cumulant_jump(&self, z: &[f64], tol: f64) -> Result<Complex64> {
        let inner_tol = tol / self.t.max(1.0);
        let at = |s: f64| -> Complex64 {
            let u = self.f.eval(s);
            if u == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let uz: Vec<f64> = z.iter().map(|x| u * x).collect();
            let jump = self.base.cumulant_jump(&uz, inner_tol);
            let shift = self.base.integral_vector(&RadialKernel::scale_correction(u));
            match (jump, shift) {
                (Ok(j), Ok(v)) => j - Complex64::new(0.0, dot(z, &v)),
                _ => Complex64::new(f64::NAN, f64::NAN),
            }
        };
        let re = self.integrate_s(|s| at(s).re, &[])?;
        let im = self.integrate_s(|s| at(s).im, &[])?;
        Ok(Complex64::new(re, im))
    }
}
