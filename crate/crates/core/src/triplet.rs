//! Lévy–Khintchine triplets `(A, ν, γ)` and the functionals built on them.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrand::{Family, IntegrandFn, Kind};
use crate::measure::block::tilde_mass;
use crate::measure::series::{signed_table, TABLE_MAX};
use crate::numerics::special::inverse_phase_integral;
use crate::measure::{dot, norm, FiniteAtomic, LevyMeasure, RadialKernel, TimeIntegrated};
use crate::numerics::quad::{integrate_with_breaks, QuadOptions};

/// Absolute accuracy requested from the jump integral by default.
pub const CUMULANT_TOL: f64 = 1e-8;

/// Golden-section refinement steps used by [`phi_tilde`].
pub const GOLDEN_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triplet {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub nu: LevyMeasure,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledTriplet {
    pub u: f64,
    pub a_u: Vec<Vec<f64>>,
    pub nu_u: LevyMeasure,
    pub gamma_u: Vec<f64>,
}

impl ScaledTriplet {
    pub fn into_triplet(self) -> Triplet {
        Triplet { dim: self.gamma_u.len(), a: self.a_u, nu: self.nu_u, gamma: self.gamma_u }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantValue {
    pub value: Complex64,
    /// `-<z, Az>/2`.
    pub gaussian_part: f64,
    pub jump_part: Complex64,
    /// `i<γ, z>`.
    pub drift_part: Complex64,
}

fn zeros(d: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; d]; d]
}

fn scaled_matrix(a: &[Vec<f64>], k: f64) -> Vec<Vec<f64>> {
    a.iter().map(|row| row.iter().map(|x| k * x).collect()).collect()
}

impl Triplet {
    pub fn new(a: Vec<Vec<f64>>, nu: LevyMeasure, gamma: Vec<f64>) -> Result<Self> {
        let t = Self { dim: gamma.len(), a, nu, gamma };
        t.validate()?;
        Ok(t)
    }

    /// `(A, 0, γ)`.
    pub fn gaussian(a: Vec<Vec<f64>>, gamma: Vec<f64>) -> Result<Self> {
        let d = gamma.len();
        Self::new(a, LevyMeasure::zero(d), gamma)
    }

    /// One-dimensional Brownian motion with variance `sigma2` and drift `gamma`.
    pub fn brownian(sigma2: f64, gamma: f64) -> Result<Self> {
        Self::gaussian(vec![vec![sigma2]], vec![gamma])
    }

    /// `(0, ν, γ)`.
    pub fn pure_jump(nu: LevyMeasure, gamma: Vec<f64>) -> Result<Self> {
        let d = gamma.len();
        Self::new(zeros(d), nu, gamma)
    }

    pub fn zero(d: usize) -> Self {
        Self { dim: d, a: zeros(d), nu: LevyMeasure::zero(d), gamma: vec![0.0; d] }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.a[i][j])
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::InvalidTriplet("dimension must be positive".into()));
        }
        if self.gamma.len() != d || !self.gamma.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidTriplet(format!("gamma must be a finite vector of length {d}")));
        }
        if self.a.len() != d || self.a.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidTriplet(format!("A must be {d}×{d}")));
        }
        if !self.a.iter().flatten().all(|x| x.is_finite()) {
            return Err(Error::InvalidTriplet("A has non-finite entries".into()));
        }
        let scale = self.a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(self.trace_a().abs()).max(1.0);
        let eps = 1e-12 * scale;
        for i in 0..d {
            for j in 0..i {
                if (self.a[i][j] - self.a[j][i]).abs() > eps {
                    return Err(Error::InvalidTriplet("A is not symmetric".into()));
                }
            }
        }
        let eig = SymmetricEigen::new(self.matrix());
        if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
            if min < -eps {
                return Err(Error::InvalidTriplet(format!("A has negative eigenvalue {min:e}")));
            }
        }
        if self.nu.dim() != d {
            return Err(Error::InvalidTriplet(format!("ν lives in dimension {}, expected {d}", self.nu.dim())));
        }
        self.nu.validate()?;
        let m2 = self.nu.second_truncated_moment()?;
        if !m2.is_finite() {
            return Err(Error::InvalidTriplet("∫(|x|^2 ∧ 1)ν(dx) is not finite".into()));
        }
        Ok(())
    }

    pub fn trace_a(&self) -> f64 {
        (0..self.dim.min(self.a.len())).map(|i| self.a[i].get(i).copied().unwrap_or(0.0)).sum()
    }

    /// `<z, Az>`.
    pub fn quad_form(&self, z: &[f64]) -> f64 {
        self.a.iter().zip(z).map(|(row, zi)| zi * dot(row, z)).sum()
    }

    pub fn is_gaussian_free(&self) -> bool {
        self.a.iter().flatten().all(|&x| x == 0.0)
    }
}

/// `C_μ(z)` with the jump integral accurate to `tol`.
pub fn cumulant_tol(mu: &Triplet, z: &[f64], tol: f64) -> Result<CumulantValue> {
    if z.len() != mu.dim || !z.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidTriplet(format!("z must be a finite vector of length {}", mu.dim)));
    }
    let gaussian_part = -0.5 * mu.quad_form(z);
    let jump_part = if mu.nu.is_zero() { Complex64::new(0.0, 0.0) } else { mu.nu.cumulant_jump(z, tol)? };
    let drift_part = Complex64::new(0.0, dot(&mu.gamma, z));
    Ok(CumulantValue { value: gaussian_part + jump_part + drift_part, gaussian_part, jump_part, drift_part })
}

pub fn cumulant(mu: &Triplet, z: &[f64]) -> Result<CumulantValue> {
    cumulant_tol(mu, z, CUMULANT_TOL)
}

/// `γ^u = uγ + ∫ ux (1/(1+|ux|^2) - 1/(1+|x|^2)) ν(dx)`.
pub fn scaled_gamma(mu: &Triplet, u: f64) -> Result<Vec<f64>> {
    if u == 0.0 {
        return Ok(vec![0.0; mu.dim]);
    }
    let mut g: Vec<f64> = mu.gamma.iter().map(|x| u * x).collect();
    if !mu.nu.is_zero() && u != 1.0 {
        let c = mu.nu.integral_vector(&RadialKernel::scale_correction(u))?;
        for (gi, ci) in g.iter_mut().zip(c) {
            *gi += ci;
        }
    }
    Ok(g)
}

pub fn scale_triplet(mu: &Triplet, u: f64) -> Result<ScaledTriplet> {
    if u == 0.0 {
        let z = Triplet::zero(mu.dim);
        return Ok(ScaledTriplet { u, a_u: z.a, nu_u: z.nu, gamma_u: z.gamma });
    }
    Ok(ScaledTriplet {
        u,
        a_u: scaled_matrix(&mu.a, u * u),
        nu_u: mu.nu.pushforward(u),
        gamma_u: scaled_gamma(mu, u)?,
    })
}

/// `φ(u) = tr A^u + ∫(|x|^2 ∧ 1)ν^u(dx) + |γ^u|`.
pub fn phi(mu: &Triplet, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let jump = if mu.nu.is_zero() { 0.0 } else { mu.nu.integral_scalar(&RadialKernel::truncated_second(u))? };
    Ok(u * u * mu.trace_a() + jump + norm(&scaled_gamma(mu, u)?))
}

/// `sup_{|v| <= |u|} |γ^v|`; `|γ^v|` is even in `v`, so the search runs on
/// `[0, |u|]`: a log-spaced grid, then golden-section refinement around every
/// local maximum of the grid.
pub fn sup_gamma(mu: &Triplet, u: f64) -> Result<f64> {
    let u = u.abs();
    if u == 0.0 {
        return Ok(0.0);
    }
    let g = |v: f64| -> Result<f64> { Ok(norm(&scaled_gamma(mu, v)?)) };
    // universal grid 2^{k/8} below u, so larger u see a superset of points
    let mut pts = vec![0.0];
    let lo = u * 2f64.powi(-24);
    let mut k = (lo.log2() * 8.0).ceil() as i64;
    loop {
        let v = 2f64.powf(k as f64 / 8.0);
        if v >= u {
            break;
        }
        pts.push(v);
        k += 1;
    }
    pts.push(u);
    let vals: Vec<f64> = pts.iter().map(|&v| g(v)).collect::<Result<_>>()?;
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    for i in 1..pts.len() - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > 0.0 {
            best = best.max(golden_max(&g, pts[i - 1], pts[i + 1])?);
        }
    }
    Ok(best)
}

fn golden_max<G: Fn(f64) -> Result<f64>>(g: &G, mut a: f64, mut b: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    let mut best = f1.max(f2);
    for _ in 0..GOLDEN_STEPS {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1)?;
        }
        best = best.max(f1).max(f2);
        if b - a <= 1e-15 * b.abs() {
            break;
        }
    }
    Ok(best)
}

/// `φ` with `|γ^u|` replaced by `sup_{|v| <= |u|} |γ^v|`.
pub fn phi_tilde(mu: &Triplet, u: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    let jump = if mu.nu.is_zero() { 0.0 } else { mu.nu.integral_scalar(&RadialKernel::truncated_second(u))? };
    Ok(u * u * mu.trace_a() + jump + sup_gamma(mu, u)?)
}

/// The mean `γ + ∫ x|x|^2/(1+|x|^2) ν(dx)`, absent when `∫_{|x|>1}|x|ν = ∞`.
pub fn mean(mu: &Triplet) -> Result<Option<Vec<f64>>> {
    if mu.nu.is_zero() {
        return Ok(Some(mu.gamma.clone()));
    }
    let finite = match mu.nu.power_moment_finite(1.0) {
        Some(b) => b,
        None => mu.nu.integral_abs(&RadialKernel::above(1.0))?.is_finite(),
    };
    if !finite {
        return Ok(None);
    }
    let c = mu.nu.integral_vector(&RadialKernel::mean_correction())?;
    Ok(Some(mu.gamma.iter().zip(c).map(|(g, c)| g + c).collect()))
}

fn quad_over_support<H: Fn(f64) -> f64>(f: &IntegrandFn, t: f64, h: H) -> Result<f64> {
    let mut total = 0.0;
    for (l, r) in f.active_windows(0.0, t)? {
        let cuts = f.breakpoints(l, r)?;
        total += integrate_with_breaks(&h, l, r, &cuts, QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 20_000 })?.value;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::QuadratureFailure { a: 0.0, b: t, error: f64::INFINITY })
    }
}

/// `(A_t, ν_t, γ_t)` of `Y_t = ∫_0^t f(s) dX_s`.
pub fn integral_process_triplet(mu: &Triplet, f: &IntegrandFn, t: f64) -> Result<Triplet> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidIntegrand(format!("horizon {t} must be positive and finite")));
    }
    if f.is_zero() {
        return Ok(Triplet::zero(mu.dim));
    }
    let f2 = f.integral(Kind::Square, 0.0, t)?;
    let a_t = scaled_matrix(&mu.a, f2);
    let f1 = f.integral(Kind::Plain, 0.0, t)?;
    let mut gamma_t: Vec<f64> = mu.gamma.iter().map(|g| g * f1).collect();
    let nu_t = if mu.nu.is_zero() {
        LevyMeasure::FiniteAtomic(FiniteAtomic::zero(mu.dim))
    } else {
        for (j, gj) in gamma_t.iter_mut().enumerate() {
            *gj += quad_over_support(f, t, |s| {
                let u = f.eval(s);
                if u == 0.0 || u == 1.0 {
                    return 0.0;
                }
                mu.nu.integral_vector(&RadialKernel::scale_correction(u)).map_or(f64::NAN, |v| v[j])
            })?;
        }
        LevyMeasure::TimeIntegrated(TimeIntegrated::new(mu.nu.clone(), f.clone(), t)?)
    };
    Ok(Triplet { dim: mu.dim, a: a_t, nu: nu_t, gamma: gamma_t })
}

/// Jump part of `∫_0^T C_μ(f(s)z) ds` for `f = c/s` and atomic or block
/// measures, atom by atom in closed form; `None` when it does not apply.
fn inverse_jump_cumulant(nu: &LevyMeasure, f: &IntegrandFn, z: &[f64], t: f64, tol: f64) -> Result<Option<Complex64>> {
    let inverse = matches!(f.family, Family::InvS) || matches!(f.family, Family::PowerDecay { alpha } if alpha == 1.0);
    if !inverse || f.mask.is_some() {
        return Ok(None);
    }
    let c = f.coef;
    let log_t = t.max(1.0).ln();
    let center = nu.integral_vector(&RadialKernel::centering())?;
    let centering = Complex64::new(0.0, -c * dot(z, &center) * log_t);
    match nu {
        LevyMeasure::FiniteAtomic(m) => {
            let sum: Complex64 = m.atoms.iter().map(|a| a.mass * inverse_phase_integral(c * dot(z, &a.point), t)).sum();
            Ok(Some(sum + centering))
        }
        LevyMeasure::BlockE2(m) => {
            let table = signed_table();
            let k_max = m.truncation.map_or(TABLE_MAX - 1, |n| (n as usize).min(TABLE_MAX - 1));
            let beyond = match m.truncation {
                Some(n) if (n as usize) < TABLE_MAX => 0.0,
                _ => {
                    let head: f64 = (2..=k_max).map(|k| table[k].abs() / k as f64).sum();
                    let all = m.total_mass() / m.directions.total() - if m.tilde { tilde_mass() } else { 0.0 };
                    (all - head).max(0.0)
                }
            };
            let mut total = Complex64::new(0.0, 0.0);
            for d in &m.directions.0 {
                let a = c * m.scale * dot(z, &d.xi);
                if a == 0.0 {
                    continue;
                }
                // beyond the table e^{ib/s} averages out: |∫_1^t e^{ib/s} ds| <= 2t^2/|b|
                let k = k_max as f64;
                let err = 2.0 * t * t / (a.abs() * k) * beyond * d.lambda;
                if err > tol {
                    return Ok(None);
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (n, &w) in table.iter().enumerate().take(k_max + 1).skip(2) {
                    let nf = n as f64;
                    acc += (w.abs() / nf) * inverse_phase_integral(a * nf * w.signum(), t);
                }
                acc += Complex64::new(-(t.max(1.0) - 1.0) * beyond, 0.0);
                if m.tilde {
                    acc += tilde_mass() * inverse_phase_integral(2.0 * a, t);
                }
                total += d.lambda * acc;
            }
            Ok(Some(total + centering))
        }
        _ => Ok(None),
    }
}

/// `∫_0^T C_μ(f(s)z) ds`.
pub fn phi_cumulant(mu: &Triplet, f: &IntegrandFn, z: &[f64], t: f64) -> Result<Complex64> {
    phi_cumulant_tol(mu, f, z, t, CUMULANT_TOL)
}

pub fn phi_cumulant_tol(mu: &Triplet, f: &IntegrandFn, z: &[f64], t: f64, tol: f64) -> Result<Complex64> {
    if f.is_zero() || !(t > 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Gaussian and drift parts in closed form
    let gauss = -0.5 * mu.quad_form(z) * f.integral(Kind::Square, 0.0, t)?;
    let drift = dot(&mu.gamma, z) * f.integral(Kind::Plain, 0.0, t)?;
    if mu.nu.is_zero() {
        return Ok(Complex64::new(gauss, drift));
    }
    if let Some(j) = inverse_jump_cumulant(&mu.nu, f, z, t, tol)? {
        return Ok(Complex64::new(gauss, drift) + j);
    }
    let inner = tol / t.max(1.0);
    let jump = |s: f64| -> Complex64 {
        let u = f.eval(s);
        if u == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let uz: Vec<f64> = z.iter().map(|x| u * x).collect();
        mu.nu.cumulant_jump(&uz, inner).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    };
    let re = quad_over_support(f, t, |s| jump(s).re)?;
    let im = quad_over_support(f, t, |s| jump(s).im)?;
    Ok(Complex64::new(gauss + re, drift + im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(x: f64, w: f64) -> LevyMeasure {
        LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(x, w)]).unwrap())
    }

    #[test]
    fn inverse_closed_form_matches_quadrature() {
        let nu = LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(3.0, 0.5), (-1.5, 1.0)]).unwrap());
        let mu = Triplet::new(vec![vec![0.2]], nu, vec![0.1]).unwrap();
        let f = IntegrandFn::inv_s();
        // a full mask disables the closed form
        let g = f.apply_mask(&crate::integrand::MaskSet::from(0.0)).unwrap();
        for z in [0.4, 2.5] {
            let a = phi_cumulant(&mu, &f, &[z], 40.0).unwrap();
            let b = phi_cumulant(&mu, &g, &[z], 40.0).unwrap();
            assert!((a - b).norm() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn single_atom_phi() {
        let mu = Triplet::pure_jump(atom(2.0, 1.0), vec![0.0]).unwrap();
        let g = scaled_gamma(&mu, 0.25).unwrap()[0];
        assert!((g - 0.3).abs() < 1e-15);
        assert!((phi(&mu, 0.25).unwrap() - 0.55).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        assert!(Triplet::gaussian(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![0.0, 0.0]).is_err());
        assert!(Triplet::gaussian(vec![vec![1.0, 0.5], vec![0.4, 1.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn gaussian_integral_triplet() {
        let mu = Triplet::brownian(1.0, 0.0).unwrap();
        let f = IntegrandFn::exp_decay(1.0, 1.0).unwrap();
        let y = integral_process_triplet(&mu, &f, 40.0).unwrap();
        assert!((y.a[0][0] - 0.5 * (1.0 - (-80f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn time_integrated_cumulant_matches_phi_cumulant() {
        let mu = Triplet::pure_jump(
            LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(1.5, 0.7), (-3.0, 0.2)]).unwrap()),
            vec![0.3],
        )
        .unwrap();
        let f = IntegrandFn::inv_s();
        let y = integral_process_triplet(&mu, &f, 50.0).unwrap();
        let z = [0.9];
        let a = cumulant(&y, &z).unwrap().value;
        let b = phi_cumulant(&mu, &f, &z, 50.0).unwrap();
        assert!((a - b).norm() < 1e-7, "{a} vs {b}");
    }
}
