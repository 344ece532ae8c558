//! Randomized checks of the monotonicity theorems and of the exponential
//! integrand equivalence, shared by the CLI and the test suites.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify_with, ClassifyOptions, DomainVerdict, Status};
use crate::counterexample::{build_mu, build_mu_tilde, default_directions};
use crate::error::Result;
use crate::integrand::{Family, IntegrandFn, MaskSet, Piece, PiecewiseTable};
use crate::measure::{AnalyticTail, Directions, FiniteAtomic, LevyMeasure, RadialProfile};
use crate::triplet::Triplet;

/// Largest tolerated share of draws with an undetermined relevant verdict.
pub const MAX_UNDETERMINED_SHARE: f64 = 0.10;
/// Horizon and grid density for confirming `|f2| <= |f1|`.
const DOMINATION_HORIZON: f64 = 1e6;
const DOMINATION_GRID: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct TheoremCheck {
    pub name: String,
    /// Draws where the premise held with determined verdicts.
    pub applicable: usize,
    /// Draws skipped because a verdict needed by the check was undetermined.
    pub undetermined: usize,
    pub violations: Vec<String>,
}

impl TheoremCheck {
    fn new(name: &str) -> Self {
        Self { name: name.into(), applicable: 0, undetermined: 0, violations: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// `premise ⇒ conclusion` over three-valued statuses.
    fn implication(&mut self, premise: Status, conclusion: Status, label: impl FnOnce() -> String) {
        match (premise, conclusion) {
            (Status::Member, Status::Member) => self.applicable += 1,
            (Status::Member, Status::NonMember) => {
                self.applicable += 1;
                self.violations.push(label());
            }
            (Status::Member, Status::Undetermined) | (Status::Undetermined, _) => self.undetermined += 1,
            (Status::NonMember, _) => {}
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub draws: usize,
    pub seed: u64,
    pub checks: Vec<TheoremCheck>,
    /// Draws with at least one undetermined class among the verdicts used.
    pub undetermined_draws: usize,
}

impl SuiteReport {
    pub fn undetermined_share(&self) -> f64 {
        if self.draws == 0 {
            0.0
        } else {
            self.undetermined_draws as f64 / self.draws as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(TheoremCheck::passed) && self.undetermined_share() < MAX_UNDETERMINED_SHARE
    }
}

fn atomic(atoms: &[(f64, f64)]) -> LevyMeasure {
    LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(atoms).expect("valid random atoms"))
}

fn sym(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// A random supported `μ` on the line, and whether its `ν` is symmetric.
pub fn random_triplet(rng: &mut ChaCha8Rng) -> Result<Triplet> {
    let gamma = if rng.random_bool(0.3) { 0.0 } else { sym(rng.random_range(-1.5..1.5)) };
    let a = if rng.random_bool(0.3) { sym(rng.random_range(0.1..2.0)) } else { 0.0 };
    let kind = rng.random_range(0..12);
    let nu = match kind {
        0..=2 => {
            let n = rng.random_range(1..=3);
            let atoms: Vec<(f64, f64)> = (0..n)
                .map(|_| {
                    let r = sym(rng.random_range(0.1..20.0));
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (sign * r, sym(rng.random_range(0.1..2.0)))
                })
                .collect();
            atomic(&atoms)
        }
        3 | 4 => {
            let n = rng.random_range(1..=2);
            let mut atoms = Vec::new();
            for _ in 0..n {
                let r = sym(rng.random_range(0.1..20.0));
                let w = sym(rng.random_range(0.1..2.0));
                atoms.extend([(r, w), (-r, w)]);
            }
            atomic(&atoms)
        }
        5 => LevyMeasure::zero(1),
        6 | 7 => {
            let alpha = *[0.5, 1.0, 1.5, 2.5].choose(rng).unwrap_or(&1.5);
            let profile = RadialProfile::Pareto { c: 1.0, alpha, r0: 1.0 };
            let dirs = if rng.random_bool(0.5) { Directions::symmetric_1d() } else { Directions::unit_1d() };
            LevyMeasure::AnalyticTail(AnalyticTail::new(dirs, profile)?)
        }
        8 => {
            let profile = RadialProfile::Exponential { c: 1.0, beta: sym(rng.random_range(0.5..3.0)) };
            let dirs = if rng.random_bool(0.5) { Directions::symmetric_1d() } else { Directions::unit_1d() };
            LevyMeasure::AnalyticTail(AnalyticTail::new(dirs, profile)?)
        }
        9 | 10 => {
            let p = *[1.5, 2.5, 3.5].choose(rng).unwrap_or(&2.5);
            let dirs = if rng.random_bool(0.5) { Directions::symmetric_1d() } else { Directions::unit_1d() };
            LevyMeasure::AnalyticTail(AnalyticTail::new(dirs, RadialProfile::LogAtoms { base: std::f64::consts::E, p })?)
        }
        _ => {
            return if rng.random_bool(0.5) { build_mu(default_directions(1), None) } else { build_mu_tilde(default_directions(1)) };
        }
    };
    Triplet::new(vec![vec![a]], nu, vec![gamma])
}

fn random_table(rng: &mut ChaCha8Rng, scale: f64) -> Result<PiecewiseTable> {
    let n = rng.random_range(1..=4);
    let mut cuts: Vec<f64> = (0..n).map(|_| sym(rng.random_range(0.0..10.0))).collect();
    cuts.push(0.0);
    cuts.push(10.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts
        .windows(2)
        .map(|w| Piece { l: w[0], r: w[1], coeffs: vec![sym(scale * rng.random_range(-1.0..1.0))] })
        .collect();
    PiecewiseTable::new(pieces)
}

fn random_mask(rng: &mut ChaCha8Rng) -> Result<MaskSet> {
    if rng.random_bool(0.5) {
        Ok(MaskSet::from(sym(rng.random_range(0.0..50.0))))
    } else {
        let l = sym(rng.random_range(0.0..20.0));
        MaskSet::from_intervals(vec![(l, l + sym(rng.random_range(0.5..30.0)))])
    }
}

/// A random pair with `|f2| <= |f1|`, confirmed by [`IntegrandFn::dominates`].
pub fn random_pair(rng: &mut ChaCha8Rng) -> Result<(IntegrandFn, IntegrandFn)> {
    loop {
        let k1 = sym(rng.random_range(0.5..2.0));
        let shrink = |rng: &mut ChaCha8Rng| sym(rng.random_range(-1.0..1.0)) * k1;
        let (f1, f2) = match rng.random_range(0..8) {
            0 => {
                let f1 = IntegrandFn::inv_s().scaled(k1);
                let f2 = if rng.random_bool(0.5) {
                    IntegrandFn::alternating_inv_s().scaled(if rng.random_bool(0.5) { k1 } else { shrink(rng) })
                } else {
                    IntegrandFn::inv_s().scaled(shrink(rng))
                };
                (f1, f2)
            }
            1 => {
                let a1 = *[0.5, 0.8, 1.0, 1.5, 2.0, 3.0].choose(rng).unwrap_or(&1.0);
                let a2 = [0.5, 0.8, 1.0, 1.5, 2.0, 3.0].iter().filter(|&&a| a <= a1).copied().collect::<Vec<f64>>().choose(rng).copied().unwrap_or(a1);
                (IntegrandFn::power_decay(a1)?.scaled(k1), IntegrandFn::power_decay(a2)?.scaled(shrink(rng)))
            }
            2 => {
                let alpha = *[0.5, 1.0, 2.0].choose(rng).unwrap_or(&1.0);
                let c1 = *[0.5, 1.0, 2.0].choose(rng).unwrap_or(&1.0);
                let c2 = c1 * sym(rng.random_range(1.0..3.0));
                (IntegrandFn::exp_decay(c1, alpha)?.scaled(k1), IntegrandFn::exp_decay(c2, alpha)?.scaled(shrink(rng)))
            }
            3 => {
                let f1 = IntegrandFn::constant(1.0).scaled(k1);
                let f2 = match rng.random_range(0..4) {
                    0 => IntegrandFn::inv_s(),
                    1 => IntegrandFn::alternating_inv_s(),
                    2 => IntegrandFn::exp_decay(1.0, 1.0)?,
                    _ => IntegrandFn::power_decay(1.5)?,
                };
                (f1, f2.scaled(shrink(rng)))
            }
            4 => {
                let t = random_table(rng, 2.0)?;
                let f1 = IntegrandFn::table(t.clone());
                let pieces = t.pieces.iter().map(|p| Piece { coeffs: vec![p.coeffs[0] * sym(rng.random_range(-1.0..1.0))], ..p.clone() }).collect();
                (f1, IntegrandFn::table(PiecewiseTable::new(pieces)?))
            }
            5 => {
                let f1 = IntegrandFn::inv_s().scaled(k1);
                (f1.clone(), f1.apply_mask(&random_mask(rng)?)?)
            }
            6 => {
                let f1 = IntegrandFn::power_decay(*[0.8, 1.5].choose(rng).unwrap_or(&1.5))?.scaled(k1);
                (f1.clone(), f1.apply_mask(&random_mask(rng)?)?.scaled(sym(rng.random_range(-1.0..1.0))))
            }
            _ => {
                let f1 = IntegrandFn::constant(1.0).scaled(k1);
                let f2 = IntegrandFn::exp_decay(0.5, 2.0)?.scaled(shrink(rng));
                (f1, f2.apply_mask(&random_mask(rng)?)?)
            }
        };
        if f1.dominates(&f2, 0.0, DOMINATION_HORIZON, DOMINATION_GRID) {
            return Ok((f1, f2));
        }
    }
}

/// Whether the classes `D` and `De` coincide for `f` whatever `μ` is.
fn d_equals_de(f: &IntegrandFn) -> bool {
    f.compactly_supported()
        || matches!(f.family, Family::ExpDecay { .. })
        || matches!(f.family, Family::PowerDecay { alpha } if alpha < 1.0)
}

fn any_undetermined(v: &DomainVerdict) -> bool {
    [v.d0, v.d, v.dc, v.de].contains(&Status::Undetermined)
}

/// Monotonicity under domination: De, D0, Dc and D for symmetric `ν`,
/// and the two sufficient conditions for D.
pub fn run_monotonicity(draws: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut de = TheoremCheck::new("De monotone under domination");
    let mut d0 = TheoremCheck::new("D0 monotone under domination");
    let mut dc_sym = TheoremCheck::new("Dc monotone for symmetric Levy measure");
    let mut d_sym = TheoremCheck::new("D monotone for symmetric Levy measure and zero location");
    let mut d_suff = TheoremCheck::new("D inherited when D = D0 for f1 or D = De for f2");
    let mut undetermined_draws = 0;
    let opts = ClassifyOptions::light();
    for i in 0..draws {
        let mu = random_triplet(&mut rng)?;
        let (f1, f2) = random_pair(&mut rng)?;
        let v1 = classify_with(&mu, &f1, opts);
        let v2 = classify_with(&mu, &f2, opts);
        if any_undetermined(&v1) || any_undetermined(&v2) {
            undetermined_draws += 1;
        }
        let label = |class: &str| format!("draw {i}: {class} fails for f1 = {f1}, f2 = {f2}, mu = {}", serde_json::to_string(&mu).unwrap_or_default());
        de.implication(v1.de, v2.de, || label("De"));
        d0.implication(v1.d0, v2.d0, || label("D0"));
        if mu.nu.is_symmetric() {
            dc_sym.implication(v1.dc, v2.dc, || label("Dc"));
            if mu.gamma.iter().all(|&g| g == 0.0) {
                d_sym.implication(v1.d, v2.d, || label("D"));
            }
        }
        if v1.d0 == Status::Member || (v1.d == Status::Member && d_equals_de(&f2)) {
            d_suff.implication(v1.d, v2.d, || label("D"));
        }
    }
    Ok(SuiteReport {
        suite: "monotonicity".into(),
        draws,
        seed,
        checks: vec![de, d0, dc_sym, d_sym, d_suff],
        undetermined_draws,
    })
}

/// A random measure for the exponential suite: finitely many atoms, or
/// atoms of mass `n^{-p}` at `e^n`, and the exponent test for
/// `∫ (log⁺|x|)^{1/α} ν(dx) < ∞` computed from the parameters.
pub fn random_log_moment_case(rng: &mut ChaCha8Rng, alpha: f64) -> Result<(Triplet, bool)> {
    let gamma = sym(rng.random_range(-1.0..1.0));
    if rng.random_bool(0.4) {
        let n = rng.random_range(1..=3);
        let atoms: Vec<(f64, f64)> = (0..n)
            .map(|_| (sym(rng.random_range(-50.0..50.0)).max(0.01), sym(rng.random_range(0.1..2.0))))
            .collect();
        return Ok((Triplet::new(vec![vec![0.0]], atomic(&atoms), vec![gamma])?, true));
    }
    let p = *[1.5, 2.0, 2.5, 3.0, 3.5, 4.0].choose(rng).unwrap_or(&3.0);
    let dirs = if rng.random_bool(0.5) { Directions::symmetric_1d() } else { Directions::unit_1d() };
    let nu = LevyMeasure::AnalyticTail(AnalyticTail::new(dirs, RadialProfile::LogAtoms { base: std::f64::consts::E, p })?);
    // Σ n^{-p} n^{1/α} < ∞ iff p - 1/α > 1
    Ok((Triplet::new(vec![vec![0.0]], nu, vec![gamma])?, p - 1.0 / alpha > 1.0))
}

/// For `f = e^{-c s^α}` the four classes coincide and are decided by the
/// logarithmic moment of order `1/α`.
pub fn run_log_moment(draws: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut same = TheoremCheck::new("four classes coincide for exponential integrands");
    let mut moment = TheoremCheck::new("membership equals the logarithmic moment test");
    let mut undetermined_draws = 0;
    for i in 0..draws {
        let c = *[0.5, 1.0, 2.0].choose(&mut rng).unwrap_or(&1.0);
        let alpha = *[0.5, 1.0, 2.0].choose(&mut rng).unwrap_or(&1.0);
        let (mu, expected) = random_log_moment_case(&mut rng, alpha)?;
        let f = IntegrandFn::exp_decay(c, alpha)?;
        let v = classify_with(&mu, &f, ClassifyOptions::light());
        if any_undetermined(&v) {
            undetermined_draws += 1;
            same.undetermined += 1;
            moment.undetermined += 1;
            continue;
        }
        let label = format!("draw {i}: f = {f}, mu = {}", serde_json::to_string(&mu).unwrap_or_default());
        same.applicable += 1;
        if !(v.d0 == v.d && v.d == v.dc && v.dc == v.de) {
            same.violations.push(format!("{label}: {:?} {:?} {:?} {:?}", v.d0, v.d, v.dc, v.de));
        }
        moment.applicable += 1;
        if (v.de == Status::Member) != expected {
            moment.violations.push(format!("{label}: De {:?}, moment finite {expected}", v.de));
        }
    }
    Ok(SuiteReport { suite: "log-moment".into(), draws, seed, checks: vec![same, moment], undetermined_draws })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let r = run_monotonicity(20, 3).unwrap();
        assert!(r.passed(), "{r:#?}");
        let r = run_log_moment(12, 3).unwrap();
        assert!(r.passed(), "{r:#?}");
    }
}
