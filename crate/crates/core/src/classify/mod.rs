pub mod conditions;
pub mod drift;
pub mod rules;
pub mod signs;
pub mod suites;
pub mod verdict;

pub use drift::{DriftIntegrand, SignIntervals};
pub use verdict::{Class, ConditionId, Convergence, DomainVerdict, Evidence, Finiteness, Status};
pub use rules::{analytic_rule, fingerprint, RuleTruths, TailClass};
pub use signs::{build_defeating_mask, sign_set_mask, sign_sets, verify_t5a, DefeatingMask, T5aReport};

use crate::error::Result;
use crate::integrand::{IntegrandFn, Kind};
use crate::measure::norm;
use crate::triplet::Triplet;

use conditions::{
    affordable_checkpoints, cond_drift_absolute, cond_drift_convergence, cond_gaussian, cond_levy, judge_partials,
    MAX_CHECKPOINT_EXP,
};

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    /// Checkpoints are `a·2^k`, `k <= checkpoint_exp`.
    pub checkpoint_exp: i32,
    /// Evaluate the conditions numerically even when a closed-form rule decides.
    pub numeric_evidence: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { checkpoint_exp: MAX_CHECKPOINT_EXP, numeric_evidence: true }
    }
}

impl ClassifyOptions {
    /// Rules only, numerics as a fallback.
    pub fn light() -> Self {
        Self { numeric_evidence: false, ..Self::default() }
    }
}

fn and(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn or(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(true), _) | (_, Some(true)) => Some(true),
        (Some(false), Some(false)) => Some(false),
        _ => None,
    }
}

fn error_evidence(condition: ConditionId, e: &crate::Error) -> Evidence {
    Evidence::rule(condition, "Undetermined", format!("numerical evaluation failed: {e}"))
}

/// Least-squares `q` in `G(t_k) ≈ q F(t_k) + c`, `F(t) = ∫_0^t f`, per coordinate.
pub fn fit_compensator(f: &IntegrandFn, checkpoints: &[f64], partials: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    let fk: Vec<f64> = checkpoints.iter().map(|&t| f.integral(Kind::Plain, 0.0, t)).collect::<Result<_>>()?;
    let n = fk.len() as f64;
    if n < 2.0 {
        return Ok(None);
    }
    let mf = fk.iter().sum::<f64>() / n;
    let sxx: f64 = fk.iter().map(|x| (x - mf).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mf * mf) {
        return Ok(None);
    }
    let d = partials.first().map_or(0, |p| p.len());
    let q = (0..d)
        .map(|j| {
            let mg = partials.iter().map(|p| p[j]).sum::<f64>() / n;
            let sxy: f64 = fk.iter().zip(partials).map(|(x, p)| (x - mf) * (p[j] - mg)).sum();
            sxy / sxx
        })
        .collect();
    Ok(Some(q))
}

fn scalarize(d: usize, v: &[f64]) -> f64 {
    if d == 1 {
        v[0]
    } else {
        norm(v)
    }
}

pub fn classify(mu: &Triplet, f: &IntegrandFn) -> DomainVerdict {
    classify_with(mu, f, ClassifyOptions::default())
}

pub fn classify_with(mu: &Triplet, f: &IntegrandFn, opts: ClassifyOptions) -> DomainVerdict {
    let rule = analytic_rule(mu, f);
    let decided = rule.as_ref().is_some_and(|r| {
        [r.gaussian, r.levy, r.conv, r.abs].iter().all(Option::is_some) && or(r.conv, r.compensable).is_some()
    });
    let mut evidence = Vec::new();
    let mut numeric = RuleTruths {
        gaussian: None,
        levy: None,
        conv: None,
        abs: None,
        compensable: None,
        q: None,
        rule: String::new(),
    };
    if opts.numeric_evidence || !decided {
        let grid = affordable_checkpoints(mu, f, opts.checkpoint_exp);
        let horizon = grid.last().copied().unwrap_or(2.0);
        match cond_gaussian(mu, f, horizon) {
            Ok((v, x)) => {
                numeric.gaussian = v.as_bool();
                let mut e = Evidence::rule(ConditionId::Gaussian, format!("{v:?}"), "∫_0^T f(s)^2 ds · tr A with the closed-form tail of ∫f^2");
                e.partials = vec![(horizon, x)];
                if let Ok(tail) = f.integral(Kind::Square, horizon, f64::INFINITY) {
                    e.tail_bound = Some(mu.trace_a() * tail);
                }
                evidence.push(e);
            }
            Err(e) => evidence.push(error_evidence(ConditionId::Gaussian, &e)),
        }
        match cond_levy(mu, f, horizon) {
            Ok((v, x)) => {
                numeric.levy = v.as_bool();
                let mut e = Evidence::rule(ConditionId::Levy, format!("{v:?}"), "∫_0^T ds ∫(|f(s)x|^2 ∧ 1) ν(dx)");
                e.partials = vec![(horizon, x)];
                evidence.push(e);
            }
            Err(e) => evidence.push(error_evidence(ConditionId::Levy, &e)),
        }
        match cond_drift_convergence(mu, f, &grid) {
            Ok((v, partials)) => {
                numeric.conv = v.as_bool();
                let raw: Vec<Vec<f64>> = partials.iter().map(|p| p.1.clone()).collect();
                let mut e = Evidence::rule(ConditionId::DriftConvergence, format!("{v:?}"), "G(t) = ∫_a^t h(s) ds on the checkpoints t = a·2^k");
                e.partials = partials.iter().map(|(t, g)| (*t, scalarize(mu.dim, g))).collect();
                evidence.push(e);
                if numeric.conv != Some(true) {
                    if let Ok(Some(q)) = fit_compensator(f, &grid, &raw) {
                        let fk: Vec<f64> = grid.iter().map(|&t| f.integral(Kind::Plain, 0.0, t).unwrap_or(f64::NAN)).collect();
                        let shifted: Vec<Vec<f64>> = raw
                            .iter()
                            .zip(&fk)
                            .map(|(g, x)| g.iter().zip(&q).map(|(gi, qi)| gi - qi * x).collect())
                            .collect();
                        let c = judge_partials(&shifted);
                        numeric.compensable = if c == Convergence::Convergent { Some(true) } else { None };
                        numeric.q = Some(q.clone());
                        let mut e = Evidence::rule(
                            ConditionId::CompensatorQ,
                            format!("{c:?}"),
                            format!("least-squares fit G(t) ≈ q∫_0^t f + const, q = {q:?}, re-checked on the checkpoints"),
                        );
                        e.partials = grid.iter().copied().zip(shifted.iter().map(|g| scalarize(mu.dim, g))).collect();
                        evidence.push(e);
                    }
                }
            }
            Err(e) => evidence.push(error_evidence(ConditionId::DriftConvergence, &e)),
        }
        match cond_drift_absolute(mu, f, horizon) {
            Ok((v, x)) => {
                numeric.abs = v.as_bool();
                let mut e = Evidence::rule(ConditionId::DriftAbsolute, format!("{v:?}"), "∫_0^T |h(s)| ds");
                e.partials = vec![(horizon, x)];
                evidence.push(e);
            }
            Err(e) => evidence.push(error_evidence(ConditionId::DriftAbsolute, &e)),
        }
    }
    let truths = match &rule {
        Some(r) => {
            evidence.push(Evidence::rule(ConditionId::AnalyticRule, "applied", r.rule.clone()));
            RuleTruths {
                gaussian: r.gaussian.or(numeric.gaussian),
                levy: r.levy.or(numeric.levy),
                conv: r.conv.or(numeric.conv),
                abs: r.abs.or(numeric.abs),
                compensable: r.compensable.or(numeric.compensable),
                q: r.q.clone().or(numeric.q.clone()),
                rule: r.rule.clone(),
            }
        }
        None => numeric,
    };
    let de = truths.de();
    let d = and(de, truths.conv);
    let d0 = and(d, truths.abs);
    let dc = and(de, or(truths.conv, truths.compensable));
    let mut v = DomainVerdict::new(
        Status::from_bool(d0),
        Status::from_bool(d),
        Status::from_bool(dc),
        Status::from_bool(de),
        evidence,
    )
    .expect("three-valued conjunctions respect the inclusions");
    if dc == Some(true) {
        v.q = if truths.conv == Some(true) && d == Some(true) {
            Some(vec![0.0; mu.dim])
        } else {
            truths.q
        };
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterexample::{build_mu, default_directions};

    #[test]
    fn spec_examples() {
        use Status::*;
        let g = Triplet::brownian(1.0, 0.0).unwrap();
        let v = classify(&g, &IntegrandFn::exp_decay(1.0, 1.0).unwrap());
        assert_eq!(v.statuses(), [Member; 4]);

        let bd = Triplet::brownian(1.0, 0.7).unwrap();
        let v = classify(&bd, &IntegrandFn::inv_s());
        assert_eq!(v.statuses(), [NonMember, NonMember, Member, Member]);
        assert_eq!(v.q, Some(vec![0.7]));

        let mu = build_mu(default_directions(1), None).unwrap();
        let v = classify(&mu, &IntegrandFn::inv_s());
        assert_eq!((v.d, v.d0), (Member, NonMember));
    }
}
