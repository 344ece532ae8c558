use levy_domains::counterexample::{build_mu_tilde, default_directions, e2_measure};
use levy_domains::integrand::IntegrandFn;
use levy_domains::measure::{FiniteAtomic, LevyMeasure, RadialKernel};
use levy_domains::simulate::{monte_carlo, simulate_samples, MonteCarloConfig};
use levy_domains::triplet::Triplet;

#[test]
fn martingale_meta_trials() {
    let mu = build_mu_tilde(default_directions(1)).unwrap();
    let f = IntegrandFn::inv_s();
    let trials = 100;
    let mut good = 0;
    for trial in 0..trials {
        let cfg = MonteCarloConfig::exact(400, 1000 + trial, vec![10.0, 100.0]);
        let rep = monte_carlo(&mu, &f, &cfg).unwrap();
        if rep.rows.iter().all(|r| r.mean.abs() <= 4.0 * r.stderr) {
            good += 1;
        }
    }
    assert!(good >= 99, "{good} of {trials} trials inside 4 stderr");
}

fn increments(samples: &[levy_domains::simulate::IntegralSample], k: usize) -> Vec<f64> {
    let mut d: Vec<f64> = samples.iter().map(|s| s.values[k][0] - s.values[k - 1][0]).collect();
    d.sort_by(f64::total_cmp);
    d
}

#[test]
fn increment_variance_matches() {
    let nu = LevyMeasure::FiniteAtomic(FiniteAtomic::scalar(&[(1.5, 1.0), (-0.5, 2.0)]).unwrap());
    let mu = Triplet::pure_jump(nu, vec![0.0]).unwrap();
    let cps: Vec<f64> = (3..=8).map(|k| 2f64.powi(k)).collect();
    let samples = simulate_samples(&mu, &IntegrandFn::inv_s(), &MonteCarloConfig::exact(4000, 17, cps.clone())).unwrap();
    // Var(Y_t - Y_{t/2}) = ∫_{t/2}^t s^{-2} ds ∫ x^2 ν(dx) = 2.75 / t
    for k in 1..cps.len() {
        let d = increments(&samples, k);
        let m = d.iter().sum::<f64>() / d.len() as f64;
        let v = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (d.len() - 1) as f64;
        let exact = 2.75 / cps[k];
        assert!((v / exact - 1.0).abs() < 0.15, "t = {}: {v} vs {exact}", cps[k]);
    }
}

#[test]
fn increments_concentrate() {
    let mu = build_mu_tilde(default_directions(1)).unwrap();
    let cps: Vec<f64> = (3..=11).map(|k| 2f64.powi(k)).collect();
    let samples = simulate_samples(&mu, &IntegrandFn::inv_s(), &MonteCarloConfig::exact(4000, 17, cps.clone())).unwrap();
    let iqr = |k: usize| {
        let d = increments(&samples, k);
        d[3 * d.len() / 4] - d[d.len() / 4]
    };
    let (first, last) = (iqr(1), iqr(cps.len() - 1));
    assert!(last < 0.5 * first, "{first} -> {last}");
}

#[test]
fn truncation_is_reported() {
    let LevyMeasure::BlockE2(mut m) = e2_measure(default_directions(1), true).unwrap() else { unreachable!() };
    let full = LevyMeasure::BlockE2(m.clone()).integral_scalar(&RadialKernel::constant(1.0)).unwrap();
    m.truncation = Some(5000);
    let nu = LevyMeasure::BlockE2(m);
    let cut = nu.integral_scalar(&RadialKernel::constant(1.0)).unwrap();
    let mu = Triplet::new(vec![vec![0.0]], nu, vec![0.0]).unwrap();
    let rep = monte_carlo(&mu, &IntegrandFn::inv_s(), &MonteCarloConfig::exact(10, 1, vec![5.0])).unwrap();
    assert!(rep.truncation_bound > 0.0);
    assert!(full - cut <= rep.truncation_bound * (1.0 + 1e-9), "{} > {}", full - cut, rep.truncation_bound);
}
