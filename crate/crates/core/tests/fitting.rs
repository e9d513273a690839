use acceltest::datasets::{load_gab, voltstress, CensoringRule, SyntheticGenerator};
use acceltest::fitml::{default_lambda_grid, fit_lambda_free, profile_lambda, quantile_at_use};
use acceltest::relationships::{eyring_af, ActivationEnergy, Temperature};
use acceltest::{fit_ml, Condition, Family, FitResult, LifeRecord, ModelSpec, Status, Unit};

fn arrhenius_data(seed: u64, family: Family, censoring: CensoringRule) -> (Vec<LifeRecord>, ModelSpec) {
    let spec = ModelSpec::parse(&format!("{family}: mu ~ arrh(temp)")).unwrap();
    let design = [80.0, 100.0, 120.0, 140.0].iter().map(|&t| (Condition::celsius(t), 40)).collect();
    // Ea = 0.7 eV, median life 1e4 h at 80 C
    let b0 = 1e4f64.ln() - 0.7 * 11605.0 / 353.15;
    let g = SyntheticGenerator { seed, spec: spec.clone(), params: vec![b0, 0.7, 0.5f64.ln()], design, censoring };
    (g.generate().unwrap(), spec)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn scaled(data: &[LifeRecord], c: f64) -> Vec<LifeRecord> {
    data.iter().map(|r| LifeRecord { time: r.time * c, ..r.clone() }).collect()
}

#[test]
fn time_units_shift_only_the_intercept() {
    for family in [Family::Lognormal, Family::Weibull] {
        let (data, spec) = arrhenius_data(11, family, CensoringRule::Fraction(0.3));
        let base = fit_ml(&data, &spec, None).unwrap();
        for c in [1.0 / 1000.0, 24.0, 8760.0] {
            let fit = fit_ml(&scaled(&data, c), &spec, None).unwrap();
            assert!(close(fit.estimates[0], base.estimates[0] + c.ln(), 1e-8), "{family} c={c}");
            assert!(close(fit.estimates[1], base.estimates[1], 1e-8));
            assert!(close(fit.estimates[2], base.estimates[2], 1e-8));
            let n_failed = data.iter().filter(|r| r.is_failed()).count() as f64;
            assert!(close(fit.loglik, base.loglik - n_failed * c.ln(), 1e-8));
        }
    }
}

#[test]
fn centering_a_covariate_leaves_quantiles_unchanged() {
    let gab = load_gab().records;
    let spec = ModelSpec::parse("lognormal: mu ~ v").unwrap();
    let center = 200.0;
    let shift = |records: &[LifeRecord], by: f64| -> Vec<LifeRecord> {
        records
            .iter()
            .map(|r| {
                let v = r.condition.get("voltstress").unwrap() - by;
                LifeRecord { condition: Condition::new().with("v", v, Unit::Unitless), ..r.clone() }
            })
            .collect()
    };
    let raw = fit_ml(&shift(&gab, 0.0), &spec, None).unwrap();
    let centered = fit_ml(&shift(&gab, center), &spec, None).unwrap();
    assert!(close(raw.estimates[1], centered.estimates[1], 1e-8));
    assert!(close(raw.estimates[2], centered.estimates[2], 1e-8));
    assert!(close(centered.estimates[0], raw.estimates[0] + center * raw.estimates[1], 1e-8));
    for v in [120.0, 170.0, 220.0] {
        let at = |c: f64| Condition::new().with("v", v - c, Unit::Unitless);
        let a = quantile_at_use(&raw, &at(0.0), 0.1).unwrap();
        let b = quantile_at_use(&centered, &at(center), 0.1).unwrap();
        assert!(((a.estimate - b.estimate) / a.estimate).abs() < 1e-8);
        assert!(((a.log_se - b.log_se) / a.log_se).abs() < 1e-6, "{} vs {}", a.log_se, b.log_se);
    }
}

fn fitted_survival(fit: &FitResult, t: f64, c: &Condition) -> f64 {
    let (xmu, xsig) = fit.model.rows(c).unwrap();
    let mu: f64 = xmu.iter().zip(fit.beta()).map(|(a, b)| a * b).sum();
    let sigma = xsig.iter().zip(fit.gamma()).map(|(a, b)| a * b).sum::<f64>().exp();
    fit.family.sf((t.ln() - mu) / sigma)
}

#[test]
fn failing_a_censored_unit_lowers_its_fitted_survival() {
    let spec = ModelSpec::parse("lognormal: mu ~ log(voltstress)").unwrap();
    let gab = load_gab().records;
    let before = fit_ml(&gab, &spec, None).unwrap();
    for level in [190.0, 200.0, 210.0] {
        let i = gab
            .iter()
            .position(|r| !r.is_failed() && r.condition.get("voltstress").unwrap() == level)
            .unwrap();
        let mut changed = gab.clone();
        changed[i].status = Status::Failed;
        let after = fit_ml(&changed, &spec, None).unwrap();
        let c = voltstress(level);
        let (s0, s1) = (fitted_survival(&before, gab[i].time, &c), fitted_survival(&after, gab[i].time, &c));
        assert!(s1 < s0, "level {level}: {s1} !< {s0}");
    }
}

fn boxcox_data() -> Vec<LifeRecord> {
    let spec = ModelSpec::parse("weibull: mu ~ log(x)").unwrap();
    let design = [1.0, 2.0, 3.0, 5.0, 8.0].iter().map(|&x| (Condition::new().with("x", x, Unit::Unitless), 60)).collect();
    SyntheticGenerator { seed: 5, spec, params: vec![5.0, -1.2, -0.7], design, censoring: CensoringRule::Fraction(0.2) }
        .generate()
        .unwrap()
}

#[test]
fn profile_maximum_matches_free_lambda_fit() {
    let data = boxcox_data();
    let spec = ModelSpec::parse("weibull: mu ~ boxcox(x)").unwrap();
    let use_c = Condition::new().with("x", 0.5, Unit::Unitless);
    let profile = profile_lambda(&data, &spec, &default_lambda_grid(), &use_c, 0.1).unwrap();
    assert_eq!(profile.len(), 31);
    assert!(profile.iter().all(|p| p.converged));
    let best = profile.iter().max_by(|a, b| a.loglik.total_cmp(&b.loglik)).unwrap();
    let (lambda, free) = fit_lambda_free(&data, &spec, -1.0, 2.0).unwrap();
    assert!(best.loglik <= free.loglik + 1e-9);
    assert!((lambda - best.lambda).abs() <= 0.1 + 1e-12);
    assert!(free.loglik - best.loglik < 0.05);
    // and the profile is the refitted likelihood at each fixed lambda
    let at = &profile[10];
    let fixed = fit_ml(&data, &spec.with_lambda(at.lambda).unwrap(), None).unwrap();
    assert!((fixed.loglik - at.loglik).abs() < 1e-9);
}

#[test]
fn profile_sweep_continues_past_failed_points() {
    // a single level leaves the boxcox slope unidentifiable at every lambda
    let data: Vec<LifeRecord> = boxcox_data().into_iter().filter(|r| r.condition.get("x").unwrap() == 2.0).collect();
    let spec = ModelSpec::parse("weibull: mu ~ boxcox(x)").unwrap();
    let use_c = Condition::new().with("x", 0.5, Unit::Unitless);
    let profile = profile_lambda(&data, &spec, &[-0.5, 0.0, 0.5], &use_c, 0.1).unwrap();
    assert_eq!(profile.len(), 3);
    assert!(profile.iter().all(|p| !p.converged && p.error.is_some()));
}

/// Fitted-Ea Eyring factors for assumed `m` on Arrhenius-generated data.
/// Eyring with known `m` is Arrhenius on `t * K^m`.
fn eyring_fitted_af(data: &[LifeRecord], m: f64, test: f64, use_temp: f64) -> f64 {
    let spec = ModelSpec::parse("lognormal: mu ~ arrh(temp)").unwrap();
    let adjusted: Vec<LifeRecord> = data
        .iter()
        .map(|r| {
            let k = r.condition.temperature("temp").unwrap().to_kelvin().unwrap();
            LifeRecord { time: r.time * k.powf(m), ..r.clone() }
        })
        .collect();
    let fit = fit_ml(&adjusted, &spec, None).unwrap();
    let ea = ActivationEnergy::ev(fit.estimates[1]).unwrap();
    eyring_af(Temperature::celsius(test), Temperature::celsius(use_temp), ea, m).unwrap().value()
}

#[test]
fn eyring_fitted_af_decreases_with_m() {
    for seed in [1, 2, 3] {
        let (data, _) = arrhenius_data(seed, Family::Lognormal, CensoringRule::Fraction(0.3));
        let afs: Vec<f64> = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0].iter().map(|&m| eyring_fitted_af(&data, m, 120.0, 40.0)).collect();
        assert!(afs.windows(2).all(|w| w[1] < w[0]), "seed {seed}: {afs:?}");
    }
}

#[test]
fn gab_weibull_fit_reports_too() {
    let gab = load_gab().records;
    let fit = fit_ml(&gab, &ModelSpec::parse("weibull: mu ~ log(voltstress)").unwrap(), None).unwrap();
    assert!(fit.converged);
    assert!(fit.grad_max_norm < 1e-5);
    assert!((-11.0..-8.0).contains(&fit.estimates[1]));
    assert!(fit.warnings.is_empty());
}
