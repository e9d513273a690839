use acceltest::datasets::{load_gab, CensoringRule, SyntheticGenerator};
use acceltest::io::{life_csv_string, read_life_csv};
use acceltest::{Condition, ModelSpec};
use sha2::{Digest, Sha256};

const GAB_CSV_SHA256: &str = "cfac521b6ad9473185e2bd5d66b341008e57ea788a5d8cea3d428c1e25b46eb6";

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn gab_content_is_pinned() {
    let csv = life_csv_string(&load_gab().records).unwrap();
    assert_eq!(hex(&Sha256::digest(csv.as_bytes())), GAB_CSV_SHA256);
}

#[test]
fn gab_csv_round_trips() {
    let gab = load_gab();
    let csv = life_csv_string(&gab.records).unwrap();
    assert!(csv.starts_with("time,status,voltstress_V_per_mm\n"));
    assert_eq!(read_life_csv(csv.as_bytes()).unwrap(), gab.records);
    assert_eq!(gab.time_unit, "thousand hours");
    assert_eq!(gab.use_condition.get("voltstress").unwrap(), 120.0);
}

fn generator(seed: u64, censoring: CensoringRule, n: usize) -> SyntheticGenerator {
    let spec = ModelSpec::parse("weibull: mu ~ arrh(temp)").unwrap();
    let design = [50.0, 70.0, 90.0].iter().map(|&t| (Condition::celsius(t), n)).collect();
    SyntheticGenerator { seed, spec, params: vec![-15.0, 0.75, -0.4], design, censoring }
}

#[test]
fn failure_fractions_match_the_model() {
    let n = 10_000;
    let g = generator(77, CensoringRule::TypeI(20_000.0), n);
    let records = g.generate().unwrap();
    for (c, _) in &g.design {
        let p = g.failure_probability(c).unwrap();
        let observed =
            records.iter().filter(|r| &r.condition == c && r.is_failed()).count() as f64 / n as f64;
        let bound = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((observed - p).abs() <= bound, "{c}: {observed} vs {p} (bound {bound})");
        assert!(p > 0.01 && p < 0.99, "level {c} is uninformative: {p}");
    }
}

#[test]
fn fraction_censoring_hits_its_target() {
    let n = 10_000;
    let g = generator(78, CensoringRule::Fraction(0.3), n);
    let records = g.generate().unwrap();
    for (c, _) in &g.design {
        let censored = records.iter().filter(|r| &r.condition == c && !r.is_failed()).count() as f64 / n as f64;
        assert!((censored - 0.3).abs() <= 3.0 * (0.21f64 / n as f64).sqrt());
    }
}

#[test]
fn generation_is_deterministic_across_runs_and_pools() {
    let g = generator(5, CensoringRule::Fraction(0.3), 200);
    let first = g.generate().unwrap();
    let pool = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let one = pool(1).install(|| g.generate().unwrap());
    let many = pool(4).install(|| g.generate().unwrap());
    assert_eq!(first, one);
    assert_eq!(first, many);
    assert_ne!(first, generator(6, CensoringRule::Fraction(0.3), 200).generate().unwrap());
}
