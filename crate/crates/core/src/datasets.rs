//! Embedded reference data and seeded synthetic life-data generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::condition::{Condition, Unit};
use crate::error::{Error, Result};
use crate::fitml::{LifeRecord, Status};
use crate::formula::ModelSpec;
use crate::lifetime::Family;

/// Test-termination time for the GAB insulation test, thousand hours.
pub const GAB_CENSOR_TIME: f64 = 6.480;
pub const GAB_USE_VOLTSTRESS: f64 = 120.0;
pub const GAB_TIME_UNIT: &str = "thousand hours";

const GAB_FAILURES: [(f64, &[f64]); 5] = [
    (170.0, &[]),
    (190.0, &[3.248, 4.052, 5.304]),
    (200.0, &[1.759, 3.645, 3.706, 3.726, 3.990, 5.153, 6.368]),
    (210.0, &[1.401, 2.829, 2.941, 2.991, 3.311, 3.364, 3.474, 4.902, 5.639, 6.021, 6.456]),
    (
        220.0,
        &[0.401, 1.297, 1.342, 1.999, 2.075, 2.196, 2.885, 3.019, 3.550, 3.566, 3.610, 3.659, 3.687, 4.152, 5.572],
    ),
];
const GAB_UNITS_PER_LEVEL: usize = 15;

#[derive(Debug, Clone, Serialize)]
pub struct GabDataset {
    pub records: Vec<LifeRecord>,
    pub time_unit: &'static str,
    pub use_condition: Condition,
}

pub fn voltstress(v: f64) -> Condition {
    Condition::new().with("voltstress", v, Unit::Other("V_per_mm".into()))
}

/// Generator armature bar insulation voltage-endurance data: 15 electrodes
/// at each of five voltage-stress levels, censored at 6.480 thousand hours.
pub fn load_gab() -> GabDataset {
    let mut records = Vec::with_capacity(75);
    for (level, failures) in GAB_FAILURES {
        let c = voltstress(level);
        for &t in failures {
            records.push(LifeRecord { time: t, status: Status::Failed, condition: c.clone() });
        }
        for _ in failures.len()..GAB_UNITS_PER_LEVEL {
            records.push(LifeRecord { time: GAB_CENSOR_TIME, status: Status::Censored, condition: c.clone() });
        }
    }
    GabDataset { records, time_unit: GAB_TIME_UNIT, use_condition: voltstress(GAB_USE_VOLTSTRESS) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CensoringRule {
    None,
    /// Type-I censoring at a fixed time.
    TypeI(f64),
    /// Censor each condition at its model `1 - f` quantile, so the expected
    /// censored fraction is `f`.
    Fraction(f64),
}

#[derive(Debug, Clone)]
pub struct SyntheticGenerator {
    pub seed: u64,
    pub spec: ModelSpec,
    /// True parameters in [`ModelSpec::param_names`] order.
    pub params: Vec<f64>,
    /// Conditions and the number of units at each.
    pub design: Vec<(Condition, usize)>,
    pub censoring: CensoringRule,
}

impl SyntheticGenerator {
    fn location_scale(&self, c: &Condition) -> Result<(f64, f64)> {
        let (xmu, xsig) = self.spec.rows(c)?;
        let (beta, gamma) = self.params.split_at(xmu.len());
        let mu: f64 = xmu.iter().zip(beta).map(|(a, b)| a * b).sum();
        let sigma = xsig.iter().zip(gamma).map(|(a, b)| a * b).sum::<f64>().exp();
        Ok((mu, sigma))
    }

    fn validate(&self) -> Result<()> {
        if self.params.len() != self.spec.n_params() {
            return Err(Error::Config(format!(
                "`{}` needs {} parameters, got {}",
                self.spec,
                self.spec.n_params(),
                self.params.len()
            )));
        }
        match self.censoring {
            CensoringRule::TypeI(c) if !(c > 0.0 && c.is_finite()) => {
                Err(Error::Config(format!("censoring time must be positive, got {c}")))
            }
            CensoringRule::Fraction(f) if !(0.0..1.0).contains(&f) => {
                Err(Error::Config(format!("censoring fraction must lie in [0, 1), got {f}")))
            }
            _ => Ok(()),
        }
    }

    /// Model probability that a unit at `c` is observed to fail.
    pub fn failure_probability(&self, c: &Condition) -> Result<f64> {
        self.validate()?;
        let (mu, sigma) = self.location_scale(c)?;
        Ok(match self.censoring {
            CensoringRule::None => 1.0,
            CensoringRule::TypeI(ct) => self.spec.family.cdf((ct.ln() - mu) / sigma),
            CensoringRule::Fraction(f) => 1.0 - f,
        })
    }

    /// Draws the records; identical configuration gives identical output.
    pub fn generate(&self) -> Result<Vec<LifeRecord>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.design.iter().map(|(_, n)| n).sum());
        for (c, n) in &self.design {
            let (mu, sigma) = self.location_scale(c)?;
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::Config(format!("sigma at {c} is {sigma}")));
            }
            let censor_at = match self.censoring {
                CensoringRule::None => f64::INFINITY,
                CensoringRule::TypeI(t) => t,
                CensoringRule::Fraction(f) if f == 0.0 => f64::INFINITY,
                CensoringRule::Fraction(f) => (mu + sigma * self.spec.family.quantile(1.0 - f)).exp(),
            };
            for _ in 0..*n {
                let z = standard_draw(self.spec.family, &mut rng);
                let t = (mu + sigma * z).exp();
                let record = if t > censor_at {
                    LifeRecord::new(censor_at, Status::Censored, c.clone())?
                } else {
                    LifeRecord::new(t, Status::Failed, c.clone())?
                };
                out.push(record);
            }
        }
        Ok(out)
    }
}

/// Standard normal or standard smallest-extreme-value variate.
pub fn standard_draw<R: Rng>(family: Family, rng: &mut R) -> f64 {
    match family {
        Family::Lognormal => rng.sample(StandardNormal),
        Family::Weibull => {
            let u: f64 = rng.random();
            // 1 - u lies in (0, 1]
            (-(1.0 - u).ln()).ln()
        }
    }
}
