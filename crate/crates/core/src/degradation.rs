//! Degradation-path models, crossing times and pseudo failure times.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{domain, ensure_positive, Error, Result};
use crate::fitml::{LifeRecord, Status};
use crate::lifetime::LifeDistribution;
use crate::relationships::AccelerationFactor;

/// First-order kinetics path `D(t) = D_inf (1 - exp(-R_U AF t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderPathParams {
    pub d_inf: f64,
    pub rate_u: f64,
    pub af: AccelerationFactor,
}

impl FirstOrderPathParams {
    pub fn new(d_inf: f64, rate_u: f64, af: AccelerationFactor) -> Result<Self> {
        if !(d_inf.is_finite() && d_inf != 0.0) {
            return Err(domain(format!("D_inf must be finite and nonzero, got {d_inf}")));
        }
        ensure_positive(rate_u, "R_U")?;
        Ok(Self { d_inf, rate_u, af })
    }

    fn rate(&self) -> f64 {
        self.rate_u * self.af.value()
    }
}

pub fn first_order_path(t: f64, p: &FirstOrderPathParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(-p.d_inf * (-p.rate() * t).exp_m1())
}

/// Failure threshold `D_f`; failure occurs when the path reaches it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureThreshold {
    pub d_f: f64,
}

/// `T(temp) = -log(1 - D_f / D_inf) / (R_U AF)`.
pub fn crossing_time(p: &FirstOrderPathParams, th: FailureThreshold) -> Result<f64> {
    let ratio = th.d_f / p.d_inf;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::NoCrossing(ratio));
    }
    Ok(-(-ratio).ln_1p() / p.rate())
}

/// Lifetime distribution at the path's condition when unit-to-unit
/// variability enters through a lognormal `R_U` with median `rate_median`.
pub fn first_order_lifetime_distribution(
    d_inf: f64,
    th: FailureThreshold,
    rate_median: f64,
    rate_sigma: f64,
    af: AccelerationFactor,
) -> Result<LifeDistribution> {
    let p = FirstOrderPathParams::new(d_inf, rate_median, af)?;
    let t_median = crossing_time(&p, th)?;
    LifeDistribution::lognormal(t_median.ln(), rate_sigma)
}

/// Two independent first-order reactions with separate acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelPathParams {
    pub first: FirstOrderPathParams,
    /// `None` is equivalent to `D_2inf = 0`.
    pub second: Option<FirstOrderPathParams>,
}

pub fn parallel_path(t: f64, p: &ParallelPathParams) -> Result<f64> {
    let d1 = first_order_path(t, &p.first)?;
    let d2 = match &p.second {
        Some(s) => first_order_path(t, s)?,
        None => 0.0,
    };
    Ok(d1 + d2)
}

fn parallel_slope(t: f64, p: &ParallelPathParams) -> f64 {
    let term = |q: &FirstOrderPathParams| q.d_inf * q.rate() * (-q.rate() * t).exp();
    term(&p.first) + p.second.as_ref().map(term).unwrap_or(0.0)
}

/// Crossing time of the parallel path by bracketed bisection (to
/// `1e-10` of the bracket width) followed by Newton refinement.
pub fn parallel_crossing_time(p: &ParallelPathParams, th: FailureThreshold) -> Result<f64> {
    let d2 = p.second.map(|s| s.d_inf).unwrap_or(0.0);
    if d2 != 0.0 && d2.signum() != p.first.d_inf.signum() {
        return Err(Error::Config("parallel reactions must move the path in the same direction".into()));
    }
    let total = p.first.d_inf + d2;
    let ratio = th.d_f / total;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::NoCrossing(ratio));
    }
    let g = |t: f64| (parallel_path(t, p).unwrap_or(f64::NAN) - th.d_f) * total.signum();
    let mut hi = 1.0 / p.first.rate().max(p.second.map(|s| s.rate()).unwrap_or(0.0));
    while g(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoCrossing(ratio));
        }
    }
    let mut lo = 0.0;
    let tol = 1e-10 * hi;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = g(t) * total.signum() / parallel_slope(t, p);
        let next = t - step;
        if !(next > lo - tol && next < hi + tol) {
            break;
        }
        t = next;
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum DielectricPathParams {
    /// `D(t) = delta0 t^(1/beta1)`.
    Simple { delta0: f64, beta1: f64 },
    /// `D(t) = delta0 [R(volt) t]^(1/gamma1)`, `R(volt) = gamma0 volt^gamma2`.
    RateExtended { delta0: f64, gamma0: f64, gamma1: f64, gamma2: f64 },
}

impl DielectricPathParams {
    /// Equivalent inverse-power exponent.
    pub fn beta1(&self) -> f64 {
        match *self {
            DielectricPathParams::Simple { beta1, .. } => beta1,
            DielectricPathParams::RateExtended { gamma1, gamma2, .. } => gamma1 - gamma2,
        }
    }

    /// Time at which the strength path falls to `volt`.
    pub fn failure_time(&self, volt: f64) -> Result<f64> {
        ensure_positive(volt, "volt")?;
        match *self {
            DielectricPathParams::Simple { delta0, beta1 } => {
                ensure_positive(delta0, "delta0")?;
                Ok((volt / delta0).powf(beta1))
            }
            DielectricPathParams::RateExtended { delta0, gamma0, gamma1, gamma2 } => {
                ensure_positive(delta0, "delta0")?;
                ensure_positive(gamma0, "gamma0")?;
                let rate = gamma0 * (gamma2 * volt.ln()).exp();
                Ok((volt / delta0).powf(gamma1) / rate)
            }
        }
    }

    pub fn strength(&self, t: f64) -> Result<f64> {
        ensure_positive(t, "time")?;
        match *self {
            DielectricPathParams::Simple { delta0, beta1 } => Ok(delta0 * t.powf(1.0 / beta1)),
            DielectricPathParams::RateExtended { .. } => {
                Err(domain("strength of the rate-extended path depends on volt; use strength_at"))
            }
        }
    }

    pub fn strength_at(&self, t: f64, volt: f64) -> Result<f64> {
        match *self {
            DielectricPathParams::Simple { .. } => self.strength(t),
            DielectricPathParams::RateExtended { delta0, gamma0, gamma1, gamma2 } => {
                ensure_positive(t, "time")?;
                ensure_positive(volt, "volt")?;
                let rate = gamma0 * (gamma2 * volt.ln()).exp();
                Ok(delta0 * (rate * t).powf(1.0 / gamma1))
            }
        }
    }
}

/// Failure time at `volt` and the acceleration factor relative to `volt_u`.
pub fn dielectric_failure_time(volt: f64, volt_u: f64, p: &DielectricPathParams) -> Result<(f64, AccelerationFactor)> {
    let t = p.failure_time(volt)?;
    let t_u = p.failure_time(volt_u)?;
    let af = AccelerationFactor::new(t_u / t)?;
    Ok((t, af))
}

/// One unit's degradation measurements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradationSample {
    pub unit_id: String,
    pub times: Vec<f64>,
    pub responses: Vec<f64>,
    pub condition: Condition,
}

impl DegradationSample {
    pub fn new(unit_id: impl Into<String>, points: Vec<(f64, f64)>, condition: Condition) -> Result<Self> {
        let unit_id = unit_id.into();
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::Data(format!("times for unit `{unit_id}` are not strictly increasing")));
        }
        if points.iter().any(|(t, y)| !t.is_finite() || *t < 0.0 || !y.is_finite()) {
            return Err(Error::Data(format!("unit `{unit_id}` has a negative or non-finite measurement")));
        }
        let (times, responses) = points.into_iter().unzip();
        Ok(Self { unit_id, times, responses, condition })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScale {
    Identity,
    Sqrt,
}

impl TimeScale {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" | "linear" => Ok(TimeScale::Identity),
            "sqrt" => Ok(TimeScale::Sqrt),
            other => Err(Error::Config(format!("unknown time scale `{other}` (identity, sqrt)"))),
        }
    }

    fn forward(self, t: f64) -> f64 {
        match self {
            TimeScale::Identity => t,
            TimeScale::Sqrt => t.sqrt(),
        }
    }

    fn inverse(self, s: f64) -> f64 {
        match self {
            TimeScale::Identity => s,
            TimeScale::Sqrt => s * s,
        }
    }
}

/// Where records whose fitted line does not reach the threshold in time
/// are censored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Each unit's last measurement time.
    LastObserved,
    Fixed(f64),
    /// Any future crossing counts; non-crossing units are censored at their
    /// last measurement time.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoConfig {
    pub threshold: f64,
    pub time_scale: TimeScale,
    pub horizon: Horizon,
}

impl PseudoConfig {
    pub fn new(threshold: f64, time_scale: TimeScale) -> Self {
        Self { threshold, time_scale, horizon: Horizon::LastObserved }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoFailure {
    pub unit_id: String,
    pub record: LifeRecord,
    pub intercept: f64,
    pub slope: f64,
    /// Crossing of the fitted line, when it moves toward the threshold.
    pub crossing: Option<f64>,
}

fn pseudo_one(s: &DegradationSample, cfg: &PseudoConfig) -> Result<PseudoFailure> {
    let n = s.times.len();
    if n < 2 {
        return Err(Error::IllPosedFit(format!("unit `{}` has fewer than two measurements", s.unit_id)));
    }
    let xs: Vec<f64> = s.times.iter().map(|&t| cfg.time_scale.forward(t)).collect();
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = s.responses.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::IllPosedFit(format!("unit `{}` has constant measurement times", s.unit_id)));
    }
    let sxy: f64 = xs.iter().zip(&s.responses).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let decreasing = s.responses[0] > cfg.threshold;
    let toward = if decreasing { slope < 0.0 } else { slope > 0.0 };
    let crossing = if toward {
        let x_star = (cfg.threshold - intercept) / slope;
        if x_star <= 0.0 {
            return Err(Error::IllPosedFit(format!(
                "fitted line for unit `{}` is already past the threshold at time 0",
                s.unit_id
            )));
        }
        Some(cfg.time_scale.inverse(x_star))
    } else {
        None
    };
    let last = *s.times.last().unwrap();
    let horizon = match cfg.horizon {
        Horizon::LastObserved => last,
        Horizon::Fixed(h) => h,
        Horizon::Unbounded => f64::INFINITY,
    };
    let (time, status) = match crossing {
        Some(t) if t <= horizon => (t, Status::Failed),
        _ if horizon.is_finite() => (horizon, Status::Censored),
        _ => (last, Status::Censored),
    };
    let record = LifeRecord::new(time, status, s.condition.clone())?;
    Ok(PseudoFailure { unit_id: s.unit_id.clone(), record, intercept, slope, crossing })
}

/// Least-squares line per unit on the configured time scale; the pseudo
/// failure time is where the line meets the threshold. Output order matches
/// input order.
pub fn pseudo_failure_times(samples: &[DegradationSample], cfg: &PseudoConfig) -> Result<Vec<PseudoFailure>> {
    if !cfg.threshold.is_finite() {
        return Err(Error::Config("threshold must be finite".into()));
    }
    if let Horizon::Fixed(h) = cfg.horizon {
        ensure_positive(h, "horizon")?;
    }
    samples.par_iter().map(|s| pseudo_one(s, cfg)).collect()
}
