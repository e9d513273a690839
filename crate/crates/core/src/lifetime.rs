//! Log-location-scale lifetime distributions and time transformations.
//!
//! Both families are handled on the log scale: `z = (log t - mu) / sigma`
//! follows a standard normal (lognormal) or a standard smallest extreme
//! value distribution (Weibull, with shape `1/sigma` and scale `exp(mu)`).

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::condition::Condition;
use crate::error::{domain, ensure_positive, Error, Result};
use crate::relationships::{AccelerationFactor, AccelerationModel};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard normal cdf.
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// `log(1 - Phi(z))`, accurate far into the upper tail.
pub fn norm_log_sf(z: f64) -> f64 {
    if z < 30.0 {
        (0.5 * erfc(z / SQRT_2)).ln()
    } else {
        // Mills-ratio asymptotic series
        let z2 = z * z;
        let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
        -0.5 * z2 - LN_SQRT_2PI - z.ln() + series.ln()
    }
}

/// Normal hazard `phi(z) / (1 - Phi(z))`.
pub fn norm_hazard(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI - norm_log_sf(z)).exp()
}

/// Inverse standard normal cdf.
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley step against the erfc-based cdf.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -norm_quantile_lower(1.0 - p);
    }
    norm_quantile_lower(p)
}

fn norm_quantile_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley refinement
    let e = 0.5 * erfc(-x / SQRT_2) - p;
    let u = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lognormal,
    Weibull,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lognormal" | "lognor" => Ok(Family::Lognormal),
            "weibull" => Ok(Family::Weibull),
            other => Err(Error::Formula(format!("unknown distribution family `{other}`"))),
        }
    }

    /// Standard cdf of the log-scale location-scale variable.
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            Family::Lognormal => norm_cdf(z),
            Family::Weibull => -(-z.exp()).exp_m1(),
        }
    }

    pub fn sf(self, z: f64) -> f64 {
        match self {
            Family::Lognormal => norm_cdf(-z),
            Family::Weibull => (-z.exp()).exp(),
        }
    }

    pub fn log_sf(self, z: f64) -> f64 {
        match self {
            Family::Lognormal => norm_log_sf(z),
            Family::Weibull => -z.exp(),
        }
    }

    pub fn log_pdf(self, z: f64) -> f64 {
        match self {
            Family::Lognormal => -0.5 * z * z - LN_SQRT_2PI,
            Family::Weibull => z - z.exp(),
        }
    }

    pub fn pdf(self, z: f64) -> f64 {
        self.log_pdf(z).exp()
    }

    /// `d(-log pdf)/dz`.
    pub(crate) fn score_pdf(self, z: f64) -> f64 {
        match self {
            Family::Lognormal => z,
            Family::Weibull => z.exp() - 1.0,
        }
    }

    /// `d(-log sf)/dz`, the standardized hazard.
    pub(crate) fn hazard(self, z: f64) -> f64 {
        match self {
            Family::Lognormal => norm_hazard(z),
            Family::Weibull => z.exp(),
        }
    }

    /// Standard quantile `Phi^{-1}(p)`.
    pub fn quantile(self, p: f64) -> f64 {
        match self {
            Family::Lognormal => norm_quantile(p),
            Family::Weibull => (-(-p).ln_1p()).ln(),
        }
    }

    /// Standard quantile expressed through the log survival probability.
    pub fn quantile_from_log_sf(self, log_sf: f64) -> f64 {
        match self {
            Family::Lognormal => -norm_quantile(log_sf.exp()),
            Family::Weibull => (-log_sf).ln(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Lognormal => "lognormal",
            Family::Weibull => "weibull",
        })
    }
}

fn check_probability(p: f64) -> Result<f64> {
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

/// Log-location-scale lifetime distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifeDistribution {
    pub family: Family,
    pub mu: f64,
    pub sigma: f64,
}

impl LifeDistribution {
    pub fn new(family: Family, mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(domain("mu must be finite"));
        }
        ensure_positive(sigma, "sigma")?;
        Ok(Self { family, mu, sigma })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(Family::Lognormal, mu, sigma)
    }

    /// Weibull with shape `beta` and scale `eta`.
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        ensure_positive(shape, "Weibull shape")?;
        ensure_positive(scale, "Weibull scale")?;
        Self::new(Family::Weibull, scale.ln(), 1.0 / shape)
    }

    pub fn weibull_shape(&self) -> f64 {
        1.0 / self.sigma
    }

    pub fn weibull_scale(&self) -> f64 {
        self.mu.exp()
    }

    fn z(&self, t: f64) -> Result<f64> {
        ensure_positive(t, "time")?;
        Ok((t.ln() - self.mu) / self.sigma)
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        Ok(self.family.cdf(self.z(t)?))
    }

    pub fn sf(&self, t: f64) -> Result<f64> {
        Ok(self.family.sf(self.z(t)?))
    }

    pub fn log_sf(&self, t: f64) -> Result<f64> {
        Ok(self.family.log_sf(self.z(t)?))
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        let z = self.z(t)?;
        Ok(self.family.pdf(z) / (self.sigma * t))
    }

    pub fn hazard(&self, t: f64) -> Result<f64> {
        let z = self.z(t)?;
        Ok(self.family.hazard(z) / (self.sigma * t))
    }

    /// `exp(mu + Phi^{-1}(p) sigma)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok((self.mu + self.family.quantile(p) * self.sigma).exp())
    }

    /// Same location and scale family, with location shifted by `-log AF`.
    pub fn accelerated(&self, af: AccelerationFactor) -> Self {
        Self { mu: self.mu - af.ln(), ..*self }
    }
}

/// Free-function forms used by the acceptance suite and CLI.
pub fn cdf(d: &LifeDistribution, t: f64) -> Result<f64> {
    d.cdf(t)
}

pub fn quantile(d: &LifeDistribution, p: f64) -> Result<f64> {
    d.quantile(p)
}

/// SAFT quantile scaling `t_p(x) = t_p(x_U) / AF(x)`.
pub fn saft_quantile(t_p_use: f64, af: AccelerationFactor) -> f64 {
    t_p_use / af.value()
}

/// Scale-accelerated failure-time model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaftModel {
    pub base: LifeDistribution,
    pub af_model: AccelerationModel,
    pub use_condition: Condition,
}

impl SaftModel {
    pub fn new(base: LifeDistribution, af_model: AccelerationModel, use_condition: Condition) -> Self {
        Self { base, af_model, use_condition }
    }

    pub fn af(&self, x: &Condition) -> Result<AccelerationFactor> {
        self.af_model.af(x, &self.use_condition)
    }

    pub fn distribution_at(&self, x: &Condition) -> Result<LifeDistribution> {
        Ok(self.base.accelerated(self.af(x)?))
    }
}

pub fn saft_distribution_at(m: &SaftModel, x: &Condition) -> Result<LifeDistribution> {
    m.distribution_at(x)
}

/// PH time transformation `F^{-1}(1 - {1 - F(t)}^{1/psi})`.
///
/// Evaluated through the log survival function so that the Weibull case
/// reduces to `t / psi^{1/beta}` without cancellation.
pub fn ph_transform(f_use: &LifeDistribution, psi: f64, t_use: f64) -> Result<f64> {
    ensure_positive(psi, "psi")?;
    let log_sf = f_use.log_sf(t_use)?;
    let z = f_use.family.quantile_from_log_sf(log_sf / psi);
    Ok((f_use.mu + f_use.sigma * z).exp())
}

type CondFn = Box<dyn Fn(&Condition) -> Result<f64> + Send + Sync>;

/// Proportional-hazards model: `h(t; x) = psi(x) h(t; x_U)`.
pub struct PhModel {
    pub base: LifeDistribution,
    psi: CondFn,
    pub use_condition: Condition,
}

impl PhModel {
    /// Fails unless `psi(x_U) = 1`.
    pub fn new(
        base: LifeDistribution,
        psi: impl Fn(&Condition) -> Result<f64> + Send + Sync + 'static,
        use_condition: Condition,
    ) -> Result<Self> {
        let at_use = psi(&use_condition)?;
        if (at_use - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("psi(x_U) must equal 1, got {at_use}")));
        }
        Ok(Self { base, psi: Box::new(psi), use_condition })
    }

    pub fn psi(&self, x: &Condition) -> Result<f64> {
        ensure_positive((self.psi)(x)?, "psi")
    }

    pub fn sf(&self, t: f64, x: &Condition) -> Result<f64> {
        Ok((self.psi(x)? * self.base.log_sf(t)?).exp())
    }

    pub fn cdf(&self, t: f64, x: &Condition) -> Result<f64> {
        Ok(-(self.psi(x)? * self.base.log_sf(t)?).exp_m1())
    }

    pub fn hazard(&self, t: f64, x: &Condition) -> Result<f64> {
        Ok(self.psi(x)? * self.base.hazard(t)?)
    }

    /// Maps a use-condition time to the corresponding time at `x`.
    pub fn transform(&self, t_use: f64, x: &Condition) -> Result<f64> {
        ph_transform(&self.base, self.psi(x)?, t_use)
    }
}

/// Model where both `mu` and `log sigma` depend on the condition.
pub struct VaryingSigmaModel {
    pub family: Family,
    mu: CondFn,
    log_sigma: CondFn,
}

impl VaryingSigmaModel {
    pub fn new(
        family: Family,
        mu: impl Fn(&Condition) -> Result<f64> + Send + Sync + 'static,
        log_sigma: impl Fn(&Condition) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { family, mu: Box::new(mu), log_sigma: Box::new(log_sigma) }
    }

    pub fn mu(&self, x: &Condition) -> Result<f64> {
        (self.mu)(x)
    }

    pub fn sigma(&self, x: &Condition) -> Result<f64> {
        ensure_positive((self.log_sigma)(x)?.exp(), "sigma")
    }

    pub fn distribution_at(&self, x: &Condition) -> Result<LifeDistribution> {
        LifeDistribution::new(self.family, self.mu(x)?, self.sigma(x)?)
    }

    pub fn quantile(&self, x: &Condition, p: f64) -> Result<f64> {
        self.distribution_at(x)?.quantile(p)
    }
}

/// `t_p(x_U) / t_p(x)`; independent of `p` only when `sigma(x) = sigma(x_U)`.
pub fn varying_sigma_quantile_ratio(m: &VaryingSigmaModel, x: &Condition, x_u: &Condition, p: f64) -> Result<f64> {
    check_probability(p)?;
    let zp = m.family.quantile(p);
    Ok((m.mu(x_u)? - m.mu(x)? + zp * (m.sigma(x_u)? - m.sigma(x)?)).exp())
}

type TransformFn = Box<dyn Fn(f64, &Condition) -> Result<f64> + Send + Sync>;

/// A time transformation `t -> Upsilon(t, x)` on an explicit validity interval.
pub struct TimeTransformation {
    map: TransformFn,
    pub use_condition: Condition,
    /// Closed interval of use-condition times on which the map is defined.
    pub validity: (f64, f64),
}

impl TimeTransformation {
    pub fn new(
        map: impl Fn(f64, &Condition) -> Result<f64> + Send + Sync + 'static,
        use_condition: Condition,
        validity: (f64, f64),
    ) -> Result<Self> {
        if !(validity.0 <= validity.1) {
            return Err(Error::Config("validity interval must satisfy lo <= hi".into()));
        }
        Ok(Self { map: Box::new(map), use_condition, validity })
    }

    pub fn identity(use_condition: Condition, validity: (f64, f64)) -> Result<Self> {
        Self::new(|t, _| Ok(t), use_condition, validity)
    }

    /// SAFT map `t / AF(x)`.
    pub fn saft(model: AccelerationModel, use_condition: Condition, validity: (f64, f64)) -> Result<Self> {
        let uc = use_condition.clone();
        Self::new(move |t, x| Ok(t / model.af(x, &uc)?.value()), use_condition, validity)
    }

    /// PH map for a base distribution, zero mapped to zero.
    pub fn ph(model: PhModel, validity: (f64, f64)) -> Result<Self> {
        let uc = model.use_condition.clone();
        Self::new(
            move |t, x| if t == 0.0 { Ok(0.0) } else { model.transform(t, x) },
            uc,
            validity,
        )
    }

    /// Quantile-matching map of a varying-sigma model: `t_p(x_U) -> t_p(x)`.
    pub fn varying_sigma(model: VaryingSigmaModel, use_condition: Condition, validity: (f64, f64)) -> Result<Self> {
        let uc = use_condition.clone();
        Self::new(
            move |t, x| {
                if t == 0.0 {
                    return Ok(0.0);
                }
                let z = (t.ln() - model.mu(&uc)?) / model.sigma(&uc)?;
                Ok((model.mu(x)? + model.sigma(x)? * z).exp())
            },
            use_condition,
            validity,
        )
    }

    pub fn eval(&self, t: f64, x: &Condition) -> Result<f64> {
        if !(t >= self.validity.0 && t <= self.validity.1) {
            return Err(Error::OutsideValidity(t));
        }
        (self.map)(t, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum TransformClass {
    Identity,
    /// Entirely below the diagonal.
    Accelerating,
    /// Entirely above the diagonal.
    Decelerating,
    /// Crosses the diagonal; `at` is the first located crossing time.
    Crossing { at: Option<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionClass {
    pub condition: Condition,
    pub class: TransformClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub zero_at_origin: bool,
    pub nonnegative: bool,
    pub increasing: bool,
    pub identity_at_use: bool,
    /// Grid points skipped because they fall outside the validity interval
    /// or failed to evaluate.
    pub skipped: usize,
    pub classes: Vec<ConditionClass>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.zero_at_origin && self.nonnegative && self.increasing && self.identity_at_use
    }
}

const DIAGONAL_TOL: f64 = 1e-12;

/// Checks the four time-transformation axioms on a grid of `(t, x)` pairs
/// and classifies the map at each distinct condition.
pub fn check_time_transformation(tt: &TimeTransformation, grid: &[(f64, Condition)]) -> AxiomReport {
    let mut skipped = 0;
    let mut conditions: Vec<Condition> = Vec::new();
    let mut times: Vec<Vec<f64>> = Vec::new();
    for (t, x) in grid {
        match conditions.iter().position(|c| c == x) {
            Some(i) => times[i].push(*t),
            None => {
                conditions.push(x.clone());
                times.push(vec![*t]);
            }
        }
    }
    if !conditions.contains(&tt.use_condition) {
        conditions.push(tt.use_condition.clone());
        times.push(grid.iter().map(|(t, _)| *t).collect());
    }

    let mut zero_at_origin = true;
    let mut nonnegative = true;
    let mut increasing = true;
    let mut identity_at_use = true;
    let mut classes = Vec::new();

    for (x, ts) in conditions.iter().zip(times.iter_mut()) {
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        match tt.eval(0.0, x) {
            Ok(v) if v == 0.0 => {}
            Ok(_) => zero_at_origin = false,
            Err(_) => skipped += 1,
        }
        let mut points = Vec::with_capacity(ts.len());
        for &t in ts.iter() {
            match tt.eval(t, x) {
                Ok(v) if v.is_finite() => points.push((t, v)),
                _ => skipped += 1,
            }
        }
        if points.iter().any(|&(_, v)| v < 0.0) {
            nonnegative = false;
        }
        if points.windows(2).any(|w| w[1].1 <= w[0].1) {
            increasing = false;
        }
        let is_use = x == &tt.use_condition;
        if is_use && points.iter().any(|&(t, v)| (v - t).abs() > DIAGONAL_TOL * t.max(1.0)) {
            identity_at_use = false;
        }
        if !is_use || grid.iter().any(|(_, g)| g == x) {
            classes.push(ConditionClass { condition: x.clone(), class: classify(tt, x, &points) });
        }
    }

    AxiomReport { zero_at_origin, nonnegative, increasing, identity_at_use, skipped, classes }
}

fn classify(tt: &TimeTransformation, x: &Condition, points: &[(f64, f64)]) -> TransformClass {
    let signs: Vec<(f64, i8)> = points
        .iter()
        .filter(|(t, _)| *t > 0.0)
        .map(|&(t, v)| {
            let d = v - t;
            let s = if d.abs() <= DIAGONAL_TOL * t.max(1.0) {
                0
            } else if d < 0.0 {
                -1
            } else {
                1
            };
            (t, s)
        })
        .collect();
    let below = signs.iter().any(|(_, s)| *s < 0);
    let above = signs.iter().any(|(_, s)| *s > 0);
    match (below, above) {
        (false, false) => TransformClass::Identity,
        (true, false) => TransformClass::Accelerating,
        (false, true) => TransformClass::Decelerating,
        (true, true) => {
            let at = signs
                .windows(2)
                .find(|w| w[0].1 != 0 && w[1].1 != 0 && w[0].1 != w[1].1)
                .and_then(|w| bisect_diagonal(tt, x, w[0].0, w[1].0));
            TransformClass::Crossing { at }
        }
    }
}

fn bisect_diagonal(tt: &TimeTransformation, x: &Condition, mut lo: f64, mut hi: f64) -> Option<f64> {
    let g = |t: f64| tt.eval(t, x).map(|v| v - t).ok();
    let mut glo = g(lo)?;
    let tol = 1e-12 * (hi - lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
