//! Acceleration-factor and reaction-rate relationships.
//!
//! Every function here is pure. Temperatures always carry an explicit unit
//! and activation energies carry their energy unit; the Arrhenius scaling
//! constant is chosen from the energy unit (11605 K/eV, 120.27 for kJ/mol,
//! 503.56 for kcal/mol), used verbatim so that published acceleration
//! factors are reproduced to their printed digits.

use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{domain, ensure_positive, Error, Result};

/// Physical constants and unit conversions, at the precision used in the
/// reliability literature.
pub mod constants {
    /// Offset between Celsius and kelvin.
    pub const KELVIN_OFFSET: f64 = 273.15;
    /// Boltzmann's constant in eV/K.
    pub const BOLTZMANN_EV: f64 = 8.6171e-5;
    /// Universal gas constant in kJ/(mol K).
    pub const GAS_KJ: f64 = 8.31447e-3;
    /// Universal gas constant in kcal/(mol K).
    pub const GAS_KCAL: f64 = 1.98588e-3;
    /// 1/k for Ea in eV.
    pub const ARRHENIUS_EV: f64 = 11605.0;
    /// 1/R for Ea in kJ/mol.
    pub const ARRHENIUS_KJ: f64 = 120.27;
    /// 1/R for Ea in kcal/mol.
    pub const ARRHENIUS_KCAL: f64 = 503.56;
    pub const KJ_PER_MOL_PER_EV: f64 = 96.485;
    pub const KCAL_PER_MOL_PER_EV: f64 = 23.060;
}

use constants::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemperatureUnit {
    Celsius,
    Kelvin,
}

/// A temperature tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Temperature {
    pub value: f64,
    pub unit: TemperatureUnit,
}

impl Temperature {
    pub fn celsius(value: f64) -> Self {
        Self { value, unit: TemperatureUnit::Celsius }
    }

    pub fn kelvin(value: f64) -> Self {
        Self { value, unit: TemperatureUnit::Kelvin }
    }

    /// Thermodynamic temperature; zero or negative results are invalid.
    pub fn to_kelvin(&self) -> Result<f64> {
        let k = match self.unit {
            TemperatureUnit::Celsius => self.value + KELVIN_OFFSET,
            TemperatureUnit::Kelvin => self.value,
        };
        if k.is_finite() && k > 0.0 {
            Ok(k)
        } else {
            Err(Error::InvalidTemperature(k))
        }
    }
}

/// Free-function form of [`Temperature::to_kelvin`].
pub fn to_kelvin(t: Temperature) -> Result<f64> {
    t.to_kelvin()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyUnit {
    #[serde(rename = "eV")]
    ElectronVolt,
    #[serde(rename = "kJ_per_mol")]
    KiloJoulePerMol,
    #[serde(rename = "kcal_per_mol")]
    KiloCaloriePerMol,
}

impl EnergyUnit {
    /// Reciprocal Boltzmann/gas constant matching this unit.
    pub fn arrhenius_constant(self) -> f64 {
        match self {
            EnergyUnit::ElectronVolt => ARRHENIUS_EV,
            EnergyUnit::KiloJoulePerMol => ARRHENIUS_KJ,
            EnergyUnit::KiloCaloriePerMol => ARRHENIUS_KCAL,
        }
    }

    fn per_ev(self) -> f64 {
        match self {
            EnergyUnit::ElectronVolt => 1.0,
            EnergyUnit::KiloJoulePerMol => KJ_PER_MOL_PER_EV,
            EnergyUnit::KiloCaloriePerMol => KCAL_PER_MOL_PER_EV,
        }
    }
}

/// Activation energy (or quasi-activation energy) with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationEnergy {
    pub value: f64,
    pub unit: EnergyUnit,
}

impl ActivationEnergy {
    pub fn new(value: f64, unit: EnergyUnit) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(domain(format!("activation energy must be finite and >= 0, got {value}")));
        }
        Ok(Self { value, unit })
    }

    pub fn ev(value: f64) -> Result<Self> {
        Self::new(value, EnergyUnit::ElectronVolt)
    }

    pub fn kj_per_mol(value: f64) -> Result<Self> {
        Self::new(value, EnergyUnit::KiloJoulePerMol)
    }

    pub fn kcal_per_mol(value: f64) -> Result<Self> {
        Self::new(value, EnergyUnit::KiloCaloriePerMol)
    }

    /// Converts with the fixed factors 1 eV = 96.485 kJ/mol = 23.060 kcal/mol.
    pub fn convert(&self, unit: EnergyUnit) -> Self {
        Self { value: self.value / self.unit.per_ev() * unit.per_ev(), unit }
    }

    /// `Ea / (k * temp K)` with the unit-appropriate constant.
    pub fn over_kt(&self, kelvin: f64) -> f64 {
        self.value * self.unit.arrhenius_constant() / kelvin
    }
}

/// Dimensionless, strictly positive acceleration factor.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AccelerationFactor(f64);

impl AccelerationFactor {
    pub const ONE: AccelerationFactor = AccelerationFactor(1.0);

    pub fn new(value: f64) -> Result<Self> {
        ensure_positive(value, "acceleration factor").map(AccelerationFactor)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `log AF`, the location shift of log-lifetime.
    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

fn af(value: f64) -> Result<AccelerationFactor> {
    AccelerationFactor::new(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionRateParams {
    pub gamma0: f64,
    pub ea: ActivationEnergy,
    /// Eyring temperature exponent; zero for plain Arrhenius.
    pub m: f64,
}

/// `gamma0 * exp(-Ea / (k * temp K))`.
pub fn arrhenius_rate(temp: Temperature, p: &ReactionRateParams) -> Result<f64> {
    if p.m != 0.0 {
        return Err(domain("arrhenius_rate requires m = 0; use eyring_rate"));
    }
    eyring_rate(temp, p)
}

/// `gamma0 * (temp K)^m * exp(-Ea / (k * temp K))`.
pub fn eyring_rate(temp: Temperature, p: &ReactionRateParams) -> Result<f64> {
    ensure_positive(p.gamma0, "gamma0")?;
    let k = temp.to_kelvin()?;
    Ok(p.gamma0 * k.powf(p.m) * (-p.ea.over_kt(k)).exp())
}

pub fn arrhenius_af(temp: Temperature, temp_u: Temperature, ea: ActivationEnergy) -> Result<AccelerationFactor> {
    let k = temp.to_kelvin()?;
    let ku = temp_u.to_kelvin()?;
    af((ea.over_kt(ku) - ea.over_kt(k)).exp())
}

/// Eyring factor `(temp K / temp_U K)^m` times the Arrhenius factor.
pub fn eyring_af(temp: Temperature, temp_u: Temperature, ea: ActivationEnergy, m: f64) -> Result<AccelerationFactor> {
    let arr = arrhenius_af(temp, temp_u, ea)?;
    if m == 0.0 {
        return Ok(arr);
    }
    let ratio = temp.to_kelvin()? / temp_u.to_kelvin()?;
    af(ratio.powf(m) * arr.value())
}

/// Power-rule use-rate factor `(rate / rate_U)^p`; `p = 1` is simple reciprocity.
pub fn use_rate_af(rate: f64, rate_u: f64, p: f64) -> Result<AccelerationFactor> {
    ensure_positive(rate, "use rate")?;
    ensure_positive(rate_u, "use-condition rate")?;
    af((rate / rate_u).powf(p))
}

/// Coffin-Manson material constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoffinMansonParams {
    pub delta: f64,
    pub beta1: f64,
    /// Frequency exponent of the extended relationship.
    pub beta2: f64,
    /// Quasi-activation energy of the extended relationship.
    pub ea: ActivationEnergy,
}

impl CoffinMansonParams {
    /// Typical range exponent for some metals.
    pub const BETA1_METALS: f64 = 2.0;
    /// Typical range exponent for plastic IC encapsulements.
    pub const BETA1_PLASTIC_ENCAPSULEMENTS: f64 = 5.0;

    pub fn new(delta: f64, beta1: f64) -> Result<Self> {
        ensure_positive(delta, "delta")?;
        ensure_positive(beta1, "beta1")?;
        Ok(Self {
            delta,
            beta1,
            beta2: 0.0,
            ea: ActivationEnergy { value: 0.0, unit: EnergyUnit::ElectronVolt },
        })
    }

    pub fn extended(delta: f64, beta1: f64, beta2: f64, ea: ActivationEnergy) -> Result<Self> {
        Ok(Self { beta2, ea, ..Self::new(delta, beta1)? })
    }
}

/// Cycles to failure `delta / dtemp^beta1`. No damage threshold is modeled.
pub fn coffin_manson_cycles(dtemp: f64, p: &CoffinMansonParams) -> Result<f64> {
    ensure_positive(dtemp, "temperature range")?;
    Ok(p.delta / dtemp.powf(p.beta1))
}

pub fn coffin_manson_af(dtemp: f64, dtemp_u: f64, beta1: f64) -> Result<AccelerationFactor> {
    ensure_positive(dtemp, "temperature range")?;
    ensure_positive(dtemp_u, "use temperature range")?;
    ensure_positive(beta1, "beta1")?;
    af((dtemp / dtemp_u).powf(beta1))
}

/// Extended Coffin-Manson: frequency and maximum-temperature dependence.
pub fn extended_coffin_manson_cycles(
    dtemp: f64,
    freq: f64,
    tempmax: Temperature,
    p: &CoffinMansonParams,
) -> Result<f64> {
    ensure_positive(freq, "cycling frequency")?;
    let base = coffin_manson_cycles(dtemp, p)?;
    let k = tempmax.to_kelvin()?;
    Ok(base * freq.powf(-p.beta2) * p.ea.over_kt(k).exp())
}

/// Inverse power relationship `(v / v_U)^(-beta1)`; `beta1` is usually negative.
pub fn inverse_power_af(v: f64, v_u: f64, beta1: f64) -> Result<AccelerationFactor> {
    ensure_positive(v, "stress")?;
    ensure_positive(v_u, "use stress")?;
    af((v / v_u).powf(-beta1))
}

/// Below this |lambda| the Box-Cox transform uses its logarithmic limit.
pub const BOX_COX_LOG_THRESHOLD: f64 = 1e-6;

pub fn box_cox_transform(x: f64, lambda: f64) -> Result<f64> {
    ensure_positive(x, "Box-Cox argument")?;
    if lambda.abs() < BOX_COX_LOG_THRESHOLD {
        Ok(x.ln())
    } else {
        // expm1 keeps precision for small lambda * log x
        Ok((lambda * x.ln()).exp_m1() / lambda)
    }
}

/// `exp[gamma1 * (W(x1_U) - W(x1))]` with `W` the Box-Cox transform.
pub fn box_cox_af(x1: f64, x1_u: f64, lambda: f64, gamma1: f64) -> Result<AccelerationFactor> {
    let w = box_cox_transform(x1, lambda)?;
    let wu = box_cox_transform(x1_u, lambda)?;
    af((gamma1 * (wu - w)).exp())
}

/// Generalized Eyring parameters for one nonthermal variable `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenEyringParams {
    pub gamma0: f64,
    pub gamma1: ActivationEnergy,
    pub gamma2: f64,
    /// Temperature-X interaction; zero means none.
    pub gamma3: f64,
    pub m: f64,
}

impl GenEyringParams {
    pub fn new(gamma1: ActivationEnergy, gamma2: f64, gamma3: f64) -> Self {
        Self { gamma0: 1.0, gamma1, gamma2, gamma3, m: 0.0 }
    }
}

/// `gamma0 (temp K)^m exp(-gamma1/(k temp K)) exp(gamma2 X + gamma3 X /(k temp K))`.
///
/// `gamma3` is scaled with the same `1/k` constant as `gamma1`.
pub fn gen_eyring_rate(temp: Temperature, x: f64, p: &GenEyringParams) -> Result<f64> {
    ensure_positive(p.gamma0, "gamma0")?;
    let k = temp.to_kelvin()?;
    let inv_kt = p.gamma1.unit.arrhenius_constant() / k;
    let log_rate =
        p.gamma0.ln() + p.m * k.ln() - p.gamma1.over_kt(k) + p.gamma2 * x + p.gamma3 * x * inv_kt;
    Ok(log_rate.exp())
}

/// Rate ratio `R(temp, X) / R(temp_U, X_U)`, evaluated on the log scale.
pub fn gen_eyring_af(
    temp: Temperature,
    x: f64,
    temp_u: Temperature,
    x_u: f64,
    p: &GenEyringParams,
) -> Result<AccelerationFactor> {
    ensure_positive(p.gamma0, "gamma0")?;
    let k = temp.to_kelvin()?;
    let ku = temp_u.to_kelvin()?;
    let c = p.gamma1.unit.arrhenius_constant();
    let log_rate = |kelvin: f64, x: f64| {
        p.m * kelvin.ln() - p.gamma1.over_kt(kelvin) + p.gamma2 * x + p.gamma3 * x * c / kelvin
    };
    if !x.is_finite() || !x_u.is_finite() {
        return Err(domain("nonthermal variable must be finite"));
    }
    af((log_rate(k, x) - log_rate(ku, x_u)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhKind {
    /// `log(RH)`.
    Peck,
    /// `log[RH / (1 - RH)]`.
    Klinger,
}

/// Humidity transform for relative humidity given as a proportion in (0, 1).
pub fn rh_transform(rh: f64, kind: RhKind) -> Result<f64> {
    if !(rh > 0.0 && rh < 1.0) {
        return Err(domain(format!("relative humidity must lie in (0, 1), got {rh}")));
    }
    Ok(match kind {
        RhKind::Peck => rh.ln(),
        RhKind::Klinger => (rh / (1.0 - rh)).ln(),
    })
}

/// Temperature-voltage factor from the generalized Eyring rate with
/// `X = log(volt)` combined with a dielectric-strength crossing exponent:
/// `exp[Ea(x1U - x1)] (v/vU)^(gamma2 - strength_exponent) {exp[x1 log v - x1U log vU]}^gamma3`.
pub fn temperature_voltage_af(
    temp: Temperature,
    volt: f64,
    temp_u: Temperature,
    volt_u: f64,
    p: &GenEyringParams,
    strength_exponent: f64,
) -> Result<AccelerationFactor> {
    ensure_positive(volt, "voltage")?;
    ensure_positive(volt_u, "use voltage")?;
    let rate = gen_eyring_af(temp, volt.ln(), temp_u, volt_u.ln(), p)?;
    af(rate.value() * (volt / volt_u).powf(-strength_exponent))
}

/// Black's equation: temperature and current density, no interaction.
pub fn black_af(
    temp: Temperature,
    current: f64,
    temp_u: Temperature,
    current_u: f64,
    ea: ActivationEnergy,
    gamma2: f64,
) -> Result<AccelerationFactor> {
    ensure_positive(current, "current density")?;
    ensure_positive(current_u, "use current density")?;
    gen_eyring_af(temp, current.ln(), temp_u, current_u.ln(), &GenEyringParams::new(ea, gamma2, 0.0))
}

/// Peck (`log RH`) or Klinger (`logit RH`) temperature-humidity factor without interaction.
pub fn humidity_af(
    temp: Temperature,
    rh: f64,
    temp_u: Temperature,
    rh_u: f64,
    ea: ActivationEnergy,
    gamma2: f64,
    kind: RhKind,
) -> Result<AccelerationFactor> {
    let x = rh_transform(rh, kind)?;
    let xu = rh_transform(rh_u, kind)?;
    gen_eyring_af(temp, x, temp_u, xu, &GenEyringParams::new(ea, gamma2, 0.0))
}

/// Transform applied to the nonthermal variable of a generalized Eyring model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StressTransform {
    Identity,
    /// `log` of voltage, current, use rate, ...
    Log,
    Peck,
    Klinger,
}

impl StressTransform {
    pub fn apply(self, value: f64) -> Result<f64> {
        match self {
            StressTransform::Identity => Ok(value),
            StressTransform::Log => Ok(ensure_positive(value, "stress")?.ln()),
            StressTransform::Peck => rh_transform(value, RhKind::Peck),
            StressTransform::Klinger => rh_transform(value, RhKind::Klinger),
        }
    }
}

/// A relationship identifier with its parameters, evaluated on named
/// condition variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relationship", rename_all = "snake_case")]
pub enum AccelerationModel {
    Arrhenius { temp: String, ea: ActivationEnergy },
    Eyring { temp: String, ea: ActivationEnergy, m: f64 },
    InversePower { var: String, beta1: f64 },
    UseRate { var: String, p: f64 },
    CoffinManson { var: String, beta1: f64 },
    BoxCox { var: String, lambda: f64, gamma1: f64 },
    GenEyring { temp: String, var: String, stress: StressTransform, params: GenEyringParams },
    /// Product of independent factors (no interaction).
    Product(Vec<AccelerationModel>),
}

impl AccelerationModel {
    /// Acceleration factor of condition `x` relative to `use_condition`.
    pub fn af(&self, x: &Condition, use_condition: &Condition) -> Result<AccelerationFactor> {
        use AccelerationModel::*;
        match self {
            Arrhenius { temp, ea } => {
                arrhenius_af(x.temperature(temp)?, use_condition.temperature(temp)?, *ea)
            }
            Eyring { temp, ea, m } => {
                eyring_af(x.temperature(temp)?, use_condition.temperature(temp)?, *ea, *m)
            }
            InversePower { var, beta1 } => inverse_power_af(x.get(var)?, use_condition.get(var)?, *beta1),
            UseRate { var, p } => use_rate_af(x.get(var)?, use_condition.get(var)?, *p),
            CoffinManson { var, beta1 } => coffin_manson_af(x.get(var)?, use_condition.get(var)?, *beta1),
            BoxCox { var, lambda, gamma1 } => {
                box_cox_af(x.get(var)?, use_condition.get(var)?, *lambda, *gamma1)
            }
            GenEyring { temp, var, stress, params } => {
                let read = |c: &Condition| match stress {
                    StressTransform::Peck | StressTransform::Klinger => c.proportion(var),
                    _ => c.get(var),
                };
                gen_eyring_af(
                    x.temperature(temp)?,
                    stress.apply(read(x)?)?,
                    use_condition.temperature(temp)?,
                    stress.apply(read(use_condition)?)?,
                    params,
                )
            }
            Product(parts) => {
                let mut log_af = 0.0;
                for part in parts {
                    log_af += part.af(x, use_condition)?.ln();
                }
                af(log_af.exp())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(v: f64) -> Temperature {
        Temperature::celsius(v)
    }

    fn ev(v: f64) -> ActivationEnergy {
        ActivationEnergy::ev(v).unwrap()
    }

    #[test]
    fn kelvin_conversion() {
        assert_eq!(c(25.0).to_kelvin().unwrap(), 298.15);
        assert_eq!(Temperature::kelvin(310.0).to_kelvin().unwrap(), 310.0);
        assert!(matches!(Temperature::kelvin(0.0).to_kelvin(), Err(Error::InvalidTemperature(_))));
        assert!(matches!(c(-273.15).to_kelvin(), Err(Error::InvalidTemperature(_))));
    }

    #[test]
    fn constants_match_their_reciprocals() {
        assert_eq!((1.0 / BOLTZMANN_EV).round(), ARRHENIUS_EV);
        assert_relative_eq!(1.0 / GAS_KJ, ARRHENIUS_KJ, max_relative = 5e-5);
        assert_relative_eq!(1.0 / GAS_KCAL, ARRHENIUS_KCAL, max_relative = 5e-5);
    }

    #[test]
    fn arrhenius_rate_values() {
        let p = ReactionRateParams { gamma0: 1.0, ea: ev(0.0), m: 0.0 };
        assert_eq!(arrhenius_rate(c(50.0), &p).unwrap(), 1.0);
        assert_eq!(arrhenius_rate(c(150.0), &p).unwrap(), 1.0);
        let p = ReactionRateParams { gamma0: 1.0, ea: ev(0.5), m: 0.0 };
        // exp(-0.5 * 11605 / 323.15), 30-digit reference evaluation
        assert_relative_eq!(arrhenius_rate(c(50.0), &p).unwrap(), 1.591_414_407_935_076e-8, max_relative = 1e-12);
        let ratio = arrhenius_rate(c(120.0), &p).unwrap() / arrhenius_rate(c(50.0), &p).unwrap();
        assert_relative_eq!(ratio, arrhenius_af(c(120.0), c(50.0), ev(0.5)).unwrap().value(), max_relative = 1e-12);
        let p = ReactionRateParams { m: 1.0, ..p };
        assert!(arrhenius_rate(c(50.0), &p).is_err());
    }

    #[test]
    fn arrhenius_golden_values() {
        for (ea, want) in [(0.4, 12.9), (0.5, 24.5), (0.6, 46.4)] {
            let got = arrhenius_af(c(120.0), c(50.0), ev(ea)).unwrap().value();
            assert_relative_eq!(got, want, max_relative = 5e-3);
        }
        assert_relative_eq!(arrhenius_af(c(160.0), c(90.0), ev(1.2)).unwrap().value(), 491.0, max_relative = 5e-3);
        assert_eq!(arrhenius_af(c(77.0), c(77.0), ev(0.9)).unwrap().value(), 1.0);
    }

    #[test]
    fn eyring_values() {
        let m1 = eyring_af(c(160.0), c(90.0), ev(1.2), 1.0).unwrap().value();
        assert_relative_eq!(m1, 586.0, max_relative = 1e-2);
        // 30-digit reference: 586.12499180...
        assert_relative_eq!(m1, 586.124_991_803_823, max_relative = 1e-12);
        let m_half = eyring_af(c(160.0), c(90.0), ev(1.2), 0.5).unwrap().value();
        assert_relative_eq!(m_half, 536.678_385_433_830, max_relative = 1e-12);
        let arr = arrhenius_af(c(160.0), c(90.0), ev(1.2)).unwrap();
        assert_eq!(eyring_af(c(160.0), c(90.0), ev(1.2), 0.0).unwrap(), arr);
    }

    #[test]
    fn eyring_is_monotone_in_m_at_fixed_ea() {
        let ms: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
        let afs: Vec<f64> = ms
            .iter()
            .map(|&m| eyring_af(c(160.0), c(90.0), ev(1.2), m).unwrap().value())
            .collect();
        assert!(afs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn use_rate_values() {
        assert_relative_eq!(use_rate_af(412.0, 60.0, 1.0).unwrap().value(), 6.87, epsilon = 0.01);
        let af = use_rate_af(112.0, 8.0, 1.0).unwrap().value();
        assert_eq!(af, 14.0);
        assert_relative_eq!(12.0 * 12.0 / af, 10.3, epsilon = 0.3);
        assert_eq!(use_rate_af(3.0, 3.0, 0.7).unwrap().value(), 1.0);
        assert!(use_rate_af(0.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn coffin_manson_values() {
        let p = CoffinMansonParams::new(1e6, 2.0).unwrap();
        assert_relative_eq!(coffin_manson_cycles(100.0, &p).unwrap(), 100.0, max_relative = 1e-14);
        let p = CoffinMansonParams::new(1.0, CoffinMansonParams::BETA1_PLASTIC_ENCAPSULEMENTS).unwrap();
        assert_eq!(coffin_manson_cycles(1.0, &p).unwrap(), 1.0);
        assert!(coffin_manson_cycles(0.0, &p).is_err());
        assert_eq!(CoffinMansonParams::BETA1_METALS, 2.0);
        assert_relative_eq!(coffin_manson_af(80.0, 20.0, 2.0).unwrap().value(), 16.0, max_relative = 1e-14);
        assert_relative_eq!(coffin_manson_af(80.0, 20.0, 5.0).unwrap().value(), 1024.0, max_relative = 1e-14);
        assert_eq!(coffin_manson_af(33.0, 33.0, 5.0).unwrap().value(), 1.0);
        assert!(coffin_manson_af(-1.0, 33.0, 5.0).is_err());
    }

    #[test]
    fn extended_coffin_manson_values() {
        let base = CoffinMansonParams::new(3e5, 2.5).unwrap();
        assert_eq!(
            extended_coffin_manson_cycles(40.0, 3.0, c(100.0), &base).unwrap(),
            coffin_manson_cycles(40.0, &base).unwrap()
        );
        let p = CoffinMansonParams::extended(1.0, 1.0, 1.0, ev(0.0)).unwrap();
        assert_eq!(extended_coffin_manson_cycles(1.0, 2.0, c(100.0), &p).unwrap(), 0.5);
        let p = CoffinMansonParams::extended(1.0, 2.0, 0.0, ev(0.3)).unwrap();
        // 0.0004 * exp(0.3 * 11605 / 373.15), 30-digit reference
        assert_relative_eq!(
            extended_coffin_manson_cycles(50.0, 1.0, c(100.0), &p).unwrap(),
            4.508_579_458_522_460,
            max_relative = 1e-12
        );
        assert!(extended_coffin_manson_cycles(50.0, 0.0, c(100.0), &p).is_err());
    }

    #[test]
    fn inverse_power_values() {
        // 30-digit references; rounded to integers they read 11, 23, 46
        for (b, want, rounded) in [(-7.0, 11.451_799_278_451_146, 11.0), (-9.0, 22.983_124_940_780_425, 23.0), (-11.0, 46.125_854_915_871_825, 46.0)] {
            let af = inverse_power_af(170.0, 120.0, b).unwrap().value();
            assert_relative_eq!(af, want, max_relative = 1e-12);
            assert_eq!(af.round(), rounded);
        }
        assert_eq!(inverse_power_af(150.0, 150.0, -9.0).unwrap().value(), 1.0);
        assert!(inverse_power_af(0.0, 120.0, -9.0).is_err());
    }

    #[test]
    fn box_cox_values() {
        assert_relative_eq!(box_cox_transform(3.7, 1.0).unwrap(), 2.7, max_relative = 1e-14);
        assert_eq!(box_cox_transform(3.7, 0.0).unwrap(), 3.7f64.ln());
        assert!((box_cox_transform(2.0, 1e-8).unwrap() - 2f64.ln()).abs() < 1e-7);
        assert!(box_cox_transform(0.0, 0.5).is_err());
        // lambda = 0 is the inverse power relationship with gamma1 = beta1
        assert_relative_eq!(
            box_cox_af(170.0, 120.0, 0.0, -9.0).unwrap().value(),
            inverse_power_af(170.0, 120.0, -9.0).unwrap().value(),
            max_relative = 1e-13
        );
        assert_eq!(box_cox_af(5.0, 5.0, 0.3, 2.0).unwrap().value(), 1.0);
        assert_relative_eq!(box_cox_af(3.0, 1.0, 1.0, -2.0).unwrap().value(), 54.598_150_033_144_24, max_relative = 1e-13);
    }

    #[test]
    fn box_cox_continuity_at_zero() {
        for lambda in [1e-3, 1e-4, 1e-5, 1e-7, -1e-5] {
            let worst = (1..=100)
                .map(|i| 0.1 * i as f64)
                .map(|x| (box_cox_transform(x, lambda).unwrap() - x.ln()).abs())
                .fold(0.0, f64::max);
            // |W - log x| ~ lambda (log x)^2 / 2 <= 2.7 lambda on [0.1, 10]
            assert!(worst <= 2.7 * lambda.abs() + 1e-15, "lambda={lambda} worst={worst}");
        }
    }

    #[test]
    fn gen_eyring_reductions() {
        let plain = GenEyringParams { gamma0: 2.0, gamma1: ev(0.7), gamma2: 0.0, gamma3: 0.0, m: 0.0 };
        let rr = ReactionRateParams { gamma0: 2.0, ea: ev(0.7), m: 0.0 };
        assert_relative_eq!(
            gen_eyring_rate(c(85.0), 1.3, &plain).unwrap(),
            arrhenius_rate(c(85.0), &rr).unwrap(),
            max_relative = 1e-13
        );
        let p = GenEyringParams { gamma0: 1.0, gamma1: ev(0.0), gamma2: 1.0, gamma3: 0.0, m: 0.0 };
        assert_relative_eq!(gen_eyring_rate(c(20.0), 2f64.ln(), &p).unwrap(), 2.0, max_relative = 1e-14);
        // gamma3 = 0 factorizes as f(temp) g(X)
        let p = GenEyringParams { gamma0: 1.0, gamma1: ev(0.5), gamma2: 0.8, gamma3: 0.0, m: 0.0 };
        let (t1, t2, x1, x2) = (c(40.0), c(90.0), 0.3, 1.7);
        let lhs = gen_eyring_rate(t1, x1, &p).unwrap() * gen_eyring_rate(t2, x2, &p).unwrap();
        let rhs = gen_eyring_rate(t1, x2, &p).unwrap() * gen_eyring_rate(t2, x1, &p).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn gen_eyring_af_values() {
        let p = GenEyringParams::new(ev(0.6), -2.0, 0.0);
        let got = gen_eyring_af(c(30.0), 0.8f64.ln(), c(30.0), 0.5f64.ln(), &p).unwrap().value();
        assert_relative_eq!(got, 1.0 / 2.56, max_relative = 1e-13);
        let p = GenEyringParams::new(ev(0.6), 2.0, 0.0);
        let got = gen_eyring_af(c(30.0), 0.8f64.ln(), c(30.0), 0.5f64.ln(), &p).unwrap().value();
        assert_relative_eq!(got, 2.56, max_relative = 1e-13);
        assert_eq!(gen_eyring_af(c(30.0), 0.4, c(30.0), 0.4, &p).unwrap().value(), 1.0);
    }

    #[test]
    fn no_interaction_factorization() {
        let p = GenEyringParams::new(ev(0.7), 1.5, 0.0);
        let (t, tu, x, xu) = (c(110.0), c(40.0), 2.0, 0.5);
        let full = gen_eyring_af(t, x, tu, xu, &p).unwrap().value();
        let temp_only = gen_eyring_af(t, xu, tu, xu, &p).unwrap().value();
        let x_only = gen_eyring_af(tu, x, tu, xu, &p).unwrap().value();
        assert_relative_eq!(full, temp_only * x_only, max_relative = 1e-12);
        let p = GenEyringParams::new(ev(0.7), 1.5, 0.05);
        let full = gen_eyring_af(t, x, tu, xu, &p).unwrap().value();
        let temp_only = gen_eyring_af(t, xu, tu, xu, &p).unwrap().value();
        let x_only = gen_eyring_af(tu, x, tu, xu, &p).unwrap().value();
        assert!((full / (temp_only * x_only) - 1.0).abs() > 1e-3);
    }

    #[test]
    fn temperature_voltage_matches_closed_form() {
        let (ea, g2, g3, g1_strength) = (0.5, 1.2, 0.03, 4.0);
        let p = GenEyringParams::new(ev(ea), g2, g3);
        let (t, tu, v, vu) = (c(120.0), c(50.0), 300.0, 150.0);
        let got = temperature_voltage_af(t, v, tu, vu, &p, g1_strength).unwrap().value();
        let x1 = 11605.0 / 393.15;
        let x1u = 11605.0 / 323.15;
        let want = (ea * (x1u - x1)).exp()
            * (v / vu).powf(g2 - g1_strength)
            * ((x1 * v.ln() - x1u * vu.ln()).exp()).powf(g3);
        assert_relative_eq!(got, want, max_relative = 1e-10);
    }

    #[test]
    fn humidity_specializations() {
        assert_eq!(rh_transform(0.5, RhKind::Klinger).unwrap(), 0.0);
        assert!(rh_transform(1.0, RhKind::Peck).is_err());
        assert!(rh_transform(0.0, RhKind::Klinger).is_err());
        assert_relative_eq!(rh_transform(0.628, RhKind::Klinger).unwrap(), 0.523_646_312_195_052, max_relative = 1e-12);
        let peck = humidity_af(c(85.0), 0.85, c(30.0), 0.6, ev(0.7), 3.0, RhKind::Peck).unwrap().value();
        let want = arrhenius_af(c(85.0), c(30.0), ev(0.7)).unwrap().value() * (0.85f64 / 0.6).powf(3.0);
        assert_relative_eq!(peck, want, max_relative = 1e-12);
        assert!(humidity_af(c(85.0), 1.2, c(30.0), 0.6, ev(0.7), 3.0, RhKind::Klinger).is_err());
        let black = black_af(c(150.0), 2.0, c(50.0), 0.5, ev(0.6), 2.0).unwrap().value();
        let want = arrhenius_af(c(150.0), c(50.0), ev(0.6)).unwrap().value() * 16.0;
        assert_relative_eq!(black, want, max_relative = 1e-12);
    }

    #[test]
    fn unit_conversion_is_exact_at_fixed_factors() {
        let e = ev(1.0);
        assert_relative_eq!(e.convert(EnergyUnit::KiloJoulePerMol).value, 96.485, max_relative = 1e-15);
        assert_relative_eq!(e.convert(EnergyUnit::KiloCaloriePerMol).value, 23.060, max_relative = 1e-15);
        assert!(ActivationEnergy::ev(-0.1).is_err());
    }

    #[test]
    fn model_enum_dispatch() {
        let model = AccelerationModel::Product(vec![
            AccelerationModel::Arrhenius { temp: "temp".into(), ea: ev(0.5) },
            AccelerationModel::InversePower { var: "volt".into(), beta1: -9.0 },
        ]);
        use crate::condition::Unit;
        let x = Condition::celsius(120.0).with("volt", 170.0, Unit::Unitless);
        let u = Condition::celsius(50.0).with("volt", 120.0, Unit::Unitless);
        let want = arrhenius_af(c(120.0), c(50.0), ev(0.5)).unwrap().value()
            * inverse_power_af(170.0, 120.0, -9.0).unwrap().value();
        assert_relative_eq!(model.af(&x, &u).unwrap().value(), want, max_relative = 1e-12);
        let missing = Condition::celsius(120.0);
        assert!(matches!(model.af(&missing, &u), Err(Error::MissingVariable(_))));
    }

    proptest! {
        #[test]
        fn identity_at_use(t in -50.0f64..300.0, e in 0.0f64..2.0, m in -2.0f64..2.0,
                           v in 0.01f64..1e4, b in -15.0f64..15.0, lambda in -1.0f64..2.0) {
            prop_assert_eq!(arrhenius_af(c(t), c(t), ev(e)).unwrap().value(), 1.0);
            prop_assert_eq!(eyring_af(c(t), c(t), ev(e), m).unwrap().value(), 1.0);
            prop_assert_eq!(inverse_power_af(v, v, b).unwrap().value(), 1.0);
            prop_assert_eq!(use_rate_af(v, v, b).unwrap().value(), 1.0);
            prop_assert_eq!(coffin_manson_af(v, v, e + 0.1).unwrap().value(), 1.0);
            prop_assert_eq!(box_cox_af(v, v, lambda, b).unwrap().value(), 1.0);
        }

        #[test]
        fn composition_through_intermediate(a in 0.0f64..200.0, b in 0.0f64..200.0, cc in 0.0f64..200.0,
                                            e in 0.1f64..1.5, p in 0.5f64..3.0) {
            let ab = arrhenius_af(c(a), c(b), ev(e)).unwrap().value();
            let bc = arrhenius_af(c(b), c(cc), ev(e)).unwrap().value();
            let ac = arrhenius_af(c(a), c(cc), ev(e)).unwrap().value();
            prop_assert!((ab * bc / ac - 1.0).abs() < 1e-11);
            let (va, vb, vc) = (a + 1.0, b + 1.0, cc + 1.0);
            let ip = inverse_power_af(va, vb, -p).unwrap().value() * inverse_power_af(vb, vc, -p).unwrap().value();
            prop_assert!((ip / inverse_power_af(va, vc, -p).unwrap().value() - 1.0).abs() < 1e-11);
            let ur = use_rate_af(va, vb, p).unwrap().value() * use_rate_af(vb, vc, p).unwrap().value();
            prop_assert!((ur / use_rate_af(va, vc, p).unwrap().value() - 1.0).abs() < 1e-11);
            let cm = coffin_manson_af(va, vb, p).unwrap().value() * coffin_manson_af(vb, vc, p).unwrap().value();
            prop_assert!((cm / coffin_manson_af(va, vc, p).unwrap().value() - 1.0).abs() < 1e-11);
        }

        #[test]
        fn monotonicity(t in 0.0f64..200.0, dt in 0.5f64..50.0, e in 0.05f64..1.5,
                        v in 1.0f64..500.0, dv in 0.5f64..50.0, b in 0.5f64..12.0, lambda in -1.0f64..2.0,
                        w in 1.0f64..20.0, g in 0.1f64..2.0) {
            let lo = arrhenius_af(c(t), c(25.0), ev(e)).unwrap().value();
            let hi = arrhenius_af(c(t + dt), c(25.0), ev(e)).unwrap().value();
            prop_assert!(hi > lo);
            prop_assert!(inverse_power_af(v + dv, 100.0, -b).unwrap() > inverse_power_af(v, 100.0, -b).unwrap());
            let dw = 0.1 * dv;
            prop_assert!(box_cox_af(w + dw, 10.0, lambda, -g).unwrap() > box_cox_af(w, 10.0, lambda, -g).unwrap());
            prop_assert!(box_cox_af(w + dw, 10.0, lambda, g).unwrap() < box_cox_af(w, 10.0, lambda, g).unwrap());
        }
    }
}
