//! Effective UV dosage, reciprocity and temperature/humidity scaling of
//! photodegradation time.
//!
//! All integrals use the composite trapezoid rule on the caller's grids,
//! summed in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_positive, Error, Result};
use crate::relationships::{ActivationEnergy, Temperature};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    wavelengths: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.len() < 2 {
            return Err(Error::Config("spectral grid needs at least two wavelengths".into()));
        }
        if wavelengths.windows(2).any(|w| !(w[1] > w[0])) || wavelengths.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("spectral grid must be finite and strictly increasing".into()));
        }
        Ok(Self { wavelengths })
    }

    /// `n` equally spaced points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config("spectral grid needs at least two wavelengths".into()));
        }
        let h = (hi - lo) / (n - 1) as f64;
        Self::new((0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * h }).collect())
    }

    /// UV-B band, 290-320 nm at 1 nm spacing.
    pub fn uv_b() -> Self {
        Self::uniform(290.0, 320.0, 31).expect("static grid")
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn lo(&self) -> f64 {
        self.wavelengths[0]
    }

    pub fn hi(&self) -> f64 {
        *self.wavelengths.last().unwrap()
    }

    /// Inserts the midpoint of every interval.
    pub fn refined(&self) -> Self {
        Self { wavelengths: refine(&self.wavelengths) }
    }
}

pub fn refine(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(grid.last());
    out
}

/// `phi(lambda) = exp(beta0 + beta1 lambda)`. Only ratios of `phi` across
/// wavelengths are identified from dosage-response data; `beta0` is
/// confounded with the overall dosage scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumEfficiency {
    pub beta0: f64,
    pub beta1: f64,
}

impl QuantumEfficiency {
    pub const UNIT: QuantumEfficiency = QuantumEfficiency { beta0: 0.0, beta1: 0.0 };

    pub fn eval(&self, lambda: f64) -> f64 {
        (self.beta0 + self.beta1 * lambda).exp()
    }
}

/// Piecewise-linear table, errors outside its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Table {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Data("table columns must be nonempty and of equal length".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Data("table abscissae must be strictly increasing".into()));
        }
        Ok(Self { x, y })
    }

    pub fn eval(&self, at: f64) -> Result<f64> {
        let (lo, hi) = (self.x[0], *self.x.last().unwrap());
        if !(at >= lo && at <= hi) {
            return Err(domain(format!("{at} is outside the table range [{lo}, {hi}]")));
        }
        let i = self.x.partition_point(|&v| v < at);
        if self.x[i] == at {
            return Ok(self.y[i]);
        }
        let (x0, x1, y0, y1) = (self.x[i - 1], self.x[i], self.y[i - 1], self.y[i]);
        Ok(y0 + (y1 - y0) * (at - x0) / (x1 - x0))
    }
}

type IrradianceFn = Box<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;
type AbsorbanceFn = Box<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Spectral irradiance `E0(lambda, tau)`, absorbance exponent `A(lambda)`
/// and quasi-quantum efficiency `phi(lambda)`.
pub struct SpectralFunctions {
    irradiance: IrradianceFn,
    absorbance: AbsorbanceFn,
    pub efficiency: QuantumEfficiency,
}

impl SpectralFunctions {
    pub fn new(
        irradiance: impl Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
        absorbance: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        efficiency: QuantumEfficiency,
    ) -> Self {
        Self { irradiance: Box::new(irradiance), absorbance: Box::new(absorbance), efficiency }
    }

    /// Time-constant tabulated spectra.
    pub fn tabulated(irradiance: Table, absorbance: Table, efficiency: QuantumEfficiency) -> Self {
        Self::new(move |l, _| irradiance.eval(l), move |l| absorbance.eval(l), efficiency)
    }

    /// Integrand of the instantaneous dosage at `(lambda, tau)`.
    pub fn integrand(&self, lambda: f64, tau: f64) -> Result<f64> {
        let e0 = (self.irradiance)(lambda, tau)?;
        if !(e0 >= 0.0) || !e0.is_finite() {
            return Err(Error::Data(format!("irradiance at {lambda} nm, time {tau} is {e0}; must be nonnegative")));
        }
        let a = (self.absorbance)(lambda)?;
        if !(a >= 0.0) {
            return Err(Error::Data(format!("absorbance at {lambda} nm is {a}; must be nonnegative")));
        }
        // 1 - exp(-A), exact at A = inf
        let absorbed = -(-a).exp_m1();
        Ok(e0 * absorbed * self.efficiency.eval(lambda))
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Instantaneous effective dosage at time `tau`, integrated over the grid.
pub fn instantaneous_dosage(tau: f64, grid: &SpectralGrid, f: &SpectralFunctions) -> Result<f64> {
    let values = grid
        .wavelengths
        .iter()
        .map(|&l| f.integrand(l, tau))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&grid.wavelengths, &values))
}

/// Total effective dosage up to `t`; `time_grid` must run from 0 to `t`.
pub fn total_dosage(t: f64, grid: &SpectralGrid, f: &SpectralFunctions, time_grid: &[f64]) -> Result<f64> {
    if t == 0.0 && time_grid.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    if time_grid.len() < 2 || time_grid[0] != 0.0 || *time_grid.last().unwrap() != t {
        return Err(Error::Config(format!("time grid must start at 0 and end at t = {t}")));
    }
    if time_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("time grid must be strictly increasing".into()));
    }
    let rates = time_grid
        .par_iter()
        .map(|&tau| instantaneous_dosage(tau, grid, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(time_grid, &rates))
}

/// `n + 1` equally spaced times on `[0, t]`.
pub fn uniform_time_grid(t: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| if i == n { t } else { t * i as f64 / n as f64 }).collect()
}

/// Exposure history made of constant-spectrum segments.
pub struct Segment<'a> {
    pub duration: f64,
    pub functions: &'a SpectralFunctions,
}

/// Sum over segments of `duration x instantaneous dosage`.
pub fn piecewise_total_dosage(segments: &[Segment<'_>], grid: &SpectralGrid) -> Result<f64> {
    let mut total = 0.0;
    for s in segments {
        if !(s.duration >= 0.0) {
            return Err(domain(format!("segment duration must be nonnegative, got {}", s.duration)));
        }
        total += s.duration * instantaneous_dosage(0.0, grid, s.functions)?;
    }
    Ok(total)
}

/// Concentration factor and reciprocity exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureConfig {
    pub cf: f64,
    pub p: f64,
}

impl ExposureConfig {
    pub fn new(cf: f64, p: f64) -> Result<Self> {
        ensure_positive(cf, "CF")?;
        if !p.is_finite() {
            return Err(domain("reciprocity exponent must be finite"));
        }
        Ok(Self { cf, p })
    }

    pub fn reciprocity(cf: f64) -> Result<Self> {
        Self::new(cf, 1.0)
    }
}

/// `CF^p D_Tot`.
pub fn effective_exposure(dtot: f64, cfg: &ExposureConfig) -> Result<f64> {
    if !(dtot >= 0.0) {
        return Err(domain(format!("dosage must be nonnegative, got {dtot}")));
    }
    Ok(cfg.cf.powf(cfg.p) * dtot)
}

/// `log D_Tot + p log CF`.
pub fn log_effective_exposure(dtot: f64, cfg: &ExposureConfig) -> Result<f64> {
    ensure_positive(dtot, "dosage")?;
    Ok(dtot.ln() + cfg.p * cfg.cf.ln())
}

/// Tabulated moisture content `MC(RH)`, RH as a proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoistureTable(pub Table);

impl MoistureTable {
    pub fn new(rh: Vec<f64>, mc: Vec<f64>) -> Result<Self> {
        if rh.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Data("moisture table RH values must lie in [0, 1]".into()));
        }
        Ok(Self(Table::new(rh, mc)?))
    }

    pub fn constant(mc: f64) -> Self {
        Self(Table { x: vec![0.0, 1.0], y: vec![mc, mc] })
    }

    pub fn eval(&self, rh: f64) -> Result<f64> {
        self.0.eval(rh)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoMuParams {
    pub beta0: f64,
    pub ea: ActivationEnergy,
    pub c: f64,
    pub mc_table: MoistureTable,
}

/// `beta0 + Ea / (k temp K) + C MC(RH)`.
pub fn photo_mu(temp: Temperature, rh: f64, p: &PhotoMuParams) -> Result<f64> {
    let kelvin = temp.to_kelvin()?;
    Ok(p.beta0 + p.ea.over_kt(kelvin) + p.c * p.mc_table.eval(rh)?)
}

/// Scaled log time `z = log d - mu`.
pub fn scaled_log_time(dtot: f64, cfg: &ExposureConfig, mu: f64) -> Result<f64> {
    Ok(log_effective_exposure(dtot, cfg)? - mu)
}

/// Dosage expressed on the scale of a reference condition (CF = 1 and
/// location `mu_ref`), so paths from different filters and temperatures
/// can be overlaid.
pub fn dosage_at_reference(dtot: f64, cfg: &ExposureConfig, mu: f64, mu_ref: f64) -> Result<f64> {
    Ok((scaled_log_time(dtot, cfg, mu)? + mu_ref).exp())
}
