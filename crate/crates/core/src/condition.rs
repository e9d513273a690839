//! Named environmental conditions (temperature, voltage stress, humidity, use rate, ...).
//!
//! Columns in life-data files carry their unit as a header suffix, e.g.
//! `temp_C`, `voltstress_V_per_mm`, `rh_frac`. The part before the first
//! underscore is the variable name referenced from model formulas.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relationships::Temperature;

/// Unit attached to a condition variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Unit {
    Celsius,
    Kelvin,
    /// A proportion in [0, 1].
    Fraction,
    /// A percentage in [0, 100].
    Percent,
    /// Any other unit, kept verbatim (`V_per_mm`, `Hz`, `mA`, ...).
    Other(String),
    Unitless,
}

impl Unit {
    pub fn parse(suffix: &str) -> Unit {
        match suffix {
            "" => Unit::Unitless,
            "C" | "degC" | "celsius" => Unit::Celsius,
            "K" | "kelvin" => Unit::Kelvin,
            "frac" | "fraction" | "prop" => Unit::Fraction,
            "pct" | "percent" => Unit::Percent,
            other => Unit::Other(other.to_string()),
        }
    }

    pub fn suffix(&self) -> &str {
        match self {
            Unit::Celsius => "C",
            Unit::Kelvin => "K",
            Unit::Fraction => "frac",
            Unit::Percent => "pct",
            Unit::Other(s) => s,
            Unit::Unitless => "",
        }
    }

    pub fn is_temperature(&self) -> bool {
        matches!(self, Unit::Celsius | Unit::Kelvin)
    }
}

/// A condition: a set of named variable values, each with a unit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    vars: BTreeMap<String, (f64, Unit)>,
}

/// Splits a unit-suffixed header into `(name, unit)`.
pub fn split_header(header: &str) -> (String, Unit) {
    match header.split_once('_') {
        Some((name, suffix)) => (name.to_string(), Unit::parse(suffix)),
        None => (header.to_string(), Unit::Unitless),
    }
}

impl Condition {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insertion.
    pub fn with(mut self, name: &str, value: f64, unit: Unit) -> Self {
        self.set(name, value, unit);
        self
    }

    /// Convenience for a temperature in degrees Celsius stored under `temp`.
    pub fn celsius(value: f64) -> Self {
        Self::new().with("temp", value, Unit::Celsius)
    }

    pub fn set(&mut self, name: &str, value: f64, unit: Unit) {
        self.vars.insert(name.to_string(), (value, unit));
    }

    /// Inserts a value from a unit-suffixed header such as `temp_C`.
    pub fn set_header(&mut self, header: &str, value: f64) {
        let (name, unit) = split_header(header);
        self.vars.insert(name, (value, unit));
    }

    /// Parses an assignment like `temp_C=50` or `voltstress=120`.
    pub fn parse_assignment(&mut self, assignment: &str) -> Result<()> {
        let (lhs, rhs) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got `{assignment}`")))?;
        let value: f64 = rhs
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("not a number in `{assignment}`")))?;
        self.set_header(lhs.trim(), value);
        Ok(())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.vars
            .get(name)
            .map(|(v, _)| *v)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))
    }

    pub fn unit(&self, name: &str) -> Result<&Unit> {
        self.vars
            .get(name)
            .map(|(_, u)| u)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))
    }

    /// Reads a temperature variable; the stored unit must be Celsius or Kelvin.
    pub fn temperature(&self, name: &str) -> Result<Temperature> {
        let (value, unit) = self
            .vars
            .get(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))?;
        match unit {
            Unit::Celsius => Ok(Temperature::celsius(*value)),
            Unit::Kelvin => Ok(Temperature::kelvin(*value)),
            other => Err(Error::UnitMismatch(format!(
                "variable `{name}` has unit `{}`, expected a temperature (C or K)",
                other.suffix()
            ))),
        }
    }

    /// Reads a variable as a proportion, converting percentages.
    pub fn proportion(&self, name: &str) -> Result<f64> {
        let (value, unit) = self
            .vars
            .get(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))?;
        match unit {
            Unit::Percent => Ok(value / 100.0),
            Unit::Celsius | Unit::Kelvin => Err(Error::UnitMismatch(format!(
                "variable `{name}` is a temperature, expected a proportion"
            ))),
            _ => Ok(*value),
        }
    }

    /// Adds `name = numerator / denominator`, e.g. voltage stress from voltage and thickness.
    pub fn derive_ratio(&mut self, name: &str, numerator: &str, denominator: &str, unit: Unit) -> Result<()> {
        let den = self.get(denominator)?;
        if den == 0.0 {
            return Err(Error::Domain(format!("`{denominator}` is zero")));
        }
        let value = self.get(numerator)? / den;
        self.set(name, value, unit);
        Ok(())
    }

    /// Unit-suffixed headers in a stable (sorted) order.
    pub fn headers(&self) -> Vec<String> {
        self.vars
            .iter()
            .map(|(name, (_, unit))| header_for(name, unit))
            .collect()
    }

    /// `(header, value)` pairs in the same order as [`Condition::headers`].
    pub fn header_values(&self) -> Vec<(String, f64)> {
        self.vars
            .iter()
            .map(|(name, (value, unit))| (header_for(name, unit), *value))
            .collect()
    }
}

fn header_for(name: &str, unit: &Unit) -> String {
    match unit {
        Unit::Unitless => name.to_string(),
        u => format!("{name}_{}", u.suffix()),
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .header_values()
            .into_iter()
            .map(|(h, v)| format!("{h}={v}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}
