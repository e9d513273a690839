//! Model formulas for log-location-scale regression.
//!
//! ```text
//! lognormal: mu ~ log(voltstress)
//! weibull: mu ~ arrh(temp) + log(volt); sigma ~ arrh(temp)
//! lognormal: mu ~ log(strain) + sq(log(strain)); sigma ~ log(strain)
//! lognormal: mu ~ boxcox(stroke, 0.5)
//! lognormal: mu ~ arrh(temp) + logit(rh) + arrh(temp):logit(rh)
//! ```
//!
//! Both predictors carry an implicit intercept; `sigma` defaults to a
//! constant and is modeled on the log scale. `boxcox(x)` without a
//! numeric second argument leaves `lambda` open for profiling.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::lifetime::Family;
use crate::relationships::{box_cox_transform, constants::ARRHENIUS_EV};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(String),
    Log(Box<Expr>),
    Logit(Box<Expr>),
    /// `11605 / temp K`; the argument must be a temperature variable.
    Arrh(String),
    Sq(Box<Expr>),
    Inv(Box<Expr>),
    BoxCox(Box<Expr>, Option<f64>),
}

impl Expr {
    pub fn eval(&self, c: &Condition) -> Result<f64> {
        let v = match self {
            Expr::Var(name) => c.get(name)?,
            Expr::Log(e) => {
                let x = e.eval(c)?;
                if x <= 0.0 {
                    return Err(Error::Domain(format!("log of nonpositive value {x} in `{self}`")));
                }
                x.ln()
            }
            Expr::Logit(e) => {
                let x = match e.as_ref() {
                    Expr::Var(name) => c.proportion(name)?,
                    other => other.eval(c)?,
                };
                if !(x > 0.0 && x < 1.0) {
                    return Err(Error::Domain(format!("logit argument {x} outside (0, 1) in `{self}`")));
                }
                (x / (1.0 - x)).ln()
            }
            Expr::Arrh(name) => ARRHENIUS_EV / c.temperature(name)?.to_kelvin()?,
            Expr::Sq(e) => e.eval(c)?.powi(2),
            Expr::Inv(e) => {
                let x = e.eval(c)?;
                if x == 0.0 {
                    return Err(Error::Domain(format!("division by zero in `{self}`")));
                }
                1.0 / x
            }
            Expr::BoxCox(e, lambda) => {
                let lambda = lambda.ok_or_else(|| Error::Formula(format!("lambda is unset in `{self}`")))?;
                box_cox_transform(e.eval(c)?, lambda)?
            }
        };
        Ok(v)
    }

    fn variables(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(n) | Expr::Arrh(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Log(e) | Expr::Logit(e) | Expr::Sq(e) | Expr::Inv(e) | Expr::BoxCox(e, _) => e.variables(out),
        }
    }

    fn boxcox_count(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Arrh(_) => 0,
            Expr::Log(e) | Expr::Logit(e) | Expr::Sq(e) | Expr::Inv(e) => e.boxcox_count(),
            Expr::BoxCox(e, _) => 1 + e.boxcox_count(),
        }
    }

    fn set_lambda(&mut self, value: f64) {
        match self {
            Expr::Var(_) | Expr::Arrh(_) => {}
            Expr::Log(e) | Expr::Logit(e) | Expr::Sq(e) | Expr::Inv(e) => e.set_lambda(value),
            Expr::BoxCox(e, l) => {
                *l = Some(value);
                e.set_lambda(value);
            }
        }
    }

    fn lambda(&self) -> Option<Option<f64>> {
        match self {
            Expr::Var(_) | Expr::Arrh(_) => None,
            Expr::Log(e) | Expr::Logit(e) | Expr::Sq(e) | Expr::Inv(e) => e.lambda(),
            Expr::BoxCox(_, l) => Some(*l),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Log(e) => write!(f, "log({e})"),
            Expr::Logit(e) => write!(f, "logit({e})"),
            Expr::Arrh(n) => write!(f, "arrh({n})"),
            Expr::Sq(e) => write!(f, "sq({e})"),
            Expr::Inv(e) => write!(f, "inv({e})"),
            Expr::BoxCox(e, Some(l)) => write!(f, "boxcox({e}, {l})"),
            Expr::BoxCox(e, None) => write!(f, "boxcox({e})"),
        }
    }
}

/// A product of one or more expressions (`a:b` is an interaction).
#[derive(Debug, Clone, PartialEq)]
pub struct Term(pub Vec<Expr>);

impl Term {
    pub fn eval(&self, c: &Condition) -> Result<f64> {
        self.0.iter().try_fold(1.0, |acc, e| Ok(acc * e.eval(c)?))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(":"))
    }
}

/// Linear predictor: intercept plus terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Predictor {
    pub terms: Vec<Term>,
}

impl Predictor {
    pub fn len(&self) -> usize {
        self.terms.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn row(&self, c: &Condition) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.len());
        row.push(1.0);
        for t in &self.terms {
            let v = t.eval(c)?;
            if !v.is_finite() {
                return Err(Error::Domain(format!("term `{t}` is not finite at {c}")));
            }
            row.push(v);
        }
        Ok(row)
    }

    pub fn names(&self) -> Vec<String> {
        std::iter::once("(Intercept)".to_string())
            .chain(self.terms.iter().map(|t| t.to_string()))
            .collect()
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: Family,
    pub mu: Predictor,
    pub sigma: Predictor,
}

/// Design matrices for a set of conditions.
#[derive(Debug, Clone)]
pub struct Design {
    pub mu: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
}

impl ModelSpec {
    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }

    pub fn n_params(&self) -> usize {
        self.mu.len() + self.sigma.len()
    }

    pub fn param_names(&self) -> Vec<String> {
        let mu = self.mu.names().into_iter().map(|n| format!("mu[{n}]"));
        let sigma = self.sigma.names().into_iter().map(|n| format!("log_sigma[{n}]"));
        mu.chain(sigma).collect()
    }

    /// Condition variables referenced by either predictor.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in self.mu.terms.iter().chain(self.sigma.terms.iter()) {
            for e in &t.0 {
                e.variables(&mut out);
            }
        }
        out
    }

    fn exprs_mut(&mut self) -> impl Iterator<Item = &mut Expr> {
        self.mu
            .terms
            .iter_mut()
            .chain(self.sigma.terms.iter_mut())
            .flat_map(|t| t.0.iter_mut())
    }

    /// `Some(lambda)` when the model has a Box-Cox term; the inner option is
    /// `None` while lambda is still open.
    pub fn boxcox_lambda(&self) -> Option<Option<f64>> {
        self.mu
            .terms
            .iter()
            .chain(self.sigma.terms.iter())
            .flat_map(|t| t.0.iter())
            .find_map(|e| e.lambda())
    }

    /// Copy with the Box-Cox lambda fixed.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if self.boxcox_lambda().is_none() {
            return Err(Error::Formula(format!("`{self}` has no boxcox term")));
        }
        let mut out = self.clone();
        for e in out.exprs_mut() {
            e.set_lambda(lambda);
        }
        Ok(out)
    }

    pub fn rows(&self, c: &Condition) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.mu.row(c)?, self.sigma.row(c)?))
    }

    pub fn design<'a>(&self, conditions: impl IntoIterator<Item = &'a Condition>) -> Result<Design> {
        let mut mu_rows = Vec::new();
        let mut sigma_rows = Vec::new();
        let mut n = 0;
        for c in conditions {
            let (m, s) = self.rows(c)?;
            mu_rows.extend(m);
            sigma_rows.extend(s);
            n += 1;
        }
        Ok(Design {
            mu: DMatrix::from_row_slice(n, self.mu.len(), &mu_rows),
            sigma: DMatrix::from_row_slice(n, self.sigma.len(), &sigma_rows),
        })
    }
}

/// Numerical rank test on column-scaled `x`.
pub fn is_full_column_rank(x: &DMatrix<f64>) -> bool {
    let (n, p) = x.shape();
    if n < p {
        return false;
    }
    let mut scaled = x.clone();
    for mut col in scaled.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 {
            return false;
        }
        col /= norm;
    }
    let sv = scaled.singular_values();
    let max = sv.max();
    sv.iter().all(|&s| s > max * 1e-10 * (n.max(p) as f64))
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: mu ~ {}", self.family, self.mu)?;
        if !self.sigma.terms.is_empty() {
            write!(f, "; sigma ~ {}", self.sigma)?;
        }
        Ok(())
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Formula(format!("expected `family: mu ~ ...`, got `{s}`")))?;
        let family = Family::parse(family)?;
        let mut mu = None;
        let mut sigma = None;
        for part in rest.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (lhs, rhs) = part
                .split_once('~')
                .ok_or_else(|| Error::Formula(format!("expected `name ~ terms`, got `{part}`")))?;
            let pred = parse_predictor(rhs)?;
            let slot = match lhs.trim() {
                "mu" => &mut mu,
                "sigma" => &mut sigma,
                other => return Err(Error::Formula(format!("unknown predictor `{other}`"))),
            };
            if slot.replace(pred).is_some() {
                return Err(Error::Formula(format!("`{}` given twice", lhs.trim())));
            }
        }
        let spec = ModelSpec {
            family,
            mu: mu.ok_or_else(|| Error::Formula("missing `mu ~ ...`".into()))?,
            sigma: sigma.unwrap_or_default(),
        };
        let n_boxcox: usize = spec
            .mu
            .terms
            .iter()
            .chain(spec.sigma.terms.iter())
            .flat_map(|t| t.0.iter())
            .map(Expr::boxcox_count)
            .sum();
        if n_boxcox > 1 {
            return Err(Error::Formula("boxcox may appear in at most one term".into()));
        }
        Ok(spec)
    }
}

fn split_top(s: &str, sep: char) -> Result<Vec<&str>> {
    let mut depth = 0i32;
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Formula(format!("unbalanced `)` in `{s}`")));
                }
            }
            // keep exponents such as 1e+3 together
            c if c == sep && depth == 0 && !(sep == '+' && i > 0 && matches!(bytes[i - 1], b'e' | b'E') && i >= 2 && bytes[i - 2].is_ascii_digit()) => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Formula(format!("unbalanced `(` in `{s}`")));
    }
    out.push(&s[start..]);
    Ok(out)
}

fn parse_predictor(s: &str) -> Result<Predictor> {
    let mut terms = Vec::new();
    for raw in split_top(s, '+')? {
        let raw = raw.trim();
        if raw.is_empty() {
            return Err(Error::Formula(format!("empty term in `{s}`")));
        }
        if raw == "1" {
            continue;
        }
        let factors = split_top(raw, ':')?
            .into_iter()
            .map(|f| parse_expr(f.trim()))
            .collect::<Result<Vec<_>>>()?;
        let term = Term(factors);
        if terms.contains(&term) {
            return Err(Error::Formula(format!("duplicate term `{term}`")));
        }
        terms.push(term);
    }
    Ok(Predictor { terms })
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '.')
}

fn parse_expr(s: &str) -> Result<Expr> {
    if is_identifier(s) {
        return Ok(Expr::Var(s.to_string()));
    }
    let open = s
        .find('(')
        .filter(|_| s.ends_with(')'))
        .ok_or_else(|| Error::Formula(format!("cannot parse term `{s}`")))?;
    let func = s[..open].trim();
    let inner = &s[open + 1..s.len() - 1];
    let args = split_top(inner, ',')?;
    let one = |args: &[&str]| -> Result<Box<Expr>> {
        match args {
            [a] => Ok(Box::new(parse_expr(a.trim())?)),
            _ => Err(Error::Formula(format!("`{func}` takes one argument in `{s}`"))),
        }
    };
    match func {
        "log" => Ok(Expr::Log(one(&args)?)),
        "logit" => Ok(Expr::Logit(one(&args)?)),
        "sq" => Ok(Expr::Sq(one(&args)?)),
        "inv" => Ok(Expr::Inv(one(&args)?)),
        "arrh" => match one(&args)?.as_ref() {
            Expr::Var(n) => Ok(Expr::Arrh(n.clone())),
            _ => Err(Error::Formula(format!("arrh expects a temperature variable in `{s}`"))),
        },
        "boxcox" => {
            let (x, lambda) = match args.as_slice() {
                [x] => (x, None),
                [x, l] if l.trim() == "lambda" => (x, None),
                [x, l] => {
                    let v: f64 = l
                        .trim()
                        .parse()
                        .map_err(|_| Error::Formula(format!("bad lambda `{}` in `{s}`", l.trim())))?;
                    (x, Some(v))
                }
                _ => return Err(Error::Formula(format!("boxcox takes (x) or (x, lambda) in `{s}`"))),
            };
            Ok(Expr::BoxCox(Box::new(parse_expr(x.trim())?), lambda))
        }
        other => Err(Error::Formula(format!("unknown function `{other}`"))),
    }
}
