//! Maximum-likelihood fitting of log-location-scale regression models to
//! right-censored life data.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::condition::Condition;
use crate::error::{Error, Result};
use crate::formula::{is_full_column_rank, ModelSpec};
use crate::lifetime::{norm_cdf, Family};
use crate::optim::{self, fd_hessian, Objective};

/// Two-sided 95% normal critical value.
pub const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Failed,
    Censored,
}

impl Status {
    pub fn parse(s: &str) -> Result<Status> {
        match s.trim().to_ascii_lowercase().as_str() {
            "failed" | "f" | "1" => Ok(Status::Failed),
            "censored" | "c" | "0" => Ok(Status::Censored),
            other => Err(Error::Data(format!("unknown status `{other}`, expected failed or censored"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Failed => "failed",
            Status::Censored => "censored",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifeRecord {
    pub time: f64,
    pub status: Status,
    pub condition: Condition,
}

impl LifeRecord {
    pub fn new(time: f64, status: Status, condition: Condition) -> Result<Self> {
        if !(time.is_finite() && time > 0.0) {
            return Err(Error::Data(format!("record time must be positive and finite, got {time}")));
        }
        Ok(Self { time, status, condition })
    }

    pub fn failed(time: f64, condition: Condition) -> Result<Self> {
        Self::new(time, Status::Failed, condition)
    }

    pub fn censored(time: f64, condition: Condition) -> Result<Self> {
        Self::new(time, Status::Censored, condition)
    }

    pub fn is_failed(&self) -> bool {
        self.status == Status::Failed
    }
}

/// Log-time response and design matrices bound to one dataset.
#[derive(Debug, Clone)]
pub struct CensoredModel {
    pub family: Family,
    y: DVector<f64>,
    failed: Vec<bool>,
    xmu: DMatrix<f64>,
    xsig: DMatrix<f64>,
}

impl CensoredModel {
    pub fn new(data: &[LifeRecord], spec: &ModelSpec) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Data("no life records".into()));
        }
        for r in data {
            if !(r.time.is_finite() && r.time > 0.0) {
                return Err(Error::Data(format!("record time must be positive, got {}", r.time)));
            }
        }
        let design = spec.design(data.iter().map(|r| &r.condition))?;
        Ok(Self {
            family: spec.family,
            y: DVector::from_iterator(data.len(), data.iter().map(|r| r.time.ln())),
            failed: data.iter().map(LifeRecord::is_failed).collect(),
            xmu: design.mu,
            xsig: design.sigma,
        })
    }

    pub fn n_params(&self) -> usize {
        self.xmu.ncols() + self.xsig.ncols()
    }

    fn split<'a>(&self, theta: &'a DVector<f64>) -> (nalgebra::DVectorView<'a, f64>, nalgebra::DVectorView<'a, f64>) {
        let p = self.xmu.ncols();
        (theta.rows(0, p), theta.rows(p, self.xsig.ncols()))
    }

    /// Negative log-likelihood on the time scale; `+inf` when any
    /// `sigma(x)` leaves the representable positive range.
    pub fn nll(&self, theta: &DVector<f64>) -> f64 {
        let (beta, gamma) = self.split(theta);
        let mu = &self.xmu * beta;
        let log_sigma = &self.xsig * gamma;
        let mut total = 0.0;
        for i in 0..self.y.len() {
            let sigma = log_sigma[i].exp();
            if !(sigma > 0.0 && sigma.is_finite()) {
                return f64::INFINITY;
            }
            let z = (self.y[i] - mu[i]) / sigma;
            total += if self.failed[i] {
                -self.family.log_pdf(z) + log_sigma[i] + self.y[i]
            } else {
                -self.family.log_sf(z)
            };
        }
        if total.is_finite() {
            total
        } else {
            f64::INFINITY
        }
    }

    pub fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let (beta, gamma) = self.split(theta);
        let mu = &self.xmu * beta;
        let log_sigma = &self.xsig * gamma;
        let n = self.y.len();
        let mut d_mu = DVector::zeros(n);
        let mut d_ls = DVector::zeros(n);
        for i in 0..n {
            let sigma = log_sigma[i].exp();
            let z = (self.y[i] - mu[i]) / sigma;
            let (g, extra) = if self.failed[i] {
                (self.family.score_pdf(z), 1.0)
            } else {
                (self.family.hazard(z), 0.0)
            };
            d_mu[i] = -g / sigma;
            d_ls[i] = -g * z + extra;
        }
        let mut out = DVector::zeros(self.n_params());
        out.rows_mut(0, self.xmu.ncols()).copy_from(&(self.xmu.transpose() * d_mu));
        out.rows_mut(self.xmu.ncols(), self.xsig.ncols()).copy_from(&(self.xsig.transpose() * d_ls));
        out
    }
}

impl Objective for CensoredModel {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.nll(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        CensoredModel::gradient(self, x)
    }
}

pub fn neg_log_likelihood(data: &[LifeRecord], spec: &ModelSpec, theta: &[f64]) -> Result<f64> {
    let model = CensoredModel::new(data, spec)?;
    if theta.len() != model.n_params() {
        return Err(Error::Config(format!(
            "expected {} parameters for `{spec}`, got {}",
            model.n_params(),
            theta.len()
        )));
    }
    Ok(model.nll(&DVector::from_column_slice(theta)))
}

/// Minimization in centered/scaled design coordinates: `theta = M phi`.
struct Standardized<'a> {
    model: &'a CensoredModel,
    m: DMatrix<f64>,
}

impl<'a> Standardized<'a> {
    fn new(model: &'a CensoredModel) -> Self {
        let p = model.xmu.ncols();
        let q = model.xsig.ncols();
        let mut m = DMatrix::zeros(p + q, p + q);
        for (offset, x) in [(0, &model.xmu), (p, &model.xsig)] {
            m[(offset, offset)] = 1.0;
            for j in 1..x.ncols() {
                let col = x.column(j);
                let mean = col.mean();
                let sd = col.variance().sqrt();
                let sd = if sd > 0.0 { sd } else { 1.0 };
                m[(offset + j, offset + j)] = 1.0 / sd;
                m[(offset, offset + j)] = -mean / sd;
            }
        }
        Self { model, m }
    }

    fn theta(&self, phi: &DVector<f64>) -> DVector<f64> {
        &self.m * phi
    }

    fn phi(&self, theta: &DVector<f64>) -> DVector<f64> {
        self.m.clone().lu().solve(theta).unwrap_or_else(|| theta.clone())
    }
}

impl Objective for Standardized<'_> {
    fn value(&self, phi: &DVector<f64>) -> f64 {
        self.model.nll(&self.theta(phi))
    }
    fn gradient(&self, phi: &DVector<f64>) -> DVector<f64> {
        self.m.transpose() * self.model.gradient(&self.theta(phi))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub model: ModelSpec,
    pub family: Family,
    pub names: Vec<String>,
    pub estimates: Vec<f64>,
    pub se: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the log-likelihood gradient at the estimates.
    pub grad_max_norm: f64,
    pub scaled_gradient: f64,
    pub warnings: Vec<String>,
    pub n_records: usize,
    pub n_failed: usize,
    /// Observed range of each formula variable, used to flag extrapolation.
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl FitResult {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.estimates[i])
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let n = self.estimates.len();
        DMatrix::from_fn(n, n, |i, j| self.covariance[i][j])
    }

    /// Coefficients of the `mu` predictor.
    pub fn beta(&self) -> &[f64] {
        &self.estimates[..self.model.mu.len()]
    }

    /// Coefficients of the `log sigma` predictor.
    pub fn gamma(&self) -> &[f64] {
        &self.estimates[self.model.mu.len()..]
    }

    /// `sigma` for constant-scale models.
    pub fn sigma(&self) -> Option<f64> {
        (self.model.sigma.terms.is_empty()).then(|| self.gamma()[0].exp())
    }
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    if !is_full_column_rank(x) {
        return None;
    }
    let xtx = x.transpose() * x;
    let beta = xtx.cholesky()?.solve(&(x.transpose() * y));
    let resid = y - x * &beta;
    let dof = (x.nrows() as f64 - x.ncols() as f64).max(1.0);
    Some((beta, (resid.norm_squared() / dof).sqrt()))
}

fn select_rows(x: &DMatrix<f64>, keep: &[bool]) -> DMatrix<f64> {
    let rows: Vec<usize> = keep.iter().enumerate().filter(|(_, k)| **k).map(|(i, _)| i).collect();
    x.select_rows(rows.iter())
}

/// Default start: OLS of log time on the `mu` design over failed records
/// (all records when that is rank deficient); `log sigma` from the residual
/// spread inflated by `1 / fraction failed`.
pub fn default_init(model: &CensoredModel) -> DVector<f64> {
    let n = model.y.len();
    let n_failed = model.failed.iter().filter(|f| **f).count();
    let frac = n_failed as f64 / n as f64;
    let xf = select_rows(&model.xmu, &model.failed);
    let yf = DVector::from_iterator(n_failed, model.y.iter().zip(&model.failed).filter(|(_, f)| **f).map(|(y, _)| *y));
    let (beta, sd) = ols(&xf, &yf)
        .or_else(|| ols(&model.xmu, &model.y))
        .unwrap_or_else(|| {
            let mut b = DVector::zeros(model.xmu.ncols());
            b[0] = model.y.mean();
            (b, model.y.variance().sqrt())
        });
    let sd = if sd.is_finite() && sd > 1e-8 { sd } else { 1.0 };
    let mut theta = DVector::zeros(model.n_params());
    theta.rows_mut(0, beta.len()).copy_from(&beta);
    theta[beta.len()] = (sd / frac.max(1e-3)).ln();
    theta
}

/// Inverse observed information. The Hessian is differenced in the
/// standardized coordinates and mapped back, `cov_theta = M cov_phi M'`.
fn covariance(std: &Standardized<'_>, phi: &DVector<f64>, warnings: &mut Vec<String>) -> DMatrix<f64> {
    let h = fd_hessian(|p| std.gradient(p), phi);
    let n = h.nrows();
    if !h.iter().all(|v| v.is_finite()) {
        warnings.push("observed information is not finite; covariance unavailable".into());
        return DMatrix::from_element(n, n, f64::NAN);
    }
    let cov = match h.clone().cholesky() {
        Some(chol) => chol.inverse(),
        None => {
            warnings.push("observed information is not positive definite; covariance from pseudo-inverse".into());
            let eig = h.symmetric_eigen();
            let max = eig.eigenvalues.abs().max();
            let inv = eig.eigenvalues.map(|l| if l.abs() > 1e-12 * max { 1.0 / l } else { 0.0 });
            &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
        }
    };
    let cov = &std.m * cov * std.m.transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    let min_eig = cov.clone().symmetric_eigen().eigenvalues.min();
    if min_eig < -1e-8 {
        warnings.push(format!("covariance is not positive semidefinite (min eigenvalue {min_eig:e})"));
    }
    cov
}

fn variable_ranges(data: &[LifeRecord], spec: &ModelSpec) -> BTreeMap<String, (f64, f64)> {
    let mut out = BTreeMap::new();
    for var in spec.variables() {
        let values: Vec<f64> = data.iter().filter_map(|r| r.condition.get(&var).ok()).collect();
        if values.is_empty() {
            continue;
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.insert(var, (lo, hi));
    }
    out
}

/// Fits `spec` to `data` by maximum likelihood.
///
/// Returns [`Error::NonConvergence`] carrying the best point found when the
/// convergence test fails within the iteration cap.
pub fn fit_ml(data: &[LifeRecord], spec: &ModelSpec, init: Option<&[f64]>) -> Result<FitResult> {
    let model = CensoredModel::new(data, spec)?;
    let n_failed = model.failed.iter().filter(|f| **f).count();
    if n_failed == 0 {
        return Err(Error::Inestimable("all records are censored; at least one failure is required".into()));
    }
    if !is_full_column_rank(&model.xmu) {
        return Err(Error::Inestimable(format!("design for mu in `{spec}` is rank deficient on these data")));
    }
    if !is_full_column_rank(&model.xsig) {
        return Err(Error::Inestimable(format!("design for sigma in `{spec}` is rank deficient on these data")));
    }
    let theta0 = match init {
        Some(v) if v.len() == model.n_params() => DVector::from_column_slice(v),
        Some(v) => {
            return Err(Error::Config(format!(
                "init has {} values, `{spec}` needs {}",
                v.len(),
                model.n_params()
            )))
        }
        None => default_init(&model),
    };
    if !model.nll(&theta0).is_finite() {
        return Err(Error::Config("log-likelihood is not finite at the initial values".into()));
    }

    let std = Standardized::new(&model);
    let out = optim::minimize(&std, &std.phi(&theta0));
    let theta = std.theta(&out.x);
    let grad = model.gradient(&theta);
    let f = model.nll(&theta);
    let scaled = optim::scaled_gradient(&theta, &grad, f);

    let mut warnings = Vec::new();
    if n_failed < model.n_params() {
        warnings.push(format!("only {n_failed} failures for {} parameters", model.n_params()));
    }
    let cov = covariance(&std, &out.x, &mut warnings);
    let n = theta.len();
    let result = FitResult {
        model: spec.clone(),
        family: spec.family,
        names: spec.param_names(),
        estimates: theta.iter().copied().collect(),
        se: (0..n).map(|i| cov[(i, i)].max(0.0).sqrt()).collect(),
        covariance: (0..n).map(|i| (0..n).map(|j| cov[(i, j)]).collect()).collect(),
        loglik: -f,
        converged: out.converged && scaled < optim::SCALED_GTOL,
        iterations: out.iterations,
        grad_max_norm: grad.amax(),
        scaled_gradient: scaled,
        warnings,
        n_records: data.len(),
        n_failed,
        ranges: variable_ranges(data, spec),
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::NonConvergence(Box::new(result)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileEstimate {
    pub p: f64,
    pub estimate: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
    /// Standard error of `log t_p`.
    pub log_se: f64,
    /// The use condition lies outside the observed range of some variable.
    pub extrapolated: bool,
}

/// `t_p` at `use_condition` with delta-method standard error and a 95%
/// normal-approximation interval on the log scale.
pub fn quantile_at_use(fit: &FitResult, use_condition: &Condition, p: f64) -> Result<QuantileEstimate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let (xmu, xsig) = fit.model.rows(use_condition)?;
    let mu: f64 = xmu.iter().zip(fit.beta()).map(|(a, b)| a * b).sum();
    let sigma = xsig.iter().zip(fit.gamma()).map(|(a, b)| a * b).sum::<f64>().exp();
    let zp = fit.family.quantile(p);
    let log_tp = mu + zp * sigma;
    let grad: Vec<f64> = xmu.iter().copied().chain(xsig.iter().map(|x| zp * sigma * x)).collect();
    let cov = fit.covariance_matrix();
    let g = DVector::from_vec(grad);
    let var = (g.transpose() * &cov * &g)[(0, 0)];
    let log_se = var.max(0.0).sqrt();
    let estimate = log_tp.exp();
    let extrapolated = fit.ranges.iter().any(|(name, (lo, hi))| {
        use_condition.get(name).map(|v| v < *lo || v > *hi).unwrap_or(false)
    });
    Ok(QuantileEstimate {
        p,
        estimate,
        se: estimate * log_se,
        lower: (log_tp - Z_975 * log_se).exp(),
        upper: (log_tp + Z_975 * log_se).exp(),
        log_se,
        extrapolated,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfilePoint {
    pub lambda: f64,
    /// Maximized log-likelihood at this lambda (best point when not converged).
    pub loglik: f64,
    pub converged: bool,
    pub quantile: Option<QuantileEstimate>,
    pub error: Option<String>,
}

fn require_boxcox(spec: &ModelSpec) -> Result<()> {
    match spec.boxcox_lambda() {
        Some(_) => Ok(()),
        None => Err(Error::Formula(format!("`{spec}` has no boxcox term to profile"))),
    }
}

/// Profile log-likelihood over a grid of Box-Cox lambdas, refitting all
/// other parameters at each point. Failures are recorded per point.
pub fn profile_lambda(
    data: &[LifeRecord],
    spec: &ModelSpec,
    grid: &[f64],
    use_condition: &Condition,
    p: f64,
) -> Result<Vec<ProfilePoint>> {
    require_boxcox(spec)?;
    let mut points: Vec<(usize, ProfilePoint)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let point = match spec.with_lambda(lambda).and_then(|s| fit_ml(data, &s, None)) {
                Ok(fit) => ProfilePoint {
                    lambda,
                    loglik: fit.loglik,
                    converged: true,
                    quantile: quantile_at_use(&fit, use_condition, p).ok(),
                    error: None,
                },
                Err(Error::NonConvergence(best)) => ProfilePoint {
                    lambda,
                    loglik: best.loglik,
                    converged: false,
                    quantile: quantile_at_use(&best, use_condition, p).ok(),
                    error: Some("did not converge".into()),
                },
                Err(e) => ProfilePoint { lambda, loglik: f64::NAN, converged: false, quantile: None, error: Some(e.to_string()) },
            };
            (i, point)
        })
        .collect();
    points.sort_by_key(|(i, _)| *i);
    Ok(points.into_iter().map(|(_, p)| p).collect())
}

/// Default profile grid `-1, -0.9, ..., 2`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=30).map(|i| -1.0 + i as f64 / 10.0).collect()
}

/// Maximizes the profile log-likelihood over `lambda` in `[lo, hi]`: a
/// coarse scan followed by golden-section refinement around the best point.
pub fn fit_lambda_free(data: &[LifeRecord], spec: &ModelSpec, lo: f64, hi: f64) -> Result<(f64, FitResult)> {
    require_boxcox(spec)?;
    if !(lo < hi) {
        return Err(Error::Config("lambda search interval must satisfy lo < hi".into()));
    }
    let ll = |lambda: f64| {
        spec.with_lambda(lambda)
            .and_then(|s| fit_ml(data, &s, None))
            .map(|f| f.loglik)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let steps = 30;
    let h = (hi - lo) / steps as f64;
    let scan: Vec<(f64, f64)> = (0..=steps).into_par_iter().map(|i| (lo + i as f64 * h, ll(lo + i as f64 * h))).collect();
    let best = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (mut a, mut b) = (scan[best.saturating_sub(1)].0, scan[(best + 1).min(steps)].0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (ll(c), ll(d));
    while b - a > 1e-5 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = ll(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = ll(d);
        }
    }
    let mut lambda = 0.5 * (a + b);
    if scan[best].1 > ll(lambda) {
        lambda = scan[best].0;
    }
    let fit = fit_ml(data, &spec.with_lambda(lambda)?, None)?;
    Ok((lambda, fit))
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapSummary {
    pub p: f64,
    pub replicates: usize,
    pub failed_refits: usize,
    /// Per-replicate estimates in replicate order; `None` when the refit failed.
    pub estimates: Vec<Option<f64>>,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Nonparametric (case-resampling) bootstrap of the use-condition quantile.
/// Replicate `r` draws from its own ChaCha stream, so results do not depend
/// on thread scheduling.
pub fn bootstrap_quantile(
    data: &[LifeRecord],
    spec: &ModelSpec,
    use_condition: &Condition,
    p: f64,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    if data.is_empty() {
        return Err(Error::Data("no life records".into()));
    }
    let estimates: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let sample: Vec<LifeRecord> = (0..data.len()).map(|_| data[rng.random_range(0..data.len())].clone()).collect();
            let fit = match fit_ml(&sample, spec, None) {
                Ok(f) => f,
                Err(Error::NonConvergence(best)) => *best,
                Err(_) => return None,
            };
            quantile_at_use(&fit, use_condition, p).ok().map(|q| q.estimate)
        })
        .collect();
    let mut ok: Vec<f64> = estimates.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    ok.sort_by(f64::total_cmp);
    Ok(BootstrapSummary {
        p,
        replicates,
        failed_refits: replicates - ok.len(),
        estimates,
        median: percentile(&ok, 0.5),
        lower: percentile(&ok, 0.025),
        upper: percentile(&ok, 0.975),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReciprocityTest {
    pub p_hat: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
    /// Wald statistic `(p_hat - 1) / se`.
    pub wald_z: f64,
    pub p_value: f64,
    pub reject_at_5pct: bool,
    pub fit: FitResult,
}

/// Tests reciprocity (`p = 1`) from failure dosages observed at several
/// concentration factors.
///
/// Each record's `time` is the total dosage at failure (or censoring) and
/// its condition carries `cf_var`. Failure occurs when `CF^p D` reaches a
/// log-location-scale threshold, so `log D = mu0 - p log CF + sigma e`.
pub fn reciprocity_test(data: &[LifeRecord], cf_var: &str, family: Family) -> Result<ReciprocityTest> {
    let mut levels: Vec<f64> = data.iter().map(|r| r.condition.get(cf_var)).collect::<Result<_>>()?;
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 2 {
        return Err(Error::Inestimable(format!("reciprocity test needs at least two distinct `{cf_var}` levels")));
    }
    let spec = ModelSpec::parse(&format!("{family}: mu ~ log({cf_var})"))?;
    let fit = fit_ml(data, &spec, None)?;
    let p_hat = -fit.estimates[1];
    let se = fit.se[1];
    let wald_z = (p_hat - 1.0) / se;
    let p_value = 2.0 * norm_cdf(-wald_z.abs());
    Ok(ReciprocityTest {
        p_hat,
        se,
        lower: p_hat - Z_975 * se,
        upper: p_hat + Z_975 * se,
        wald_z,
        p_value,
        reject_at_5pct: wald_z.abs() > Z_975,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::Unit;
    use crate::optim::fd_gradient;
    use approx::assert_relative_eq;

    fn x(v: f64) -> Condition {
        Condition::new().with("x", v, Unit::Unitless)
    }

    #[test]
    fn single_record_likelihoods() {
        let spec = ModelSpec::parse("lognormal: mu ~ 1").unwrap();
        let f = [LifeRecord::failed(1.0, x(0.0)).unwrap()];
        assert_relative_eq!(neg_log_likelihood(&f, &spec, &[0.0, 0.0]).unwrap(), 0.918_938_533_204_672_7, max_relative = 1e-14);
        let c = [LifeRecord::censored(1.0, x(0.0)).unwrap()];
        assert_relative_eq!(neg_log_likelihood(&c, &spec, &[0.0, 0.0]).unwrap(), std::f64::consts::LN_2, max_relative = 1e-14);
        assert_eq!(neg_log_likelihood(&f, &spec, &[0.0, 1e6]).unwrap(), f64::INFINITY);
        assert!(neg_log_likelihood(&f, &spec, &[0.0]).is_err());
    }

    #[test]
    fn all_censored_is_inestimable() {
        let spec = ModelSpec::parse("lognormal: mu ~ 1").unwrap();
        let data: Vec<_> = (1..30).map(|i| LifeRecord::censored(i as f64, x(0.0)).unwrap()).collect();
        assert!(neg_log_likelihood(&data, &spec, &[1.0, 0.0]).unwrap().is_finite());
        assert!(matches!(fit_ml(&data, &spec, None), Err(Error::Inestimable(_))));
    }

    #[test]
    fn uncensored_lognormal_matches_least_squares() {
        let spec = ModelSpec::parse("lognormal: mu ~ x").unwrap();
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let noise: [f64; 6] = [0.3, -0.2, 0.1, -0.4, 0.25, -0.05];
        let data: Vec<_> = xs
            .iter()
            .zip(noise)
            .map(|(&v, e)| LifeRecord::failed((2.0 - 0.5 * v + e).exp(), x(v)).unwrap())
            .collect();
        let fit = fit_ml(&data, &spec, None).unwrap();
        let xm = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y = DVector::from_iterator(6, data.iter().map(|r| r.time.ln()));
        let beta = (xm.transpose() * &xm).cholesky().unwrap().solve(&(xm.transpose() * &y));
        assert_relative_eq!(fit.estimates[0], beta[0], max_relative = 1e-8);
        assert_relative_eq!(fit.estimates[1], beta[1], max_relative = 1e-8);
        let resid = &y - &xm * &beta;
        assert_relative_eq!(fit.sigma().unwrap(), (resid.norm_squared() / 6.0).sqrt(), max_relative = 1e-7);
        let q = quantile_at_use(&fit, &x(3.0), 0.5).unwrap();
        assert_relative_eq!(q.estimate, (beta[0] + 3.0 * beta[1]).exp(), max_relative = 1e-8);
        assert!(!q.extrapolated);
        assert!(quantile_at_use(&fit, &x(10.0), 0.5).unwrap().extrapolated);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let data: Vec<_> = (0..40)
            .map(|i| {
                let v = (i % 4) as f64;
                let t = (1.0 + 0.3 * v + 0.1 * ((i * 7) % 11) as f64).exp();
                if i % 3 == 0 {
                    LifeRecord::censored(t, x(v)).unwrap()
                } else {
                    LifeRecord::failed(t, x(v)).unwrap()
                }
            })
            .collect();
        for family in ["lognormal", "weibull"] {
            let spec = ModelSpec::parse(&format!("{family}: mu ~ x; sigma ~ x")).unwrap();
            let model = CensoredModel::new(&data, &spec).unwrap();
            for k in 0..10 {
                let th = DVector::from_vec(vec![1.0 + 0.1 * k as f64, 0.2 - 0.05 * k as f64, -0.5 + 0.07 * k as f64, 0.03 * k as f64]);
                let a = model.gradient(&th);
                let n = fd_gradient(|t| model.nll(t), &th);
                for i in 0..4 {
                    assert!((a[i] - n[i]).abs() <= 1e-5 * a[i].abs().max(1.0), "{family} k={k} i={i}");
                }
            }
        }
    }
}
