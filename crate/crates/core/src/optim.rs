//! Unconstrained minimization: Nelder-Mead, BFGS and a Newton polish.
//!
//! Objectives may return `+inf` (or NaN) to signal an infeasible point;
//! every method treats such values as a failed trial step.

use nalgebra::{DMatrix, DVector};

pub const MAX_ITERATIONS: usize = 2000;
pub const REL_FTOL: f64 = 1e-10;
pub const SCALED_GTOL: f64 = 1e-5;

pub trait Objective {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change of the objective on the last accepted step.
    pub last_rel_change: f64,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// `max_i |g_i| max(|x_i|, 1) / max(|f|, 1)`.
pub fn scaled_gradient(x: &DVector<f64>, g: &DVector<f64>, f: f64) -> f64 {
    let denom = f.abs().max(1.0);
    x.iter()
        .zip(g.iter())
        .map(|(xi, gi)| gi.abs() * xi.abs().max(1.0) / denom)
        .fold(0.0, f64::max)
}

fn rel_change(old: f64, new: f64) -> f64 {
    (old - new).abs() / new.abs().max(1.0)
}

/// Nelder-Mead simplex with standard coefficients.
///
/// Stops when the spread of simplex values falls below
/// `ftol * max(|f_best|, 1)` or after `max_iter` iterations.
pub fn nelder_mead<F: Fn(&DVector<f64>) -> f64>(
    f: F,
    x0: &DVector<f64>,
    step: f64,
    ftol: f64,
    max_iter: usize,
) -> (DVector<f64>, f64, usize) {
    let n = x0.len();
    let eval = |x: &DVector<f64>| finite_or_inf(f(x));
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), eval(x0)));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += step * x0[i].abs().max(1.0);
        let fx = eval(&x);
        simplex.push((x, fx));
    }
    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut iter = 0;
    while iter < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if best.is_finite() && (worst - best).abs() <= ftol * best.abs().max(1.0) {
            break;
        }
        iter += 1;
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / n as f64;
        let xr = &centroid + (&centroid - &simplex[n].0) * alpha;
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = &centroid + (&xr - &centroid) * gamma;
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = &centroid + (&xr - &centroid) * rho;
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = &centroid + (&simplex[n].0 - &centroid) * rho;
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = &x_best + (&vertex.0 - &x_best) * shrink;
            let fx = eval(&x);
            *vertex = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    (x, fx, iter)
}

/// Backtracking Armijo line search along `dir`.
fn line_search<O: Objective>(obj: &O, x: &DVector<f64>, f: f64, g: &DVector<f64>, dir: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let slope = g.dot(dir);
    if !(slope < 0.0) {
        return None;
    }
    let mut t = 1.0;
    for _ in 0..60 {
        let xn = x + dir * t;
        let fnew = finite_or_inf(obj.value(&xn));
        if fnew <= f + 1e-4 * t * slope {
            return Some((xn, fnew));
        }
        t *= 0.5;
    }
    None
}

/// BFGS with an inverse-Hessian update.
pub fn bfgs<O: Objective>(obj: &O, x0: &DVector<f64>, max_iter: usize) -> Outcome {
    let n = x0.len();
    let mut x = x0.clone();
    let mut f = finite_or_inf(obj.value(&x));
    let mut g = obj.gradient(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut last = f64::INFINITY;
    let mut iterations = 0;
    let mut restarted = false;
    while iterations < max_iter {
        if scaled_gradient(&x, &g, f) < SCALED_GTOL && last < REL_FTOL {
            break;
        }
        iterations += 1;
        let dir = -(&h * &g);
        let Some((xn, fnew)) = line_search(obj, &x, f, &g, &dir) else {
            if restarted {
                break;
            }
            // lost descent: restart from steepest descent scaled by gradient size
            restarted = true;
            let scale = 1.0 / g.norm().max(1.0);
            h = DMatrix::identity(n, n) * scale;
            continue;
        };
        restarted = false;
        let gn = obj.gradient(&xn);
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if iterations == 1 {
                h = DMatrix::identity(n, n) * (sy / y.dot(&y));
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        last = rel_change(f, fnew);
        x = xn;
        f = fnew;
        g = gn;
    }
    let converged = scaled_gradient(&x, &g, f) < SCALED_GTOL && last < REL_FTOL;
    Outcome { x, f, grad: g, iterations, converged, last_rel_change: last }
}

/// Central-difference Jacobian of the gradient, symmetrized.
/// Step for coordinate `i` is `1e-4 (1 + |x_i|)`.
pub fn fd_hessian<G: Fn(&DVector<f64>) -> DVector<f64>>(grad: G, x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let step = 1e-4 * (1.0 + x[i].abs());
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += step;
        xm[i] -= step;
        let col = (grad(&xp) - grad(&xm)) / (2.0 * step);
        h.set_column(i, &col);
    }
    (&h + h.transpose()) * 0.5
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient<F: Fn(&DVector<f64>) -> f64>(f: F, x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| {
            let step = 1e-6 * (1.0 + x[i].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            (f(&xp) - f(&xm)) / (2.0 * step)
        }),
    )
}

/// Damped Newton iterations using the finite-difference Hessian of the
/// analytic gradient. Meant for the final few digits after BFGS.
pub fn newton_polish<O: Objective>(obj: &O, start: Outcome, max_iter: usize) -> Outcome {
    let Outcome { mut x, mut f, grad: mut g, mut iterations, mut last_rel_change, .. } = start;
    let n = x.len();
    for _ in 0..max_iter {
        if scaled_gradient(&x, &g, f) < SCALED_GTOL * 1e-3 && last_rel_change < REL_FTOL {
            break;
        }
        iterations += 1;
        let h = fd_hessian(|p| obj.gradient(p), &x);
        let mut damping = 0.0;
        let mut accepted = false;
        for _ in 0..20 {
            let shifted = &h + DMatrix::identity(n, n) * damping;
            if let Some(chol) = shifted.cholesky() {
                let dir = -chol.solve(&g);
                if let Some((xn, fnew)) = line_search(obj, &x, f, &g, &dir) {
                    last_rel_change = rel_change(f, fnew);
                    x = xn;
                    f = fnew;
                    g = obj.gradient(&x);
                    accepted = true;
                    break;
                }
            }
            damping = if damping == 0.0 { 1e-6 * h.diagonal().abs().max().max(1e-8) } else { damping * 10.0 };
        }
        if !accepted {
            // no further decrease is representable
            last_rel_change = 0.0;
            break;
        }
    }
    let converged = scaled_gradient(&x, &g, f) < SCALED_GTOL && last_rel_change < REL_FTOL;
    Outcome { x, f, grad: g, iterations, converged, last_rel_change }
}

/// Nelder-Mead, then BFGS, then Newton polish, under a shared iteration cap.
pub fn minimize<O: Objective>(obj: &O, x0: &DVector<f64>) -> Outcome {
    let (x_nm, _, nm_iter) = nelder_mead(|x| obj.value(x), x0, 0.1, 1e-8, 200 * x0.len());
    let mut out = bfgs(obj, &x_nm, MAX_ITERATIONS.saturating_sub(nm_iter));
    out.iterations += nm_iter;
    let remaining = MAX_ITERATIONS.saturating_sub(out.iterations).min(50);
    out.last_rel_change = out.last_rel_change.min(1.0);
    newton_polish(obj, out, remaining)
}
