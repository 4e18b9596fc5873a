//! Box-constrained limited-memory BFGS.
//!
//! Projected-gradient L-BFGS: the two-loop recursion supplies the search
//! direction, components pinned at an active bound are frozen, and a
//! backtracking Armijo search runs along the projected path.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub trait Objective {
    fn value(&mut self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` (where the value is `fx`) into `grad` and
    /// returns the number of objective evaluations spent.
    fn gradient(&mut self, x: &[f64], fx: f64, grad: &mut [f64]) -> usize {
        let _ = fx;
        central_difference(|y| self.value(y), x, 1e-6, grad)
    }
}

/// Central-difference gradient with step `h`; returns the evaluation count.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64, grad: &mut [f64]) -> usize {
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = f(&y);
        y[i] = x[i] - h;
        let fm = f(&y);
        y[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    2 * x.len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsbSettings {
    pub max_iter: usize,
    /// Stop once one iteration lowers the objective by less than this.
    pub tol_energy: f64,
    /// Stop once the projected-gradient infinity norm falls below this.
    pub tol_grad: f64,
    pub memory: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Default for LbfgsbSettings {
    fn default() -> Self {
        LbfgsbSettings {
            max_iter: 500,
            tol_energy: 1e-10,
            tol_grad: 1e-8,
            memory: 50,
            lower: -2.0 * std::f64::consts::PI,
            upper: 2.0 * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    EnergyStep,
    Gradient,
    MaxIterations,
    LineSearch,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_fev: usize,
    pub n_it: usize,
    /// `|f_k - f_{k-1}|` of the final accepted iteration.
    pub last_step: f64,
    pub grad_inf: f64,
    pub termination: Termination,
    /// Objective after each accepted iteration (entry 0 is the start).
    pub trace: Vec<f64>,
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::EnergyStep | Termination::Gradient)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn minimize<O: Objective>(
    obj: &mut O,
    x0: &[f64],
    settings: &LbfgsbSettings,
    mut callback: impl FnMut(usize, &[f64], f64),
) -> Result<Outcome> {
    let n = x0.len();
    let (lo, hi) = (settings.lower, settings.upper);
    let project = |v: &mut [f64]| v.iter_mut().for_each(|x| *x = x.clamp(lo, hi));

    let mut x = x0.to_vec();
    project(&mut x);
    let mut f = obj.value(&x);
    let mut n_fev = 1;
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut g = vec![0.0; n];
    n_fev += obj.gradient(&x, f, &mut g);

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut trace = vec![f];
    let mut last_step = f64::INFINITY;
    let mut n_it = 0;
    let mut termination = Termination::MaxIterations;

    let projected = |x: &[f64], g: &[f64]| -> Vec<f64> {
        x.iter()
            .zip(g)
            .map(|(xi, gi)| if (*xi <= lo && *gi > 0.0) || (*xi >= hi && *gi < 0.0) { 0.0 } else { *gi })
            .collect()
    };

    if n == 0 {
        return Ok(Outcome { x, f, n_fev, n_it, last_step: 0.0, grad_inf: 0.0, termination: Termination::Gradient, trace });
    }

    while n_it < settings.max_iter {
        let pg = projected(&x, &g);
        let grad_inf = pg.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if grad_inf < settings.tol_grad {
            termination = Termination::Gradient;
            break;
        }

        // two-loop recursion on the projected gradient
        let mut d = pg.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        d.iter_mut().for_each(|di| *di = -*di);
        for i in 0..n {
            if (x[i] <= lo && d[i] < 0.0) || (x[i] >= hi && d[i] > 0.0) {
                d[i] = 0.0;
            }
        }
        if dot(&d, &pg) >= 0.0 {
            history.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        // weak Wolfe bracketing: Armijo decrease plus a curvature check that
        // lets the step grow in flat valleys
        let mut t = if history.is_empty() { (1.0 / grad_inf).min(1.0) } else { 1.0 };
        let (mut t_lo, mut t_hi) = (0.0f64, f64::INFINITY);
        let mut accepted: Option<(Vec<f64>, f64, Vec<f64>)> = None;
        let mut fallback: Option<(Vec<f64>, f64, Vec<f64>)> = None;
        for _ in 0..60 {
            let mut xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            project(&mut xt);
            let ft = obj.value(&xt);
            n_fev += 1;
            if !ft.is_finite() {
                return Err(Error::NonFiniteObjective { iteration: n_it + 1 });
            }
            let step: Vec<f64> = xt.iter().zip(&x).map(|(b, a)| b - a).collect();
            let slope0 = dot(&g, &step);
            if ft > f + 1e-4 * slope0 || ft > f || slope0 >= 0.0 {
                t_hi = t;
                let curvature = ft - f - slope0;
                let ratio = if curvature > 0.0 { -slope0 / (2.0 * curvature) } else { 0.5 };
                t = if t_lo > 0.0 { 0.5 * (t_lo + t_hi) } else { t * ratio.clamp(0.1, 0.5) };
                continue;
            }
            let mut gt = vec![0.0; n];
            n_fev += obj.gradient(&xt, ft, &mut gt);
            if dot(&gt, &step) >= 0.9 * slope0 || t_hi - t_lo < 1e-12 * t_hi.min(1e300) {
                accepted = Some((xt, ft, gt));
                break;
            }
            t_lo = t;
            fallback = Some((xt, ft, gt));
            let at_bound = step.iter().zip(&d).any(|(si, di)| (si - t * di).abs() > 1e-15);
            if at_bound {
                break;
            }
            t = if t_hi.is_finite() { 0.5 * (t_lo + t_hi) } else { 2.0 * t };
        }
        let Some((xt, ft, gt)) = accepted.or(fallback) else {
            termination = Termination::LineSearch;
            break;
        };

        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        last_step = (f - ft).abs();
        x = xt;
        f = ft;
        g = gt;
        n_it += 1;
        trace.push(f);
        callback(n_it, &x, f);
        if last_step < settings.tol_energy {
            termination = Termination::EnergyStep;
            break;
        }
    }

    let grad_inf = projected(&x, &g).iter().fold(0.0f64, |a, b| a.max(b.abs()));
    Ok(Outcome { x, f, n_fev, n_it, last_step, grad_inf, termination, trace })
}
