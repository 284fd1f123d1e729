//! Deterministic Nelder–Mead.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evaluations: usize,
    /// Converged once every vertex is within this relative distance of the
    /// best one, coordinate by coordinate.
    pub x_tolerance: f64,
    /// Initial simplex edge as a fraction of each seed coordinate.
    pub initial_step: f64,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 1000,
            x_tolerance: 1e-6,
            initial_step: 0.05,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counted<F> {
    fn call(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        (self.f)(x).map_err(|e| match e {
            e @ Error::Optimization { .. } => e,
            other => Error::Optimization { kappa: x.to_vec(), source: Box::new(other) },
        })
    }
}

/// Minimizes `f` from `x0`. The seed is always a vertex, so the result is
/// never worse than `f(x0)`. Objective errors abort the search and carry the
/// offending point.
pub fn nelder_mead<F>(f: F, x0: &[f64], options: &SimplexOptions) -> Result<SimplexOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if x0.is_empty() {
        return Err(Error::Precondition("cannot optimize over zero parameters".into()));
    }
    let mut f = Counted { f, evaluations: 0 };
    let mut best_x = x0.to_vec();
    let mut best_f = f.call(x0)?;
    let mut converged = false;
    for round in 0..=options.restarts {
        if f.evaluations >= options.max_evaluations {
            break;
        }
        let (x, value, done) = run(&mut f, &best_x, best_f, options)?;
        let improved = value < best_f;
        let significant = best_f - value > 1e-12 * best_f.abs();
        if improved {
            best_x = x;
            best_f = value;
        }
        converged = done;
        if !done || (round > 0 && !significant) {
            break;
        }
    }
    Ok(SimplexOutcome {
        x: best_x,
        value: best_f,
        evaluations: f.evaluations,
        converged,
    })
}

fn run<F>(
    f: &mut Counted<F>,
    start: &[f64],
    start_value: f64,
    options: &SimplexOptions,
) -> Result<(Vec<f64>, f64, bool)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = start.len();
    let budget = options.max_evaluations;
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.to_vec(), start_value)];
    for i in 0..n {
        if f.evaluations >= budget {
            break;
        }
        let mut v = start.to_vec();
        v[i] = if v[i] != 0.0 { v[i] * (1.0 + options.initial_step) } else { 2.5e-4 };
        let fv = f.call(&v)?;
        simplex.push((v, fv));
    }
    if simplex.len() < n + 1 {
        return Ok(best_of(simplex, false));
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if is_small(&simplex, options.x_tolerance) {
            return Ok(best_of(simplex, true));
        }
        if f.evaluations >= budget {
            return Ok(best_of(simplex, false));
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|v| v.0[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
        };

        let xr = along(1.0);
        let fr = f.call(&xr)?;
        if fr < simplex[0].1 {
            if f.evaluations >= budget {
                simplex[n] = (xr, fr);
                continue;
            }
            let xe = along(2.0);
            let fe = f.call(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        if f.evaluations >= budget {
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = f.call(&xc)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f.call(&xc)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink towards the best vertex
        let best = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            if f.evaluations >= budget {
                break;
            }
            let x: Vec<f64> = best.iter().zip(&v.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            let fx = f.call(&x)?;
            *v = (x, fx);
        }
    }
}

fn best_of(mut simplex: Vec<(Vec<f64>, f64)>, converged: bool) -> (Vec<f64>, f64, bool) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, converged)
}

fn is_small(simplex: &[(Vec<f64>, f64)], tol: f64) -> bool {
    let best = &simplex[0].0;
    simplex[1..].iter().all(|(x, _)| {
        x.iter()
            .zip(best)
            .all(|(a, b)| (a - b).abs() <= tol * b.abs().max(1e-8))
    })
}
