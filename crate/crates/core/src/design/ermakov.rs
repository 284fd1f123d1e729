//! Scale factor b(t) of scale-invariant dynamics: b'' + ω(t)²b = ω0²/b³,
//! b(0) = 1, b'(0) = 0.

use crate::error::{Error, Result};
use crate::scale::PhysicalScale;

pub const DEFAULT_STEPS: usize = 10_000;
const MIN_STEPS: usize = 100;
const COLLAPSE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalingSolution {
    /// ω(t) = 0 after release: b = sqrt(1 + ω0²t²).
    FreeExpansion,
    Numeric(NumericScaling),
}

/// RK4 samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericScaling {
    pub times: Vec<f64>,
    pub b: Vec<f64>,
    pub b_dot: Vec<f64>,
    b_ddot: Vec<f64>,
}

impl ScalingSolution {
    pub fn is_analytic(&self) -> bool {
        matches!(self, ScalingSolution::FreeExpansion)
    }

    /// (b(t), ḃ(t)). Numeric solutions use cubic Hermite interpolation and
    /// are only defined on the integrated span.
    pub fn evaluate(&self, t: f64) -> Result<(f64, f64)> {
        match self {
            ScalingSolution::FreeExpansion => {
                let w = PhysicalScale::OMEGA0;
                let b = (1.0 + w * w * t * t).sqrt();
                Ok((b, w * w * t / b))
            }
            ScalingSolution::Numeric(n) => n.evaluate(t),
        }
    }
}

impl NumericScaling {
    fn evaluate(&self, t: f64) -> Result<(f64, f64)> {
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        if !(t >= t0 && t <= t1) {
            return Err(Error::Domain(format!("t = {t} outside integrated span [{t0}, {t1}]")));
        }
        let h = self.times[1] - self.times[0];
        let i = (((t - t0) / h).floor() as usize).min(self.times.len() - 2);
        let s = (t - self.times[i]) / h;
        let b = hermite(s, h, self.b[i], self.b_dot[i], self.b[i + 1], self.b_dot[i + 1]);
        let b_dot = hermite(s, h, self.b_dot[i], self.b_ddot[i], self.b_dot[i + 1], self.b_ddot[i + 1]);
        Ok((b, b_dot))
    }
}

fn hermite(s: f64, h: f64, y0: f64, d0: f64, y1: f64, d1: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

/// Piecewise-linear ω(t) from samples, held constant outside.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("frequency samples need increasing times and matching values".into()));
        }
        Ok(Self { times, values })
    }

    pub fn at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i == self.times.len() {
            return *self.values.last().unwrap();
        }
        let (ta, tb) = (self.times[i - 1], self.times[i]);
        let (va, vb) = (self.values[i - 1], self.values[i]);
        va + (vb - va) * (t - ta) / (tb - ta)
    }
}

/// Fixed-step RK4 integration of the Ermakov equation over `t_span`.
pub fn ermakov_integrate<F>(omega: F, t_span: (f64, f64), steps: usize) -> Result<ScalingSolution>
where
    F: Fn(f64) -> f64,
{
    let (t0, t1) = t_span;
    if steps < MIN_STEPS {
        return Err(Error::Precondition(format!("need at least {MIN_STEPS} steps, got {steps}")));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::Precondition(format!("invalid time span [{t0}, {t1}]")));
    }
    let w0sq = PhysicalScale::OMEGA0 * PhysicalScale::OMEGA0;
    let accel = |t: f64, b: f64| {
        let w = omega(t);
        w0sq / (b * b * b) - w * w * b
    };
    let h = (t1 - t0) / steps as f64;
    let mut times = Vec::with_capacity(steps + 1);
    let mut bs = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    let mut acc = Vec::with_capacity(steps + 1);
    let (mut b, mut v): (f64, f64) = (1.0, 0.0);
    for i in 0..=steps {
        let t = if i == steps { t1 } else { t0 + i as f64 * h };
        let a = accel(t, b);
        if !(b.is_finite() && v.is_finite() && a.is_finite()) || b < COLLAPSE {
            return Err(Error::Singularity { t, b });
        }
        times.push(t);
        bs.push(b);
        vs.push(v);
        acc.push(a);
        if i == steps {
            break;
        }
        let (k1b, k1v) = (v, a);
        let (k2b, k2v) = (v + 0.5 * h * k1v, accel(t + 0.5 * h, b + 0.5 * h * k1b));
        let (k3b, k3v) = (v + 0.5 * h * k2v, accel(t + 0.5 * h, b + 0.5 * h * k2b));
        let (k4b, k4v) = (v + h * k3v, accel(t + h, b + h * k3b));
        b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    Ok(ScalingSolution::Numeric(NumericScaling { times, b: bs, b_dot: vs, b_ddot: acc }))
}
