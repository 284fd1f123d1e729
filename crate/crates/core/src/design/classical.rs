use crate::error::{Error, Result};
use crate::lens::KickSequence;
use crate::scale::PhysicalScale;

use super::DesignResult;

/// Widths whose squares differ by less than this fraction of the largest
/// square are treated as the same lens.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;
pub const MAX_CONDITION: f64 = 1e12;
pub const MAX_KICKS: usize = 6;

fn check_widths(sigmas: &[f64]) -> Result<()> {
    if sigmas.is_empty() || sigmas.len() > MAX_KICKS {
        return Err(Error::Precondition(format!(
            "need between 1 and {MAX_KICKS} kick widths, got {}",
            sigmas.len()
        )));
    }
    if let Some(bad) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::Precondition(format!("kick width must be > 0, got {bad}")));
    }
    let max_sq = sigmas.iter().map(|s| s * s).fold(0.0, f64::max);
    for i in 0..sigmas.len() {
        for j in i + 1..sigmas.len() {
            if (sigmas[i] * sigmas[i] - sigmas[j] * sigmas[j]).abs() < DEGENERACY_TOLERANCE * max_sq {
                return Err(Error::DegenerateLens(format!(
                    "widths {} and {} are too close to form a compound lens",
                    sigmas[i], sigmas[j]
                )));
            }
        }
    }
    Ok(())
}

/// Closed-form doublet: κ1 = mσ1⁴/(t_f(σ1²-σ2²)), κ2 = -mσ2⁴/(t_f(σ1²-σ2²)).
pub fn classical_doublet(sigma1: f64, sigma2: f64, t_f: f64) -> Result<DesignResult> {
    if !(t_f.is_finite() && t_f > 0.0) {
        return Err(Error::Precondition(format!("t_f must be > 0, got {t_f}")));
    }
    check_widths(&[sigma1, sigma2])?;
    let (s1, s2) = (sigma1 * sigma1, sigma2 * sigma2);
    let denom = t_f * (s1 - s2);
    let m = PhysicalScale::MASS;
    let strengths = vec![m * s1 * s1 / denom, -m * s2 * s2 / denom];
    let (_, condition_estimate) = equilibrated_system(&[sigma1, sigma2]);
    Ok(DesignResult {
        strengths,
        widths: vec![sigma1, sigma2],
        rhs_value: m / t_f,
        condition_estimate,
    })
}

/// Rows of the cancellation system divided by s^{i+1}, s = max 1/σ²; returns
/// the scaled matrix and its 1-norm condition number.
fn equilibrated_system(sigmas: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let n = sigmas.len();
    let u: Vec<f64> = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
    let s = u.iter().copied().fold(0.0, f64::max);
    let w: Vec<f64> = u.iter().map(|v| v / s).collect();
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| w.iter().map(|wj| wj.powi(i as i32 + 1)).collect())
        .collect();
    let cond = match Lu::factor(&a) {
        Some(lu) => {
            let inv_cols: Vec<Vec<f64>> = (0..n)
                .map(|c| {
                    let mut e = vec![0.0; n];
                    e[c] = 1.0;
                    lu.solve(&e)
                })
                .collect();
            let inv_norm = inv_cols
                .iter()
                .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max);
            one_norm(&a) * inv_norm
        }
        None => f64::INFINITY,
    };
    (a, cond)
}

fn one_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    (0..n)
        .map(|j| (0..n).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU with partial pivoting, row-major.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &[Vec<f64>]) -> Option<Self> {
        let n = a.len();
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| lu[i][k].abs().total_cmp(&lu[j][k].abs()))?;
            if lu[p][k] == 0.0 {
                return None;
            }
            lu.swap(k, p);
            perm.swap(k, p);
            for i in k + 1..n {
                let f = lu[i][k] / lu[k][k];
                lu[i][k] = f;
                for j in k + 1..n {
                    lu[i][j] -= f * lu[k][j];
                }
            }
        }
        Some(Self { lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i][j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i][j] * y[j];
            }
            y[i] /= self.lu[i][i];
        }
        y
    }
}

/// Solves Σ_j κ_j/σ_j^{2i} = (drive, 0, …, 0), i = 1..N, for the N-kick
/// lens that cancels the drive and the next N-1 odd anharmonic orders.
pub fn classical_n_kick(sigmas: &[f64], drive: f64) -> Result<DesignResult> {
    check_widths(sigmas)?;
    if !(drive.is_finite() && drive > 0.0) {
        return Err(Error::Precondition(format!("drive must be > 0, got {drive}")));
    }
    let n = sigmas.len();
    let (a, cond) = equilibrated_system(sigmas);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::DegenerateLens(format!(
            "cancellation system is near-singular (condition estimate {cond:e})"
        )));
    }
    let s = sigmas.iter().map(|s| 1.0 / (s * s)).fold(0.0, f64::max);
    let mut rhs = vec![0.0; n];
    rhs[0] = drive / s;
    let lu = Lu::factor(&a).ok_or_else(|| Error::DegenerateLens("singular cancellation system".into()))?;
    let strengths = lu.solve(&rhs);
    Ok(DesignResult {
        strengths,
        widths: sigmas.to_vec(),
        rhs_value: drive,
        condition_estimate: cond,
    })
}

/// Maclaurin coefficients of Δp(x) at x, x³, …, x^{2·terms-1}:
/// -(-1)^k Σ_n κ_n / (2^k k! σ_n^{2k+2}).
pub fn impulse_series(seq: &KickSequence, terms: usize) -> Vec<f64> {
    series_terms(seq, terms)
        .into_iter()
        .map(|row| row.iter().sum())
        .collect()
}

fn series_terms(seq: &KickSequence, terms: usize) -> Vec<Vec<f64>> {
    let mut factor = 1.0; // (-1)^k / (2^k k!)
    (0..terms)
        .map(|k| {
            if k > 0 {
                factor *= -1.0 / (2.0 * k as f64);
            }
            seq.kicks
                .iter()
                .map(|kick| -factor * kick.strength / (kick.width * kick.width).powi(k as i32 + 1))
                .collect()
        })
        .collect()
}

/// |coefficient of drive·x + Δp(x)| at orders 1, 3, …, 2N-1, each relative
/// to the sum of magnitudes of the terms entering it.
pub fn cancellation_residuals(seq: &KickSequence, drive: f64) -> Vec<f64> {
    series_terms(seq, seq.len())
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let target = if k == 0 { drive } else { 0.0 };
            let total = target + row.iter().sum::<f64>();
            let scale = target.abs() + row.iter().map(|v| v.abs()).sum::<f64>();
            total.abs() / scale
        })
        .collect()
}
