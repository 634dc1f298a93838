use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::ptf::normal_cdf;

/// Relative singular-value cutoff below which a shell fit is rejected.
const RANK_TOL: f64 = 1e-12;

/// `E[sgn((1 + a) X + b)] = 1 - 2 Phi(-b / (1 + a))` for `a > -1`.
pub fn one_dim_expectation(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a <= -1.0 {
        return Err(param(format!("need finite a > -1 and b, got ({a}, {b})")));
    }
    let t = b / (1.0 + a);
    Ok(normal_cdf(t) - normal_cdf(-t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactPoint {
    pub a: f64,
    pub b: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellFit {
    pub radius: f64,
    /// Largest absolute residual of the fit over the shell's sample points.
    pub max_residual: f64,
    /// Coefficients of `(a/r)^i (b/r)^j` ordered by `i + j`, then by descending `i`.
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop4Report {
    pub k: u32,
    pub exact: Vec<ExactPoint>,
    pub shells: Vec<ShellFit>,
    /// Least-squares slope of `ln max_residual` against `ln r`.
    pub slope: f64,
    /// `d/db` at the origin read off the smallest shell's fit.
    pub linear_b: f64,
    pub pass: bool,
}

fn exponents(k: u32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for total in 0..k as i32 {
        for i in (0..=total).rev() {
            out.push((i, total - i));
        }
    }
    out
}

/// Fits a total-degree `k - 1` polynomial to the one-dimensional sign
/// expectation on the square `max(|a|, |b|) <= r`, sampled on a uniform
/// `side x side` grid.
pub fn fit_shell(k: u32, radius: f64, side: usize) -> Result<ShellFit> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(param(format!(
            "shell radius must lie in (0, 1/2), got {radius}"
        )));
    }
    let exps = exponents(k);
    let coord = |i: usize| {
        if side == 1 {
            0.0
        } else {
            -1.0 + 2.0 * i as f64 / (side - 1) as f64
        }
    };
    let pts: Vec<(f64, f64)> = (0..side)
        .flat_map(|i| (0..side).map(move |j| (coord(i), coord(j))))
        .collect();
    if pts.len() < exps.len() {
        return Err(Error::SingularFit);
    }
    let a = DMatrix::from_fn(pts.len(), exps.len(), |r, c| {
        let (u, v) = pts[r];
        u.powi(exps[c].0) * v.powi(exps[c].1)
    });
    let y = pts
        .iter()
        .map(|&(u, v)| one_dim_expectation(radius * u, radius * v))
        .collect::<Result<Vec<_>>>()?;
    let y = DVector::from_vec(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 || svd.singular_values.min() < RANK_TOL * smax {
        return Err(Error::SingularFit);
    }
    let coef = svd
        .solve(&y, RANK_TOL * smax)
        .map_err(|_| Error::SingularFit)?;
    let max_residual = (&a * &coef - &y).amax();
    Ok(ShellFit {
        radius,
        max_residual,
        coeffs: coef.iter().copied().collect(),
    })
}

/// Exact values on `grid`, per-shell fits, and the decay rate of the fit
/// error; passes when the rate is at least `k - 0.5`.
pub fn check_prop4_1d(
    k: u32,
    grid: &[(f64, f64)],
    radii: &[f64],
    side: usize,
) -> Result<Prop4Report> {
    if k == 0 {
        return Err(param("k must be positive"));
    }
    if let Some(&(a, _)) = grid.iter().find(|(a, _)| a.is_nan() || a.abs() >= 0.5) {
        return Err(param(format!("grid points need |a| < 1/2, got a = {a}")));
    }
    if radii.len() < 2 {
        return Err(param("need at least two shells to estimate a rate"));
    }
    let exact = grid
        .iter()
        .map(|&(a, b)| {
            Ok(ExactPoint {
                a,
                b,
                value: one_dim_expectation(a, b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let shells = radii
        .iter()
        .map(|&r| fit_shell(k, r, side))
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = shells.iter().map(|s| s.radius.ln()).collect();
    let ys: Vec<f64> = shells
        .iter()
        .map(|s| s.max_residual.max(f64::MIN_POSITIVE).ln())
        .collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(param("shell radii must be distinct"));
    }
    let slope = sxy / sxx;

    let smallest = shells
        .iter()
        .min_by(|a, b| a.radius.total_cmp(&b.radius))
        .expect("at least two shells");
    // coefficient of b/r sits at index 2 (after the constant and a/r)
    let linear_b = if k >= 2 {
        smallest.coeffs[2] / smallest.radius
    } else {
        0.0
    };

    Ok(Prop4Report {
        k,
        exact,
        shells,
        slope,
        linear_b,
        pass: slope >= k as f64 - 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_exactly_zero() {
        assert_eq!(one_dim_expectation(0.0, 0.0).unwrap(), 0.0);
        assert!(one_dim_expectation(-1.0, 0.0).is_err());
    }

    #[test]
    fn matches_closed_form() {
        let v = one_dim_expectation(0.25, 0.5).unwrap();
        // 2 Phi(0.4) - 1
        assert!((v - 0.31084348322064).abs() < 1e-12);
    }

    #[test]
    fn fit_error_decays_at_rate_k() {
        let r = check_prop4_1d(3, &[(0.0, 0.0)], &[0.2, 0.1, 0.05], 9).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(check_prop4_1d(3, &[(0.5, 0.0)], &[0.2, 0.1], 9).is_err());
        assert!(
            (r.linear_b - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-3,
            "{}",
            r.linear_b
        );
    }

    #[test]
    fn too_few_points_is_singular() {
        assert!(matches!(fit_shell(3, 0.1, 2), Err(Error::SingularFit)));
    }
}
