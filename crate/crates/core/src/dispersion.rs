//! Rotating growth rate as the fixed point `s = 1 / lambda(s)^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{min_eigen, EigenResult};
use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::forms::{assemble_pencil, FormPencil};

/// Eigenvalues at or above this count as neutral.
pub const STABLE_THRESHOLD: f64 = -1e-9;

const EXPANSION: f64 = 1.25;
const MAX_EXPANSIONS: usize = 400;
const BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Unstable(f64),
    Stable,
}

impl Growth {
    pub fn rate(self) -> Option<f64> {
        match self {
            Growth::Unstable(l) => Some(l),
            Growth::Stable => None,
        }
    }

    fn from_mu(mu: f64) -> Self {
        if mu >= STABLE_THRESHOLD {
            Growth::Stable
        } else {
            Growth::Unstable((-mu).sqrt())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Unstable,
    Stable,
    NoGrowingMode,
    Failed,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PointStatus::Unstable => "unstable",
            PointStatus::Stable => "stable",
            PointStatus::NoGrowingMode => "no_growing_mode",
            PointStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub xi_abs: f64,
    pub lambda: Option<f64>,
    pub lambda0: Growth,
    pub s_star: Option<f64>,
    pub fp_residual: Option<f64>,
    pub mu_residual: Option<f64>,
    pub status: PointStatus,
    pub detail: Option<String>,
}

impl DispersionPoint {
    fn without_root(xi_abs: f64, lambda0: Growth, status: PointStatus, detail: Option<String>) -> Self {
        Self {
            xi_abs,
            lambda: None,
            lambda0,
            s_star: None,
            fp_residual: None,
            mu_residual: None,
            status,
            detail,
        }
    }
}

/// A solved point together with the pencil and minimizer behind it.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub point: DispersionPoint,
    pub pencil: FormPencil,
    pub eigen: Option<EigenResult>,
}

impl FixedPoint {
    /// `s* E1(x*)`, the amount by which rotation lowers `lambda^2` below `lambda0^2`.
    pub fn rotation_margin(&self) -> Option<f64> {
        let eig = self.eigen.as_ref()?;
        let s = self.point.s_star?;
        Some(0.5 * s * self.pencil.e1().quadratic(&eig.vector))
    }
}

pub fn lambda_no_rotation(profile: &EquilibriumProfile, xi_abs: f64) -> Result<Growth> {
    let pencil = assemble_pencil(profile, xi_abs)?;
    Ok(Growth::from_mu(min_eigen(&pencil, 0.0)?.mu))
}

/// `F(s) = -s mu(s) - 1`; fails with `NoGrowingMode` when `mu(s)` is not negative.
pub fn f_of_s(pencil: &FormPencil, s: f64) -> Result<f64> {
    let mu = min_eigen(pencil, s)?.mu;
    f_from_mu(s, mu)
}

fn f_from_mu(s: f64, mu: f64) -> Result<f64> {
    if mu >= STABLE_THRESHOLD {
        return Err(Error::NoGrowingMode { s, mu });
    }
    Ok(-s * mu - 1.0)
}

pub fn solve_fixed_point(profile: &EquilibriumProfile, xi_abs: f64) -> Result<DispersionPoint> {
    solve_fixed_point_detailed(profile, xi_abs).map(|f| f.point)
}

pub fn solve_fixed_point_detailed(profile: &EquilibriumProfile, xi_abs: f64) -> Result<FixedPoint> {
    let pencil = assemble_pencil(profile, xi_abs)?;
    solve_on_pencil(pencil)
}

pub fn solve_on_pencil(pencil: FormPencil) -> Result<FixedPoint> {
    let xi_abs = pencil.xi_abs();
    let base = min_eigen(&pencil, 0.0)?;
    let lambda0 = Growth::from_mu(base.mu);
    let Growth::Unstable(l0) = lambda0 else {
        return Ok(FixedPoint {
            point: DispersionPoint::without_root(xi_abs, lambda0, PointStatus::Stable, None),
            pencil,
            eigen: None,
        });
    };
    let s0 = 1.0 / (l0 * l0);
    if pencil.e1().is_zero() {
        let point = DispersionPoint {
            xi_abs,
            lambda: Some(l0),
            lambda0,
            s_star: Some(s0),
            fp_residual: Some((s0 * (-base.mu) - 1.0).abs()),
            mu_residual: Some(base.residual),
            status: PointStatus::Unstable,
            detail: None,
        };
        return Ok(FixedPoint {
            point,
            pencil,
            eigen: Some(base),
        });
    }

    let bracket = match bracket_root(&pencil, s0)? {
        Ok(b) => b,
        Err(detail) => {
            return Ok(FixedPoint {
                point: DispersionPoint::without_root(xi_abs, lambda0, PointStatus::NoGrowingMode, Some(detail)),
                pencil,
                eigen: None,
            })
        }
    };
    let (mut lo, mut hi) = bracket;
    while (hi - lo) > BISECTION_TOL * hi {
        let mid = 0.5 * (lo + hi);
        let mu = min_eigen(&pencil, mid)?.mu;
        match f_from_mu(mid, mu) {
            Ok(f) if f > 0.0 => hi = mid,
            Ok(_) => lo = mid,
            // A stabilized midpoint lies past the crossing.
            Err(_) => hi = mid,
        }
    }
    let s_star = 0.5 * (lo + hi);
    let eig = min_eigen(&pencil, s_star)?;
    if eig.mu >= STABLE_THRESHOLD {
        return Err(Error::BracketFailure(format!(
            "bisection converged to a neutral point s = {s_star}"
        )));
    }
    let point = DispersionPoint {
        xi_abs,
        lambda: Some(1.0 / s_star.sqrt()),
        lambda0,
        s_star: Some(s_star),
        fp_residual: Some((s_star * (-eig.mu) - 1.0).abs()),
        mu_residual: Some(eig.residual),
        status: PointStatus::Unstable,
        detail: None,
    };
    Ok(FixedPoint {
        point,
        pencil,
        eigen: Some(eig),
    })
}

/// `Ok(Ok((lo, hi)))` with `F(lo) <= 0 < F(hi)`, or `Ok(Err(reason))` when rotation wins.
fn bracket_root(pencil: &FormPencil, s0: f64) -> Result<std::result::Result<(f64, f64), String>> {
    let mut lo = 0.0;
    let mut s = s0;
    for _ in 0..MAX_EXPANSIONS {
        let mu = min_eigen(pencil, s)?.mu;
        match f_from_mu(s, mu) {
            Ok(f) if f > 0.0 => return Ok(Ok((lo, s))),
            Ok(_) => lo = s,
            Err(_) => {
                // Look for a crossing hidden inside the last step.
                const SCAN: usize = 16;
                for i in 1..SCAN {
                    let t = lo + (s - lo) * i as f64 / SCAN as f64;
                    let mu = min_eigen(pencil, t)?.mu;
                    match f_from_mu(t, mu) {
                        Ok(f) if f > 0.0 => return Ok(Ok((lo + (s - lo) * (i - 1) as f64 / SCAN as f64, t))),
                        Ok(_) => {}
                        Err(_) => break,
                    }
                }
                return Ok(Err(format!("mu({s:e}) = {mu:e} is not negative")));
            }
        }
        s *= EXPANSION;
    }
    Err(Error::BracketFailure(format!(
        "no sign change of F up to s = {s:e}"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares line through `(x, y)`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<LinearFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub points: Vec<DispersionPoint>,
    /// `lambda^2` against `|xi|` over the upper half of the sweep.
    pub fit: Option<LinearFit>,
}

pub fn dispersion_curve(profile: &EquilibriumProfile, xi_list: &[f64]) -> DispersionCurve {
    let points: Vec<DispersionPoint> = xi_list
        .par_iter()
        .map(|&xi| {
            solve_fixed_point(profile, xi).unwrap_or_else(|e| {
                DispersionPoint::without_root(xi, Growth::Stable, PointStatus::Failed, Some(e.to_string()))
            })
        })
        .collect();
    let upper: Vec<(f64, f64)> = points[points.len() / 2..]
        .iter()
        .filter_map(|p| p.lambda.map(|l| (p.xi_abs, l * l)))
        .collect();
    DispersionCurve {
        fit: fit_line(&upper),
        points,
    }
}

/// `n` evenly spaced samples on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{integrate_hydrostatic, FluidConfig};

    #[test]
    fn f_at_zero_is_minus_one() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(1.0), 16).unwrap();
        let pencil = assemble_pencil(&p, 10.0).unwrap();
        assert_eq!(f_of_s(&pencil, 0.0).unwrap(), -1.0);
    }

    #[test]
    fn no_rotation_root_is_explicit() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(0.0), 16).unwrap();
        let fp = solve_fixed_point(&p, 10.0).unwrap();
        let l0 = fp.lambda0.rate().unwrap();
        assert_eq!(fp.lambda, Some(l0));
        assert_eq!(fp.s_star, Some(1.0 / (l0 * l0)));
    }

    #[test]
    fn fit_recovers_line() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let f = fit_line(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
    }
}
