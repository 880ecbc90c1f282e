//! Smallest eigenpair of the pencil `(E0 + s E1, J)`.
//!
//! The iterative path brackets the lowest eigenvalue by inertia counts of
//! `A - sigma J`, then polishes it by inverse iteration shifted just below.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::banded::{dot, BandedSym};
use crate::error::{Error, Result};
use crate::forms::{test_pair, FormPencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Dense below `DENSE_LIMIT` dofs, iterative above.
    Auto,
    Iterative,
    Dense,
}

pub const DENSE_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub strategy: Strategy,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 500,
            strategy: Strategy::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub mu: f64,
    /// Normalized to `x^T J x = 2`.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub s: f64,
    pub interface_dof: usize,
    /// Set when `|xi| < 2`, below where the comparison pair is admissible.
    pub outside_instability_regime: bool,
}

impl EigenResult {
    /// Growth rate `sqrt(-mu)` when the eigenvalue is negative.
    pub fn growth_rate(&self) -> Option<f64> {
        (self.mu < 0.0).then(|| (-self.mu).sqrt())
    }
}

pub fn min_eigen(pencil: &FormPencil, s: f64) -> Result<EigenResult> {
    min_eigen_with(pencil, s, &EigenOptions::default())
}

pub fn min_eigen_with(pencil: &FormPencil, s: f64, options: &EigenOptions) -> Result<EigenResult> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::InvalidParameter(format!("s must be nonnegative, got {s}")));
    }
    let dense = match options.strategy {
        Strategy::Dense => true,
        Strategy::Iterative => false,
        Strategy::Auto => pencil.dim() < DENSE_LIMIT,
    };
    let (mu, mut vector, iterations) = if dense {
        let (mu, v) = dense_min(pencil, s);
        (mu, v, 1)
    } else {
        iterative_min(pencil, s, options)?
    };
    let residual = pencil.residual(s, mu, &vector);
    normalize(pencil, &mut vector);
    let result = EigenResult {
        mu,
        residual: pencil.residual(s, mu, &vector),
        vector,
        iterations,
        s,
        interface_dof: pencil.layout().interface_psi(),
        outside_instability_regime: pencil.xi_abs() < 2.0,
    };
    if !(residual <= options.tolerance * scale(pencil, mu)) {
        return Err(Error::ConvergenceFailure {
            max_iterations: options.max_iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

/// Residual scale: the tolerance is relative to the operator magnitude.
fn scale(pencil: &FormPencil, mu: f64) -> f64 {
    let diag = (0..pencil.dim())
        .map(|i| pencil.e0().get(i, i).abs() + pencil.mass().get(i, i).abs() * mu.abs())
        .fold(0.0, f64::max);
    diag.max(1.0)
}

/// `x^T J x = 2` and a deterministic sign: interface displacement positive.
fn normalize(pencil: &FormPencil, x: &mut [f64]) {
    let m = pencil.mass().quadratic(x);
    let mut c = (2.0 / m).sqrt();
    let pivot = x[pencil.layout().interface_psi()];
    let reference = if pivot != 0.0 {
        pivot
    } else {
        x.iter().copied().fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc })
    };
    if reference < 0.0 {
        c = -c;
    }
    x.iter_mut().for_each(|v| *v *= c);
}

fn dense_min(pencil: &FormPencil, s: f64) -> (f64, Vec<f64>) {
    let a = pencil.energy(s).to_dense();
    let j = pencil.mass().to_dense();
    let chol = j.cholesky().expect("mass matrix is positive definite");
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.ncols()))
        .expect("nonsingular factor");
    let mut c = &linv * a * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let (imin, mu) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let y = eig.eigenvectors.column(imin).into_owned();
    let x = linv.transpose() * y;
    (mu, x.iter().copied().collect())
}

/// Every eigenvalue of the pencil, ascending, via the dense reduction.
pub fn dense_spectrum(pencil: &FormPencil, s: f64) -> Vec<f64> {
    let a = pencil.energy(s).to_dense();
    let l = pencil.mass().to_dense().cholesky().expect("positive definite mass").l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.ncols()))
        .expect("nonsingular factor");
    let c = &linv * a * linv.transpose();
    let mut v: Vec<f64> = SymmetricEigen::new((&c + c.transpose()) * 0.5).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn shifted(a: &BandedSym, mass: &BandedSym, sigma: f64) -> BandedSym {
    a.add_scaled(-sigma, mass)
}

/// Eigenvalues of the pencil strictly below `sigma`.
fn count_below(a: &BandedSym, mass: &BandedSym, sigma: f64) -> Option<usize> {
    shifted(a, mass, sigma).ldlt().map(|f| f.negative_count())
}

fn start_vector(pencil: &FormPencil) -> Vec<f64> {
    if pencil.xi_abs() >= 2.0 {
        if let Ok(x) = test_pair(pencil.grid(), pencil.xi_abs()) {
            return x;
        }
    }
    // Smooth deterministic fallback with every component nonzero.
    (0..pencil.dim()).map(|i| 1.0 + 0.5 * ((i as f64) * 0.37).sin()).collect()
}

fn iterative_min(pencil: &FormPencil, s: f64, options: &EigenOptions) -> Result<(f64, Vec<f64>, usize)> {
    let a = pencil.energy(s);
    let mass = pencil.mass();
    let x0 = start_vector(pencil);
    let rq0 = (a.quadratic(&x0)) / mass.quadratic(&x0);

    let floor = pencil.spectral_floor();
    let width = 1.0 + floor.abs() + rq0.abs();
    let mut lo = floor - 1e-6 * width;
    let mut guard = 0;
    while count_below(&a, mass, lo).is_none_or(|c| c > 0) {
        lo -= width * 2f64.powi(guard);
        guard += 1;
        if guard > 60 {
            return Err(Error::BracketFailure("no lower spectral bound".into()));
        }
    }
    let mut hi = rq0 + 1e-9 * width;
    guard = 0;
    while count_below(&a, mass, hi).is_none_or(|c| c == 0) {
        hi += width * 2f64.powi(guard);
        guard += 1;
        if guard > 60 {
            return Err(Error::BracketFailure("no upper spectral bound".into()));
        }
    }

    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match count_below(&a, mass, mid) {
            Some(0) => lo = mid,
            Some(_) => hi = mid,
            // Exact singularity: mid is an eigenvalue; shrink from above.
            None => hi = mid,
        }
    }

    // Shift strictly below the smallest eigenvalue: A - sigma J is positive definite.
    let gap = hi - lo;
    let mut sigma = lo - gap;
    let factor = loop {
        if let Some(f) = shifted(&a, mass, sigma).ldlt() {
            if f.negative_count() == 0 {
                break f;
            }
        }
        sigma -= gap.max(1e-12 * width);
    };

    let mut x = x0;
    let mut best = (f64::INFINITY, 0.0, x.clone());
    let tol = options.tolerance * scale(pencil, lo);
    for it in 1..=options.max_iterations {
        let jx = mass.matvec(&x);
        let mut y = factor.solve(&jx);
        let ny = dot(&y, &mass.matvec(&y)).sqrt();
        y.iter_mut().for_each(|v| *v /= ny);
        let mu = a.quadratic(&y) / mass.quadratic(&y);
        let r = pencil.residual(s, mu, &y);
        if r < best.0 {
            best = (r, mu, y.clone());
        }
        x = y;
        if r <= tol {
            return Ok((mu, x, it));
        }
    }
    let (_, mu, x) = best;
    Ok((mu, x, options.max_iterations))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCurve {
    pub points: Vec<(f64, f64)>,
    /// `max |d mu / d s|` between consecutive samples.
    pub lipschitz: f64,
    /// `max x^T E1 x / x^T J x` over the computed minimizers.
    pub rotation_sup: f64,
}

pub fn mu_curve(pencil: &FormPencil, s_values: &[f64]) -> Result<MuCurve> {
    if s_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("s values must be ascending".into()));
    }
    let mut points = Vec::with_capacity(s_values.len());
    let mut rotation_sup: f64 = 0.0;
    for &s in s_values {
        let r = min_eigen(pencil, s)?;
        rotation_sup = rotation_sup.max(pencil.rotation_quotient(&r.vector)?);
        points.push((s, r.mu));
    }
    let lipschitz = points
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max);
    Ok(MuCurve {
        points,
        lipschitz,
        rotation_sup,
    })
}

/// The shared vertical-displacement dof at the interface.
pub fn psi_at_interface(result: &EigenResult) -> f64 {
    result.vector[result.interface_dof]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{integrate_hydrostatic, FluidConfig};
    use crate::forms::assemble_pencil;

    #[test]
    fn iterative_agrees_with_dense_spectrum() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(1.0), 6).unwrap();
        for (k, s) in [(3.0, 0.0), (8.0, 0.2), (1.0, 0.5)] {
            let pencil = assemble_pencil(&p, k).unwrap();
            let opts = EigenOptions {
                strategy: Strategy::Iterative,
                ..Default::default()
            };
            let r = min_eigen_with(&pencil, s, &opts).unwrap();
            let spec = dense_spectrum(&pencil, s);
            assert!((r.mu - spec[0]).abs() <= 1e-10 * spec[0].abs().max(1.0));
            assert!((pencil.mass().quadratic(&r.vector) - 2.0).abs() < 1e-12);
            assert_eq!(r.outside_instability_regime, k < 2.0);
        }
    }

    #[test]
    fn rejects_negative_s() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(0.0), 4).unwrap();
        let pencil = assemble_pencil(&p, 3.0).unwrap();
        assert!(min_eigen(&pencil, -1.0).is_err());
    }
}
