//! Discrete energies on continuous P1 vertical displacement times
//! piecewise-constant horizontal amplitude.
//!
//! Matrices hold full bilinear forms, so the quadratic energies are
//! `x^T M x / 2` and a vector with `x^T J x = 2` has unit mass.

use std::io::{self, Write};

use crate::banded::{dot, BandedSym};
use crate::equilibrium::{EquilibriumProfile, Side};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::quadrature::GaussRule;

/// Interleaved dofs `[phi_0, psi_1, phi_1, psi_2, ..., phi_{n-1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    n_elements: usize,
    interface_node: usize,
}

impl DofLayout {
    pub fn new(grid: &Grid1D) -> Self {
        Self::from_parts(grid.n_elements(), grid.interface_index())
    }

    pub(crate) fn from_parts(n_elements: usize, interface_node: usize) -> Self {
        Self {
            n_elements,
            interface_node,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.n_elements - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn phi(&self, element: usize) -> usize {
        2 * element
    }

    /// `None` at the two Dirichlet ends.
    pub fn psi(&self, node: usize) -> Option<usize> {
        (node > 0 && node < self.n_elements).then(|| 2 * node - 1)
    }

    pub fn interface_psi(&self) -> usize {
        2 * self.interface_node - 1
    }

    pub fn interface_node(&self) -> usize {
        self.interface_node
    }

    /// Nodal vertical displacement including the zero ends.
    pub fn nodal_psi(&self, x: &[f64]) -> Vec<f64> {
        (0..=self.n_elements)
            .map(|i| self.psi(i).map_or(0.0, |k| x[k]))
            .collect()
    }

    pub fn element_phi(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_elements).map(|e| x[self.phi(e)]).collect()
    }

    pub fn assemble(&self, phi: &[f64], psi_nodal: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        for (e, &v) in phi.iter().enumerate() {
            x[self.phi(e)] = v;
        }
        for (i, &v) in psi_nodal.iter().enumerate() {
            if let Some(k) = self.psi(i) {
                x[k] = v;
            }
        }
        x
    }
}

#[derive(Debug, Clone)]
pub struct FormPencil {
    xi_abs: f64,
    gravity: f64,
    omega: f64,
    grid: Grid1D,
    layout: DofLayout,
    e0: BandedSym,
    e1: BandedSym,
    mass: BandedSym,
}

pub const QUADRATURE_POINTS: usize = 3;

pub fn assemble_pencil(profile: &EquilibriumProfile, xi_abs: f64) -> Result<FormPencil> {
    if !(xi_abs.is_finite() && xi_abs >= 0.0) {
        return Err(Error::InvalidParameter(format!("|xi| must be nonnegative, got {xi_abs}")));
    }
    let grid = profile.grid().clone();
    let layout = DofLayout::new(&grid);
    let n = layout.len();
    let g = profile.gravity();
    let omega = profile.omega();
    let k = xi_abs;
    let rule = GaussRule::new(QUADRATURE_POINTS);
    let mut e0 = BandedSym::zeros(n, 2);
    let mut e1 = BandedSym::zeros(n, 2);
    let mut mass = BandedSym::zeros(n, 2);
    for e in 0..grid.n_elements() {
        let side = if grid.element_is_upper(e) { Side::Upper } else { Side::Lower };
        let (xa, xb) = grid.element(e);
        let h = xb - xa;
        let ip = layout.phi(e);
        let ia = layout.psi(e);
        let ib = layout.psi(e + 1);
        for (x, w) in rule.on(xa, xb) {
            let rho = profile.density(x, side);
            let a = profile.stiffness(x, side);
            let na = (xb - x) / h;
            let nb = (x - xa) / h;
            let slopes = [(ia, na, -1.0 / h), (ib, nb, 1.0 / h)];
            for &(i, ni, di) in &slopes {
                let Some(i) = i else { continue };
                for &(j, nj, dj) in &slopes {
                    let Some(j) = j else { continue };
                    if j > i {
                        continue;
                    }
                    e0.add(i, j, w * a * di * dj);
                    mass.add(i, j, w * rho * ni * nj);
                }
                e0.add(ip, i, w * (a * k * di - g * k * rho * ni));
            }
            e0.add(ip, ip, w * a * k * k);
            mass.add(ip, ip, w * rho);
            e1.add(ip, ip, 4.0 * omega * omega * w * rho);
        }
    }
    Ok(FormPencil {
        xi_abs,
        gravity: g,
        omega,
        grid,
        layout,
        e0,
        e1,
        mass,
    })
}

impl FormPencil {
    pub fn xi_abs(&self) -> f64 {
        self.xi_abs
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn layout(&self) -> DofLayout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.len()
    }

    pub fn e0(&self) -> &BandedSym {
        &self.e0
    }

    pub fn e1(&self) -> &BandedSym {
        &self.e1
    }

    pub fn mass(&self) -> &BandedSym {
        &self.mass
    }

    /// `E0 + s E1`.
    pub fn energy(&self, s: f64) -> BandedSym {
        if self.e1.is_zero() {
            self.e0.clone()
        } else {
            self.e0.add_scaled(s, &self.e1)
        }
    }

    /// Guaranteed lower bound of the spectrum for `s >= 0`.
    pub fn spectral_floor(&self) -> f64 {
        -self.gravity * self.xi_abs
    }

    pub fn rayleigh_quotient(&self, s: f64, x: &[f64]) -> Result<f64> {
        let m = self.mass.quadratic(x);
        if m == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok((self.e0.quadratic(x) + s * self.e1.quadratic(x)) / m)
    }

    /// Rotation quotient `x^T E1 x / x^T J x`.
    pub fn rotation_quotient(&self, x: &[f64]) -> Result<f64> {
        let m = self.mass.quadratic(x);
        if m == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.e1.quadratic(x) / m)
    }

    /// Residual `||(E0 + s E1) x - mu J x|| / ||x||`.
    pub fn residual(&self, s: f64, mu: f64, x: &[f64]) -> f64 {
        let ax = self.e0.matvec(x);
        let bx = self.e1.matvec(x);
        let mx = self.mass.matvec(x);
        let r: f64 = ax
            .iter()
            .zip(&bx)
            .zip(&mx)
            .map(|((a, b), m)| {
                let v = a + s * b - mu * m;
                v * v
            })
            .sum();
        r.sqrt() / dot(x, x).sqrt()
    }

    /// Matrix-market dump of the three matrices.
    pub fn write_matrix_market(&self, out: &mut impl Write) -> io::Result<()> {
        for (name, m) in [("E0", &self.e0), ("E1", &self.e1), ("J", &self.mass)] {
            let entries: Vec<_> = m.entries().filter(|e| e.2 != 0.0).collect();
            writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
            writeln!(out, "% {name} |xi| = {:.17e}", self.xi_abs)?;
            writeln!(out, "{} {} {}", m.dim(), m.dim(), entries.len())?;
            for (i, j, v) in entries {
                writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Interpolated comparison pair: `psi = (1 - x/l)^(k/2)` above,
/// `(1 + x/m)^(k/2)` below, and `phi` the element mean of `-psi'/k`.
pub fn test_pair(grid: &Grid1D, xi_abs: f64) -> Result<Vec<f64>> {
    if !(xi_abs.is_finite() && xi_abs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "comparison pair needs |xi| > 0, got {xi_abs}"
        )));
    }
    let (m, l) = (grid.depth(), grid.height());
    let psi: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            let base = if x >= 0.0 { 1.0 - x / l } else { 1.0 + x / m };
            base.max(0.0).powf(xi_abs / 2.0)
        })
        .collect();
    let phi: Vec<f64> = (0..grid.n_elements())
        .map(|e| -(psi[e + 1] - psi[e]) / (grid.width(e) * xi_abs))
        .collect();
    Ok(DofLayout::new(grid).assemble(&phi, &psi))
}

pub fn rayleigh_quotient(pencil: &FormPencil, s: f64, x: &[f64]) -> Result<f64> {
    pencil.rayleigh_quotient(s, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{integrate_hydrostatic, FluidConfig};

    #[test]
    fn layout_counts() {
        let g = Grid1D::uniform(1.0, 1.0, 3, 3).unwrap();
        let d = DofLayout::new(&g);
        assert_eq!(d.len(), (g.n_nodes() - 2) + g.n_elements());
        assert_eq!(d.psi(0), None);
        assert_eq!(d.psi(6), None);
        assert_eq!(d.interface_psi(), 5);
    }

    #[test]
    fn comparison_pair_values() {
        let g = Grid1D::uniform(1.0, 1.0, 4, 4).unwrap();
        let d = DofLayout::new(&g);
        let x = test_pair(&g, 2.0).unwrap();
        let psi = d.nodal_psi(&x);
        assert_eq!(psi[4], 1.0);
        assert!((psi[6] - 0.5).abs() < 1e-15);
        let x4 = test_pair(&g, 4.0).unwrap();
        assert!((d.nodal_psi(&x4)[2] - 0.25).abs() < 1e-15);
        assert_eq!(psi[0], 0.0);
        assert_eq!(psi[8], 0.0);
    }

    #[test]
    fn no_rotation_means_no_rotation_block() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(0.0), 8).unwrap();
        let pencil = assemble_pencil(&p, 3.0).unwrap();
        assert!(pencil.e1().is_zero());
    }

    #[test]
    fn zero_frequency_decouples() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(1.0), 8).unwrap();
        let pencil = assemble_pencil(&p, 0.0).unwrap();
        let layout = pencil.layout();
        for e in 0..layout.n_elements() {
            let ip = layout.phi(e);
            for node in [e, e + 1] {
                if let Some(i) = layout.psi(node) {
                    assert_eq!(pencil.e0().get(ip, i), 0.0);
                }
            }
            assert_eq!(pencil.e0().get(ip, ip), 0.0);
        }
    }

    #[test]
    fn zero_vector_quotient_fails() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(0.0), 4).unwrap();
        let pencil = assemble_pencil(&p, 3.0).unwrap();
        assert!(matches!(
            pencil.rayleigh_quotient(0.0, &vec![0.0; pencil.dim()]),
            Err(Error::ZeroVector)
        ));
    }
}
