//! Growing normal modes: recovery of smooth profiles from the discrete
//! minimizer, their vertical derivative stack, and strong-form residuals.
//!
//! In the frame `xi = (|xi|, 0)` a mode has horizontal amplitudes
//! `(phi, theta)` with `theta = -2 omega phi / lambda^2` and vertical
//! amplitude `psi`. The flux `w = p'(rho0) rho0 (psi' + |xi| phi)` is
//! continuous across the interface.

use serde_json::{json, Value};

use crate::dispersion::{DispersionPoint, FixedPoint};
use crate::eigen::EigenResult;
use crate::equilibrium::{EquilibriumProfile, Side};
use crate::error::{Error, Result};
use crate::forms::{DofLayout, QUADRATURE_POINTS};
use crate::grid::Grid1D;
use crate::hermite::Quintic;
use crate::quadrature::GaussRule;
use crate::series;

/// Orders kept beyond the requested one: two for quintic interpolation of
/// the top derivative and one more for the compression `psi'`.
const EXTRA_ORDERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// Horizontal amplitude along `xi`.
    Phi,
    /// Horizontal amplitude across `xi`.
    Theta,
    Psi,
    Flux,
    /// `rho0 (|xi| phi + psi')`; the pressure perturbation amplitude is its negative.
    Compression,
}

#[derive(Debug, Clone, PartialEq)]
struct SideStack {
    x: Vec<f64>,
    /// Taylor coefficients per node.
    psi: Vec<Vec<f64>>,
    flux: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
    compression: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMode {
    xi: [f64; 2],
    xi_abs: f64,
    lambda: f64,
    omega: f64,
    gravity: f64,
    k_max: usize,
    grid: Grid1D,
    /// Discrete minimizer the profiles were recovered from.
    discrete: Vec<f64>,
    discrete_mu: f64,
    /// Nodal flux traces per side before the recursion.
    lower: SideStack,
    upper: SideStack,
}

/// Builds the mode at `xi` from a solved fixed point, derivatives to order one.
pub fn build_mode(
    profile: &EquilibriumProfile,
    point: &DispersionPoint,
    eig: &EigenResult,
    xi: [f64; 2],
) -> Result<NormalMode> {
    let xi_abs = xi[0].hypot(xi[1]);
    if (xi_abs - point.xi_abs).abs() > 1e-12 * point.xi_abs.max(1.0) {
        return Err(Error::FrameMismatch {
            expected: point.xi_abs,
            given: xi_abs,
        });
    }
    let lambda = point.lambda.ok_or(Error::NoGrowingMode {
        s: point.s_star.unwrap_or(0.0),
        mu: eig.mu,
    })?;
    if eig.vector.len() != DofLayout::new(profile.grid()).len() {
        return Err(Error::InvalidParameter("minimizer does not match the grid".into()));
    }
    let mut mode = NormalMode {
        xi,
        xi_abs,
        lambda,
        omega: profile.omega(),
        gravity: profile.gravity(),
        k_max: 0,
        grid: profile.grid().clone(),
        discrete: eig.vector.clone(),
        discrete_mu: eig.mu,
        lower: SideStack::empty(),
        upper: SideStack::empty(),
    };
    mode.rebuild(profile, 1)?;
    Ok(mode)
}

/// Convenience wrapper over a solved fixed point.
pub fn mode_from_fixed_point(profile: &EquilibriumProfile, fp: &FixedPoint, xi: [f64; 2]) -> Result<NormalMode> {
    let eig = fp.eigen.as_ref().ok_or(Error::NoGrowingMode { s: 0.0, mu: 0.0 })?;
    build_mode(profile, &fp.point, eig, xi)
}

/// Returns the mode with derivatives available to order `k_max`.
pub fn derivative_stack(mode: &NormalMode, profile: &EquilibriumProfile, k_max: usize) -> Result<NormalMode> {
    let mut out = mode.clone();
    out.rebuild(profile, k_max)?;
    Ok(out)
}

impl SideStack {
    fn empty() -> Self {
        Self {
            x: Vec::new(),
            psi: Vec::new(),
            flux: Vec::new(),
            phi: Vec::new(),
            compression: Vec::new(),
        }
    }

    fn series(&self, q: Quantity) -> &[Vec<f64>] {
        match q {
            Quantity::Phi | Quantity::Theta => &self.phi,
            Quantity::Psi => &self.psi,
            Quantity::Flux => &self.flux,
            Quantity::Compression => &self.compression,
        }
    }
}

impl NormalMode {
    pub fn xi(&self) -> [f64; 2] {
        self.xi
    }

    pub fn xi_abs(&self) -> f64 {
        self.xi_abs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn discrete_vector(&self) -> &[f64] {
        &self.discrete
    }

    /// `theta / phi` in the frame.
    pub fn theta_factor(&self) -> f64 {
        -2.0 * self.omega / (self.lambda * self.lambda)
    }

    /// `(phi_xi, theta_xi) = R (phi, theta)` with `R` the rotation carrying `(|xi|, 0)` to `xi`.
    pub fn rotation(&self) -> [[f64; 2]; 2] {
        let (c, s) = if self.xi_abs > 0.0 {
            (self.xi[0] / self.xi_abs, self.xi[1] / self.xi_abs)
        } else {
            (1.0, 0.0)
        };
        [[c, -s], [s, c]]
    }

    /// Same profiles at another frequency of the same modulus.
    pub fn rotated(&self, xi: [f64; 2]) -> Result<NormalMode> {
        let m = xi[0].hypot(xi[1]);
        if (m - self.xi_abs).abs() > 1e-12 * self.xi_abs.max(1.0) {
            return Err(Error::FrameMismatch {
                expected: self.xi_abs,
                given: m,
            });
        }
        Ok(Self { xi, ..self.clone() })
    }

    fn stack(&self, side: Side) -> &SideStack {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    pub fn side_nodes(&self, side: Side) -> &[f64] {
        &self.stack(side).x
    }

    /// Derivative orders that can be interpolated.
    fn check_order(&self, q: Quantity, j: usize) -> Result<()> {
        let top = match q {
            Quantity::Compression => self.k_max,
            _ => self.k_max + 1,
        };
        if j > top {
            return Err(Error::DerivativeOrderUnavailable {
                requested: j,
                available: top,
            });
        }
        Ok(())
    }

    /// Frame derivative `d^j q / dx3^j` at a node of `side` (local index).
    pub fn nodal_derivative(&self, q: Quantity, side: Side, node: usize, j: usize) -> f64 {
        let v = series::nth_derivative(&self.stack(side).series(q)[node], j);
        if q == Quantity::Theta {
            self.theta_factor() * v
        } else {
            v
        }
    }

    /// Frame nodal profile of one side.
    pub fn nodal(&self, q: Quantity, side: Side, j: usize) -> Vec<f64> {
        (0..self.stack(side).x.len())
            .map(|i| self.nodal_derivative(q, side, i, j))
            .collect()
    }

    /// `[value, d1, d2]` of the order-`j` derivative at `x3` in the frame, by quintic
    /// Hermite interpolation of the nodal stack.
    pub fn frame_jet(&self, q: Quantity, side: Side, x3: f64, j: usize) -> Result<[f64; 3]> {
        self.check_order(q, j)?;
        let base = if q == Quantity::Theta { Quantity::Phi } else { q };
        let st = self.stack(side);
        let n = st.x.len();
        let e = st.x.partition_point(|&v| v <= x3).clamp(1, n - 1) - 1;
        let (xa, xb) = (st.x[e], st.x[e + 1]);
        let h = xb - xa;
        let data = st.series(base);
        let pick = |node: usize| {
            [
                series::nth_derivative(&data[node], j),
                series::nth_derivative(&data[node], j + 1),
                series::nth_derivative(&data[node], j + 2),
            ]
        };
        let p = Quintic::new(h, pick(e), pick(e + 1));
        let t = ((x3 - xa) / h).clamp(0.0, 1.0);
        let mut out = [p.eval(t, 0), p.eval(t, 1), p.eval(t, 2)];
        if q == Quantity::Theta {
            let f = self.theta_factor();
            out.iter_mut().for_each(|v| *v *= f);
        }
        Ok(out)
    }

    pub fn frame_value(&self, q: Quantity, side: Side, x3: f64, j: usize) -> Result<f64> {
        Ok(self.frame_jet(q, side, x3, j)?[0])
    }

    /// `(phi_xi, theta_xi, psi)` derivatives of order `j` at `x3` for the mode's own `xi`.
    pub fn components(&self, side: Side, x3: f64, j: usize) -> Result<[f64; 3]> {
        let phi = self.frame_value(Quantity::Phi, side, x3, j)?;
        let theta = self.theta_factor() * phi;
        let psi = self.frame_value(Quantity::Psi, side, x3, j)?;
        let r = self.rotation();
        Ok([r[0][0] * phi + r[0][1] * theta, r[1][0] * phi + r[1][1] * theta, psi])
    }

    /// Nodal `(phi_xi, theta_xi)` of one side for the mode's own `xi`.
    pub fn horizontal(&self, side: Side) -> (Vec<f64>, Vec<f64>) {
        let r = self.rotation();
        let phi = self.nodal(Quantity::Phi, side, 0);
        let theta = self.nodal(Quantity::Theta, side, 0);
        let a = phi.iter().zip(&theta).map(|(p, t)| r[0][0] * p + r[0][1] * t).collect();
        let b = phi.iter().zip(&theta).map(|(p, t)| r[1][0] * p + r[1][1] * t).collect();
        (a, b)
    }

    /// `|w(0+) - w(0-)|`.
    pub fn flux_jump(&self) -> f64 {
        (self.upper.flux[0][0] - self.lower.flux[self.lower.x.len() - 1][0]).abs()
    }

    pub fn psi_at_interface(&self) -> f64 {
        self.upper.psi[0][0]
    }

    fn rebuild(&mut self, profile: &EquilibriumProfile, k_max: usize) -> Result<()> {
        let order = k_max + EXTRA_ORDERS;
        if order > profile.taylor_order() {
            return Err(Error::DerivativeOrderUnavailable {
                requested: k_max,
                available: profile.taylor_order().saturating_sub(EXTRA_ORDERS),
            });
        }
        if !(self.xi_abs > 0.0) {
            return Err(Error::InvalidParameter("derivative stack needs |xi| > 0".into()));
        }
        let (lower_w, upper_w) = recover_flux(profile, &self.discrete, self.xi_abs, self.discrete_mu);
        let layout = DofLayout::new(&self.grid);
        let psi = layout.nodal_psi(&self.discrete);
        for side in Side::BOTH {
            let nodes: Vec<usize> = profile.side_nodes(side).collect();
            let w = match side {
                Side::Lower => &lower_w,
                Side::Upper => &upper_w,
            };
            let mut st = SideStack::empty();
            for (local, &i) in nodes.iter().enumerate() {
                let (ps, fl, ph, co) = self.recurse(profile, i, side, psi[i], w[local], order)?;
                st.x.push(self.grid.nodes()[i]);
                st.psi.push(ps);
                st.flux.push(fl);
                st.phi.push(ph);
                st.compression.push(co);
            }
            match side {
                Side::Lower => self.lower = st,
                Side::Upper => self.upper = st,
            }
        }
        self.k_max = k_max;
        Ok(())
    }

    /// Taylor coefficients of `(psi, w, phi, compression)` from the first-order system
    /// `phi = |xi| (w / rho - g psi) / D`, `psi' = w / a - |xi| phi`,
    /// `w' = lambda^2 rho psi - g |xi| rho phi`, with `D = -lambda^2 - 4 omega^2 / lambda^2`.
    #[allow(clippy::type_complexity)]
    fn recurse(
        &self,
        profile: &EquilibriumProfile,
        node: usize,
        side: Side,
        psi0: f64,
        w0: f64,
        order: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        let l2 = self.lambda * self.lambda;
        let denom = -l2 - 4.0 * self.omega * self.omega / l2;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::SingularCoefficient);
        }
        let k = self.xi_abs;
        let g = self.gravity;
        let rho = profile.density_series_at(node, side);
        let a = profile.stiffness_series_at(node, side);
        let mut psi = vec![psi0];
        let mut w = vec![w0];
        let mut phi: Vec<f64> = Vec::with_capacity(order + 1);
        let mut w_over_rho: Vec<f64> = Vec::with_capacity(order + 1);
        let mut w_over_a: Vec<f64> = Vec::with_capacity(order + 1);
        for j in 0..=order {
            w_over_rho.push(quotient_term(&w, rho, &w_over_rho, j));
            w_over_a.push(quotient_term(&w, a, &w_over_a, j));
            phi.push(k * (w_over_rho[j] - g * psi[j]) / denom);
            if j < order {
                psi.push((w_over_a[j] - k * phi[j]) / (j + 1) as f64);
                let next = l2 * series::mul_at(rho, &psi, j) - g * k * series::mul_at(rho, &phi, j);
                w.push(next / (j + 1) as f64);
            }
        }
        let dpsi = series::derivative(&psi);
        let inner: Vec<f64> = dpsi.iter().zip(&phi).map(|(d, p)| k * p + d).collect();
        let compression = series::mul(rho, &inner, inner.len());
        Ok((psi, w, phi, compression))
    }

    /// Nodal profiles and derivatives, duplicated at the interface.
    pub fn to_json(&self) -> Value {
        let side = |s: Side| {
            let (ph, th) = self.horizontal(s);
            let derivs: Vec<Value> = (1..=self.k_max)
                .map(|j| {
                    let (mut a, mut b) = (Vec::new(), Vec::new());
                    let r = self.rotation();
                    for i in 0..self.stack(s).x.len() {
                        let p = self.nodal_derivative(Quantity::Phi, s, i, j);
                        let t = self.nodal_derivative(Quantity::Theta, s, i, j);
                        a.push(r[0][0] * p + r[0][1] * t);
                        b.push(r[1][0] * p + r[1][1] * t);
                    }
                    json!({"order": j, "phi": a, "theta": b, "psi": self.nodal(Quantity::Psi, s, j)})
                })
                .collect();
            json!({
                "x3": self.stack(s).x,
                "phi": ph,
                "theta": th,
                "psi": self.nodal(Quantity::Psi, s, 0),
                "w": self.nodal(Quantity::Flux, s, 0),
                "derivatives": derivs,
            })
        };
        json!({
            "xi": self.xi,
            "lambda": self.lambda,
            "omega": self.omega,
            "grid": self.grid.nodes(),
            "lower": side(Side::Lower),
            "upper": side(Side::Upper),
        })
    }
}

fn quotient_term(num: &[f64], den: &[f64], q: &[f64], n: usize) -> f64 {
    let mut acc = num.get(n).copied().unwrap_or(0.0);
    for i in 1..=n.min(den.len() - 1) {
        acc -= den[i] * q[n - i];
    }
    acc / den[0]
}

/// One-sided nodal flux traces recovered from the element balances of the
/// discrete minimizer. They agree at interior nodes up to the eigen residual.
fn recover_flux(profile: &EquilibriumProfile, x: &[f64], xi_abs: f64, mu: f64) -> (Vec<f64>, Vec<f64>) {
    let grid = profile.grid();
    let layout = DofLayout::new(grid);
    let psi = layout.nodal_psi(x);
    let g = profile.gravity();
    let k = xi_abs;
    let rule = GaussRule::new(QUADRATURE_POINTS);
    let n_el = grid.n_elements();
    // (left end, right end) trace per element
    let traces: Vec<(f64, f64)> = (0..n_el)
        .map(|e| {
            let side = if grid.element_is_upper(e) { Side::Upper } else { Side::Lower };
            let (xa, xb) = grid.element(e);
            let h = xb - xa;
            let phi = x[layout.phi(e)];
            let slope = (psi[e + 1] - psi[e]) / h;
            let (mut a_int, mut fa, mut fb) = (0.0, 0.0, 0.0);
            for (xq, wq) in rule.on(xa, xb) {
                let rho = profile.density(xq, side);
                let na = (xb - xq) / h;
                let nb = (xq - xa) / h;
                let psi_q = psi[e] * na + psi[e + 1] * nb;
                let f = mu * rho * psi_q + g * k * rho * phi;
                a_int += wq * profile.stiffness(xq, side);
                fa += wq * f * na;
                fb += wq * f * nb;
            }
            let mean = a_int / h * (slope + k * phi);
            (mean + fa, mean - fb)
        })
        .collect();
    let iface = grid.interface_index();
    let nodal = |range: std::ops::RangeInclusive<usize>, first: usize, last: usize| -> Vec<f64> {
        range
            .map(|i| {
                if i == first {
                    traces[i].0
                } else if i == last {
                    traces[i - 1].1
                } else {
                    0.5 * (traces[i - 1].1 + traces[i].0)
                }
            })
            .collect()
    };
    (
        nodal(0..=iface, 0, iface),
        nodal(iface..=n_el, iface, n_el),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeResidual {
    /// Horizontal momentum along `xi`.
    pub along: f64,
    /// Horizontal momentum across `xi`.
    pub across: f64,
    pub vertical: f64,
    /// Constitutive relation `w = p'(rho0) rho0 (psi' + |xi| phi)`.
    pub flux: f64,
    /// `|[[w]]|` at the interface.
    pub jump: f64,
    /// `|psi(-m)| + |psi(l)| + |[[psi]]|`.
    pub boundary: f64,
}

impl ModeResidual {
    pub fn max_equation(&self) -> f64 {
        self.along.max(self.across).max(self.vertical).max(self.flux)
    }
}

/// Strong-form residuals in the frame, `L^2` over both sides, divided by the
/// mode's mass norm. The vertical balance is written for the flux `w`, so
/// the system is checked in its first-order form plus the constitutive law.
pub fn ode_residual(mode: &NormalMode, profile: &EquilibriumProfile) -> Result<ModeResidual> {
    let rule = GaussRule::new(5);
    let l2 = mode.lambda * mode.lambda;
    let k = mode.xi_abs;
    let g = mode.gravity;
    let om = mode.omega;
    let c_theta = mode.theta_factor();
    let (mut r1, mut r2, mut r3, mut r4, mut mass) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for side in Side::BOTH {
        let xs = mode.side_nodes(side);
        for e in 0..xs.len() - 1 {
            for (x, w) in rule.on(xs[e], xs[e + 1]) {
                let psi = mode.frame_jet(Quantity::Psi, side, x, 0)?;
                let phi = mode.frame_value(Quantity::Phi, side, x, 0)?;
                let theta = mode.frame_value(Quantity::Theta, side, x, 0)?;
                let flux = mode.frame_jet(Quantity::Flux, side, x, 0)?;
                let rho = profile.density(x, side);
                let a = profile.stiffness(x, side);
                let e1 = l2 * rho * phi + k * flux[0] - k * g * rho * psi[0] - 2.0 * rho * om * theta;
                let e2 = rho * l2 * (theta - c_theta * phi);
                let e3 = l2 * rho * psi[0] - flux[1] - g * k * rho * phi;
                let e4 = flux[0] - a * (psi[1] + k * phi);
                r1 += w * e1 * e1;
                r2 += w * e2 * e2;
                r3 += w * e3 * e3;
                r4 += w * e4 * e4;
                mass += 0.5 * w * rho * (phi * phi + psi[0] * psi[0]);
            }
        }
    }
    let norm = mass.sqrt();
    let last = mode.lower.x.len() - 1;
    let boundary = mode.lower.psi[0][0].abs()
        + mode.upper.psi[mode.upper.x.len() - 1][0].abs()
        + (mode.upper.psi[0][0] - mode.lower.psi[last][0]).abs();
    Ok(ModeResidual {
        along: r1.sqrt() / norm,
        across: r2.sqrt() / norm,
        vertical: r3.sqrt() / norm,
        flux: r4.sqrt() / norm,
        jump: mode.flux_jump() / norm,
        boundary: boundary / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::solve_fixed_point_detailed;
    use crate::equilibrium::{integrate_hydrostatic, FluidConfig};

    #[test]
    fn quarter_turn_swaps_components() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(1.0), 32).unwrap();
        let fp = solve_fixed_point_detailed(&p, 20.0).unwrap();
        let m = mode_from_fixed_point(&p, &fp, [20.0, 0.0]).unwrap();
        let r = m.rotated([0.0, 20.0]).unwrap();
        let (phi, theta) = m.horizontal(Side::Upper);
        let (a, b) = r.horizontal(Side::Upper);
        for i in 0..phi.len() {
            assert!((a[i] + theta[i]).abs() < 1e-14 * phi[i].abs().max(1.0));
            assert!((b[i] - phi[i]).abs() < 1e-14 * phi[i].abs().max(1.0));
        }
        assert!(matches!(m.rotated([1.0, 0.0]), Err(Error::FrameMismatch { .. })));
    }
}
