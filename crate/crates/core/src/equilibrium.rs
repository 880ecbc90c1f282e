//! Hydrostatic two-layer equilibrium with a density jump at `x3 = 0`.

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::law::PressureLaw;
use crate::series;

/// Which fluid a quantity belongs to. `Upper` occupies `(0, l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Lower, Side::Upper];

    pub fn sign(self) -> char {
        match self {
            Side::Lower => '-',
            Side::Upper => '+',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidConfig {
    pub upper: PressureLaw,
    pub lower: PressureLaw,
    pub gravity: f64,
    pub omega: f64,
    pub depth: f64,
    pub height: f64,
    pub interface_pressure: f64,
}

impl FluidConfig {
    /// Affine laws `p+ = rho`, `p- = 2 rho`, `P* = 2`, unit gravity and depths.
    pub fn benchmark(omega: f64) -> Self {
        Self {
            upper: PressureLaw::affine(1.0).expect("positive stiffness"),
            lower: PressureLaw::affine(2.0).expect("positive stiffness"),
            gravity: 1.0,
            omega,
            depth: 1.0,
            height: 1.0,
            interface_pressure: 2.0,
        }
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self {
            omega,
            ..self.clone()
        }
    }

    pub fn law(&self, side: Side) -> &PressureLaw {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    /// Every violated constraint, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            out.push("g must be nonnegative".to_string());
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            out.push("omega must be nonnegative".to_string());
        }
        if !positive(self.depth) {
            out.push("m must be positive".to_string());
        }
        if !positive(self.height) {
            out.push("l must be positive".to_string());
        }
        if !positive(self.interface_pressure) {
            out.push("interface_pressure must be positive".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

/// Densities `(rho_minus0, rho_plus0)` matching the interface pressure.
pub fn solve_interface_densities(config: &FluidConfig) -> Result<(f64, f64)> {
    config.validate()?;
    if config.upper == config.lower {
        return Err(Error::ConfigRejected("the pressure laws must be distinct".into()));
    }
    let below = config.lower.density_at(config.interface_pressure);
    let above = config.upper.density_at(config.interface_pressure);
    if !(above > below) {
        return Err(Error::ConfigRejected(format!(
            "upper density {above} must exceed lower density {below} at the interface"
        )));
    }
    Ok((below, above))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HydrostaticOptions {
    /// RK4 steps per element.
    pub substeps: usize,
    /// Taylor order of the per-node density expansions.
    pub taylor_order: usize,
}

impl Default for HydrostaticOptions {
    fn default() -> Self {
        Self {
            substeps: 4,
            taylor_order: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumProfile {
    config: FluidConfig,
    grid: Grid1D,
    rho_minus0: f64,
    rho_plus0: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    taylor_order: usize,
    lower_series: Vec<Vec<f64>>,
    upper_series: Vec<Vec<f64>>,
    lower_stiffness: Vec<Vec<f64>>,
    upper_stiffness: Vec<Vec<f64>>,
}

/// Uniform grid with `n_per_side` elements on each side.
pub fn integrate_hydrostatic(config: &FluidConfig, n_per_side: usize) -> Result<EquilibriumProfile> {
    if n_per_side < 4 {
        return Err(Error::InvalidGrid(format!(
            "need at least 4 elements per side, got {n_per_side}"
        )));
    }
    config.validate()?;
    let grid = Grid1D::uniform(config.depth, config.height, n_per_side, n_per_side)?;
    integrate_on_grid(config, grid, HydrostaticOptions::default())
}

pub fn integrate_on_grid(
    config: &FluidConfig,
    grid: Grid1D,
    options: HydrostaticOptions,
) -> Result<EquilibriumProfile> {
    let (rho_minus0, rho_plus0) = solve_interface_densities(config)?;
    if grid.depth() != config.depth || grid.height() != config.height {
        return Err(Error::InvalidGrid("grid does not span the fluid column".into()));
    }
    if options.substeps == 0 {
        return Err(Error::InvalidParameter("need at least one substep".into()));
    }
    check_reachable(config, Side::Upper, rho_plus0)?;
    let iface = grid.interface_index();
    let nodes = grid.nodes();

    let mut upper = vec![rho_plus0];
    for e in iface..grid.n_elements() {
        let next = advance(config, Side::Upper, *upper.last().unwrap(), nodes[e], nodes[e + 1], options.substeps)?;
        upper.push(next);
    }
    let mut lower = vec![rho_minus0];
    for e in (0..iface).rev() {
        let next = advance(config, Side::Lower, *lower.last().unwrap(), nodes[e + 1], nodes[e], options.substeps)?;
        lower.push(next);
    }
    lower.reverse();

    let order = options.taylor_order.max(2);
    let build = |side: Side, values: &[f64]| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let law = config.law(side);
        values
            .iter()
            .map(|&rho| {
                let s = density_series(law, config.gravity, rho, order);
                let a = stiffness_series(law, &s);
                (s, a)
            })
            .unzip()
    };
    let (lower_series, lower_stiffness) = build(Side::Lower, &lower);
    let (upper_series, upper_stiffness) = build(Side::Upper, &upper);

    Ok(EquilibriumProfile {
        config: config.clone(),
        grid,
        rho_minus0,
        rho_plus0,
        lower,
        upper,
        taylor_order: order,
        lower_series,
        upper_series,
        lower_stiffness,
        upper_stiffness,
    })
}

/// Rejects power-law columns whose density would vanish below the lid.
fn check_reachable(config: &FluidConfig, side: Side, rho0: f64) -> Result<()> {
    let law = config.law(side);
    let gamma = law.gamma();
    if gamma == 1.0 {
        return Ok(());
    }
    let base = rho0.powf(gamma - 1.0);
    let drop = (gamma - 1.0) * config.gravity / (law.stiffness() * gamma);
    if base - drop * config.height <= 0.0 {
        return Err(Error::DepthTooLarge {
            side,
            x3: base / drop,
        });
    }
    Ok(())
}

fn advance(config: &FluidConfig, side: Side, rho: f64, from: f64, to: f64, substeps: usize) -> Result<f64> {
    let law = config.law(side);
    let g = config.gravity;
    let f = |r: f64| law.hydrostatic_slope(r, g);
    let h = (to - from) / substeps as f64;
    let mut r = rho;
    for k in 0..substeps {
        let k1 = f(r);
        let k2 = f(r + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h * k2);
        let k4 = f(r + h * k3);
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::DepthTooLarge {
                side,
                x3: from + h * (k + 1) as f64,
            });
        }
    }
    Ok(r)
}

/// Taylor coefficients of the hydrostatic density through a point where it equals `rho`.
pub fn density_series(law: &PressureLaw, gravity: f64, rho: f64, order: usize) -> Vec<f64> {
    let c = -gravity / (law.stiffness() * law.gamma());
    let expo = 2.0 - law.gamma();
    let mut r = Vec::with_capacity(order + 1);
    r.push(rho);
    for n in 0..order {
        let next = if expo == 1.0 {
            c * r[n]
        } else {
            c * series::powf(&r, expo, n + 1)[n]
        };
        r.push(next / (n + 1) as f64);
    }
    r
}

/// Taylor coefficients of `p'(rho) rho = K gamma rho^gamma`.
pub fn stiffness_series(law: &PressureLaw, density: &[f64]) -> Vec<f64> {
    let scale = law.stiffness() * law.gamma();
    if law.gamma() == 1.0 {
        density.iter().map(|c| scale * c).collect()
    } else {
        series::powf(density, law.gamma(), density.len())
            .into_iter()
            .map(|c| scale * c)
            .collect()
    }
}

impl EquilibriumProfile {
    pub fn config(&self) -> &FluidConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn gravity(&self) -> f64 {
        self.config.gravity
    }

    pub fn omega(&self) -> f64 {
        self.config.omega
    }

    pub fn law(&self, side: Side) -> &PressureLaw {
        self.config.law(side)
    }

    pub fn rho_minus0(&self) -> f64 {
        self.rho_minus0
    }

    pub fn rho_plus0(&self) -> f64 {
        self.rho_plus0
    }

    /// `rho0(0+) - rho0(0-)`.
    pub fn rho_jump(&self) -> f64 {
        self.rho_plus0 - self.rho_minus0
    }

    pub fn taylor_order(&self) -> usize {
        self.taylor_order
    }

    /// Global node indices owned by a side; both contain the interface.
    pub fn side_nodes(&self, side: Side) -> RangeInclusive<usize> {
        let iface = self.grid.interface_index();
        match side {
            Side::Lower => 0..=iface,
            Side::Upper => iface..=self.grid.n_nodes() - 1,
        }
    }

    fn local(&self, node: usize, side: Side) -> usize {
        let range = self.side_nodes(side);
        assert!(range.contains(&node), "node {node} is not on the {side} side");
        node - range.start()
    }

    /// Density samples of one side, interface included.
    pub fn side_densities(&self, side: Side) -> &[f64] {
        match side {
            Side::Lower => &self.lower,
            Side::Upper => &self.upper,
        }
    }

    pub fn node_density(&self, node: usize, side: Side) -> f64 {
        self.side_densities(side)[self.local(node, side)]
    }

    pub fn density_series_at(&self, node: usize, side: Side) -> &[f64] {
        let i = self.local(node, side);
        match side {
            Side::Lower => &self.lower_series[i],
            Side::Upper => &self.upper_series[i],
        }
    }

    /// Taylor coefficients of `p'(rho0) rho0` at a node.
    pub fn stiffness_series_at(&self, node: usize, side: Side) -> &[f64] {
        let i = self.local(node, side);
        match side {
            Side::Lower => &self.lower_stiffness[i],
            Side::Upper => &self.upper_stiffness[i],
        }
    }

    /// Nearest node on `side` to `x3`.
    pub fn anchor(&self, x3: f64, side: Side) -> usize {
        let nodes = self.grid.nodes();
        let range = self.side_nodes(side);
        let (lo, hi) = (*range.start(), *range.end());
        let pos = nodes.partition_point(|&x| x < x3).clamp(lo, hi);
        if pos > lo && (x3 - nodes[pos - 1]).abs() <= (nodes[pos] - x3).abs() {
            pos - 1
        } else {
            pos
        }
    }

    pub fn density(&self, x3: f64, side: Side) -> f64 {
        let i = self.anchor(x3, side);
        series::eval(self.density_series_at(i, side), x3 - self.grid.nodes()[i])
    }

    /// `p'(rho0) rho0` off-node.
    pub fn stiffness(&self, x3: f64, side: Side) -> f64 {
        let i = self.anchor(x3, side);
        series::eval(self.stiffness_series_at(i, side), x3 - self.grid.nodes()[i])
    }

    /// Taylor coefficients of the density re-expanded about an arbitrary point.
    pub fn density_series_about(&self, x3: f64, side: Side) -> Vec<f64> {
        let i = self.anchor(x3, side);
        shift(self.density_series_at(i, side), x3 - self.grid.nodes()[i])
    }

    pub fn stiffness_series_about(&self, x3: f64, side: Side) -> Vec<f64> {
        let i = self.anchor(x3, side);
        shift(self.stiffness_series_at(i, side), x3 - self.grid.nodes()[i])
    }

    pub fn rho_min(&self) -> f64 {
        self.lower.iter().chain(&self.upper).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.lower.iter().chain(&self.upper).copied().fold(0.0, f64::max)
    }

    /// Largest sound speed `sqrt(p'(rho0))` over the column.
    pub fn max_sound_speed(&self) -> f64 {
        Side::BOTH
            .iter()
            .flat_map(|&s| self.side_densities(s).iter().map(move |&r| self.law(s).dp(r)))
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// Integrated balance `max |h(rho_i) - h(rho(0)) + g x_i|` over the nodes.
    pub fn hydrostatic_residual(&self) -> f64 {
        let g = self.gravity();
        let nodes = self.grid.nodes();
        Side::BOTH
            .iter()
            .flat_map(|&side| {
                let law = self.law(side);
                let base = law.enthalpy(self.node_density(self.grid.interface_index(), side));
                self.side_nodes(side).map(move |i| {
                    (law.enthalpy(self.node_density(i, side)) - base + g * nodes[i]).abs()
                })
            })
            .fold(0.0, f64::max)
    }

    pub fn interface_pressure_mismatch(&self) -> f64 {
        (self.config.upper.pressure(self.rho_plus0) - self.config.lower.pressure(self.rho_minus0)).abs()
    }

    /// Rows `(x3, rho0, p(rho0), p'(rho0), side)`, the interface appearing once per side.
    pub fn rows(&self) -> Vec<(f64, f64, f64, f64, Side)> {
        let nodes = self.grid.nodes();
        Side::BOTH
            .iter()
            .flat_map(|&side| {
                let law = *self.law(side);
                self.side_nodes(side).map(move |i| {
                    let r = self.node_density(i, side);
                    (nodes[i], r, law.pressure(r), law.dp(r), side)
                })
            })
            .collect()
    }
}

/// Re-expand a series about `x0 + dx`.
fn shift(a: &[f64], dx: f64) -> Vec<f64> {
    let n = a.len();
    let mut out = a.to_vec();
    // Repeated synthetic division.
    for k in 0..n {
        for j in (k..n - 1).rev() {
            out[j] += dx * out[j + 1];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_interface_densities() {
        let (below, above) = solve_interface_densities(&FluidConfig::benchmark(0.0)).unwrap();
        assert_eq!((below, above), (1.0, 2.0));
    }

    #[test]
    fn power_interface_densities() {
        let cfg = FluidConfig {
            upper: PressureLaw::power(1.0, 1.4).unwrap(),
            lower: PressureLaw::power(3.0, 1.4).unwrap(),
            interface_pressure: 3.0,
            ..FluidConfig::benchmark(0.0)
        };
        let (below, above) = solve_interface_densities(&cfg).unwrap();
        assert!((below - 1.0).abs() < 1e-15);
        assert!((above - 3f64.powf(1.0 / 1.4)).abs() < 1e-14);
        assert!((above - 2.1918).abs() < 1e-6);
    }

    #[test]
    fn identical_laws_rejected() {
        let cfg = FluidConfig {
            lower: PressureLaw::affine(1.0).unwrap(),
            ..FluidConfig::benchmark(0.0)
        };
        assert!(matches!(solve_interface_densities(&cfg), Err(Error::ConfigRejected(_))));
    }

    #[test]
    fn shift_matches_reevaluation() {
        let a = [1.0, -0.5, 0.25, 0.1];
        let b = shift(&a, 0.3);
        assert!((series::eval(&b, 0.2) - series::eval(&a, 0.5)).abs() < 1e-15);
    }

    #[test]
    fn off_node_density_is_smooth() {
        let p = integrate_hydrostatic(&FluidConfig::benchmark(0.0), 64).unwrap();
        for x in [0.013f64, 0.5 / 64.0, 0.77] {
            let up = 2.0 * (-x).exp();
            let down = (x / 2.0).exp();
            assert!((p.density(x, Side::Upper) - up).abs() < 1e-10 * up);
            assert!((p.density(-x, Side::Lower) - down).abs() < 1e-10 * down);
        }
        assert!((p.stiffness(-0.3, Side::Lower) - 2.0 * (0.15f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn too_deep_power_column_rejected() {
        let cfg = FluidConfig {
            upper: PressureLaw::power(1.0, 2.0).unwrap(),
            lower: PressureLaw::power(4.0, 2.0).unwrap(),
            interface_pressure: 1.0,
            height: 10.0,
            ..FluidConfig::benchmark(0.0)
        };
        assert!(matches!(
            integrate_hydrostatic(&cfg, 8),
            Err(Error::DepthTooLarge { side: Side::Upper, .. })
        ));
    }
}
