//! Fourier synthesis of real growing solutions from radially symmetric
//! amplitudes supported in an annulus of horizontal frequencies, and the
//! ill-posedness sequence built from it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::solve_fixed_point_detailed;
use crate::equilibrium::{integrate_on_grid, EquilibriumProfile, HydrostaticOptions, Side};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::modes::{derivative_stack, mode_from_fixed_point, NormalMode, Quantity};
use crate::quadrature::GaussRule;

/// Gauss points per element for the vertical integrals.
const VERTICAL_POINTS: usize = 6;

/// Smooth bump `amplitude * exp(-1 / (1 - u^2))` with `u` the position across
/// `(inner, outer)` rescaled to `(-1, 1)`; zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialAmplitude {
    inner: f64,
    outer: f64,
    amplitude: f64,
}

impl RadialAmplitude {
    pub fn new(inner: f64, outer: f64, amplitude: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "annulus needs 0 < inner < outer, got ({inner}, {outer})"
            )));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter("amplitude must be positive".into()));
        }
        Ok(Self { inner, outer, amplitude })
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(self.inner, self.outer, amplitude)
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner || r >= self.outer {
            return 0.0;
        }
        let u = (2.0 * r - self.inner - self.outer) / (self.outer - self.inner);
        self.amplitude * (-1.0 / (1.0 - u * u)).exp()
    }

    /// `int (1 + |xi|^2)^order f^2 dxi` over the plane.
    pub fn weighted_mass(&self, order: i32, n_r: usize) -> f64 {
        GaussRule::new(n_r)
            .integrate(self.inner, self.outer, |r| 2.0 * PI * r * (1.0 + r * r).powi(order) * self.value(r).powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Eta,
    V,
    Q,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Eta, Field::V, Field::Q];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Eta => "eta",
            Field::V => "v",
            Field::Q => "q",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub n_r: usize,
    /// Must be even so the angular grid is symmetric under `xi -> -xi`.
    pub n_theta: usize,
    pub k_max: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_theta: 16,
            k_max: 3,
        }
    }
}

/// Vertical integrals of squared frame derivatives, indexed by order.
#[derive(Debug, Clone, PartialEq)]
struct ModeIntegrals {
    phi: Vec<f64>,
    psi: Vec<f64>,
    compression: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RadialNode {
    pub radius: f64,
    pub weight: f64,
    pub lambda: f64,
    mode: NormalMode,
    integrals: ModeIntegrals,
}

impl RadialNode {
    pub fn mode(&self) -> &NormalMode {
        &self.mode
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisField {
    amplitude: RadialAmplitude,
    options: SynthesisOptions,
    nodes: Vec<RadialNode>,
}

impl SynthesisField {
    /// Solves one mode per radial quadrature node, in parallel.
    pub fn build(profile: &EquilibriumProfile, amplitude: RadialAmplitude, options: SynthesisOptions) -> Result<Self> {
        if options.n_r == 0 || options.n_theta == 0 || !options.n_theta.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "n_r must be positive and n_theta positive and even".into(),
            ));
        }
        let rule = GaussRule::new(options.n_r);
        let points: Vec<(f64, f64)> = rule.on(amplitude.inner, amplitude.outer).collect();
        let nodes = points
            .par_iter()
            .map(|&(r, w)| {
                let fp = solve_fixed_point_detailed(profile, r).map_err(|_| Error::ModeUnavailable(r))?;
                let lambda = fp.point.lambda.ok_or(Error::ModeUnavailable(r))?;
                let mode = mode_from_fixed_point(profile, &fp, [r, 0.0]).map_err(|_| Error::ModeUnavailable(r))?;
                let mode = derivative_stack(&mode, profile, options.k_max)?;
                let integrals = vertical_integrals(&mode, options.k_max)?;
                Ok(RadialNode {
                    radius: r,
                    weight: w,
                    lambda,
                    mode,
                    integrals,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            amplitude,
            options,
            nodes,
        })
    }

    pub fn amplitude(&self) -> &RadialAmplitude {
        &self.amplitude
    }

    pub fn options(&self) -> SynthesisOptions {
        self.options
    }

    pub fn nodes(&self) -> &[RadialNode] {
        &self.nodes
    }

    /// Smallest and largest growth rate over the support.
    pub fn lambda_range(&self) -> (f64, f64) {
        self.nodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), n| (lo.min(n.lambda), hi.max(n.lambda)))
    }

    /// Same field with every amplitude rescaled; modes are reused.
    pub fn rescaled(&self, amplitude: f64) -> Result<Self> {
        Ok(Self {
            amplitude: self.amplitude.with_amplitude(amplitude)?,
            ..self.clone()
        })
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.options.k_max {
            return Err(Error::DerivativeOrderUnavailable {
                requested: k,
                available: self.options.k_max,
            });
        }
        Ok(())
    }

    /// Piecewise `H^k` norm by radial reduction.
    pub fn hk_norm(&self, which: Field, k: usize, t: f64) -> Result<f64> {
        self.check_order(k)?;
        let mut total = 0.0;
        for node in &self.nodes {
            let r = node.radius;
            let f = self.amplitude.value(r);
            let coef = f * f * (2.0 * node.lambda * t).exp() * field_weight(which, node.lambda);
            let tf2 = node.mode.theta_factor().powi(2);
            let mut inner = 0.0;
            for j in 0..=k {
                let vertical = match which {
                    Field::Eta | Field::V => (1.0 + tf2) * node.integrals.phi[j] + node.integrals.psi[j],
                    Field::Q => node.integrals.compression[j],
                };
                inner += (1.0 + r * r).powi((k - j) as i32) * vertical;
            }
            total += node.weight * 2.0 * PI * r * coef * inner;
        }
        Ok((total / (4.0 * PI * PI)).sqrt())
    }

    /// `H^k` norm by explicit quadrature over the polar grid, rotating each mode
    /// to its own frequency.
    pub fn hk_norm_polar(&self, which: Field, k: usize, t: f64) -> Result<f64> {
        self.check_order(k)?;
        let n_theta = self.options.n_theta;
        let dtheta = 2.0 * PI / n_theta as f64;
        let rule = GaussRule::new(VERTICAL_POINTS);
        let mut total = 0.0;
        for node in &self.nodes {
            let r = node.radius;
            let f = self.amplitude.value(r);
            let coef = f * f * (2.0 * node.lambda * t).exp() * field_weight(which, node.lambda);
            for a in 0..n_theta {
                let angle = a as f64 * dtheta;
                let mode = node.mode.rotated([r * angle.cos(), r * angle.sin()])?;
                let mut inner = 0.0;
                for j in 0..=k {
                    let mut vertical = 0.0;
                    for side in Side::BOTH {
                        let xs = mode.side_nodes(side);
                        for e in 0..xs.len() - 1 {
                            for (x, w) in rule.on(xs[e], xs[e + 1]) {
                                vertical += w * match which {
                                    Field::Eta | Field::V => {
                                        mode.components(side, x, j)?.iter().map(|c| c * c).sum::<f64>()
                                    }
                                    Field::Q => mode.frame_value(Quantity::Compression, side, x, j)?.powi(2),
                                };
                            }
                        }
                    }
                    inner += (1.0 + r * r).powi((k - j) as i32) * vertical;
                }
                total += node.weight * r * dtheta * coef * inner;
            }
        }
        Ok((total / (4.0 * PI * PI)).sqrt())
    }

    /// Real fields at `(x1, x2, x3)` and the relative size of the discarded imaginary part.
    pub fn evaluate(&self, t: f64, x: [f64; 3]) -> Result<FieldSample> {
        let side = if x[2] < 0.0 {
            Side::Lower
        } else if x[2] > 0.0 {
            Side::Upper
        } else {
            return Err(Error::InterfaceSample);
        };
        let n_theta = self.options.n_theta;
        let dtheta = 2.0 * PI / n_theta as f64;
        let i = Complex64::new(0.0, 1.0);
        let mut eta = [Complex64::new(0.0, 0.0); 3];
        let mut v = [Complex64::new(0.0, 0.0); 3];
        let mut q = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for node in &self.nodes {
            let r = node.radius;
            let base = node.weight * r * dtheta * self.amplitude.value(r) * (node.lambda * t).exp() / (4.0 * PI * PI);
            let compression = node.mode.frame_value(Quantity::Compression, side, x[2], 0)?;
            for a in 0..n_theta {
                let angle = a as f64 * dtheta;
                let xi = [r * angle.cos(), r * angle.sin()];
                let mode = node.mode.rotated(xi)?;
                let [p1, p2, psi] = mode.components(side, x[2], 0)?;
                let phase = Complex64::from_polar(base, x[0] * xi[0] + x[1] * xi[1]);
                let w = [-i * p1, -i * p2, Complex64::new(psi, 0.0)];
                for c in 0..3 {
                    let term = w[c] * phase;
                    eta[c] += term;
                    v[c] += node.lambda * term;
                    scale += term.norm() * (1.0 + node.lambda);
                }
                let term = -compression * phase;
                q += term;
                scale += term.norm();
            }
        }
        let imag = eta
            .iter()
            .chain(&v)
            .chain(std::iter::once(&q))
            .map(|z| z.im.abs())
            .fold(0.0, f64::max);
        Ok(FieldSample {
            eta: eta.map(|z| z.re),
            v: v.map(|z| z.re),
            q: q.re,
            imaginary_residue: if scale > 0.0 { imag / scale } else { 0.0 },
        })
    }

    /// `eta_3` at `x' = 0` reduced to a single radial integral.
    pub fn vertical_on_axis(&self, t: f64, x3: f64) -> Result<f64> {
        let side = if x3 < 0.0 {
            Side::Lower
        } else if x3 > 0.0 {
            Side::Upper
        } else {
            return Err(Error::InterfaceSample);
        };
        let mut acc = 0.0;
        for node in &self.nodes {
            let psi = node.mode.frame_value(Quantity::Psi, side, x3, 0)?;
            acc += node.weight * node.radius * self.amplitude.value(node.radius) * (node.lambda * t).exp() * psi;
        }
        Ok(acc / (2.0 * PI))
    }
}

fn field_weight(which: Field, lambda: f64) -> f64 {
    match which {
        Field::V => lambda * lambda,
        _ => 1.0,
    }
}

fn vertical_integrals(mode: &NormalMode, k_max: usize) -> Result<ModeIntegrals> {
    let rule = GaussRule::new(VERTICAL_POINTS);
    let mut out = ModeIntegrals {
        phi: vec![0.0; k_max + 1],
        psi: vec![0.0; k_max + 1],
        compression: vec![0.0; k_max + 1],
    };
    for side in Side::BOTH {
        let xs = mode.side_nodes(side);
        for e in 0..xs.len() - 1 {
            for (x, w) in rule.on(xs[e], xs[e + 1]) {
                for j in 0..=k_max {
                    out.phi[j] += w * mode.frame_value(Quantity::Phi, side, x, j)?.powi(2);
                    out.psi[j] += w * mode.frame_value(Quantity::Psi, side, x, j)?.powi(2);
                    out.compression[j] += w * mode.frame_value(Quantity::Compression, side, x, j)?.powi(2);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub eta: [f64; 3],
    pub v: [f64; 3],
    pub q: f64,
    pub imaginary_residue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub lower_bound: f64,
    pub value: f64,
    pub upper_bound: f64,
}

/// Checks `e^{t lmin} |.(0)| <= |.(t)| <= e^{t lmax} |.(0)|` with relative `slack`.
pub fn growth_sandwich(field: &SynthesisField, which: Field, k: usize, t: f64, slack: f64) -> Result<Sandwich> {
    let (lo, hi) = field.lambda_range();
    let n0 = field.hk_norm(which, k, 0.0)?;
    let value = field.hk_norm(which, k, t)?;
    let lower_bound = (t * lo).exp() * n0;
    let upper_bound = (t * hi).exp() * n0;
    Ok(Sandwich {
        lower_ok: value >= lower_bound * (1.0 - slack),
        upper_ok: value <= upper_bound * (1.0 + slack),
        lower_bound,
        value,
        upper_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IllposedOptions {
    /// Regularity of the initial-data norm.
    pub j: usize,
    /// Regularity of the grown displacement norm.
    pub k: usize,
    pub alpha: f64,
    pub t0: f64,
    pub n_max: usize,
    pub ladder_start: f64,
    pub ladder_factor: f64,
    pub r_limit: f64,
    pub n_r: usize,
    pub n_per_side: usize,
    /// Samples of `[t0, 2 t0]` checked for persistence of the growth.
    pub t_samples: usize,
}

impl Default for IllposedOptions {
    fn default() -> Self {
        Self {
            j: 2,
            k: 1,
            alpha: 1.0,
            t0: 1.0,
            n_max: 4,
            ladder_start: 10.0,
            ladder_factor: std::f64::consts::SQRT_2,
            r_limit: 4096.0,
            n_r: 16,
            n_per_side: 128,
            t_samples: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IllposedEntry {
    pub n: usize,
    pub radius: f64,
    pub init_norm: f64,
    pub grown_norm: f64,
    /// Smallest grown norm over the samples of `[t0, 2 t0]`.
    pub grown_min: f64,
    /// `|v(t)|_{H^k} >= |eta(t)|_{H^k}` at every sample, checked when `lambda >= 1` on the support.
    pub velocity_dominates: Option<bool>,
    pub lambda_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IllposedOutcome {
    Found(IllposedEntry),
    Exhausted { n: usize, limit: f64 },
}

fn combined_norm(field: &SynthesisField, order: usize, t: f64) -> Result<f64> {
    let mut acc = 0.0;
    for which in Field::ALL {
        acc += field.hk_norm(which, order, t)?.powi(2);
    }
    Ok(acc.sqrt())
}

/// Field on `(R, R + 1)` over a grid refined toward the interface on the scale `1/R`.
fn ladder_field(profile: &EquilibriumProfile, radius: f64, opts: &IllposedOptions) -> Result<SynthesisField> {
    let cfg = profile.config();
    let grid = Grid1D::with_interface_width(cfg.depth, cfg.height, opts.n_per_side, 0.1 / radius)?;
    let refined = integrate_on_grid(cfg, grid, HydrostaticOptions::default())?;
    SynthesisField::build(
        &refined,
        RadialAmplitude::new(radius, radius + 1.0, 1.0)?,
        SynthesisOptions {
            n_r: opts.n_r,
            n_theta: 2,
            k_max: opts.j.max(opts.k),
        },
    )
}

/// For each `n`, climbs the ladder of radii until data of size `1/n` in `H^j`
/// grows past `alpha` in `H^k` by `t0`.
pub fn illposed_sequence(profile: &EquilibriumProfile, opts: &IllposedOptions) -> Result<Vec<IllposedOutcome>> {
    if opts.j < opts.k {
        return Err(Error::InvalidParameter("need j >= k".into()));
    }
    if !(opts.ladder_factor > 1.0 && opts.ladder_start > 0.0 && opts.alpha > 0.0 && opts.t0 > 0.0) {
        return Err(Error::InvalidParameter("ladder, alpha and t0 must be positive".into()));
    }
    let mut cache: Vec<(f64, Result<SynthesisField>)> = Vec::new();
    let mut out = Vec::with_capacity(opts.n_max);
    let mut rung = 0usize;
    for n in 1..=opts.n_max {
        let target = 1.0 / n as f64;
        let found = loop {
            let radius = opts.ladder_start * opts.ladder_factor.powi(rung as i32);
            if radius > opts.r_limit {
                break None;
            }
            if cache.len() <= rung {
                cache.push((radius, ladder_field(profile, radius, opts)));
            }
            if let (_, Ok(unit)) = &cache[rung] {
                let init_unit = combined_norm(unit, opts.j, 0.0)?;
                let field = unit.rescaled(target / init_unit)?;
                let init = combined_norm(&field, opts.j, 0.0)?;
                let samples: Vec<f64> = (0..opts.t_samples.max(1))
                    .map(|i| opts.t0 * (1.0 + i as f64 / (opts.t_samples.max(2) - 1) as f64))
                    .collect();
                let grown: Vec<f64> = samples
                    .iter()
                    .map(|&t| field.hk_norm(Field::Eta, opts.k, t))
                    .collect::<Result<_>>()?;
                let grown_min = grown.iter().copied().fold(f64::INFINITY, f64::min);
                if grown_min >= opts.alpha {
                    let (lmin, _) = field.lambda_range();
                    let velocity_dominates = if lmin >= 1.0 {
                        let mut ok = true;
                        for &t in &samples {
                            ok &= field.hk_norm(Field::V, opts.k, t)? >= field.hk_norm(Field::Eta, opts.k, t)?;
                        }
                        Some(ok)
                    } else {
                        None
                    };
                    break Some(IllposedEntry {
                        n,
                        radius,
                        init_norm: init,
                        grown_norm: grown[0],
                        grown_min,
                        velocity_dominates,
                        lambda_min: lmin,
                    });
                }
            }
            rung += 1;
        };
        out.push(match found {
            Some(entry) => IllposedOutcome::Found(entry),
            None => IllposedOutcome::Exhausted {
                n,
                limit: opts.r_limit,
            },
        });
    }
    Ok(out)
}
