//! Time integration of the linearized equations at one horizontal frequency.
//!
//! Unknowns share the geometry of the variational discretization:
//! horizontal displacement and velocity are constant per element, the
//! vertical ones are continuous piecewise linear with zero ends, and the
//! pressure amplitude `q` lives at the element quadrature points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{EquilibriumProfile, Side};
use crate::error::{Error, Result};
use crate::forms::{DofLayout, QUADRATURE_POINTS};
use crate::quadrature::GaussRule;

type C = Complex64;
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
struct QuadPoint {
    weight: f64,
    rho: f64,
    /// `p'(rho0)`
    sound2: f64,
    na: f64,
    nb: f64,
}

#[derive(Debug, Clone)]
struct Element {
    width: f64,
    mass: f64,
    points: [QuadPoint; QUADRATURE_POINTS],
}

/// Precomputed discrete operator for one frequency.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    xi: [f64; 2],
    gravity: f64,
    omega: f64,
    rho_jump: f64,
    interface_node: usize,
    elements: Vec<Element>,
    /// Consistent mass of the vertical unknowns: diagonal and superdiagonal.
    m3_diag: Vec<f64>,
    m3_off: Vec<f64>,
    min_width: f64,
    max_sound: f64,
    nodes: Vec<f64>,
}

/// Flat state `[eta1, eta2, eta3, v1, v2, v3, q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub xi: [f64; 2],
    pub time: f64,
    data: Vec<C>,
    n_el: usize,
}

impl SpectralOperator {
    pub fn new(profile: &EquilibriumProfile, xi: [f64; 2]) -> Self {
        let grid = profile.grid();
        let rule = GaussRule::new(QUADRATURE_POINTS);
        let n_el = grid.n_elements();
        let elements: Vec<Element> = (0..n_el)
            .map(|e| {
                let side = if grid.element_is_upper(e) { Side::Upper } else { Side::Lower };
                let law = profile.law(side);
                let (xa, xb) = grid.element(e);
                let h = xb - xa;
                let pts: Vec<QuadPoint> = rule
                    .on(xa, xb)
                    .map(|(x, w)| {
                        let rho = profile.density(x, side);
                        QuadPoint {
                            weight: w,
                            rho,
                            sound2: law.dp(rho),
                            na: (xb - x) / h,
                            nb: (x - xa) / h,
                        }
                    })
                    .collect();
                let points: [QuadPoint; QUADRATURE_POINTS] = pts.try_into().expect("rule size");
                Element {
                    width: h,
                    mass: points.iter().map(|p| p.weight * p.rho).sum(),
                    points,
                }
            })
            .collect();
        let n_in = n_el - 1;
        let mut m3_diag = vec![0.0; n_in];
        let mut m3_off = vec![0.0; n_in.saturating_sub(1)];
        for (e, el) in elements.iter().enumerate() {
            for p in &el.points {
                let c = p.weight * p.rho;
                if e >= 1 {
                    m3_diag[e - 1] += c * p.na * p.na;
                }
                if e < n_in {
                    m3_diag[e] += c * p.nb * p.nb;
                }
                if e >= 1 && e < n_in {
                    m3_off[e - 1] += c * p.na * p.nb;
                }
            }
        }
        Self {
            xi,
            gravity: profile.gravity(),
            omega: profile.omega(),
            rho_jump: profile.rho_jump(),
            interface_node: grid.interface_index(),
            elements,
            m3_diag,
            m3_off,
            min_width: grid.min_width(),
            max_sound: profile.max_sound_speed(),
            nodes: grid.nodes().to_vec(),
        }
    }

    pub fn xi(&self) -> [f64; 2] {
        self.xi
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Largest step allowed by the acoustic and growth limits.
    pub fn max_time_step(&self) -> f64 {
        let acoustic = self.min_width / self.max_sound;
        let growth = 0.1 / (self.gravity * self.xi[0].hypot(self.xi[1])).sqrt().max(1e-300);
        acoustic.min(growth)
    }

    pub fn zero_state(&self) -> SpectralState {
        let n_el = self.elements.len();
        SpectralState {
            xi: self.xi,
            time: 0.0,
            data: vec![C::new(0.0, 0.0); layout_len(n_el)],
            n_el,
        }
    }

    fn vertical_at(v: &[C], e: usize, p: &QuadPoint, n_in: usize) -> C {
        let left = if e >= 1 { v[e - 1] } else { C::new(0.0, 0.0) };
        let right = if e < n_in { v[e] } else { C::new(0.0, 0.0) };
        left * p.na + right * p.nb
    }

    fn vertical_slope(v: &[C], e: usize, h: f64, n_in: usize) -> C {
        let left = if e >= 1 { v[e - 1] } else { C::new(0.0, 0.0) };
        let right = if e < n_in { v[e] } else { C::new(0.0, 0.0) };
        (right - left) / h
    }

    /// Time derivative of a state.
    pub fn rhs(&self, state: &SpectralState) -> SpectralState {
        let mut out = self.zero_state();
        out.time = state.time;
        let n_el = self.elements.len();
        let n_in = n_el - 1;
        let [k1, k2] = self.xi;
        let g = self.gravity;
        let two_omega = 2.0 * self.omega;
        let (eta, v, q) = state.parts();
        // eta' = v
        out.data[..3 * n_el - 1].copy_from_slice(&state.data[3 * n_el - 1..6 * n_el - 2]);
        let mut f3 = vec![C::new(0.0, 0.0); n_in];
        {
            let (_, vout, qout) = out.parts_mut();
            for (e, el) in self.elements.iter().enumerate() {
                let dv3 = Self::vertical_slope(v[2], e, el.width, n_in);
                let deta3 = Self::vertical_slope(eta[2], e, el.width, n_in);
                let divh = I * (k1 * v[0][e] + k2 * v[1][e]);
                let (mut f1, mut f2) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
                for (j, p) in el.points.iter().enumerate() {
                    let qg = q[e * QUADRATURE_POINTS + j];
                    qout[e * QUADRATURE_POINTS + j] = -p.rho * (divh + dv3);
                    let eta3 = Self::vertical_at(eta[2], e, p, n_in);
                    let force = p.sound2 * qg + g * p.rho * eta3;
                    f1 -= p.weight * I * k1 * force;
                    f2 -= p.weight * I * k2 * force;
                    let vert = p.weight * (-g * qg - g * p.rho * deta3);
                    let flux = p.weight * p.sound2 * qg / el.width;
                    if e >= 1 {
                        f3[e - 1] += vert * p.na - flux;
                    }
                    if e < n_in {
                        f3[e] += vert * p.nb + flux;
                    }
                }
                f1 += two_omega * el.mass * v[1][e];
                f2 -= two_omega * el.mass * v[0][e];
                vout[0][e] = f1 / el.mass;
                vout[1][e] = f2 / el.mass;
            }
            let a3 = self.solve_m3(&f3);
            vout[2].copy_from_slice(&a3);
        }
        out
    }

    /// Thomas solve with the vertical mass matrix.
    fn solve_m3(&self, b: &[C]) -> Vec<C> {
        let n = b.len();
        let mut c = vec![0.0; n];
        let mut d = vec![C::new(0.0, 0.0); n];
        let mut denom = self.m3_diag[0];
        c[0] = if n > 1 { self.m3_off[0] / denom } else { 0.0 };
        d[0] = b[0] / denom;
        for i in 1..n {
            denom = self.m3_diag[i] - self.m3_off[i - 1] * c[i - 1];
            if i + 1 < n {
                c[i] = self.m3_off[i] / denom;
            }
            d[i] = (b[i] - self.m3_off[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = d[i + 1];
            d[i] -= c[i] * next;
        }
        d
    }

    fn m3_quadratic(&self, v: &[C]) -> f64 {
        let mut acc = 0.0;
        for i in 0..v.len() {
            acc += self.m3_diag[i] * v[i].norm_sqr();
            if i + 1 < v.len() {
                acc += 2.0 * self.m3_off[i] * (v[i].conj() * v[i + 1]).re;
            }
        }
        acc
    }

    /// `(E, S)`: kinetic-plus-compressive energy of `dv` and `v`, and the interface term.
    pub fn energy_pair(&self, v: &SpectralState, dv: &SpectralState) -> (f64, f64) {
        let n_in = self.elements.len() - 1;
        let (_, vv, _) = v.parts();
        let (_, dvv, _) = dv.parts();
        let [k1, k2] = self.xi;
        let g = self.gravity;
        let mut kinetic = self.m3_quadratic(dvv[2]);
        let mut compressive = 0.0;
        for (e, el) in self.elements.iter().enumerate() {
            kinetic += el.mass * (dvv[0][e].norm_sqr() + dvv[1][e].norm_sqr());
            let div = I * (k1 * vv[0][e] + k2 * vv[1][e]) + Self::vertical_slope(vv[2], e, el.width, n_in);
            for p in &el.points {
                let v3 = Self::vertical_at(vv[2], e, p, n_in);
                let z = div - g * v3 / p.sound2;
                compressive += p.weight * p.sound2 * p.rho * z.norm_sqr();
            }
        }
        let v0 = vv[2][self.interface_node - 1];
        (
            0.5 * (kinetic + compressive),
            0.5 * g * self.rho_jump * v0.norm_sqr(),
        )
    }

    pub fn norms(&self, state: &SpectralState) -> FieldNorms {
        let n_in = self.elements.len() - 1;
        let (eta, v, q) = state.parts();
        let vec_norm = |f: [&[C]; 3]| -> f64 {
            let mut acc = 0.0;
            for (e, el) in self.elements.iter().enumerate() {
                acc += el.width * (f[0][e].norm_sqr() + f[1][e].norm_sqr());
                for p in &el.points {
                    acc += p.weight * Self::vertical_at(f[2], e, p, n_in).norm_sqr();
                }
            }
            acc.sqrt()
        };
        let mut qn = 0.0;
        for (e, el) in self.elements.iter().enumerate() {
            for (j, p) in el.points.iter().enumerate() {
                qn += p.weight * q[e * QUADRATURE_POINTS + j].norm_sqr();
            }
        }
        FieldNorms {
            eta: vec_norm(eta),
            v: vec_norm(v),
            q: qn.sqrt(),
        }
    }

    /// `(p'q)(0-)` and `(p'q)(0+)` recovered from the element balances of the
    /// vertical momentum row at the interface node, and `|[[v3]]|` (zero by construction).
    pub fn interface_traces(&self, state: &SpectralState) -> (f64, C, C) {
        let n_in = self.elements.len() - 1;
        let node = self.interface_node;
        let (eta, _, q) = state.parts();
        let accel = self.rhs(state);
        let (_, a, _) = accel.parts();
        let g = self.gravity;
        let balance = |e: usize, test_is_right: bool| -> C {
            let el = &self.elements[e];
            let deta3 = Self::vertical_slope(eta[2], e, el.width, n_in);
            let mut acc = C::new(0.0, 0.0);
            for (j, p) in el.points.iter().enumerate() {
                let qg = q[e * QUADRATURE_POINTS + j];
                let (n, dn) = if test_is_right { (p.nb, 1.0 / el.width) } else { (p.na, -1.0 / el.width) };
                let a3 = Self::vertical_at(a[2], e, p, n_in);
                acc += p.weight * (p.sound2 * qg * dn - g * qg * n - g * p.rho * deta3 * n - p.rho * a3 * n);
            }
            acc
        };
        // Left element sees the interface as its right node.
        let minus = balance(node - 1, true);
        let plus = -balance(node, false);
        (0.0, minus, plus)
    }
}

fn layout_len(n_el: usize) -> usize {
    // eta: 2 n_el + (n_el - 1), v: same, q: 3 n_el
    2 * (3 * n_el - 1) + QUADRATURE_POINTS * n_el
}

impl SpectralState {
    #[allow(clippy::type_complexity)]
    fn parts(&self) -> ([&[C]; 3], [&[C]; 3], &[C]) {
        let n = self.n_el;
        let (eta, rest) = self.data.split_at(3 * n - 1);
        let (v, q) = rest.split_at(3 * n - 1);
        fn split(s: &[C], n: usize) -> [&[C]; 3] {
            let (a, r) = s.split_at(n);
            let (b, c) = r.split_at(n);
            [a, b, c]
        }
        (split(eta, n), split(v, n), q)
    }

    #[allow(clippy::type_complexity)]
    fn parts_mut(&mut self) -> ([&mut [C]; 3], [&mut [C]; 3], &mut [C]) {
        let n = self.n_el;
        let (eta, rest) = self.data.split_at_mut(3 * n - 1);
        let (v, q) = rest.split_at_mut(3 * n - 1);
        fn split(s: &mut [C], n: usize) -> [&mut [C]; 3] {
            let (a, r) = s.split_at_mut(n);
            let (b, c) = r.split_at_mut(n);
            [a, b, c]
        }
        (split(eta, n), split(v, n), q)
    }

    /// Displacement components: two per element then one per interior node.
    pub fn eta(&self) -> [&[C]; 3] {
        self.parts().0
    }

    pub fn v(&self) -> [&[C]; 3] {
        self.parts().1
    }

    /// Pressure amplitude at the element quadrature points.
    pub fn q(&self) -> &[C] {
        self.parts().2
    }

    /// Mutable `(eta, v, q)` blocks in the layout of [`Self::eta`], [`Self::v`], [`Self::q`].
    #[allow(clippy::type_complexity)]
    pub fn fields_mut(&mut self) -> ([&mut [C]; 3], [&mut [C]; 3], &mut [C]) {
        self.parts_mut()
    }

    pub fn n_elements(&self) -> usize {
        self.n_el
    }

    fn axpy(&self, a: f64, other: &SpectralState) -> SpectralState {
        SpectralState {
            xi: self.xi,
            time: self.time,
            data: self.data.iter().zip(&other.data).map(|(x, y)| x + a * y).collect(),
            n_el: self.n_el,
        }
    }

    pub fn scaled(&self, a: C) -> SpectralState {
        SpectralState {
            data: self.data.iter().map(|x| x * a).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &SpectralState) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

impl SpectralOperator {
    /// Normal-mode data `eta = (-i R (phi, theta), psi)`, `v = lambda eta`, `q = -rho0 div eta`,
    /// built from a discrete minimizer in the frame of `(|xi|, 0)`.
    pub fn normal_mode_state(&self, minimizer: &[f64], lambda: f64) -> Result<SpectralState> {
        let n_el = self.elements.len();
        let layout = DofLayout::from_parts(n_el, self.interface_node);
        if minimizer.len() != layout.len() {
            return Err(Error::InvalidParameter("minimizer does not match the grid".into()));
        }
        let k = self.xi[0].hypot(self.xi[1]);
        let (c, s) = if k > 0.0 { (self.xi[0] / k, self.xi[1] / k) } else { (1.0, 0.0) };
        let theta_factor = -2.0 * self.omega / (lambda * lambda);
        let mut st = self.zero_state();
        {
            let (eta, v, _) = st.parts_mut();
            for e in 0..n_el {
                let phi = minimizer[layout.phi(e)];
                let theta = theta_factor * phi;
                eta[0][e] = -I * (c * phi - s * theta);
                eta[1][e] = -I * (s * phi + c * theta);
            }
            for node in 1..n_el {
                eta[2][node - 1] = C::new(minimizer[layout.psi(node).expect("interior")], 0.0);
            }
            for comp in 0..3 {
                for i in 0..eta[comp].len() {
                    v[comp][i] = lambda * eta[comp][i];
                }
            }
        }
        self.fill_consistent_q(&mut st);
        Ok(st)
    }

    /// Deterministic pseudo-random data with `q = -rho0 div eta`.
    ///
    /// Each component is a sine series in the vertical variable with
    /// `RANDOM_MODES` terms and coefficients decaying like `1/j`, so the
    /// data is resolved on the grid rather than dominated by grid-scale noise.
    pub fn random_state(&self, seed: u64) -> SpectralState {
        const RANDOM_MODES: usize = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = self.nodes[0];
        let span = self.nodes[self.nodes.len() - 1] - lo;
        let mut coeffs = [[C::new(0.0, 0.0); RANDOM_MODES]; 6];
        for row in coeffs.iter_mut() {
            for (j, c) in row.iter_mut().enumerate() {
                *c = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) / (j + 1) as f64;
            }
        }
        let series = |row: &[C; RANDOM_MODES], x: f64| -> C {
            row.iter()
                .enumerate()
                .map(|(j, c)| c * ((j + 1) as f64 * std::f64::consts::PI * (x - lo) / span).sin())
                .sum()
        };
        let mut st = self.zero_state();
        let n_el = self.elements.len();
        {
            let (eta, v, _) = st.parts_mut();
            for (block, target) in [eta, v].into_iter().enumerate() {
                let [h1, h2, v3] = target;
                for e in 0..n_el {
                    let mid = 0.5 * (self.nodes[e] + self.nodes[e + 1]);
                    h1[e] = series(&coeffs[3 * block], mid);
                    h2[e] = series(&coeffs[3 * block + 1], mid);
                }
                for (i, z) in v3.iter_mut().enumerate() {
                    *z = series(&coeffs[3 * block + 2], self.nodes[i + 1]);
                }
            }
        }
        self.fill_consistent_q(&mut st);
        st
    }

    fn fill_consistent_q(&self, st: &mut SpectralState) {
        let n_in = self.elements.len() - 1;
        let [k1, k2] = self.xi;
        let values: Vec<C> = {
            let (eta, _, _) = st.parts();
            self.elements
                .iter()
                .enumerate()
                .flat_map(|(e, el)| {
                    let div = I * (k1 * eta[0][e] + k2 * eta[1][e]) + Self::vertical_slope(eta[2], e, el.width, n_in);
                    el.points.iter().map(move |p| -p.rho * div)
                })
                .collect()
        };
        let (_, _, q) = st.parts_mut();
        q.copy_from_slice(&values);
    }

    /// One classical RK4 step.
    pub fn step(&self, state: &SpectralState, dt: f64) -> SpectralState {
        let k1 = self.rhs(state);
        let k2 = self.rhs(&state.axpy(0.5 * dt, &k1));
        let k3 = self.rhs(&state.axpy(0.5 * dt, &k2));
        let k4 = self.rhs(&state.axpy(dt, &k3));
        let mut next = state.clone();
        for i in 0..next.data.len() {
            next.data[i] += dt / 6.0 * (k1.data[i] + 2.0 * k2.data[i] + 2.0 * k3.data[i] + k4.data[i]);
        }
        next.time = state.time + dt;
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldNorms {
    pub eta: f64,
    pub v: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct EvolutionSeries {
    pub dt: f64,
    pub times: Vec<f64>,
    pub norms: Vec<FieldNorms>,
    pub states: Vec<SpectralState>,
}

/// RK4 from `state0` to `horizon`, recording every step.
pub fn evolve(op: &SpectralOperator, state0: &SpectralState, dt: f64, horizon: f64) -> Result<EvolutionSeries> {
    let bound = op.max_time_step();
    if !(dt > 0.0 && dt <= bound) {
        return Err(Error::TimeStepTooLarge { dt, bound });
    }
    let steps = (horizon / dt).round() as usize;
    let mut state = state0.clone();
    let n0 = op.norms(&state);
    let scale0 = n0.eta.max(n0.v).max(n0.q);
    let mut series = EvolutionSeries {
        dt,
        times: vec![state.time],
        norms: vec![n0],
        states: vec![state.clone()],
    };
    for _ in 0..steps {
        state = op.step(&state, dt);
        let n = op.norms(&state);
        let big = n.eta.max(n.v).max(n.q);
        if !big.is_finite() || (scale0 > 0.0 && big > 1e12 * scale0) {
            return Err(Error::BlowupDetected(state.time));
        }
        series.times.push(state.time);
        series.norms.push(n);
        series.states.push(state.clone());
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub lambda_hat: f64,
    /// Two standard errors of the slope.
    pub band: f64,
    pub samples: usize,
}

/// Least-squares slope of `log |v|` over samples with `t >= t_min`.
pub fn growth_fit(series: &EvolutionSeries, t_min: f64) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.norms)
        .filter(|(t, n)| **t >= t_min && n.v > 0.0)
        .map(|(t, n)| (*t, n.v.ln()))
        .collect();
    fit_log_slope(&pts)
}

pub fn fit_log_slope(pts: &[(f64, f64)]) -> Result<GrowthFit> {
    const NEEDED: usize = 20;
    if pts.len() < NEEDED {
        return Err(Error::InsufficientSamples {
            needed: NEEDED,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let band = 2.0 * (rss / (n - 2.0) / stt).sqrt();
    if !(slope > 0.0) {
        return Err(Error::NonGrowingSeries(slope));
    }
    Ok(GrowthFit {
        lambda_hat: slope,
        band,
        samples: pts.len(),
    })
}

/// `(t, E, S)` at every interior sample, with `dv/dt` from centered differences.
pub fn energy_history(op: &SpectralOperator, series: &EvolutionSeries) -> Result<Vec<(f64, f64, f64)>> {
    let n = series.states.len();
    if n < 3 {
        return Err(Error::InsufficientHistory { needed: 3, got: n });
    }
    Ok((1..n - 1)
        .map(|i| {
            let prev = &series.states[i - 1];
            let next = &series.states[i + 1];
            let dt2 = next.time - prev.time;
            let dv = velocity_difference(next, prev, 1.0 / dt2);
            let (e, s) = op.energy_pair(&series.states[i], &dv);
            (series.states[i].time, e, s)
        })
        .collect())
}

/// State whose velocity block holds `(next.v - prev.v) * scale`.
fn velocity_difference(next: &SpectralState, prev: &SpectralState, scale: f64) -> SpectralState {
    let diff = next.axpy(-1.0, prev);
    let mut out = diff.clone();
    let n = out.n_el;
    let vlen = 3 * n - 1;
    // Move the velocity difference into the velocity slot (eta slot unused).
    for i in 0..vlen {
        out.data[vlen + i] = diff.data[vlen + i] * scale;
    }
    out
}

/// `max_t |(E - S)(t) - (E - S)(t_1)| / (max(E, S) * span)`.
pub fn energy_identity_drift(op: &SpectralOperator, series: &EvolutionSeries) -> Result<f64> {
    let hist = energy_history(op, series)?;
    let (t0, e0, s0) = hist[0];
    let span = hist[hist.len() - 1].0 - t0;
    let scale = hist.iter().map(|h| h.1.max(h.2)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = hist
        .iter()
        .map(|&(_, e, s)| ((e - s) - (e0 - s0)).abs())
        .fold(0.0, f64::max);
    Ok(worst / (scale * span.max(f64::MIN_POSITIVE)))
}
