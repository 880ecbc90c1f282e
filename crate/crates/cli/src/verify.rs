//! The invariant suite behind `rti verify`.

use anyhow::Result;
use rayon::prelude::*;

use rti_core::dispersion::{dispersion_curve, f_of_s, linspace, solve_fixed_point, solve_fixed_point_detailed};
use rti_core::eigen::{dense_spectrum, min_eigen, min_eigen_with, mu_curve, EigenOptions, Strategy};
use rti_core::equilibrium::{integrate_hydrostatic, FluidConfig, Side};
use rti_core::evolve::{energy_identity_drift, evolve, growth_fit, SpectralOperator};
use rti_core::forms::{assemble_pencil, test_pair};
use rti_core::modes::{mode_from_fixed_point, ode_residual};
use rti_core::synthesis::{
    growth_sandwich, illposed_sequence, Field, IllposedOptions, IllposedOutcome, RadialAmplitude, SynthesisField,
    SynthesisOptions,
};

use crate::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            passed: value >= bound,
        }
    }

    fn holds(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            passed: ok,
        }
    }
}

pub fn table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["check", "value", "bound", "passed"]);
    for c in checks {
        t.push(vec![
            c.name.clone().into(),
            c.value.into(),
            c.bound.into(),
            (if c.passed { "true" } else { "false" }).into(),
        ]);
    }
    t
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Runs every check on `base` (its rotation is overridden where a check needs
/// both the rotating and non-rotating column) with `n` elements per side.
pub fn run_suite(base: &FluidConfig, n: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let still = base.with_omega(0.0);
    let spun = base.with_omega(1.0);
    let p0 = integrate_hydrostatic(&still, n)?;
    let p1 = integrate_hydrostatic(&spun, n)?;
    let g = base.gravity;

    // Equilibrium.
    out.push(Check::at_least("density jump positive", p0.rho_jump(), f64::MIN_POSITIVE));
    out.push(Check::at_most("hydrostatic residual", p0.hydrostatic_residual(), 1e-10));
    out.push(Check::at_most(
        "interface pressure matched",
        p0.interface_pressure_mismatch(),
        1e-12,
    ));
    let affine = base.upper.gamma() == 1.0 && base.lower.gamma() == 1.0;
    if affine {
        let p64 = integrate_hydrostatic(&still, 64)?;
        let mut worst: f64 = 0.0;
        for (x, rho, _, _, side) in p64.rows() {
            let (r0, k) = match side {
                Side::Lower => (p64.rho_minus0(), base.lower.stiffness()),
                Side::Upper => (p64.rho_plus0(), base.upper.stiffness()),
            };
            worst = worst.max(rel(rho, r0 * (-g * x / k).exp()));
        }
        out.push(Check::at_most("affine profile closed form", worst, 1e-10));
    }

    // Eigensolver against the dense spectrum.
    let p8 = integrate_hydrostatic(&spun, 8)?;
    let mut worst: f64 = 0.0;
    for (k, s) in [(5.0, 0.0), (10.0, 0.01), (20.0, 0.1), (3.0, 0.5), (40.0, 0.0)] {
        let pencil = assemble_pencil(&p8, k)?;
        let it = min_eigen_with(
            &pencil,
            s,
            &EigenOptions {
                strategy: Strategy::Iterative,
                ..EigenOptions::default()
            },
        )?;
        worst = worst.max(rel(it.mu, dense_spectrum(&pencil, s)[0]));
    }
    out.push(Check::at_most("iterative minimum matches dense spectrum", worst, 1e-10));

    // Variational bounds.
    let mut floor_gap = f64::INFINITY;
    let mut pair_gap = f64::NEG_INFINITY;
    for k in [5.0, 10.0, 20.0, 40.0] {
        let pencil = assemble_pencil(&p1, k)?;
        let pair = test_pair(p1.grid(), k)?;
        for s in [0.0, 0.01, 0.1] {
            let mu = min_eigen(&pencil, s)?.mu;
            floor_gap = floor_gap.min(mu + g * k);
            pair_gap = pair_gap.max(mu - pencil.rayleigh_quotient(s, &pair)?);
        }
    }
    out.push(Check::at_least("minimum above spectral floor", floor_gap, -1e-9));
    out.push(Check::at_most("minimum below comparison pair", pair_gap, 1e-12));

    // Monotonicity and Lipschitz bound.
    let pencil = assemble_pencil(&p1, 10.0)?;
    let curve = mu_curve(&pencil, &linspace(0.0, 1.0, 20))?;
    let drop = curve
        .points
        .windows(2)
        .map(|w| w[0].1 - w[1].1)
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::at_most("minimum nondecreasing in s", drop, 0.0));
    out.push(Check::at_most("slope within rotation quotient", curve.lipschitz, curve.rotation_sup));

    // Fixed points.
    let f0 = f_of_s(&pencil, 0.0)?;
    out.push(Check::at_most("F(0) = -1", (f0 + 1.0).abs(), 0.0));
    let ks = [10.0, 20.0, 40.0];
    let fps: Vec<_> = ks
        .par_iter()
        .map(|&k| Ok((solve_fixed_point_detailed(&p0, k)?, solve_fixed_point_detailed(&p1, k)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut fp_res: f64 = 0.0;
    let mut resolve: f64 = 0.0;
    let mut stabilized = true;
    let mut margin = f64::INFINITY;
    let mut psi_ratio = f64::INFINITY;
    for (still_fp, spun_fp) in &fps {
        for fp in [still_fp, spun_fp] {
            let (Some(l), Some(s)) = (fp.point.lambda, fp.point.s_star) else {
                stabilized = false;
                continue;
            };
            fp_res = fp_res.max((s * l * l - 1.0).abs());
            let again = min_eigen(&fp.pencil, s)?;
            let eig = fp.eigen.as_ref().expect("solved point carries its minimizer");
            resolve = resolve.max(rel(again.mu, eig.mu));
            let psi_max = eig
                .vector
                .iter()
                .skip(1)
                .step_by(2)
                .fold(0.0f64, |a, v| a.max(v.abs()));
            psi_ratio = psi_ratio.min(eig.vector[eig.interface_dof].abs() / psi_max);
        }
        stabilized &= matches!((spun_fp.point.lambda, still_fp.point.lambda), (Some(a), Some(b)) if a < b);
        margin = margin.min(spun_fp.rotation_margin().unwrap_or(f64::NEG_INFINITY));
    }
    out.push(Check::at_most("fixed point s lambda^2 = 1", fp_res, 1e-8));
    out.push(Check::at_most("re-solve reproduces minimum", resolve, 1e-8));
    out.push(Check::holds("rotation lowers growth", stabilized));
    out.push(Check::at_least("rotation margin positive", margin, f64::MIN_POSITIVE));
    out.push(Check::at_least("interface displacement nonzero", psi_ratio, 1e-6));

    // Dispersion curve.
    let sweep = dispersion_curve(&p1, &linspace(1.0, 60.0, 60));
    let above = sweep
        .points
        .iter()
        .filter_map(|pt| pt.lambda.map(|l| l / (g * pt.xi_abs).sqrt()))
        .fold(0.0, f64::max);
    out.push(Check::at_most("lambda below sqrt(g |xi|)", above, 1.0 + 1e-8));
    let upper: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .filter(|pt| pt.xi_abs >= 20.0)
        .filter_map(|pt| pt.lambda.map(|l| (pt.xi_abs, l * l)))
        .collect();
    let slope = rti_core::dispersion::fit_line(&upper).map_or(f64::NAN, |f| f.slope);
    out.push(Check::at_least("lambda^2 slope positive", slope, f64::MIN_POSITIVE));
    let all_unstable = sweep
        .points
        .iter()
        .filter(|pt| pt.xi_abs >= 10.0)
        .all(|pt| pt.lambda.is_some());
    out.push(Check::holds("unstable above |xi| = 10", all_unstable));

    // Mode residuals under refinement.
    let mut levels = Vec::new();
    for m in [64, 128, 256] {
        let p = integrate_hydrostatic(&spun, m)?;
        let fp = solve_fixed_point_detailed(&p, 10.0)?;
        let mode = mode_from_fixed_point(&p, &fp, [10.0, 0.0])?;
        levels.push(ode_residual(&mode, &p)?);
    }
    let finest = levels[2];
    out.push(Check::at_most("mode residual at 256", finest.max_equation(), 1e-3));
    let decreasing = levels
        .windows(2)
        .all(|w| w[1].max_equation() < w[0].max_equation());
    out.push(Check::holds("mode residual decreases under refinement", decreasing));
    out.push(Check::at_most("flux jump", finest.jump, 1e-6));
    out.push(Check::at_most("cross-frame residual", finest.across, 0.0));

    // Time-domain oracle.
    let runs: Vec<(f64, f64)> = ks
        .par_iter()
        .map(|&k| {
            let fp = solve_fixed_point_detailed(&p0, k)?;
            let lambda = fp.point.lambda.expect("unstable");
            let op = SpectralOperator::new(&p0, [k, 0.0]);
            let st = op.normal_mode_state(&fp.eigen.as_ref().expect("minimizer").vector, lambda)?;
            let series = evolve(&op, &st, 1e-3, 2.0 / lambda)?;
            Ok((growth_fit(&series, 1.0 / lambda)?.lambda_hat, lambda))
        })
        .collect::<Result<_>>()?;
    let growth_err = runs.iter().map(|&(h, l)| rel(h, l)).fold(0.0, f64::max);
    out.push(Check::at_most("evolved growth matches dispersion", growth_err, 0.02));
    let fp = solve_fixed_point_detailed(&p0, 10.0)?;
    let lambda = fp.point.lambda.expect("unstable");
    let op = SpectralOperator::new(&p0, [10.0, 0.0]);
    let st = op.normal_mode_state(&fp.eigen.as_ref().expect("minimizer").vector, lambda)?;
    let drift = energy_identity_drift(&op, &evolve(&op, &st, 1e-3, 2.0 / lambda)?)?;
    let drift_half = energy_identity_drift(&op, &evolve(&op, &st, 5e-4, 2.0 / lambda)?)?;
    out.push(Check::at_most("energy identity drift", drift, 1e-6));
    out.push(Check::at_most("drift ratio under dt halving", (drift / drift_half - 4.0).abs(), 0.5));
    let zero = op.zero_state();
    out.push(Check::at_most("zero state is stationary", op.rhs(&zero).max_abs(), 0.0));

    // Synthesis.
    let field = SynthesisField::build(
        &p1,
        RadialAmplitude::new(10.0, 12.0, 1.0)?,
        SynthesisOptions {
            n_r: 16,
            n_theta: 8,
            k_max: 3,
        },
    )?;
    let mut polar: f64 = 0.0;
    for k in 0..=3 {
        for which in Field::ALL {
            polar = polar.max(rel(field.hk_norm_polar(which, k, 0.5)?, field.hk_norm(which, k, 0.5)?));
        }
    }
    out.push(Check::at_most("radial and polar norms agree", polar, 1e-6));
    let mut sandwich = true;
    for k in 0..=3 {
        for which in Field::ALL {
            for t in [0.5, 1.0, 2.0] {
                let s = growth_sandwich(&field, which, k, t, 1e-6)?;
                sandwich &= s.lower_ok && s.upper_ok;
            }
        }
    }
    out.push(Check::holds("growth sandwich", sandwich));
    let mut residue: f64 = 0.0;
    for (i, x3) in [-0.3, -0.01, 0.02, 0.4].into_iter().enumerate() {
        let sample = field.evaluate(0.25 * i as f64, [0.3, -0.2 * i as f64, x3])?;
        residue = residue.max(sample.imaginary_residue);
    }
    out.push(Check::at_most("imaginary residue", residue, 1e-10));
    let v_over_eta = (0..=3)
        .map(|k| Ok(field.hk_norm(Field::V, k, 1.0)? / field.hk_norm(Field::Eta, k, 1.0)?))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    out.push(Check::at_least("velocity norm dominates displacement", v_over_eta, 1.0));

    // Ill-posedness sequence.
    let seq = illposed_sequence(&p0, &IllposedOptions::default())?;
    let mut found = 0usize;
    let mut ok = true;
    for entry in &seq {
        if let IllposedOutcome::Found(e) = entry {
            found += 1;
            ok &= e.init_norm <= 1.0 / e.n as f64 * (1.0 + 1e-12)
                && e.grown_min >= 1.0
                && e.velocity_dominates != Some(false);
        }
    }
    out.push(Check::at_least("ill-posed entries found", found as f64, 4.0));
    out.push(Check::holds("ill-posed entries small then large", ok && found > 0));

    // Spot check of the single-point solver on the configured rotation.
    let pt = solve_fixed_point(&integrate_hydrostatic(base, n)?, 20.0)?;
    out.push(Check::holds("configured column unstable at |xi| = 20", pt.lambda.is_some()));
    Ok(out)
}
