//! Subcommand bodies. Each returns the names of the artifacts it wrote.

use std::path::Path;

use anyhow::{anyhow, Context, Result};
use serde_json::json;

use rti_core::dispersion::{dispersion_curve, linspace, solve_fixed_point_detailed};
use rti_core::equilibrium::{integrate_hydrostatic, EquilibriumProfile};
use rti_core::evolve::{energy_history, energy_identity_drift, evolve, growth_fit, SpectralOperator};
use rti_core::modes::{derivative_stack, mode_from_fixed_point, ode_residual};
use rti_core::synthesis::{
    growth_sandwich, illposed_sequence, Field, IllposedOptions, IllposedOutcome, RadialAmplitude, SynthesisField,
    SynthesisOptions,
};

use crate::config::{InitKind, RunConfig};
use crate::output::{write_json, Cell, Table};

pub fn profile(cfg: &RunConfig) -> Result<EquilibriumProfile> {
    let fluid = cfg.fluid_config().map_err(|v| anyhow!(v.join("; ")))?;
    Ok(integrate_hydrostatic(&fluid, cfg.grid.n_elements)?)
}

pub fn equilibrium(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let p = profile(cfg)?;
    let mut t = Table::new(&["x3", "rho0", "p", "dp", "side"]);
    for (x, rho, pr, dp, side) in p.rows() {
        t.push(vec![x.into(), rho.into(), pr.into(), dp.into(), side.to_string().into()]);
    }
    let mut out = vec![t.write(dir, "equilibrium", cfg.output.format)?];
    let summary = json!({
        "rho_minus0": p.rho_minus0(),
        "rho_plus0": p.rho_plus0(),
        "rho_jump": p.rho_jump(),
        "hydrostatic_residual": p.hydrostatic_residual(),
        "interface_pressure_mismatch": p.interface_pressure_mismatch(),
    });
    write_json(dir, "equilibrium_summary.json", &summary)?;
    out.push("equilibrium_summary.json".into());
    Ok(out)
}

pub fn dispersion(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let p = profile(cfg)?;
    let s = &cfg.sweep;
    let curve = dispersion_curve(&p, &linspace(s.xi_min, s.xi_max, s.steps));
    let mut t = Table::new(&[
        "xi",
        "lambda",
        "lambda0",
        "s_star",
        "fp_residual",
        "mu_residual",
        "status",
    ]);
    for pt in &curve.points {
        t.push(vec![
            pt.xi_abs.into(),
            pt.lambda.into(),
            pt.lambda0.rate().into(),
            pt.s_star.into(),
            pt.fp_residual.into(),
            pt.mu_residual.into(),
            pt.status.as_str().into(),
        ]);
    }
    let mut out = vec![t.write(dir, "dispersion", cfg.output.format)?];
    write_json(
        dir,
        "dispersion_fit.json",
        &json!({ "lambda2_vs_xi": curve.fit.map(|f| json!({"slope": f.slope, "intercept": f.intercept})) }),
    )?;
    out.push("dispersion_fit.json".into());
    Ok(out)
}

pub fn mode(cfg: &RunConfig, dir: &Path, xi: [f64; 2], k_max: usize) -> Result<Vec<String>> {
    let p = profile(cfg)?;
    let xi_abs = xi[0].hypot(xi[1]);
    let fp = solve_fixed_point_detailed(&p, xi_abs)?;
    let mode = mode_from_fixed_point(&p, &fp, xi)?;
    let mode = derivative_stack(&mode, &p, k_max)?;
    let res = ode_residual(&mode, &p)?;
    let mut doc = mode.to_json();
    doc["k_max"] = json!(k_max);
    doc["rotation_margin"] = json!(fp.rotation_margin());
    doc["residual"] = json!({
        "along": res.along,
        "across": res.across,
        "vertical": res.vertical,
        "flux": res.flux,
        "jump": res.jump,
        "boundary": res.boundary,
    });
    write_json(dir, "mode.json", &doc)?;
    Ok(vec!["mode.json".into()])
}

pub fn synth(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let p = profile(cfg)?;
    let y = &cfg.synth;
    let field = SynthesisField::build(
        &p,
        RadialAmplitude::new(y.r3, y.r4, 1.0)?,
        SynthesisOptions {
            n_r: y.n_r,
            n_theta: y.n_theta,
            k_max: y.k,
        },
    )?;
    let mut t = Table::new(&["t", "k", "norm_eta", "norm_v", "norm_q", "lower_bound", "upper_bound"]);
    for &time in &y.t {
        let eta = growth_sandwich(&field, Field::Eta, y.k, time, 0.0)?;
        t.push(vec![
            time.into(),
            y.k.into(),
            eta.value.into(),
            field.hk_norm(Field::V, y.k, time)?.into(),
            field.hk_norm(Field::Q, y.k, time)?.into(),
            eta.lower_bound.into(),
            eta.upper_bound.into(),
        ]);
    }
    Ok(vec![t.write(dir, "synth", cfg.output.format)?])
}

pub fn evolve_cmd(cfg: &RunConfig, dir: &Path) -> Result<Vec<String>> {
    let p = profile(cfg)?;
    let e = &cfg.evolve;
    let xi = [e.xi1, e.xi2];
    let xi_abs = xi[0].hypot(xi[1]);
    let op = SpectralOperator::new(&p, xi);
    let fp = solve_fixed_point_detailed(&p, xi_abs).ok();
    let expected = fp.as_ref().and_then(|f| f.point.lambda);
    let (state0, default_horizon) = match e.init {
        InitKind::Mode => {
            let fp = fp.as_ref().context("no growing mode at this frequency for mode initialization")?;
            let lambda = expected.context("no growing mode at this frequency")?;
            let eig = fp.eigen.as_ref().context("no minimizer at this frequency")?;
            (op.normal_mode_state(&eig.vector, lambda)?, 2.0 / lambda)
        }
        InitKind::Random => (op.random_state(e.seed), expected.map_or(10.0, |l| 6.0 / l)),
    };
    let horizon = e.t_final.unwrap_or(default_horizon);
    let series = evolve(&op, &state0, e.dt, horizon)?;
    let energy = energy_history(&op, &series)?;
    let mut t = Table::new(&["t", "norm_eta", "norm_v", "norm_q", "energy_lhs", "energy_rhs"]);
    for (i, (time, n)) in series.times.iter().zip(&series.norms).enumerate() {
        let (lhs, rhs) = match i.checked_sub(1).and_then(|j| energy.get(j)) {
            Some(&(_, a, b)) => (Cell::Float(a), Cell::Float(b)),
            None => (Cell::Empty, Cell::Empty),
        };
        t.push(vec![(*time).into(), n.eta.into(), n.v.into(), n.q.into(), lhs, rhs]);
    }
    let mut out = vec![t.write(dir, "evolve", cfg.output.format)?];
    let window = match (e.init, expected) {
        (InitKind::Mode, Some(l)) => 1.0 / l,
        (InitKind::Random, Some(_)) => horizon * 5.0 / 6.0,
        _ => 0.0,
    };
    let fit = growth_fit(&series, window).ok();
    let summary = json!({
        "lambda_expected": expected,
        "lambda_hat": fit.map(|f| f.lambda_hat),
        "band": fit.map(|f| f.band),
        "fit_window_start": window,
        "energy_identity_drift": energy_identity_drift(&op, &series)?,
    });
    write_json(dir, "evolve_fit.json", &summary)?;
    out.push("evolve_fit.json".into());
    Ok(out)
}

pub fn illposed(cfg: &RunConfig, dir: &Path, opts: &IllposedOptions) -> Result<Vec<String>> {
    let p = profile(cfg)?;
    let seq = illposed_sequence(&p, opts)?;
    let mut t = Table::new(&["n", "R_n", "init_Hj", "grown_Hk", "status"]);
    for entry in &seq {
        match entry {
            IllposedOutcome::Found(e) => t.push(vec![
                e.n.into(),
                e.radius.into(),
                e.init_norm.into(),
                e.grown_norm.into(),
                "found".into(),
            ]),
            IllposedOutcome::Exhausted { n, limit } => t.push(vec![
                (*n).into(),
                (*limit).into(),
                Cell::Empty,
                Cell::Empty,
                "search_exhausted".into(),
            ]),
        }
    }
    Ok(vec![t.write(dir, "illposed", cfg.output.format)?])
}
