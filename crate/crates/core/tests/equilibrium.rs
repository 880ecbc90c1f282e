use proptest::prelude::*;
use rti_core::equilibrium::{
    integrate_hydrostatic, integrate_on_grid, solve_interface_densities, FluidConfig, HydrostaticOptions, Side,
};
use rti_core::grid::Grid1D;
use rti_core::law::PressureLaw;
use rti_core::Error;

fn power_column(k_upper: f64, k_lower: f64, gamma: f64, p_star: f64) -> FluidConfig {
    FluidConfig {
        upper: PressureLaw::power(k_upper, gamma).unwrap(),
        lower: PressureLaw::power(k_lower, gamma).unwrap(),
        interface_pressure: p_star,
        ..FluidConfig::benchmark(0.0)
    }
}

#[test]
fn reference_interface_densities() {
    let (below, above) = solve_interface_densities(&FluidConfig::benchmark(0.0)).unwrap();
    assert_eq!(below, 1.0);
    assert_eq!(above, 2.0);
}

#[test]
fn power_law_interface_densities() {
    let (below, above) = solve_interface_densities(&power_column(1.0, 3.0, 1.4, 3.0)).unwrap();
    assert!((below - 1.0).abs() < 1e-15);
    assert!((above - 3f64.powf(1.0 / 1.4)).abs() < 1e-14);
    assert!((above - 2.19180).abs() < 1e-5);
}

#[test]
fn identical_laws_rejected() {
    let cfg = FluidConfig {
        lower: PressureLaw::affine(1.0).unwrap(),
        ..FluidConfig::benchmark(0.0)
    };
    assert!(matches!(solve_interface_densities(&cfg), Err(Error::ConfigRejected(_))));
    assert!(matches!(integrate_hydrostatic(&cfg, 8), Err(Error::ConfigRejected(_))));
}

#[test]
fn lighter_fluid_above_rejected() {
    let cfg = FluidConfig {
        upper: PressureLaw::affine(3.0).unwrap(),
        ..FluidConfig::benchmark(0.0)
    };
    assert!(matches!(solve_interface_densities(&cfg), Err(Error::ConfigRejected(_))));
}

#[test]
fn affine_profile_is_exponential() {
    let p = integrate_hydrostatic(&FluidConfig::benchmark(0.0), 64).unwrap();
    for (x, rho, _, _, side) in p.rows() {
        let exact = match side {
            Side::Upper => 2.0 * (-x).exp(),
            Side::Lower => (-x / 2.0).exp(),
        };
        assert!((rho - exact).abs() <= 1e-10 * exact, "x = {x}");
    }
    assert_eq!(p.rho_jump(), p.rho_plus0() - p.rho_minus0());
    assert!(p.rho_jump() > 0.0);
}

#[test]
fn zero_gravity_gives_constant_layers() {
    let cfg = FluidConfig {
        gravity: 0.0,
        ..FluidConfig::benchmark(0.0)
    };
    let p = integrate_hydrostatic(&cfg, 8).unwrap();
    assert!(p.side_densities(Side::Upper).iter().all(|&r| r == 2.0));
    assert!(p.side_densities(Side::Lower).iter().all(|&r| r == 1.0));
}

#[test]
fn quadratic_law_gives_linear_profile() {
    let cfg = power_column(1.0, 4.0, 2.0, 4.0);
    let p = integrate_hydrostatic(&cfg, 16).unwrap();
    let (r_lo, r_up) = (p.rho_minus0(), p.rho_plus0());
    for (x, rho, _, _, side) in p.rows() {
        let exact = match side {
            Side::Upper => r_up - x / 2.0,
            Side::Lower => r_lo - x / 8.0,
        };
        assert!((rho - exact).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn integrator_is_fourth_order() {
    let cfg = power_column(1.0, 3.0, 1.4, 3.0);
    let opts = HydrostaticOptions {
        substeps: 1,
        ..HydrostaticOptions::default()
    };
    // Error at the walls against a very fine reference.
    let fine = integrate_hydrostatic(&cfg, 2048).unwrap();
    let top = |p: &rti_core::equilibrium::EquilibriumProfile| *p.side_densities(Side::Upper).last().unwrap();
    let errs: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&n| {
            let p = integrate_on_grid(&cfg, Grid1D::uniform(1.0, 1.0, n, n).unwrap(), opts).unwrap();
            (top(&p) - top(&fine)).abs()
        })
        .collect();
    let slope = (errs[0] / errs[3]).log2() / 3.0;
    assert!(slope >= 3.8, "observed order {slope}, errors {errs:?}");
}

#[test]
fn interface_pressure_is_continuous() {
    let cfg = power_column(1.0, 3.0, 1.4, 3.0);
    let p = integrate_hydrostatic(&cfg, 32).unwrap();
    assert!(p.interface_pressure_mismatch() <= 1e-12 * 3.0);
}

#[test]
fn too_deep_power_column_rejected() {
    let cfg = FluidConfig {
        height: 10.0,
        ..power_column(1.0, 4.0, 2.0, 1.0)
    };
    assert!(matches!(
        integrate_hydrostatic(&cfg, 8),
        Err(Error::DepthTooLarge { side: Side::Upper, .. })
    ));
}

#[test]
fn invalid_geometry_reports_every_problem() {
    let cfg = FluidConfig {
        depth: -1.0,
        height: 0.0,
        ..FluidConfig::benchmark(0.0)
    };
    let v = cfg.violations();
    assert!(v.contains(&"m must be positive".to_string()));
    assert!(v.contains(&"l must be positive".to_string()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_affine_columns_are_admissible(
        k_up in 0.2f64..3.0,
        ratio in 1.05f64..4.0,
        p_star in 0.5f64..5.0,
        depth in 0.2f64..2.0,
        height in 0.2f64..2.0,
        gravity in 0.0f64..3.0,
    ) {
        // Keep the stratification resolvable by 16 elements.
        prop_assume!(gravity * height / k_up <= 4.0);
        prop_assume!(gravity * depth / (k_up * ratio) <= 4.0);
        let cfg = FluidConfig {
            upper: PressureLaw::affine(k_up).unwrap(),
            lower: PressureLaw::affine(k_up * ratio).unwrap(),
            gravity,
            omega: 0.0,
            depth,
            height,
            interface_pressure: p_star,
        };
        let p = integrate_hydrostatic(&cfg, 16).unwrap();
        prop_assert!(p.rho_jump() > 0.0);
        prop_assert!(p.rho_min() > 0.0);
        prop_assert!(p.hydrostatic_residual() <= 1e-6);
        prop_assert!(p.interface_pressure_mismatch() <= 1e-12 * p_star);
    }

    #[test]
    fn power_laws_increase_and_enthalpy_is_monotone(
        k in 0.1f64..5.0,
        gamma in 1.0f64..3.0,
        a in 0.05f64..5.0,
        b in 0.05f64..5.0,
    ) {
        let law = PressureLaw::from_exponent(k, gamma).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        prop_assert!(law.dp(lo) > 0.0);
        prop_assert!(law.pressure(hi) > law.pressure(lo));
        prop_assert!(law.enthalpy(hi) > law.enthalpy(lo));
        prop_assert!(law.enthalpy(1.0).abs() < 1e-14);
        let back = law.density_at(law.pressure(hi));
        prop_assert!((back - hi).abs() <= 1e-12 * hi);
    }
}
