use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rti_core::equilibrium::{integrate_hydrostatic, EquilibriumProfile, FluidConfig};
use rti_core::synthesis::{
    growth_sandwich, illposed_sequence, Field, IllposedOptions, IllposedOutcome, RadialAmplitude, SynthesisField,
    SynthesisOptions,
};
use rti_core::Error;

fn reference(n: usize) -> EquilibriumProfile {
    integrate_hydrostatic(&FluidConfig::benchmark(1.0), n).unwrap()
}

fn field(p: &EquilibriumProfile, inner: f64, outer: f64, n_r: usize) -> SynthesisField {
    SynthesisField::build(
        p,
        RadialAmplitude::new(inner, outer, 1.0).unwrap(),
        SynthesisOptions {
            n_r,
            n_theta: 8,
            k_max: 3,
        },
    )
    .unwrap()
}

#[test]
fn radial_reduction_matches_polar_quadrature() {
    let f = field(&reference(64), 10.0, 12.0, 16);
    for which in Field::ALL {
        for k in 0..=3 {
            for t in [0.0, 1.0] {
                let a = f.hk_norm(which, k, t).unwrap();
                let b = f.hk_norm_polar(which, k, t).unwrap();
                assert!((a - b).abs() <= 1e-6 * b, "{which:?} k={k} t={t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn growth_is_sandwiched_by_the_extreme_rates() {
    let f = field(&reference(64), 10.0, 20.0, 16);
    for which in Field::ALL {
        for k in 0..=3 {
            let s0 = growth_sandwich(&f, which, k, 0.0, 0.0).unwrap();
            assert_eq!(s0.lower_bound, s0.value);
            assert_eq!(s0.upper_bound, s0.value);
            for t in [0.5, 1.0, 2.0] {
                let s = growth_sandwich(&f, which, k, t, 1e-6).unwrap();
                assert!(s.lower_ok && s.upper_ok, "{which:?} k={k} t={t}: {s:?}");
                if t == 2.0 {
                    assert!(s.lower_bound < s.value && s.value < s.upper_bound);
                }
            }
        }
    }
}

#[test]
fn narrow_annulus_grows_like_one_mode() {
    let p = reference(64);
    let f = field(&p, 10.0, 10.001, 8);
    let (lo, hi) = f.lambda_range();
    let lambda = 0.5 * (lo + hi);
    let ratio = f.hk_norm(Field::Eta, 0, 1.0).unwrap() / f.hk_norm(Field::Eta, 0, 0.0).unwrap();
    assert!((ratio / lambda.exp() - 1.0).abs() <= 1e-4);
    let x = [0.03, -0.02, 0.3];
    let now = f.evaluate(0.0, x).unwrap();
    let later = f.evaluate(1.0, x).unwrap();
    for c in 0..3 {
        assert!((later.eta[c] - lambda.exp() * now.eta[c]).abs() <= 1e-4 * later.eta[c].abs().max(1e-300) + 1e-300);
    }
}

#[test]
fn evaluated_fields_are_real() {
    let f = field(&reference(32), 10.0, 12.0, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let t = rng.random_range(0.0..2.0);
        let x3 = loop {
            let x: f64 = rng.random_range(-0.99..0.99);
            if x.abs() > 1e-3 {
                break x;
            }
        };
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), x3];
        assert!(f.evaluate(t, x).unwrap().imaginary_residue <= 1e-10);
    }
}

#[test]
fn axis_values_reduce_to_one_radial_integral() {
    let f = field(&reference(32), 10.0, 12.0, 8);
    for x3 in [-0.7, -0.05, 0.05, 0.4] {
        for t in [0.0, 0.5] {
            let full = f.evaluate(t, [0.0, 0.0, x3]).unwrap().eta[2];
            let axis = f.vertical_on_axis(t, x3).unwrap();
            assert!((full - axis).abs() <= 1e-8 * axis.abs().max(1e-12), "{full} vs {axis}");
        }
    }
}

#[test]
fn interface_points_need_a_side() {
    let f = field(&reference(16), 10.0, 11.0, 4);
    assert!(matches!(f.evaluate(0.0, [0.0, 0.0, 0.0]), Err(Error::InterfaceSample)));
}

#[test]
fn radial_quadrature_converges() {
    let p = reference(64);
    let norms: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| field(&p, 10.0, 12.0, n).hk_norm(Field::V, 2, 1.0).unwrap())
        .collect();
    let d1 = (norms[0] - norms[2]).abs();
    let d2 = (norms[1] - norms[2]).abs();
    assert!(d2 <= 1e-8 * norms[2] && d2 <= 1e-2 * d1, "{norms:?}");
}

#[test]
fn fast_modes_put_more_energy_in_velocity() {
    let f = field(&reference(64), 10.0, 20.0, 16);
    assert!(f.lambda_range().0 >= 1.0);
    for k in 0..=3 {
        for t in [0.0, 1.0] {
            assert!(f.hk_norm(Field::V, k, t).unwrap() >= f.hk_norm(Field::Eta, k, t).unwrap());
        }
    }
}

#[test]
fn initial_norms_are_controlled_by_the_amplitude() {
    let p = reference(64);
    let k = 2;
    let ratios: Vec<f64> = [(8.0, 10.0), (10.0, 12.0), (20.0, 22.0), (40.0, 42.0)]
        .iter()
        .map(|&(a, b)| {
            let f = field(&p, a, b, 16);
            let bound = f.amplitude().weighted_mass(k as i32 + 1, 64).sqrt();
            Field::ALL
                .iter()
                .map(|&w| f.hk_norm(w, k, 0.0).unwrap() / bound)
                .fold(0.0, f64::max)
        })
        .collect();
    let c = ratios[1];
    for r in &ratios {
        assert!(*r <= 4.0 * c, "{ratios:?}");
    }
}

#[test]
fn rescaling_scales_norms_linearly() {
    let f = field(&reference(32), 10.0, 12.0, 8);
    let g = f.rescaled(3.0).unwrap();
    for which in Field::ALL {
        let a = f.hk_norm(which, 1, 0.5).unwrap();
        let b = g.hk_norm(which, 1, 0.5).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-13 * b);
    }
    assert!(f.rescaled(-1.0).is_err());
}

#[test]
fn orders_above_the_stack_are_refused() {
    let f = field(&reference(16), 10.0, 11.0, 4);
    assert!(matches!(
        f.hk_norm(Field::Eta, 4, 0.0),
        Err(Error::DerivativeOrderUnavailable { .. })
    ));
}

#[test]
fn stabilized_frequencies_cannot_be_synthesized() {
    let r = SynthesisField::build(
        &reference(32),
        RadialAmplitude::new(1.0, 2.0, 1.0).unwrap(),
        SynthesisOptions::default(),
    );
    assert!(matches!(r, Err(Error::ModeUnavailable(_))));
}

#[test]
fn small_data_grows_past_the_threshold() {
    let opts = IllposedOptions::default();
    let out = illposed_sequence(&reference(64), &opts).unwrap();
    assert_eq!(out.len(), 4);
    let mut radii = Vec::new();
    for (i, o) in out.iter().enumerate() {
        let IllposedOutcome::Found(e) = o else {
            panic!("entry {} not found: {o:?}", i + 1)
        };
        assert_eq!(e.n, i + 1);
        assert!(e.init_norm <= 1.0 / e.n as f64 * (1.0 + 1e-12));
        assert!(e.grown_norm >= opts.alpha);
        assert!(e.grown_min >= opts.alpha);
        assert_eq!(e.velocity_dominates, Some(true));
        radii.push(e.radius);
    }
    assert!(radii.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn inconsistent_orders_are_rejected() {
    let opts = IllposedOptions {
        j: 1,
        k: 2,
        ..IllposedOptions::default()
    };
    assert!(illposed_sequence(&reference(16), &opts).is_err());
}
