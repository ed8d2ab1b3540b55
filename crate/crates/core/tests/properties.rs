mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use squeezeline::geometry::{ProfileSpec, ScalingFamily};
use squeezeline::pointint::{
    admissible_boundary_data, bound_state, check_boundary_conditions, max_abs_diff, resolvent_point,
    scattering, unitarity_defect, BoundaryData, Momentum, PointInteraction,
};
use squeezeline::resonance::{analyze, AnalysisOptions};
use squeezeline::scaled::{convergence_sweep, ProbeGrid, Target};

fn interaction() -> impl Strategy<Value = PointInteraction<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64, -10.0..10.0f64)
        .prop_filter("couplings vanish", |(a, b, _)| a * a + b * b > 1e-3)
        .prop_map(|(a, b, l)| PointInteraction::new(a, b, l).unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn vertex_unitary_is_unitary(pi in interaction()) {
        prop_assert!(unitarity_defect(&pi.vertex_unitary()) <= 1e-12);
    }

    #[test]
    fn scattering_matrix_is_unitary(pi in interaction(), k in 0.0..20.0f64) {
        let s = scattering(&pi, k).unwrap();
        prop_assert!(unitarity_defect(&s.matrix()) <= 1e-12);
        prop_assert!((s.flux() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rescaling_leaves_observables(pi in interaction(), t in prop_oneof![-3.0..-0.2f64, 0.2..3.0f64], k in 0.01..10.0f64) {
        let q = pi.rescaled(t).unwrap();
        prop_assert!(max_abs_diff(&pi.vertex_unitary(), &q.vertex_unitary()) <= 1e-12);
        let (a, b) = (scattering(&pi, k).unwrap(), scattering(&q, k).unwrap());
        prop_assert!(max_abs_diff(&a.matrix(), &b.matrix()) <= 1e-12);
        let km = Momentum::from_parts(0.3, 0.9).unwrap();
        let (ra, rb) = (resolvent_point(&pi, km, 0.4, -0.7), resolvent_point(&q, km, 0.4, -0.7));
        if let (Ok(ra), Ok(rb)) = (ra, rb) {
            prop_assert!((ra - rb).norm() <= 1e-12 * (1.0 + ra.norm()));
        }
        prop_assert_eq!(bound_state(&pi).is_some(), bound_state(&q).is_some());
    }

    #[test]
    fn explicit_conditions_imply_unitary_form(pi in interaction(), a in complex(), b in complex()) {
        let data = admissible_boundary_data(&pi, a, b);
        let r = check_boundary_conditions(&pi, &data);
        prop_assert!(r.explicit <= 1e-10 * (1.0 + data.magnitude()));
        prop_assert!(r.unitary_form <= 1e-10 * (1.0 + data.magnitude()));
    }

    #[test]
    fn unitary_form_implies_explicit_conditions(pi in interaction(), x in complex(), y in complex()) {
        // Ψ = (U + I)χ, Ψ' = i(U - I)χ spans the solutions of the unitary form
        let u = pi.vertex_unitary();
        let i = Complex64::new(0.0, 1.0);
        let chi = [x, y];
        let mut psi = [Complex64::new(0.0, 0.0); 2];
        let mut dpsi = psi;
        for r in 0..2 {
            for c in 0..2 {
                let id = if r == c { 1.0 } else { 0.0 };
                psi[r] += (u[r][c] + id) * chi[c];
                dpsi[r] += i * (u[r][c] - id) * chi[c];
            }
        }
        let data = BoundaryData { f_plus: psi[0], f_minus: psi[1], df_plus: dpsi[0], df_minus: -dpsi[1] };
        let r = check_boundary_conditions(&pi, &data);
        let scale = 1.0 + data.magnitude();
        prop_assert!(r.unitary_form <= 1e-10 * scale);
        prop_assert!(r.explicit <= 1e-10 * scale * (1.0 + pi.lambda_hat().abs()) / pi.norm_sq().min(1.0).max(1e-3), "{:?}", r);
    }

    #[test]
    fn resolvent_is_symmetric(pi in interaction(), s in -3.0..3.0f64, sp in -3.0..3.0f64, kr in -2.0..2.0f64, ki in 0.1..3.0f64) {
        let k = Momentum::from_parts(kr, ki).unwrap();
        if let (Ok(a), Ok(b)) = (resolvent_point(&pi, k, s, sp), resolvent_point(&pi, k, sp, s)) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn scale_invariant_transmission_is_flat(c1 in -3.0..3.0f64, c2 in -3.0..3.0f64, k in 0.01..100.0f64) {
        prop_assume!(c1 * c1 + c2 * c2 > 1e-3);
        let pi = PointInteraction::new(c1, c2, 0.0).unwrap();
        let t = scattering(&pi, k).unwrap().t_left;
        prop_assert!((t.re - (c1 * c1 - c2 * c2) / (c1 * c1 + c2 * c2)).abs() <= 1e-14);
    }
}

/// Resolvent image `f = R g` of a smooth test function satisfies the
/// differential equation away from 0 and the vertex conditions at 0.
#[test]
fn resolvent_image_solves_the_boundary_value_problem() {
    let k = Momentum::from_parts(0.2, 1.1).unwrap();
    let g = |x: f64| (-(x - 0.6) * (x - 0.6) * 4.0).exp() + 0.5 * (-(x + 1.0) * (x + 1.0) * 3.0).exp();
    for pi in [
        PointInteraction::new(0.8, -0.3, 1.7).unwrap(),
        PointInteraction::new(1.0, -1.0, 0.6).unwrap(),
        PointInteraction::new(0.5, 1.2, 0.0).unwrap(),
    ] {
        let image = |s: f64| -> Complex64 {
            let mut cuts = vec![-12.0, 0.0, s, 12.0];
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let mut acc = Complex64::new(0.0, 0.0);
            for w in cuts.windows(2) {
                let re = common::simpson(&|x| resolvent_point(&pi, k, s, x).unwrap().re * g(x), w[0], w[1], 1e-13);
                let im = common::simpson(&|x| resolvent_point(&pi, k, s, x).unwrap().im * g(x), w[0], w[1], 1e-13);
                acc += Complex64::new(re, im);
            }
            acc
        };
        let h = 1e-3;
        for s in [-1.3, -0.4, 0.5, 1.1] {
            let second = (image(s + h) - image(s) * 2.0 + image(s - h)) / (h * h);
            let residual = -second - k.energy() * image(s) - g(s);
            assert!(residual.norm() < 1e-5, "ODE residual {residual}");
        }
        // one-sided values and derivatives at 0 from cubic extrapolation
        let side = |sign: f64| {
            let f: Vec<Complex64> = (1..=4).map(|j| image(sign * j as f64 * h)).collect();
            let value = f[0] * 4.0 - f[1] * 6.0 + f[2] * 4.0 - f[3];
            let deriv = (value * -25.0 + f[0] * 48.0 - f[1] * 36.0 + f[2] * 16.0 - f[3] * 3.0) / (12.0 * h);
            (value, deriv * sign)
        };
        let (fp, dp) = side(1.0);
        let (fm, dm) = side(-1.0);
        let data = BoundaryData { f_plus: fp, f_minus: fm, df_plus: dp, df_minus: dm };
        let r = check_boundary_conditions(&pi, &data);
        assert!(r.max() < 1e-6, "{pi:?}: {r:?}");
    }
}

#[test]
fn profile_specs_parse_from_toml_and_json() {
    let toml_src = r#"
        kind = "piecewise_constant"
        support = [0.0, 1.0]
        [parameters]
        segments = [[0.0, 1.0, 6.283185307179586]]
    "#;
    let spec: ProfileSpec = toml::from_str(toml_src).unwrap();
    let profile = spec.to_profile::<f64>().unwrap();
    assert_eq!(profile.support(), (0.0, 1.0));
    let json = serde_json::to_string(&spec).unwrap();
    let back: ProfileSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);

    let bad = r#"{"kind": "bump", "parameters": {"height": 1.0, "half_width": 1.0, "radius": 2.0}}"#;
    let err = serde_json::from_str::<ProfileSpec>(bad).unwrap_err().to_string();
    assert!(err.contains("radius"), "{err}");
    let missing: ProfileSpec = serde_json::from_str(r#"{"kind": "bump", "parameters": {"height": 1.0}}"#).unwrap();
    let err = missing.to_profile::<f64>().unwrap_err().to_string();
    assert!(err.contains("half_width"), "{err}");

    let fam: ScalingFamily<f64> = toml::from_str("lambda_coeffs = [-1.0]\nalpha = 0.5\nd = 1.0\neps_max = 1.0").unwrap();
    assert!(fam.validate().unwrap_err().to_string().contains("alpha"));
}

#[test]
fn grid_refinement_keeps_constants() {
    let opts = AnalysisOptions::default();
    for pot in [common::square_well(std::f64::consts::PI, 1.0).unwrap(), common::arc_potential(2.0 * std::f64::consts::PI).unwrap()] {
        let a = analyze(&pot, -1.0, &opts).unwrap().constants.unwrap();
        let fine = pot.resampled(pot.grid_spec().refined()).unwrap();
        let b = analyze(&fine, -1.0, &opts).unwrap().constants.unwrap();
        assert!((a.c1 - b.c1).abs() < 1e-6 && (a.c2 - b.c2).abs() < 1e-6);
    }
}

#[test]
fn convergence_errors_follow_the_target_rescaling() {
    let res = analyze(&common::arc_potential(4.0 * std::f64::consts::PI).unwrap(), -1.0, &AnalysisOptions::default()).unwrap();
    let c = res.constants.unwrap();
    let pi = PointInteraction::from_constants(&c).unwrap();
    let pot = common::arc_potential(4.0 * std::f64::consts::PI).unwrap();
    let fam = ScalingFamily::linear(-1.0);
    let k = Momentum::imaginary_unit();
    let eps = [0.1, 0.05, 0.025];
    let probes = ProbeGrid::default();
    let a = convergence_sweep(&pot, &fam, k, &eps, &probes, &Target::Point(pi)).unwrap();
    let b = convergence_sweep(&pot, &fam, k, &eps, &probes, &Target::Point(pi.rescaled(-2.5).unwrap())).unwrap();
    for (x, y) in a.errors.iter().zip(&b.errors) {
        assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }
    // a denser probe grid barely moves the sup
    let dense = convergence_sweep(&pot, &fam, k, &eps, &probes.refined(), &Target::Point(pi)).unwrap();
    for (x, y) in a.errors.iter().zip(&dense.errors) {
        assert!((y - x).abs() < 0.1 * x, "{x} vs {y}");
    }
}
