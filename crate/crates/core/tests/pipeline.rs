use num_traits::ToPrimitive;
use proptest::prelude::*;

use pertlab::cli::parse_perturbation;
use pertlab::exact_series::{build_series, gaussian_moment};
use pertlab::ghost_reg::{ghost_energy, sigma_extrapolate, sigma_sweep, FitModel, DEFAULT_SIGMA_GRID};
use pertlab::poly::{rational, RationalPoly, RealPoly};
use pertlab::quad_engine::{weighted_integral, QuadConfig};
use pertlab::sc_method::{psi_n_closed_form, psi_n_shoot, sc_energy};

fn arb_perturbation() -> impl Strategy<Value = RationalPoly> {
    prop::collection::vec((-6i64..=6, 1i64..=4), 1..=3).prop_map(|cs| {
        RationalPoly::from_even_coeffs(cs.into_iter().map(|(n, d)| rational(n, d)).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The first-order energy is the Gaussian moment, and both floating routes see it.
    #[test]
    fn first_order_routes_agree_with_oracle(v in arb_perturbation()) {
        let cfg = QuadConfig::default();
        let s = build_series(&v, 1).unwrap();
        let exact = s.energy(1).unwrap().to_f64().unwrap();
        prop_assert_eq!(s.energy(1).unwrap(), &gaussian_moment(&v));
        let scale = 1.0 + v.even_coeffs().iter().map(|c| c.to_f64().unwrap().abs()).sum::<f64>();

        let sc = sc_energy(1, 6.0, &s, &cfg).unwrap();
        prop_assert!((sc.ratio - exact).abs() <= 1e-9 * scale, "sc {} vs {}", sc.ratio, exact);

        let g = ghost_energy(1, 1e-10, 6.0, &s, &cfg).unwrap();
        prop_assert!((g.ratio.re - exact).abs() <= 1e-9 * scale, "ghost {} vs {}", g.ratio, exact);
    }

    /// Closed form and direct integration describe the same trial solution.
    #[test]
    fn shooting_matches_closed_form(v in arb_perturbation(), alpha in -2.0f64..2.0, x in 0.5f64..5.0) {
        let s = build_series(&v, 2).unwrap();
        let cfg = QuadConfig::with_rtol(1e-12);
        for n in [1, 2] {
            let a = psi_n_closed_form(n, alpha, x, &s, &cfg).unwrap();
            let b = psi_n_shoot(n, alpha, x, &s, &cfg).unwrap();
            let floor = psi_n_closed_form(n, 0.0, x, &s, &cfg).unwrap().abs().max(1e-3);
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(floor), "n = {} a = {} b = {}", n, a, b);
        }
    }

    #[test]
    fn printed_series_polynomials_reparse(v in arb_perturbation()) {
        let s = build_series(&v, 3).unwrap();
        for o in &s.orders {
            prop_assert_eq!(&parse_perturbation(&o.v_eff.to_string()).unwrap(), &o.v_eff);
            prop_assert_eq!(&parse_perturbation(&o.f.to_string()).unwrap(), &o.f);
        }
    }
}

#[test]
fn default_grid_extrapolates_mixed_perturbation() {
    let v = parse_perturbation("1/2 x^2 + x^4").unwrap();
    let s = build_series(&v, 2).unwrap();
    let cfg = QuadConfig::default();
    for n in [1, 2] {
        let rows = sigma_sweep(n, &DEFAULT_SIGMA_GRID, 6.0, &s, &cfg).unwrap();
        let fit = sigma_extrapolate(&rows, FitModel::Even).unwrap();
        let exact = s.energy(n).unwrap().to_f64().unwrap();
        assert!((fit.limit - exact).abs() < 1e-6, "n = {n}: {} vs {exact}", fit.limit);
        assert!(rows.last().unwrap().im_abs < 1e-5);
    }
}

#[test]
fn matrix_element_from_weighted_integral() {
    let cfg = QuadConfig::default();
    let v = RationalPoly::x_pow(6).unwrap();
    let w = weighted_integral(&RealPoly::from(&v), 10.0, 0.0, &cfg).unwrap().re;
    let norm = weighted_integral(&RealPoly::one(), 10.0, 0.0, &cfg).unwrap().re;
    let exact = gaussian_moment(&v).to_f64().unwrap();
    assert!((w / norm - exact).abs() < 1e-10 * exact);
}
