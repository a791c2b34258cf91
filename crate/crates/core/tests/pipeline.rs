use csdr_core::harvest::{iv_residual, mppt, power_at_voltage, solve_iv};
use csdr_core::output::{profile_table, Table};
use csdr_core::power::solve_operating_point;
use csdr_core::sweep::{run_point, run_sweep, ColumnGroup, Status, SweepSpec, VarRange};
use csdr_core::{CsdrConfig, Error};
use proptest::prelude::*;

fn at(d_w: f64) -> CsdrConfig {
    CsdrConfig::default().with("d_w", d_w).unwrap()
}

#[test]
fn ridge_shifts_down_with_distance() {
    // the charging-optimal R_M2 at R_M3 = 0.1 does not increase with d_w
    let spec = SweepSpec::new(
        vec![
            VarRange::new("d_w", 1.0, 6.0, 3).unwrap(),
            VarRange::new("R_M2", 0.5, 0.9, 81).unwrap(),
        ],
        vec![ColumnGroup::Charging],
    );
    let res = run_sweep(&at(1.0), &spec).unwrap();
    let ridge: Vec<f64> = res.summary.ridge.iter().map(|r| r.inner.unwrap()).collect();
    assert!(ridge.windows(2).all(|w| w[1] <= w[0]), "{ridge:?}");
    assert!(ridge.iter().all(|r| (0.65..=0.8).contains(r)), "{ridge:?}");
}

#[test]
fn rates_trade_off_with_m3_reflectance() {
    let spec = SweepSpec::new(
        vec![VarRange::new("Rp_M3", 0.05, 0.95, 19).unwrap()],
        vec![ColumnGroup::Rates],
    );
    let res = run_sweep(&at(6.0), &spec).unwrap();
    let down: Vec<f64> = (0..19).map(|i| res.value(i, "r_b_down").unwrap()).collect();
    let up: Vec<f64> = (0..19).map(|i| res.value(i, "r_b_up").unwrap()).collect();
    assert!(down.windows(2).all(|w| w[1] < w[0]));
    assert!(up.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn output_power_vanishes_before_the_far_edge() {
    let p = |d: f64| solve_operating_point(&at(d)).unwrap().power.p_out;
    assert!(p(1.0) > p(6.0));
    assert!(p(6.0) > p(8.5));
    assert_eq!(p(9.8), 0.0);
    assert!(run_point(&at(10.5)).unwrap().status == Status::Unstable);
}

#[test]
fn smaller_aperture_trades_range_for_short_distance_power() {
    let p = |a_g: f64, d: f64| {
        solve_operating_point(&at(d).with("a_g", a_g).unwrap())
            .unwrap()
            .power
            .p_out
    };
    assert!(p(1.1e-3, 1.0) > p(1.4e-3, 1.0));
    // the distance where output first vanishes moves closer with the smaller aperture
    let dark_from = |a_g: f64| {
        (20..=1000)
            .map(|i| i as f64 * 0.01)
            .find(|&d| p(a_g, d) == 0.0)
            .unwrap_or(f64::INFINITY)
    };
    assert!(dark_from(1.1e-3) < dark_from(1.4e-3));
}

#[test]
fn profile_is_finite_and_positive_over_stable_range() {
    for d in [0.2, 1.0, 4.0, 8.0, 10.0] {
        let t = profile_table(&at(d), 1000).unwrap();
        for col in ["w00", "w"] {
            assert!(t
                .column(col)
                .unwrap()
                .iter()
                .all(|v| v.is_some_and(|x| x.is_finite() && x > 0.0)));
        }
    }
}

#[test]
fn unstable_radius_is_a_typed_error() {
    let e = csdr_core::cavity::fundamental_radius_at_m1(&at(11.0)).unwrap_err();
    assert!(matches!(e, Error::UnstableCavity { .. }));
}

#[test]
fn parallel_and_serial_orders_agree() {
    let spec = SweepSpec::new(
        vec![
            VarRange::new("R_M3", 0.05, 0.5, 5).unwrap(),
            VarRange::new("d_w", 0.1, 11.0, 9).unwrap(),
        ],
        ColumnGroup::ALL.to_vec(),
    );
    let res = run_sweep(&CsdrConfig::default(), &spec).unwrap();
    for (i, row) in res.rows.iter().enumerate() {
        let c = CsdrConfig::default()
            .with("R_M3", row.vars[0])
            .unwrap()
            .with("d_w", row.vars[1])
            .unwrap();
        let single = run_point(&c).unwrap();
        assert_eq!(single.status, row.status, "row {i}");
    }
    let mut a = Vec::new();
    Table::from(res).write_csv(&mut a).unwrap();
    assert!(!String::from_utf8(a).unwrap().contains("NaN"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn iv_solution_satisfies_both_equations(i_pv in 0.0..8.0f64, r_load in 0.001..50.0f64) {
        let c = CsdrConfig::default();
        let op = solve_iv(&c, i_pv, r_load).unwrap();
        prop_assert!(iv_residual(&c, &op).abs() < 1e-12);
        prop_assert!((op.v_chg - op.i_chg * r_load).abs() <= 1e-12 * op.v_chg.max(1.0));
        prop_assert!(op.i_chg >= 0.0 && op.i_chg <= i_pv);
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn mppt_matches_grid_scan(i_pv in 0.05..8.0f64) {
        let c = CsdrConfig::default();
        let best = mppt(&c, i_pv).unwrap();
        let n = 2000;
        let scan = |lo: f64, hi: f64| {
            (0..=n)
                .map(|k| lo + (hi - lo) * k as f64 / n as f64)
                .map(|v| (v, power_at_voltage(&c, i_pv, v).unwrap()))
                .fold((0.0, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a })
        };
        let (v0, _) = scan(0.0, best.v_oc);
        let h = best.v_oc / n as f64;
        let (_, p) = scan((v0 - h).max(0.0), (v0 + h).min(best.v_oc));
        prop_assert!((best.p_chg - p).abs() <= 1e-9 * p, "{} vs {}", best.p_chg, p);
    }
}
