//! Property tests spanning several modules.

use std::f64::consts::{PI, TAU};

use nalgebra::{Complex, Matrix6, Vector6};
use proptest::prelude::*;

use crate::dynamics::{build_drift, first_moments, solve_lyapunov, Convention, CovarianceState};
use crate::measures::{neg_1v1, neg_1v2, residual_contangle_min, CoherenceSet, Mode, Negativities};
use crate::model::{saturable_rates, steady_state, DetuningRef, Parameterization, Saturation, SystemParams};
use crate::pipeline::{evaluate_point, Status};
use crate::sweep::{figure_preset, run_sweep, Figure};
use crate::validate::{rotate_locally, two_mode_squeezed};

fn stable_point(j: f64, theta: f64, g: f64, n_th: f64) -> Option<(SystemParams, CovarianceState)> {
    let mut p = SystemParams {
        hopping: j,
        theta,
        n_th,
        ..SystemParams::default()
    };
    p.set_coupling([g, g]);
    let mf = steady_state(&p).ok()?;
    let sys = build_drift(&mf, &p).ok()?;
    if !sys.is_robustly_stable() {
        return None;
    }
    let st = solve_lyapunov(&sys).ok()?.with_first_moments(first_moments(&mf));
    Some((p, st))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn full_saturation_is_monotone(g0 in 0.0..1.0f64, f0 in 0.0..1.0f64, a in 0.0..50.0f64, da in 0.0..50.0f64) {
        let p = SystemParams { gain0: g0, loss0: f0, saturation: Saturation::Full, ..SystemParams::default() };
        let small = Complex::new(a, 0.0);
        let large = Complex::new(0.0, a + da);
        let (g_lo, f_lo) = saturable_rates(&p, small, small);
        let (g_hi, f_hi) = saturable_rates(&p, large, large);
        prop_assert!(g_hi <= g_lo && f_hi <= f_lo);
    }

    #[test]
    fn drive_solutions_satisfy_mean_field_equations(
        e1 in 0.0..300.0f64,
        e2 in 0.0..300.0f64,
        j in 0.0..0.5f64,
        theta in 0.0..TAU,
        f0 in 0.0..0.3f64,
        full in any::<bool>(),
    ) {
        let p = SystemParams {
            mode: Parameterization::Drive { amplitude: [e1, e2] },
            detuning: DetuningRef::Bare,
            hopping: j,
            theta,
            loss0: f0,
            saturation: if full { Saturation::Full } else { Saturation::Linear },
            ..SystemParams::default()
        };
        let mf = steady_state(&p).unwrap();
        prop_assert!(mf.residual(&p) <= mf.residual_tolerance(), "residual {}", mf.residual(&p));
    }

    #[test]
    fn direct_coupling_reproduces_drive_solution(e in 0.1..300.0f64, delta in 0.5..1.5f64) {
        let drive = SystemParams {
            mode: Parameterization::Drive { amplitude: [e, e] },
            detuning: DetuningRef::Bare,
            delta: [delta; 2],
            hopping: 0.0,
            ..SystemParams::default()
        };
        let from_drive = steady_state(&drive).unwrap();
        let mut direct = drive;
        direct.set_coupling([
            drive.g[0] * from_drive.alpha[0].norm(),
            drive.g[1] * from_drive.alpha[1].norm(),
        ]);
        let from_direct = steady_state(&direct).unwrap();
        for k in 0..2 {
            let (a, b) = (from_drive.alpha[k].norm(), from_direct.alpha[k].norm());
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
        let (a, b) = (from_drive.beta.norm(), from_direct.beta.norm());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        let m1 = build_drift(&from_drive, &drive).unwrap().drift;
        let m2 = build_drift(&from_direct, &direct).unwrap().drift;
        prop_assert!((m1 - m2).norm() <= 1e-9 * m1.norm());
    }

    #[test]
    fn local_rotations_leave_measures_unchanged(
        j in 0.0..0.5f64,
        g in 0.02..0.3f64,
        log_n in 2.0..5.0f64,
        angles in prop::array::uniform3(0.0..TAU),
    ) {
        let Some((_, st)) = stable_point(j, PI, g, 10f64.powf(log_n)) else { return Ok(()) };
        let rotated = rotate_locally(&st, angles);
        let (n1, n2) = (Negativities::compute(&st).unwrap(), Negativities::compute(&rotated).unwrap());
        for (a, b) in n1.as_array().iter().zip(n2.as_array()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
        let r1 = residual_contangle_min(&st).unwrap().r_min;
        let r2 = residual_contangle_min(&rotated).unwrap().r_min;
        prop_assert!((r1 - r2).abs() <= 1e-9);
        for (a, b) in st.symplectic.iter().zip(&rotated.symplectic) {
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
        if let (Ok(c1), Ok(c2)) = (CoherenceSet::compute(&st), CoherenceSet::compute(&rotated)) {
            prop_assert!((c1.total - c2.total).abs() <= 1e-9);
            for (a, b) in c1.one.iter().chain(&c1.two).zip(c2.one.iter().chain(&c2.two)) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn appended_vacuum_does_not_change_pair_negativity(r in 0.0..2.5f64) {
        let st = two_mode_squeezed(r);
        let pair = neg_1v1(&st, Mode::A1, Mode::A2).unwrap();
        prop_assert!((neg_1v2(&st, Mode::A1).unwrap() - pair).abs() <= 1e-9);
        prop_assert!((neg_1v2(&st, Mode::A2).unwrap() - pair).abs() <= 1e-9);
        prop_assert!(neg_1v2(&st, Mode::B).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn thermal_products_carry_no_coherence(n in prop::array::uniform3(0.0..1e5f64)) {
        let diag = Vector6::from_fn(|i, _| n[i / 2] + 0.5);
        let st = CovarianceState::new(Matrix6::from_diagonal(&diag), Vector6::zeros(), Convention::HalfVacuum);
        let c = CoherenceSet::compute(&st).unwrap();
        prop_assert!(c.total.abs() <= 1e-12);
        prop_assert!(c.one.iter().chain(&c.two).all(|x| x.abs() <= 1e-12));
        prop_assert!(residual_contangle_min(&st).unwrap().r_min.abs() <= 1e-12);
    }

    #[test]
    fn unstable_points_have_non_decaying_lyapunov_mode(j in 0.0..0.5f64, g in 0.3..0.5f64, theta in 0.0..TAU) {
        let mut p = SystemParams { hopping: j, theta, ..SystemParams::default() };
        p.set_coupling([g, g]);
        let sys = build_drift(&steady_state(&p).unwrap(), &p).unwrap();
        if !sys.stable {
            let op = sys.lyapunov_operator();
            let eig = op.complex_eigenvalues();
            prop_assert!(eig.iter().any(|z| z.re >= -1e-9));
        }
    }
}

#[test]
fn monogamy_holds_along_phase_cut() {
    let spec = figure_preset(Figure::Fig3).remove(1);
    let res = run_sweep(&spec, 0).unwrap();
    let raw = res.series("R_min_raw");
    assert!(raw.iter().all(Option::is_some));
    for r in raw.into_iter().flatten() {
        assert!(r >= -1e-9, "R_min_raw = {r}");
    }
}

#[test]
fn monogamy_holds_on_physical_saturation_points() {
    for spec in figure_preset(Figure::Fig6).into_iter().skip(2) {
        let res = run_sweep(&spec, 0).unwrap();
        for (k, cell) in res.cells.iter().enumerate() {
            if matches!(cell.status, Status::Ok | Status::Clamped) {
                let r = res.value(k, "R_min_raw").unwrap();
                assert!(r >= -1e-9, "{}: R_min_raw = {r} at {:?}", spec.name, cell.coords);
            }
        }
    }
}

#[test]
fn figure_working_point_is_physical_and_tangled() {
    let out = evaluate_point(&SystemParams::default());
    assert!(matches!(out.status, Status::Ok | Status::Clamped), "{}", out.status);
    let m = out.measures.unwrap();
    assert!(m.residual.raw.iter().all(|&r| r >= -1e-9));
    assert!(m.residual.r_min > 0.0);
}
