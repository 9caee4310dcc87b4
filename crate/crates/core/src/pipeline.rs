//! Single-point evaluation of the full pipeline.

use std::fmt;

use crate::dynamics::{build_drift, first_moments, solve_lyapunov, CovarianceState, LinearizedSystem};
use crate::error::Error;
use crate::measures::MeasureSet;
use crate::model::{steady_state, MeanFields, SystemParams};

/// Classification of an evaluated point. Exactly one applies per point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Physical, but at least one symplectic eigenvalue was clamped to vacuum.
    Clamped,
    /// Covariance violates the uncertainty bound; coherences are unavailable.
    Unphysical,
    Unstable,
    Error(&'static str),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Clamped => f.write_str("clamped"),
            Status::Unphysical => f.write_str("unphysical"),
            Status::Unstable => f.write_str("unstable"),
            Status::Error(code) => write!(f, "error:{code}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub mean_fields: Option<MeanFields>,
    pub system: Option<LinearizedSystem>,
    pub state: Option<CovarianceState>,
    pub measures: Option<MeasureSet>,
    pub status: Status,
    pub error: Option<Error>,
}

impl PointOutcome {
    fn failed(error: Error, mean_fields: Option<MeanFields>, system: Option<LinearizedSystem>) -> Self {
        Self {
            mean_fields,
            system,
            state: None,
            measures: None,
            status: Status::Error(error.code()),
            error: Some(error),
        }
    }

    pub fn abscissa(&self) -> Option<f64> {
        self.system.as_ref().map(|s| s.spectral_abscissa)
    }
}

/// Runs steady state, drift, stability and (when `with_measures` and the
/// point is robustly stable) the Lyapunov solve and all measures.
pub fn evaluate(params: &SystemParams, with_measures: bool) -> PointOutcome {
    let mf = match steady_state(params) {
        Ok(mf) => mf,
        Err(e) => return PointOutcome::failed(e, None, None),
    };
    let sys = match build_drift(&mf, params) {
        Ok(sys) => sys,
        Err(e) => return PointOutcome::failed(e, Some(mf), None),
    };
    if !sys.is_robustly_stable() {
        return PointOutcome {
            mean_fields: Some(mf),
            system: Some(sys),
            state: None,
            measures: None,
            status: Status::Unstable,
            error: None,
        };
    }
    if !with_measures {
        return PointOutcome {
            mean_fields: Some(mf),
            system: Some(sys),
            state: None,
            measures: None,
            status: Status::Ok,
            error: None,
        };
    }
    let state = match solve_lyapunov(&sys) {
        Ok(st) => st.with_first_moments(first_moments(&mf)),
        Err(e) => return PointOutcome::failed(e, Some(mf), Some(sys)),
    };
    let measures = match MeasureSet::evaluate(&state) {
        Ok(m) => m,
        Err(e) => {
            let mut out = PointOutcome::failed(e, Some(mf), Some(sys));
            out.state = Some(state);
            return out;
        }
    };
    let (status, error) = match (&measures.coherence, state.physical) {
        (_, false) => (Status::Unphysical, None),
        (Err(e), true) => (Status::Error(e.code()), Some(e.clone())),
        (Ok(_), true) if measures.clamps_applied > 0 => (Status::Clamped, None),
        (Ok(_), true) => (Status::Ok, None),
    };
    PointOutcome {
        mean_fields: Some(mf),
        system: Some(sys),
        state: Some(state),
        measures: Some(measures),
        status,
        error,
    }
}

/// Full evaluation of one point.
pub fn evaluate_point(params: &SystemParams) -> PointOutcome {
    evaluate(params, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Parameterization;
    use std::f64::consts::PI;

    struct Frozen {
        hopping: f64,
        theta: f64,
        coupling: f64,
        n_th: f64,
        abscissa: f64,
        r_min: f64,
        c_t: f64,
        pairs: [f64; 3],
        one_vs_two: [f64; 3],
    }

    // Produced by an independent dense-matrix implementation (Bartels-Stewart
    // Lyapunov solver, eigenvalue-based symplectic spectra).
    const FROZEN: [Frozen; 4] = [
        Frozen {
            hopping: 0.2,
            theta: PI,
            coupling: 0.15,
            n_th: 100.0,
            abscissa: -0.05362295954386205,
            r_min: 0.0036281507559513555,
            c_t: 44.1775097735509,
            pairs: [0.0, 0.11893704955584519, 0.11893704955584432],
            one_vs_two: [0.1333198129049137, 0.13331981290491193, 0.18509649796702252],
        },
        Frozen {
            hopping: 0.0,
            theta: PI,
            coupling: 0.2,
            n_th: 100.0,
            abscissa: -0.10000499999999993,
            r_min: 0.0038306635702607256,
            c_t: 46.45683805442546,
            pairs: [0.0, 0.15850425242901509, 0.15850425242901495],
            one_vs_two: [0.1701595181244414, 0.17015951812443997, 0.24232770008157575],
        },
        Frozen {
            hopping: 0.3,
            theta: PI / 2.0,
            coupling: 0.1,
            n_th: 1000.0,
            abscissa: -0.028139113458136245,
            r_min: 0.0,
            c_t: 40.335507597117,
            pairs: [0.0, 0.0, 0.011611632241869056],
            one_vs_two: [0.0, 0.0372608550072528, 0.02533717553162347],
        },
        Frozen {
            hopping: 0.1,
            theta: 0.0,
            coupling: 0.25,
            n_th: 1e4,
            abscissa: -0.08541341641428857,
            r_min: 0.0,
            c_t: 46.37678274482353,
            pairs: [0.0; 3],
            one_vs_two: [0.0; 3],
        },
    ];

    #[test]
    fn matches_independent_reference_values() {
        for f in &FROZEN {
            let mut p = SystemParams {
                hopping: f.hopping,
                theta: f.theta,
                n_th: f.n_th,
                ..SystemParams::default()
            };
            p.set_coupling([f.coupling; 2]);
            let out = evaluate_point(&p);
            let m = out.measures.as_ref().expect("stable point");
            assert!((out.abscissa().unwrap() - f.abscissa).abs() < 1e-10);
            assert!((m.residual.clamped() - f.r_min).abs() < 1e-9, "{} vs {}", m.residual.clamped(), f.r_min);
            let c_t = m.coherence.as_ref().unwrap().total;
            assert!((c_t - f.c_t).abs() < 1e-9 * f.c_t, "{c_t} vs {}", f.c_t);
            for (a, b) in m.negativity.pairs.iter().zip(f.pairs) {
                assert!((a - b).abs() < 1e-9);
            }
            for (a, b) in m.negativity.one_vs_two.iter().zip(f.one_vs_two) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unstable_point_carries_no_state() {
        let mut p = SystemParams::default();
        p.set_coupling([0.35, 0.35]);
        let out = evaluate_point(&p);
        assert_eq!(out.status, Status::Unstable);
        assert!(out.state.is_none() && out.measures.is_none());
        assert!(out.abscissa().unwrap() > 0.0);
    }

    #[test]
    fn saturation_points_are_flagged_unphysical() {
        let p = SystemParams {
            loss0: 0.3,
            ..SystemParams::default()
        };
        let out = evaluate_point(&p);
        assert_eq!(out.status, Status::Unphysical);
        let m = out.measures.unwrap();
        assert!(matches!(m.coherence, Err(Error::DomainError { .. })));
    }

    #[test]
    fn drive_mode_gain_runaway_is_an_error_status() {
        let p = SystemParams {
            mode: Parameterization::Drive { amplitude: [1.0, 1.0] },
            gain0: 0.5,
            hopping: 0.0,
            ..SystemParams::default()
        };
        let out = evaluate_point(&p);
        assert_eq!(out.status, Status::Error("gain_dominated"));
        assert_eq!(out.status.to_string(), "error:gain_dominated");
    }
}
