//! System parameters and the classical (mean-field) steady state.
//!
//! All rates are expressed in units of the mechanical frequency. Per-cavity
//! quantities are stored as `[cavity 1, cavity 2]` arrays.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

const I: C64 = C64::new(0.0, 1.0);

/// Damping applied to the mechanical amplitude update of the drive-mode
/// fixed-point iteration.
pub const BETA_DAMPING: f64 = 0.5;
pub const MAX_FIXED_POINT_ITERATIONS: usize = 10_000;
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// How the optical amplitudes are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parameterization {
    /// Effective optomechanical couplings `G_j = g_j alpha_j`, taken real.
    DirectG { coupling: [f64; 2] },
    /// Drive amplitudes `E_j`; amplitudes follow from the nonlinear fixed point.
    Drive { amplitude: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    /// `g_s = g0`, `f_s = f0`.
    Linear,
    /// `g_s = g0 / (1 + |alpha_1|^2)`, `f_s = f0 / (1 + |alpha_2|^2)`.
    Full,
}

/// Whether `delta` holds the bare cavity detuning or the effective detuning
/// entering the drift matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetuningRef {
    /// `Delta_j = delta_j + g_j (beta + beta*)`.
    Bare,
    /// `Delta_j = delta_j`; the radiation-pressure shift is absorbed into the
    /// laser detuning.
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega_m: f64,
    pub kappa: [f64; 2],
    pub gamma_m: f64,
    /// Single-photon optomechanical couplings.
    pub g: [f64; 2],
    pub delta: [f64; 2],
    pub detuning: DetuningRef,
    /// Photon hopping rate `J`.
    pub hopping: f64,
    /// Hopping modulation phase (radians).
    pub theta: f64,
    /// Bare saturable gain of cavity 1.
    pub gain0: f64,
    /// Bare saturable loss of cavity 2.
    pub loss0: f64,
    pub n_th: f64,
    pub mode: Parameterization,
    pub saturation: Saturation,
}

impl Default for SystemParams {
    /// The working point used throughout the figures: blue sideband, `G = 0.15`,
    /// `J = 0.2`, `theta = pi`, `n_th = 100`, saturation off.
    fn default() -> Self {
        Self {
            omega_m: 1.0,
            kappa: [0.2, 0.2],
            gamma_m: 1e-5,
            g: [1e-4, 1e-4],
            delta: [1.0, 1.0],
            detuning: DetuningRef::Effective,
            hopping: 0.2,
            theta: PI,
            gain0: 0.0,
            loss0: 0.0,
            n_th: 100.0,
            mode: Parameterization::DirectG {
                coupling: [0.15, 0.15],
            },
            saturation: Saturation::Linear,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let mut scalars = vec![
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("J", self.hopping),
            ("theta", self.theta),
            ("g0", self.gain0),
            ("f0", self.loss0),
            ("n_th", self.n_th),
        ];
        for j in 0..2 {
            scalars.push((["kappa1", "kappa2"][j], self.kappa[j]));
            scalars.push((["g1", "g2"][j], self.g[j]));
            scalars.push((["Delta1", "Delta2"][j], self.delta[j]));
        }
        match self.mode {
            Parameterization::DirectG { coupling } => {
                scalars.push(("G1", coupling[0]));
                scalars.push(("G2", coupling[1]));
            }
            Parameterization::Drive { amplitude } => {
                scalars.push(("E1", amplitude[0]));
                scalars.push(("E2", amplitude[1]));
            }
        }
        if let Some((name, _)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} is not finite")));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::InvalidParams("omega_m must be positive".into()));
        }
        for (name, v) in [
            ("kappa1", self.kappa[0]),
            ("kappa2", self.kappa[1]),
            ("gamma_m", self.gamma_m),
            ("n_th", self.n_th),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if let Parameterization::DirectG { .. } = self.mode {
            if self.g.iter().any(|&g| g <= 0.0) {
                return Err(Error::InvalidParams(
                    "g1, g2 must be > 0 in DirectG mode (needed to recover alpha = G/g)".into(),
                ));
            }
        }
        Ok(())
    }

    /// `theta` reduced to `[0, 2 pi)`.
    pub fn theta_reduced(&self) -> f64 {
        self.theta.rem_euclid(TAU)
    }

    /// Sets both effective couplings (DirectG) or switches to DirectG.
    pub fn set_coupling(&mut self, coupling: [f64; 2]) {
        self.mode = Parameterization::DirectG { coupling };
    }

    /// `key=value` pairs describing every parameter, in a stable order.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![
            ("omega_m".into(), fmt_num(self.omega_m)),
            ("kappa1".into(), fmt_num(self.kappa[0])),
            ("kappa2".into(), fmt_num(self.kappa[1])),
            ("gamma_m".into(), fmt_num(self.gamma_m)),
            ("g1".into(), fmt_num(self.g[0])),
            ("g2".into(), fmt_num(self.g[1])),
            ("Delta1".into(), fmt_num(self.delta[0])),
            ("Delta2".into(), fmt_num(self.delta[1])),
            ("detuning".into(), self.detuning.to_string()),
            ("J".into(), fmt_num(self.hopping)),
            ("theta".into(), fmt_num(self.theta)),
            ("g0".into(), fmt_num(self.gain0)),
            ("f0".into(), fmt_num(self.loss0)),
            ("n_th".into(), fmt_num(self.n_th)),
            ("saturation".into(), self.saturation.to_string()),
        ];
        match self.mode {
            Parameterization::DirectG { coupling } => {
                out.push(("mode".into(), "direct_g".into()));
                out.push(("G1".into(), fmt_num(coupling[0])));
                out.push(("G2".into(), fmt_num(coupling[1])));
            }
            Parameterization::Drive { amplitude } => {
                out.push(("mode".into(), "drive".into()));
                out.push(("E1".into(), fmt_num(amplitude[0])));
                out.push(("E2".into(), fmt_num(amplitude[1])));
            }
        }
        out
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for Saturation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Saturation::Linear => "linear",
            Saturation::Full => "full",
        })
    }
}

impl fmt::Display for DetuningRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetuningRef::Bare => "bare",
            DetuningRef::Effective => "effective",
        })
    }
}

/// Classical steady state of the three modes.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFields {
    pub alpha: [C64; 2],
    pub beta: C64,
    /// Effective detunings entering the drift matrix.
    pub delta_eff: [f64; 2],
    /// `G_j = g_j alpha_j`.
    pub coupling: [C64; 2],
    /// True when both `G_j` are real to roundoff.
    pub real_gauge: bool,
    /// Phases of `G_j` dropped when `|G_j|` is used in the drift matrix.
    pub discarded_phases: Option<[f64; 2]>,
    /// Evaluated saturable gain `g_s` and loss `f_s`.
    pub gain: f64,
    pub loss: f64,
    /// Drive amplitudes: given (Drive mode) or implied by the amplitudes
    /// (DirectG mode).
    pub drive: [C64; 2],
    pub iterations: usize,
}

impl MeanFields {
    /// Real couplings used in the drift matrix.
    pub fn drift_coupling(&self) -> [f64; 2] {
        if self.real_gauge {
            [self.coupling[0].re, self.coupling[1].re]
        } else {
            [self.coupling[0].norm(), self.coupling[1].norm()]
        }
    }

    /// Net modal gain `g = g_s - kappa_1` and loss `f = f_s + kappa_2`.
    pub fn net_rates(&self, params: &SystemParams) -> (f64, f64) {
        (self.gain - params.kappa[0], self.loss + params.kappa[1])
    }

    /// Norm of the mean-value time derivatives at the stored amplitudes.
    pub fn residual(&self, params: &SystemParams) -> f64 {
        let (g, f) = self.net_rates(params);
        let [a1, a2] = self.alpha;
        let hop = params.hopping;
        let phase = C64::from_polar(1.0, params.theta);
        let d1 = -(I * self.delta_eff[0] - g) * a1 - I * hop * phase * a2 - I * self.drive[0];
        let d2 = -(I * self.delta_eff[1] + f) * a2 - I * hop * phase.conj() * a1 - I * self.drive[1];
        let db = -(I * params.omega_m + params.gamma_m) * self.beta
            - I * (params.g[0] * a1.norm_sqr() + params.g[1] * a2.norm_sqr());
        (d1.norm_sqr() + d2.norm_sqr() + db.norm_sqr()).sqrt()
    }

    /// Tolerance on [`MeanFields::residual`]: `1e-10 * max(1, |E1|, |E2|)`.
    pub fn residual_tolerance(&self) -> f64 {
        1e-10 * self.drive[0].norm().max(self.drive[1].norm()).max(1.0)
    }
}

/// Evaluated saturable gain and loss.
pub fn saturable_rates(params: &SystemParams, alpha1: C64, alpha2: C64) -> (f64, f64) {
    match params.saturation {
        Saturation::Linear => (params.gain0, params.loss0),
        Saturation::Full => (
            params.gain0 / (1.0 + alpha1.norm_sqr()),
            params.loss0 / (1.0 + alpha2.norm_sqr()),
        ),
    }
}

fn mechanical_amplitude(params: &SystemParams, alpha: [C64; 2]) -> C64 {
    let force = params.g[0] * alpha[0].norm_sqr() + params.g[1] * alpha[1].norm_sqr();
    -I * force / (I * params.omega_m + params.gamma_m)
}

fn effective_detuning(params: &SystemParams, beta: C64) -> [f64; 2] {
    match params.detuning {
        DetuningRef::Bare => [
            params.delta[0] + 2.0 * params.g[0] * beta.re,
            params.delta[1] + 2.0 * params.g[1] * beta.re,
        ],
        DetuningRef::Effective => params.delta,
    }
}

/// Coefficient matrix of the linear cavity equations `A alpha = -i E` at
/// fixed detunings and rates.
fn cavity_matrix(params: &SystemParams, delta: [f64; 2], g: f64, f: f64) -> [[C64; 2]; 2] {
    let phase = C64::from_polar(1.0, params.theta);
    let hop = params.hopping;
    [
        [I * delta[0] - g, I * hop * phase],
        [I * hop * phase.conj(), I * delta[1] + f],
    ]
}

/// Largest real part of the eigenvalues of the linear cavity generator `-A`.
fn cavity_abscissa(a: &[[C64; 2]; 2]) -> f64 {
    let tr = -(a[0][0] + a[1][1]);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    l1.re.max(l2.re)
}

fn solve_cavities(a: &[[C64; 2]; 2], drive: [f64; 2]) -> Option<[C64; 2]> {
    let rhs = [-I * drive[0], -I * drive[1]];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-14 * scale * scale.max(1.0) {
        return None;
    }
    Some([
        (rhs[0] * a[1][1] - a[0][1] * rhs[1]) / det,
        (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det,
    ])
}

/// Classical steady state of the mean-value equations.
///
/// DirectG mode is closed form. Drive mode runs a damped fixed-point
/// iteration: linear cavity solve at fixed `beta`, then a damped `beta`
/// update, re-evaluating saturable rates in Full mode.
pub fn steady_state(params: &SystemParams) -> Result<MeanFields> {
    params.validate()?;
    match params.mode {
        Parameterization::DirectG { coupling } => Ok(direct_steady_state(params, coupling)),
        Parameterization::Drive { amplitude } => drive_steady_state(params, amplitude),
    }
}

fn direct_steady_state(params: &SystemParams, coupling: [f64; 2]) -> MeanFields {
    let alpha = [
        C64::new(coupling[0] / params.g[0], 0.0),
        C64::new(coupling[1] / params.g[1], 0.0),
    ];
    let (gain, loss) = saturable_rates(params, alpha[0], alpha[1]);
    let beta = mechanical_amplitude(params, alpha);
    let delta_eff = effective_detuning(params, beta);
    let a = cavity_matrix(params, delta_eff, gain - params.kappa[0], loss + params.kappa[1]);
    // E such that the cavity equations hold exactly at the given amplitudes.
    let drive = [
        I * (a[0][0] * alpha[0] + a[0][1] * alpha[1]),
        I * (a[1][0] * alpha[0] + a[1][1] * alpha[1]),
    ];
    MeanFields {
        alpha,
        beta,
        delta_eff,
        coupling: [C64::new(coupling[0], 0.0), C64::new(coupling[1], 0.0)],
        real_gauge: true,
        discarded_phases: None,
        gain,
        loss,
        drive,
        iterations: 0,
    }
}

fn drive_steady_state(params: &SystemParams, amplitude: [f64; 2]) -> Result<MeanFields> {
    let mut alpha = [C64::new(0.0, 0.0); 2];
    let mut beta = C64::new(0.0, 0.0);
    let mut last_step = f64::INFINITY;

    for iteration in 1..=MAX_FIXED_POINT_ITERATIONS {
        let (gain, loss) = saturable_rates(params, alpha[0], alpha[1]);
        let delta_eff = effective_detuning(params, beta);
        let a = cavity_matrix(params, delta_eff, gain - params.kappa[0], loss + params.kappa[1]);
        let abscissa = cavity_abscissa(&a);
        if gain - params.kappa[0] > 0.0 && abscissa >= 0.0 {
            return Err(Error::GainDominated { abscissa });
        }
        let next_alpha = solve_cavities(&a, amplitude).ok_or(Error::GainDominated { abscissa })?;
        let target = mechanical_amplitude(params, next_alpha);
        let next_beta = beta + BETA_DAMPING * (target - beta);

        let step = (next_alpha[0] - alpha[0])
            .norm()
            .max((next_alpha[1] - alpha[1]).norm())
            .max((next_beta - beta).norm());
        let scale = next_alpha[0]
            .norm()
            .max(next_alpha[1].norm())
            .max(next_beta.norm())
            .max(1.0);
        alpha = next_alpha;
        beta = next_beta;
        last_step = step;

        if step <= FIXED_POINT_TOL * scale {
            return Ok(finish_drive(params, amplitude, alpha, beta, iteration));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_FIXED_POINT_ITERATIONS,
        last_step,
    })
}

fn finish_drive(
    params: &SystemParams,
    amplitude: [f64; 2],
    alpha: [C64; 2],
    beta: C64,
    iterations: usize,
) -> MeanFields {
    let (gain, loss) = saturable_rates(params, alpha[0], alpha[1]);
    let delta_eff = effective_detuning(params, beta);
    let coupling = [params.g[0] * alpha[0], params.g[1] * alpha[1]];
    let real_gauge = coupling
        .iter()
        .all(|c| c.im.abs() <= 1e-12 * c.norm().max(1e-300) || c.norm() == 0.0);
    let discarded_phases = if real_gauge {
        None
    } else {
        let phases = [coupling[0].arg(), coupling[1].arg()];
        log::warn!(
            "complex effective couplings; using |G_j| in the drift matrix and discarding phases {:.6}, {:.6}",
            phases[0],
            phases[1]
        );
        Some(phases)
    };
    MeanFields {
        alpha,
        beta,
        delta_eff,
        coupling,
        real_gauge,
        discarded_phases,
        gain,
        loss,
        drive: [C64::new(amplitude[0], 0.0), C64::new(amplitude[1], 0.0)],
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn drive_params(e: [f64; 2]) -> SystemParams {
        SystemParams {
            mode: Parameterization::Drive { amplitude: e },
            detuning: DetuningRef::Bare,
            ..SystemParams::default()
        }
    }

    #[test]
    fn linear_rates_ignore_amplitude() {
        let p = SystemParams {
            gain0: 0.1,
            loss0: 0.16,
            ..SystemParams::default()
        };
        let big = C64::new(30.0, -4.0);
        assert_eq!(saturable_rates(&p, big, big), (0.1, 0.16));
    }

    #[test]
    fn full_saturation() {
        let p = SystemParams {
            gain0: 0.1,
            loss0: 0.2,
            saturation: Saturation::Full,
            ..SystemParams::default()
        };
        let zero = C64::new(0.0, 0.0);
        assert_eq!(saturable_rates(&p, zero, zero).0, 0.1);
        let (gs, fs) = saturable_rates(&p, C64::new(0.6, 0.8), C64::new(0.0, 1.0));
        assert_relative_eq!(gs, 0.05, epsilon = 1e-15);
        assert_relative_eq!(fs, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn unforced_fixed_point_is_zero() {
        let mf = steady_state(&drive_params([0.0, 0.0])).unwrap();
        assert_eq!(mf.alpha, [C64::new(0.0, 0.0); 2]);
        assert_eq!(mf.beta, C64::new(0.0, 0.0));
    }

    #[test]
    fn single_linear_cavity() {
        let p = SystemParams {
            hopping: 0.0,
            g: [0.0, 0.0],
            kappa: [0.2, 0.2],
            delta: [1.0, 1.0],
            gain0: 0.0,
            ..drive_params([1.0, 0.0])
        };
        let mf = steady_state(&p).unwrap();
        let expected = -I / (I * 1.0 + 0.2);
        assert_relative_eq!(mf.alpha[0].re, expected.re, epsilon = 1e-14);
        assert_relative_eq!(mf.alpha[0].im, expected.im, epsilon = 1e-14);
        assert!(mf.residual(&p) <= mf.residual_tolerance());
    }

    #[test]
    fn direct_g_closed_form() {
        let p = SystemParams {
            detuning: DetuningRef::Bare,
            ..SystemParams::default()
        };
        let mf = steady_state(&p).unwrap();
        assert_relative_eq!(mf.alpha[0].re, 1500.0, max_relative = 1e-14);
        let expected = -I * 2.0 * (1e-4 * 1500.0 * 1500.0) / (I + 1e-5);
        assert_relative_eq!(mf.beta.re, expected.re, max_relative = 1e-13);
        assert_relative_eq!(mf.beta.im, expected.im, max_relative = 1e-13);
        assert!(mf.residual(&p) <= mf.residual_tolerance(), "{}", mf.residual(&p));
        assert_relative_eq!(mf.delta_eff[0], 1.0 + 2e-4 * expected.re, max_relative = 1e-13);
    }

    #[test]
    fn effective_detuning_is_used_verbatim() {
        let mf = steady_state(&SystemParams::default()).unwrap();
        assert_eq!(mf.delta_eff, [1.0, 1.0]);
    }

    #[test]
    fn drive_mode_converges_with_hopping() {
        let p = SystemParams {
            hopping: 0.2,
            theta: 0.7,
            ..drive_params([40.0, 25.0])
        };
        let mf = steady_state(&p).unwrap();
        assert!(mf.residual(&p) <= mf.residual_tolerance(), "{}", mf.residual(&p));
        assert!(!mf.real_gauge);
        assert!(mf.discarded_phases.is_some());
    }

    #[test]
    fn runaway_gain_is_reported() {
        let p = SystemParams {
            hopping: 0.0,
            gain0: 0.5,
            ..drive_params([1.0, 1.0])
        };
        assert!(matches!(steady_state(&p), Err(Error::GainDominated { .. })));
    }

    #[test]
    fn direct_g_requires_positive_g() {
        let p = SystemParams {
            g: [0.0, 1e-4],
            ..SystemParams::default()
        };
        assert!(matches!(steady_state(&p), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn theta_reduction() {
        let p = SystemParams {
            theta: -PI / 2.0,
            ..SystemParams::default()
        };
        assert_relative_eq!(p.theta_reduced(), 1.5 * PI, epsilon = 1e-15);
    }
}
