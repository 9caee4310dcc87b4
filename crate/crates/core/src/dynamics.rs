//! Linearized fluctuation dynamics and the steady-state covariance matrix.
//!
//! Quadrature ordering is `(x1, p1, x2, p2, x_m, p_m)` with
//! `x = (a + a^dag)/sqrt(2)`, which fixes the vacuum variance at 1/2.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix6, SMatrix, SVector, Schur, Vector6};

use crate::error::{Error, Result};
use crate::measures::{symplectic_spectrum, Mode};
use crate::model::{MeanFields, SystemParams};

/// Points with `|abscissa|` below this are treated as unstable when masking sweeps.
pub const MARGINAL_ABSCISSA: f64 = 1e-9;
/// Relative Frobenius tolerance on the Lyapunov residual.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;
/// Slack below the vacuum symplectic eigenvalue still counted as physical.
pub const PHYSICAL_TOL: f64 = 1e-9;

type Matrix36 = SMatrix<f64, 36, 36>;
type Vector36 = SVector<f64, 36>;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedSystem {
    pub drift: Matrix6<f64>,
    pub diffusion: Matrix6<f64>,
    pub stable: bool,
    pub spectral_abscissa: f64,
}

impl LinearizedSystem {
    pub fn new(drift: Matrix6<f64>, diffusion: Matrix6<f64>) -> Result<Self> {
        let (stable, spectral_abscissa) = stability(&drift)?;
        Ok(Self {
            drift,
            diffusion,
            stable,
            spectral_abscissa,
        })
    }

    /// Stability with the marginal tie-break used for sweep masking.
    pub fn is_robustly_stable(&self) -> bool {
        self.spectral_abscissa < -MARGINAL_ABSCISSA
    }

    /// `|| M V + V M^T + D ||_F`.
    pub fn lyapunov_residual(&self, v: &Matrix6<f64>) -> f64 {
        self.rate(v).norm()
    }

    /// Right-hand side of the covariance equation, `dV/dt`.
    pub fn rate(&self, v: &Matrix6<f64>) -> Matrix6<f64> {
        self.drift * v + v * self.drift.transpose() + self.diffusion
    }

    /// Largest eigenvalue modulus of the drift matrix.
    pub fn spectral_radius(&self) -> Result<f64> {
        let schur = Schur::try_new(self.drift, f64::EPSILON, 10_000).ok_or(Error::EigFailure)?;
        Ok(schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    /// `M (x) I + I (x) M`, the operator acting on column-major `vec(V)`.
    pub fn lyapunov_operator(&self) -> Matrix36 {
        let id = Matrix6::<f64>::identity();
        id.kronecker(&self.drift) + self.drift.kronecker(&id)
    }
}

/// Vacuum normalization of a covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Vacuum variance 1/2 (the dynamics convention).
    HalfVacuum,
    /// Vacuum variance 1 (the coherence-formula convention).
    UnitVacuum,
}

impl Convention {
    pub fn vacuum_variance(self) -> f64 {
        match self {
            Convention::HalfVacuum => 0.5,
            Convention::UnitVacuum => 1.0,
        }
    }
}

/// Gaussian state of the three modes: covariance matrix and first moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub v: Matrix6<f64>,
    pub first_moments: Vector6<f64>,
    pub convention: Convention,
    /// All symplectic eigenvalues at or above the vacuum value (within tolerance).
    pub physical: bool,
    /// Symplectic spectrum in ascending order; empty if it could not be paired.
    pub symplectic: Vec<f64>,
}

impl CovarianceState {
    pub fn new(v: Matrix6<f64>, first_moments: Vector6<f64>, convention: Convention) -> Self {
        let symplectic = symplectic_spectrum(&DMatrix::from_column_slice(6, 6, v.as_slice())).unwrap_or_default();
        let floor = convention.vacuum_variance() * (1.0 - 2.0 * PHYSICAL_TOL);
        let physical = !symplectic.is_empty() && symplectic.iter().all(|&nu| nu >= floor);
        Self {
            v,
            first_moments,
            convention,
            physical,
            symplectic,
        }
    }

    pub fn with_first_moments(mut self, first_moments: Vector6<f64>) -> Self {
        self.first_moments = first_moments;
        self
    }

    /// 2x2 block `V_{ij}` between two modes.
    pub fn block(&self, i: Mode, j: Mode) -> Matrix2<f64> {
        self.v.fixed_view::<2, 2>(2 * i.index(), 2 * j.index()).into_owned()
    }

    /// Reduced 4x4 covariance of the ordered pair `(i, j)`.
    pub fn pair(&self, i: Mode, j: Mode) -> Matrix4<f64> {
        let mut out = Matrix4::zeros();
        out.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.block(i, i));
        out.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.block(i, j));
        out.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.block(j, i));
        out.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.block(j, j));
        out
    }

    /// First moments `(<x>, <p>)` of one mode.
    pub fn moments(&self, mode: Mode) -> (f64, f64) {
        let k = 2 * mode.index();
        (self.first_moments[k], self.first_moments[k + 1])
    }

    /// Smallest eigenvalue of `V` (positive semidefiniteness diagnostic).
    pub fn min_eigenvalue(&self) -> f64 {
        self.v.symmetric_eigenvalues().min()
    }
}

/// Drift matrix of the quadrature fluctuations.
pub fn drift_matrix(mf: &MeanFields, params: &SystemParams) -> Matrix6<f64> {
    let (g, f) = mf.net_rates(params);
    let [d1, d2] = mf.delta_eff;
    let [g1, g2] = mf.drift_coupling();
    let js = params.hopping * params.theta.sin();
    let jc = params.hopping * params.theta.cos();
    let wm = params.omega_m;
    let gm = params.gamma_m;
    #[rustfmt::skip]
    let m = Matrix6::new(
         g,    d1,   js,   jc,   0.0,      0.0,
        -d1,   g,   -jc,   js,  -2.0 * g1, 0.0,
        -js,   jc,  -f,    d2,   0.0,      0.0,
        -jc,  -js,  -d2,  -f,   -2.0 * g2, 0.0,
         0.0,  0.0,  0.0,  0.0, -gm,       wm,
        -2.0 * g1, 0.0, -2.0 * g2, 0.0, -wm, -gm,
    );
    m
}

/// `D = diag[k1, k1, k2, k2, gm(2n+1), gm(2n+1)]`.
pub fn diffusion_matrix(params: &SystemParams) -> Matrix6<f64> {
    let mech = params.gamma_m * (2.0 * params.n_th + 1.0);
    Matrix6::from_diagonal(&Vector6::new(
        params.kappa[0],
        params.kappa[0],
        params.kappa[1],
        params.kappa[1],
        mech,
        mech,
    ))
}

pub fn build_drift(mf: &MeanFields, params: &SystemParams) -> Result<LinearizedSystem> {
    LinearizedSystem::new(drift_matrix(mf, params), diffusion_matrix(params))
}

/// Stability verdict and spectral abscissa (max real part of the eigenvalues).
pub fn stability(drift: &Matrix6<f64>) -> Result<(bool, f64)> {
    if drift.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigFailure);
    }
    let schur = Schur::try_new(*drift, f64::EPSILON, 10_000).ok_or(Error::EigFailure)?;
    let abscissa = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((abscissa < 0.0, abscissa))
}

/// First moments `sqrt(2) (Re a1, Im a1, Re a2, Im a2, Re b, Im b)`.
pub fn first_moments(mf: &MeanFields) -> Vector6<f64> {
    Vector6::new(
        mf.alpha[0].re,
        mf.alpha[0].im,
        mf.alpha[1].re,
        mf.alpha[1].im,
        mf.beta.re,
        mf.beta.im,
    ) * SQRT_2
}

fn vec_of(m: &Matrix6<f64>) -> Vector36 {
    Vector36::from_column_slice(m.as_slice())
}

fn mat_of(v: &Vector36) -> Matrix6<f64> {
    Matrix6::from_column_slice(v.as_slice())
}

/// Steady-state covariance from `M V + V M^T = -D`, solved as the dense
/// 36x36 vectorized system with one step of iterative refinement.
///
/// The returned state carries zero first moments; attach them with
/// [`CovarianceState::with_first_moments`].
pub fn solve_lyapunov(sys: &LinearizedSystem) -> Result<CovarianceState> {
    if !sys.stable {
        return Err(Error::Unstable {
            abscissa: sys.spectral_abscissa,
        });
    }
    let singular = || Error::SingularSolve {
        abscissa: sys.spectral_abscissa,
    };
    let lu = sys.lyapunov_operator().lu();
    let pivots = lu.u().diagonal().map(f64::abs);
    if pivots.min() <= 1e-14 * pivots.max() {
        return Err(singular());
    }
    let rhs = -vec_of(&sys.diffusion);
    let mut x = lu.solve(&rhs).ok_or_else(singular)?;
    let residual = rhs - sys.lyapunov_operator() * x;
    if let Some(dx) = lu.solve(&residual) {
        x += dx;
    }
    let v = mat_of(&x);
    let v = (v + v.transpose()) * 0.5;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(singular());
    }
    Ok(CovarianceState::new(v, Vector6::zeros(), Convention::HalfVacuum))
}

/// Largest step accepted by [`integrate_to_steady_state`].
pub fn max_step(sys: &LinearizedSystem) -> Result<f64> {
    Ok(0.1 / sys.spectral_radius()?)
}

/// Integrates `dV/dt = M V + V M^T + D` with classic RK4 until
/// `||dV/dt||_F <= 1e-12 ||D||_F` (or the roundoff floor of evaluating the
/// rate, if larger) or `t_max` is reached.
pub fn integrate_to_steady_state(
    sys: &LinearizedSystem,
    v0: &Matrix6<f64>,
    t_max: f64,
    dt: f64,
) -> Result<CovarianceState> {
    if !sys.stable {
        return Err(Error::Unstable {
            abscissa: sys.spectral_abscissa,
        });
    }
    let limit = max_step(sys)?;
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::InvalidParams(format!(
            "time step {dt} outside (0, {limit}] (0.1 / spectral radius)"
        )));
    }
    let d_norm = sys.diffusion.norm();
    let m_norm = sys.drift.norm();
    let mut v = *v0;
    let mut t = 0.0;
    loop {
        let k1 = sys.rate(&v);
        let rate = k1.norm();
        let floor = 64.0 * f64::EPSILON * m_norm * v.norm();
        if rate <= (1e-12 * d_norm).max(floor) {
            let v = (v + v.transpose()) * 0.5;
            return Ok(CovarianceState::new(v, Vector6::zeros(), Convention::HalfVacuum));
        }
        if t >= t_max {
            return Err(Error::NotConverged { t_max, rate });
        }
        let k2 = sys.rate(&(v + k1 * (0.5 * dt)));
        let k3 = sys.rate(&(v + k2 * (0.5 * dt)));
        let k4 = sys.rate(&(v + k3 * dt));
        v += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
        t += dt;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{steady_state, Parameterization};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fig3_system(theta: f64, coupling: f64) -> (MeanFields, LinearizedSystem) {
        let mut p = SystemParams {
            theta,
            ..SystemParams::default()
        };
        p.set_coupling([coupling, coupling]);
        let mf = steady_state(&p).unwrap();
        let sys = build_drift(&mf, &p).unwrap();
        (mf, sys)
    }

    #[test]
    fn hopping_entries_at_theta_pi() {
        let (_, sys) = fig3_system(PI, 0.15);
        let m = sys.drift;
        assert!(m[(0, 2)].abs() < 1e-16);
        assert_relative_eq!(m[(0, 3)], -0.2, epsilon = 1e-15);
        assert_relative_eq!(m[(1, 2)], 0.2, epsilon = 1e-15);
        assert!(m[(1, 3)].abs() < 1e-16);
    }

    #[test]
    fn printed_structure() {
        let (_, sys) = fig3_system(0.3, 0.15);
        let m = sys.drift;
        assert_eq!(m[(0, 0)], -0.2);
        assert_eq!(m[(2, 2)], -0.2);
        for (r, c) in [(0, 4), (0, 5), (2, 4), (2, 5), (4, 0), (4, 1), (4, 2), (4, 3)] {
            assert_eq!(m[(r, c)], 0.0, "({r},{c})");
        }
        assert_eq!(m.fixed_view::<2, 2>(4, 4).into_owned(), Matrix2::new(-1e-5, 1.0, -1.0, -1e-5));
        assert_eq!(m[(1, 4)], -0.3);
        assert_eq!(m[(5, 0)], -0.3);
        assert_eq!(m[(5, 2)], -0.3);
        assert_eq!(
            sys.diffusion.diagonal(),
            Vector6::new(0.2, 0.2, 0.2, 0.2, 1e-5 * 201.0, 1e-5 * 201.0)
        );
    }

    #[test]
    fn zero_hopping_decouples_cavities() {
        let mut p = SystemParams {
            hopping: 0.0,
            theta: 1.1,
            ..SystemParams::default()
        };
        p.set_coupling([0.1, 0.1]);
        let m = drift_matrix(&steady_state(&p).unwrap(), &p);
        for (r, c) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0), (3, 1)] {
            assert_eq!(m[(r, c)], 0.0);
        }
    }

    #[test]
    fn minus_identity_is_stable() {
        assert_eq!(stability(&(-Matrix6::identity())).unwrap(), (true, -1.0));
    }

    #[test]
    fn stability_at_figure_points() {
        assert!(fig3_system(PI, 0.15).1.stable);
        assert!(!fig3_system(PI, 0.35).1.stable);
    }

    #[test]
    fn non_finite_drift_is_eig_failure() {
        let mut m = -Matrix6::identity();
        m[(0, 1)] = f64::NAN;
        assert_eq!(stability(&m), Err(Error::EigFailure));
    }

    #[test]
    fn diagonal_lyapunov() {
        let d = Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let sys = LinearizedSystem::new(-Matrix6::identity(), Matrix6::from_diagonal(&d)).unwrap();
        let st = solve_lyapunov(&sys).unwrap();
        assert_relative_eq!(st.v, Matrix6::from_diagonal(&(d / 2.0)), epsilon = 1e-14);
    }

    #[test]
    fn unstable_system_is_rejected() {
        let (_, sys) = fig3_system(PI, 0.35);
        assert!(matches!(solve_lyapunov(&sys), Err(Error::Unstable { .. })));
    }

    #[test]
    fn lyapunov_residual_at_fig3_point() {
        let (_, sys) = fig3_system(PI, 0.15);
        let st = solve_lyapunov(&sys).unwrap();
        assert!(sys.lyapunov_residual(&st.v) <= LYAPUNOV_RESIDUAL_TOL * sys.diffusion.norm());
        assert_eq!(st.v, st.v.transpose());
        assert!(st.min_eigenvalue() >= -1e-10);
        assert!(st.physical);
    }

    #[test]
    fn relaxation_closed_form() {
        let d = Vector6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let sys = LinearizedSystem::new(-Matrix6::identity(), Matrix6::from_diagonal(&d)).unwrap();
        let st = integrate_to_steady_state(&sys, &Matrix6::zeros(), 100.0, 0.1).unwrap();
        assert_relative_eq!(st.v, Matrix6::from_diagonal(&(d / 2.0)), max_relative = 1e-11);
    }

    #[test]
    fn solver_output_is_integrator_fixed_point() {
        let (_, sys) = fig3_system(PI, 0.15);
        let solved = solve_lyapunov(&sys).unwrap();
        let dt = max_step(&sys).unwrap();
        let st = integrate_to_steady_state(&sys, &solved.v, 1.0, dt).unwrap();
        assert!((st.v - solved.v).norm() <= 1e-12 * solved.v.norm());
    }

    #[test]
    fn integrator_matches_solver_at_fig3_point() {
        let (_, sys) = fig3_system(PI, 0.15);
        let solved = solve_lyapunov(&sys).unwrap();
        let dt = max_step(&sys).unwrap();
        let st = integrate_to_steady_state(&sys, &Matrix6::zeros(), 1e6, dt).unwrap();
        assert!((st.v - solved.v).norm() <= 1e-6 * solved.v.norm());
    }

    #[test]
    fn integrator_step_limit_enforced() {
        let (_, sys) = fig3_system(PI, 0.15);
        let too_big = 2.0 * max_step(&sys).unwrap();
        assert!(matches!(
            integrate_to_steady_state(&sys, &Matrix6::zeros(), 10.0, too_big),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn integrator_reports_timeout() {
        let (_, sys) = fig3_system(PI, 0.15);
        let dt = max_step(&sys).unwrap();
        assert!(matches!(
            integrate_to_steady_state(&sys, &Matrix6::zeros(), 1.0, dt),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn free_system_is_thermal_product() {
        let p = SystemParams {
            hopping: 0.0,
            n_th: 37.0,
            mode: Parameterization::DirectG { coupling: [0.0, 0.0] },
            ..SystemParams::default()
        };
        let sys = build_drift(&steady_state(&p).unwrap(), &p).unwrap();
        let st = solve_lyapunov(&sys).unwrap();
        let expected = Matrix6::from_diagonal(&Vector6::new(0.5, 0.5, 0.5, 0.5, 37.5, 37.5));
        assert!((st.v - expected).abs().max() <= 1e-10);
    }

    #[test]
    fn first_moments_scaling() {
        let (mf, _) = fig3_system(PI, 0.15);
        let d = first_moments(&mf);
        assert_relative_eq!(d[0], SQRT_2 * 1500.0, max_relative = 1e-14);
        assert_eq!(d[1], 0.0);
    }
}
