//! Embedded oracle suite: numerical checks against independent routes and
//! analytically known states.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix6, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    build_drift, first_moments, integrate_to_steady_state, max_step, solve_lyapunov, Convention, CovarianceState,
    LinearizedSystem, LYAPUNOV_RESIDUAL_TOL,
};
use crate::measures::{neg_1v1, pt_nu_closed_form, pt_nu_eigen, residual_contangle_min, CoherenceSet, Mode, PAIRS};
use crate::model::{steady_state, MeanFields, SystemParams};

pub const DEFAULT_SEED: u64 = 0x0c0f_fee5;
/// Random points for the residual and formula checks.
pub const RANDOM_POINTS: usize = 100;
/// Random points for the time-integration cross-check.
pub const ODE_POINTS: usize = 50;

pub const ODE_TOL: f64 = 1e-6;
pub const SQUEEZED_TOL: f64 = 1e-9;
pub const FORMULA_TOL: f64 = 1e-9;
pub const THERMAL_TOL: f64 = 1e-12;
pub const FREE_TOL: f64 = 1e-10;
pub const ROTATION_TOL: f64 = 1e-9;

/// Points used for the time-integration check must decay at least this fast,
/// otherwise the integration horizon grows without bound.
const ODE_MIN_DECAY: f64 = 5e-3;
const ODE_T_MAX: f64 = 1e6;

/// Deliberate corruption used to confirm that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// Adds `delta` to drift entry `(row, col)` before the Lyapunov solve only.
    DriftEntry { row: usize, col: usize, delta: f64 },
}

impl Fault {
    pub const DEFAULT: Fault = Fault::DriftEntry {
        row: 1,
        col: 4,
        delta: 1e-3,
    };

    fn corrupt(&self, sys: &LinearizedSystem) -> LinearizedSystem {
        match *self {
            Fault::DriftEntry { row, col, delta } => {
                let mut drift = sys.drift;
                drift[(row, col)] += delta;
                LinearizedSystem { drift, ..sys.clone() }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    pub random_points: usize,
    pub ode_points: usize,
    pub fault: Option<Fault>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            random_points: RANDOM_POINTS,
            ode_points: ODE_POINTS,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured deviation.
    pub worst: f64,
    pub tolerance: f64,
    pub cases: usize,
    pub detail: String,
}

impl CheckResult {
    fn new(id: &'static str, name: &'static str, worst: f64, tolerance: f64, cases: usize) -> Self {
        Self {
            id,
            name,
            passed: worst.is_finite() && worst <= tolerance && cases > 0,
            worst,
            tolerance,
            cases,
            detail: String::new(),
        }
    }

    fn failed(id: &'static str, name: &'static str, tolerance: f64, detail: String) -> Self {
        Self {
            id,
            name,
            passed: false,
            worst: f64::NAN,
            tolerance,
            cases: 0,
            detail,
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {} {}: worst {:.3e} (tol {:.0e}, {} cases)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.worst,
            self.tolerance,
            self.cases
        )?;
        if !self.detail.is_empty() {
            write!(f, " {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// A random stable point in the (J, G) plane of the stability map, with a
/// log-uniform bath occupation.
#[derive(Debug, Clone)]
pub struct SamplePoint {
    pub params: SystemParams,
    pub mean_fields: MeanFields,
    pub system: LinearizedSystem,
}

pub fn random_params(rng: &mut impl Rng) -> SystemParams {
    let mut p = SystemParams {
        hopping: rng.random_range(0.0..0.5),
        theta: PI,
        n_th: 10f64.powf(rng.random_range(2.0..5.0)),
        ..SystemParams::default()
    };
    let g = rng.random_range(0.0..0.5);
    p.set_coupling([g, g]);
    p
}

/// Draws `count` robustly stable points whose decay rate exceeds `min_decay`.
pub fn sample_stable(rng: &mut impl Rng, count: usize, min_decay: f64) -> Vec<SamplePoint> {
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count.max(1) {
        attempts += 1;
        let params = random_params(rng);
        let Ok(mean_fields) = steady_state(&params) else { continue };
        let Ok(system) = build_drift(&mean_fields, &params) else { continue };
        if system.is_robustly_stable() && system.spectral_abscissa < -min_decay {
            out.push(SamplePoint {
                params,
                mean_fields,
                system,
            });
        }
    }
    out
}

fn solve(point: &SamplePoint, fault: Option<Fault>) -> crate::Result<CovarianceState> {
    match fault {
        Some(f) => solve_lyapunov(&f.corrupt(&point.system)),
        None => solve_lyapunov(&point.system),
    }
}

fn check_residual(points: &[SamplePoint], fault: Option<Fault>) -> CheckResult {
    const ID: &str = "8a";
    const NAME: &str = "Lyapunov residual / ||D||_F";
    let mut worst: f64 = 0.0;
    for p in points {
        match solve(p, fault) {
            Ok(st) => worst = worst.max(p.system.lyapunov_residual(&st.v) / p.system.diffusion.norm()),
            Err(e) => return CheckResult::failed(ID, NAME, LYAPUNOV_RESIDUAL_TOL, e.to_string()),
        }
    }
    CheckResult::new(ID, NAME, worst, LYAPUNOV_RESIDUAL_TOL, points.len())
}

fn check_ode(points: &[SamplePoint], fault: Option<Fault>) -> CheckResult {
    const ID: &str = "8b";
    const NAME: &str = "solver vs time integration (relative Frobenius)";
    let mut worst: f64 = 0.0;
    for p in points {
        let solved = match solve(p, fault) {
            Ok(s) => s,
            Err(e) => return CheckResult::failed(ID, NAME, ODE_TOL, e.to_string()),
        };
        let integrated = max_step(&p.system)
            .and_then(|dt| integrate_to_steady_state(&p.system, &Matrix6::zeros(), ODE_T_MAX, dt));
        match integrated {
            Ok(st) => worst = worst.max((solved.v - st.v).norm() / solved.v.norm()),
            Err(e) => return CheckResult::failed(ID, NAME, ODE_TOL, e.to_string()),
        }
    }
    CheckResult::new(ID, NAME, worst, ODE_TOL, points.len())
}

/// Two-mode squeezed vacuum on (a1, a2) with b in vacuum (HalfVacuum).
pub fn two_mode_squeezed(r: f64) -> CovarianceState {
    let c = (2.0 * r).cosh() / 2.0;
    let s = (2.0 * r).sinh() / 2.0;
    let mut v = Matrix6::identity() * 0.5;
    v[(0, 0)] = c;
    v[(1, 1)] = c;
    v[(2, 2)] = c;
    v[(3, 3)] = c;
    v[(0, 2)] = s;
    v[(2, 0)] = s;
    v[(1, 3)] = -s;
    v[(3, 1)] = -s;
    CovarianceState::new(v, Vector6::zeros(), Convention::HalfVacuum)
}

fn check_squeezed() -> CheckResult {
    const ID: &str = "8c";
    const NAME: &str = "two-mode squeezed E_N = 2r";
    let mut worst: f64 = 0.0;
    for r in [0.2, 1.0, 2.0] {
        match neg_1v1(&two_mode_squeezed(r), Mode::A1, Mode::A2) {
            Ok(en) => worst = worst.max((en - 2.0 * r).abs()),
            Err(e) => return CheckResult::failed(ID, NAME, SQUEEZED_TOL, e.to_string()),
        }
    }
    CheckResult::new(ID, NAME, worst, SQUEEZED_TOL, 3)
}

fn check_formulas(points: &[SamplePoint], fault: Option<Fault>) -> CheckResult {
    const ID: &str = "8d";
    const NAME: &str = "closed-form vs eigen partial-transpose eigenvalue";
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for p in points {
        let st = match solve(p, fault) {
            Ok(s) => s,
            Err(e) => return CheckResult::failed(ID, NAME, FORMULA_TOL, e.to_string()),
        };
        for (i, j) in PAIRS {
            let v4 = st.pair(i, j);
            match (pt_nu_closed_form(&v4), pt_nu_eigen(&v4)) {
                (Ok(a), Ok(b)) => worst = worst.max((a - b).abs()),
                (Err(e), _) | (_, Err(e)) => return CheckResult::failed(ID, NAME, FORMULA_TOL, e.to_string()),
            }
            cases += 1;
        }
    }
    CheckResult::new(ID, NAME, worst, FORMULA_TOL, cases)
}

fn check_thermal(rng: &mut impl Rng) -> CheckResult {
    const ID: &str = "8e";
    const NAME: &str = "thermal products have zero R_min and coherence";
    let mut worst: f64 = 0.0;
    let cases = 20;
    for k in 0..cases {
        // One case per batch pins the all-vacuum corner.
        let n: [f64; 3] = if k == 0 {
            [0.0; 3]
        } else {
            std::array::from_fn(|_| 10f64.powf(rng.random_range(-3.0..5.0)))
        };
        let diag = Vector6::from_fn(|i, _| n[i / 2] + 0.5);
        let st = CovarianceState::new(Matrix6::from_diagonal(&diag), Vector6::zeros(), Convention::HalfVacuum);
        let r = match residual_contangle_min(&st) {
            Ok(r) => r.r_min.abs(),
            Err(e) => return CheckResult::failed(ID, NAME, THERMAL_TOL, e.to_string()),
        };
        let c = match CoherenceSet::compute(&st) {
            Ok(c) => c.one.iter().chain(&c.two).fold(c.total.abs(), |m, x| m.max(x.abs())),
            Err(e) => return CheckResult::failed(ID, NAME, THERMAL_TOL, e.to_string()),
        };
        worst = worst.max(r).max(c);
    }
    CheckResult::new(ID, NAME, worst, THERMAL_TOL, cases)
}

fn check_free() -> CheckResult {
    const ID: &str = "8f";
    const NAME: &str = "free damped system matches thermal diagonal";
    let mut worst: f64 = 0.0;
    let n_values = [0.0, 1.0, 100.0, 4000.0, 1e5];
    for n_th in n_values {
        let mut p = SystemParams {
            hopping: 0.0,
            n_th,
            ..SystemParams::default()
        };
        p.set_coupling([0.0, 0.0]);
        let st = steady_state(&p)
            .and_then(|mf| build_drift(&mf, &p))
            .and_then(|sys| solve_lyapunov(&sys));
        match st {
            Ok(st) => {
                let m = n_th + 0.5;
                let expect = Matrix6::from_diagonal(&Vector6::new(0.5, 0.5, 0.5, 0.5, m, m));
                worst = worst.max((st.v - expect).abs().max());
            }
            Err(e) => return CheckResult::failed(ID, NAME, FREE_TOL, e.to_string()),
        }
    }
    CheckResult::new(ID, NAME, worst, FREE_TOL, n_values.len())
}

/// Applies independent phase-space rotations to each mode.
pub fn rotate_locally(state: &CovarianceState, angles: [f64; 3]) -> CovarianceState {
    let mut r = Matrix6::zeros();
    for (k, phi) in angles.into_iter().enumerate() {
        let (s, c) = phi.sin_cos();
        r.fixed_view_mut::<2, 2>(2 * k, 2 * k)
            .copy_from(&Matrix2::new(c, -s, s, c));
    }
    CovarianceState::new(r * state.v * r.transpose(), r * state.first_moments, state.convention)
}

fn check_rotation(points: &[SamplePoint], rng: &mut impl Rng, fault: Option<Fault>) -> CheckResult {
    const ID: &str = "8g";
    const NAME: &str = "coherence invariant under local rotations";
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut skipped = 0;
    for p in points {
        let st = match solve(p, fault) {
            Ok(s) => s.with_first_moments(first_moments(&p.mean_fields)),
            Err(e) => return CheckResult::failed(ID, NAME, ROTATION_TOL, e.to_string()),
        };
        let angles = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let (Ok(before), Ok(after)) = (CoherenceSet::compute(&st), CoherenceSet::compute(&rotate_locally(&st, angles)))
        else {
            skipped += 1;
            continue;
        };
        let diffs = before
            .one
            .iter()
            .chain(&before.two)
            .chain(std::iter::once(&before.total))
            .zip(after.one.iter().chain(&after.two).chain(std::iter::once(&after.total)))
            .map(|(a, b)| (a - b).abs());
        worst = diffs.fold(worst, f64::max);
        cases += 1;
    }
    let res = CheckResult::new(ID, NAME, worst, ROTATION_TOL, cases);
    if skipped > 0 {
        res.with_detail(format!("({skipped} points outside the coherence domain skipped)"))
    } else {
        res
    }
}

/// Runs every oracle check. Deterministic for a given seed.
pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random = sample_stable(&mut rng, opts.random_points, 0.0);
    let ode = sample_stable(&mut rng, opts.ode_points, ODE_MIN_DECAY);
    let mut checks = vec![
        check_residual(&random, opts.fault),
        check_ode(&ode, opts.fault),
        check_squeezed(),
        check_formulas(&random, opts.fault),
        check_thermal(&mut rng),
        check_free(),
        check_rotation(&random, &mut rng, opts.fault),
    ];
    for (c, want) in checks.iter_mut().zip([opts.random_points, opts.ode_points]) {
        if c.cases < want && c.passed {
            c.passed = false;
            c.detail = format!("only {} of {} stable points sampled", c.cases, want);
        }
    }
    ValidationReport { checks }
}
