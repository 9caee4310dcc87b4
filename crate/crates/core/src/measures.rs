//! Entanglement and coherence quantifiers of three-mode Gaussian states.
//!
//! Negativities use the HalfVacuum normalization (`E_N = max[0, -ln 2 nu]`);
//! coherences use the UnitVacuum normalization, where a thermal mode has
//! symplectic eigenvalue `2n + 1`. Both accept states in either convention
//! and convert internally.

use std::fmt;

use nalgebra::{DMatrix, Matrix4, Matrix6, Schur};

use crate::dynamics::{Convention, CovarianceState};
use crate::error::{Error, Result};

/// Relative tolerance used to pair `+i nu` / `-i nu` eigenvalues.
pub const PAIRING_TOL: f64 = 1e-9;
/// Disagreement between the two routes to the 1|1 symplectic eigenvalue
/// that is treated as an error.
pub const FORMULA_MISMATCH_TOL: f64 = 1e-7;
/// Symplectic eigenvalues (UnitVacuum) in `[1 - ETA_CLAMP, 1)` are clamped to 1.
pub const ETA_CLAMP: f64 = 1e-9;
/// Coherences above `-COHERENCE_FLOOR` are reported as non-negative.
pub const COHERENCE_FLOOR: f64 = 1e-12;

/// One of the three bosonic modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    A1,
    A2,
    B,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::A1, Mode::A2, Mode::B];

    pub fn index(self) -> usize {
        match self {
            Mode::A1 => 0,
            Mode::A2 => 1,
            Mode::B => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::A1 => "a1",
            Mode::A2 => "a2",
            Mode::B => "b",
        }
    }

    /// The other two modes, in canonical order.
    pub fn others(self) -> (Mode, Mode) {
        match self {
            Mode::A1 => (Mode::A2, Mode::B),
            Mode::A2 => (Mode::A1, Mode::B),
            Mode::B => (Mode::A1, Mode::A2),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Mode pairs in reporting order: a1a2, a1b, a2b.
pub const PAIRS: [(Mode, Mode); 3] = [(Mode::A1, Mode::A2), (Mode::A1, Mode::B), (Mode::A2, Mode::B)];

/// Von Neumann entropy of a single-mode thermal state with symplectic
/// eigenvalue `x` (UnitVacuum):
/// `F(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2)`.
pub fn entropy_f(x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 - ETA_CLAMP {
        return Err(Error::DomainError { x });
    }
    if x <= 1.0 + 1e-12 {
        return Ok(0.0);
    }
    // a ln a - b ln b with b = a - 1, rearranged to avoid cancellation at large x.
    let a = 0.5 * (x + 1.0);
    let b = 0.5 * (x - 1.0);
    Ok(a.ln() + b * (1.0 / b).ln_1p())
}

/// Block-diagonal symplectic form with `[[0, 1], [-1, 0]]` blocks.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues of a `2N x 2N` covariance matrix, ascending.
///
/// The eigenvalues of `Omega V` must come in `+-i nu` pairs; anything else is
/// a [`Error::PairingError`].
pub fn symplectic_spectrum(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = v.nrows();
    assert!(n.is_multiple_of(2) && v.ncols() == n, "covariance must be 2N x 2N");
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::PairingError { mismatch: f64::NAN });
    }
    let a = symplectic_form(n / 2) * v;
    let schur = Schur::try_new(a, f64::EPSILON, 10_000).ok_or(Error::EigFailure)?;
    let eig = schur.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = PAIRING_TOL * scale;

    let max_re = eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if max_re > tol {
        return Err(Error::PairingError { mismatch: max_re });
    }
    let mut upper: Vec<f64> = Vec::with_capacity(n / 2);
    let mut lower: Vec<f64> = Vec::with_capacity(n / 2);
    let mut zero = 0usize;
    for z in eig.iter() {
        if z.im.abs() <= tol {
            zero += 1;
        } else if z.im > 0.0 {
            upper.push(z.im);
        } else {
            lower.push(-z.im);
        }
    }
    // Near-zero eigenvalues go to whichever side is short.
    while zero > 0 {
        if upper.len() <= lower.len() {
            upper.push(0.0);
        } else {
            lower.push(0.0);
        }
        zero -= 1;
    }
    if upper.len() != lower.len() {
        return Err(Error::PairingError {
            mismatch: (upper.len() as f64 - lower.len() as f64).abs(),
        });
    }
    upper.sort_by(f64::total_cmp);
    lower.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n / 2);
    for (u, l) in upper.iter().zip(&lower) {
        let mismatch = (u - l).abs();
        if mismatch > tol {
            return Err(Error::PairingError { mismatch });
        }
        out.push(0.5 * (u + l));
    }
    Ok(out)
}

fn to_dynamic<const N: usize>(m: &nalgebra::SMatrix<f64, N, N>) -> DMatrix<f64> {
    DMatrix::from_column_slice(N, N, m.as_slice())
}

/// `P V P` with `P` flipping the momentum quadrature of `flipped`.
pub fn partial_transpose(v: &Matrix6<f64>, flipped: Mode) -> Matrix6<f64> {
    let k = 2 * flipped.index() + 1;
    let mut out = *v;
    for j in 0..6 {
        if j != k {
            out[(k, j)] = -out[(k, j)];
            out[(j, k)] = -out[(j, k)];
        }
    }
    out
}

fn det2(m: &nalgebra::Matrix2<f64>) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Smaller root `nu_-` of `nu^4 - S nu^2 + det = 0`, computed as
/// `nu_-^2 = 2 det / (S + sqrt(S^2 - 4 det))` to avoid cancellation.
fn smaller_symplectic_root(s: f64, det: f64) -> Result<f64> {
    let disc = s * s - 4.0 * det;
    if disc < -PAIRING_TOL * s * s {
        return Err(Error::NegativeDiscriminant { value: disc });
    }
    let root = disc.max(0.0).sqrt();
    let denom = s + root;
    if denom <= 0.0 || det < 0.0 {
        return Err(Error::NegativeDiscriminant { value: disc });
    }
    Ok((2.0 * det / denom).sqrt())
}

/// Larger root `nu_+` of the same quartic.
fn larger_symplectic_root(s: f64, det: f64) -> Result<f64> {
    let disc = s * s - 4.0 * det;
    if disc < -PAIRING_TOL * s * s {
        return Err(Error::NegativeDiscriminant { value: disc });
    }
    Ok((0.5 * (s + disc.max(0.0).sqrt())).sqrt())
}

/// Minimal partially transposed symplectic eigenvalue of a two-mode
/// covariance matrix, closed form with
/// `S = det A + det B - 2 det C`.
pub fn pt_nu_closed_form(v4: &Matrix4<f64>) -> Result<f64> {
    let a = v4.fixed_view::<2, 2>(0, 0).into_owned();
    let b = v4.fixed_view::<2, 2>(2, 2).into_owned();
    let c = v4.fixed_view::<2, 2>(0, 2).into_owned();
    let s = det2(&a) + det2(&b) - 2.0 * det2(&c);
    smaller_symplectic_root(s, v4.determinant())
}

/// Same quantity via the symplectic spectrum of the partial transpose.
pub fn pt_nu_eigen(v4: &Matrix4<f64>) -> Result<f64> {
    let mut pt = *v4;
    for j in 0..4 {
        if j != 3 {
            pt[(3, j)] = -pt[(3, j)];
            pt[(j, 3)] = -pt[(j, 3)];
        }
    }
    let spec = symplectic_spectrum(&to_dynamic(&pt))?;
    Ok(spec[0])
}

fn half_vacuum_scale(convention: Convention) -> f64 {
    0.5 / convention.vacuum_variance()
}

fn log_negativity(nu_half: f64) -> f64 {
    (-(2.0 * nu_half).ln()).max(0.0)
}

/// Logarithmic negativity between modes `i` and `j` of the reduced state.
///
/// Both the closed form and the eigen method are evaluated; a disagreement
/// above [`FORMULA_MISMATCH_TOL`] is an error.
pub fn neg_1v1(state: &CovarianceState, i: Mode, j: Mode) -> Result<f64> {
    assert_ne!(i, j, "negativity needs two distinct modes");
    let v4 = state.pair(i, j);
    let closed = pt_nu_closed_form(&v4)?;
    let eigen = pt_nu_eigen(&v4)?;
    if (closed - eigen).abs() > FORMULA_MISMATCH_TOL * closed.max(1.0) {
        return Err(Error::FormulaMismatch {
            closed_form: closed,
            eigen,
        });
    }
    Ok(log_negativity(closed * half_vacuum_scale(state.convention)))
}

/// Logarithmic negativity of the one-vs-two split `single | rest`.
pub fn neg_1v2(state: &CovarianceState, single: Mode) -> Result<f64> {
    let pt = partial_transpose(&state.v, single);
    let spec = symplectic_spectrum(&to_dynamic(&pt))?;
    Ok(log_negativity(spec[0] * half_vacuum_scale(state.convention)))
}

/// Negativities of all six bipartitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negativities {
    /// a1|a2, a1|b, a2|b.
    pub pairs: [f64; 3],
    /// a1|a2b, a2|a1b, b|a1a2.
    pub one_vs_two: [f64; 3],
}

impl Negativities {
    pub fn compute(state: &CovarianceState) -> Result<Self> {
        let mut pairs = [0.0; 3];
        for (slot, (i, j)) in pairs.iter_mut().zip(PAIRS) {
            *slot = neg_1v1(state, i, j)?;
        }
        let mut one_vs_two = [0.0; 3];
        for (slot, m) in one_vs_two.iter_mut().zip(Mode::ALL) {
            *slot = neg_1v2(state, m)?;
        }
        Ok(Self { pairs, one_vs_two })
    }

    pub fn pair(&self, i: Mode, j: Mode) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        let k = PAIRS.iter().position(|&p| p == key).expect("distinct modes");
        self.pairs[k]
    }

    /// Contangles `E_tau = E_N^2`, same layout.
    pub fn contangles(&self) -> Self {
        Self {
            pairs: self.pairs.map(|x| x * x),
            one_vs_two: self.one_vs_two.map(|x| x * x),
        }
    }

    pub const LABELS: [&'static str; 6] = ["a1|a2", "a1|b", "a2|b", "a1|a2b", "a2|a1b", "b|a1a2"];

    pub fn as_array(&self) -> [f64; 6] {
        let [p0, p1, p2] = self.pairs;
        let [q0, q1, q2] = self.one_vs_two;
        [p0, p1, p2, q0, q1, q2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualContangle {
    /// Minimum over focus modes, possibly negative.
    pub r_min: f64,
    /// `E_tau(r|st) - E_tau(r|s) - E_tau(r|t)` for r = a1, a2, b.
    pub raw: [f64; 3],
    pub argmin: Mode,
}

impl ResidualContangle {
    pub fn from_negativities(neg: &Negativities) -> Self {
        let tau = neg.contangles();
        let raw = Mode::ALL.map(|r| {
            let (s, t) = r.others();
            tau.one_vs_two[r.index()] - tau.pair(r, s) - tau.pair(r, t)
        });
        let (k, r_min) = raw
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("three entries");
        Self {
            r_min,
            raw,
            argmin: Mode::ALL[k],
        }
    }

    /// `max(R_min, 0)`, the value plotted.
    pub fn clamped(&self) -> f64 {
        self.r_min.max(0.0)
    }
}

pub fn residual_contangle_min(state: &CovarianceState) -> Result<ResidualContangle> {
    Ok(ResidualContangle::from_negativities(&Negativities::compute(state)?))
}

/// `V' = 2V`, `d' = sqrt(2) d`. UnitVacuum input is returned unchanged.
pub fn to_unit_vacuum(state: &CovarianceState) -> CovarianceState {
    match state.convention {
        Convention::UnitVacuum => state.clone(),
        Convention::HalfVacuum => CovarianceState {
            v: state.v * 2.0,
            first_moments: state.first_moments * std::f64::consts::SQRT_2,
            convention: Convention::UnitVacuum,
            physical: state.physical,
            symplectic: state.symplectic.iter().map(|x| 2.0 * x).collect(),
        },
    }
}

/// A coherence value together with the number of symplectic eigenvalues
/// that were clamped to the vacuum value while computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub nats: f64,
    pub clamps: u32,
}

/// Mean excitation number `n_i = [Tr V_i + d_x^2 + d_p^2 - 2] / 4` (UnitVacuum).
pub fn mean_number(unit: &CovarianceState, mode: Mode) -> f64 {
    debug_assert_eq!(unit.convention, Convention::UnitVacuum);
    let (dx, dp) = unit.moments(mode);
    (unit.block(mode, mode).trace() + dx * dx + dp * dp - 2.0) / 4.0
}

fn eta_entropy(eta: f64, clamps: &mut u32) -> Result<f64> {
    if eta >= 1.0 {
        entropy_f(eta)
    } else if eta >= 1.0 - ETA_CLAMP {
        *clamps += 1;
        Ok(0.0)
    } else {
        Err(Error::DomainError { x: eta })
    }
}

fn finish(value: f64, clamps: u32) -> Coherence {
    let nats = if value >= -COHERENCE_FLOOR { value.max(0.0) } else { value };
    Coherence { nats, clamps }
}

fn reference_entropy(unit: &CovarianceState, modes: &[Mode]) -> Result<f64> {
    modes
        .iter()
        .map(|&m| entropy_f(2.0 * mean_number(unit, m) + 1.0))
        .sum()
}

/// Single-mode relative-entropy coherence `F(2n_i + 1) - F(eta_i)`,
/// `eta_i = sqrt(det V_i)`.
pub fn coherence_one(state: &CovarianceState, mode: Mode) -> Result<Coherence> {
    let unit = to_unit_vacuum(state);
    let mut clamps = 0;
    let eta = det2(&unit.block(mode, mode)).max(0.0).sqrt();
    let value = reference_entropy(&unit, &[mode])? - eta_entropy(eta, &mut clamps)?;
    Ok(finish(value, clamps))
}

/// Two-mode coherence with `eta_pm` from
/// `Gamma = det V_i + det V_j + 2 det V_ij`.
pub fn coherence_two(state: &CovarianceState, i: Mode, j: Mode) -> Result<Coherence> {
    assert_ne!(i, j, "coherence_two needs two distinct modes");
    let unit = to_unit_vacuum(state);
    let v4 = unit.pair(i, j);
    let gamma = det2(&unit.block(i, i)) + det2(&unit.block(j, j)) + 2.0 * det2(&unit.block(i, j));
    let det = v4.determinant();
    let eta_minus = smaller_symplectic_root(gamma, det)?;
    let eta_plus = larger_symplectic_root(gamma, det)?;
    let mut clamps = 0;
    let value = reference_entropy(&unit, &[i, j])?
        - eta_entropy(eta_plus, &mut clamps)?
        - eta_entropy(eta_minus, &mut clamps)?;
    Ok(finish(value, clamps))
}

/// Three-mode coherence over the full symplectic spectrum.
pub fn coherence_total(state: &CovarianceState) -> Result<Coherence> {
    let unit = to_unit_vacuum(state);
    let spectrum = symplectic_spectrum(&to_dynamic(&unit.v))?;
    let mut clamps = 0;
    let mut value = reference_entropy(&unit, &Mode::ALL)?;
    for eta in spectrum {
        value -= eta_entropy(eta, &mut clamps)?;
    }
    Ok(finish(value, clamps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceSet {
    /// a1, a2, b.
    pub one: [f64; 3],
    /// a1a2, a1b, a2b.
    pub two: [f64; 3],
    pub total: f64,
    pub clamps: u32,
}

impl CoherenceSet {
    pub fn compute(state: &CovarianceState) -> Result<Self> {
        let mut clamps = 0;
        let mut one = [0.0; 3];
        for (slot, m) in one.iter_mut().zip(Mode::ALL) {
            let c = coherence_one(state, m)?;
            clamps += c.clamps;
            *slot = c.nats;
        }
        let mut two = [0.0; 3];
        for (slot, (i, j)) in two.iter_mut().zip(PAIRS) {
            let c = coherence_two(state, i, j)?;
            clamps += c.clamps;
            *slot = c.nats;
        }
        let total = coherence_total(state)?;
        clamps += total.clamps;
        Ok(Self {
            one,
            two,
            total: total.nats,
            clamps,
        })
    }
}

/// Every quantifier for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSet {
    pub negativity: Negativities,
    pub contangle: Negativities,
    pub residual: ResidualContangle,
    /// Fails with [`Error::DomainError`] on covariances below the vacuum bound.
    pub coherence: std::result::Result<CoherenceSet, Error>,
    pub physical: bool,
    pub clamps_applied: u32,
}

impl MeasureSet {
    pub fn evaluate(state: &CovarianceState) -> Result<Self> {
        let negativity = Negativities::compute(state)?;
        let residual = ResidualContangle::from_negativities(&negativity);
        let coherence = CoherenceSet::compute(state);
        let clamps_applied = coherence.as_ref().map_or(0, |c| c.clamps);
        Ok(Self {
            contangle: negativity.contangles(),
            negativity,
            residual,
            coherence,
            physical: state.physical,
            clamps_applied,
        })
    }
}
