//! Time evolution: biorthogonal mode sums, direct no-jump integration,
//! the full master equation with jumps, the two-mode long-time form and the
//! single-qubit closed-form Bloch solution.
//!
//! Every route starts from `ρ(0)` at `t = 0` and reports unit-trace states at
//! the requested output times.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    build_h_eff, build_liouvillian, leakage_operator, vectorize, DensityMatrix, SystemSpec, MAX_JUMP_QUBITS,
};
use crate::numkernel::{check_grid, inner, norm, ComplexMatrix, Dopri5, OdeTolerances, C64, I, ZERO};
use crate::spectral::{ModeSpectrum, ModeWeights, OverlapMatrix};

/// Smallest pre-normalization trace accepted before a trajectory is declared extinct.
pub const EXTINCTION_TRACE: f64 = 1e-300;
/// Default number of output points.
pub const DEFAULT_POINTS: usize = 2001;
/// Longest default horizon in µs.
pub const MAX_DEFAULT_HORIZON: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Modes,
    NoJumpOde,
    FullLindblad,
    TwoMode,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Modes => "modes",
            Route::NoJumpOde => "ode",
            Route::FullLindblad => "lindblad",
            Route::TwoMode => "twomode",
        }
    }
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modes" => Ok(Route::Modes),
            "ode" => Ok(Route::NoJumpOde),
            "lindblad" => Ok(Route::FullLindblad),
            "twomode" => Ok(Route::TwoMode),
            other => Err(Error::InvalidSpec(format!("unknown route '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryStatus {
    Complete,
    /// The unnormalized trace fell below [`EXTINCTION_TRACE`] at `t`; later
    /// output times are dropped.
    Extinct { t: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t_grid: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Per-time scalar series keyed by name.
    pub record: BTreeMap<String, Vec<f64>>,
    pub mode_weights: Option<Vec<ModeWeights>>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    fn new(capacity: usize) -> Self {
        Self {
            t_grid: Vec::with_capacity(capacity),
            states: Vec::with_capacity(capacity),
            record: BTreeMap::new(),
            mode_weights: None,
            status: TrajectoryStatus::Complete,
        }
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn last_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    fn push(&mut self, t: f64, state: DensityMatrix) {
        self.t_grid.push(t);
        self.states.push(state);
    }

    fn push_record(&mut self, key: &str, value: f64) {
        self.record.entry(key.to_string()).or_default().push(value);
    }
}

fn check_trajectory_grid(t_grid: &[f64]) -> Result<()> {
    check_grid(t_grid)?;
    if t_grid[0] < 0.0 {
        return Err(Error::InvalidGrid("output times must be non-negative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("output times must be strictly increasing".into()));
    }
    Ok(())
}

/// `points` uniform samples on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidGrid(format!("{points} points up to t = {t_max}")));
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    if t_max == 0.0 {
        return Err(Error::InvalidGrid("zero-length horizon with several points".into()));
    }
    Ok((0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect())
}

/// Ten slowest-mode lifetimes, capped at [`MAX_DEFAULT_HORIZON`].
pub fn default_horizon(ms: &ModeSpectrum) -> f64 {
    let slowest = ms
        .decay_constants
        .iter()
        .copied()
        .filter(|g| *g > 1e-12)
        .fold(f64::INFINITY, f64::min);
    if slowest.is_finite() {
        (10.0 / slowest).min(MAX_DEFAULT_HORIZON)
    } else {
        MAX_DEFAULT_HORIZON
    }
}

/// `ρ(t) = e^{−iHt} ρ(0) e^{iH†t}` summed over biorthogonal modes:
/// `Σ_mn d_mn e^{−i(λ_m − λ_n*)t} |ψ_m^R><ψ_n^R|` with `d_mn = <ψ_m^L|ρ(0)|ψ_n^L>`,
/// renormalized to unit trace. Exponents are shifted by the slowest populated
/// mode so long horizons do not underflow.
pub fn evolve_modes(ms: &ModeSpectrum, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Trajectory> {
    let prop = ModePropagator::new(ms, rho0)?;
    check_trajectory_grid(t_grid)?;
    let mut traj = Trajectory::new(t_grid.len());
    for &t in t_grid {
        let (mat, log_scale) = prop.unnormalized(t);
        let tr = mat.trace().re;
        if !(tr > EXTINCTION_TRACE) {
            traj.status = TrajectoryStatus::Extinct { t };
            break;
        }
        traj.push(t, DensityMatrix::renormalized(&mat)?);
        traj.push_record("log_trace", tr.ln() + log_scale);
    }
    Ok(traj)
}

/// Closed-form propagation in the eigenbasis of a non-defective `H_eff`.
#[derive(Debug, Clone)]
pub struct ModePropagator {
    right: ComplexMatrix,
    d: ComplexMatrix,
    eigenvalues: Vec<C64>,
    shift: f64,
}

impl ModePropagator {
    pub fn new(ms: &ModeSpectrum, rho0: &DensityMatrix) -> Result<Self> {
        if ms.is_defective() {
            return Err(Error::DefectiveMatrix {
                condition: ms.eig.condition,
            });
        }
        if rho0.dim() != ms.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} against a spectrum of dimension {}",
                rho0.dim(),
                ms.dim()
            )));
        }
        let left = &ms.eig.left;
        let d = &(&left.adjoint() * rho0.matrix()) * left;
        let dmax = (0..ms.dim()).map(|m| d[(m, m)].re).fold(0.0, f64::max);
        let shift = (0..ms.dim())
            .filter(|&m| d[(m, m)].re > 1e-13 * dmax)
            .map(|m| ms.eig.eigenvalues[m].im)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            right: ms.eig.right.clone(),
            d,
            eigenvalues: ms.eig.eigenvalues.clone(),
            shift: if shift.is_finite() { shift } else { 0.0 },
        })
    }

    /// Unnormalized `ρ(t) e^{−2 s t}` and the log of the removed factor.
    pub fn unnormalized(&self, t: f64) -> (ComplexMatrix, f64) {
        let n = self.eigenvalues.len();
        let phases: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|l| (-I * l * t - self.shift * t).exp())
            .collect();
        let coeff = ComplexMatrix::from_fn(n, n, |m, k| self.d[(m, k)] * phases[m] * phases[k].conj());
        let mat = &(&self.right * &coeff) * &self.right.adjoint();
        (mat, 2.0 * self.shift * t)
    }

    pub fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        let (mat, _) = self.unnormalized(t);
        if !(mat.trace().re > EXTINCTION_TRACE) {
            return Err(Error::NormalizationUnderflow { t });
        }
        DensityMatrix::renormalized(&mat)
    }

    /// Time average of the long-time state: only the slowest populated modes
    /// survive, and coherences between different eigenvalues average out.
    pub fn asymptotic_state(&self) -> Result<DensityMatrix> {
        let n = self.eigenvalues.len();
        let scale = self.eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::max);
        let tie = 1e-8 * scale;
        let dmax = (0..n).map(|m| self.d[(m, m)].re).fold(0.0, f64::max);
        let keep: Vec<usize> = (0..n)
            .filter(|&m| self.d[(m, m)].re > 1e-13 * dmax && (self.eigenvalues[m].im - self.shift).abs() <= tie)
            .collect();
        let coeff = ComplexMatrix::from_fn(n, n, |m, k| {
            if keep.contains(&m) && keep.contains(&k) && (self.eigenvalues[m] - self.eigenvalues[k]).norm() <= tie {
                self.d[(m, k)]
            } else {
                ZERO
            }
        });
        let mat = &(&self.right * &coeff) * &self.right.adjoint();
        DensityMatrix::renormalized(&mat)
    }
}

/// Continuously normalized no-jump flow on `[vec ρ, ln Tr]`:
/// `dρ/dt = L(ρ) − (Tr L(ρ)/Tr ρ) ρ` with `L(ρ) = −i(H ρ − ρ H†)`. The extra
/// component accumulates the log of the trace the linear flow would have.
fn nojump_solver(h: ComplexMatrix, tol: OdeTolerances) -> Dopri5<impl FnMut(f64, &[C64], &mut [C64])> {
    let d = h.rows();
    let n2 = d * d;
    let h_dag = h.adjoint();
    let rhs = move |_t: f64, y: &[C64], dy: &mut [C64]| {
        // Both products are formed explicitly: substituting (Hρ)† for ρH†
        // lets anti-Hermitian roundoff grow at the spread of decay rates.
        for r in 0..d {
            let hr = h.row(r);
            let yr = &y[r * d..(r + 1) * d];
            for c in 0..d {
                let mut left = ZERO;
                let mut right = ZERO;
                for k in 0..d {
                    left += hr[k] * y[k * d + c];
                    right += yr[k] * h_dag[(k, c)];
                }
                dy[r * d + c] = -I * (left - right);
            }
        }
        let tr_l: f64 = (0..d).map(|i| dy[i * d + i].re).sum();
        let tr_rho: f64 = (0..d).map(|i| y[i * d + i].re).sum();
        let rate = tr_l / tr_rho;
        for k in 0..n2 {
            dy[k] -= y[k] * rate;
        }
        dy[n2] = C64::new(rate, 0.0);
    };
    Dopri5::new(rhs, n2 + 1, tol)
}

/// Post-selected evolution `ρ(t) ∝ e^{−iH_eff t} ρ(0) e^{iH_eff† t}`.
///
/// The flow is linear, so normalizing at output times or continuously gives
/// the same states; the continuous form is integrated because the raw trace
/// drops below any absolute tolerance over long intervals. The record keeps
/// `log_trace`, the log of the unnormalized trace.
pub fn evolve_nojump_ode(
    spec: &SystemSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tol: OdeTolerances,
) -> Result<Trajectory> {
    spec.validate()?;
    check_trajectory_grid(t_grid)?;
    let h = build_h_eff(spec)?;
    check_state_dim(spec, rho0)?;
    let d = h.rows();
    let mut solver = nojump_solver(h, tol);
    let mut y = vectorize(rho0.matrix());
    y.push(ZERO);
    let mut traj = Trajectory::new(t_grid.len());
    let mut t = 0.0;
    for &tk in t_grid {
        solver.advance(&mut y, t, tk)?;
        t = tk;
        let mat = ComplexMatrix::from_vec(d, d, y[..d * d].to_vec())?;
        let tr = mat.trace().re;
        if !(tr > EXTINCTION_TRACE) {
            traj.status = TrajectoryStatus::Extinct { t };
            break;
        }
        traj.push(tk, DensityMatrix::renormalized(&mat)?);
        traj.push_record("log_trace", y[d * d].re + tr.ln());
    }
    Ok(traj)
}

/// Long-time state from `ρ(0)`: the time-averaged slowest-mode mixture for a
/// diagonalizable spectrum, or the slowest right eigenvector when it is
/// defective (the eigenvectors have coalesced there).
pub fn asymptotic_state(ms: &ModeSpectrum, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    if ms.is_defective() {
        return DensityMatrix::pure(&ms.eig.right.column(0));
    }
    ModePropagator::new(ms, rho0)?.asymptotic_state()
}

fn check_state_dim(spec: &SystemSpec, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for {} qubits",
            rho0.dim(),
            spec.n_qubits
        )));
    }
    Ok(())
}

/// Master equation with jumps inside the `{f, e}` manifold.
///
/// Decay out of `|e>` leaves the manifold; that population is integrated
/// alongside the state as `dP_g/dt = Tr[K_e ρ]`, so `Tr ρ + P_g = 1`. States
/// are reported renormalized to the manifold; the record keeps
/// `manifold_trace`, `ground_population` and their sum.
pub fn evolve_full_lindblad(
    spec: &SystemSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tol: OdeTolerances,
) -> Result<Trajectory> {
    spec.validate()?;
    if spec.n_qubits > MAX_JUMP_QUBITS {
        return Err(Error::DimensionTooLarge(format!(
            "full master equation limited to {MAX_JUMP_QUBITS} qubits"
        )));
    }
    check_trajectory_grid(t_grid)?;
    check_state_dim(spec, rho0)?;
    let gen = build_liouvillian(spec, true)?;
    let ke = leakage_operator(spec)?;
    let d = spec.dim();
    let n2 = d * d;
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        for r in 0..n2 {
            dy[r] = gen.row(r).iter().zip(&y[..n2]).map(|(a, b)| a * b).sum();
        }
        // Tr[K_e ρ] = Σ_ij K_ij ρ_ji
        let mut leak = ZERO;
        for i in 0..d {
            for j in 0..d {
                leak += ke[(i, j)] * y[j * d + i];
            }
        }
        dy[n2] = leak;
    };
    let mut solver = Dopri5::new(rhs, n2 + 1, tol);
    let mut y = vectorize(rho0.matrix());
    y.push(ZERO);
    let mut traj = Trajectory::new(t_grid.len());
    let mut t = 0.0;
    for &tk in t_grid {
        solver.advance(&mut y, t, tk)?;
        t = tk;
        let mat = ComplexMatrix::from_vec(d, d, y[..n2].to_vec())?;
        let tr = mat.trace().re;
        let pg = y[n2].re;
        if !(tr > EXTINCTION_TRACE) {
            traj.status = TrajectoryStatus::Extinct { t };
            break;
        }
        traj.push(tk, DensityMatrix::renormalized(&mat)?);
        traj.push_record("manifold_trace", tr);
        traj.push_record("ground_population", pg);
        traj.push_record("total_probability", tr + pg);
    }
    Ok(traj)
}

/// How the slowest symmetric mode is weighted against the antisymmetric one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TwoModeWeighting {
    /// Diagonal biorthogonal overlaps `c_11 = <ψ_1^L|ρ(0)|ψ_1^R>` and `c_44`.
    #[default]
    Overlap,
    /// Trace carried by each mode in the exact expansion,
    /// `<ψ_1^L|ρ(0)|ψ_1^L> ‖ψ_1^R‖²`; this is what the full state approaches.
    Asymptotic,
}

/// Long-time competition between the slowest symmetric mode and the
/// antisymmetric mode: `[w_1 P_1 + w_4 e^{2 gap t} P_4] / (w_1 + w_4 e^{2 gap t})`
/// with orthogonal pure projectors `P_1`, `P_4` onto the right eigenvectors.
#[derive(Debug, Clone)]
pub struct TwoModeModel {
    pub c11: f64,
    pub c44: f64,
    /// `Im λ_4 − Im λ_1`.
    pub gap: f64,
    p1: ComplexMatrix,
    p4: ComplexMatrix,
}

impl TwoModeModel {
    pub fn new(ms: &ModeSpectrum, rho0: &DensityMatrix) -> Result<Self> {
        Self::with_weighting(ms, rho0, TwoModeWeighting::Overlap)
    }

    pub fn with_weighting(ms: &ModeSpectrum, rho0: &DensityMatrix, weighting: TwoModeWeighting) -> Result<Self> {
        let (s, a) = ms.subradiant_pair()?;
        let weight = |k: usize| -> Result<f64> {
            let r = ms.eig.right.column(k);
            let l = ms.eig.left.column(k);
            let rho = rho0.matrix();
            Ok(match weighting {
                TwoModeWeighting::Overlap => inner(&l, &rho.matvec(&r)?).re,
                TwoModeWeighting::Asymptotic => inner(&l, &rho.matvec(&l)?).re * norm(&r).powi(2),
            })
        };
        if rho0.dim() != ms.dim() {
            return Err(Error::DimensionMismatch(format!("state of dimension {}", rho0.dim())));
        }
        let c11 = weight(s)?;
        let c44 = weight(a)?;
        if c11.abs() <= 1e-300 && c44.abs() <= 1e-300 {
            return Err(Error::ZeroOverlap("both subradiant overlaps vanish".into()));
        }
        let proj = |k: usize| DensityMatrix::pure(&ms.eig.right.column(k)).map(DensityMatrix::into_matrix);
        Ok(Self {
            c11,
            c44,
            gap: ms.eig.eigenvalues[a].im - ms.eig.eigenvalues[s].im,
            p1: proj(s)?,
            p4: proj(a)?,
        })
    }

    /// `ε(t) = (c_11/c_44) e^{−2 gap t}`.
    pub fn epsilon(&self, t: f64) -> Result<f64> {
        epsilon_ratio(self.c11, self.c44, self.gap, t)
    }

    pub fn state(&self, t: f64) -> Result<DensityMatrix> {
        // Weights relative to the larger one keep the exponentials bounded.
        let log4 = 2.0 * self.gap * t + self.c44.max(1e-300).ln();
        let log1 = self.c11.max(1e-300).ln();
        let top = log1.max(log4);
        let w1 = if self.c11 > 0.0 { (log1 - top).exp() } else { 0.0 };
        let w4 = if self.c44 > 0.0 { (log4 - top).exp() } else { 0.0 };
        let mat = &self.p1.scale_real(w1) + &self.p4.scale_real(w4);
        DensityMatrix::renormalized(&mat)
    }
}

pub fn two_mode_state(ms: &ModeSpectrum, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    TwoModeModel::new(ms, rho0)?.state(t)
}

pub fn evolve_two_mode(ms: &ModeSpectrum, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Trajectory> {
    check_trajectory_grid(t_grid)?;
    let model = TwoModeModel::new(ms, rho0)?;
    let mut traj = Trajectory::new(t_grid.len());
    for &t in t_grid {
        traj.push(t, model.state(t)?);
    }
    Ok(traj)
}

/// `(c11/c44) e^{−2 gap t}`.
pub fn epsilon_ratio(c11: f64, c44: f64, gap: f64, t: f64) -> Result<f64> {
    if !(c44 > 0.0) {
        return Err(Error::ZeroOverlap(format!("c44 = {c44}")));
    }
    Ok(c11 / c44 * (-2.0 * gap * t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub r: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            x,
            y,
            z,
            r: (x * x + y * y + z * z).sqrt(),
        }
    }

    /// `x = 2 Re ρ_fe`, `y = −2 Im ρ_fe`, `z = ρ_ff − ρ_ee`.
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch(format!("Bloch vector of a {}-level state", rho.dim())));
        }
        let fe = rho.get(0, 1);
        Ok(Self::new(2.0 * fe.re, -2.0 * fe.im, rho.get(0, 0).re - rho.get(1, 1).re))
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new((1.0 + self.z) / 2.0, 0.0), C64::new(self.x / 2.0, -self.y / 2.0)],
            vec![C64::new(self.x / 2.0, self.y / 2.0), C64::new((1.0 - self.z) / 2.0, 0.0)],
        ])?;
        DensityMatrix::renormalized(&m)
    }
}

/// `(e^{−x}, cosh x e^{−x}, (sinh x / x) e^{−x}, ((cosh x − 1)/x²) e^{−x})`.
fn scaled_hyperbolics(x: f64) -> (f64, f64, f64, f64) {
    let e = (-x).exp();
    if x < 1e-2 {
        let x2 = x * x;
        let shc = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0 * (1.0 + x2 / 42.0));
        let ch2 = 0.5 * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0 * (1.0 + x2 / 56.0)));
        let ch = 1.0 + x2 / 2.0 * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0));
        (e, ch * e, shc * e, ch2 * e)
    } else {
        let e2 = (-2.0 * x).exp();
        let ch = 0.5 * (1.0 + e2);
        let sh = 0.5 * (1.0 - e2);
        (e, ch, sh / x, (ch - e) / (x * x))
    }
}

/// Single-qubit post-selected Bloch vector from `diag(p, 1−p)` at resonance,
/// valid up to and including the exceptional point `Ω = γ_e/4`.
///
/// With `κ = √(γ_e²/4 − 4Ω²)` and `x = κt`:
/// `𝒩 = 1 + (γ_e t/2)² (cosh x − 1)/x² + (2p−1)(γ_e t/2) sinh x / x`,
/// `z𝒩 = (2p−1) cosh x + (γ_e t/2) sinh x / x`,
/// `y𝒩 = −[(2p−1) 2Ωt sinh x / x + Ω γ_e t² (cosh x − 1)/x²]`.
/// At `κ = 0` these reduce to the polynomial forms.
pub fn bloch_closed_form(p: f64, spec: &SystemSpec, t: f64) -> Result<BlochVector> {
    spec.validate()?;
    if spec.n_qubits != 1 || spec.delta != 0.0 || spec.gamma_f != 0.0 {
        return Err(Error::NotApplicable("closed form needs one qubit with Δ = γ_f = 0".into()));
    }
    if !(0.0..=1.0).contains(&p) || !(t >= 0.0) {
        return Err(Error::DomainError(format!("p = {p}, t = {t}")));
    }
    let g = spec.gamma_e;
    let w = spec.omega;
    let k2 = g * g / 4.0 - 4.0 * w * w;
    if k2 < -1e-12 * g * g {
        return Err(Error::DomainError(format!("Ω = {w} beyond the exceptional point γ_e/4")));
    }
    let kappa = k2.max(0.0).sqrt();
    let (e, ch, shc, ch2) = scaled_hyperbolics(kappa * t);
    let a = 2.0 * p - 1.0;
    let gt = g * t / 2.0;
    let norm = e + gt * gt * ch2 + a * gt * shc;
    let z = (a * ch + gt * shc) / norm;
    let y = -(a * 2.0 * w * t * shc + w * g * t * t * ch2) / norm;
    Ok(BlochVector::new(0.0, y, z))
}

/// Pure steady state of the single qubit for `Ω ≤ γ_e/4`: `(0, −4Ω/γ_e, 2κ/γ_e)`.
pub fn bloch_steady_state(spec: &SystemSpec) -> Result<BlochVector> {
    let g = spec.gamma_e;
    let k2 = g * g / 4.0 - 4.0 * spec.omega * spec.omega;
    if k2 < -1e-12 * g * g {
        return Err(Error::DomainError(format!("Ω = {} beyond the exceptional point", spec.omega)));
    }
    Ok(BlochVector::new(0.0, -4.0 * spec.omega / g, 2.0 * k2.max(0.0).sqrt() / g))
}

/// Evaluates a trajectory's state at arbitrary times, for bisection.
pub enum Evolver {
    Modes(ModePropagator),
    TwoMode(TwoModeModel),
    /// Integrates from the nearest earlier stored state.
    Ode {
        spec: SystemSpec,
        anchors: Vec<(f64, DensityMatrix)>,
        tol: OdeTolerances,
        jumps: bool,
    },
}

impl Evolver {
    pub fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        match self {
            Evolver::Modes(p) => p.state_at(t),
            Evolver::TwoMode(m) => m.state(t),
            Evolver::Ode {
                spec,
                anchors,
                tol,
                jumps,
            } => {
                let idx = anchors.partition_point(|(ta, _)| *ta <= t);
                let (t0, rho) = if idx == 0 { &anchors[0] } else { &anchors[idx - 1] };
                if (t - t0).abs() == 0.0 {
                    return Ok(rho.clone());
                }
                if *jumps {
                    let traj = evolve_full_lindblad(spec, rho, &[t - t0], *tol)?;
                    return traj
                        .states
                        .into_iter()
                        .next()
                        .ok_or(Error::NormalizationUnderflow { t });
                }
                let h = build_h_eff(spec)?;
                let d = h.rows();
                let mut y = vectorize(rho.matrix());
                y.push(ZERO);
                let mut solver = nojump_solver(h, *tol);
                solver.advance(&mut y, *t0, t)?;
                let mat = ComplexMatrix::from_vec(d, d, y[..d * d].to_vec())?;
                if !(mat.trace().re > EXTINCTION_TRACE) {
                    return Err(Error::NormalizationUnderflow { t });
                }
                DensityMatrix::renormalized(&mat)
            }
        }
    }
}

/// A computed trajectory together with the means to re-evaluate it off-grid.
pub struct Evolution {
    pub trajectory: Trajectory,
    pub evolver: Evolver,
}

/// Runs `route` and keeps an [`Evolver`] for later refinement.
pub fn evolve(
    route: Route,
    spec: &SystemSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tol: OdeTolerances,
) -> Result<Evolution> {
    match route {
        Route::Modes => {
            let ms = ModeSpectrum::compute(spec)?;
            let trajectory = evolve_modes(&ms, rho0, t_grid)?;
            Ok(Evolution {
                trajectory,
                evolver: Evolver::Modes(ModePropagator::new(&ms, rho0)?),
            })
        }
        Route::TwoMode => {
            let ms = ModeSpectrum::compute(spec)?;
            let trajectory = evolve_two_mode(&ms, rho0, t_grid)?;
            Ok(Evolution {
                trajectory,
                evolver: Evolver::TwoMode(TwoModeModel::new(&ms, rho0)?),
            })
        }
        Route::NoJumpOde | Route::FullLindblad => {
            let jumps = route == Route::FullLindblad;
            let trajectory = if jumps {
                evolve_full_lindblad(spec, rho0, t_grid, tol)?
            } else {
                evolve_nojump_ode(spec, rho0, t_grid, tol)?
            };
            let mut anchors = vec![(0.0, rho0.clone())];
            anchors.extend(trajectory.t_grid.iter().copied().zip(trajectory.states.iter().cloned()));
            Ok(Evolution {
                trajectory,
                evolver: Evolver::Ode {
                    spec: *spec,
                    anchors,
                    tol,
                    jumps,
                },
            })
        }
    }
}

/// Attaches normalized mode weights at every output time.
pub fn attach_mode_weights(traj: &mut Trajectory, overlaps: &OverlapMatrix) {
    traj.mode_weights = Some(traj.t_grid.iter().map(|&t| overlaps.weights_at(t)).collect());
}
