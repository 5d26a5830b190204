//! Scalar functionals of density matrices, closed-form timescales and the
//! crossing detector used to certify anomalous relaxation.

use std::fmt;

use crate::dynamics::{epsilon_ratio, Evolution, Trajectory};
use crate::error::{Error, Result};
use crate::model::{make_initial_state, DensityMatrix, InitialStateSpec, PSD_TOL};
use crate::numkernel::{eig_general, eigh, hermitian_function, ComplexMatrix, C64};
use crate::spectral::{mode_overlaps, ModeSpectrum, ModeWeights};

/// Resolution of [`detect_crossing`] in µs.
pub const CROSSING_RESOLUTION: f64 = 1e-4;
/// Minimum separation of the two curves on either flank of a crossing.
pub const FLANK_SEPARATION: f64 = 1e-9;

pub fn purity(rho: &DensityMatrix) -> f64 {
    // Tr[ρ²] = Σ |ρ_ij|² for Hermitian ρ.
    rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// `S_L / (1 − 1/d)`, in `[0, 1]`.
pub fn normalized_linear_entropy(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() as f64;
    linear_entropy(rho) / (1.0 - 1.0 / d)
}

fn same_dim(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("states of dimension {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// `Tr[(ρ − σ)²]`.
pub fn hs_distance_sq(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(rho
        .matrix()
        .as_slice()
        .iter()
        .zip(sigma.matrix().as_slice())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum())
}

/// `Tr[ρσ]` for Hermitian arguments.
pub fn overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    Ok(rho
        .matrix()
        .as_slice()
        .iter()
        .zip(sigma.matrix().as_slice())
        .map(|(a, b)| (a * b.conj()).re)
        .sum())
}

/// Uhlmann fidelity `(Tr √(√σ ρ √σ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    // With a pure argument the fidelity is the overlap; this also avoids
    // square roots of roundoff-level eigenvalues.
    if purity(rho) > 1.0 - 1e-12 || purity(sigma) > 1.0 - 1e-12 {
        return Ok(overlap(rho, sigma)?.clamp(0.0, 1.0));
    }
    let root = hermitian_function(sigma.matrix(), |x| x.max(0.0).sqrt());
    let inner = &(&root * rho.matrix()) * &root;
    let (w, _) = eigh(&inner);
    let tr: f64 = w.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

pub fn infidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    Ok(1.0 - fidelity(rho, sigma)?)
}

/// Sum of absolute off-diagonal elements; `2|ρ_ef|` for a qubit.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let m = rho.matrix();
    (0..d)
        .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)].norm())
        .sum()
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("concurrence of a {}-level state", rho.dim())));
    }
    Ok(())
}

/// Eigenvalues below zero by less than the positivity tolerance are zeroed.
fn clamp_psd(rho: &DensityMatrix) -> ComplexMatrix {
    let (w, v) = eigh(rho.matrix());
    if w.iter().all(|x| *x >= 0.0) {
        return rho.matrix().clone();
    }
    let d: Vec<C64> = w
        .iter()
        .map(|x| C64::new(if *x < 0.0 && *x >= -PSD_TOL { 0.0 } else { *x }, 0.0))
        .collect();
    &(&v * &ComplexMatrix::diagonal(&d)) * &v.adjoint()
}

/// `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    // σ_y⊗σ_y is real antidiagonal with signs (−1, 1, 1, −1).
    let sign = [-1.0, 1.0, 1.0, -1.0];
    ComplexMatrix::from_fn(4, 4, |r, c| rho[(3 - r, 3 - c)].conj() * (sign[r] * sign[c]))
}

fn wootters(a: &mut [f64]) -> f64 {
    a.sort_by(|x, y| y.total_cmp(x));
    (a[0] - a[1] - a[2] - a[3]).max(0.0)
}

/// Wootters concurrence from the square roots of the eigenvalues of `ρρ̃`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let m = clamp_psd(rho);
    let prod = &m * &spin_flip(&m);
    let dec = eig_general(&prod, f64::INFINITY)?;
    let mut a: Vec<f64> = dec.eigenvalues.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    Ok(wootters(&mut a).min(1.0))
}

/// Concurrence from the eigenvalues of `√(√ρ ρ̃ √ρ)`.
pub fn concurrence_direct(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let m = clamp_psd(rho);
    let root = hermitian_function(&m, |x| x.max(0.0).sqrt());
    let inner = &(&root * &spin_flip(&m)) * &root;
    let (w, _) = eigh(&inner);
    let mut a: Vec<f64> = w.iter().map(|x| x.max(0.0).sqrt()).collect();
    Ok(wootters(&mut a).min(1.0))
}

/// X-state branches `c1 = 2(|ρ_14| − √(ρ_22ρ_33))`, `c2 = 2(|ρ_23| − √(ρ_11ρ_44))`, unclamped.
pub fn x_state_concurrence(rho: &DensityMatrix) -> Result<(f64, f64)> {
    require_two_qubits(rho)?;
    let p = |k: usize| rho.get(k, k).re.max(0.0);
    let c1 = 2.0 * (rho.get(0, 3).norm() - (p(1) * p(2)).sqrt());
    let c2 = 2.0 * (rho.get(1, 2).norm() - (p(0) * p(3)).sqrt());
    Ok((c1, c2))
}

/// Weight outside the X pattern, relative to the Frobenius norm.
pub fn off_x_mass(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let m = rho.matrix();
    let mut off = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if r != c && r + c != 3 {
                off += m[(r, c)].norm_sqr();
            }
        }
    }
    Ok((off / m.frobenius_norm().powi(2)).sqrt())
}

/// Peak time `ln(1/p − 1)/γ_e` of the undriven single-qubit linear entropy.
pub fn entropy_peak_time(p: f64, gamma_e: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) || !(gamma_e > 0.0) {
        return Err(Error::DomainError(format!("entropy peak needs 0 < p < 1/2, got p = {p}")));
    }
    Ok((1.0 / p - 1.0).ln() / gamma_e)
}

/// Subradiant overlaps `(c_11, c_44)` and `Im λ_4 − Im λ_1` for a product state.
pub fn subradiant_overlaps(ms: &ModeSpectrum, p: f64) -> Result<(f64, f64, f64)> {
    if ms.spec.n_qubits != 2 {
        return Err(Error::NotApplicable("subradiant timescales are defined for two qubits".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::DomainError(format!("p = {p}")));
    }
    let (s, a) = ms.subradiant_pair()?;
    let gap = ms.eig.eigenvalues[a].im - ms.eig.eigenvalues[s].im;
    let rho = make_initial_state(&InitialStateSpec::DiagonalProduct { p }, 2)?;
    let ov = mode_overlaps(ms, &rho)?;
    let (c11, c44) = (ov.c[(s, s)].re, ov.c[(a, a)].re);
    if !(c44 > 0.0 && c11 > 0.0) {
        return Err(Error::ZeroOverlap(format!("c11 = {c11}, c44 = {c44} at p = {p}")));
    }
    Ok((c11, c44, gap))
}

/// `t_h = ln(c_11/c_44) / (2[Im λ_4 − Im λ_1])`, the time at which `ε = 1`.
pub fn heating_time(ms: &ModeSpectrum, p: f64) -> Result<f64> {
    let (c11, c44, gap) = subradiant_overlaps(ms, p)?;
    if !(gap > 0.0) {
        return Err(Error::NotApplicable(format!("antisymmetric mode not slowest (gap {gap})")));
    }
    Ok((c11 / c44).ln() / (2.0 * gap))
}

/// Weak-drive estimate `γ_e(1+η) ln[c_11/(p(1−p))] / (8(Ω² − Ω_c²))`.
pub fn heating_time_weak(omega: f64, eta: f64, gamma_e: f64, p: f64, c11: f64) -> Result<f64> {
    let wc = crate::spectral::critical_drive(eta, gamma_e);
    let den = 8.0 * (omega * omega - wc * wc);
    if !(den > 0.0) {
        return Err(Error::NotApplicable(format!("Ω = {omega} not above Ω_c = {wc}")));
    }
    let c44 = p * (1.0 - p);
    if !(c44 > 0.0 && c11 > 0.0) {
        return Err(Error::ZeroOverlap(format!("p = {p}")));
    }
    Ok(gamma_e * (1.0 + eta) * (c11 / c44).ln() / den)
}

/// `t_×` solving `ε_{p1}(t) ε_{p2}(t) = 1`.
pub fn crossing_time_formula(ms: &ModeSpectrum, p1: f64, p2: f64) -> Result<f64> {
    let (a11, a44, gap) = subradiant_overlaps(ms, p1)?;
    let (b11, b44, _) = subradiant_overlaps(ms, p2)?;
    if !(gap > 0.0) {
        return Err(Error::NotApplicable(format!("antisymmetric mode not slowest (gap {gap})")));
    }
    Ok(((a11 / a44).ln() + (b11 / b44).ln()) / (4.0 * gap))
}

/// `ε(t)` for a product state, via [`epsilon_ratio`].
pub fn epsilon_at(ms: &ModeSpectrum, p: f64, t: f64) -> Result<f64> {
    let (c11, c44, gap) = subradiant_overlaps(ms, p)?;
    epsilon_ratio(c11, c44, gap, t)
}

/// Named scalar observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Observable {
    Purity,
    LinearEntropy,
    NormalizedLinearEntropy,
    HsDistanceSq,
    Infidelity,
    L1Coherence,
    Concurrence,
    XStateC1,
    XStateC2,
    BlochX,
    BlochY,
    BlochZ,
}

impl Observable {
    pub const ALL: [Observable; 12] = [
        Observable::Purity,
        Observable::LinearEntropy,
        Observable::NormalizedLinearEntropy,
        Observable::HsDistanceSq,
        Observable::Infidelity,
        Observable::L1Coherence,
        Observable::Concurrence,
        Observable::XStateC1,
        Observable::XStateC2,
        Observable::BlochX,
        Observable::BlochY,
        Observable::BlochZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Purity => "purity",
            Observable::LinearEntropy => "linear_entropy",
            Observable::NormalizedLinearEntropy => "normalized_linear_entropy",
            Observable::HsDistanceSq => "hs_distance_sq",
            Observable::Infidelity => "infidelity",
            Observable::L1Coherence => "l1_coherence",
            Observable::Concurrence => "concurrence",
            Observable::XStateC1 => "x_state_c1",
            Observable::XStateC2 => "x_state_c2",
            Observable::BlochX => "bloch_x",
            Observable::BlochY => "bloch_y",
            Observable::BlochZ => "bloch_z",
        }
    }

    /// Whether the observable is defined for states of dimension `dim`.
    pub fn supports(self, dim: usize) -> bool {
        match self {
            Observable::Concurrence | Observable::XStateC1 | Observable::XStateC2 => dim == 4,
            Observable::BlochX | Observable::BlochY | Observable::BlochZ => dim == 2,
            _ => true,
        }
    }

    pub fn needs_reference(self) -> bool {
        matches!(self, Observable::HsDistanceSq | Observable::Infidelity)
    }

    pub fn evaluate(self, rho: &DensityMatrix, reference: Option<&DensityMatrix>) -> Result<f64> {
        let reference = || {
            reference.ok_or_else(|| Error::InvalidSpec(format!("{} needs a reference state", self.name())))
        };
        let bloch = || crate::dynamics::BlochVector::from_state(rho);
        match self {
            Observable::Purity => Ok(purity(rho)),
            Observable::LinearEntropy => Ok(linear_entropy(rho)),
            Observable::NormalizedLinearEntropy => Ok(normalized_linear_entropy(rho)),
            Observable::HsDistanceSq => hs_distance_sq(rho, reference()?),
            Observable::Infidelity => infidelity(rho, reference()?),
            Observable::L1Coherence => Ok(l1_coherence(rho)),
            Observable::Concurrence => concurrence(rho),
            Observable::XStateC1 => Ok(x_state_concurrence(rho)?.0),
            Observable::XStateC2 => Ok(x_state_concurrence(rho)?.1),
            Observable::BlochX => Ok(bloch()?.x),
            Observable::BlochY => Ok(bloch()?.y),
            Observable::BlochZ => Ok(bloch()?.z),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown observable '{s}'")))
    }
}

/// All standard observables of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub purity: f64,
    pub linear_entropy: f64,
    pub normalized_linear_entropy: f64,
    pub hs_distance_sq: Option<f64>,
    pub infidelity: Option<f64>,
    pub l1_coherence: f64,
    pub concurrence: Option<f64>,
    pub x_state: Option<(f64, f64)>,
}

impl ObservableRecord {
    pub fn compute(rho: &DensityMatrix, reference: Option<&DensityMatrix>) -> Result<Self> {
        let pi = purity(rho);
        let s = 1.0 - pi;
        let two_qubit = rho.dim() == 4;
        Ok(Self {
            purity: pi,
            linear_entropy: s,
            normalized_linear_entropy: s / (1.0 - 1.0 / rho.dim() as f64),
            hs_distance_sq: reference.map(|r| hs_distance_sq(rho, r)).transpose()?,
            infidelity: reference.map(|r| infidelity(rho, r)).transpose()?,
            l1_coherence: l1_coherence(rho),
            concurrence: two_qubit.then(|| concurrence(rho)).transpose()?,
            x_state: two_qubit.then(|| x_state_concurrence(rho)).transpose()?,
        })
    }
}

/// Observable series along a trajectory.
pub fn observable_series(traj: &Trajectory, obs: Observable, reference: Option<&DensityMatrix>) -> Result<Vec<f64>> {
    traj.states.iter().map(|s| obs.evaluate(s, reference)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignChange {
    /// `a − b` goes from negative to positive.
    Rising,
    /// `a − b` goes from positive to negative.
    Falling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingEvent {
    pub t_cross: f64,
    pub observable: Observable,
    pub pair: (String, String),
    pub sign_change: SignChange,
}

/// A labelled trajectory with an off-grid evaluator.
pub struct Curve<'a> {
    pub label: &'a str,
    pub evolution: &'a Evolution,
}

/// Sign changes of `obs(a) − obs(b)`, bracketed on the common grid and refined by
/// bisection to [`CROSSING_RESOLUTION`]. Flanks closer than [`FLANK_SEPARATION`]
/// are skipped, so touching curves do not count.
pub fn detect_crossing(
    a: &Curve<'_>,
    b: &Curve<'_>,
    obs: Observable,
    reference: Option<&DensityMatrix>,
) -> Result<Vec<CrossingEvent>> {
    let (ta, tb) = (&a.evolution.trajectory, &b.evolution.trajectory);
    if ta.t_grid != tb.t_grid {
        return Err(Error::GridMismatch);
    }
    let va = observable_series(ta, obs, reference)?;
    let vb = observable_series(tb, obs, reference)?;
    let diff_at = |t: f64| -> Result<f64> {
        let sa = a.evolution.evolver.state_at(t)?;
        let sb = b.evolution.evolver.state_at(t)?;
        Ok(obs.evaluate(&sa, reference)? - obs.evaluate(&sb, reference)?)
    };
    let mut events = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (k, &t) in ta.t_grid.iter().enumerate() {
        let d = va[k] - vb[k];
        if d.abs() <= FLANK_SEPARATION {
            continue;
        }
        if let Some((t0, d0)) = last {
            if d0.signum() != d.signum() {
                let (mut lo, mut hi) = (t0, t);
                while hi - lo > CROSSING_RESOLUTION {
                    let mid = 0.5 * (lo + hi);
                    let dm = diff_at(mid)?;
                    if dm.signum() == d0.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                events.push(CrossingEvent {
                    t_cross: 0.5 * (lo + hi),
                    observable: obs,
                    pair: (a.label.to_string(), b.label.to_string()),
                    sign_change: if d0 < 0.0 { SignChange::Rising } else { SignChange::Falling },
                });
            }
        }
        last = Some((t, d));
    }
    Ok(events)
}

/// First grid time at which `series` satisfies `pred`.
pub fn first_time(t_grid: &[f64], series: &[f64], pred: impl Fn(f64) -> bool) -> Option<f64> {
    t_grid.iter().zip(series).find(|(_, v)| pred(**v)).map(|(t, _)| *t)
}

/// First time after which `series` satisfies `pred` at every later sample.
pub fn settling_time(t_grid: &[f64], series: &[f64], pred: impl Fn(f64) -> bool) -> Option<f64> {
    let last_bad = series.iter().rposition(|v| !pred(*v));
    match last_bad {
        None => t_grid.first().copied(),
        Some(k) if k + 1 < t_grid.len() => Some(t_grid[k + 1]),
        Some(_) => None,
    }
}

/// Time of the largest sample.
pub fn argmax_time(t_grid: &[f64], series: &[f64]) -> Option<f64> {
    t_grid
        .iter()
        .zip(series)
        .fold(None, |best: Option<(f64, f64)>, (t, v)| match best {
            Some((_, bv)) if bv >= *v => best,
            _ => Some((*t, *v)),
        })
        .map(|(t, _)| t)
}

/// Normalized mode weights at each time, in both conventions.
pub fn mode_weight_series(ms: &ModeSpectrum, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<ModeWeights>> {
    crate::numkernel::check_grid(t_grid)?;
    let ov = mode_overlaps(ms, rho0)?;
    Ok(t_grid.iter().map(|&t| ov.weights_at(t)).collect())
}

/// One row of an informational-Mpemba scan.
#[derive(Debug, Clone, PartialEq)]
pub struct MpembaScanRow {
    pub p: f64,
    pub crossings: Vec<f64>,
}

/// Linear-entropy crossings of each `p` against `p_ref`, all from diagonal
/// product states along the same route. A row with crossings marks an
/// ordering reversal; the threshold below which they appear is read off the scan.
pub fn informational_mpemba_scan(
    spec: &crate::model::SystemSpec,
    p_ref: f64,
    p_values: &[f64],
    t_grid: &[f64],
    route: crate::dynamics::Route,
    tol: crate::numkernel::OdeTolerances,
) -> Result<Vec<MpembaScanRow>> {
    let make = |p: f64| -> Result<Evolution> {
        let rho = make_initial_state(&InitialStateSpec::DiagonalProduct { p }, spec.n_qubits)?;
        crate::dynamics::evolve(route, spec, &rho, t_grid, tol)
    };
    let reference = make(p_ref)?;
    let ref_label = format!("p={p_ref}");
    p_values
        .iter()
        .map(|&p| {
            let ev = make(p)?;
            let label = format!("p={p}");
            let events = detect_crossing(
                &Curve {
                    label: &label,
                    evolution: &ev,
                },
                &Curve {
                    label: &ref_label,
                    evolution: &reference,
                },
                Observable::LinearEntropy,
                None,
            )?;
            Ok(MpembaScanRow {
                p,
                crossings: events.into_iter().map(|e| e.t_cross).collect(),
            })
        })
        .collect()
}
