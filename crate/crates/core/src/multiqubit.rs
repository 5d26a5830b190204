//! Full `2^n`-dimensional spectra and post-selected entropy dynamics for
//! larger registers, without any permutation-sector reduction.

use crate::dynamics::{asymptotic_state, evolve_nojump_ode};
use crate::error::{Error, Result};
use crate::model::{DensityMatrix, SystemSpec, MAX_QUBITS};
use crate::numkernel::{OdeTolerances, C64};
use crate::observables::{normalized_linear_entropy, purity};
use crate::spectral::{ModeSpectrum, Sector};

/// Eigenvalue match tolerance relative to `γ_e`.
pub const MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct MultiqubitSpectrum {
    pub ms: ModeSpectrum,
    /// Number of eigenvalues within `MATCH_TOL γ_e` of `−i(1−η)γ_e/2`.
    pub antisym_multiplicity: usize,
    /// Modes whose eigenvalue does not move when the drive changes; they span
    /// the sector the collective drive cannot reach.
    pub drive_invariant_modes: Vec<usize>,
}

impl MultiqubitSpectrum {
    /// The slowest drive-invariant eigenvalue, if any.
    pub fn invariant_eigenvalue(&self) -> Option<C64> {
        self.drive_invariant_modes.first().map(|&k| self.ms.eig.eigenvalues[k])
    }

    /// Drive-invariant modes sharing the slowest invariant eigenvalue.
    pub fn slowest_invariant_modes(&self) -> Vec<usize> {
        let Some(top) = self.invariant_eigenvalue() else {
            return Vec::new();
        };
        let tol = MATCH_TOL * self.ms.spec.gamma_e.max(1.0);
        self.drive_invariant_modes
            .iter()
            .copied()
            .filter(|&k| (self.ms.eig.eigenvalues[k] - top).norm() <= tol)
            .collect()
    }

    /// The slowest mode that follows the drive.
    pub fn slowest_driven_mode(&self) -> Option<usize> {
        (0..self.ms.dim()).find(|k| !self.drive_invariant_modes.contains(k))
    }
}

/// `−i(1−η)γ_e/2`.
pub fn antisymmetric_reference(spec: &SystemSpec) -> C64 {
    C64::new(0.0, -(1.0 - spec.eta) * spec.gamma_e / 2.0)
}

fn check_size(spec: &SystemSpec) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&spec.n_qubits) {
        return Err(Error::DimensionTooLarge(format!(
            "{} qubits outside 2..={MAX_QUBITS}",
            spec.n_qubits
        )));
    }
    Ok(())
}

/// Full spectrum for `2 ≤ n ≤ 6`; `n = 2` is accepted so the generic path can
/// be compared with the two-qubit one.
pub fn multiqubit_spectrum(spec: &SystemSpec) -> Result<MultiqubitSpectrum> {
    spec.validate()?;
    check_size(spec)?;
    let mut ms = ModeSpectrum::compute(spec)?;
    let tol = MATCH_TOL * spec.gamma_e.max(1.0);
    let reference = antisymmetric_reference(spec);
    let antisym_multiplicity = ms.eigenvalues().iter().filter(|z| (**z - reference).norm() <= tol).count();

    let shifted = ModeSpectrum::compute(&spec.with_omega(spec.omega + (0.1 * spec.omega).max(0.05)))?;
    let drive_invariant_modes: Vec<usize> = (0..ms.dim())
        .filter(|&k| {
            let z = ms.eig.eigenvalues[k];
            shifted.eigenvalues().iter().any(|w| (w - z).norm() <= tol)
        })
        .collect();
    if spec.n_qubits > 2 {
        for &k in &drive_invariant_modes {
            ms.sector_labels[k] = Sector::Antisymmetric;
        }
    }
    Ok(MultiqubitSpectrum {
        ms,
        antisym_multiplicity,
        drive_invariant_modes,
    })
}

/// Drive at which the slowest driven mode decays as fast as the slowest
/// drive-invariant modes, located by bisection on `[lo, hi]`.
pub fn subradiant_degeneracy(template: &SystemSpec, (lo, hi): (f64, f64), resolution: usize) -> Result<Option<f64>> {
    if !(hi > lo) || resolution < 2 {
        return Err(Error::InvalidGrid(format!("[{lo}, {hi}] with {resolution} points")));
    }
    let gap = |omega: f64| -> Result<Option<f64>> {
        let mq = multiqubit_spectrum(&template.with_omega(omega))?;
        let (Some(inv), Some(k)) = (mq.invariant_eigenvalue(), mq.slowest_driven_mode()) else {
            return Ok(None);
        };
        Ok(Some(mq.ms.eig.eigenvalues[k].im - inv.im))
    };
    let step = (hi - lo) / (resolution - 1) as f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..resolution {
        let w = lo + step * i as f64;
        let Some(g) = gap(w)? else {
            prev = None;
            continue;
        };
        if let Some((w0, g0)) = prev {
            if g0 > 0.0 && g <= 0.0 {
                let (mut a, mut b) = (w0, w);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    match gap(mid)? {
                        Some(gm) if gm > 0.0 => a = mid,
                        _ => b = mid,
                    }
                }
                return Ok(Some(0.5 * (a + b)));
            }
        }
        prev = Some((w, g));
    }
    Ok(None)
}

pub fn asymptotic_purity(spec: &SystemSpec, rho0: &DensityMatrix) -> Result<f64> {
    Ok(purity(&asymptotic_state(&ModeSpectrum::compute(spec)?, rho0)?))
}

/// `(1 − Tr ρ²)/(1 − 1/d)` along the no-jump route.
pub fn normalized_linear_entropy_series(
    spec: &SystemSpec,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tol: OdeTolerances,
) -> Result<Vec<f64>> {
    check_size(spec)?;
    let traj = evolve_nojump_ode(spec, rho0, t_grid, tol)?;
    Ok(traj.states.iter().map(normalized_linear_entropy).collect())
}
