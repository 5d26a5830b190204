//! Spectra of the effective Hamiltonian: closed-form symmetric-sector roots,
//! exceptional and subradiant degeneracy loci, dissipative gap and mode overlaps.
//!
//! Mode numbering for two qubits: indices 0..3 are the symmetric-sector modes
//! ordered from slowest to fastest decay, index 3 is the antisymmetric mode.

use crate::error::{Error, Result};
use crate::model::{build_h_eff, dicke_transform, dicke_unitary, DensityMatrix, SystemSpec};
use crate::numkernel::{
    condition_number, eig_general, inner, mode_order, norm, ComplexMatrix, EigDecomposition, C64, I, ONE, ZERO,
};

/// Defect threshold passed to the eigensolver: spectra whose eigenvector
/// matrix has condition number above `1/DEFECT_TOL` are flagged defective.
pub const DEFECT_TOL: f64 = 1e-7;

/// Index of the antisymmetric mode in a two-qubit [`ModeSpectrum`].
pub const ANTISYMMETRIC_MODE: usize = 3;
/// Index of the slowest symmetric mode in a two-qubit [`ModeSpectrum`].
pub const SLOWEST_SYMMETRIC_MODE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Symmetric,
    Antisymmetric,
    Unassigned,
}

impl Sector {
    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Symmetric => "S",
            Sector::Antisymmetric => "A",
            Sector::Unassigned => "-",
        }
    }
}

/// Biorthogonal eigenmodes of `H_eff` with sector labels.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    pub spec: SystemSpec,
    pub eig: EigDecomposition,
    pub sector_labels: Vec<Sector>,
    /// `γ_n = −2 Im λ_n` in rad/µs.
    pub decay_constants: Vec<f64>,
}

impl ModeSpectrum {
    pub fn compute(spec: &SystemSpec) -> Result<Self> {
        Self::with_tolerance(spec, DEFECT_TOL)
    }

    /// Two-qubit spectra are assembled sector by sector in the Dicke basis,
    /// which gives exact labels even where the antisymmetric eigenvalue
    /// coincides with a symmetric one. Other sizes use the full matrix.
    pub fn with_tolerance(spec: &SystemSpec, tol: f64) -> Result<Self> {
        spec.validate()?;
        let h = build_h_eff(spec)?;
        let (eig, sector_labels) = if spec.n_qubits == 2 {
            two_qubit_modes(&h, tol)?
        } else {
            let eig = eig_general(&h, tol)?;
            let labels = vec![Sector::Unassigned; eig.dim()];
            (eig, labels)
        };
        let decay_constants = eig.eigenvalues.iter().map(|l| -2.0 * l.im).collect();
        Ok(Self {
            spec: *spec,
            eig,
            sector_labels,
            decay_constants,
        })
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eig.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn is_defective(&self) -> bool {
        self.eig.defect_flag
    }

    /// Slowest-decaying symmetric mode and the antisymmetric mode.
    pub fn subradiant_pair(&self) -> Result<(usize, usize)> {
        let slow = (0..self.dim())
            .filter(|&k| self.sector_labels[k] == Sector::Symmetric)
            .max_by(|&a, &b| self.eig.eigenvalues[a].im.total_cmp(&self.eig.eigenvalues[b].im));
        let anti = self.sector_labels.iter().position(|s| *s == Sector::Antisymmetric);
        match (slow, anti) {
            (Some(s), Some(a)) => Ok((s, a)),
            _ => Err(Error::SectorUnresolved(format!(
                "no symmetric/antisymmetric pair among {} modes",
                self.dim()
            ))),
        }
    }
}

fn two_qubit_modes(h: &ComplexMatrix, tol: f64) -> Result<(EigDecomposition, Vec<Sector>)> {
    let hd = dicke_transform(h)?;
    let leak = (0..3).map(|k| hd[(k, 3)].norm().max(hd[(3, k)].norm())).fold(0.0, f64::max);
    if leak > 1e-12 * hd.frobenius_norm().max(1.0) {
        return Err(Error::SectorUnresolved(format!(
            "antisymmetric state couples to the symmetric sector ({leak:.2e})"
        )));
    }
    let block = hd.block(0, 0, 3, 3);
    let sym = eig_general(&block, tol)?;
    let u = dicke_unitary();
    let embed = |m: &ComplexMatrix, anti: C64| {
        let mut full = ComplexMatrix::zeros(4, 4);
        for c in 0..3 {
            for r in 0..3 {
                full[(r, c)] = m[(r, c)];
            }
        }
        full[(3, 3)] = anti;
        &u * &full
    };
    let right = embed(&sym.right, ONE);
    let left = embed(&sym.left, ONE);
    let mut eigenvalues = sym.eigenvalues.clone();
    eigenvalues.push(hd[(3, 3)]);
    let condition = condition_number(&right).max(sym.condition);
    let eig = EigDecomposition {
        eigenvalues,
        right,
        left,
        condition,
        defect_flag: sym.defect_flag,
    };
    let a = u.column(3);
    let labels = (0..4)
        .map(|k| {
            if inner(&a, &eig.right.column(k)).norm() > 0.999 {
                Sector::Antisymmetric
            } else {
                Sector::Symmetric
            }
        })
        .collect();
    Ok((eig, labels))
}

/// Roots of the depressed cubic `x³ + p x + q` by Cardano's formula.
///
/// `u³ = −q/2 ± √D` takes the sign that avoids cancellation and `v = −p/(3u)`
/// ties the second cube root to the first. All three branches of `u` are
/// evaluated and the one with the smallest maximum residual is returned
/// together with that residual.
pub fn depressed_roots(p: C64, q: C64) -> ([C64; 3], f64) {
    let sq = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let (c1, c2) = (-q / 2.0 + sq, -q / 2.0 - sq);
    let u3 = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let u0 = if u3.norm() > 0.0 { u3.powf(1.0 / 3.0) } else { ZERO };
    let mut best: Option<([C64; 3], f64)> = None;
    for k in 0..3 {
        let u = u0 * omega.powu(k);
        let v = if u.norm() > 0.0 { -p / (3.0 * u) } else { ZERO };
        let x = [u + v, omega * u + omega * omega * v, omega * omega * u + omega * v];
        let res = x.iter().map(|&x| (x * x * x + p * x + q).norm()).fold(0.0, f64::max);
        if best.as_ref().map_or(true, |(_, r)| res < *r) {
            best = Some((x, res));
        }
    }
    best.expect("three branches evaluated")
}

/// Roots of `λ³ + a2 λ² + a1 λ + a0`, in mode order, and the largest residual.
pub fn cubic_roots(a2: C64, a1: C64, a0: C64) -> ([C64; 3], f64) {
    let p = a1 - a2 * a2 / 3.0;
    let q = a2 * a2 * a2 * (2.0 / 27.0) - a1 * a2 / 3.0 + a0;
    let (x, _) = depressed_roots(p, q);
    let roots = x.map(|xi| xi - a2 / 3.0);
    let poly = |l: C64| ((l + a2) * l + a1) * l + a0;
    let res = roots.iter().map(|&l| poly(l).norm()).fold(0.0, f64::max);
    (sort3(roots), res)
}

fn sort3(roots: [C64; 3]) -> [C64; 3] {
    let order = mode_order(&roots);
    [roots[order[0]], roots[order[1]], roots[order[2]]]
}

/// Characteristic polynomial of the symmetric Dicke block in depressed form:
/// `det(λ − B) = x³ + p x + q` with `x = λ − shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricCubic {
    pub shift: C64,
    pub p: C64,
    pub q: C64,
}

impl SymmetricCubic {
    /// Built from the block with its diagonal already shifted by the mean,
    /// which keeps `p` and `q` free of cancellation near the triple root.
    pub fn new(spec: &SystemSpec) -> Self {
        let [d0, d1, d2, _] = dicke_diagonal(spec);
        let shift = (d0 + d1 + d2) / 3.0;
        let (e0, e1, e2) = (d0 - shift, d1 - shift, d2 - shift);
        let s2 = C64::new(2.0 * spec.omega * spec.omega, 0.0);
        let p = e0 * e1 + e0 * e2 + e1 * e2 - s2 * 2.0;
        let q = -(e0 * e1 * e2) + s2 * (e0 + e2);
        Self { shift, p, q }
    }

    /// `D = (q/2)² + (p/3)³`.
    pub fn discriminant(&self) -> C64 {
        self.q * self.q / 4.0 + self.p * self.p * self.p / 27.0
    }

    /// Roots in mode order and the residual `max |P(λ_k)|`.
    pub fn roots(&self) -> ([C64; 3], f64) {
        let (x, res) = depressed_roots(self.p, self.q);
        (sort3(x.map(|xi| xi + self.shift)), res)
    }
}

/// Characteristic-polynomial coefficients `(a2, a1, a0)` of a 3×3 matrix.
pub fn characteristic_cubic(b: &ComplexMatrix) -> (C64, C64, C64) {
    let tr = b[(0, 0)] + b[(1, 1)] + b[(2, 2)];
    let minors = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)] + b[(0, 0)] * b[(2, 2)] - b[(0, 2)] * b[(2, 0)]
        + b[(1, 1)] * b[(2, 2)]
        - b[(1, 2)] * b[(2, 1)];
    let det = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
        - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
    (-tr, minors, -det)
}

/// `(p, q, D)` of the symmetric-sector cubic.
pub fn symmetric_cubic(spec: &SystemSpec) -> (C64, C64, C64) {
    let c = SymmetricCubic::new(spec);
    (c.p, c.q, c.discriminant())
}

/// Closed-form symmetric-sector eigenvalues `λ_1, λ_2, λ_3` (slowest first).
pub fn cardano_symmetric_eigs(spec: &SystemSpec) -> Result<[C64; 3]> {
    spec.validate()?;
    if spec.n_qubits != 2 || spec.gamma_f != 0.0 || spec.delta != 0.0 || spec.j_coupling != 0.0 {
        return Err(Error::NotApplicable(
            "closed-form roots need two qubits with Δ = J = γ_f = 0".into(),
        ));
    }
    let (roots, residual) = SymmetricCubic::new(spec).roots();
    if residual > 1e-8 * spec.gamma_e.powi(3) {
        return Err(Error::BranchFailure { residual });
    }
    Ok(roots)
}

/// Diagonal of `H_eff` in the basis `{|ff>, |S>, |ee>, |A>}`; the only
/// off-diagonal entries are `√2 Ω` between neighbouring symmetric states.
pub fn dicke_diagonal(spec: &SystemSpec) -> [C64; 4] {
    let gsum = spec.gamma_e + spec.gamma_f;
    [
        C64::new(2.0 * spec.delta, -spec.gamma_f),
        C64::new(spec.delta + spec.j_coupling, -gsum * (1.0 + spec.eta) / 2.0),
        C64::new(0.0, -spec.gamma_e),
        C64::new(spec.delta - spec.j_coupling, -gsum * (1.0 - spec.eta) / 2.0),
    ]
}

/// `λ_4 = −J − i(1−η)γ_e/2`.
pub fn antisymmetric_eig(spec: &SystemSpec) -> C64 {
    C64::new(-spec.j_coupling, -(1.0 - spec.eta) * spec.gamma_e / 2.0)
}

/// Drive at which two symmetric-sector modes coalesce.
pub fn ep_drive(eta: f64, gamma_e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) || !(gamma_e > 0.0) {
        return Err(Error::DomainError(format!("eta = {eta}, gamma_e = {gamma_e}")));
    }
    if eta == 0.0 {
        return Ok(gamma_e / 4.0);
    }
    let g2 = gamma_e * gamma_e;
    let e2 = eta * eta;
    // Q / γ⁶ with the leading cancellation of 24√3 (27+η²)^{3/2} − 5832 done analytically.
    let q_red = e2 * (5832.0 * (1.5 * (e2 / 27.0).ln_1p()).exp_m1() + e2 * e2 + 540.0 * e2);
    let q13 = g2 * q_red.cbrt();
    let radicand = g2 * (12.0 + e2) / 192.0 + g2 * g2 * e2 * (e2 - 216.0) / (192.0 * q13) + q13 / 192.0;
    if radicand < -1e-12 * g2 {
        return Err(Error::DomainError(format!("negative radicand {radicand:e} at eta = {eta}")));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// `Ω_c = (γ_e/2√2)√(1−η²)`.
pub fn critical_drive(eta: f64, gamma_e: f64) -> f64 {
    gamma_e / (2.0 * std::f64::consts::SQRT_2) * (1.0 - eta * eta).max(0.0).sqrt()
}

/// `|Im λ_4 − Im λ_1|` between the slowest symmetric and the antisymmetric mode.
pub fn dissipative_gap(ms: &ModeSpectrum) -> Result<f64> {
    let (s, a) = ms.subradiant_pair()?;
    Ok((ms.eig.eigenvalues[a].im - ms.eig.eigenvalues[s].im).abs())
}

/// Signed weak-drive approximation `4(Ω² − Ω_c²)/(γ_e(1+η))` of `Im λ_4 − Im λ_1`.
///
/// Only valid for `Ω ≪ γ_e`; never used in place of the exact spectrum.
pub fn weak_drive_gap(omega: f64, eta: f64, gamma_e: f64) -> f64 {
    let oc = critical_drive(eta, gamma_e);
    4.0 * (omega * omega - oc * oc) / (gamma_e * (1.0 + eta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyKind {
    ExceptionalPoint,
    DiabolicCrossing,
}

impl DegeneracyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DegeneracyKind::ExceptionalPoint => "exceptional",
            DegeneracyKind::DiabolicCrossing => "diabolic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyReport {
    pub omega_value: f64,
    pub kind: DegeneracyKind,
    /// Mode indices (0-based, see the module docs) sharing the eigenvalue.
    pub modes_involved: Vec<usize>,
    pub eigenvalue: C64,
    /// `|Δλ|` one grid step below and above the degeneracy.
    pub gap_before: f64,
    pub gap_after: f64,
    /// Largest `|<r_a|r_b>|` among the unit right eigenvectors of the coalescing pair.
    pub eigenvector_overlap: f64,
}

/// Eigenvector distance below which a degeneracy counts as coalescence.
pub const COALESCENCE_TOL: f64 = 1e-4;

/// Locates eigenvalue coincidences of the two-qubit spectrum along an Ω sweep.
///
/// Symmetric-sector roots come from the characteristic cubic of the Dicke
/// block, so symmetric–symmetric and symmetric–antisymmetric distances are
/// smooth, label-free functions of Ω. Grid minima of each are polished by
/// golden-section search; pairs that are degenerate on the whole grid are
/// skipped as structural rather than parametric.
pub fn find_degeneracies(
    spec_template: &SystemSpec,
    omega_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<DegeneracyReport>> {
    spec_template.validate()?;
    if spec_template.n_qubits != 2 {
        return Err(Error::NotApplicable(
            "degeneracy search is implemented for two qubits".into(),
        ));
    }
    let g = spec_template.gamma_e;
    let (lo, hi) = omega_range;
    if !(lo >= 0.0 && hi <= 10.0 * g && lo <= hi) {
        return Err(Error::DomainError(format!("omega range [{lo}, {hi}]")));
    }
    let tol = 1e-6 * g;
    let points = resolution.max(3);
    let grid: Vec<f64> = (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect();
    let h = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    let sectors = SectorRoots::new(spec_template);

    let mut reports = Vec::new();
    for kind in [PairKind::SymSym, PairKind::SymAnti] {
        let f = |w: f64| sectors.pair_distance(w, kind);
        let values: Vec<f64> = grid.iter().map(|&w| f(w)).collect();
        if values.iter().all(|v| *v < tol) {
            continue;
        }
        for k in 0..points {
            let left = if k > 0 { values[k - 1] } else { f64::INFINITY };
            let right = if k + 1 < points { values[k + 1] } else { f64::INFINITY };
            if !(values[k] <= left && values[k] < right) && !(values[k] < left && values[k] <= right) {
                continue;
            }
            let a = if k > 0 { grid[k - 1] } else { grid[k] };
            let b = if k + 1 < points { grid[k + 1] } else { grid[k] };
            let w = if a < b { golden_min(&f, a, b) } else { grid[k] };
            let w = if f(grid[k]) <= f(w) { grid[k] } else { w };
            let d = f(w);
            let (before, after) = (f((w - h).max(lo)), f((w + h).min(hi)));
            if d >= tol || (before < tol && after < tol) {
                continue;
            }
            let report = sectors.classify(w, kind, tol, before, after);
            reports.push(report);
        }
    }
    reports.sort_by(|a, b| a.omega_value.total_cmp(&b.omega_value));
    // Merge reports at the same drive: union of modes, an EP dominates.
    let mut merged: Vec<DegeneracyReport> = Vec::new();
    for r in reports {
        if let Some(last) = merged.last_mut() {
            if (last.omega_value - r.omega_value).abs() <= 1e-8 * g && (last.eigenvalue - r.eigenvalue).norm() < tol {
                for m in r.modes_involved {
                    if !last.modes_involved.contains(&m) {
                        last.modes_involved.push(m);
                    }
                }
                last.modes_involved.sort_unstable();
                if r.kind == DegeneracyKind::ExceptionalPoint {
                    last.kind = r.kind;
                    last.eigenvector_overlap = last.eigenvector_overlap.max(r.eigenvector_overlap);
                }
                continue;
            }
        }
        merged.push(r);
    }
    Ok(merged)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    SymSym,
    SymAnti,
}

/// Symmetric-block roots and right eigenvectors as functions of Ω.
struct SectorRoots {
    template: SystemSpec,
}

impl SectorRoots {
    fn new(template: &SystemSpec) -> Self {
        Self { template: *template }
    }

    fn roots(&self, omega: f64) -> ([C64; 3], C64) {
        let spec = self.template.with_omega(omega);
        (SymmetricCubic::new(&spec).roots().0, dicke_diagonal(&spec)[3])
    }

    fn pair_distance(&self, omega: f64, kind: PairKind) -> f64 {
        let (r, anti) = self.roots(omega);
        match kind {
            PairKind::SymSym => [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(i, j)| (r[i] - r[j]).norm())
                .fold(f64::INFINITY, f64::min),
            PairKind::SymAnti => r.iter().map(|x| (x - anti).norm()).fold(f64::INFINITY, f64::min),
        }
    }

    fn classify(&self, omega: f64, kind: PairKind, tol: f64, before: f64, after: f64) -> DegeneracyReport {
        let (r, anti) = self.roots(omega);
        let spec = self.template.with_omega(omega);
        let b = dicke_transform(&build_h_eff(&spec).expect("validated template"))
            .expect("4x4")
            .block(0, 0, 3, 3);
        let (ia, ib, value) = match kind {
            PairKind::SymSym => {
                let (i, j) = [(0, 1), (0, 2), (1, 2)]
                    .into_iter()
                    .min_by(|&(i, j), &(k, l)| (r[i] - r[j]).norm().total_cmp(&(r[k] - r[l]).norm()))
                    .expect("three pairs");
                (i, j, (r[i] + r[j]) / 2.0)
            }
            PairKind::SymAnti => {
                let i = (0..3)
                    .min_by(|&i, &j| (r[i] - anti).norm().total_cmp(&(r[j] - anti).norm()))
                    .expect("three roots");
                (i, ANTISYMMETRIC_MODE, (r[i] + anti) / 2.0)
            }
        };
        // Eigenvectors of the block at the refined drive, paired with the roots.
        let vectors = eig_general(&b, DEFECT_TOL).ok().map(|dec| {
            let mut used = [false; 3];
            (0..3)
                .map(|k| {
                    let col = (0..3)
                        .filter(|&c| !used[c])
                        .min_by(|&x, &y| {
                            (dec.eigenvalues[x] - r[k]).norm().total_cmp(&(dec.eigenvalues[y] - r[k]).norm())
                        })
                        .expect("a free column");
                    used[col] = true;
                    let mut v = dec.right.column(col);
                    v.push(ZERO);
                    v
                })
                .collect::<Vec<_>>()
        });
        let vec_of = |k: usize| -> Vec<C64> {
            match (&vectors, k) {
                (_, ANTISYMMETRIC_MODE) => vec![ZERO, ZERO, ZERO, ONE],
                (Some(v), _) => v[k].clone(),
                (None, _) => vec![ZERO; 4],
            }
        };
        let overlap = inner(&vec_of(ia), &vec_of(ib)).norm() / (norm(&vec_of(ia)) * norm(&vec_of(ib))).max(f64::MIN_POSITIVE);
        let distance = (2.0 - 2.0 * overlap.min(1.0)).max(0.0).sqrt();
        let kind = if distance < COALESCENCE_TOL {
            DegeneracyKind::ExceptionalPoint
        } else {
            DegeneracyKind::DiabolicCrossing
        };
        let mut all: Vec<C64> = r.to_vec();
        all.push(anti);
        let modes_involved = (0..4).filter(|&k| (all[k] - value).norm() < tol).collect();
        DegeneracyReport {
            omega_value: omega,
            kind,
            modes_involved,
            eigenvalue: value,
            gap_before: before,
            gap_after: after,
            eigenvector_overlap: overlap,
        }
    }
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Initial-state overlaps `c_mn = <ψ_m^L|ρ(0)|ψ_n^R>` with the eigenvalues
/// needed to propagate them.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    pub c: ComplexMatrix,
    pub eigenvalues: Vec<C64>,
}

/// Normalized mode weights at one time under both conventions in use.
#[derive(Debug, Clone)]
pub struct ModeWeights {
    /// `|c_mn(t)| / Σ_m c_mm(t)`.
    pub by_diagonal: Vec<Vec<f64>>,
    /// `|c_mn(t)| / Σ_mn |c_mn(t)|`.
    pub by_total: Vec<Vec<f64>>,
}

impl OverlapMatrix {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn trace(&self) -> C64 {
        self.c.trace()
    }

    /// `c_mn(t) e^{−s t}` where `c_mn(t) = c_mn(0) e^{−i(λ_m − λ_n*) t}` and `s`
    /// is the largest growth exponent among populated diagonal modes. The
    /// common factor cancels in every normalized weight.
    pub fn scaled_at(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let s = (0..n)
            .filter(|&m| self.c[(m, m)].norm() > 1e-300)
            .map(|m| 2.0 * self.eigenvalues[m].im)
            .fold(f64::NEG_INFINITY, f64::max);
        let s = if s.is_finite() { s } else { 0.0 };
        ComplexMatrix::from_fn(n, n, |m, k| {
            let expo = -I * (self.eigenvalues[m] - self.eigenvalues[k].conj()) * t - s * t;
            self.c[(m, k)] * expo.exp()
        })
    }

    pub fn weights_at(&self, t: f64) -> ModeWeights {
        let c = self.scaled_at(t);
        let n = self.dim();
        let diag: f64 = (0..n).map(|m| c[(m, m)].re).sum();
        let total: f64 = c.as_slice().iter().map(|z| z.norm()).sum();
        let table = |den: f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|m| (0..n).map(|k| c[(m, k)].norm() / den).collect())
                .collect()
        };
        ModeWeights {
            by_diagonal: table(diag),
            by_total: table(total),
        }
    }
}

pub fn mode_overlaps(ms: &ModeSpectrum, rho0: &DensityMatrix) -> Result<OverlapMatrix> {
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
    let c = &(&ms.eig.left.adjoint() * rho0.matrix()) * &ms.eig.right;
    Ok(OverlapMatrix {
        c,
        eigenvalues: ms.eig.eigenvalues.clone(),
    })
}

/// Symmetric-sector overlaps for `[p|f><f| + (1−p)|e><e|]^{⊗2}` in the gauge
/// where every right eigenvector has unit `|S>` component.
pub fn closed_form_overlap(p: f64, omega: f64, gamma_e: f64, lambda_m: C64, lambda_n: C64) -> C64 {
    let w2 = 2.0 * omega * omega;
    let ig = I * gamma_e;
    let s_m = ONE + w2 * (ONE / (lambda_m * lambda_m) + ONE / ((ig + lambda_m) * (ig + lambda_m)));
    let num = C64::new(p * (1.0 - p), 0.0)
        + w2 * (p * p / (lambda_m * lambda_n) + (1.0 - p) * (1.0 - p) / ((ig + lambda_m) * (ig + lambda_n)));
    num / s_m
}

/// Re-expresses `c_mn` in the unit-`|S>`-component gauge of
/// [`closed_form_overlap`]: `c'_mn = α_m c_mn / α_n` with `α_n = <S|ψ_n^R>`.
pub fn regauge_to_symmetric_component(ms: &ModeSpectrum, ov: &OverlapMatrix) -> ComplexMatrix {
    let s = dicke_unitary().column(1);
    let alpha: Vec<C64> = (0..ms.dim()).map(|k| inner(&s, &ms.eig.right.column(k))).collect();
    ComplexMatrix::from_fn(ms.dim(), ms.dim(), |m, n| {
        if alpha[m].norm() < 1e-300 || alpha[n].norm() < 1e-300 {
            ov.c[(m, n)]
        } else {
            alpha[m] * ov.c[(m, n)] / alpha[n]
        }
    })
}

/// Sorts eigenvalues into mode order; used by callers comparing sets.
pub fn sorted_modes(values: &[C64]) -> Vec<C64> {
    mode_order(values).into_iter().map(|k| values[k]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_initial_state, InitialStateSpec};

    fn two(omega: f64, eta: f64) -> SystemSpec {
        SystemSpec::driven(2, omega, eta, 6.0).unwrap()
    }

    #[test]
    fn undriven_roots_are_the_bare_decay_rates() {
        let r = cardano_symmetric_eigs(&two(0.0, 0.1)).unwrap();
        let expected = [ZERO, C64::new(0.0, -3.3), C64::new(0.0, -6.0)];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn cardano_matches_block_eigensolver() {
        let spec = two(3.0, 0.1);
        let r = cardano_symmetric_eigs(&spec).unwrap();
        let ms = ModeSpectrum::compute(&spec).unwrap();
        for k in 0..3 {
            assert!((r[k] - ms.eigenvalues()[k]).norm() < 1e-9 * 6.0);
        }
    }

    #[test]
    fn cardano_rejects_unsupported_specs() {
        assert!(matches!(
            cardano_symmetric_eigs(&two(1.0, 0.1).with_j(0.2)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn local_dissipation_ep_is_a_triple_root() {
        let r = cardano_symmetric_eigs(&two(1.5, 0.0)).unwrap();
        for x in r {
            assert!((x - C64::new(0.0, -3.0)).norm() < 1e-7, "{x}");
        }
        assert!((antisymmetric_eig(&two(1.5, 0.0)) - C64::new(0.0, -3.0)).norm() < 1e-15);
    }

    #[test]
    fn antisymmetric_values() {
        assert!((antisymmetric_eig(&two(0.0, 0.1)) - C64::new(0.0, -2.7)).norm() < 1e-14);
        assert_eq!(antisymmetric_eig(&two(0.0, 1.0)).norm(), 0.0);
        let j = two(0.0, 0.1).with_j(1.0);
        assert!((antisymmetric_eig(&j) - C64::new(-1.0, -2.7)).norm() < 1e-14);
        let ms = ModeSpectrum::compute(&j).unwrap();
        assert!((ms.eigenvalues()[ANTISYMMETRIC_MODE] - antisymmetric_eig(&j)).norm() < 1e-14);
    }

    #[test]
    fn ep_drive_values() {
        assert_eq!(ep_drive(0.0, 6.0).unwrap(), 1.5);
        let eta: f64 = 0.01;
        let weak = 1.5 * (1.0 - 1.5 * (eta / 2.0).powf(2.0 / 3.0));
        let w = ep_drive(eta, 6.0).unwrap();
        assert!(((w - weak) / weak).abs() < 0.02, "{w} vs {weak}");
        for eta in [0.001, 0.01, 0.1, 0.3, 0.5, 0.9, 1.0] {
            let w = ep_drive(eta, 6.0).unwrap();
            let (_, _, d) = symmetric_cubic(&two(w, eta));
            assert!(d.norm() <= 1e-8 * 6f64.powi(6), "eta {eta}: D = {d}");
        }
        assert!(ep_drive(1.5, 6.0).is_err());
    }

    #[test]
    fn critical_drive_values() {
        assert!((critical_drive(0.0, 6.0) - 6.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert_eq!(critical_drive(1.0, 6.0), 0.0);
        assert!((critical_drive(0.1, 6.0) - 2.1107).abs() < 1e-4);
        assert!((critical_drive(0.5, 6.0) - 1.8371).abs() < 1e-4);
    }

    #[test]
    fn gap_closes_at_critical_drive() {
        for eta in [0.0, 0.1, 0.5, 0.9] {
            let ms = ModeSpectrum::compute(&two(critical_drive(eta, 6.0), eta)).unwrap();
            assert!(dissipative_gap(&ms).unwrap() <= 1e-8 * 6.0, "eta {eta}");
        }
        let ms = ModeSpectrum::compute(&two(0.0, 0.5)).unwrap();
        assert!((dissipative_gap(&ms).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn weak_drive_gap_approximates_exact_gap() {
        let (eta, omega) = (0.9, 0.3);
        let ms = ModeSpectrum::compute(&two(omega, eta)).unwrap();
        let (s, a) = ms.subradiant_pair().unwrap();
        let exact = ms.eigenvalues()[a].im - ms.eigenvalues()[s].im;
        let approx = weak_drive_gap(omega, eta, 6.0);
        assert!(((exact - approx) / approx).abs() < 0.05, "{exact} vs {approx}");
    }

    #[test]
    fn dicke_diagonal_matches_transformed_hamiltonian() {
        let spec = two(1.3, 0.4).with_j(0.7).with_delta(-0.3).with_gamma_f(0.9);
        let hd = dicke_transform(&build_h_eff(&spec).unwrap()).unwrap();
        let d = dicke_diagonal(&spec);
        for k in 0..4 {
            assert!((hd[(k, k)] - d[k]).norm() < 1e-14, "{k}");
        }
        assert!((hd[(0, 1)] - C64::new(2f64.sqrt() * 1.3, 0.0)).norm() < 1e-14);
        assert!(hd[(0, 2)].norm() < 1e-15);
    }

    #[test]
    fn sector_labels() {
        let ms = ModeSpectrum::compute(&two(2.0, 0.3)).unwrap();
        assert_eq!(
            ms.sector_labels,
            vec![Sector::Symmetric, Sector::Symmetric, Sector::Symmetric, Sector::Antisymmetric]
        );
        assert!(ms.decay_constants.iter().all(|g| *g >= -1e-10));
        let one = ModeSpectrum::compute(&SystemSpec { n_qubits: 1, ..two(1.0, 0.0) }).unwrap();
        assert!(matches!(dissipative_gap(&one), Err(Error::SectorUnresolved(_))));
    }

    #[test]
    fn local_dissipation_ep_spectrum_is_defective() {
        let ms = ModeSpectrum::compute(&two(1.5, 0.0)).unwrap();
        assert!(ms.is_defective());
    }

    #[test]
    fn overlaps_of_maximally_mixed_state() {
        let ms = ModeSpectrum::compute(&two(3.0, 0.1)).unwrap();
        let rho = make_initial_state(&InitialStateSpec::MaximallyMixed, 2).unwrap();
        let ov = mode_overlaps(&ms, &rho).unwrap();
        assert!(ov.c.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-12);
    }

    #[test]
    fn overlaps_match_closed_form() {
        let spec = two(2.4, 0.3);
        let ms = ModeSpectrum::compute(&spec).unwrap();
        let p = 0.8;
        let rho = make_initial_state(&InitialStateSpec::DiagonalProduct { p }, 2).unwrap();
        let ov = mode_overlaps(&ms, &rho).unwrap();
        assert!((ov.trace() - ONE).norm() < 1e-12);
        assert!((ov.c[(3, 3)].re - p * (1.0 - p)).abs() < 1e-14);
        let g = regauge_to_symmetric_component(&ms, &ov);
        let l = ms.eigenvalues();
        for m in 0..3 {
            for n in 0..3 {
                let cf = closed_form_overlap(p, 2.4, 6.0, l[m], l[n]);
                assert!((g[(m, n)] - cf).norm() < 1e-10, "({m},{n}) {} vs {cf}", g[(m, n)]);
            }
            assert!(ov.c[(3, m)].norm() < 1e-12 && ov.c[(m, 3)].norm() < 1e-12);
        }
    }

    #[test]
    fn degeneracies_with_weak_collective_dissipation() {
        let reports = find_degeneracies(&two(0.0, 0.1), (0.0, 4.0), 400).unwrap();
        let ds: Vec<_> = reports.iter().filter(|r| r.kind == DegeneracyKind::DiabolicCrossing).collect();
        let ep: Vec<_> = reports.iter().filter(|r| r.kind == DegeneracyKind::ExceptionalPoint).collect();
        assert_eq!(ds.len(), 1, "{reports:?}");
        assert!((ds[0].omega_value - critical_drive(0.1, 6.0)).abs() < 1e-6 * 6.0);
        assert_eq!(ds[0].modes_involved, vec![0, 3]);
        assert_eq!(ep.len(), 1, "{reports:?}");
        assert!(ep[0].omega_value < 1.5);
        assert!((ep[0].omega_value - ep_drive(0.1, 6.0).unwrap()).abs() < 1e-6);
        assert!(!ep[0].modes_involved.contains(&3));
    }

    #[test]
    fn local_dissipation_gives_one_fourfold_point() {
        let reports = find_degeneracies(&two(0.0, 0.0), (0.0, 4.0), 400).unwrap();
        assert_eq!(reports.len(), 1, "{reports:?}");
        assert_eq!(reports[0].kind, DegeneracyKind::ExceptionalPoint);
        assert!((reports[0].omega_value - 1.5).abs() < 1e-8 * 6.0);
        assert_eq!(reports[0].modes_involved, vec![0, 1, 2, 3]);
    }

    #[test]
    fn fully_collective_degeneracy_sits_at_zero_drive() {
        let reports = find_degeneracies(&two(0.0, 1.0), (0.0, 4.0), 200).unwrap();
        assert!(reports
            .iter()
            .any(|r| r.omega_value.abs() < 1e-8 && r.kind == DegeneracyKind::DiabolicCrossing));
    }

    #[test]
    fn mode_weights_conventions() {
        let ms = ModeSpectrum::compute(&two(3.0, 0.1)).unwrap();
        let rho = make_initial_state(&InitialStateSpec::MaximallyMixed, 2).unwrap();
        let ov = mode_overlaps(&ms, &rho).unwrap();
        let w0 = ov.weights_at(0.0);
        for m in 0..4 {
            assert!((w0.by_diagonal[m][m] - 0.25).abs() < 1e-12);
            assert!((w0.by_total[m][m] - 0.25).abs() < 1e-12);
        }
        let late = ov.weights_at(50.0);
        assert!(late.by_diagonal[3][3] > 0.999);
    }
}
