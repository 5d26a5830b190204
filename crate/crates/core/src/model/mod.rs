//! Hamiltonians, generators, Dicke transform and initial states.
//!
//! Each qubit carries the two-level basis `{|f>, |e>}` (index 0 = f, 1 = e);
//! qubit 1 is the leftmost tensor factor, so for two qubits the basis order is
//! `ff, fe, ef, ee`. Density matrices are vectorized row by row
//! (`vec ρ = (ρ_11, ρ_12, …)`), which turns `A ρ B` into `(A ⊗ Bᵀ) vec ρ`.

pub mod reference;

use crate::error::{Error, Result};
use crate::numkernel::{eigh, ComplexMatrix, C64, I, ONE, ZERO};

pub const MAX_QUBITS: usize = 6;
/// Largest qubit count for which the vectorized generator with jumps is built.
pub const MAX_JUMP_QUBITS: usize = 3;

/// Physical parameters, all rates in rad/µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub n_qubits: usize,
    pub omega: f64,
    pub delta: f64,
    pub j_coupling: f64,
    pub gamma_e: f64,
    pub gamma_f: f64,
    pub eta: f64,
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self {
            n_qubits: 2,
            omega: 0.0,
            delta: 0.0,
            j_coupling: 0.0,
            gamma_e: 6.0,
            gamma_f: 0.0,
            eta: 0.0,
        }
    }
}

impl SystemSpec {
    /// Uniformly driven qubits with `Δ = J = γ_f = 0`.
    pub fn driven(n_qubits: usize, omega: f64, eta: f64, gamma_e: f64) -> Result<Self> {
        Self {
            n_qubits,
            omega,
            eta,
            gamma_e,
            ..Self::default()
        }
        .validated()
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j_coupling = j;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma_f(mut self, gamma_f: f64) -> Self {
        self.gamma_f = gamma_f;
        self
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega", self.omega),
            ("delta", self.delta),
            ("j_coupling", self.j_coupling),
            ("gamma_e", self.gamma_e),
            ("gamma_f", self.gamma_f),
            ("eta", self.eta),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSpec(format!("{name} must be finite")));
        }
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::InvalidSpec(format!(
                "n_qubits = {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.gamma_e <= 0.0 {
            return Err(Error::InvalidSpec("gamma_e must be positive".into()));
        }
        if self.gamma_f < 0.0 {
            return Err(Error::InvalidSpec("gamma_f must be non-negative".into()));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidSpec("omega must be non-negative".into()));
        }
        let eta_min = if self.n_qubits >= 2 {
            -1.0 / (self.n_qubits as f64 - 1.0)
        } else {
            -1.0
        };
        if self.eta > 1.0 || self.eta < eta_min {
            return Err(Error::InvalidSpec(format!(
                "eta = {} outside [{eta_min}, 1] (collective rate matrix must be positive semidefinite)",
                self.eta
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Collective rate matrix `Γ_jk = γ (δ_jk + η (1 - δ_jk))` for channel rate `γ`.
    pub fn rate_matrix(&self, gamma: f64) -> Vec<Vec<f64>> {
        let n = self.n_qubits;
        (0..n)
            .map(|j| (0..n).map(|k| if j == k { gamma } else { self.eta * gamma }).collect())
            .collect()
    }
}

/// Single-qubit operators in the `{|f>, |e>}` basis.
fn ket_bra(row: usize, col: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(row, col)] = ONE;
    m
}

const F: usize = 0;
const E: usize = 1;

/// `|f><e|`: raises an e-excitation back to f (and lowers the f population count).
pub fn f_raise() -> ComplexMatrix {
    ket_bra(F, E)
}

/// `|e><f|`: the f→e decay operator.
pub fn f_lower() -> ComplexMatrix {
    ket_bra(E, F)
}

pub fn proj_f() -> ComplexMatrix {
    ket_bra(F, F)
}

pub fn proj_e() -> ComplexMatrix {
    ket_bra(E, E)
}

/// Embeds a single-qubit operator on qubit `site` (0-based, leftmost first).
pub fn site_operator(n_qubits: usize, site: usize, op: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for q in 0..n_qubits {
        out = if q == site {
            out.kron(op)
        } else {
            out.kron(&ComplexMatrix::identity(2))
        };
    }
    out
}

/// Flip-flop operator `Σ_{j≠k} |f><e|_j |e><f|_k`, i.e. exchange of a single
/// excitation between any two qubits.
pub fn exchange_operator(n_qubits: usize) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for j in 0..n_qubits {
        for k in 0..n_qubits {
            if j == k {
                continue;
            }
            let a = site_operator(n_qubits, j, &f_raise());
            let b = site_operator(n_qubits, k, &f_lower());
            out = &out + &(&a * &b);
        }
    }
    out
}

fn number_sum(n_qubits: usize, proj: &ComplexMatrix) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    (0..n_qubits).fold(ComplexMatrix::zeros(dim, dim), |acc, j| {
        &acc + &site_operator(n_qubits, j, proj)
    })
}

/// Hermitian part `H_sys` of the effective Hamiltonian.
pub fn build_h_sys(spec: &SystemSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    let n = spec.n_qubits;
    let dim = spec.dim();
    let sigma_x = &f_raise() + &f_lower();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for j in 0..n {
        h = &h + &site_operator(n, j, &proj_f()).scale_real(spec.delta);
        h = &h + &site_operator(n, j, &sigma_x).scale_real(spec.omega);
    }
    if n > 1 && spec.j_coupling != 0.0 {
        h = &h + &exchange_operator(n).scale_real(spec.j_coupling);
    }
    Ok(h)
}

/// `Σ_jk Γ^e_jk L_j^† L_k` restricted to the {e,f} manifold: the rate operator
/// whose expectation value is the instantaneous loss of population to |g>.
pub fn leakage_operator(spec: &SystemSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    Ok(channel_rate_operator(spec, spec.gamma_e, &proj_e()))
}

/// Rate operator of the f→e channel, `Σ_jk Γ^f_jk L_j^{f†} L_k^f`.
pub fn cascade_rate_operator(spec: &SystemSpec) -> Result<ComplexMatrix> {
    spec.validate()?;
    Ok(channel_rate_operator(spec, spec.gamma_f, &proj_f()))
}

fn channel_rate_operator(spec: &SystemSpec, gamma: f64, proj: &ComplexMatrix) -> ComplexMatrix {
    let n = spec.n_qubits;
    let local = number_sum(n, proj).scale_real(gamma);
    if n == 1 || spec.eta == 0.0 || gamma == 0.0 {
        return local;
    }
    &local + &exchange_operator(n).scale_real(spec.eta * gamma)
}

/// Effective non-Hermitian Hamiltonian
/// `H_sys − (i/2)(K_e + K_f)` with `K_α` the collective rate operators.
pub fn build_h_eff(spec: &SystemSpec) -> Result<ComplexMatrix> {
    let h = build_h_sys(spec)?;
    let k = &leakage_operator(spec)? + &cascade_rate_operator(spec)?;
    Ok(&h + &k.scale(C64::new(0.0, -0.5)))
}

/// Vectorized generator of `ρ̇ = −i(H ρ − ρ H^†) [+ f→e jumps]`.
///
/// The e→g jumps leave the simulated manifold; their effect is the trace loss
/// `Tr(K_e ρ)` reported by [`leakage_operator`].
pub fn build_liouvillian(spec: &SystemSpec, include_jumps: bool) -> Result<ComplexMatrix> {
    spec.validate()?;
    if include_jumps && spec.n_qubits > MAX_JUMP_QUBITS {
        return Err(Error::DimensionTooLarge(format!(
            "generator with jumps for {} qubits",
            spec.n_qubits
        )));
    }
    let h = build_h_eff(spec)?;
    let id = ComplexMatrix::identity(spec.dim());
    let mut gen = (&h.kron(&id) - &id.kron(&h.conj())).scale(-I);
    if include_jumps && spec.gamma_f > 0.0 {
        gen = &gen + &cascade_jump_superoperator(spec);
    }
    Ok(gen)
}

/// `Σ_jk Γ^f_jk L_j ρ L_k^†` as a superoperator with `L = |e><f|`.
fn cascade_jump_superoperator(spec: &SystemSpec) -> ComplexMatrix {
    let n = spec.n_qubits;
    let rates = spec.rate_matrix(spec.gamma_f);
    let ops: Vec<ComplexMatrix> = (0..n).map(|j| site_operator(n, j, &f_lower())).collect();
    let d = spec.dim() * spec.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for j in 0..n {
        for k in 0..n {
            if rates[j][k] == 0.0 {
                continue;
            }
            // L_j ρ L_k^† → L_j ⊗ (L_k^†)ᵀ = L_j ⊗ conj(L_k)
            out = &out + &ops[j].kron(&ops[k].conj()).scale_real(rates[j][k]);
        }
    }
    out
}

/// Direct (unvectorized) action of the generator on a matrix.
pub fn apply_generator(spec: &SystemSpec, rho: &ComplexMatrix, include_jumps: bool) -> Result<ComplexMatrix> {
    let h = build_h_eff(spec)?;
    let hr = &h * rho;
    let rh = rho * &h.adjoint();
    let mut out = (&hr - &rh).scale(-I);
    if include_jumps && spec.gamma_f > 0.0 {
        let n = spec.n_qubits;
        let rates = spec.rate_matrix(spec.gamma_f);
        let ops: Vec<ComplexMatrix> = (0..n).map(|j| site_operator(n, j, &f_lower())).collect();
        for j in 0..n {
            for k in 0..n {
                let term = &(&ops[j] * rho) * &ops[k].adjoint();
                out = &out + &term.scale_real(rates[j][k]);
            }
        }
    }
    Ok(out)
}

/// Row-major vectorization.
pub fn vectorize(rho: &ComplexMatrix) -> Vec<C64> {
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64], dim: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::from_vec(dim, dim, v.to_vec())
}

/// Columns `|ff>, |S>, |ee>, |A>` with `|S>,|A> = (|fe> ± |ef>)/√2`.
pub fn dicke_unitary() -> ComplexMatrix {
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_rows(&[
        vec![ONE, ZERO, ZERO, ZERO],
        vec![ZERO, s, ZERO, s],
        vec![ZERO, s, ZERO, -s],
        vec![ZERO, ZERO, ONE, ZERO],
    ])
    .expect("static shape")
}

/// `U^† H U` in the basis `{|ff>, |S>, |ee>, |A>}`.
pub fn dicke_transform(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h.rows() != 4 || h.cols() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "Dicke transform needs a 4x4 matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let u = dicke_unitary();
    Ok(&(&u.adjoint() * h) * &u)
}

/// Permutation operator exchanging qubits `a` and `b`.
pub fn swap_operator(n_qubits: usize, a: usize, b: usize) -> ComplexMatrix {
    let dim = 1usize << n_qubits;
    let bit = |q: usize| n_qubits - 1 - q;
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        let ba = (c >> bit(a)) & 1;
        let bb = (c >> bit(b)) & 1;
        let mut img = c & !(1 << bit(a)) & !(1 << bit(b));
        img |= bb << bit(a);
        img |= ba << bit(b);
        if r == img {
            ONE
        } else {
            ZERO
        }
    })
}

/// Hermitian, unit-trace, positive semidefinite state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Validates all invariants, including positivity.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() || !mat.rows().is_power_of_two() {
            return Err(Error::InvalidState(format!(
                "{}x{} is not a qubit-register shape",
                mat.rows(),
                mat.cols()
            )));
        }
        let herm = mat.hermitian_deviation();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("hermiticity violated by {herm:.3e}")));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from one")));
        }
        let (w, _) = eigh(&mat);
        if w[0] < -PSD_TOL {
            return Err(Error::PositivityViolation(w[0]));
        }
        Ok(Self { mat })
    }

    /// Hermitizes and divides by the trace; positivity is not re-checked.
    pub fn renormalized(mat: &ComplexMatrix) -> Result<Self> {
        let h = mat.hermitian_part();
        let tr = h.trace().re;
        if !(tr.abs() > 1e-300) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize trace {tr}")));
        }
        Ok(Self {
            mat: h.scale_real(1.0 / tr),
        })
    }

    /// Pure state `|ψ><ψ|/<ψ|ψ>`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        Self::renormalized(&ComplexMatrix::outer(psi, psi))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }
}

/// How to prepare the initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialStateSpec {
    /// `[p |f><f| + (1−p) |e><e|]^{⊗n}`
    DiagonalProduct { p: f64 },
    MaximallyMixed,
    /// Single-qubit `[[p, c], [c*, 1−p]]`, repeated on every qubit.
    SingleQubitCoherent { p: f64, c: C64 },
    ExplicitMatrix(ComplexMatrix),
}

pub fn make_initial_state(kind: &InitialStateSpec, n_qubits: usize) -> Result<DensityMatrix> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::InvalidSpec(format!("n_qubits = {n_qubits}")));
    }
    let dim = 1usize << n_qubits;
    let check_p = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(())
        } else {
            Err(Error::InvalidState(format!("population p = {p} outside [0, 1]")))
        }
    };
    let mat = match kind {
        InitialStateSpec::DiagonalProduct { p } => {
            check_p(*p)?;
            let q = ComplexMatrix::diagonal(&[C64::new(*p, 0.0), C64::new(1.0 - p, 0.0)]);
            tensor_power(&q, n_qubits)
        }
        InitialStateSpec::MaximallyMixed => ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        InitialStateSpec::SingleQubitCoherent { p, c } => {
            check_p(*p)?;
            let bound = (p * (1.0 - p)).sqrt();
            if c.norm() > bound * (1.0 + 1e-12) + 1e-15 {
                return Err(Error::PositivityViolation(p * (1.0 - p) - c.norm_sqr()));
            }
            let q = ComplexMatrix::from_rows(&[
                vec![C64::new(*p, 0.0), *c],
                vec![c.conj(), C64::new(1.0 - p, 0.0)],
            ])?;
            tensor_power(&q, n_qubits)
        }
        InitialStateSpec::ExplicitMatrix(m) => {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "explicit state is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            m.clone()
        }
    };
    DensityMatrix::new(mat)
}

fn tensor_power(q: &ComplexMatrix, n: usize) -> ComplexMatrix {
    (1..n).fold(q.clone(), |acc, _| acc.kron(q))
}
