//! Brute-force reference engine on a truncated qubit (x) Fock space.
//!
//! The Hamiltonian `H = (Omega/omega) sigma_z + a^dag a + lambda sigma_z (a + a^dag)`
//! (units of `omega`) is diagonalized once; `U(tau) = V exp(-i E tau) V^dag`.
//! Nothing in this module uses the analytic expressions of
//! [`crate::closed_form`].
//!
//! Basis ordering: index `k * n_fock + m` for qubit state `k` (0 is the
//! `sigma_z = +1` state) and oscillator level `m`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Context, ModelParams, OscillatorInit, QuasiResult, Sign, SignPair};

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const DEFAULT_TOL_TRUNCATION: f64 = 1e-8;
pub const MIN_FOCK: usize = 40;
/// Largest truncation the adaptive builder will try.
pub const MAX_FOCK: usize = 200;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Density-matrix entries below this (unit trace) are dropped before diagonalization.
const NEGLIGIBLE: f64 = 1e-20;
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    /// Number of oscillator levels kept (`N + 1`).
    pub n_fock: usize,
    pub tol_truncation: f64,
}

impl FockConfig {
    pub fn new(n_fock: usize) -> Self {
        FockConfig { n_fock, tol_truncation: DEFAULT_TOL_TRUNCATION }
    }

    /// Starting truncation `max(40, ceil((|xi|max + 4 lambda + 4)^2) + 10)`.
    pub fn for_problem(params: &ModelParams, init: &OscillatorInit) -> Self {
        let xi_max = match *init {
            OscillatorInit::CoherentSuperposition { xi0, xi1 } => xi0.norm().max(xi1.norm()),
            _ => 0.0,
        };
        let span = xi_max + 4.0 * params.lambda + 4.0;
        let n = (span * span).ceil() as usize + 10;
        FockConfig::new(n.max(MIN_FOCK))
    }
}

/// Operators of the truncated model and the spectral decomposition of `H`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    cfg: FockConfig,
    params: ModelParams,
    pub annihilation: CMatrix,
    pub creation: CMatrix,
    /// `(a + a^dag) / sqrt 2`.
    pub position: CMatrix,
    pub sigma_x: CMatrix,
    pub sigma_y: CMatrix,
    pub sigma_z: CMatrix,
    pub hamiltonian: CMatrix,
    energies: DVector<f64>,
    eigvecs: CMatrix,
    eigvecs_adj: CMatrix,
}

/// Oscillator-only ladder operator on `n` levels.
fn ladder(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `exp(G) |0>` for an anti-Hermitian generator `G`, via `exp(-i K)`, `K = i G`.
fn exp_antihermitian_on_vacuum(generator: &CMatrix) -> Result<CVector> {
    let k = generator.map(|z| Complex64::i() * z);
    let eig = SymmetricEigen::try_new(k, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
    let w = &eig.eigenvectors;
    let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e));
    // W^dag e_0 is the conjugated first row of W
    let coeff = CVector::from_fn(w.ncols(), |j, _| w[(0, j)].conj() * phases[j]);
    Ok(w * coeff)
}

/// Truncates a vector to `n` entries, returning it renormalized with the lost weight.
fn truncate(v: &CVector, n: usize) -> (CVector, f64) {
    let head = v.rows(0, n).into_owned();
    let kept = head.norm_squared();
    let total = v.norm_squared();
    (head.unscale(kept.sqrt()), (total - kept).max(0.0) / total)
}

/// Coherent state `|xi>` on `n` levels from its Fock expansion (not renormalized).
pub fn coherent_vector(xi: Complex64, n: usize) -> CVector {
    let mut v = CVector::zeros(n);
    let mut c = Complex64::new((-0.5 * xi.norm_sqr()).exp(), 0.0);
    for m in 0..n {
        if m > 0 {
            c = c * xi / (m as f64).sqrt();
        }
        v[m] = c;
    }
    v
}

/// `|qubit> (x) |osc>` with qubit amplitudes `(c0, c1)`.
fn product(c0: Complex64, c1: Complex64, osc: &CVector) -> CVector {
    let n = osc.len();
    CVector::from_fn(2 * n, |i, _| if i < n { c0 * osc[i] } else { c1 * osc[i - n] })
}

/// `(e^{-i Omega tau} |0>|lambda alpha> + e^{i Omega tau} |1>|-lambda alpha>) / sqrt 2`,
/// the analytic ground-start state at time `tau` (up to a global phase).
pub fn analytic_cat_state(params: &ModelParams, tau: f64, n_fock: usize) -> CVector {
    let alpha = Complex64::new(tau.cos() - 1.0, -tau.sin()) * params.lambda;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = coherent_vector(alpha, n_fock);
    let minus = coherent_vector(-alpha, n_fock);
    let ph = Complex64::from_polar(h, -params.omega_ratio * tau);
    let mut v = product(ph, ZERO, &plus);
    v += product(ZERO, ph.conj(), &minus);
    v
}

/// `|<a|b>|^2` for normalized states.
pub fn fidelity(a: &CVector, b: &CVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    for v in [a, b] {
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized(n2));
        }
    }
    Ok(a.dotc(b).norm_sqr().min(1.0))
}

/// Initial state as a convex mixture of pure states.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub components: Vec<(f64, CVector)>,
    /// Norm lost to the truncation before renormalization.
    pub deficit: f64,
}

impl InitialState {
    fn pure(v: CVector, deficit: f64) -> Self {
        InitialState { components: vec![(1.0, v)], deficit }
    }

    pub fn density_matrix(&self) -> CMatrix {
        let d = self.components[0].1.len();
        let mut rho = CMatrix::zeros(d, d);
        for (p, v) in &self.components {
            rho += (v * v.adjoint()).scale(*p);
        }
        rho
    }

    pub fn trace(&self) -> f64 {
        self.components.iter().map(|(p, v)| p * v.norm_squared()).sum()
    }

    /// The state vector when the state is pure.
    pub fn as_pure(&self) -> Option<&CVector> {
        match self.components.as_slice() {
            [(_, v)] => Some(v),
            _ => None,
        }
    }
}

/// Exact and approximate superposed-coherent evolution, with their fidelity.
#[derive(Debug, Clone)]
pub struct SuperpositionStates {
    pub exact: CVector,
    pub approx: CVector,
    pub fidelity: f64,
}

impl FockSpace {
    /// Materializes the operators and diagonalizes `H`.
    pub fn build(cfg: FockConfig, params: &ModelParams) -> Result<Self> {
        if cfg.n_fock < 2 {
            return Err(Error::DimensionTooSmall(cfg.n_fock));
        }
        let params = params.validate(Context::Oracle)?;
        let n = cfg.n_fock;
        let a = ladder(n);
        let id_osc = DMatrix::<f64>::identity(n, n);
        let id_q = DMatrix::<f64>::identity(2, 2);
        let sz = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);

        let a_full = id_q.kronecker(&a);
        let adag_full = a_full.transpose();
        let sz_full = sz.kronecker(&id_osc);
        let sx_full = sx.kronecker(&id_osc);
        let number = &adag_full * &a_full;
        let quad = &a_full + &adag_full;
        let h = sz_full.scale(params.omega_ratio) + number + (&sz_full * &quad).scale(params.lambda);

        let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
        let eigvecs = complexify(&eig.eigenvectors);
        let eigvecs_adj = eigvecs.adjoint();

        let sy = CMatrix::from_row_slice(2, 2, &[ZERO, -Complex64::i(), Complex64::i(), ZERO]);
        Ok(FockSpace {
            cfg,
            params,
            annihilation: complexify(&a_full),
            creation: complexify(&adag_full),
            position: complexify(&quad.unscale(std::f64::consts::SQRT_2)),
            sigma_x: complexify(&sx_full),
            sigma_y: sy.kronecker(&complexify(&id_osc)),
            sigma_z: complexify(&sz_full),
            hamiltonian: complexify(&h),
            energies: eig.eigenvalues,
            eigvecs,
            eigvecs_adj,
        })
    }

    pub fn config(&self) -> FockConfig {
        self.cfg
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_fock(&self) -> usize {
        self.cfg.n_fock
    }

    pub fn dim(&self) -> usize {
        2 * self.cfg.n_fock
    }

    /// `U(tau) = exp(-i H tau)` as a dense matrix.
    pub fn evolve_operator(&self, tau: f64) -> CMatrix {
        let mut scaled = self.eigvecs.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -self.energies[j] * tau);
        }
        scaled * &self.eigvecs_adj
    }

    /// `U(tau) v` without forming `U`; negative `tau` applies `U^dag`.
    pub fn evolve(&self, tau: f64, v: &CVector) -> CVector {
        let mut coeff = &self.eigvecs_adj * v;
        for (c, e) in coeff.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * tau);
        }
        &self.eigvecs * coeff
    }

    /// `|+> (x) rho_osc`, truncated to the configured space.
    pub fn build_initial(&self, init: &OscillatorInit) -> Result<InitialState> {
        init.validate()?;
        let n = self.cfg.n_fock;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let state = match *init {
            OscillatorInit::Ground => {
                let mut osc = CVector::zeros(n);
                osc[0] = ONE;
                InitialState::pure(product(h, h, &osc), 0.0)
            }
            OscillatorInit::Thermal { nbar } if nbar == 0.0 => {
                return self.build_initial(&OscillatorInit::Ground)
            }
            OscillatorInit::Thermal { nbar } => {
                // Boltzmann weights nbar^m / (1 + nbar)^{m+1}
                let ratio = nbar / (1.0 + nbar);
                let mut w = 1.0 / (1.0 + nbar);
                let mut components = Vec::with_capacity(n);
                let mut kept = 0.0;
                for m in 0..n {
                    let mut osc = CVector::zeros(n);
                    osc[m] = ONE;
                    components.push((w, product(h, h, &osc)));
                    kept += w;
                    w *= ratio;
                }
                for c in &mut components {
                    c.0 /= kept;
                }
                InitialState { components, deficit: 1.0 - kept }
            }
            OscillatorInit::Squeezed { zeta_abs, theta } => {
                let big = 2 * n;
                let a = complexify(&ladder(big));
                let adag = a.adjoint();
                let zeta = Complex64::from_polar(zeta_abs, theta);
                let g = (&adag * &adag).scale(0.5).map(|x| x * zeta)
                    - (&a * &a).scale(0.5).map(|x| x * zeta.conj());
                let (osc, deficit) = truncate(&exp_antihermitian_on_vacuum(&g)?, n);
                InitialState::pure(product(h, h, &osc), deficit)
            }
            OscillatorInit::CoherentSuperposition { xi0, xi1 } => {
                let big = 2 * n;
                let sum = self.displaced_vacuum(xi0, big)? + self.displaced_vacuum(xi1, big)?;
                let (osc, deficit) = truncate(&sum, n);
                InitialState::pure(product(h, h, &osc), deficit)
            }
        };
        if state.deficit > self.cfg.tol_truncation {
            return Err(Error::TruncationInsufficient { n_fock: n, deficit: state.deficit });
        }
        Ok(state)
    }

    /// `D(xi)|0> = exp(xi a^dag - xi* a)|0>` on `levels` levels.
    fn displaced_vacuum(&self, xi: Complex64, levels: usize) -> Result<CVector> {
        let a = complexify(&ladder(levels));
        let g = a.adjoint().map(|x| x * xi) - a.map(|x| x * xi.conj());
        exp_antihermitian_on_vacuum(&g)
    }

    /// `(n . sigma) (x) 1` applied to `v`.
    fn apply_axis(&self, axis: &[f64; 3], v: &CVector) -> CVector {
        let n = self.cfg.n_fock;
        let off = Complex64::new(axis[0], -axis[1]);
        let mut out = CVector::zeros(v.len());
        for m in 0..n {
            let (up, down) = (v[m], v[n + m]);
            out[m] = up * axis[2] + off * down;
            out[n + m] = off.conj() * up - down * axis[2];
        }
        out
    }

    /// Heisenberg observable `Q(tau) v = U^dag (n . sigma) U v`.
    pub fn apply_heisenberg(&self, tau: f64, axis: &[f64; 3], v: &CVector) -> CVector {
        self.evolve(-tau, &self.apply_axis(axis, &self.evolve(tau, v)))
    }

    /// `M_a(tau) v` with `M_a = (1 + a n . sigma) / 2`.
    fn apply_projector(&self, tau: f64, axis: &[f64; 3], sign: Sign, v: &CVector) -> CVector {
        let q = self.apply_heisenberg(tau, axis, v);
        (v + q.scale(sign.value())).scale(0.5)
    }

    /// Dense `U^dag(tau) (n . sigma (x) 1) U(tau)`.
    pub fn heisenberg_observable(&self, tau: f64, axis: &[f64; 3]) -> CMatrix {
        let u = self.evolve_operator(tau);
        let ns = self.sigma_x.scale(axis[0]) + self.sigma_y.scale(axis[1]) + self.sigma_z.scale(axis[2]);
        u.adjoint() * ns * u
    }

    /// Dense `M_a(tau) = U^dag(tau) M_a U(tau)`.
    pub fn heisenberg_projector(&self, tau: f64, axis: &[f64; 3], sign: Sign) -> CMatrix {
        let d = self.dim();
        (CMatrix::identity(d, d) + self.heisenberg_observable(tau, axis).scale(sign.value()))
            .scale(0.5)
    }

    /// `q_{s1 s2} = Re Tr[M_{s2}(t2) M_{s1}(t1) rho0]` for all four pairs,
    /// with `<Q1>`, `<Q2>` and `C` evaluated from the same Heisenberg operators.
    pub fn quasiprob_oracle(
        &self,
        state: &InitialState,
        tau1: f64,
        tau2: f64,
        axis: &[f64; 3],
    ) -> Result<QuasiResult> {
        if !(tau1 <= tau2) {
            return Err(Error::TimeOrder { t1: tau1, t2: tau2 });
        }
        let axis = unit_axis(axis)?;
        let mut q = [0.0; 4];
        let (mut e1, mut e2, mut corr) = (0.0, 0.0, 0.0);
        for (p, psi) in &state.components {
            let a1 = self.apply_heisenberg(tau1, &axis, psi);
            let a2 = self.apply_heisenberg(tau2, &axis, psi);
            e1 += p * psi.dotc(&a1).re;
            e2 += p * psi.dotc(&a2).re;
            corr += p * a2.dotc(&a1).re;
            for pair in SignPair::ALL {
                let m1 = (psi + a1.scale(pair.s1())).scale(0.5);
                let m2 = (psi + a2.scale(pair.s2())).scale(0.5);
                q[pair.index()] += p * m2.dotc(&m1).re;
            }
        }
        Ok(QuasiResult { q, expect_q1: e1, expect_q2: e2, corr, t1: tau1, t2: tau2 })
    }

    /// Sequential-measurement probability
    /// `P12(a, b) = Tr[M_b(t2) M_a(t1) rho0 M_a(t1)]`.
    pub fn sequential_prob(
        &self,
        state: &InitialState,
        tau1: f64,
        tau2: f64,
        axis: &[f64; 3],
        pair: SignPair,
    ) -> Result<f64> {
        if !(tau1 <= tau2) {
            return Err(Error::TimeOrder { t1: tau1, t2: tau2 });
        }
        let axis = unit_axis(axis)?;
        let mut total = 0.0;
        for (p, psi) in &state.components {
            let after_first = self.apply_projector(tau1, &axis, pair.0, psi);
            let after_second = self.apply_projector(tau2, &axis, pair.1, &after_first);
            total += p * after_second.norm_squared();
        }
        Ok(total)
    }

    /// Evolved density matrix `U(tau) rho0 U^dag(tau)`.
    pub fn evolved_density(&self, state: &InitialState, tau: f64) -> CMatrix {
        let d = self.dim();
        let mut rho = CMatrix::zeros(d, d);
        for (p, psi) in &state.components {
            let v = self.evolve(tau, psi);
            rho += (&v * v.adjoint()).scale(*p);
        }
        rho
    }

    /// Negativity of the evolved state: partial transpose over the qubit,
    /// then the sum of `|mu|` over negative eigenvalues `mu`.
    pub fn negativity_oracle(&self, state: &InitialState, tau: f64) -> Result<f64> {
        let rho = self.evolved_density(state, tau);
        let mut pt = partial_transpose_qubit(&rho, self.cfg.n_fock);
        // subnormal entries from high Fock levels stall the eigensolver
        pt.apply(|z| {
            if z.norm() < NEGLIGIBLE {
                *z = ZERO;
            }
        });
        let eig = SymmetricEigen::try_new(pt, f64::EPSILON, 0).ok_or(Error::EigenFailure)?;
        Ok(eig.eigenvalues.iter().filter(|&&mu| mu < 0.0).map(|mu| -mu).sum())
    }

    /// Superposed-coherent start evolved exactly and through the
    /// small-coupling approximation that keeps only the phase factors
    /// `exp(+-lambda (-alpha* xi* + alpha xi) / 2)`.
    pub fn appendix_state(&self, xi0: Complex64, xi1: Complex64, tau: f64) -> Result<SuperpositionStates> {
        let init = OscillatorInit::CoherentSuperposition { xi0, xi1 };
        let start = self.build_initial(&init)?;
        let psi0 = start.as_pure().expect("coherent superposition is pure");
        let exact = self.evolve(tau, psi0);

        let n = self.cfg.n_fock;
        let lambda = self.params.lambda;
        let alpha = Complex64::new(tau.cos() - 1.0, -tau.sin());
        let rot = Complex64::from_polar(1.0, -tau);
        let larmor = Complex64::from_polar(1.0, -self.params.omega_ratio * tau);
        let mut approx = CVector::zeros(2 * n);
        let mut lost = 0.0f64;
        for xi in [xi0, xi1] {
            let exponent = (alpha * xi - alpha.conj() * xi.conj()) * (0.5 * lambda);
            let osc = coherent_vector(xi * rot, n);
            lost = lost.max(1.0 - osc.norm_squared());
            approx += product(larmor * exponent.exp(), larmor.conj() * (-exponent).exp(), &osc);
        }
        if lost > self.cfg.tol_truncation {
            return Err(Error::TruncationInsufficient { n_fock: n, deficit: lost });
        }
        let norm = approx.norm();
        approx.unscale_mut(norm);
        let fidelity = fidelity(&approx, &exact)?;
        Ok(SuperpositionStates { exact, approx, fidelity })
    }

    /// Largest entry of `|U^dag U - 1|`.
    pub fn unitarity_defect(&self, tau: f64) -> f64 {
        let u = self.evolve_operator(tau);
        let d = self.dim();
        (u.adjoint() * u - CMatrix::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn unit_axis(axis: &[f64; 3]) -> Result<[f64; 3]> {
    let norm = axis.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > crate::model::AXIS_TOLERANCE {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok([axis[0] / norm, axis[1] / norm, axis[2] / norm])
}

/// `rho^{T_A}[(i, m), (k, n)] = rho[(k, m), (i, n)]`.
pub fn partial_transpose_qubit(rho: &CMatrix, n_fock: usize) -> CMatrix {
    let d = 2 * n_fock;
    CMatrix::from_fn(d, d, |r, c| {
        let (i, m) = (r / n_fock, r % n_fock);
        let (k, n) = (c / n_fock, c % n_fock);
        rho[(k * n_fock + m, i * n_fock + n)]
    })
}

/// A space and initial state whose truncation loses at most `tol` of the norm.
///
/// Starts from [`FockConfig::for_problem`] and doubles `n_fock` up to [`MAX_FOCK`].
pub fn build_adaptive(
    params: &ModelParams,
    init: &OscillatorInit,
    tol: f64,
) -> Result<(FockSpace, InitialState)> {
    let mut cfg = FockConfig::for_problem(params, init);
    cfg.tol_truncation = tol;
    loop {
        let space = FockSpace::build(cfg, params)?;
        match space.build_initial(init) {
            Ok(state) => return Ok((space, state)),
            Err(Error::TruncationInsufficient { .. }) if cfg.n_fock < MAX_FOCK => {
                cfg.n_fock = (2 * cfg.n_fock).min(MAX_FOCK);
            }
            Err(e) => return Err(e),
        }
    }
}

/// One-shot oracle evaluation with an adaptively chosen truncation.
pub fn quasiprob_adaptive(
    tau1: f64,
    tau2: f64,
    params: &ModelParams,
    init: &OscillatorInit,
) -> Result<QuasiResult> {
    let (space, state) = build_adaptive(params, init, DEFAULT_TOL_TRUNCATION)?;
    let axis = space.params().measurement_axis();
    space.quasiprob_oracle(&state, tau1, tau2, &axis)
}
