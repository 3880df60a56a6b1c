//! Mean-field model: the qubit feels the oscillator only through `<a + a^dag>`,
//! and the oscillator is driven by `<sigma_z>`.
//!
//! ```text
//! x' = p,  p' = -x - 2 lambda s_z,  S' = w_z (-S_y, S_x, 0),  w_z = 2 (Omega/omega + lambda x)
//! ```
//!
//! with `x = <a + a^dag>` and `p = <i (a^dag - a)>`. Every supported oscillator
//! start has zero mean displacement, so the trajectory starts at `x = p = 0`.

use crate::error::{Error, Result};
use crate::model::{Context, ModelParams, SignPair};

pub const DEFAULT_STEPS_PER_PERIOD: usize = 2000;
/// Tolerated drift of the Bloch-vector length.
pub const BLOCH_DRIFT_TOLERANCE: f64 = 1e-6;
const EQUATOR_TOLERANCE: f64 = 1e-12;

pub fn default_dtau() -> f64 {
    std::f64::consts::TAU / DEFAULT_STEPS_PER_PERIOD as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub q_mean: f64,
    pub p_mean: f64,
    pub bloch: [f64; 3],
    pub time: f64,
}

impl MeanFieldState {
    /// Qubit in `|+>`, oscillator at rest.
    pub fn initial() -> Self {
        MeanFieldState { q_mean: 0.0, p_mean: 0.0, bloch: [1.0, 0.0, 0.0], time: 0.0 }
    }

    pub fn bloch_norm(&self) -> f64 {
        self.bloch.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `(x^2 + p^2) / 4 + (Omega/omega + lambda x) s_z`, conserved by the flow.
    pub fn energy(&self, omega_ratio: f64, lambda: f64) -> f64 {
        0.25 * (self.q_mean * self.q_mean + self.p_mean * self.p_mean)
            + (omega_ratio + lambda * self.q_mean) * self.bloch[2]
    }

    fn as_array(&self) -> [f64; 5] {
        [self.q_mean, self.p_mean, self.bloch[0], self.bloch[1], self.bloch[2]]
    }

    fn from_array(y: [f64; 5], time: f64) -> Self {
        MeanFieldState { q_mean: y[0], p_mean: y[1], bloch: [y[2], y[3], y[4]], time }
    }
}

fn rhs(y: &[f64; 5], omega_ratio: f64, lambda: f64) -> [f64; 5] {
    let [x, p, sx, sy, sz] = *y;
    let wz = 2.0 * (omega_ratio + lambda * x);
    [p, -x - 2.0 * lambda * sz, -wz * sy, wz * sx, 0.0]
}

fn axpy(y: &[f64; 5], h: f64, k: &[f64; 5]) -> [f64; 5] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4_step(y: &[f64; 5], h: f64, omega_ratio: f64, lambda: f64) -> [f64; 5] {
    let k1 = rhs(y, omega_ratio, lambda);
    let k2 = rhs(&axpy(y, 0.5 * h, &k1), omega_ratio, lambda);
    let k3 = rhs(&axpy(y, 0.5 * h, &k2), omega_ratio, lambda);
    let k4 = rhs(&axpy(y, h, &k3), omega_ratio, lambda);
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Integrates from `state.time` to `tau_end` with RK4, using equal steps no
/// longer than `dtau` so the trajectory lands exactly on `tau_end`.
pub fn ns_evolve(state: &MeanFieldState, tau_end: f64, dtau: f64, params: &ModelParams) -> Result<MeanFieldState> {
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(Error::InvalidStep);
    }
    if !tau_end.is_finite() || tau_end < state.time {
        return Err(Error::TimeOrder { t1: state.time, t2: tau_end });
    }
    let span = tau_end - state.time;
    let steps = (span / dtau).ceil() as usize;
    if steps == 0 {
        return Ok(*state);
    }
    let h = span / steps as f64;
    let norm0 = state.bloch_norm();
    let mut y = state.as_array();
    for _ in 0..steps {
        y = rk4_step(&y, h, params.omega_ratio, params.lambda);
    }
    let out = MeanFieldState::from_array(y, tau_end);
    let drift = (out.bloch_norm() - norm0).abs();
    if !(drift <= BLOCH_DRIFT_TOLERANCE) {
        return Err(Error::StepTooLarge(drift));
    }
    Ok(out)
}

/// Validated parameters and the in-plane measurement direction.
fn checked(params: &ModelParams) -> Result<(ModelParams, [f64; 3])> {
    let p = params.validate(Context::Oracle)?;
    let axis = p.measurement_axis();
    if axis[2].abs() > EQUATOR_TOLERANCE {
        return Err(Error::NonEquatorialAxis);
    }
    Ok((p, axis))
}

fn outcome_prob(s: &MeanFieldState, axis: &[f64; 3], sign: f64) -> f64 {
    let proj: f64 = s.bloch.iter().zip(axis).map(|(b, n)| b * n).sum();
    0.5 * (1.0 + sign * proj)
}

/// Collapses the Bloch vector onto `sign * axis`, keeping the oscillator.
fn collapse(s: &MeanFieldState, axis: &[f64; 3], sign: f64) -> MeanFieldState {
    MeanFieldState { bloch: axis.map(|c| sign * c), ..*s }
}

/// Joint probability of outcomes `s1` at `tau1` then `s2` at `tau2` when the
/// first measurement collapses the qubit and the oscillator follows the mean.
pub fn ns_quasiprob_with(tau1: f64, tau2: f64, params: &ModelParams, pair: SignPair, dtau: f64) -> Result<f64> {
    Ok(ns_quasiprob_all(tau1, tau2, params, dtau)?[pair.index()])
}

pub fn ns_quasiprob(tau1: f64, tau2: f64, params: &ModelParams, pair: SignPair) -> Result<f64> {
    ns_quasiprob_with(tau1, tau2, params, pair, default_dtau())
}

/// All four sign pairs, indexed as [`SignPair::ALL`].
pub fn ns_quasiprob_all(tau1: f64, tau2: f64, params: &ModelParams, dtau: f64) -> Result<[f64; 4]> {
    if !(tau1 >= 0.0 && tau1 <= tau2) {
        return Err(Error::TimeOrder { t1: tau1, t2: tau2 });
    }
    let (p, axis) = checked(params)?;
    let at1 = ns_evolve(&MeanFieldState::initial(), tau1, dtau, &p)?;
    let mut out = [0.0; 4];
    for (i, s1) in [1.0, -1.0].into_iter().enumerate() {
        let first = outcome_prob(&at1, &axis, s1);
        let at2 = ns_evolve(&collapse(&at1, &axis, s1), tau2, dtau, &p)?;
        for (j, s2) in [1.0, -1.0].into_iter().enumerate() {
            out[2 * i + j] = first * outcome_prob(&at2, &axis, s2);
        }
    }
    Ok(out)
}

/// Mean-field statistics on the upper triangle of `taus x taus`, row-major
/// with rows indexing the first time. `taus` must be non-negative and sorted.
pub fn ns_scan(taus: &[f64], params: &ModelParams, dtau: f64) -> Result<Vec<Option<[f64; 4]>>> {
    if taus.first().is_some_and(|&t| !(t >= 0.0)) || taus.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidWindow);
    }
    let (p, axis) = checked(params)?;
    let n = taus.len();
    let mut cells = vec![None; n * n];
    let mut at1 = MeanFieldState::initial();
    for (row, &t1) in taus.iter().enumerate() {
        at1 = ns_evolve(&at1, t1, dtau, &p)?;
        let mut branches: Vec<(f64, MeanFieldState)> = [1.0, -1.0]
            .into_iter()
            .map(|s1| (outcome_prob(&at1, &axis, s1), collapse(&at1, &axis, s1)))
            .collect();
        for (col, &t2) in taus.iter().enumerate().skip(row) {
            let mut q = [0.0; 4];
            for (i, (first, state)) in branches.iter_mut().enumerate() {
                *state = ns_evolve(state, t2, dtau, &p)?;
                q[2 * i] = *first * outcome_prob(state, &axis, 1.0);
                q[2 * i + 1] = *first * outcome_prob(state, &axis, -1.0);
            }
            cells[row * n + col] = Some(q);
        }
    }
    Ok(cells)
}
