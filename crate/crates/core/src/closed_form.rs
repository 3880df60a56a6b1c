//! Analytic two-time statistics for the qubit-oscillator system with an
//! equatorial measurement axis.
//!
//! Every expression here depends on the coupling `lambda`, the ratio
//! `Omega / omega`, the axis azimuth `phi` and dimensionless times only.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Context, ModelParams, OscillatorInit, QuasiResult, SignPair};

/// Above this coupling the small-coupling helpers flag their output.
pub const SMALL_LAMBDA_LIMIT: f64 = 0.3;
/// Above this coupling predicted minima are flagged as outside their regime.
pub const PREDICTION_LAMBDA_LIMIT: f64 = 0.1;

/// Dimensionless kernels `(omega alpha(tau), omega^2 beta(tau))`:
/// `alpha = e^{-i tau} - 1`, `beta = tau - sin tau`.
///
/// `beta` only contributes a global phase to the evolution.
pub fn kernel_alpha_beta(tau: f64) -> (Complex64, f64) {
    let alpha = Complex64::new(tau.cos() - 1.0, -tau.sin());
    (alpha, tau - tau.sin())
}

/// Phase `Theta(tau2, tau1) = 16 lambda^2 sin((tau2 - tau1)/2) sin(tau2/2) sin(tau1/2)`.
pub fn kernel_theta(tau1: f64, tau2: f64, lambda: f64) -> f64 {
    16.0 * lambda * lambda
        * (0.5 * (tau2 - tau1)).sin()
        * (0.5 * tau2).sin()
        * (0.5 * tau1).sin()
}

/// Same phase written as `4 lambda^2 (sin(tau2 - tau1) - sin tau2 + sin tau1)`.
pub fn kernel_theta_sum_form(tau1: f64, tau2: f64, lambda: f64) -> f64 {
    4.0 * lambda * lambda * ((tau2 - tau1).sin() - tau2.sin() + tau1.sin())
}

/// How the oscillator's initial state widens the decoherence exponents.
#[derive(Debug, Clone, Copy)]
enum Spread {
    /// Ground and thermal states: `lambda^2 -> (2 nbar + 1) lambda^2`.
    Thermal { factor: f64 },
    /// Squeezed vacuum: the displacement `c` is replaced by
    /// `c cosh r - c* e^{i theta} sinh r`.
    Squeezed { cosh: f64, sinh_phase: Complex64 },
}

impl Spread {
    fn from_init(init: &OscillatorInit) -> Result<Spread> {
        init.validate()?;
        match *init {
            OscillatorInit::Ground => Ok(Spread::Thermal { factor: 1.0 }),
            OscillatorInit::Thermal { nbar } => Ok(Spread::Thermal { factor: 2.0 * nbar + 1.0 }),
            OscillatorInit::Squeezed { zeta_abs, theta } => Ok(Spread::Squeezed {
                cosh: zeta_abs.cosh(),
                sinh_phase: Complex64::from_polar(zeta_abs.sinh(), theta),
            }),
            OscillatorInit::CoherentSuperposition { .. } => {
                Err(Error::UnsupportedInit(init.name()))
            }
        }
    }

    /// Exponent of `<Q(tau)>`.
    fn single(&self, lambda_sq: f64, tau: f64) -> f64 {
        match *self {
            Spread::Thermal { factor } => {
                let s = (0.5 * tau).sin();
                8.0 * lambda_sq * factor * s * s
            }
            // e^{i tau} - 1 = 2i sin(tau/2) e^{i tau/2}
            Spread::Squeezed { .. } => {
                let u = Complex64::i() * Complex64::from_polar(2.0 * (0.5 * tau).sin(), 0.5 * tau);
                self.squeezed(lambda_sq, u)
            }
        }
    }

    /// Exponent of the two-time correlator; symmetric in its arguments.
    fn pair(&self, lambda_sq: f64, tau1: f64, tau2: f64) -> f64 {
        match *self {
            Spread::Thermal { factor } => {
                let s = (0.5 * (tau2 - tau1)).sin();
                8.0 * lambda_sq * factor * s * s
            }
            // e^{i tau2} - e^{i tau1} = 2i sin((tau2 - tau1)/2) e^{i (tau1 + tau2)/2}
            Spread::Squeezed { .. } => {
                let u = Complex64::i()
                    * Complex64::from_polar(2.0 * (0.5 * (tau2 - tau1)).sin(), 0.5 * (tau1 + tau2));
                self.squeezed(lambda_sq, u)
            }
        }
    }

    fn squeezed(&self, lambda_sq: f64, u: Complex64) -> f64 {
        let Spread::Squeezed { cosh, sinh_phase } = *self else {
            unreachable!("squeezed exponent requested for a thermal spread")
        };
        2.0 * lambda_sq * (u * cosh - u.conj() * sinh_phase).norm_sqr()
    }
}

fn closed_params(params: &ModelParams) -> Result<ModelParams> {
    params.validate(Context::ClosedForm)
}

/// Single-time expectation `<n . sigma(tau)>`.
pub fn expect_q(tau: f64, params: &ModelParams, init: &OscillatorInit) -> Result<f64> {
    let p = closed_params(params)?;
    let spread = Spread::from_init(init)?;
    Ok(expect_with(&p, &spread, tau))
}

fn expect_with(p: &ModelParams, spread: &Spread, tau: f64) -> f64 {
    (2.0 * p.omega_ratio * tau - p.phi).cos() * (-spread.single(p.lambda_sq(), tau)).exp()
}

/// Symmetrized two-time correlator `C(tau2, tau1)`.
pub fn correlation(tau1: f64, tau2: f64, params: &ModelParams, init: &OscillatorInit) -> Result<f64> {
    let p = closed_params(params)?;
    let spread = Spread::from_init(init)?;
    Ok(correlation_with(&p, &spread, tau1, tau2))
}

fn correlation_with(p: &ModelParams, spread: &Spread, tau1: f64, tau2: f64) -> f64 {
    kernel_theta(tau1, tau2, p.lambda).cos()
        * (2.0 * p.omega_ratio * (tau2 - tau1)).cos()
        * (-spread.pair(p.lambda_sq(), tau1, tau2)).exp()
}

/// All four quasiprobabilities `q_{s1 s2}(tau1, tau2)` for `tau1 <= tau2`.
pub fn quasiprob(
    tau1: f64,
    tau2: f64,
    params: &ModelParams,
    init: &OscillatorInit,
) -> Result<QuasiResult> {
    if !(tau1 <= tau2) {
        return Err(Error::TimeOrder { t1: tau1, t2: tau2 });
    }
    let p = closed_params(params)?;
    let spread = Spread::from_init(init)?;
    Ok(QuasiResult::from_moments(
        tau1,
        tau2,
        expect_with(&p, &spread, tau1),
        expect_with(&p, &spread, tau2),
        correlation_with(&p, &spread, tau1, tau2),
    ))
}

/// Entanglement negativity of the evolved ground-start state,
/// `N = sqrt(1 - exp(-16 lambda^2 sin^2(tau/2))) / 2`.
pub fn negativity_closed(tau: f64, lambda: f64) -> f64 {
    let s = (0.5 * tau).sin();
    0.5 * (-(-16.0 * lambda * lambda * s * s).exp_m1()).sqrt()
}

/// `q(0, tau2)` split into its zero-coupling value and the entanglement term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityForm {
    pub result: QuasiResult,
    pub negativity: f64,
    /// Value at `lambda = 0`, per sign pair.
    pub free: [f64; 4],
    /// `-(1 - sqrt(1 - 4 N^2)) (s2 cos(2 Omega tau2 - phi) + s1 s2 cos(2 Omega tau2)) / 4`.
    pub correction: [f64; 4],
}

/// Ground-start quasiprobability at `t1 = 0` written through the negativity.
pub fn quasiprob_negativity_form(tau2: f64, params: &ModelParams) -> Result<NegativityForm> {
    let p = closed_params(params)?;
    let n = negativity_closed(tau2, p.lambda);
    let visibility = (1.0 - 4.0 * n * n).sqrt();
    let suppression = 1.0 - visibility;
    let c_phi = p.phi.cos();
    let c2 = (2.0 * p.omega_ratio * tau2 - p.phi).cos();
    let c12 = (2.0 * p.omega_ratio * tau2).cos();

    let mut free = [0.0; 4];
    let mut correction = [0.0; 4];
    let mut q = [0.0; 4];
    for pair in SignPair::ALL {
        let (s1, s2) = (pair.s1(), pair.s2());
        let bracket = s2 * c2 + s1 * s2 * c12;
        let i = pair.index();
        free[i] = 0.25 * (1.0 + s1 * c_phi + bracket);
        correction[i] = -0.25 * suppression * bracket;
        q[i] = free[i] + correction[i];
    }
    let result = QuasiResult {
        q,
        expect_q1: c_phi,
        expect_q2: c2 * visibility,
        corr: c12 * visibility,
        t1: 0.0,
        t2: tau2,
    };
    Ok(NegativityForm { result, negativity: n, free, correction })
}

/// A value from an expansion that is only trustworthy for small coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallCoupling {
    pub value: f64,
    /// Set when `lambda` exceeds [`SMALL_LAMBDA_LIMIT`].
    pub beyond_small_coupling: bool,
}

/// Order-`lambda^2` expansion of the ground-state quasiprobability at
/// `Omega = 0`, `phi = 0`.
pub fn quasiprob_small_lambda(tau1: f64, tau2: f64, lambda: f64, pair: SignPair) -> SmallCoupling {
    let (s1, s2) = (pair.s1(), pair.s2());
    let sq = |x: f64| {
        let s = (0.5 * x).sin();
        s * s
    };
    let value = 0.25 * (1.0 + s1 + s2 + s1 * s2)
        - 2.0 * lambda * lambda * (s1 * sq(tau1) + s2 * sq(tau2) + s1 * s2 * sq(tau2 - tau1));
    SmallCoupling { value, beyond_small_coupling: lambda > SMALL_LAMBDA_LIMIT }
}

/// A point where the small-coupling quasiprobability reaches its minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Locus {
    pub tau1: f64,
    pub tau2: f64,
    pub pair: SignPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictedMinimum {
    pub value: f64,
    /// Empty when the location is not known in closed form.
    pub loci: Vec<Locus>,
    /// Set when `lambda` exceeds [`PREDICTION_LAMBDA_LIMIT`].
    pub beyond_small_coupling: bool,
}

/// The six minimum families at `Omega = phi = 0` (first period, `n = m = 0`).
pub fn ground_minimum_loci() -> Vec<Locus> {
    use crate::model::Sign::{Minus, Plus};
    let table: [(SignPair, f64, f64); 6] = [
        (SignPair(Plus, Minus), 2.0 / 3.0, 7.0 / 3.0),
        (SignPair(Plus, Minus), 4.0 / 3.0, 5.0 / 3.0),
        (SignPair(Minus, Plus), 1.0 / 3.0, 2.0 / 3.0),
        (SignPair(Minus, Plus), 5.0 / 3.0, 10.0 / 3.0),
        (SignPair(Minus, Minus), 1.0 / 3.0, 5.0 / 3.0),
        (SignPair(Minus, Minus), 5.0 / 3.0, 7.0 / 3.0),
    ];
    table
        .iter()
        .map(|&(pair, a, b)| Locus { tau1: a * PI, tau2: b * PI, pair })
        .collect()
}

/// Predicted minimum of the quasiprobability for small coupling at `Omega = phi = 0`.
pub fn min_quasiprob_predicted(init: &OscillatorInit, lambda: f64) -> Result<PredictedMinimum> {
    init.validate()?;
    let base = -0.5 * lambda * lambda;
    let (value, loci) = match *init {
        OscillatorInit::Ground => (base, ground_minimum_loci()),
        OscillatorInit::Thermal { nbar } => (base * (2.0 * nbar + 1.0), ground_minimum_loci()),
        OscillatorInit::Squeezed { zeta_abs, .. } => (base * (2.0 * zeta_abs).exp(), Vec::new()),
        OscillatorInit::CoherentSuperposition { .. } => {
            return Err(Error::UnsupportedInit(init.name()))
        }
    };
    Ok(PredictedMinimum { value, loci, beyond_small_coupling: lambda > PREDICTION_LAMBDA_LIMIT })
}
