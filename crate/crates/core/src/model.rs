//! Parameter and state types shared by every engine, plus the conversion
//! from an SI laboratory setup to the dimensionless coupling.
//!
//! All times inside the library are dimensionless, `tau = omega * t`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `|n| = 1` for an explicitly supplied measurement axis.
pub const AXIS_TOLERANCE: f64 = 1e-12;

/// Measurement outcome of the dichotomic variable `n . sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_int(s: i32) -> Option<Sign> {
        match s {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    fn tag(self) -> char {
        match self {
            Sign::Plus => 'p',
            Sign::Minus => 'm',
        }
    }
}

/// An ordered pair `(s1, s2)` of outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPair(pub Sign, pub Sign);

impl SignPair {
    /// Storage order used by [`QuasiResult::q`] and the CSV columns.
    pub const ALL: [SignPair; 4] = [
        SignPair(Sign::Plus, Sign::Plus),
        SignPair(Sign::Plus, Sign::Minus),
        SignPair(Sign::Minus, Sign::Plus),
        SignPair(Sign::Minus, Sign::Minus),
    ];

    pub fn new(s1: Sign, s2: Sign) -> Self {
        SignPair(s1, s2)
    }

    pub fn from_ints(s1: i32, s2: i32) -> Option<Self> {
        Some(SignPair(Sign::from_int(s1)?, Sign::from_int(s2)?))
    }

    pub fn index(self) -> usize {
        match (self.0, self.1) {
            (Sign::Plus, Sign::Plus) => 0,
            (Sign::Plus, Sign::Minus) => 1,
            (Sign::Minus, Sign::Plus) => 2,
            (Sign::Minus, Sign::Minus) => 3,
        }
    }

    pub fn s1(self) -> f64 {
        self.0.value()
    }

    pub fn s2(self) -> f64 {
        self.1.value()
    }

    /// Short tag: `pp`, `pm`, `mp` or `mm`.
    pub fn tag(self) -> String {
        [self.0.tag(), self.1.tag()].iter().collect()
    }
}

impl fmt::Display for SignPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+}, {:+})", self.s1() as i32, self.s2() as i32)
    }
}

/// Which engine a set of parameters is validated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    /// Analytic expressions; these only cover equatorial axes.
    ClosedForm,
    /// Truncated Fock-space simulation; any unit axis.
    Oracle,
}

/// Dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Coupling `lambda = g / omega`.
    pub lambda: f64,
    /// Oscillator angular frequency. Only used to convert times at I/O.
    pub omega: f64,
    /// Qubit splitting ratio `Omega / omega`.
    pub omega_ratio: f64,
    /// Azimuth of the measurement axis.
    pub phi: f64,
    /// Explicit measurement axis; defaults to `(cos phi, sin phi, 0)`.
    pub axis: Option<[f64; 3]>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { lambda: 0.0, omega: 1.0, omega_ratio: 0.0, phi: 0.0, axis: None }
    }
}

impl ModelParams {
    pub fn new(lambda: f64) -> Self {
        ModelParams { lambda, ..Default::default() }
    }

    /// Parameters from the combination `8 lambda^2`.
    pub fn from_eight_lambda_sq(eight_lambda_sq: f64) -> Self {
        Self::new((eight_lambda_sq / 8.0).sqrt())
    }

    pub fn with_omega_ratio(mut self, ratio: f64) -> Self {
        self.omega_ratio = ratio;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_axis(mut self, axis: [f64; 3]) -> Self {
        self.axis = Some(axis);
        self
    }

    pub fn lambda_sq(&self) -> f64 {
        self.lambda * self.lambda
    }

    pub fn measurement_axis(&self) -> [f64; 3] {
        self.axis.unwrap_or([self.phi.cos(), self.phi.sin(), 0.0])
    }

    /// Checks the parameters and returns a normalized copy.
    ///
    /// An explicit axis is renormalized and, when equatorial, also fixes `phi`.
    pub fn validate(&self, ctx: Context) -> Result<ModelParams> {
        let mut out = *self;
        for (name, v) in [
            ("lambda", self.lambda),
            ("omega", self.omega),
            ("omega_ratio", self.omega_ratio),
            ("phi", self.phi),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        if self.lambda < 0.0 {
            return Err(Error::NegativeCoupling(self.lambda));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidSetup("omega must be positive"));
        }
        if let Some(n) = self.axis {
            let norm = n.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !norm.is_finite() || (norm - 1.0).abs() > AXIS_TOLERANCE {
                return Err(Error::NonUnitAxis { norm });
            }
            let unit = [n[0] / norm, n[1] / norm, n[2] / norm];
            if ctx == Context::ClosedForm && unit[2] != 0.0 {
                return Err(Error::EquatorialAxisRequired { nz: unit[2] });
            }
            if unit[2] == 0.0 {
                out.phi = unit[1].atan2(unit[0]);
            }
            out.axis = Some(unit);
        } else {
            out.axis = Some(out.measurement_axis());
        }
        Ok(out)
    }
}

/// Free-function form of [`ModelParams::validate`].
pub fn validate(params: &ModelParams, ctx: Context) -> Result<ModelParams> {
    params.validate(ctx)
}

/// Initial state of the oscillator. The qubit always starts in `|+>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OscillatorInit {
    Ground,
    Thermal { nbar: f64 },
    /// Squeezed vacuum with `zeta = zeta_abs * exp(i theta)`.
    Squeezed { zeta_abs: f64, theta: f64 },
    /// Normalized `|xi0> + |xi1>` of two coherent states.
    CoherentSuperposition { xi0: Complex64, xi1: Complex64 },
}

impl OscillatorInit {
    /// Squeezed state for a real, possibly negative, `zeta`.
    pub fn squeezed_real(zeta: f64) -> Self {
        if zeta < 0.0 {
            OscillatorInit::Squeezed { zeta_abs: -zeta, theta: PI }
        } else {
            OscillatorInit::Squeezed { zeta_abs: zeta, theta: 0.0 }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OscillatorInit::Ground => "ground",
            OscillatorInit::Thermal { .. } => "thermal",
            OscillatorInit::Squeezed { .. } => "squeezed",
            OscillatorInit::CoherentSuperposition { .. } => "coherent-superposition",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OscillatorInit::Ground => Ok(()),
            OscillatorInit::Thermal { nbar } => {
                if nbar.is_finite() && nbar >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidInit("thermal occupation must be finite and >= 0"))
                }
            }
            OscillatorInit::Squeezed { zeta_abs, theta } => {
                if zeta_abs.is_finite() && zeta_abs >= 0.0 && theta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInit("squeezing magnitude must be finite and >= 0"))
                }
            }
            OscillatorInit::CoherentSuperposition { xi0, xi1 } => {
                if xi0.is_finite() && xi1.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInit("coherent amplitudes must be finite"))
                }
            }
        }
    }
}

/// Physical constants (CODATA 2018).
pub mod constants {
    pub const G: f64 = 6.674_30e-11;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const K_B: f64 = 1.380_649e-23;
    /// Mass of a cesium atom.
    pub const M_CS: f64 = 2.2e-25;
}

/// How the oscillator mass is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OscillatorMass {
    Mass(f64),
    /// Density of a sphere of radius `ell`, `M = 4 pi rho ell^3 / 3`.
    Density(f64),
}

/// Laboratory parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSetup {
    pub g_newton: f64,
    /// Mass of the superposed particle.
    pub m: f64,
    pub oscillator: OscillatorMass,
    /// Particle-oscillator separation.
    pub separation: f64,
    /// Spatial splitting of the superposition.
    pub ell: f64,
    pub omega_si: f64,
    pub temperature: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl PhysicalSetup {
    /// Cesium atom, 20 g/cm^3 oscillator, `omega = 2 pi / 10 s`, `ell = L = 1 mm`, 300 K.
    pub fn reference() -> Self {
        PhysicalSetup {
            g_newton: constants::G,
            m: constants::M_CS,
            oscillator: OscillatorMass::Density(20.0e3),
            separation: 1.0e-3,
            ell: 1.0e-3,
            omega_si: 2.0 * PI / 10.0,
            temperature: 300.0,
            hbar: constants::HBAR,
            k_b: constants::K_B,
        }
    }

    pub fn oscillator_mass(&self) -> f64 {
        match self.oscillator {
            OscillatorMass::Mass(m) => m,
            OscillatorMass::Density(rho) => 4.0 * PI * rho * self.ell.powi(3) / 3.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let osc = match self.oscillator {
            OscillatorMass::Mass(m) | OscillatorMass::Density(m) => m,
        };
        let all = [
            self.g_newton,
            self.m,
            osc,
            self.separation,
            self.ell,
            self.omega_si,
            self.temperature,
            self.hbar,
            self.k_b,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidSetup("all physical quantities must be finite and positive"))
        }
    }
}

/// Which expression for `lambda^2` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingForm {
    /// Full expression with the actual separation `L`.
    Exact,
    /// Order-of-magnitude form `G^2 m^2 rho / (hbar ell omega^3)` for `L ~ ell`.
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiEstimate {
    pub lambda_sq: f64,
    /// `k_B T / (2 hbar omega)`.
    pub nbar: f64,
}

impl SiEstimate {
    pub fn nbar_lambda_sq(&self) -> f64 {
        self.nbar * self.lambda_sq
    }
}

/// Converts a laboratory setup into `(lambda^2, nbar)`.
pub fn dimensionless_from_si(setup: &PhysicalSetup, form: CouplingForm) -> Result<SiEstimate> {
    setup.validate()?;
    let s = setup;
    let lambda_sq = match form {
        CouplingForm::Exact => {
            // g = G M m ell / (L^2 + ell^2/4)^{3/2} / sqrt(2 M hbar omega), lambda = g / omega
            let big_m = s.oscillator_mass();
            let r2 = s.separation * s.separation + s.ell * s.ell / 4.0;
            s.g_newton.powi(2) * s.m.powi(2) * big_m * s.ell.powi(2)
                / (2.0 * s.omega_si.powi(3) * s.hbar * r2.powi(3))
        }
        CouplingForm::Approximate => {
            let rho = match s.oscillator {
                OscillatorMass::Density(rho) => rho,
                OscillatorMass::Mass(_) => return Err(Error::MissingDensity),
            };
            s.g_newton.powi(2) * s.m.powi(2) * rho / (s.hbar * s.ell * s.omega_si.powi(3))
        }
    };
    let nbar = s.k_b * s.temperature / (2.0 * s.hbar * s.omega_si);
    Ok(SiEstimate { lambda_sq, nbar })
}

/// The four two-time quasiprobabilities with the moments they encode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiResult {
    /// Indexed in [`SignPair::ALL`] order: `pp, pm, mp, mm`.
    pub q: [f64; 4],
    pub expect_q1: f64,
    pub expect_q2: f64,
    pub corr: f64,
    pub t1: f64,
    pub t2: f64,
}

impl QuasiResult {
    /// Assembles `q = (1 + s1 <Q1> + s2 <Q2> + s1 s2 C) / 4`.
    pub fn from_moments(t1: f64, t2: f64, expect_q1: f64, expect_q2: f64, corr: f64) -> Self {
        let mut q = [0.0; 4];
        for pair in SignPair::ALL {
            let (s1, s2) = (pair.s1(), pair.s2());
            q[pair.index()] = 0.25 * ((1.0 + s1 * s2 * corr) + s1 * expect_q1 + s2 * expect_q2);
        }
        QuasiResult { q, expect_q1, expect_q2, corr, t1, t2 }
    }

    pub fn get(&self, pair: SignPair) -> f64 {
        self.q[pair.index()]
    }

    /// Largest violation of the normalization and marginal identities.
    pub fn marginal_defect(&self) -> f64 {
        let mut total = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut c = 0.0;
        for pair in SignPair::ALL {
            let v = self.get(pair);
            total += v;
            m1 += pair.s1() * v;
            m2 += pair.s2() * v;
            c += pair.s1() * pair.s2() * v;
        }
        [
            (total - 1.0).abs(),
            (m1 - self.expect_q1).abs(),
            (m2 - self.expect_q2).abs(),
            (c - self.corr).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
