//! Two-time quasiprobabilities for a qubit coupled to a harmonic oscillator
//! through a `sigma_z (a + a^dag)` interaction.
//!
//! Three engines evaluate the same observables: analytic expressions
//! ([`closed_form`]), exact evolution on a truncated Fock space ([`fock`]),
//! and a mean-field model with a classical oscillator ([`semiclassical`]).
//! [`scan`] maps the quasiprobabilities over time pairs and locates their
//! negative regions.

pub mod closed_form;
pub mod error;
pub mod fock;
pub mod model;
pub mod scan;
pub mod semiclassical;

pub use error::{Error, Result};
pub use model::{
    CouplingForm, ModelParams, OscillatorInit, OscillatorMass, PhysicalSetup, QuasiResult, Sign,
    SignPair,
};
