//! The symmetric Gaussian channel with cumulative message sharing.
//!
//! `Y_l = hd X_l + hi sum_{i != l} X_i + Z_l` with unit-power complex inputs
//! and unit-variance noise. Rates are in bits per channel use.

mod bounds;
mod dpc;
mod logdet;
mod optimize;

use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

pub use bounds::{
    analytic_gap_bound, beamforming_inner, cutset_sum, outer_sum, outer_sum_general, outer_sum_mac,
};
pub use dpc::{
    additive_gap_certificate, analytic_chain_inner, closed_form_params, covariances, dpc_rates,
    DpcBranch, DpcParams, GapCertificate,
};
pub use logdet::{mutual_info_gaussian, HermitianMatrix};
pub use optimize::{
    optimize_inner, optimize_outer, outer_functional, InnerOptimum, OuterOptimum, NOISE_RHO_MAX,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("invalid channel: {0}")]
    InvalidChannel(&'static str),
    #[error("need at least {min} users, got {found}")]
    TooFewUsers { min: usize, found: usize },
    #[error("only {supported}-user channels are supported here, got {found}")]
    UnsupportedUsers { supported: usize, found: usize },
    #[error("power at antenna {antenna} is {power}, above 1")]
    PowerConstraintViolated { antenna: usize, power: f64 },
    #[error("parameter vectors must have one entry per user ({k})")]
    ParamShape { k: usize },
    #[error("covariance is not positive semidefinite (pivot {pivot})")]
    NonPsdInput { pivot: f64 },
    #[error("additive gap {gap} exceeds the guaranteed {bound}")]
    GapExceeded { gap: f64, bound: f64 },
    #[error("inner bound {inner} exceeds outer bound {outer}")]
    InnerAboveOuter { inner: f64, outer: f64 },
}

/// Direct gain `hd >= 0`, complex cross gain `hi`, `k` users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSymChannel {
    hd: f64,
    hi: Complex64,
    k: usize,
}

impl GaussianSymChannel {
    pub fn new(hd: f64, hi: Complex64, k: usize) -> Result<Self, GaussianError> {
        if !(hd >= 0.0) || !hd.is_finite() {
            return Err(GaussianError::InvalidChannel("hd must be finite and non-negative"));
        }
        if !hi.re.is_finite() || !hi.im.is_finite() {
            return Err(GaussianError::InvalidChannel("hi must be finite"));
        }
        if k < 2 {
            return Err(GaussianError::TooFewUsers { min: 2, found: k });
        }
        Ok(Self { hd, hi, k })
    }

    pub fn real(hd: f64, hi: f64, k: usize) -> Result<Self, GaussianError> {
        Self::new(hd, Complex64::new(hi, 0.0), k)
    }

    /// `|hd|^2 = SNR` and `|hi|^2 = SNR^alpha`, both gains real.
    pub fn from_snr_db(snr_db: f64, alpha: f64, k: usize) -> Result<Self, GaussianError> {
        if !snr_db.is_finite() || !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(GaussianError::InvalidChannel("snr and alpha must be finite, alpha >= 0"));
        }
        let snr = libm::pow(10.0, snr_db / 10.0);
        Self::real(libm::sqrt(snr), libm::sqrt(libm::pow(snr, alpha)), k)
    }

    pub fn hd(&self) -> f64 {
        self.hd
    }

    pub fn hi(&self) -> Complex64 {
        self.hi
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn snr(&self) -> f64 {
        self.hd * self.hd
    }

    pub fn inr(&self) -> f64 {
        self.hi.norm_sqr()
    }

    /// `log(1 + INR) / log(1 + SNR)`, `None` at zero SNR.
    pub fn alpha(&self) -> Option<f64> {
        (self.snr() > 0.0).then(|| libm::log1p(self.inr()) / libm::log1p(self.snr()))
    }

    /// `hi == hd` exactly: all receivers see statistically equivalent outputs.
    pub fn is_mac(&self) -> bool {
        self.hi == Complex64::new(self.hd, 0.0)
    }

    /// Receiver `l`'s row of the channel matrix.
    pub(crate) fn row(&self, l: usize) -> Vec<Complex64> {
        (0..self.k)
            .map(|i| if i == l { Complex64::new(self.hd, 0.0) } else { self.hi })
            .collect()
    }
}

/// Per-user rates in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector {
    pub rates: Vec<f64>,
}

impl RateVector {
    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }
}

pub(crate) fn log2_1p(x: f64) -> f64 {
    libm::log1p(x) / core::f64::consts::LN_2
}
