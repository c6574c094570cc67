//! The linear deterministic channel.
//!
//! Receiver `l` observes `Y_l = sum_i S^(m - n[l][i]) X_i` over GF(2), where
//! every input and output is an `m`-bit column vector and `m` is the largest
//! gain. Transmitter `i` knows the messages of users `1..=i`.

mod bounds;
mod dominance;
mod scheme;
mod verify;

use alloc::vec::Vec;

use thiserror::Error;

use crate::gf2::{BitMatrix, Gf2Error};

pub use bounds::{f_function, ldc3_sum_outer, ldc_k_sym_sum_capacity, Degenerate, SumRateBound};
pub use dominance::{
    outer_bound_dominance_check, sum_entropy_functional, DominanceReport, JointInputDistribution,
};
pub use scheme::{build_generic3_scheme, build_sym_scheme, LdcScheme, GENERIC3_FALLBACK_ATTEMPTS};
pub use verify::{
    verify_scheme, Counterexample, VerificationReport, VerifyMode, EXHAUSTIVE_BIT_LIMIT,
    SAMPLED_DEFAULT_COUNT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LdcError {
    #[error("gain matrix must be {k}x{k}")]
    RaggedGains { k: usize },
    #[error("expected a {expected}-user channel, got {found} users")]
    UserCount { expected: usize, found: usize },
    #[error("need at least {min} users, got {found}")]
    TooFewUsers { min: usize, found: usize },
    #[error("scheme does not match the channel: {0}")]
    SchemeShape(&'static str),
    #[error("no linear scheme reached the outer bound after {attempts} attempts")]
    SchemeSearchFailed { attempts: usize },
    #[error("joint input enumeration needs m <= {limit}, channel has m = {m}")]
    TooLargeForEnumeration { m: usize, limit: usize },
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
}

pub type Gain = u32;

/// Integer gains `n[l][i]` from transmitter `i` to receiver `l`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LdcGains {
    k: usize,
    n: Vec<Gain>,
}

impl LdcGains {
    /// `rows[l][i]` is the gain from transmitter `i` to receiver `l`.
    pub fn new<R: AsRef<[Gain]>>(rows: &[R]) -> Result<Self, LdcError> {
        let k = rows.len();
        let mut n = Vec::with_capacity(k * k);
        for row in rows {
            let row = row.as_ref();
            if row.len() != k {
                return Err(LdcError::RaggedGains { k });
            }
            n.extend_from_slice(row);
        }
        Ok(Self { k, n })
    }

    pub fn symmetric(nd: Gain, ni: Gain, k: usize) -> Self {
        let n = (0..k * k)
            .map(|idx| if idx / k == idx % k { nd } else { ni })
            .collect();
        Self { k, n }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Gain from transmitter `i` to receiver `l`, zero-based.
    pub fn gain(&self, l: usize, i: usize) -> Gain {
        self.n[l * self.k + i]
    }

    /// Signal dimension: the largest gain.
    pub fn m(&self) -> usize {
        self.n.iter().copied().max().unwrap_or(0) as usize
    }

    /// `S^(m - n[l][i])`.
    pub fn link(&self, l: usize, i: usize) -> BitMatrix {
        let m = self.m();
        BitMatrix::shift(m, m - self.gain(l, i) as usize)
    }

    /// Shift applied on link `(l, i)`.
    pub(crate) fn link_shift(&self, l: usize, i: usize) -> usize {
        self.m() - self.gain(l, i) as usize
    }

    /// `Some((nd, ni))` when every direct gain equals `nd` and every cross gain `ni`.
    pub fn as_symmetric(&self) -> Option<(Gain, Gain)> {
        if self.k == 0 {
            return None;
        }
        let nd = self.gain(0, 0);
        let ni = if self.k > 1 { self.gain(1, 0) } else { 0 };
        let sym = (0..self.k).all(|l| {
            (0..self.k).all(|i| self.gain(l, i) == if l == i { nd } else { ni })
        });
        sym.then_some((nd, ni))
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Gain]> {
        self.n.chunks(self.k.max(1))
    }
}
