use alloc::vec;
use alloc::vec::Vec;

use super::{Gain, LdcError, LdcGains};

/// Degenerate channels whose sum capacity is not given by the generic formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degenerate {
    /// `nd == ni > 0`: every receiver sees the same signal.
    MultipleAccess,
    /// `nd == 0 < ni`: no direct link; only cross links carry information.
    Broadcast,
    /// `nd == ni == 0`: nothing is received. Taken as zero by continuity.
    Silent,
}

/// An exact sum-rate bound in bits per channel use, with its labeled terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumRateBound {
    pub value: u64,
    pub terms: Vec<(&'static str, u64)>,
    pub degenerate: Option<Degenerate>,
}

impl SumRateBound {
    fn from_terms(terms: Vec<(&'static str, u64)>, degenerate: Option<Degenerate>) -> Self {
        let value = terms.iter().map(|(_, v)| v).sum();
        Self {
            value,
            terms,
            degenerate,
        }
    }

    pub fn term(&self, label: &str) -> Option<u64> {
        self.terms.iter().find(|(l, _)| *l == label).map(|(_, v)| *v)
    }
}

/// Largest conditional entropy `H(S^(m-c) A + S^(m-d) B | S^(m-a) A + S^(m-b) B)`
/// over independent inputs `A`, `B`.
pub fn f_function(c: Gain, d: Gain, a: Gain, b: Gain) -> Gain {
    let (c, d, a, b) = (c as i64, d as i64, a as i64, b as i64);
    let v = if c - d != a - b {
        (c + b).max(a + d) - a.max(b)
    } else {
        a.max(b).max(c).max(d) - a.max(b)
    };
    v as Gain
}

pub const TERM_PRIMARY: &str = "H(Y1)";
pub const TERM_SECOND: &str = "H(Y2|X1,Y1)";
pub const TERM_THIRD: &str = "H(Y3|X1,Y1,X2,Y2)";

/// Sum-capacity upper bound of the 3-user channel with arbitrary gains.
pub fn ldc3_sum_outer(g: &LdcGains) -> Result<SumRateBound, LdcError> {
    if g.k() != 3 {
        return Err(LdcError::UserCount {
            expected: 3,
            found: g.k(),
        });
    }
    let n = |l: usize, i: usize| g.gain(l, i);
    let first = n(0, 0).max(n(0, 1)).max(n(0, 2));
    let second = f_function(n(1, 1), n(1, 2), n(0, 1), n(0, 2));
    let third = n(2, 2).saturating_sub(n(0, 2).max(n(1, 2)));
    Ok(SumRateBound::from_terms(
        vec![
            (TERM_PRIMARY, first as u64),
            (TERM_SECOND, second as u64),
            (TERM_THIRD, third as u64),
        ],
        None,
    ))
}

pub const TERM_SHARED: &str = "(K-1) max(nd,ni)";
pub const TERM_PRIVATE: &str = "[nd-ni]+";
pub const TERM_MAC: &str = "MAC";

/// Sum capacity of the symmetric `k`-user channel.
pub fn ldc_k_sym_sum_capacity(nd: Gain, ni: Gain, k: usize) -> Result<SumRateBound, LdcError> {
    if k < 2 {
        return Err(LdcError::TooFewUsers { min: 2, found: k });
    }
    if nd == ni {
        let flag = if nd == 0 {
            Degenerate::Silent
        } else {
            Degenerate::MultipleAccess
        };
        return Ok(SumRateBound::from_terms(vec![(TERM_MAC, nd as u64)], Some(flag)));
    }
    let shared = (k as u64 - 1) * nd.max(ni) as u64;
    let private = nd.saturating_sub(ni) as u64;
    let flag = (nd == 0).then_some(Degenerate::Broadcast);
    Ok(SumRateBound::from_terms(
        vec![(TERM_SHARED, shared), (TERM_PRIVATE, private)],
        flag,
    ))
}
