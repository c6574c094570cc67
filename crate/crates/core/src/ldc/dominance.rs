//! Exact evaluation of the three-user entropy functional on arbitrary joint
//! input distributions, used to check that no input beats the closed-form
//! sum-rate bound.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bounds::ldc3_sum_outer;
use super::{LdcError, LdcGains};
use crate::gf2::low_mask;

const ENUMERATION_LIMIT: usize = 3;

/// A probability mass function on `(X1, X2, X3)`; outcome `x1 | x2 << m | x3 << 2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointInputDistribution {
    m: usize,
    p: Vec<f64>,
}

impl JointInputDistribution {
    /// Normalizes non-negative weights. Needs `8^m` entries.
    pub fn from_weights(m: usize, weights: Vec<f64>) -> Option<Self> {
        if weights.len() != 1 << (3 * m) || weights.iter().any(|w| !(*w >= 0.0)) {
            return None;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        Some(Self {
            m,
            p: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(m: usize) -> Self {
        let n = 1usize << (3 * m);
        Self {
            m,
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(m: usize, x1: u64, x2: u64, x3: u64) -> Self {
        let mut p = vec![0.0; 1 << (3 * m)];
        let mask = low_mask(m);
        let idx = (x1 & mask) | (x2 & mask) << m | (x3 & mask) << (2 * m);
        p[idx as usize] = 1.0;
        Self { m, p }
    }

    /// Weights `u^power` with `u` uniform on `[0, 1)`; larger powers give
    /// more concentrated distributions.
    pub fn random<R: Rng + ?Sized>(m: usize, power: i32, rng: &mut R) -> Self {
        loop {
            let w: Vec<f64> = (0..1usize << (3 * m))
                .map(|_| libm::pow(rng.gen::<f64>(), power as f64))
                .collect();
            if let Some(d) = Self::from_weights(m, w) {
                return d;
            }
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub trials: usize,
    pub bound: u64,
    pub max_observed: f64,
    /// `bound - max_observed`; never negative when the bound holds.
    pub gap: f64,
    pub violations: usize,
}

impl DominanceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Entropy in bits of `key(outcome)` under `p`.
fn entropy_of<F: Fn(u64) -> u64>(p: &[f64], key: F) -> f64 {
    let mut mass: Vec<(u64, f64)> = p
        .iter()
        .enumerate()
        .filter(|(_, q)| **q > 0.0)
        .map(|(o, q)| (key(o as u64), *q))
        .collect();
    mass.sort_unstable_by_key(|e| e.0);
    let mut h = 0.0;
    let mut i = 0;
    while i < mass.len() {
        let mut q = 0.0;
        let key = mass[i].0;
        while i < mass.len() && mass[i].0 == key {
            q += mass[i].1;
            i += 1;
        }
        if q > 0.0 {
            h -= q * libm::log2(q);
        }
    }
    h
}

/// `H(Y1) + H(Y2 | X1, Y1) + H(Y3 | X1, Y1, X2, Y2)` in bits.
pub fn sum_entropy_functional(
    g: &LdcGains,
    d: &JointInputDistribution,
) -> Result<f64, LdcError> {
    if g.k() != 3 {
        return Err(LdcError::UserCount {
            expected: 3,
            found: g.k(),
        });
    }
    let m = g.m();
    if m != d.m() {
        return Err(LdcError::SchemeShape("distribution dimension differs from max gain"));
    }
    let mask = low_mask(m);
    let x = |o: u64, i: usize| (o >> (i * m)) & mask;
    let y = |o: u64, l: usize| {
        (0..3).fold(0u64, |acc, i| {
            let sh = g.link_shift(l, i);
            if sh >= m {
                acc
            } else {
                acc ^ ((x(o, i) << sh) & mask)
            }
        })
    };
    // packs up to six m-bit fields, m <= 3, into one key
    let pack = |fields: &[u64]| fields.iter().fold(0u64, |acc, f| (acc << m) | f);
    let p = d.probabilities();

    let h_y1 = entropy_of(p, |o| y(o, 0));
    let h_x1y1 = entropy_of(p, |o| pack(&[x(o, 0), y(o, 0)]));
    let h_x1y1y2 = entropy_of(p, |o| pack(&[x(o, 0), y(o, 0), y(o, 1)]));
    let h_x12y12 = entropy_of(p, |o| pack(&[x(o, 0), x(o, 1), y(o, 0), y(o, 1)]));
    let h_x12y123 = entropy_of(p, |o| pack(&[x(o, 0), x(o, 1), y(o, 0), y(o, 1), y(o, 2)]));
    Ok(h_y1 + (h_x1y1y2 - h_x1y1) + (h_x12y123 - h_x12y12))
}

/// Evaluates the functional on `trials` seeded random distributions and
/// compares each against the closed-form bound.
pub fn outer_bound_dominance_check(
    g: &LdcGains,
    trials: usize,
    seed: u64,
) -> Result<DominanceReport, LdcError> {
    let bound = ldc3_sum_outer(g)?.value;
    let m = g.m();
    if m > ENUMERATION_LIMIT {
        return Err(LdcError::TooLargeForEnumeration {
            m,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_observed = f64::NEG_INFINITY;
    let mut violations = 0;
    for t in 0..trials {
        let d = JointInputDistribution::random(m, [1, 4, 16][t % 3], &mut rng);
        let v = sum_entropy_functional(g, &d)?;
        if v > bound as f64 + crate::tolerances::ENTROPY_ABS {
            violations += 1;
        }
        max_observed = max_observed.max(v);
    }
    if trials == 0 {
        max_observed = 0.0;
    }
    Ok(DominanceReport {
        trials,
        bound,
        max_observed,
        gap: bound as f64 - max_observed,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_inputs_meet_bound_exactly() {
        let g = LdcGains::symmetric(2, 1, 3);
        let v = sum_entropy_functional(&g, &JointInputDistribution::uniform(2)).unwrap();
        assert!((v - 5.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn point_mass_gives_zero() {
        let g = LdcGains::new(&[[3, 1, 2], [0, 2, 1], [1, 3, 3]]).unwrap();
        let d = JointInputDistribution::point_mass(3, 5, 2, 7);
        assert_eq!(sum_entropy_functional(&g, &d).unwrap(), 0.0);
    }

    #[test]
    fn random_distributions_stay_below_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let rows: Vec<[u32; 3]> = (0..3)
                .map(|_| [rng.gen_range(0..=3), rng.gen_range(0..=3), rng.gen_range(0..=3)])
                .collect();
            let g = LdcGains::new(&rows).unwrap();
            if g.m() == 0 {
                continue;
            }
            let rep = outer_bound_dominance_check(&g, 60, rng.gen()).unwrap();
            assert!(rep.passed(), "{rows:?} {rep:?}");
        }
    }

    #[test]
    fn uniform_meets_bound_on_small_grid() {
        // uniform inputs maximize every term simultaneously
        for nd in 1..=3 {
            for ni in 0..=3 {
                let g = LdcGains::symmetric(nd, ni, 3);
                let v = sum_entropy_functional(&g, &JointInputDistribution::uniform(g.m())).unwrap();
                let b = ldc3_sum_outer(&g).unwrap().value as f64;
                assert!((v - b).abs() < 1e-9, "nd={nd} ni={ni}: {v} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_large_channels() {
        let g = LdcGains::symmetric(4, 1, 3);
        assert!(matches!(
            outer_bound_dominance_check(&g, 1, 0),
            Err(LdcError::TooLargeForEnumeration { .. })
        ));
    }

    #[test]
    fn malformed_weights_are_rejected() {
        assert!(JointInputDistribution::from_weights(1, vec![1.0; 7]).is_none());
        assert!(JointInputDistribution::from_weights(1, vec![0.0; 8]).is_none());
        assert!(JointInputDistribution::from_weights(1, vec![-1.0; 8]).is_none());
    }
}
