//! Dirty-paper coded scheme: every transmitter beamforms user 1's codeword to
//! receiver 1, users `2..K-1` ride a zero-forcing layer (`+beta` at their own
//! antenna, `-beta` at antenna `K`) plus an optional private stream, and user
//! `K` sends a private stream from antenna `K`. User `l` is precoded against
//! users `1..l-1`, which transmitter `l` knows.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::bounds::{analytic_gap_bound, beamforming_inner, outer_sum, outer_sum_general, outer_sum_mac};
use super::logdet::HermitianMatrix;
use super::{log2_1p, GaussianError, GaussianSymChannel, RateVector};
use crate::tolerances;

/// Beamforming weights `alpha` (one per antenna), the common zero-forcing
/// amplitude `beta`, and private-stream amplitudes `gamma` (entry 0 unused,
/// must be zero).
#[derive(Debug, Clone, PartialEq)]
pub struct DpcParams {
    pub alpha: Vec<Complex64>,
    pub beta: Complex64,
    pub gamma: Vec<Complex64>,
}

impl DpcParams {
    pub fn zeros(k: usize) -> Self {
        Self {
            alpha: vec![Complex64::new(0.0, 0.0); k],
            beta: Complex64::new(0.0, 0.0),
            gamma: vec![Complex64::new(0.0, 0.0); k],
        }
    }

    fn check_shape(&self, k: usize) -> Result<(), GaussianError> {
        if self.alpha.len() != k || self.gamma.len() != k || self.gamma[0] != Complex64::new(0.0, 0.0)
        {
            return Err(GaussianError::ParamShape { k });
        }
        Ok(())
    }

    /// Transmit power at each antenna.
    pub fn antenna_powers(&self, k: usize) -> Result<Vec<f64>, GaussianError> {
        self.check_shape(k)?;
        let b = self.beta.norm_sqr();
        Ok((0..k)
            .map(|j| {
                let zf = if j == 0 {
                    0.0
                } else if j + 1 < k {
                    b
                } else {
                    (k - 2) as f64 * b
                };
                self.alpha[j].norm_sqr() + zf + self.gamma[j].norm_sqr()
            })
            .collect())
    }

    pub fn check_power(&self, k: usize) -> Result<(), GaussianError> {
        for (antenna, power) in self.antenna_powers(k)?.into_iter().enumerate() {
            if !(power <= 1.0 + tolerances::POWER_ABS) {
                return Err(GaussianError::PowerConstraintViolated { antenna, power });
            }
        }
        Ok(())
    }

    /// Beam vectors of each user's signal; user `l`'s covariance is the sum
    /// of their outer products.
    fn beams(&self, k: usize) -> Vec<Vec<Vec<Complex64>>> {
        let zero = Complex64::new(0.0, 0.0);
        let unit = |j: usize, c: Complex64| {
            let mut v = vec![zero; k];
            v[j] = c;
            v
        };
        (0..k)
            .map(|l| {
                if l == 0 {
                    vec![self.alpha.clone()]
                } else if l + 1 < k {
                    let mut zf = unit(l, self.beta);
                    zf[k - 1] = -self.beta;
                    vec![zf, unit(l, self.gamma[l])]
                } else {
                    vec![unit(l, self.gamma[l])]
                }
            })
            .collect()
    }
}

/// Per-user transmit covariances `Sigma_l`.
pub fn covariances(ch: &GaussianSymChannel, p: &DpcParams) -> Result<Vec<HermitianMatrix>, GaussianError> {
    let k = ch.k();
    p.check_shape(k)?;
    Ok(p.beams(k)
        .iter()
        .map(|beams| {
            let mut s = HermitianMatrix::zeros(k);
            for v in beams {
                s.add_outer(v);
            }
            s
        })
        .collect())
}

pub fn dpc_rates(ch: &GaussianSymChannel, p: &DpcParams) -> Result<RateVector, GaussianError> {
    let k = ch.k();
    p.check_power(k)?;
    let beams = p.beams(k);
    let rates = (0..k)
        .map(|l| {
            let h = ch.row(l);
            let q: Vec<f64> = beams
                .iter()
                .map(|user| {
                    user.iter()
                        .map(|v| h.iter().zip(v).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
                        .sum()
                })
                .collect();
            let later: f64 = q[l + 1..].iter().sum();
            let r = log2_1p(q[l] / (1.0 + later));
            r.max(0.0)
        })
        .collect();
    Ok(RateVector { rates })
}

/// Which closed-form parameter family was used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpcBranch {
    /// `|hi|^2 >= 1`: zero-forcing layer plus beamforming.
    Strong,
    /// `|hi|^2 < 1`: private streams only, `beta = alpha_j = 0`, `gamma_j = 1`.
    Weak,
}

fn unit_phase(z: Complex64) -> Complex64 {
    if z.norm() > 0.0 {
        z / z.norm()
    } else {
        Complex64::new(1.0, 0.0)
    }
}

fn branch_params(ch: &GaussianSymChannel, branch: DpcBranch) -> DpcParams {
    let k = ch.k();
    let h2 = ch.inr();
    let mut p = DpcParams::zeros(k);
    p.alpha[0] = unit_phase(ch.hi());
    let re = |x: f64| Complex64::new(libm::sqrt(x.max(0.0)), 0.0);
    match branch {
        DpcBranch::Weak => {
            for j in 1..k {
                p.gamma[j] = Complex64::new(1.0, 0.0);
            }
        }
        DpcBranch::Strong => {
            let kf = k as f64;
            let g_k = 1.0 / (1.0 + (kf - 1.0) * h2);
            let (b, a_k) = if k == 3 {
                (
                    (1.0 + 3.0 * h2) / (2.0 * (1.0 + 2.0 * h2)),
                    (h2 - 1.0) / (2.0 * (1.0 + 2.0 * h2)),
                )
            } else {
                ((1.0 - g_k) / (kf - 2.0), 0.0)
            };
            p.beta = re(b);
            p.gamma[k - 1] = re(g_k);
            p.alpha[k - 1] = re(a_k);
            for j in 1..k - 1 {
                p.alpha[j] = re(1.0 - b);
            }
        }
    }
    p
}

fn closed_form_choice(ch: &GaussianSymChannel) -> Result<(DpcParams, DpcBranch), GaussianError> {
    if ch.k() < 3 {
        return Err(GaussianError::TooFewUsers { min: 3, found: ch.k() });
    }
    let h2 = ch.inr();
    let branch = if h2 > 1.0 {
        DpcBranch::Strong
    } else if h2 < 1.0 {
        DpcBranch::Weak
    } else {
        // both families apply at the boundary; keep the better one
        let sum = |b| dpc_rates(ch, &branch_params(ch, b)).map(|r| r.sum());
        if sum(DpcBranch::Strong)? >= sum(DpcBranch::Weak)? {
            DpcBranch::Strong
        } else {
            DpcBranch::Weak
        }
    };
    let p = branch_params(ch, branch);
    p.check_power(ch.k())?;
    Ok((p, branch))
}

/// Closed-form parameter choice for `K >= 3`.
pub fn closed_form_params(ch: &GaussianSymChannel) -> Result<DpcParams, GaussianError> {
    closed_form_choice(ch).map(|(p, _)| p)
}

/// Lower bound on the closed-form sum rate obtained by replacing each rate of
/// the strong-interference family with the simpler expression that holds
/// whenever `|hi|^2 >= 1`. In the weak family the exact sum is returned.
pub fn analytic_chain_inner(ch: &GaussianSymChannel) -> Result<f64, GaussianError> {
    let (p, branch) = closed_form_choice(ch)?;
    if branch == DpcBranch::Weak {
        return Ok(dpc_rates(ch, &p)?.sum());
    }
    let k = ch.k();
    let kf = k as f64;
    let (hd, hi) = (ch.hd(), ch.hi().norm());
    let diff = (ch.hi() - hd).norm_sqr();
    let last = log2_1p(ch.snr() / (1.0 + (kf - 1.0) * ch.inr()));
    if k == 3 {
        let g = hd + hi / 2.0;
        Ok(log2_1p(g * g / 2.0) + log2_1p(diff / 2.0) + last)
    } else {
        let g = hd + hi * libm::sqrt((kf - 3.0) * (kf - 2.0));
        let middle = log2_1p(diff / (kf - 2.0) * (kf - 1.0) / (kf + 1.0));
        Ok(log2_1p(g * g / 2.0) + (kf - 2.0) * middle + last)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapCertificate {
    pub inner: f64,
    pub outer: f64,
    pub additive_gap: f64,
    pub analytic_gap_bound: f64,
    /// `outer / beamforming_inner`, `None` when the denominator is zero.
    pub multiplicative_ratio: Option<f64>,
    pub branch: DpcBranch,
    /// Lower bound on `inner` from the simplified rate expressions.
    pub chain_inner: f64,
    /// `outer - chain_inner`.
    pub chain_gap: f64,
    /// Both outer-bound branches, useful near `hi == hd`.
    pub outer_general: f64,
    pub outer_mac: f64,
}

pub fn additive_gap_certificate(ch: &GaussianSymChannel) -> Result<GapCertificate, GaussianError> {
    let (p, branch) = closed_form_choice(ch)?;
    let inner = dpc_rates(ch, &p)?.sum();
    let outer = outer_sum(ch);
    let bound = analytic_gap_bound(ch.k())?;
    if inner > outer + tolerances::BOUND_ABS {
        return Err(GaussianError::InnerAboveOuter { inner, outer });
    }
    let gap = outer - inner;
    if gap > bound + tolerances::GAP_SLACK {
        return Err(GaussianError::GapExceeded { gap, bound });
    }
    let bf = beamforming_inner(ch);
    let chain_inner = analytic_chain_inner(ch)?;
    Ok(GapCertificate {
        inner,
        outer,
        additive_gap: gap,
        analytic_gap_bound: bound,
        multiplicative_ratio: (bf > 0.0).then(|| outer / bf),
        branch,
        chain_inner,
        chain_gap: outer - chain_inner,
        outer_general: outer_sum_general(ch),
        outer_mac: outer_sum_mac(ch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_private_stream() {
        let ch = GaussianSymChannel::real(3.0, 0.7, 4).unwrap();
        let mut p = DpcParams::zeros(4);
        p.gamma[3] = c(1.0);
        let r = dpc_rates(&ch, &p).unwrap();
        assert!(close(r.rates[3], log2_1p(9.0), 1e-12));
        assert_eq!(r.rates[1], 0.0);
        assert_eq!(r.rates[2], 0.0);
        assert_eq!(r.rates[0], 0.0);

        p.alpha[0] = c(1.0);
        let r = dpc_rates(&ch, &p).unwrap();
        // user 1 sees user 4's stream as noise
        assert!(close(r.rates[0], log2_1p(9.0 / (1.0 + 0.49)), 1e-12));
    }

    #[test]
    fn weak_family_rates() {
        for k in 3..7 {
            for &(hd, hi) in &[(2.0, 0.5), (10.0, 0.9), (0.3, 0.1)] {
                let ch = GaussianSymChannel::real(hd, hi, k).unwrap();
                let p = closed_form_params(&ch).unwrap();
                let r = dpc_rates(&ch, &p).unwrap();
                for (l, rate) in r.rates.iter().enumerate() {
                    let want = log2_1p(hd * hd / (1.0 + (k - 1 - l) as f64 * hi * hi));
                    assert!(close(*rate, want, 1e-12), "k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn zero_direct_gain_silences_last_user() {
        let ch = GaussianSymChannel::real(0.0, 2.0, 3).unwrap();
        let r = dpc_rates(&ch, &closed_form_params(&ch).unwrap()).unwrap();
        assert_eq!(r.rates[2], 0.0);
    }

    #[test]
    fn strong_family_examples() {
        let ch = GaussianSymChannel::real(5.0, 1.0, 3).unwrap();
        let p = closed_form_params(&ch).unwrap();
        assert!(p.alpha[2].norm_sqr() < 1e-15);

        let ch = GaussianSymChannel::real(5.0, 2.0, 4).unwrap();
        let p = closed_form_params(&ch).unwrap();
        assert!(close(p.gamma[3].norm_sqr(), 1.0 / 13.0, 1e-12));
        assert!(close(p.beta.norm_sqr(), 6.0 / 13.0, 1e-12));
        assert_eq!(p.alpha[3].norm_sqr(), 0.0);
    }

    #[test]
    fn strong_family_matches_printed_rates() {
        for k in 3..7 {
            for &(hd, hi) in &[(10.0, 3.0), (4.0, 1.5), (2.0, 20.0)] {
                let ch = GaussianSymChannel::real(hd, hi, k).unwrap();
                let r = dpc_rates(&ch, &closed_form_params(&ch).unwrap()).unwrap();
                let (kf, h2) = (k as f64, hi * hi);
                let d2 = (hd - hi) * (hd - hi);
                let den = 1.0 + h2 / (1.0 + (kf - 1.0) * h2);
                assert!(close(r.rates[k - 1], log2_1p(hd * hd / (1.0 + (kf - 1.0) * h2)), 1e-9));
                if k == 3 {
                    assert!(close(r.rates[1], log2_1p(d2 / 2.0), 1e-9));
                    let s = libm::sqrt((1.0 + h2) / (2.0 * (1.0 + 2.0 * h2)))
                        + libm::sqrt((h2 - 1.0) / (2.0 * (1.0 + 2.0 * h2)));
                    let g = hd + hi * s;
                    assert!(close(r.rates[0], log2_1p(g * g / den), 1e-9));
                } else {
                    let mid = d2 / (kf - 2.0) * ((kf - 1.0) * h2 / (1.0 + (kf - 1.0) * h2)) / den;
                    for j in 1..k - 1 {
                        assert!(close(r.rates[j], log2_1p(mid), 1e-9));
                    }
                    let s = libm::sqrt((kf - 3.0) * (kf - 2.0) + (kf - 2.0) / (1.0 + (kf - 1.0) * h2));
                    let g = hd + hi * s;
                    assert!(close(r.rates[0], log2_1p(g * g / den), 1e-9));
                }
            }
        }
    }

    #[test]
    fn complex_cross_gain_keeps_beamforming_coherent() {
        let phase = Complex64::from_polar(1.0, 1.1);
        let real = GaussianSymChannel::real(6.0, 2.0, 3).unwrap();
        let rot = GaussianSymChannel::new(6.0, phase * 2.0, 3).unwrap();
        let r_real = dpc_rates(&real, &closed_form_params(&real).unwrap()).unwrap();
        let r_rot = dpc_rates(&rot, &closed_form_params(&rot).unwrap()).unwrap();
        assert!(close(r_real.rates[0], r_rot.rates[0], 1e-9));
    }

    #[test]
    fn covariance_structure() {
        for k in 3..6 {
            let ch = GaussianSymChannel::real(4.0, 2.5, k).unwrap();
            let p = closed_form_params(&ch).unwrap();
            let covs = covariances(&ch, &p).unwrap();
            let mut diag = vec![0.0; k];
            for (l, s) in covs.iter().enumerate() {
                assert!(s.is_psd(1e-12));
                for i in 0..l {
                    for j in 0..k {
                        assert!(s.get(i, j).norm() < 1e-15 && s.get(j, i).norm() < 1e-15);
                    }
                }
                for (i, d) in diag.iter_mut().enumerate() {
                    *d += s.get(i, i).re;
                }
            }
            assert!(diag.iter().all(|d| *d <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn power_violation_is_reported() {
        let ch = GaussianSymChannel::real(1.0, 1.0, 3).unwrap();
        let mut p = DpcParams::zeros(3);
        p.beta = c(0.8);
        p.alpha[2] = c(0.7);
        assert!(matches!(
            dpc_rates(&ch, &p),
            Err(GaussianError::PowerConstraintViolated { antenna: 2, .. })
        ));
        p.gamma[0] = c(0.1);
        assert!(matches!(dpc_rates(&ch, &p), Err(GaussianError::ParamShape { .. })));
    }

    #[test]
    fn certificate_examples() {
        let zero = additive_gap_certificate(&GaussianSymChannel::real(0.0, 0.0, 3).unwrap()).unwrap();
        assert_eq!((zero.inner, zero.outer, zero.additive_gap), (0.0, 0.0, 0.0));
        assert_eq!(zero.multiplicative_ratio, None);

        let s = libm::sqrt(10.0);
        let mac = additive_gap_certificate(&GaussianSymChannel::real(s, s, 4).unwrap()).unwrap();
        assert_eq!(mac.outer, mac.outer_mac);
        assert!(mac.additive_gap <= mac.analytic_gap_bound);
        assert!(mac.outer_general > mac.outer_mac);
    }

    #[test]
    fn chain_is_below_exact_and_within_bound() {
        for k in 3..7 {
            for &hd in &[0.0, 0.5, 3.0, 100.0, 1e4] {
                for &hi in &[1.0, 1.5, 7.0, 300.0, 1e5] {
                    let ch = GaussianSymChannel::real(hd, hi, k).unwrap();
                    let cert = additive_gap_certificate(&ch).unwrap();
                    assert!(cert.chain_inner <= cert.inner + 1e-9, "k={k} hd={hd} hi={hi}");
                    if k == 3 {
                        assert!(cert.chain_gap <= cert.analytic_gap_bound + 1e-6, "hd={hd} hi={hi}");
                    }
                }
            }
        }
    }

    #[test]
    fn four_user_chain_can_exceed_the_constant() {
        // log(1 + 441) - log(1 + 49) alone is 3.14 bits; the simplified
        // chain for K >= 4 therefore overshoots at zero direct gain
        let ch = GaussianSymChannel::real(0.0, 7.0, 4).unwrap();
        let cert = additive_gap_certificate(&ch).unwrap();
        assert!(cert.chain_gap > cert.analytic_gap_bound);
        assert!(cert.additive_gap <= cert.analytic_gap_bound);
    }

    #[test]
    fn weak_family_exceeds_constant_without_direct_gain() {
        let ch = GaussianSymChannel::real(0.0, 0.89, 4).unwrap();
        match additive_gap_certificate(&ch) {
            Err(GaussianError::GapExceeded { gap, bound }) => {
                assert!(gap > bound && gap < bound + 0.2, "{gap} {bound}");
            }
            other => panic!("expected GapExceeded, got {other:?}"),
        }
    }

    #[test]
    fn chain_gap_tends_to_six_for_three_users() {
        let ch = GaussianSymChannel::real(1e3, 1e9, 3).unwrap();
        let cert = additive_gap_certificate(&ch).unwrap();
        assert!(close(cert.chain_gap, 6.0, 1e-3), "{}", cert.chain_gap);
    }

    #[test]
    fn boundary_takes_better_family() {
        for k in 3..6 {
            let ch = GaussianSymChannel::real(3.0, 1.0, k).unwrap();
            let best = dpc_rates(&ch, &closed_form_params(&ch).unwrap()).unwrap().sum();
            for b in [DpcBranch::Strong, DpcBranch::Weak] {
                let v = dpc_rates(&ch, &branch_params(&ch, b)).unwrap().sum();
                assert!(v <= best + 1e-12);
            }
        }
    }
}
