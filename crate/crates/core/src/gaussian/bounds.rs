use super::{log2_1p, GaussianError, GaussianSymChannel};

/// Sum-rate upper bound. Uses the multiple-access value when `hi == hd`
/// exactly, the general bound otherwise.
pub fn outer_sum(ch: &GaussianSymChannel) -> f64 {
    if ch.is_mac() {
        outer_sum_mac(ch)
    } else {
        outer_sum_general(ch)
    }
}

/// `log(1 + K^2 hd^2)`, valid only when every receiver sees the same signal.
pub fn outer_sum_mac(ch: &GaussianSymChannel) -> f64 {
    let k = ch.k() as f64;
    log2_1p(k * k * ch.snr())
}

/// The general bound, evaluated regardless of `hi == hd`.
pub fn outer_sum_general(ch: &GaussianSymChannel) -> f64 {
    let k = ch.k() as f64;
    let (hd, hi) = (ch.hd(), ch.hi().norm());
    let diff = (ch.hi() - hd).norm_sqr();
    let first = log2_1p((hd + (k - 1.0) * hi) * (hd + (k - 1.0) * hi));
    let middle = (k - 2.0) * (1.0 + log2_1p(diff / 2.0));
    let last = log2_1p(ch.snr() / (1.0 + (k - 1.0) * ch.inr()));
    first + middle + last
}

/// `C_1 = log(1 + (hd + (K-1)|hi|)^2)`: every transmitter beamforms to user 1.
pub fn beamforming_inner(ch: &GaussianSymChannel) -> f64 {
    let g = ch.hd() + (ch.k() as f64 - 1.0) * ch.hi().norm();
    log2_1p(g * g)
}

/// `sum_j C_j` with `C_j = log(1 + (hd + (K-j)|hi|)^2)`, each the single-user
/// bound on `R_j` when transmitters `j..K` cooperate.
pub fn cutset_sum(ch: &GaussianSymChannel) -> f64 {
    let k = ch.k();
    (1..=k)
        .map(|j| {
            let g = ch.hd() + (k - j) as f64 * ch.hi().norm();
            log2_1p(g * g)
        })
        .sum()
}

/// Worst-case additive gap between the closed-form scheme and the outer bound.
pub fn analytic_gap_bound(k: usize) -> Result<f64, GaussianError> {
    match k {
        0..=2 => Err(GaussianError::TooFewUsers { min: 3, found: k }),
        3 => Ok(6.0),
        _ => {
            let m = (k - 2) as f64;
            // log2(2 e^2) = 1 + 2 / ln 2
            Ok(m * libm::log2(m) + 1.0 + 2.0 / core::f64::consts::LN_2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mac_branch_examples() {
        for k in 2..6 {
            assert_eq!(outer_sum(&GaussianSymChannel::real(0.0, 0.0, k).unwrap()), 0.0);
        }
        let ch = GaussianSymChannel::real(1.0, 1.0, 3).unwrap();
        assert!(close(outer_sum(&ch), libm::log2(10.0), 1e-12));
    }

    #[test]
    fn general_branch_term_by_term() {
        // log2(145) + 1 + log2(41.5) + log2(1 + 100/3)
        let ch = GaussianSymChannel::real(10.0, 1.0, 3).unwrap();
        let want = libm::log2(145.0) + 1.0 + libm::log2(41.5) + libm::log2(103.0 / 3.0);
        assert!(close(outer_sum(&ch), want, 1e-12));
        assert!(close(outer_sum(&ch), 18.65645, 1e-4));
    }

    #[test]
    fn branch_is_chosen_by_exact_equality() {
        let mac = GaussianSymChannel::real(3.0, 3.0, 4).unwrap();
        let near = GaussianSymChannel::real(3.0, 3.0 + 1e-12, 4).unwrap();
        let rotated = GaussianSymChannel::new(3.0, Complex64::new(0.0, 3.0), 4).unwrap();
        assert!(mac.is_mac() && !near.is_mac() && !rotated.is_mac());
        // the general bound stays far above the MAC value as hi -> hd
        assert!(outer_sum(&near) - outer_sum(&mac) > 1.0);
        assert!(close(outer_sum_general(&near), outer_sum_general(&mac), 1e-9));
    }

    #[test]
    fn beamforming_examples() {
        for k in 2..6 {
            let ch = GaussianSymChannel::real(1.0, 0.0, k).unwrap();
            assert!(close(beamforming_inner(&ch), 1.0, 1e-15));
        }
        let ch = GaussianSymChannel::real(3.0, 2.0, 3).unwrap();
        assert!(close(beamforming_inner(&ch), libm::log2(50.0), 1e-12));
    }

    #[test]
    fn gap_bound_values() {
        assert_eq!(analytic_gap_bound(3).unwrap(), 6.0);
        let c = libm::log2(2.0 * libm::exp(2.0));
        assert!(close(analytic_gap_bound(4).unwrap(), 2.0 + c, 1e-12));
        assert!(close(analytic_gap_bound(5).unwrap(), 3.0 * libm::log2(3.0) + c, 1e-12));
        assert!(close(analytic_gap_bound(5).unwrap(), 8.640, 1e-3));
        assert!(analytic_gap_bound(2).is_err());
    }

    #[test]
    fn cutset_dominates_sum_bound_and_k_beamforming() {
        for &(hd, hi) in &[(0.1, 0.05), (1.0, 2.0), (10.0, 1.0), (5.0, 30.0)] {
            for k in 3..7 {
                let ch = GaussianSymChannel::real(hd, hi, k).unwrap();
                assert!(cutset_sum(&ch) <= k as f64 * beamforming_inner(&ch) + 1e-12);
            }
        }
    }
}
