//! Generalized degrees of freedom of the symmetric channel and two reference
//! models: the non-cognitive interference channel (IFC) and the broadcast
//! channel with full transmitter cooperation (BC).

use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::gaussian::{
    closed_form_params, dpc_rates, outer_sum, DpcParams, GaussianError, GaussianSymChannel,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GdofError {
    #[error("alpha must be finite and non-negative, got {0}")]
    InvalidAlpha(f64),
    #[error("need at least 2 users, got {0}")]
    TooFewUsers(usize),
    #[error("alpha grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("slope fit needs at least two distinct SNR points")]
    TooFewSnrPoints,
    #[error("alpha {0} is within 0.1 of the discontinuity at 1")]
    NearDiscontinuity(f64),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GdofModel {
    Cms,
    Ifc,
    Bc,
}

impl GdofModel {
    pub const ALL: [GdofModel; 3] = [GdofModel::Cms, GdofModel::Ifc, GdofModel::Bc];

    pub fn name(self) -> &'static str {
        match self {
            GdofModel::Cms => "CMS",
            GdofModel::Ifc => "IFC",
            GdofModel::Bc => "BC",
        }
    }

    /// Sum gDoF; at `alpha == 1` with `discontinuity` set, the value of the
    /// isolated point (1 for every model) instead of the limit.
    pub fn gdof(self, alpha: f64, k: usize, discontinuity: bool) -> Result<f64, GdofError> {
        match self {
            GdofModel::Cms => gdof_cms(alpha, k, discontinuity),
            GdofModel::Ifc => gdof_ifc(alpha, k, discontinuity),
            GdofModel::Bc => gdof_bc(alpha, k, discontinuity),
        }
    }
}

fn check(alpha: f64, k: usize) -> Result<(), GdofError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(GdofError::InvalidAlpha(alpha));
    }
    if k < 2 {
        return Err(GdofError::TooFewUsers(k));
    }
    Ok(())
}

/// `K max{1, alpha} - alpha`.
pub fn gdof_cms(alpha: f64, k: usize, discontinuity: bool) -> Result<f64, GdofError> {
    check(alpha, k)?;
    if discontinuity && alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(gdof_bc(alpha, k, false)? - alpha)
}

/// `K max{1, alpha}`.
pub fn gdof_bc(alpha: f64, k: usize, discontinuity: bool) -> Result<f64, GdofError> {
    check(alpha, k)?;
    if discontinuity && alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(k as f64 * alpha.max(1.0))
}

/// `K/2` times the two-user W-curve.
pub fn gdof_ifc(alpha: f64, k: usize, discontinuity: bool) -> Result<f64, GdofError> {
    check(alpha, k)?;
    if discontinuity && alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(k as f64 / 2.0 * w_curve(alpha))
}

/// Sum gDoF of the two-user interference channel.
fn w_curve(alpha: f64) -> f64 {
    if alpha <= 0.5 {
        2.0 * (1.0 - alpha)
    } else if alpha <= 2.0 / 3.0 {
        2.0 * alpha
    } else if alpha <= 1.0 {
        2.0 - alpha
    } else if alpha <= 2.0 {
        alpha
    } else {
        2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdofSample {
    pub alpha: f64,
    /// Limit value; continuous in `alpha`.
    pub d: f64,
    /// Value of the isolated point, present only at `alpha == 1` when requested.
    pub at_discontinuity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdofCurve {
    pub model: GdofModel,
    pub k: usize,
    pub samples: Vec<GdofSample>,
    /// Values divided by `k`.
    pub normalized: bool,
}

pub fn curve_sweep(
    model: GdofModel,
    k: usize,
    alphas: &[f64],
    normalized: bool,
    discontinuity: bool,
) -> Result<GdofCurve, GdofError> {
    if alphas.is_empty() || alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(GdofError::BadGrid);
    }
    let scale = if normalized { k as f64 } else { 1.0 };
    let samples = alphas
        .iter()
        .map(|&alpha| {
            let d = model.gdof(alpha, k, false)? / scale;
            let at_discontinuity = if discontinuity && alpha == 1.0 {
                Some(model.gdof(alpha, k, true)? / scale)
            } else {
                None
            };
            Ok(GdofSample {
                alpha,
                d,
                at_discontinuity,
            })
        })
        .collect::<Result<_, GdofError>>()?;
    Ok(GdofCurve {
        model,
        k,
        samples,
        normalized,
    })
}

/// Fitted pre-log slopes of the outer bound and the closed-form inner bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalGdof {
    pub outer_slope: f64,
    pub inner_slope: f64,
}

/// Least-squares slopes of `outer_sum` and the closed-form sum rate against
/// `log2(1 + SNR)` with `|hd|^2 = SNR` and `|hi|^2 = SNR^alpha`.
pub fn empirical_gdof(k: usize, alpha: f64, snr_db: &[f64]) -> Result<EmpiricalGdof, GdofError> {
    check(alpha, k)?;
    if (alpha - 1.0).abs() < 0.1 {
        return Err(GdofError::NearDiscontinuity(alpha));
    }
    let mut xs = Vec::with_capacity(snr_db.len());
    let mut outer = Vec::with_capacity(snr_db.len());
    let mut inner = Vec::with_capacity(snr_db.len());
    for &db in snr_db {
        let ch = GaussianSymChannel::from_snr_db(db, alpha, k)?;
        xs.push(libm::log2(1.0 + ch.snr()));
        outer.push(outer_sum(&ch));
        inner.push(closed_form_sum(&ch)?);
    }
    Ok(EmpiricalGdof {
        outer_slope: slope(&xs, &outer).ok_or(GdofError::TooFewSnrPoints)?,
        inner_slope: slope(&xs, &inner).ok_or(GdofError::TooFewSnrPoints)?,
    })
}

fn closed_form_sum(ch: &GaussianSymChannel) -> Result<f64, GaussianError> {
    if ch.k() >= 3 {
        return dpc_rates(ch, &closed_form_params(ch)?).map(|r| r.sum());
    }
    // two users: the cognitive transmitter spends what the primary receiver
    // can tolerate on its own stream and beamforms the rest
    let h2 = ch.inr();
    let phase = if ch.hi().norm() > 0.0 {
        ch.hi() / ch.hi().norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let params = |strong: bool| {
        let mut p = DpcParams::zeros(2);
        p.alpha[0] = phase;
        let g = if strong { 1.0 / (1.0 + h2) } else { 1.0 };
        p.gamma[1] = Complex64::new(libm::sqrt(g), 0.0);
        p.alpha[1] = Complex64::new(libm::sqrt(1.0 - g), 0.0);
        p
    };
    let weak = dpc_rates(ch, &params(false))?.sum();
    let strong = dpc_rates(ch, &params(true))?.sum();
    Ok(if h2 > 1.0 {
        strong
    } else if h2 < 1.0 {
        weak
    } else {
        weak.max(strong)
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (xs.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Equal up to a few rounding steps of the operands' magnitude.
    fn ulps_eq(a: f64, b: f64) -> bool {
        (a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
    }

    fn grid(stop: f64, step: f64) -> Vec<f64> {
        let n = libm::round(stop / step) as usize;
        (0..=n).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn point_values() {
        assert_eq!(gdof_cms(2.0, 4, false).unwrap(), 6.0);
        for k in 2..7 {
            assert_eq!(gdof_cms(0.0, k, false).unwrap(), k as f64);
            assert_eq!(gdof_bc(0.0, k, false).unwrap(), k as f64);
            assert_eq!(gdof_cms(1.0, k, false).unwrap(), k as f64 - 1.0);
            for m in GdofModel::ALL {
                assert_eq!(m.gdof(1.0, k, true).unwrap(), 1.0);
            }
        }
        assert_eq!(gdof_bc(0.5, 3, false).unwrap(), 3.0);
        assert_eq!(gdof_ifc(0.0, 2, false).unwrap(), 2.0);
        assert_eq!(gdof_ifc(0.5, 2, false).unwrap(), 1.0);
        assert_eq!(gdof_ifc(2.0, 4, false).unwrap(), 4.0);
        assert!(gdof_cms(-0.1, 3, false).is_err());
        assert!(gdof_bc(1.0, 1, false).is_err());
    }

    #[test]
    fn w_curve_is_continuous_at_kinks() {
        for a in [0.5, 2.0 / 3.0, 1.0, 2.0] {
            let below = w_curve(a - 1e-12);
            let above = w_curve(a + 1e-12);
            assert!((below - above).abs() < 1e-9, "kink at {a}");
        }
    }

    #[test]
    fn normalized_cms_is_max_of_two_lines() {
        for k in 2..8 {
            let kf = k as f64;
            for a in grid(4.0, 0.125) {
                let d = gdof_cms(a, k, false).unwrap() / kf;
                assert!(ulps_eq(d, (1.0 - a / kf).max((kf - 1.0) * a / kf)), "k={k} a={a}");
            }
        }
    }

    #[test]
    fn normalized_cms_is_v_shaped() {
        for k in 2..8 {
            let g = grid(3.0, 0.05);
            let d: Vec<f64> = g.iter().map(|&a| gdof_cms(a, k, false).unwrap() / k as f64).collect();
            for i in 1..g.len() {
                if g[i] < 1.0 - 1e-12 {
                    assert!(d[i] < d[i - 1]);
                } else if g[i - 1] > 1.0 + 1e-12 {
                    assert!(d[i] > d[i - 1]);
                }
            }
        }
    }

    #[test]
    fn ordering_and_cms_loss() {
        for k in 2..8 {
            for a in grid(3.0, 0.05).into_iter().filter(|&a| a > 0.0 && (a - 1.0).abs() > 1e-9) {
                let (c, i, b) = (
                    gdof_cms(a, k, false).unwrap(),
                    gdof_ifc(a, k, false).unwrap(),
                    gdof_bc(a, k, false).unwrap(),
                );
                assert!(i <= c && c <= b, "k={k} a={a}");
                assert!(ulps_eq(b / k as f64 - c / k as f64, a / k as f64));
            }
        }
    }

    #[test]
    fn sweep_values_and_discontinuity() {
        let c = curve_sweep(GdofModel::Cms, 3, &[0.0, 0.5, 1.0, 1.5, 2.0], false, true).unwrap();
        let d: Vec<f64> = c.samples.iter().map(|s| s.d).collect();
        assert_eq!(d, vec![3.0, 2.5, 2.0, 3.0, 4.0]);
        assert_eq!(c.samples[2].at_discontinuity, Some(1.0));
        assert!(c.samples.iter().enumerate().all(|(i, s)| (i == 2) == s.at_discontinuity.is_some()));

        let n = curve_sweep(GdofModel::Bc, 5, &[0.0], true, false).unwrap();
        assert_eq!(n.samples[0].d, 1.0);
        let w = curve_sweep(GdofModel::Ifc, 2, &grid(3.0, 0.05), false, false).unwrap();
        assert!(w.samples.iter().all(|s| s.d == w_curve(s.alpha)));
        assert_eq!(curve_sweep(GdofModel::Bc, 3, &[], false, false), Err(GdofError::BadGrid));
        assert_eq!(curve_sweep(GdofModel::Bc, 3, &[1.0, 1.0], false, false), Err(GdofError::BadGrid));
    }

    #[test]
    fn slope_fit_recovers_prelog() {
        let snr: Vec<f64> = (0..5).map(|i| 40.0 + 10.0 * i as f64).collect();
        let e = empirical_gdof(3, 0.5, &snr).unwrap();
        assert!((e.outer_slope - 2.5).abs() < 0.05 && (e.inner_slope - 2.5).abs() < 0.05, "{e:?}");
        let e = empirical_gdof(2, 0.0, &snr).unwrap();
        assert!((e.outer_slope - 2.0).abs() < 0.05 && (e.inner_slope - 2.0).abs() < 0.05, "{e:?}");
        assert!(matches!(empirical_gdof(3, 0.95, &snr), Err(GdofError::NearDiscontinuity(_))));
        assert_eq!(empirical_gdof(3, 0.5, &[40.0]), Err(GdofError::TooFewSnrPoints));
    }

    #[test]
    fn two_user_inner_is_below_outer() {
        for &(hd, hi) in &[(10.0, 0.5), (10.0, 1.0), (10.0, 30.0), (0.0, 2.0)] {
            let ch = GaussianSymChannel::real(hd, hi, 2).unwrap();
            assert!(closed_form_sum(&ch).unwrap() <= outer_sum(&ch) + 1e-9);
        }
    }
}
