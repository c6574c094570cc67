use std::io::Write;
use std::path::Path;

use cifc_core::gaussian::{
    analytic_chain_inner, analytic_gap_bound, beamforming_inner, closed_form_params, dpc_rates,
    optimize_inner, optimize_outer, outer_sum, GaussianSymChannel,
};
use cifc_core::gdof::{curve_sweep, empirical_gdof, GdofModel};
use cifc_core::ldc::{
    build_generic3_scheme, build_sym_scheme, ldc3_sum_outer, ldc_k_sym_sum_capacity,
    outer_bound_dominance_check, verify_scheme, LdcGains, LdcScheme, VerifyMode,
    EXHAUSTIVE_BIT_LIMIT, SAMPLED_DEFAULT_COUNT,
};
use cifc_core::tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{read_gains, ConfigError, Settings};

/// Invariant violations found during a sweep; each also goes to stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub violations: Vec<String>,
}

impl Outcome {
    fn violation(&mut self, msg: String) {
        eprintln!("violation: {msg}");
        self.violations.push(msg);
    }
}

/// Numeric optimizers approach their targets from one side only; an
/// optimized inner value may overshoot an optimized outer value by this much.
pub const NUMERIC_SLACK: f64 = 1e-3;

const DOMINANCE_TRIALS: usize = 1000;
const DEFAULT_MAX_GAIN: u32 = 3;

fn real(v: f64) -> String {
    format!("{v}")
}

fn optional(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn sym_channel_grid(s: &Settings) -> Result<Vec<(u32, u32, usize)>, ConfigError> {
    let nd = s.int_grid("nd")?.unwrap_or_else(|| (0..=4).collect());
    let ni = s.int_grid("ni")?.unwrap_or_else(|| (0..=4).collect());
    let ks = s.int_grid("k")?.unwrap_or_else(|| vec![3]);
    if let Some(&k) = ks.iter().find(|&&k| k < 2) {
        return Err(ConfigError::Field {
            field: "k".into(),
            msg: format!("need at least 2 users, got {k}"),
        });
    }
    let mut grid = Vec::new();
    for &d in &nd {
        for &i in &ni {
            for &k in &ks {
                grid.push((d, i, k as usize));
            }
        }
    }
    Ok(grid)
}

fn gains_from(s: &Settings) -> Result<Option<LdcGains>, ConfigError> {
    let Some(path) = s.get("gains") else {
        return Ok(None);
    };
    let rows = read_gains(Path::new(path))?;
    LdcGains::new(&rows)
        .map(Some)
        .map_err(|e| ConfigError::Field {
            field: "gains".into(),
            msg: e.to_string(),
        })
}

pub fn ldc_verify(s: &Settings, out: &mut dyn Write) -> Result<Outcome, ConfigError> {
    let seed = s.u64("seed")?.unwrap_or(0);
    let mode = |bits: usize| {
        if s.flag("exhaustive")? || bits <= EXHAUSTIVE_BIT_LIMIT {
            Ok::<_, ConfigError>(VerifyMode::Exhaustive)
        } else {
            Ok(VerifyMode::Sampled {
                seed,
                count: SAMPLED_DEFAULT_COUNT,
            })
        }
    };

    let mut jobs: Vec<(LdcGains, Option<(u32, u32)>)> = Vec::new();
    if let Some(g) = gains_from(s)? {
        let sym = g.as_symmetric();
        if sym.is_none() && g.k() != 3 {
            return Err(ConfigError::Field {
                field: "gains".into(),
                msg: format!("asymmetric gains need exactly 3 users, got {}", g.k()),
            });
        }
        jobs.push((g, sym));
    } else {
        for (nd, ni, k) in sym_channel_grid(s)? {
            jobs.push((LdcGains::symmetric(nd, ni, k), Some((nd, ni))));
        }
    }

    let mut w = csv::Writer::from_writer(out);
    w.write_record(["nd", "ni", "k", "sum_rate", "outer_bound", "verified", "mode"])?;
    let mut outcome = Outcome::default();
    for (g, sym) in jobs {
        let k = g.k();
        let built: Result<(LdcScheme, u64), _> = match sym {
            Some((nd, ni)) => build_sym_scheme(nd, ni, k)
                .and_then(|sch| Ok((sch, ldc_k_sym_sum_capacity(nd, ni, k)?.value))),
            None => build_generic3_scheme(&g).and_then(|sch| Ok((sch, ldc3_sum_outer(&g)?.value))),
        };
        let label = match sym {
            Some((nd, ni)) => format!("nd={nd} ni={ni} k={k}"),
            None => format!("gains {:?}", g.rows().collect::<Vec<_>>()),
        };
        let (scheme, bound) = match built {
            Ok(b) => b,
            Err(e) => {
                outcome.violation(format!("{label}: {e}"));
                continue;
            }
        };
        let report = verify_scheme(&g, &scheme, mode(scheme.total_message_bits())?).map_err(|e| {
            ConfigError::Field {
                field: "exhaustive".into(),
                msg: format!("{label}: {e}"),
            }
        })?;
        let rate = scheme.sum_rate() as u64;
        if !report.passed {
            outcome.violation(format!("{label}: decoding failed"));
        }
        if rate < bound {
            outcome.violation(format!("{label}: sum rate {rate} below bound {bound}"));
        }
        let (nd, ni) = sym.map_or((String::new(), String::new()), |(d, i)| (d.to_string(), i.to_string()));
        let mode = match report.mode {
            VerifyMode::Exhaustive => "exhaustive",
            _ => "sampled",
        };
        w.write_record([
            nd,
            ni,
            k.to_string(),
            rate.to_string(),
            bound.to_string(),
            report.passed.to_string(),
            mode.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(outcome)
}

pub fn ldc_outer(s: &Settings, out: &mut dyn Write) -> Result<Outcome, ConfigError> {
    let seed = s.u64("seed")?.unwrap_or(0);
    let trials = s.usize("trials")?.unwrap_or(DOMINANCE_TRIALS);
    let channels = if let Some(g) = gains_from(s)? {
        if g.k() != 3 {
            return Err(ConfigError::Field {
                field: "gains".into(),
                msg: format!("need exactly 3 users, got {}", g.k()),
            });
        }
        vec![g]
    } else {
        let count = s.usize("samples")?.unwrap_or(0);
        let max_gain = s.u64("max-gain")?.unwrap_or(DEFAULT_MAX_GAIN as u64) as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let rows: Vec<Vec<u32>> = (0..3)
                    .map(|_| (0..3).map(|_| rng.gen_range(0..=max_gain)).collect())
                    .collect();
                LdcGains::new(&rows).expect("square")
            })
            .collect()
    };

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n11", "n12", "n13", "n21", "n22", "n23", "n31", "n32", "n33", "outer", "term1", "term2",
        "term3", "case_label", "dominance_checked",
    ])?;
    let mut outcome = Outcome::default();
    for (idx, g) in channels.iter().enumerate() {
        let bound = ldc3_sum_outer(g).expect("three users");
        let case = if g.gain(2, 2) > g.gain(0, 2).max(g.gain(1, 2)) {
            "r3>0"
        } else {
            "r3=0"
        };
        let dominance = match outer_bound_dominance_check(g, trials, seed.wrapping_add(idx as u64)) {
            Ok(r) if r.passed() => "pass",
            Ok(r) => {
                outcome.violation(format!(
                    "gains {:?}: functional reached {} above bound {}",
                    g.rows().collect::<Vec<_>>(),
                    r.max_observed,
                    r.bound
                ));
                "fail"
            }
            Err(_) => "skipped",
        };
        let mut row: Vec<String> = g.rows().flatten().map(|n| n.to_string()).collect();
        row.push(bound.value.to_string());
        row.extend(bound.terms.iter().map(|(_, v)| v.to_string()));
        row.push(case.into());
        row.push(dominance.into());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(outcome)
}

pub fn gaussian_gap(s: &Settings, out: &mut dyn Write) -> Result<Outcome, ConfigError> {
    let seed = s.u64("seed")?.unwrap_or(0);
    let budget = s.usize("budget")?.unwrap_or(0);
    let ks = s.int_grid("k")?.unwrap_or_else(|| vec![3]);
    let alphas = s.real_grid("alpha")?.unwrap_or_else(|| vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    let snrs = s.real_grid("snr-db")?.unwrap_or_else(|| vec![20.0]);
    if let Some(&k) = ks.iter().find(|&&k| k < 3) {
        return Err(ConfigError::Field {
            field: "k".into(),
            msg: format!("need at least 3 users, got {k}"),
        });
    }
    if let Some(&a) = alphas.iter().find(|&&a| a < 0.0) {
        return Err(ConfigError::Field {
            field: "alpha".into(),
            msg: format!("must be non-negative, got {a}"),
        });
    }

    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "k",
        "snr_db",
        "alpha",
        "outer_analytic",
        "inner_closed",
        "gap_analytic_observed",
        "gap_analytic_chain",
        "gap_bound",
        "inner_opt",
        "outer_opt",
        "gap_numeric",
        "mult_ratio",
    ])?;
    let mut outcome = Outcome::default();
    for &k in &ks {
        let k = k as usize;
        let bound = analytic_gap_bound(k).expect("k >= 3");
        for &snr_db in &snrs {
            for &alpha in &alphas {
                let ch = GaussianSymChannel::from_snr_db(snr_db, alpha, k).map_err(|e| {
                    ConfigError::Field {
                        field: "snr-db".into(),
                        msg: e.to_string(),
                    }
                })?;
                let at = format!("k={k} snr_db={snr_db} alpha={alpha}");
                let outer = outer_sum(&ch);
                let inner = closed_form_params(&ch)
                    .and_then(|p| dpc_rates(&ch, &p))
                    .map(|r| r.sum());
                let inner = match inner {
                    Ok(v) => v,
                    Err(e) => {
                        outcome.violation(format!("{at}: {e}"));
                        continue;
                    }
                };
                let chain = analytic_chain_inner(&ch).expect("closed form succeeded");
                let gap = outer - inner;
                if inner > outer + tolerances::BOUND_ABS {
                    outcome.violation(format!("{at}: closed-form inner {inner} above outer {outer}"));
                }
                if gap > bound + tolerances::GAP_SLACK {
                    outcome.violation(format!("{at}: gap {gap} above {bound}"));
                }
                let bf = beamforming_inner(&ch);
                let ratio = (bf > 0.0).then(|| outer / bf);
                if let Some(r) = ratio {
                    if r > k as f64 + tolerances::BOUND_ABS {
                        outcome.violation(format!("{at}: outer/beamforming ratio {r} above {k}"));
                    }
                }

                let (mut inner_opt, mut outer_opt, mut gap_numeric) = (None, None, None);
                if budget > 0 {
                    let i = optimize_inner(&ch, budget, seed).expect("k >= 3").sum_rate;
                    let o = if k == 3 {
                        Some(optimize_outer(&ch, budget, seed).expect("k == 3").value)
                    } else {
                        None
                    };
                    if i > outer + tolerances::BOUND_ABS {
                        outcome.violation(format!("{at}: optimized inner {i} above outer {outer}"));
                    }
                    if let Some(o) = o {
                        if i > o + NUMERIC_SLACK {
                            outcome.violation(format!("{at}: optimized inner {i} above optimized outer {o}"));
                        }
                    }
                    inner_opt = Some(i);
                    outer_opt = o;
                    gap_numeric = Some(o.unwrap_or(outer) - i);
                }
                w.write_record([
                    k.to_string(),
                    real(snr_db),
                    real(alpha),
                    real(outer),
                    real(inner),
                    real(gap),
                    real(outer - chain),
                    real(bound),
                    optional(inner_opt),
                    optional(outer_opt),
                    optional(gap_numeric),
                    optional(ratio),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(outcome)
}

fn model(name: &str) -> Result<GdofModel, ConfigError> {
    GdofModel::ALL
        .into_iter()
        .find(|m| m.name().eq_ignore_ascii_case(name))
        .ok_or_else(|| ConfigError::Field {
            field: "models".into(),
            msg: format!("unknown model `{name}`, expected CMS, IFC or BC"),
        })
}

/// Allowed deviation of a fitted slope from the closed form.
pub const SLOPE_TOLERANCE: f64 = 0.05;

pub fn gdof_curves(s: &Settings, out: &mut dyn Write) -> Result<Outcome, ConfigError> {
    let models = s
        .text_list("models")
        .unwrap_or_else(|| GdofModel::ALL.iter().map(|m| m.name().to_string()).collect())
        .iter()
        .map(|m| model(m))
        .collect::<Result<Vec<_>, _>>()?;
    let ks = s.int_grid("k")?.unwrap_or_else(|| vec![3]);
    let alphas = s.real_grid("alpha")?.unwrap_or_else(|| {
        (0..=60).map(|i| i as f64 * 0.05).collect()
    });
    let snrs = s.real_grid("snr-db")?;
    let discontinuity = s.flag("discontinuity")?;
    let field = |f: &str, e: &dyn std::fmt::Display| ConfigError::Field {
        field: f.into(),
        msg: e.to_string(),
    };

    let mut header = vec!["model", "k", "alpha", "d", "d_normalized", "d_discontinuity"];
    if snrs.is_some() {
        header.extend(["empirical_outer_slope", "empirical_inner_slope"]);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    let mut outcome = Outcome::default();
    if alphas.is_empty() {
        w.flush()?;
        return Ok(outcome);
    }
    for &k in &ks {
        let k = k as usize;
        let curves = models
            .iter()
            .map(|&m| curve_sweep(m, k, &alphas, false, discontinuity))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| field(if k < 2 { "k" } else { "alpha" }, &e))?;

        for &alpha in &alphas {
            let d = |m: GdofModel| m.gdof(alpha, k, false).expect("validated by the sweep");
            let (c, f, b) = (d(GdofModel::Cms), d(GdofModel::Ifc), d(GdofModel::Bc));
            if !(f <= c && c <= b) {
                outcome.violation(format!("k={k} alpha={alpha}: ordering IFC {f} <= CMS {c} <= BC {b} fails"));
            }
        }

        for curve in &curves {
            for sample in &curve.samples {
                let mut row = vec![
                    curve.model.name().to_string(),
                    k.to_string(),
                    real(sample.alpha),
                    real(sample.d),
                    real(sample.d / k as f64),
                    optional(sample.at_discontinuity),
                ];
                if let Some(snrs) = &snrs {
                    let fit = (curve.model == GdofModel::Cms && (sample.alpha - 1.0).abs() >= 0.1)
                        .then(|| empirical_gdof(k, sample.alpha, snrs))
                        .transpose()
                        .map_err(|e| field("snr-db", &e))?;
                    row.push(optional(fit.map(|f| f.outer_slope)));
                    row.push(optional(fit.map(|f| f.inner_slope)));
                }
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(outcome)
}
