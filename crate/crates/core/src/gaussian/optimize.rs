//! Numerical tightening of both bounds.
//!
//! The inner bound maximizes the dirty-paper sum rate over feasible
//! parameters. The outer bound evaluates the three-user sum-rate functional
//! for Gaussian inputs, maximizes it over the input covariance and minimizes
//! over noise correlations that keep every receiver's marginal unchanged.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bounds::outer_sum;
use super::dpc::{closed_form_params, covariances, dpc_rates, DpcParams};
use super::logdet::HermitianMatrix;
use super::{GaussianError, GaussianSymChannel};
use crate::tolerances;

const INNER_STARTS: usize = 16;
const INNER_ASCENT_STARTS: usize = 4;
const GRID_POINTS: usize = 8;
const GOLDEN_STEPS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOptimum {
    pub params: DpcParams,
    pub sum_rate: f64,
    pub evaluations: usize,
}

/// Box coordinates: `[beta, (u_2, theta_2), ..., (u_K, theta_K)]`. Antenna
/// `j` spends a fraction `u_j` of the power left after the zero-forcing layer,
/// split between beamforming and its private stream by the angle `theta_j`.
struct InnerBox {
    k: usize,
    hi_phase: Complex64,
}

impl InnerBox {
    fn dim(&self) -> usize {
        1 + 2 * (self.k - 1)
    }

    fn beta_max(&self) -> f64 {
        if self.k > 2 {
            1.0 / libm::sqrt((self.k - 2) as f64)
        } else {
            0.0
        }
    }

    fn upper(&self, c: usize) -> f64 {
        match c {
            0 => self.beta_max(),
            c if c % 2 == 1 => 1.0,
            _ => FRAC_PI_2,
        }
    }

    fn residual(&self, j: usize, beta: f64) -> f64 {
        let zf = if j + 1 < self.k { beta * beta } else { (self.k - 2) as f64 * beta * beta };
        (1.0 - zf).max(0.0)
    }

    fn decode(&self, x: &[f64]) -> DpcParams {
        let mut p = DpcParams::zeros(self.k);
        p.alpha[0] = self.hi_phase;
        p.beta = Complex64::new(x[0], 0.0);
        for j in 1..self.k {
            let (u, t) = (x[2 * j - 1], x[2 * j]);
            let s = libm::sqrt(u * self.residual(j, x[0]));
            p.alpha[j] = Complex64::new(s * libm::cos(t), 0.0);
            p.gamma[j] = Complex64::new(s * libm::sin(t), 0.0);
        }
        p
    }

    fn encode(&self, p: &DpcParams) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        x[0] = p.beta.norm().min(self.beta_max());
        for j in 1..self.k {
            let (a, g) = (p.alpha[j].norm(), p.gamma[j].norm());
            let r = self.residual(j, x[0]);
            x[2 * j - 1] = if r > 0.0 { ((a * a + g * g) / r).min(1.0) } else { 0.0 };
            x[2 * j] = libm::atan2(g, a);
        }
        x
    }
}

/// Coordinate ascent: each coordinate gets a coarse grid over its range and
/// a golden-section refinement around the best grid point.
fn coordinate_ascent(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &mut [f64],
    mut value: f64,
    upper: &dyn Fn(usize) -> f64,
    evals: &mut usize,
    limit: usize,
) -> f64 {
    let invphi = (libm::sqrt(5.0) - 1.0) / 2.0;
    loop {
        let before = value;
        for c in 0..x.len() {
            let hi = upper(c);
            if hi <= 0.0 {
                continue;
            }
            let mut try_at = |x: &mut [f64], t: f64, evals: &mut usize| {
                let keep = x[c];
                x[c] = t;
                let v = f(x);
                *evals += 1;
                x[c] = keep;
                v
            };
            let mut best_t = x[c];
            for i in 0..GRID_POINTS {
                if *evals >= limit {
                    return value;
                }
                let t = hi * i as f64 / (GRID_POINTS - 1) as f64;
                let v = try_at(x, t, evals);
                if v > value {
                    value = v;
                    best_t = t;
                }
            }
            let h = hi / (GRID_POINTS - 1) as f64;
            let (mut a, mut b) = ((best_t - h).max(0.0), (best_t + h).min(hi));
            let mut c1 = b - invphi * (b - a);
            let mut c2 = a + invphi * (b - a);
            let (mut f1, mut f2) = (try_at(x, c1, evals), try_at(x, c2, evals));
            for _ in 0..GOLDEN_STEPS {
                if *evals >= limit {
                    break;
                }
                if f1 > value {
                    value = f1;
                    best_t = c1;
                }
                if f2 > value {
                    value = f2;
                    best_t = c2;
                }
                if f1 >= f2 {
                    b = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = b - invphi * (b - a);
                    f1 = try_at(x, c1, evals);
                } else {
                    a = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = a + invphi * (b - a);
                    f2 = try_at(x, c2, evals);
                }
            }
            for (t, v) in [(c1, f1), (c2, f2)] {
                if v > value {
                    value = v;
                    best_t = t;
                }
            }
            x[c] = best_t;
        }
        if value - before < tolerances::CONVERGENCE || *evals >= limit {
            return value;
        }
    }
}

/// Maximizes the dirty-paper sum rate over feasible parameters.
///
/// Sixteen starts are always evaluated: the closed-form choice (for `K >= 3`),
/// private streams only, full beamforming, and seeded random points. The best
/// few are then improved by coordinate ascent while the total number of rate
/// evaluations stays below `budget`.
pub fn optimize_inner(
    ch: &GaussianSymChannel,
    budget: usize,
    seed: u64,
) -> Result<InnerOptimum, GaussianError> {
    let k = ch.k();
    let hi_phase = if ch.hi().norm() > 0.0 {
        ch.hi() / ch.hi().norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let bx = InnerBox { k, hi_phase };
    let mut evals = 0usize;
    let sum_at = |p: &DpcParams| dpc_rates(ch, p).map(|r| r.sum()).unwrap_or(f64::NEG_INFINITY);

    let mut best: Option<(DpcParams, f64)> = None;
    let consider = |p: DpcParams, v: f64, best: &mut Option<(DpcParams, f64)>| {
        if best.as_ref().is_none_or(|b| v > b.1) {
            *best = Some((p, v));
        }
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(INNER_STARTS);
    if k >= 3 {
        let closed = closed_form_params(ch)?;
        let v = sum_at(&closed);
        evals += 1;
        consider(closed.clone(), v, &mut best);
        starts.push(bx.encode(&closed));
    }
    let mut private = vec![0.0; bx.dim()];
    let mut beam = vec![0.0; bx.dim()];
    for j in 1..k {
        private[2 * j - 1] = 1.0;
        private[2 * j] = FRAC_PI_2;
        beam[2 * j - 1] = 1.0;
    }
    starts.push(private);
    starts.push(beam);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < INNER_STARTS {
        starts.push((0..bx.dim()).map(|c| rng.gen::<f64>() * bx.upper(c)).collect());
    }

    let mut scored: Vec<(Vec<f64>, f64)> = starts
        .into_iter()
        .map(|x| {
            let v = sum_at(&bx.decode(&x));
            evals += 1;
            (x, v)
        })
        .collect();
    for (x, v) in &scored {
        consider(bx.decode(x), *v, &mut best);
    }

    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let share = budget.saturating_sub(evals) / INNER_ASCENT_STARTS;
    for (x, v) in scored.iter_mut().take(INNER_ASCENT_STARTS) {
        if share == 0 {
            break;
        }
        let limit = evals + share;
        let mut f = |x: &[f64]| sum_at(&bx.decode(x));
        let upper = |c: usize| bx.upper(c);
        let value = coordinate_ascent(&mut f, x, *v, &upper, &mut evals, limit);
        consider(bx.decode(x), value, &mut best);
    }

    let (params, sum_rate) = best.expect("at least one start");
    Ok(InnerOptimum {
        params,
        sum_rate,
        evaluations: evals,
    })
}

/// Largest noise correlation magnitude searched.
pub const NOISE_RHO_MAX: f64 = 0.99;
const RHO_GRID: [f64; 5] = [-0.6, -0.3, 0.0, 0.3, 0.6];
const RHO_STEP_START: f64 = 0.15;
const RHO_STEP_MIN: f64 = 1e-3;
const Q_ITERATIONS: usize = 100;
const Q_POLISH_ITERATIONS: usize = 400;
const Q_RANDOM_POLISH_STARTS: usize = 4;
const DPC_START_BUDGET: usize = 2000;
const POLISH_TRIES: usize = 40;
const POLISH_KEEP: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct OuterOptimum {
    /// `min(raw, outer_sum)`.
    pub value: f64,
    /// Best min-max value found over noise correlations.
    pub raw: f64,
    /// `(rho_12, rho_13, rho_23)` at the optimum.
    pub rho: [f64; 3],
    /// Max over input covariances with independent noise.
    pub independent_noise: f64,
    pub input_covariance: HermitianMatrix,
    /// Number of inner maximizations over the input covariance.
    pub evaluations: usize,
}

type Square = [[Complex64; 3]; 3];

/// Every variable as a row of coefficients on six independent unit
/// sources: three driving the inputs, three driving the noise.
type Row = [Complex64; 6];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn noise_ok(rho: [f64; 3]) -> bool {
    let [a, b, c] = rho;
    let det = 1.0 + 2.0 * a * b * c - a * a - b * b - c * c;
    rho.iter().all(|r| r.abs() <= NOISE_RHO_MAX) && det >= tolerances::PSD_DET_MIN
}

/// Lower-triangular `L` with `L L^H = a` for positive semidefinite `a`;
/// columns with a vanishing pivot are left at zero.
fn cholesky_psd(a: &HermitianMatrix) -> Square {
    let mut l = [[ZERO; 3]; 3];
    let scale = (0..3).map(|i| a.get(i, i).re).fold(1.0, f64::max);
    for j in 0..3 {
        let d = a.get(j, j).re - (0..j).map(|t| l[j][t].norm_sqr()).sum::<f64>();
        if d <= tolerances::PIVOT_ZERO * scale {
            continue;
        }
        let s = libm::sqrt(d);
        l[j][j] = Complex64::new(s, 0.0);
        for i in j + 1..3 {
            let v = a.get(i, j) - (0..j).map(|t| l[i][t] * l[j][t].conj()).sum::<Complex64>();
            l[i][j] = v / s;
        }
    }
    l
}

fn noise_factor(rho: [f64; 3]) -> Square {
    let n = HermitianMatrix::real(3, |i, j| match (i, j) {
        _ if i == j => 1.0,
        (0, 1) => rho[0],
        (0, 2) => rho[1],
        _ => rho[2],
    });
    cholesky_psd(&n)
}

/// `Var(target | observed)` as the squared distance from `target` to the
/// span of `observed`, by modified Gram-Schmidt with re-orthogonalization.
fn residual_variance(observed: &[Row], target: &Row) -> f64 {
    let norm = |r: &Row| libm::sqrt(r.iter().map(|z| z.norm_sqr()).sum());
    let mut basis: Vec<Row> = Vec::with_capacity(observed.len());
    let reduce = |r: &mut Row, basis: &[Row]| {
        for _ in 0..2 {
            for b in basis {
                let c: Complex64 = b.iter().zip(r.iter()).map(|(x, y)| x.conj() * y).sum();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
    };
    for o in observed {
        let size = norm(o);
        let mut r = *o;
        reduce(&mut r, &basis);
        let left = norm(&r);
        if left > 1e-13 * size {
            r.iter_mut().for_each(|z| *z /= left);
            basis.push(r);
        }
    }
    let mut t = *target;
    reduce(&mut t, &basis);
    t.iter().map(|z| z.norm_sqr()).sum()
}

/// Noise-only parts of the conditional entropies, independent of the inputs.
fn noise_terms(m: &Square) -> f64 {
    let z = |l: usize| -> Row {
        let mut r = [ZERO; 6];
        r[3..].copy_from_slice(&m[l]);
        r
    };
    libm::log2(residual_variance(&[z(0)], &z(1))) + libm::log2(residual_variance(&[z(0), z(1)], &z(2)))
}

fn functional_sqrt(h: &[Vec<Complex64>], l: &Square, m: &Square, noise: f64) -> f64 {
    let x = |i: usize| -> Row {
        let mut r = [ZERO; 6];
        r[..3].copy_from_slice(&l[i]);
        r
    };
    let y = |k: usize| -> Row {
        let mut r = [ZERO; 6];
        for t in 0..3 {
            r[t] = (0..3).map(|j| h[k][j] * l[j][t]).sum();
        }
        r[3..].copy_from_slice(&m[k]);
        r
    };
    let (x1, x2, y1, y2, y3) = (x(0), x(1), y(0), y(1), y(2));
    libm::log2(residual_variance(&[], &y1))
        + libm::log2(residual_variance(&[x1, y1], &y2))
        + libm::log2(residual_variance(&[x1, x2, y1, y2], &y3))
        - noise
}

/// `I(Y1; X) + I(Y2; X2, X3 | X1, Y1) + I(Y3; X3 | X1, X2, Y1, Y2)` for
/// Gaussian inputs with covariance `q` and unit-variance noises with the
/// given pairwise correlations.
pub fn outer_functional(
    ch: &GaussianSymChannel,
    q: &HermitianMatrix,
    rho: [f64; 3],
) -> Result<f64, GaussianError> {
    if ch.k() != 3 {
        return Err(GaussianError::UnsupportedUsers {
            supported: 3,
            found: ch.k(),
        });
    }
    if q.n() != 3 || !q.is_psd(tolerances::PIVOT_ZERO) || !noise_ok(rho) {
        return Err(GaussianError::NonPsdInput { pivot: f64::NAN });
    }
    for i in 0..3 {
        let power = q.get(i, i).re;
        if power > 1.0 + tolerances::POWER_ABS {
            return Err(GaussianError::PowerConstraintViolated { antenna: i, power });
        }
    }
    let h: Vec<Vec<Complex64>> = (0..3).map(|l| ch.row(l)).collect();
    let m = noise_factor(rho);
    Ok(functional_sqrt(&h, &cholesky_psd(q), &m, noise_terms(&m)))
}

/// Input covariance `Q = L L^H`, `L` a 3x3 matrix with rows of norm at most
/// one. Real `L` suffices for a real channel.
#[derive(Clone)]
struct Factor {
    complex: bool,
    x: Vec<f64>,
}

impl Factor {
    fn from_rows(rows: Square, complex: bool) -> Self {
        let mut x = Vec::new();
        for r in rows {
            for z in r {
                x.push(z.re);
                if complex {
                    x.push(z.im);
                }
            }
        }
        let mut f = Self { complex, x };
        f.project();
        f
    }

    fn matrix(&self) -> Square {
        let mut l = [[ZERO; 3]; 3];
        for (i, row) in l.iter_mut().enumerate() {
            for (j, z) in row.iter_mut().enumerate() {
                *z = if self.complex {
                    Complex64::new(self.x[2 * (3 * i + j)], self.x[2 * (3 * i + j) + 1])
                } else {
                    Complex64::new(self.x[3 * i + j], 0.0)
                };
            }
        }
        l
    }

    fn project(&mut self) {
        let per_row = self.x.len() / 3;
        for row in self.x.chunks_mut(per_row) {
            let norm = libm::sqrt(row.iter().map(|v| v * v).sum());
            if norm > 1.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }

    fn covariance(&self) -> HermitianMatrix {
        let l = self.matrix();
        HermitianMatrix::from_fn(3, |i, j| (0..3).map(|t| l[i][t] * l[j][t].conj()).sum())
    }
}

/// Projected gradient ascent on `L` with forward differences and an adaptive step.
fn maximize_over_input(objective: &dyn Fn(&Square) -> f64, start: Factor, iterations: usize) -> (Factor, f64) {
    let mut cur = start;
    let mut value = objective(&cur.matrix());
    let mut step = 0.1;
    let eps = 1e-7;
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..cur.x.len())
            .map(|c| {
                let mut probe = cur.clone();
                probe.x[c] += eps;
                probe.project();
                (objective(&probe.matrix()) - value) / eps
            })
            .collect();
        let norm = libm::sqrt(grad.iter().map(|g| g * g).sum());
        if !(norm > 0.0) || !norm.is_finite() {
            break;
        }
        let mut improved = false;
        while step > 1e-9 {
            let mut next = cur.clone();
            for (v, g) in next.x.iter_mut().zip(&grad) {
                *v += step * g / norm;
            }
            next.project();
            let v = objective(&next.matrix());
            if v > value {
                improved = v - value > 1e-10;
                cur = next;
                value = v;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (cur, value)
}

/// Random-direction hill climbing with a shrinking radius; catches the
/// progress that gradient steps lose along narrow ridges.
fn perturbation_polish(
    objective: &dyn Fn(&Square) -> f64,
    start: (Factor, f64),
    rng: &mut ChaCha8Rng,
) -> (Factor, f64) {
    let (mut cur, mut value) = start;
    let mut radius = 0.1;
    while radius > 1e-7 {
        let mut improved = false;
        for _ in 0..POLISH_TRIES {
            let mut next = cur.clone();
            for v in next.x.iter_mut() {
                *v += radius * rng.gen_range(-1.0..1.0);
            }
            next.project();
            let v = objective(&next.matrix());
            if v > value {
                cur = next;
                value = v;
                improved = true;
            }
        }
        if !improved {
            radius /= 2.0;
        }
    }
    (cur, value)
}

/// Upper bound from min over noise correlations of max over input
/// covariances, three users only. `budget` caps the number of inner
/// maximizations; the search stops earlier once the correlation step falls
/// below `1e-3`.
pub fn optimize_outer(
    ch: &GaussianSymChannel,
    budget: usize,
    seed: u64,
) -> Result<OuterOptimum, GaussianError> {
    if ch.k() != 3 {
        return Err(GaussianError::UnsupportedUsers {
            supported: 3,
            found: ch.k(),
        });
    }
    let h: Vec<Vec<Complex64>> = (0..3).map(|l| ch.row(l)).collect();
    let complex = ch.hi().im != 0.0;
    let phase = if ch.hi().norm() > 0.0 {
        ch.hi() / ch.hi().norm()
    } else {
        ONE
    };
    let mut starts = vec![
        Factor::from_rows([[phase, ZERO, ZERO], [ONE, ZERO, ZERO], [ONE, ZERO, ZERO]], complex),
        Factor::from_rows([[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]], complex),
    ];
    // inputs of good dirty-paper schemes: their rates never exceed the functional
    for p in [closed_form_params(ch)?, optimize_inner(ch, DPC_START_BUDGET, seed)?.params] {
        let mut q = HermitianMatrix::zeros(3);
        for s in covariances(ch, &p)? {
            for i in 0..3 {
                for j in 0..3 {
                    q.add_at(i, j, s.get(i, j));
                }
            }
        }
        starts.push(Factor::from_rows(cholesky_psd(&q), complex));
    }

    let max_at = |rho: [f64; 3], starts: &[Factor], iterations: usize| -> (Factor, f64) {
        let m = noise_factor(rho);
        let noise = noise_terms(&m);
        let objective = |l: &Square| functional_sqrt(&h, l, &m, noise);
        starts
            .iter()
            .map(|s| maximize_over_input(&objective, s.clone(), iterations))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one start")
    };

    let mut used = 1usize;
    let origin = [0.0; 3];
    let (mut best_q, independent_value) = max_at(origin, &starts, Q_ITERATIONS);
    let mut best = (origin, independent_value);

    let evaluate = |rho: [f64; 3], warm: &Factor, used: &mut usize| -> Option<(Factor, f64)> {
        if !noise_ok(rho) || *used >= budget {
            return None;
        }
        *used += 1;
        let mut from = starts.clone();
        from.push(warm.clone());
        Some(max_at(rho, &from, Q_ITERATIONS))
    };

    for a in RHO_GRID {
        for b in RHO_GRID {
            for c in RHO_GRID {
                if let Some((q, v)) = evaluate([a, b, c], &best_q, &mut used) {
                    if v < best.1 {
                        best = ([a, b, c], v);
                        best_q = q;
                    }
                }
            }
        }
    }

    let mut step = RHO_STEP_START;
    while step >= RHO_STEP_MIN && used < budget {
        let mut moved = false;
        for c in 0..3 {
            for dir in [-1.0, 1.0] {
                let mut rho = best.0;
                rho[c] += dir * step;
                if let Some((q, v)) = evaluate(rho, &best_q, &mut used) {
                    if v < best.1 - tolerances::CONVERGENCE {
                        best = (rho, v);
                        best_q = q;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }

    // Re-maximize at the chosen correlations from more starts, so the
    // reported value is not an artifact of an inner search that stopped early.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut polish = starts.clone();
    polish.push(best_q);
    for _ in 0..Q_RANDOM_POLISH_STARTS {
        let mut r = [[ZERO; 3]; 3];
        for row in r.iter_mut() {
            for z in row.iter_mut() {
                let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
                *z = Complex64::new(rng.gen_range(-1.0..1.0), im);
            }
        }
        polish.push(Factor::from_rows(r, complex));
    }
    let m = noise_factor(best.0);
    let noise = noise_terms(&m);
    let objective = |l: &Square| functional_sqrt(&h, l, &m, noise);
    let mut climbed: Vec<(Factor, f64)> = polish
        .into_iter()
        .map(|s| maximize_over_input(&objective, s, Q_POLISH_ITERATIONS))
        .collect();
    climbed.sort_by(|a, b| b.1.total_cmp(&a.1));
    climbed.truncate(POLISH_KEEP);
    let (q, polished) = climbed
        .into_iter()
        .map(|c| {
            let c = perturbation_polish(&objective, c, &mut rng);
            maximize_over_input(&objective, c.0, Q_POLISH_ITERATIONS)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");
    let raw = polished.max(best.1);

    Ok(OuterOptimum {
        value: raw.min(outer_sum(ch)),
        raw,
        rho: best.0,
        independent_noise: independent_value,
        input_covariance: q.covariance(),
        evaluations: used,
    })
}
