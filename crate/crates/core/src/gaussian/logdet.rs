//! Log-determinants of conditional covariances for jointly Gaussian vectors.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::GaussianError;
use crate::tolerances;

/// Dense `n x n` Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    a: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Builds from the upper triangle of `f`; the lower triangle is mirrored.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = Complex64::new(f(i, i).re, 0.0);
            for j in i + 1..n {
                let v = f(i, j);
                m.a[i * n + j] = v;
                m.a[j * n + i] = v.conj();
            }
        }
        m
    }

    pub fn real(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(n, |i, j| Complex64::new(f(i, j), 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[i * self.n + j]
    }

    /// Adds `z` at `(i, j)`; the caller keeps the matrix Hermitian.
    pub fn add_at(&mut self, i: usize, j: usize, z: Complex64) {
        self.a[i * self.n + j] += z;
    }

    /// Adds `v v^H`.
    pub fn add_outer(&mut self, v: &[Complex64]) {
        for i in 0..self.n {
            for j in 0..self.n {
                self.a[i * self.n + j] += v[i] * v[j].conj();
            }
        }
    }

    fn scale(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).re.abs()).fold(1.0, f64::max)
    }

    /// Pivots of a symmetric-pivoted elimination; the matrix is PSD iff none
    /// is below `-tol` (relative to the largest diagonal entry).
    fn min_pivot(&self) -> f64 {
        let mut w = self.a.clone();
        let n = self.n;
        let mut left: Vec<usize> = (0..n).collect();
        let mut min = f64::INFINITY;
        while !left.is_empty() {
            let (pos, &p) = left
                .iter()
                .enumerate()
                .max_by(|x, y| w[x.1 * n + x.1].re.total_cmp(&w[y.1 * n + y.1].re))
                .expect("non-empty");
            let d = w[p * n + p].re;
            min = min.min(d);
            if d <= tolerances::PIVOT_ZERO * self.scale() {
                // everything left has a vanishing diagonal, so any surviving
                // off-diagonal entry makes the matrix indefinite
                for &i in &left {
                    for &j in &left {
                        if i != j {
                            min = min.min(-w[i * n + j].norm());
                        }
                    }
                }
                break;
            }
            left.swap_remove(pos);
            eliminate(&mut w, n, p, &left);
        }
        min
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.n == 0 || self.min_pivot() >= -tol * self.scale()
    }
}

fn eliminate(w: &mut [Complex64], n: usize, p: usize, rest: &[usize]) {
    let d = w[p * n + p].re;
    for &i in rest {
        let f = w[i * n + p] / d;
        if f == Complex64::new(0.0, 0.0) {
            continue;
        }
        for &j in rest {
            let v = w[p * n + j];
            w[i * n + j] -= f * v;
        }
    }
}

/// `log2 det Cov(targets | given)` split into a finite part and the number of
/// targets that are (numerically) determined by `given` and earlier targets.
fn conditional_logdet(cov: &HermitianMatrix, targets: &[usize], given: &[usize]) -> (f64, usize) {
    let n = cov.n;
    let mut w = cov.a.clone();
    let zero = tolerances::PIVOT_ZERO * cov.scale();
    let mut active: Vec<usize> = given.iter().chain(targets).copied().collect();
    let mut logdet = 0.0;
    let mut degenerate = 0;
    for (step, _) in given.iter().chain(targets).enumerate() {
        let p = active.remove(0);
        let d = w[p * n + p].re;
        let is_target = step >= given.len();
        if d <= zero {
            if is_target {
                degenerate += 1;
            }
            continue;
        }
        if is_target {
            logdet += libm::log2(d);
        }
        eliminate(&mut w, n, p, &active);
    }
    (logdet, degenerate)
}

/// `I(A; B | C)` in bits for jointly Gaussian entries of `cov`, indexed by
/// the three disjoint index lists. Infinite when `B` pins down a direction of
/// `A` that `C` alone does not.
pub fn mutual_info_gaussian(
    cov: &HermitianMatrix,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> Result<f64, GaussianError> {
    if !cov.is_psd(tolerances::PIVOT_ZERO) {
        return Err(GaussianError::NonPsdInput {
            pivot: cov.min_pivot(),
        });
    }
    Ok(mutual_info_unchecked(cov, a, b, c))
}

pub(crate) fn mutual_info_unchecked(cov: &HermitianMatrix, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let (ld_c, deg_c) = conditional_logdet(cov, a, c);
    let bc: Vec<usize> = b.iter().chain(c).copied().collect();
    let (ld_bc, deg_bc) = conditional_logdet(cov, a, &bc);
    if deg_bc > deg_c {
        f64::INFINITY
    } else {
        (ld_c - ld_bc).max(0.0)
    }
}
