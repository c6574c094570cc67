//! Dense linear algebra over GF(2).
//!
//! Matrices are stored row-major with each row packed into `u64` words. Bit
//! position 0 of a vector is its most significant level: a shift by `k` moves
//! bit `j` to bit `j + k` and drops whatever falls past the end.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// A binary column vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b & 1 == 1);
        }
        v
    }

    /// Builds a vector from the low `len` bits of `value`, bit `j` of the
    /// vector taken from bit `j` of the integer.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = value & low_mask(len);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// Concatenates vectors top to bottom.
    pub fn concat<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = &'a BitVector>,
    {
        let parts: Vec<&BitVector> = parts.into_iter().collect();
        let len = parts.iter().map(|p| p.len).sum();
        let mut out = Self::zeros(len);
        let mut offset = 0;
        for p in parts {
            for i in 0..p.len {
                if p.get(i) {
                    out.set(offset + i, true);
                }
            }
            offset += p.len;
        }
        out
    }

    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len);
        let mut out = Self::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= WORD {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A dense binary matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    words: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            words: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 entries. All rows must share a length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                if c.get(i) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// The `m x m` matrix of `S^k`: entry `(j + k, j)` is one for every
    /// `j + k < m`. `S^0` is the identity and `S^k` vanishes for `k >= m`.
    pub fn shift(m: usize, k: usize) -> Self {
        let mut s = Self::zeros(m, m);
        for j in 0..m.saturating_sub(k) {
            s.set(j + k, j, true);
        }
        s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.words[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, bit: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.words[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if bit {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    fn row_words(&self, r: usize) -> &[u64] {
        &self.words[r * self.stride..(r + 1) * self.stride]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let (s, d) = (src * self.stride, dst * self.stride);
        for w in 0..self.stride {
            let v = self.words[s + w];
            self.words[d + w] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for w in 0..self.stride {
                self.words.swap(a * self.stride + w, b * self.stride + w);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn row(&self, r: usize) -> BitVector {
        let mut v = BitVector::zeros(self.cols);
        v.words.copy_from_slice(self.row_words(r));
        v
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(self.mismatch(other));
        }
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
        Ok(out)
    }

    pub fn matmul(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(self.mismatch(other));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = r * out.stride;
            for k in 0..self.cols {
                if self.get(r, k) {
                    let src = k * other.stride;
                    for w in 0..other.stride {
                        out.words[dst + w] ^= other.words[src + w];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, Gf2Error> {
        if self.cols != v.len {
            return Err(Gf2Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len,
                right_cols: 1,
            });
        }
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(&v.words)
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
                & 1;
            if parity == 1 {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.rows != other.rows {
            return Err(self.mismatch(other));
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.set(r, c, true);
                }
            }
            for c in 0..other.cols {
                if other.get(r, c) {
                    out.set(r, self.cols + c, true);
                }
            }
        }
        Ok(out)
    }

    /// `[self; other]`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(self.mismatch(other));
        }
        let mut out = BitMatrix::zeros(self.rows + other.rows, self.cols);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        out.words[self.words.len()..].copy_from_slice(&other.words);
        Ok(out)
    }

    pub fn select_columns(&self, idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, idx.len());
        for (j, &c) in idx.iter().enumerate() {
            for r in 0..self.rows {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Rows `start..start + len`.
    pub fn row_block(&self, start: usize, len: usize) -> BitMatrix {
        assert!(start + len <= self.rows);
        let mut out = BitMatrix::zeros(len, self.cols);
        out.words
            .copy_from_slice(&self.words[start * self.stride..(start + len) * self.stride]);
        out
    }

    /// Columns `start..start + len`.
    pub fn column_block(&self, start: usize, len: usize) -> BitMatrix {
        assert!(start + len <= self.cols);
        let idx: Vec<usize> = (start..start + len).collect();
        self.select_columns(&idx)
    }

    /// Reduces `self` in place to row echelon form, pivoting on the leftmost
    /// column with a nonzero entry at or below the current row. Returns the
    /// pivot columns.
    fn echelon_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.swap_rows(row, p);
            for r in row + 1..self.rows {
                if self.get(r, col) {
                    self.xor_row_into(row, r);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelon_in_place().len()
    }

    pub fn invert(&self) -> Result<BitMatrix, Gf2Error> {
        if !self.is_square() {
            return Err(Gf2Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut aug = self.hstack(&BitMatrix::identity(n))?;
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| aug.get(r, col)) else {
                return Err(Gf2Error::SingularMatrix);
            };
            aug.swap_rows(col, p);
            for r in 0..n {
                if r != col && aug.get(r, col) {
                    aug.xor_row_into(col, r);
                }
            }
        }
        Ok(aug.column_block(n, n))
    }

    /// A basis of the right null space `{x : self * x = 0}`, one vector per
    /// column of the result.
    pub fn kernel(&self) -> BitMatrix {
        let mut rref = self.clone();
        let pivots = rref.echelon_in_place();
        // back-substitute to reduced form
        for (i, &pc) in pivots.iter().enumerate().rev() {
            for r in 0..i {
                if rref.get(r, pc) {
                    rref.xor_row_into(i, r);
                }
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = BitMatrix::zeros(self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            basis.set(fc, j, true);
            for (i, &pc) in pivots.iter().enumerate() {
                if rref.get(i, fc) {
                    basis.set(pc, j, true);
                }
            }
        }
        basis
    }

    /// Solves `self * x = rhs` for `x`, one column of `x` per column of `rhs`.
    /// Returns `None` when some column of `rhs` lies outside the column space.
    pub fn solve(&self, rhs: &BitMatrix) -> Result<Option<BitMatrix>, Gf2Error> {
        if self.rows != rhs.rows {
            return Err(self.mismatch(rhs));
        }
        let n = self.cols;
        let mut aug = self.hstack(rhs)?;
        let pivots: Vec<usize> = aug
            .echelon_in_place()
            .into_iter()
            .take_while(|&c| c < n)
            .collect();
        // an echelon row whose leading one sits in the rhs block is inconsistent
        for r in pivots.len()..aug.rows {
            for c in n..aug.cols {
                if aug.get(r, c) {
                    return Ok(None);
                }
            }
        }
        for (i, &pc) in pivots.iter().enumerate().rev() {
            for r in 0..i {
                if aug.get(r, pc) {
                    aug.xor_row_into(i, r);
                }
            }
        }
        let mut x = BitMatrix::zeros(n, rhs.cols);
        for (i, &pc) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                if aug.get(i, n + c) {
                    x.set(pc, c, true);
                }
            }
        }
        Ok(Some(x))
    }

    fn mismatch(&self, other: &BitMatrix) -> Gf2Error {
        Gf2Error::DimensionMismatch {
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Shorthand for [`BitMatrix::shift`].
pub fn shift_matrix(m: usize, k: usize) -> BitMatrix {
    BitMatrix::shift(m, k)
}

/// Greedily extends a basis of `col(span)` with columns of `candidates`,
/// scanning candidates left to right. Returns the chosen candidate indices;
/// their count is `rank([span | candidates]) - rank(span)`.
pub fn basis_complete(span: &BitMatrix, candidates: &BitMatrix) -> Result<Vec<usize>, Gf2Error> {
    let order: Vec<usize> = (0..candidates.cols()).collect();
    basis_complete_ordered(span, candidates, &order)
}

/// [`basis_complete`] with an explicit scan order over candidate columns.
pub fn basis_complete_ordered(
    span: &BitMatrix,
    candidates: &BitMatrix,
    order: &[usize],
) -> Result<Vec<usize>, Gf2Error> {
    if span.rows() != candidates.rows() {
        return Err(span.mismatch(candidates));
    }
    // Reduced basis kept as rows (transposed columns) indexed by pivot bit.
    let n = span.rows();
    let mut basis: Vec<(usize, BitVector)> = Vec::new();
    let insert = |v: BitVector, basis: &mut Vec<(usize, BitVector)>| -> bool {
        let mut v = v;
        for (p, b) in basis.iter() {
            if v.get(*p) {
                v.xor_assign(b);
            }
        }
        match (0..n).find(|&i| v.get(i)) {
            Some(p) => {
                basis.push((p, v));
                true
            }
            None => false,
        }
    };
    for c in 0..span.cols() {
        insert(span.column(c), &mut basis);
    }
    let mut chosen = Vec::new();
    for &c in order {
        if insert(candidates.column(c), &mut basis) {
            chosen.push(c);
        }
    }
    Ok(chosen)
}
