//! Linear (blocklength one) schemes over GF(2).

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bounds::{f_function, ldc3_sum_outer};
use super::{Gain, LdcError, LdcGains};
use crate::gf2::{basis_complete_ordered, BitMatrix};

/// Randomized retries after the greedy construction for three users.
pub const GENERIC3_FALLBACK_ATTEMPTS: usize = 10_000;

/// Per-transmitter linear encoders and per-receiver linear decoders.
///
/// Encoder `i` maps the concatenation `[U_1; ...; U_i]` of the first `i + 1`
/// messages (zero-based) to the `m`-bit input `X_i`; decoder `l` maps `Y_l`
/// to the `rates[l]` bits of `U_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdcScheme {
    m: usize,
    rates: Vec<usize>,
    encoders: Vec<BitMatrix>,
    decoders: Vec<BitMatrix>,
}

impl LdcScheme {
    pub fn new(
        m: usize,
        rates: Vec<usize>,
        encoders: Vec<BitMatrix>,
        decoders: Vec<BitMatrix>,
    ) -> Result<Self, LdcError> {
        let k = rates.len();
        if encoders.len() != k || decoders.len() != k {
            return Err(LdcError::SchemeShape("one encoder and decoder per user"));
        }
        let mut known = 0;
        for i in 0..k {
            known += rates[i];
            if encoders[i].rows() != m || encoders[i].cols() != known {
                return Err(LdcError::SchemeShape(
                    "encoder i must be m x (r_1 + ... + r_i)",
                ));
            }
            if decoders[i].rows() != rates[i] || decoders[i].cols() != m {
                return Err(LdcError::SchemeShape("decoder l must be r_l x m"));
            }
        }
        Ok(Self {
            m,
            rates,
            encoders,
            decoders,
        })
    }

    pub fn k(&self) -> usize {
        self.rates.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn rates(&self) -> &[usize] {
        &self.rates
    }

    pub fn sum_rate(&self) -> usize {
        self.rates.iter().sum()
    }

    pub fn encoder(&self, i: usize) -> &BitMatrix {
        &self.encoders[i]
    }

    pub fn decoder(&self, l: usize) -> &BitMatrix {
        &self.decoders[l]
    }

    pub fn total_message_bits(&self) -> usize {
        self.sum_rate()
    }

    /// Offset of message `j` inside the concatenated message vector.
    pub fn message_offset(&self, j: usize) -> usize {
        self.rates[..j].iter().sum()
    }

    /// Columns of encoder `i` acting on message `j` (`j <= i`).
    pub fn encoder_block(&self, i: usize, j: usize) -> BitMatrix {
        assert!(j <= i);
        self.encoders[i].column_block(self.message_offset(j), self.rates[j])
    }

    /// The `m x total` map from all messages to `Y_l`.
    pub fn composite(&self, g: &LdcGains, l: usize) -> Result<BitMatrix, LdcError> {
        composite_map(g, &self.encoders, self.sum_rate(), l)
    }
}

fn composite_map(
    g: &LdcGains,
    encoders: &[BitMatrix],
    total: usize,
    l: usize,
) -> Result<BitMatrix, LdcError> {
    let m = g.m();
    let mut acc = BitMatrix::zeros(m, total);
    for (i, enc) in encoders.iter().enumerate() {
        let padded = enc.hstack(&BitMatrix::zeros(m, total - enc.cols()))?;
        acc = acc.add(&g.link(l, i).matmul(&padded)?)?;
    }
    Ok(acc)
}

/// Finds linear decoders for the given encoders, or `None` if some receiver
/// cannot isolate its own message.
fn derive_decoders(
    g: &LdcGains,
    rates: &[usize],
    encoders: &[BitMatrix],
) -> Result<Option<Vec<BitMatrix>>, LdcError> {
    let total: usize = rates.iter().sum();
    let mut decoders = Vec::with_capacity(rates.len());
    let mut offset = 0;
    for (l, &r) in rates.iter().enumerate() {
        let composite = composite_map(g, encoders, total, l)?;
        // D * composite = [0 I 0]  <=>  composite^T * D^T = [0 I 0]^T
        let mut target = BitMatrix::zeros(total, r);
        for b in 0..r {
            target.set(offset + b, b, true);
        }
        match composite.transpose().solve(&target)? {
            Some(dt) => decoders.push(dt.transpose()),
            None => return Ok(None),
        }
        offset += r;
    }
    Ok(Some(decoders))
}

fn selector(rows: usize, idx: &[usize]) -> BitMatrix {
    let mut s = BitMatrix::zeros(rows, idx.len());
    for (b, &r) in idx.iter().enumerate() {
        s.set(r, b, true);
    }
    s
}

/// `X_j = U_j` for `j < K`; transmitter `K` sends the top `ni` levels of
/// `sum_j U_j` plus its own message in the bottom `[nd - ni]+` levels, which
/// cancels the aggregate interference at every receiver. With `nd == ni` the
/// channel is a multiple-access channel and user 1 alone sends `nd` bits.
pub fn build_sym_scheme(nd: Gain, ni: Gain, k: usize) -> Result<LdcScheme, LdcError> {
    if k < 2 {
        return Err(LdcError::TooFewUsers { min: 2, found: k });
    }
    let m = nd.max(ni) as usize;
    if nd == ni {
        let mut rates = vec![0; k];
        rates[0] = m;
        let mut encoders = vec![BitMatrix::identity(m)];
        encoders.extend((1..k).map(|_| BitMatrix::zeros(m, m)));
        let mut decoders = vec![BitMatrix::identity(m)];
        decoders.extend((1..k).map(|_| BitMatrix::zeros(0, m)));
        return LdcScheme::new(m, rates, encoders, decoders);
    }

    let (nd_, ni_) = (nd as usize, ni as usize);
    let private = nd_.saturating_sub(ni_);
    let mut rates = vec![m; k - 1];
    rates.push(private);

    let mut encoders = Vec::with_capacity(k);
    for j in 0..k - 1 {
        let before = BitMatrix::zeros(m, j * m);
        encoders.push(before.hstack(&BitMatrix::identity(m))?);
    }
    let mut top = BitMatrix::zeros(m, m);
    for r in 0..ni_ {
        top.set(r, r, true);
    }
    let mut last = BitMatrix::zeros(m, 0);
    for _ in 0..k - 1 {
        last = last.hstack(&top)?;
    }
    let mut bottom = BitMatrix::zeros(m, private);
    for b in 0..private {
        bottom.set(ni_ + b, b, true);
    }
    encoders.push(last.hstack(&bottom)?);

    let effective = BitMatrix::shift(m, m - nd_).add(&BitMatrix::shift(m, m - ni_))?;
    let inverse = effective.invert()?;
    let mut decoders: Vec<BitMatrix> = (0..k - 1).map(|_| inverse.clone()).collect();
    decoders.push(inverse.row_block(ni_, private));
    LdcScheme::new(m, rates, encoders, decoders)
}

/// Builds a three-user scheme meeting the sum-capacity bound.
///
/// User 1 fills the column space of `[G11 G12 G13]`. The cognitive pair
/// `[X2; X3]` sends user 2 along `ker [G12 G13]`, invisible at receiver 1, and
/// pre-cancels the part of user 1's signal at receiver 2 that would overlap
/// user 2's subspace. When `n33 > max(n13, n23)` transmitter 3 adds a private
/// layer `S^max(n13,n23) V3` that never reaches receivers 1 and 2, with `V3`
/// pre-coded against everything else seen in the bottom levels of `Y3`.
pub fn build_generic3_scheme(g: &LdcGains) -> Result<LdcScheme, LdcError> {
    let bound = ldc3_sum_outer(g)?.value as usize;
    if let Some(s) = generic3_attempt(g, None)? {
        if s.sum_rate() == bound {
            return Ok(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..GENERIC3_FALLBACK_ATTEMPTS {
        if let Some(s) = generic3_attempt(g, Some(&mut rng))? {
            if s.sum_rate() == bound {
                return Ok(s);
            }
        }
    }
    Err(LdcError::SchemeSearchFailed {
        attempts: 1 + GENERIC3_FALLBACK_ATTEMPTS,
    })
}

fn scan_order(n: usize, rng: &mut Option<&mut ChaCha8Rng>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(rng) = rng.as_deref_mut() {
        order.shuffle(rng);
    }
    order
}

fn random_invertible(n: usize, rng: &mut ChaCha8Rng) -> BitMatrix {
    loop {
        let mut t = BitMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                t.set(r, c, rng.gen::<bool>());
            }
        }
        if t.rank() == n {
            return t;
        }
    }
}

fn generic3_attempt(
    g: &LdcGains,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<Option<LdcScheme>, LdcError> {
    let m = g.m();
    let n = |l: usize, i: usize| g.gain(l, i) as usize;
    let link = |l: usize, i: usize| g.link(l, i);

    let cog1 = link(0, 1).hstack(&link(0, 2))?;
    let cog2 = link(1, 1).hstack(&link(1, 2))?;

    // user 1 over all three transmitters
    let reach1 = link(0, 0).hstack(&cog1)?;
    let idx1 = basis_complete_ordered(
        &BitMatrix::zeros(m, 0),
        &reach1,
        &scan_order(3 * m, &mut rng),
    )?;
    let sel1 = selector(3 * m, &idx1);
    let enc1 = sel1.row_block(0, m);
    let mut cog_u1 = sel1.row_block(m, 2 * m);

    // user 2 inside the null space of the cognitive links into receiver 1
    let mut ker = cog1.kernel();
    if let Some(r) = rng.as_deref_mut() {
        ker = ker.matmul(&random_invertible(ker.cols(), r))?;
    }
    let seen2 = cog2.matmul(&ker)?;
    let idx2 = basis_complete_ordered(
        &BitMatrix::zeros(m, 0),
        &seen2,
        &scan_order(seen2.cols(), &mut rng),
    )?;
    let cog_u2 = ker.select_columns(&idx2);
    let r2 = idx2.len();
    debug_assert_eq!(r2, f_function(g.gain(1, 1), g.gain(1, 2), g.gain(0, 1), g.gain(0, 2)) as usize);

    // Move user 1's footprint at receiver 2 out of user 2's subspace.
    let sub2 = cog2.matmul(&cog_u2)?;
    let comp = basis_complete_ordered(&sub2, &BitMatrix::identity(m), &scan_order(m, &mut rng))?;
    let frame = sub2.hstack(&BitMatrix::identity(m).select_columns(&comp))?;
    let leak = link(1, 0).matmul(&enc1)?.add(&cog2.matmul(&cog_u1)?)?;
    let coords = frame.invert()?.matmul(&leak)?;
    cog_u1 = cog_u1.add(&cog_u2.matmul(&coords.row_block(0, r2))?)?;

    let x2_u1 = cog_u1.row_block(0, m);
    let mut x3_u1 = cog_u1.row_block(m, m);
    let x2_u2 = cog_u2.row_block(0, m);
    let mut x3_u2 = cog_u2.row_block(m, m);

    // private layer for user 3
    let hide = n(0, 2).max(n(1, 2));
    let r3 = n(2, 2).saturating_sub(hide);
    let mut x3_u3 = BitMatrix::zeros(m, r3);
    if r3 > 0 {
        let mut top = BitMatrix::zeros(m, r3);
        for b in 0..r3 {
            top.set(b, b, true);
        }
        let place = BitMatrix::shift(m, hide).matmul(&top)?;
        let at3 = |x1: &BitMatrix, x2: &BitMatrix, x3: &BitMatrix| -> Result<BitMatrix, LdcError> {
            let y = link(2, 0)
                .matmul(x1)?
                .add(&link(2, 1).matmul(x2)?)?
                .add(&link(2, 2).matmul(x3)?)?;
            Ok(y.row_block(m - r3, r3))
        };
        let dirt1 = at3(&enc1, &x2_u1, &x3_u1)?;
        let dirt2 = at3(&BitMatrix::zeros(m, r2), &x2_u2, &x3_u2)?;
        x3_u1 = x3_u1.add(&place.matmul(&dirt1)?)?;
        x3_u2 = x3_u2.add(&place.matmul(&dirt2)?)?;
        x3_u3 = place;
    }

    let rates = vec![idx1.len(), r2, r3];
    let encoders = vec![
        enc1,
        x2_u1.hstack(&x2_u2)?,
        x3_u1.hstack(&x3_u2)?.hstack(&x3_u3)?,
    ];
    match derive_decoders(g, &rates, &encoders)? {
        Some(decoders) => Ok(Some(LdcScheme::new(m, rates, encoders, decoders)?)),
        None => Ok(None),
    }
}
