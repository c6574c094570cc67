//! Brute-force decodability checks by channel simulation.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LdcError, LdcGains, LdcScheme};
use crate::gf2::{low_mask, BitMatrix, BitVector};

/// Schemes carrying at most this many message bits are checked exhaustively
/// under [`VerifyMode::Auto`].
pub const EXHAUSTIVE_BIT_LIMIT: usize = 20;
pub const SAMPLED_DEFAULT_COUNT: u64 = 10_000;
const SAMPLED_DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { seed: u64, count: u64 },
    /// Exhaustive up to [`EXHAUSTIVE_BIT_LIMIT`] message bits, sampled above.
    Auto,
}

impl VerifyMode {
    pub fn resolve(self, total_bits: usize) -> VerifyMode {
        match self {
            VerifyMode::Auto if total_bits <= EXHAUSTIVE_BIT_LIMIT => VerifyMode::Exhaustive,
            VerifyMode::Auto => VerifyMode::Sampled {
                seed: SAMPLED_DEFAULT_SEED,
                count: SAMPLED_DEFAULT_COUNT,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// One message per user.
    pub messages: Vec<BitVector>,
    pub receiver: usize,
    pub decoded: BitVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub passed: bool,
    pub mode: VerifyMode,
    pub tuples_checked: u64,
    pub counterexample: Option<Counterexample>,
}

/// Simulates the channel on message tuples and checks every decoder.
pub fn verify_scheme(
    g: &LdcGains,
    s: &LdcScheme,
    mode: VerifyMode,
) -> Result<VerificationReport, LdcError> {
    if g.k() != s.k() {
        return Err(LdcError::UserCount {
            expected: g.k(),
            found: s.k(),
        });
    }
    if g.m() != s.m() {
        return Err(LdcError::SchemeShape("scheme dimension differs from max gain"));
    }
    let total = s.total_message_bits();
    let mode = mode.resolve(total);
    if let VerifyMode::Exhaustive = mode {
        if total >= 63 {
            return Err(LdcError::SchemeShape("too many message bits to enumerate"));
        }
    }
    let sim: Box<dyn Simulator> = if total <= 64 && s.m() <= 64 {
        Box::new(Packed::new(g, s))
    } else {
        Box::new(Dense { g, s })
    };

    let mut checked = 0u64;
    let mut check = |tuple: &MessageTuple| -> Option<Counterexample> {
        checked += 1;
        sim.first_failure(tuple)
    };
    let failure = match mode {
        VerifyMode::Exhaustive => (0..1u64 << total).find_map(|w| check(&MessageTuple::Word(w))),
        VerifyMode::Sampled { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).find_map(|_| {
                let tuple = if total <= 64 {
                    MessageTuple::Word(rng.gen::<u64>() & low_mask(total))
                } else {
                    let mut v = BitVector::zeros(total);
                    for i in 0..total {
                        v.set(i, rng.gen::<bool>());
                    }
                    MessageTuple::Wide(v)
                };
                check(&tuple)
            })
        }
        VerifyMode::Auto => unreachable!("resolved above"),
    };
    Ok(VerificationReport {
        passed: failure.is_none(),
        mode,
        tuples_checked: checked,
        counterexample: failure,
    })
}

use alloc::boxed::Box;

enum MessageTuple {
    Word(u64),
    Wide(BitVector),
}

impl MessageTuple {
    fn to_vector(&self, total: usize) -> BitVector {
        match self {
            MessageTuple::Word(w) => BitVector::from_u64(*w, total),
            MessageTuple::Wide(v) => v.clone(),
        }
    }
}

trait Simulator {
    fn first_failure(&self, tuple: &MessageTuple) -> Option<Counterexample>;
}

fn split_messages(s: &LdcScheme, all: &BitVector) -> Vec<BitVector> {
    (0..s.k())
        .map(|j| all.slice(s.message_offset(j), s.rates()[j]))
        .collect()
}

/// Straightforward simulation with [`BitMatrix`] arithmetic.
struct Dense<'a> {
    g: &'a LdcGains,
    s: &'a LdcScheme,
}

impl Simulator for Dense<'_> {
    fn first_failure(&self, tuple: &MessageTuple) -> Option<Counterexample> {
        let (g, s) = (self.g, self.s);
        let all = tuple.to_vector(s.total_message_bits());
        let xs: Vec<BitVector> = (0..s.k())
            .map(|i| {
                let enc = s.encoder(i);
                enc.mul_vec(&all.slice(0, enc.cols())).expect("shape checked")
            })
            .collect();
        for l in 0..s.k() {
            let mut y = BitVector::zeros(s.m());
            for (i, x) in xs.iter().enumerate() {
                y.xor_assign(&g.link(l, i).mul_vec(x).expect("shape checked"));
            }
            let decoded = s.decoder(l).mul_vec(&y).expect("shape checked");
            let want = all.slice(s.message_offset(l), s.rates()[l]);
            if decoded != want {
                return Some(Counterexample {
                    messages: split_messages(s, &all),
                    receiver: l,
                    decoded,
                });
            }
        }
        None
    }
}

/// Word-packed simulation for `m <= 64` and at most 64 message bits. Each
/// matrix row becomes a mask and each shift a bit shift.
struct Packed<'a> {
    s: &'a LdcScheme,
    m: usize,
    encoders: Vec<Vec<u64>>,
    decoders: Vec<Vec<u64>>,
    shifts: Vec<Vec<usize>>,
}

fn row_masks(mat: &BitMatrix) -> Vec<u64> {
    (0..mat.rows())
        .map(|r| {
            (0..mat.cols())
                .filter(|&c| mat.get(r, c))
                .fold(0u64, |acc, c| acc | 1 << c)
        })
        .collect()
}

#[inline]
fn apply(rows: &[u64], v: u64) -> u64 {
    rows.iter()
        .enumerate()
        .fold(0u64, |acc, (r, mask)| acc | ((((mask & v).count_ones() & 1) as u64) << r))
}

impl<'a> Packed<'a> {
    fn new(g: &LdcGains, s: &'a LdcScheme) -> Self {
        let k = s.k();
        Self {
            s,
            m: s.m(),
            encoders: (0..k).map(|i| row_masks(s.encoder(i))).collect(),
            decoders: (0..k).map(|l| row_masks(s.decoder(l))).collect(),
            shifts: (0..k)
                .map(|l| (0..k).map(|i| g.link_shift(l, i)).collect())
                .collect(),
        }
    }
}

impl Simulator for Packed<'_> {
    fn first_failure(&self, tuple: &MessageTuple) -> Option<Counterexample> {
        let MessageTuple::Word(word) = tuple else {
            unreachable!("packed path only sees word tuples")
        };
        let word = *word;
        let k = self.s.k();
        let mut xs = [0u64; 64];
        for i in 0..k {
            xs[i] = apply(&self.encoders[i], word);
        }
        let mask = low_mask(self.m);
        let mut offset = 0;
        for l in 0..k {
            let y = (0..k).fold(0u64, |acc, i| {
                let sh = self.shifts[l][i];
                if sh >= self.m {
                    acc
                } else {
                    acc ^ ((xs[i] << sh) & mask)
                }
            });
            let r = self.s.rates()[l];
            let decoded = apply(&self.decoders[l], y);
            let want = (word >> offset) & low_mask(r);
            if decoded != want {
                let total = self.s.total_message_bits();
                return Some(Counterexample {
                    messages: split_messages(self.s, &BitVector::from_u64(word, total)),
                    receiver: l,
                    decoded: BitVector::from_u64(decoded, r),
                });
            }
            offset += r;
        }
        None
    }
}
