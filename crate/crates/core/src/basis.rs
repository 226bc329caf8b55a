//! Fixed-Hamming-weight basis with combinatorial (colex) ranking.
//!
//! The rank of a bitstring with set positions `c_1 < ... < c_k` is
//! `Σ_j C(c_j, j)`, which coincides with its position in increasing numeric
//! order among all strings of the same weight.

use crate::error::{Error, Result};
use crate::model::{fixed_weight_states, SpinConfiguration, MAX_SITES};

/// Binomial coefficient `C(n, k)` as `f64`-safe `u64` (exact for n ≤ 64).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    ln_fact(n) - ln_fact(k) - ln_fact(n - k)
}

#[derive(Clone, Debug)]
pub struct FixedWeightBasis {
    n: usize,
    weight: usize,
    dim: usize,
    // binom[c][j] = C(c, j)
    binom: Vec<Vec<u64>>,
}

impl FixedWeightBasis {
    /// Fails with a capacity error if the sector holds more than `max_dim` states.
    pub fn new(n: usize, weight: usize, max_dim: usize) -> Result<Self> {
        if n == 0 || n > MAX_SITES || weight > n {
            return Err(Error::Config(format!("invalid sector n={n}, weight={weight}")));
        }
        let dim = binomial(n, weight);
        if dim > max_dim as u64 {
            return Err(Error::Capacity(format!(
                "sector C({n}, {weight}) = {dim} exceeds the limit {max_dim}"
            )));
        }
        let binom = (0..=n).map(|c| (0..=weight).map(|j| binomial(c, j)).collect()).collect();
        Ok(Self { n, weight, dim: dim as usize, binom })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank of a bitstring of the sector's weight.
    #[inline]
    pub fn rank(&self, bits: u64) -> usize {
        debug_assert_eq!(bits.count_ones() as usize, self.weight);
        let mut rest = bits;
        let mut rank = 0u64;
        let mut j = 1;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            rank += self.binom[c][j];
            j += 1;
            rest &= rest - 1;
        }
        rank as usize
    }

    pub fn unrank(&self, mut rank: usize) -> u64 {
        let mut bits = 0u64;
        let mut c = self.n;
        for j in (1..=self.weight).rev() {
            c -= 1;
            while self.binom[c][j] as usize > rank {
                c -= 1;
            }
            rank -= self.binom[c][j] as usize;
            bits |= 1 << c;
        }
        bits
    }

    pub fn states(&self) -> impl Iterator<Item = u64> {
        fixed_weight_states(self.n, self.weight)
    }

    pub fn configuration(&self, rank: usize) -> SpinConfiguration {
        SpinConfiguration::new(self.unrank(rank), self.n).expect("rank within sector")
    }
}
