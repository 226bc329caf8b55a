use std::fmt;

use crate::error::{config_err, Result};

/// Largest supported number of sites; configurations are packed in a `u64`.
pub const MAX_SITES: usize = 64;

/// A computational-basis state `x ∈ {0,1}^n`.
///
/// Bit `i` set means qubit `i` is in `|1⟩`, i.e. spin `z_i = 1 - 2 x_i = -1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    bits: u64,
    n: u32,
}

impl SpinConfiguration {
    pub fn new(bits: u64, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return config_err(format!("site count {n} outside 1..={MAX_SITES}"));
        }
        if n < 64 && bits >> n != 0 {
            return config_err(format!("bit pattern {bits:#x} has bits beyond n={n}"));
        }
        Ok(Self { bits, n: n as u32 })
    }

    /// All qubits in `|0⟩` (all spins up).
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn from_bit_slice(bits: &[u8]) -> Result<Self> {
        let mut packed = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => packed |= 1 << i,
                other => return config_err(format!("bit value {other} at position {i}")),
            }
        }
        Self::new(packed, bits.len())
    }

    /// Lowest-index `weight` qubits set.
    pub fn with_weight(n: usize, weight: usize) -> Result<Self> {
        if weight > n {
            return config_err(format!("weight {weight} exceeds n={n}"));
        }
        let bits = if weight == 64 { u64::MAX } else { (1u64 << weight) - 1 };
        Self::new(bits, n)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Hamming weight |x|.
    #[inline]
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    /// `z_i = 1 - 2 x_i`.
    #[inline]
    pub fn spin(&self, i: usize) -> f64 {
        1.0 - 2.0 * self.bit(i) as f64
    }

    pub fn spins(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n()).map(move |i| self.spin(i))
    }

    /// `Σ_i z_i = n - 2|x|`.
    #[inline]
    pub fn magnetization(&self) -> i64 {
        self.n as i64 - 2 * self.weight() as i64
    }

    #[inline]
    pub fn flipped(&self, i: usize) -> Self {
        Self { bits: self.bits ^ (1 << i), n: self.n }
    }

    /// Exchange the values of sites `i` and `j`.
    #[inline]
    pub fn exchanged(&self, i: usize, j: usize) -> Self {
        if self.bit(i) == self.bit(j) {
            *self
        } else {
            Self { bits: self.bits ^ ((1 << i) | (1 << j)), n: self.n }
        }
    }

    pub fn to_bit_vec(&self) -> Vec<u8> {
        (0..self.n()).map(|i| self.bit(i)).collect()
    }
}

impl fmt::Debug for SpinConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinConfiguration(")?;
        for i in 0..self.n() {
            write!(f, "{}", self.bit(i))?;
        }
        write!(f, ")")
    }
}

/// Iterates every `n`-bit string with exactly `weight` bits set, in increasing
/// numeric order (Gosper's hack).
pub fn fixed_weight_states(n: usize, weight: usize) -> impl Iterator<Item = u64> {
    let limit: u128 = 1u128 << n;
    let mut next: Option<u64> = if weight > n {
        None
    } else if weight == 0 {
        Some(0)
    } else {
        Some(((1u128 << weight) - 1) as u64)
    };
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            let c = current & current.wrapping_neg();
            let r = current as u128 + c as u128;
            let candidate = ((((r as u64) ^ current) >> 2) / c) as u128 | r;
            if candidate >= limit {
                None
            } else {
                Some(candidate as u64)
            }
        };
        Some(current)
    })
}
