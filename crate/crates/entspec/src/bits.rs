use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A measured bitstring over up to 64 qubits.
///
/// Bit `q` is the outcome of logical qubit `q`. Qubit 0 is the most
/// significant bit of the packed value, so `index()` equals the basis-state
/// index of the outcome and `to_string()` reads left to right in qubit order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bits {
    value: u64,
    len: usize,
}

impl Bits {
    pub fn from_index(value: u64, len: usize) -> Self {
        debug_assert!(len == 64 || value < (1u64 << len));
        Bits { value, len }
    }

    pub fn zeros(len: usize) -> Self {
        Bits { value: 0, len }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Basis-state index of this outcome.
    #[inline]
    pub fn index(&self) -> u64 {
        self.value
    }

    /// Value of qubit `q`.
    #[inline]
    pub fn bit(&self, q: usize) -> u8 {
        debug_assert!(q < self.len);
        ((self.value >> (self.len - 1 - q)) & 1) as u8
    }

    pub fn checked_bit(&self, q: usize) -> Result<u8> {
        if q >= self.len {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits: self.len,
            });
        }
        Ok(self.bit(q))
    }

    #[inline]
    pub fn flip(&mut self, q: usize) {
        debug_assert!(q < self.len);
        self.value ^= 1 << (self.len - 1 - q);
    }

    /// Flips every bit.
    pub fn complement(&self) -> Self {
        let mask = if self.len == 64 {
            u64::MAX
        } else {
            (1u64 << self.len) - 1
        };
        Bits {
            value: self.value ^ mask,
            len: self.len,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(move |q| self.bit(q))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len {
            write!(f, "{}", self.bit(q))?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut value = 0u64;
        for c in s.chars() {
            value <<= 1;
            match c {
                '0' => {}
                '1' => value |= 1,
                _ => return Err(Error::InvalidConfig(format!("invalid bit character {c:?}"))),
            }
        }
        Ok(Bits {
            value,
            len: s.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_strings() {
        let b: Bits = "0110".parse().unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.index(), 0b0110);
        assert_eq!(b.to_string(), "0110");
        assert_eq!(b.bit(0), 0);
        assert_eq!(b.bit(1), 1);
        assert_eq!(b.bit(2), 1);
        assert_eq!(b.bit(3), 0);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let b = Bits::from_index(0b10, 2);
        assert_eq!(b.bit(0), 1);
        assert_eq!(b.bit(1), 0);
        assert_eq!(b.to_string(), "10");
    }

    #[test]
    fn complement_flips_all_bits() {
        let b: Bits = "0101".parse().unwrap();
        assert_eq!(b.complement().to_string(), "1010");
    }

    #[test]
    fn flip_targets_one_bit() {
        let mut b = Bits::zeros(3);
        b.flip(1);
        assert_eq!(b.to_string(), "010");
        b.flip(1);
        assert_eq!(b.to_string(), "000");
    }

    #[test]
    fn out_of_range_bit_is_an_error() {
        let b = Bits::zeros(3);
        assert!(b.checked_bit(3).is_err());
    }
}
