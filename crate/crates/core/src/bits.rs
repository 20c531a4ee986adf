use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Widest register a [`BitString`] can describe.
pub const MAX_WIDTH: usize = 128;

/// Computational basis label of up to 128 qubits.
///
/// Qubit 0 is the least-significant bit. The text form is a binary numeral,
/// so the rightmost character is qubit 0: `"10"` has qubit 1 set and names
/// basis index 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    width: usize,
    value: u128,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitStringError {
    #[error("width {0} exceeds the {MAX_WIDTH}-qubit limit")]
    TooWide(usize),
    #[error("empty bit string")]
    Empty,
    #[error("invalid character `{0}` in bit string")]
    BadChar(char),
    #[error("value does not fit in {0} bits")]
    Overflow(usize),
}

impl BitString {
    pub fn new(width: usize, value: u128) -> Result<Self, BitStringError> {
        if width > MAX_WIDTH {
            return Err(BitStringError::TooWide(width));
        }
        if width < MAX_WIDTH && value >> width != 0 {
            return Err(BitStringError::Overflow(width));
        }
        Ok(BitString { width, value })
    }

    pub fn zeros(width: usize) -> Result<Self, BitStringError> {
        BitString::new(width, 0)
    }

    pub fn ones(width: usize) -> Result<Self, BitStringError> {
        let value = if width >= MAX_WIDTH {
            u128::MAX
        } else {
            (1u128 << width) - 1
        };
        BitString::new(width, value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn bit(&self, q: usize) -> bool {
        q < self.width && (self.value >> q) & 1 == 1
    }

    /// Basis index into a state vector of `width` qubits.
    pub fn index(&self) -> usize {
        usize::try_from(self.value).expect("index fits in usize")
    }

    /// Gathers the bits of `qubits` into a dense local index (`qubits[k]`
    /// becomes bit `k`).
    pub fn extract(&self, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &q)| acc | (usize::from(self.bit(q)) << k))
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(BitStringError::Empty);
        }
        let width = s.chars().count();
        if width > MAX_WIDTH {
            return Err(BitStringError::TooWide(width));
        }
        let mut value = 0u128;
        for ch in s.chars() {
            let b = match ch {
                '0' => 0,
                '1' => 1,
                c => return Err(BitStringError::BadChar(c)),
            };
            value = (value << 1) | b;
        }
        Ok(BitString { width, value })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.width).rev() {
            f.write_str(if self.bit(q) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_is_msb_first() {
        let b: BitString = "10".parse().unwrap();
        assert_eq!(b.index(), 2);
        assert!(b.bit(1) && !b.bit(0));
        assert_eq!(b.to_string(), "10");
        assert_eq!(BitString::new(4, 5).unwrap().to_string(), "0101");
    }

    #[test]
    fn wide_strings() {
        let ones = BitString::ones(128).unwrap();
        assert_eq!(ones.value(), u128::MAX);
        assert_eq!(ones.to_string().len(), 128);
        assert_eq!(ones.to_string().parse::<BitString>().unwrap(), ones);
        assert!(BitString::ones(129).is_err());
        assert!("1".repeat(129).parse::<BitString>().is_err());
    }

    #[test]
    fn extract_local_index() {
        let b: BitString = "101100".parse().unwrap(); // qubits 2, 3, 5 set
        assert_eq!(b.extract(&[2, 3]), 0b11);
        assert_eq!(b.extract(&[0, 5, 4]), 0b010);
    }

    #[test]
    fn rejects_garbage() {
        assert_eq!("".parse::<BitString>(), Err(BitStringError::Empty));
        assert_eq!(
            "012".parse::<BitString>(),
            Err(BitStringError::BadChar('2'))
        );
        assert_eq!(BitString::new(2, 4), Err(BitStringError::Overflow(2)));
    }
}
