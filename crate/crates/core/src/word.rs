//! Binary words, the values of the `str` sort.

use std::fmt;

use thiserror::Error;

use crate::natural::Natural;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("character {found:?} at offset {offset} is not a binary digit")]
pub struct InvalidDigit {
    pub found: char,
    pub offset: usize,
}

/// A finite word over the alphabet `{'0', '1'}`, stored as ASCII digits.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(text: &str) -> Result<Self, InvalidDigit> {
        for (offset, found) in text.char_indices() {
            if found != '0' && found != '1' {
                return Err(InvalidDigit { found, offset });
            }
        }
        Ok(Word(text.as_bytes().to_vec()))
    }

    /// Wraps bytes that are already known to be `b'0'`/`b'1'`.
    pub(crate) fn from_digits(digits: Vec<u8>) -> Self {
        debug_assert!(digits.iter().all(|b| *b == b'0' || *b == b'1'));
        Word(digits)
    }

    /// `count` copies of `'0'`.
    pub fn zeros(count: usize) -> Self {
        Word(vec![b'0'; count])
    }

    /// The shortest word denoting `value` (`"0"` for zero).
    pub fn minimal_binary<N: Natural>(value: &N) -> Self {
        Word(minimal_digits(value))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_str(&self) -> &str {
        // only ASCII digits are ever stored
        std::str::from_utf8(&self.0).expect("binary words are ASCII")
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut digits = self.0.clone();
        digits.extend_from_slice(&other.0);
        Word(digits)
    }

    /// Member of the restricted universe: nonempty, and `"0"` is the only
    /// word starting with `'0'`.
    pub fn is_canonical_numeral(&self) -> bool {
        is_canonical_numeral(&self.0)
    }
}

pub(crate) fn is_canonical_numeral(digits: &[u8]) -> bool {
    match digits {
        [] => false,
        [_] => true,
        [first, ..] => *first == b'1',
    }
}

pub(crate) fn minimal_digits<N: Natural>(value: &N) -> Vec<u8> {
    let bits = value.bit_len();
    if bits == 0 {
        return vec![b'0'];
    }
    (0..bits)
        .rev()
        .map(|k| {
            if value.shr_bits(k).low_bits_zero(1) {
                b'0'
            } else {
                b'1'
            }
        })
        .collect()
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl std::str::FromStr for Word {
    type Err = InvalidDigit;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Word::new(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_binary() {
        assert_eq!(Word::new("0120"), Err(InvalidDigit { found: '2', offset: 2 }));
        assert!(Word::new("").unwrap().is_empty());
    }

    #[test]
    fn minimal_binary_words() {
        assert_eq!(Word::minimal_binary(&0u64).as_str(), "0");
        assert_eq!(Word::minimal_binary(&3u64).as_str(), "11");
        assert_eq!(Word::minimal_binary(&64u64).as_str(), "1000000");
    }

    #[test]
    fn canonical_numerals() {
        assert!(Word::new("0").unwrap().is_canonical_numeral());
        assert!(Word::new("10").unwrap().is_canonical_numeral());
        assert!(!Word::new("01").unwrap().is_canonical_numeral());
        assert!(!Word::empty().is_canonical_numeral());
    }
}
