use std::ops::Range;

use crate::natural::Natural;
use crate::word::is_canonical_numeral;

use super::{Bounds, Universe};

/// A quantifier domain: all strings up to a length (in length-then-lex
/// order, filtered for the restricted universe), generated on demand, and
/// the naturals `0..=max_num`.
#[derive(Debug, Clone)]
pub(crate) struct Domain<N> {
    pub max_len: usize,
    pub max_num: u64,
    pub max_num_n: N,
    pub restricted: bool,
}

/// Codes of the words of length `len`; bit `len - 1 - k` of the code is
/// character `k`. Restricted words have no leading zero unless they are `"0"`.
pub(crate) fn codes(len: usize, restricted: bool) -> Range<u128> {
    assert!(len < 128, "string bound too large to enumerate");
    match (len, restricted) {
        (0, true) => 0..0,
        (1, _) | (_, false) => 0..1u128 << len,
        (_, true) => 1u128 << (len - 1)..1u128 << len,
    }
}

pub(crate) fn write_word(buf: &mut Vec<u8>, len: usize, code: u128) {
    buf.clear();
    buf.extend((0..len).rev().map(|k| if (code >> k) & 1 == 1 { b'1' } else { b'0' }));
}

/// All words up to `max_len`, shortest first, `'0' < '1'` within a length.
pub(crate) fn words_up_to(max_len: usize, restricted: bool) -> impl Iterator<Item = Vec<u8>> {
    (0..=max_len).flat_map(move |len| {
        codes(len, restricted).map(move |code| {
            let mut w = Vec::with_capacity(len);
            write_word(&mut w, len, code);
            w
        })
    })
}

impl<N: Natural> Domain<N> {
    pub fn new(universe: Universe, bounds: Bounds) -> Self {
        Domain {
            max_len: bounds.max_str_len,
            max_num: bounds.max_num,
            max_num_n: N::from_u64(bounds.max_num).expect("carrier too narrow for max_num"),
            restricted: universe == Universe::RestrictedB,
        }
    }

    pub fn contains_str(&self, s: &[u8]) -> bool {
        s.len() <= self.max_len && (!self.restricted || is_canonical_numeral(s))
    }

    pub fn contains_num(&self, n: &N) -> bool {
        *n <= self.max_num_n
    }

    pub fn is_empty_for_str(&self) -> bool {
        self.restricted && self.max_len == 0
    }

    /// Sets `buf` to each word of the given lengths in order until `f`
    /// returns true.
    pub fn any_str<E>(
        &self,
        lens: impl Iterator<Item = usize>,
        buf: &mut dyn FnMut(usize, u128) -> Result<bool, E>,
    ) -> Result<bool, E> {
        for len in lens.filter(|l| *l <= self.max_len) {
            for code in codes(len, self.restricted) {
                if buf(len, code)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    pub fn nums(&self) -> impl Iterator<Item = N> {
        (0..=self.max_num).map(|k| N::from_u64(k).expect("max_num fits the carrier"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_then_lex() {
        let strs: Vec<_> = words_up_to(2, false).collect();
        let shown: Vec<&str> = strs.iter().map(|s| std::str::from_utf8(s).unwrap()).collect();
        assert_eq!(shown, vec!["", "0", "1", "00", "01", "10", "11"]);
        let strs: Vec<_> = words_up_to(2, true).collect();
        let shown: Vec<&str> = strs.iter().map(|s| std::str::from_utf8(s).unwrap()).collect();
        assert_eq!(shown, vec!["0", "1", "10", "11"]);
    }
}
