use crate::natural::Natural;
use crate::word::minimal_digits;

/// Value of a nonempty binary word, last character least significant.
/// `None` for the empty word, a non-binary character, or a value the
/// carrier cannot hold.
pub fn numeral_value<N: Natural>(s: &[u8]) -> Option<N> {
    if s.is_empty() {
        return None;
    }
    let mut acc = N::zero();
    for &c in s {
        let bit = match c {
            b'0' => false,
            b'1' => true,
            _ => return None,
        };
        if acc.is_zero() {
            acc = if bit { N::one() } else { N::zero() };
        } else {
            acc = acc.push_bit(bit)?;
        }
    }
    Some(acc)
}

/// `s` is a (possibly zero-padded) binary representation of `i`.
pub fn numstr_holds<N: Natural>(i: &N, s: &[u8]) -> bool {
    // overflow means the value exceeds every carrier value, i included
    numeral_value::<N>(s).is_some_and(|v| v == *i)
}

pub(crate) fn pi_holds_exact<N: Natural>(p: &N, x: &N, y: &N) -> bool {
    if x.is_zero() {
        return p.is_zero();
    }
    let Some(y) = y.to_u64() else {
        return false;
    };
    p.low_bits_zero(y) && p.trailing_zeros().is_some() && p.shr_bits(y) == *x
}

/// `p = x * 2^y`.
pub fn pi_holds<N: Natural>(p: &N, x: &N, y: &N) -> bool {
    pi_holds_exact(p, x, y)
}

/// Every representation of `n` with at most `max_len` characters, shortest
/// first.
pub(crate) fn representations<N: Natural>(n: &N, max_len: usize) -> Vec<Vec<u8>> {
    let minimal = minimal_digits(n);
    (minimal.len()..=max_len)
        .map(|len| {
            let mut w = vec![b'0'; len - minimal.len()];
            w.extend_from_slice(&minimal);
            w
        })
        .collect()
}
