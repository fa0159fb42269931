//! Vote words over `{1, 2, 3}`, plurality, and a compact binary encoding.
//!
//! The encoding is a little-endian `u64` word length, a little-endian `u64`
//! word count, then each word packed at two bits per symbol (`1 → 01`,
//! `2 → 10`, `3 → 11`), least significant bits first, zero-padded to a
//! whole byte.

use std::io::{Read, Write};

use super::measure::{Counts, CANDIDATES};
use crate::error::{domain, Result};

/// Vote counts of a word, rejecting symbols outside `{1, 2, 3}`.
pub fn counts(word: &[u8]) -> Result<Counts> {
    let mut c = [0u64; CANDIDATES];
    for &s in word {
        match s {
            1..=3 => c[(s - 1) as usize] += 1,
            _ => return Err(domain(format!("invalid vote symbol {s}"))),
        }
    }
    Ok(c)
}

/// Winner by count, 0-based, ties to the lowest index.
#[inline]
pub fn plurality_counts(c: &Counts) -> usize {
    let mut best = 0;
    for a in 1..CANDIDATES {
        if c[a] > c[best] {
            best = a;
        }
    }
    best
}

/// Plurality winner of a nonempty word, as a symbol in `{1, 2, 3}`.
pub fn plurality(word: &[u8]) -> Result<u8> {
    if word.is_empty() {
        return Err(domain("plurality needs at least one vote"));
    }
    Ok(plurality_counts(&counts(word)?) as u8 + 1)
}

fn bytes_per_word(n: usize) -> usize {
    (2 * n).div_ceil(8)
}

/// Writes equal-length words in the packed format.
pub fn write_words<W: Write>(mut out: W, words: &[Vec<u8>]) -> Result<()> {
    let n = words.first().map_or(0, Vec::len);
    if words.iter().any(|w| w.len() != n) {
        return Err(domain("all words in a stream must have the same length"));
    }
    out.write_all(&(n as u64).to_le_bytes())?;
    out.write_all(&(words.len() as u64).to_le_bytes())?;
    let mut buf = vec![0u8; bytes_per_word(n)];
    for w in words {
        buf.fill(0);
        for (j, &s) in w.iter().enumerate() {
            if !(1..=3).contains(&s) {
                return Err(domain(format!("invalid vote symbol {s}")));
            }
            buf[j / 4] |= s << (2 * (j % 4));
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a packed word stream.
pub fn read_words<R: Read>(mut input: R) -> Result<Vec<Vec<u8>>> {
    let mut head = [0u8; 8];
    input.read_exact(&mut head)?;
    let n = u64::from_le_bytes(head) as usize;
    input.read_exact(&mut head)?;
    let count = u64::from_le_bytes(head) as usize;
    let mut buf = vec![0u8; bytes_per_word(n)];
    let mut words = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        let mut w = Vec::with_capacity(n);
        for j in 0..n {
            let s = (buf[j / 4] >> (2 * (j % 4))) & 0b11;
            if s == 0 {
                return Err(domain("zero symbol in packed word"));
            }
            w.push(s);
        }
        let used = 2 * n;
        if !used.is_multiple_of(8) && buf[buf.len() - 1] >> (used % 8) != 0 {
            return Err(domain("nonzero padding in packed word"));
        }
        words.push(w);
    }
    Ok(words)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plurality_examples() {
        assert_eq!(plurality(&[1, 1, 2]).unwrap(), 1);
        assert_eq!(plurality(&[1, 2, 3]).unwrap(), 1);
        assert_eq!(plurality(&[3, 2, 3, 2]).unwrap(), 2);
        assert_eq!(plurality(&[3]).unwrap(), 3);
        assert!(plurality(&[1, 4]).is_err());
        assert!(plurality(&[]).is_err());
    }

    fn all_words(n: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w| (1..=3).map(move |s| [w.clone(), vec![s]].concat()))
                .collect();
        }
        out
    }

    #[test]
    fn plurality_has_a_strict_winner_whenever_one_exists() {
        for n in 1..=8 {
            for w in all_words(n) {
                let c = counts(&w).unwrap();
                let win = plurality(&w).unwrap() as usize - 1;
                assert!(c.iter().all(|&x| x <= c[win]));
                if c.iter().filter(|&&x| x == c[win]).count() == 1 {
                    assert!((0..3).all(|j| j == win || c[j] < c[win]));
                } else {
                    assert!((0..win).all(|j| c[j] < c[win]));
                }
            }
        }
    }

    #[test]
    fn packed_roundtrip() {
        let words = vec![vec![1, 2, 3, 1, 3], vec![3, 3, 3, 3, 3], vec![2, 1, 1, 2, 2]];
        let mut bytes = Vec::new();
        write_words(&mut bytes, &words).unwrap();
        assert_eq!(bytes.len(), 16 + 3 * 2);
        assert_eq!(bytes[16], 0b01_11_10_01);
        assert_eq!(bytes[17], 0b0000_0011);
        assert_eq!(read_words(bytes.as_slice()).unwrap(), words);
        assert!(write_words(&mut Vec::new(), &[vec![1, 0]]).is_err());
    }
}
