//! Normal-form representatives of group elements.

use std::fmt;

use crate::error::{Error, Result};

/// A group element in the canonical normal form of its family.
///
/// Normal forms are unique, so derived equality and ordering are exact.
/// The derived `Ord` (contents compared lexicographically) is the
/// "lexicographic normal form" order used for deterministic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Reduced word over a free basis: letter `k > 0` is the k-th basis
    /// letter, `-k` its inverse; no adjacent cancelling pair.
    Free(Vec<i32>),
    /// Point of the integer lattice `Z^d`.
    Abelian(Vec<i64>),
    /// Semidirect normal form `(v, f)`: lattice part and finite-part label.
    Semidirect(Vec<i64>, u32),
}

impl GroupElement {
    pub fn free_word(letters: &[i32]) -> GroupElement {
        GroupElement::Free(reduce_free(letters))
    }

    pub fn abelian(v: &[i64]) -> GroupElement {
        GroupElement::Abelian(v.to_vec())
    }

    pub fn semidirect(v: &[i64], part: u32) -> GroupElement {
        GroupElement::Semidirect(v.to_vec(), part)
    }

    /// Word length over the free basis (free elements only).
    pub fn free_len(&self) -> Option<usize> {
        match self {
            GroupElement::Free(w) => Some(w.len()),
            _ => None,
        }
    }

    pub fn as_free(&self) -> Result<&[i32]> {
        match self {
            GroupElement::Free(w) => Ok(w),
            _ => Err(Error::FamilyMismatch("expected a free-group element".into())),
        }
    }

    pub fn as_abelian(&self) -> Result<&[i64]> {
        match self {
            GroupElement::Abelian(v) => Ok(v),
            _ => Err(Error::FamilyMismatch("expected a lattice element".into())),
        }
    }

    pub fn as_semidirect(&self) -> Result<(&[i64], u32)> {
        match self {
            GroupElement::Semidirect(v, f) => Ok((v, *f)),
            _ => Err(Error::FamilyMismatch("expected a semidirect element".into())),
        }
    }

    /// Canonical single-token rendering; no whitespace, parseable back.
    pub fn token(&self) -> String {
        match self {
            GroupElement::Free(w) => {
                if w.is_empty() {
                    "e".to_string()
                } else if w.iter().all(|&l| l.unsigned_abs() <= 26) {
                    w.iter().map(|&l| letter_char(l)).collect()
                } else {
                    let parts: Vec<String> = w.iter().map(|l| l.to_string()).collect();
                    format!("w{}", parts.join("."))
                }
            }
            GroupElement::Abelian(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("({})", parts.join(","))
            }
            GroupElement::Semidirect(v, f) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("({};f{})", parts.join(","), f)
            }
        }
    }

    pub fn parse_token(tok: &str) -> Result<GroupElement> {
        let bad = || Error::InvalidSpec(format!("cannot parse element token {tok:?}"));
        if tok == "e" {
            return Ok(GroupElement::Free(Vec::new()));
        }
        if let Some(rest) = tok.strip_prefix('w') {
            let letters: Vec<i32> = rest
                .split('.')
                .map(|p| p.parse::<i32>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            if letters.iter().any(|&l| l == 0) {
                return Err(bad());
            }
            return Ok(GroupElement::Free(reduce_free(&letters)));
        }
        if let Some(inner) = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            if let Some((vec_part, f_part)) = inner.split_once(";f") {
                let part: u32 = f_part.parse().map_err(|_| bad())?;
                let v = parse_vec(vec_part).ok_or_else(bad)?;
                return Ok(GroupElement::Semidirect(v, part));
            }
            let v = parse_vec(inner).ok_or_else(bad)?;
            if v.is_empty() {
                return Err(bad());
            }
            return Ok(GroupElement::Abelian(v));
        }
        let mut letters = Vec::with_capacity(tok.len());
        for c in tok.chars() {
            letters.push(char_letter(c).ok_or_else(bad)?);
        }
        Ok(GroupElement::Free(reduce_free(&letters)))
    }
}

fn parse_vec(s: &str) -> Option<Vec<i64>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|p| p.parse::<i64>().ok()).collect()
}

fn letter_char(l: i32) -> char {
    let idx = (l.unsigned_abs() - 1) as u8;
    if l > 0 {
        (b'a' + idx) as char
    } else {
        (b'A' + idx) as char
    }
}

fn char_letter(c: char) -> Option<i32> {
    match c {
        'a'..='z' => Some(c as i32 - 'a' as i32 + 1),
        'A'..='Z' => Some(-(c as i32 - 'A' as i32 + 1)),
        _ => None,
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Free reduction: cancel adjacent letter/inverse pairs.
pub fn reduce_free(letters: &[i32]) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(letters.len());
    for &l in letters {
        debug_assert!(l != 0);
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Concatenate two reduced words and reduce at the junction.
pub fn concat_reduced(a: &[i32], b: &[i32]) -> Vec<i32> {
    let mut out = a.to_vec();
    for &l in b {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn invert_word(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|&l| -l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_cancels_pairs() {
        // (ab)(b^{-1}a) -> a^2
        assert_eq!(concat_reduced(&[1, 2], &[-2, 1]), vec![1, 1]);
        assert_eq!(reduce_free(&[1, -1]), Vec::<i32>::new());
        assert_eq!(reduce_free(&[1, 2, -2, -1, 2]), vec![2]);
    }

    #[test]
    fn reduction_is_idempotent() {
        let w = reduce_free(&[1, 2, -2, 1, -1, 2, 2]);
        assert_eq!(reduce_free(&w), w);
    }

    #[test]
    fn word_inverse_reverses_and_negates() {
        // (a b a^{-1})^{-1} = a b^{-1} a^{-1}
        assert_eq!(invert_word(&[1, 2, -1]), vec![1, -2, -1]);
    }

    #[test]
    fn tokens_round_trip() {
        let cases = vec![
            GroupElement::free_word(&[1, 2, -1]),
            GroupElement::Free(Vec::new()),
            GroupElement::abelian(&[3, -4]),
            GroupElement::semidirect(&[-1], 1),
            GroupElement::semidirect(&[], 1),
        ];
        for g in cases {
            assert_eq!(GroupElement::parse_token(&g.token()).unwrap(), g);
        }
        assert_eq!(GroupElement::free_word(&[1, 2, -1]).token(), "abA");
    }

    #[test]
    fn lexicographic_order_is_by_contents() {
        let a = GroupElement::abelian(&[-1]);
        let b = GroupElement::abelian(&[1]);
        assert!(a < b);
    }
}
