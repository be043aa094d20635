//! Words in the generators `a, b, c, d` of the genus-2 surface group.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid letter {0:?} (expected one of abcdABCD)")]
    InvalidLetter(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

impl Gen {
    pub const ALL: [Gen; 4] = [Gen::A, Gen::B, Gen::C, Gen::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Gen {
        Gen::ALL[i]
    }

    pub fn letter(self) -> Letter {
        Letter { gen: self, inverse: false }
    }
}

impl FromStr for Gen {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                let l = Letter::from_char(c)?;
                if l.inverse {
                    Err(WordError::InvalidLetter(c))
                } else {
                    Ok(l.gen)
                }
            }
            _ => Err(WordError::InvalidLetter(s.chars().next().unwrap_or(' '))),
        }
    }
}

/// A generator or its inverse. Ordered `a < b < c < d < A < B < C < D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inverse: bool,
}

impl Letter {
    /// All eight letters in shortlex order.
    pub const ALL: [Letter; 8] = [
        Letter { gen: Gen::A, inverse: false },
        Letter { gen: Gen::B, inverse: false },
        Letter { gen: Gen::C, inverse: false },
        Letter { gen: Gen::D, inverse: false },
        Letter { gen: Gen::A, inverse: true },
        Letter { gen: Gen::B, inverse: true },
        Letter { gen: Gen::C, inverse: true },
        Letter { gen: Gen::D, inverse: true },
    ];

    pub fn inv(self) -> Letter {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    /// Position in [`Letter::ALL`].
    pub fn code(self) -> usize {
        self.gen.index() + if self.inverse { 4 } else { 0 }
    }

    pub fn from_code(i: usize) -> Letter {
        Letter::ALL[i]
    }

    pub fn from_char(c: char) -> Result<Letter, WordError> {
        let gen = match c.to_ascii_lowercase() {
            'a' => Gen::A,
            'b' => Gen::B,
            'c' => Gen::C,
            'd' => Gen::D,
            _ => return Err(WordError::InvalidLetter(c)),
        };
        Ok(Letter { gen, inverse: c.is_ascii_uppercase() })
    }

    pub fn to_char(self) -> char {
        let c = ['a', 'b', 'c', 'd'][self.gen.index()];
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.code().cmp(&other.code())
    }
}

/// Freely reduced word; capitals denote inverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupWord(Vec<Letter>);

impl GroupWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    /// Builds a word and freely reduces it.
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self(out)
    }

    pub fn parse(s: &str) -> Result<Self, WordError> {
        s.parse()
    }

    pub fn gen(g: Gen) -> Self {
        Self(vec![g.letter()])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Self) -> Self {
        Self::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// `w^n`, with negative `n` meaning powers of the inverse.
    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Self::identity();
        for _ in 0..n.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// `u w u⁻¹`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.concat(self).concat(&u.inverse())
    }

    /// Removes cancelling first/last letter pairs.
    pub fn cyclically_reduced(&self) -> Self {
        let mut v = &self.0[..];
        while v.len() >= 2 && v[0] == v[v.len() - 1].inv() {
            v = &v[1..v.len() - 1];
        }
        Self(v.to_vec())
    }

    /// Exponent sums of `a, b, c, d` (the image in H₁).
    pub fn abelianize(&self) -> [i64; 4] {
        let mut v = [0i64; 4];
        for l in &self.0 {
            v[l.gen.index()] += if l.inverse { -1 } else { 1 };
        }
        v
    }

    /// Whether `other` is a cyclic rotation of this word.
    pub fn is_rotation_of(&self, other: &Self) -> bool {
        if self.len() != other.len() {
            return false;
        }
        if self.is_empty() {
            return true;
        }
        let n = self.len();
        (0..n).any(|k| (0..n).all(|i| self.0[(i + k) % n] == other.0[i]))
    }

    /// Substitutes each generator by a word.
    pub fn substitute(&self, images: &[GroupWord; 4]) -> Self {
        let mut letters = Vec::new();
        for l in &self.0 {
            let img = &images[l.gen.index()];
            if l.inverse {
                letters.extend(img.inverse().0);
            } else {
                letters.extend(img.0.iter().copied());
            }
        }
        Self::new(letters)
    }

    /// Shortlex comparison.
    pub fn shortlex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// The surface relator `[a,b][c,d] = a b A B c d C D`.
pub fn relator() -> GroupWord {
    GroupWord::parse("abABcdCD").expect("static word")
}

impl FromStr for GroupWord {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "1" || s == "e" {
            return Ok(Self::identity());
        }
        let letters = s.chars().map(Letter::from_char).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(letters))
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_reduce() {
        let w = GroupWord::parse("abBA").unwrap();
        assert!(w.is_empty());
        assert_eq!(GroupWord::parse("aAbcC").unwrap().to_string(), "b");
        assert!(GroupWord::parse("abx").is_err());
        assert_eq!(GroupWord::parse("1").unwrap(), GroupWord::identity());
    }

    #[test]
    fn powers_and_inverse() {
        let w = GroupWord::parse("ab").unwrap();
        assert_eq!(w.pow(-2).to_string(), "BABA");
        assert_eq!(w.concat(&w.inverse()), GroupWord::identity());
        assert_eq!(relator().abelianize(), [0, 0, 0, 0]);
    }

    #[test]
    fn rotations() {
        let r = relator();
        let rot = GroupWord::parse("ABcdCDab").unwrap();
        assert!(r.is_rotation_of(&rot));
        assert!(!r.is_rotation_of(&GroupWord::parse("abABcdDC").unwrap()));
    }
}
