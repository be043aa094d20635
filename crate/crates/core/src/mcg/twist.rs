//! Dehn twists as automorphisms of the surface group and their action on `H₁`.

use std::fmt;

use thiserror::Error;

use crate::fuchsian::octagon;
use crate::word::{relator, Gen, GroupWord, Letter, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwistError {
    #[error("image of the relator {0} is not conjugate to the relator")]
    RelatorViolation(String),
    #[error("H1 matrix is not symplectic: {0:?}")]
    NotSymplectic([[i64; 4]; 4]),
    #[error("inverse images do not invert the automorphism on generator {0}")]
    NotInverse(char),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Intersection form on `H₁` in the basis `(a, b, c, d)`: `⟨a,b⟩ = ⟨c,d⟩ = -1`.
pub const J: [[i64; 4]; 4] = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]];

pub type Matrix4 = [[i64; 4]; 4];

/// An automorphism given by generator images, together with its inverse.
#[derive(Clone, PartialEq, Eq)]
pub struct TwistAutomorphism {
    name: String,
    images: [GroupWord; 4],
    inverse_images: [GroupWord; 4],
}

impl fmt::Debug for TwistAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        for (g, w) in Gen::ALL.iter().zip(&self.images) {
            write!(f, "{} -> {}  ", g.letter().to_char(), w)?;
        }
        Ok(())
    }
}

fn words(s: [&str; 4]) -> [GroupWord; 4] {
    s.map(|w| GroupWord::parse(w).expect("static word"))
}

/// Whether `w` is conjugate in the free group to the relator.
pub fn is_relator_conjugate(w: &GroupWord) -> bool {
    w.cyclically_reduced().is_rotation_of(&relator())
}

impl TwistAutomorphism {
    pub fn identity() -> Self {
        let id = words(["a", "b", "c", "d"]);
        Self { name: "id".into(), images: id.clone(), inverse_images: id }
    }

    /// Twist along the simple closed curve of a generator.
    pub fn twist(curve: Gen) -> Result<Self, TwistError> {
        let (images, inverse_images) = match curve {
            Gen::A => (words(["a", "ba", "c", "d"]), words(["a", "bA", "c", "d"])),
            Gen::B => (words(["aB", "b", "c", "d"]), words(["ab", "b", "c", "d"])),
            Gen::C => (words(["a", "b", "c", "dc"]), words(["a", "b", "c", "dC"])),
            Gen::D => (words(["a", "b", "cD", "d"]), words(["a", "b", "cd", "d"])),
        };
        let t = Self { name: format!("T{}", curve.letter().to_char()), images, inverse_images };
        t.validate()?;
        Ok(t)
    }

    /// Product of twists: `"aB"` is `T_a ∘ T_b⁻¹`; the empty string is the identity.
    pub fn from_twist_word(s: &str) -> Result<Self, TwistError> {
        let w = GroupWord::parse(s)?;
        let mut acc = Self::identity();
        for l in w.letters() {
            let t = Self::twist(l.gen)?;
            let t = if l.inverse { t.inverse() } else { t };
            acc = acc.compose(&t);
        }
        acc.name = if w.is_empty() { "id".into() } else { format!("T[{w}]") };
        Ok(acc)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn images(&self) -> &[GroupWord; 4] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[GroupWord; 4] {
        &self.inverse_images
    }

    pub fn apply(&self, w: &GroupWord) -> GroupWord {
        w.substitute(&self.images)
    }

    pub fn apply_inverse(&self, w: &GroupWord) -> GroupWord {
        w.substitute(&self.inverse_images)
    }

    pub fn image_of(&self, l: Letter) -> GroupWord {
        let w = &self.images[l.gen.index()];
        if l.inverse {
            w.inverse()
        } else {
            w.clone()
        }
    }

    pub fn inverse(&self) -> Self {
        Self { name: format!("{}^-1", self.name), images: self.inverse_images.clone(), inverse_images: self.images.clone() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let images = other.images.clone().map(|w| self.apply(&w));
        let inverse_images = self.inverse_images.clone().map(|w| other.apply_inverse(&w));
        Self { name: format!("{}*{}", self.name, other.name), images, inverse_images }
    }

    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        (0..n.unsigned_abs()).fold(Self::identity(), |acc, _| acc.compose(&base))
    }

    /// Relator conjugacy and inverse checks.
    pub fn validate(&self) -> Result<(), TwistError> {
        let r = self.apply(&relator());
        if !is_relator_conjugate(&r) {
            return Err(TwistError::RelatorViolation(r.to_string()));
        }
        let oct = octagon();
        for g in Gen::ALL {
            let back = self.apply(&self.inverse_images[g.index()]);
            if oct.evaluate(&back).distance(&oct.evaluate(&GroupWord::gen(g))) > 1e-8 {
                return Err(TwistError::NotInverse(g.letter().to_char()));
            }
        }
        Ok(())
    }

    /// Integer matrix of the induced map on `H₁`; column `j` is the image of generator `j`.
    pub fn h1_matrix(&self) -> Result<Matrix4, TwistError> {
        let mut m = [[0i64; 4]; 4];
        for (j, w) in self.images.iter().enumerate() {
            for (i, v) in w.abelianize().iter().enumerate() {
                m[i][j] = *v;
            }
        }
        if !is_symplectic(&m) {
            return Err(TwistError::NotSymplectic(m));
        }
        Ok(m)
    }
}

pub fn mat_mul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut c = [[0i64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn transpose(a: &Matrix4) -> Matrix4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

/// `MᵀJM = J`, in exact integer arithmetic.
pub fn is_symplectic(m: &Matrix4) -> bool {
    mat_mul(&transpose(m), &mat_mul(&J, m)) == J
}

/// `x ↦ x + ⟨x, v⟩ v`.
pub fn transvection(v: [i64; 4]) -> Matrix4 {
    let mut m = [[0i64; 4]; 4];
    for j in 0..4 {
        let mut e = [0i64; 4];
        e[j] = 1;
        let pairing: i64 = (0..4).map(|r| (0..4).map(|s| e[r] * J[r][s] * v[s]).sum::<i64>()).sum();
        for i in 0..4 {
            m[i][j] = e[i] + pairing * v[i];
        }
    }
    m
}

/// Rank over `ℚ` of an integer matrix with `n` columns.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else { break };
        if a[p][c].abs() < 1e-9 {
            continue;
        }
        a.swap(r, p);
        for i in 0..a.len() {
            if i != r {
                let f = a[i][c] / a[r][c];
                for k in 0..cols {
                    a[i][k] -= f * a[r][k];
                }
            }
        }
        r += 1;
    }
    r
}

/// Rank of the abelianization map on generators, with the relator row appended.
pub fn abelianization_rank() -> usize {
    let mut rows: Vec<Vec<i64>> = Gen::ALL.iter().map(|g| GroupWord::gen(*g).abelianize().to_vec()).collect();
    rows.push(relator().abelianize().to_vec());
    rank(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twists_fix_their_curve_and_are_transvections() {
        let basis = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
        for g in Gen::ALL {
            let t = TwistAutomorphism::twist(g).unwrap();
            assert_eq!(t.images()[g.index()], GroupWord::gen(g));
            assert_eq!(t.h1_matrix().unwrap(), transvection(basis[g.index()]));
        }
    }

    #[test]
    fn inverse_and_powers() {
        let t = TwistAutomorphism::twist(Gen::A).unwrap();
        let id = t.compose(&t.inverse());
        let oct = octagon();
        for g in Gen::ALL {
            let w = id.apply(&GroupWord::gen(g));
            assert!(oct.evaluate(&w).distance(&oct.evaluate(&GroupWord::gen(g))) < 1e-8);
        }
        let m = t.h1_matrix().unwrap();
        let m3 = t.pow(3).h1_matrix().unwrap();
        assert_eq!(m3, mat_mul(&m, &mat_mul(&m, &m)));
        assert_eq!(TwistAutomorphism::identity().h1_matrix().unwrap(), transvection([0, 0, 0, 0]));
    }

    #[test]
    fn wrong_convention_is_caught() {
        let bad = TwistAutomorphism { name: "bad".into(), images: words(["a", "ab", "c", "d"]), inverse_images: words(["a", "bA", "c", "d"]) };
        assert!(matches!(bad.validate(), Err(TwistError::RelatorViolation(_))));
        let m = [[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 2]];
        assert!(!is_symplectic(&m));
    }

    #[test]
    fn hurewicz_rank() {
        assert_eq!(abelianization_rank(), 4);
    }
}
