//! Freely reduced words in the face-pairing generators.
//!
//! Letters are nonzero i32 values: +k is generator k (1-based), -k its
//! inverse. Concatenation cancels adjacent inverse pairs.

use crate::moebius::MoebiusTransform;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(g: i32) -> Self {
        assert!(g != 0);
        Word(vec![g])
    }

    pub fn from_letters(letters: &[i32]) -> Self {
        let mut w = Word::empty();
        for &g in letters {
            w.push(g);
        }
        w
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, g: i32) {
        if g == 0 {
            return;
        }
        if self.0.last() == Some(&-g) {
            self.0.pop();
        } else {
            self.0.push(g);
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &g in &other.0 {
            w.push(g);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|g| -g).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n >= 0 { self.clone() } else { self.inverse() };
        let mut w = Word::empty();
        for _ in 0..n.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }

    /// Exponent-sum vector over `ngens` generators.
    pub fn abelianized(&self, ngens: usize) -> Vec<i64> {
        let mut v = vec![0i64; ngens];
        for &g in &self.0 {
            let i = (g.unsigned_abs() as usize) - 1;
            v[i] += if g > 0 { 1 } else { -1 };
        }
        v
    }

    /// Evaluates the word against generator images, composing left to right.
    pub fn evaluate(&self, gens: &[MoebiusTransform]) -> MoebiusTransform {
        let mut m = MoebiusTransform::identity();
        for &g in &self.0 {
            let i = (g.unsigned_abs() as usize) - 1;
            let gm = if g > 0 { gens[i] } else { gens[i].inverse() };
            m = m * gm;
        }
        m
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            if *g > 0 {
                write!(f, "g{}", g)?;
            } else {
                write!(f, "g{}^-1", -g)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_reduction() {
        let w = Word::from_letters(&[1, 2, -2, -1, 3]);
        assert_eq!(w.letters(), &[3]);
        let u = Word::from_letters(&[1, 2]);
        assert!(u.concat(&u.inverse()).is_empty());
    }

    #[test]
    fn powers() {
        let w = Word::from_letters(&[1, -2]);
        assert_eq!(w.pow(2).letters(), &[1, -2, 1, -2]);
        assert_eq!(w.pow(-1).letters(), &[2, -1]);
        assert_eq!(w.abelianized(2), vec![1, -1]);
    }
}
