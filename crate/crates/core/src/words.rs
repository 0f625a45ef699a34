//! Reduced words in a free group, representations and orbit paths.
//!
//! Generators are written `a, b, c, …` and their inverses `A, B, C, …`.
//! Words are ordered lexicographically for the alphabet `a < A < b < B < …`.
//! Word products are always formed left to right starting from the identity,
//! so prefix-shared evaluation reproduces naive evaluation bit for bit.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cartan::{GroupElement, Point};
use crate::error::{Error, Result};
use crate::morse::OrbitPath;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    /// Position in the alphabet `a, A, b, B, …`.
    pub fn index(self) -> usize {
        2 * self.generator + self.inverse as usize
    }

    pub fn from_index(i: usize) -> Self {
        Letter { generator: i / 2, inverse: i % 2 == 1 }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn to_char(self) -> char {
        let base = if self.inverse { b'A' } else { b'a' };
        (base + self.generator as u8) as char
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Letter::new(c as usize - 'A' as usize, true)),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

pub type Word = Vec<Letter>;

/// Parses a word such as `"abAB"`; the empty string is the identity.
pub fn parse_word(s: &str) -> Result<Word> {
    s.chars()
        .map(|c| Letter::from_char(c).ok_or_else(|| Error::InputError(alloc::format!("invalid letter {c:?} in word {s:?}"))))
        .collect()
}

pub fn format_word(w: &[Letter]) -> String {
    w.iter().map(|l| l.to_char()).collect()
}

pub fn is_reduced(w: &[Letter]) -> bool {
    w.windows(2).all(|p| p[1] != p[0].inv())
}

/// `2r (2r-1)^{L-1}` for `L ≥ 1`, one for `L = 0`; `None` on overflow.
pub fn reduced_word_count(rank: usize, length: usize) -> Option<u64> {
    if length == 0 {
        return Some(1);
    }
    let r = rank as u64;
    let mut count = 2 * r;
    for _ in 1..length {
        count = count.checked_mul(2 * r - 1)?;
    }
    Some(count)
}

/// Lexicographic enumeration of the reduced words of a given length that
/// start with a fixed reduced prefix.
#[derive(Clone, Debug)]
pub struct ReducedWords {
    alphabet: usize,
    prefix_len: usize,
    current: Vec<usize>,
    done: bool,
}

impl ReducedWords {
    pub fn with_prefix(rank: usize, length: usize, prefix: &[Letter]) -> Self {
        let alphabet = 2 * rank;
        let valid = rank >= 1
            && prefix.len() <= length
            && is_reduced(prefix)
            && prefix.iter().all(|l| l.generator < rank);
        let mut current: Vec<usize> = prefix.iter().map(|l| l.index()).collect();
        let mut done = !valid;
        if valid {
            while current.len() < length {
                let next = smallest_after(current.last().copied(), 0, alphabet);
                match next {
                    Some(i) => current.push(i),
                    None => {
                        done = true;
                        break;
                    }
                }
            }
        }
        ReducedWords { alphabet, prefix_len: prefix.len(), current, done }
    }
}

/// Smallest letter index `≥ from` that may follow `prev` in a reduced word.
fn smallest_after(prev: Option<usize>, from: usize, alphabet: usize) -> Option<usize> {
    (from..alphabet).find(|&i| prev.is_none_or(|p| i != (p ^ 1)))
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let out: Word = self.current.iter().map(|&i| Letter::from_index(i)).collect();
        // odometer step over the free positions
        let len = self.current.len();
        let mut pos = len;
        loop {
            if pos == self.prefix_len {
                self.done = true;
                break;
            }
            pos -= 1;
            let prev = if pos == 0 { None } else { Some(self.current[pos - 1]) };
            if let Some(i) = smallest_after(prev, self.current[pos] + 1, self.alphabet) {
                self.current[pos] = i;
                for k in pos + 1..len {
                    self.current[k] = smallest_after(Some(self.current[k - 1]), 0, self.alphabet).expect("rank >= 1");
                }
                break;
            }
        }
        Some(out)
    }
}

/// All reduced words of the given length in lexicographic order.
pub fn reduced_words(rank: usize, length: usize) -> ReducedWords {
    ReducedWords::with_prefix(rank, length, &[])
}

/// Generators of a free-group representation together with their inverses
/// and a basepoint for orbit maps.
#[derive(Clone, Debug)]
pub struct Representation<T: Real = f64> {
    generators: Vec<GroupElement<T>>,
    inverses: Vec<GroupElement<T>>,
    basepoint: Point<T>,
}

impl<T: Real> Representation<T> {
    pub fn new(generators: Vec<GroupElement<T>>, basepoint: Point<T>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InputError("a representation needs at least one generator".into()));
        }
        let n = basepoint.dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
        }
        let inverses = generators.iter().map(GroupElement::inverse).collect();
        Ok(Representation { generators, inverses, basepoint })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.basepoint.dim()
    }

    pub fn generators(&self) -> &[GroupElement<T>] {
        &self.generators
    }

    pub fn basepoint(&self) -> &Point<T> {
        &self.basepoint
    }

    pub fn letter(&self, l: Letter) -> &GroupElement<T> {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.generators[l.generator]
        }
    }

    fn check_word(&self, word: &[Letter]) -> Result<()> {
        match word.iter().find(|l| l.generator >= self.rank()) {
            Some(l) => Err(Error::InputError(alloc::format!("letter {l} exceeds rank {}", self.rank()))),
            None => Ok(()),
        }
    }

    /// `ρ(w)`, multiplied left to right from the identity.
    pub fn word_element(&self, word: &[Letter]) -> Result<GroupElement<T>> {
        self.check_word(word)?;
        let mut acc = GroupElement::identity(self.dim());
        for &l in word {
            acc = acc.mul(self.letter(l));
        }
        Ok(acc)
    }

    /// Same representation with the basepoint replaced.
    pub fn with_basepoint(&self, basepoint: Point<T>) -> Self {
        Representation { generators: self.generators.clone(), inverses: self.inverses.clone(), basepoint }
    }

    /// Orbit points `ρ(w₁…w_k)·x` for `k = 0..=|w|`.
    pub fn orbit_path(&self, word: &[Letter]) -> Result<OrbitPath<T>> {
        self.orbit_path_from(word, &self.basepoint)
    }

    /// Orbit points `ρ(w₁…w_k)·o` of an arbitrary origin `o`.
    pub fn orbit_path_from(&self, word: &[Letter], origin: &Point<T>) -> Result<OrbitPath<T>> {
        self.check_word(word)?;
        let mut points = Vec::with_capacity(word.len() + 1);
        let mut acc = GroupElement::identity(self.dim());
        points.push(checked_point(origin.clone(), 0)?);
        for (i, &l) in word.iter().enumerate() {
            acc = acc.mul(self.letter(l));
            points.push(checked_point(origin.translate(&acc), i + 1)?);
        }
        OrbitPath::with_labels(points, word.to_vec())
    }

    /// Orbit path of `word` translated by `ρ(w₁…w_c)⁻¹`, so that point `c`
    /// is the basepoint. Distances and shapes agree with [`Self::orbit_path`],
    /// while entries stay as small as the two halves allow.
    pub fn centred_path(&self, word: &[Letter], centre: usize) -> Result<OrbitPath<T>> {
        self.check_word(word)?;
        if centre > word.len() {
            return Err(Error::InputError(alloc::format!("centre {centre} exceeds word length {}", word.len())));
        }
        let mut points = alloc::vec![self.basepoint.clone(); word.len() + 1];
        let mut acc = GroupElement::identity(self.dim());
        for k in (0..centre).rev() {
            acc = acc.mul(self.letter(word[k].inv()));
            points[k] = checked_point(self.basepoint.translate(&acc), k)?;
        }
        acc = GroupElement::identity(self.dim());
        for k in centre..word.len() {
            acc = acc.mul(self.letter(word[k]));
            points[k + 1] = checked_point(self.basepoint.translate(&acc), k + 1)?;
        }
        OrbitPath::with_labels(points, word.to_vec())
    }

    /// Depth-first traversal of all reduced words of `length` extending
    /// `prefix`, sharing prefix products. The visitor receives each word and
    /// the group elements `ρ(w₁…w_k)` for `k = 0..=length`.
    pub fn visit_words<F>(&self, length: usize, prefix: &[Letter], mut visit: F) -> Result<()>
    where
        F: FnMut(&[Letter], &[GroupElement<T>]) -> Result<()>,
    {
        self.check_word(prefix)?;
        let mut word: Word = Vec::with_capacity(length);
        let mut products: Vec<GroupElement<T>> = Vec::with_capacity(length + 1);
        products.push(GroupElement::identity(self.dim()));
        for &l in prefix {
            let next = products.last().expect("non-empty").mul(self.letter(l));
            word.push(l);
            products.push(next);
        }
        if !is_reduced(prefix) || prefix.len() > length {
            return Ok(());
        }
        self.descend(length, &mut word, &mut products, &mut visit)
    }

    fn descend<F>(&self, length: usize, word: &mut Word, products: &mut Vec<GroupElement<T>>, visit: &mut F) -> Result<()>
    where
        F: FnMut(&[Letter], &[GroupElement<T>]) -> Result<()>,
    {
        if word.len() == length {
            return visit(word, products);
        }
        for i in 0..2 * self.rank() {
            let l = Letter::from_index(i);
            if word.last().is_some_and(|&p| p == l.inv()) {
                continue;
            }
            let next = products.last().expect("non-empty").mul(self.letter(l));
            word.push(l);
            products.push(next);
            let res = self.descend(length, word, products, visit);
            word.pop();
            products.pop();
            res?;
        }
        Ok(())
    }

    pub fn to_f64(&self) -> Representation<f64> {
        self.lift()
    }

    pub fn lift<U: Real>(&self) -> Representation<U> {
        Representation {
            generators: self.generators.iter().map(GroupElement::lift).collect(),
            inverses: self.inverses.iter().map(GroupElement::lift).collect(),
            basepoint: self.basepoint.lift(),
        }
    }
}

/// Rejects points whose condition number exceeds what the scalar type resolves.
pub fn checked_point<T: Real>(p: Point<T>, index: usize) -> Result<Point<T>> {
    let log10_condition = p.log10_condition();
    let limit = T::max_log10_condition();
    if !(log10_condition <= limit) {
        return Err(Error::NumericalBlowup { index, log10_condition, limit });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::cartan_vector;
    use alloc::vec;

    #[test]
    fn counts_match_formula() {
        assert_eq!(reduced_words(2, 1).count(), 4);
        assert_eq!(reduced_words(2, 3).count(), 36);
        assert_eq!(reduced_words(3, 0).count(), 1);
        for rank in 1..=4 {
            for len in 0..=(if rank > 2 { 6 } else { 10 }) {
                assert_eq!(reduced_words(rank, len).count() as u64, reduced_word_count(rank, len).unwrap());
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force_filter() {
        for len in 0..=6usize {
            let mut brute = Vec::new();
            for code in 0..4usize.pow(len as u32) {
                let w: Word = (0..len).map(|k| Letter::from_index(code / 4usize.pow((len - 1 - k) as u32) % 4)).collect();
                if is_reduced(&w) {
                    brute.push(w);
                }
            }
            let listed: Vec<Word> = reduced_words(2, len).collect();
            assert_eq!(listed, brute);
        }
    }

    #[test]
    fn prefix_iteration_partitions_the_words() {
        let all: Vec<Word> = reduced_words(2, 4).collect();
        let mut joined = Vec::new();
        for first in reduced_words(2, 2) {
            joined.extend(ReducedWords::with_prefix(2, 4, &first));
        }
        assert_eq!(all, joined);
        assert_eq!(ReducedWords::with_prefix(2, 3, &parse_word("aA").unwrap()).count(), 0);
    }

    #[test]
    fn parse_and_format() {
        let w = parse_word("abAB").unwrap();
        assert_eq!(format_word(&w), "abAB");
        assert!(parse_word("a1").is_err());
        assert!(!is_reduced(&parse_word("abBa").unwrap()));
    }

    fn rep() -> Representation<f64> {
        let a = GroupElement::from_rows(2, &[2.0, 1.0, 1.0, 1.0]).unwrap();
        let b = GroupElement::from_rows(2, &[1.0, 0.0, 3.0, 1.0]).unwrap();
        Representation::new(vec![a, b], Point::identity(2)).unwrap()
    }

    #[test]
    fn prefix_sharing_is_bitwise_identical() {
        let r = rep();
        r.visit_words(5, &[], |w, products| {
            let naive = r.orbit_path(w)?;
            for (k, p) in naive.points().iter().enumerate() {
                let shared = r.basepoint().translate(&products[k]);
                assert_eq!(shared.matrix().to_row_major_f64(), p.matrix().to_row_major_f64());
            }
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn orbit_path_shapes() {
        let r = rep();
        assert_eq!(r.orbit_path(&[]).unwrap().len(), 1);
        let w = parse_word("aaa").unwrap();
        let path = r.orbit_path(&w).unwrap();
        assert_eq!(path.len(), 4);
        // consecutive steps along a power are translates of each other
        let d01 = cartan_vector(&path.points()[0], &path.points()[1]).unwrap();
        let d23 = cartan_vector(&path.points()[2], &path.points()[3]).unwrap();
        assert!(d01.distance(&d23) < 1e-9);
    }

    #[test]
    fn path_concatenation_associates() {
        let r = rep();
        let (u, v) = (parse_word("ab").unwrap(), parse_word("Ab").unwrap());
        let uv: Word = u.iter().chain(&v).copied().collect();
        let whole = r.orbit_path(&uv).unwrap();
        let origin = r.basepoint().translate(&r.word_element(&u).unwrap());
        let shifted = r.orbit_path_from(&v, &r.basepoint().clone()).unwrap();
        let gu = r.word_element(&u).unwrap();
        for k in 0..=v.len() {
            let a = &whole.points()[u.len() + k];
            let b = shifted.points()[k].translate(&gu);
            assert!(a.matrix().sub(b.matrix()).max_abs() < 1e-9 * a.matrix().max_abs());
        }
        assert!(origin.matrix().sub(whole.points()[u.len()].matrix()).max_abs() < 1e-9);
    }

    #[test]
    fn centred_path_is_a_translate() {
        let r = rep();
        let w = parse_word("abAbb").unwrap();
        let whole = r.orbit_path(&w).unwrap();
        for centre in 0..=w.len() {
            let centred = r.centred_path(&w, centre).unwrap();
            assert!(centred.points()[centre].matrix().sub(r.basepoint().matrix()).max_abs() < 1e-12);
            let back = r.word_element(&w[..centre]).unwrap();
            for (a, b) in whole.points().iter().zip(centred.points()) {
                let moved = b.translate(&back);
                assert!(a.matrix().sub(moved.matrix()).max_abs() < 1e-9 * a.matrix().max_abs());
            }
        }
        assert!(r.centred_path(&w, 6).is_err());
    }

    #[test]
    fn blowup_is_detected() {
        let g = GroupElement::<f64>::from_log_diagonal(&[3.0, -3.0]);
        let r = Representation::new(vec![g], Point::identity(2)).unwrap();
        let w = parse_word("aaaaaaaa").unwrap();
        assert!(matches!(r.orbit_path(&w), Err(Error::NumericalBlowup { index: 3, .. })));
    }
}
