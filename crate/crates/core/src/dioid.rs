//! Selective dioids: the weight algebras the enumerators rank by.
//!
//! A dioid is used through [`SelectiveDioid`], whose `plus` always returns
//! one of its two arguments.  The order it induces (`a <= b` iff
//! `plus(a, b) == a`) is exposed directly as [`SelectiveDioid::cmp`], so
//! "smaller" always means "preferred".
//!
//! Relations keep raw scalar weights; a dioid turns them into its own
//! weights with [`SelectiveDioid::lift`], which also receives the atom
//! position and tuple index (needed by the lexicographic and tie-breaking
//! dioids).

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Debug, Write};

/// Errors raised by dioid construction and weight lifting.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DioidError {
    #[error("weight {0} is not in the dioid's domain")]
    OutOfDomain(f64),
    #[error("weight {0} lifts to the zero element")]
    ZeroWeight(f64),
    #[error("atom position {position} does not fit a lexicographic dioid of width {width}")]
    PositionOutOfRange { position: usize, width: usize },
    #[error("vector lengths {0} and {1} differ")]
    LengthMismatch(usize, usize),
    #[error("unknown dioid `{0}`")]
    UnknownDioid(alloc::string::String),
}

/// A commutative selective dioid over `Self::Weight`.
pub trait SelectiveDioid: Clone + Debug {
    type Weight: Clone + PartialEq + Debug;

    /// Neutral element of `plus`, absorbing for `times`.
    fn zero(&self) -> Self::Weight;
    /// Neutral element of `times`.
    fn one(&self) -> Self::Weight;
    /// The total order induced by `plus`; `Less` means preferred.
    fn cmp(&self, a: &Self::Weight, b: &Self::Weight) -> Ordering;
    fn times(&self, a: &Self::Weight, b: &Self::Weight) -> Self::Weight;

    /// Returns whichever argument is preferred, `a` on ties.
    fn plus(&self, a: &Self::Weight, b: &Self::Weight) -> Self::Weight {
        if self.cmp(a, b) == Ordering::Greater {
            b.clone()
        } else {
            a.clone()
        }
    }

    fn is_zero(&self, a: &Self::Weight) -> bool {
        *a == self.zero()
    }

    /// Whether every non-zero weight has a `times` inverse.
    fn has_inverse(&self) -> bool {
        false
    }

    /// Multiplicative inverse of a non-zero weight, if the dioid has one.
    fn invert(&self, _a: &Self::Weight) -> Option<Self::Weight> {
        None
    }

    /// True when distinct witnesses always get distinct weights.
    fn breaks_ties(&self) -> bool {
        false
    }

    /// Turns a raw scalar weight of tuple `tuple` in atom `position` into a
    /// dioid weight.  Rejects values outside the domain and values that
    /// would become the zero element.
    fn lift(&self, raw: f64, position: usize, tuple: u32) -> Result<Self::Weight, DioidError>;

    /// Writes a weight the way results are printed.
    fn write_weight(&self, w: &Self::Weight, out: &mut dyn Write) -> fmt::Result;

    fn less(&self, a: &Self::Weight, b: &Self::Weight) -> bool {
        self.cmp(a, b) == Ordering::Less
    }

    /// Folds `times` over an iterator, starting from `one`.
    fn product<'w, I>(&self, items: I) -> Self::Weight
    where
        I: IntoIterator<Item = &'w Self::Weight>,
        Self::Weight: 'w,
    {
        let mut acc = self.one();
        for w in items {
            acc = self.times(&acc, w);
        }
        acc
    }
}

fn float_cmp(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

fn write_scalar(w: f64, out: &mut dyn Write) -> fmt::Result {
    write!(out, "{w:.6}")
}

/// `(ℝ ∪ {+∞}, min, +)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinSum;

impl SelectiveDioid for MinSum {
    type Weight = f64;

    fn zero(&self) -> f64 {
        f64::INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn cmp(&self, a: &f64, b: &f64) -> Ordering {
        float_cmp(*a, *b)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn invert(&self, a: &f64) -> Option<f64> {
        a.is_finite().then_some(-a)
    }
    fn lift(&self, raw: f64, _: usize, _: u32) -> Result<f64, DioidError> {
        if raw.is_nan() || raw == f64::NEG_INFINITY {
            Err(DioidError::OutOfDomain(raw))
        } else if raw == f64::INFINITY {
            Err(DioidError::ZeroWeight(raw))
        } else {
            Ok(raw)
        }
    }
    fn write_weight(&self, w: &f64, out: &mut dyn Write) -> fmt::Result {
        write_scalar(*w, out)
    }
}

/// `(ℝ ∪ {−∞}, max, +)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxSum;

impl SelectiveDioid for MaxSum {
    type Weight = f64;

    fn zero(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn one(&self) -> f64 {
        0.0
    }
    fn cmp(&self, a: &f64, b: &f64) -> Ordering {
        float_cmp(*b, *a)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn invert(&self, a: &f64) -> Option<f64> {
        a.is_finite().then_some(-a)
    }
    fn lift(&self, raw: f64, _: usize, _: u32) -> Result<f64, DioidError> {
        if raw.is_nan() || raw == f64::INFINITY {
            Err(DioidError::OutOfDomain(raw))
        } else if raw == f64::NEG_INFINITY {
            Err(DioidError::ZeroWeight(raw))
        } else {
            Ok(raw)
        }
    }
    fn write_weight(&self, w: &f64, out: &mut dyn Write) -> fmt::Result {
        write_scalar(*w, out)
    }
}

/// `(ℝ≥0, max, ×)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MaxTimes;

impl SelectiveDioid for MaxTimes {
    type Weight = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn cmp(&self, a: &f64, b: &f64) -> Ordering {
        float_cmp(*b, *a)
    }
    fn times(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn invert(&self, a: &f64) -> Option<f64> {
        (*a != 0.0 && a.is_finite()).then(|| 1.0 / a)
    }
    fn lift(&self, raw: f64, _: usize, _: u32) -> Result<f64, DioidError> {
        if !raw.is_finite() || raw < 0.0 {
            Err(DioidError::OutOfDomain(raw))
        } else if raw == 0.0 {
            Err(DioidError::ZeroWeight(raw))
        } else {
            Ok(raw)
        }
    }
    fn write_weight(&self, w: &f64, out: &mut dyn Write) -> fmt::Result {
        write_scalar(*w, out)
    }
}

/// Boolean dioid with `true` preferred: `plus` is `or`, `times` is `and`.
/// Every tuple lifts to `true`, so ranking degenerates to plain
/// enumeration of the join.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoolInverted;

impl SelectiveDioid for BoolInverted {
    type Weight = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn cmp(&self, a: &bool, b: &bool) -> Ordering {
        b.cmp(a)
    }
    fn times(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn lift(&self, raw: f64, _: usize, _: u32) -> Result<bool, DioidError> {
        if raw.is_nan() {
            Err(DioidError::OutOfDomain(raw))
        } else {
            Ok(true)
        }
    }
    fn write_weight(&self, w: &bool, out: &mut dyn Write) -> fmt::Result {
        out.write_str(if *w { "1" } else { "0" })
    }
}

/// Vectors of naturals of a fixed width, added componentwise and
/// compared lexicographically.  The zero element is the all-`u64::MAX`
/// vector; inverses use wrapping arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicographic {
    width: usize,
}

impl Lexicographic {
    pub fn new(width: usize) -> Self {
        Self { width }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// The unit vector `e_position` scaled by `value`.
    pub fn unit(&self, position: usize, value: u64) -> Result<Vec<u64>, DioidError> {
        if position >= self.width {
            return Err(DioidError::PositionOutOfRange { position, width: self.width });
        }
        let mut v = vec![0; self.width];
        v[position] = value;
        Ok(v)
    }

    pub fn checked_times(&self, a: &[u64], b: &[u64]) -> Result<Vec<u64>, DioidError> {
        if a.len() != b.len() {
            return Err(DioidError::LengthMismatch(a.len(), b.len()));
        }
        if is_lex_zero(a) || is_lex_zero(b) {
            return Ok(vec![u64::MAX; a.len()]);
        }
        Ok(a.iter().zip(b).map(|(x, y)| x.wrapping_add(*y)).collect())
    }
}

fn is_lex_zero(v: &[u64]) -> bool {
    v.iter().all(|&x| x == u64::MAX)
}

fn write_vector(v: &[u64], out: &mut dyn Write) -> fmt::Result {
    out.write_char('[')?;
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.write_char(',')?;
        }
        write!(out, "{x}")?;
    }
    out.write_char(']')
}

impl SelectiveDioid for Lexicographic {
    type Weight = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![u64::MAX; self.width]
    }
    fn one(&self) -> Vec<u64> {
        vec![0; self.width]
    }
    fn cmp(&self, a: &Vec<u64>, b: &Vec<u64>) -> Ordering {
        a.cmp(b)
    }
    fn times(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        match self.checked_times(a, b) {
            Ok(v) => v,
            Err(e) => panic!("lexicographic dioid misuse: {e}"),
        }
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        is_lex_zero(a)
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn invert(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        (!is_lex_zero(a)).then(|| a.iter().map(|x| x.wrapping_neg()).collect())
    }
    fn lift(&self, raw: f64, position: usize, _: u32) -> Result<Vec<u64>, DioidError> {
        if !raw.is_finite() || raw < 0.0 {
            return Err(DioidError::OutOfDomain(raw));
        }
        self.unit(position, raw as u64)
    }
    fn write_weight(&self, w: &Vec<u64>, out: &mut dyn Write) -> fmt::Result {
        write_vector(w, out)
    }
}

/// Pairs a base weight with a vector of tuple identifiers so that two
/// different witnesses never compare equal.  Ties on the base weight are
/// broken lexicographically on the identifier vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TieBreak<B> {
    base: B,
    ids: Lexicographic,
}

impl<B: SelectiveDioid> TieBreak<B> {
    /// `width` is the number of atoms whose tuple ids make up the vector.
    pub fn new(base: B, width: usize) -> Self {
        Self { base, ids: Lexicographic::new(width) }
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    /// Drops the identifier component.
    pub fn project(&self, w: &(B::Weight, Vec<u64>)) -> B::Weight {
        w.0.clone()
    }
}

impl<B: SelectiveDioid> SelectiveDioid for TieBreak<B> {
    type Weight = (B::Weight, Vec<u64>);

    fn zero(&self) -> Self::Weight {
        (self.base.zero(), self.ids.zero())
    }
    fn one(&self) -> Self::Weight {
        (self.base.one(), self.ids.one())
    }
    fn cmp(&self, a: &Self::Weight, b: &Self::Weight) -> Ordering {
        self.base.cmp(&a.0, &b.0).then_with(|| a.1.cmp(&b.1))
    }
    fn times(&self, a: &Self::Weight, b: &Self::Weight) -> Self::Weight {
        if self.is_zero(a) || self.is_zero(b) {
            return self.zero();
        }
        (self.base.times(&a.0, &b.0), self.ids.times(&a.1, &b.1))
    }
    fn is_zero(&self, a: &Self::Weight) -> bool {
        self.base.is_zero(&a.0) || is_lex_zero(&a.1)
    }
    fn has_inverse(&self) -> bool {
        self.base.has_inverse()
    }
    fn invert(&self, a: &Self::Weight) -> Option<Self::Weight> {
        if self.is_zero(a) {
            return None;
        }
        Some((self.base.invert(&a.0)?, self.ids.invert(&a.1)?))
    }
    fn breaks_ties(&self) -> bool {
        true
    }
    fn lift(&self, raw: f64, position: usize, tuple: u32) -> Result<Self::Weight, DioidError> {
        let base = self.base.lift(raw, position, tuple)?;
        Ok((base, self.ids.unit(position, u64::from(tuple))?))
    }
    fn write_weight(&self, w: &Self::Weight, out: &mut dyn Write) -> fmt::Result {
        self.base.write_weight(&w.0, out)
    }
}

/// Renders a weight to a string with the dioid's formatting.
pub fn format_weight<D: SelectiveDioid>(d: &D, w: &D::Weight) -> alloc::string::String {
    let mut s = alloc::string::String::new();
    let _ = d.write_weight(w, &mut s);
    s
}
