//! The commutative ring of finite difference operators on `Z^d`.
//!
//! An operator is a Laurent polynomial in `d` shift variables with exact
//! rational coefficients. The monomial `T[z]` acts on a lattice function by
//! `(T[z] f)(x) = f(x - z)`, so `T[1]` moves data one node to the right.
//!
//! Fourier convention: `T[z]` has symbol `exp(-i theta . z)`. Every other
//! symbol computation in the crate goes through [`ShiftPoly::symbol`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, Rational};

pub type Offset = Vec<i64>;

/// Finite difference operator in canonical form: no stored coefficient is
/// zero and every offset has length `dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShiftPoly {
    dim: usize,
    terms: BTreeMap<Offset, Rational>,
}

impl ShiftPoly {
    pub fn zero(dim: usize) -> Self {
        ShiftPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::one())
    }

    pub fn constant(dim: usize, value: Rational) -> Self {
        Self::monomial(vec![0; dim], value)
    }

    /// The pure shift `T[z]`.
    pub fn shift(z: &[i64]) -> Self {
        Self::monomial(z.to_vec(), Rational::one())
    }

    pub fn monomial(z: Offset, coeff: Rational) -> Self {
        let dim = z.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(z, coeff);
        }
        ShiftPoly { dim, terms }
    }

    /// Builds an operator from arbitrary `(offset, coefficient)` pairs,
    /// merging repeated offsets.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Offset, Rational)>,
    {
        let mut out = ShiftPoly::zero(dim);
        for (z, c) in terms {
            if z.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: z.len(),
                });
            }
            out.accumulate(z, c);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Offset, &Rational)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().all(|(z, c)| z.iter().all(|&k| k == 0) && c.is_one())
    }

    pub fn coeff(&self, z: &[i64]) -> Rational {
        self.terms.get(z).cloned().unwrap_or_else(Rational::zero)
    }

    /// Largest absolute offset component; zero for the zero operator.
    pub fn reach(&self) -> u64 {
        self.terms
            .keys()
            .flat_map(|z| z.iter().map(|k| k.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    fn accumulate(&mut self, z: Offset, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(z) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &ShiftPoly) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &ShiftPoly) -> Result<ShiftPoly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (z, c) in &other.terms {
            out.accumulate(z.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &ShiftPoly) -> Result<ShiftPoly> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (z, c) in &other.terms {
            out.accumulate(z.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &ShiftPoly) -> Result<ShiftPoly> {
        self.check_dim(other)?;
        let mut out = ShiftPoly::zero(self.dim);
        for (za, ca) in &self.terms {
            for (zb, cb) in &other.terms {
                let z = za.iter().zip(zb).map(|(a, b)| a + b).collect();
                out.accumulate(z, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &Rational) -> ShiftPoly {
        if factor.is_zero() {
            return ShiftPoly::zero(self.dim);
        }
        ShiftPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(z, c)| (z.clone(), c * factor)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> ShiftPoly {
        let mut acc = ShiftPoly::one(self.dim);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluates the Fourier symbol, substituting `T[z] -> exp(-i theta . z)`.
    pub fn symbol(&self, theta: &[f64]) -> Complex64 {
        assert_eq!(theta.len(), self.dim, "theta must have one angle per axis");
        self.terms
            .iter()
            .map(|(z, c)| {
                let phase: f64 = z.iter().zip(theta).map(|(&k, t)| k as f64 * t).sum();
                let weight = c.to_f64().expect("rational coefficient fits in f64");
                Complex64::from_polar(weight, -phase)
            })
            .sum()
    }

    /// Applies the operator to a periodic grid function:
    /// `(a f)(x) = sum_z a_z f(x - z mod L)`.
    pub fn apply(&self, f: &PeriodicGrid) -> Result<PeriodicGrid> {
        if f.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: f.dim,
            });
        }
        let mut out = PeriodicGrid::zeros(f.dim, f.size);
        for (z, c) in &self.terms {
            for (idx, slot) in out.values.iter_mut().enumerate() {
                let src = f.shifted_index(idx, z);
                let v = &f.values[src];
                if !v.is_zero() {
                    *slot += c * v;
                }
            }
        }
        Ok(out)
    }

    /// Parses the textual operator form, e.g. `1/2 * T[1] - 1/2 * T[-1]`.
    ///
    /// Accepted terms are `c * T[z]`, `T[z]` and bare rationals (a multiple
    /// of the identity). `dim` is needed for operators without any `T[..]`.
    pub fn parse(text: &str, dim: usize) -> Result<ShiftPoly> {
        Parser::new(text, dim).parse()
    }
}

impl fmt::Display for ShiftPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (z, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c.is_negative()) {
                (0, false) => write!(f, "{mag}")?,
                (0, true) => write!(f, "-{mag}")?,
                (_, false) => write!(f, " + {mag}")?,
                (_, true) => write!(f, " - {mag}")?,
            }
            write!(f, " * T[")?;
            for (k, v) in z.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&ShiftPoly> for &ShiftPoly {
            type Output = ShiftPoly;
            /// Panics on a dimension mismatch; use the `checked_*` form to
            /// get an error instead.
            fn $method(self, rhs: &ShiftPoly) -> ShiftPoly {
                self.$checked(rhs).expect("operands share a dimension")
            }
        }

        impl $trait<ShiftPoly> for ShiftPoly {
            type Output = ShiftPoly;
            fn $method(self, rhs: ShiftPoly) -> ShiftPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &ShiftPoly {
    type Output = ShiftPoly;
    fn neg(self) -> ShiftPoly {
        ShiftPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(z, c)| (z.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for ShiftPoly {
    type Output = ShiftPoly;
    fn neg(self) -> ShiftPoly {
        -&self
    }
}

/// A function on the periodic lattice `(Z/L)^d`, stored row-major with the
/// first axis slowest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    dim: usize,
    size: usize,
    values: Vec<Rational>,
}

impl PeriodicGrid {
    pub fn zeros(dim: usize, size: usize) -> Self {
        assert!(size >= 1, "periodic lattice needs at least one node");
        let n = size.pow(dim as u32);
        PeriodicGrid {
            dim,
            size,
            values: vec![Rational::zero(); n],
        }
    }

    pub fn from_values(dim: usize, size: usize, values: Vec<Rational>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSpec("lattice size must be at least 1".into()));
        }
        let n = size.pow(dim as u32);
        if values.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: values.len(),
            });
        }
        Ok(PeriodicGrid { dim, size, values })
    }

    /// One-dimensional grid.
    pub fn line(values: Vec<Rational>) -> Result<Self> {
        let n = values.len();
        Self::from_values(1, n, values)
    }

    pub fn delta(dim: usize, size: usize, node: usize) -> Self {
        let mut g = Self::zeros(dim, size);
        g.values[node] = Rational::one();
        g
    }

    pub fn constant(dim: usize, size: usize, value: Rational) -> Self {
        let n = size.pow(dim as u32);
        PeriodicGrid {
            dim,
            size,
            values: vec![value; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn nodes(&self) -> usize {
        self.values.len()
    }

    pub fn sum(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn scale(&self, factor: &Rational) -> PeriodicGrid {
        PeriodicGrid {
            dim: self.dim,
            size: self.size,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &PeriodicGrid) -> Result<PeriodicGrid> {
        self.check_shape(other)?;
        Ok(PeriodicGrid {
            dim: self.dim,
            size: self.size,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &PeriodicGrid) -> Result<PeriodicGrid> {
        self.check_shape(other)?;
        Ok(PeriodicGrid {
            dim: self.dim,
            size: self.size,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// Translates the grid by `z` nodes; identical to applying `T[z]`.
    pub fn translate(&self, z: &[i64]) -> PeriodicGrid {
        ShiftPoly::shift(z)
            .apply(self)
            .expect("translation offset matches grid dimension")
    }

    fn check_shape(&self, other: &PeriodicGrid) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        Ok(())
    }

    /// Flat index of `x - z` for the node with flat index `idx`.
    fn shifted_index(&self, idx: usize, z: &[i64]) -> usize {
        let l = self.size as i64;
        let mut rem = idx;
        let mut out = 0usize;
        let mut stride = 1usize;
        for axis in (0..self.dim).rev() {
            let coord = (rem % self.size) as i64;
            rem /= self.size;
            let moved = (coord - z[axis]).rem_euclid(l) as usize;
            out += moved * stride;
            stride *= self.size;
        }
        out
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    dim: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, dim: usize) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
            dim,
            src,
        }
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at column {} in operator {:?}", self.pos + 1, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{ch}'")))
        }
    }

    fn parse(mut self) -> Result<ShiftPoly> {
        let mut out = ShiftPoly::zero(self.dim);
        let mut negative = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            Some(_) => false,
            None => return Err(self.err("empty operator")),
        };
        loop {
            let (z, c) = self.term()?;
            out.accumulate(z, if negative { -c } else { c });
            match self.peek() {
                None => break,
                Some('+') => negative = false,
                Some('-') => negative = true,
                Some(_) => return Err(self.err("expected '+' or '-'")),
            }
            self.pos += 1;
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Offset, Rational)> {
        if self.peek() == Some('T') {
            return Ok((self.shift()?, Rational::one()));
        }
        let coeff = self.rational()?;
        if self.peek() == Some('*') {
            self.pos += 1;
            if self.peek() != Some('T') {
                return Err(self.err("expected 'T[...]'"));
            }
            Ok((self.shift()?, coeff))
        } else {
            Ok((vec![0; self.dim], coeff))
        }
    }

    fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '/') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a rational coefficient"));
        }
        let lit: String = self.chars[start..self.pos].iter().collect();
        parse_rational(&lit)
    }

    fn shift(&mut self) -> Result<Offset> {
        self.expect('T')?;
        self.expect('[')?;
        let mut z = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            if self.chars.get(self.pos) == Some(&'-') {
                self.pos += 1;
            }
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let lit: String = self.chars[start..self.pos].iter().collect();
            let v = lit.parse::<i64>().map_err(|_| self.err("expected an integer offset"))?;
            z.push(v);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err("expected ',' or ']'")),
            }
        }
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: z.len(),
            });
        }
        Ok(z)
    }
}

/// `x = T[1]` in one dimension.
pub fn x() -> ShiftPoly {
    ShiftPoly::shift(&[1])
}

/// `x̄ = T[-1]` in one dimension.
pub fn xbar() -> ShiftPoly {
    ShiftPoly::shift(&[-1])
}
