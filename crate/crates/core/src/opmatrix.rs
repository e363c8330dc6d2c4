//! Square matrices over the shift-operator ring.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rational::{QMatrix, Rational};
use crate::shiftring::ShiftPoly;

/// A `q x q` matrix of finite difference operators sharing one spatial
/// dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpMatrix {
    size: usize,
    dim: usize,
    entries: Vec<ShiftPoly>,
}

impl OpMatrix {
    pub fn zero(size: usize, dim: usize) -> Self {
        OpMatrix {
            size,
            dim,
            entries: vec![ShiftPoly::zero(dim); size * size],
        }
    }

    pub fn identity(size: usize, dim: usize) -> Self {
        let mut m = Self::zero(size, dim);
        for i in 0..size {
            m.entries[i * size + i] = ShiftPoly::one(dim);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ShiftPoly>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidSpec("empty operator matrix".into()));
        }
        let dim = rows[0]
            .first()
            .map(ShiftPoly::dim)
            .ok_or_else(|| Error::InvalidSpec("empty operator matrix row".into()))?;
        for row in &rows {
            if row.len() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|e| e.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: bad.dim(),
                });
            }
        }
        Ok(OpMatrix {
            size,
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Embeds a rational matrix as constant operators.
    pub fn from_rational(m: &QMatrix, dim: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::SizeMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        Self::from_rows(
            m.to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(|v| ShiftPoly::constant(dim, v)).collect())
                .collect(),
        )
    }

    pub fn diagonal(diag: Vec<ShiftPoly>) -> Result<Self> {
        let size = diag.len();
        let dim = diag
            .first()
            .map(ShiftPoly::dim)
            .ok_or_else(|| Error::InvalidSpec("empty diagonal".into()))?;
        let mut m = Self::zero(size, dim);
        for (i, d) in diag.into_iter().enumerate() {
            if d.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: d.dim(),
                });
            }
            m.entries[i * size + i] = d;
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &ShiftPoly {
        &self.entries[r * self.size + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: ShiftPoly) -> Result<()> {
        if value.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: value.dim(),
            });
        }
        self.entries[r * self.size + c] = value;
        Ok(())
    }

    pub fn row(&self, r: usize) -> &[ShiftPoly] {
        &self.entries[r * self.size..(r + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ShiftPoly]> {
        self.entries.chunks(self.size)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(ShiftPoly::is_zero)
    }

    fn check_same_shape(&self, other: &OpMatrix) -> Result<()> {
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                found: other.size,
            });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &OpMatrix) -> Result<OpMatrix> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &OpMatrix) -> Result<OpMatrix> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &OpMatrix, f: impl Fn(&ShiftPoly, &ShiftPoly) -> ShiftPoly) -> OpMatrix {
        OpMatrix {
            size: self.size,
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn mul(&self, other: &OpMatrix) -> Result<OpMatrix> {
        self.check_same_shape(other)?;
        let n = self.size;
        let mut out = OpMatrix::zero(n, self.dim);
        for r in 0..n {
            for c in 0..n {
                let mut acc = ShiftPoly::zero(self.dim);
                for k in 0..n {
                    let a = self.get(r, k);
                    let b = other.get(k, c);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * b);
                }
                out.entries[r * n + c] = acc;
            }
        }
        Ok(out)
    }

    /// Multiplies every entry by the operator `s`.
    pub fn scale(&self, s: &ShiftPoly) -> Result<OpMatrix> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: s.dim(),
            });
        }
        Ok(OpMatrix {
            size: self.size,
            dim: self.dim,
            entries: self.entries.iter().map(|e| e * s).collect(),
        })
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, row: &[ShiftPoly]) -> Result<Vec<ShiftPoly>> {
        if row.len() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                found: row.len(),
            });
        }
        Ok((0..self.size)
            .map(|c| {
                row.iter()
                    .enumerate()
                    .fold(ShiftPoly::zero(self.dim), |acc, (k, v)| &acc + &(v * self.get(k, c)))
            })
            .collect())
    }

    /// Keeps entry `(r, c)` iff both indices lie in `keep` (0-based), zeroing
    /// everything else.
    pub fn restrict(&self, keep: &[usize]) -> Result<OpMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(&bad) = keep.iter().find(|&&k| k >= self.size) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                size: self.size,
            });
        }
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        let mut out = OpMatrix::zero(self.size, self.dim);
        for r in &keep {
            for c in &keep {
                out.entries[r * self.size + c] = self.get(*r, *c).clone();
            }
        }
        Ok(out)
    }

    /// `[A^0, A^1, ..., A^max]`.
    pub fn powers(&self, max: usize) -> Vec<OpMatrix> {
        let mut out = Vec::with_capacity(max + 1);
        out.push(OpMatrix::identity(self.size, self.dim));
        for k in 1..=max {
            let next = out[k - 1].mul(self).expect("square matrices of one shape");
            out.push(next);
        }
        out
    }

    pub fn trace(&self) -> ShiftPoly {
        (0..self.size).fold(ShiftPoly::zero(self.dim), |acc, i| &acc + self.get(i, i))
    }

    /// Characteristic polynomial `det(X I - A)` by Berkowitz's division-free
    /// recursion, valid over any commutative ring.
    pub fn charpoly(&self) -> CharPoly {
        let rows: Vec<Vec<ShiftPoly>> = self.rows().map(<[ShiftPoly]>::to_vec).collect();
        // berkowitz_vector returns [1, c_{n-1}, ..., c_0]
        let mut coeffs = berkowitz_vector(&rows, self.dim);
        coeffs.reverse();
        CharPoly { coeffs }
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det_cofactor(&self) -> ShiftPoly {
        let rows: Vec<Vec<ShiftPoly>> = self.rows().map(<[ShiftPoly]>::to_vec).collect();
        cofactor_det(&rows, self.dim)
    }

    /// Entrywise Fourier symbol.
    pub fn symbol(&self, theta: &[f64]) -> Vec<Vec<Complex64>> {
        self.rows()
            .map(|r| r.iter().map(|e| e.symbol(theta)).collect())
            .collect()
    }
}

impl fmt::Display for OpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " | ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

fn berkowitz_vector(m: &[Vec<ShiftPoly>], dim: usize) -> Vec<ShiftPoly> {
    let n = m.len();
    if n == 0 {
        return vec![ShiftPoly::one(dim)];
    }
    if n == 1 {
        return vec![ShiftPoly::one(dim), -&m[0][0]];
    }
    let a = &m[0][0];
    let r: Vec<&ShiftPoly> = m[0][1..].iter().collect();
    let sub: Vec<Vec<ShiftPoly>> = m[1..].iter().map(|row| row[1..].to_vec()).collect();

    // first column of the Toeplitz matrix: 1, -a, -R C, -R A C, -R A^2 C, ...
    let mut column: Vec<ShiftPoly> = m[1..].iter().map(|row| row[0].clone()).collect();
    let mut diags = vec![ShiftPoly::one(dim), -a];
    for step in 0..n - 1 {
        if step > 0 {
            column = sub
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&column)
                        .fold(ShiftPoly::zero(dim), |acc, (x, y)| &acc + &(x * y))
                })
                .collect();
        }
        let dot = r
            .iter()
            .zip(&column)
            .fold(ShiftPoly::zero(dim), |acc, (x, y)| &acc + &(*x * y));
        diags.push(-dot);
    }

    let inner = berkowitz_vector(&sub, dim);
    // toeplitz is (n+1) x n lower triangular with entry (i, j) = diags[i - j]
    (0..=n)
        .map(|i| (0..n.min(i + 1)).fold(ShiftPoly::zero(dim), |acc, j| &acc + &(&diags[i - j] * &inner[j])))
        .collect()
}

fn cofactor_det(m: &[Vec<ShiftPoly>], dim: usize) -> ShiftPoly {
    let n = m.len();
    match n {
        0 => ShiftPoly::one(dim),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ShiftPoly::zero(dim);
            for (col, pivot) in m[0].iter().enumerate() {
                if pivot.is_zero() {
                    continue;
                }
                let minor: Vec<Vec<ShiftPoly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = pivot * &cofactor_det(&minor, dim);
                acc = if col % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Monic characteristic polynomial, coefficients stored in ascending degree:
/// `coeffs[k]` multiplies `X^k` and `coeffs[q]` is the ring identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CharPoly {
    coeffs: Vec<ShiftPoly>,
}

impl CharPoly {
    pub fn from_coeffs(coeffs: Vec<ShiftPoly>) -> Result<Self> {
        match coeffs.last() {
            Some(top) if top.is_one() => Ok(CharPoly { coeffs }),
            _ => Err(Error::InvalidSpec("characteristic polynomial must be monic".into())),
        }
    }

    /// `prod_j (X - roots_j)` for commuting operator roots.
    pub fn from_roots(roots: &[ShiftPoly], dim: usize) -> Self {
        let mut coeffs = vec![ShiftPoly::one(dim)];
        for root in roots {
            let mut next = vec![ShiftPoly::zero(dim); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = &next[k + 1] + c;
                next[k] = &next[k] - &(c * root);
            }
            coeffs = next;
        }
        CharPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &ShiftPoly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[ShiftPoly] {
        &self.coeffs
    }

    /// `sum_k coeffs[k] A^k`.
    pub fn eval(&self, a: &OpMatrix) -> Result<OpMatrix> {
        if a.size() != self.degree() {
            return Err(Error::SizeMismatch {
                expected: self.degree(),
                found: a.size(),
            });
        }
        let powers = a.powers(self.degree());
        let mut acc = OpMatrix::zero(a.size(), a.dim());
        for (c, p) in self.coeffs.iter().zip(&powers) {
            acc = acc.add(&p.scale(c)?)?;
        }
        Ok(acc)
    }
}

/// Characteristic polynomial of a complex matrix by the Faddeev–LeVerrier
/// recursion; ascending coefficients, monic.
pub fn complex_charpoly(m: &[Vec<Complex64>]) -> Vec<Complex64> {
    let n = m.len();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut coeffs = vec![zero; n + 1];
    coeffs[n] = one;
    // M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k
    let mut mk: Vec<Vec<Complex64>> = vec![vec![zero; n]; n];
    for k in 1..=n {
        let mut next = vec![vec![zero; n]; n];
        for (r, row) in next.iter_mut().enumerate() {
            for (c, slot) in row.iter_mut().enumerate() {
                let mut acc = zero;
                for (j, mrj) in m[r].iter().enumerate() {
                    acc += mrj * mk[j][c];
                }
                *slot = acc;
            }
            row[r] += coeffs[n - k + 1];
        }
        mk = next;
        let mut tr = zero;
        for (r, row) in m.iter().enumerate() {
            for (j, mrj) in row.iter().enumerate() {
                tr += mrj * mk[j][r];
            }
        }
        coeffs[n - k] = -tr / k as f64;
    }
    coeffs
}

/// Rational diagonal as an operator matrix.
pub fn rational_diagonal(diag: &[Rational], dim: usize) -> Result<OpMatrix> {
    OpMatrix::diagonal(diag.iter().map(|v| ShiftPoly::constant(dim, v.clone())).collect())
}
