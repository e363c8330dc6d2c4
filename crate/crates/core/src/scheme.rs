//! Lattice Boltzmann schemes in moment space.
//!
//! A scheme is fixed by an invertible moment matrix `M`, integer lattice
//! velocities `c_j`, relaxation rates `S` and (optionally) a linear
//! equilibrium map. Streaming in moment space is `T = M diag(T[c_j]) M^-1`,
//! and one time step reads `m' = A m + B m_eq` with `A = T (I - S)` and
//! `B = T S`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::opmatrix::{rational_diagonal, OpMatrix};
use crate::rational::{QMatrix, Rational};
use crate::shiftring::{PeriodicGrid, ShiftPoly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbsSpec {
    q: usize,
    d: usize,
    n_conserved: usize,
    moments: QMatrix,
    velocities: Vec<Vec<i64>>,
    relaxation: Vec<Rational>,
    equilibria: Option<QMatrix>,
}

impl LbsSpec {
    pub fn new(
        moments: QMatrix,
        velocities: Vec<Vec<i64>>,
        relaxation: Vec<Rational>,
        n_conserved: usize,
        equilibria: Option<QMatrix>,
    ) -> Result<Self> {
        let q = moments.rows();
        if !moments.is_square() {
            return Err(Error::InvalidSpec(format!(
                "moment matrix must be square, got {}x{}",
                moments.rows(),
                moments.cols()
            )));
        }
        if n_conserved < 1 || n_conserved >= q {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= N < q, got N = {n_conserved}, q = {q}"
            )));
        }
        if velocities.len() != q {
            return Err(Error::InvalidSpec(format!(
                "expected {q} velocities, got {}",
                velocities.len()
            )));
        }
        let d = velocities[0].len();
        if d == 0 {
            return Err(Error::InvalidSpec("velocities must have at least one component".into()));
        }
        if let Some(v) = velocities.iter().find(|v| v.len() != d) {
            return Err(Error::InvalidSpec(format!(
                "velocity {v:?} does not have dimension {d}"
            )));
        }
        if relaxation.len() != q {
            return Err(Error::InvalidSpec(format!(
                "expected {q} relaxation rates, got {}",
                relaxation.len()
            )));
        }
        validate_relaxation(&relaxation, n_conserved)?;
        if moments.determinant()?.is_zero() {
            return Err(Error::SingularMatrix);
        }
        if let Some(eq) = &equilibria {
            validate_equilibria(eq, q, n_conserved)?;
        }
        Ok(LbsSpec {
            q,
            d,
            n_conserved,
            moments,
            velocities,
            relaxation,
            equilibria,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_conserved(&self) -> usize {
        self.n_conserved
    }

    pub fn moments(&self) -> &QMatrix {
        &self.moments
    }

    pub fn velocities(&self) -> &[Vec<i64>] {
        &self.velocities
    }

    pub fn relaxation(&self) -> &[Rational] {
        &self.relaxation
    }

    pub fn equilibria(&self) -> Option<&QMatrix> {
        self.equilibria.as_ref()
    }

    pub fn transport(&self) -> OpMatrix {
        transport_matrix(&self.moments, &self.velocities).expect("validated spec has an invertible moment matrix")
    }

    /// `(A, B) = (T (I - S), T S)`.
    pub fn collision_matrices(&self) -> (OpMatrix, OpMatrix) {
        collision_from_transport(&self.transport(), &self.relaxation).expect("validated spec has matching sizes")
    }

    /// One-step closed update `E = A + B E_eq P`, where `P` picks the
    /// conserved moments.
    pub fn closure(&self) -> Result<OpMatrix> {
        self.operators()?.closure()
    }

    pub fn operators(&self) -> Result<LbsOperators> {
        let eq = self.equilibria.clone().ok_or(Error::MissingEquilibria)?;
        let (a, b) = self.collision_matrices();
        LbsOperators::new(a, b, self.n_conserved, eq)
    }
}

fn validate_relaxation(relaxation: &[Rational], n_conserved: usize) -> Result<()> {
    let two = Rational::from_integer(2.into());
    for (i, s) in relaxation.iter().enumerate() {
        if i < n_conserved {
            if !s.is_zero() {
                return Err(Error::InvalidSpec(format!(
                    "relaxation rate {} of conserved moment must be 0, got {s}",
                    i + 1
                )));
            }
        } else if *s <= Rational::zero() || *s > two {
            return Err(Error::InvalidSpec(format!(
                "relaxation rate {} must lie in (0, 2], got {s}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Rows `1..N` of the equilibrium map must reproduce the conserved moments.
pub fn validate_equilibria(eq: &QMatrix, q: usize, n_conserved: usize) -> Result<()> {
    if eq.rows() != q || eq.cols() != n_conserved {
        return Err(Error::NonConformingEquilibria(format!(
            "expected a {q}x{n_conserved} map, got {}x{}",
            eq.rows(),
            eq.cols()
        )));
    }
    for i in 0..n_conserved {
        for j in 0..n_conserved {
            let want = if i == j { Rational::one() } else { Rational::zero() };
            if *eq.get(i, j) != want {
                return Err(Error::NonConformingEquilibria(format!(
                    "row {} must be the unit vector e_{}",
                    i + 1,
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// `M diag(T[c_1], ..., T[c_q]) M^-1` with the inverse computed exactly.
pub fn transport_matrix(moments: &QMatrix, velocities: &[Vec<i64>]) -> Result<OpMatrix> {
    let q = moments.rows();
    if velocities.len() != q {
        return Err(Error::SizeMismatch {
            expected: q,
            found: velocities.len(),
        });
    }
    let inv = moments.inverse()?;
    let dim = velocities.first().map_or(1, Vec::len);
    let mut rows = Vec::with_capacity(q);
    for r in 0..q {
        let mut row = Vec::with_capacity(q);
        for c in 0..q {
            let terms = (0..q).map(|j| (velocities[j].clone(), moments.get(r, j) * inv.get(j, c)));
            row.push(ShiftPoly::from_terms(dim, terms)?);
        }
        rows.push(row);
    }
    OpMatrix::from_rows(rows)
}

/// `(T (I - S), T S)` for a rational relaxation diagonal.
pub fn collision_from_transport(t: &OpMatrix, relaxation: &[Rational]) -> Result<(OpMatrix, OpMatrix)> {
    if relaxation.len() != t.size() {
        return Err(Error::SizeMismatch {
            expected: t.size(),
            found: relaxation.len(),
        });
    }
    let s = rational_diagonal(relaxation, t.dim())?;
    let keep: Vec<Rational> = relaxation.iter().map(|v| Rational::one() - v).collect();
    let i_minus_s = rational_diagonal(&keep, t.dim())?;
    Ok((t.mul(&i_minus_s)?, t.mul(&s)?))
}

/// The linear operators of one LBS time step together with its linear
/// equilibrium map. Built from a spec or directly from `(A, B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LbsOperators {
    a: OpMatrix,
    b: OpMatrix,
    n_conserved: usize,
    equilibria: QMatrix,
}

impl LbsOperators {
    pub fn new(a: OpMatrix, b: OpMatrix, n_conserved: usize, equilibria: QMatrix) -> Result<Self> {
        if a.size() != b.size() {
            return Err(Error::SizeMismatch {
                expected: a.size(),
                found: b.size(),
            });
        }
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        if n_conserved < 1 || n_conserved >= a.size() {
            return Err(Error::InvalidSpec(format!(
                "need 1 <= N < q, got N = {n_conserved}, q = {}",
                a.size()
            )));
        }
        validate_equilibria(&equilibria, a.size(), n_conserved)?;
        Ok(LbsOperators {
            a,
            b,
            n_conserved,
            equilibria,
        })
    }

    /// Operators of a scheme given only by its transport matrix and
    /// relaxation rates.
    pub fn from_transport(
        t: &OpMatrix,
        relaxation: &[Rational],
        n_conserved: usize,
        equilibria: QMatrix,
    ) -> Result<Self> {
        let (a, b) = collision_from_transport(t, relaxation)?;
        Self::new(a, b, n_conserved, equilibria)
    }

    pub fn a(&self) -> &OpMatrix {
        &self.a
    }

    pub fn b(&self) -> &OpMatrix {
        &self.b
    }

    pub fn q(&self) -> usize {
        self.a.size()
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn n_conserved(&self) -> usize {
        self.n_conserved
    }

    pub fn equilibria(&self) -> &QMatrix {
        &self.equilibria
    }

    pub fn closure(&self) -> Result<OpMatrix> {
        let q = self.q();
        let dim = self.dim();
        let mut e = self.a.clone();
        for j in 0..self.n_conserved {
            for r in 0..q {
                let mut acc = e.get(r, j).clone();
                for k in 0..q {
                    let w = self.equilibria.get(k, j);
                    if w.is_zero() {
                        continue;
                    }
                    acc = &acc + &self.b.get(r, k).scale(w);
                }
                e.set(r, j, acc)?;
            }
        }
        debug_assert_eq!(e.dim(), dim);
        Ok(e)
    }

    /// Equilibrium moments `E_eq (m_1, ..., m_N)` of a state.
    pub fn equilibrium_state(&self, conserved: &[PeriodicGrid]) -> Result<MomentState> {
        if conserved.len() != self.n_conserved {
            return Err(Error::SizeMismatch {
                expected: self.n_conserved,
                found: conserved.len(),
            });
        }
        let template = &conserved[0];
        let mut moments = Vec::with_capacity(self.q());
        for r in 0..self.q() {
            let mut acc = PeriodicGrid::zeros(template.dim(), template.size());
            for (j, field) in conserved.iter().enumerate() {
                let w = self.equilibria.get(r, j);
                if !w.is_zero() {
                    acc = acc.add(&field.scale(w))?;
                }
            }
            moments.push(acc);
        }
        MomentState::new(moments)
    }

    /// `m' = A m + B m_eq(m)` applied node by node.
    pub fn step(&self, state: &MomentState) -> Result<MomentState> {
        if state.q() != self.q() {
            return Err(Error::SizeMismatch {
                expected: self.q(),
                found: state.q(),
            });
        }
        let eq = self.equilibrium_state(&state.moments[..self.n_conserved])?;
        let template = &state.moments[0];
        let mut out = Vec::with_capacity(self.q());
        for r in 0..self.q() {
            let mut acc = PeriodicGrid::zeros(template.dim(), template.size());
            for k in 0..self.q() {
                let a = self.a.get(r, k);
                if !a.is_zero() {
                    acc = acc.add(&a.apply(&state.moments[k])?)?;
                }
                let b = self.b.get(r, k);
                if !b.is_zero() {
                    acc = acc.add(&b.apply(&eq.moments[k])?)?;
                }
            }
            out.push(acc);
        }
        MomentState::new(out)
    }
}

/// Moment vector on every node of a periodic lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentState {
    moments: Vec<PeriodicGrid>,
}

impl MomentState {
    pub fn new(moments: Vec<PeriodicGrid>) -> Result<Self> {
        let first = moments
            .first()
            .ok_or_else(|| Error::InvalidSpec("moment state needs at least one moment".into()))?;
        let (dim, size) = (first.dim(), first.size());
        if let Some(bad) = moments.iter().find(|m| m.dim() != dim || m.size() != size) {
            return Err(Error::SizeMismatch {
                expected: size,
                found: bad.size(),
            });
        }
        Ok(MomentState { moments })
    }

    pub fn q(&self) -> usize {
        self.moments.len()
    }

    pub fn size(&self) -> usize {
        self.moments[0].size()
    }

    pub fn moment(&self, k: usize) -> &PeriodicGrid {
        &self.moments[k]
    }

    pub fn moments(&self) -> &[PeriodicGrid] {
        &self.moments
    }

    pub fn translate(&self, z: &[i64]) -> MomentState {
        MomentState {
            moments: self.moments.iter().map(|m| m.translate(z)).collect(),
        }
    }
}
