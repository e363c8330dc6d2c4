//! Multi-step finite difference schemes on conserved moments.
//!
//! For a conserved moment `i`, split `A = A_i + A_i'` where `A_i` keeps the
//! rows and columns of `{i} ∪ {N+1..q}`. With `chi_{A_i} = X^{N-1} sum_k
//! gamma_k X^k` and `D = q + 1 - N`, every LBS trajectory satisfies
//!
//! ```text
//! m_i^{n+1} = - sum_{k<D} gamma_k m_i^{n-D+1+k}
//!             + sum_{k<D} ( P_k A_i' m^{n-k} )_i
//!             + sum_{k<D} ( P_k B m_eq^{n-k} )_i,
//! P_k = sum_{l<=k} gamma_{D+l-k} A_i^l.
//! ```
//!
//! [`Fds`] stores exactly these pieces in canonical form; [`ClosedFds`] folds
//! a linear equilibrium map into one operator per lag and conserved moment.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::opmatrix::OpMatrix;
use crate::rational::QMatrix;
use crate::scheme::{validate_equilibria, LbsSpec};
use crate::shiftring::{PeriodicGrid, ShiftPoly};

/// Which index set isolates the conserved moment in `A`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Splitting {
    /// `{i} ∪ {N+1..q}`.
    #[default]
    Canonical,
    /// Any 0-based index set containing `i`.
    Custom(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fds {
    pub(crate) q: usize,
    pub(crate) n_conserved: usize,
    pub(crate) moment: usize,
    pub(crate) dim: usize,
    pub(crate) gamma: Vec<ShiftPoly>,
    pub(crate) homogeneous: Vec<ShiftPoly>,
    pub(crate) cross: Vec<Vec<ShiftPoly>>,
    pub(crate) source: Vec<Vec<ShiftPoly>>,
}

impl Fds {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_conserved(&self) -> usize {
        self.n_conserved
    }

    /// 0-based index of the moment this scheme advances.
    pub fn moment(&self) -> usize {
        self.moment
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of time levels the recurrence reads.
    pub fn depth(&self) -> usize {
        self.homogeneous.len()
    }

    /// `gamma_0 .. gamma_D`, top coefficient equal to one.
    pub fn gamma(&self) -> &[ShiftPoly] {
        &self.gamma
    }

    /// `homogeneous()[lag]` multiplies `m_i^{n-lag}`.
    pub fn homogeneous(&self) -> &[ShiftPoly] {
        &self.homogeneous
    }

    /// `cross()[lag]` is a row applied to `m^{n-lag}`; empty when the
    /// splitting complement contributes nothing.
    pub fn cross(&self) -> &[Vec<ShiftPoly>] {
        &self.cross
    }

    /// `source()[lag]` is a row applied to `m_eq^{n-lag}`.
    pub fn source(&self) -> &[Vec<ShiftPoly>] {
        &self.source
    }

    pub(crate) fn from_parts(
        q: usize,
        n_conserved: usize,
        moment: usize,
        dim: usize,
        gamma: Vec<ShiftPoly>,
        cross: Vec<Vec<ShiftPoly>>,
        source: Vec<Vec<ShiftPoly>>,
    ) -> Result<Self> {
        let depth = gamma
            .len()
            .checked_sub(1)
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::InvalidSpec("gamma needs at least two coefficients".into()))?;
        if !gamma[depth].is_one() {
            return Err(Error::InvalidSpec("top gamma coefficient must be one".into()));
        }
        if source.len() != depth || (!cross.is_empty() && cross.len() != depth) {
            return Err(Error::InvalidSpec(format!(
                "expected {depth} lags for source and cross rows"
            )));
        }
        let rows_ok = source.iter().chain(&cross).all(|r| r.len() == q);
        if !rows_ok {
            return Err(Error::InvalidSpec(format!("operator rows must have length {q}")));
        }
        let all: Vec<&ShiftPoly> = gamma.iter().chain(source.iter().chain(&cross).flatten()).collect();
        if let Some(bad) = all.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        if moment >= n_conserved || n_conserved >= q {
            return Err(Error::MomentOutOfRange {
                moment: moment + 1,
                conserved: n_conserved,
            });
        }
        let cross = if cross.iter().flatten().all(ShiftPoly::is_zero) {
            Vec::new()
        } else {
            cross
        };
        let homogeneous = (0..depth).map(|lag| -&gamma[depth - 1 - lag]).collect();
        Ok(Fds {
            q,
            n_conserved,
            moment,
            dim,
            gamma,
            homogeneous,
            cross,
            source,
        })
    }
}

/// Derives the FDS of conserved moment `moment` (0-based) from a spec.
pub fn fds_from_lbs(spec: &LbsSpec, moment: usize) -> Result<Fds> {
    let (a, b) = spec.collision_matrices();
    fds_from_matrices(&a, &b, spec.n_conserved(), moment, &Splitting::Canonical)
}

/// Derives the FDS directly from the collision matrices `A` and `B`.
pub fn fds_from_matrices(
    a: &OpMatrix,
    b: &OpMatrix,
    n_conserved: usize,
    moment: usize,
    splitting: &Splitting,
) -> Result<Fds> {
    let q = a.size();
    if b.size() != q {
        return Err(Error::SizeMismatch {
            expected: q,
            found: b.size(),
        });
    }
    if n_conserved == 0 || n_conserved >= q {
        return Err(Error::InvalidSpec(format!(
            "need 1 <= N < q, got N = {n_conserved}, q = {q}"
        )));
    }
    if moment >= n_conserved {
        return Err(Error::MomentOutOfRange {
            moment: moment + 1,
            conserved: n_conserved,
        });
    }
    let keep: Vec<usize> = match splitting {
        Splitting::Canonical => std::iter::once(moment).chain(n_conserved..q).collect(),
        Splitting::Custom(set) => {
            if !set.contains(&moment) {
                return Err(Error::InvalidSpec(format!(
                    "splitting set must contain moment {}",
                    moment + 1
                )));
            }
            let mut set = set.clone();
            set.sort_unstable();
            set.dedup();
            set
        }
    };
    let a_i = a.restrict(&keep)?;
    let a_rest = a.sub(&a_i)?;
    let chi = a_i.charpoly();
    let depth = keep.len();
    let offset = q - depth;
    if let Some(k) = (0..offset).find(|&k| !chi.coeff(k).is_zero()) {
        return Err(Error::InvalidSpec(format!(
            "characteristic polynomial of the restricted matrix has a nonzero X^{k} coefficient"
        )));
    }
    let gamma: Vec<ShiftPoly> = chi.coeffs()[offset..].to_vec();

    let powers = a_i.powers(depth - 1);
    let mut source = Vec::with_capacity(depth);
    let mut cross = Vec::with_capacity(depth);
    for lag in 0..depth {
        // row `moment` of P_lag
        let mut row = vec![ShiftPoly::zero(a.dim()); q];
        for l in 0..=lag {
            let g = &gamma[depth + l - lag];
            for (c, slot) in row.iter_mut().enumerate() {
                let p = powers[l].get(moment, c);
                if !p.is_zero() {
                    *slot = &*slot + &(g * p);
                }
            }
        }
        source.push(b.left_apply(&row)?);
        cross.push(a_rest.left_apply(&row)?);
    }
    Fds::from_parts(q, n_conserved, moment, a.dim(), gamma, cross, source)
}

/// Component of an [`Fds`] used to report differences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FdsComponent {
    Gamma(usize),
    Homogeneous(usize),
    Cross { lag: usize, column: usize },
    Source { lag: usize, column: usize },
}

impl fmt::Display for FdsComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FdsComponent::Gamma(k) => write!(f, "gamma_{k}"),
            FdsComponent::Homogeneous(lag) => write!(f, "homogeneous[lag {lag}]"),
            FdsComponent::Cross { lag, column } => {
                write!(f, "cross[lag {lag}][moment {}]", column + 1)
            }
            FdsComponent::Source { lag, column } => {
                write!(f, "source[lag {lag}][moment {}]", column + 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FdsComparison {
    pub equal: bool,
    /// Every differing component, gammas first then lags ascending.
    pub differences: Vec<FdsComponent>,
}

impl FdsComparison {
    pub fn first(&self) -> Option<&FdsComponent> {
        self.differences.first()
    }
}

/// Structural equality of two derived schemes.
pub fn fds_equal(f1: &Fds, f2: &Fds) -> Result<FdsComparison> {
    if f1.q != f2.q || f1.n_conserved != f2.n_conserved || f1.moment != f2.moment {
        return Err(Error::Incomparable(format!(
            "(q, N, i) = ({}, {}, {}) vs ({}, {}, {})",
            f1.q,
            f1.n_conserved,
            f1.moment + 1,
            f2.q,
            f2.n_conserved,
            f2.moment + 1
        )));
    }
    if f1.dim != f2.dim {
        return Err(Error::DimensionMismatch {
            left: f1.dim,
            right: f2.dim,
        });
    }
    let mut differences = Vec::new();
    for (k, (a, b)) in f1.gamma.iter().zip(&f2.gamma).enumerate() {
        if a != b {
            differences.push(FdsComponent::Gamma(k));
        }
    }
    for (lag, (a, b)) in f1.homogeneous.iter().zip(&f2.homogeneous).enumerate() {
        if a != b {
            differences.push(FdsComponent::Homogeneous(lag));
        }
    }
    let zero_rows = vec![vec![ShiftPoly::zero(f1.dim); f1.q]; f1.depth()];
    let cross1 = if f1.cross.is_empty() { &zero_rows } else { &f1.cross };
    let cross2 = if f2.cross.is_empty() { &zero_rows } else { &f2.cross };
    for (lag, (r1, r2)) in cross1.iter().zip(cross2).enumerate() {
        for (column, (a, b)) in r1.iter().zip(r2).enumerate() {
            if a != b {
                differences.push(FdsComponent::Cross { lag, column });
            }
        }
    }
    for (lag, (r1, r2)) in f1.source.iter().zip(&f2.source).enumerate() {
        for (column, (a, b)) in r1.iter().zip(r2).enumerate() {
            if a != b {
                differences.push(FdsComponent::Source { lag, column });
            }
        }
    }
    Ok(FdsComparison {
        equal: differences.is_empty(),
        differences,
    })
}

/// A recurrence acting on conserved moments only:
/// `m_i^{n+1} = sum_lag sum_j coeffs[lag][j] m_j^{n-lag}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosedFds {
    pub(crate) moment: usize,
    pub(crate) n_conserved: usize,
    pub(crate) dim: usize,
    pub(crate) coeffs: Vec<Vec<ShiftPoly>>,
}

impl ClosedFds {
    pub fn new(moment: usize, dim: usize, coeffs: Vec<Vec<ShiftPoly>>) -> Result<Self> {
        let n_conserved = coeffs.first().map_or(0, Vec::len);
        if coeffs.is_empty() || n_conserved == 0 {
            return Err(Error::InvalidSpec("closed recurrence needs at least one lag".into()));
        }
        if moment >= n_conserved {
            return Err(Error::MomentOutOfRange {
                moment: moment + 1,
                conserved: n_conserved,
            });
        }
        for row in &coeffs {
            if row.len() != n_conserved {
                return Err(Error::SizeMismatch {
                    expected: n_conserved,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|p| p.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: bad.dim(),
                });
            }
        }
        Ok(ClosedFds {
            moment,
            n_conserved,
            dim,
            coeffs,
        })
    }

    pub fn moment(&self) -> usize {
        self.moment
    }

    pub fn n_conserved(&self) -> usize {
        self.n_conserved
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }

    /// `coeffs()[lag][j]` multiplies `m_j^{n-lag}`.
    pub fn coeffs(&self) -> &[Vec<ShiftPoly>] {
        &self.coeffs
    }

    /// Advances one level. `history[lag][j]` holds conserved moment `j` at
    /// level `n - lag`; only the first `depth()` entries are read.
    pub fn apply(&self, history: &[Vec<PeriodicGrid>]) -> Result<PeriodicGrid> {
        if history.len() < self.depth() {
            return Err(Error::InsufficientHistory {
                needed: self.depth(),
                got: history.len(),
            });
        }
        let template = history[0]
            .first()
            .ok_or_else(|| Error::InvalidSpec("empty history level".into()))?;
        let mut out = PeriodicGrid::zeros(template.dim(), template.size());
        for (row, level) in self.coeffs.iter().zip(history) {
            if level.len() != self.n_conserved {
                return Err(Error::SizeMismatch {
                    expected: self.n_conserved,
                    found: level.len(),
                });
            }
            for (op, field) in row.iter().zip(level) {
                if !op.is_zero() {
                    out = out.add(&op.apply(field)?)?;
                }
            }
        }
        Ok(out)
    }
}

/// Substitutes `m_eq = E_eq (m_1..m_N)` into a derived scheme.
pub fn fds_close(f: &Fds, equilibria: &QMatrix) -> Result<ClosedFds> {
    validate_equilibria(equilibria, f.q, f.n_conserved)?;
    let n = f.n_conserved;
    let mut coeffs = Vec::with_capacity(f.depth());
    for lag in 0..f.depth() {
        let mut row = vec![ShiftPoly::zero(f.dim); n];
        row[f.moment] = f.homogeneous[lag].clone();
        if let Some(cross) = f.cross.get(lag) {
            if let Some(c) = (n..f.q).find(|&c| !cross[c].is_zero()) {
                return Err(Error::InvalidSpec(format!(
                    "cross term reaches non-conserved moment {}",
                    c + 1
                )));
            }
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = &*slot + &cross[j];
            }
        }
        for (a, op) in f.source[lag].iter().enumerate() {
            if op.is_zero() {
                continue;
            }
            for (j, slot) in row.iter_mut().enumerate() {
                let w = equilibria.get(a, j);
                if !w.is_zero() {
                    *slot = &*slot + &op.scale(w);
                }
            }
        }
        coeffs.push(row);
    }
    ClosedFds::new(f.moment, f.dim, coeffs)
}

/// `fds_apply`: one step of a closed recurrence.
pub fn fds_apply(f: &ClosedFds, history: &[Vec<PeriodicGrid>]) -> Result<PeriodicGrid> {
    f.apply(history)
}
