//! Exact periodic simulation used to cross-check derived recurrences.

use std::io::Write;

use num_traits::{Signed, Zero};

use crate::derive::ClosedFds;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scheme::{LbsOperators, LbsSpec, MomentState};
use crate::shiftring::PeriodicGrid;
use crate::wire::fingerprint_text;

pub const DEFAULT_LATTICE_SIZE: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    levels: Vec<MomentState>,
    n_conserved: usize,
    source: String,
}

impl Trajectory {
    pub fn levels(&self) -> &[MomentState] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &MomentState {
        &self.levels[n]
    }

    pub fn steps(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn size(&self) -> usize {
        self.levels[0].size()
    }

    pub fn n_conserved(&self) -> usize {
        self.n_conserved
    }

    /// Fingerprint of the operators that produced the trajectory.
    pub fn source_fingerprint(&self) -> &str {
        &self.source
    }

    pub fn conserved(&self, n: usize) -> Vec<PeriodicGrid> {
        self.levels[n].moments()[..self.n_conserved].to_vec()
    }

    /// `level,node,moment,value` rows with 1-based moment indices.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Parse(format!("csv output failed: {e}"));
        w.write_record(["level", "node", "moment", "value"]).map_err(io)?;
        for (level, state) in self.levels.iter().enumerate() {
            for node in 0..state.moment(0).nodes() {
                for (k, m) in state.moments().iter().enumerate() {
                    w.write_record([
                        level.to_string(),
                        node.to_string(),
                        (k + 1).to_string(),
                        m.values()[node].to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        w.flush().map_err(|e| Error::Parse(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

fn operators_fingerprint(ops: &LbsOperators) -> String {
    let text = format!("{}\n--\n{}\n--\n{}", ops.a(), ops.b(), ops.equilibria());
    fingerprint_text(&text)
}

/// Runs the scheme from equilibrium initial data built from the given
/// conserved fields.
pub fn run_lbs(spec: &LbsSpec, conserved: &[PeriodicGrid], steps: usize) -> Result<Trajectory> {
    let ops = spec.operators()?;
    let min_steps = spec.q() - spec.n_conserved() + 1;
    if steps < min_steps {
        return Err(Error::InvalidSpec(format!(
            "need at least {min_steps} steps to exercise the recurrence, got {steps}"
        )));
    }
    run_operators(&ops, conserved, steps)
}

/// Equilibrium initialization: non-conserved moments start at `m_eq`.
pub fn run_operators(ops: &LbsOperators, conserved: &[PeriodicGrid], steps: usize) -> Result<Trajectory> {
    check_lattice(ops, conserved.first())?;
    let init = ops.equilibrium_state(conserved)?;
    run_from_state(ops, init, steps)
}

/// Runs from an arbitrary initial moment state.
pub fn run_from_state(ops: &LbsOperators, init: MomentState, steps: usize) -> Result<Trajectory> {
    if init.q() != ops.q() {
        return Err(Error::SizeMismatch {
            expected: ops.q(),
            found: init.q(),
        });
    }
    check_lattice(ops, init.moments().first())?;
    let mut levels = Vec::with_capacity(steps + 1);
    levels.push(init);
    for n in 0..steps {
        let next = ops.step(&levels[n])?;
        levels.push(next);
    }
    Ok(Trajectory {
        levels,
        n_conserved: ops.n_conserved(),
        source: operators_fingerprint(ops),
    })
}

fn check_lattice(ops: &LbsOperators, field: Option<&PeriodicGrid>) -> Result<()> {
    let field = field.ok_or_else(|| Error::InvalidSpec("no initial fields".into()))?;
    if field.dim() != ops.dim() {
        return Err(Error::DimensionMismatch {
            left: ops.dim(),
            right: field.dim(),
        });
    }
    let reach = ops
        .a()
        .rows()
        .chain(ops.b().rows())
        .flatten()
        .map(|p| p.reach())
        .max()
        .unwrap_or(0);
    if (field.size() as u64) < reach {
        return Err(Error::InvalidSpec(format!(
            "lattice size {} is below the stencil reach {reach}",
            field.size()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceReport {
    /// Largest `|m^{n+1} - predicted|` over all checked levels and nodes.
    pub max_residual: Rational,
    /// `(level, node)` of the first nonzero residual.
    pub first_violation: Option<(usize, usize)>,
    pub levels_checked: usize,
}

impl RecurrenceReport {
    pub fn exact(&self) -> bool {
        self.max_residual.is_zero()
    }
}

/// Checks `m_i^{n+1} = F(m^n, ..., m^{n-depth+1})` for every level where
/// the history is available.
pub fn check_recurrence(traj: &Trajectory, f: &ClosedFds) -> Result<RecurrenceReport> {
    let depth = f.depth();
    if traj.levels.len() < depth + 1 {
        return Err(Error::InsufficientHistory {
            needed: depth + 1,
            got: traj.levels.len(),
        });
    }
    if f.n_conserved() != traj.n_conserved {
        return Err(Error::Incomparable(format!(
            "recurrence over {} conserved moments, trajectory has {}",
            f.n_conserved(),
            traj.n_conserved
        )));
    }
    let mut max_residual = Rational::zero();
    let mut first_violation = None;
    let mut levels_checked = 0;
    for n in depth - 1..traj.levels.len() - 1 {
        let history: Vec<Vec<PeriodicGrid>> = (0..depth).map(|lag| traj.conserved(n - lag)).collect();
        let predicted = f.apply(&history)?;
        let actual = traj.levels[n + 1].moment(f.moment());
        for (node, (a, p)) in actual.values().iter().zip(predicted.values()).enumerate() {
            let r = (a - p).abs();
            if !r.is_zero() && first_violation.is_none() {
                first_violation = Some((n + 1, node));
            }
            if r > max_residual {
                max_residual = r;
            }
        }
        levels_checked += 1;
    }
    Ok(RecurrenceReport {
        max_residual,
        first_violation,
        levels_checked,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDifference {
    pub level: usize,
    /// Largest absolute difference over conserved moments and nodes.
    pub max_abs_diff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConservedComparison {
    pub levels: Vec<LevelDifference>,
    pub first_divergence: Option<usize>,
}

impl ConservedComparison {
    pub fn identical(&self) -> bool {
        self.first_divergence.is_none()
    }
}

/// Level-by-level comparison of the conserved moments of two runs.
pub fn compare_conserved(a: &Trajectory, b: &Trajectory) -> Result<ConservedComparison> {
    if a.size() != b.size() || a.n_conserved != b.n_conserved || a.levels.len() != b.levels.len() {
        return Err(Error::Incomparable(format!(
            "trajectories of shape (L={}, N={}, levels={}) and (L={}, N={}, levels={})",
            a.size(),
            a.n_conserved,
            a.levels.len(),
            b.size(),
            b.n_conserved,
            b.levels.len()
        )));
    }
    if a.conserved(0) != b.conserved(0) {
        return Err(Error::Incomparable("initial conserved fields differ".into()));
    }
    let mut levels = Vec::with_capacity(a.levels.len());
    let mut first_divergence = None;
    for n in 0..a.levels.len() {
        let mut max_abs_diff = Rational::zero();
        for (fa, fb) in a.conserved(n).iter().zip(&b.conserved(n)) {
            for (x, y) in fa.values().iter().zip(fb.values()) {
                let d = (x - y).abs();
                if d > max_abs_diff {
                    max_abs_diff = d;
                }
            }
        }
        if !max_abs_diff.is_zero() && first_divergence.is_none() {
            first_divergence = Some(n);
        }
        levels.push(LevelDifference { level: n, max_abs_diff });
    }
    Ok(ConservedComparison {
        levels,
        first_divergence,
    })
}

/// Whether the spatial sum of every conserved moment is the same at every
/// level.
pub fn conserved_sums_invariant(traj: &Trajectory) -> bool {
    let initial: Vec<Rational> = traj.conserved(0).iter().map(PeriodicGrid::sum).collect();
    (1..traj.levels.len()).all(|n| {
        traj.conserved(n)
            .iter()
            .map(PeriodicGrid::sum)
            .eq(initial.iter().cloned())
    })
}
