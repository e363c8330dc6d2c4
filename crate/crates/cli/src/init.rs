//! Initial states for `simulate`.

use std::path::Path;

use lbsfd_core::rational::{int, parse_rational};
use lbsfd_core::scheme::MomentState;
use lbsfd_core::shiftring::PeriodicGrid;
use lbsfd_core::Error;
use serde::Deserialize;

use crate::commands::Failure;
use crate::InitKind;

/// Exactly one of the two keys must be present. Each field lists the
/// `L^d` node values in row-major order as rational strings.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitFile {
    /// One field per conserved moment; the rest start at equilibrium.
    #[serde(default)]
    pub conserved: Option<Vec<Vec<String>>>,
    /// All `q` moments, bypassing equilibrium initialization.
    #[serde(default)]
    pub moments: Option<Vec<Vec<String>>>,
}

#[derive(Debug)]
pub enum Initial {
    Conserved(Vec<PeriodicGrid>),
    Full(MomentState),
}

fn fields(rows: &[Vec<String>], dim: usize, size: usize) -> Result<Vec<PeriodicGrid>, Failure> {
    rows.iter()
        .enumerate()
        .map(|(k, row)| {
            let values = row
                .iter()
                .map(|v| parse_rational(v))
                .collect::<lbsfd_core::Result<Vec<_>>>()
                .map_err(|e| Failure::usage(format!("init field {}: {e}", k + 1)))?;
            PeriodicGrid::from_values(dim, size, values)
                .map_err(|e| Failure::usage(format!("init field {}: {e}", k + 1)))
        })
        .collect()
}

pub fn from_file(path: &Path, q: usize, n: usize, dim: usize, size: usize) -> Result<Initial, Failure> {
    let text = crate::commands::read(path)?;
    let file: InitFile =
        serde_json::from_str(&text).map_err(|e| Failure::from(Error::Parse(format!("{}: {e}", path.display()))))?;
    match (file.conserved, file.moments) {
        (Some(rows), None) => {
            if rows.len() != n {
                return Err(Failure::usage(format!(
                    "init file has {} conserved fields, scheme has N = {n}",
                    rows.len()
                )));
            }
            Ok(Initial::Conserved(fields(&rows, dim, size)?))
        }
        (None, Some(rows)) => {
            if rows.len() != q {
                return Err(Failure::usage(format!(
                    "init file has {} moments, scheme has q = {q}",
                    rows.len()
                )));
            }
            Ok(Initial::Full(MomentState::new(fields(&rows, dim, size)?)?))
        }
        _ => Err(Failure::usage(
            "init file needs exactly one of \"conserved\" or \"moments\"",
        )),
    }
}

pub fn build(
    kind: InitKind,
    file: Option<&Path>,
    q: usize,
    n: usize,
    dim: usize,
    size: usize,
) -> Result<Initial, Failure> {
    match kind {
        InitKind::Delta => {
            let mut out = vec![PeriodicGrid::delta(dim, size, 0)];
            out.extend((1..n).map(|_| PeriodicGrid::zeros(dim, size)));
            Ok(Initial::Conserved(out))
        }
        InitKind::Constant => Ok(Initial::Conserved(
            (0..n).map(|_| PeriodicGrid::constant(dim, size, int(1))).collect(),
        )),
        InitKind::File => {
            let path = file.ok_or_else(|| Failure::usage("--init file requires --init-file"))?;
            from_file(path, q, n, dim, size)
        }
    }
}
