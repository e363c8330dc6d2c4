use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lbsfd_core::derive::{fds_close, fds_from_lbs};
use lbsfd_core::equiv::{
    check_closed, check_direct, check_nontrivial, check_trivial, d1q2_family, d1q2_family_with_eps_tilde,
    quarter_rate_grid, symbol_cross_check, uniform_thetas, FamilyParams, FamilyVerdict,
};
use lbsfd_core::lattice::{check_recurrence, run_from_state, run_lbs, RecurrenceReport, Trajectory};
use lbsfd_core::rational::Rational;
use lbsfd_core::scheme::LbsSpec;
use lbsfd_core::wire::{FdsDocument, InputFile, SchemeFile};
use lbsfd_core::Error;
use serde::Serialize;

use crate::init::{self, Initial};
use crate::{InitKind, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DEGENERATE: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Degenerate(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Degenerate(_) => EXIT_DEGENERATE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Degenerate(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateParameter(_) => Failure::Degenerate(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::usage(format!("output failed: {e}"))
}

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_scheme(path: &Path) -> Result<(SchemeFile, LbsSpec), Failure> {
    let text = read(path)?;
    let file = SchemeFile::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let spec = file
        .to_spec()
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok((file, spec))
}

fn moment_index(moment: usize, spec: &LbsSpec) -> Result<usize, Failure> {
    if moment == 0 || moment > spec.n_conserved() {
        return Err(Failure::usage(format!(
            "--moment must lie in 1..={}, got {moment}",
            spec.n_conserved()
        )));
    }
    Ok(moment - 1)
}

pub fn derive(path: &Path, moment: usize, out: &mut dyn Write) -> Result<u8, Failure> {
    let (file, spec) = load_scheme(path)?;
    let doc = derive_document(&file, &spec, moment)?;
    writeln!(out, "{}", doc.to_json()).map_err(io_failure)?;
    Ok(EXIT_OK)
}

pub fn derive_document(file: &SchemeFile, spec: &LbsSpec, moment: usize) -> Result<FdsDocument, Failure> {
    let i = moment_index(moment, spec)?;
    let fds = fds_from_lbs(spec, i)?;
    let closed = spec.equilibria().map(|eq| fds_close(&fds, eq)).transpose()?;
    Ok(FdsDocument::new(file.label.clone(), &fds, closed.as_ref()))
}

pub fn equiv(a: &Path, b: &Path, mode: Mode, moment: usize, json: bool, out: &mut dyn Write) -> Result<u8, Failure> {
    let report = match mode {
        Mode::Trivial | Mode::Nontrivial => {
            let load = |p: &Path| -> Result<_, Failure> {
                InputFile::from_json(&read(p)?)
                    .and_then(|f| f.transport())
                    .map_err(|e| Failure::usage(format!("{}: {e}", p.display())))
            };
            let (ta, tb) = (load(a)?, load(b)?);
            if mode == Mode::Trivial {
                check_trivial(&ta, &tb)?
            } else {
                check_nontrivial(&ta, &tb)?
            }
        }
        Mode::Direct | Mode::Closed => {
            let (_, sa) = load_scheme(a)?;
            let (_, sb) = load_scheme(b)?;
            let i = moment_index(moment, &sa)?;
            if mode == Mode::Direct {
                check_direct(&sa, &sb, i)?
            } else {
                check_closed(&sa, &sb, i)?
            }
        }
    };
    if json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        writeln!(out, "{text}").map_err(io_failure)?;
    } else {
        writeln!(out, "{report}").map_err(io_failure)?;
    }
    Ok(if report.equivalent() { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
struct FamilyReport {
    params: FamilyParams,
    m11: String,
    m_tilde: Vec<Vec<String>>,
    verdicts: Vec<FamilyVerdict>,
    symbol_samples: usize,
    symbol_max_deviation: f64,
    symbol_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_tilde: Option<EpsTildeReport>,
}

#[derive(Serialize)]
struct EpsTildeReport {
    eps_tilde: String,
    verdicts: Vec<FamilyVerdict>,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict_table(out: &mut String, verdicts: &[FamilyVerdict]) {
    let _ = writeln!(
        out,
        "{:<8} {:<16} {:<18} verdict",
        "s", "chi(E) equal", "closed FDS equal"
    );
    for v in verdicts {
        let _ = writeln!(
            out,
            "{:<8} {:<16} {:<18} {}",
            v.s.to_string(),
            yes(v.closure_charpoly_equal),
            yes(v.closed_fds_equal),
            if v.holds() { "holds" } else { "fails" }
        );
    }
}

fn degenerate(e: Error) -> Failure {
    match e {
        Error::SingularMatrix => Failure::Degenerate("the resulting M~ is singular".into()),
        other => other.into(),
    }
}

pub fn family(
    params: &FamilyParams,
    s: &Rational,
    sweep: bool,
    eps_tilde: Option<&Rational>,
    json: bool,
    out: &mut dyn Write,
) -> Result<u8, Failure> {
    let rates = if sweep { quarter_rate_grid() } else { vec![s.clone()] };
    let member = d1q2_family(params, s).map_err(degenerate)?;
    let mut verdicts = Vec::with_capacity(rates.len());
    for rate in &rates {
        verdicts.push(d1q2_family(params, rate).map_err(degenerate)?.verdict);
    }
    let thetas = uniform_thetas(64);
    let symbols = symbol_cross_check(&member.reference.closure()?, &member.candidate.closure()?, &thetas)?;
    let eps_report = match eps_tilde {
        Some(et) => Some(EpsTildeReport {
            eps_tilde: et.to_string(),
            verdicts: rates
                .iter()
                .map(|rate| d1q2_family_with_eps_tilde(params, et, rate))
                .collect::<lbsfd_core::Result<_>>()
                .map_err(degenerate)?,
        }),
        None => None,
    };
    let report = FamilyReport {
        params: params.clone(),
        m11: member.params.m11()?.to_string(),
        m_tilde: member
            .m_tilde
            .to_rows()
            .iter()
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect(),
        symbol_samples: thetas.len(),
        symbol_max_deviation: symbols.max_deviation,
        symbol_agree: symbols.agree,
        verdicts,
        eps_tilde: eps_report,
    };
    let holds = report.verdicts.iter().all(FamilyVerdict::holds);
    if json {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        writeln!(out, "{text}").map_err(io_failure)?;
    } else {
        let mut text = String::new();
        let _ = writeln!(text, "M~ = {}", member.m_tilde);
        let _ = writeln!(text, "m~11 = {}", report.m11);
        verdict_table(&mut text, &report.verdicts);
        let _ = writeln!(
            text,
            "symbol check at s = {s}: {} samples, max deviation {:.3e} ({})",
            report.symbol_samples,
            report.symbol_max_deviation,
            if report.symbol_agree { "agree" } else { "disagree" }
        );
        if let Some(er) = &report.eps_tilde {
            let _ = writeln!(text, "with eps~ = {} (exploratory):", er.eps_tilde);
            verdict_table(&mut text, &er.verdicts);
        }
        write!(out, "{text}").map_err(io_failure)?;
    }
    Ok(if holds { EXIT_OK } else { EXIT_NEGATIVE })
}

pub struct SimulateArgs {
    pub scheme: PathBuf,
    pub lattice_size: usize,
    pub steps: usize,
    pub init: InitKind,
    pub init_file: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub json: bool,
}

#[derive(Serialize)]
struct MomentResidual {
    moment: usize,
    max_residual: String,
    levels_checked: usize,
    first_violation: Option<(usize, usize)>,
}

#[derive(Serialize)]
struct SimulationSummary {
    lattice_size: usize,
    steps: usize,
    source_fingerprint: String,
    residuals: Vec<MomentResidual>,
    conserved_sums: Vec<String>,
    conservation_exact: bool,
}

impl SimulationSummary {
    fn exact(&self) -> bool {
        self.conservation_exact && self.residuals.iter().all(|r| r.max_residual == "0")
    }
}

fn residual(moment: usize, r: RecurrenceReport) -> MomentResidual {
    MomentResidual {
        moment: moment + 1,
        max_residual: r.max_residual.to_string(),
        levels_checked: r.levels_checked,
        first_violation: r.first_violation,
    }
}

fn summarize(spec: &LbsSpec, traj: &Trajectory) -> Result<SimulationSummary, Failure> {
    let eq = spec.equilibria().ok_or(Error::MissingEquilibria)?;
    let mut residuals = Vec::with_capacity(spec.n_conserved());
    for i in 0..spec.n_conserved() {
        let closed = fds_close(&fds_from_lbs(spec, i)?, eq)?;
        residuals.push(residual(i, check_recurrence(traj, &closed)?));
    }
    let sums: Vec<Rational> = traj.conserved(0).iter().map(|f| f.sum()).collect();
    let conservation_exact =
        (1..=traj.steps()).all(|n| traj.conserved(n).iter().zip(&sums).all(|(f, s)| &f.sum() == s));
    Ok(SimulationSummary {
        lattice_size: traj.size(),
        steps: traj.steps(),
        source_fingerprint: traj.source_fingerprint().to_string(),
        residuals,
        conserved_sums: sums.iter().map(ToString::to_string).collect(),
        conservation_exact,
    })
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<u8, Failure> {
    let (_, spec) = load_scheme(&args.scheme)?;
    if spec.equilibria().is_none() {
        return Err(Error::MissingEquilibria.into());
    }
    let min_steps = spec.q() - spec.n_conserved() + 1;
    if args.steps < min_steps {
        return Err(Failure::usage(format!(
            "--steps must be at least {min_steps} for this scheme"
        )));
    }
    if args.lattice_size == 0 {
        return Err(Failure::usage("--lattice-size must be positive"));
    }
    let initial = init::build(
        args.init,
        args.init_file.as_deref(),
        spec.q(),
        spec.n_conserved(),
        spec.d(),
        args.lattice_size,
    )?;
    let traj = match initial {
        Initial::Conserved(fields) => run_lbs(&spec, &fields, args.steps)?,
        Initial::Full(state) => run_from_state(&spec.operators()?, state, args.steps)?,
    };
    let summary = summarize(&spec, &traj)?;

    let mut text = String::new();
    if args.json {
        text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
    } else {
        let _ = writeln!(
            text,
            "simulated {} steps on L = {} (operators {})",
            summary.steps,
            summary.lattice_size,
            &summary.source_fingerprint[..12]
        );
        for r in &summary.residuals {
            let _ = writeln!(
                text,
                "recurrence residual for moment {}: {} over {} levels",
                r.moment, r.max_residual, r.levels_checked
            );
            if let Some((level, node)) = r.first_violation {
                let _ = writeln!(text, "  first violation at level {level}, node {node}");
            }
        }
        let _ = writeln!(
            text,
            "conservation of [{}]: {}",
            summary.conserved_sums.join(", "),
            if summary.conservation_exact {
                "exact"
            } else {
                "violated"
            }
        );
    }

    match &args.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            traj.write_csv(std::io::BufWriter::new(file))?;
            write!(out, "{text}").map_err(io_failure)?;
        }
        None => {
            traj.write_csv(&mut *out)?;
            eprint!("{text}");
        }
    }
    Ok(if summary.exact() { EXIT_OK } else { EXIT_NEGATIVE })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lbsfd_core::rational::{int, rat};

    const D1Q2: &str = r#"{"q": 2, "d": 1, "N": 1, "M": [["1", "1"], ["1", "-1"]],
        "velocities": [[1], [-1]], "S": ["0", "2"], "equilibria": [["1"], ["1/2"]]}"#;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn derive_writes_parseable_document() {
        let f = file(D1Q2);
        let mut buf = Vec::new();
        assert_eq!(derive(f.path(), 1, &mut buf).unwrap(), EXIT_OK);
        let doc = FdsDocument::from_json(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(doc.closed.unwrap().coeffs.len(), 2);
        assert!(derive(f.path(), 2, &mut Vec::new()).is_err());
    }

    #[test]
    fn family_exit_codes() {
        let ok = FamilyParams::new(int(2), int(1), int(-1), rat(1, 2));
        let mut buf = Vec::new();
        assert_eq!(family(&ok, &int(2), true, None, false, &mut buf).unwrap(), EXIT_OK);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("M~ = [[6/5, 2], [1, -1]]"), "{text}");
        assert_eq!(text.lines().filter(|l| l.ends_with("holds")).count(), 8);

        let bad = FamilyParams::new(int(1), int(2), int(2), rat(1, 2));
        let err = family(&bad, &int(2), false, None, false, &mut Vec::new()).unwrap_err();
        assert_eq!(err.code(), EXIT_DEGENERATE);

        let mut buf = Vec::new();
        let code = family(&ok, &int(2), false, Some(&rat(1, 3)), true, &mut buf).unwrap();
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["eps_tilde"]["verdicts"][0]["closed_fds_equal"], false);
    }

    #[test]
    fn simulate_summary() {
        let f = file(D1Q2);
        let out = tempfile::NamedTempFile::new().unwrap();
        let args = SimulateArgs {
            scheme: f.path().to_path_buf(),
            lattice_size: 8,
            steps: 6,
            init: InitKind::Constant,
            init_file: None,
            out: Some(out.path().to_path_buf()),
            json: true,
        };
        let mut buf = Vec::new();
        assert_eq!(simulate(&args, &mut buf).unwrap(), EXIT_OK);
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["conservation_exact"], true);
        assert_eq!(v["residuals"][0]["max_residual"], "0");
        let csv = fs::read_to_string(out.path()).unwrap();
        assert_eq!(csv.lines().count(), 1 + 7 * 8 * 2);
    }

    #[test]
    fn simulate_requires_equilibria() {
        let f = file(&D1Q2.replace(r#", "equilibria": [["1"], ["1/2"]]"#, ""));
        let args = SimulateArgs {
            scheme: f.path().to_path_buf(),
            lattice_size: 8,
            steps: 4,
            init: InitKind::Delta,
            init_file: None,
            out: None,
            json: false,
        };
        assert_eq!(simulate(&args, &mut Vec::new()).unwrap_err().code(), EXIT_USAGE);
    }
}
