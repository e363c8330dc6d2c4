mod commands;
mod init;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lbsfd_core::rational::{parse_rational, Rational};

use commands::Failure;

#[derive(Parser)]
#[command(
    name = "lbsfd",
    version,
    about = "Derive and compare the finite difference schemes of lattice Boltzmann schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// S = diag(0, 1, 1) on two 3x3 transport matrices
    Trivial,
    /// the eight conditions for S = diag(0, 2, 2) on two 3x3 transport matrices
    Nontrivial,
    /// structural equality of the derived schemes
    Direct,
    /// equality after substituting each scheme's linear equilibria
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    /// unit mass on node 0 in the first conserved moment
    Delta,
    /// every conserved moment equal to 1 everywhere
    Constant,
    /// read from --init-file
    File,
}

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Print the finite difference scheme of one conserved moment as JSON.
    Derive {
        scheme: PathBuf,
        /// Conserved moment, 1-based.
        #[arg(long, default_value_t = 1)]
        moment: usize,
    },
    /// Check whether two schemes induce the same finite difference scheme.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Direct)]
        mode: Mode,
        /// Conserved moment for direct and closed modes, 1-based.
        #[arg(long, default_value_t = 1)]
        moment: usize,
        #[arg(long)]
        json: bool,
    },
    /// Build the two-velocity family member M~ and compare it with
    /// M = [[1, 1], [1, -1]].
    Family {
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        m12: Rational,
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        m21: Rational,
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        m22: Rational,
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        eps: Rational,
        /// Relaxation rate of the second moment.
        #[arg(long, value_parser = rational_arg, default_value = "2")]
        s: Rational,
        /// Also report every rate in 1/4, 1/2, ..., 2.
        #[arg(long)]
        sweep_s: bool,
        /// Give the candidate its own equilibrium slope (reported only).
        #[arg(long, value_parser = rational_arg, allow_hyphen_values = true)]
        eps_tilde: Option<Rational>,
        #[arg(long)]
        json: bool,
    },
    /// Run a scheme on a periodic lattice and check it against its
    /// derived recurrence.
    Simulate {
        scheme: PathBuf,
        /// Lattice size per axis.
        #[arg(short = 'L', long = "lattice-size", visible_alias = "L", default_value_t = lbsfd_core::lattice::DEFAULT_LATTICE_SIZE)]
        lattice_size: usize,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = InitKind::Delta)]
        init: InitKind,
        #[arg(long, required_if_eq("init", "file"))]
        init_file: Option<PathBuf>,
        /// Write the trajectory CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let stdout = &mut std::io::stdout().lock();
    match cli.command {
        Command::Derive { scheme, moment } => commands::derive(&scheme, moment, stdout),
        Command::Equiv {
            a,
            b,
            mode,
            moment,
            json,
        } => commands::equiv(&a, &b, mode, moment, json, stdout),
        Command::Family {
            m12,
            m21,
            m22,
            eps,
            s,
            sweep_s,
            eps_tilde,
            json,
        } => {
            let params = lbsfd_core::equiv::FamilyParams::new(m12, m21, m22, eps);
            commands::family(&params, &s, sweep_s, eps_tilde.as_ref(), json, stdout)
        }
        Command::Simulate {
            scheme,
            lattice_size,
            steps,
            init,
            init_file,
            out,
            json,
        } => commands::simulate(
            &commands::SimulateArgs {
                scheme,
                lattice_size,
                steps,
                init,
                init_file,
                out,
                json,
            },
            stdout,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
