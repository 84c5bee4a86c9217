use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gradflow::stepper::SolverSettings;
use gradflow::study::{
    headline_rate, solve_case_with, spatial_study, temporal_study, write_csv, StudyRecord,
};
use gradflow::Error;

#[derive(Parser)]
#[command(
    name = "gradflow",
    version,
    about = "Convergence studies for linearized backward Euler FEM on regularized gradient flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh-refinement study at a fixed time step.
    Spatial {
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0 / 4096.0)]
        tau: f64,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error on every (tau, M) pair, for plotting error against h per tau.
    Temporal {
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.0625,0.015625")]
        tau_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A single run; prints its final L2 error.
    Solve {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Writes `x y value` per degree of freedom.
        #[arg(long)]
        dump_solution: Option<PathBuf>,
        /// CG relative residual tolerance.
        #[arg(long, default_value_t = 1e-12)]
        cg_rel_tol: f64,
        /// CG iteration cap as a multiple of the number of unknowns.
        #[arg(long, default_value_t = 10)]
        cg_max_iter_factor: usize,
    },
}

fn emit(records: &[StudyRecord], out: Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => write_csv(records, BufWriter::new(File::create(path)?)),
        None => write_csv(records, std::io::stdout().lock()),
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Spatial {
            r,
            lambda,
            tau,
            m_list,
            t_end,
            out,
        } => {
            let records = spatial_study(r, lambda, tau, &m_list, t_end)?;
            if let Some(rate) = headline_rate(&records) {
                eprintln!("finest-pair rate: {rate:.3}");
            }
            emit(&records, out)
        }
        Command::Temporal {
            r,
            lambda,
            tau_list,
            m_list,
            t_end,
            out,
        } => {
            let records = temporal_study(r, lambda, &tau_list, &m_list, t_end)?;
            emit(&records, out)
        }
        Command::Solve {
            m,
            r,
            lambda,
            tau,
            t_end,
            dump_solution,
            cg_rel_tol,
            cg_max_iter_factor,
        } => {
            if !(cg_rel_tol.is_finite() && cg_rel_tol > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "cg tolerance must be positive, got {cg_rel_tol}"
                )));
            }
            let solver = SolverSettings {
                rel_tol: cg_rel_tol,
                max_iter_factor: cg_max_iter_factor,
            };
            let case = solve_case_with(m, r, lambda, tau, t_end, solver)?;
            let iters = case.trajectory.total_iterations();
            println!(
                "m={m} r={r} lambda={lambda} tau={tau} t_end={t_end} steps={} cg_iterations={iters} l2_error={:.16e}",
                case.trajectory.reports.len(),
                case.record.l2_error
            );
            if let Some(path) = dump_solution {
                let field = case.final_field();
                let mut w = BufWriter::new(File::create(path)?);
                for (p, v) in field.space().dof_coords().iter().zip(field.coeffs()) {
                    writeln!(w, "{:.17e} {:.17e} {:.17e}", p[0], p[1], v)?;
                }
                w.flush()?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                ExitCode::from(3)
            } else if e.is_argument_error() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
