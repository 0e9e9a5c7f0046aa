//! `gaussify`: single runs, figure sweeps and state-file I/O.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or range error, 3 input parse error,
//! 4 domain error (no Gaussian limit, divergence, not normalizable).

mod csv;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaussify::fixed_point::{gamma_from_state, is_normalizable, limit_coefficients, spectral_norm, squeezing_params};
use gaussify::gaussifier::run_protocol;
use gaussify::procrustean::{best_phase_distance, distill_pipeline, optimal_t, prepare, PrepConfig};
use gaussify::sweep::{figure2_rows, figure3_rows, figure4_rows};
use gaussify::{state_file, Error, Iterate, Mode, ProtocolOptions, SchmidtDiagonal, SweepParameter, SweepSpec};

use csv::{Cell, Table};

#[derive(Parser)]
#[command(name = "gaussify", version, about = "Gaussification of two-mode states by pairwise mixing and vacuum post-selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the map on a state and report per-step probabilities and fidelities.
    Iterate {
        /// `schmidt:<λ>`, `tmsv:<q>`, `file:<path>` or a bare path to a fock2 file.
        state: Option<String>,
        /// Shorthand for `schmidt:<λ>`.
        #[arg(long, conflicts_with = "state")]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 3)]
        iters: usize,
        /// Per-mode photon ceiling for the iterates.
        #[arg(long, default_value_t = 64)]
        cutoff: usize,
        /// Largest weight fraction a step may lose to truncation.
        #[arg(long, default_value_t = 1e-10)]
        tail_tol: f64,
        /// Output prefix: writes `<out>.csv` and `<out>.fock2`. CSV goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the CSV behind figure 2 (probability), 3 (fidelity) or 4 (distillation).
    Sweep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        figure: u8,
        /// Grid start (λ for figures 2 and 3, T for figure 4).
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Squeezing of the supply (figure 4).
        #[arg(long, default_value_t = 0.01)]
        q: f64,
        /// Gaussification steps after preparation (figure 4).
        #[arg(long, default_value_t = 3)]
        iters: usize,
        /// Per-mode cutoff: iterate ceiling for figures 2 and 3, mixed pipeline cutoff for figure 4.
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tail_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print Γ, its spectral norm and the squeezing of the limit; write the limit state.
    FixedPoint {
        state: Option<String>,
        #[arg(long, conflicts_with = "state")]
        lambda: Option<f64>,
        /// Cutoff of the written limit state.
        #[arg(long, default_value_t = 20)]
        cutoff: usize,
        /// Path of the limit-state file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Click-conditioned preparation from two squeezed vacua.
    Prepare {
        #[arg(long)]
        q: f64,
        /// A-side transmittance; defaults to the matched t(q).
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preparation followed by mixed-state Gaussification steps.
    Distill {
        #[arg(long)]
        q: f64,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long, default_value_t = 3)]
        iters: usize,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::Parse { .. }) => 3,
            Failure::Core(e) if e.is_domain() => 4,
            Failure::Core(_) => 2,
            Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(m) => f.write_str(m),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: Command) -> CmdResult {
    match cmd {
        Command::Iterate {
            state,
            lambda,
            iters,
            cutoff,
            tail_tol,
            out,
        } => iterate(&resolve_state(state, lambda, cutoff)?, iters, cutoff, tail_tol, out.as_deref()),
        Command::Sweep {
            figure,
            start,
            stop,
            points,
            q,
            iters,
            cutoff,
            tail_tol,
            out,
        } => {
            let grid = Grid { start, stop, points };
            sweep(figure, grid, q, iters, cutoff, tail_tol, out.as_deref())
        }
        Command::FixedPoint {
            state,
            lambda,
            cutoff,
            out,
        } => fixed_point(&resolve_state(state, lambda, cutoff)?, cutoff, out.as_deref()),
        Command::Prepare { q, t, cutoff, out } => prepare_cmd(q, t, cutoff, out.as_deref()),
        Command::Distill {
            q,
            t,
            iters,
            cutoff,
            out,
        } => distill(q, t, iters, cutoff, out.as_deref()),
    }
}

fn resolve_state(spec: Option<String>, lambda: Option<f64>, cutoff: usize) -> Result<Iterate, Failure> {
    match (spec, lambda) {
        (_, Some(l)) => Ok(Iterate::Schmidt(SchmidtDiagonal::seed(l)?)),
        (Some(s), None) => Ok(parse_state_spec(&s, cutoff)?),
        (None, None) => Err(Error::InvalidParameter("give a state or --lambda".into()).into()),
    }
}

/// `schmidt:<λ>` and `tmsv:<q>` build Schmidt-diagonal states;
/// `file:<path>` or a bare path reads a fock2 file.
fn parse_state_spec(spec: &str, cutoff: usize) -> gaussify::Result<Iterate> {
    let number = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| Error::InvalidParameter(format!("`{v}` is not a number")))
    };
    if let Some(v) = spec.strip_prefix("schmidt:") {
        return Ok(Iterate::Schmidt(SchmidtDiagonal::seed(number(v)?)?));
    }
    if let Some(v) = spec.strip_prefix("tmsv:") {
        let q = number(v)?;
        let psi = gaussify::procrustean::tmsv(q, cutoff)?;
        let coeffs = (0..=cutoff).map(|n| psi.get(n, n).re).collect();
        return Ok(Iterate::Schmidt(SchmidtDiagonal::new(coeffs)?));
    }
    let path = spec.strip_prefix("file:").unwrap_or(spec);
    Ok(Iterate::Pure(state_file::read(path)?))
}

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn iterate(initial: &Iterate, iters: usize, cutoff: usize, tail_tol: f64, out: Option<&Path>) -> CmdResult {
    let opts = ProtocolOptions {
        cutoff_ceiling: cutoff,
        tail_tol,
        ..Default::default()
    };
    let run = run_protocol(initial.clone(), iters, &opts)?;
    let mut table = Table::new(&[
        "step",
        "step_prob",
        "cum_prob_product",
        "cum_prob_tree",
        "norm_sq",
        "fidelity",
        "tail_mass",
    ]);
    for r in &run.reports {
        table.row(&[
            Cell::Int(r.step),
            Cell::Num(r.step_probability),
            Cell::Num(r.cumulative_probability),
            Cell::Num(r.cumulative_tree_probability),
            Cell::Num(r.norm_sq),
            Cell::Num(r.fidelity.unwrap_or(f64::NAN)),
            Cell::Num(r.tail_mass),
        ]);
    }
    let csv = table.finish();
    match out {
        Some(prefix) => {
            emit(&csv, Some(&with_extension(prefix, "csv")))?;
            let path = with_extension(prefix, "fock2");
            let state = run.final_state.to_pure().normalized()?;
            state_file::write(&path, &state).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => emit(&csv, None),
    }
}

struct Grid {
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
}

impl Grid {
    fn spec(&self, parameter: SweepParameter, defaults: (f64, f64, usize)) -> gaussify::Result<SweepSpec> {
        SweepSpec::new(
            parameter,
            self.start.unwrap_or(defaults.0),
            self.stop.unwrap_or(defaults.1),
            self.points.unwrap_or(defaults.2),
        )
    }
}

fn sweep(
    figure: u8,
    grid: Grid,
    q: f64,
    iters: usize,
    cutoff: Option<usize>,
    tail_tol: f64,
    out: Option<&Path>,
) -> CmdResult {
    let csv = match figure {
        2 | 3 => {
            let lambdas = grid.spec(SweepParameter::Lambda, (0.0, 0.95, 20))?.values();
            let opts = ProtocolOptions {
                cutoff_ceiling: cutoff.unwrap_or(64),
                tail_tol,
                ..Default::default()
            };
            if figure == 2 {
                let mut t = Table::new(&["lambda", "p1", "p2", "p3"]);
                for r in figure2_rows(&lambdas, &opts)? {
                    t.row(&[Cell::Num(r.lambda), Cell::Num(r.p[0]), Cell::Num(r.p[1]), Cell::Num(r.p[2])]);
                }
                t.finish()
            } else {
                let mut t = Table::new(&["lambda", "F1", "F2", "F3"]);
                for r in figure3_rows(&lambdas, &opts)? {
                    t.row(&[Cell::Num(r.lambda), Cell::Num(r.f[0]), Cell::Num(r.f[1]), Cell::Num(r.f[2])]);
                }
                t.finish()
            }
        }
        _ => {
            let ts = grid.spec(SweepParameter::T, (0.0, 1.0, 30))?.values();
            let mut t = Table::new(&["T", "entanglement_ratio", "overall_probability", "purity", "T_squared"]);
            for r in figure4_rows(q, &ts, iters, cutoff.unwrap_or(10))? {
                t.row(&[
                    Cell::Num(r.t),
                    Cell::Num(r.entanglement_ratio),
                    Cell::Num(r.overall_probability),
                    Cell::Num(r.purity),
                    Cell::Num(r.t * r.t),
                ]);
            }
            t.finish()
        }
    };
    emit(&csv, out)
}

fn fixed_point(initial: &Iterate, cutoff: usize, out: Option<&Path>) -> CmdResult {
    let psi = initial.to_pure();
    let gamma = gamma_from_state(&psi)?;
    let norm = spectral_norm(&gamma);
    let normalizable = is_normalizable(&gamma);
    let c = |z: gaussify::C64| format!("{} {}", csv::g12(z.re), csv::g12(z.im));
    println!("gamma_1: {}", c(gamma.g1));
    println!("gamma_2: {}", c(gamma.g2));
    println!("gamma_12: {}", c(gamma.g12));
    println!("spectral_norm: {}", csv::g12(norm));
    if !normalizable {
        println!("verdict: not normalizable");
        return Err(Error::NotNormalizable(norm).into());
    }
    println!("verdict: normalizable");
    let sv = squeezing_params(&gamma)?.singular_values();
    println!("squeezing_singular_values: {} {}", csv::g12(sv[0]), csv::g12(sv[1]));
    let limit = limit_coefficients(&gamma, cutoff)?.normalized()?;
    match out {
        Some(p) => state_file::write(p, &limit).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn transmittance(q: f64, t: Option<f64>) -> gaussify::Result<f64> {
    match t {
        Some(t) => Ok(t),
        None => Ok(optimal_t(q, 1.0)?.0),
    }
}

fn prepare_cmd(q: f64, t: Option<f64>, cutoff: usize, out: Option<&Path>) -> CmdResult {
    let t = transmittance(q, t)?;
    let prepared = prepare(&PrepConfig::with_transmittance(q, t, cutoff)?)?;
    let entropy = prepared.state.reduce(Mode::A)?.entropy()?;
    let (phi, distance) = best_phase_distance(&prepared.state)?;
    let mut table = Table::new(&[
        "q",
        "T",
        "click_probability",
        "purity",
        "entropy",
        "bell_phase",
        "bell_distance",
    ]);
    table.row(&[
        Cell::Num(q),
        Cell::Num(t),
        Cell::Num(prepared.click_probability),
        Cell::Num(prepared.state.purity()),
        Cell::Num(entropy),
        Cell::Num(phi),
        Cell::Num(distance),
    ]);
    emit(&table.finish(), out)
}

fn distill(q: f64, t: Option<f64>, iters: usize, cutoff: usize, out: Option<&Path>) -> CmdResult {
    let t = transmittance(q, t)?;
    let r = distill_pipeline(q, t, iters, cutoff)?;
    let mut table = Table::new(&[
        "q",
        "T",
        "iterations",
        "entanglement_ratio",
        "overall_probability",
        "e_init",
        "e_final",
        "purity",
        "click_probability",
    ]);
    table.row(&[
        Cell::Num(q),
        Cell::Num(t),
        Cell::Int(iters),
        Cell::Num(r.entanglement_ratio),
        Cell::Num(r.overall_probability),
        Cell::Num(r.e_init),
        Cell::Num(r.e_final),
        Cell::Num(r.purity),
        Cell::Num(r.click_probability),
    ]);
    emit(&table.finish(), out)
}
