//! Command-line front end. Every subcommand is a thin wrapper over one
//! library call, so `run` can be tested without spawning processes.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags or arguments the
//! library rejects), 1 on I/O and file-format errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mvmf::filter::iterate_filter;
use mvmf::harness::{nonlinear_response, run_table, write_csv, write_response_csv, ResponseTerm, TableId, TableOptions};
use mvmf::io::{read_flow, read_image, write_flow, write_image};
use mvmf::noise::add_impulse_noise;
use mvmf::pde::{q1, q2, q3};
use mvmf::scheme::evolve;
use mvmf::window::{sample_ball, sample_disc};
use mvmf::{Error, MedianSpec, MedianVariant, MultiChannelImage, SchemeConfig};

#[derive(Parser, Debug)]
#[command(name = "mvmf", version, about = "Multivariate median filters and their PDE limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterated median filtering of a PNM image or a flow field.
    Filter {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        variant: Variant,
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 1)]
        iters: usize,
        /// Replace each sample by a small regular simplex of this radius.
        #[arg(long)]
        regularize: Option<f64>,
    },
    /// Explicit evolution of the affine equivariant median PDE (three channels).
    PdeEvolve {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 1e-4)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        anti_diffusion: f64,
    },
    /// Evaluate a coefficient function.
    Coeff {
        #[arg(long = "fn", value_enum)]
        function: Coefficient,
        #[arg(long)]
        lambda: f64,
    },
    /// Recompute a validation table as CSV.
    Validate {
        #[arg(long)]
        table: Table,
        /// Full sampling for the volume table.
        #[arg(long)]
        long: bool,
        /// Override the grid step.
        #[arg(long)]
        h: Option<f64>,
        /// Write to a file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replace entries by uniform random values.
    Noise {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        density: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        low: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        high: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Variant {
    L1,
    Oja,
    Oja23,
    Trl1,
    Medoid,
}

impl From<Variant> for MedianVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::L1 => MedianVariant::L1,
            Variant::Oja => MedianVariant::OjaFull,
            Variant::Oja23 => MedianVariant::Oja2In3,
            Variant::Trl1 => MedianVariant::TrL1,
            Variant::Medoid => MedianVariant::Medoid,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Coefficient {
    Q1,
    Q2,
    Q3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Table {
    T1,
    T2,
    T3,
    T4,
    T5,
    Fig5,
}

/// Sample positions of the response curves.
const FIG5_S: [f64; 25] = [
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9,
    2.0, 2.1, 2.2, 2.3, 2.4, 2.5,
];
const FIG5_H: f64 = 0.01;

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn is_flow(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("flo"))
}

fn load(path: &Path) -> Result<MultiChannelImage, Failure> {
    let r = if is_flow(path) { read_flow(path) } else { read_image(path) };
    r.map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn store(path: &Path, img: &MultiChannelImage) -> Result<(), Failure> {
    match if is_flow(path) { write_flow(path, img) } else { write_image(path, img) } {
        Ok(()) => Ok(()),
        Err(e @ Error::InvalidArgument(_)) => Err(Failure::Usage(format!("{}: {e}", path.display()))),
        Err(e) => Err(Failure::Io(format!("{}: {e}", path.display()))),
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Filter { input, output, variant, radius, iters, regularize } => {
            let img = load(&input)?;
            let se = if img.dims() == 2 { sample_disc(radius, img.h()) } else { sample_ball(radius, img.h()) }?;
            let mut spec = MedianSpec::new(variant.into());
            if let Some(h) = regularize {
                spec = spec.with_regularize(h);
            }
            let rep = iterate_filter(&img, &se, &spec, iters)?;
            store(&output, &rep.output)?;
            writeln!(
                out,
                "filtered {} pixels, {} passes; converged fraction {:.4}, fallback pixels {}",
                img.pixel_count(),
                iters,
                rep.converged_fraction,
                rep.fallback_pixels
            )?;
        }
        Command::PdeEvolve { input, output, tau, steps, eps, anti_diffusion } => {
            let img = load(&input)?;
            let cfg = SchemeConfig { tau, steps, eps, anti_diffusion, h: img.h() };
            let ev = evolve(&img, &cfg)?;
            store(&output, &ev.image)?;
            writeln!(out, "evolved to time {}", ev.time)?;
        }
        Command::Coeff { function, lambda } => {
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(Failure::Usage(format!("lambda must be finite and >= 0, got {lambda}")));
            }
            let v = match function {
                Coefficient::Q1 => q1(lambda),
                Coefficient::Q2 => q2(lambda),
                Coefficient::Q3 => q3(lambda),
            };
            writeln!(out, "{v}")?;
        }
        Command::Validate { table, long, h, output } => {
            let mut buf = Vec::new();
            match table {
                Table::Fig5 => {
                    let h = h.unwrap_or(FIG5_H);
                    let curves = [ResponseTerm::Uxx, ResponseTerm::Uyy, ResponseTerm::Vxy]
                        .into_iter()
                        .map(|t| Ok((t, nonlinear_response(t, &FIG5_S, h)?)))
                        .collect::<Result<Vec<_>, Error>>()?;
                    write_response_csv(&curves, &mut buf)?;
                }
                t => {
                    let id = match t {
                        Table::T1 => TableId::T1,
                        Table::T2 => TableId::T2,
                        Table::T3 => TableId::T3,
                        Table::T4 => TableId::T4,
                        _ => TableId::T5,
                    };
                    let rows = run_table(id, TableOptions { long, h })?;
                    write_csv(id, &rows, &mut buf)?;
                }
            }
            match output {
                Some(p) => std::fs::write(&p, &buf).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
                None => out.write_all(&buf)?,
            }
        }
        Command::Noise { input, output, density, low, high, seed } => {
            let img = load(&input)?;
            let noisy = add_impulse_noise(&img, density, (low, high), seed)?;
            store(&output, &noisy)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            // help and version go to stdout with status 0
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
    }
}
