use clap::{Args, Parser, Subcommand};
use knotcert_cli::{
    cmd_certify, cmd_cover, cmd_double, cmd_grid, cmd_homology, cmd_mirror, cmd_parse, cmd_reverify, cmd_tangle,
    cmd_triangulate, write, CliError, CoverMode, Flags, Output, TangleOp,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Surgery descriptions, triangulations and certified hyperbolic structures.
///
/// Exit status: 0 on success or certification, 2 when a result is not
/// certified, 1 on bad input or internal errors.
#[derive(Parser)]
#[command(name = "knotcert", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Initial Krawczyk box radius.
    #[arg(long, global = true, default_value_t = knotcert::certify::DEFAULT_RADIUS)]
    radius: f64,
    /// Give up when the simplified triangulation has more tetrahedra.
    #[arg(long, global = true)]
    max_tets: Option<usize>,
    /// Write the main output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Read a PD code or framed link JSON and print the normalized link.
    Parse { input: PathBuf },
    /// Mirror a framed link.
    Mirror { input: PathBuf },
    /// First homology of the surgered manifold.
    Homology { input: PathBuf },
    /// Rational tangles, slot filling, caps and closure.
    Tangle {
        #[command(subcommand)]
        op: TangleCmd,
    },
    /// Double a tangle along its boundary.
    Double { input: PathBuf },
    /// Base link, branched cover or homology cross-check of an axis presentation.
    Cover {
        input: PathBuf,
        #[arg(long, group = "what")]
        base: bool,
        #[arg(long, group = "what")]
        cover: bool,
        #[arg(long, group = "what")]
        crosscheck: bool,
        /// With --cover, keep the lifted axis as a cusp.
        #[arg(long)]
        keep_axis: bool,
    },
    /// Ideal triangulation of the link complement.
    Triangulate { input: PathBuf },
    /// Certify hyperbolicity and enclose the volume.
    Certify {
        input: PathBuf,
        /// Also write the gluing system, for reverify.
        #[arg(long)]
        system: Option<PathBuf>,
    },
    /// Re-check a certificate against its gluing system.
    Reverify { certificate: PathBuf, system: PathBuf },
    /// Sweep twist parameters on one triangulation.
    Grid { spec: PathBuf },
}

#[derive(Subcommand)]
enum TangleCmd {
    /// The rational tangle with fraction p/q.
    Rational {
        #[arg(allow_hyphen_values = true)]
        p: i64,
        #[arg(allow_hyphen_values = true)]
        q: i64,
    },
    /// Fraction of a rational tangle.
    Fraction { input: PathBuf },
    /// Substitute a tangle into a named slot.
    Fill { input: PathBuf, slot: String, with: PathBuf },
    /// Attach caps to pairs of adjacent endpoint positions, written `i,j`.
    Caps {
        input: PathBuf,
        #[arg(required = true, value_parser = parse_pair)]
        pairs: Vec<(usize, usize)>,
    },
    /// Numerator closure of a 4-ended tangle.
    Closure { input: PathBuf },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected i,j")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn run(cli: Cli) -> Result<Output, CliError> {
    let g = &cli.global;
    let flags = Flags { seed: g.seed, jobs: g.jobs, radius: g.radius, max_tets: g.max_tets };
    match cli.command {
        Command::Parse { input } => cmd_parse(&input),
        Command::Mirror { input } => cmd_mirror(&input),
        Command::Homology { input } => cmd_homology(&input),
        Command::Tangle { op } => cmd_tangle(&match op {
            TangleCmd::Rational { p, q } => TangleOp::Rational { p, q },
            TangleCmd::Fraction { input } => TangleOp::Fraction { input },
            TangleCmd::Fill { input, slot, with } => TangleOp::Fill { input, slot, with },
            TangleCmd::Caps { input, pairs } => TangleOp::Caps { input, pairs },
            TangleCmd::Closure { input } => TangleOp::Closure { input },
        }),
        Command::Double { input } => cmd_double(&input),
        Command::Cover { input, base, cover, crosscheck, keep_axis } => {
            let mode = match (base, cover, crosscheck) {
                (true, _, _) => CoverMode::Base,
                (_, _, true) => CoverMode::Crosscheck,
                _ => CoverMode::Cover { keep_axis },
            };
            cmd_cover(&input, mode)
        }
        Command::Triangulate { input } => cmd_triangulate(&input, &flags),
        Command::Certify { input, system } => cmd_certify(&input, system.as_deref(), &flags),
        Command::Reverify { certificate, system } => cmd_reverify(&certificate, &system),
        Command::Grid { spec } => cmd_grid(&spec, &flags),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_path = cli.global.out.clone();
    let result = run(cli).and_then(|out| {
        match &out_path {
            Some(p) => write(p, &out.text)?,
            None => print!("{}", out.text),
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            if let Some(note) = out.note {
                eprintln!("{}", note.trim_end());
            }
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
