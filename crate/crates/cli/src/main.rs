//! `rhoforge`: bounding chains, lens spaces, rho sums and hyperbolization from the shell.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on bad usage or
//! malformed input, 3 when a tower would exceed the cell cap.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::{BoundChainArgs, CapExceeded, ComplexSource, ConstantsArgs, VerifyArgs};
use report::{to_pretty, write_atomic, Envelope, Status};

#[derive(Parser)]
#[command(name = "rhoforge", version, about = "Bounding chains, lens spaces and rho invariants")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Where to write the JSON report; printed to stdout when absent.
    #[arg(long, global = true, visible_alias = "report")]
    out: Option<PathBuf>,
    /// Leave the wall-clock field out so reports are byte-for-byte reproducible.
    #[arg(long, global = true)]
    no_clock: bool,
    /// Suppress the per-check summary on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ComplexInput {
    /// Complex in `{"vertices": n, "faces": [...]}` form.
    #[arg(long)]
    complex: Option<PathBuf>,
    /// Build the lens space L(N; 1, ..., 1) from `N,d` instead.
    #[arg(long, value_parser = commands::parse_lens_pair, value_name = "N,d")]
    lens: Option<(u64, u32)>,
}

impl ComplexInput {
    fn source(&self) -> ComplexSource {
        match (&self.complex, self.lens) {
            (Some(p), _) => ComplexSource::File(p.clone()),
            (None, Some((n, d))) => ComplexSource::Lens(n, d),
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Bound a cycle: find u with du = N(C - E) and check its size.
    BoundChain {
        /// Group as moduli, e.g. `2`, `2,2` or `3x3`.
        #[arg(long)]
        group: String,
        /// Chain file: `{"degree": n, "terms": [{"gen": [[r..]..], "coef": k}..]}`.
        #[arg(long, required_unless_present = "polytope", conflicts_with = "polytope")]
        cycle: Option<PathBuf>,
        /// Polytope dump, used as one already-glued polytope.
        #[arg(long)]
        polytope: Option<PathBuf>,
        /// Reject generators containing the identity.
        #[arg(long)]
        strict: bool,
        /// Include u itself in the report.
        #[arg(long)]
        emit_chain: bool,
    },
    /// Check a polytope dump: gluings, cycle condition, coloring, labels.
    VerifyPolytope {
        #[arg(long)]
        group: String,
        #[arg(long)]
        polytope: PathBuf,
        #[arg(long)]
        strict: bool,
        /// Random base labelings to try.
        #[arg(long, default_value_t = 8)]
        trials: usize,
        /// Also build the full tower and check its boundary cylinder.
        #[arg(long)]
        tower: bool,
    },
    /// Integral homology.
    Homology {
        #[command(flatten)]
        input: ComplexInput,
    },
    /// Combinatorial Laplacian torsion with a relabeling-invariance check.
    Torsion {
        #[command(flatten)]
        input: ComplexInput,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
    /// Cell counts per dimension.
    Fvector {
        #[command(flatten)]
        input: ComplexInput,
    },
    /// The hyperbolized sphere Y^dim with its counts and homology.
    Hyperbolize {
        #[arg(long)]
        dim: usize,
    },
    /// Triangulate L(N; 1, ..., 1) of dimension 2d - 1 and report on it.
    Lens {
        #[arg(long = "N", value_name = "N")]
        n: u64,
        #[arg(long)]
        d: u32,
        /// Also compute the Laplacian torsion.
        #[arg(long)]
        torsion: bool,
    },
    /// Cotangent sums and the (N/pi)^d lower bound over a range of N.
    RhoSweep {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
        /// CSV with columns N, rho, lower_bound, pass.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate the size constants.
    Constants {
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 2)]
        group_order: u64,
        /// Top simplices of the complex being relatively hyperbolized.
        #[arg(long, default_value_t = 1)]
        simplices: u64,
        /// The per-dimension factor of the bordism constant, when known.
        #[arg(long)]
        dimension_factor: Option<String>,
        /// Degree and cell count of a cycle, for the chain-size bounds.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = 6)]
        cells: usize,
    },
}

fn run(cli: &Cli, env: &mut Envelope) -> anyhow::Result<report::Report> {
    match &cli.command {
        Command::BoundChain { group, cycle, polytope, strict, emit_chain } => commands::bound_chain(
            env,
            &BoundChainArgs {
                group: group.clone(),
                cycle: cycle.clone(),
                polytope: polytope.clone(),
                strict: *strict,
                emit_chain: *emit_chain,
            },
        ),
        Command::VerifyPolytope { group, polytope, strict, trials, tower } => commands::verify_polytope(
            env,
            &VerifyArgs {
                group: group.clone(),
                polytope: polytope.clone(),
                strict: *strict,
                trials: *trials,
                tower: *tower,
            },
        ),
        Command::Homology { input } => commands::homology(env, &input.source()),
        Command::Torsion { input, trials } => commands::torsion(env, &input.source(), *trials),
        Command::Fvector { input } => commands::fvector(env, &input.source()),
        Command::Hyperbolize { dim } => commands::hyperbolize(*dim),
        Command::Lens { n, d, torsion } => commands::lens(*n, *d, *torsion),
        Command::RhoSweep { d, from, to, csv } => commands::rho_sweep(*d, *from, *to, csv.as_deref()),
        Command::Constants { k, group_order, simplices, dimension_factor, degree, cells } => {
            commands::constants(&ConstantsArgs {
                k: *k,
                group_order: *group_order,
                simplices: *simplices,
                dimension_factor: dimension_factor.clone(),
                degree: *degree,
                cells: *cells,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    let mut env = Envelope::new(std::env::args().skip(1).collect(), cli.seed);
    let report = match run(&cli, &mut env) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rhoforge: {e:#}");
            return ExitCode::from(if e.downcast_ref::<CapExceeded>().is_some() { 3 } else { 2 });
        }
    };
    if !cli.quiet {
        for c in report.checks() {
            let tag = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Info => "info",
            };
            eprintln!("[{tag}] {}", c.name);
        }
    }
    let passed = report.passed();
    let clock = (!cli.no_clock).then(|| start.elapsed().as_millis());
    let bytes = to_pretty(&report.finish(&env, clock));
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &bytes) {
                eprintln!("rhoforge: {e:#}");
                return ExitCode::from(2);
            }
        }
        None => {
            use std::io::Write;
            let _ = std::io::stdout().write_all(&bytes);
        }
    }
    ExitCode::from(if passed { 0 } else { 1 })
}
