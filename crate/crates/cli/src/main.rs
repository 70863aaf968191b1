//! `tropilift`: command-line front end.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when a computation is refused
//! (wild characteristic, negative ramification and the like).

mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tropilift::Error;

use commands::{JacobianCheck, Report};
use input::Source;

#[derive(Parser, Debug)]
#[command(name = "tropilift", version, about = "Harmonic morphisms of metric graphs and their lifts")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Genus of an augmented metric graph.
    Genus {
        #[command(flatten)]
        src: Source,
    },
    /// Canonical divisor.
    Canonical {
        #[command(flatten)]
        src: Source,
    },
    /// Rank of a divisor.
    Rank {
        #[command(flatten)]
        src: Source,
        /// Divisor JSON, inline or `@FILE`.
        #[arg(long)]
        divisor: String,
        /// Rank on the graph with virtual cycles for vertex genus.
        #[arg(long)]
        weighted: bool,
    },
    /// Validate a morphism and report harmonicity, degree and effectiveness.
    CheckMorphism {
        #[command(flatten)]
        src: Source,
    },
    /// Ramification divisor and the Riemann–Hurwitz identity.
    Ramification {
        #[command(flatten)]
        src: Source,
    },
    /// Hurwitz number by monodromy enumeration.
    Hurwitz {
        /// Source genus.
        #[arg(long)]
        gs: u32,
        /// Target genus.
        #[arg(long)]
        gt: u32,
        /// Degree.
        #[arg(long)]
        d: u32,
        /// Branch profile such as `2,2`; repeat for each branch point.
        #[arg(long = "mu")]
        mus: Vec<String>,
        #[arg(long = "char", default_value_t = 0)]
        char_p: u64,
    },
    /// Local liftability of an augmented morphism.
    Liftable {
        #[command(flatten)]
        src: Source,
        #[arg(long = "char", default_value_t = 0)]
        char_p: u64,
        /// Also search for the least source genus function with values up to this bound.
        #[arg(long, value_name = "G_MAX")]
        relax_genus: Option<u32>,
    },
    /// Gluing data, lift classes and automorphisms of a tame covering.
    GluingCount {
        #[command(flatten)]
        src: Source,
        /// Gluing data JSON: `{"factors": [{"vertex", "order"}], "rho": [[..]]}`.
        #[arg(long)]
        gluing: Option<PathBuf>,
    },
    /// Critical group of a graph, or the maps induced by a morphism.
    Jacobian {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum)]
        check: Option<JacobianCheck>,
    },
    /// Hyperelliptic involution and the lifting criterion.
    Hyperelliptic {
        #[command(flatten)]
        src: Source,
    },
    /// Upper bound for the gonality from a morphism to a tree.
    Gonality {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 4)]
        dmax: u32,
        /// Search nodes per degree (default from TROPILIFT_NODE_LIMIT).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Gonality witness followed by the local lifting test.
    Obstruct {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 4)]
        dmax: u32,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long = "char", default_value_t = 0)]
        char_p: u64,
    },
    /// Print a built-in instance as JSON (or DOT).
    Fixtures {
        /// Fixture name with optional arguments, e.g. `CIRCLE(5)`; omit to list names.
        #[arg(long)]
        name: Option<String>,
    },
}

fn refusal(e: &Error) -> bool {
    matches!(
        e.root(),
        Error::NegativeRamification(_)
            | Error::WildCharacteristic { .. }
            | Error::NotTame(_)
            | Error::NotEffective { .. }
            | Error::DegreeTooLarge(_)
            | Error::TargetNotTree
            | Error::NonIntegerLength(_)
            | Error::InfiniteSupport(_)
    )
}

fn run(cli: &Cli) -> tropilift::Result<Report> {
    use Command::*;
    match &cli.command {
        Genus { src } => commands::genus(src),
        Canonical { src } => commands::canonical(src),
        Rank { src, divisor, weighted } => commands::rank(src, divisor, *weighted),
        CheckMorphism { src } => commands::check_morphism(src),
        Ramification { src } => commands::ramification(src),
        Hurwitz { gs, gt, d, mus, char_p } => commands::hurwitz(*gs, *gt, *d, mus, *char_p),
        Liftable { src, char_p, relax_genus } => commands::liftable(src, *char_p, *relax_genus),
        GluingCount { src, gluing } => commands::gluing_count(src, gluing.as_ref()),
        Jacobian { src, check } => commands::jacobian(src, *check),
        Hyperelliptic { src } => commands::hyperelliptic(src),
        Gonality { src, dmax, budget } => commands::gonality(src, *dmax, *budget),
        Obstruct { src, dmax, budget, char_p } => commands::obstruct(src, *dmax, *budget, *char_p),
        Fixtures { name: Some(name) } => commands::fixture(name),
        Fixtures { name: None } => Ok(commands::fixture_list()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&report.json).expect("serializable") + "\n",
                Format::Text => report.text + "\n",
                Format::Dot => match report.dot {
                    Some(dot) => dot,
                    None => {
                        eprintln!("error: no DOT rendering for this command");
                        return ExitCode::from(1);
                    }
                },
            };
            // a closed pipe downstream is not our failure
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            ExitCode::from(u8::from(report.invalid))
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if refusal(&e) { 2 } else { 1 })
        }
    }
}
