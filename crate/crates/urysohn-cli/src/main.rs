//! Batch front end over the urysohn library.
//!
//! One command per process: classify a spectrum, check the four-values
//! condition, build an approximation or a distinguishing certificate,
//! re-verify a stored certificate, defeat a coloring, or export a graph as
//! DOT. Artifacts go to stdout (or `--output`) as JSON; diagnostics go to
//! stderr. Identical inputs and budgets produce byte-identical artifacts.
//!
//! Exit status: 0 success, 1 negative verdict (four-values fails, the
//! certificate does not hold, no defeater exists), 2 usage error, 3 budget
//! exceeded.

use std::fs;
use std::process::exit;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use urysohn::amalgam::AmalgamError;
use urysohn::builder::{saturate, Approximation, BuilderError};
use urysohn::catalog;
use urysohn::coloring::{
    audit_certificate_structure, build_two_coloring, defeat_no_limit, defeat_zero_limit,
    DistinguishingCertificate, EngineBudget, EngineError,
};
use urysohn::graph::SimpleGraph;
use urysohn::rational::Rational;
use urysohn::space::FiniteMetricSpace;
use urysohn::spectrum::{
    distinguishing_verdict, ProfiledSpectrum, Spectrum, Verdict, VerdictCase,
};
use urysohn::symmetry::{space_color_preserving, SearchBudget, SymmetryError};

#[derive(Parser)]
#[command(
    name = "urysohn",
    version,
    about = "Distance spectra, finite approximations, and distinguishing colorings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a profiled spectrum: two colors or infinitely many.
    Classify {
        #[command(flatten)]
        spectrum: SpectrumArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the four-values condition on a bare core.
    #[command(name = "check-4v")]
    Check4v {
        /// Core as `{"core": [...]}`, a bare JSON array, `@file`, or
        /// `catalog:NAME`.
        input: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Saturate a finite approximation of the space over a spectrum.
    BuildApprox {
        #[command(flatten)]
        spectrum: SpectrumArg,
        /// Realize every extension vector over subsets of up to this size.
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Cap on distance values used in extension vectors.
        #[arg(long)]
        bound: Option<Rational>,
        /// Stop growing past this many points.
        #[arg(long = "budget-points", default_value_t = 30)]
        budget_points: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build a two-coloring certificate for a spectrum with verdict Two.
    BuildColoring {
        #[command(flatten)]
        spectrum: SpectrumArg,
        /// Points saturated before the pair queue freezes.
        #[arg(long, default_value_t = 6)]
        seed_points: usize,
        /// Saturation level for the seeding pass.
        #[arg(long, default_value_t = 1)]
        seed_level: usize,
        /// Hard cap on total points across all attachments.
        #[arg(long = "budget-points", default_value_t = 4000)]
        budget_points: usize,
        /// Node budget per amalgamation search.
        #[arg(long = "budget-search-nodes", default_value_t = 500_000)]
        budget_search_nodes: u64,
        #[command(flatten)]
        sym: SymmetryArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-check a stored certificate from scratch.
    Verify {
        /// Certificate JSON, inline or `@file`.
        input: String,
        #[command(flatten)]
        sym: SymmetryArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Produce a color-preserving automorphism defeating a coloring.
    Defeat {
        #[command(flatten)]
        spectrum: SpectrumArg,
        /// Finite metric space JSON (or an approximation), inline or `@file`.
        #[arg(long)]
        space: String,
        /// Coloring as a JSON array of color indices, inline or `@file`.
        #[arg(long)]
        coloring: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Export a graph, or the distance graph of a space, as DOT.
    ExportDot {
        /// DOT text, space/approximation/certificate JSON, or `@file`.
        input: String,
        /// Distance whose graph to export (required for space inputs).
        #[arg(long)]
        edge: Option<Rational>,
        /// Graph name in the DOT header.
        #[arg(long, default_value = "g")]
        name: String,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct SpectrumArg {
    /// Profiled spectrum JSON, `@file`, or `catalog:NAME`.
    input: Option<String>,
    /// Catalog entry name; shorthand for `catalog:NAME`.
    #[arg(long, conflicts_with = "input")]
    seed: Option<String>,
}

#[derive(Args)]
struct SymmetryArgs {
    /// Node budget for automorphism searches.
    #[arg(long = "budget-symmetry-nodes", default_value_t = SearchBudget::default().max_nodes)]
    symmetry_nodes: u64,
    /// Cap on the order of any automorphism group enumerated.
    #[arg(long = "budget-group-order", default_value_t = SearchBudget::default().max_group_order)]
    group_order: u64,
}

impl SymmetryArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_nodes: self.symmetry_nodes,
            max_group_order: self.group_order,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write the artifact here instead of stdout.
    #[arg(long, short)]
    output: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Compact single-line JSON.
    Json,
    /// Indented JSON.
    Pretty,
}

/// A failed run, already sorted by exit status.
enum Failure {
    Usage(String),
    Negative(String),
    Budget(String),
}

impl Failure {
    fn status(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Negative(_) => 1,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Negative(m) | Failure::Budget(m) => m,
        }
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match &e {
        EngineError::BudgetExceeded(_)
        | EngineError::Amalgam(AmalgamError::BudgetExceeded { .. })
        | EngineError::Builder(BuilderError::VectorBudget { .. })
        | EngineError::Symmetry(
            SymmetryError::NodeBudget { .. } | SymmetryError::GroupClosureBudget { .. },
        ) => Failure::Budget(e.to_string()),
        _ => Failure::Negative(e.to_string()),
    }
}

/// Resolves `@file` indirection; anything else is the literal payload.
fn read_payload(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))
        }
        None => Ok(arg.to_owned()),
    }
}

fn resolve_spectrum(arg: &SpectrumArg) -> Result<ProfiledSpectrum, Failure> {
    let source = match (&arg.input, &arg.seed) {
        (Some(input), None) => input.clone(),
        (None, Some(seed)) => format!("catalog:{seed}"),
        (None, None) => {
            return Err(Failure::Usage(
                "provide a spectrum (JSON, @file, catalog:NAME) or --seed NAME".to_owned(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    if let Some(name) = source.strip_prefix("catalog:") {
        let entry = catalog::lookup(name).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(entry.spectrum);
    }
    let payload = read_payload(&source)?;
    serde_json::from_str(&payload)
        .map_err(|e| Failure::Usage(format!("cannot parse profiled spectrum: {e}")))
}

fn resolve_core(input: &str) -> Result<Spectrum, Failure> {
    if let Some(name) = input.strip_prefix("catalog:") {
        let entry = catalog::lookup(name).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(entry.spectrum.core);
    }
    let payload = read_payload(input)?;
    #[derive(serde::Deserialize)]
    struct Wrapped {
        core: Spectrum,
    }
    if let Ok(w) = serde_json::from_str::<Wrapped>(&payload) {
        return Ok(w.core);
    }
    serde_json::from_str(&payload)
        .map_err(|e| Failure::Usage(format!("cannot parse core: {e}")))
}

fn resolve_space(input: &str) -> Result<FiniteMetricSpace, Failure> {
    let payload = read_payload(input)?;
    if let Ok(space) = serde_json::from_str::<FiniteMetricSpace>(&payload) {
        return Ok(space);
    }
    if let Ok(approx) = serde_json::from_str::<Approximation>(&payload) {
        return Ok(approx.space);
    }
    if let Ok(cert) = serde_json::from_str::<DistinguishingCertificate>(&payload) {
        return Ok(cert.space.space);
    }
    Err(Failure::Usage(
        "cannot parse a space, approximation, or certificate from the input".to_owned(),
    ))
}

fn emit<T: Serialize>(value: &T, out: &OutputArgs) -> Result<(), Failure> {
    let mut text = match out.format {
        Format::Json => serde_json::to_string(value),
        Format::Pretty => serde_json::to_string_pretty(value),
    }
    .map_err(|e| Failure::Usage(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_text(&text, out)
}

fn write_text(text: &str, out: &OutputArgs) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { spectrum, out } => {
            let ps = resolve_spectrum(&spectrum)?;
            let report =
                distinguishing_verdict(&ps).map_err(|e| Failure::Negative(e.to_string()))?;
            emit(&report, &out)
        }
        Command::Check4v { input, out } => {
            let core = resolve_core(&input)?;
            let verdict = core.four_values();
            emit(&verdict, &out)?;
            if verdict.holds() {
                Ok(())
            } else {
                Err(Failure::Negative(
                    "the core fails the four-values condition".to_owned(),
                ))
            }
        }
        Command::BuildApprox {
            spectrum,
            level,
            bound,
            budget_points,
            out,
        } => {
            let ps = resolve_spectrum(&spectrum)?;
            let approx = saturate(&ps, level, bound, budget_points).map_err(|e| match e {
                BuilderError::VectorBudget { .. } => Failure::Budget(e.to_string()),
                _ => Failure::Negative(e.to_string()),
            })?;
            emit(&approx, &out)
        }
        Command::BuildColoring {
            spectrum,
            seed_points,
            seed_level,
            budget_points,
            budget_search_nodes,
            sym,
            out,
        } => {
            let ps = resolve_spectrum(&spectrum)?;
            let budget = EngineBudget {
                seed_points,
                seed_level,
                max_points: budget_points,
                search_nodes: budget_search_nodes,
                symmetry: sym.budget(),
            };
            let cert = build_two_coloring(&ps, &budget).map_err(engine_failure)?;
            eprintln!("note: {}", cert.scope);
            emit(&cert, &out)
        }
        Command::Verify { input, sym, out } => {
            let payload = read_payload(&input)?;
            let cert: DistinguishingCertificate = serde_json::from_str(&payload)
                .map_err(|e| Failure::Usage(format!("cannot parse certificate: {e}")))?;
            let space = &cert.space.space;
            if cert.coloring.len() != space.len() {
                return Err(Failure::Negative(format!(
                    "coloring has {} entries for {} points",
                    cert.coloring.len(),
                    space.len()
                )));
            }
            // The group is re-derived from the space and coloring alone;
            // the transcript audit runs after, so a symmetry is always
            // reported as the automorphism that witnesses it.
            let report = space_color_preserving(space, &cert.coloring, &sym.budget())
                .map_err(|e| engine_failure(EngineError::Symmetry(e)))?;
            if !report.is_trivial {
                let witness = report
                    .generators
                    .first()
                    .map(|g| format!("{:?}", g.0))
                    .unwrap_or_default();
                return Err(Failure::Negative(format!(
                    "nontrivial color-preserving automorphism of order-{} group: {witness}",
                    report.order
                )));
            }
            audit_certificate_structure(&cert).map_err(engine_failure)?;
            #[derive(Serialize)]
            struct Verified {
                verified: bool,
                points: usize,
                group_order: u128,
                nodes_explored: u64,
            }
            emit(
                &Verified {
                    verified: true,
                    points: space.len(),
                    group_order: report.order,
                    nodes_explored: report.nodes_explored,
                },
                &out,
            )
        }
        Command::Defeat {
            spectrum,
            space,
            coloring,
            out,
        } => {
            let ps = resolve_spectrum(&spectrum)?;
            let space = resolve_space(&space)?;
            let payload = read_payload(&coloring)?;
            let colors: Vec<usize> = serde_json::from_str(&payload)
                .map_err(|e| Failure::Usage(format!("cannot parse coloring: {e}")))?;
            let report =
                distinguishing_verdict(&ps).map_err(|e| Failure::Negative(e.to_string()))?;
            if report.verdict != Verdict::Omega {
                return Err(Failure::Negative(format!(
                    "the verdict is Two ({}); there is nothing to defeat",
                    report.rationale
                )));
            }
            let defeater = match report.case {
                VerdictCase::NoLimit => defeat_no_limit(&space, &colors, &ps),
                VerdictCase::ZeroLimit => defeat_zero_limit(&space, &colors, &ps),
                VerdictCase::PositiveLimit => unreachable!("positive limits are never Omega"),
            }
            .map_err(engine_failure)?;
            emit(&defeater, &out)
        }
        Command::ExportDot {
            input,
            edge,
            name,
            out,
        } => {
            let payload = read_payload(&input)?;
            let trimmed = payload.trim_start();
            let graph = if trimmed.starts_with("graph") || trimmed.starts_with("strict") {
                SimpleGraph::from_dot(&payload)
                    .map_err(|e| Failure::Usage(format!("cannot parse DOT: {e}")))?
            } else {
                let space = resolve_space(&input)?;
                let s = edge.ok_or_else(|| {
                    Failure::Usage("space input needs --edge to pick the distance".to_owned())
                })?;
                space.distance_graph(s).graph
            };
            write_text(&graph.to_dot(&name), &out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message());
            exit(f.status());
        }
    }
}
