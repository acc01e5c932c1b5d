//! Batch front end: each subcommand runs one step of the
//! discover / extract / construct / verify pipeline on JSON files.
//!
//! Exit codes: 0 success (and PASS for verification), 1 usage or input
//! errors, 2 scientific failure (no solution at threshold, failed
//! verification, not a valid emitter).

mod config;
mod export;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use halo_core::halo::constructions::{self, Family};
use halo_core::halo::{extract_halo, validate_template};
use halo_core::io;
use halo_core::optimize::discover;
use halo_core::state_from_graph;
use halo_core::verify::{verify_gate, verify_state};
use halo_core::Graph;

/// Scientific failure: the pipeline ran fine but the physics said no.
#[derive(Debug)]
struct Unsatisfied(String);

impl std::fmt::Display for Unsatisfied {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Unsatisfied {}

#[derive(Parser)]
#[command(
    name = "halo",
    about = "Design and verify post-selected linear-optics experiments on graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Dot,
    Svg,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a graph creating the configured target state.
    Discover {
        /// Job description; see README for the schema.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for graph.json and result.json.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute the post-selected state of a graph.
    State {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fidelity of a graph against a target state.
    Fidelity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        target: PathBuf,
    },
    /// Extract the emitter subgraph a graph adds over a base graph.
    ExtractHalo {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        base: PathBuf,
        /// Main vertices, comma separated, in template order.
        #[arg(long, value_delimiter = ',')]
        main: Vec<usize>,
        /// Ancilla vertices, comma separated; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        ancillas: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expand a hypergraph into a plain graph using a template.
    Expand {
        #[arg(long)]
        hypergraph: PathBuf,
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build one of the generalized experiment families and verify it.
    Construct {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Dimension for ghz, copies for ghz63, half-dimension for swap/cnot.
        #[arg(long)]
        param: usize,
        /// Template override; defaults to the built-in assets.
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a graph against a target state or a gate truth table.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
        /// Gate spec JSON with dimensions and vertex roles.
        #[arg(long)]
        gate: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a graph or hypergraph to dot, svg or canonical json.
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ghz,
    Ghz63,
    Swap,
    Cnot,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Ghz => Family::Ghz,
            FamilyArg::Ghz63 => Family::Ghz63,
            FamilyArg::Swap => Family::Swap,
            FamilyArg::Cnot => Family::Cnot,
        }
    }
}

fn main() -> ExitCode {
    // Usage problems are exit 1; exit 2 is reserved for scientific failure.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<Unsatisfied>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph> {
    io::read_graph(&read(path)?).with_context(|| format!("parsing graph {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Discover { config, out, seed } => {
            let job = config::DiscoverJob::parse(&read(&config)?)
                .with_context(|| format!("parsing config {}", config.display()))?;
            let target = job.target()?;
            let mut cfg = job.optimizer.clone();
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let result = discover(&target, &cfg).map_err(|e| match e {
                halo_core::optimize::OptimizeError::NoSolution { best_fidelity } => {
                    anyhow!(Unsatisfied(format!(
                        "no solution at threshold; best fidelity {best_fidelity}"
                    )))
                }
                other => anyhow!(other),
            })?;
            let graph = job.apply_roles(&result.graph)?;
            std::fs::create_dir_all(&out)?;
            write(&out.join("graph.json"), &io::write_graph(&graph))?;
            write(&out.join("result.json"), &io::write_result(&result))?;
            println!(
                "fidelity {:.12}, {} edges, {} perfect matchings",
                result.fidelity,
                graph.edges().len(),
                result.pm_count
            );
            Ok(())
        }
        Command::State { graph, out } => {
            let g = load_graph(&graph)?;
            let s = state_from_graph(&g)?;
            let rendered = io::write_state(&s);
            match out {
                Some(path) => write(&path, &rendered)?,
                None => print!("{rendered}"),
            }
            Ok(())
        }
        Command::Fidelity { graph, target } => {
            let g = load_graph(&graph)?;
            let t = io::read_target(&read(&target)?)?;
            let f = halo_core::fidelity(&g, &t)?;
            println!("{}", io::fmt_weight(f));
            Ok(())
        }
        Command::ExtractHalo {
            graph,
            base,
            main,
            ancillas,
            out,
        } => {
            let g = load_graph(&graph)?;
            let b = load_graph(&base)?;
            let tpl = extract_halo(&g, &main, &ancillas, &b)
                .map_err(|e| anyhow!(Unsatisfied(e.to_string())))?;
            let report = validate_template(&tpl);
            write(&out, &io::write_template(&tpl))?;
            println!(
                "extracted emitter: emissions {:?}, heralds-only amplitude {}",
                report
                    .emissions
                    .iter()
                    .map(|e| format!("{:?}", e.main_modes))
                    .collect::<Vec<_>>(),
                io::fmt_weight(report.empty_amplitude)
            );
            Ok(())
        }
        Command::Expand {
            hypergraph,
            template,
            out,
        } => {
            let h = io::read_hypergraph(&read(&hypergraph)?)?;
            let tpl = io::read_template(&read(&template)?)?;
            let g = halo_core::expand(&h, &tpl)?;
            write(&out, &io::write_graph(&g))?;
            Ok(())
        }
        Command::Construct {
            family,
            param,
            template,
            out,
        } => {
            let family: Family = family.into();
            let assets = match template {
                Some(path) => constructions::Assets::from_template_json(family, &read(&path)?)?,
                None => constructions::Assets::builtin(family)?,
            };
            let built = constructions::construct(family, param, &assets)?;
            let report = constructions::verify_construction(family, param, &built)?;
            let rendered = {
                let graph_json = io::write_graph(&built);
                let report_json = io::write_report(&report);
                format!(
                    "{{\n  \"graph\": {},\n  \"report\": {}\n}}\n",
                    graph_json.trim_end().replace('\n', "\n  "),
                    report_json.trim_end().replace('\n', "\n  "),
                )
            };
            write(&out, &rendered)?;
            if !report.passed() {
                bail!(Unsatisfied("constructed graph failed verification".into()));
            }
            println!(
                "constructed {} vertices, {} edges: verification PASS",
                built.vertex_count(),
                built.edges().len()
            );
            Ok(())
        }
        Command::Verify {
            graph,
            target,
            gate,
            tol,
            out,
        } => {
            let g = load_graph(&graph)?;
            let report = match (target, gate) {
                (Some(t), None) => {
                    let t = io::read_target(&read(&t)?)?;
                    verify_state(&g, &t, tol)?
                }
                (None, Some(spec)) => {
                    let spec = config::parse_gate_spec(&read(&spec)?)?;
                    verify_gate(&g, &spec, tol)?
                }
                _ => bail!("pass exactly one of --target or --gate"),
            };
            let rendered = io::write_report(&report);
            match out {
                Some(path) => write(&path, &rendered)?,
                None => print!("{rendered}"),
            }
            if !report.passed() {
                bail!(Unsatisfied("verification FAIL".into()));
            }
            Ok(())
        }
        Command::Export { graph, format, out } => {
            let contents = read(&graph)?;
            let rendered = if io::looks_like_hypergraph(&contents) {
                let h = io::read_hypergraph(&contents)?;
                match format {
                    ExportFormat::Dot => export::hypergraph_dot(&h),
                    ExportFormat::Svg => export::hypergraph_svg(&h),
                    ExportFormat::Json => io::write_hypergraph(&h),
                }
            } else {
                let g = io::read_graph(&contents)?;
                match format {
                    ExportFormat::Dot => export::graph_dot(&g),
                    ExportFormat::Svg => export::graph_svg(&g),
                    ExportFormat::Json => io::write_graph(&g),
                }
            };
            write(&out, &rendered)?;
            Ok(())
        }
    }
}
