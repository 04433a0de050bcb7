use std::error::Error;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use indexmap::IndexMap;
use serde_json::Value;

use aesthetics_core::analysis::{
    category_distribution, reproducibility_report, usage_report, AnalysisEvent, StudyAnalysis,
};
use aesthetics_core::generator::{element_id, generate_element_set, GeneratorParams, DEFAULT_ELEMENT_COUNT};
use aesthetics_core::metrics::{evaluate_all, evaluate_many, explain};
use aesthetics_core::optimizer::{greedy_refine, optimize_layout, AnnealConfig, Objective};
use aesthetics_core::render::render_svg;
use aesthetics_core::rgt::{Element, Payload, SessionExport};
use aesthetics_core::service::{router, AppState, Store, DATA_DIR_ENV};
use aesthetics_core::{catalog, Drawing, Graph, MetricId};

type CliResult<T = ()> = Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "aesthetics", version, about = "Graph drawing aesthetics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Usage,
    Table,
    Reproducibility,
    Categories,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a set of random graph drawings.
    Generate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ELEMENT_COUNT)]
        count: usize,
        #[arg(long, default_value = "elements")]
        out: PathBuf,
        /// Also write an SVG next to every drawing.
        #[arg(long)]
        svg: bool,
    },
    /// Evaluate every catalog metric on a drawing file.
    Metrics {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Restrict to these metric ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Lay out a graph (or refine a drawing) against weighted metrics.
    Optimize {
        /// Graph or drawing JSON.
        file: PathBuf,
        /// Objective JSON: `{"weights": {...}}` or a bare id → weight map.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// `id=weight`, repeatable; overrides the weights file.
        #[arg(long = "weight")]
        weight: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Render a drawing as SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Usage reports over exported sessions. Each study directory holds
    /// session exports (`*.json`) and optionally `annotations.jsonl`.
    Analyze {
        #[arg(required = true)]
        studies: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Report::Table)]
        report: Report,
        #[arg(long, default_value = "primary")]
        analyst: String,
    },
    /// List the aesthetics catalog.
    Catalog,
    /// Print how one metric is computed.
    Explain { metric: String },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
        data_dir: PathBuf,
    },
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn write(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()).into())
}

/// A drawing file, or an element file whose payload is a drawing.
fn read_drawing(path: &Path) -> CliResult<Drawing> {
    let text = read(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if value.get("payload").is_some() {
        let element: Element = serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))?;
        return match element.payload {
            Payload::Drawing { drawing } => Ok(drawing),
            _ => Err(format!("{}: element is not a drawing", path.display()).into()),
        };
    }
    let d: Drawing = serde_json::from_value(value).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(d)
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult {
    match out {
        Some(p) => write(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn generate(seed: u64, count: usize, out: &Path, svg: bool) -> CliResult {
    let set = generate_element_set(&GeneratorParams::with_seed(seed), count)?;
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    for (i, d) in set.iter().enumerate() {
        let stem = format!("{i:02}-{}", element_id(d));
        write(&out.join(format!("{stem}.json")), &serde_json::to_string_pretty(d)?)?;
        if svg {
            write(&out.join(format!("{stem}.svg")), &render_svg(d))?;
        }
        println!("{stem} nodes={} edges={}", d.graph.node_count(), d.graph.edge_count());
    }
    Ok(())
}

fn metrics(file: &Path, format: Format, only: &[String]) -> CliResult {
    let d = read_drawing(file)?;
    if only.is_empty() {
        let v = evaluate_all(&d)?;
        match format {
            Format::Json => println!("{}", v.to_json()),
            Format::Table => print!("{}", v.to_table()),
        }
        return Ok(());
    }
    let ids = only
        .iter()
        .map(|s| s.parse::<MetricId>().map_err(|_| format!("unknown metric `{s}`")))
        .collect::<Result<Vec<_>, _>>()?;
    let results = evaluate_many(&d, &ids)?;
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&results)?),
        Format::Table => {
            for r in results {
                println!("{:<28} {}", r.id.as_str(), if r.defined { format!("{:.4} {:.4}", r.raw, r.score) } else { "-".into() });
            }
        }
    }
    Ok(())
}

fn objective(weights: Option<&Path>, overrides: &[String]) -> CliResult<Objective> {
    let mut o = match weights {
        Some(p) => {
            let v: Value = serde_json::from_str(&read(p)?)?;
            if v.get("weights").is_some() {
                serde_json::from_value(v)?
            } else {
                Objective {
                    weights: serde_json::from_value(v)?,
                    ..Default::default()
                }
            }
        }
        None if overrides.is_empty() => Objective::default(),
        None => Objective {
            weights: IndexMap::new(),
            ..Default::default()
        },
    };
    for w in overrides {
        let (id, value) = w.split_once('=').ok_or_else(|| format!("expected id=weight, got `{w}`"))?;
        let id: MetricId = id.trim().parse().map_err(|_| format!("unknown metric `{id}`"))?;
        let value: f64 = value.trim().parse().map_err(|_| format!("bad weight `{value}`"))?;
        o.weights.insert(id, value);
    }
    o.validate()?;
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn optimize(
    file: &Path,
    weights: Option<&Path>,
    overrides: &[String],
    seed: u64,
    iterations: Option<usize>,
    out: Option<&Path>,
    svg: Option<&Path>,
) -> CliResult {
    let o = objective(weights, overrides)?;
    let mut config = AnnealConfig::with_seed(seed);
    if let Some(n) = iterations {
        config.max_iterations = n;
    }
    let value: Value = serde_json::from_str(&read(file)?)?;
    let outcome = if value.get("positions").is_some() {
        greedy_refine(&serde_json::from_value::<Drawing>(value)?, &o, &config)?
    } else {
        let g: Graph = serde_json::from_value(value)?;
        g.validate()?;
        optimize_layout(&g, &o, &config)?
    };
    println!("objective {:.6} (start {:.6}, {} iterations)", outcome.value, outcome.start_value, outcome.iterations());
    let ids: Vec<MetricId> = o.weights.keys().copied().collect();
    for r in evaluate_many(&outcome.drawing, &ids)? {
        if r.defined {
            println!("{:<28} raw {:.4} score {:.4}", r.id.as_str(), r.raw, r.score);
        } else {
            println!("{:<28} undefined", r.id.as_str());
        }
    }
    if let Some(p) = out {
        write(p, &serde_json::to_string_pretty(&outcome.drawing)?)?;
    }
    if let Some(p) = svg {
        write(p, &render_svg(&outcome.drawing))?;
    }
    Ok(())
}

fn load_study(dir: &Path) -> CliResult<StudyAnalysis> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let sessions = files
        .iter()
        .map(|p| SessionExport::from_json(&read(p)?).map_err(|e| format!("{}: {e}", p.display()).into()))
        .collect::<CliResult<Vec<_>>>()?;
    let label = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut study = StudyAnalysis::new(&label, sessions);
    let annotations = dir.join("annotations.jsonl");
    if annotations.exists() {
        for (n, line) in read(&annotations)?.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let event: AnalysisEvent =
                serde_json::from_str(line).map_err(|e| format!("{}:{}: {e}", annotations.display(), n + 1))?;
            study
                .apply(&event)
                .map_err(|e| format!("{}:{}: {e}", annotations.display(), n + 1))?;
        }
    }
    Ok(study)
}

fn analyze(dirs: &[PathBuf], report: Report, analyst: &str) -> CliResult {
    let studies = dirs.iter().map(|d| load_study(d)).collect::<CliResult<Vec<_>>>()?;
    match report {
        Report::Table => print!("{}", usage_report(&studies, analyst).render_table()),
        Report::Usage => println!("{}", serde_json::to_string_pretty(&usage_report(&studies, analyst))?),
        Report::Reproducibility => {
            println!("{}", serde_json::to_string_pretty(&reproducibility_report(&studies, analyst))?)
        }
        Report::Categories => {
            println!("{}", serde_json::to_string_pretty(&category_distribution(&studies, analyst))?)
        }
    }
    Ok(())
}

fn print_catalog() {
    println!("{:<28} {:<42} {:<9} novel", "id", "name", "evaluated");
    for e in catalog() {
        println!(
            "{:<28} {:<42} {:<9} {}",
            e.id.as_str(),
            e.display_name,
            if e.evaluated { "yes" } else { "no" },
            if e.novel { "yes" } else { "no" }
        );
    }
}

fn serve(host: std::net::IpAddr, port: u16, data_dir: &Path) -> CliResult {
    let store = Store::open(data_dir).map_err(|e| format!("data directory {}: {e}", data_dir.display()))?;
    let addr = SocketAddr::new(host, port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| format!("cannot listen on {addr}: {e}"))?;
        tracing::info!(%addr, data_dir = %data_dir.display(), "serving");
        axum::serve(listener, router(AppState::new(store)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Generate { seed, count, out, svg } => generate(seed, count, &out, svg),
        Command::Metrics { file, format, only } => metrics(&file, format, &only),
        Command::Optimize {
            file,
            weights,
            weight,
            seed,
            iterations,
            out,
            svg,
        } => optimize(&file, weights.as_deref(), &weight, seed, iterations, out.as_deref(), svg.as_deref()),
        Command::Render { file, out } => emit(out.as_deref(), &render_svg(&read_drawing(&file)?)),
        Command::Analyze {
            studies,
            report,
            analyst,
        } => analyze(&studies, report, &analyst),
        Command::Catalog => {
            print_catalog();
            Ok(())
        }
        Command::Explain { metric } => {
            let id: MetricId = metric.parse().map_err(|_| format!("unknown metric `{metric}`"))?;
            println!("{}", explain(id));
            Ok(())
        }
        Command::Serve { port, host, data_dir } => serve(host, port, &data_dir),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
