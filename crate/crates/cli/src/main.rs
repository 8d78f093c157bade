//! `forge`: command-line pipeline for building and querying evidence-centric
//! knowledge bases from plain-text article corpora.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use forge_core::config::{validate_config, RunConfig};
use forge_core::evaluate::{
    answer_question, build_temporal_holdout, evaluate_link_prediction, qa_metrics, read_qa_items,
    LinkPredMethod,
};
use forge_core::extract::{AnswerMode, PromptSet};
use forge_core::graph::{compute_stats, RetrievalFilter};
use forge_core::pipeline::{self, RunPaths};

#[derive(Parser)]
#[command(
    name = "forge",
    version,
    about = "Evidence-centric knowledge base toolkit"
)]
struct Cli {
    /// Run configuration file (TOML); flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed override
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BackendArgs {
    /// Backend name (mock | command)
    #[arg(long)]
    backend: Option<String>,
    /// Fixture directory for the mock backend
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

impl BackendArgs {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(name) = &self.backend {
            config.backend.name = name.clone();
        }
        if let Some(dir) = &self.fixtures {
            config.backend.fixtures = Some(dir.clone());
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a corpus directory into a documents artifact
    Ingest {
        /// Directory of <stem>.txt bodies with <stem>.json metadata
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract candidate evidence from an ingested documents artifact
    Extract {
        /// The documents artifact produced by `ingest`
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        disease: Option<String>,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolve entity mentions against a vocabulary
    Normalize {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score normalized candidates into full evidence records
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect and merge duplicate records
    Fuse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Merge log output
        #[arg(long)]
        report: PathBuf,
    },
    /// Induce typed evidence-to-evidence relations
    Relate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Verify ambiguous or highly similar pairs with the backend
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Build the graph from fused records and relation edges
    Build {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also rewrite the records with relation identifiers filled
        #[arg(long)]
        records_out: Option<PathBuf>,
    },
    /// Print release statistics for a graph file
    Stats {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Rank evidence contexts against a free-text query
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        text: String,
        #[arg(short = 'k', long, default_value_t = 5)]
        k: usize,
        /// Keep only records with composite score at or above this value
        #[arg(long)]
        min_score: Option<f64>,
    },
    /// Neighborhood-overlap proximity between two nodes
    Proximity {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Run the whole pipeline from a configuration file
    Run {
        /// Output directory for stage artifacts and the manifest
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Evaluation harnesses
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Temporal future-link prediction over a training graph
    Linkpred {
        #[arg(long)]
        graph: PathBuf,
        /// Future evidence records (JSON array)
        #[arg(long)]
        future: PathBuf,
        /// sp | feat | n2v
        #[arg(long)]
        method: String,
        #[arg(long)]
        negative_ratio: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Retrieval-augmented yes/no question answering
    Qa {
        #[arg(long)]
        graph: PathBuf,
        /// QA items (JSON array)
        #[arg(long)]
        qa: PathBuf,
        /// baseline | evidence | evidence+background
        #[arg(long)]
        mode: String,
        #[command(flatten)]
        backend: BackendArgs,
        /// Contexts retrieved per question
        #[arg(short = 'k', long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, serde::Serialize)]
struct CliError {
    stage: String,
    message: String,
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => validate_config(path).map_err(|e| CliError {
            stage: "config".into(),
            message: e.to_string(),
        })?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    Ok(config)
}

fn pipeline_err(e: pipeline::PipelineError) -> CliError {
    CliError {
        stage: e.stage.to_string(),
        message: e.to_string(),
    }
}

fn other_err(stage: &str, e: impl std::fmt::Display) -> CliError {
    CliError {
        stage: stage.into(),
        message: e.to_string(),
    }
}

fn load_graph(stage: &str, path: &Path) -> Result<forge_core::graph::EvidenceGraph, CliError> {
    forge_core::graph::deserialize(path).map_err(|e| other_err(stage, e))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = load_config(&cli)?;
    match cli.command {
        Command::Ingest { corpus, out } => {
            config.run.corpus = Some(corpus);
            let summary = pipeline::stage_ingest(&config, &out).map_err(pipeline_err)?;
            println!("ingested {} documents -> {}", summary.count, out.display());
        }
        Command::Extract {
            corpus,
            disease,
            backend,
            out,
        } => {
            backend.apply(&mut config);
            if let Some(d) = disease {
                config.run.disease = d;
            }
            let llm = config
                .build_backend()
                .map_err(|e| other_err("extract", e))?;
            let prompts = PromptSet::builtin();
            let summary = pipeline::stage_extract(&config, llm.as_ref(), &prompts, &corpus, &out)
                .map_err(pipeline_err)?;
            println!(
                "extracted {} candidates -> {}",
                summary.count,
                out.display()
            );
        }
        Command::Normalize { vocab, input, out } => {
            config.run.vocabulary = Some(vocab);
            let summary = pipeline::stage_normalize(&config, &input, &out).map_err(pipeline_err)?;
            println!(
                "normalized {} candidates -> {}",
                summary.count,
                out.display()
            );
        }
        Command::Score { input, out } => {
            let summary = pipeline::stage_score(&config, &input, &out).map_err(pipeline_err)?;
            println!("scored {} records -> {}", summary.count, out.display());
        }
        Command::Fuse { input, out, report } => {
            let encoder = config.build_encoder().map_err(|e| other_err("fuse", e))?;
            let summary = pipeline::stage_fuse(&config, encoder.as_ref(), &input, &out, &report)
                .map_err(pipeline_err)?;
            println!("fused to {} records -> {}", summary.count, out.display());
        }
        Command::Relate {
            input,
            out,
            verify,
            backend,
        } => {
            backend.apply(&mut config);
            config.relation.verify = verify || config.relation.verify;
            let encoder = config.build_encoder().map_err(|e| other_err("relate", e))?;
            let prompts = PromptSet::builtin();
            let llm = if config.relation.verify {
                Some(config.build_backend().map_err(|e| other_err("relate", e))?)
            } else {
                None
            };
            let verifier = llm.as_deref().map(|b| (b, &prompts));
            let summary = pipeline::stage_relate(&config, encoder.as_ref(), verifier, &input, &out)
                .map_err(pipeline_err)?;
            println!("induced {} relations -> {}", summary.count, out.display());
        }
        Command::Build {
            records,
            edges,
            out,
            records_out,
        } => {
            let records_out =
                records_out.unwrap_or_else(|| out.with_file_name("records_final.json"));
            let summary = pipeline::stage_build(&config, &records, &edges, &out, &records_out)
                .map_err(pipeline_err)?;
            println!(
                "built graph with {} nodes+edges -> {}",
                summary.count,
                out.display()
            );
        }
        Command::Stats { graph, format } => {
            let g = load_graph("stats", &graph)?;
            let stats = compute_stats(&g);
            match format.as_str() {
                "table" => print!("{}", stats.to_table()),
                "csv" => print!("{}", stats.to_csv()),
                other => {
                    return Err(other_err("stats", format!("unknown format {other:?}")));
                }
            }
        }
        Command::Query {
            graph,
            text,
            k,
            min_score,
        } => {
            let g = load_graph("query", &graph)?;
            let encoder = config.build_encoder().map_err(|e| other_err("query", e))?;
            let filter = RetrievalFilter {
                min_score,
                ..Default::default()
            };
            for hit in g.retrieve_context(&text, k, encoder.as_ref(), &filter) {
                println!(
                    "{}\t{:.4}\t{}",
                    hit.evidence_id, hit.similarity, hit.context
                );
            }
        }
        Command::Proximity { graph, a, b } => {
            let g = load_graph("proximity", &graph)?;
            let p = g.proximity(&a, &b).map_err(|e| other_err("proximity", e))?;
            println!("{p:.6}");
        }
        Command::Run { out_dir } => {
            let (graph, _manifest) =
                pipeline::run_pipeline(&config, cli.config.as_deref(), &out_dir)
                    .map_err(pipeline_err)?;
            let paths = RunPaths::in_dir(&out_dir);
            println!(
                "pipeline complete: {} nodes, {} edges -> {}",
                graph.node_count(),
                graph.edge_count(),
                paths.graph.display()
            );
        }
        Command::Eval(eval) => run_eval(eval, &mut config)?,
    }
    Ok(())
}

fn run_eval(eval: EvalCommand, config: &mut RunConfig) -> Result<(), CliError> {
    const STAGE: &str = "eval";
    match eval {
        EvalCommand::Linkpred {
            graph,
            future,
            method,
            negative_ratio,
            out,
        } => {
            let g = load_graph(STAGE, &graph)?;
            let future_records =
                forge_core::record::read_records(&future).map_err(|e| other_err(STAGE, e))?;
            let method: LinkPredMethod = method.parse().map_err(|e| other_err(STAGE, e))?;
            let ratio = negative_ratio.unwrap_or(config.evaluation.negative_ratio);
            let holdout = build_temporal_holdout(&g, &future_records, ratio, config.run.seed)
                .map_err(|e| other_err(STAGE, e))?;
            let encoder = config.build_encoder().map_err(|e| other_err(STAGE, e))?;
            let report = evaluate_link_prediction(
                &g,
                &holdout,
                method,
                encoder.as_ref(),
                &config.evaluation.node2vec,
                config.run.seed,
            )
            .map_err(|e| other_err(STAGE, e))?;
            let csv = format!(
                "{}\n{}\n",
                forge_core::evaluate::LinkPredReport::csv_header(),
                report.to_csv_row()
            );
            emit(out.as_deref(), &csv).map_err(|e| other_err(STAGE, e))?;
            if let Some(importances) = &report.feature_importances {
                for (name, value) in importances {
                    eprintln!("importance\t{name}\t{value:.4}");
                }
            }
            eprintln!("cold-start pairs skipped: {}", report.cold_start_skipped);
        }
        EvalCommand::Qa {
            graph,
            qa,
            mode,
            backend,
            k,
            out,
        } => {
            backend.apply(config);
            let g = load_graph(STAGE, &graph)?;
            let mode: AnswerMode = mode.parse().map_err(|e| other_err(STAGE, e))?;
            let items = read_qa_items(&qa).map_err(|e| other_err(STAGE, e))?;
            let llm = config.build_backend().map_err(|e| other_err(STAGE, e))?;
            let encoder = config.build_encoder().map_err(|e| other_err(STAGE, e))?;
            let prompts = PromptSet::builtin();
            let mut answered = Vec::with_capacity(items.len());
            for item in &items {
                let contexts: Vec<String> = if mode == AnswerMode::Baseline {
                    Vec::new()
                } else {
                    g.retrieve_context(
                        &item.question,
                        k,
                        encoder.as_ref(),
                        &RetrievalFilter::default(),
                    )
                    .into_iter()
                    .map(|h| h.context)
                    .collect()
                };
                let done = answer_question(item, &contexts, mode, llm.as_ref(), &prompts)
                    .map_err(|e| other_err(STAGE, e))?;
                answered.push(done);
            }
            let metrics =
                qa_metrics(&answered, encoder.as_ref()).map_err(|e| other_err(STAGE, e))?;
            let csv = format!(
                "mode,accuracy,semsim\n{mode},{:.6},{:.6}\n",
                metrics.accuracy, metrics.semantic_similarity
            );
            emit(out.as_deref(), &csv).map_err(|e| other_err(STAGE, e))?;
        }
    }
    Ok(())
}

fn emit(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // die quietly when stdout is closed mid-stream (e.g. `forge query | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            let payload = serde_json::json!({ "error": error });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
