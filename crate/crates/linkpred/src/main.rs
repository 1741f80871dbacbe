use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use linkpred::config::parse_override;
use linkpred::protocol::{self, PredictRequest, RunSummary};
use linkpred::{ExperimentConfig, Protocol};

/// Link prediction experiments on interaction graphs.
#[derive(Debug, Parser)]
#[command(name = "linkpred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on one release, select on the next, evaluate on the last.
    Retrospective {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        releases: Releases,
    },
    /// Random train/validation/test split of one release.
    Holdout {
        #[command(flatten)]
        common: Common,
        /// Edge list of the release.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Repeated stratified k-fold cross-validation on one release.
    Crossval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Rank every non-edge of a graph with a saved embedding table.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Embedding table written by a run or by export-embeddings.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Output CSV; defaults to predictions.csv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Validation and test AUROC over the propagation factor grid.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        releases: Releases,
        /// retrospective or holdout; defaults to the config file's protocol.
        #[arg(long)]
        protocol: Option<Protocol>,
        /// Single release, for the holdout protocol.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Train on a whole release and write node embeddings.
    ExportEmbeddings {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Propagate the factors before writing.
        #[arg(long)]
        alpha: Option<f64>,
        /// Output TSV; defaults to embeddings.tsv in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    top_n: Option<usize>,
    /// Pairs to leave out of the evaluated candidates.
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// Any config key, as key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    set: Vec<(String, String)>,
}

#[derive(Debug, Args)]
struct Releases {
    /// Earliest release.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Middle release; omit to hold out part of the earliest one instead.
    #[arg(long)]
    validation: Option<PathBuf>,
    /// Latest release.
    #[arg(long)]
    test: Option<PathBuf>,
}

fn path_override(key: &str, p: &Option<PathBuf>) -> Option<(String, String)> {
    p.as_ref().map(|p| (key.to_string(), p.display().to_string()))
}

impl Common {
    fn config(&self, protocol: Option<Protocol>, extra: Vec<(String, String)>) -> Result<ExperimentConfig> {
        let mut overrides = Vec::new();
        if let Some(p) = protocol {
            overrides.push(("protocol".to_string(), p.name().to_string()));
        }
        overrides.extend(self.set.iter().cloned());
        let flags = [
            self.seed.map(|v| ("seed".to_string(), v.to_string())),
            self.workers.map(|v| ("workers".to_string(), v.to_string())),
            self.top_n.map(|v| ("top_n".to_string(), v.to_string())),
            path_override("out_dir", &self.out_dir),
            path_override("exclusions", &self.exclusions),
        ];
        overrides.extend(flags.into_iter().flatten());
        overrides.extend(extra);
        let cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path, &overrides),
            None => ExperimentConfig::from_text("", &overrides),
        };
        cfg.context("invalid configuration")
    }
}

impl Releases {
    fn overrides(&self) -> Vec<(String, String)> {
        [
            path_override("train", &self.train),
            path_override("validation", &self.validation),
            path_override("test", &self.test),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

fn print_summary(summary: &RunSummary) {
    match summary {
        RunSummary::TwoStage(s) => {
            println!(
                "selected model settings {} with alpha {} (validation AUROC {:.4})",
                s.selected_config, s.alpha, s.validation_auroc
            );
            for (name, auroc, aupr) in &s.test {
                println!("{name:<10} AUROC {auroc:.4}  AUPR {aupr:.4}");
            }
            println!("artifacts in {}", s.out_dir.display());
        }
        RunSummary::Crossval(s) => {
            for (name, am, asd, pm, psd) in &s.means {
                println!("{name:<10} AUROC {am:.4} ± {asd:.4}  AUPR {pm:.4} ± {psd:.4}");
            }
            println!("artifacts in {}", s.out_dir.display());
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Retrospective { common, releases } => {
            let cfg = common.config(Some(Protocol::Retrospective), releases.overrides())?;
            print_summary(&protocol::run(&cfg)?);
        }
        Command::Holdout { common, graph } => {
            let cfg = common.config(Some(Protocol::Holdout), path_override("graph", &graph).into_iter().collect())?;
            print_summary(&protocol::run(&cfg)?);
        }
        Command::Crossval { common, graph, folds } => {
            let mut extra: Vec<_> = path_override("graph", &graph).into_iter().collect();
            extra.extend(folds.map(|f| ("folds".to_string(), f.to_string())));
            let cfg = common.config(Some(Protocol::Crossval), extra)?;
            print_summary(&protocol::run(&cfg)?);
        }
        Command::Predict {
            common,
            model,
            graph,
            output,
        } => {
            let cfg = common.config(None, Vec::new())?;
            let req = PredictRequest {
                model,
                graph,
                delimiter: cfg.delimiter,
                exclusions: cfg.exclusions.clone(),
                top_n: cfg.top_n,
                output: output.unwrap_or_else(|| cfg.out_dir.join("predictions.csv")),
            };
            if let Some(dir) = req.output.parent().filter(|d| !d.as_os_str().is_empty()) {
                linkpred::io::create_dir(dir)?;
            }
            let rows = linkpred::parallel::with_workers(cfg.workers, || protocol::run_predict(&req))??;
            println!("wrote {} predictions to {}", rows.len(), req.output.display());
        }
        Command::SweepAlpha {
            common,
            releases,
            protocol: proto,
            graph,
        } => {
            let mut extra = releases.overrides();
            extra.extend(path_override("graph", &graph));
            let cfg = common.config(proto, extra)?;
            let sweep = linkpred::parallel::with_workers(cfg.workers, || protocol::propagation_sweep(&cfg))??;
            println!("{:>6}  {:>15}  {:>9}", "alpha", "validation AUROC", "test AUROC");
            for (a, v, t) in sweep {
                println!("{a:>6.2}  {v:>16.4}  {t:>9.4}");
            }
            println!("wrote {}", cfg.out_dir.join("alpha_sweep.csv").display());
        }
        Command::ExportEmbeddings {
            common,
            graph,
            alpha,
            output,
        } => {
            let cfg = common.config(None, path_override("graph", &graph).into_iter().collect())?;
            let graph = cfg.graph.clone().context("--graph is required")?;
            let output = output.unwrap_or_else(|| cfg.out_dir.join("embeddings.tsv"));
            linkpred::parallel::with_workers(cfg.workers, || protocol::export_embeddings(&cfg, &graph, alpha, &output))??;
            println!("wrote {}", output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Most errors already quote their cause; print only causes that add text.
            let mut message = e.to_string();
            for cause in e.chain().skip(1) {
                let text = cause.to_string();
                if !message.contains(&text) {
                    message = format!("{message}: {text}");
                }
            }
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
