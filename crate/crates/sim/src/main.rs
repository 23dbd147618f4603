use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use deepie_core::{Canvas, EvolutionParams};
use deepie_sim::remote::ServiceClient;
use deepie_sim::run::Prepared;
use deepie_sim::{
    parse_seeds, run_experiment, summarize, AutoSelector, ExperimentConfig, GeneratorChoice, Results, Schedule,
    TargetSpec,
};

/// Scripted runs of the latent evolution loop against a target image.
#[derive(Debug, Parser)]
#[command(name = "deepie-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one trajectory per seed and write them as JSON.
    Simulate(SimulateArgs),
    /// Reduce a results file to summary statistics.
    Summarize(SummarizeArgs),
}

#[derive(Debug, clap::Args)]
struct SimulateArgs {
    /// `procedural` or a path to a weight file.
    #[arg(long, default_value = "procedural")]
    generator: String,
    /// `latent:<seed>` or `image:<path>`.
    #[arg(long, default_value = "latent:0")]
    target: TargetSpec,
    #[arg(long, default_value_t = 10)]
    generations: usize,
    /// Images kept per round; 1 selects by best likeness alone.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// `linear:START:END`, `const:V` or `list:V1,V2,...`.
    #[arg(long, default_value = "linear:0.5:0.1")]
    schedule: Schedule,
    /// A count `N` (seeds 0..N) or a comma-separated list.
    #[arg(long, default_value = "50")]
    seeds: String,
    /// Procedural canvas as WIDTHxHEIGHT.
    #[arg(long, default_value = "32x32")]
    canvas: String,
    /// Population size.
    #[arg(long)]
    m: Option<usize>,
    /// Latent length; defaults to 20 for the procedural generator and to the model's input size otherwise.
    #[arg(long)]
    n: Option<usize>,
    /// Drive a running service at this base URL instead of evolving in-process.
    #[arg(long)]
    service: Option<String>,
    /// Model id on the service; defaults to `procedural` or the weight file's stem.
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long, default_value = "results.json")]
    out: PathBuf,
}

#[derive(Debug, clap::Args)]
struct SummarizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Histogram spec, `bins=N`.
    #[arg(long, default_value = "bins=10")]
    hist: String,
    /// Also write the histogram as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_canvas(s: &str) -> anyhow::Result<Canvas> {
    let (w, h) = s.split_once('x').context("canvas must be WIDTHxHEIGHT")?;
    Ok(Canvas { width: w.parse()?, height: h.parse()? })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let mut canvas = parse_canvas(&args.canvas)?;
    let generator = if args.generator == "procedural" {
        GeneratorChoice::Procedural { canvas }
    } else {
        GeneratorChoice::Weights { path: args.generator.clone().into() }
    };
    let model_id = args.model_id.clone().unwrap_or_else(|| match &generator {
        GeneratorChoice::Procedural { .. } => "procedural".into(),
        GeneratorChoice::Weights { path } => {
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        }
    });
    let client = args.service.as_deref().map(ServiceClient::new);
    if let (Some(client), GeneratorChoice::Procedural { .. }) = (&client, &generator) {
        let shape = client.model_shape(&model_id)?;
        canvas = Canvas { width: shape.width, height: shape.height };
    }
    let generator = match generator {
        GeneratorChoice::Procedural { .. } => GeneratorChoice::Procedural { canvas },
        other => other,
    };

    let mut params = EvolutionParams::default();
    if let Some(m) = args.m {
        params.m = m;
    }
    let mut config = ExperimentConfig {
        generator,
        target: args.target,
        generations: args.generations,
        selector: if args.k == 1 { AutoSelector::BestLikeness } else { AutoSelector::NearestK { k: args.k } },
        schedule: args.schedule,
        seeds: parse_seeds(&args.seeds)?,
        params,
    };
    if let GeneratorChoice::Weights { path } = &config.generator {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        config.params.n = deepie_core::generator::read_header(&bytes)
            .with_context(|| format!("reading header of {}", path.display()))?
            .latent_dim;
    }
    if let Some(n) = args.n {
        config.params.n = n;
    }

    let trajectories = match client {
        None => run_experiment(&config)?,
        Some(client) => {
            let prepared = Prepared::new(config.clone())?;
            let mut trajectories = Vec::new();
            for &seed in &config.seeds {
                let run = client.run(&model_id, &prepared, seed)?;
                eprintln!(
                    "seed {seed}: session {} review {} images, service ratio {}",
                    run.session_id, run.review_size, run.service_ratio
                );
                trajectories.push(run.trajectory);
            }
            trajectories
        }
    };
    let results = Results { config, trajectories };
    write_json(&args.out, &results)?;
    eprintln!("wrote {} trajectories to {}", results.trajectories.len(), args.out.display());
    Ok(())
}

fn summarize_cmd(args: SummarizeArgs) -> anyhow::Result<()> {
    let bins: usize = args
        .hist
        .strip_prefix("bins=")
        .and_then(|n| n.parse().ok())
        .context("--hist must be bins=N")?;
    let file = File::open(&args.input).with_context(|| format!("opening {}", args.input.display()))?;
    let results: Results = serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("parsing {}", args.input.display()))?;
    let Some(summary) = summarize(&results.trajectories, bins) else {
        bail!("need at least one trajectory and one bin");
    };
    match &args.out {
        Some(path) => write_json(path, &summary)?,
        None => println!("{}", serde_json::to_string_pretty(&summary)?),
    }
    if let Some(path) = &args.csv {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        summary.write_csv(BufWriter::new(file))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Simulate(args) => simulate(args),
        Command::Summarize(args) => summarize_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
