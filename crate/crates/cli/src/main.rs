mod args;

use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;

use convgraph::corpus::DatasetSpec;
use convgraph::embed::{EmbedConfig, Method};
use convgraph::features::FeatureConfig;
use convgraph::pipeline::{self, DevSplit, PipelineConfig, Source};
use convgraph::{Error, ErrorKind, Result};

use args::{parse_features, parse_methods, Cli, Command};

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("convgraph: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("convgraph: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("convgraph: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn required<'a>(path: &'a Option<std::path::PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidParameter(format!("--{flag} is required")))
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Synth { out, synth } => {
            let mut p = pipeline::default_synth(seed);
            synth.apply(&mut p);
            let n = pipeline::stage_synth(&p, out)?;
            eprintln!("wrote {n} messages to {}", out.display());
        }
        Command::Extract {
            input,
            targets,
            dataset_out,
            dev_out,
            out,
            dataset,
            extract,
        } => {
            let cfg = extract.config();
            cfg.validate()?;
            let mut spec = DatasetSpec {
                seed,
                ..PipelineConfig::default().dataset
            };
            dataset.apply(&mut spec, cfg.context_period);
            let dev = match (dataset.dev_fraction, dev_out) {
                (Some(f), Some(p)) if f > 0.0 => Some(DevSplit { fraction: f, out: p }),
                (Some(f), None) if f > 0.0 => {
                    return Err(Error::InvalidParameter("--dev-fraction needs --dev-out".into()))
                }
                _ => None,
            };
            let n = pipeline::stage_extract(input, targets.as_deref(), &spec, dev, &cfg, dataset_out.as_deref(), out)?;
            eprintln!("wrote {n} graphs to {}", out.display());
        }
        Command::Features {
            graphs,
            out,
            features,
            feature,
        } => {
            let mut cfg = FeatureConfig {
                modularity_seed: seed,
                ..FeatureConfig::default()
            };
            if let Some(d) = feature.damping {
                cfg.pagerank_damping = d;
            }
            let names = parse_features(features);
            if names.is_empty() {
                return Err(Error::InvalidParameter("no measure selected".into()));
            }
            let n = pipeline::stage_features(graphs, &names, &cfg, out)?;
            eprintln!("wrote {n} measures per graph to {}", out.display());
        }
        Command::Embed {
            graphs,
            method,
            out,
            show_config,
            embed,
        } => {
            let method: Method = method.parse()?;
            let mut cfg = EmbedConfig {
                seed,
                ..EmbedConfig::default()
            };
            embed.apply(&mut cfg, &[method]);
            cfg.validate(method)?;
            if *show_config {
                return print_json(&serde_json::json!({
                    "method": method.name(),
                    "seed": seed,
                    "output_dim": cfg.output_dim(method),
                    "params": method_params(&cfg, method)?,
                }));
            }
            let d = pipeline::stage_embed(required(graphs, "graphs")?, method, &cfg, required(out, "out")?)?;
            eprintln!("wrote {d}-dimensional {} embeddings", method.display_name());
        }
        Command::Train {
            graphs,
            features,
            embeddings,
            out,
            svm,
        } => {
            let m = pipeline::stage_train(graphs, features.as_deref(), embeddings.as_deref(), &svm.params()?, out)?;
            eprintln!("{} support vectors after {} iterations", m.support.len(), m.iterations);
        }
        Command::Evaluate {
            graphs,
            features,
            embeddings,
            out_dir,
            svm,
        } => {
            let ev = pipeline::stage_evaluate(graphs, features.as_deref(), embeddings, seed, &svm.params()?, out_dir)?;
            for (name, r) in &ev.results {
                println!("{name}\t{:.4}\t{:.4}", r.mean, r.std);
            }
        }
        Command::Ablate {
            graphs,
            features,
            embeddings,
            measures,
            out_dir,
            svm,
        } => {
            let names = parse_features(measures.as_deref().unwrap_or("top"));
            let rep = pipeline::stage_ablate(graphs, features, &names, embeddings, seed, &svm.params()?, out_dir)?;
            for c in &rep.cells {
                println!("{}\t{}\t{:+.4}\t{:.4}\t{}", c.method, c.feature, c.delta_f, c.p_value, c.verdict.as_str());
            }
        }
        Command::Report { dir } => {
            pipeline::stage_report(dir)?;
            eprintln!("wrote report files to {}", dir.display());
        }
        Command::Pipeline {
            out,
            synth,
            input,
            methods,
            features,
            no_ablate,
            resume,
            show_config,
            synth_args,
            dataset,
            extract,
            feature,
            embed,
            svm,
        } => {
            let mut cfg = PipelineConfig::default();
            cfg.set_seed(seed);
            synth_args.apply(&mut cfg.synth);
            cfg.extract = extract.config();
            dataset.apply(&mut cfg.dataset, cfg.extract.context_period);
            if let Some(f) = dataset.dev_fraction {
                cfg.dev_fraction = f;
            }
            if let Some(d) = feature.damping {
                cfg.features.pagerank_damping = d;
            }
            cfg.feature_names = parse_features(features);
            cfg.methods = parse_methods(methods)?;
            embed.apply(&mut cfg.embed, &cfg.methods);
            cfg.svm = svm.params()?;
            cfg.ablate = !no_ablate && !cfg.feature_names.is_empty();
            cfg.validate()?;
            if *show_config {
                return print_json(&cfg);
            }
            let source = match input {
                Some(p) => Source::File(p.clone()),
                None if *synth => Source::Synth,
                None => return Err(Error::InvalidParameter("pipeline needs --synth or --input".into())),
            };
            let outcome = pipeline::run_pipeline(&source, &cfg, out, *resume)?;
            if !outcome.skipped.is_empty() {
                eprintln!("skipped up-to-date stages: {}", outcome.skipped.join(", "));
            }
            for (name, r) in &outcome.evaluation.results {
                println!("{name}\t{:.4}\t{:.4}", r.mean, r.std);
            }
            eprintln!("results in {}", out.join("results").display());
        }
    }
    Ok(())
}

fn method_params(cfg: &EmbedConfig, method: Method) -> Result<serde_json::Value> {
    Ok(match method {
        Method::Sf => serde_json::to_value(&cfg.sf)?,
        Method::Fgsd => serde_json::to_value(&cfg.fgsd)?,
        Method::Graph2vec => serde_json::to_value(&cfg.graph2vec)?,
        Method::DeepWalk => serde_json::to_value(&cfg.deepwalk)?,
        Method::Node2vec => serde_json::to_value(&cfg.node2vec)?,
        Method::Walklets => serde_json::to_value(&cfg.walklets)?,
        Method::BoostNe => serde_json::to_value(&cfg.boostne)?,
        Method::GraphWave => serde_json::to_value(&cfg.graphwave)?,
    })
}
