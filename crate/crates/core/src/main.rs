use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use odelearn::harness::{
    fit_results, read_results, reference_rate, run_experiment, snake_fit_config, stubble_default_bandwidth,
    write_plot, write_report, write_results, ExperimentConfig, Overrides,
};
use odelearn::localpoly::Kernel;
use odelearn::odeflow::field::by_name;
use odelearn::odeflow::io::{read_meta, read_observations, write_meta, write_observations, DatasetMeta};
use odelearn::odeflow::{FlowConfig, NoiseKind, NoiseSpec};
use odelearn::snake::{self, fit_curve, Provenance, SnakeDataset, StencilConfig};
use odelearn::stubble::{self, LocalPolyRegressor, StubbleDataset};
use odelearn::{Error, Result};

#[derive(Parser)]
#[command(name = "odelearn", version, about = "Estimate ODE right-hand sides from noisy trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Stubble,
    Snake,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Lip,
    Gen,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset: observations CSV plus metadata JSON.
    Simulate {
        #[arg(long, value_enum)]
        model: Family,
        #[arg(long)]
        field: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        beta: usize,
        /// Total number of observations (stubble: rounded to a grid).
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dt: f64,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value = "gaussian", value_parser = parse_noise)]
        noise: NoiseKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Snake initial condition, comma separated.
        #[arg(long, value_parser = parse_coords)]
        x1: Option<Coords>,
        #[arg(long)]
        out: PathBuf,
        /// Metadata path; defaults to the CSV path with a `.json` extension.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Estimate f at query points from one dataset.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "lip")]
        estimator: Estimator,
        /// Query points `x,y;x,y`.
        #[arg(long)]
        queries: String,
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        bandwidth_constant: f64,
        #[arg(long, default_value = "epanechnikov", value_parser = parse_kernel)]
        kernel: Kernel,
        /// Disable the nearest-neighbour fallback of the general snake estimator.
        #[arg(long)]
        no_fallback: bool,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full Monte Carlo rate study.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Sample sizes, comma separated.
        #[arg(long, value_parser = parse_sizes)]
        ns: Option<Sizes>,
        #[arg(long)]
        bandwidth_constant: Option<f64>,
        /// Directory receiving results.csv, report.json and plot.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit rate slopes from a results CSV.
    Rates {
        #[arg(long)]
        results: PathBuf,
        /// Config used to look up the reference exponent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_noise(s: &str) -> std::result::Result<NoiseKind, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown noise kind '{s}'"))
}

fn parse_kernel(s: &str) -> std::result::Result<Kernel, String> {
    Kernel::parse(s).ok_or_else(|| format!("unknown kernel '{s}'"))
}

fn parse_vec(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|c| c.trim().parse::<f64>().map_err(|e| format!("'{c}': {e}"))).collect()
}

fn parse_points(s: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(parse_vec).collect()
}

// Single-valued wrappers: clap reads a bare `Vec` as a repeated argument.
#[derive(Debug, Clone)]
struct Coords(Vec<f64>);

#[derive(Debug, Clone)]
struct Sizes(Vec<usize>);

fn parse_coords(s: &str) -> std::result::Result<Coords, String> {
    parse_vec(s).map(Coords)
}

fn parse_sizes(s: &str) -> std::result::Result<Sizes, String> {
    s.split(',').map(|c| c.trim().parse::<usize>().map_err(|e| format!("'{c}': {e}"))).collect::<std::result::Result<_, _>>().map(Sizes)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { model, field, d, beta, n, dt, sigma, noise, seed, x1, out, meta } => {
            let f = by_name(&field, d)?.with_beta(beta)?;
            let spec = NoiseSpec { kind: noise, sigma, seed };
            let cfg = FlowConfig::default();
            let (obs, initials, name) = match model {
                Family::Stubble => {
                    let n0 = ((n as f64 / beta as f64).powf(1.0 / d as f64).round() as usize).max(2);
                    let ds = stubble::generate_stubble(&f, n0, dt, beta, &spec, &cfg)?;
                    (ds.to_observations(), ds.initials, "stubble")
                }
                Family::Snake => {
                    let Coords(x1) = x1.ok_or_else(|| Error::InvalidInput("snake simulation needs --x1".into()))?;
                    let ds = snake::generate_snake(&f, &x1, n, dt, beta, &spec, &cfg)?;
                    (snake::snake_observations(&ds), vec![x1], "snake")
                }
            };
            write_observations(BufWriter::new(File::create(&out)?), d, &obs)?;
            let meta_path = meta.unwrap_or_else(|| out.with_extension("json"));
            let record = DatasetMeta {
                model: name.into(),
                field,
                d,
                beta,
                dt,
                sigma,
                noise,
                seed,
                initials,
            };
            write_meta(&meta_path, &record)?;
            eprintln!("wrote {} observations to {}", obs.len(), out.display());
            Ok(())
        }
        Command::Estimate {
            data,
            meta,
            estimator,
            queries,
            bandwidth,
            bandwidth_constant,
            kernel,
            no_fallback,
            out,
        } => {
            let queries = parse_points(&queries).map_err(Error::InvalidInput)?;
            let meta = read_meta(&meta.unwrap_or_else(|| data.with_extension("json")))?;
            let (d, obs) = read_observations(File::open(&data)?)?;
            if d != meta.d || queries.iter().any(|q| q.len() != d) {
                return Err(Error::InvalidInput(format!("data, metadata and queries must all have dimension {}", meta.d)));
            }
            let f = by_name(&meta.field, d)?.with_beta(meta.beta)?;
            let sigma = NoiseSpec { kind: meta.noise, sigma: meta.sigma, seed: 0 }.effective_sigma();
            let overrides = Overrides { bandwidth_constant, bandwidth, kernel, fallback: !no_fallback, ..Overrides::default() };
            let mut rows = Vec::with_capacity(queries.len());
            match meta.model.as_str() {
                "stubble" => {
                    let ds = StubbleDataset::from_observations(meta.initials.clone(), meta.beta, meta.dt, &obs)?;
                    let h = match bandwidth {
                        Some(h) => h,
                        None => stubble_default_bandwidth(&ds, sigma, f.lipschitz(), bandwidth_constant)?,
                    };
                    let reg = LocalPolyRegressor::for_beta(meta.beta, h, kernel);
                    for q in &queries {
                        let v = match estimator {
                            Estimator::Lip => stubble::estimate_lipschitz(q, &ds, h, kernel)?,
                            Estimator::Gen => stubble::estimate_general(q, &ds, &reg)?,
                        };
                        rows.push((v, "regression"));
                    }
                }
                "snake" => {
                    let ds = snake_dataset(&meta, obs)?;
                    let curve = fit_curve(&ds, meta.beta, &snake_fit_config(&f, meta.beta, sigma, &overrides))?;
                    let stencil = StencilConfig::for_beta(meta.beta, d);
                    for q in &queries {
                        rows.push(match estimator {
                            Estimator::Lip => (snake::estimate_lipschitz(q, &curve), "nearest"),
                            Estimator::Gen => {
                                let e = snake::estimate_general(q, &curve, &stencil, overrides.fallback)?;
                                let tag = if e.provenance == Provenance::Fallback { "fallback" } else { "interpolated" };
                                (e.value, tag)
                            }
                        });
                    }
                }
                other => return Err(Error::InvalidInput(format!("unknown dataset model '{other}'"))),
            }
            let sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(io::stdout().lock()),
            };
            write_estimates(sink, &queries, &rows)
        }
        Command::Benchmark { config, seed, replicates, sigma, ns, bandwidth_constant, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if let Some(s) = sigma {
                cfg.sigma = s;
            }
            if let Some(Sizes(ns)) = ns {
                cfg.ns = ns;
            }
            if let Some(c) = bandwidth_constant {
                cfg.overrides.bandwidth_constant = c;
            }
            let output = run_experiment(&cfg)?;
            std::fs::create_dir_all(&out)?;
            write_results(BufWriter::new(File::create(out.join("results.csv"))?), cfg.model, &output.results)?;
            write_report(BufWriter::new(File::create(out.join("report.json"))?), &output.report)?;
            write_plot(BufWriter::new(File::create(out.join("plot.csv"))?), &output.report)?;
            let r = &output.report;
            match r.slope {
                Some(s) => println!(
                    "{}: slope {s:.4} vs reference {:.4} (tolerance {}) -> {}",
                    cfg.model.name(),
                    r.reference_exponent,
                    r.tolerance,
                    if r.pass { "pass" } else { "fail" }
                ),
                None => println!("{}: fewer than 3 sample sizes, no slope fitted", cfg.model.name()),
            }
            Ok(())
        }
        Command::Rates { results, config } => {
            let records = read_results(File::open(&results)?)?;
            let fits = fit_results(&records)?;
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let mut stdout = io::stdout().lock();
            for fit in &fits {
                write!(stdout, "{}: slope {:.6} intercept {:.6}", fit.model, fit.slope, fit.intercept)?;
                if let Some(cfg) = cfg.as_ref().filter(|c| c.model.name() == fit.model) {
                    let r = reference_rate(cfg.model, cfg.d, cfg.beta, cfg.regime)?;
                    let pass = (fit.slope - r.rmse_exponent()).abs() <= cfg.tolerance;
                    write!(stdout, " reference {:.6} {}", r.rmse_exponent(), if pass { "pass" } else { "fail" })?;
                }
                writeln!(stdout)?;
            }
            Ok(())
        }
    }
}

fn snake_dataset(meta: &DatasetMeta, mut obs: Vec<odelearn::odeflow::Observation>) -> Result<SnakeDataset> {
    obs.sort_by_key(|o| o.obs_idx);
    let x1 = meta
        .initials
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidInput("snake metadata lacks the initial condition".into()))?;
    Ok(SnakeDataset {
        d: meta.d,
        beta: meta.beta,
        x1,
        dt: meta.dt,
        times: obs.iter().map(|o| o.t).collect(),
        observations: obs.into_iter().map(|o| o.y).collect(),
    })
}

fn write_estimates<W: Write>(writer: W, queries: &[Vec<f64>], rows: &[(Vec<f64>, &str)]) -> Result<()> {
    let d = queries.first().map_or(0, |q| q.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["query".to_string()];
    header.extend((1..=d).map(|k| format!("x_{k}")));
    header.extend((1..=d).map(|k| format!("f_{k}")));
    header.push("provenance".into());
    w.write_record(&header)?;
    for (i, (q, (v, tag))) in queries.iter().zip(rows).enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(q.iter().map(|c| format!("{c:?}")));
        rec.extend(v.iter().map(|c| format!("{c:?}")));
        rec.push(tag.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(Error::from)
}
