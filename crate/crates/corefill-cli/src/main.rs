//! Command-line harness: generate instances, price them, compare
//! mechanisms into a CSV, and certify points against brute force.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use corefill::{
    compare, run_mechanism, vcg_pursuit, water_fill, CorePolytope, DirectionPolicy, Epsilon,
    GeneratorConfig, Instance, Mechanism, Money, UtilityVector, WinnerOracle,
};

#[derive(Parser)]
#[command(
    name = "corefill",
    version,
    about = "Core pricing for combinatorial auctions",
    long_about = "Prices bundle and slate auctions at approximately bidder-optimal core \
                  points via water-filling over a winner-determination oracle, with VCG \
                  and GSP baselines, synthetic instance generation, and exhaustive \
                  verification of small instances."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write seeded synthetic instances into a directory.
    Generate {
        /// Generator configuration, JSON.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Price one instance with one mechanism and print the outcome as JSON.
    Price {
        #[arg(long)]
        instance: PathBuf,
        /// core | vcg-pursuit | vcg | gsp-opt | gsp-greedy
        #[arg(long)]
        mechanism: String,
        /// Micro-units ("10000") or a welfare fraction ("rel:1/1000").
        #[arg(long)]
        epsilon: String,
        /// Also write the water-filling trace as JSON lines (core and
        /// vcg-pursuit only).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run mechanisms over every instance in a directory and write a CSV.
    Compare {
        /// Directory of instance JSON files.
        #[arg(long)]
        instances: PathBuf,
        /// Comma-separated list, or "all".
        #[arg(long, default_value = "all")]
        mechanisms: String,
        /// Micro-units or "rel:NUM/DEN", resolved per instance.
        #[arg(long)]
        epsilon: String,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a utility point against every core constraint by brute force.
    /// Exits with status 1 when the point is not epsilon-bidder-optimal.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// JSON object mapping bidder id to utility in micro-units;
        /// omitted bidders count as zero.
        #[arg(long)]
        point: PathBuf,
        /// Tolerance in micro-units.
        #[arg(long)]
        epsilon: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { config, seed, out } => generate(&config, seed, &out),
        Command::Price { instance, mechanism, epsilon, trace } => {
            price(&instance, &mechanism, &epsilon, trace.as_deref())
        }
        Command::Compare { instances, mechanisms, epsilon, out } => {
            run_compare(&instances, &mechanisms, &epsilon, &out)
        }
        Command::Verify { instance, point, epsilon } => verify(&instance, &point, epsilon),
    }
}

fn generate(config_path: &Path, seed: u64, out: &Path) -> Result<ExitCode> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let config: GeneratorConfig =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", config_path.display()))?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let instances = config.generate(seed)?;
    for (index, instance) in instances.iter().enumerate() {
        let name = config.instance_name(index as u32);
        instance.write(out.join(format!("{name}.json")))?;
    }
    println!("wrote {} instances to {}", instances.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn price(
    instance_path: &Path,
    mechanism: &str,
    epsilon: &str,
    trace: Option<&Path>,
) -> Result<ExitCode> {
    let mechanism: Mechanism = mechanism.parse()?;
    let instance = Instance::read(instance_path)
        .with_context(|| format!("reading {}", instance_path.display()))?;
    let oracle = instance.build_oracle()?;
    let eps = Epsilon::parse(epsilon)?.resolve(oracle.total_welfare())?;

    if let Some(trace_path) = trace {
        let run = match mechanism {
            Mechanism::Core => water_fill(&oracle, &DirectionPolicy::Uniform, eps)?,
            Mechanism::VcgPursuit => vcg_pursuit(&oracle, eps)?.run,
            _ => bail!("--trace applies to the core and vcg-pursuit mechanisms"),
        };
        let file = fs::File::create(trace_path)
            .with_context(|| format!("creating {}", trace_path.display()))?;
        run.write_trace(file)?;
    }

    let run = run_mechanism(&instance, &oracle, mechanism, eps)?;
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &run.outcome)?;
    stdout.write_all(b"\n")?;
    Ok(ExitCode::SUCCESS)
}

fn run_compare(
    instance_dir: &Path,
    mechanisms: &str,
    epsilon: &str,
    out: &Path,
) -> Result<ExitCode> {
    let mechanisms = Mechanism::parse_list(mechanisms)?;
    let epsilon = Epsilon::parse(epsilon)?;

    let mut paths: Vec<PathBuf> = fs::read_dir(instance_dir)
        .with_context(|| format!("reading {}", instance_dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .json instances under {}", instance_dir.display());
    }

    let mut instances = Vec::with_capacity(paths.len());
    for path in &paths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let instance =
            Instance::read(path).with_context(|| format!("reading {}", path.display()))?;
        instances.push((stem, instance));
    }

    let report = compare(&instances, &mechanisms, &epsilon);
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    report.write_csv(file)?;

    for failure in &report.failures {
        eprintln!(
            "skipped {} on {}: {}",
            failure.stage, failure.instance_id, failure.message
        );
    }
    println!(
        "compared {} mechanisms over {} instances into {}",
        mechanisms.len(),
        instances.len(),
        out.display()
    );
    for summary in report.summarize() {
        let show = |f: &Option<corefill::Frac>| match f {
            Some(f) => {
                let approx = *f.numer() as f64 / *f.denom() as f64;
                format!("{} (~{approx:.4})", corefill::format_frac(f))
            }
            None => "NA".to_string(),
        };
        println!(
            "  {:<12} rows={:<4} revenue/vcg={} fairness={}",
            summary.mechanism.name(),
            summary.rows,
            show(&summary.mean_revenue_vs_vcg),
            show(&summary.mean_fairness),
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(instance_path: &Path, point_path: &Path, epsilon: u64) -> Result<ExitCode> {
    let instance = Instance::read(instance_path)
        .with_context(|| format!("reading {}", instance_path.display()))?;
    let polytope = match &instance {
        Instance::Xor(profile) => CorePolytope::from_profile(profile)?,
        Instance::Slate(slate) => CorePolytope::from_slate(slate)?,
    };

    let text = fs::read_to_string(point_path)
        .with_context(|| format!("reading {}", point_path.display()))?;
    let entries: BTreeMap<u32, u64> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", point_path.display()))?;
    let mut point = UtilityVector::zero(polytope.bidder_ids().iter().copied());
    for (id, micros) in entries {
        if !polytope.bidder_ids().contains(&id) {
            bail!("point names bidder {id}, which the instance does not have");
        }
        point.set(id, Money::from_micros(micros));
    }

    let eps = Money::from_micros(epsilon);
    let result = polytope.check_eps_bidder_optimal(&point, eps)?;
    if !result.in_core {
        println!("in core: no");
        for violation in polytope.violations(&point)?.into_iter().take(5) {
            println!(
                "  coalition {:?} is underpaid by {} relative to what it blocks",
                violation.coalition, violation.shortfall
            );
        }
        return Ok(ExitCode::from(1));
    }
    println!("in core: yes");
    if result.raisable.is_empty() {
        println!("bidder-optimal within {eps}: yes");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("bidder-optimal within {eps}: no");
        println!("  utilities still raisable: {:?}", result.raisable);
        Ok(ExitCode::from(1))
    }
}
