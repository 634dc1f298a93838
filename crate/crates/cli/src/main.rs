use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ptfprg::designs::{MomentMode, SeedBits};
use ptfprg::generator::{seed_accounting, Generator, GeneratorConfig, PlanRequest, Scratch};
use ptfprg::harness::{
    jsonl_path, run, run_experiment, CwSpec, DerivSpec, Ensemble, Experiment, ExperimentResult,
    ExperimentSpec, Prop4Spec, TailSpec,
};
use ptfprg::parallel::{chunks, map_units, UNIT_SIZE};
use ptfprg::rng::StreamKey;

#[derive(Parser)]
#[command(
    name = "ptfprg",
    version,
    about = "Pseudorandom generator for Gaussian polynomial threshold functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stream key as hex (up to 64 digits).
    #[arg(long)]
    seed: Option<String>,
    /// Overrides the sample count of the configuration.
    #[arg(long)]
    samples: Option<u64>,
    /// Worker threads; 0 uses all cores. Results do not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived generator configuration and seed accounting.
    Plan {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        request: PlanFlags,
    },
    /// Emit generator samples as JSON lines.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        request: PlanFlags,
        /// First sample index.
        #[arg(long, default_value_t = 0)]
        start: u64,
        /// Sample once from an explicit master seed given as hex.
        #[arg(long, conflicts_with_all = ["start", "samples"])]
        master_seed: Option<String>,
    },
    /// Check design moments against Gaussian targets.
    Moments {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate fooling gaps of the generator on a PTF ensemble.
    Fool {
        #[command(flatten)]
        common: Common,
    },
    /// Run one of the verification suites.
    Check {
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Cw,
    Tail,
    Deriv,
    Prop4,
}

#[derive(Args, Clone)]
struct PlanFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    ell_cap: Option<usize>,
    #[arg(long)]
    design_order: Option<usize>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Plan { common, request } => {
            let cfg = generator_config(&common, &request)?;
            let doc = serde_json::json!({ "config": cfg, "accounting": seed_accounting(&cfg) });
            let mut w = output(common.out.as_deref())?;
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
            w.flush()?;
            Ok(true)
        }
        Command::Sample {
            common,
            request,
            start,
            master_seed,
        } => {
            let cfg = generator_config(&common, &request)?;
            let generator = Generator::new(&cfg)?;
            let mut w = output(common.out.as_deref())?;
            if let Some(hex) = master_seed {
                let bits = SeedBits::from_hex(&hex)?;
                let y = generator.sample(&bits)?;
                writeln!(w, "{}", serde_json::json!({ "y": y }))?;
            } else {
                let key = key(&common, 0)?;
                let count = common.samples.unwrap_or(1);
                write_samples(&generator, &key, start, count, common.jobs, &mut w)?;
            }
            w.flush()?;
            Ok(true)
        }
        Command::Moments { common } => {
            let mut spec = load_spec(&common, None)?;
            if !matches!(spec.experiment, Experiment::Moments(_)) {
                bail!(
                    "moments needs a spec of kind \"moments\", got \"{}\"",
                    spec.experiment.kind()
                );
            }
            apply_samples(&mut spec, common.samples);
            execute(&spec, &common)
        }
        Command::Fool { common } => {
            let mut spec = load_spec(&common, None)?;
            if !matches!(spec.experiment, Experiment::Fool(_)) {
                bail!(
                    "fool needs a spec of kind \"fool\", got \"{}\"",
                    spec.experiment.kind()
                );
            }
            apply_samples(&mut spec, common.samples);
            execute(&spec, &common)
        }
        Command::Check { suite, common } => {
            let mut spec = load_spec(&common, Some(default_check(suite)))?;
            let expected = match suite {
                Suite::Cw => "cw",
                Suite::Tail => "tail",
                Suite::Deriv => "deriv",
                Suite::Prop4 => "prop4",
            };
            if spec.experiment.kind() != expected {
                bail!(
                    "check {expected} got a spec of kind \"{}\"",
                    spec.experiment.kind()
                );
            }
            apply_samples(&mut spec, common.samples);
            execute(&spec, &common)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn key(common: &Common, fallback: u64) -> Result<StreamKey> {
    Ok(match &common.seed {
        Some(hex) => StreamKey::from_hex(hex)?,
        None => StreamKey::from_u64(fallback),
    })
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A full `GeneratorConfig` is used as is; otherwise the config file (or the
/// flags) is read as a plan request.
fn generator_config(common: &Common, flags: &PlanFlags) -> Result<GeneratorConfig> {
    if let Some(path) = &common.config {
        let text = read_config(path)?;
        if let Ok(cfg) = serde_json::from_str::<GeneratorConfig>(&text) {
            return Ok(cfg);
        }
        let req: PlanRequest =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(req.plan()?);
    }
    let (Some(n), Some(d), Some(k), Some(epsilon)) = (flags.n, flags.d, flags.k, flags.epsilon)
    else {
        bail!("give --config or all of --n, --d, --k, --epsilon");
    };
    Ok(PlanRequest {
        n,
        d,
        k,
        epsilon,
        ell_cap: flags.ell_cap,
        design_order: flags.design_order,
    }
    .plan()?)
}

fn write_samples(
    generator: &Generator,
    key: &StreamKey,
    start: u64,
    count: u64,
    jobs: usize,
    w: &mut dyn Write,
) -> Result<()> {
    let units = chunks(count, UNIT_SIZE);
    // bounded batches keep memory flat for long runs
    for batch in units.chunks(64) {
        let lines = map_units(jobs, batch.len(), |u| {
            let (offset, len) = batch[u];
            let mut y = vec![0.0; generator.dim()];
            let mut scratch = Scratch::default();
            let mut text = String::new();
            for i in start + offset..start + offset + len {
                generator.sample_indexed(key, i, &mut y, &mut scratch);
                text.push_str(&serde_json::json!({ "seed_index": i, "y": y }).to_string());
                text.push('\n');
            }
            text
        });
        for l in lines {
            w.write_all(l.as_bytes())?;
        }
    }
    Ok(())
}

fn load_spec(common: &Common, default: Option<ExperimentSpec>) -> Result<ExperimentSpec> {
    match (&common.config, default) {
        (Some(path), _) => serde_json::from_str(&read_config(path)?)
            .with_context(|| format!("parsing {}", path.display())),
        (None, Some(spec)) => Ok(spec),
        (None, None) => bail!("--config is required"),
    }
}

fn default_check(suite: Suite) -> ExperimentSpec {
    let random = Ensemble::Random {
        num_vars: 3,
        degrees: vec![2, 3],
        count: 5,
    };
    let experiment = match suite {
        Suite::Cw => Experiment::Cw(CwSpec {
            ensemble: random,
            epsilons: vec![1e-2, 1e-3],
            samples: 1_000_000,
            constant: 3.0,
        }),
        Suite::Tail => Experiment::Tail(TailSpec {
            ensemble: random,
            thresholds: vec![2.0, 4.0, 6.0],
            samples: 1_000_000,
            constant: 10.0,
        }),
        Suite::Deriv => Experiment::Deriv(DerivSpec {
            ensemble: Ensemble::Sparse {
                num_vars: 3,
                degree: 3,
                terms: 5,
                count: 10,
            },
            ells: vec![1, 2],
            samples: 1_000_000,
            tolerance: 0.05,
        }),
        Suite::Prop4 => Experiment::Prop4(Prop4Spec {
            k: 3,
            grid: vec![(0.0, 0.0), (0.25, 0.5), (-0.25, -0.5)],
            radii: vec![0.2, 0.1, 0.05],
            side: 9,
        }),
    };
    ExperimentSpec {
        seed: 0,
        experiment,
    }
}

fn apply_samples(spec: &mut ExperimentSpec, samples: Option<u64>) {
    let Some(n) = samples else { return };
    match &mut spec.experiment {
        Experiment::Fool(s) => s.samples = n,
        Experiment::Cw(s) => s.samples = n,
        Experiment::Tail(s) => s.samples = n,
        Experiment::Deriv(s) => s.samples = n,
        Experiment::Moments(s) => {
            if let MomentMode::MonteCarlo { samples, .. } = &mut s.mode {
                *samples = n;
            }
        }
        Experiment::Prop4(_) => {}
    }
}

fn execute(spec: &ExperimentSpec, common: &Common) -> Result<bool> {
    let key = key(common, spec.seed)?;
    let result: ExperimentResult = match &common.out {
        Some(path) => {
            let r = run_experiment(spec, key, path, common.jobs)?;
            eprintln!(
                "wrote {} and {}",
                path.display(),
                jsonl_path(path).display()
            );
            r
        }
        None => {
            let r = run(spec, key, common.jobs)?;
            r.write_csv(io::stdout().lock())?;
            r
        }
    };
    let pass = result.pass();
    eprintln!(
        "{}: {}",
        spec.experiment.kind(),
        if pass {
            "all checks pass"
        } else {
            "some checks FAILED"
        }
    );
    Ok(pass)
}
