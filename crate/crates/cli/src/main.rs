mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use wegner_core::experiments::{
    estimate_ids, localisation_probe, run_ise, run_spectral_minimum, run_stubborn, run_stubborn_exponential,
    run_uncertainty, run_wegner, ExperimentReport, Verdict,
};
use wegner_core::random_model::ModelFile;
use wegner_core::thick_sets::{build_fat_cantor, product_and_periodize, stripes, CantorSpec, RasterSet};

use config::{load_config, Params, RunConfig};

#[derive(Parser)]
#[command(name = "wegner-lab", version, about = "Numerical experiments on alloy-type random Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
    },
    /// Write a raster set.
    MakeSet {
        #[command(subcommand)]
        kind: SetKind,
    },
    /// Certify the thickness of a periodic raster set.
    Certify {
        raster: PathBuf,
        /// Window side lengths, one per axis (a single value is used for every axis).
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        a: Vec<f64>,
        /// Fail (exit 1) unless the certified density is at least this value.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Print the summary of a finished run.
    Report {
        dir: PathBuf,
    },
}

#[derive(Args)]
struct OutArg {
    /// Output file; `.txt` selects the text format, anything else the binary one.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum SetKind {
    /// Fat Cantor set on [0, 1), periodized.
    Cantor {
        /// Construction depth with removed lengths 4^-k.
        #[arg(long, conflicts_with = "removed")]
        depth: Option<usize>,
        /// Removed fractions per level, comma separated.
        #[arg(long, value_delimiter = ',')]
        removed: Option<Vec<f64>>,
        #[arg(long, default_value_t = 512)]
        resolution: u32,
        /// Take the product of this many copies.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Periodic stripes `[0, width)` of the given period.
    Stripes {
        #[arg(long)]
        width: f64,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        #[arg(long, default_value_t = 96)]
        resolution: u32,
        #[command(flatten)]
        out: OutArg,
    },
    /// Cartesian product of one-dimensional periodic rasters.
    Product {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config } => run(&config),
        Command::MakeSet { kind } => make_set(kind).map(|()| Verdict::Informational),
        Command::Certify { raster, a, gamma } => certify(&raster, &a, gamma),
        Command::Report { dir } => report(&dir),
    };
    match outcome {
        Ok(Verdict::Fail) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(path: &Path) -> Result<Verdict> {
    let cfg = load_config(path)?.with_env_override();
    let report = dispatch(&cfg)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    std::fs::write(dir.join("config.resolved.toml"), cfg.to_toml()?)?;
    if cfg.output.json {
        std::fs::write(dir.join("report.json"), report.to_json()?)?;
    }
    if cfg.output.csv {
        std::fs::write(dir.join("report.csv"), report.to_csv()?)?;
    }
    let summary = report.summary();
    if cfg.output.summary {
        std::fs::write(dir.join("summary.txt"), &summary)?;
    }
    print!("{summary}");
    println!("output:     {}", dir.display());
    Ok(report.overall())
}

/// Runs the configured experiment on a pool of `cfg.workers` threads.
pub fn dispatch(cfg: &RunConfig) -> Result<ExperimentReport> {
    let model_path = cfg.model.as_deref().ok_or_else(|| anyhow!("no model file configured"))?;
    let model = ModelFile::load(model_path).with_context(|| format!("cannot load model {}", model_path.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let seed = cfg.seed;
    let report = pool.install(|| match &cfg.params {
        Params::Wegner(p) => run_wegner(&model, p, seed),
        Params::Ids(p) => estimate_ids(&model, p, seed),
        Params::Stubborn(p) => run_stubborn(&model, p, seed),
        Params::StubbornExponential(p) => run_stubborn_exponential(&model, p, seed),
        Params::Ise(p) => run_ise(&model, p, seed),
        Params::SpectralMinimum(p) => run_spectral_minimum(&model, p, seed),
        Params::Localisation(p) => localisation_probe(&model, p, seed),
        Params::Uncertainty(p) => match &model.claimed_thick {
            Some(claim) => run_uncertainty(&claim.set, &claim.window, p),
            None => Err(wegner_core::Error::MissingClaim("claimed thick set")),
        },
    });
    report.with_context(|| format!("experiment `{}` failed", cfg.experiment.name()))
}

fn make_set(kind: SetKind) -> Result<()> {
    let (set, out) = match kind {
        SetKind::Cantor { depth, removed, resolution, dim, out } => {
            let spec = match (depth, removed) {
                (_, Some(w)) => CantorSpec::from_fractions(&w)?,
                (Some(k), None) => CantorSpec::smith_volterra(k),
                (None, None) => bail!("give either --depth or --removed"),
            };
            if dim == 0 {
                bail!("--dim must be at least 1");
            }
            let axis = build_fat_cantor(&spec, resolution)?;
            let set = if dim == 1 { axis } else { product_and_periodize(&vec![axis; dim])? };
            (set, out)
        }
        SetKind::Stripes { width, period, resolution, out } => (stripes(width, period, resolution)?, out),
        SetKind::Product { inputs, out } => {
            let axes = inputs
                .iter()
                .map(|p| RasterSet::load(p).with_context(|| format!("cannot read {}", p.display())))
                .collect::<Result<Vec<_>>>()?;
            (product_and_periodize(&axes)?, out)
        }
    };
    set.save(&out.output).with_context(|| format!("cannot write {}", out.output.display()))?;
    println!(
        "wrote {}: d = {}, resolution {:?}, measure {:.6}",
        out.output.display(),
        set.d(),
        set.resolution(),
        set.measure()
    );
    Ok(())
}

fn certify(path: &Path, a: &[f64], gamma: Option<f64>) -> Result<Verdict> {
    let set = RasterSet::load(path).with_context(|| format!("cannot read {}", path.display()))?;
    let a = if a.len() == 1 { vec![a[0]; set.d()] } else { a.to_vec() };
    let cert = set.certify_thickness(&a)?;
    println!("gamma_star:  {:.6}", cert.gamma_star);
    println!("error_bound: {:.6}", cert.error_bound);
    println!("witness:     {:?}", cert.witness);
    Ok(match gamma {
        Some(g) if cert.gamma_star < g => {
            println!("verdict:     FAIL (below gamma = {g})");
            Verdict::Fail
        }
        Some(g) => {
            println!("verdict:     PASS (gamma = {g})");
            Verdict::Pass
        }
        None => Verdict::Informational,
    })
}

fn report(dir: &Path) -> Result<Verdict> {
    let path = dir.join("report.json");
    let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
    let report = ExperimentReport::from_json(&text)?;
    print!("{}", report.summary());
    Ok(report.overall())
}
