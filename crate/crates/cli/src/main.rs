use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use hdg_stokes::experiments::{run, Experiment, RunConfig};
use hdg_stokes::Mesh64;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Conv,
    TauSweep,
    CrEquiv,
    Infsup,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Conv => Experiment::Conv,
            ExperimentArg::TauSweep => Experiment::TauSweep,
            ExperimentArg::CrEquiv => Experiment::CrEquiv,
            ExperimentArg::Infsup => Experiment::InfSup,
        }
    }
}

/// Reduced-stabilization HDG solver for the 2D Stokes problem.
///
/// Writes a CSV file, companion CSV files where the experiment has them, and
/// a gnuplot script with the same stem.
#[derive(Debug, Parser)]
#[command(name = "hdg-stokes", version)]
struct Cli {
    #[arg(long, value_enum)]
    experiment: ExperimentArg,

    /// Velocity degree is k+1, facet and pressure degree k.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
    k: u8,

    /// Stabilization parameter [default: 10(k+1)²].
    #[arg(long)]
    tau: Option<f64>,

    /// Number of mesh levels [default depends on the experiment].
    #[arg(long)]
    levels: Option<usize>,

    /// Subdivisions per side of the coarsest structured mesh.
    #[arg(long)]
    base_n: Option<usize>,

    /// Extra degree for load and error quadrature.
    #[arg(long, default_value_t = 4)]
    quad_boost: usize,

    /// Base mesh in the plain-text `V T` format; replaces the structured one.
    #[arg(long)]
    mesh: Option<PathBuf>,

    /// Output CSV path [default: <experiment>_k<k>.csv].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = if suffix.is_empty() {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}_{suffix}.{ext}")
    };
    path.with_file_name(name)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let experiment = Experiment::from(cli.experiment);
    let k = usize::from(cli.k);

    let mut cfg = RunConfig::new(experiment, k);
    cfg.tau = cli.tau;
    cfg.levels = cli.levels;
    cfg.base_n = cli.base_n;
    cfg.quad_boost = cli.quad_boost;
    if let Some(path) = &cli.mesh {
        let file = File::open(path).with_context(|| format!("opening mesh {}", path.display()))?;
        cfg.base_mesh = Some(Mesh64::read_text(BufReader::new(file)).with_context(|| format!("reading mesh {}", path.display()))?);
    }

    let artifacts = run(&cfg).with_context(|| format!("running {experiment}"))?;

    let out = cli
        .out
        .unwrap_or_else(|| PathBuf::from(format!("{}_k{k}.csv", experiment.name().replace('-', "_"))));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut written = vec![out.clone()];
    fs::write(&out, &artifacts.csv).with_context(|| format!("writing {}", out.display()))?;
    for (suffix, content) in &artifacts.extra {
        let path = sibling(&out, suffix, "csv");
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    let script = sibling(&out, "", "gp");
    let csv_name = out.file_name().and_then(|s| s.to_str()).unwrap_or("out.csv");
    fs::write(&script, artifacts.plot_script_for(csv_name)).with_context(|| format!("writing {}", script.display()))?;
    written.push(script);

    print!("{}", artifacts.summary);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
