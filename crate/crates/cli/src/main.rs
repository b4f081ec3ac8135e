//! `agepress` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agepress::pipeline::{self, Bundle, KRange, PipelineConfig};
use agepress::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "agepress",
    version,
    about = "Village spatial stress indices and typologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive SGI, SREI, WI and AII for every village
    Indices(Common),
    /// Correlation matrix, p-values and VIF
    Correlate(Common),
    /// Two-class discriminant over the administrative labels
    Lda(Common),
    /// Mahalanobis average-linkage clustering with a k scan
    Cluster(Common),
    /// Side-by-side ANOVA under two village labelings
    Compare {
        #[command(flatten)]
        common: Common,
        /// First labeling (village_id,cluster)
        labels_a: PathBuf,
        /// Second labeling (village_id,cluster)
        labels_b: PathBuf,
    },
    /// Run every stage and write the full report bundle
    Pipeline(Common),
    /// Recompute emitted ANOVA tables from the emitted village table
    Audit {
        #[command(flatten)]
        common: Common,
        /// Directory holding a pipeline output bundle (defaults to --out)
        dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Villages table (overrides the config)
    #[arg(long)]
    villages: Option<PathBuf>,
    /// Surface composition table
    #[arg(long)]
    surfaces: Option<PathBuf>,
    /// Crop composition table
    #[arg(long)]
    crops: Option<PathBuf>,
    /// Raster manifest (id,dem,mask)
    #[arg(long)]
    rasters: Option<PathBuf>,
    /// Reference cluster numbering (village_id,cluster)
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Number of clusters to cut the tree into
    #[arg(long)]
    k: Option<usize>,
    /// Slope threshold in degrees
    #[arg(long)]
    slope_threshold: Option<f64>,
    /// Daily insolation threshold in kJ/m²/day
    #[arg(long)]
    srei_threshold: Option<f64>,
    /// Range of k to scan, e.g. 2..16
    #[arg(long)]
    k_range: Option<KRange>,
}

impl Common {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        // paths given on the command line are relative to the working
        // directory, not the config file
        let cwd = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                std::env::current_dir()
                    .map(|d| d.join(p))
                    .unwrap_or_else(|_| p.clone())
            }
        };
        if let Some(p) = &self.villages {
            cfg.villages = Some(cwd(p));
        }
        if let Some(p) = &self.surfaces {
            cfg.surfaces = Some(cwd(p));
        }
        if let Some(p) = &self.crops {
            cfg.crops = Some(cwd(p));
        }
        if let Some(p) = &self.rasters {
            cfg.rasters = Some(cwd(p));
        }
        if let Some(p) = &self.reference {
            cfg.reference_clusters = Some(cwd(p));
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        if let Some(k) = self.k {
            cfg.chosen_k = k;
        }
        if let Some(v) = self.slope_threshold {
            cfg.slope_threshold = v;
        }
        if let Some(v) = self.srei_threshold {
            cfg.srei_threshold = v;
        }
        if let Some(r) = self.k_range {
            cfg.k_range = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write(cfg: &PipelineConfig, bundle: &Bundle) -> Result<()> {
    let dir = cfg.out_dir();
    let written = pipeline::emit(cfg, bundle)?;
    println!("wrote {} file(s) to {}", written.len(), dir.display());
    for p in written {
        println!("  {}", p.file_name().unwrap_or_default().to_string_lossy());
    }
    Ok(())
}

fn audit(dir: &Path) -> Result<()> {
    let report = pipeline::cmd_audit(dir)?;
    for m in &report.mismatches {
        eprintln!("mismatch: {m}");
    }
    if report.mismatches.is_empty() {
        println!("audit ok: {} cells recomputed", report.cells_checked);
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "audit found {} mismatch(es) in {} cells",
            report.mismatches.len(),
            report.cells_checked
        )))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Indices(c) => {
            let cfg = c.config()?;
            write(&cfg, &pipeline::cmd_indices(&cfg)?)
        }
        Command::Correlate(c) => {
            let cfg = c.config()?;
            write(&cfg, &pipeline::cmd_correlate(&cfg)?)
        }
        Command::Lda(c) => {
            let cfg = c.config()?;
            write(&cfg, &pipeline::cmd_lda(&cfg)?)
        }
        Command::Cluster(c) => {
            let cfg = c.config()?;
            write(&cfg, &pipeline::cmd_cluster(&cfg)?)
        }
        Command::Compare {
            common,
            labels_a,
            labels_b,
        } => {
            let cfg = common.config()?;
            write(&cfg, &pipeline::cmd_compare(&cfg, &labels_a, &labels_b)?)
        }
        Command::Pipeline(c) => {
            let cfg = c.config()?;
            let (report, bundle) = pipeline::run_pipeline(&cfg)?;
            let starred = |panel: &[pipeline::IndicatorAnova]| {
                panel.iter().filter(|a| !a.stars.is_empty()).count()
            };
            println!(
                "{} villages, k = {}, silhouette peak at k = {}, LDA accuracy {:.2}%",
                report.villages.len(),
                report.clusters.k,
                report.validity.best_silhouette_k,
                100.0 * report.discriminant.evaluation.accuracy
            );
            println!(
                "AII >= 0.36 in {:.0}% of villages",
                100.0 * report.aii_moderate_share
            );
            println!(
                "significant indicators: administrative {}/4, spatial {}/4",
                starred(&report.anova.administrative),
                starred(&report.anova.spatial)
            );
            write(&cfg, &bundle)
        }
        Command::Audit { common, dir } => {
            let dir = match dir {
                Some(d) => d,
                None => common.config()?.out_dir(),
            };
            audit(&dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
