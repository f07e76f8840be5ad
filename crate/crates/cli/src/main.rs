use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rram_snn::crossbar::{best_arrangement, factorizations, max_read_error, Arrangement};
use rram_snn::dataset::{Column, CsvSchema};
use rram_snn::device::measure_stdp_protocol;
use rram_snn::harness::{self, BackendKind, DatasetConfig, ExperimentConfig};
use rram_snn::seed;

#[derive(Parser)]
#[command(name = "rram-snn", version, about = "STDP training of a spiking network on RRAM synapse models")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repeated training runs with one backend.
    Train(Overrides),
    /// Ideal-backend training over a grid of (A+, A-) pairs.
    SweepLr {
        #[command(flatten)]
        o: Overrides,
        /// Rates used on both axes of the grid.
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.35")]
        values: Vec<f64>,
    },
    /// Quantized-backend training over level counts, with a continuous control.
    SweepLevels {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, value_delimiter = ',', default_value = "2,4,16,64,256,1024")]
        levels: Vec<usize>,
    },
    /// Multi-RRAM training over device counts.
    SweepN {
        #[command(flatten)]
        o: Overrides,
        #[arg(long, value_delimiter = ',', default_value = "2,4,16,36,64,100")]
        ns: Vec<usize>,
    },
    /// Single-device training from two initial conditions.
    SingleDevice(Overrides),
    /// Synthesize a device table with the bench protocol.
    DeviceGen {
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Also write the raw measurement scatter.
        #[arg(long)]
        scatter: bool,
    },
    /// Arrangement of n devices that minimizes the worst read error.
    CrossbarPlan {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        k_wire: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Ideal,
    Quantized,
    SingleDevice,
    MultiRram,
}

impl From<Backend> for BackendKind {
    fn from(b: Backend) -> Self {
        match b {
            Backend::Ideal => BackendKind::Ideal,
            Backend::Quantized => BackendKind::Quantized,
            Backend::SingleDevice => BackendKind::SingleDevice,
            Backend::MultiRram => BackendKind::MultiRram,
        }
    }
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// `iris`, `wisconsin`, or a CSV path.
    #[arg(long)]
    dataset: Option<String>,
    /// Label column of a CSV dataset (index or header name).
    #[arg(long)]
    label_col: Option<Column>,
    /// Feature columns of a CSV dataset.
    #[arg(long, value_delimiter = ',')]
    feature_cols: Option<Vec<Column>>,
    /// CSV dataset has a header row.
    #[arg(long)]
    has_header: bool,
    #[arg(long)]
    missing: Option<String>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    #[arg(long)]
    n_levels: Option<usize>,
    #[arg(long)]
    n_devices: Option<usize>,
    /// Device table CSV for the device backends.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    a_plus: Option<f64>,
    #[arg(long)]
    a_minus: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Record per-epoch conductances.
    #[arg(long)]
    trajectories: bool,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(d) = &self.dataset {
            cfg.dataset = match d.as_str() {
                "iris" => DatasetConfig::Iris,
                "wisconsin" => DatasetConfig::Wisconsin,
                path => {
                    let label_col = self
                        .label_col
                        .clone()
                        .context("--label-col is required for a CSV dataset")?;
                    let feature_cols = self
                        .feature_cols
                        .clone()
                        .context("--feature-cols is required for a CSV dataset")?;
                    DatasetConfig::Csv {
                        path: path.into(),
                        schema: CsvSchema {
                            label_col,
                            feature_cols,
                            has_header: self.has_header,
                            missing_marker: self.missing.clone().unwrap_or_else(|| "?".into()),
                        },
                    }
                }
            };
        }
        if let Some(b) = self.backend {
            cfg.backend.kind = b.into();
        }
        set(&mut cfg.backend.n_levels, self.n_levels);
        set(&mut cfg.backend.n_devices, self.n_devices);
        if self.table.is_some() {
            cfg.backend.table = self.table.clone();
        }
        set(&mut cfg.stdp.a_plus, self.a_plus);
        set(&mut cfg.stdp.a_minus, self.a_minus);
        set(&mut cfg.runs, self.runs);
        set(&mut cfg.epochs, self.epochs);
        cfg.record_trajectories |= self.trajectories;
        cfg.validate()?;
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn base_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    Ok(cfg)
}

fn file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn sub(out: &Path, name: &str, stats: &harness::RunStats) -> Result<Vec<String>> {
    let names = harness::write_run_outputs(&out.join(name), stats)?;
    Ok(names.into_iter().map(|n| format!("{name}/{n}")).collect())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let out = cli.out.clone();
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut cfg = base_config(&cli)?;

    match &cli.command {
        Command::Train(o) => {
            o.apply(&mut cfg)?;
            let stats = harness::run_training(&cfg)?;
            let outputs = harness::write_run_outputs(&out, &stats)?;
            println!(
                "mean last-5 CA {:.2}%, peak {:.2}%",
                stats.mean_last5(),
                stats.peak()
            );
            harness::write_manifest(&out, "train", &cfg, outputs)?;
        }
        Command::SweepLr { o, values } => {
            o.apply(&mut cfg)?;
            let grid: Vec<(f64, f64)> = values
                .iter()
                .flat_map(|&p| values.iter().map(move |&m| (p, m)))
                .collect();
            let points = harness::sweep_learning_rate(&cfg, &grid)?;
            harness::write_surface_csv(&points, file(&out.join("surface.csv"))?)?;
            for p in &points {
                println!("A+ {:<6} A- {:<6} CA {:.2}%", p.a_plus, p.a_minus, p.mean_ca());
            }
            harness::write_manifest(&out, "sweep-lr", &cfg, vec!["surface.csv".into()])?;
        }
        Command::SweepLevels { o, levels } => {
            cfg.runs = 10;
            cfg.epochs = 10;
            o.apply(&mut cfg)?;
            let sweep = harness::sweep_levels(&cfg, levels)?;
            harness::write_levels_csv(&sweep, file(&out.join("levels.csv"))?)?;
            let mut outputs = vec!["levels.csv".to_string()];
            outputs.extend(sub(&out, "continuous", &sweep.control)?);
            for (n, stats) in &sweep.levels {
                outputs.extend(sub(&out, &format!("levels_{n}"), stats)?);
                println!("{n:>5} levels: mean CE {:.2}%", 100.0 - stats.mean_last5());
            }
            println!("continuous: mean CE {:.2}%", 100.0 - sweep.control.mean_last5());
            harness::write_manifest(&out, "sweep-levels", &cfg, outputs)?;
        }
        Command::SweepN { o, ns } => {
            o.apply(&mut cfg)?;
            let points = harness::sweep_n(&cfg, ns)?;
            harness::write_sweep_n_csv(&points, file(&out.join("sweep_n.csv"))?)?;
            let mut outputs = vec!["sweep_n.csv".to_string()];
            for p in &points {
                outputs.extend(sub(&out, &format!("n_{}", p.n), &p.stats)?);
                println!(
                    "n {:>3} ({} epochs): mean last-5 CA {:.2}%, final IQR {:.2}",
                    p.n,
                    p.epochs,
                    p.stats.mean_last5(),
                    p.stats.final_iqr()
                );
            }
            harness::write_manifest(&out, "sweep-n", &cfg, outputs)?;
        }
        Command::SingleDevice(o) => {
            o.apply(&mut cfg)?;
            let r = harness::single_device_experiment(&cfg)?;
            let mut outputs = Vec::new();
            for (name, stats) in [("ic1", &r.ic1), ("ic2", &r.ic2), ("ideal", &r.ideal), ("multi64", &r.multi64)] {
                outputs.extend(sub(&out, name, stats)?);
                println!("{name:>8}: mean last-5 CA {:.2}%", stats.mean_last5());
            }
            harness::write_manifest(&out, "single-device", &cfg, outputs)?;
        }
        Command::DeviceGen {
            learning_rate,
            threshold,
            noise,
            iterations,
            scatter,
        } => {
            let d = &mut cfg.device;
            set(&mut d.learning_rate, *learning_rate);
            set(&mut d.threshold_v, *threshold);
            set(&mut d.noise_sigma, *noise);
            set(&mut d.protocol_iterations, *iterations);
            let table_seed = seed::derive(cfg.seed, seed::DEVICE);
            let table = cfg.device.synthesize(table_seed)?;
            table.save(&out.join("device_table.csv"))?;
            let mut outputs = vec!["device_table.csv".to_string()];
            if *scatter {
                let mem = cfg.device.memristor()?;
                let mut rng = seed::rng(table_seed);
                let records =
                    measure_stdp_protocol(&mem, &cfg.device.pulses, cfg.device.protocol_iterations, &mut rng)?;
                let mut w = file(&out.join("scatter.csv"))?;
                writeln!(w, "g_i,dt_ms,dg")?;
                for r in &records {
                    writeln!(w, "{},{},{}", r.g_i, r.dt, r.dg)?;
                }
                outputs.push("scatter.csv".into());
            }
            println!("max |dG| on grid: {:.4}", table.max_abs_dg());
            harness::write_manifest(&out, "device-gen", &cfg, outputs)?;
        }
        Command::CrossbarPlan { n, k_wire } => {
            let best = best_arrangement(*n, *k_wire)?;
            let mut w = file(&out.join("crossbar.csv"))?;
            let mut text = String::from("rows,cols,max_read_error,chosen\n");
            for (rows, cols) in factorizations(*n) {
                let e = max_read_error(&Arrangement { rows, cols, k_wire: *k_wire });
                let chosen = u8::from(rows == best.rows && cols == best.cols);
                text.push_str(&format!("{rows},{cols},{e},{chosen}\n"));
            }
            w.write_all(text.as_bytes())?;
            print!("{text}");
            eprintln!("chosen: {} x {}", best.rows, best.cols);
        }
    }
    Ok(())
}
