//! Experiment configuration, repeated training runs, the parameter sweeps
//! and their CSV/JSON artifacts.
//!
//! Every run derives its own seeds from the master seed and its run index,
//! so runs execute in parallel and results never depend on scheduling.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, CsvSchema, Dataset};
use crate::device::{DeviceTable, TableGrid, ThresholdMemristor, WritePulseParams};
use crate::encoding::SensorBank;
use crate::error::{Error, Result};
use crate::network::{LifParams, Network};
use crate::seed;
use crate::stdp::StdpParams;
use crate::synapse::BackendSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetConfig {
    Iris,
    Wisconsin,
    Csv { path: PathBuf, schema: CsvSchema },
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Iris
    }
}

impl DatasetConfig {
    /// Loaded and min-max normalized.
    pub fn load(&self) -> Result<Dataset> {
        let raw = match self {
            DatasetConfig::Iris => Dataset::iris(),
            DatasetConfig::Wisconsin => Dataset::wisconsin(),
            DatasetConfig::Csv { path, schema } => dataset::load_csv(path, schema)?,
        };
        Ok(dataset::normalize(&raw))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    pub sensors_per_feature: usize,
    pub window_ms: f64,
    /// Receptive-field half-width; `None` keeps the bank's default.
    pub width: Option<f64>,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            sensors_per_feature: 4,
            window_ms: 100.0,
            width: None,
        }
    }
}

impl EncodingConfig {
    pub fn bank(&self) -> Result<SensorBank> {
        let bank = SensorBank::new(self.sensors_per_feature, self.window_ms)?;
        match self.width {
            Some(w) => SensorBank::with_centers(bank.centers, w, self.window_ms),
            None => Ok(bank),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Ideal,
    Quantized,
    SingleDevice,
    MultiRram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub n_levels: usize,
    pub n_devices: usize,
    /// Device table CSV; synthesized from `[device]` when absent.
    pub table: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Ideal,
            n_levels: 256,
            n_devices: 64,
            table: None,
        }
    }
}

/// Device model used to synthesize the lookup table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeviceConfig {
    /// Largest single-write change as a fraction of the conductance range.
    pub learning_rate: f64,
    pub threshold_v: f64,
    pub p_dev: f64,
    pub noise_sigma: f64,
    pub protocol_iterations: usize,
    pub grid: TableGrid,
    pub pulses: WritePulseParams,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            threshold_v: 1.05,
            p_dev: 1.0,
            noise_sigma: 0.2,
            protocol_iterations: 20_000,
            grid: TableGrid::default(),
            pulses: WritePulseParams::default(),
        }
    }
}

impl DeviceConfig {
    pub fn memristor(&self) -> Result<ThresholdMemristor> {
        ThresholdMemristor::calibrated(
            self.learning_rate,
            self.threshold_v,
            self.p_dev,
            self.noise_sigma,
            &self.pulses,
        )
    }

    /// Run the bench protocol on the model and tabulate it.
    pub fn synthesize(&self, seed: u64) -> Result<DeviceTable> {
        let mem = self.memristor()?;
        let mut rng = seed::rng(seed);
        DeviceTable::synthesize(&mem, &self.pulses, &self.grid, self.protocol_iterations, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub runs: usize,
    pub epochs: usize,
    pub train_fraction: f64,
    /// Mixed into the initial-conductance seed; different salts give
    /// different starting networks under the same master seed.
    pub init_salt: u64,
    pub record_trajectories: bool,
    pub dataset: DatasetConfig,
    pub encoding: EncodingConfig,
    pub lif: LifParams,
    pub stdp: StdpParams,
    pub backend: BackendConfig,
    pub device: DeviceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            runs: 10,
            epochs: 20,
            train_fraction: 0.5,
            init_salt: 0,
            record_trajectories: false,
            dataset: DatasetConfig::default(),
            encoding: EncodingConfig::default(),
            lif: LifParams::default(),
            stdp: StdpParams::default(),
            backend: BackendConfig::default(),
            device: DeviceConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig("runs and epochs must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train_fraction {} not in (0, 1)",
                self.train_fraction
            )));
        }
        self.lif.validate()?;
        self.stdp.validate()?;
        self.encoding.bank()?;
        match self.backend.kind {
            BackendKind::Quantized if self.backend.n_levels < 2 => {
                Err(Error::TooFewLevels(self.backend.n_levels))
            }
            BackendKind::MultiRram if self.backend.n_devices == 0 => {
                Err(Error::InvalidConfig("multi-RRAM synapse needs n >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Same config with a different backend kind.
    pub fn with_backend(&self, kind: BackendKind) -> Self {
        let mut c = self.clone();
        c.backend.kind = kind;
        c
    }

    /// The device table this config trains against: loaded from
    /// `backend.table` or synthesized from the master seed.
    pub fn device_table(&self) -> Result<DeviceTable> {
        match &self.backend.table {
            Some(path) => DeviceTable::load(path),
            None => self.device.synthesize(seed::derive(self.seed, seed::DEVICE)),
        }
    }

    fn backend_spec(&self, table: Option<&Arc<DeviceTable>>) -> Result<BackendSpec> {
        let table = || -> Result<Arc<DeviceTable>> {
            match table {
                Some(t) => Ok(Arc::clone(t)),
                None => Ok(Arc::new(self.device_table()?)),
            }
        };
        Ok(match self.backend.kind {
            BackendKind::Ideal => BackendSpec::Ideal(self.stdp),
            BackendKind::Quantized => BackendSpec::Quantized {
                params: self.stdp,
                n_levels: self.backend.n_levels,
            },
            BackendKind::SingleDevice => BackendSpec::SingleDevice {
                table: table()?,
                g_max: self.stdp.g_max,
            },
            BackendKind::MultiRram => BackendSpec::MultiRram {
                table: table()?,
                n: self.backend.n_devices,
                g_max: self.stdp.g_max,
            },
        })
    }
}

/// Per-run series of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    /// `ca[run][epoch]`, percent.
    pub ca: Vec<Vec<f64>>,
    /// `trajectories[run][snapshot][synapse]`; snapshot 0 is the initial
    /// state, snapshot `e` follows epoch `e`.
    pub trajectories: Option<Vec<Vec<Vec<f64>>>>,
}

/// Linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(f64::total_cmp);
    xs
}

impl RunStats {
    pub fn runs(&self) -> usize {
        self.ca.len()
    }

    pub fn epochs(&self) -> usize {
        self.ca.first().map_or(0, Vec::len)
    }

    pub fn ce(&self) -> Vec<Vec<f64>> {
        self.ca
            .iter()
            .map(|r| r.iter().map(|c| 100.0 - c).collect())
            .collect()
    }

    fn column(&self, epoch: usize) -> Vec<f64> {
        self.ca.iter().map(|r| r[epoch]).collect()
    }

    /// Min, quartiles and max of CA across runs, per epoch.
    pub fn quantiles(&self) -> Vec<[f64; 5]> {
        (0..self.epochs())
            .map(|e| {
                let s = sorted(self.column(e));
                [0.0, 0.25, 0.5, 0.75, 1.0].map(|q| quantile(&s, q))
            })
            .collect()
    }

    fn tail(&self) -> usize {
        self.epochs().min(5)
    }

    /// Mean CA over the last five epochs of each run.
    pub fn last5_per_run(&self) -> Vec<f64> {
        let k = self.tail();
        self.ca.iter().map(|r| mean(&r[r.len() - k..])).collect()
    }

    pub fn mean_last5(&self) -> f64 {
        mean(&self.last5_per_run())
    }

    /// Mean CE over the last five epochs, per run.
    pub fn last5_ce_per_run(&self) -> Vec<f64> {
        self.last5_per_run().iter().map(|c| 100.0 - c).collect()
    }

    /// Run-averaged standard deviation of CA over the last five epochs.
    pub fn last5_std(&self) -> f64 {
        let k = self.tail();
        mean(&self.ca.iter().map(|r| std_dev(&r[r.len() - k..])).collect::<Vec<_>>())
    }

    /// Highest CA seen in any run at any epoch.
    pub fn peak(&self) -> f64 {
        self.ca.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_iqr(&self) -> f64 {
        let s = sorted(self.column(self.epochs() - 1));
        quantile(&s, 0.75) - quantile(&s, 0.25)
    }

    /// Mean over runs and synapses of the summed absolute conductance
    /// change between consecutive snapshots, divided by the epoch count.
    pub fn total_variation_per_epoch(&self) -> Option<f64> {
        let traj = self.trajectories.as_ref()?;
        let mut per_run = Vec::with_capacity(traj.len());
        for run in traj {
            let epochs = run.len().saturating_sub(1);
            if epochs == 0 || run[0].is_empty() {
                return None;
            }
            let synapses = run[0].len();
            let tv: f64 = run
                .windows(2)
                .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).abs()).sum::<f64>())
                .sum();
            per_run.push(tv / (synapses * epochs) as f64);
        }
        Some(mean(&per_run))
    }
}

/// Everything a run needs that does not change between runs.
struct Prepared {
    data: Dataset,
    bank: SensorBank,
    backend: BackendSpec,
}

fn prepare(cfg: &ExperimentConfig, table: Option<&Arc<DeviceTable>>) -> Result<Prepared> {
    cfg.validate()?;
    Ok(Prepared {
        data: cfg.dataset.load()?,
        bank: cfg.encoding.bank()?,
        backend: cfg.backend_spec(table)?,
    })
}

fn single_run(cfg: &ExperimentConfig, p: &Prepared, run: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let rs = seed::run_seed(cfg.seed, run);
    let (train, test) = dataset::split(&p.data, cfg.train_fraction, seed::derive(rs, seed::SPLIT))?;
    let mut net = Network::new(
        p.bank.num_inputs(p.data.num_features),
        p.data.num_classes,
        &p.backend,
        cfg.lif,
        p.bank.window_ms,
        seed::derive(seed::derive(rs, seed::INIT), cfg.init_salt),
        seed::derive(rs, seed::SYNAPSE),
    )?;
    let mut order_rng = seed::rng(seed::derive(rs, seed::SHUFFLE));
    let mut ca = Vec::with_capacity(cfg.epochs);
    let mut traj = Vec::new();
    if cfg.record_trajectories {
        traj.push(net.conductances());
    }
    for _ in 0..cfg.epochs {
        net.train_epoch(&train, &p.bank, &mut order_rng)?;
        ca.push(net.evaluate(&test, &p.bank)?);
        if cfg.record_trajectories {
            traj.push(net.conductances());
        }
    }
    Ok((ca, traj))
}

fn run_prepared(cfg: &ExperimentConfig, p: &Prepared) -> Result<RunStats> {
    let results: Vec<_> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| single_run(cfg, p, r))
        .collect::<Result<_>>()?;
    let (ca, traj): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(RunStats {
        ca,
        trajectories: cfg.record_trajectories.then_some(traj),
    })
}

/// `runs` independent trainings, each followed by an evaluation per epoch.
pub fn run_training(cfg: &ExperimentConfig) -> Result<RunStats> {
    run_prepared(cfg, &prepare(cfg, None)?)
}

/// Like [`run_training`] but with an already built device table.
pub fn run_training_with_table(cfg: &ExperimentConfig, table: &Arc<DeviceTable>) -> Result<RunStats> {
    run_prepared(cfg, &prepare(cfg, Some(table))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub a_plus: f64,
    pub a_minus: f64,
    pub stats: RunStats,
}

impl SurfacePoint {
    pub fn mean_ca(&self) -> f64 {
        self.stats.mean_last5()
    }
}

/// Ideal-backend training at each `(a_plus, a_minus)` pair.
pub fn sweep_learning_rate(base: &ExperimentConfig, grid: &[(f64, f64)]) -> Result<Vec<SurfacePoint>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    grid.iter()
        .map(|&(a_plus, a_minus)| {
            let mut cfg = base.with_backend(BackendKind::Ideal);
            cfg.stdp.a_plus = a_plus;
            cfg.stdp.a_minus = a_minus;
            Ok(SurfacePoint {
                a_plus,
                a_minus,
                stats: run_training(&cfg)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSweep {
    /// Continuous (ideal) synapses under the same seeds.
    pub control: RunStats,
    pub levels: Vec<(usize, RunStats)>,
}

/// Quantized-backend training at each level count plus a continuous
/// control.
pub fn sweep_levels(base: &ExperimentConfig, levels: &[usize]) -> Result<LevelSweep> {
    if levels.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(&bad) = levels.iter().find(|&&l| l < 2) {
        return Err(Error::TooFewLevels(bad));
    }
    let control = run_training(&base.with_backend(BackendKind::Ideal))?;
    let levels = levels
        .iter()
        .map(|&n| {
            let mut cfg = base.with_backend(BackendKind::Quantized);
            cfg.backend.n_levels = n;
            Ok((n, run_training(&cfg)?))
        })
        .collect::<Result<_>>()?;
    Ok(LevelSweep { control, levels })
}

/// Training length for an `n`-device synapse: proportional to `n`, 50
/// epochs at `n = 100`, never fewer than 20.
pub fn epochs_for_n(n: usize) -> usize {
    ((n as f64 / 2.0).round() as usize).max(20)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NPoint {
    pub n: usize,
    pub epochs: usize,
    pub stats: RunStats,
}

/// Multi-RRAM training for each device count, with trajectories recorded.
pub fn sweep_n(base: &ExperimentConfig, ns: &[usize]) -> Result<Vec<NPoint>> {
    if ns.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if ns.contains(&0) {
        return Err(Error::InvalidConfig("device count must be >= 1".into()));
    }
    let table = Arc::new(base.device_table()?);
    ns.iter()
        .map(|&n| {
            let mut cfg = base.with_backend(BackendKind::MultiRram);
            cfg.backend.n_devices = n;
            cfg.epochs = epochs_for_n(n);
            cfg.record_trajectories = true;
            Ok(NPoint {
                n,
                epochs: cfg.epochs,
                stats: run_training_with_table(&cfg, &table)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleDeviceReport {
    /// Single device, first initial condition.
    pub ic1: RunStats,
    /// Single device, second initial condition.
    pub ic2: RunStats,
    /// Ideal synapses, first initial condition.
    pub ideal: RunStats,
    /// 64 devices per synapse, first initial condition.
    pub multi64: RunStats,
}

pub const MULTI_RECOVERY_N: usize = 64;

/// Single-device training from two initial conditions, with an ideal
/// control and a 64-device recovery run under the same seeds.
pub fn single_device_experiment(base: &ExperimentConfig) -> Result<SingleDeviceReport> {
    let table = Arc::new(base.device_table()?);
    let mut single = base.with_backend(BackendKind::SingleDevice);
    single.record_trajectories = true;
    let ic = |salt: u64| {
        let mut c = single.clone();
        c.init_salt = salt;
        run_training_with_table(&c, &table)
    };
    let ic1 = ic(1)?;
    let ic2 = ic(2)?;
    let mut ideal = base.with_backend(BackendKind::Ideal);
    ideal.init_salt = 1;
    let mut multi = base.with_backend(BackendKind::MultiRram);
    multi.init_salt = 1;
    multi.backend.n_devices = MULTI_RECOVERY_N;
    multi.epochs = base.epochs.max(epochs_for_n(MULTI_RECOVERY_N));
    Ok(SingleDeviceReport {
        ic1,
        ic2,
        ideal: run_training(&ideal)?,
        multi64: run_training_with_table(&multi, &table)?,
    })
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_ca_csv<W: Write>(stats: &RunStats, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["run", "epoch", "ca"])?;
    for (r, series) in stats.ca.iter().enumerate() {
        for (e, ca) in series.iter().enumerate() {
            wtr.write_record([r.to_string(), (e + 1).to_string(), ca.to_string()])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_quantiles_csv<W: Write>(stats: &RunStats, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["epoch", "q0", "q25", "q50", "q75", "q100"])?;
    for (e, q) in stats.quantiles().iter().enumerate() {
        let mut rec = vec![(e + 1).to_string()];
        rec.extend(q.iter().map(f64::to_string));
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_trajectories_csv<W: Write>(stats: &RunStats, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["run", "epoch", "synapse_id", "g"])?;
    for (r, run) in stats.trajectories.iter().flatten().enumerate() {
        for (e, snap) in run.iter().enumerate() {
            for (s, g) in snap.iter().enumerate() {
                wtr.write_record([r.to_string(), e.to_string(), s.to_string(), g.to_string()])?;
            }
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_surface_csv<W: Write>(points: &[SurfacePoint], w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["a_plus", "a_minus", "mean_ca"])?;
    for p in points {
        wtr.write_record([p.a_plus.to_string(), p.a_minus.to_string(), p.mean_ca().to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Per-run last-5-epoch CE for every level count; the control is labelled
/// `continuous`.
pub fn write_levels_csv<W: Write>(sweep: &LevelSweep, w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["levels", "run", "ce"])?;
    let rows = std::iter::once(("continuous".to_string(), &sweep.control))
        .chain(sweep.levels.iter().map(|(n, s)| (n.to_string(), s)));
    for (label, stats) in rows {
        for (r, ce) in stats.last5_ce_per_run().iter().enumerate() {
            wtr.write_record([label.clone(), r.to_string(), ce.to_string()])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_sweep_n_csv<W: Write>(points: &[NPoint], w: W) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["n", "epochs", "mean_last5", "peak", "final_iqr", "tv_per_epoch"])?;
    for p in points {
        let tv = p.stats.total_variation_per_epoch().unwrap_or(f64::NAN);
        wtr.write_record([
            p.n.to_string(),
            p.epochs.to_string(),
            p.stats.mean_last5().to_string(),
            p.stats.peak().to_string(),
            p.stats.final_iqr().to_string(),
            tv.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn parse<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let v = rec.get(i).unwrap_or("");
    v.parse().map_err(|_| Error::Parse {
        line,
        value: v.to_string(),
    })
}

/// Inverse of [`write_ca_csv`].
pub fn read_ca_csv<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut ca: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in csv::Reader::from_reader(r).records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let run: usize = parse(&rec, 0, line)?;
        let value: f64 = parse(&rec, 2, line)?;
        if run >= ca.len() {
            ca.resize(run + 1, Vec::new());
        }
        ca[run].push(value);
    }
    Ok(ca)
}

/// Inverse of [`write_trajectories_csv`].
pub fn read_trajectories_csv<R: Read>(r: R) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut traj: Vec<Vec<Vec<f64>>> = Vec::new();
    for (i, rec) in csv::Reader::from_reader(r).records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let run: usize = parse(&rec, 0, line)?;
        let epoch: usize = parse(&rec, 1, line)?;
        let g: f64 = parse(&rec, 3, line)?;
        if run >= traj.len() {
            traj.resize(run + 1, Vec::new());
        }
        if epoch >= traj[run].len() {
            traj[run].resize(epoch + 1, Vec::new());
        }
        traj[run][epoch].push(g);
    }
    Ok(traj)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Write `ca.csv`, `quantiles.csv` and, when recorded, `trajectories.csv`
/// into `dir`. Returns the file names written.
pub fn write_run_outputs(dir: &Path, stats: &RunStats) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_ca_csv(stats, create(&dir.join("ca.csv"))?)?;
    write_quantiles_csv(stats, create(&dir.join("quantiles.csv"))?)?;
    let mut names = vec!["ca.csv".to_string(), "quantiles.csv".to_string()];
    if stats.trajectories.is_some() {
        write_trajectories_csv(stats, create(&dir.join("trajectories.csv"))?)?;
        names.push("trajectories.csv".into());
    }
    Ok(names)
}

/// Read back what [`write_run_outputs`] wrote.
pub fn read_run_outputs(dir: &Path) -> Result<RunStats> {
    let open = |name: &str| {
        let p = dir.join(name);
        fs::File::open(&p).map_err(|e| Error::io(p, e))
    };
    let ca = read_ca_csv(open("ca.csv")?)?;
    let traj_path = dir.join("trajectories.csv");
    let trajectories = if traj_path.exists() {
        Some(read_trajectories_csv(open("trajectories.csv")?)?)
    } else {
        None
    };
    Ok(RunStats { ca, trajectories })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a ExperimentConfig,
    pub outputs: Vec<String>,
}

pub fn write_manifest(dir: &Path, command: &str, cfg: &ExperimentConfig, outputs: Vec<String>) -> Result<()> {
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    let path = dir.join("manifest.json");
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}
