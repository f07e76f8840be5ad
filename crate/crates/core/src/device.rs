//! Threshold-memristor response to shaped write pulses.
//!
//! Each neuron answers its own spike with a write pulse: a fast positive
//! ramp that ends at the spike instant followed by a slow negative tail. The
//! device sees the difference of the pre- and post-synaptic pulses and only
//! changes conductance where that difference overshoots a write threshold.
//! The overshoot ("overdrive") depends on the spike-time difference, which
//! is what makes the device learn by STDP.
//!
//! Times are in milliseconds, voltages in volts and conductances are
//! normalized to `[0, 1]`.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One write-pulse waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    /// Peak of the leading ramp (V, > 0).
    pub amp_pos: f64,
    /// Start of the trailing tail (V, < 0).
    pub amp_neg: f64,
    /// Ramp duration (ms).
    pub width_pos: f64,
    /// Tail duration (ms).
    pub width_neg: f64,
    pub tau_pos: f64,
    pub tau_neg: f64,
}

impl PulseShape {
    /// 1 V / -1 V, 1 us ramp with 0.5 us constant, 100 ms tail with 50 ms
    /// constant.
    pub fn reference() -> Self {
        Self {
            amp_pos: 1.0,
            amp_neg: -1.0,
            width_pos: 1e-3,
            width_neg: 100.0,
            tau_pos: 5e-4,
            tau_neg: 50.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.amp_pos > 0.0
            && self.amp_neg < 0.0
            && self.width_pos > 0.0
            && self.width_neg > 0.0
            && self.tau_pos > 0.0
            && self.tau_neg > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad pulse shape {self:?}")))
        }
    }

    /// Voltage at time `t` relative to the spike. Both branches are
    /// normalized so the waveform is 0 at `-width_pos` and `width_neg` and
    /// reaches its amplitudes next to `t = 0`.
    pub fn voltage(&self, t: f64) -> f64 {
        if t >= -self.width_pos && t < 0.0 {
            let floor = (-self.width_pos / self.tau_pos).exp();
            self.amp_pos * ((t / self.tau_pos).exp() - floor) / (1.0 - floor)
        } else if t > 0.0 && t <= self.width_neg {
            let floor = (-self.width_neg / self.tau_neg).exp();
            self.amp_neg * ((-t / self.tau_neg).exp() - floor) / (1.0 - floor)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    Plus,
    Minus,
}

/// The two pulse shapes of a synapse. The pre-synaptic neuron drives the
/// `plus` shape, the post-synaptic neuron the `minus` shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WritePulseParams {
    pub plus: PulseShape,
    pub minus: PulseShape,
}

impl Default for WritePulseParams {
    fn default() -> Self {
        Self {
            plus: PulseShape::reference(),
            minus: PulseShape::reference(),
        }
    }
}

impl WritePulseParams {
    pub fn shape(&self, polarity: Polarity) -> &PulseShape {
        match polarity {
            Polarity::Plus => &self.plus,
            Polarity::Minus => &self.minus,
        }
    }

    pub fn pre(&self) -> &PulseShape {
        &self.plus
    }

    pub fn post(&self) -> &PulseShape {
        &self.minus
    }
}

pub fn pulse_voltage(t: f64, params: &WritePulseParams, polarity: Polarity) -> f64 {
    params.shape(polarity).voltage(t)
}

/// Voltage across the device when the pre pulse starts at 0 and the post
/// pulse at `dt`.
pub fn net_voltage(dt: f64, t: f64, pre: &PulseShape, post: &PulseShape) -> f64 {
    pre.voltage(t) - post.voltage(t - dt)
}

/// Extremes of the net waveform over its support, as `(max, min)`.
///
/// The scan is dense (`tau_pos / 10`) across each ramp and coarser
/// (`tau_neg / 100`) over the tails; one-sided limits are taken at every
/// breakpoint since the ramps peak just before the spike instant.
pub fn net_extremes(dt: f64, pre: &PulseShape, post: &PulseShape) -> (f64, f64) {
    let mut times = Vec::with_capacity(1024);
    let lo = (-pre.width_pos).min(dt - post.width_pos);
    let hi = pre.width_neg.max(dt + post.width_neg);

    let coarse = pre.tau_neg.min(post.tau_neg) / 100.0;
    let steps = ((hi - lo) / coarse).ceil() as usize;
    times.extend((0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64));

    for (t0, shape) in [(0.0, pre), (dt, post)] {
        let fine = shape.tau_pos / 10.0;
        let n = (shape.width_pos / fine).ceil() as usize;
        let start = t0 - shape.width_pos;
        times.extend((0..=n).map(|i| start + shape.width_pos * i as f64 / n as f64));
        let eps = shape.tau_pos * 1e-9;
        times.extend([t0 - eps, t0 + eps, start + eps, t0 + shape.width_neg - eps]);
    }

    times
        .into_iter()
        .map(|t| net_voltage(dt, t, pre, post))
        .fold((f64::NEG_INFINITY, f64::INFINITY), |(mx, mn), v| {
            (mx.max(v), mn.min(v))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMemristor {
    /// Positive write threshold (V).
    pub v_tp: f64,
    /// Negative write threshold, stored as a magnitude (V).
    pub v_tn: f64,
    /// Potentiation per volt of overdrive.
    pub gain_p: f64,
    /// Depression per volt of overdrive.
    pub gain_n: f64,
    pub p_dev: f64,
    /// Sigma of the multiplicative lognormal write noise; 0 disables it.
    pub noise_sigma: f64,
}

impl ThresholdMemristor {
    /// Pick the gains so that the largest possible single write (spike
    /// difference just past zero, conductance at the far rail) changes the
    /// conductance by `learning_rate` of its range.
    pub fn calibrated(
        learning_rate: f64,
        v_threshold: f64,
        p_dev: f64,
        noise_sigma: f64,
        pulses: &WritePulseParams,
    ) -> Result<Self> {
        let (pre, post) = (pulses.pre(), pulses.post());
        let peak_neg = post.amp_pos - pre.amp_neg - v_threshold;
        let peak_pos = pre.amp_pos - post.amp_neg - v_threshold;
        if peak_neg <= 0.0 || peak_pos <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "threshold {v_threshold} V is never reached by paired pulses"
            )));
        }
        let mem = Self {
            v_tp: v_threshold,
            v_tn: v_threshold,
            gain_p: learning_rate / peak_neg,
            gain_n: learning_rate / peak_pos,
            p_dev,
            noise_sigma,
        };
        mem.validate(pulses)?;
        Ok(mem)
    }

    /// Thresholds must exceed what any single pulse can apply on its own.
    pub fn validate(&self, pulses: &WritePulseParams) -> Result<()> {
        pulses.plus.validate()?;
        pulses.minus.validate()?;
        let lone = [pulses.plus, pulses.minus]
            .iter()
            .fold(0.0f64, |m, s| m.max(s.amp_pos).max(-s.amp_neg));
        if self.v_tp <= lone || self.v_tn <= lone {
            return Err(Error::InvalidConfig(format!(
                "thresholds ({}, {}) must exceed single-pulse amplitude {lone}",
                self.v_tp, self.v_tn
            )));
        }
        if self.gain_p <= 0.0 || self.gain_n <= 0.0 || self.noise_sigma < 0.0 {
            return Err(Error::InvalidConfig(format!("bad device gains {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overdrive {
    pub pos: f64,
    pub neg: f64,
}

pub fn overdrive(dt: f64, pulses: &WritePulseParams, mem: &ThresholdMemristor) -> Overdrive {
    let (mx, mn) = net_extremes(dt, pulses.pre(), pulses.post());
    Overdrive {
        pos: (mx - mem.v_tp).max(0.0),
        neg: (-mn - mem.v_tn).max(0.0),
    }
}

/// Conductance change for a given overdrive, without noise or clamping.
/// PCMO sets under negative bias, so the negative excursion (produced by a
/// causal pair) potentiates and the positive excursion depresses.
fn response(od: Overdrive, g: f64, mem: &ThresholdMemristor) -> f64 {
    mem.gain_p * od.neg * (1.0 - g).powf(mem.p_dev) - mem.gain_n * od.pos * g.powf(mem.p_dev)
}

fn check_unit(g: f64) -> Result<()> {
    if (0.0..=1.0).contains(&g) {
        Ok(())
    } else {
        Err(Error::ConductanceOutOfRange { g, min: 0.0, max: 1.0 })
    }
}

pub fn noise_free_delta_g(
    dt: f64,
    g: f64,
    mem: &ThresholdMemristor,
    pulses: &WritePulseParams,
) -> Result<f64> {
    check_unit(g)?;
    let dg = response(overdrive(dt, pulses, mem), g, mem);
    Ok((g + dg).clamp(0.0, 1.0) - g)
}

pub fn device_delta_g<R: Rng + ?Sized>(
    dt: f64,
    g: f64,
    mem: &ThresholdMemristor,
    pulses: &WritePulseParams,
    rng: &mut R,
) -> Result<f64> {
    check_unit(g)?;
    let mut dg = response(overdrive(dt, pulses, mem), g, mem);
    if mem.noise_sigma > 0.0 {
        let noise = LogNormal::new(0.0, mem.noise_sigma)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        dg *= noise.sample(rng);
    }
    Ok((g + dg).clamp(0.0, 1.0) - g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdpRecord {
    pub g_i: f64,
    pub dt: f64,
    pub dg: f64,
}

/// Emulates the bench measurement: start from the low-resistance state,
/// then repeatedly read, apply a pulse pair with a random spike-time
/// difference in `[-100, 100]` ms, and read again. Each final state is the
/// next iteration's initial state.
pub fn measure_stdp_protocol<R: Rng + ?Sized>(
    mem: &ThresholdMemristor,
    pulses: &WritePulseParams,
    iterations: usize,
    rng: &mut R,
) -> Result<Vec<StdpRecord>> {
    if iterations == 0 {
        return Err(Error::InvalidConfig("protocol needs at least one iteration".into()));
    }
    let dt_dist = Uniform::new_inclusive(-100.0, 100.0).expect("valid bounds");
    let mut g = 1.0;
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let dt = dt_dist.sample(rng);
        let dg = device_delta_g(dt, g, mem, pulses, rng)?;
        out.push(StdpRecord { g_i: g, dt, dg });
        g = (g + dg).clamp(0.0, 1.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TableGrid {
    pub g_points: usize,
    pub dt_points: usize,
    pub dt_span: f64,
}

impl Default for TableGrid {
    fn default() -> Self {
        Self {
            g_points: 21,
            dt_points: 201,
            dt_span: 100.0,
        }
    }
}

impl TableGrid {
    fn axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.g_points < 2 || self.dt_points < 2 || self.dt_span <= 0.0 {
            return Err(Error::InvalidTable(format!("bad grid {self:?}")));
        }
        let g = linspace(0.0, 1.0, self.g_points);
        let dt = linspace(-self.dt_span, self.dt_span, self.dt_points);
        Ok((g, dt))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Sampled `(g, dt) -> dg` surface with bilinear lookup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceTable {
    g_axis: Vec<f64>,
    dt_axis: Vec<f64>,
    /// Row-major: `dg[i * dt_axis.len() + j]` is at `(g_axis[i], dt_axis[j])`.
    dg: Vec<f64>,
}

impl DeviceTable {
    pub fn new(g_axis: Vec<f64>, dt_axis: Vec<f64>, dg: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&g_axis) || !increasing(&dt_axis) {
            return Err(Error::InvalidTable("axes must be strictly increasing with >= 2 points".into()));
        }
        if dg.len() != g_axis.len() * dt_axis.len() {
            return Err(Error::InvalidTable(format!(
                "grid has {} values, expected {}",
                dg.len(),
                g_axis.len() * dt_axis.len()
            )));
        }
        if dg.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite grid value".into()));
        }
        Ok(Self { g_axis, dt_axis, dg })
    }

    /// Noise-free table sampled directly from the device model.
    pub fn from_model(
        mem: &ThresholdMemristor,
        pulses: &WritePulseParams,
        grid: &TableGrid,
    ) -> Result<Self> {
        let (g_axis, dt_axis) = grid.axes()?;
        let ods: Vec<Overdrive> = dt_axis.iter().map(|&dt| overdrive(dt, pulses, mem)).collect();
        let mut dg = Vec::with_capacity(g_axis.len() * dt_axis.len());
        for &g in &g_axis {
            for od in &ods {
                let d = response(*od, g, mem);
                dg.push((g + d).clamp(0.0, 1.0) - g);
            }
        }
        Self::new(g_axis, dt_axis, dg)
    }

    /// Measure the device with the bench protocol and tabulate the result.
    pub fn synthesize<R: Rng + ?Sized>(
        mem: &ThresholdMemristor,
        pulses: &WritePulseParams,
        grid: &TableGrid,
        iterations: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let scatter = measure_stdp_protocol(mem, pulses, iterations, rng)?;
        build_table(&scatter, grid, mem, pulses)
    }

    pub fn g_axis(&self) -> &[f64] {
        &self.g_axis
    }

    pub fn dt_axis(&self) -> &[f64] {
        &self.dt_axis
    }

    pub fn value(&self, gi: usize, dj: usize) -> f64 {
        self.dg[gi * self.dt_axis.len() + dj]
    }

    /// Bilinear lookup; queries outside the grid are clamped to its edge.
    pub fn interpolate(&self, dt: f64, g: f64) -> f64 {
        let (i, u) = bracket(&self.g_axis, g);
        let (j, v) = bracket(&self.dt_axis, dt);
        let f00 = self.value(i, j);
        let f01 = self.value(i, j + 1);
        let f10 = self.value(i + 1, j);
        let f11 = self.value(i + 1, j + 1);
        (1.0 - u) * ((1.0 - v) * f00 + v * f01) + u * ((1.0 - v) * f10 + v * f11)
    }

    /// Largest `|dg|` anywhere on the grid.
    pub fn max_abs_dg(&self) -> f64 {
        self.dg.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wtr.write_record(["g_i", "dt_ms", "dg"])?;
        for (i, g) in self.g_axis.iter().enumerate() {
            for (j, dt) in self.dt_axis.iter().enumerate() {
                wtr.write_record([g.to_string(), dt.to_string(), self.value(i, j).to_string()])?;
            }
        }
        wtr.flush().map_err(|e| Error::io("<device table>", e))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads `g_i,dt_ms,dg` rows, row-major by `g_i` then `dt_ms`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["g_i", "dt_ms", "dg"] {
            return Err(Error::InvalidTable(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                let s = rec.get(k).unwrap_or("");
                s.parse().map_err(|_| Error::Parse {
                    line: n + 2,
                    value: s.to_string(),
                })
            };
            rows.push((num(0)?, num(1)?, num(2)?));
        }
        let mut g_axis: Vec<f64> = Vec::new();
        for &(g, _, _) in &rows {
            if g_axis.last() != Some(&g) {
                g_axis.push(g);
            }
        }
        if g_axis.is_empty() || rows.len() % g_axis.len() != 0 {
            return Err(Error::InvalidTable("rows do not form a complete grid".into()));
        }
        let n_dt = rows.len() / g_axis.len();
        let dt_axis: Vec<f64> = rows[..n_dt].iter().map(|r| r.1).collect();
        for (k, &(g, dt, _)) in rows.iter().enumerate() {
            if g != g_axis[k / n_dt] || dt != dt_axis[k % n_dt] {
                return Err(Error::InvalidTable(format!("row {} breaks grid order", k + 2)));
            }
        }
        Self::new(g_axis, dt_axis, rows.into_iter().map(|r| r.2).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f)
    }
}

/// Index of the lower bracketing node and the fractional position within
/// the bracket, clamped to the axis.
fn bracket(axis: &[f64], x: f64) -> (usize, f64) {
    let last = axis.len() - 1;
    if x <= axis[0] {
        return (0, 0.0);
    }
    if x >= axis[last] {
        return (last - 1, 1.0);
    }
    let hi = axis.partition_point(|&a| a <= x).min(last);
    let lo = hi - 1;
    (lo, (x - axis[lo]) / (axis[hi] - axis[lo]))
}

/// Bin a measured scatter onto the grid (mean of the records nearest each
/// node). Nodes with no records take the noise-free model value.
pub fn build_table(
    scatter: &[StdpRecord],
    grid: &TableGrid,
    mem: &ThresholdMemristor,
    pulses: &WritePulseParams,
) -> Result<DeviceTable> {
    let (g_axis, dt_axis) = grid.axes()?;
    let (ng, nd) = (g_axis.len(), dt_axis.len());
    let mut sum = vec![0.0; ng * nd];
    let mut count = vec![0usize; ng * nd];
    let nearest = |axis: &[f64], x: f64| -> usize {
        let (i, u) = bracket(axis, x);
        if u < 0.5 { i } else { i + 1 }
    };
    for r in scatter {
        let (gi, dj) = (nearest(&g_axis, r.g_i), nearest(&dt_axis, r.dt));
        sum[gi * nd + dj] += r.dg;
        count[gi * nd + dj] += 1;
    }
    let mut ods: Vec<Option<Overdrive>> = vec![None; nd];
    let mut dg = Vec::with_capacity(ng * nd);
    for (i, &g) in g_axis.iter().enumerate() {
        for j in 0..nd {
            let k = i * nd + j;
            if count[k] > 0 {
                dg.push(sum[k] / count[k] as f64);
            } else {
                let od = *ods[j].get_or_insert_with(|| overdrive(dt_axis[j], pulses, mem));
                let d = response(od, g, mem);
                dg.push((g + d).clamp(0.0, 1.0) - g);
            }
        }
    }
    DeviceTable::new(g_axis, dt_axis, dg)
}
