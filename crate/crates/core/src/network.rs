//! Single-layer feed-forward network of leaky integrate-and-fire outputs.
//!
//! Training uses teacher forcing: the labelled output is made to fire after
//! the whole input volley (every active synapse onto it sees a causal pair)
//! and every other output fires at the start of the window (every active
//! synapse onto it sees an anti-causal pair). Inference integrates the
//! membranes with a fixed step and picks the earliest output spike.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::encoding::{encode, SensorBank, SpikeTrain};
use crate::error::{Error, Result};
use crate::seed;
use crate::synapse::{BackendSpec, SynapseModel};

/// Forced post spike of the labelled output, past the end of the window.
pub const TEACHER_DELAY_MS: f64 = 10.0;
/// Extra integration time after the input window.
pub const TAIL_MS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifParams {
    pub tau_m: f64,
    pub v_th: f64,
    pub v_reset: f64,
    /// Charge injected per input spike per unit conductance. `None` uses
    /// `4 / (n_in * g_max)`.
    pub k_syn: Option<f64>,
    pub dt_sim: f64,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            tau_m: 150.0,
            v_th: 1.0,
            v_reset: 0.0,
            k_syn: None,
            dt_sim: 0.1,
        }
    }
}

impl LifParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tau_m > 0.0
            && self.v_th > self.v_reset
            && self.dt_sim > 0.0
            && self.dt_sim <= 1.0
            && self.k_syn.is_none_or(|k| k > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad LIF parameters {self:?}")))
        }
    }
}

/// Pre/post pair seen by synapse `(input, output)`; `delta_t = t_post - t_pre`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingEvent {
    pub input: usize,
    pub output: usize,
    pub delta_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    /// First spike of each output, if any.
    pub output_spikes: Vec<Option<f64>>,
    /// Membrane potentials at the end of integration.
    pub final_potentials: Vec<f64>,
    pub pairings: Vec<PairingEvent>,
}

#[derive(Debug, Clone)]
pub struct Network {
    n_in: usize,
    n_out: usize,
    /// Row-major: synapse `(i, j)` at `i * n_out + j`.
    synapses: Vec<SynapseModel>,
    /// One stream per synapse so stochastic writes do not depend on the
    /// order in which synapses are updated.
    synapse_rngs: Vec<ChaCha8Rng>,
    lif: LifParams,
    k_syn: f64,
    window_ms: f64,
}

impl Network {
    /// Initial conductances are independent uniform fractions of the range,
    /// drawn from `init_seed`; `stream_seed` keys the per-synapse streams.
    pub fn new(
        n_in: usize,
        n_out: usize,
        backend: &BackendSpec,
        lif: LifParams,
        window_ms: f64,
        init_seed: u64,
        stream_seed: u64,
    ) -> Result<Self> {
        lif.validate()?;
        if n_in == 0 || n_out == 0 {
            return Err(Error::InvalidConfig("network needs inputs and outputs".into()));
        }
        let mut rng = seed::rng(init_seed);
        let synapses = (0..n_in * n_out)
            .map(|_| backend.make(rng.random::<f64>()))
            .collect();
        let synapse_rngs = (0..n_in * n_out)
            .map(|k| seed::rng(seed::derive(stream_seed, k as u64)))
            .collect();
        let k_syn = lif
            .k_syn
            .unwrap_or(4.0 / (n_in as f64 * backend.g_max()));
        Ok(Self {
            n_in,
            n_out,
            synapses,
            synapse_rngs,
            lif,
            k_syn,
            window_ms,
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn k_syn(&self) -> f64 {
        self.k_syn
    }

    pub fn synapse(&self, input: usize, output: usize) -> &SynapseModel {
        &self.synapses[input * self.n_out + output]
    }

    /// Read-out conductance of every synapse, row-major.
    pub fn conductances(&self) -> Vec<f64> {
        self.synapses.iter().map(SynapseModel::read).collect()
    }

    pub fn teacher_time(&self) -> f64 {
        self.window_ms + TEACHER_DELAY_MS
    }

    pub fn present(&self, spikes: &SpikeTrain, teacher: Option<usize>) -> Presentation {
        match teacher {
            Some(y) => self.present_taught(spikes, y),
            None => self.integrate(spikes),
        }
    }

    fn present_taught(&self, spikes: &SpikeTrain, target: usize) -> Presentation {
        let t_teach = self.teacher_time();
        let output_spikes: Vec<Option<f64>> = (0..self.n_out)
            .map(|j| Some(if j == target { t_teach } else { 0.0 }))
            .collect();
        let mut pairings = Vec::with_capacity(spikes.len() * self.n_out);
        for e in spikes.events() {
            for (j, t_post) in output_spikes.iter().enumerate() {
                pairings.push(PairingEvent {
                    input: e.neuron,
                    output: j,
                    delta_t: t_post.expect("forced") - e.t,
                });
            }
        }
        Presentation {
            output_spikes,
            final_potentials: vec![self.lif.v_reset; self.n_out],
            pairings,
        }
    }

    fn integrate(&self, spikes: &SpikeTrain) -> Presentation {
        let dt = self.lif.dt_sim;
        let steps = ((self.window_ms + TAIL_MS) / dt).round() as usize;
        let decay = (-dt / self.lif.tau_m).exp();
        let weights = self.conductances();

        let mut v = vec![self.lif.v_reset; self.n_out];
        let mut first: Vec<Option<f64>> = vec![None; self.n_out];
        let events = spikes.events();
        let mut next = 0;
        for step in 0..=steps {
            let t = step as f64 * dt;
            if step > 0 {
                for x in v.iter_mut() {
                    *x = self.lif.v_reset + (*x - self.lif.v_reset) * decay;
                }
            }
            // Inputs land on the first grid point at or after their spike.
            while next < events.len() && events[next].t <= t + 1e-9 {
                let row = events[next].neuron * self.n_out;
                for (j, x) in v.iter_mut().enumerate() {
                    *x += self.k_syn * weights[row + j];
                }
                next += 1;
            }
            for (j, x) in v.iter_mut().enumerate() {
                if *x >= self.lif.v_th {
                    first[j].get_or_insert(t);
                    *x = self.lif.v_reset;
                }
            }
        }
        Presentation {
            output_spikes: first,
            final_potentials: v,
            pairings: Vec::new(),
        }
    }

    pub fn classify(&self, spikes: &SpikeTrain) -> usize {
        decide(&self.present(spikes, None))
    }

    /// Apply one pairing through the synapse backend.
    pub fn apply(&mut self, p: &PairingEvent) {
        let k = p.input * self.n_out + p.output;
        self.synapses[k].update(p.delta_t, &mut self.synapse_rngs[k]);
    }

    /// One pass over `train` in an order shuffled by `rng`.
    pub fn train_epoch<R: Rng + ?Sized>(
        &mut self,
        train: &Dataset,
        bank: &SensorBank,
        rng: &mut R,
    ) -> Result<()> {
        let mut order: Vec<usize> = (0..train.len()).collect();
        order.shuffle(rng);
        for idx in order {
            let sample = &train.samples[idx];
            let spikes = encode(sample, bank)?;
            let pres = self.present(&spikes, Some(sample.label));
            for p in &pres.pairings {
                self.apply(p);
            }
        }
        Ok(())
    }

    /// Classification accuracy in percent.
    pub fn evaluate(&self, test: &Dataset, bank: &SensorBank) -> Result<f64> {
        if test.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut correct = 0usize;
        for s in &test.samples {
            if self.classify(&encode(s, bank)?) == s.label {
                correct += 1;
            }
        }
        Ok(100.0 * correct as f64 / test.len() as f64)
    }
}

/// Earliest spike wins; without spikes, the highest final potential wins.
/// Remaining ties go to the lowest class index.
pub fn decide(p: &Presentation) -> usize {
    let earliest = p
        .output_spikes
        .iter()
        .enumerate()
        .filter_map(|(j, t)| t.map(|t| (j, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    if let Some((j, _)) = earliest {
        return j;
    }
    let mut best = 0;
    for (j, &v) in p.final_potentials.iter().enumerate() {
        if v > p.final_potentials[best] {
            best = j;
        }
    }
    best
}
