//! Latency coding of normalized features through triangular receptive
//! fields. Each sensor fires at most once per presentation window; stronger
//! activation fires earlier.

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorBank {
    pub sensors_per_feature: usize,
    pub window_ms: f64,
    pub centers: Vec<f64>,
    pub width: f64,
}

impl Default for SensorBank {
    fn default() -> Self {
        Self::new(4, 100.0).expect("default bank is valid")
    }
}

impl SensorBank {
    /// `k` evenly spaced fields with centers `(j + 0.5) / k` and half-width
    /// `2 / k`, so neighbouring fields overlap.
    pub fn new(k: usize, window_ms: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("need at least one sensor per feature".into()));
        }
        let centers = (0..k).map(|j| (j as f64 + 0.5) / k as f64).collect();
        Self::with_centers(centers, 2.0 / k as f64, window_ms)
    }

    pub fn with_centers(centers: Vec<f64>, width: f64, window_ms: f64) -> Result<Self> {
        let increasing = centers.windows(2).all(|w| w[0] < w[1]);
        let inside = centers.iter().all(|c| (0.0..=1.0).contains(c));
        if centers.is_empty() || !increasing || !inside || width <= 0.0 || window_ms <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "bad sensor bank: centers={centers:?} width={width} window={window_ms}"
            )));
        }
        Ok(Self {
            sensors_per_feature: centers.len(),
            window_ms,
            centers,
            width,
        })
    }

    pub fn num_inputs(&self, num_features: usize) -> usize {
        num_features * self.sensors_per_feature
    }

    pub fn activation(&self, x: f64, sensor: usize) -> f64 {
        (1.0 - (x - self.centers[sensor]).abs() / self.width).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeEvent {
    pub neuron: usize,
    pub t: f64,
}

/// Spike events sorted by time, ties by neuron id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    events: Vec<SpikeEvent>,
}

impl SpikeTrain {
    pub fn new(mut events: Vec<SpikeEvent>) -> Self {
        events.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.neuron.cmp(&b.neuron)));
        Self { events }
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn spike_time(&self, neuron: usize) -> Option<f64> {
        self.events.iter().find(|e| e.neuron == neuron).map(|e| e.t)
    }
}

/// Input neuron `f * k + j` carries sensor `j` of feature `f`.
pub fn encode(sample: &Sample, bank: &SensorBank) -> Result<SpikeTrain> {
    let k = bank.sensors_per_feature;
    let mut events = Vec::with_capacity(sample.features.len() * k);
    for (f, &x) in sample.features.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::FeatureOutOfRange { index: f, value: x });
        }
        for j in 0..k {
            let a = bank.activation(x, j);
            if a > 0.0 {
                events.push(SpikeEvent {
                    neuron: f * k + j,
                    t: bank.window_ms * (1.0 - a),
                });
            }
        }
    }
    Ok(SpikeTrain::new(events))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn one(x: f64) -> Sample {
        Sample {
            features: vec![x],
            label: 0,
        }
    }

    #[test]
    fn default_bank_layout() {
        let b = SensorBank::default();
        assert_eq!(b.centers, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(b.width, 0.5);
        assert_eq!(b.num_inputs(4), 16);
    }

    #[test]
    fn peak_activation_fires_at_zero() {
        let b = SensorBank::default();
        let st = encode(&one(0.375), &b).unwrap();
        assert_eq!(st.spike_time(1), Some(0.0));
    }

    #[test]
    fn far_sensor_is_silent() {
        let b = SensorBank::default();
        // |0.0 - 0.625| >= 0.5
        let st = encode(&one(0.0), &b).unwrap();
        assert_eq!(st.spike_time(2), None);
        assert_eq!(st.spike_time(3), None);
    }

    #[test]
    fn half_activation_fires_mid_window() {
        let b = SensorBank::default();
        let st = encode(&one(0.125 + 0.25), &b).unwrap();
        assert_abs_diff_eq!(st.spike_time(0).unwrap(), 50.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_out_of_range_feature() {
        let b = SensorBank::default();
        assert!(matches!(
            encode(&one(1.2), &b),
            Err(Error::FeatureOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn rejects_bad_banks() {
        assert!(SensorBank::new(0, 100.0).is_err());
        assert!(SensorBank::with_centers(vec![0.5, 0.2], 0.3, 100.0).is_err());
        assert!(SensorBank::new(4, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn spikes_bounded_and_unique(xs in proptest::collection::vec(0.0f64..=1.0, 1..8)) {
            let b = SensorBank::default();
            let s = Sample { features: xs.clone(), label: 0 };
            let st = encode(&s, &b).unwrap();
            prop_assert!(st.len() <= xs.len() * 4);
            let mut seen = std::collections::HashSet::new();
            for e in st.events() {
                prop_assert!(e.t >= 0.0 && e.t <= b.window_ms);
                prop_assert!(seen.insert(e.neuron));
            }
            prop_assert!(st.events().windows(2).all(|w| w[0].t <= w[1].t));
            prop_assert_eq!(encode(&s, &b).unwrap(), st);
        }

        #[test]
        fn stronger_activation_fires_earlier(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            let b = SensorBank::default();
            let (ta, tb) = (encode(&one(x), &b).unwrap(), encode(&one(y), &b).unwrap());
            for j in 0..4 {
                if let (Some(t1), Some(t2)) = (ta.spike_time(j), tb.spike_time(j)) {
                    if b.activation(x, j) > b.activation(y, j) {
                        prop_assert!(t1 < t2);
                    }
                }
            }
        }
    }
}
