//! Exponential STDP rules and conductance-level quantization.
//!
//! Time differences are `dt = t_post - t_pre` in milliseconds. The training
//! rule potentiates for `dt >= 0` and depresses for `dt < 0`; both branches
//! decay with `|dt|` and are scaled by a saturation factor that vanishes at
//! the rail the update is moving toward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the training rule. Amplitudes are fractions of `g_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StdpParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Saturation exponent.
    pub p: f64,
    pub g_max: f64,
    pub g_min: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        Self {
            a_plus: 0.01,
            a_minus: 0.01,
            tau_plus: 50.0,
            tau_minus: 50.0,
            p: 1.0,
            g_max: 1.0,
            g_min: 0.0,
        }
    }
}

impl StdpParams {
    pub fn with_rates(a_plus: f64, a_minus: f64) -> Self {
        Self {
            a_plus,
            a_minus,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.a_plus >= 0.0
            && self.a_minus >= 0.0
            && self.tau_plus > 0.0
            && self.tau_minus > 0.0
            && self.p >= 0.0
            && self.g_max > self.g_min;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("bad STDP parameters: {self:?}")))
        }
    }

    /// Largest single-update conductance change, as a fraction of `g_max`.
    pub fn learning_rate(&self) -> f64 {
        self.a_plus.abs().max(self.a_minus.abs())
    }

    fn check_range(&self, g: f64) -> Result<()> {
        if g.is_finite() && g >= self.g_min && g <= self.g_max {
            Ok(())
        } else {
            Err(Error::ConductanceOutOfRange {
                g,
                min: self.g_min,
                max: self.g_max,
            })
        }
    }
}

/// Conductance change of the training rule, clamped so that `g + dg` stays
/// inside `[g_min, g_max]`.
pub fn delta_g_train(dt: f64, g: f64, params: &StdpParams) -> Result<f64> {
    params.check_range(g)?;
    let rel = g / params.g_max;
    let raw = if dt >= 0.0 {
        params.a_plus.abs()
            * params.g_max
            * (-dt / params.tau_plus).exp()
            * (1.0 - rel).max(0.0).powf(params.p)
    } else {
        -params.a_minus.abs()
            * params.g_max
            * (dt / params.tau_minus).exp()
            * rel.max(0.0).powf(params.p)
    };
    Ok((g + raw).clamp(params.g_min, params.g_max) - g)
}

/// Saturating rule used to illustrate biological STDP.
///
/// Follows the branch labelling where `a_plus` (positive) applies to `dt < 0`
/// and `a_minus` (non-positive) applies to `dt >= 0`; conductances live on
/// `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiPooParams {
    pub a_plus: f64,
    pub a_minus: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub exp_plus: f64,
    pub exp_minus: f64,
}

impl Default for BiPooParams {
    fn default() -> Self {
        Self {
            a_plus: 1.0,
            a_minus: -1.0,
            tau_plus: 50.0,
            tau_minus: 50.0,
            exp_plus: 1.5,
            exp_minus: 1.5,
        }
    }
}

pub fn delta_g_bipoo(dt: f64, g: f64, params: &BiPooParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::ConductanceOutOfRange {
            g,
            min: 0.0,
            max: 1.0,
        });
    }
    let dg = if dt < 0.0 {
        params.a_plus * (1.0 - g).powf(params.exp_plus) * (dt / params.tau_plus).exp()
    } else {
        params.a_minus * g.powf(params.exp_minus) * (-dt / params.tau_minus).exp()
    };
    Ok(dg)
}

/// Snap `g` to the nearest of `n_levels` evenly spaced levels spanning
/// `[g_min, g_max]`. Exact midpoints go to the higher level.
pub fn quantize(g: f64, n_levels: usize, g_min: f64, g_max: f64) -> Result<f64> {
    if n_levels < 2 {
        return Err(Error::TooFewLevels(n_levels));
    }
    let step = (g_max - g_min) / (n_levels - 1) as f64;
    let idx = ((g - g_min) / step + 0.5).floor();
    let idx = idx.clamp(0.0, (n_levels - 1) as f64);
    Ok(g_min + idx * step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn train_rule_endpoints() {
        let p = StdpParams::with_rates(0.02, 0.03);
        assert_abs_diff_eq!(delta_g_train(0.0, 0.0, &p).unwrap(), 0.02);
        assert_abs_diff_eq!(
            delta_g_train(-1e-12, 1.0, &p).unwrap(),
            -0.03,
            epsilon = 1e-12
        );
    }

    #[test]
    fn train_rule_one_time_constant() {
        let p = StdpParams::with_rates(0.02, 0.02);
        // Scalar evaluation, independent of the branch logic.
        let expected = 0.02 * (-1.0f64).exp();
        assert_abs_diff_eq!(delta_g_train(50.0, 0.0, &p).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 0.00736, epsilon = 5e-6);
    }

    #[test]
    fn train_rule_rejects_out_of_range() {
        let p = StdpParams::default();
        assert!(delta_g_train(1.0, 1.2, &p).is_err());
        assert!(delta_g_train(1.0, -0.1, &p).is_err());
    }

    #[test]
    fn train_rule_clamps_large_rates() {
        let p = StdpParams {
            p: 0.0,
            ..StdpParams::with_rates(0.8, 0.8)
        };
        assert_abs_diff_eq!(delta_g_train(0.0, 0.5, &p).unwrap(), 0.5);
        assert_abs_diff_eq!(delta_g_train(-1.0, 0.5, &p).unwrap(), -0.5);
    }

    #[test]
    fn bipoo_saturation() {
        let p = BiPooParams::default();
        assert_eq!(delta_g_bipoo(-5.0, 1.0, &p).unwrap(), 0.0);
        assert_eq!(delta_g_bipoo(5.0, 0.0, &p).unwrap(), 0.0);
        let dg = delta_g_bipoo(1e-12, 0.5, &p).unwrap();
        assert_abs_diff_eq!(dg, -0.5f64.powf(1.5), epsilon = 1e-9);
        assert_abs_diff_eq!(dg.abs(), 0.3536, epsilon = 1e-4);
        assert!(delta_g_bipoo(0.0, 1.5, &p).is_err());
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(0.5, 3, 0.0, 1.0).unwrap(), 0.5);
        assert_eq!(quantize(0.3, 2, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(quantize(0.5, 2, 0.0, 1.0).unwrap(), 1.0);
        assert!(matches!(quantize(0.5, 1, 0.0, 1.0), Err(Error::TooFewLevels(1))));
    }

    proptest! {
        #[test]
        fn train_rule_stays_in_range(dt in -200.0f64..200.0, g in 0.0f64..=1.0,
                                     a in 0.0f64..2.0, p in 0.0f64..3.0) {
            let params = StdpParams { p, ..StdpParams::with_rates(a, a) };
            let dg = delta_g_train(dt, g, &params).unwrap();
            prop_assert!(g + dg >= -1e-12 && g + dg <= 1.0 + 1e-12);
        }

        #[test]
        fn train_rule_decays_with_gap(dt in 0.0f64..150.0, extra in 0.0f64..50.0, g in 0.0f64..=1.0) {
            let params = StdpParams::with_rates(0.02, 0.03);
            let near = delta_g_train(dt, g, &params).unwrap().abs();
            let far = delta_g_train(dt + extra, g, &params).unwrap().abs();
            prop_assert!(far <= near + 1e-15);
            let near = delta_g_train(-dt - 1e-9, g, &params).unwrap().abs();
            let far = delta_g_train(-dt - extra - 1e-9, g, &params).unwrap().abs();
            prop_assert!(far <= near + 1e-15);
        }

        #[test]
        fn p_zero_gives_bare_amplitudes(a_p in 0.0f64..0.5, a_m in 0.0f64..0.5, g in 0.5f64..=0.5) {
            let params = StdpParams { p: 0.0, ..StdpParams::with_rates(a_p, a_m) };
            prop_assert_eq!(delta_g_train(0.0, g, &params).unwrap(), (g + a_p).min(1.0) - g);
            prop_assert!((delta_g_train(-1e-300, g, &params).unwrap() + a_m).abs() < 1e-12);
        }

        #[test]
        fn quantize_idempotent_and_bounded(g in 0.0f64..=1.0, n in 2usize..2048) {
            let q = quantize(g, n, 0.0, 1.0).unwrap();
            prop_assert_eq!(quantize(q, n, 0.0, 1.0).unwrap(), q);
            prop_assert!((g - q).abs() <= 1.0 / (2.0 * (n - 1) as f64) + 1e-12);
        }
    }
}
