//! Single-taxel physics: pressure to resistance, voltage-divider readout,
//! measurement noise and the loading/unloading lag of the fabric.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the initial value still remaining when a relaxation is
/// considered settled.
pub const SETTLING_FRACTION: f64 = 0.05;

/// Measured 95% settling time of the fabric after unloading, in seconds.
pub const UNLOAD_SETTLING_TIME: f64 = 0.41;

/// Pressure to resistance characteristic of one taxel.
///
/// Conductance grows as a power of the normalised pressure until the
/// saturation pressure, where the resistance has fallen to
/// `min_resistance_fraction * rest_resistance`:
///
/// ```text
/// R(p) = R_rest * f / (f + (1 - f) * min(p / p_sat, 1)^k)
/// ```
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PiezoModel {
    /// Ohms at zero pressure.
    pub rest_resistance: f64,
    pub min_resistance_fraction: f64,
    pub shape_exponent: f64,
    /// kPa.
    pub saturation_pressure: f64,
}

impl Default for PiezoModel {
    fn default() -> Self {
        Self {
            rest_resistance: 10.0e6,
            min_resistance_fraction: 0.005,
            shape_exponent: 2.0,
            saturation_pressure: 75.0,
        }
    }
}

impl PiezoModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.rest_resistance.is_finite() && self.rest_resistance > 0.0) {
            return Err(Error::config("rest_resistance must be positive"));
        }
        if !(self.min_resistance_fraction > 0.0 && self.min_resistance_fraction <= 0.01) {
            return Err(Error::config(
                "min_resistance_fraction must lie in (0, 0.01]",
            ));
        }
        if !(self.shape_exponent.is_finite() && self.shape_exponent > 0.0) {
            return Err(Error::config("shape_exponent must be positive"));
        }
        if !(self.saturation_pressure.is_finite() && self.saturation_pressure > 0.0) {
            return Err(Error::config("saturation_pressure must be positive"));
        }
        Ok(())
    }

    pub fn resistance(&self, pressure: f64) -> Result<f64> {
        resistance_from_pressure(self, pressure)
    }
}

pub fn resistance_from_pressure(model: &PiezoModel, pressure: f64) -> Result<f64> {
    if !(pressure >= 0.0) {
        return Err(Error::domain(format!(
            "pressure must be >= 0 kPa, got {pressure}"
        )));
    }
    let f = model.min_resistance_fraction;
    let u = pressure / model.saturation_pressure;
    if u >= 1.0 {
        return Ok(model.rest_resistance * f);
    }
    if u == 0.0 {
        return Ok(model.rest_resistance);
    }
    Ok(model.rest_resistance * f / (f + (1.0 - f) * u.powf(model.shape_exponent)))
}

/// Readout electronics: pull-up between supply and the measurement node,
/// sensor from the node to ground.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutConfig {
    /// Ohms.
    pub pullup_resistance: f64,
    /// Volts.
    pub supply_voltage: f64,
    /// Standard deviation of additive Gaussian read noise, volts.
    pub noise_std: f64,
    /// ADC resolution; 0 disables quantization.
    pub adc_bits: u32,
    /// Hertz.
    pub sample_rate: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self {
            pullup_resistance: 470.0e3,
            supply_voltage: 5.0,
            noise_std: 0.29,
            adc_bits: 10,
            sample_rate: 20.0,
        }
    }
}

impl ReadoutConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pullup_resistance.is_finite() && self.pullup_resistance > 0.0) {
            return Err(Error::config("pullup_resistance must be positive"));
        }
        if !(self.supply_voltage.is_finite() && self.supply_voltage > 0.0) {
            return Err(Error::config("supply_voltage must be positive"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::config("noise_std must be >= 0"));
        }
        if self.adc_bits > 32 {
            return Err(Error::config("adc_bits must be at most 32"));
        }
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::config("sample_rate must be positive"));
        }
        Ok(())
    }

    /// Voltage step between adjacent ADC codes, if quantization is enabled.
    pub fn adc_step(&self) -> Option<f64> {
        (self.adc_bits > 0).then(|| self.supply_voltage / self.adc_levels())
    }

    fn adc_levels(&self) -> f64 {
        ((1u64 << self.adc_bits) - 1) as f64
    }

    pub fn quantize(&self, volts: f64) -> f64 {
        match self.adc_step() {
            Some(step) => (volts / self.supply_voltage * self.adc_levels()).round() * step,
            None => volts,
        }
    }
}

/// Noiseless, unquantized divider output.
pub fn divider_voltage(resistance: f64, config: &ReadoutConfig) -> Result<f64> {
    if !(resistance > 0.0) {
        return Err(Error::domain(format!(
            "resistance must be > 0 ohm, got {resistance}"
        )));
    }
    let pullup = config.pullup_resistance;
    Ok(config.supply_voltage * (pullup / (pullup + resistance)))
}

/// Lagged internal pressure of the fabric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxationState {
    /// kPa.
    pub effective_pressure: f64,
    /// Seconds.
    pub load_time_constant: f64,
    /// Seconds.
    pub unload_time_constant: f64,
}

impl Default for RelaxationState {
    fn default() -> Self {
        Self {
            effective_pressure: 0.0,
            load_time_constant: 0.05,
            unload_time_constant: time_constant_for_settling(UNLOAD_SETTLING_TIME),
        }
    }
}

/// First-order time constant whose step response settles to
/// [`SETTLING_FRACTION`] of the initial offset after `settling_time`.
pub fn time_constant_for_settling(settling_time: f64) -> f64 {
    settling_time / (1.0 / SETTLING_FRACTION).ln()
}

impl RelaxationState {
    pub fn at_rest() -> Self {
        Self::default()
    }

    pub fn with_pressure(self, effective_pressure: f64) -> Self {
        Self {
            effective_pressure,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.effective_pressure >= 0.0 && self.effective_pressure.is_finite()) {
            return Err(Error::config("effective_pressure must be finite and >= 0"));
        }
        if !(self.load_time_constant > 0.0 && self.unload_time_constant > 0.0) {
            return Err(Error::config("relaxation time constants must be positive"));
        }
        Ok(())
    }

    pub fn step(self, input_pressure: f64, dt: f64) -> Result<Self> {
        step_relaxation(self, input_pressure, dt)
    }
}

/// Exact exponential update of the lagged pressure over an interval with
/// constant input.
pub fn step_relaxation(
    state: RelaxationState,
    input_pressure: f64,
    dt: f64,
) -> Result<RelaxationState> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be > 0 s, got {dt}")));
    }
    if !(input_pressure >= 0.0) {
        return Err(Error::domain(format!(
            "input pressure must be >= 0 kPa, got {input_pressure}"
        )));
    }
    let tau = if input_pressure > state.effective_pressure {
        state.load_time_constant
    } else {
        state.unload_time_constant
    };
    let decay = (-dt / tau).exp();
    Ok(RelaxationState {
        effective_pressure: input_pressure + (state.effective_pressure - input_pressure) * decay,
        ..state
    })
}

/// One noisy, clamped and (optionally) quantized reading of a taxel.
pub fn read_taxel<R: Rng + ?Sized>(
    model: &PiezoModel,
    state: &RelaxationState,
    config: &ReadoutConfig,
    rng: &mut R,
) -> Result<f64> {
    let resistance = resistance_from_pressure(model, state.effective_pressure)?;
    let clean = divider_voltage(resistance, config)?;
    let z: f64 = rng.sample(StandardNormal);
    let noisy = (clean + config.noise_std * z).clamp(0.0, config.supply_voltage);
    Ok(config.quantize(noisy))
}

/// Noiseless (pressure, voltage) pairs for ascending pressures.
pub fn characteristic_curve(
    model: &PiezoModel,
    config: &ReadoutConfig,
    pressures: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if pressures.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("pressures must be sorted ascending"));
    }
    pressures
        .iter()
        .map(|&p| {
            let r = resistance_from_pressure(model, p)?;
            Ok((p, divider_voltage(r, config)?))
        })
        .collect()
}

/// Largest forward-difference slope of a curve, volts per kPa.
pub fn max_slope(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HysteresisSample {
    pub time: f64,
    pub input_pressure: f64,
    pub effective_pressure: f64,
    pub voltage: f64,
    pub unloading: bool,
}

/// Noiseless response to a symmetric triangular ramp 0 -> `peak` -> 0
/// lasting `duration` seconds, sampled at the readout rate.
///
/// The sample count is rounded to an even number so that the loading and
/// unloading branches share their input pressures exactly.
pub fn hysteresis_loop(
    model: &PiezoModel,
    initial: RelaxationState,
    config: &ReadoutConfig,
    peak: f64,
    duration: f64,
) -> Result<Vec<HysteresisSample>> {
    if !(peak >= 0.0 && duration > 0.0) {
        return Err(Error::domain("ramp needs peak >= 0 and duration > 0"));
    }
    let intervals = ((duration * config.sample_rate).round() as usize).max(2) & !1;
    let half = intervals / 2;
    let dt = 1.0 / config.sample_rate;
    let mut state = initial;
    let mut out = Vec::with_capacity(intervals + 1);
    for n in 0..=intervals {
        let input = peak * (1.0 - n.abs_diff(half) as f64 / half as f64);
        if n > 0 {
            state = step_relaxation(state, input, dt)?;
        }
        let r = resistance_from_pressure(model, state.effective_pressure)?;
        out.push(HysteresisSample {
            time: n as f64 * dt,
            input_pressure: input,
            effective_pressure: state.effective_pressure,
            voltage: divider_voltage(r, config)?,
            unloading: n > half,
        });
    }
    Ok(out)
}
