//! Synthetic grasp observations.
//!
//! Each object is described by a contact-pressure template per taxel. A
//! grasp perturbs the template (placement jitter and a cyclic shift of the
//! proximal bars standing in for random orientation), drives every taxel
//! through the closing ramp and stabilization delay, reads the taxels and
//! fills the chamber pressures.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    Dataset, GraspFrame, ObjectGroup, Provenance, CHAMBERS_PER_FINGER, FINGERS, FINGERTIP_TAXELS,
    PROXIMAL_TAXELS, TAXELS_PER_FINGER,
};
use crate::error::{Error, Result};
use crate::sensor::{read_taxel, PiezoModel, ReadoutConfig, RelaxationState};

/// Upper end of the contact-pressure operating range, kPa.
pub const MAX_CONTACT_PRESSURE: f64 = 75.0;

/// Full-scale range of the chamber pressure sensors, kPa.
pub const CHAMBER_SENSOR_RANGE: f64 = 250.0;

const DEFAULT_OBJECTS: &str = include_str!("../config/objects.toml");

pub type ContactPattern = [[f64; TAXELS_PER_FINGER]; FINGERS];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    pub group: ObjectGroup,
    /// kPa per `[finger][taxel]`.
    pub footprint_mean: ContactPattern,
    /// kPa.
    pub footprint_jitter_std: f64,
    /// Largest cyclic shift applied to the proximal bars; 0 disables it.
    #[serde(default = "default_shift")]
    pub proximal_shift: usize,
    pub stiffness: f64,
    pub volume_factor: f64,
}

fn default_shift() -> usize {
    1
}

impl ObjectSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::config(format!("object {}: {msg}", self.name)));
        if self
            .footprint_mean
            .iter()
            .flatten()
            .any(|p| !(0.0..=MAX_CONTACT_PRESSURE).contains(p))
        {
            return bad("footprint pressures must lie in [0, 75] kPa");
        }
        if !(self.footprint_jitter_std >= 0.0 && self.footprint_jitter_std.is_finite()) {
            return bad("footprint_jitter_std must be >= 0");
        }
        if !(self.stiffness > 0.0 && self.stiffness <= 1.0) {
            return bad("stiffness must lie in (0, 1]");
        }
        if !(self.volume_factor > 0.0 && self.volume_factor.is_finite()) {
            return bad("volume_factor must be > 0");
        }
        if self.proximal_shift >= PROXIMAL_TAXELS {
            return bad("proximal_shift must be smaller than the number of proximal bars");
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    object: Vec<ObjectSpec>,
}

/// Parses and validates an object file.
pub fn parse_object_specs(text: &str) -> Result<Vec<ObjectSpec>> {
    let file: ObjectFile =
        toml::from_str(text).map_err(|e| Error::config(format!("object spec file: {e}")))?;
    validate_specs(&file.object)?;
    Ok(file.object)
}

pub fn load_object_specs(path: &Path) -> Result<Vec<ObjectSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_object_specs(&text).map_err(|e| match e {
        Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// The nine shipped objects.
pub fn default_object_specs() -> Vec<ObjectSpec> {
    parse_object_specs(DEFAULT_OBJECTS).expect("shipped object file is valid")
}

/// Checks every spec, unique names, and that packaged objects are the most
/// variable group.
pub fn validate_specs(specs: &[ObjectSpec]) -> Result<()> {
    for (i, s) in specs.iter().enumerate() {
        s.validate()?;
        if specs[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::config(format!("duplicate object name `{}`", s.name)));
        }
    }
    let jitter = |g: ObjectGroup| {
        specs
            .iter()
            .filter(move |s| s.group == g)
            .map(|s| s.footprint_jitter_std)
    };
    let least_packaged = jitter(ObjectGroup::Packaged).fold(f64::INFINITY, f64::min);
    let most_other = jitter(ObjectGroup::Bottle)
        .chain(jitter(ObjectGroup::Sphere))
        .fold(f64::NEG_INFINITY, f64::max);
    if least_packaged <= most_other {
        return Err(Error::config(
            "packaged objects need a larger footprint_jitter_std than bottles and spheres",
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandConfig {
    /// kPa inside each chamber after closing on nothing.
    pub baseline_chamber_pressure: f64,
    pub stiffness_coupling: f64,
    /// kPa.
    pub chamber_noise_std: f64,
    /// Seconds from full closure until the frame is recorded.
    pub stabilization_delay: f64,
    /// Seconds for contact pressure to ramp to its final value.
    pub closing_ramp: f64,
    pub readout: ReadoutConfig,
    pub piezo: PiezoModel,
    /// Initial relaxation state of every taxel (time constants included).
    pub relaxation: RelaxationState,
}

impl Default for HandConfig {
    fn default() -> Self {
        Self {
            baseline_chamber_pressure: 40.0,
            stiffness_coupling: 0.5,
            chamber_noise_std: 2.5,
            stabilization_delay: 3.0,
            closing_ramp: 1.0,
            readout: ReadoutConfig::default(),
            piezo: PiezoModel::default(),
            relaxation: RelaxationState::default(),
        }
    }
}

impl HandConfig {
    pub const FINGERS: usize = FINGERS;
    pub const TAXELS_PER_FINGER: usize = TAXELS_PER_FINGER;
    pub const CHAMBERS_PER_FINGER: usize = CHAMBERS_PER_FINGER;

    pub fn frame_dim(&self) -> usize {
        Self::FINGERS * (Self::TAXELS_PER_FINGER + Self::CHAMBERS_PER_FINGER)
    }

    pub fn validate(&self) -> Result<()> {
        self.readout.validate()?;
        self.piezo.validate()?;
        self.relaxation.validate()?;
        if !(self.baseline_chamber_pressure >= 0.0 && self.chamber_noise_std >= 0.0) {
            return Err(Error::config("chamber baseline and noise must be >= 0"));
        }
        if !(self.stiffness_coupling >= 0.0) {
            return Err(Error::config("stiffness_coupling must be >= 0"));
        }
        if !(self.stabilization_delay > 0.0 && self.closing_ramp > 0.0) {
            return Err(Error::config(
                "stabilization_delay and closing_ramp must be > 0",
            ));
        }
        Ok(())
    }
}

/// Template plus jitter plus a random cyclic shift of the proximal bars,
/// clamped to the operating range.
pub fn sample_contact_pattern<R: Rng + ?Sized>(spec: &ObjectSpec, rng: &mut R) -> ContactPattern {
    let mut out = [[0.0; TAXELS_PER_FINGER]; FINGERS];
    let s = spec.proximal_shift as i64;
    for (finger, row) in out.iter_mut().enumerate() {
        let shift = if s > 0 { rng.random_range(-s..=s) } else { 0 };
        let template = &spec.footprint_mean[finger];
        for (t, value) in row.iter_mut().enumerate() {
            let src = if t < FINGERTIP_TAXELS {
                t
            } else {
                let k = (t - FINGERTIP_TAXELS) as i64;
                FINGERTIP_TAXELS + (k - shift).rem_euclid(PROXIMAL_TAXELS as i64) as usize
            };
            let z: f64 = rng.sample(StandardNormal);
            *value =
                (template[src] + spec.footprint_jitter_std * z).clamp(0.0, MAX_CONTACT_PRESSURE);
        }
    }
    out
}

/// Taxels pressing on the region actuated by a chamber: the proximal bars
/// for chamber 0, the fingertip for chamber 1.
fn chamber_region(chamber: usize) -> std::ops::Range<usize> {
    match chamber {
        0 => FINGERTIP_TAXELS..TAXELS_PER_FINGER,
        _ => 0..FINGERTIP_TAXELS,
    }
}

/// Pressure inside one air chamber once the hand has closed on an object.
pub fn chamber_pressure<R: Rng + ?Sized>(
    spec: &ObjectSpec,
    contact: &ContactPattern,
    finger: usize,
    chamber: usize,
    config: &HandConfig,
    rng: &mut R,
) -> Result<f64> {
    if finger >= FINGERS || chamber >= CHAMBERS_PER_FINGER {
        return Err(Error::domain(format!(
            "chamber ({finger}, {chamber}) out of range"
        )));
    }
    let region = &contact[finger][chamber_region(chamber)];
    let mean_contact = region.iter().sum::<f64>() / region.len() as f64;
    let load =
        1.0 + config.stiffness_coupling * spec.stiffness * mean_contact / MAX_CONTACT_PRESSURE;
    let z: f64 = rng.sample(StandardNormal);
    let p =
        config.baseline_chamber_pressure * spec.volume_factor * load + config.chamber_noise_std * z;
    Ok(p.max(0.0))
}

/// Relaxation state of a taxel after the closing ramp and the stabilization
/// delay, sampled at the readout rate.
pub fn settle_taxel(target: f64, config: &HandConfig) -> Result<RelaxationState> {
    let dt = 1.0 / config.readout.sample_rate;
    let steps = (config.stabilization_delay * config.readout.sample_rate).round() as usize;
    let mut state = config.relaxation;
    for n in 1..=steps {
        let t = n as f64 * dt;
        let input = target * (t / config.closing_ramp).min(1.0);
        state = state.step(input, dt)?;
    }
    Ok(state)
}

pub fn simulate_grasp<R: Rng + ?Sized>(
    spec: &ObjectSpec,
    config: &HandConfig,
    rng: &mut R,
) -> Result<GraspFrame> {
    let contact = sample_contact_pattern(spec, rng);
    let mut frame = GraspFrame::zeros(spec.name.clone(), spec.group);
    for finger in 0..FINGERS {
        for taxel in 0..TAXELS_PER_FINGER {
            let state = settle_taxel(contact[finger][taxel], config)?;
            frame.taxel_voltages[finger][taxel] =
                read_taxel(&config.piezo, &state, &config.readout, rng)?;
        }
    }
    for finger in 0..FINGERS {
        for chamber in 0..CHAMBERS_PER_FINGER {
            frame.chamber_pressures[finger][chamber] =
                chamber_pressure(spec, &contact, finger, chamber, config, rng)?;
        }
    }
    Ok(frame)
}

/// Independent stream for one grasp so results do not depend on scheduling.
pub fn grasp_rng(seed: u64, object: usize, grasp: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((object as u64) << 32) | grasp as u64);
    rng
}

/// Hash of everything that determines a generated dataset apart from the seed.
pub fn config_hash(specs: &[ObjectSpec], grasps_per_object: usize, config: &HandConfig) -> String {
    let payload = serde_json::json!({
        "objects": specs,
        "grasps_per_object": grasps_per_object,
        "hand": config,
    });
    hex::encode(Sha256::digest(payload.to_string().as_bytes()))
}

pub fn generate_dataset(
    specs: &[ObjectSpec],
    grasps_per_object: usize,
    config: &HandConfig,
    seed: u64,
) -> Result<Dataset> {
    if specs.is_empty() {
        return Err(Error::config("at least one object spec is required"));
    }
    if grasps_per_object == 0 {
        return Err(Error::config("grasps_per_object must be > 0"));
    }
    for (i, s) in specs.iter().enumerate() {
        s.validate()?;
        if specs[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::config(format!("duplicate object name `{}`", s.name)));
        }
    }
    config.validate()?;

    let mut ds = Dataset::new(
        specs.iter().map(|s| s.name.clone()).collect(),
        specs.iter().map(|s| s.group).collect(),
        Provenance {
            seed,
            config_hash: config_hash(specs, grasps_per_object, config),
        },
    )?;
    for (i, spec) in specs.iter().enumerate() {
        for g in 0..grasps_per_object {
            let frame = simulate_grasp(spec, config, &mut grasp_rng(seed, i, g))?;
            ds.push(frame)?;
        }
    }
    Ok(ds)
}
