//! JSON run configuration.
//!
//! Every key is optional; absent keys take the reference-system defaults.
//! Unknown keys are rejected.
//!
//! ```json
//! {
//!   "pulse": { "carrier_freq_hz": 7.252534e9, "width_s": 3.5e-6, "generator_power_dbm": -47 },
//!   "resonator": { "f0_ground_hz": 7.252456e9, "f0_excited_hz": 7.252612e9,
//!                  "q_loaded": 48000, "peak_transmission": 0.73 },
//!   "chain": { "input_attenuation_db": 76, "ref_impedance_ohm": 50, "bandwidth_factor": 3500,
//!              "photon_noise_k": 0.502,
//!              "amplifiers": [ { "name": "TWPA", "gain_db": 20, "kind": "quantum_limited" } ] },
//!   "grid": { "n": 4096, "padding": 4 },
//!   "trials": 1000,
//!   "seed": 0,
//!   "calibration": { "target_error": 1e-3 }
//! }
//! ```
//!
//! `resonator` may instead hold `s2p_ground` / `s2p_excited` paths (relative
//! to the config file). `chain.bandwidth_factor` and `calibration` are
//! mutually exclusive.

use std::path::{Path, PathBuf};

use readout_core::chain::{
    cascade, default_stages, StageSpec, DEFAULT_BANDWIDTH_FACTOR, DEFAULT_INPUT_ATTENUATION_DB, DEFAULT_REF_IMPEDANCE,
};
use readout_core::montecarlo::DEFAULT_TRIALS;
use readout_core::noise::{quantum_limit_temperature, NoiseKind, NoiseSource};
use readout_core::resonator::make_dispersive_pair;
use readout_core::sweep::{calibrate_b, CalibrationPoint, CalibrationTarget};
use readout_core::touchstone::parse_touchstone;
use readout_core::{ChainConfig, Constants, DispersivePair, GridParams, PulseSpec};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    pulse: Option<RawPulse>,
    resonator: Option<RawResonator>,
    chain: Option<RawChain>,
    grid: Option<RawGrid>,
    trials: Option<usize>,
    seed: Option<u64>,
    calibration: Option<RawCalibration>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    carrier_freq_hz: Option<f64>,
    width_s: Option<f64>,
    generator_power_dbm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResonator {
    f0_ground_hz: Option<f64>,
    f0_excited_hz: Option<f64>,
    q_loaded: Option<f64>,
    peak_transmission: Option<f64>,
    s2p_ground: Option<PathBuf>,
    s2p_excited: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    input_attenuation_db: Option<f64>,
    ref_impedance_ohm: Option<f64>,
    bandwidth_factor: Option<f64>,
    photon_noise_k: Option<f64>,
    amplifiers: Option<Vec<RawAmplifier>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmplifier {
    name: Option<String>,
    gain_db: f64,
    kind: RawNoiseKind,
    temperature_k: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawNoiseKind {
    QuantumLimited,
    Thermal,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    padding: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    target_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResonatorSource {
    Analytic,
    Tables { ground: PathBuf, excited: PathBuf },
}

/// Fully validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pulse: PulseSpec,
    pub chain: ChainConfig,
    pub grid: GridParams,
    pub trials: usize,
    pub seed: u64,
    /// When set, B is fitted to this analytic error at `pulse` before running.
    pub calibration_target: Option<f64>,
    pub resonator_source: ResonatorSource,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("{}", Path::new(".")).expect("defaults are valid")
    }
}

impl RunConfig {
    /// Chain with the bandwidth factor the run should use.
    pub fn effective_chain(&self) -> CliResult<ChainConfig> {
        match self.calibration_target {
            None => Ok(self.chain.clone()),
            Some(p) => {
                let b = calibrate_b(
                    &self.chain,
                    &self.grid,
                    &CalibrationPoint { spec: self.pulse, target: CalibrationTarget::Error(p) },
                )?;
                Ok(self.chain.with_bandwidth_factor(b)?)
            }
        }
    }
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base)
}

/// Parses and validates a JSON document; relative `.s2p` paths resolve
/// against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> CliResult<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Validation(format!("config: {inner}"))
        } else {
            CliError::validation(&path, inner)
        }
    })?;
    resolve(raw, base_dir)
}

fn require(cond: bool, key: &str, msg: impl std::fmt::Display) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::validation(key, msg))
    }
}

fn positive(value: f64, key: &str) -> CliResult<f64> {
    require(value.is_finite() && value > 0.0, key, format!("{value} must be positive"))?;
    Ok(value)
}

fn resolve(raw: RawConfig, base_dir: &Path) -> CliResult<RunConfig> {
    let (pair, resonator_source) = resolve_resonator(raw.resonator.unwrap_or_default(), base_dir)?;

    let p = raw.pulse.unwrap_or_default();
    let carrier = positive(p.carrier_freq_hz.unwrap_or(pair.readout_frequency()), "pulse.carrier_freq_hz")?;
    let width = positive(p.width_s.unwrap_or(3.5e-6), "pulse.width_s")?;
    let power = p.generator_power_dbm.unwrap_or(-47.0);
    require(power.is_finite(), "pulse.generator_power_dbm", "must be finite")?;
    let pulse = PulseSpec::new(carrier, width, power).map_err(|e| CliError::validation("pulse", e))?;

    let calibration_target = raw.calibration.map(|c| c.target_error);
    if let Some(t) = calibration_target {
        require(t > 0.0 && t < 0.5, "calibration.target_error", format!("{t} must lie in (0, 0.5)"))?;
    }

    let chain = resolve_chain(raw.chain.unwrap_or_default(), pair, carrier, calibration_target.is_some())?;

    let g = raw.grid.unwrap_or_default();
    let grid = GridParams {
        n: g.n.unwrap_or(readout_core::signal::DEFAULT_SAMPLES),
        padding: g.padding.unwrap_or(readout_core::signal::DEFAULT_PADDING),
    };
    require(
        grid.n.is_power_of_two() && grid.n >= readout_core::signal::MIN_SAMPLES,
        "grid.n",
        format!("{} must be a power of two ≥ {}", grid.n, readout_core::signal::MIN_SAMPLES),
    )?;
    require(grid.padding.is_finite() && grid.padding >= 2.0, "grid.padding", format!("{} must be ≥ 2", grid.padding))?;

    let trials = raw.trials.unwrap_or(DEFAULT_TRIALS);
    require(trials >= 2, "trials", format!("{trials} must be ≥ 2"))?;

    Ok(RunConfig { pulse, chain, grid, trials, seed: raw.seed.unwrap_or(0), calibration_target, resonator_source })
}

fn resolve_resonator(r: RawResonator, base_dir: &Path) -> CliResult<(DispersivePair, ResonatorSource)> {
    if r.s2p_ground.is_some() || r.s2p_excited.is_some() {
        for (key, present) in [
            ("resonator.f0_ground_hz", r.f0_ground_hz.is_some()),
            ("resonator.f0_excited_hz", r.f0_excited_hz.is_some()),
            ("resonator.q_loaded", r.q_loaded.is_some()),
            ("resonator.peak_transmission", r.peak_transmission.is_some()),
        ] {
            require(!present, key, "cannot be combined with .s2p tables")?;
        }
        let ground = r
            .s2p_ground
            .ok_or_else(|| CliError::validation("resonator.s2p_ground", "required with resonator.s2p_excited"))?;
        let excited = r
            .s2p_excited
            .ok_or_else(|| CliError::validation("resonator.s2p_excited", "required with resonator.s2p_ground"))?;
        let (ground, excited) = (base_dir.join(ground), base_dir.join(excited));
        let load = |path: &Path, key: &str| {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::validation(key, format!("{}: {e}", path.display())))?;
            parse_touchstone::<f64>(&text).map_err(|e| CliError::validation(key, format!("{}: {e}", path.display())))
        };
        let pair = DispersivePair::from_tables(
            load(&ground, "resonator.s2p_ground")?,
            load(&excited, "resonator.s2p_excited")?,
        )
        .map_err(|e| CliError::validation("resonator", e))?;
        return Ok((pair, ResonatorSource::Tables { ground, excited }));
    }

    let f0_ground = positive(r.f0_ground_hz.unwrap_or(7.252456e9), "resonator.f0_ground_hz")?;
    let f0_excited = positive(r.f0_excited_hz.unwrap_or(7.252612e9), "resonator.f0_excited_hz")?;
    let q = positive(r.q_loaded.unwrap_or(48000.0), "resonator.q_loaded")?;
    let a = r.peak_transmission.unwrap_or(0.73);
    require(a > 0.0 && a <= 1.0, "resonator.peak_transmission", format!("{a} must lie in (0, 1]"))?;
    require(f0_ground != f0_excited, "resonator.f0_excited_hz", "must differ from f0_ground_hz")?;
    let pair = make_dispersive_pair(f0_ground, f0_excited, q, a).map_err(|e| CliError::validation("resonator", e))?;
    Ok((pair, ResonatorSource::Analytic))
}

fn resolve_chain(c: RawChain, pair: DispersivePair, carrier: f64, calibrating: bool) -> CliResult<ChainConfig> {
    require(
        !(calibrating && c.bandwidth_factor.is_some()),
        "chain.bandwidth_factor",
        "give either a bandwidth factor or a calibration target, not both",
    )?;
    let t_n = quantum_limit_temperature(carrier, &Constants::si())
        .map_err(|e| CliError::validation("pulse.carrier_freq_hz", e))?;

    let attenuation = c.input_attenuation_db.unwrap_or(DEFAULT_INPUT_ATTENUATION_DB);
    require(
        attenuation.is_finite() && attenuation >= 0.0,
        "chain.input_attenuation_db",
        format!("{attenuation} must be ≥ 0"),
    )?;
    let r = positive(c.ref_impedance_ohm.unwrap_or(DEFAULT_REF_IMPEDANCE), "chain.ref_impedance_ohm")?;
    let b = positive(c.bandwidth_factor.unwrap_or(DEFAULT_BANDWIDTH_FACTOR), "chain.bandwidth_factor")?;
    let photon_k = c.photon_noise_k.unwrap_or(t_n);
    require(photon_k.is_finite() && photon_k >= 0.0, "chain.photon_noise_k", format!("{photon_k} must be ≥ 0"))?;

    let stages = match c.amplifiers {
        None => default_stages(t_n),
        Some(list) => list
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let key = format!("chain.amplifiers[{i}]");
                require(a.gain_db.is_finite(), &format!("{key}.gain_db"), "must be finite")?;
                let (kind, temperature) = match (a.kind, a.temperature_k) {
                    (RawNoiseKind::QuantumLimited, t) => (NoiseKind::QuantumLimited, t.unwrap_or(t_n)),
                    (RawNoiseKind::Thermal, Some(t)) => (NoiseKind::Thermal, t),
                    (RawNoiseKind::Thermal, None) => {
                        return Err(CliError::validation(
                            &format!("{key}.temperature_k"),
                            "required for thermal stages",
                        ))
                    }
                };
                require(
                    temperature.is_finite() && temperature >= 0.0,
                    &format!("{key}.temperature_k"),
                    format!("{temperature} must be ≥ 0"),
                )?;
                Ok(StageSpec {
                    name: a.name.unwrap_or_else(|| format!("stage {i}")),
                    gain_db: a.gain_db,
                    kind,
                    temperature,
                })
            })
            .collect::<CliResult<Vec<_>>>()?,
    };
    let amplifiers = cascade(&stages).map_err(|e| CliError::validation("chain.amplifiers", e))?;
    let photon = NoiseSource::new(NoiseKind::QuantumLimited, photon_k, 1.0)
        .map_err(|e| CliError::validation("chain.photon_noise_k", e))?;
    ChainConfig::new(attenuation, pair, Some(photon), amplifiers, r, b).map_err(|e| CliError::validation("chain", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> CliResult<RunConfig> {
        parse_config(s, Path::new("."))
    }

    fn key_of(err: CliError) -> String {
        match err {
            CliError::Validation(m) => m,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_object_gives_reference_system() {
        let c = parse("{}").unwrap();
        assert_eq!(c.pulse.generator_power_dbm(), -47.0);
        assert_eq!(c.pulse.width(), 3.5e-6);
        assert_eq!(c.pulse.carrier_freq(), 7.252534e9);
        assert_eq!(c.chain.pair().chi(), 156e3);
        assert_eq!(c.chain.input_attenuation_db(), 76.0);
        assert_eq!(c.chain.bandwidth_factor(), 3500.0);
        assert_eq!(c.chain.ref_impedance(), 50.0);
        assert_eq!(c.chain.amplifiers().len(), 3);
        assert_eq!(c.chain, ChainConfig::reference());
        assert_eq!(c.grid, GridParams { n: 4096, padding: 4.0 });
        assert_eq!(c.trials, 1000);
        assert_eq!(c.calibration_target, None);
        assert_eq!(c.resonator_source, ResonatorSource::Analytic);
    }

    #[test]
    fn value_errors_name_the_key() {
        assert!(key_of(parse(r#"{"pulse": {"width_s": -1}}"#).unwrap_err()).starts_with("pulse.width_s"));
        assert!(key_of(parse(r#"{"grid": {"n": 1000}}"#).unwrap_err()).starts_with("grid.n"));
        assert!(key_of(parse(r#"{"trials": 1}"#).unwrap_err()).starts_with("trials"));
        assert!(key_of(parse(r#"{"resonator": {"peak_transmission": 1.5}}"#).unwrap_err())
            .starts_with("resonator.peak_transmission"));
        assert!(key_of(parse(r#"{"resonator": {"f0_excited_hz": 7.252456e9}}"#).unwrap_err())
            .starts_with("resonator.f0_excited_hz"));
        assert!(key_of(parse(r#"{"chain": {"amplifiers": [{"gain_db": 10, "kind": "thermal"}]}}"#).unwrap_err())
            .starts_with("chain.amplifiers[0].temperature_k"));
        assert!(key_of(parse(r#"{"calibration": {"target_error": 0.7}}"#).unwrap_err())
            .starts_with("calibration.target_error"));
    }

    #[test]
    fn type_errors_name_the_path() {
        let m = key_of(parse(r#"{"pulse": {"width_s": "long"}}"#).unwrap_err());
        assert!(m.starts_with("pulse.width_s"), "{m}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let m = key_of(parse(r#"{"pulse": {"widht_s": 1e-6}}"#).unwrap_err());
        assert!(m.contains("widht_s"), "{m}");
        assert!(parse(r#"{"extra": 1}"#).is_err());
        assert!(parse(r#"{"chain": {"amplifiers": [{"gain_db": 1, "kind": "quantum_limited", "gain": 2}]}}"#).is_err());
    }

    #[test]
    fn syntax_error_has_position() {
        let m = key_of(parse("{\n  \"pulse\": \n").unwrap_err());
        assert!(m.contains("line"), "{m}");
    }

    #[test]
    fn bandwidth_and_calibration_are_exclusive() {
        let m =
            key_of(parse(r#"{"chain": {"bandwidth_factor": 2}, "calibration": {"target_error": 1e-3}}"#).unwrap_err());
        assert!(m.starts_with("chain.bandwidth_factor"));
        let c = parse(r#"{"calibration": {"target_error": 1e-3}}"#).unwrap();
        let chain = c.effective_chain().unwrap();
        assert!(chain.bandwidth_factor() < 1.0);
    }

    #[test]
    fn custom_amplifiers_cascade() {
        let c = parse(
            r#"{"chain": {"photon_noise_k": 0, "amplifiers": [
                {"name": "A", "gain_db": 30, "kind": "thermal", "temperature_k": 4},
                {"gain_db": 10, "kind": "quantum_limited"}]}}"#,
        )
        .unwrap();
        let amps = c.chain.amplifiers();
        assert_eq!(amps[0].name, "A");
        assert_eq!(amps[1].name, "stage 1");
        assert!((amps[1].noise.preceding_gain() - 1000.0).abs() < 1e-9);
        assert_eq!(c.chain.photon_noise().unwrap().temperature(), 0.0);
    }

    #[test]
    fn table_dispatch() {
        let dir = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures"));
        let c = parse_config(
            r#"{"resonator": {"s2p_ground": "resonator_ground.s2p", "s2p_excited": "resonator_excited.s2p"}}"#,
            &dir,
        )
        .unwrap();
        assert!(matches!(c.resonator_source, ResonatorSource::Tables { .. }));
        assert!(!c.chain.pair().is_analytic());
        assert_eq!(c.pulse.carrier_freq(), 7.252534e9);

        let m = key_of(parse_config(r#"{"resonator": {"s2p_ground": "resonator_ground.s2p"}}"#, &dir).unwrap_err());
        assert!(m.starts_with("resonator.s2p_excited"));
        let m = key_of(
            parse_config(
                r#"{"resonator": {"s2p_ground": "resonator_ground.s2p", "s2p_excited": "non_monotone.s2p"}}"#,
                &dir,
            )
            .unwrap_err(),
        );
        assert!(m.starts_with("resonator.s2p_excited") && m.contains("line 3"), "{m}");
    }
}
