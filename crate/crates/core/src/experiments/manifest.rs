//! Experiment manifests: every parameter that determines an experiment's output.
//!
//! Manifests are read from and written to TOML. Output files embed the
//! manifest as flattened `key = value` lines, which are themselves valid TOML
//! (dotted keys), so a header can be parsed back into the manifest it came from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::VerletVariant;
use crate::model::SystemParams;
use crate::sampler::SamplerConfig;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// How ensemble members' initial conditions are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Member `k` gets stream `k` and its own burn-in from the lattice.
    #[default]
    Independent,
    /// One chain on stream 0, sampled every `sampler.gap`.
    Chain,
}

/// Energy function monitored by the energy-drift experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyMeasure {
    /// Hard-truncated Hamiltonian, discontinuous whenever a pair crosses the cutoff.
    Plain,
    /// Pair energies shifted by `-V(r_cutoff)`: the Hamiltonian whose gradient
    /// is the force field actually integrated.
    #[default]
    Shifted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Sample,
    Divergence,
    Histogram,
    Msd,
    EnergyDrift,
    Conjecture,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Divergence => "divergence",
            ExperimentKind::Histogram => "histogram",
            ExperimentKind::Msd => "msd",
            ExperimentKind::EnergyDrift => "energy-drift",
            ExperimentKind::Conjecture => "conjecture",
        }
    }
}

/// Experiment-specific parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentParams {
    Sample,
    Divergence {
        /// `|x_coarse - x_reference|` beyond which two curves have diverged.
        threshold: f64,
    },
    Histogram {
        bins: usize,
        lo: f64,
        hi: f64,
    },
    Msd {
        /// Upper end of the zoomed export.
        zoom_horizon: f64,
    },
    EnergyDrift {
        measure: EnergyMeasure,
    },
    Conjecture {
        reference_dt: f64,
        checkpoints: Vec<f64>,
    },
}

impl ExperimentParams {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentParams::Sample => ExperimentKind::Sample,
            ExperimentParams::Divergence { .. } => ExperimentKind::Divergence,
            ExperimentParams::Histogram { .. } => ExperimentKind::Histogram,
            ExperimentParams::Msd { .. } => ExperimentKind::Msd,
            ExperimentParams::EnergyDrift { .. } => ExperimentKind::EnergyDrift,
            ExperimentParams::Conjecture { .. } => ExperimentKind::Conjecture,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub artifact_version: String,
    pub verlet_variant: VerletVariant,
    #[serde(with = "seed_repr")]
    pub root_seed: u64,
    pub ensemble: usize,
    /// Step sizes to compare. The divergence experiment expects them in
    /// descending order and uses the last as its reference.
    pub dt: Vec<f64>,
    pub horizon: f64,
    /// Time between recorded observations; also the cadence of blow-up checks.
    pub observe_interval: f64,
    pub sampling: SamplingMode,
    /// Member `k` starts from the same initial state for every step size.
    pub common_random_numbers: bool,
    /// A run counts as blown up once its energy has moved by more than this
    /// amount per particle.
    pub blowup_energy_per_particle: f64,
    pub system: SystemParams,
    pub sampler: SamplerConfig,
    pub params: ExperimentParams,
}

impl ExperimentManifest {
    /// Default manifest for each experiment on the 100-particle system.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let base = ExperimentManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            verlet_variant: VerletVariant::DriftKickDrift,
            root_seed: 2024,
            ensemble: 1,
            dt: vec![0.01, 0.005, 0.0025],
            horizon: 100.0,
            observe_interval: 0.1,
            sampling: SamplingMode::Independent,
            common_random_numbers: true,
            blowup_energy_per_particle: 1.0,
            system: SystemParams::default(),
            sampler: SamplerConfig::default(),
            params: ExperimentParams::Sample,
        };
        match kind {
            ExperimentKind::Sample => ExperimentManifest { ensemble: 500, dt: vec![], horizon: 0.0, ..base },
            ExperimentKind::Divergence => ExperimentManifest {
                dt: vec![0.01, 0.001, 0.0001, 0.00001],
                horizon: 5.0,
                observe_interval: 0.01,
                params: ExperimentParams::Divergence { threshold: 0.5 },
                ..base
            },
            ExperimentKind::Histogram => ExperimentManifest {
                ensemble: 1000,
                horizon: 10.0,
                params: ExperimentParams::Histogram { bins: 40, lo: -10.0, hi: 10.0 },
                ..base
            },
            ExperimentKind::Msd => ExperimentManifest {
                ensemble: 200,
                observe_interval: 0.01,
                params: ExperimentParams::Msd { zoom_horizon: 2.0 },
                ..base
            },
            ExperimentKind::EnergyDrift => {
                ExperimentManifest { params: ExperimentParams::EnergyDrift { measure: EnergyMeasure::Shifted }, ..base }
            }
            ExperimentKind::Conjecture => ExperimentManifest {
                ensemble: 200,
                dt: vec![0.02, 0.01, 0.005],
                observe_interval: 1.0,
                params: ExperimentParams::Conjecture { reference_dt: 0.000625, checkpoints: vec![1.0, 10.0, 100.0] },
                ..base
            },
        }
    }

    pub fn kind(&self) -> ExperimentKind {
        self.params.kind()
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.sampler.validate()?;
        let kind = self.kind();
        if self.ensemble == 0 {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        if kind != ExperimentKind::Sample {
            if self.dt.is_empty() {
                return Err(Error::Config("dt list is empty".into()));
            }
            if let Some(dt) = self.dt.iter().find(|dt| !(**dt > 0.0 && dt.is_finite())) {
                return Err(Error::Config(format!("step sizes must be positive, got {dt}")));
            }
            if !(self.horizon > 0.0 && self.horizon.is_finite()) {
                return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
            }
            if !(self.observe_interval > 0.0 && self.observe_interval <= self.horizon) {
                return Err(Error::Config(format!(
                    "observe_interval must lie in (0, horizon], got {}",
                    self.observe_interval
                )));
            }
        }
        if !(self.blowup_energy_per_particle > 0.0) {
            return Err(Error::Config("blowup_energy_per_particle must be positive".into()));
        }
        match &self.params {
            ExperimentParams::Divergence { threshold } => {
                if !(*threshold > 0.0) {
                    return Err(Error::Config("divergence threshold must be positive".into()));
                }
                if self.dt.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::Config("divergence dt list must be sorted in descending order".into()));
                }
            }
            ExperimentParams::Histogram { bins, lo, hi } => {
                if *bins == 0 || !(lo < hi) {
                    return Err(Error::Config(format!("invalid histogram binning: {bins} bins over [{lo}, {hi})")));
                }
            }
            ExperimentParams::Msd { zoom_horizon } => {
                if !(*zoom_horizon > 0.0) {
                    return Err(Error::Config("zoom_horizon must be positive".into()));
                }
                if self.ensemble < 2 {
                    return Err(Error::Config("msd needs an ensemble of at least 2".into()));
                }
                let points = (self.horizon / self.observe_interval).round();
                if points > 1.0e4 {
                    return Err(Error::Config(format!("msd grid has {points} points; at most 10^4 allowed")));
                }
            }
            ExperimentParams::Conjecture { reference_dt, checkpoints } => {
                if !(*reference_dt > 0.0) {
                    return Err(Error::Config("reference_dt must be positive".into()));
                }
                if checkpoints.is_empty() || checkpoints.iter().any(|t| !(*t > 0.0 && *t <= self.horizon)) {
                    return Err(Error::Config("checkpoints must be non-empty and lie in (0, horizon]".into()));
                }
                if self.ensemble < 2 {
                    return Err(Error::Config("conjecture needs an ensemble of at least 2".into()));
                }
            }
            ExperimentParams::Sample | ExperimentParams::EnergyDrift { .. } => {}
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(format!("cannot serialize manifest: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid manifest: {e}")))
    }

    /// The manifest as flattened `dotted.key = value` lines in a stable order.
    pub fn to_key_values(&self) -> Result<Vec<String>> {
        let value = toml::Value::try_from(self).map_err(|e| Error::Parse(format!("cannot serialize manifest: {e}")))?;
        let mut lines = Vec::new();
        flatten("", &value, &mut lines);
        Ok(lines)
    }

    /// Inverse of [`ExperimentManifest::to_key_values`].
    pub fn from_key_values<S: AsRef<str>>(lines: &[S]) -> Result<Self> {
        let text: String = lines.iter().map(|l| format!("{}\n", l.as_ref())).collect();
        Self::from_toml(&text)
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<String>) {
    match value {
        toml::Value::Table(table) => {
            for (key, v) in table {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(&path, v, out);
            }
        }
        other => out.push(format!("{prefix} = {other}")),
    }
}

/// 64-bit seeds as TOML integers when they fit, decimal strings otherwise.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => u64::try_from(v).map_err(serde::de::Error::custom),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ExperimentKind; 6] = [
        ExperimentKind::Sample,
        ExperimentKind::Divergence,
        ExperimentKind::Histogram,
        ExperimentKind::Msd,
        ExperimentKind::EnergyDrift,
        ExperimentKind::Conjecture,
    ];

    #[test]
    fn defaults_validate_and_round_trip() {
        for kind in KINDS {
            let m = ExperimentManifest::default_for(kind);
            m.validate().unwrap();
            assert_eq!(m.kind(), kind);
            assert_eq!(ExperimentManifest::from_toml(&m.to_toml().unwrap()).unwrap(), m);
            assert_eq!(ExperimentManifest::from_key_values(&m.to_key_values().unwrap()).unwrap(), m);
        }
    }

    #[test]
    fn large_seed_survives() {
        let m = ExperimentManifest { root_seed: u64::MAX, ..ExperimentManifest::default_for(ExperimentKind::Msd) };
        let text = m.to_toml().unwrap();
        assert!(text.contains("18446744073709551615"));
        assert_eq!(ExperimentManifest::from_toml(&text).unwrap().root_seed, u64::MAX);
    }

    #[test]
    fn key_values_are_flat() {
        let lines = ExperimentManifest::default_for(ExperimentKind::Histogram).to_key_values().unwrap();
        assert!(lines.iter().any(|l| l == "params.kind = \"histogram\""));
        assert!(lines.iter().any(|l| l == "system.box_edge = 11.5"));
        assert!(lines.iter().any(|l| l == "verlet_variant = \"drift-kick-drift\""));
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        let mut text = ExperimentManifest::default_for(ExperimentKind::Msd).to_toml().unwrap();
        text.push_str("\nbogus = 1\n");
        assert!(ExperimentManifest::from_toml(&text).is_err());

        let mut m = ExperimentManifest::default_for(ExperimentKind::Divergence);
        m.dt = vec![0.001, 0.01];
        assert!(m.validate().is_err());
        let mut m = ExperimentManifest::default_for(ExperimentKind::Msd);
        m.observe_interval = 0.001;
        assert!(m.validate().is_err());
    }
}
