//! JSON run configuration, system construction and provenance records.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AtlasError, Result};
use crate::learn::AtlasParams;
use crate::netspace::StateSpace;
use crate::systems::{
    self, image, sde, BitImage, ImageSpace, Lorenz96Multiscale, SdeSpace, StringSpace,
};

/// Atlas parameters as they appear in a config file. Unset `t0`, `dt`, `m`
/// and `p` fall back to the experimental schedule: `t0 = delta^2`,
/// `dt = t0/5`, `m = 2d`, `p = 10^4`. The theoretical schedule
/// (`dt = delta / ln(1/delta)`, `p = O(delta^-4)`) is selected with
/// `"dt_schedule": "theoretical"`; `t0` must then be set above `dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasSection {
    pub delta: f64,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_schedule: Option<String>,
}

impl AtlasSection {
    pub fn params(&self) -> Result<AtlasParams> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(AtlasError::invalid(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        let mut p = AtlasParams::experimental(self.delta, self.d);
        if let Some(m) = self.m {
            p.m = m;
        }
        if let Some(n) = self.p {
            p.p = n;
        }
        if let Some(t0) = self.t0 {
            p.t0 = t0;
            p.dt = t0 / 5.0;
        }
        match self.dt_schedule.as_deref() {
            None | Some("experimental") => {}
            Some("theoretical") => p.dt = AtlasParams::theoretical_dt(self.delta),
            Some(other) => {
                return Err(AtlasError::invalid(
                    "dt_schedule",
                    format!("expected \"experimental\" or \"theoretical\", got {other:?}"),
                ))
            }
        }
        if let Some(dt) = self.dt {
            p.dt = dt;
        }
        p.validate()?;
        Ok(p)
    }
}

/// Overrides for the reference systems. Every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Spacing of the initial grid (1-D and 2-D systems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    /// Length of the pre-roll applied to initial points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heal_time: Option<f64>,
    /// Number of sampled initial points (string, Lorenz-96).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_initial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micro_dt: Option<f64>,
    /// Constant-drift system: drift, noise level and period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Lorenz-96 time-scale separation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    /// Explicit initial points, overriding the default grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_points_csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "default_n_ics")]
    pub n_ics: usize,
    #[serde(default = "default_n_paths")]
    pub n_paths: usize,
    pub horizon: f64,
    pub delta_c: f64,
    /// Initial conditions in plane/ambient coordinates; defaults to distinct
    /// net points drawn with the config seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ics: Option<Vec<Vec<f64>>>,
}

fn default_n_ics() -> usize {
    10
}

fn default_n_paths() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    pub centers: Vec<Vec<f64>>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSection {
    #[serde(default = "default_n_runs")]
    pub n_runs: usize,
    pub horizon: f64,
    /// Defaults to the system's metastable wells.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<RegionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
}

fn default_n_runs() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    #[serde(default)]
    pub system_params: SystemParams,
    pub atlas: AtlasSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<TransitionSection>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

pub const SEED_ENV: &str = "ATLAS_SEED";
pub const OUT_DIR_ENV: &str = "ATLAS_OUT_DIR";

impl RunConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| AtlasError::Config(e.to_string()))
    }

    /// Read, apply environment overrides and validate.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AtlasError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<()> {
        if let Some(s) = var(SEED_ENV) {
            self.seed = s.trim().parse().map_err(|_| {
                AtlasError::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer"))
            })?;
        }
        if let Some(d) = var(OUT_DIR_ENV) {
            self.out_dir = PathBuf::from(d);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !systems::is_known(&self.system) {
            return Err(AtlasError::UnknownSystem(self.system.clone()));
        }
        self.atlas.params()?;
        if let Some(p) = &self.system_params.initial_points_csv {
            if !p.exists() {
                return Err(AtlasError::Config(format!(
                    "initial_points_csv {} does not exist",
                    p.display()
                )));
            }
        }
        if let Some(c) = &self.compare {
            if !(c.horizon > 0.0) {
                return Err(AtlasError::invalid("compare.horizon", "must be positive"));
            }
            if !(c.delta_c > 0.0) {
                return Err(AtlasError::invalid("compare.delta_c", "must be positive"));
            }
            if c.n_paths == 0 || c.n_ics == 0 {
                return Err(AtlasError::invalid(
                    "compare.n_paths",
                    "n_paths and n_ics must be positive",
                ));
            }
        }
        if let Some(t) = &self.transitions {
            if !(t.horizon > 0.0) {
                return Err(AtlasError::invalid(
                    "transitions.horizon",
                    "must be positive",
                ));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective config.
    pub fn hash(&self) -> String {
        hash_json(&serde_json::to_value(self).expect("config serializes"))
    }
}

pub fn hash_json(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("value serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Sidecar written next to every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Provenance {
    pub fn path_for(artifact: &Path) -> PathBuf {
        let mut name = artifact.file_name().unwrap_or_default().to_os_string();
        name.push(".provenance.json");
        artifact.with_file_name(name)
    }

    pub fn write_for(&self, artifact: &Path) -> Result<()> {
        std::fs::write(
            Self::path_for(artifact),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

/// A reference system constructed from a config.
pub enum BuiltSystem {
    Sde(SdeSpace),
    String(StringSpace),
    Lorenz(Lorenz96Multiscale),
    Image(ImageSpace<SdeSpace>),
}

/// Default metastable regions (plane coordinates) of a system, if it has any.
pub fn default_regions(system: &str) -> Option<RegionSection> {
    match system {
        "double-well-smooth" | "double-well-rough" => Some(RegionSection {
            centers: vec![vec![0.0], vec![1.0]],
            radius: 0.25,
        }),
        "three-well-smooth"
        | "three-well-rough"
        | "image-three-well-smooth"
        | "image-three-well-rough" => Some(RegionSection {
            centers: sde::THREE_WELL_CENTERS.iter().map(|c| c.to_vec()).collect(),
            radius: 0.25,
        }),
        _ => None,
    }
}

pub fn build_system(cfg: &RunConfig) -> Result<BuiltSystem> {
    let sp = &cfg.system_params;
    let spacing = sp.spacing.unwrap_or(0.01);
    if !(spacing > 0.0) {
        return Err(AtlasError::invalid(
            "system_params.spacing",
            "must be positive",
        ));
    }
    let heal_seed = crate::rng::derive_seed(cfg.seed, "system");
    let explicit = match &sp.initial_points_csv {
        Some(p) => Some(crate::netspace::read_points_csv(p)?),
        None => None,
    };
    let finish = |mut s: SdeSpace| -> Result<SdeSpace> {
        if let Some(mdt) = sp.micro_dt {
            if !(mdt > 0.0) {
                return Err(AtlasError::invalid(
                    "system_params.micro_dt",
                    "must be positive",
                ));
            }
            s.system.micro_dt = mdt;
        }
        if let Some(pts) = &explicit {
            s.initial = pts.clone();
        }
        match sp.heal_time {
            Some(t) if t > 0.0 => s.heal(t, heal_seed),
            _ => Ok(s),
        }
    };
    Ok(match cfg.system.as_str() {
        "double-well-smooth" => BuiltSystem::Sde(finish(sde::double_well_space(false, spacing))?),
        "double-well-rough" => BuiltSystem::Sde(finish(sde::double_well_space(true, spacing))?),
        "three-well-smooth" => BuiltSystem::Sde(finish(sde::three_well_space(false, spacing))?),
        "three-well-rough" => BuiltSystem::Sde(finish(sde::three_well_space(true, spacing))?),
        "constant-drift-periodic" => BuiltSystem::Sde(finish(sde::constant_drift_space(
            sp.b.unwrap_or(1.0),
            sp.sigma.unwrap_or(1.0),
            sp.period.unwrap_or(2.0),
            spacing,
            sp.micro_dt.unwrap_or(0.001),
        ))?),
        "image-three-well-smooth" | "image-three-well-rough" => {
            let rough = cfg.system.ends_with("rough");
            let base = finish(sde::three_well_space(rough, sp.spacing.unwrap_or(0.04)))?;
            BuiltSystem::Image(ImageSpace::new(base))
        }
        "string" => match explicit {
            Some(pts) => BuiltSystem::String(StringSpace::new(pts)),
            None => BuiltSystem::String(StringSpace::sampled(
                sp.n_initial.unwrap_or(2000),
                sp.heal_time.unwrap_or(0.0).round() as usize,
                heal_seed,
            )),
        },
        "lorenz96-multiscale" => {
            let l = Lorenz96Multiscale::new(sp.eps.unwrap_or(0.01));
            BuiltSystem::Lorenz(match explicit {
                Some(pts) => l.with_initial(pts),
                None => l.with_sampled_initial(
                    sp.n_initial.unwrap_or(2000),
                    sp.heal_time.unwrap_or(25.0),
                    heal_seed,
                )?,
            })
        }
        other => return Err(AtlasError::UnknownSystem(other.to_string())),
    })
}

/// Ambient points that can be mapped to plain coordinates for region
/// classification and CSV output.
pub trait PlanePoint: Clone + Send + Sync + Serialize + serde::de::DeserializeOwned {
    fn plane(&self) -> Result<Vec<f64>>;
    fn from_plane(x: &[f64]) -> Self;
}

impl PlanePoint for Vec<f64> {
    fn plane(&self) -> Result<Vec<f64>> {
        Ok(self.clone())
    }

    fn from_plane(x: &[f64]) -> Self {
        x.to_vec()
    }
}

impl PlanePoint for BitImage {
    fn plane(&self) -> Result<Vec<f64>> {
        image::approx_invert(self).map(|p| p.to_vec())
    }

    fn from_plane(x: &[f64]) -> Self {
        image::embed(x)
    }
}

/// Calls `$body` with `$s` bound to the concrete state space.
#[macro_export]
macro_rules! with_system {
    ($built:expr, $s:ident => $body:expr) => {
        match $built {
            $crate::config::BuiltSystem::Sde($s) => $body,
            $crate::config::BuiltSystem::String($s) => $body,
            $crate::config::BuiltSystem::Lorenz($s) => $body,
            $crate::config::BuiltSystem::Image($s) => $body,
        }
    };
}

/// Ratio of the atlas step to the microscale step, when the latter exists.
pub fn dt_ratio<S: StateSpace>(space: &S, atlas_dt: f64) -> Option<f64> {
    space.micro_dt().map(|m| atlas_dt / m)
}
