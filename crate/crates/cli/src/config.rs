//! Solver configuration: built-in defaults, then a JSON file, then flags.

use std::path::Path;

use qpbbm::lattice::FrequencyVector;
use qpbbm::picard::{QuadRule, SolverConfig};
use qpbbm::spectral::DecayProfile;
use serde::Deserialize;

use crate::args::{ProfileKind, RunFlags};
use crate::error::{CliError, CliResult};

pub const DEFAULT_P: u32 = 2;
pub const DEFAULT_NU: usize = 1;
pub const DEFAULT_RADIUS: u32 = 3;
pub const DEFAULT_AMP: f64 = 1.0;
pub const DEFAULT_EXP_RATE: f64 = 1.0;
pub const DEFAULT_POLY_RATE: f64 = 16.0;

pub fn default_rate(kind: ProfileKind) -> f64 {
    match kind {
        ProfileKind::Exp => DEFAULT_EXP_RATE,
        ProfileKind::Poly => DEFAULT_POLY_RATE,
    }
}

pub fn make_profile(kind: ProfileKind, amp: f64, rate: f64) -> DecayProfile {
    match kind {
        ProfileKind::Exp => DecayProfile::Exponential { amp, rate },
        ProfileKind::Poly => DecayProfile::Polynomial { amp, rate },
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    Text(String),
    Values(Vec<f64>),
}

impl OmegaSpec {
    fn resolve(&self) -> CliResult<FrequencyVector> {
        Ok(match self {
            OmegaSpec::Text(s) => FrequencyVector::parse_list(s)?,
            OmegaSpec::Values(v) => FrequencyVector::new(v.clone())?,
        })
    }
}

/// Keys mirror the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub p: Option<u32>,
    pub nu: Option<usize>,
    pub radius: Option<u32>,
    pub omega: Option<OmegaSpec>,
    pub profile: Option<ProfileKind>,
    pub amp: Option<f64>,
    pub rate: Option<f64>,
    #[serde(rename = "T", alias = "time_horizon")]
    pub t: Option<f64>,
    pub steps: Option<usize>,
    pub max_iters: Option<u32>,
    pub quad: Option<QuadRule>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub override_horizon: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::validation(format!("config {}: {e}", path.display())))
    }
}

/// Merges defaults < config file < flags and validates the result.
pub fn parse_config(flags: &RunFlags) -> CliResult<SolverConfig> {
    let file = match &flags.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    merge(flags, &file)
}

pub fn merge(flags: &RunFlags, file: &ConfigFile) -> CliResult<SolverConfig> {
    let p = flags.p.or(file.p).unwrap_or(DEFAULT_P);
    let nu = flags.nu.or(file.nu).unwrap_or(DEFAULT_NU);
    let radius = flags.radius.or(file.radius).unwrap_or(DEFAULT_RADIUS);
    let kind = flags.profile.or(file.profile).unwrap_or(ProfileKind::Exp);
    let amp = flags.amp.or(file.amp).unwrap_or(DEFAULT_AMP);
    let rate = flags.rate.or(file.rate).unwrap_or_else(|| default_rate(kind));
    let profile = make_profile(kind, amp, rate);
    profile.validate(nu)?;

    let mut cfg = SolverConfig::new(p, nu, radius, profile)?;
    let omega = match (&flags.omega, &file.omega) {
        (Some(s), _) => Some(OmegaSpec::Text(s.clone())),
        (None, o) => o.clone(),
    };
    if let Some(o) = omega {
        cfg.omega = o.resolve()?;
    }
    if let Some(t) = flags.t.or(file.t) {
        cfg.time_horizon = t;
    }
    if let Some(m) = flags.steps.or(file.steps) {
        cfg.time_steps = m;
    }
    if let Some(k) = flags.max_iters.or(file.max_iters) {
        cfg.max_iters = k;
    }
    cfg.quad_rule = match &flags.quad {
        Some(s) => s.parse::<QuadRule>().map_err(CliError::Validation)?,
        None => file.quad.unwrap_or_default(),
    };
    if let Some(tol) = flags.tol.or(file.tol) {
        cfg.tol_fixed_point = tol;
    }
    cfg.seed = flags.seed.or(file.seed).unwrap_or(0);
    cfg.override_horizon = flags.override_horizon || file.override_horizon.unwrap_or(false);
    cfg.validate()?;
    Ok(cfg)
}
