//! Run configuration: a single TOML file with optional per-flag overrides
//! (flags win). Unknown keys are rejected so typos fail loudly.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qpmkit::constants::wavelength_to_angular;
use qpmkit::dispersion::{DispersionModel, InteractionGeometry};
use qpmkit::spectral::{PumpEnvelope, PumpShape};

use crate::CliError;

fn default_length_mm() -> f64 {
    30.0
}
fn default_sigma_fraction() -> f64 {
    4.7
}
fn default_subdivisions() -> usize {
    1
}
fn default_duty() -> f64 {
    0.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    #[serde(default = "default_length_mm")]
    pub length_mm: f64,
    /// Apodization width; when absent, length/sigma_fraction is used.
    #[serde(default)]
    pub sigma_mm: Option<f64>,
    #[serde(default = "default_sigma_fraction")]
    pub sigma_fraction: f64,
    /// Uniform periodic poling instead of apodization.
    #[serde(default)]
    pub flat: bool,
    /// Poling period; absent means the nominal value from dispersion.
    #[serde(default)]
    pub poling_period_um: Option<f64>,
    #[serde(default = "default_subdivisions")]
    pub subdivisions: usize,
    #[serde(default = "default_duty")]
    pub duty: f64,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        Self {
            length_mm: default_length_mm(),
            sigma_mm: None,
            sigma_fraction: default_sigma_fraction(),
            flat: false,
            poling_period_um: None,
            subdivisions: default_subdivisions(),
            duty: default_duty(),
        }
    }
}

impl CrystalConfig {
    pub fn length_m(&self) -> f64 {
        self.length_mm * 1e-3
    }

    pub fn sigma_m(&self) -> f64 {
        self.sigma_mm.map_or(self.length_m() / self.sigma_fraction, |s| s * 1e-3)
    }
}

fn default_shape() -> String {
    "sech2".into()
}
fn default_duration_ps() -> f64 {
    1.3
}
fn default_pump_nm() -> f64 {
    774.9
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    #[serde(default = "default_shape")]
    pub shape: String,
    #[serde(default = "default_duration_ps")]
    pub duration_ps: f64,
    #[serde(default = "default_pump_nm")]
    pub wavelength_nm: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            shape: default_shape(),
            duration_ps: default_duration_ps(),
            wavelength_nm: default_pump_nm(),
        }
    }
}

impl PumpConfig {
    pub fn envelope(&self) -> Result<PumpEnvelope, CliError> {
        let center = wavelength_to_angular(self.wavelength_nm * 1e-9);
        let shape = match self.shape.as_str() {
            "sech2" => PumpShape::SechSquared,
            "gaussian" => PumpShape::Gaussian,
            other => {
                return Err(CliError::Config(format!(
                    "pump.shape must be 'sech2' or 'gaussian', got '{other}'"
                )))
            }
        };
        PumpEnvelope::new(shape, center, self.duration_ps * 1e-12)
            .map_err(|e| CliError::Config(format!("pump.duration_ps: {e}")))
    }
}

fn default_model() -> String {
    "ktp".into()
}
fn default_pump_axis() -> String {
    "y".into()
}
fn default_signal_axis() -> String {
    "y".into()
}
fn default_idler_axis() -> String {
    "z".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    /// Builtin name ("ktp", "vacuum") or a path to a model file.
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_pump_axis")]
    pub pump_axis: String,
    #[serde(default = "default_signal_axis")]
    pub signal_axis: String,
    #[serde(default = "default_idler_axis")]
    pub idler_axis: String,
    #[serde(default)]
    pub temperature_c: Option<f64>,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            model: default_model(),
            pump_axis: default_pump_axis(),
            signal_axis: default_signal_axis(),
            idler_axis: default_idler_axis(),
            temperature_c: None,
        }
    }
}

impl DispersionConfig {
    pub fn load_model(&self) -> Result<DispersionModel, CliError> {
        let mut model = match self.model.as_str() {
            "ktp" => DispersionModel::ktp(),
            "vacuum" => DispersionModel::vacuum(),
            path => DispersionModel::from_path(Path::new(path))
                .map_err(|e| CliError::Config(format!("dispersion.model '{path}': {e}")))?,
        };
        if let Some(t) = self.temperature_c {
            model = model.with_temperature(t);
        }
        Ok(model)
    }
}

fn default_points() -> usize {
    512
}
fn default_span() -> f64 {
    4.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_span")]
    pub span_bandwidths: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: default_points(),
            span_bandwidths: default_span(),
        }
    }
}

fn default_arms() -> String {
    "both".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub fwhm_nm: f64,
    #[serde(default)]
    pub center_nm: Option<f64>,
    #[serde(default = "default_arms")]
    pub arms: String,
}

fn default_sigma_fractions() -> Vec<f64> {
    vec![10.0, 8.0, 6.0, 4.7, 4.0, 3.0, 2.0]
}
fn default_durations_ps() -> Vec<f64> {
    (0..11).map(|k| 0.9 + 0.08 * k as f64).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// σ values expressed as length/x fractions.
    #[serde(default = "default_sigma_fractions")]
    pub sigma_fractions: Vec<f64>,
    #[serde(default = "default_durations_ps")]
    pub durations_ps: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sigma_fractions: default_sigma_fractions(),
            durations_ps: default_durations_ps(),
        }
    }
}

fn default_bin_width() -> u64 {
    50
}
fn default_window() -> u64 {
    12_500
}
fn default_clock() -> u64 {
    12_500
}
fn default_dl() -> f64 {
    qpmkit::jsi::DEFAULT_DL_PS_PER_NM
}
fn default_ref_nm() -> f64 {
    1549.8
}
fn default_fiber_km() -> f64 {
    20.0
}
fn default_trigger() -> u8 {
    0
}
fn default_signal_ch() -> u8 {
    1
}
fn default_idler_ch() -> u8 {
    2
}
fn default_epsilon() -> f64 {
    0.005
}
fn default_intervals() -> usize {
    8
}
fn default_subtract() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionConfig {
    #[serde(default = "default_bin_width")]
    pub bin_width_ps: u64,
    #[serde(default = "default_window")]
    pub window_ps: u64,
    #[serde(default = "default_clock")]
    pub clock_period_ps: u64,
    #[serde(default = "default_dl")]
    pub dl_ps_per_nm: f64,
    #[serde(default = "default_ref_nm")]
    pub reference_wavelength_nm: f64,
    #[serde(default = "default_fiber_km")]
    pub fiber_length_km: f64,
    #[serde(default = "default_trigger")]
    pub trigger_channel: u8,
    #[serde(default = "default_signal_ch")]
    pub signal_channel: u8,
    #[serde(default = "default_idler_ch")]
    pub idler_channel: u8,
    #[serde(default = "default_epsilon")]
    pub convergence_epsilon: f64,
    #[serde(default = "default_intervals")]
    pub convergence_intervals: usize,
    /// Background subtraction before the purity estimate (raw exports are
    /// always unsubtracted).
    #[serde(default = "default_subtract")]
    pub subtract_background: bool,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty reconstruction config")
    }
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub crystal: CrystalConfig,
    #[serde(default)]
    pub pump: PumpConfig,
    #[serde(default)]
    pub dispersion: DispersionConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub filter: Option<FilterConfig>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub reconstruction: ReconstructionConfig,
    #[serde(default = "default_seed")]
    #[serde(rename = "seed")]
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self {
                seed: default_seed(),
                ..Self::default()
            }),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("config '{}': {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("config '{}': {e}", p.display())))
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.crystal.length_mm > 0.0) {
            return Err(CliError::Config(format!(
                "crystal.length_mm must be positive, got {}",
                self.crystal.length_mm
            )));
        }
        if let Some(s) = self.crystal.sigma_mm {
            if !(s > 0.0) {
                return Err(CliError::Config(format!(
                    "crystal.sigma_mm must be positive, got {s}"
                )));
            }
        }
        if !(self.crystal.sigma_fraction > 0.0) {
            return Err(CliError::Config(format!(
                "crystal.sigma_fraction must be positive, got {}",
                self.crystal.sigma_fraction
            )));
        }
        if self.crystal.subdivisions == 0 {
            return Err(CliError::Config("crystal.subdivisions must be at least 1".into()));
        }
        if !(self.crystal.duty > 0.0 && self.crystal.duty < 1.0) {
            return Err(CliError::Config(format!(
                "crystal.duty must lie in (0, 1), got {}",
                self.crystal.duty
            )));
        }
        if self.grid.points < 2 {
            return Err(CliError::Config(format!(
                "grid.points must be at least 2, got {}",
                self.grid.points
            )));
        }
        if let Some(f) = &self.filter {
            if !(f.fwhm_nm > 0.0) {
                return Err(CliError::Config(format!(
                    "filter.fwhm_nm must be positive, got {}",
                    f.fwhm_nm
                )));
            }
        }
        Ok(())
    }

    /// Geometry at degenerate telecom operation for the configured model,
    /// with the configured or nominal poling period.
    pub fn geometry(&self, model: &DispersionModel) -> Result<InteractionGeometry, CliError> {
        let w0 = wavelength_to_angular(self.pump.wavelength_nm * 2.0 * 1e-9);
        let built = match self.crystal.poling_period_um {
            Some(p) => InteractionGeometry::new(
                &self.dispersion.pump_axis,
                &self.dispersion.signal_axis,
                &self.dispersion.idler_axis,
                w0,
                w0,
                p * 1e-6,
            ),
            None => InteractionGeometry::with_auto_period(
                model,
                &self.dispersion.pump_axis,
                &self.dispersion.signal_axis,
                &self.dispersion.idler_axis,
                w0,
                w0,
            ),
        };
        built.map_err(|e| CliError::Config(format!("crystal.poling_period_um/dispersion: {e}")))
    }
}
