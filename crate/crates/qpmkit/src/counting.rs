//! Counting-statistics estimators: Klyshko heralding, collection efficiency,
//! squeezing parameter from measured rates, brightness normalization and the
//! visibility-versus-power extrapolation.

use crate::error::{Error, Result};

/// Measured singles/coincidence rates of one source setting.
#[derive(Debug, Clone, Copy)]
pub struct RateMeasurement {
    singles_signal: f64,
    singles_idler: f64,
    coincidences: f64,
    clock_rate: f64,
    pump_power_mw: Option<f64>,
}

impl RateMeasurement {
    pub fn new(
        singles_signal: f64,
        singles_idler: f64,
        coincidences: f64,
        clock_rate: f64,
        pump_power_mw: Option<f64>,
    ) -> Result<Self> {
        if singles_signal < 0.0 || singles_idler < 0.0 || coincidences < 0.0 {
            return Err(Error::InvalidInput("rates must be nonnegative".into()));
        }
        if coincidences > singles_signal.min(singles_idler) {
            return Err(Error::InvalidInput(format!(
                "coincidence rate {coincidences} exceeds a singles rate ({singles_signal}, {singles_idler})"
            )));
        }
        if !(clock_rate > 0.0) {
            return Err(Error::InvalidInput(format!("clock rate must be positive, got {clock_rate}")));
        }
        if let Some(p) = pump_power_mw {
            if !(p > 0.0) {
                return Err(Error::InvalidInput(format!("pump power must be positive, got {p}")));
            }
        }
        Ok(Self {
            singles_signal,
            singles_idler,
            coincidences,
            clock_rate,
            pump_power_mw,
        })
    }

    pub fn singles_signal(&self) -> f64 {
        self.singles_signal
    }

    pub fn singles_idler(&self) -> f64 {
        self.singles_idler
    }

    pub fn coincidences(&self) -> f64 {
        self.coincidences
    }

    pub fn clock_rate(&self) -> f64 {
        self.clock_rate
    }

    pub fn pump_power_mw(&self) -> Option<f64> {
        self.pump_power_mw
    }

    /// Read measurements from CSV with header
    /// `singles_signal_hz,singles_idler_hz,coincidences_hz,clock_hz,pump_power_mw`
    /// (the power field may be empty).
    pub fn from_csv<R: std::io::Read>(input: R) -> Result<Vec<Self>> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let expected = [
            "singles_signal_hz",
            "singles_idler_hz",
            "coincidences_hz",
            "clock_hz",
            "pump_power_mw",
        ];
        {
            let headers = reader.headers().map_err(|e| Error::Data(format!("rates CSV: {e}")))?;
            if headers.iter().ne(expected) {
                return Err(Error::Data(format!(
                    "rates CSV header must be {expected:?}, got {headers:?}"
                )));
            }
        }
        let mut out = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Data(format!("rates CSV row {}: {e}", i + 2)))?;
            let field = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Data(format!("rates CSV row {}: bad field '{}'", i + 2, expected[k])))
            };
            let power = match record.get(4).map(str::trim) {
                None | Some("") => None,
                Some(v) => Some(v.parse().map_err(|_| {
                    Error::Data(format!("rates CSV row {}: bad field 'pump_power_mw'", i + 2))
                })?),
            };
            out.push(Self::new(field(0)?, field(1)?, field(2)?, field(3)?, power)?);
        }
        Ok(out)
    }
}

/// Klyshko heralding efficiencies of both arms.
#[derive(Debug, Clone, Copy)]
pub struct HeraldingEfficiency {
    pub signal: f64,
    pub idler: f64,
}

impl HeraldingEfficiency {
    pub fn symmetric_mean(&self) -> f64 {
        0.5 * (self.signal + self.idler)
    }
}

/// η_signal = C/S_idler and η_idler = C/S_signal.
pub fn klyshko_efficiency(m: &RateMeasurement) -> Result<HeraldingEfficiency> {
    if !(m.singles_signal > 0.0 && m.singles_idler > 0.0) {
        return Err(Error::InvalidInput("Klyshko estimate needs nonzero singles".into()));
    }
    Ok(HeraldingEfficiency {
        signal: m.coincidences / m.singles_idler,
        idler: m.coincidences / m.singles_signal,
    })
}

/// Heralding efficiency with detector efficiency and known optical loss
/// factored out: η / (detector_eff · (1 − optical_loss)).
pub fn collection_efficiency(heralding: f64, detector_eff: f64, optical_loss: f64) -> Result<f64> {
    if !(heralding > 0.0 && heralding <= 1.0) {
        return Err(Error::InvalidInput(format!("heralding must be in (0, 1], got {heralding}")));
    }
    if !(detector_eff > 0.0 && detector_eff <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "detector efficiency must be in (0, 1], got {detector_eff}"
        )));
    }
    if !((0.0..1.0).contains(&optical_loss)) {
        return Err(Error::InvalidInput(format!(
            "optical loss must be in [0, 1), got {optical_loss}"
        )));
    }
    Ok(heralding / (detector_eff * (1.0 - optical_loss)))
}

/// Squeezing inferred from rates via the two-mode-squeezed photon statistics
/// of the pair state.
#[derive(Debug, Clone, Copy)]
pub struct SqueezingEstimate {
    /// Squeezing amplitude γ.
    pub gamma: f64,
    /// Interaction constant τ = γ²/p (1/mW) when the pump power is known.
    pub tau_per_mw: Option<f64>,
    /// Inferred mean pair number per clock cycle, µ = γ²/(1−γ²).
    pub pairs_per_pulse: f64,
}

impl SqueezingEstimate {
    /// γ = √(τ·p) at another pump power, using the fitted interaction
    /// constant; doubling the power raises γ by √2.
    pub fn gamma_at_power(&self, pump_power_mw: f64) -> Option<f64> {
        self.tau_per_mw.map(|tau| (tau * pump_power_mw).sqrt())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GammaOptions {
    /// Subtract the Poissonian accidental-coincidence estimate
    /// S_s·S_i/clock from the coincidence rate before inverting. Off by
    /// default.
    pub subtract_accidentals: bool,
}

/// Loss-independent pair rate N = S_s·S_i/C, mean pair number per pulse
/// µ = N/clock, and γ from µ = γ²/(1−γ²).
pub fn estimate_gamma_with(m: &RateMeasurement, options: GammaOptions) -> Result<SqueezingEstimate> {
    if !(m.coincidences > 0.0) {
        return Err(Error::InvalidInput("gamma estimate needs a nonzero coincidence rate".into()));
    }
    let mut coincidences = m.coincidences;
    if options.subtract_accidentals {
        coincidences -= m.singles_signal * m.singles_idler / m.clock_rate;
        if !(coincidences > 0.0) {
            return Err(Error::InvalidInput(
                "coincidences are consistent with accidentals only".into(),
            ));
        }
    }
    let pair_rate = m.singles_signal * m.singles_idler / coincidences;
    let mu = pair_rate / m.clock_rate;
    if mu >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "inferred mean pair number µ = {mu} per pulse is unphysical (≥ 1)"
        )));
    }
    let gamma = (mu / (1.0 + mu)).sqrt();
    Ok(SqueezingEstimate {
        gamma,
        tau_per_mw: m.pump_power_mw.map(|p| gamma * gamma / p),
        pairs_per_pulse: mu,
    })
}

pub fn estimate_gamma(m: &RateMeasurement) -> Result<SqueezingEstimate> {
    estimate_gamma_with(m, GammaOptions::default())
}

/// Coincidences per second and milliwatt of pump power.
pub fn brightness_per_mw(m: &RateMeasurement) -> Result<f64> {
    let p = m
        .pump_power_mw
        .ok_or_else(|| Error::InvalidInput("brightness needs the pump power".into()))?;
    Ok(m.coincidences / p)
}

/// Abscissa of a visibility scan. The zero-power intercept is the same under
/// any of these parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbscissaKind {
    PumpPowerMw,
    Gamma,
    GammaSquared,
}

#[derive(Debug, Clone, Copy)]
pub struct VisibilityPoint {
    pub abscissa: f64,
    pub visibility: f64,
    pub std_error: Option<f64>,
}

/// Interference visibilities measured against pump power (or γ).
#[derive(Debug, Clone)]
pub struct VisibilityScan {
    pub points: Vec<VisibilityPoint>,
    pub abscissa: AbscissaKind,
}

impl VisibilityScan {
    pub fn new(points: Vec<VisibilityPoint>, abscissa: AbscissaKind) -> Result<Self> {
        if points
            .iter()
            .any(|p| !(0.0..=1.0).contains(&p.visibility) || !p.abscissa.is_finite())
        {
            return Err(Error::InvalidInput(
                "visibilities must lie in [0, 1] with finite abscissas".into(),
            ));
        }
        Ok(Self { points, abscissa })
    }

    /// Read from CSV with header `abscissa,visibility,std_error` (the error
    /// field may be empty).
    pub fn from_csv<R: std::io::Read>(input: R, abscissa: AbscissaKind) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        {
            let headers = reader.headers().map_err(|e| Error::Data(format!("scan CSV: {e}")))?;
            if headers.iter().ne(["abscissa", "visibility", "std_error"]) {
                return Err(Error::Data(format!(
                    "scan CSV header must be abscissa,visibility,std_error, got {headers:?}"
                )));
            }
        }
        let mut points = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Data(format!("scan CSV row {}: {e}", i + 2)))?;
            let get = |k: usize, name: &str| -> Result<f64> {
                record
                    .get(k)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Data(format!("scan CSV row {}: bad field '{name}'", i + 2)))
            };
            let std_error = match record.get(2).map(str::trim) {
                None | Some("") => None,
                Some(v) => Some(v.parse().map_err(|_| {
                    Error::Data(format!("scan CSV row {}: bad field 'std_error'", i + 2))
                })?),
            };
            points.push(VisibilityPoint {
                abscissa: get(0, "abscissa")?,
                visibility: get(1, "visibility")?,
                std_error,
            });
        }
        Self::new(points, abscissa)
    }
}

/// Result of the linear visibility extrapolation; the intercept is the
/// zero-power visibility and lower-bounds the photon purity.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_std_error: f64,
    pub slope_std_error: f64,
    pub weighted: bool,
}

/// Weighted least-squares line through the scan (weights 1/σ²); falls back
/// to an unweighted fit with residual-based errors when any point lacks a
/// reported error.
pub fn fit_visibility_vs_power(scan: &VisibilityScan) -> Result<LinearFit> {
    let n = scan.points.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("fit needs at least 2 points, got {n}")));
    }
    let weighted = scan
        .points
        .iter()
        .all(|p| matches!(p.std_error, Some(e) if e > 0.0));

    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &scan.points {
        let w = if weighted {
            1.0 / (p.std_error.unwrap() * p.std_error.unwrap())
        } else {
            1.0
        };
        s += w;
        sx += w * p.abscissa;
        sxx += w * p.abscissa * p.abscissa;
        sy += w * p.visibility;
        sxy += w * p.abscissa * p.visibility;
    }
    let delta = s * sxx - sx * sx;
    if !(delta.abs() > 1e-12 * s * sxx.max(1.0)) {
        return Err(Error::InvalidInput(
            "degenerate abscissas: all scan points share the same x".into(),
        ));
    }
    let intercept = (sxx * sy - sx * sxy) / delta;
    let slope = (s * sxy - sx * sy) / delta;
    let (mut var_intercept, mut var_slope) = (sxx / delta, s / delta);
    if !weighted {
        // Scale the covariance by the residual variance estimate.
        let mut ss_res = 0.0;
        for p in &scan.points {
            let r = p.visibility - intercept - slope * p.abscissa;
            ss_res += r * r;
        }
        let dof = (n as f64 - 2.0).max(1.0);
        var_intercept *= ss_res / dof;
        var_slope *= ss_res / dof;
    }
    Ok(LinearFit {
        intercept,
        slope,
        intercept_std_error: var_intercept.sqrt(),
        slope_std_error: var_slope.sqrt(),
        weighted,
    })
}
