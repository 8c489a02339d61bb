//! Schmidt-mode analysis of joint spectra: heralded purity, two-source
//! interference visibility and the design parameter sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::{grating_vector, DispersionModel, InteractionGeometry};
use crate::domain::{periodic_configuration, track_domains, DomainConfiguration, TargetProfile, TrackOptions};
use crate::error::{Error, Result};
use crate::spectral::{
    build_jsa, pmf_point, relative_brightness, FrequencyGrid, JointSpectralAmplitude, PmfSource,
    PumpEnvelope,
};

/// Provenance of a Schmidt spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchmidtSource {
    Jsa,
    SqrtJsi,
    Jsi,
}

/// Normalized singular values of a joint spectral matrix, nonincreasing,
/// with Σλ² = 1.
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    singular_values: Vec<f64>,
    source: SchmidtSource,
}

impl SchmidtSpectrum {
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn source(&self) -> SchmidtSource {
        self.source
    }

    /// Heralded single-photon purity P = Σλ⁴.
    pub fn purity(&self) -> f64 {
        self.singular_values.iter().map(|l| l.powi(4)).sum()
    }

    /// Schmidt number K = 1/P.
    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.purity()
    }
}

/// Singular values of the L2-normalized matrix, sorted nonincreasing.
pub fn schmidt_decompose(matrix: &DMatrix<Complex64>) -> Result<SchmidtSpectrum> {
    schmidt_decompose_tagged(matrix, SchmidtSource::Jsa)
}

pub fn schmidt_decompose_tagged(
    matrix: &DMatrix<Complex64>,
    source: SchmidtSource,
) -> Result<SchmidtSpectrum> {
    let norm = matrix.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "cannot decompose a matrix with norm {norm}"
        )));
    }
    let svd = matrix
        .clone()
        .try_svd(false, false, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().map(|s| s / norm).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    Ok(SchmidtSpectrum {
        singular_values: sv,
        source,
    })
}

/// Schmidt spectrum of a real nonnegative matrix (histogram analyses).
pub fn schmidt_decompose_real(matrix: &DMatrix<f64>, source: SchmidtSource) -> Result<SchmidtSpectrum> {
    let complex = matrix.map(|v| Complex64::new(v, 0.0));
    schmidt_decompose_tagged(&complex, source)
}

/// Convenience: Schmidt purity of a JSA.
pub fn jsa_purity(jsa: &JointSpectralAmplitude) -> Result<f64> {
    Ok(schmidt_decompose(jsa.values())?.purity())
}

/// Which photons from sources A and B meet at the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceArm {
    SignalSignal,
    IdlerIdler,
    /// Signal of A against idler of B; requires degenerate (identical)
    /// signal and idler grid axes.
    SignalIdler,
}

fn reduced_signal(f: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    f * f.adjoint()
}

fn reduced_idler(f: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (f.adjoint() * f).map(|v| v.conj())
}

/// Two-source interference visibility: the trace overlap Tr(ρ_A ρ_B) of the
/// heralded reduced states on the chosen arm, maximized over the relative
/// arrival delay the experiment scans. For identical sources on a like arm
/// the optimum sits at zero delay and the value is exactly the purity.
///
/// The cross arm interferes A's signal with B's idler, so its value is
/// directional for distinct sources; the like arms are symmetric under
/// swapping the arguments.
pub fn hom_visibility(
    a: &JointSpectralAmplitude,
    b: &JointSpectralAmplitude,
    arm: InterferenceArm,
) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(
            "visibility requires both JSAs on the same grid".into(),
        ));
    }
    let grid = a.grid();
    if arm == InterferenceArm::SignalIdler
        && (grid.n_signal() != grid.n_idler()
            || grid.signal(0) != grid.idler(0)
            || grid.signal_step() != grid.idler_step())
    {
        return Err(Error::GridMismatch(
            "signal-idler interference needs degenerate signal/idler axes".into(),
        ));
    }

    let (rho_a, rho_b, step) = match arm {
        InterferenceArm::SignalSignal => (
            reduced_signal(a.values()),
            reduced_signal(b.values()),
            grid.signal_step(),
        ),
        InterferenceArm::IdlerIdler => (
            reduced_idler(a.values()),
            reduced_idler(b.values()),
            grid.idler_step(),
        ),
        InterferenceArm::SignalIdler => (
            reduced_signal(a.values()),
            reduced_idler(b.values()),
            grid.signal_step(),
        ),
    };

    // Normalize to unit traces; the JSA matrices carry the grid measure in
    // their normalization, so the reduced matrices are not unit-trace as
    // stored.
    let tr_a: f64 = rho_a.diagonal().iter().map(|v| v.re).sum();
    let tr_b: f64 = rho_b.diagonal().iter().map(|v| v.re).sum();
    if !(tr_a > 0.0 && tr_b > 0.0) {
        return Err(Error::Numerical("reduced state has nonpositive trace".into()));
    }
    let trace_norm = tr_a * tr_b;

    // Tr(ρ_A D(τ) ρ_B D†(τ)) = Σ_d e^{i·d·Δω·τ}·Q_d with
    // Q_d = Σ_a ρ_A[a, a+d]·ρ_B[a+d, a]; grouping by index offset d makes
    // each delay evaluation O(n).
    let n = rho_a.nrows();
    let mut q = vec![Complex64::ZERO; 2 * n - 1];
    for (d_idx, slot) in q.iter_mut().enumerate() {
        let d = d_idx as isize - (n as isize - 1);
        let mut s = Complex64::ZERO;
        for a_idx in 0..n {
            let b_idx = a_idx as isize + d;
            if b_idx >= 0 && (b_idx as usize) < n {
                s += rho_a[(a_idx, b_idx as usize)] * rho_b[(b_idx as usize, a_idx)];
            }
        }
        *slot = s;
    }
    let overlap = |tau: f64| -> f64 {
        let mut v = 0.0;
        for (d_idx, qd) in q.iter().enumerate() {
            let d = d_idx as f64 - (n as f64 - 1.0);
            let phase = d * step * tau;
            v += qd.re * phase.cos() - qd.im * phase.sin();
        }
        v / trace_norm
    };

    // Coarse scan over one grid time window around zero, then golden-section
    // refinement of the best bracket.
    let window = 2.0 * std::f64::consts::PI / step;
    let n_scan = 801;
    let mut best_tau = 0.0;
    let mut best = overlap(0.0);
    for k in 0..n_scan {
        let tau = -0.5 * window + window * k as f64 / (n_scan - 1) as f64;
        let v = overlap(tau);
        if v > best {
            best = v;
            best_tau = tau;
        }
    }
    let h = window / (n_scan - 1) as f64;
    let (mut lo, mut hi) = (best_tau - h, best_tau + h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (overlap(x1), overlap(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = overlap(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = overlap(x1);
        }
    }
    Ok(best.max(f1).max(f2))
}

/// Ratio of the highest secondary local maximum of the PMF intensity |φ|²
/// to its global maximum over the residual window ±8π/l.
///
/// The thresholds quoted for the σ trade-off refer to this intensity ratio;
/// the amplitude ratio of the ideal truncated-Gaussian profile saturates
/// near 1.5e-2 at σ = l/4.7 and would not resolve the design trade-off.
pub fn side_lobe_level(config: &DomainConfiguration, grating: f64, length: f64) -> f64 {
    let half = 8.0 * std::f64::consts::PI / length;
    let n = 4001;
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let res = -half + 2.0 * half * k as f64 / (n - 1) as f64;
            pmf_point(config, grating + res).norm_sqr()
        })
        .collect();
    let (peak_idx, peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        .expect("nonempty window");
    if *peak <= 0.0 {
        return 0.0;
    }
    let mut side: f64 = 0.0;
    for i in 1..n - 1 {
        if i != peak_idx && values[i] > values[i - 1] && values[i] > values[i + 1] {
            side = side.max(values[i]);
        }
    }
    side / peak
}

/// One swept design parameter with the figures of merit recorded per value.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub parameter: String,
    pub values: Vec<f64>,
    pub purity: Vec<f64>,
    pub relative_brightness: Vec<f64>,
    pub side_lobe_level: Vec<f64>,
    /// Purity of the phase-stripped |f| proxy, when the sweep computes it.
    pub proxy_purity: Option<Vec<f64>>,
}

impl SweepResult {
    pub fn save_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        write!(out, "{},purity,relative_brightness,side_lobe_level", self.parameter)?;
        if self.proxy_purity.is_some() {
            write!(out, ",sqrt_jsi_proxy_purity")?;
        }
        writeln!(out)?;
        for i in 0..self.values.len() {
            write!(
                out,
                "{},{},{},{}",
                self.values[i], self.purity[i], self.relative_brightness[i], self.side_lobe_level[i]
            )?;
            if let Some(p) = &self.proxy_purity {
                write!(out, ",{}", p[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Grid resolution used by the sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub grid_points: usize,
    pub span_bandwidths: f64,
    pub subdivisions: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            grid_points: 512,
            span_bandwidths: 4.0,
            subdivisions: 1,
        }
    }
}

/// Track, simulate and score one apodization width per entry of `sigmas`
/// (metres). Brightness is quoted relative to duty-0.5 periodic poling of
/// the same length under the same pump.
pub fn sweep_sigma(
    sigmas: &[f64],
    length: f64,
    env: &PumpEnvelope,
    model: &DispersionModel,
    geometry: &InteractionGeometry,
    options: SweepOptions,
) -> Result<SweepResult> {
    if sigmas.is_empty() {
        return Err(Error::InvalidInput("sigma sweep needs at least one value".into()));
    }
    if sigmas.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput("sigma values must be positive".into()));
    }
    let grid = FrequencyGrid::default_for(env, geometry, options.grid_points, options.span_bandwidths)?;
    let reference = periodic_configuration(length, geometry.poling_period(), 0.5)?;
    let reference_jsa = build_jsa(PmfSource::Domains(&reference), env, model, geometry, grid.clone())?;
    let kg = grating_vector(model, geometry)?;

    let track_options = TrackOptions {
        subdivisions: options.subdivisions,
        ..TrackOptions::default()
    };
    let mut result = SweepResult {
        parameter: "sigma_mm".into(),
        values: sigmas.iter().map(|s| s * 1e3).collect(),
        purity: Vec::with_capacity(sigmas.len()),
        relative_brightness: Vec::with_capacity(sigmas.len()),
        side_lobe_level: Vec::with_capacity(sigmas.len()),
        proxy_purity: None,
    };
    for &sigma in sigmas {
        let profile = TargetProfile::new(sigma, length)?;
        let config = track_domains(&profile, geometry.poling_period(), track_options)?;
        let jsa = build_jsa(PmfSource::Domains(&config), env, model, geometry, grid.clone())?;
        result.purity.push(jsa_purity(&jsa)?);
        result.relative_brightness.push(relative_brightness(&jsa, &reference_jsa));
        result.side_lobe_level.push(side_lobe_level(&config, kg, length));
    }
    Ok(result)
}

/// Purity of a fixed crystal design as the pump duration varies. Both the
/// JSA purity and the phase-stripped √JSI proxy are recorded; brightness is
/// relative to the first duration in the list.
pub fn sweep_pulse_duration(
    durations: &[f64],
    config: &DomainConfiguration,
    pump_center: f64,
    model: &DispersionModel,
    geometry: &InteractionGeometry,
    options: SweepOptions,
) -> Result<SweepResult> {
    if durations.is_empty() {
        return Err(Error::InvalidInput("duration sweep needs at least one value".into()));
    }
    if durations.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidInput("durations must be positive".into()));
    }
    let kg = grating_vector(model, geometry)?;
    let lobe = side_lobe_level(config, kg, config.total_length_m());

    let mut result = SweepResult {
        parameter: "duration_ps".into(),
        values: durations.iter().map(|d| d * 1e12).collect(),
        purity: Vec::with_capacity(durations.len()),
        relative_brightness: Vec::with_capacity(durations.len()),
        side_lobe_level: vec![lobe; durations.len()],
        proxy_purity: Some(Vec::with_capacity(durations.len())),
    };
    let mut first_norm = None;
    for &duration in durations {
        let env = PumpEnvelope::sech2(pump_center, duration)?;
        let grid =
            FrequencyGrid::default_for(&env, geometry, options.grid_points, options.span_bandwidths)?;
        let jsa = build_jsa(PmfSource::Domains(config), &env, model, geometry, grid)?;
        result.purity.push(jsa_purity(&jsa)?);
        let proxy = schmidt_decompose_real(&jsa.amplitude_abs_matrix(), SchmidtSource::SqrtJsi)?;
        result.proxy_purity.as_mut().unwrap().push(proxy.purity());
        let first = *first_norm.get_or_insert(jsa.raw_norm_sq());
        result.relative_brightness.push(jsa.raw_norm_sq() / first);
    }
    Ok(result)
}
