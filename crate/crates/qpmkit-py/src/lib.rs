//! Python bindings for the photon-pair toolkit: crystal design, joint
//! spectra, counting statistics and the dispersive reconstruction pipeline.
//!
//! Build with `cargo build -p qpmkit-py --release` and load the produced
//! `libqpmkit_py.so` as the module `qpmkit_py` (see `python/smoke_test.py`).

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use qpmkit::analysis::{hom_visibility, jsa_purity, schmidt_decompose, InterferenceArm, SweepOptions};
use qpmkit::counting::{self, AbscissaKind, GammaOptions, RateMeasurement, VisibilityPoint, VisibilityScan};
use qpmkit::dispersion::{telecom_ktp_geometry, DispersionModel, InteractionGeometry};
use qpmkit::domain::{self, TargetProfile, TrackOptions};
use qpmkit::jsi::{
    build_histogram, histogram_purity, ingest_timetags_csv, synthesize_timetags, ChannelRoles,
    DispersionMap, HistogramOptions, HistogramPurityMode, SynthesisConfig,
};
use qpmkit::spectral::{
    apply_filter, build_jsa, relative_brightness, wavelength_interval_to_angular, FilterArms,
    FrequencyGrid, JointSpectralAmplitude, PmfSource, PumpEnvelope, SpectralFilter,
};

fn value_err(e: qpmkit::Error) -> PyErr {
    match e {
        qpmkit::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn telecom() -> PyResult<(DispersionModel, InteractionGeometry)> {
    let model = DispersionModel::ktp();
    let geometry = telecom_ktp_geometry(&model).map_err(value_err)?;
    Ok((model, geometry))
}

/// Ordered ±1 crystal domains (widths in µm).
#[pyclass(name = "DomainConfiguration", module = "qpmkit_py")]
struct PyDomainConfiguration {
    inner: domain::DomainConfiguration,
}

#[pymethods]
impl PyDomainConfiguration {
    #[getter]
    fn widths_um(&self) -> Vec<f64> {
        self.inner.widths_um().to_vec()
    }

    #[getter]
    fn signs(&self) -> Vec<i8> {
        self.inner.signs().to_vec()
    }

    #[getter]
    fn domain_count(&self) -> usize {
        self.inner.domain_count()
    }

    #[getter]
    fn total_length_mm(&self) -> f64 {
        self.inner.total_length_m() * 1e3
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        self.inner
            .save_csv_path(std::path::Path::new(path))
            .map_err(value_err)
    }

    #[staticmethod]
    fn load_csv(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: domain::DomainConfiguration::load_csv_path(std::path::Path::new(path))
                .map_err(value_err)?,
        })
    }

    /// |φ(Δk₀)| relative to duty-0.5 periodic poling of the same length, at
    /// the telecom KTP operating point.
    fn effective_nonlinearity(&self) -> PyResult<f64> {
        let (model, geometry) = telecom()?;
        let kg = qpmkit::dispersion::grating_vector(&model, &geometry).map_err(value_err)?;
        domain::effective_nonlinearity(&self.inner, kg).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DomainConfiguration(domains={}, length_mm={:.3})",
            self.inner.domain_count(),
            self.inner.total_length_m() * 1e3
        )
    }

    fn __len__(&self) -> usize {
        self.inner.domain_count()
    }
}

/// A simulated joint spectral amplitude with its figures of merit.
#[pyclass(name = "Simulation", module = "qpmkit_py")]
struct PySimulation {
    jsa: JointSpectralAmplitude,
    purity: f64,
    transmitted_fraction: Option<f64>,
}

#[pymethods]
impl PySimulation {
    #[getter]
    fn purity(&self) -> f64 {
        self.purity
    }

    #[getter]
    fn schmidt_number(&self) -> f64 {
        1.0 / self.purity
    }

    #[getter]
    fn transmitted_fraction(&self) -> Option<f64> {
        self.transmitted_fraction
    }

    /// Leading normalized Schmidt coefficients.
    #[pyo3(signature = (count = 16))]
    fn schmidt_coefficients(&self, count: usize) -> PyResult<Vec<f64>> {
        let spectrum = schmidt_decompose(self.jsa.values()).map_err(value_err)?;
        Ok(spectrum.singular_values().iter().copied().take(count).collect())
    }

    /// |f(ω_s, ω_i)|² as nested lists (rows = signal axis).
    fn intensity(&self) -> Vec<Vec<f64>> {
        let m = self.jsa.intensity_matrix();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    /// Signal-axis frequencies (rad/s).
    fn signal_axis(&self) -> Vec<f64> {
        self.jsa.grid().signal_values()
    }

    fn idler_axis(&self) -> Vec<f64> {
        self.jsa.grid().idler_values()
    }

    fn __repr__(&self) -> String {
        format!("Simulation(purity={:.4})", self.purity)
    }
}

/// Time-tagged detection events (ps, 1 ps resolution).
#[pyclass(name = "TimeTagStream", module = "qpmkit_py")]
struct PyTimeTagStream {
    inner: qpmkit::jsi::TimeTagStream,
}

#[pymethods]
impl PyTimeTagStream {
    #[getter]
    fn total_events(&self) -> usize {
        self.inner.total_events()
    }

    #[getter]
    fn rejected_records(&self) -> usize {
        self.inner.rejected_records()
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        self.inner
            .save_csv(std::io::BufWriter::new(file))
            .map_err(value_err)
    }

    fn save_binary(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        self.inner
            .save_binary(std::io::BufWriter::new(file))
            .map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (path, clock_period_ps = 12_500))]
    fn load_csv(path: &str, clock_period_ps: u64) -> PyResult<Self> {
        let file = std::fs::File::open(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(Self {
            inner: ingest_timetags_csv(file, ChannelRoles::default(), clock_period_ps)
                .map_err(value_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("TimeTagStream(events={})", self.inner.total_events())
    }
}

/// Nominal first-order poling period (µm) of the telecom type-II KTP
/// operating point.
#[pyfunction]
fn poling_period_um() -> PyResult<f64> {
    let (_, geometry) = telecom()?;
    Ok(geometry.poling_period() * 1e6)
}

/// Gaussian-apodized domain design tracking the erf-shaped cumulative
/// target; `sigma_mm` defaults to length/4.7.
#[pyfunction]
#[pyo3(signature = (length_mm = 30.0, sigma_mm = None, subdivisions = 1))]
fn design_apodized(length_mm: f64, sigma_mm: Option<f64>, subdivisions: usize) -> PyResult<PyDomainConfiguration> {
    let (_, geometry) = telecom()?;
    let length = length_mm * 1e-3;
    let sigma = sigma_mm.map_or(length / 4.7, |s| s * 1e-3);
    let profile = TargetProfile::new(sigma, length).map_err(value_err)?;
    let inner = domain::track_domains(
        &profile,
        geometry.poling_period(),
        TrackOptions {
            subdivisions,
            ..TrackOptions::default()
        },
    )
    .map_err(value_err)?;
    Ok(PyDomainConfiguration { inner })
}

/// Uniform periodic poling at the nominal telecom period.
#[pyfunction]
#[pyo3(signature = (length_mm = 22.0, duty = 0.5))]
fn design_periodic(length_mm: f64, duty: f64) -> PyResult<PyDomainConfiguration> {
    let (_, geometry) = telecom()?;
    let inner = domain::periodic_configuration(length_mm * 1e-3, geometry.poling_period(), duty)
        .map_err(value_err)?;
    Ok(PyDomainConfiguration { inner })
}

/// Cumulative apodization target A(z) in the erf-pair normalization.
#[pyfunction]
fn target_amplitude(sigma_mm: f64, length_mm: f64, z_mm: f64) -> PyResult<f64> {
    TargetProfile::new(sigma_mm * 1e-3, length_mm * 1e-3)
        .and_then(|p| p.amplitude(z_mm * 1e-3))
        .map_err(value_err)
}

/// Simulate the joint spectral amplitude of a design under a sech²-shaped
/// pump, optionally with a quartic filter on both arms.
#[pyfunction]
#[pyo3(signature = (domains, duration_ps = 1.3, grid_points = 256, span_bandwidths = 4.0, filter_fwhm_nm = None))]
fn simulate(
    py: Python<'_>,
    domains: &PyDomainConfiguration,
    duration_ps: f64,
    grid_points: usize,
    span_bandwidths: f64,
    filter_fwhm_nm: Option<f64>,
) -> PyResult<PySimulation> {
    py.detach(|| {
        let (model, geometry) = telecom()?;
        let env = PumpEnvelope::sech2(geometry.pump_center(), duration_ps * 1e-12).map_err(value_err)?;
        let grid = FrequencyGrid::default_for(&env, &geometry, grid_points, span_bandwidths)
            .map_err(value_err)?;
        let unfiltered = build_jsa(PmfSource::Domains(&domains.inner), &env, &model, &geometry, grid)
            .map_err(value_err)?;
        let (jsa, transmitted_fraction) = match filter_fwhm_nm {
            None => (unfiltered, None),
            Some(fwhm_nm) => {
                let fwhm = wavelength_interval_to_angular(fwhm_nm * 1e-9, 1549.8e-9);
                let filter =
                    SpectralFilter::from_fwhm(geometry.signal_center(), fwhm, FilterArms::Both)
                        .map_err(value_err)?;
                let filtered = apply_filter(&unfiltered, &filter).map_err(value_err)?;
                let fraction = relative_brightness(&filtered, &unfiltered);
                (filtered, Some(fraction))
            }
        };
        let purity = jsa_purity(&jsa).map_err(value_err)?;
        Ok(PySimulation {
            jsa,
            purity,
            transmitted_fraction,
        })
    })
}

/// Two-source interference visibility between simulations; `arm` is
/// "signal-signal", "idler-idler" or "signal-idler".
#[pyfunction]
#[pyo3(signature = (a, b, arm = "idler-idler"))]
fn visibility(py: Python<'_>, a: &PySimulation, b: &PySimulation, arm: &str) -> PyResult<f64> {
    let arm = match arm {
        "signal-signal" => InterferenceArm::SignalSignal,
        "idler-idler" => InterferenceArm::IdlerIdler,
        "signal-idler" => InterferenceArm::SignalIdler,
        other => {
            return Err(PyValueError::new_err(format!(
                "arm must be signal-signal|idler-idler|signal-idler, got '{other}'"
            )))
        }
    };
    py.detach(|| hom_visibility(&a.jsa, &b.jsa, arm).map_err(value_err))
}

/// σ sweep of the apodized design: returns (sigma_mm, purity,
/// relative_brightness, side_lobe_level) per value.
#[pyfunction]
#[pyo3(signature = (sigma_fractions, length_mm = 30.0, duration_ps = 1.3, grid_points = 128))]
fn sweep_sigma(
    py: Python<'_>,
    sigma_fractions: Vec<f64>,
    length_mm: f64,
    duration_ps: f64,
    grid_points: usize,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    py.detach(|| {
        let (model, geometry) = telecom()?;
        let env = PumpEnvelope::sech2(geometry.pump_center(), duration_ps * 1e-12).map_err(value_err)?;
        let length = length_mm * 1e-3;
        let sigmas: Vec<f64> = sigma_fractions.iter().map(|f| length / f).collect();
        let sweep = qpmkit::analysis::sweep_sigma(
            &sigmas,
            length,
            &env,
            &model,
            &geometry,
            SweepOptions {
                grid_points,
                ..SweepOptions::default()
            },
        )
        .map_err(value_err)?;
        Ok((0..sweep.values.len())
            .map(|k| {
                (
                    sweep.values[k],
                    sweep.purity[k],
                    sweep.relative_brightness[k],
                    sweep.side_lobe_level[k],
                )
            })
            .collect())
    })
}

/// Klyshko heralding efficiencies (signal, idler, symmetric mean).
#[pyfunction]
fn klyshko(singles_signal: f64, singles_idler: f64, coincidences: f64) -> PyResult<(f64, f64, f64)> {
    let m = RateMeasurement::new(singles_signal, singles_idler, coincidences, 80.9e6, None)
        .map_err(value_err)?;
    let h = counting::klyshko_efficiency(&m).map_err(value_err)?;
    Ok((h.signal, h.idler, h.symmetric_mean()))
}

/// Heralding with detector efficiency and known optical loss factored out.
#[pyfunction]
fn collection_efficiency(heralding: f64, detector_eff: f64, optical_loss: f64) -> PyResult<f64> {
    counting::collection_efficiency(heralding, detector_eff, optical_loss).map_err(value_err)
}

/// Squeezing estimate from rates: returns (gamma, pairs_per_pulse,
/// tau_per_mw or None).
#[pyfunction]
#[pyo3(signature = (singles_signal, singles_idler, coincidences, clock_hz = 80.9e6, pump_power_mw = None, subtract_accidentals = false))]
fn estimate_gamma(
    singles_signal: f64,
    singles_idler: f64,
    coincidences: f64,
    clock_hz: f64,
    pump_power_mw: Option<f64>,
    subtract_accidentals: bool,
) -> PyResult<(f64, f64, Option<f64>)> {
    let m = RateMeasurement::new(singles_signal, singles_idler, coincidences, clock_hz, pump_power_mw)
        .map_err(value_err)?;
    let est = counting::estimate_gamma_with(
        &m,
        GammaOptions {
            subtract_accidentals,
        },
    )
    .map_err(value_err)?;
    Ok((est.gamma, est.pairs_per_pulse, est.tau_per_mw))
}

/// Weighted linear extrapolation of a visibility scan to zero power:
/// returns (intercept, intercept_std_error, slope, slope_std_error).
#[pyfunction]
fn fit_visibility(points: Vec<(f64, f64, Option<f64>)>) -> PyResult<(f64, f64, f64, f64)> {
    let points: Vec<VisibilityPoint> = points
        .into_iter()
        .map(|(abscissa, visibility, std_error)| VisibilityPoint {
            abscissa,
            visibility,
            std_error,
        })
        .collect();
    let scan = VisibilityScan::new(points, AbscissaKind::PumpPowerMw).map_err(value_err)?;
    let fit = counting::fit_visibility_vs_power(&scan).map_err(value_err)?;
    Ok((fit.intercept, fit.intercept_std_error, fit.slope, fit.slope_std_error))
}

/// Wavelength (nm) reached after `dt_ps` of dispersive delay.
#[pyfunction]
#[pyo3(signature = (dt_ps, dl_ps_per_nm = qpmkit::jsi::DEFAULT_DL_PS_PER_NM, reference_nm = 1549.8))]
fn time_to_wavelength(dt_ps: f64, dl_ps_per_nm: f64, reference_nm: f64) -> PyResult<f64> {
    let map = DispersionMap::new(dl_ps_per_nm, reference_nm, 20.0).map_err(value_err)?;
    Ok(map.time_to_wavelength(dt_ps))
}

/// Sample a synthetic time-tag stream from a simulated JSA.
#[pyfunction]
#[pyo3(signature = (sim, n_events = 100_000, seed = 1, jitter_sigma_ps = 0.0, dark_rate_trigger_hz = 0.0, dark_rate_signal_hz = 0.0, dark_rate_idler_hz = 0.0))]
fn synthesize(
    py: Python<'_>,
    sim: &PySimulation,
    n_events: usize,
    seed: u64,
    jitter_sigma_ps: f64,
    dark_rate_trigger_hz: f64,
    dark_rate_signal_hz: f64,
    dark_rate_idler_hz: f64,
) -> PyResult<PyTimeTagStream> {
    py.detach(|| {
        let mut cfg = SynthesisConfig::clean(n_events, seed);
        cfg.jitter_sigma_ps = jitter_sigma_ps;
        cfg.dark_rate_trigger_hz = dark_rate_trigger_hz;
        cfg.dark_rate_signal_hz = dark_rate_signal_hz;
        cfg.dark_rate_idler_hz = dark_rate_idler_hz;
        let stream = synthesize_timetags(&sim.jsa, &DispersionMap::telecom_default(), &cfg)
            .map_err(value_err)?;
        Ok(PyTimeTagStream { inner: stream })
    })
}

/// Bin a stream into the coincidence histogram and estimate purities:
/// returns (sqrt_jsi_purity, jsi_purity, coincidences).
#[pyfunction]
#[pyo3(signature = (stream, bin_width_ps = 50, window_ps = 12_500, subtract_background = true))]
fn reconstruct(
    py: Python<'_>,
    stream: &PyTimeTagStream,
    bin_width_ps: u64,
    window_ps: u64,
    subtract_background: bool,
) -> PyResult<(f64, f64, u64)> {
    py.detach(|| {
        let options = HistogramOptions {
            bin_width_ps,
            window_ps,
            signal_offset_ps: 0,
            idler_offset_ps: 0,
        };
        let histogram = build_histogram(&stream.inner, options).map_err(value_err)?;
        let sqrt_p = histogram_purity(&histogram, HistogramPurityMode::SqrtJsi, subtract_background)
            .map_err(value_err)?;
        let jsi_p = histogram_purity(&histogram, HistogramPurityMode::Jsi, subtract_background)
            .map_err(value_err)?;
        Ok((sqrt_p, jsi_p, histogram.total()))
    })
}

#[pymodule]
fn qpmkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDomainConfiguration>()?;
    m.add_class::<PySimulation>()?;
    m.add_class::<PyTimeTagStream>()?;
    m.add_function(wrap_pyfunction!(poling_period_um, m)?)?;
    m.add_function(wrap_pyfunction!(design_apodized, m)?)?;
    m.add_function(wrap_pyfunction!(design_periodic, m)?)?;
    m.add_function(wrap_pyfunction!(target_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(visibility, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(klyshko, m)?)?;
    m.add_function(wrap_pyfunction!(collection_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(fit_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(time_to_wavelength, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    Ok(())
}
