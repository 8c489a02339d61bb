//! Material dispersion: Sellmeier models, phase mismatch and group-velocity
//! diagnostics for collinear three-wave interactions.
//!
//! A [`DispersionModel`] maps vacuum wavelength and polarization axis to a
//! refractive index through a Sellmeier expansion
//!
//! ```text
//! n^2(λ) = c0 + Σ_j b_j / (λ² - c_j) - d λ²,    λ in µm
//! ```
//!
//! with an optional linear thermo-optic correction. Models are immutable
//! after construction and every operation here is a pure function, so values
//! can be shared freely across threads.
//!
//! The bundled KTP coefficient set is from Kato & Takaoka, Appl. Opt. 41,
//! 5040 (2002). Which crystal axes carry pump, signal and idler is a property
//! of the experiment, not the material; see [`InteractionGeometry`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::constants::{angular_to_wavelength, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// How group velocities are differentiated from the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMethod {
    /// Closed-form derivative of the Sellmeier expansion.
    #[default]
    Analytic,
    /// Central finite difference on k(ω) with step 1e-4 · ω.
    CentralDifference,
}

/// One Sellmeier expansion, wavelength in micrometres.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierForm {
    pub constant: f64,
    /// Pole terms (b_j, c_j) contributing b_j / (λ² - c_j).
    #[serde(default)]
    pub poles: Vec<(f64, f64)>,
    /// Coefficient d of the -d·λ² term.
    #[serde(default)]
    pub lambda_sq_coefficient: f64,
}

impl SellmeierForm {
    fn n_squared(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let mut n2 = self.constant - self.lambda_sq_coefficient * l2;
        for &(b, c) in &self.poles {
            n2 += b / (l2 - c);
        }
        n2
    }

    /// d(n²)/dλ at λ (µm), in 1/µm.
    fn dn_squared_dlambda(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        let mut d = -2.0 * self.lambda_sq_coefficient * lambda_um;
        for &(b, c) in &self.poles {
            let den = l2 - c;
            d -= 2.0 * lambda_um * b / (den * den);
        }
        d
    }
}

/// Linear thermo-optic correction dn/dT = (a₃/λ³ + a₂/λ² + a₁/λ + a₀)·scale,
/// λ in micrometres, result per kelvin.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoOpticForm {
    pub inv_cubic: f64,
    pub inv_quadratic: f64,
    pub inv_linear: f64,
    pub constant: f64,
    pub scale: f64,
}

impl ThermoOpticForm {
    fn dn_dt(&self, lambda_um: f64) -> f64 {
        let il = 1.0 / lambda_um;
        (((self.inv_cubic * il + self.inv_quadratic) * il + self.inv_linear) * il + self.constant)
            * self.scale
    }

    /// d(dn/dT)/dλ in 1/(µm·K).
    fn d_dn_dt_dlambda(&self, lambda_um: f64) -> f64 {
        let il = 1.0 / lambda_um;
        let il2 = il * il;
        (-3.0 * self.inv_cubic * il2 * il2
            - 2.0 * self.inv_quadratic * il2 * il
            - self.inv_linear * il2)
            * self.scale
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AxisFile {
    constant: f64,
    #[serde(default)]
    poles: Vec<(f64, f64)>,
    #[serde(default)]
    lambda_sq_coefficient: f64,
    #[serde(default)]
    thermo_optic: Option<ThermoOpticForm>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    valid_range_um: (f64, f64),
    #[serde(default = "default_reference_temperature")]
    reference_temperature_c: f64,
    axes: BTreeMap<String, AxisFile>,
}

fn default_reference_temperature() -> f64 {
    20.0
}

#[derive(Debug, Clone)]
struct AxisDispersion {
    sellmeier: SellmeierForm,
    thermo_optic: Option<ThermoOpticForm>,
}

/// A named, per-axis dispersion model with a hard validity window.
///
/// Evaluation outside `valid_range_um` is an error, never a silent
/// extrapolation. The operating temperature defaults to the reference
/// temperature of the coefficient set (thermo-optic correction off).
#[derive(Debug, Clone)]
pub struct DispersionModel {
    name: String,
    axes: BTreeMap<String, AxisDispersion>,
    valid_range_um: (f64, f64),
    reference_temperature_c: f64,
    temperature_c: Option<f64>,
}

impl DispersionModel {
    /// Parse a model from the documented TOML schema (see `data/ktp.toml`).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ModelFile =
            toml::from_str(text).map_err(|e| Error::InvalidInput(format!("dispersion model: {e}")))?;
        let (min, max) = file.valid_range_um;
        if !(min > 0.0 && max > min) {
            return Err(Error::InvalidInput(format!(
                "dispersion model '{}': valid_range_um must satisfy 0 < min < max",
                file.name
            )));
        }
        if file.axes.is_empty() {
            return Err(Error::InvalidInput(format!(
                "dispersion model '{}': no axes defined",
                file.name
            )));
        }
        for (axis, ax) in &file.axes {
            for &(_, c) in &ax.poles {
                if c >= min * min && c <= max * max {
                    return Err(Error::InvalidInput(format!(
                        "dispersion model '{}': axis '{axis}' has a Sellmeier pole at λ² = {c} µm² inside the valid range",
                        file.name
                    )));
                }
            }
        }
        let axes = file
            .axes
            .into_iter()
            .map(|(k, v)| {
                (
                    k,
                    AxisDispersion {
                        sellmeier: SellmeierForm {
                            constant: v.constant,
                            poles: v.poles,
                            lambda_sq_coefficient: v.lambda_sq_coefficient,
                        },
                        thermo_optic: v.thermo_optic,
                    },
                )
            })
            .collect();
        Ok(Self {
            name: file.name,
            axes,
            valid_range_um: file.valid_range_um,
            reference_temperature_c: file.reference_temperature_c,
            temperature_c: None,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Bundled flux-grown KTP model (Kato & Takaoka 2002).
    pub fn ktp() -> Self {
        Self::from_toml_str(include_str!("../data/ktp.toml")).expect("bundled KTP model parses")
    }

    /// Bundled dispersionless n ≡ 1 stub.
    pub fn vacuum() -> Self {
        Self::from_toml_str(include_str!("../data/vacuum.toml")).expect("bundled vacuum model parses")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn valid_range_um(&self) -> (f64, f64) {
        self.valid_range_um
    }

    pub fn axes(&self) -> impl Iterator<Item = &str> {
        self.axes.keys().map(String::as_str)
    }

    /// A copy of this model operated at `temperature_c`. Axes without
    /// thermo-optic coefficients are left uncorrected.
    pub fn with_temperature(&self, temperature_c: f64) -> Self {
        Self {
            temperature_c: Some(temperature_c),
            ..self.clone()
        }
    }

    fn axis(&self, axis: &str) -> Result<&AxisDispersion> {
        self.axes.get(axis).ok_or_else(|| Error::UnknownAxis {
            axis: axis.to_string(),
            model: self.name.clone(),
        })
    }

    fn check_range(&self, lambda_um: f64) -> Result<()> {
        let (min, max) = self.valid_range_um;
        if !(lambda_um >= min && lambda_um <= max) {
            return Err(Error::WavelengthOutOfRange {
                wavelength_um: lambda_um,
                min_um: min,
                max_um: max,
                model: self.name.clone(),
            });
        }
        Ok(())
    }

    fn delta_t(&self) -> f64 {
        self.temperature_c
            .map_or(0.0, |t| t - self.reference_temperature_c)
    }

    /// Refractive index at vacuum wavelength `wavelength_m` on `axis`.
    pub fn refractive_index(&self, wavelength_m: f64, axis: &str) -> Result<f64> {
        let lambda_um = wavelength_m * 1e6;
        self.check_range(lambda_um)?;
        let ax = self.axis(axis)?;
        let n2 = ax.sellmeier.n_squared(lambda_um);
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::Numerical(format!(
                "n² = {n2} at {lambda_um} µm on axis '{axis}' of model '{}'",
                self.name
            )));
        }
        let mut n = n2.sqrt();
        if let (Some(to), dt) = (&ax.thermo_optic, self.delta_t()) {
            if dt != 0.0 {
                n += dt * to.dn_dt(lambda_um);
            }
        }
        Ok(n)
    }

    /// Wavevector k = n(ω)·ω/c (rad/m) on `axis`.
    pub fn wavevector(&self, omega: f64, axis: &str) -> Result<f64> {
        let lam = angular_to_wavelength(omega);
        Ok(self.refractive_index(lam, axis)? * omega / SPEED_OF_LIGHT)
    }

    /// dn/dλ (per metre of vacuum wavelength) including any active
    /// thermo-optic correction.
    fn index_slope(&self, wavelength_m: f64, axis: &str) -> Result<f64> {
        let lambda_um = wavelength_m * 1e6;
        self.check_range(lambda_um)?;
        let ax = self.axis(axis)?;
        let n2 = ax.sellmeier.n_squared(lambda_um);
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::Numerical(format!(
                "n² = {n2} at {lambda_um} µm on axis '{axis}' of model '{}'",
                self.name
            )));
        }
        let mut dn_dl_um = ax.sellmeier.dn_squared_dlambda(lambda_um) / (2.0 * n2.sqrt());
        if let (Some(to), dt) = (&ax.thermo_optic, self.delta_t()) {
            if dt != 0.0 {
                dn_dl_um += dt * to.d_dn_dt_dlambda(lambda_um);
            }
        }
        Ok(dn_dl_um * 1e6)
    }

    /// Inverse group velocity dk/dω = n_g/c (s/m) on `axis`.
    pub fn inverse_group_velocity(
        &self,
        omega: f64,
        axis: &str,
        method: DerivativeMethod,
    ) -> Result<f64> {
        match method {
            DerivativeMethod::Analytic => {
                let lam = angular_to_wavelength(omega);
                let n = self.refractive_index(lam, axis)?;
                let group_index = n - lam * self.index_slope(lam, axis)?;
                Ok(group_index / SPEED_OF_LIGHT)
            }
            DerivativeMethod::CentralDifference => {
                let h = 1e-4 * omega;
                let kp = self.wavevector(omega + h, axis)?;
                let km = self.wavevector(omega - h, axis)?;
                Ok((kp - km) / (2.0 * h))
            }
        }
    }
}

/// Polarization axes, centre frequencies and poling period of one collinear
/// interaction. The pump centre is ω_s0 + ω_i0 by construction, so energy
/// conservation at the centre is exact.
#[derive(Debug, Clone)]
pub struct InteractionGeometry {
    pub pump_axis: String,
    pub signal_axis: String,
    pub idler_axis: String,
    signal_center: f64,
    idler_center: f64,
    poling_period: f64,
}

impl InteractionGeometry {
    pub fn new(
        pump_axis: &str,
        signal_axis: &str,
        idler_axis: &str,
        signal_center: f64,
        idler_center: f64,
        poling_period: f64,
    ) -> Result<Self> {
        if !(signal_center > 0.0 && idler_center > 0.0) {
            return Err(Error::InvalidInput(
                "signal and idler centre frequencies must be positive".into(),
            ));
        }
        if !(poling_period > 0.0) {
            return Err(Error::InvalidInput(format!(
                "poling_period must be positive, got {poling_period}"
            )));
        }
        Ok(Self {
            pump_axis: pump_axis.to_string(),
            signal_axis: signal_axis.to_string(),
            idler_axis: idler_axis.to_string(),
            signal_center,
            idler_center,
            poling_period,
        })
    }

    /// Build a geometry whose poling period is the nominal first-order value
    /// for the given model and centre frequencies.
    pub fn with_auto_period(
        model: &DispersionModel,
        pump_axis: &str,
        signal_axis: &str,
        idler_axis: &str,
        signal_center: f64,
        idler_center: f64,
    ) -> Result<Self> {
        let period = nominal_poling_period(
            model,
            pump_axis,
            signal_axis,
            idler_axis,
            signal_center,
            idler_center,
        )?;
        Self::new(
            pump_axis,
            signal_axis,
            idler_axis,
            signal_center,
            idler_center,
            period,
        )
    }

    pub fn signal_center(&self) -> f64 {
        self.signal_center
    }

    pub fn idler_center(&self) -> f64 {
        self.idler_center
    }

    pub fn pump_center(&self) -> f64 {
        self.signal_center + self.idler_center
    }

    pub fn poling_period(&self) -> f64 {
        self.poling_period
    }
}

/// Phase mismatch Δk = k_p(ω_s+ω_i) − k_s(ω_s) − k_i(ω_i), without any
/// grating contribution (rad/m).
pub fn phase_mismatch(
    model: &DispersionModel,
    geometry: &InteractionGeometry,
    omega_signal: f64,
    omega_idler: f64,
) -> Result<f64> {
    let kp = model.wavevector(omega_signal + omega_idler, &geometry.pump_axis)?;
    let ks = model.wavevector(omega_signal, &geometry.signal_axis)?;
    let ki = model.wavevector(omega_idler, &geometry.idler_axis)?;
    Ok(kp - ks - ki)
}

/// Signed first-order grating vector of the geometry's poling period:
/// sign(Δk₀)·2π/Λ₀. Zero when the centre phase mismatch vanishes (unpoled
/// stub models).
pub fn grating_vector(model: &DispersionModel, geometry: &InteractionGeometry) -> Result<f64> {
    let dk0 = phase_mismatch(
        model,
        geometry,
        geometry.signal_center(),
        geometry.idler_center(),
    )?;
    if dk0 == 0.0 {
        return Ok(0.0);
    }
    Ok(dk0.signum() * 2.0 * std::f64::consts::PI / geometry.poling_period())
}

/// Quasi-phase-matched residual Δk − sign(Δk₀)·2π/Λ₀; vanishes at the centre
/// when Λ₀ is the nominal period.
pub fn phase_mismatch_residual(
    model: &DispersionModel,
    geometry: &InteractionGeometry,
    omega_signal: f64,
    omega_idler: f64,
) -> Result<f64> {
    let kg = grating_vector(model, geometry)?;
    Ok(phase_mismatch(model, geometry, omega_signal, omega_idler)? - kg)
}

/// Nominal first-order poling period Λ₀ = 2π/|Δk(ω_s0, ω_i0)|.
///
/// The phase mismatch of the bundled KTP set is negative at telecom
/// degeneracy, so the magnitude is used and the sign is carried by
/// [`grating_vector`].
pub fn nominal_poling_period(
    model: &DispersionModel,
    pump_axis: &str,
    signal_axis: &str,
    idler_axis: &str,
    signal_center: f64,
    idler_center: f64,
) -> Result<f64> {
    let kp = model.wavevector(signal_center + idler_center, pump_axis)?;
    let ks = model.wavevector(signal_center, signal_axis)?;
    let ki = model.wavevector(idler_center, idler_axis)?;
    let dk0 = kp - ks - ki;
    if dk0 == 0.0 {
        return Err(Error::NoPolingRequired);
    }
    Ok(2.0 * std::f64::consts::PI / dk0.abs())
}

/// Symmetric group-velocity-matching residual
/// (1/v_g,p) − ½(1/v_g,s + 1/v_g,i) at the interaction centre (s/m).
pub fn gvm_residual(
    model: &DispersionModel,
    geometry: &InteractionGeometry,
    method: DerivativeMethod,
) -> Result<f64> {
    let ivp = model.inverse_group_velocity(geometry.pump_center(), &geometry.pump_axis, method)?;
    let ivs =
        model.inverse_group_velocity(geometry.signal_center(), &geometry.signal_axis, method)?;
    let ivi = model.inverse_group_velocity(geometry.idler_center(), &geometry.idler_axis, method)?;
    Ok(ivp - 0.5 * (ivs + ivi))
}

/// The telecom type-II geometry used throughout: 774.9 nm pump on the KTP
/// y axis, degenerate signal (y) and idler (z) at 1549.8 nm, nominal period.
///
/// The axis assignment is a documented assumption of the bundled setup, not
/// a property of the dispersion data.
pub fn telecom_ktp_geometry(model: &DispersionModel) -> Result<InteractionGeometry> {
    let w = crate::constants::wavelength_to_angular(1549.8e-9);
    InteractionGeometry::with_auto_period(model, "y", "y", "z", w, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::wavelength_to_angular;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    // Fixtures pinned from an independent reference evaluation of the
    // Kato & Takaoka (2002) coefficients (high-precision script, not this
    // crate).
    const N_Y_0774_9: f64 = 1.7581377183402631;
    const N_Y_1549_8: f64 = 1.7349097293716444;
    const N_Z_1549_8: f64 = 1.8157777207147399;
    const DK0: f64 = -139512.87715973333; // rad/m
    const PERIOD_UM: f64 = 45.03659758938052;
    const DK_SIG_PLUS_1NM: f64 = -139744.57294860017;
    const DK_SIG_MINUS_1NM: f64 = -139280.9377481602;
    const INV_VG_PUMP: f64 = 6.038191084207586e-9; // s/m
    const GVM_RESIDUAL: f64 = 1.0045306256687584e-11; // s/m

    fn ktp_geometry() -> (DispersionModel, InteractionGeometry) {
        let model = DispersionModel::ktp();
        let geom = telecom_ktp_geometry(&model).unwrap();
        (model, geom)
    }

    #[test]
    fn ktp_indices_match_pinned_reference() {
        let m = DispersionModel::ktp();
        assert_relative_eq!(
            m.refractive_index(0.7749e-6, "y").unwrap(),
            N_Y_0774_9,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            m.refractive_index(1.5498e-6, "y").unwrap(),
            N_Y_1549_8,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            m.refractive_index(1.5498e-6, "z").unwrap(),
            N_Z_1549_8,
            max_relative = 1e-13
        );
    }

    #[test]
    fn vacuum_index_is_unity() {
        let m = DispersionModel::vacuum();
        for lam in [0.5e-6, 0.7749e-6, 1.5498e-6, 10e-6] {
            assert_eq!(m.refractive_index(lam, "y").unwrap(), 1.0);
        }
    }

    #[test]
    fn out_of_range_is_an_error_not_extrapolation() {
        let m = DispersionModel::ktp();
        assert!(matches!(
            m.refractive_index(0.2e-6, "y"),
            Err(Error::WavelengthOutOfRange { .. })
        ));
        assert!(matches!(
            m.refractive_index(5.0e-6, "z"),
            Err(Error::WavelengthOutOfRange { .. })
        ));
    }

    #[test]
    fn unknown_axis_is_an_error() {
        let m = DispersionModel::ktp();
        assert!(matches!(
            m.refractive_index(1.5e-6, "w"),
            Err(Error::UnknownAxis { .. })
        ));
    }

    #[test]
    fn index_exceeds_unity_inside_valid_range() {
        let m = DispersionModel::ktp();
        let (min, max) = m.valid_range_um();
        // Sample cell midpoints: the unit conversion can push the exact
        // endpoints out of range by a rounding ulp.
        for i in 0..200 {
            let lam_um = min + (max - min) * (i as f64 + 0.5) / 200.0;
            for axis in ["x", "y", "z"] {
                let n = m.refractive_index(lam_um * 1e-6, axis).unwrap();
                assert!(n > 1.0 && n.is_finite(), "n = {n} at {lam_um} µm");
            }
        }
    }

    #[test]
    fn phase_mismatch_matches_pinned_reference() {
        let (m, g) = ktp_geometry();
        let dk = phase_mismatch(&m, &g, g.signal_center(), g.idler_center()).unwrap();
        assert_relative_eq!(dk, DK0, max_relative = 1e-12);

        // Off-degenerate detunings of the signal by ±1 nm along the
        // energy-conservation line.
        let ws_p = wavelength_to_angular(1550.8e-9);
        let ws_m = wavelength_to_angular(1548.8e-9);
        let dk_p = phase_mismatch(&m, &g, ws_p, g.pump_center() - ws_p).unwrap();
        let dk_m = phase_mismatch(&m, &g, ws_m, g.pump_center() - ws_m).unwrap();
        assert_relative_eq!(dk_p, DK_SIG_PLUS_1NM, max_relative = 1e-12);
        assert_relative_eq!(dk_m, DK_SIG_MINUS_1NM, max_relative = 1e-12);
    }

    #[test]
    fn nominal_period_and_residual_at_centre() {
        let (m, g) = ktp_geometry();
        assert_relative_eq!(g.poling_period() * 1e6, PERIOD_UM, max_relative = 1e-12);
        // |Δk(centre)| − 2π/Λ₀ vanishes by construction of the nominal period.
        let dk0 = phase_mismatch(&m, &g, g.signal_center(), g.idler_center()).unwrap();
        let kg = 2.0 * std::f64::consts::PI / g.poling_period();
        assert!((dk0.abs() - kg).abs() < 1e-9 * dk0.abs());
        let res = phase_mismatch_residual(&m, &g, g.signal_center(), g.idler_center()).unwrap();
        assert_abs_diff_eq!(res, 0.0, epsilon = 1e-9 * dk0.abs());
    }

    #[test]
    fn vacuum_phase_mismatch_vanishes_on_energy_conservation_line() {
        let m = DispersionModel::vacuum();
        let w0 = wavelength_to_angular(1549.8e-9);
        let g = InteractionGeometry::new("y", "y", "z", w0, w0, 1e-3).unwrap();
        for frac in [-0.02, -0.005, 0.0, 0.013, 0.02] {
            let ws = w0 * (1.0 + frac);
            let wi = g.pump_center() - ws;
            let dk = phase_mismatch(&m, &g, ws, wi).unwrap();
            assert_abs_diff_eq!(dk, 0.0, epsilon = 1e-9);
            // With Δk₀ = 0 no grating is applied, so the residual is Δk itself.
            let res = phase_mismatch_residual(&m, &g, ws, wi).unwrap();
            assert_abs_diff_eq!(res, 0.0, epsilon = 1e-9);
        }
        assert!(matches!(
            nominal_poling_period(&m, "y", "y", "z", w0, w0),
            Err(Error::NoPolingRequired)
        ));
    }

    #[test]
    fn phase_mismatch_swap_symmetry_follows_axes() {
        let (m, g) = ktp_geometry();
        let w0 = g.signal_center();
        let (wa, wb) = (w0 * 1.001, w0 * 0.999);

        // Identical signal/idler axes: symmetric under swap.
        let g_sym = InteractionGeometry::new("y", "y", "y", w0, w0, g.poling_period()).unwrap();
        let d1 = phase_mismatch(&m, &g_sym, wa, wb).unwrap();
        let d2 = phase_mismatch(&m, &g_sym, wb, wa).unwrap();
        assert_relative_eq!(d1, d2, max_relative = 1e-14);

        // Distinct axes (type-II): asymmetric.
        let d1 = phase_mismatch(&m, &g, wa, wb).unwrap();
        let d2 = phase_mismatch(&m, &g, wb, wa).unwrap();
        assert!((d1 - d2).abs() > 1.0, "expected asymmetry, got {d1} vs {d2}");
    }

    #[test]
    fn energy_conservation_line_is_smooth() {
        let (m, g) = ktp_geometry();
        let w0 = g.signal_center();
        let span = 0.01 * w0;
        let n = 501;
        let mut prev = None;
        for i in 0..n {
            let ws = w0 - span + 2.0 * span * i as f64 / (n - 1) as f64;
            let dk = phase_mismatch(&m, &g, ws, g.pump_center() - ws).unwrap();
            assert!(dk.is_finite());
            if let Some(p) = prev {
                // Steps along the line stay bounded by a few times the local
                // slope; a discontinuity would show up orders of magnitude
                // larger.
                assert!((dk - p as f64).abs() < 50.0, "jump at i = {i}");
            }
            prev = Some(dk);
        }
    }

    #[test]
    fn analytic_and_finite_difference_group_velocities_agree() {
        let (m, g) = ktp_geometry();
        for (w, axis) in [
            (g.pump_center(), "y"),
            (g.signal_center(), "y"),
            (g.idler_center(), "z"),
        ] {
            let a = m
                .inverse_group_velocity(w, axis, DerivativeMethod::Analytic)
                .unwrap();
            let d = m
                .inverse_group_velocity(w, axis, DerivativeMethod::CentralDifference)
                .unwrap();
            assert_relative_eq!(a, d, max_relative = 1e-6);
        }
    }

    #[test]
    fn gvm_residual_matches_pinned_reference() {
        let (m, g) = ktp_geometry();
        let r = gvm_residual(&m, &g, DerivativeMethod::Analytic).unwrap();
        assert_relative_eq!(r, GVM_RESIDUAL, max_relative = 1e-9);
        let ivp = m
            .inverse_group_velocity(g.pump_center(), "y", DerivativeMethod::Analytic)
            .unwrap();
        assert_relative_eq!(ivp, INV_VG_PUMP, max_relative = 1e-12);
        // Near-degenerate telecom operation sits close to, but not exactly
        // at, the symmetric GVM point of this coefficient set.
        assert!(r.abs() / ivp < 5e-3);
    }

    #[test]
    fn gvm_residual_of_vacuum_stub_is_exactly_zero() {
        let m = DispersionModel::vacuum();
        let w0 = wavelength_to_angular(1549.8e-9);
        let g = InteractionGeometry::new("x", "y", "z", w0, w0, 1.0).unwrap();
        assert_eq!(gvm_residual(&m, &g, DerivativeMethod::Analytic).unwrap(), 0.0);
    }

    #[test]
    fn asymmetric_geometry_gvm_sign_matches_finite_difference_oracle() {
        let m = DispersionModel::ktp();
        let ws = wavelength_to_angular(1500.0e-9);
        let wp = wavelength_to_angular(774.9e-9);
        let wi = wp - ws;
        let g = InteractionGeometry::new("y", "y", "z", ws, wi, 45e-6).unwrap();
        let a = gvm_residual(&m, &g, DerivativeMethod::Analytic).unwrap();
        let d = gvm_residual(&m, &g, DerivativeMethod::CentralDifference).unwrap();
        assert!(a != 0.0);
        assert_eq!(a.signum(), d.signum());
        assert_relative_eq!(a, d, max_relative = 1e-5);
    }

    #[test]
    fn constant_offset_stub_gives_one_millimetre_period() {
        // n_p = 1 + 1000·λ_p on the pump axis against vacuum signal/idler
        // gives Δk = 2π·1000 rad/m at the centre, hence Λ₀ = 1 mm.
        let w0 = wavelength_to_angular(1549.8e-9);
        let lam_p = angular_to_wavelength(2.0 * w0);
        let np = 1.0 + 1000.0 * lam_p;
        let text = format!(
            "name = \"offset-stub\"\nvalid_range_um = [0.01, 1000.0]\n\
             [axes.p]\nconstant = {}\n\
             [axes.s]\nconstant = 1.0\n",
            np * np
        );
        let m = DispersionModel::from_toml_str(&text).unwrap();
        let period = nominal_poling_period(&m, "p", "s", "s", w0, w0).unwrap();
        assert_relative_eq!(period, 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn poling_period_shifts_monotonically_with_temperature() {
        let model = DispersionModel::ktp();
        let w0 = wavelength_to_angular(1549.8e-9);
        let mut periods = Vec::new();
        for t in [20.0, 30.0, 40.0, 50.0, 60.0] {
            let m = model.with_temperature(t);
            periods.push(nominal_poling_period(&m, "y", "y", "z", w0, w0).unwrap());
        }
        let increasing = periods.windows(2).all(|w| w[1] > w[0]);
        let decreasing = periods.windows(2).all(|w| w[1] < w[0]);
        assert!(increasing || decreasing, "periods not monotone: {periods:?}");

        // Direction must agree with the sign of d|Δk|/dT from a direct
        // two-temperature evaluation.
        let dk_20 = phase_mismatch(
            &model.with_temperature(20.0),
            &telecom_ktp_geometry(&model).unwrap(),
            w0,
            w0,
        )
        .unwrap();
        let dk_60 = phase_mismatch(
            &model.with_temperature(60.0),
            &telecom_ktp_geometry(&model).unwrap(),
            w0,
            w0,
        )
        .unwrap();
        let dk_mag_grows = dk_60.abs() > dk_20.abs();
        assert_eq!(dk_mag_grows, periods[4] < periods[0]);
    }

    #[test]
    fn temperature_correction_default_off() {
        let m = DispersionModel::ktp();
        let m20 = m.with_temperature(m.reference_temperature_c);
        assert_eq!(
            m.refractive_index(1.5498e-6, "z").unwrap(),
            m20.refractive_index(1.5498e-6, "z").unwrap()
        );
    }

    #[test]
    fn geometry_enforces_energy_conservation_exactly() {
        let (_, g) = ktp_geometry();
        assert_eq!(g.pump_center(), g.signal_center() + g.idler_center());
    }

    #[test]
    fn model_file_rejects_unknown_keys_and_bad_poles() {
        assert!(DispersionModel::from_toml_str(
            "name = \"m\"\nvalid_range_um = [0.4, 4.0]\nbogus = 1\n[axes.y]\nconstant = 2.0\n"
        )
        .is_err());
        // Pole at λ² = 1 µm² sits inside [0.4, 4.0] µm.
        assert!(DispersionModel::from_toml_str(
            "name = \"m\"\nvalid_range_um = [0.4, 4.0]\n[axes.y]\nconstant = 2.0\npoles = [[0.1, 1.0]]\n"
        )
        .is_err());
    }
}
