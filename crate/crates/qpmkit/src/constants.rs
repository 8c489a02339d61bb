//! Physical constants and unit conversions.

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Time-bandwidth product (intensity FWHM × spectral intensity FWHM) of a
/// transform-limited sech²-intensity pulse: 4 ln²(1+√2)/π² ≈ 0.3148.
pub fn sech2_time_bandwidth_product() -> f64 {
    let a = (1.0 + std::f64::consts::SQRT_2).ln();
    4.0 * a * a / (std::f64::consts::PI * std::f64::consts::PI)
}

/// Time-bandwidth product of a transform-limited Gaussian pulse:
/// 2 ln 2/π ≈ 0.4413.
pub fn gaussian_time_bandwidth_product() -> f64 {
    2.0 * std::f64::consts::LN_2 / std::f64::consts::PI
}

/// Convert a vacuum wavelength (m) to angular frequency (rad/s).
pub fn wavelength_to_angular(wavelength_m: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength_m
}

/// Convert an angular frequency (rad/s) to vacuum wavelength (m).
pub fn angular_to_wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wavelength_angular_roundtrip() {
        let lam = 1549.8e-9;
        assert_relative_eq!(
            angular_to_wavelength(wavelength_to_angular(lam)),
            lam,
            max_relative = 1e-15
        );
    }

    #[test]
    fn time_bandwidth_products() {
        assert_relative_eq!(sech2_time_bandwidth_product(), 0.3148, max_relative = 2e-4);
        assert_relative_eq!(gaussian_time_bandwidth_product(), 0.4413, max_relative = 2e-4);
    }
}
