//! Slow, independent reference computations used to cross-check the fast
//! paths: exact plane-wave solutions, a direct rectangle-rule transform that
//! never touches an FFT, and the closed-form packet spectrum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec, InitialData};
use crate::spectral::FrequencyGrid;

/// Plane wave e^{i(sλ + x̄·ξ̄ - ȳ·η̄)} with λ ≠ 0; an exact solution of the
/// evolution when the phase t(η̄² - ξ̄²)/λ is attached.
#[derive(Debug, Clone)]
pub struct PlaneWave {
    pub lambda: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl PlaneWave {
    pub fn new(lambda: f64, xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::SingularFrequency);
        }
        Ok(Self { lambda, xi, eta })
    }

    /// Plane wave at node frequencies of a grid; `indices` are per-axis
    /// storage indices and the λ index must not be the zero-frequency one.
    pub fn at_nodes(freq: &FrequencyGrid, indices: &[usize]) -> Result<Self> {
        let grid = freq.grid();
        if indices.len() != grid.num_axes() {
            return Err(Error::SizeMismatch {
                expected: grid.num_axes(),
                got: indices.len(),
            });
        }
        let lambda = freq.freq(0, indices[0]);
        let xi = (0..grid.d())
            .map(|i| freq.freq(1 + i, indices[1 + i]))
            .collect();
        let eta = (0..grid.n())
            .map(|j| freq.freq(1 + grid.d() + j, indices[1 + grid.d() + j]))
            .collect();
        Self::new(lambda, xi, eta)
    }

    /// Dispersion phase velocity (η̄² - ξ̄²)/λ.
    pub fn omega(&self) -> f64 {
        let xi2: f64 = self.xi.iter().map(|v| v * v).sum();
        let eta2: f64 = self.eta.iter().map(|v| v * v).sum();
        (eta2 - xi2) / self.lambda
    }

    /// Value of the propagated plane wave at time t and point (s, x̄, ȳ).
    pub fn value(&self, t: f64, s: f64, x: &[f64], y: &[f64]) -> Complex64 {
        let mut phase = s * self.lambda + t * self.omega();
        for (xv, k) in x.iter().zip(&self.xi) {
            phase += xv * k;
        }
        for (yv, k) in y.iter().zip(&self.eta) {
            phase -= yv * k;
        }
        Complex64::cis(phase)
    }

    /// Sample the propagated plane wave on a grid at time t.
    pub fn sample(&self, grid: &GridSpec, t: f64) -> Result<Field> {
        let d = grid.d();
        Field::from_fn(grid.clone(), t, |p| {
            self.value(t, p[0], &p[1..1 + d], &p[1 + d..])
        })
    }
}

/// Rectangle-rule evaluation of the forward transform at one frequency:
/// 2 Σ_nodes e^{-i(sλ + x̄·ξ̄ - ȳ·η̄)} f ∏h. Quadratic cost, no FFT.
pub fn direct_fourier(field: &Field, freq: &[f64]) -> Complex64 {
    let grid = field.grid();
    let axes = grid.num_axes();
    debug_assert_eq!(freq.len(), axes);
    let d = grid.d();
    let mut coords = vec![0.0; axes];
    let mut sum = Complex64::new(0.0, 0.0);
    for (flat, v) in field.values().iter().enumerate() {
        grid.node_coords_into(flat, &mut coords);
        let mut phase = -coords[0] * freq[0];
        for i in 0..d {
            phase -= coords[1 + i] * freq[1 + i];
        }
        for j in 1 + d..axes {
            phase += coords[j] * freq[j];
        }
        sum += v * Complex64::cis(phase);
    }
    sum * 2.0 * grid.cell_volume()
}

/// Closed-form spectrum of Gaussian packet data at one frequency.
pub fn gaussian_spectrum(data: &InitialData, freq: &[f64]) -> Complex64 {
    data.spectrum(freq)
}

/// Propagated field value by direct rectangle-rule quadrature of the
/// closed-form spectrum over the frequency grid, skipping the λ = 0 plane.
pub fn evolved_value(data: &InitialData, freq: &FrequencyGrid, t: f64, point: &[f64]) -> Complex64 {
    let grid = freq.grid();
    let axes = grid.num_axes();
    debug_assert_eq!(point.len(), axes);
    let d = grid.d();
    let mut w = vec![0.0; axes];
    let mut sum = Complex64::new(0.0, 0.0);
    for flat in 0..freq.total_points() {
        freq.freq_coords_into(flat, &mut w);
        if w[0] == 0.0 {
            continue;
        }
        let xi2: f64 = w[1..1 + d].iter().map(|v| v * v).sum();
        let eta2: f64 = w[1 + d..].iter().map(|v| v * v).sum();
        let mut phase = t * (eta2 - xi2) / w[0] + point[0] * w[0];
        for i in 0..d {
            phase += point[1 + i] * w[1 + i];
        }
        for j in 1 + d..axes {
            phase -= point[j] * w[j];
        }
        sum += data.spectrum(&w) * Complex64::cis(phase);
    }
    let norm = 0.5 * (2.0 * std::f64::consts::PI).powi(-(axes as i32));
    sum * norm * freq.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GaussianPacket;
    use crate::spectral;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn unit_data() -> InitialData {
        InitialData::new(
            1,
            1,
            vec![GaussianPacket {
                amplitude: Complex64::new(1.0, 0.0),
                center_s: 0.0,
                center_x: vec![0.0],
                center_y: vec![0.0],
                width_s: 1.0,
                width_x: vec![1.0],
                width_y: vec![1.0],
                carrier_lambda: 0.0,
                carrier_xi: vec![0.0],
                carrier_eta: vec![0.0],
            }],
        )
        .unwrap()
    }

    #[test]
    fn plane_wave_requires_nonzero_lambda() {
        assert!(PlaneWave::new(0.0, vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn plane_wave_value_at_origin() {
        let pw = PlaneWave::new(2.0, vec![1.0], vec![3.0]).unwrap();
        // ω = (9 - 1)/2 = 4; at t=1 and the origin the value is e^{4i}.
        let v = pw.value(1.0, 0.0, &[0.0], &[0.0]);
        let want = Complex64::cis(4.0);
        assert_abs_diff_eq!(v.re, want.re, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, want.im, epsilon = 1e-15);
    }

    #[test]
    fn gaussian_spectrum_at_zero() {
        // Unit centered packet, zero carrier: 2 (2π)^{3/2} at frequency 0.
        let data = unit_data();
        let got = gaussian_spectrum(&data, &[0.0, 0.0, 0.0]);
        let want = 2.0 * (2.0 * std::f64::consts::PI).powf(1.5);
        assert_abs_diff_eq!(got.re, want, epsilon = 1e-12);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_spectrum_modulation_and_shift() {
        let mut term = unit_data().terms()[0].clone();
        term.carrier_lambda = 3.0;
        let modulated = InitialData::new(1, 1, vec![term.clone()]).unwrap();
        // Carrier λ₀ = 3 recenters the spectrum: value at (3, 0, 0) is the
        // zero-carrier value at 0.
        let want = 2.0 * (2.0 * std::f64::consts::PI).powf(1.5);
        let got = gaussian_spectrum(&modulated, &[3.0, 0.0, 0.0]);
        assert_abs_diff_eq!(got.re, want, epsilon = 1e-12);

        // Center shift s₀ multiplies the spectrum by e^{-i(λ-λ₀)s₀}.
        term.center_s = 0.7;
        let shifted = InitialData::new(1, 1, vec![term]).unwrap();
        let at = [4.0, 0.5, -0.3];
        let base = gaussian_spectrum(&modulated, &at);
        let got = gaussian_spectrum(&shifted, &at);
        let want = base * Complex64::cis(-(at[0] - 3.0) * 0.7);
        assert_abs_diff_eq!(got.re, want.re, epsilon = 1e-12);
        assert_abs_diff_eq!(got.im, want.im, epsilon = 1e-12);
    }

    #[test]
    fn direct_fourier_of_unit_gaussian() {
        // Value at (1, 0, 0) is 2 (2π)^{3/2} e^{-1/2} up to rectangle-rule
        // error, which is far below 1e-8 on the default grid.
        let grid = GridSpec::uniform(1, 1, 10.0, 64).unwrap();
        let field = unit_data().sample(&grid).unwrap();
        let got = direct_fourier(&field, &[1.0, 0.0, 0.0]);
        let want = 2.0 * (2.0 * std::f64::consts::PI).powf(1.5) * (-0.5f64).exp();
        assert!(
            (got - Complex64::new(want, 0.0)).norm() < 1e-8,
            "got {got}, want {want}"
        );
    }

    #[test]
    fn oracle_triangle_agrees() {
        // forward (FFT), direct_fourier (rectangle sum) and gaussian_spectrum
        // (closed form) agree pairwise at node frequencies.
        let grid = GridSpec::uniform(1, 1, 10.0, 64).unwrap();
        let data = unit_data();
        let field = data.sample(&grid).unwrap();
        let spec = spectral::forward(&field);
        let freq = spec.freq_grid().clone();
        let strides = grid.strides();
        let mut w = [0.0; 3];
        let mut worst_fd = 0.0f64;
        let mut worst_fc = 0.0f64;
        let mut worst_dc = 0.0f64;
        // A deterministic spread of node frequencies.
        for (ki, kj) in [(32, 32), (35, 30), (20, 40), (47, 33), (28, 36)] {
            for km in [32usize, 26, 38, 44] {
                let flat = ki * strides[0] + kj * strides[1] + km * strides[2];
                freq.freq_coords_into(flat, &mut w);
                let f = spec.coeffs()[flat];
                let d = direct_fourier(&field, &w);
                let c = gaussian_spectrum(&data, &w);
                worst_fd = worst_fd.max((f - d).norm());
                worst_fc = worst_fc.max((f - c).norm());
                worst_dc = worst_dc.max((d - c).norm());
            }
        }
        assert!(worst_fd < 1e-10, "forward vs direct: {worst_fd:.3e}");
        assert!(worst_fc < 1e-8, "forward vs closed form: {worst_fc:.3e}");
        assert!(worst_dc < 1e-8, "direct vs closed form: {worst_dc:.3e}");
    }
}
