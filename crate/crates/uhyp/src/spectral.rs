//! The discrete Fourier pair used throughout the crate.
//!
//! Forward and inverse transforms follow one fixed convention:
//!
//! ```text
//! (F f)(λ, ξ̄, η̄)   = 2 ∫ e^{-i(sλ + x̄·ξ̄ - ȳ·η̄)} f(s, x̄, ȳ) ds dx̄ dȳ
//! (F⁻¹ g)(s, x̄, ȳ) = ½ (2π)^{-(N+1)} ∫ e^{+i(sλ + x̄·ξ̄ - ȳ·η̄)} g dλ dξ̄ dη̄
//! ```
//!
//! so F⁻¹F = id. The ȳ axes pair with -η̄ in the kernel, which means they
//! transform with the opposite DFT direction; frequency arrays stay monotone
//! and η̄ keeps its sign. Integrals are realized as rectangle-rule sums on the
//! [-L, L) grids: the forward weight is ∏h, the inverse weight ∏Δω with
//! Δω = π/L. The [-L, L) offset and the symmetric frequency ordering
//! ω_k = πk/L, k = -M/2..M/2-1, are carried by explicit (-1)^j / (-1)^k
//! modulations around each FFT pass rather than by index reshuffling.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

/// Frequency-side view of a grid: per-axis nodes ω_k = πk/L in increasing
/// order, with the zero frequency at index M/2.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    grid: GridSpec,
}

impl FrequencyGrid {
    pub fn of(grid: &GridSpec) -> Self {
        Self { grid: grid.clone() }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Frequency spacing Δω = π/L on the given axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        std::f64::consts::PI / self.grid.extent(axis)
    }

    /// Storage index of the zero frequency on the given axis.
    pub fn zero_index(&self, axis: usize) -> usize {
        self.grid.points(axis) / 2
    }

    /// Frequency value at a storage index.
    pub fn freq(&self, axis: usize, index: usize) -> f64 {
        self.spacing(axis) * (index as f64 - self.zero_index(axis) as f64)
    }

    /// All frequencies along one axis, in increasing order.
    pub fn axis_freqs(&self, axis: usize) -> Vec<f64> {
        (0..self.grid.points(axis))
            .map(|k| self.freq(axis, k))
            .collect()
    }

    /// Volume of one frequency cell, ∏ Δω_a.
    pub fn cell_volume(&self) -> f64 {
        (0..self.grid.num_axes()).map(|a| self.spacing(a)).product()
    }

    pub fn total_points(&self) -> usize {
        self.grid.total_points()
    }

    /// Frequency coordinates of the node with the given flat index.
    pub fn freq_coords_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for a in (0..self.grid.num_axes()).rev() {
            let k = rest % self.grid.points(a);
            rest /= self.grid.points(a);
            out[a] = self.freq(a, k);
        }
    }
}

/// Transform coefficients on a frequency grid at a fixed time.
#[derive(Debug, Clone)]
pub struct SpectralField {
    freq: FrequencyGrid,
    time: f64,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(freq: FrequencyGrid, time: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != freq.total_points() {
            return Err(Error::SizeMismatch {
                expected: freq.total_points(),
                got: coeffs.len(),
            });
        }
        Ok(Self { freq, time, coeffs })
    }

    pub fn freq_grid(&self) -> &FrequencyGrid {
        &self.freq
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
}

/// ±1 with the parity of i.
#[inline]
fn alt(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// One strided FFT pass along `axis`, with (-1)^j modulation on input and
/// (-1)^k · scale on output. The symmetric modulation realizes both the
/// [-L, L) node offset and the monotone frequency ordering.
fn phased_axis_fft(
    data: &mut [Complex64],
    sizes: &[usize],
    axis: usize,
    fft: &dyn Fft<f64>,
    scale: f64,
) {
    let m = sizes[axis];
    let stride: usize = sizes[axis + 1..].iter().product();
    let block = m * stride;
    let outer = data.len() / block;
    let mut lane = vec![Complex64::new(0.0, 0.0); m];
    for b in 0..outer {
        for i in 0..stride {
            let base = b * block + i;
            for j in 0..m {
                lane[j] = data[base + j * stride] * alt(j);
            }
            fft.process(&mut lane);
            for k in 0..m {
                data[base + k * stride] = lane[k] * (alt(k) * scale);
            }
        }
    }
}

/// Sign flip contributed by the half-shift: (-1)^{M/2}.
#[inline]
fn half_parity(m: usize) -> f64 {
    alt(m / 2)
}

/// Forward transform of a sampled field under the crate convention.
pub fn forward(field: &Field) -> SpectralField {
    let grid = field.grid();
    let sizes: Vec<usize> = grid.points_per_axis().to_vec();
    let mut data = field.values().to_vec();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..grid.num_axes() {
        let direction = if grid.is_y_axis(axis) {
            FftDirection::Inverse
        } else {
            FftDirection::Forward
        };
        let fft = planner.plan_fft(sizes[axis], direction);
        let scale = grid.spacing(axis) * half_parity(sizes[axis]);
        phased_axis_fft(&mut data, &sizes, axis, fft.as_ref(), scale);
    }
    for c in &mut data {
        *c *= 2.0;
    }
    SpectralField {
        freq: FrequencyGrid::of(grid),
        time: field.time(),
        coeffs: data,
    }
}

/// Inverse transform; exact discrete inverse of [`forward`].
pub fn inverse(spec: &SpectralField) -> Field {
    let grid = spec.freq.grid().clone();
    let sizes: Vec<usize> = grid.points_per_axis().to_vec();
    let mut data = spec.coeffs.clone();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..grid.num_axes() {
        let direction = if grid.is_y_axis(axis) {
            FftDirection::Forward
        } else {
            FftDirection::Inverse
        };
        let fft = planner.plan_fft(sizes[axis], direction);
        let scale = spec.freq.spacing(axis) * half_parity(sizes[axis]);
        phased_axis_fft(&mut data, &sizes, axis, fft.as_ref(), scale);
    }
    let norm = 0.5 * (2.0 * std::f64::consts::PI).powi(-(grid.num_axes() as i32));
    for c in &mut data {
        *c *= norm;
    }
    let time = spec.time;
    Field::new(grid, time, data).expect("inverse transform produced non-finite values")
}

/// Ratio of the frequency-side to the space-side discrete energy,
/// Σ|ĝ|²∏Δω / Σ|f|²∏h. Equals 4 (2π)^{N+1} for every nonzero field.
pub fn plancherel_ratio(field: &Field) -> Result<f64> {
    let space: f64 =
        field.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * field.grid().cell_volume();
    if space == 0.0 {
        return Err(Error::ZeroField);
    }
    let spec = forward(field);
    let freq: f64 =
        spec.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * spec.freq_grid().cell_volume();
    Ok(freq / space)
}
