//! Uniform periodic grids over (s, x̄, ȳ) ∈ ℝ^{N+1} and complex fields sampled
//! on them.
//!
//! The axis order is fixed as (s, x₁..x_d, y₁..y_n) and arrays are row-major:
//! the s axis varies slowest, the last y axis fastest. Every axis covers
//! [-L, L) with an even number of samples M and spacing h = 2L/M, so the
//! matching frequency set is the symmetric DFT grid πk/L, k = -M/2..M/2-1.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Shape of a uniform periodic grid: the s axis plus d transverse x axes and
/// n transverse y axes, each covering its own [-L, L).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    d: usize,
    n: usize,
    extents: Vec<f64>,
    points: Vec<usize>,
}

impl GridSpec {
    /// Grid with per-axis extents and point counts, in axis order (s, x̄, ȳ).
    pub fn new(d: usize, n: usize, extents: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if d < 1 || n < 1 {
            return Err(Error::InvalidGrid(format!(
                "need d >= 1 and n >= 1, got d = {d}, n = {n}"
            )));
        }
        let axes = 1 + d + n;
        if extents.len() != axes || points.len() != axes {
            return Err(Error::InvalidGrid(format!(
                "expected {axes} per-axis entries, got {} extents and {} point counts",
                extents.len(),
                points.len()
            )));
        }
        for (axis, &ext) in extents.iter().enumerate() {
            if !ext.is_finite() || ext <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: extent must be positive and finite, got {ext}"
                )));
            }
        }
        for (axis, &m) in points.iter().enumerate() {
            if m == 0 || m % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: point count must be a positive even integer, got {m}"
                )));
            }
        }
        Ok(Self {
            d,
            n,
            extents,
            points,
        })
    }

    /// Grid with the same extent and point count on every axis.
    pub fn uniform(d: usize, n: usize, extent: f64, points: usize) -> Result<Self> {
        let axes = 1 + d + n;
        Self::new(d, n, vec![extent; axes], vec![points; axes])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of axes, 1 + d + n.
    pub fn num_axes(&self) -> usize {
        1 + self.d + self.n
    }

    /// Transverse dimension N = d + n.
    pub fn transverse_dim(&self) -> usize {
        self.d + self.n
    }

    /// True for the y axes (axis index beyond the d x axes).
    pub fn is_y_axis(&self, axis: usize) -> bool {
        axis > self.d
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.extents[axis]
    }

    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn points_per_axis(&self) -> &[usize] {
        &self.points
    }

    /// Sample spacing h = 2L/M on the given axis.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.extents[axis] / self.points[axis] as f64
    }

    pub fn total_points(&self) -> usize {
        self.points.iter().product()
    }

    /// Volume of one grid cell, ∏ h_a.
    pub fn cell_volume(&self) -> f64 {
        (0..self.num_axes()).map(|a| self.spacing(a)).product()
    }

    /// Node coordinates -L + j h along one axis.
    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        let l = self.extents[axis];
        (0..self.points[axis]).map(|j| -l + j as f64 * h).collect()
    }

    /// Row-major strides per axis.
    pub fn strides(&self) -> Vec<usize> {
        let axes = self.num_axes();
        let mut strides = vec![1usize; axes];
        for a in (0..axes.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.points[a + 1];
        }
        strides
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn multi_index_into(&self, flat: usize, out: &mut [usize]) {
        let mut rest = flat;
        for a in (0..self.num_axes()).rev() {
            out[a] = rest % self.points[a];
            rest /= self.points[a];
        }
    }

    /// Coordinates of the node with the given flat index.
    pub fn node_coords_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for a in (0..self.num_axes()).rev() {
            let j = rest % self.points[a];
            rest /= self.points[a];
            out[a] = -self.extents[a] + j as f64 * self.spacing(a);
        }
    }
}

/// Complex field sampled on a grid at a fixed time.
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    time: f64,
    values: Vec<Complex64>,
}

impl Field {
    /// Wrap sampled values; the length must match the grid and all values must
    /// be finite.
    pub fn new(grid: GridSpec, time: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::SizeMismatch {
                expected: grid.total_points(),
                got: values.len(),
            });
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(Self { grid, time, values })
    }

    /// Sample a closure over all node coordinates (axis order s, x̄, ȳ).
    pub fn from_fn(
        grid: GridSpec,
        time: f64,
        mut f: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let axes = grid.num_axes();
        let mut coords = vec![0.0; axes];
        let mut values = Vec::with_capacity(grid.total_points());
        for flat in 0..grid.total_points() {
            grid.node_coords_into(flat, &mut coords);
            values.push(f(&coords));
        }
        Self::new(grid, time, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Discrete L₂ norm: sqrt(Σ |v|² ∏h).
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.grid.cell_volume()).sqrt()
    }
}

/// One Gaussian wave packet: amplitude, center, width and carrier frequency
/// per axis. The sampled value is
///
/// ```text
/// c · exp(-Σ_a (p_a - c_a)² / (2σ_a²)) · exp(i(s λ₀ + x̄·ξ̄₀ - ȳ·η̄₀))
/// ```
///
/// with the carrier phase using the same sign split as the transform kernel.
#[derive(Debug, Clone)]
pub struct GaussianPacket {
    pub amplitude: Complex64,
    pub center_s: f64,
    pub center_x: Vec<f64>,
    pub center_y: Vec<f64>,
    pub width_s: f64,
    pub width_x: Vec<f64>,
    pub width_y: Vec<f64>,
    pub carrier_lambda: f64,
    pub carrier_xi: Vec<f64>,
    pub carrier_eta: Vec<f64>,
}

impl GaussianPacket {
    fn validate(&self, d: usize, n: usize, index: usize) -> Result<()> {
        if self.center_x.len() != d || self.width_x.len() != d || self.carrier_xi.len() != d {
            return Err(Error::InvalidData(format!(
                "term {index}: x-axis entries must all have length d = {d}"
            )));
        }
        if self.center_y.len() != n || self.width_y.len() != n || self.carrier_eta.len() != n {
            return Err(Error::InvalidData(format!(
                "term {index}: y-axis entries must all have length n = {n}"
            )));
        }
        let widths = std::iter::once(self.width_s)
            .chain(self.width_x.iter().copied())
            .chain(self.width_y.iter().copied());
        for (axis, w) in widths.enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidData(format!(
                    "term {index}, axis {axis}: width must be positive, got {w}"
                )));
            }
        }
        Ok(())
    }

    /// Per-axis (center, width, signed phase coefficient) in axis order; the
    /// phase coefficient carries +λ₀, +ξ̄₀ and -η̄₀.
    fn axis_params(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        std::iter::once((self.center_s, self.width_s, self.carrier_lambda))
            .chain(
                self.center_x
                    .iter()
                    .zip(&self.width_x)
                    .zip(&self.carrier_xi)
                    .map(|((&c, &w), &k)| (c, w, k)),
            )
            .chain(
                self.center_y
                    .iter()
                    .zip(&self.width_y)
                    .zip(&self.carrier_eta)
                    .map(|((&c, &w), &k)| (c, w, -k)),
            )
    }

    /// Per-axis carrier magnitudes in axis order, for resolution checks.
    fn carriers(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.carrier_lambda)
            .chain(self.carrier_xi.iter().copied())
            .chain(self.carrier_eta.iter().copied())
    }

    /// Euclidean norm of the full carrier vector (λ₀, ξ̄₀, η̄₀).
    pub fn carrier_norm(&self) -> f64 {
        self.carriers().map(|k| k * k).sum::<f64>().sqrt()
    }
}

/// Initial data v₀ as a finite sum of Gaussian packets.
#[derive(Debug, Clone)]
pub struct InitialData {
    d: usize,
    n: usize,
    terms: Vec<GaussianPacket>,
}

impl InitialData {
    pub fn new(d: usize, n: usize, terms: Vec<GaussianPacket>) -> Result<Self> {
        for (index, term) in terms.iter().enumerate() {
            term.validate(d, n, index)?;
        }
        Ok(Self { d, n, terms })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[GaussianPacket] {
        &self.terms
    }

    /// Smallest |λ₀|·σ_s over the terms (infinite when there are none).
    /// Values ≥ 3 keep the spectrum concentrated away from the plane λ = 0.
    pub fn spectral_concentration(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.carrier_lambda.abs() * t.width_s)
            .fold(f64::INFINITY, f64::min)
    }

    /// Check the concentration rule |λ₀| ≥ 3/σ_s for every term. Data meant
    /// for propagation must pass; pure spectrum evaluation does not need to.
    pub fn validate_concentration(&self) -> Result<()> {
        let margin = self.spectral_concentration();
        if margin < 3.0 {
            return Err(Error::InvalidData(format!(
                "spectral concentration |lambda0| * sigma_s = {margin:.3} is below 3; \
                 the spectrum reaches the singular plane lambda = 0"
            )));
        }
        Ok(())
    }

    /// Radius in frequency space beyond which the spectrum is negligible:
    /// max over terms of |carrier| + k / min σ.
    pub fn spectral_support_radius(&self, k_sigma: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let min_width = std::iter::once(t.width_s)
                    .chain(t.width_x.iter().copied())
                    .chain(t.width_y.iter().copied())
                    .fold(f64::INFINITY, f64::min);
                t.carrier_norm() + k_sigma / min_width
            })
            .fold(0.0, f64::max)
    }

    /// Sample v₀ on a grid. Fails if any carrier is beyond the Nyquist band
    /// of its axis (|carrier| · h > π).
    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        if grid.d() != self.d || grid.n() != self.n {
            return Err(Error::InvalidData(format!(
                "data dimensions (d = {}, n = {}) do not match the grid (d = {}, n = {})",
                self.d,
                self.n,
                grid.d(),
                grid.n()
            )));
        }
        for term in &self.terms {
            for (axis, carrier) in term.carriers().enumerate() {
                let h = grid.spacing(axis);
                if carrier.abs() * h > std::f64::consts::PI {
                    return Err(Error::UnresolvedCarrier {
                        axis,
                        carrier,
                        spacing: h,
                    });
                }
            }
        }

        // Per term: amplitude and per-axis (center, 1/(2σ²), carrier).
        type AxisParams = Vec<(f64, f64, f64)>;
        let axes = grid.num_axes();
        let params: Vec<(Complex64, AxisParams)> = self
            .terms
            .iter()
            .map(|t| {
                let per_axis = t
                    .axis_params()
                    .map(|(c, w, k)| (c, 0.5 / (w * w), k))
                    .collect();
                (t.amplitude, per_axis)
            })
            .collect();

        let mut coords = vec![0.0; axes];
        Field::from_fn(grid.clone(), 0.0, |p| {
            coords.copy_from_slice(p);
            let mut value = Complex64::new(0.0, 0.0);
            for (amplitude, per_axis) in &params {
                let mut exponent = 0.0;
                let mut phase = 0.0;
                for (a, &(center, inv_two_sq, coeff)) in per_axis.iter().enumerate() {
                    let dp = coords[a] - center;
                    exponent -= dp * dp * inv_two_sq;
                    phase += coeff * coords[a];
                }
                value += amplitude * exponent.exp() * Complex64::cis(phase);
            }
            value
        })
    }

    /// Closed-form spectrum of the packet sum under the crate transform
    /// convention, at frequency (λ, ξ̄, η̄):
    ///
    /// ```text
    /// 2 c ∏_a σ_a √(2π) e^{-σ_a²(ω_a - k_a)²/2} e^{∓i(ω_a - k_a) c_a}
    /// ```
    ///
    /// with the upper sign on the s and x̄ axes and the lower sign on ȳ.
    pub fn spectrum(&self, freq: &[f64]) -> Complex64 {
        let axes = 1 + self.d + self.n;
        debug_assert_eq!(freq.len(), axes);
        let sqrt_two_pi = (2.0 * std::f64::consts::PI).sqrt();
        let mut total = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let mut magnitude = 1.0;
            let mut exponent = 0.0;
            let mut phase = 0.0;
            for (a, (center, width, coeff)) in term.axis_params().enumerate() {
                // axis_params already folds the η̄ sign into coeff, so the
                // offset ω_a - k_a and the center phase share one sign flag.
                let sign = if a > self.d { -1.0 } else { 1.0 };
                let omega = sign * freq[a];
                let offset = omega - coeff;
                magnitude *= width * sqrt_two_pi;
                exponent -= width * width * offset * offset * 0.5;
                phase -= offset * center;
            }
            total += term.amplitude * 2.0 * magnitude * exponent.exp() * Complex64::cis(phase);
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_packet(carrier_lambda: f64) -> GaussianPacket {
        GaussianPacket {
            amplitude: Complex64::new(1.0, 0.0),
            center_s: 0.0,
            center_x: vec![0.0],
            center_y: vec![0.0],
            width_s: 1.0,
            width_x: vec![1.0],
            width_y: vec![1.0],
            carrier_lambda,
            carrier_xi: vec![0.0],
            carrier_eta: vec![0.0],
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSpec::uniform(0, 1, 10.0, 64).is_err());
        assert!(GridSpec::uniform(1, 0, 10.0, 64).is_err());
        assert!(GridSpec::uniform(1, 1, -1.0, 64).is_err());
        assert!(GridSpec::uniform(1, 1, 10.0, 63).is_err());
        assert!(GridSpec::new(1, 1, vec![10.0; 2], vec![64; 3]).is_err());
    }

    #[test]
    fn axis_layout() {
        let grid = GridSpec::new(2, 1, vec![10.0, 8.0, 8.0, 6.0], vec![64, 32, 32, 16]).unwrap();
        assert_eq!(grid.num_axes(), 4);
        assert_eq!(grid.total_points(), 64 * 32 * 32 * 16);
        assert_eq!(grid.strides(), vec![32 * 32 * 16, 32 * 16, 16, 1]);
        assert!(!grid.is_y_axis(0));
        assert!(!grid.is_y_axis(2));
        assert!(grid.is_y_axis(3));
        assert_abs_diff_eq!(grid.spacing(0), 20.0 / 64.0);
        let coords = grid.axis_coords(3);
        assert_abs_diff_eq!(coords[0], -6.0);
        assert_abs_diff_eq!(coords[15], 6.0 - grid.spacing(3));

        // Round-trip flat <-> multi-index on a few nodes.
        let mut idx = [0usize; 4];
        for flat in [0usize, 1, 17, 12345, grid.total_points() - 1] {
            grid.multi_index_into(flat, &mut idx);
            let strides = grid.strides();
            let back: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
            assert_eq!(back, flat);
        }
    }

    #[test]
    fn sample_matches_closed_form_at_nodes() {
        let grid = GridSpec::uniform(1, 1, 10.0, 64).unwrap();
        let data = InitialData::new(1, 1, vec![unit_packet(3.0)]).unwrap();
        let field = data.sample(&grid).unwrap();

        // Node (s, x, y) = (0, 0, 0) sits at index M/2 on each axis.
        let strides = grid.strides();
        let center = 32 * strides[0] + 32 * strides[1] + 32 * strides[2];
        assert_abs_diff_eq!(field.values()[center].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(field.values()[center].im, 0.0, epsilon = 1e-14);

        // Node (1, 0, 0): s = 1 lies 1/h = 3.2 steps past center; h = 0.3125
        // puts s = 1 at index 32 + 16/5, not a node, so use s = h*k instead.
        let k = 4;
        let s = grid.spacing(0) * k as f64;
        let at = (32 + k) * strides[0] + 32 * strides[1] + 32 * strides[2];
        let expected = (-s * s / 2.0).exp() * Complex64::cis(3.0 * s);
        assert_abs_diff_eq!(field.values()[at].re, expected.re, epsilon = 1e-14);
        assert_abs_diff_eq!(field.values()[at].im, expected.im, epsilon = 1e-14);
    }

    #[test]
    fn sample_unit_value_on_integer_grid() {
        // Grid with h = 0.25 so that (1, 0, 0) is a node: L = 8, M = 64.
        let grid = GridSpec::uniform(1, 1, 8.0, 64).unwrap();
        let data = InitialData::new(1, 1, vec![unit_packet(3.0)]).unwrap();
        let field = data.sample(&grid).unwrap();
        let strides = grid.strides();
        // s = 1 is 4 steps past the center index 32.
        let at = 36 * strides[0] + 32 * strides[1] + 32 * strides[2];
        let expected = (-0.5f64).exp() * Complex64::cis(3.0);
        assert_abs_diff_eq!(field.values()[at].re, expected.re, epsilon = 1e-13);
        assert_abs_diff_eq!(field.values()[at].im, expected.im, epsilon = 1e-13);
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let grid = GridSpec::uniform(1, 1, 10.0, 32).unwrap();
        let mut packet = unit_packet(3.0);
        packet.amplitude = Complex64::new(0.0, 0.0);
        let data = InitialData::new(1, 1, vec![packet]).unwrap();
        let field = data.sample(&grid).unwrap();
        assert!(field.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn unresolved_carrier_is_rejected() {
        let grid = GridSpec::uniform(1, 1, 10.0, 16).unwrap();
        // h = 1.25, so any carrier above pi/h = 2.513 is unresolved.
        let data = InitialData::new(1, 1, vec![unit_packet(3.0)]).unwrap();
        match data.sample(&grid) {
            Err(Error::UnresolvedCarrier { axis, .. }) => assert_eq!(axis, 0),
            other => panic!("expected UnresolvedCarrier, got {other:?}"),
        }
    }

    #[test]
    fn l2_norm_of_gaussian() {
        // ∫ exp(-(s²+x²+y²)) = π^{3/2}, so the norm is π^{3/4}.
        let grid = GridSpec::uniform(1, 1, 10.0, 64).unwrap();
        let field = Field::from_fn(grid, 0.0, |p| {
            let r2: f64 = p.iter().map(|v| v * v).sum();
            Complex64::new((-r2 / 2.0).exp(), 0.0)
        })
        .unwrap();
        let expected = std::f64::consts::PI.powf(0.75);
        assert_abs_diff_eq!(field.l2_norm(), expected, epsilon = 1e-10);
    }

    #[test]
    fn l2_norm_all_ones() {
        let grid = GridSpec::uniform(1, 1, 1.0, 4).unwrap();
        let field = Field::from_fn(grid, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        // 64 nodes, cell volume (1/2)³: norm² = 8.
        assert_abs_diff_eq!(field.l2_norm(), 8.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn field_validation() {
        let grid = GridSpec::uniform(1, 1, 1.0, 4).unwrap();
        assert!(matches!(
            Field::new(grid.clone(), 0.0, vec![Complex64::new(0.0, 0.0); 63]),
            Err(Error::SizeMismatch { .. })
        ));
        let mut values = vec![Complex64::new(0.0, 0.0); 64];
        values[7] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            Field::new(grid, 0.0, values),
            Err(Error::NonFiniteField)
        ));
    }

    #[test]
    fn concentration_rule() {
        let data = InitialData::new(1, 1, vec![unit_packet(3.0)]).unwrap();
        assert!(data.validate_concentration().is_ok());
        let weak = InitialData::new(1, 1, vec![unit_packet(1.0)]).unwrap();
        assert!(weak.validate_concentration().is_err());
        let empty = InitialData::new(1, 1, vec![]).unwrap();
        assert!(empty.validate_concentration().is_ok());
    }

    #[test]
    fn widths_must_be_positive() {
        let mut packet = unit_packet(3.0);
        packet.width_x = vec![0.0];
        assert!(InitialData::new(1, 1, vec![packet]).is_err());
    }

    #[test]
    fn l2_homogeneity() {
        use proptest::prelude::*;
        let mut runner = proptest::test_runner::TestRunner::default();
        let grid = GridSpec::uniform(1, 1, 2.0, 4).unwrap();
        let total = grid.total_points();
        runner
            .run(
                &(
                    proptest::collection::vec(-10.0f64..10.0, 2 * total),
                    -5.0f64..5.0,
                ),
                |(raw, scale)| {
                    let values: Vec<Complex64> =
                        raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                    let field = Field::new(grid.clone(), 0.0, values.clone()).unwrap();
                    let scaled = Field::new(
                        grid.clone(),
                        0.0,
                        values.iter().map(|v| v * scale).collect(),
                    )
                    .unwrap();
                    let want = scale.abs() * field.l2_norm();
                    prop_assert!((scaled.l2_norm() - want).abs() <= 1e-12 * (1.0 + want));
                    Ok(())
                },
            )
            .unwrap();
    }
}
