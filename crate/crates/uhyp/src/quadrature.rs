//! Numerical integration: Gauss–Legendre rules, product quadratures on
//! spheres, the two parametrizations of the cone integral, and pointwise
//! reconstruction of the solution from the cone amplitude.

use num_complex::Complex64;

use crate::cone::{self, ConeAmplitude, ConeTestFunction};
use crate::error::{Error, Result};
use crate::grid::InitialData;

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// P_n(x) and P_n'(x) via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        if n == 1 {
            return Self {
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for k in 0..n.div_ceil(2) {
            // Tricomi's estimate, then Newton.
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = x;
            nodes[n - 1 - k] = -x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped_nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    /// ∫_a^b f.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        self.mapped_nodes(a, b)
            .into_iter()
            .map(|(x, w)| w * f(x))
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc + v)
    }
}

/// Quadrature nodes (point on S^m ⊂ ℝ^{m+1}, weight) whose weighted sum
/// approximates the surface integral.
///
/// * m = 1: uniform angles — the trapezoid rule, spectrally accurate for
///   smooth integrands on the circle.
/// * m = 2: the hemisphere splitting ζ₀ = ±cos θ with |ζ̄| = sin θ, which
///   turns the equatorial weight 1/√(1−|ζ̄|²) into the smooth factor sin θ:
///   Gauss–Legendre in θ on [0, π/2], uniform angles in the azimuth.
fn sphere_nodes(m: usize, resolution: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match m {
        1 => {
            let count = resolution.max(4);
            let step = std::f64::consts::TAU / count as f64;
            Ok((0..count)
                .map(|j| {
                    let angle = step * j as f64;
                    (vec![angle.cos(), angle.sin()], step)
                })
                .collect())
        }
        2 => {
            let polar = GaussLegendre::new(resolution.max(4));
            let azimuth_count = 2 * resolution.max(4);
            let azimuth_step = std::f64::consts::TAU / azimuth_count as f64;
            let mut nodes = Vec::with_capacity(2 * polar.len() * azimuth_count);
            for (theta, w_theta) in polar.mapped_nodes(0.0, std::f64::consts::FRAC_PI_2) {
                let (sin_t, cos_t) = theta.sin_cos();
                for j in 0..azimuth_count {
                    let phi = azimuth_step * j as f64;
                    let weight = w_theta * azimuth_step * sin_t;
                    for hemisphere in [1.0, -1.0] {
                        nodes.push((
                            vec![hemisphere * cos_t, sin_t * phi.cos(), sin_t * phi.sin()],
                            weight,
                        ));
                    }
                }
            }
            Ok(nodes)
        }
        other => Err(Error::UnsupportedSphereDim(other)),
    }
}

/// ∫_{S^m} f dζ by the product rule described at [`sphere_nodes`].
pub fn sphere_quadrature(
    m: usize,
    resolution: usize,
    mut f: impl FnMut(&[f64]) -> Complex64,
) -> Result<Complex64> {
    let nodes = sphere_nodes(m, resolution)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (point, weight) in &nodes {
        acc += *weight * f(point);
    }
    Ok(acc)
}

/// Node counts for the cone quadratures and the reconstruction integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeResolution {
    /// Gauss–Legendre nodes for the radius r.
    pub radial: usize,
    /// Resolution parameter of each sphere factor.
    pub angular: usize,
    /// Gauss–Legendre nodes per μ panel in the λ = ±μ² substitution.
    pub lambda: usize,
    /// Gauss–Legendre nodes per transverse panel / interval.
    pub transverse: usize,
    /// Multiplies the amplitude's spectral support radius.
    pub support_factor: f64,
}

impl ConeResolution {
    /// Default for the two-parametrization identity checks.
    pub fn identity_default() -> Self {
        Self {
            radial: 48,
            angular: 64,
            lambda: 12,
            transverse: 24,
            support_factor: 1.0,
        }
    }

    /// Default for pointwise solution reconstruction.
    pub fn reconstruction_default() -> Self {
        Self {
            radial: 56,
            angular: 96,
            lambda: 12,
            transverse: 24,
            support_factor: 1.0,
        }
    }

    /// Scale every node count by the factor (support radius unchanged).
    /// Factors below 1 coarsen; counts never drop below 2.
    pub fn refined(&self, factor: f64) -> Self {
        let scale = |count: usize| ((count as f64 * factor).ceil() as usize).max(2);
        Self {
            radial: scale(self.radial),
            angular: scale(self.angular),
            lambda: scale(self.lambda),
            transverse: scale(self.transverse),
            support_factor: self.support_factor,
        }
    }
}

/// Left side of the two-parametrization identity:
/// ∫_{S^d × S^n × ℝ₊} W(rζ, rσ) r^{N−1} dζ dσ dr, truncated at the test
/// function's declared support radius.
pub fn integrate_cone_spherical(w: &ConeTestFunction, res: &ConeResolution) -> Result<Complex64> {
    let zeta_nodes = sphere_nodes(w.d(), res.angular)?;
    let sigma_nodes = sphere_nodes(w.n(), res.angular)?;
    let radial = GaussLegendre::new(res.radial);
    let power = (w.d() + w.n() - 1) as i32;
    let mut xi = vec![0.0; w.d() + 1];
    let mut eta = vec![0.0; w.n() + 1];
    let mut total = Complex64::new(0.0, 0.0);
    for (r, w_r) in radial.mapped_nodes(0.0, w.support_radius()) {
        let shell = w_r * r.powi(power);
        let mut slice = Complex64::new(0.0, 0.0);
        for (zeta, w_zeta) in &zeta_nodes {
            for (k, z) in zeta.iter().enumerate() {
                xi[k] = r * z;
            }
            for (sigma, w_sigma) in &sigma_nodes {
                for (k, z) in sigma.iter().enumerate() {
                    eta[k] = r * z;
                }
                slice += w_zeta * w_sigma * w.eval(&xi, &eta);
            }
        }
        total += shell * slice;
    }
    Ok(total)
}

/// Right side of the identity:
/// ∫ W(ξ(λ, ξ̄, η̄), η(λ, ξ̄, η̄)) dξ̄ dη̄ dλ / |λ| over λ ∈ [−2R, 2R]\{0}
/// (|ξ₀|, |η₀| ≤ R forces |λ| ≤ 2R).
///
/// Two numerical treatments make the singular weight tractable:
/// * λ = ±μ² regularizes dλ/|λ| into 2 dμ/μ, matching the ~√|λ| shrinkage
///   of the set where W is non-negligible;
/// * at fixed (λ, ξ̄), the η̄ nodes are placed only where the lifted point
///   has radius ≤ R: η̄² ∈ [max(0, R² − (|λ|+B)²), R² − (|λ|−B)²] with
///   B = √(R² − ξ̄²), an interval that would otherwise thin out faster
///   than any fixed tensor rule can track.
///
/// Only d = n = 1 is supported.
pub fn integrate_cone_parametrized(
    w: &ConeTestFunction,
    res: &ConeResolution,
) -> Result<Complex64> {
    if w.d() != 1 || w.n() != 1 {
        return Err(Error::UnsupportedDims { d: w.d(), n: w.n() });
    }
    let radius = w.support_radius();
    let mu_max = (2.0 * radius).sqrt();
    let rule_mu = GaussLegendre::new(res.lambda);
    let rule_xi = GaussLegendre::new(res.transverse);
    let rule_eta = GaussLegendre::new(res.transverse);
    // Geometric panels resolve the (integrable) λ → 0 corner.
    let mu_breaks = [0.0, 0.1 * mu_max, 0.35 * mu_max, mu_max];
    let mut total = Complex64::new(0.0, 0.0);
    for sign in [1.0f64, -1.0] {
        for panel in mu_breaks.windows(2) {
            for (mu, w_mu) in rule_mu.mapped_nodes(panel[0], panel[1]) {
                let lambda = sign * mu * mu;
                let weight = 2.0 * w_mu / mu;
                total += weight * transverse_integral(w, lambda, radius, &rule_xi, &rule_eta)?;
            }
        }
    }
    Ok(total)
}

/// ∫∫ W(lift(λ, ξ̄, η̄)) dξ̄ dη̄ at fixed λ ≠ 0, restricted to the region
/// where the lift stays inside the support radius.
fn transverse_integral(
    w: &ConeTestFunction,
    lambda: f64,
    radius: f64,
    rule_xi: &GaussLegendre,
    rule_eta: &GaussLegendre,
) -> Result<Complex64> {
    let abs_l = lambda.abs();
    // |ξ̄| beyond which no η̄ keeps the lift inside the support.
    let cutoff = (abs_l * (2.0 * radius - abs_l)).max(0.0).sqrt().min(radius);
    let mut breaks = vec![-radius, 0.0, radius];
    if cutoff > 1e-9 && cutoff < radius - 1e-9 {
        breaks.push(-cutoff);
        breaks.push(cutoff);
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut acc = Complex64::new(0.0, 0.0);
    for panel in breaks.windows(2) {
        for (xi, w_xi) in rule_xi.mapped_nodes(panel[0], panel[1]) {
            let b_sqr = radius * radius - xi * xi;
            if b_sqr <= 0.0 {
                continue;
            }
            let b = b_sqr.sqrt();
            let hi = radius * radius - (abs_l - b) * (abs_l - b);
            if hi <= 0.0 {
                continue;
            }
            let lo = (radius * radius - (abs_l + b) * (abs_l + b)).max(0.0);
            let eta_lo = lo.sqrt();
            let eta_hi = hi.sqrt();
            for (a, bdy) in [(eta_lo, eta_hi), (-eta_hi, -eta_lo)] {
                for (eta, w_eta) in rule_eta.mapped_nodes(a, bdy) {
                    let p = cone::cone_lift(lambda, &[xi], &[eta])?;
                    acc += w_xi * w_eta * w.eval(&[p.xi0, xi], &[p.eta0, eta]);
                }
            }
        }
    }
    Ok(acc)
}

/// A space-time evaluation point (t, s, x̄, ȳ).
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub s: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Solution value at (t, s, x̄, ȳ) reconstructed from the cone amplitude:
///
/// ```text
/// v(t, s, x̄, ȳ) = ½ (2π)^{−(N+2)} ∫ r^{N−1} a(ζ, σ, r)
///                  e^{i r (x·ζ − y·σ)} dζ dσ dr
/// ```
///
/// with x = (t+s, x̄), y = (t−s, ȳ). Time enters only through the phase;
/// the amplitude is fixed by the initial data.
pub fn solution_via_cone(
    data: &InitialData,
    t: f64,
    s: f64,
    x: &[f64],
    y: &[f64],
    res: &ConeResolution,
) -> Result<Complex64> {
    let point = SpacetimePoint {
        t,
        s,
        x: x.to_vec(),
        y: y.to_vec(),
    };
    Ok(solution_via_cone_many(data, std::slice::from_ref(&point), res)?[0])
}

/// [`solution_via_cone`] over many points, sharing the amplitude matrix
/// across them (the dominant cost is amplitude evaluation, which does not
/// depend on the evaluation point).
pub fn solution_via_cone_many(
    data: &InitialData,
    points: &[SpacetimePoint],
    res: &ConeResolution,
) -> Result<Vec<Complex64>> {
    if data.d() != 1 || data.n() != 1 {
        return Err(Error::UnsupportedDims {
            d: data.d(),
            n: data.n(),
        });
    }
    for p in points {
        if p.x.len() != 1 || p.y.len() != 1 {
            return Err(Error::SizeMismatch {
                expected: 1,
                got: p.x.len().max(p.y.len()),
            });
        }
    }
    if data.terms().is_empty() || points.is_empty() {
        return Ok(vec![Complex64::new(0.0, 0.0); points.len()]);
    }

    let r_max = data.spectral_support_radius(6.0) * res.support_factor;
    // Light-cone coordinates of each point: x = (t+s, x̄), y = (t−s, ȳ).
    let coords: Vec<([f64; 2], [f64; 2])> = points
        .iter()
        .map(|p| {
            let (x0, y0) = cone::to_lightcone(p.t, p.s);
            ([x0, p.x[0]], [y0, p.y[0]])
        })
        .collect();
    // The trapezoid rule must resolve phases up to r_max · |point|.
    let reach = coords
        .iter()
        .flat_map(|(x, y)| [x, y])
        .map(|v| (v[0] * v[0] + v[1] * v[1]).sqrt())
        .fold(0.0, f64::max);
    let n_ang = res.angular.max((1.15 * r_max * reach) as usize + 50);
    let step = std::f64::consts::TAU / n_ang as f64;
    let (sin_a, cos_a): (Vec<f64>, Vec<f64>) =
        (0..n_ang).map(|j| (step * j as f64).sin_cos()).unzip();

    let amp = ConeAmplitude::ClosedForm(data);
    let radial = GaussLegendre::new(res.radial);
    let mut matrix = vec![Complex64::new(0.0, 0.0); n_ang * n_ang];
    let mut u = vec![Complex64::new(0.0, 0.0); n_ang];
    let mut v = vec![Complex64::new(0.0, 0.0); n_ang];
    let mut out = vec![Complex64::new(0.0, 0.0); points.len()];

    for (r, w_r) in radial.mapped_nodes(0.0, r_max) {
        // a at ξ = r(cos α, sin α), η = r(cos β, sin β).
        for i in 0..n_ang {
            let xi_bar = [r * sin_a[i]];
            for j in 0..n_ang {
                matrix[i * n_ang + j] =
                    amp.eval(r * (cos_a[i] + cos_a[j]), &xi_bar, &[r * sin_a[j]])?;
            }
        }
        let shell = w_r * r * step * step;
        for (k, (x, y)) in coords.iter().enumerate() {
            for i in 0..n_ang {
                u[i] = Complex64::cis(r * (x[0] * cos_a[i] + x[1] * sin_a[i]));
                v[i] = Complex64::cis(-r * (y[0] * cos_a[i] + y[1] * sin_a[i]));
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for i in 0..n_ang {
                let row = &matrix[i * n_ang..(i + 1) * n_ang];
                let mut inner = Complex64::new(0.0, 0.0);
                for (m, vj) in row.iter().zip(&v) {
                    inner += m * vj;
                }
                sum += u[i] * inner;
            }
            out[k] += shell * sum;
        }
    }
    let scale = 0.5 / (2.0 * std::f64::consts::PI).powi(4);
    Ok(out.into_iter().map(|z| scale * z).collect())
}
