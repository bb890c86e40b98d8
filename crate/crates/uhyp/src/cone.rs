//! Light-cone geometry.
//!
//! The change of variables x₀ = t + s, y₀ = t − s turns the mixed
//! second derivative into Δ_x − Δ_y, and the full space-time transform of a
//! solution lives on the quadric cone {|ξ| = |η|} ⊂ ℝ^{d+1} × ℝ^{n+1}.
//! This module holds the coordinate maps, the lift of a frequency triple
//! (λ, ξ̄, η̄) onto that cone, the amplitude the cone carries, and the test
//! functions used to cross-check the two parametrizations of integrals
//! over it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::InitialData;
use crate::oracle;
use crate::spectral::SpectralField;

/// (t, s) → (x₀, y₀) = (t + s, t − s).
pub fn to_lightcone(t: f64, s: f64) -> (f64, f64) {
    (t + s, t - s)
}

/// (x₀, y₀) → (t, s) = ((x₀ + y₀)/2, (x₀ − y₀)/2).
pub fn from_lightcone(x0: f64, y0: f64) -> (f64, f64) {
    (0.5 * (x0 + y0), 0.5 * (x0 - y0))
}

/// Dual map on frequencies: (ξ₀, η₀) → (λ, ρ) = (ξ₀ + η₀, ξ₀ − η₀).
pub fn to_lightcone_freq(xi0: f64, eta0: f64) -> (f64, f64) {
    (xi0 + eta0, xi0 - eta0)
}

/// (λ, ρ) → (ξ₀, η₀) = ((λ + ρ)/2, (λ − ρ)/2).
pub fn from_lightcone_freq(lambda: f64, rho: f64) -> (f64, f64) {
    (0.5 * (lambda + rho), 0.5 * (lambda - rho))
}

/// A point of the cone {|ξ| = |η|}, parametrized by (λ, ξ̄, η̄) with λ ≠ 0.
///
/// The axial components are ξ₀ = (η̄² − ξ̄²)/(2λ) + λ/2 and η₀ = λ − ξ₀,
/// so ξ₀ + η₀ = λ holds by construction (up to one rounding) and the cone
/// constraint ξ₀² + ξ̄² = η₀² + η̄² holds identically.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint {
    pub lambda: f64,
    pub xi0: f64,
    pub eta0: f64,
    pub xi_bar: Vec<f64>,
    pub eta_bar: Vec<f64>,
}

impl ConePoint {
    /// The common radius r = |ξ| = |η|.
    pub fn radius(&self) -> f64 {
        (self.xi0 * self.xi0 + norm_sqr(&self.xi_bar)).sqrt()
    }

    /// Full ξ = (ξ₀, ξ̄) ∈ ℝ^{d+1}.
    pub fn xi(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.xi_bar.len());
        v.push(self.xi0);
        v.extend_from_slice(&self.xi_bar);
        v
    }

    /// Full η = (η₀, η̄) ∈ ℝ^{n+1}.
    pub fn eta(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.eta_bar.len());
        v.push(self.eta0);
        v.extend_from_slice(&self.eta_bar);
        v
    }
}

fn norm_sqr(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Lift (λ, ξ̄, η̄), λ ≠ 0, to the unique cone point over it.
pub fn cone_lift(lambda: f64, xi_bar: &[f64], eta_bar: &[f64]) -> Result<ConePoint> {
    if lambda == 0.0 {
        return Err(Error::SingularFrequency);
    }
    let xi0 = (norm_sqr(eta_bar) - norm_sqr(xi_bar)) / (2.0 * lambda) + 0.5 * lambda;
    let eta0 = lambda - xi0;
    Ok(ConePoint {
        lambda,
        xi0,
        eta0,
        xi_bar: xi_bar.to_vec(),
        eta_bar: eta_bar.to_vec(),
    })
}

/// The density the cone carries: a(ξ, η) = 2π |λ| ṽ₀(λ, ξ̄, η̄) with
/// λ = ξ₀ + η₀. Backed either by the closed-form spectrum of Gaussian
/// initial data or by multilinear interpolation of a discrete spectrum.
#[derive(Clone, Copy)]
pub enum ConeAmplitude<'a> {
    ClosedForm(&'a InitialData),
    Sampled(&'a SpectralField),
}

impl<'a> ConeAmplitude<'a> {
    /// Amplitude at the cone point over (λ, ξ̄, η̄).
    pub fn eval(&self, lambda: f64, xi_bar: &[f64], eta_bar: &[f64]) -> Result<Complex64> {
        let spectrum = self.spectrum_value(lambda, xi_bar, eta_bar)?;
        Ok(2.0 * std::f64::consts::PI * lambda.abs() * spectrum)
    }

    /// Amplitude at an already-lifted point.
    pub fn eval_at(&self, p: &ConePoint) -> Result<Complex64> {
        self.eval(p.lambda, &p.xi_bar, &p.eta_bar)
    }

    /// Amplitude in the sphere-product parametrization: ξ = rζ, η = rσ,
    /// so λ = r(ζ₀ + σ₀), ξ̄ = rζ̄, η̄ = rσ̄.
    pub fn eval_sphere(&self, zeta: &[f64], sigma: &[f64], r: f64) -> Result<Complex64> {
        let lambda = r * (zeta[0] + sigma[0]);
        let xi_bar: Vec<f64> = zeta[1..].iter().map(|z| r * z).collect();
        let eta_bar: Vec<f64> = sigma[1..].iter().map(|z| r * z).collect();
        self.eval(lambda, &xi_bar, &eta_bar)
    }

    fn spectrum_value(&self, lambda: f64, xi_bar: &[f64], eta_bar: &[f64]) -> Result<Complex64> {
        match self {
            ConeAmplitude::ClosedForm(data) => {
                let mut freq = Vec::with_capacity(1 + xi_bar.len() + eta_bar.len());
                freq.push(lambda);
                freq.extend_from_slice(xi_bar);
                freq.extend_from_slice(eta_bar);
                Ok(oracle::gaussian_spectrum(data, &freq))
            }
            ConeAmplitude::Sampled(spec) => {
                let mut freq = Vec::with_capacity(1 + xi_bar.len() + eta_bar.len());
                freq.push(lambda);
                freq.extend_from_slice(xi_bar);
                freq.extend_from_slice(eta_bar);
                interpolate_spectrum(spec, &freq)
            }
        }
    }
}

/// Multilinear interpolation of a discrete spectrum at an arbitrary
/// frequency inside the resolved band.
fn interpolate_spectrum(spec: &SpectralField, freq: &[f64]) -> Result<Complex64> {
    let fg = spec.freq_grid();
    let grid = fg.grid();
    let axes = grid.num_axes();
    if freq.len() != axes {
        return Err(Error::SizeMismatch {
            expected: axes,
            got: freq.len(),
        });
    }
    let mut base = vec![0usize; axes];
    let mut frac = vec![0f64; axes];
    for a in 0..axes {
        let m = grid.points(a);
        let lo = fg.freq(a, 0);
        let hi = fg.freq(a, m - 1);
        if freq[a] < lo || freq[a] > hi {
            return Err(Error::OutOfBand(a));
        }
        let u = (freq[a] - lo) / fg.spacing(a);
        let mut i = u.floor() as usize;
        if i > m - 2 {
            i = m - 2;
        }
        base[a] = i;
        frac[a] = u - i as f64;
    }
    let strides = grid.strides();
    let mut acc = Complex64::new(0.0, 0.0);
    for corner in 0..(1usize << axes) {
        let mut flat = 0usize;
        let mut weight = 1.0f64;
        for a in 0..axes {
            let up = (corner >> a) & 1 == 1;
            flat += (base[a] + up as usize) * strides[a];
            weight *= if up { frac[a] } else { 1.0 - frac[a] };
        }
        acc += weight * spec.coeffs()[flat];
    }
    Ok(acc)
}

/// W evaluated at full frequency vectors (ξ₀, ξ̄) and (η₀, η̄).
type FrequencyFn = Box<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// A continuous W(ξ, η) on ℝ^{d+1} × ℝ^{n+1} with values negligible
/// outside |ξ| ≤ support_radius, used to probe cone integrals.
pub struct ConeTestFunction {
    name: &'static str,
    d: usize,
    n: usize,
    support_radius: f64,
    f: FrequencyFn,
}

impl ConeTestFunction {
    pub fn new(
        name: &'static str,
        d: usize,
        n: usize,
        support_radius: f64,
        f: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name,
            d,
            n,
            support_radius,
            f: Box::new(f),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> Complex64 {
        (self.f)(xi, eta)
    }
}

/// A corpus entry: a test function and, when available, the closed-form
/// value of its cone integral.
pub struct IdentityCase {
    pub test: ConeTestFunction,
    pub exact: Option<f64>,
}

/// The d = n = 1 test corpus for the two-parametrization identity.
///
/// * isotropic Gaussian e^{−(|ξ|² + |η|²)} (= e^{−2r²} on the cone):
///   exact value |S¹|² · ∫₀^∞ r e^{−2r²} dr = π²;
/// * anisotropic e^{−2|ξ|²} ξ̄²: exact value 2π · π · ∫₀^∞ r³ e^{−2r²} dr
///   = π²/4;
/// * a shifted bump with no closed form, so only the two quadratures can
///   be compared against each other.
///
/// All are truncated at the declared radius, where they have decayed to
/// below e^{−70}.
pub fn identity_corpus() -> Vec<IdentityCase> {
    let pi = std::f64::consts::PI;
    vec![
        IdentityCase {
            test: ConeTestFunction::new("isotropic-gaussian", 1, 1, 6.0, |xi, eta| {
                Complex64::new((-(norm_sqr(xi) + norm_sqr(eta))).exp(), 0.0)
            }),
            exact: Some(pi * pi),
        },
        IdentityCase {
            test: ConeTestFunction::new("anisotropic-moment", 1, 1, 6.0, |xi, _eta| {
                Complex64::new((-2.0 * norm_sqr(xi)).exp() * xi[1] * xi[1], 0.0)
            }),
            exact: Some(pi * pi / 4.0),
        },
        IdentityCase {
            test: ConeTestFunction::new("shifted-bump", 1, 1, 7.0, |xi, eta| {
                let dx = [xi[0] - 0.8, xi[1] - 0.4];
                let de = [eta[0] + 0.3, eta[1] - 0.5];
                Complex64::new((-(norm_sqr(&dx) + norm_sqr(&de))).exp(), 0.0)
            }),
            exact: None,
        },
    ]
}
