//! Run configuration: a TOML file with sections for the grid, the initial
//! data, the evolution times, the zero-plane policy, output handling, and
//! the verification tolerances. Runs are archival artifacts, so commands
//! copy the configuration text verbatim into the output directory.

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{GaussianPacket, GridSpec, InitialData};
use crate::propagator::{MultiplierPolicy, ZeroPlaneRule};
use crate::quadrature::ConeResolution;

/// A value that may be given once (applied to every axis) or per axis.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Uniform(T),
    Each(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    fn resolve(&self, axes: usize, what: &str) -> Result<Vec<T>> {
        match self {
            PerAxis::Uniform(v) => Ok(vec![*v; axes]),
            PerAxis::Each(vs) if vs.len() == axes => Ok(vs.clone()),
            PerAxis::Each(vs) => Err(Error::Config(format!(
                "{what} lists {} entries but the grid has {axes} axes",
                vs.len()
            ))),
        }
    }
}

/// A complex number written either as a real scalar or as [re, im].
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    pub n: usize,
    pub extent: PerAxis<f64>,
    pub points: PerAxis<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    /// Complex amplitude of the packet.
    #[serde(default = "default_amplitude")]
    pub amplitude: ComplexValue,
    /// Center (s, x̄…, ȳ…), one entry per axis.
    pub center: Vec<f64>,
    /// Gaussian widths, scalar or per axis.
    pub width: PerAxis<f64>,
    /// Carrier frequencies (λ₀, ξ̄₀…, η̄₀…), one entry per axis.
    pub carrier: Vec<f64>,
}

fn default_amplitude() -> ComplexValue {
    ComplexValue::Real(1.0)
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default)]
    pub term: Vec<TermSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    /// "zero-out" (default) or "reject".
    #[serde(default = "default_zero_plane")]
    pub zero_plane: String,
    /// Energy-fraction threshold for the reject rule.
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
}

fn default_zero_plane() -> String {
    "zero-out".to_string()
}

fn default_epsilon0() -> f64 {
    1e-6
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            zero_plane: default_zero_plane(),
            epsilon0: default_epsilon0(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    /// "bin" (default) or "csv".
    #[serde(default = "default_format")]
    pub format: String,
    /// Emit the per-time diagnostics table.
    #[serde(default = "default_true")]
    pub diagnostics: bool,
}

fn default_directory() -> String {
    "out".to_string()
}

fn default_format() -> String {
    "bin".to_string()
}

fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            format: default_format(),
            diagnostics: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Relative gap allowed between the two cone parametrizations.
    #[serde(default = "default_identity_tolerance")]
    pub identity_tolerance: f64,
    /// Cone-vs-propagator gap allowed at t = 0.
    #[serde(default = "default_cross_tolerance_initial")]
    pub cross_tolerance_initial: f64,
    /// Cone-vs-propagator gap allowed at other times.
    #[serde(default = "default_cross_tolerance")]
    pub cross_tolerance: f64,
    /// Number of sample points for the cross check.
    #[serde(default = "default_cross_points")]
    pub cross_points: usize,
    /// Seed for the deterministic sample-point draw.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Scales every quadrature node count (< 1 coarsens, > 1 refines).
    #[serde(default = "default_resolution_scale")]
    pub resolution_scale: f64,
    /// Bound on the spectral residual of a run trajectory.
    #[serde(default = "default_residual_tolerance")]
    pub residual_tolerance: f64,
    /// Expected finite-difference convergence order and its allowed band.
    #[serde(default = "default_convergence_order")]
    pub convergence_order: f64,
    #[serde(default = "default_convergence_band")]
    pub convergence_band: f64,
}

fn default_identity_tolerance() -> f64 {
    1e-3
}

fn default_cross_tolerance_initial() -> f64 {
    1e-4
}

fn default_cross_tolerance() -> f64 {
    1e-3
}

fn default_cross_points() -> usize {
    20
}

fn default_seed() -> u64 {
    7
}

fn default_resolution_scale() -> f64 {
    1.0
}

fn default_residual_tolerance() -> f64 {
    1e-3
}

fn default_convergence_order() -> f64 {
    2.0
}

fn default_convergence_band() -> f64 {
    0.2
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            identity_tolerance: default_identity_tolerance(),
            cross_tolerance_initial: default_cross_tolerance_initial(),
            cross_tolerance: default_cross_tolerance(),
            cross_points: default_cross_points(),
            seed: default_seed(),
            resolution_scale: default_resolution_scale(),
            residual_tolerance: default_residual_tolerance(),
            convergence_order: default_convergence_order(),
            convergence_band: default_convergence_band(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub policy: PolicySection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
}

/// A parsed configuration together with its original text (runs archive
/// the text verbatim).
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub source: String,
}

/// Read and parse a configuration file. Parse failures carry the file name
/// and the line/column reported by the TOML parser.
pub fn load(path: &Path) -> Result<LoadedConfig> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let config = parse(&source).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(LoadedConfig { config, source })
}

/// Parse configuration text.
pub fn parse(source: &str) -> Result<RunConfig> {
    toml::from_str(source).map_err(|e| Error::Config(e.to_string()))
}

impl RunConfig {
    pub fn grid_spec(&self) -> Result<GridSpec> {
        let axes = 1 + self.grid.d + self.grid.n;
        let extents = self.grid.extent.resolve(axes, "grid.extent")?;
        let points = self.grid.points.resolve(axes, "grid.points")?;
        GridSpec::new(self.grid.d, self.grid.n, extents, points)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let (d, n) = (self.grid.d, self.grid.n);
        let axes = 1 + d + n;
        let mut terms = Vec::with_capacity(self.data.term.len());
        for (index, term) in self.data.term.iter().enumerate() {
            if term.center.len() != axes {
                return Err(Error::Config(format!(
                    "data.term[{index}].center lists {} entries but the grid has {axes} axes",
                    term.center.len()
                )));
            }
            if term.carrier.len() != axes {
                return Err(Error::Config(format!(
                    "data.term[{index}].carrier lists {} entries but the grid has {axes} axes",
                    term.carrier.len()
                )));
            }
            let width = term.width.resolve(axes, "data.term.width")?;
            terms.push(GaussianPacket {
                amplitude: term.amplitude.into(),
                center_s: term.center[0],
                center_x: term.center[1..1 + d].to_vec(),
                center_y: term.center[1 + d..].to_vec(),
                width_s: width[0],
                width_x: width[1..1 + d].to_vec(),
                width_y: width[1 + d..].to_vec(),
                carrier_lambda: term.carrier[0],
                carrier_xi: term.carrier[1..1 + d].to_vec(),
                carrier_eta: term.carrier[1 + d..].to_vec(),
            });
        }
        InitialData::new(d, n, terms)
    }

    pub fn policy(&self) -> Result<MultiplierPolicy> {
        let rule = match self.policy.zero_plane.as_str() {
            "zero-out" => ZeroPlaneRule::ZeroOut,
            "reject" => ZeroPlaneRule::Reject,
            other => {
                return Err(Error::InvalidPolicy(format!(
                    "policy.zero_plane must be \"zero-out\" or \"reject\", got \"{other}\""
                )))
            }
        };
        MultiplierPolicy::new(rule, self.policy.epsilon0)
    }

    fn scaled(&self, base: ConeResolution) -> ConeResolution {
        let scale = self.verify.resolution_scale;
        if (scale - 1.0).abs() < 1e-12 {
            base
        } else {
            base.refined(scale)
        }
    }

    pub fn identity_resolution(&self) -> ConeResolution {
        self.scaled(ConeResolution::identity_default())
    }

    pub fn reconstruction_resolution(&self) -> ConeResolution {
        self.scaled(ConeResolution::reconstruction_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
        times = [0.5, 1.0, 2.0]

        [grid]
        d = 1
        n = 1
        extent = 10.0
        points = 64

        [[data.term]]
        amplitude = 1.0
        center = [0.0, 0.0, 0.0]
        width = 1.0
        carrier = [3.0, 0.0, 0.0]

        [policy]
        zero_plane = "zero-out"

        [output]
        directory = "out"
        format = "bin"
    "#;

    #[test]
    fn parses_the_documented_example() {
        let config = parse(EXAMPLE).unwrap();
        let grid = config.grid_spec().unwrap();
        assert_eq!(grid.points_per_axis(), &[64, 64, 64]);
        assert_eq!(grid.extent(0), 10.0);
        let data = config.initial_data().unwrap();
        assert_eq!(data.terms().len(), 1);
        assert_eq!(data.terms()[0].carrier_lambda, 3.0);
        assert_eq!(config.times, vec![0.5, 1.0, 2.0]);
        let policy = config.policy().unwrap();
        assert_eq!(policy.rule(), ZeroPlaneRule::ZeroOut);
        assert_eq!(config.verify.cross_points, 20);
        assert_eq!(config.output.format, "bin");
    }

    #[test]
    fn per_axis_values_and_complex_amplitudes() {
        let config = parse(
            r#"
            [grid]
            d = 1
            n = 2
            extent = [10.0, 8.0, 8.0, 12.0]
            points = [64, 32, 32, 16]

            [[data.term]]
            amplitude = [0.5, -0.5]
            center = [0.0, 1.0, 0.0, 0.0]
            width = [1.0, 2.0, 1.0, 1.5]
            carrier = [4.0, 0.0, 1.0, 0.0]
        "#,
        )
        .unwrap();
        let grid = config.grid_spec().unwrap();
        assert_eq!(grid.extent(3), 12.0);
        let data = config.initial_data().unwrap();
        let term = &data.terms()[0];
        assert_eq!(term.amplitude, Complex64::new(0.5, -0.5));
        assert_eq!(term.width_y, vec![1.0, 1.5]);
        assert_eq!(term.carrier_eta, vec![1.0, 0.0]);
    }

    #[test]
    fn missing_required_key_is_diagnosed() {
        let err = parse(
            r#"
            [grid]
            d = 1
            n = 1
            extent = 10.0
        "#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("points"), "unhelpful diagnostic: {msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse(
            r#"
            [grid]
            d = 1
            n = 1
            extent = 10.0
            points = 64
            typo_key = 3
        "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("typo_key"));
    }

    #[test]
    fn axis_count_mismatches_are_diagnosed() {
        let config = parse(
            r#"
            [grid]
            d = 1
            n = 1
            extent = [10.0, 10.0]
            points = 64
        "#,
        )
        .unwrap();
        let err = config.grid_spec().unwrap_err();
        assert!(err.to_string().contains("grid.extent"));

        let config = parse(
            r#"
            [grid]
            d = 1
            n = 1
            extent = 10.0
            points = 64

            [[data.term]]
            center = [0.0, 0.0]
            width = 1.0
            carrier = [3.0, 0.0, 0.0]
        "#,
        )
        .unwrap();
        let err = config.initial_data().unwrap_err();
        assert!(err.to_string().contains("center"));
    }

    #[test]
    fn bad_policy_name_is_rejected() {
        let config = parse(
            r#"
            [grid]
            d = 1
            n = 1
            extent = 10.0
            points = 64

            [policy]
            zero_plane = "ignore"
        "#,
        )
        .unwrap();
        assert!(matches!(config.policy(), Err(Error::InvalidPolicy(_))));
    }

    #[test]
    fn resolution_scale_coarsens_and_refines() {
        let mut config = parse(EXAMPLE).unwrap();
        let base = config.identity_resolution();
        config.verify.resolution_scale = 0.3;
        let coarse = config.identity_resolution();
        assert!(coarse.transverse < base.transverse);
        config.verify.resolution_scale = 2.0;
        let fine = config.identity_resolution();
        assert!(fine.transverse > base.transverse);
    }
}
