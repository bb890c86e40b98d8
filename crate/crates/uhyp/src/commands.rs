//! The operations behind the CLI subcommands, exposed as library functions
//! so integration tests can drive them without spawning the binary.
//!
//! Every command returns a [`CommandReport`]: named check lines with a
//! pass/fail verdict each. The process exit code is nonzero iff any line
//! failed.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cone::identity_corpus;
use crate::config::{LoadedConfig, RunConfig};
use crate::error::{Error, Result};
use crate::grid::Field;
use crate::propagator::{self, Trajectory};
use crate::quadrature::{
    integrate_cone_parametrized, integrate_cone_spherical, solution_via_cone_many, SpacetimePoint,
};
use crate::snapshot;

/// One named check with its verdict.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

/// All check lines a command produced.
#[derive(Debug, Clone, Default)]
pub struct CommandReport {
    pub lines: Vec<CheckLine>,
}

impl CommandReport {
    fn push(&mut self, name: impl Into<String>, detail: impl Into<String>, pass: bool) {
        self.lines.push(CheckLine {
            name: name.into(),
            detail: detail.into(),
            pass,
        });
    }

    /// True when every line passed.
    pub fn ok(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn print(&self) {
        for line in &self.lines {
            let verdict = if line.pass { "PASS" } else { "FAIL" };
            println!("[{verdict}] {}: {}", line.name, line.detail);
        }
    }
}

fn prepared_field(config: &RunConfig) -> Result<Field> {
    let grid = config.grid_spec()?;
    let data = config.initial_data()?;
    data.validate_concentration()?;
    data.sample(&grid)
}

/// Evolve the configured data, write one snapshot per time plus the
/// diagnostics table, and report per-time conservation.
pub fn cmd_run(loaded: &LoadedConfig, output_override: Option<&Path>) -> Result<CommandReport> {
    let config = &loaded.config;
    if config.times.is_empty() {
        return Err(Error::Usage(
            "run needs at least one entry in `times`".to_string(),
        ));
    }
    let extension = match config.output.format.as_str() {
        "bin" => "bin",
        "csv" => "csv",
        other => {
            return Err(Error::Config(format!(
                "output.format must be \"bin\" or \"csv\", got \"{other}\""
            )))
        }
    };
    let v0 = prepared_field(config)?;
    let policy = config.policy()?;
    let trajectory = propagator::evolve_trajectory(&v0, &config.times, &policy)?;

    let out_dir: PathBuf = output_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&config.output.directory));
    std::fs::create_dir_all(&out_dir)?;
    std::fs::write(out_dir.join("config.toml"), &loaded.source)?;

    let mut report = CommandReport::default();
    let reference = trajectory.field(0).l2_norm();
    let mut diagnostics = String::new();
    diagnostics.push_str(&format!(
        "# plane_fraction = {}\n",
        trajectory.plane_fraction()
    ));
    diagnostics.push_str("index,time,file,l2_norm,conservation_deviation\n");
    for (index, field) in trajectory.fields().iter().enumerate() {
        let file = format!("snapshot_{index:03}.{extension}");
        let path = out_dir.join(&file);
        match extension {
            "bin" => snapshot::write_binary(&path, field)?,
            _ => snapshot::write_csv(&path, field)?,
        }
        let norm = field.l2_norm();
        let deviation = if reference == 0.0 {
            0.0
        } else {
            (norm - reference).abs() / reference
        };
        diagnostics.push_str(&format!(
            "{index},{},{file},{norm},{deviation}\n",
            field.time()
        ));
        report.push(
            format!("conservation(t={})", field.time()),
            format!("l2 norm {norm:.12}, relative deviation {deviation:.3e}"),
            deviation < 1e-10,
        );
    }
    if config.output.diagnostics {
        std::fs::write(out_dir.join("diagnostics.csv"), diagnostics)?;
    }
    report.push(
        "plane-fraction",
        format!(
            "initial data carries {:.3e} of its energy on the plane lambda = 0",
            trajectory.plane_fraction()
        ),
        true,
    );
    Ok(report)
}

/// Run both cone-integral parametrizations over the test corpus and compare
/// them (and the closed forms, where known).
pub fn cmd_verify_identity(config: &RunConfig) -> Result<CommandReport> {
    let res = config.identity_resolution();
    let tolerance = config.verify.identity_tolerance;
    let mut report = CommandReport::default();
    for case in identity_corpus() {
        let name = case.test.name();
        let spherical = integrate_cone_spherical(&case.test, &res)?;
        let parametrized = integrate_cone_parametrized(&case.test, &res)?;
        let scale = spherical.norm().max(1e-300);
        let gap = (spherical - parametrized).norm() / scale;
        report.push(
            format!("identity({name})"),
            format!(
                "spherical {:.10}, parametrized {:.10}, relative gap {gap:.3e} (tolerance {tolerance:.1e})",
                spherical.re, parametrized.re
            ),
            gap < tolerance,
        );
        if let Some(exact) = case.exact {
            let err = (spherical.re - exact).abs() / exact.abs();
            report.push(
                format!("closed-form({name})"),
                format!(
                    "spherical {:.10} vs exact {exact:.10}, relative error {err:.3e}",
                    spherical.re
                ),
                err < 5e-4,
            );
        }
    }
    Ok(report)
}

/// Deterministic sample of node points from the central half of the box
/// (periodic images are negligible there for well-concentrated data).
fn sample_points(config: &RunConfig, v0: &Field) -> Vec<(usize, Vec<f64>)> {
    let grid = v0.grid();
    let strides = grid.strides();
    let mut rng = ChaCha8Rng::seed_from_u64(config.verify.seed);
    let mut points = Vec::with_capacity(config.verify.cross_points);
    for _ in 0..config.verify.cross_points {
        let mut flat = 0usize;
        for (axis, stride) in strides.iter().enumerate() {
            let m = grid.points(axis);
            flat += rng.gen_range(m / 4..3 * m / 4) * stride;
        }
        let mut coords = vec![0.0; grid.num_axes()];
        grid.node_coords_into(flat, &mut coords);
        points.push((flat, coords));
    }
    points
}

/// Compare the cone reconstruction against the propagator at sampled grid
/// points for each configured time (default {0, 1}).
pub fn cmd_cross_check(config: &RunConfig) -> Result<CommandReport> {
    let v0 = prepared_field(config)?;
    let data = config.initial_data()?;
    let policy = config.policy()?;
    let res = config.reconstruction_resolution();
    let times: Vec<f64> = if config.times.is_empty() {
        vec![0.0, 1.0]
    } else {
        config.times.clone()
    };
    let nodes = sample_points(config, &v0);
    let d = v0.grid().d();

    let mut report = CommandReport::default();
    for &t in &times {
        let evolved = propagator::evolve(&v0, t, &policy)?;
        let points: Vec<SpacetimePoint> = nodes
            .iter()
            .map(|(_, coords)| SpacetimePoint {
                t,
                s: coords[0],
                x: coords[1..1 + d].to_vec(),
                y: coords[1 + d..].to_vec(),
            })
            .collect();
        let reconstructed = solution_via_cone_many(&data, &points, &res)?;
        let gap = nodes
            .iter()
            .zip(&reconstructed)
            .map(|((flat, _), cone_value)| (evolved.values()[*flat] - cone_value).norm())
            .fold(0.0, f64::max);
        let tolerance = if t == 0.0 {
            config.verify.cross_tolerance_initial
        } else {
            config.verify.cross_tolerance
        };
        report.push(
            format!("cross-check(t={t})"),
            format!(
                "max |cone - propagator| over {} points: {gap:.3e} (tolerance {tolerance:.1e})",
                nodes.len()
            ),
            gap < tolerance,
        );
    }
    Ok(report)
}

fn uniform_trajectory(config: &RunConfig, scale: f64) -> Result<Trajectory> {
    let times: Vec<f64> = config.times.iter().map(|t| t * scale).collect();
    let v0 = prepared_field(config)?;
    let policy = config.policy()?;
    propagator::evolve_trajectory(&v0, &times, &policy)
}

fn require_interior_times(config: &RunConfig, what: &str) -> Result<()> {
    if config.times.len() < 3 {
        return Err(Error::Usage(format!(
            "{what} needs at least three uniformly spaced entries in `times`, got {}",
            config.times.len()
        )));
    }
    Ok(())
}

/// Spectral residual of the configured trajectory at every interior time.
pub fn cmd_residual(config: &RunConfig) -> Result<CommandReport> {
    require_interior_times(config, "residual")?;
    let trajectory = uniform_trajectory(config, 1.0)?;
    let tolerance = config.verify.residual_tolerance;
    let mut report = CommandReport::default();
    for i in 1..trajectory.len() - 1 {
        let r = propagator::pde_residual(&trajectory, i)?;
        report.push(
            format!("residual(t={})", trajectory.field(i).time()),
            format!("relative spectral residual {r:.3e} (tolerance {tolerance:.1e})"),
            r < tolerance,
        );
    }
    Ok(report)
}

/// Halve the trajectory spacing twice and report the observed order of the
/// central-difference residual.
pub fn cmd_convergence(config: &RunConfig) -> Result<CommandReport> {
    require_interior_times(config, "convergence")?;
    let mid = (config.times.len() - 1) / 2;
    let mid = mid.clamp(1, config.times.len() - 2);
    let mut residuals = Vec::new();
    let mut report = CommandReport::default();
    for scale in [1.0, 0.5, 0.25] {
        let trajectory = uniform_trajectory(config, scale)?;
        let dt = trajectory.field(1).time() - trajectory.field(0).time();
        let r = propagator::pde_residual(&trajectory, mid)?;
        report.push(
            format!("residual(dt={dt})"),
            format!("relative spectral residual {r:.3e}"),
            true,
        );
        residuals.push(r);
    }
    let target = config.verify.convergence_order;
    let band = config.verify.convergence_band;
    if residuals.contains(&0.0) {
        report.push(
            "convergence-order",
            "residual identically zero; order undefined (trivial data)",
            true,
        );
        return Ok(report);
    }
    let first = (residuals[0] / residuals[1]).log2();
    let second = (residuals[1] / residuals[2]).log2();
    let mean = 0.5 * (residuals[0] / residuals[2]).log2();
    report.push(
        "convergence-order",
        format!(
            "observed order {mean:.3} (successive estimates {first:.3}, {second:.3}; target {target} within {band})"
        ),
        (mean - target).abs() <= band,
    );
    Ok(report)
}
