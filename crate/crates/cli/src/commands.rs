use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use bohmflux::eigenmodes::WellShape;
use bohmflux::model::{CavityModel, ModelOptions};
use bohmflux::opspeed::speed_curve as compute_speed_curve;
use bohmflux::params::{load_config, regime_of, CavityParams, Regime, Units};
use bohmflux::stationary2d::Field2D;
use bohmflux::suite::{run_suite, Suite};
use bohmflux::trajectories::{auto_dt, ensemble, IntegrationConfig, TrajectorySet};
use bohmflux::wavepacket::{packet_first_order_modulus, packet_trajectory, PacketSpec};
use serde::Serialize;

use crate::output::{sidecar, Cell, Outputs, RunManifest, Table};
use crate::{
    Common, FieldArgs, Figure1Args, ModesArgs, Offset, PacketArgs, Shape, SpeedCurveArgs, TrajectoriesArgs, UsageError,
    ValidateArgs,
};

/// Samples kept per trajectory when the step count allows.
const SAMPLES_PER_TRAJECTORY: usize = 400;
/// Survival weight at which evanescent trajectories are dropped.
const WEIGHT_FLOOR: f64 = 1e-3;
/// Beat lengths covered by a propagative ensemble.
const BEATS: f64 = 1.25;

fn load_params(config: Option<&Path>) -> Result<CavityParams> {
    match config {
        None => Ok(CavityParams::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            load_config(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
        }
    }
}

fn build_model(p: &CavityParams, shape: Shape, grid_points: usize) -> Result<CavityModel> {
    let shape = match shape {
        Shape::Rectangular => WellShape::Rectangular,
        Shape::Parabolic => WellShape::Parabolic,
    };
    Ok(CavityModel::build(p, ModelOptions { shape, grid_points })?)
}

fn setup(common: &Common) -> Result<(CavityParams, CavityModel)> {
    let p = load_params(common.config.as_deref())?;
    let model = build_model(&p, common.shape, ModelOptions::default().grid_points)?;
    Ok((p, model))
}

/// Offset in natural units, against the field-facing parameters of `model`.
fn resolve_delta(offset: &Offset, model: &CavityModel) -> f64 {
    let p = model.params();
    match (offset.delta, offset.delta_over_j0) {
        (Some(d), _) => d,
        (None, Some(r)) => r * p.j0,
        (None, None) => p.delta0(),
    }
}

fn field_for(offset: &Offset, model: &CavityModel) -> Result<(f64, Field2D)> {
    let delta = resolve_delta(offset, model);
    let gamma = if offset.lossless { 0.0 } else { model.params().gamma };
    Ok((delta, model.field_at_delta(delta, gamma)?))
}

struct Run {
    start: Instant,
    subcommand: &'static str,
    outputs: Outputs,
}

impl Run {
    fn new(subcommand: &'static str) -> Self {
        Self { start: Instant::now(), subcommand, outputs: Outputs::default() }
    }

    fn finish<A: Serialize>(self, manifest: &Path, p: &CavityParams, config: Option<&Path>, args: &A, seed: Option<u64>) -> Result<()> {
        let m = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            config_hash: p.fingerprint(),
            config_path: config.map(Path::to_path_buf),
            overrides: serde_json::to_value(args)?,
            rng_seed: seed,
            outputs: self.outputs.into_files(),
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        crate::output::write_atomic(manifest, text.as_bytes()).map_err(|e| UsageError(format!("{e:#}")).into())
    }
}

#[derive(Serialize)]
struct ModesSummary {
    e_plus: f64,
    e_minus: f64,
    j0_eff: f64,
    e0_eff: f64,
    j0_requested: f64,
    j0_field: f64,
    well_depth: f64,
    main_fraction: Option<f64>,
    guide_centers_um: (f64, f64),
}

pub fn modes(a: &ModesArgs) -> Result<bool> {
    let mut run = Run::new("modes");
    let p = load_params(a.common.config.as_deref())?;
    let model = build_model(&p, a.common.shape, a.points)?;
    let b = &model.basis;
    let mut t = Table::new(&["y", "y_um", "V", "phi_plus", "phi_minus", "phi_m", "phi_a"]);
    for i in 0..b.y.len() {
        let (phi_m, phi_a) = match (b.phi_m(), b.phi_a()) {
            (Some(m), Some(a)) => (m[i], a[i]),
            _ => (FRAC_1_SQRT_2 * (b.phi_minus[i] + b.phi_plus[i]), FRAC_1_SQRT_2 * (b.phi_minus[i] - b.phi_plus[i])),
        };
        t.nums(&[b.y[i], p.units.length_to_um(b.y[i]), b.v[i], b.phi_plus[i], b.phi_minus[i], phi_m, phi_a]);
    }
    run.outputs.table(&a.out, &t)?;
    let g = &model.geometry;
    let summary = ModesSummary {
        e_plus: b.e_plus,
        e_minus: b.e_minus,
        j0_eff: b.j0_eff(),
        e0_eff: b.e0_eff(),
        j0_requested: p.j0,
        j0_field: model.params().j0,
        well_depth: g.well_depth,
        main_fraction: b.hybrid.as_ref().map(|h| h.main_fraction),
        guide_centers_um: (p.units.length_to_um(g.main_center()), p.units.length_to_um(g.aux_center())),
    };
    run.outputs.json(&sidecar(&a.out, "json"), &summary)?;
    run.finish(&sidecar(&a.out, "manifest.json"), &p, a.common.config.as_deref(), a, None)?;
    Ok(true)
}

/// `|Psi|^2` (and optionally velocity) on a regular grid over `[0, x_end] x [-y_half, y_half]`.
fn field_table(f: &Field2D, units: &Units, x_end: f64, y_half: f64, nx: usize, ny: usize, with_velocity: bool) -> Result<Table> {
    if nx < 2 || ny < 2 {
        return Err(UsageError("grid needs at least 2 points per axis".into()).into());
    }
    let mut t = if with_velocity {
        Table::new(&["x", "y", "x_um", "y_um", "re_psi", "im_psi", "density", "v_x", "v_y"])
    } else {
        Table::new(&["x", "y", "x_um", "y_um", "density"])
    };
    for i in 0..nx {
        let x = x_end * i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let y = -y_half + 2.0 * y_half * j as f64 / (ny - 1) as f64;
            let (xu, yu) = (units.length_to_um(x), units.length_to_um(y));
            let psi = f.field(x, y);
            if with_velocity {
                // nodal points have no guidance velocity
                let (vx, vy) = f.velocity(x, y).unwrap_or((f64::NAN, f64::NAN));
                t.nums(&[x, y, xu, yu, psi.re, psi.im, psi.norm_sqr(), vx, vy]);
            } else {
                t.nums(&[x, y, xu, yu, psi.norm_sqr()]);
            }
        }
    }
    Ok(t)
}

pub fn field(a: &FieldArgs) -> Result<bool> {
    let mut run = Run::new("field");
    let (p, model) = setup(&a.common)?;
    let (_, f) = field_for(&a.offset, &model)?;
    if !(a.x_extent > 0.0) {
        return Err(UsageError("--x-extent must be positive".into()).into());
    }
    let t = field_table(&f, &p.units, a.x_extent * f.length_scale(), model.geometry.separation, a.grid[0], a.grid[1], true)?;
    run.outputs.table(&a.out, &t)?;
    run.finish(&sidecar(&a.out, "manifest.json"), &p, a.common.config.as_deref(), a, None)?;
    Ok(true)
}

pub fn packet(a: &PacketArgs) -> Result<bool> {
    let mut run = Run::new("packet");
    let p = load_params(a.common.config.as_deref())?;
    let s = PacketSpec::from_params(&p)?;
    let scale = if a.natural_time { 1.0 } else { 1.0 / s.sigma };
    let tr = packet_trajectory(a.x0, (a.tspan[0] * scale, a.tspan[1] * scale), a.points, &s)?;
    let mut t = Table::new(&["t", "x", "v", "density", "t_ns", "x_um", "v_km_s"]);
    for i in 0..tr.t.len() {
        let rho = packet_first_order_modulus(tr.x[i], tr.t[i], &s).powi(2);
        let t_ns = tr.t[i] * p.units.duration_s_from_rate(1.0) * 1e9;
        t.nums(&[tr.t[i], tr.x[i], tr.v[i], rho, t_ns, p.units.length_to_um(tr.x[i]), p.units.velocity_to_km_s(tr.v[i])]);
    }
    run.outputs.table(&a.out, &t)?;
    run.finish(&sidecar(&a.out, "manifest.json"), &p, a.common.config.as_deref(), a, None)?;
    Ok(true)
}

/// Integration settings for one ensemble, with the longitudinal extent it covers.
#[derive(Debug, Clone, Copy, Serialize)]
struct Plan {
    regime: Regime,
    config: IntegrationConfig,
    x_extent: f64,
}

/// Evanescent ensembles run for three loss times (or until the survival
/// weight hits [`WEIGHT_FLOOR`]) over three decay lengths; the others cross
/// [`BEATS`] beat lengths `2 pi / k1` in about three transit times.
fn plan(f: &Field2D, p: &CavityParams, delta: f64, dt: Option<f64>, t_max: Option<f64>) -> Result<Plan> {
    let regime = regime_of(p.energy_at_delta(delta), p);
    let (mut config, x_extent) = match regime {
        Regime::Evanescent => {
            let x_extent = 3.0 * f.length_scale();
            let dt = match dt {
                Some(dt) => dt,
                None => auto_dt(f, x_extent)?,
            };
            let t_max = t_max.unwrap_or(if p.gamma > 0.0 { 3.0 / p.gamma } else { 1e3 * dt });
            (IntegrationConfig { weight_floor: WEIGHT_FLOOR, ..IntegrationConfig::new(dt, t_max) }, x_extent)
        }
        Regime::Propagative | Regime::Gap => {
            let k = f.wavevectors();
            let span = BEATS * 2.0 * PI / k.k1.norm();
            let v = k.k2.re / f.m();
            let dt = match dt {
                Some(dt) => dt,
                None => auto_dt(f, span)?,
            };
            let t_max = t_max.unwrap_or(3.0 * span / v);
            (IntegrationConfig { x_max: 1.01 * span, ..IntegrationConfig::new(dt, t_max) }, span)
        }
    };
    if !(config.dt > 0.0 && config.t_max > 0.0 && config.t_max.is_finite()) {
        return Err(UsageError(format!("need dt > 0 and finite t_max > 0, got dt {} t_max {}", config.dt, config.t_max)).into());
    }
    config.record_every = ((config.t_max / config.dt) / SAMPLES_PER_TRAJECTORY as f64).ceil().max(1.0) as usize;
    Ok(Plan { regime, config, x_extent })
}

fn trajectory_table(set: &TrajectorySet, units: &Units) -> Table {
    let mut t = Table::new(&["id", "t", "x_um", "y_um", "weight", "x", "y"]);
    for (id, tr) in set.trajectories.iter().enumerate() {
        for i in 0..tr.t.len() {
            t.row(&[
                Cell::Int(id as u64),
                Cell::Num(tr.t[i]),
                Cell::Num(units.length_to_um(tr.x[i])),
                Cell::Num(units.length_to_um(tr.y[i])),
                Cell::Num(tr.weight[i]),
                Cell::Num(tr.x[i]),
                Cell::Num(tr.y[i]),
            ]);
        }
    }
    t
}

#[derive(Serialize)]
struct EnsembleReport<'a> {
    delta: f64,
    delta_over_j0: f64,
    gamma: f64,
    plan: Plan,
    meta: &'a bohmflux::trajectories::EnsembleMeta,
    summary: &'a bohmflux::trajectories::EnsembleSummary,
    refined: usize,
    guide_centers_um: (f64, f64),
}

fn report<'a>(set: &'a TrajectorySet, f: &Field2D, model: &CavityModel, delta: f64, plan: Plan) -> EnsembleReport<'a> {
    let units = &model.params().units;
    EnsembleReport {
        delta,
        delta_over_j0: delta / model.params().j0,
        gamma: f.gamma(),
        plan,
        meta: &set.meta,
        summary: &set.summary,
        refined: set.trajectories.iter().filter(|t| t.dt < plan.config.dt).count(),
        guide_centers_um: (units.length_to_um(model.geometry.main_center()), units.length_to_um(model.geometry.aux_center())),
    }
}

pub fn trajectories(a: &TrajectoriesArgs) -> Result<bool> {
    let mut run = Run::new("trajectories");
    let (p, model) = setup(&a.common)?;
    let (delta, f) = field_for(&a.offset, &model)?;
    let plan = plan(&f, model.params(), delta, a.dt, a.t_max)?;
    let set = ensemble(&f, a.n, &plan.config, a.seed, &model.params().fingerprint())?;
    let units = &model.params().units;
    run.outputs.table(&a.out, &trajectory_table(&set, units))?;
    run.outputs.json(&sidecar(&a.out, "summary.json"), &report(&set, &f, &model, delta, plan))?;
    if let Some(g) = &a.background_grid {
        let t = field_table(&f, units, plan.x_extent, model.geometry.separation, g[0], g[1], false)?;
        run.outputs.table(&sidecar(&a.out, "background.csv"), &t)?;
    }
    run.finish(&sidecar(&a.out, "manifest.json"), &p, a.common.config.as_deref(), a, Some(a.seed))?;
    Ok(true)
}

/// `start:stop:step`, walking from `start` towards `stop` by `|step|`, both ends included.
pub fn parse_range(s: &str) -> std::result::Result<Vec<f64>, UsageError> {
    let bad = || UsageError(format!("expected start:stop:step, got `{s}`"));
    let parts: Vec<f64> = s.split(':').map(|x| x.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step != 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(bad());
    }
    let n = ((stop - start).abs() / step.abs() + 1e-9).floor() as usize + 1;
    if n > 1_000_000 {
        return Err(UsageError(format!("range `{s}` has {n} points")));
    }
    let dir = if stop >= start { 1.0 } else { -1.0 };
    Ok((0..n).map(|i| start + dir * step.abs() * i as f64).collect())
}

pub fn speed_curve(a: &SpeedCurveArgs) -> Result<bool> {
    let mut run = Run::new("speed-curve");
    let p = load_params(a.common.config.as_deref())?;
    let ratios = parse_range(&a.deltas)?;
    let deltas: Vec<f64> = ratios.iter().map(|r| r * p.j0).collect();
    let rows = compute_speed_curve(&deltas, &p).context("speed curve (offsets must satisfy Delta < -J0)")?;
    let mut t = Table::new(&[
        "delta_over_J0",
        "delta",
        "v_closed",
        "v_fit",
        "v_bohm_leak",
        "v_leak_estimate",
        "v_closed_km_s",
        "v_fit_km_s",
        "v_bohm_leak_km_s",
        "fit_method",
        "fit_residual_rms",
    ]);
    for r in &rows {
        t.row(&[
            Cell::Num(r.delta_over_j0),
            Cell::Num(r.delta),
            Cell::Num(r.v_closed),
            Cell::Num(r.v_fit),
            Cell::Num(r.v_bohm_leak),
            Cell::Num(r.v_leak_estimate.unwrap_or(f64::NAN)),
            Cell::Num(r.v_closed_km_s),
            Cell::Num(r.v_fit_km_s),
            Cell::Num(r.v_bohm_leak_km_s),
            Cell::Text(r.fit.method.as_str()),
            Cell::Num(r.fit.residual_rms),
        ]);
    }
    run.outputs.table(&a.out, &t)?;
    run.finish(&sidecar(&a.out, "manifest.json"), &p, a.common.config.as_deref(), a, None)?;
    Ok(true)
}

pub fn validate(a: &ValidateArgs) -> Result<bool> {
    let mut run = Run::new("validate");
    let p = load_params(a.config.as_deref())?;
    let suite: Suite = a.suite.parse().map_err(|e| UsageError(format!("{e}")))?;
    let report = run_suite(suite, &p)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &a.out {
        run.outputs.json(out, &report)?;
        run.finish(&sidecar(out, "manifest.json"), &p, a.config.as_deref(), a, None)?;
    }
    Ok(report.passed)
}

/// The two panels: a propagative offset and an evanescent one.
const PANELS: [(&str, f64); 2] = [("propagative", 2.0), ("evanescent", -2.0)];

pub fn figure1(a: &Figure1Args) -> Result<bool> {
    let mut run = Run::new("figure1");
    std::fs::create_dir_all(&a.out).map_err(|e| UsageError(format!("cannot create {}: {e}", a.out.display())))?;
    let (p, model) = setup(&a.common)?;
    let fp = model.params();
    let mut reports = serde_json::Map::new();
    for (name, ratio) in PANELS {
        let delta = ratio * fp.j0;
        let f = model.field_at_delta(delta, fp.gamma)?;
        let plan = plan(&f, fp, delta, None, None)?;
        let set = ensemble(&f, a.n, &plan.config, a.seed, &fp.fingerprint())?;
        run.outputs.table(&panel_path(&a.out, name, "csv"), &trajectory_table(&set, &fp.units))?;
        let bg = field_table(&f, &fp.units, plan.x_extent, model.geometry.separation, a.grid[0], a.grid[1], false)?;
        run.outputs.table(&panel_path(&a.out, name, "density.csv"), &bg)?;
        reports.insert(name.into(), serde_json::to_value(report(&set, &f, &model, delta, plan))?);
    }
    run.outputs.json(&a.out.join("summary.json"), &reports)?;
    run.finish(&a.out.join("manifest.json"), &p, a.common.config.as_deref(), a, Some(a.seed))?;
    Ok(true)
}

fn panel_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_walk_towards_stop() {
        let r = parse_range("-1.5:-20:0.5").unwrap();
        assert_eq!(r.len(), 38);
        assert_eq!(r[0], -1.5);
        assert!((r[37] + 20.0).abs() < 1e-12);
        assert_eq!(parse_range("1:2:-0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("1:2:0").is_err());
        assert!(parse_range("a:2:1").is_err());
    }
}
