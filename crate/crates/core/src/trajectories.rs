//! Bohmian trajectories in the stationary field, with survival weights for leakage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stationary2d::Field2D;
use crate::stats::TabulatedCdf;

/// Points of the table used for Born-rule seeding.
const SEED_TABLE_POINTS: usize = 8001;

/// Times a trajectory that trips the step guard is retried at a quarter of the step.
pub const MAX_REFINEMENTS: u32 = 5;

/// Relative density above which [`auto_dt`] looks for the fastest flow.
pub const AUTO_DT_DENSITY: f64 = 1e-3;

/// A planar velocity field the integrator can follow.
pub trait VelocityField: Sync {
    /// Guidance velocity; `Err(Error::Nodal)` marks a singular point.
    fn velocity(&self, x: f64, y: f64) -> Result<(f64, f64)>;
    /// Loss rate entering the survival weight `exp(-Gamma t)`.
    fn loss_rate(&self) -> f64;
    /// Transverse domain `|y| <= limit`.
    fn y_limit(&self) -> f64;
    /// Length `L` against which step displacements are judged.
    fn length_scale(&self) -> f64;
}

impl VelocityField for Field2D {
    fn velocity(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        Field2D::velocity(self, x, y)
    }

    fn loss_rate(&self) -> f64 {
        self.gamma()
    }

    fn y_limit(&self) -> f64 {
        self.half_width()
    }

    fn length_scale(&self) -> f64 {
        Field2D::length_scale(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Integration stops once `exp(-Gamma t)` drops below this.
    pub weight_floor: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
    /// Downstream end of the domain; `f64::INFINITY` for none.
    pub x_max: f64,
}

impl IntegrationConfig {
    pub fn new(dt: f64, t_max: f64) -> Self {
        Self { dt, t_max, weight_floor: 0.0, record_every: 1, x_max: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    LeftDomain,
    WeightFloor,
    MaxTime,
    Singular,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::LeftDomain => "left-domain",
            Termination::WeightFloor => "weight-floor",
            Termination::MaxTime => "max-time",
            Termination::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: (f64, f64),
    /// Step actually used (smaller than the configured one after refinement).
    pub dt: f64,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> (f64, f64, f64) {
        let i = self.t.len() - 1;
        (self.t[i], self.x[i], self.y[i])
    }

    /// First crossing of the line `x = station`, linearly interpolated: `(t, y)`.
    pub fn crossing(&self, station: f64) -> Option<(f64, f64)> {
        self.x.windows(2).enumerate().find_map(|(i, w)| {
            if (w[0] - station) * (w[1] - station) <= 0.0 && w[0] != w[1] {
                let f = (station - w[0]) / (w[1] - w[0]);
                Some((self.t[i] + f * (self.t[i + 1] - self.t[i]), self.y[i] + f * (self.y[i + 1] - self.y[i])))
            } else {
                None
            }
        })
    }
}

/// Classic fixed-step RK4 along the guidance field from `seed` at `t = 0`.
pub fn integrate<V: VelocityField>(field: &V, seed: (f64, f64), cfg: &IntegrationConfig) -> Result<Trajectory> {
    if cfg.record_every == 0 {
        return Err(Error::InvalidParameter { name: "record_every", reason: "must be at least 1".into() });
    }
    let gamma = field.loss_rate();
    let mut tr = Trajectory { seed, dt: cfg.dt, t: vec![0.0], x: vec![seed.0], y: vec![seed.1], weight: vec![1.0], termination: Termination::MaxTime };
    let mut recorded = 0;
    let (termination, last) = advance(field, seed, cfg, |n, t, x, y| {
        if n % cfg.record_every == 0 {
            tr.t.push(t);
            tr.x.push(x);
            tr.y.push(y);
            tr.weight.push((-gamma * t).exp());
            recorded = n;
        }
        false
    })?;
    tr.termination = termination;
    // keep the final state even when it falls between recording strides
    let (n, t, x, y) = last;
    if n != recorded {
        tr.t.push(t);
        tr.x.push(x);
        tr.y.push(y);
        tr.weight.push((-gamma * t).exp());
    }
    Ok(tr)
}

/// First crossing `(t, y)` of each line `x = stations[i]`, without storing the path.
pub fn station_crossings<V: VelocityField>(
    field: &V,
    seed: (f64, f64),
    cfg: &IntegrationConfig,
    stations: &[f64],
) -> Result<Vec<Option<(f64, f64)>>> {
    let mut prev = (0.0, seed.0, seed.1);
    let mut hits = vec![None; stations.len()];
    let mut open = stations.len();
    advance(field, seed, cfg, |_, t, x, y| {
        if prev.1 != x {
            for (hit, &station) in hits.iter_mut().zip(stations) {
                if hit.is_none() && (prev.1 - station) * (x - station) <= 0.0 {
                    let f = (station - prev.1) / (x - prev.1);
                    *hit = Some((prev.0 + f * (t - prev.0), prev.2 + f * (y - prev.2)));
                    open -= 1;
                }
            }
        }
        prev = (t, x, y);
        open == 0
    })?;
    Ok(hits)
}

/// Runs the RK4 loop, handing every accepted state `(step, t, x, y)` to
/// `observe`; a `true` return stops early. Returns the termination reason and
/// the last accepted state.
fn advance<V, F>(field: &V, seed: (f64, f64), cfg: &IntegrationConfig, mut observe: F) -> Result<(Termination, (usize, f64, f64, f64))>
where
    V: VelocityField,
    F: FnMut(usize, f64, f64, f64) -> bool,
{
    if !(cfg.dt > 0.0 && cfg.t_max > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: "need dt > 0 and t_max > 0".into() });
    }
    let (x0, y0) = seed;
    if !(x0 >= 0.0 && x0 <= cfg.x_max && y0.abs() <= field.y_limit()) {
        return Err(Error::InvalidParameter { name: "seed", reason: format!("({x0}, {y0}) outside the domain") });
    }
    // a singular start is an error, later nodes only stop the path
    field.velocity(x0, y0)?;
    let limit = field.length_scale() / 10.0;
    let gamma = field.loss_rate();
    let dt = cfg.dt;
    let steps = (cfg.t_max / dt).ceil() as usize;

    let stage = |x: f64, y: f64| -> Result<Option<(f64, f64)>> {
        match field.velocity(x, y) {
            Ok(v) => {
                let d = v.0.hypot(v.1) * dt;
                if d > limit {
                    Err(Error::StepTooLarge { displacement: d, limit })
                } else {
                    Ok(Some(v))
                }
            }
            Err(Error::Nodal { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let step = |x: f64, y: f64| -> Result<Option<(f64, f64)>> {
        let Some(k1) = stage(x, y)? else { return Ok(None) };
        let Some(k2) = stage(x + 0.5 * dt * k1.0, y + 0.5 * dt * k1.1)? else { return Ok(None) };
        let Some(k3) = stage(x + 0.5 * dt * k2.0, y + 0.5 * dt * k2.1)? else { return Ok(None) };
        let Some(k4) = stage(x + dt * k3.0, y + dt * k3.1)? else { return Ok(None) };
        Ok(Some((
            x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            y + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )))
    };

    let mut last = (0, 0.0, x0, y0);
    for n in 1..=steps {
        let t = n as f64 * dt;
        let Some((x, y)) = step(last.2, last.3)? else {
            return Ok((Termination::Singular, last));
        };
        if x < 0.0 || x > cfg.x_max || y.abs() > field.y_limit() {
            return Ok((Termination::LeftDomain, last));
        }
        if (-gamma * t).exp() < cfg.weight_floor {
            return Ok((Termination::WeightFloor, last));
        }
        last = (n, t, x, y);
        if observe(n, t, x, y) {
            return Ok((Termination::LeftDomain, last));
        }
    }
    Ok((Termination::MaxTime, last))
}

/// Born-rule seeds `(0, y0)` with `y0 ~ |Psi(0, y)|^2`, deterministic in `rng_seed`.
pub fn sample_seeds(field: &Field2D, n: usize, rng_seed: u64) -> Result<Vec<(f64, f64)>> {
    let cdf = entrance_cdf(field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    Ok((0..n).map(|_| (0.0, cdf.quantile(rng.random::<f64>()))).collect())
}

/// Normalized `|Psi(0, y)|^2` over the transverse domain.
pub fn entrance_cdf(field: &Field2D) -> Result<TabulatedCdf> {
    let l = field.half_width();
    TabulatedCdf::from_fn(-l, l, SEED_TABLE_POINTS, |y| field.density(0.0, y))
}

/// `|Psi(x, .)|^2` normalized over the transverse domain.
pub fn station_cdf(field: &Field2D, x: f64) -> Result<TabulatedCdf> {
    let l = field.half_width();
    TabulatedCdf::from_fn(-l, l, SEED_TABLE_POINTS, |y| field.density(x, y))
}

/// Step size with `max |v| dt = L / 100`, taking `max |v|` over the region the
/// ensemble occupies (`|Psi|^2` above `AUTO_DT_DENSITY` of the column peak)
/// for `0 <= x <= x_extent`.
///
/// Near-nodal corners are excluded: the speed diverges there, and the
/// per-step guard in [`integrate`] still catches any path that strays into them.
pub fn auto_dt(field: &Field2D, x_extent: f64) -> Result<f64> {
    if !(x_extent >= 0.0 && x_extent.is_finite()) {
        return Err(Error::InvalidParameter { name: "x_extent", reason: "must be finite and non-negative".into() });
    }
    let l = field.half_width();
    let (nx, ny) = (41, 801);
    let ys: Vec<f64> = (0..ny).map(|j| -l + 2.0 * l * j as f64 / (ny - 1) as f64).collect();
    let mut vmax = 0.0f64;
    for i in 0..nx {
        let x = x_extent * i as f64 / (nx - 1) as f64;
        // the threshold follows each column's own peak, since the whole
        // profile decays with depth in the evanescent regime
        let column: Vec<f64> = ys.iter().map(|&y| field.density(x, y)).collect();
        let peak = column.iter().copied().fold(0.0, f64::max);
        for (&y, &d) in ys.iter().zip(&column) {
            if d > AUTO_DT_DENSITY * peak {
                if let Ok((vx, vy)) = field.velocity(x, y) {
                    vmax = vmax.max(vx.hypot(vy));
                }
            }
        }
    }
    if !(vmax > 0.0) {
        // frozen field: any step is exact
        return Ok(field.length_scale().min(1e12));
    }
    Ok(field.length_scale() / (100.0 * vmax))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleMeta {
    pub params_hash: String,
    pub rng_seed: u64,
    pub n: usize,
    pub config: IntegrationConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    /// Fraction of trajectories seeded on the main side that cross into the
    /// auxiliary half-plane.
    pub aux_fraction: f64,
    /// Mean of the deepest `x` reached.
    pub mean_max_depth: f64,
    pub left_domain: usize,
    pub weight_floor: usize,
    pub max_time: usize,
    pub singular: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySet {
    pub meta: EnsembleMeta,
    pub summary: EnsembleSummary,
    pub trajectories: Vec<Trajectory>,
}

/// Flux-weighted station samples `(y, w)` for the equivariance check:
/// `w = v_x(0, y0) / v_x(X, y)` turns Born-seeded crossings into draws from
/// `|Psi(X, y)|^2`. Seeds that never reach the station are dropped.
pub fn station_samples(field: &Field2D, seeds: &[(f64, f64)], cfg: &IntegrationConfig, station: f64) -> Result<Vec<(f64, f64)>> {
    let hits: Vec<Vec<Option<(f64, f64)>>> = seeds
        .par_iter()
        .map(|&s| crossings_refined(field, s, cfg, &[station]))
        .collect::<Result<_>>()?;
    Ok(seeds
        .iter()
        .zip(hits)
        .filter_map(|(s, hit)| {
            let (_, y) = hit[0]?;
            density_weight(field, s.1, station, y).map(|w| (y, w))
        })
        .collect())
}

/// Weight `v_x(0, y0) / v_x(X, y)` converting a crossing of a Born-seeded
/// flux line into a sample of the density at the station.
fn density_weight(field: &Field2D, y0: f64, station: f64, y: f64) -> Option<f64> {
    let v0 = field.velocity_at_entrance(y0).ok()?;
    let vx = field.velocity(station, y).ok()?.0;
    (v0 > 0.0 && vx > 0.0).then(|| v0 / vx)
}

/// Integrates each seed in parallel; results keep the seed order.
///
/// A path that brushes a near-node can outrun the step guard; it alone is
/// redone with `dt / 4` (and `record_every * 4`, so sample times still match
/// the rest of the ensemble), at most [`MAX_REFINEMENTS`] times.
pub fn integrate_all<V: VelocityField>(field: &V, seeds: &[(f64, f64)], cfg: &IntegrationConfig) -> Result<Vec<Trajectory>> {
    seeds.par_iter().map(|&s| integrate_refined(field, s, cfg)).collect()
}

pub fn integrate_refined<V: VelocityField>(field: &V, seed: (f64, f64), cfg: &IntegrationConfig) -> Result<Trajectory> {
    let mut c = *cfg;
    for level in 0..=MAX_REFINEMENTS {
        match integrate(field, seed, &c) {
            Err(Error::StepTooLarge { .. }) if level < MAX_REFINEMENTS => {
                c.dt /= 4.0;
                c.record_every *= 4;
            }
            other => return other,
        }
    }
    unreachable!("the last refinement level returns")
}

fn crossings_refined(field: &Field2D, seed: (f64, f64), cfg: &IntegrationConfig, stations: &[f64]) -> Result<Vec<Option<(f64, f64)>>> {
    let mut c = *cfg;
    for level in 0..=MAX_REFINEMENTS {
        match station_crossings(field, seed, &c, stations) {
            Err(Error::StepTooLarge { .. }) if level < MAX_REFINEMENTS => c.dt /= 4.0,
            other => return other,
        }
    }
    unreachable!("the last refinement level returns")
}

/// `n` Born-seeded trajectories with summary statistics.
pub fn ensemble(field: &Field2D, n: usize, cfg: &IntegrationConfig, rng_seed: u64, params_hash: &str) -> Result<TrajectorySet> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "need at least one trajectory".into() });
    }
    let seeds = sample_seeds(field, n, rng_seed)?;
    let trajectories = integrate_all(field, &seeds, cfg)?;
    let summary = summarize(&trajectories, field.aux_sign());
    Ok(TrajectorySet {
        meta: EnsembleMeta { params_hash: params_hash.to_string(), rng_seed, n, config: *cfg },
        summary,
        trajectories,
    })
}

/// `aux_sign` is the sign of `y` on the auxiliary side.
pub fn summarize(trajectories: &[Trajectory], aux_sign: f64) -> EnsembleSummary {
    let n = trajectories.len().max(1) as f64;
    let count = |k: Termination| trajectories.iter().filter(|t| t.termination == k).count();
    EnsembleSummary {
        aux_fraction: trajectories
            .iter()
            .filter(|t| aux_sign * t.seed.1 <= 0.0 && t.y.iter().any(|&y| aux_sign * y > 0.0))
            .count() as f64
            / n,
        mean_max_depth: trajectories.iter().map(|t| t.x.iter().copied().fold(0.0, f64::max)).sum::<f64>() / n,
        left_domain: count(Termination::LeftDomain),
        weight_floor: count(Termination::WeightFloor),
        max_time: count(Termination::MaxTime),
        singular: count(Termination::Singular),
    }
}

/// Density-weighted mean `y` of the crossings at each station (weights as in
/// [`station_samples`]); `None` where no trajectory arrives.
pub fn station_mean_y(field: &Field2D, seeds: &[(f64, f64)], cfg: &IntegrationConfig, stations: &[f64]) -> Result<Vec<Option<f64>>> {
    let hits: Vec<Vec<Option<(f64, f64)>>> = seeds
        .par_iter()
        .map(|&s| crossings_refined(field, s, cfg, stations))
        .collect::<Result<_>>()?;
    Ok(stations
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let (mut sw, mut swy) = (0.0, 0.0);
            for (s, h) in seeds.iter().zip(&hits) {
                if let Some((_, y)) = h[i] {
                    if let Some(w) = density_weight(field, s.1, x, y) {
                        sw += w;
                        swy += w * y;
                    }
                }
            }
            (sw > 0.0).then(|| swy / sw)
        })
        .collect())
}

/// Beat period along `x` from the zero crossings of the mean transverse
/// position (period = twice the mean spacing between crossings).
pub fn beat_period(stations: &[f64], mean_y: &[Option<f64>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = stations.iter().zip(mean_y).filter_map(|(&x, y)| y.map(|y| (x, y))).collect();
    let zeros: Vec<f64> = pts
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .map(|w| w[0].0 - w[0].1 * (w[1].0 - w[0].0) / (w[1].1 - w[0].1))
        .collect();
    if zeros.len() < 2 {
        return None;
    }
    Some(2.0 * (zeros[zeros.len() - 1] - zeros[0]) / (zeros.len() - 1) as f64)
}

/// Smallest distance between any two of the first `k` trajectories at common sample times.
pub fn min_pairwise_separation(trajectories: &[Trajectory], k: usize) -> f64 {
    let set = &trajectories[..k.min(trajectories.len())];
    let mut best = f64::INFINITY;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            if a.seed == b.seed {
                continue;
            }
            for j in 0..a.t.len().min(b.t.len()) {
                if a.t[j] == b.t[j] {
                    best = best.min((a.x[j] - b.x[j]).hypot(a.y[j] - b.y[j]));
                }
            }
        }
    }
    best
}
