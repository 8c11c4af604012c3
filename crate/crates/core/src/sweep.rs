//! Parameter sweeps, 2-D grids and the one-way steering boundary search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{renyi2_entanglement, steering_report, SteeringReport, Tolerances, TwoModeCovariance};
use crate::laser::{steady_moments, LaserParams, SteadyStateMoments};

/// Bisection stops once the bracket is at most this wide.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Number of coarse subintervals scanned before bisection.
pub const BOUNDARY_SCAN_INTERVALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    Gain,
    Kappa,
    Eta,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Gain => "gain",
            Param::Kappa => "kappa",
            Param::Eta => "eta",
        }
    }

    pub fn parse(s: &str) -> Option<Param> {
        match s.to_ascii_lowercase().as_str() {
            "gain" | "a" => Some(Param::Gain),
            "kappa" | "k" => Some(Param::Kappa),
            "eta" | "e" => Some(Param::Eta),
            _ => None,
        }
    }
}

/// Uniformly spaced values of one parameter, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(param: Param, start: f64, end: f64, steps: usize) -> Self {
        Axis {
            param,
            start,
            end,
            steps,
        }
    }

    /// Parses `name:start:end:steps`, e.g. `kappa:0.1:20:100`.
    pub fn parse(s: &str) -> Result<Axis> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidSpec(format!("axis '{s}' is not name:start:end:steps"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let param = Param::parse(parts[0]).ok_or_else(bad)?;
        let start = parts[1].trim().parse().map_err(|_| bad())?;
        let end = parts[2].trim().parse().map_err(|_| bad())?;
        let steps = parts[3].trim().parse().map_err(|_| bad())?;
        let axis = Axis::new(param, start, end, steps);
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidSpec(format!("{} range must be finite", self.param.name())));
        }
        if self.start > self.end {
            return Err(Error::InvalidSpec(format!(
                "{} range start {} > end {}",
                self.param.name(),
                self.start,
                self.end
            )));
        }
        if self.steps == 0 || (self.steps == 1 && self.start != self.end) {
            return Err(Error::InvalidSpec(format!(
                "{} axis needs steps >= 2 (or 1 for a single point)",
                self.param.name()
            )));
        }
        let (lo, hi) = match self.param {
            Param::Eta => (0.0, 1.0),
            Param::Gain | Param::Kappa => (0.0, f64::INFINITY),
        };
        if self.start < lo || self.end > hi {
            return Err(Error::InvalidSpec(format!(
                "{} range [{}, {}] leaves [{lo}, {hi}]",
                self.param.name(),
                self.start,
                self.end
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.end
                } else {
                    self.start + (self.end - self.start) * (i as f64 / last as f64)
                }
            })
            .collect()
    }
}

/// Values held fixed during a sweep or grid. Exactly the parameters not
/// covered by an axis must be set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FixedParams {
    pub gain: Option<f64>,
    pub kappa: Option<f64>,
    pub eta: Option<f64>,
}

impl FixedParams {
    fn get(&self, p: Param) -> Option<f64> {
        match p {
            Param::Gain => self.gain,
            Param::Kappa => self.kappa,
            Param::Eta => self.eta,
        }
    }

    fn with(mut self, p: Param, v: f64) -> Self {
        match p {
            Param::Gain => self.gain = Some(v),
            Param::Kappa => self.kappa = Some(v),
            Param::Eta => self.eta = Some(v),
        }
        self
    }

    fn check_against(&self, axes: &[Param]) -> Result<()> {
        for p in [Param::Gain, Param::Kappa, Param::Eta] {
            let on_axis = axes.iter().filter(|&&a| a == p).count();
            match (on_axis, self.get(p)) {
                (0, None) => {
                    return Err(Error::InvalidSpec(format!("{} is neither swept nor fixed", p.name())))
                }
                (0, Some(_)) => {}
                (1, None) => {}
                (1, Some(_)) => {
                    return Err(Error::InvalidSpec(format!("{} is both swept and fixed", p.name())))
                }
                _ => return Err(Error::InvalidSpec(format!("{} appears on two axes", p.name()))),
            }
        }
        Ok(())
    }

    fn to_params(self) -> Result<LaserParams> {
        match (self.gain, self.kappa, self.eta) {
            (Some(a), Some(k), Some(e)) => {
                LaserParams::new(a, k, e).map_err(|e| Error::InvalidSpec(e.to_string()))
            }
            _ => Err(Error::InvalidSpec("incomplete parameter set".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub fixed: FixedParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis.validate()?;
        if self.axis.steps < 2 {
            return Err(Error::InvalidSpec("a sweep needs steps >= 2".into()));
        }
        self.fixed.check_against(&[self.axis.param])?;
        // Endpoints bound every sample of a monotone axis.
        for v in [self.axis.start, self.axis.end] {
            self.fixed.with(self.axis.param, v).to_params()?;
        }
        Ok(())
    }

    fn points(&self) -> Result<Vec<LaserParams>> {
        self.axis
            .values()
            .into_iter()
            .map(|v| self.fixed.with(self.axis.param, v).to_params())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Column axis (varies fastest).
    pub x: Axis,
    /// Row axis.
    pub y: Axis,
    pub fixed: FixedParams,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        self.fixed.check_against(&[self.x.param, self.y.param])?;
        for xv in [self.x.start, self.x.end] {
            for yv in [self.y.start, self.y.end] {
                self.fixed
                    .with(self.x.param, xv)
                    .with(self.y.param, yv)
                    .to_params()?;
            }
        }
        Ok(())
    }

    fn points(&self) -> Result<Vec<LaserParams>> {
        let xs = self.x.values();
        let mut out = Vec::with_capacity(xs.len() * self.y.steps);
        for yv in self.y.values() {
            for &xv in &xs {
                out.push(self.fixed.with(self.x.param, xv).with(self.y.param, yv).to_params()?);
            }
        }
        Ok(out)
    }
}

/// Every derived quantity at one stationary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMeasures {
    pub moments: SteadyStateMoments,
    pub covariance: TwoModeCovariance,
    pub nu_minus: f64,
    pub steering: SteeringReport,
    pub e2: f64,
    pub e2_minus_gmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoStationaryState,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NoStationaryState => "no_stationary_state",
        }
    }
}

/// One evaluated parameter point. `measures` is `None` when the point has no
/// stationary state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub params: LaserParams,
    pub measures: Option<PointMeasures>,
}

impl SweepRecord {
    pub fn status(&self) -> Status {
        if self.measures.is_some() {
            Status::Ok
        } else {
            Status::NoStationaryState
        }
    }
}

pub fn evaluate_point(params: &LaserParams, tol: &Tolerances) -> Result<PointMeasures> {
    let moments = steady_moments(params)?;
    let covariance = moments.covariance();
    let (nu_minus, _) = covariance.symplectic_eigenvalues()?;
    let steering = steering_report(&covariance, tol.steer)?;
    let e2 = renyi2_entanglement(&covariance)?;
    Ok(PointMeasures {
        moments,
        covariance,
        nu_minus,
        steering,
        e2,
        e2_minus_gmax: e2 - steering.gmax,
    })
}

/// Like [`evaluate_point`], but a point without a stationary state becomes a
/// flagged record instead of an error.
pub fn evaluate_record(params: &LaserParams, tol: &Tolerances) -> Result<SweepRecord> {
    match evaluate_point(params, tol) {
        Ok(m) => Ok(SweepRecord {
            params: *params,
            measures: Some(m),
        }),
        Err(Error::NoStationaryState { .. }) => Ok(SweepRecord {
            params: *params,
            measures: None,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub tolerances: Tolerances,
    /// Worker threads; 1 evaluates on the calling thread.
    pub threads: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tolerances: Tolerances::default(),
            threads: 1,
        }
    }
}

fn evaluate_all(points: &[LaserParams], opts: &SweepOptions) -> Result<Vec<SweepRecord>> {
    let tol = opts.tolerances;
    if opts.threads <= 1 {
        return points.iter().map(|p| evaluate_record(p, &tol)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    // Indexed collect keeps input order regardless of scheduling.
    pool.install(|| points.par_iter().map(|p| evaluate_record(p, &tol)).collect())
}

pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    evaluate_all(&spec.points()?, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major: record `(i, j)` is at `i * cols + j`, `i` indexing `y`.
    pub records: Vec<SweepRecord>,
}

impl Grid {
    pub fn get(&self, row: usize, col: usize) -> Option<&SweepRecord> {
        (row < self.rows && col < self.cols).then(|| &self.records[row * self.cols + col])
    }
}

pub fn run_grid(spec: &GridSpec, opts: &SweepOptions) -> Result<Grid> {
    spec.validate()?;
    let records = evaluate_all(&spec.points()?, opts)?;
    Ok(Grid {
        rows: spec.y.steps,
        cols: spec.x.steps,
        records,
    })
}

/// Locates the inversion `η*` in `[eta_lo, eta_hi]` at which backward
/// (c₂ → c₁) steering switches on or off, by bisection on `G₂₁(η) − ε_steer`.
///
/// The interval is first scanned at [`BOUNDARY_SCAN_INTERVALS`] uniform
/// subintervals and the sign change nearest `eta_hi` is refined. In the laser
/// family that is where backward steering vanishes as `η → 1`.
pub fn find_one_way_boundary(
    gain: f64,
    kappa: f64,
    eta_lo: f64,
    eta_hi: f64,
    tol: &Tolerances,
) -> Result<f64> {
    if !(eta_lo < eta_hi) {
        return Err(Error::NotFound);
    }
    let backward_steerable = |eta: f64| -> Result<bool> {
        let p = LaserParams::new(gain, kappa, eta)?;
        Ok(evaluate_point(&p, tol)?.steering.g21 > tol.steer)
    };
    let scan = Axis::new(Param::Eta, eta_lo, eta_hi, BOUNDARY_SCAN_INTERVALS + 1).values();
    let mut hi = eta_hi;
    let mut at_hi = backward_steerable(hi)?;
    let mut bracket = None;
    for &eta in scan.iter().rev().skip(1) {
        let here = backward_steerable(eta)?;
        if here != at_hi {
            bracket = Some((eta, hi, here));
            break;
        }
        hi = eta;
        at_hi = here;
    }
    let (mut lo, mut hi, at_lo) = bracket.ok_or(Error::NotFound)?;
    while hi - lo > BOUNDARY_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if backward_steerable(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
