//! Time evolution of the first and second moments of the two cavity modes.
//!
//! Time is in ms and rates in kHz, so rates enter the equations unscaled.
//! The moment equations close on themselves; integrating them from the
//! vacuum and solving their stationary linear system give two routes to the
//! steady state that are independent of the closed forms in [`crate::laser`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::double_double::DoubleDouble;
use crate::error::{Error, Result};
use crate::gaussian::TOL_NUM;
use crate::laser::{decay_rates, populations_unchecked, LaserParams, SteadyStateMoments};

/// Component magnitude beyond which an integration is declared divergent.
pub const OVERFLOW_GUARD: f64 = 1e12;

/// Largest admissible `dt · (fastest rate)`.
pub const STABILITY_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentState {
    /// ⟨c₁⟩
    pub c1: Complex64,
    /// ⟨c₂⟩
    pub c2: Complex64,
    /// ⟨c₁²⟩
    pub c1sq: Complex64,
    /// ⟨c₂²⟩
    pub c2sq: Complex64,
    /// ⟨c₁†c₁⟩
    pub n1: f64,
    /// ⟨c₂†c₂⟩
    pub n2: f64,
    /// ⟨c₁c₂⟩
    pub m12: Complex64,
    /// ⟨c₁c₂†⟩
    pub x12: Complex64,
}

impl MomentState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Embeds stationary moments; every other component is zero.
    pub fn from_steady(moments: &SteadyStateMoments) -> Self {
        MomentState {
            n1: moments.n1,
            n2: moments.n2,
            m12: Complex64::new(moments.m, 0.0),
            ..Self::default()
        }
    }

    pub fn steady_part(&self) -> SteadyStateMoments {
        SteadyStateMoments {
            n1: self.n1,
            n2: self.n2,
            m: self.m12.re,
        }
    }

    /// `self + h·other`, component-wise.
    pub fn add_scaled(&self, other: &MomentState, h: f64) -> MomentState {
        MomentState {
            c1: self.c1 + other.c1 * h,
            c2: self.c2 + other.c2 * h,
            c1sq: self.c1sq + other.c1sq * h,
            c2sq: self.c2sq + other.c2sq * h,
            n1: self.n1 + other.n1 * h,
            n2: self.n2 + other.n2 * h,
            m12: self.m12 + other.m12 * h,
            x12: self.x12 + other.x12 * h,
        }
    }

    /// Largest absolute value over all real and imaginary parts.
    pub fn max_abs(&self) -> f64 {
        self.components().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|v| v.is_finite())
    }

    /// Real and imaginary parts in export order:
    /// `c1, c2, c1sq, c2sq` (re, im), `n1, n2`, `m12, x12` (re, im).
    pub fn components(&self) -> [f64; 14] {
        [
            self.c1.re,
            self.c1.im,
            self.c2.re,
            self.c2.im,
            self.c1sq.re,
            self.c1sq.im,
            self.c2sq.re,
            self.c2sq.im,
            self.n1,
            self.n2,
            self.m12.re,
            self.m12.im,
            self.x12.re,
            self.x12.im,
        ]
    }

    pub fn from_components(v: &[f64; 14]) -> Self {
        MomentState {
            c1: Complex64::new(v[0], v[1]),
            c2: Complex64::new(v[2], v[3]),
            c1sq: Complex64::new(v[4], v[5]),
            c2sq: Complex64::new(v[6], v[7]),
            n1: v[8],
            n2: v[9],
            m12: Complex64::new(v[10], v[11]),
            x12: Complex64::new(v[12], v[13]),
        }
    }
}

/// Rates shared by every right-hand-side evaluation for one parameter set.
#[derive(Debug, Clone, Copy)]
struct Rates {
    gamma1: f64,
    gamma2: f64,
    /// `Aρ_ul`
    coupling: f64,
    /// `Aρ_uu`
    pump: f64,
}

impl Rates {
    fn new(params: &LaserParams) -> Self {
        let p = populations_unchecked(params.eta());
        let (gamma1, gamma2) = decay_rates(params);
        Rates {
            gamma1,
            gamma2,
            coupling: params.gain() * p.coherence,
            pump: params.gain() * p.upper,
        }
    }

    fn fastest(&self, kappa: f64) -> f64 {
        self.gamma1
            .abs()
            .max(self.gamma2.abs())
            .max(self.coupling.abs())
            .max(kappa)
    }

    fn derivative(&self, s: &MomentState) -> MomentState {
        let half = 0.5 * self.coupling;
        let mean_gamma = 0.5 * (self.gamma1 + self.gamma2);
        let two_re_m = 2.0 * s.m12.re;
        MomentState {
            c1: -0.5 * self.gamma1 * s.c1 - half * s.c2.conj(),
            c2: -0.5 * self.gamma2 * s.c2 + half * s.c1.conj(),
            // As printed, both ⟨c_j²⟩ equations couple to ⟨c₁c₂†⟩.
            c1sq: -self.gamma1 * s.c1sq - self.coupling * s.x12,
            c2sq: -self.gamma2 * s.c2sq + self.coupling * s.x12,
            n1: -self.gamma1 * s.n1 - half * two_re_m + self.pump,
            n2: -self.gamma2 * s.n2 + half * two_re_m,
            m12: -mean_gamma * s.m12 + half * (s.n1 - s.n2 + 1.0),
            x12: -mean_gamma * s.x12 + half * (s.c1sq - s.c2sq.conj()),
        }
    }
}

/// Time derivative of every moment.
pub fn moment_derivative(state: &MomentState, params: &LaserParams) -> MomentState {
    Rates::new(params).derivative(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Step size in ms.
    pub dt: f64,
    /// Final time in ms.
    pub t_max: f64,
    /// Steady state is declared once every derivative component is below this.
    pub convergence_tol: f64,
    /// Keep every `sample_stride`-th step in the trajectory.
    pub sample_stride: usize,
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dt) || !positive(self.t_max) || !positive(self.convergence_tol) {
            return Err(Error::InvalidParameter(format!(
                "dt, t_max and convergence_tol must be finite and > 0 (got {}, {}, {})",
                self.dt, self.t_max, self.convergence_tol
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter("sample_stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Largest step accepted by [`integrate`] for `params`, or `None` when every rate vanishes.
pub fn max_stable_dt(params: &LaserParams) -> Option<f64> {
    let fastest = Rates::new(params).fastest(params.kappa());
    (fastest > 0.0).then(|| STABILITY_FACTOR / fastest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `(t, state)` pairs; the first is the initial state, the last the final one.
    pub samples: Vec<(f64, MomentState)>,
    pub converged: bool,
    pub final_time: f64,
    pub final_state: MomentState,
    pub steps: u64,
}

/// Fixed-step classical RK4 from `init` until the derivative drops below
/// `cfg.convergence_tol` or `cfg.t_max` is reached.
pub fn integrate(
    params: &LaserParams,
    init: &MomentState,
    cfg: &IntegrationConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let rates = Rates::new(params);
    if let Some(max_dt) = max_stable_dt(params) {
        if cfg.dt > max_dt {
            return Err(Error::StepTooLarge { dt: cfg.dt, max_dt });
        }
    }

    let dt = cfg.dt;
    let max_steps = (cfg.t_max / dt * (1.0 - 1e-12)).ceil() as u64;
    let mut state = *init;
    let mut samples = vec![(0.0, state)];
    let mut steps = 0u64;
    let mut converged = false;

    loop {
        let k1 = rates.derivative(&state);
        if k1.max_abs() < cfg.convergence_tol {
            converged = true;
            break;
        }
        if steps >= max_steps {
            break;
        }
        let k2 = rates.derivative(&state.add_scaled(&k1, 0.5 * dt));
        let k3 = rates.derivative(&state.add_scaled(&k2, 0.5 * dt));
        let k4 = rates.derivative(&state.add_scaled(&k3, dt));
        let increment = k1
            .add_scaled(&k2, 2.0)
            .add_scaled(&k3, 2.0)
            .add_scaled(&k4, 1.0);
        state = state.add_scaled(&increment, dt / 6.0);
        steps += 1;

        let t = steps as f64 * dt;
        if !state.is_finite() || state.max_abs() > OVERFLOW_GUARD {
            return Err(Error::Diverged { t });
        }
        if steps.is_multiple_of(cfg.sample_stride as u64) {
            check_occupations(&state, t)?;
            samples.push((t, state));
        }
    }

    let final_time = steps as f64 * dt;
    check_occupations(&state, final_time)?;
    if samples.last().map(|(t, _)| *t) != Some(final_time) {
        samples.push((final_time, state));
    }
    Ok(Trajectory {
        samples,
        converged,
        final_time,
        final_state: state,
        steps,
    })
}

fn check_occupations(state: &MomentState, t: f64) -> Result<()> {
    let floor = -TOL_NUM * (1.0 + state.n1.abs().max(state.n2.abs()));
    if state.n1 < floor || state.n2 < floor {
        Err(Error::NegativeOccupation { t })
    } else {
        Ok(())
    }
}

/// Stationary `(n₁, n₂, m)` from the 3×3 linear system obtained by setting the
/// population and cross-moment derivatives to zero with real `m`.
///
/// The system is ill-conditioned at large `A/κ` and small `η` (the decay rates
/// nearly cancel against the coupling), so its entries are formed and
/// eliminated in double-double arithmetic.
pub fn steady_state_linear_solve(params: &LaserParams) -> Result<SteadyStateMoments> {
    if !params.has_stationary_state() || params.eta() < 0.0 {
        return Err(Error::NoStationaryState {
            gain: params.gain(),
            kappa: params.kappa(),
            eta: params.eta(),
        });
    }
    let dd = DoubleDouble::from;
    let (gain, kappa, eta) = (dd(params.gain()), dd(params.kappa()), dd(params.eta()));
    let (one, half) = (dd(1.0), dd(0.5));
    let pump = half * gain * (one - eta);
    let coupling = half * gain * ((one - eta) * (one + eta)).sqrt();
    let gamma1 = kappa - pump;
    let gamma2 = kappa + half * gain * (one + eta);
    let mean_gamma = kappa + half * gain * eta;
    let mut a = [
        [gamma1, DoubleDouble::ZERO, coupling],
        [DoubleDouble::ZERO, gamma2, -coupling],
        [-(half * coupling), half * coupling, mean_gamma],
    ];
    let mut b = [pump, DoubleDouble::ZERO, half * coupling];
    let [n1, n2, m] = solve3(&mut a, &mut b)?;
    Ok(SteadyStateMoments {
        n1: n1.to_f64(),
        n2: n2.to_f64(),
        m: m.to_f64(),
    })
}

/// Gaussian elimination with partial pivoting.
fn solve3(a: &mut [[DoubleDouble; 3]; 3], b: &mut [DoubleDouble; 3]) -> Result<[DoubleDouble; 3]> {
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs().to_f64()));
    if scale == 0.0 {
        return Err(Error::SingularSystem);
    }
    let mut det = DoubleDouble::from(1.0);
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().to_f64().total_cmp(&a[j][col].abs().to_f64()))
            .unwrap_or(col);
        if pivot != col {
            a.swap(pivot, col);
            b.swap(pivot, col);
            det = -det;
        }
        det = det * a[col][col];
        if a[col][col].to_f64() == 0.0 {
            return Err(Error::SingularSystem);
        }
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, &src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst = *dst - factor * src;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    if det.abs().to_f64() < 1e-12 * scale.powi(3) {
        return Err(Error::SingularSystem);
    }
    let mut x = [DoubleDouble::ZERO; 3];
    for row in (0..3).rev() {
        let tail = (row + 1..3).fold(DoubleDouble::ZERO, |acc, k| acc + a[row][k] * x[k]);
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}
