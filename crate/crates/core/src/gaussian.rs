//! Two-mode Gaussian states in standard form.
//!
//! Quadratures are `x = c† + c` and `y = i(c† − c)`, so the vacuum has unit
//! variance. A standard-form covariance matrix is
//!
//! ```text
//!     | α₁ 0   β   0 |
//! σ = | 0  α₁  0  −β |
//!     | β  0   α₂  0 |
//!     | 0  −β  0   α₂|
//! ```
//!
//! and every quantity in this module is a function of the triple `(α₁, α₂, β)`.
//! All measures are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for physicality checks and formula branch boundaries.
pub const TOL_NUM: f64 = 1e-9;

/// Default threshold above which a steering value counts as "steerable".
pub const DEFAULT_EPS_STEER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub numeric: f64,
    pub steer: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            numeric: TOL_NUM,
            steer: DEFAULT_EPS_STEER,
        }
    }
}

/// Direction of steering. `Forward` is c₁ → c₂ (mode 1 measures, mode 2 is steered).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    TwoWay,
    OneWayForward,
    OneWayBackward,
    NoWay,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::TwoWay => "two_way",
            Regime::OneWayForward => "one_way_forward",
            Regime::OneWayBackward => "one_way_backward",
            Regime::NoWay => "no_way",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s {
            "two_way" => Some(Regime::TwoWay),
            "one_way_forward" => Some(Regime::OneWayForward),
            "one_way_backward" => Some(Regime::OneWayBackward),
            "no_way" => Some(Regime::NoWay),
            _ => None,
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn identity_scaled(a: f64) -> Self {
        Mat2([[a, 0.0], [0.0, a]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    pub fn mul(&self, other: &Mat2) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn sub(&self, other: &Mat2) -> Self {
        let (a, b) = (&self.0, &other.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

/// Standard-form two-mode covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeCovariance {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
}

impl TwoModeCovariance {
    pub fn new(alpha1: f64, alpha2: f64, beta: f64) -> Self {
        TwoModeCovariance {
            alpha1,
            alpha2,
            beta,
        }
    }

    pub fn vacuum() -> Self {
        Self::new(1.0, 1.0, 0.0)
    }

    /// Pure two-mode squeezed vacuum with squeezing parameter `r`.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = (2.0 * r).cosh();
        Self::new(c, c, (2.0 * r).sinh())
    }

    /// Global determinant `g = α₁α₂ − β²`; `det σ = g²`.
    pub fn global_det(&self) -> f64 {
        self.alpha1 * self.alpha2 - self.beta * self.beta
    }

    pub fn s_plus(&self) -> f64 {
        0.5 * (self.alpha1 + self.alpha2)
    }

    pub fn s_minus(&self) -> f64 {
        0.5 * (self.alpha1 - self.alpha2)
    }

    /// Seralian invariant `Δ = α₁² + α₂² − 2β²`.
    pub fn seralian(&self) -> f64 {
        self.alpha1 * self.alpha1 + self.alpha2 * self.alpha2 - 2.0 * self.beta * self.beta
    }

    /// Exchange the roles of the two modes.
    pub fn swapped(&self) -> Self {
        Self::new(self.alpha2, self.alpha1, self.beta)
    }

    /// Single-mode block of `mode` (1 or 2).
    pub fn local_block(&self, mode: usize) -> Mat2 {
        match mode {
            1 => Mat2::identity_scaled(self.alpha1),
            _ => Mat2::identity_scaled(self.alpha2),
        }
    }

    /// Cross block `σ_{c₁/c₂} = β·diag(1, −1)`.
    pub fn cross_block(&self) -> Mat2 {
        Mat2::diag(self.beta, -self.beta)
    }

    /// The explicit 4×4 matrix in `(x₁, y₁, x₂, y₂)` ordering.
    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let (a, b, c) = (self.alpha1, self.alpha2, self.beta);
        [
            [a, 0.0, c, 0.0],
            [0.0, a, 0.0, -c],
            [c, 0.0, b, 0.0],
            [0.0, -c, 0.0, b],
        ]
    }

    /// Symplectic eigenvalues `(ν₋, ν₊)`.
    ///
    /// Uses the factorisation `Δ² − 4g² = (α₁ − α₂)²((α₁ + α₂)² − 4β²)` for the
    /// discriminant and `ν₋ = g/ν₊` to avoid cancellation when `ν₋ ≪ ν₊`.
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        let delta = self.seralian();
        let g = self.global_det();
        let diff = self.alpha1 - self.alpha2;
        let sum = self.alpha1 + self.alpha2;
        let discriminant = diff * diff * (sum * sum - 4.0 * self.beta * self.beta);
        if !discriminant.is_finite() || discriminant < -TOL_NUM {
            return Err(Error::MalformedCovariance { discriminant });
        }
        let root = discriminant.max(0.0).sqrt();
        let nu_plus_sq = 0.5 * (delta + root);
        if !(nu_plus_sq > 0.0) {
            return Err(Error::MalformedCovariance { discriminant });
        }
        let nu_plus = nu_plus_sq.sqrt();
        let nu_minus = g.abs() / nu_plus;
        Ok((nu_minus, nu_plus))
    }

    pub fn is_physical(&self) -> Result<bool> {
        let (nu_minus, _) = self.symplectic_eigenvalues()?;
        Ok(self.alpha1 >= 1.0 - TOL_NUM
            && self.alpha2 >= 1.0 - TOL_NUM
            && self.global_det() > 0.0
            && nu_minus >= 1.0 - TOL_NUM)
    }

    fn require_physical(&self) -> Result<()> {
        if self.is_physical()? {
            Ok(())
        } else {
            Err(Error::UnphysicalState)
        }
    }

    fn steerer_alpha(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Forward => self.alpha1,
            Direction::Backward => self.alpha2,
        }
    }
}

/// Schur complement of the steering mode's block: the conditional covariance
/// of the steered mode after a Gaussian measurement on the steering mode.
pub fn schur_complement(cm: &TwoModeCovariance, direction: Direction) -> Result<Mat2> {
    let cross = cm.cross_block();
    let (steerer, steered, coupling) = match direction {
        // σ_{c₂} − Cᵀ σ_{c₁}⁻¹ C
        Direction::Forward => (cm.local_block(1), cm.local_block(2), cross),
        // σ_{c₁} − C σ_{c₂}⁻¹ Cᵀ
        Direction::Backward => (cm.local_block(2), cm.local_block(1), cross.transpose()),
    };
    if !(cm.steerer_alpha(direction) > 0.0) {
        return Err(Error::DegenerateBlock);
    }
    let inv = steerer.inverse().ok_or(Error::DegenerateBlock)?;
    let correction = coupling.transpose().mul(&inv).mul(&coupling);
    Ok(steered.sub(&correction))
}

/// Symplectic eigenvalue of the Schur complement, `μ = sqrt(det S)`, computed
/// from the explicit 2×2 matrix.
pub fn steering_mu(cm: &TwoModeCovariance, direction: Direction) -> Result<f64> {
    let det = schur_complement(cm, direction)?.det();
    if det < 0.0 {
        return Err(Error::UnphysicalState);
    }
    Ok(det.sqrt())
}

/// Closed form of [`steering_mu`] for standard-form states: `g/α_steerer`.
pub fn steering_mu_closed_form(cm: &TwoModeCovariance, direction: Direction) -> Result<f64> {
    let alpha = cm.steerer_alpha(direction);
    if !(alpha > 0.0) {
        return Err(Error::DegenerateBlock);
    }
    Ok(cm.global_det() / alpha)
}

/// Gaussian steering from the determinant ratio,
/// `max(0, ½ ln(det σ_steerer / det σ))`.
pub fn steering(cm: &TwoModeCovariance, direction: Direction) -> Result<f64> {
    cm.require_physical()?;
    let alpha = cm.steerer_alpha(direction);
    let det_steerer = alpha * alpha;
    let g = cm.global_det();
    let det_full = g * g;
    Ok((0.5 * (det_steerer / det_full).ln()).max(0.0))
}

pub fn classify_regime(g12: f64, g21: f64, eps_steer: f64) -> Regime {
    match (g12 > eps_steer, g21 > eps_steer) {
        (true, true) => Regime::TwoWay,
        (true, false) => Regime::OneWayForward,
        (false, true) => Regime::OneWayBackward,
        (false, false) => Regime::NoWay,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub g12: f64,
    pub g21: f64,
    pub gmax: f64,
    pub regime: Regime,
}

pub fn steering_report(cm: &TwoModeCovariance, eps_steer: f64) -> Result<SteeringReport> {
    let g12 = steering(cm, Direction::Forward)?;
    let g21 = steering(cm, Direction::Backward)?;
    Ok(SteeringReport {
        g12,
        g21,
        gmax: g12.max(g21),
        regime: classify_regime(g12, g21, eps_steer),
    })
}

/// Gaussian Rényi-2 entanglement of a two-mode squeezed thermal state.
pub fn renyi2_entanglement(cm: &TwoModeCovariance) -> Result<f64> {
    cm.require_physical()?;
    let g = cm.global_det();
    let sp = cm.s_plus();
    let sm = cm.s_minus();
    if g >= 2.0 * sp - 1.0 {
        return Ok(0.0);
    }
    let bound = 2.0 * sm.abs() + 1.0;
    if g < bound - TOL_NUM {
        return Err(Error::OutsideFormulaDomain { g, bound });
    }
    let mut radicand = ((g - 1.0).powi(2) - 4.0 * sm * sm) * (sp * sp - sm * sm - g);
    if radicand < 0.0 {
        if radicand < -TOL_NUM {
            return Err(Error::OutsideFormulaDomain { g, bound });
        }
        radicand = 0.0;
    }
    let numerator = ((g + 1.0) * sp - radicand.sqrt()).powi(2);
    let denominator = 4.0 * (sm * sm + g).powi(2);
    Ok((0.5 * (numerator / denominator).ln()).max(0.0))
}

/// Violation test of `σ + i(0 ⊕ Π) ≥ 0` for the steered mode.
///
/// With the steering block positive definite, the 4×4 condition is
/// equivalent to `S + iΠ ≥ 0` on the 2×2 Schur complement `S`, whose smallest
/// eigenvalue has a closed form for a Hermitian 2×2 matrix.
pub fn lmi_steerable(cm: &TwoModeCovariance, direction: Direction) -> Result<bool> {
    cm.require_physical()?;
    Ok(lmi_min_eigenvalue(cm, direction)? < -TOL_NUM)
}

/// Smallest eigenvalue of `S + iΠ`, `Π = [[0, 1], [−1, 0]]`.
pub fn lmi_min_eigenvalue(cm: &TwoModeCovariance, direction: Direction) -> Result<f64> {
    let s = schur_complement(cm, direction)?.0;
    // Hermitian [[a, b], [b*, d]] with b = S₀₁ + i.
    let a = s[0][0];
    let d = s[1][1];
    let off_re = 0.5 * (s[0][1] + s[1][0]);
    let off_im = 1.0;
    let half_gap = 0.5 * (a - d);
    Ok(0.5 * (a + d) - (half_gap * half_gap + off_re * off_re + off_im * off_im).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn vacuum_has_unit_symplectic_spectrum() {
        let (lo, hi) = TwoModeCovariance::vacuum().symplectic_eigenvalues().unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn squeezed_vacuum_is_pure() {
        let cm = TwoModeCovariance::two_mode_squeezed(0.5);
        let (lo, hi) = cm.symplectic_eigenvalues().unwrap();
        assert!(close(lo, 1.0, 1e-12) && close(hi, 1.0, 1e-12));
        assert!(cm.is_physical().unwrap());
    }

    #[test]
    fn sub_vacuum_variance_is_unphysical() {
        assert!(!TwoModeCovariance::new(0.5, 1.0, 0.0).is_physical().unwrap());
        assert!(TwoModeCovariance::vacuum().is_physical().unwrap());
    }

    #[test]
    fn malformed_discriminant_is_reported() {
        // (α₁ + α₂)² < 4β² with α₁ ≠ α₂.
        let cm = TwoModeCovariance::new(2.0, 1.0, 3.0);
        assert!(matches!(
            cm.symplectic_eigenvalues(),
            Err(Error::MalformedCovariance { .. })
        ));
    }

    #[test]
    fn mu_for_reference_states() {
        for dir in [Direction::Forward, Direction::Backward] {
            assert_eq!(steering_mu(&TwoModeCovariance::vacuum(), dir).unwrap(), 1.0);
            let cm = TwoModeCovariance::two_mode_squeezed(0.5);
            let mu = steering_mu(&cm, dir).unwrap();
            assert!(close(mu, 1.0 / 1.0f64.cosh(), 1e-12), "{mu}");
        }
    }

    #[test]
    fn zero_alpha_is_degenerate() {
        let cm = TwoModeCovariance::new(0.0, 1.0, 0.0);
        assert_eq!(steering_mu(&cm, Direction::Forward), Err(Error::DegenerateBlock));
        assert_eq!(
            steering_mu_closed_form(&cm, Direction::Forward),
            Err(Error::DegenerateBlock)
        );
        assert!(steering_mu(&cm, Direction::Backward).is_ok());
    }

    #[test]
    fn steering_reference_values() {
        for dir in [Direction::Forward, Direction::Backward] {
            assert_eq!(steering(&TwoModeCovariance::vacuum(), dir).unwrap(), 0.0);
            let g = steering(&TwoModeCovariance::two_mode_squeezed(0.5), dir).unwrap();
            assert!((g - 1.0f64.cosh().ln()).abs() < 1e-12);
            assert!((g - 0.43378).abs() < 1e-5);
        }
    }

    #[test]
    fn steering_rejects_unphysical() {
        let cm = TwoModeCovariance::new(0.5, 1.0, 0.0);
        assert_eq!(steering(&cm, Direction::Forward), Err(Error::UnphysicalState));
        assert_eq!(renyi2_entanglement(&cm), Err(Error::UnphysicalState));
        assert_eq!(lmi_steerable(&cm, Direction::Forward), Err(Error::UnphysicalState));
    }

    #[test]
    fn regime_table() {
        let eps = DEFAULT_EPS_STEER;
        assert_eq!(classify_regime(0.0, 0.0, eps), Regime::NoWay);
        assert_eq!(classify_regime(0.3, 0.1, eps), Regime::TwoWay);
        assert_eq!(classify_regime(0.3, 0.0, eps), Regime::OneWayForward);
        assert_eq!(classify_regime(0.0, 0.3, eps), Regime::OneWayBackward);
        // Values at the threshold are not steerable.
        assert_eq!(classify_regime(eps, eps, eps), Regime::NoWay);
    }

    #[test]
    fn regime_names_round_trip() {
        for r in [
            Regime::TwoWay,
            Regime::OneWayForward,
            Regime::OneWayBackward,
            Regime::NoWay,
        ] {
            assert_eq!(Regime::parse(r.as_str()), Some(r));
        }
        assert_eq!(Regime::parse("sideways"), None);
    }

    #[test]
    fn renyi2_reference_values() {
        assert_eq!(renyi2_entanglement(&TwoModeCovariance::vacuum()).unwrap(), 0.0);
        let e = renyi2_entanglement(&TwoModeCovariance::two_mode_squeezed(0.5)).unwrap();
        assert!((e - 1.0f64.cosh().ln()).abs() < 1e-12, "{e}");
    }

    #[test]
    fn renyi2_zero_on_separable_thermal() {
        // Uncorrelated thermal modes: g = α₁α₂ ≥ α₁ + α₂ − 1 = 2s₊ − 1.
        let cm = TwoModeCovariance::new(3.0, 2.0, 0.0);
        assert_eq!(renyi2_entanglement(&cm).unwrap(), 0.0);
    }

    #[test]
    fn lmi_reference_states() {
        for dir in [Direction::Forward, Direction::Backward] {
            assert!(!lmi_steerable(&TwoModeCovariance::vacuum(), dir).unwrap());
            for r in [0.1, 0.5, 1.5] {
                let cm = TwoModeCovariance::two_mode_squeezed(r);
                assert!(lmi_steerable(&cm, dir).unwrap());
                // Eigenvalues of S + iΠ are μ ± 1.
                let mu = steering_mu(&cm, dir).unwrap();
                assert!(close(lmi_min_eigenvalue(&cm, dir).unwrap(), mu - 1.0, 1e-12));
            }
        }
    }

    #[test]
    fn schur_matrix_is_isotropic() {
        let cm = TwoModeCovariance::new(5.0, 3.0, 3.5);
        let s = schur_complement(&cm, Direction::Forward).unwrap().0;
        let expected = cm.global_det() / cm.alpha1;
        assert!(close(s[0][0], expected, 1e-14));
        assert!(close(s[1][1], expected, 1e-14));
        assert_eq!(s[0][1], 0.0);
    }

    #[test]
    fn mat2_inverse_round_trip() {
        let m = Mat2([[2.0, 1.0], [0.5, 3.0]]);
        let id = m.mul(&m.inverse().unwrap());
        assert!(close(id.0[0][0], 1.0, 1e-15) && id.0[0][1].abs() < 1e-15);
        assert!(Mat2([[1.0, 2.0], [2.0, 4.0]]).inverse().is_none());
    }
}
