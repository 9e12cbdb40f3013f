//! Closed-form kinematics of the planar RR-RRR five-bar.
//!
//! The base joints sit at `A = (0, 0)` and `B = (L0, 0)`. Leg 1 is the chain
//! A -(L1)- C -(L2)- P driven by `theta1`, leg 2 is B -(L3)- D -(L4)- P driven by
//! `theta2`. `theta3` and `theta4` are the absolute directions of C->P and D->P.
//!
//! Differentiating the two closure constraints `|P - C| = L2`, `|P - D| = L4`
//! gives the velocity model `A * p_dot + B * q_dot = 0` with
//!
//! ```text
//! A = | cos t3  sin t3 |      B = diag(-L1 sin(t3 - t1), -L3 sin(t4 - t2))
//!     | cos t4  sin t4 |
//! ```
//!
//! so `det A = sin(t4 - t3)` vanishes when C, D and P are aligned (parallel
//! singularity) and `det B` vanishes when a leg is folded or stretched
//! (serial singularity).

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A sine below this magnitude marks a singular configuration in branch logic.
pub const SINGULAR_TOL: f64 = 1e-9;

/// Slack when testing an angle against a joint limit.
const LIMIT_SLACK: f64 = 1e-12;

/// Relative closure residual accepted by [`branch_signs`].
const CLOSURE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("no assembly: |CD| = {distance} outside [{min}, {max}]")]
    NoAssembly { distance: f64, min: f64, max: f64 },
    #[error("singular assembly: distal circles are tangent (|CD| = {distance})")]
    SingularAssembly { distance: f64 },
    #[error("pose ({x}, {y}) is unreachable")]
    Unreachable { x: f64, y: f64 },
    #[error("pose ({x}, {y}) coincides with a base joint of a leg with equal link lengths")]
    DegenerateLeg { x: f64, y: f64 },
    #[error("configuration lies on a serial singularity")]
    OnSerialSingularity,
    #[error("configuration lies on a parallel singularity")]
    OnParallelSingularity,
    #[error("pose and joints violate closure (residual {0})")]
    NotClosed(f64),
}

/// Maps an angle to `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Closed interval of admissible values for one actuated joint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub min: f64,
    pub max: f64,
}

impl JointLimits {
    pub fn new(min: f64, max: f64) -> Result<Self, KinematicsError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(KinematicsError::InvalidGeometry(format!("joint limits [{min}, {max}]")));
        }
        if max - min > TAU + 1e-9 {
            return Err(KinematicsError::InvalidGeometry(format!(
                "joint limits [{min}, {max}] span more than one turn"
            )));
        }
        Ok(JointLimits { min, max })
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// Membership of `theta` modulo `2 pi`.
    pub fn contains(&self, theta: f64) -> bool {
        let t = (theta - self.min).rem_euclid(TAU);
        t <= self.span() + LIMIT_SLACK || t >= TAU - LIMIT_SLACK
    }

    /// Same interval shifted by whole turns so that `min` lies in `[-pi, pi)`.
    pub fn normalized(&self) -> JointLimits {
        let shift = (self.min + PI).div_euclid(TAU) * TAU;
        JointLimits { min: self.min - shift, max: self.max - shift }
    }
}

/// Link lengths and actuated joint limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "L3")]
    pub l3: f64,
    #[serde(rename = "L4")]
    pub l4: f64,
    pub theta1: JointLimits,
    pub theta2: JointLimits,
}

impl Geometry {
    pub fn new(lengths: [f64; 5], theta1: JointLimits, theta2: JointLimits) -> Result<Self, KinematicsError> {
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(KinematicsError::InvalidGeometry(format!("link length {l} must be positive")));
        }
        let theta1 = JointLimits::new(theta1.min, theta1.max)?;
        let theta2 = JointLimits::new(theta2.min, theta2.max)?;
        let [l0, l1, l2, l3, l4] = lengths;
        Ok(Geometry { l0, l1, l2, l3, l4, theta1, theta2 })
    }

    /// The RR-RRR used throughout the examples: lengths 7, 8, 5, 8, 5 and both
    /// actuated joints limited to `[0, pi]`.
    pub fn reference() -> Self {
        let lim = JointLimits { min: 0.0, max: PI };
        Geometry { l0: 7.0, l1: 8.0, l2: 5.0, l3: 8.0, l4: 5.0, theta1: lim, theta2: lim }
    }

    pub fn with_limits(&self, theta1: JointLimits, theta2: JointLimits) -> Result<Self, KinematicsError> {
        Geometry::new([self.l0, self.l1, self.l2, self.l3, self.l4], theta1, theta2)
    }

    pub fn base_a(&self) -> Vector2<f64> {
        Vector2::zeros()
    }

    pub fn base_b(&self) -> Vector2<f64> {
        Vector2::new(self.l0, 0.0)
    }

    /// Length scale for tolerances.
    pub fn scale(&self) -> f64 {
        [self.l0, self.l1, self.l2, self.l3, self.l4].into_iter().fold(0.0, f64::max)
    }

    /// Inner and outer radius of the annulus reachable by leg 1 about A.
    pub fn leg1_annulus(&self) -> (f64, f64) {
        ((self.l1 - self.l2).abs(), self.l1 + self.l2)
    }

    /// Inner and outer radius of the annulus reachable by leg 2 about B.
    pub fn leg2_annulus(&self) -> (f64, f64) {
        ((self.l3 - self.l4).abs(), self.l3 + self.l4)
    }

    pub fn elbow_c(&self, theta1: f64) -> Vector2<f64> {
        self.l1 * Vector2::new(theta1.cos(), theta1.sin())
    }

    pub fn elbow_d(&self, theta2: f64) -> Vector2<f64> {
        self.base_b() + self.l3 * Vector2::new(theta2.cos(), theta2.sin())
    }

    pub fn joints_within_limits(&self, q: &JointVector) -> bool {
        self.theta1.contains(q.theta1) && self.theta2.contains(q.theta2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64) -> Self {
        Pose { x, y }
    }

    pub fn vector(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointVector {
    pub theta1: f64,
    pub theta2: f64,
}

impl JointVector {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        JointVector { theta1, theta2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PassiveAngles {
    pub theta3: f64,
    pub theta4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    /// Sign of `v`, with `|v| < SINGULAR_TOL` treated as zero.
    pub fn of(v: f64) -> Sign {
        if v.abs() < SINGULAR_TOL {
            Sign::Zero
        } else if v > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }
}

/// Direct-kinematic branch, equal to the sign of `det A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssemblyMode {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl AssemblyMode {
    pub const BOTH: [AssemblyMode; 2] = [AssemblyMode::Positive, AssemblyMode::Negative];

    pub fn sign(self) -> f64 {
        match self {
            AssemblyMode::Positive => 1.0,
            AssemblyMode::Negative => -1.0,
        }
    }

    pub fn as_sign(self) -> Sign {
        match self {
            AssemblyMode::Positive => Sign::Positive,
            AssemblyMode::Negative => Sign::Negative,
        }
    }
}

impl std::fmt::Display for AssemblyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AssemblyMode::Positive => "+",
            AssemblyMode::Negative => "-",
        })
    }
}

/// Posture signs of both legs and the assembly mode.
///
/// `gamma1 = sign(sin(t3 - t1))`, `gamma2 = sign(sin(t4 - t2))`,
/// `mode = sign(sin(t4 - t3))`; `Zero` marks the matching singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchSigns {
    pub gamma1: Sign,
    pub gamma2: Sign,
    pub mode: Sign,
}

impl BranchSigns {
    fn from_angles(q: &JointVector, passive: &PassiveAngles) -> Self {
        BranchSigns {
            gamma1: Sign::of((passive.theta3 - q.theta1).sin()),
            gamma2: Sign::of((passive.theta4 - q.theta2).sin()),
            mode: Sign::of((passive.theta4 - passive.theta3).sin()),
        }
    }
}

/// A pose together with a joint vector satisfying both closure constraints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManipulatorConfiguration {
    pub pose: Pose,
    pub joints: JointVector,
    pub passive: PassiveAngles,
    pub signs: BranchSigns,
}

impl ManipulatorConfiguration {
    fn assemble(g: &Geometry, pose: Pose, joints: JointVector) -> Self {
        let p = pose.vector();
        let c = p - g.elbow_c(joints.theta1);
        let d = p - g.elbow_d(joints.theta2);
        let passive = PassiveAngles { theta3: c.y.atan2(c.x), theta4: d.y.atan2(d.x) };
        let signs = BranchSigns::from_angles(&joints, &passive);
        ManipulatorConfiguration { pose, joints, passive, signs }
    }

    /// Per-leg closure residuals `(| |P - C| - L2 |, | |P - D| - L4 |)`.
    pub fn closure_residual(&self, g: &Geometry) -> (f64, f64) {
        let p = self.pose.vector();
        (
            ((p - g.elbow_c(self.joints.theta1)).norm() - g.l2).abs(),
            ((p - g.elbow_d(self.joints.theta2)).norm() - g.l4).abs(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicMatrices {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub det_a: f64,
    pub det_b: f64,
}

impl KinematicMatrices {
    /// `-A^-1 B`, mapping joint rates to platform velocity; `None` when `A`
    /// is singular.
    pub fn velocity_map(&self) -> Option<Matrix2<f64>> {
        self.a.try_inverse().map(|inv| -inv * self.b)
    }

    /// Spectral norm of [`KinematicMatrices::velocity_map`].
    pub fn velocity_gain(&self) -> Option<f64> {
        self.velocity_map().map(|m| spectral_norm(&m))
    }
}

/// Largest singular value of a 2x2 matrix.
pub fn spectral_norm(m: &Matrix2<f64>) -> f64 {
    let fro2 = m.norm_squared();
    let det = m.determinant();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    (0.5 * (fro2 + disc)).sqrt()
}

/// One inverse-kinematic solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IkSolution {
    pub joints: JointVector,
    pub signs: BranchSigns,
    pub within_limits: bool,
    /// Set when a leg is fully stretched or folded, so its two branches coincide.
    pub serial_singular: bool,
}

/// Direct kinematics: the platform pose for joints `q` in assembly `mode`.
pub fn dkp(g: &Geometry, q: JointVector, mode: AssemblyMode) -> Result<ManipulatorConfiguration, KinematicsError> {
    let c = g.elbow_c(q.theta1);
    let d = g.elbow_d(q.theta2);
    let u = d - c;
    let dist = u.norm();
    let (min, max) = ((g.l2 - g.l4).abs(), g.l2 + g.l4);
    let tol = SINGULAR_TOL * g.scale();
    if dist > max + tol || dist < min - tol {
        return Err(KinematicsError::NoAssembly { distance: dist, min, max });
    }
    if (dist - max).abs() <= tol || (dist - min).abs() <= tol {
        return Err(KinematicsError::SingularAssembly { distance: dist });
    }
    let along = (g.l2 * g.l2 - g.l4 * g.l4 + dist * dist) / (2.0 * dist);
    let height = (g.l2 * g.l2 - along * along).max(0.0).sqrt();
    let dir = u / dist;
    let normal = Vector2::new(-dir.y, dir.x);
    // P = M + h n has det A = h |CD| / (L2 L4) > 0
    let p = c + along * dir + mode.sign() * height * normal;
    Ok(ManipulatorConfiguration::assemble(g, Pose::new(p.x, p.y), q))
}

/// Branches of one two-link leg reaching `target` from `base`, as
/// `(theta, stretched_or_folded)`.
fn leg_branches(
    base: Vector2<f64>,
    proximal: f64,
    distal: f64,
    target: Vector2<f64>,
    scale: f64,
) -> Result<Vec<(f64, bool)>, KinematicsError> {
    let r = target - base;
    let dist = r.norm();
    let (min, max) = ((proximal - distal).abs(), proximal + distal);
    let tol = SINGULAR_TOL * scale;
    if dist > max + tol || dist < min - tol {
        return Err(KinematicsError::Unreachable { x: target.x, y: target.y });
    }
    if dist <= tol {
        return Err(KinematicsError::DegenerateLeg { x: target.x, y: target.y });
    }
    let heading = r.y.atan2(r.x);
    let cos = ((proximal * proximal + dist * dist - distal * distal) / (2.0 * proximal * dist)).clamp(-1.0, 1.0);
    let spread = cos.acos();
    if (dist - max).abs() <= tol || (dist - min).abs() <= tol {
        Ok(vec![(normalize_angle(heading + spread), true)])
    } else {
        Ok(vec![(normalize_angle(heading + spread), false), (normalize_angle(heading - spread), false)])
    }
}

/// Inverse kinematics: every joint vector placing P at `x`, up to four.
pub fn ikp(g: &Geometry, x: Pose) -> Result<Vec<IkSolution>, KinematicsError> {
    let p = x.vector();
    let leg1 = leg_branches(g.base_a(), g.l1, g.l2, p, g.scale())?;
    let leg2 = leg_branches(g.base_b(), g.l3, g.l4, p, g.scale())?;
    let mut out = Vec::with_capacity(4);
    for &(theta1, singular1) in &leg1 {
        for &(theta2, singular2) in &leg2 {
            let joints = JointVector::new(theta1, theta2);
            let mut cfg = ManipulatorConfiguration::assemble(g, x, joints);
            if singular1 {
                cfg.signs.gamma1 = Sign::Zero;
            }
            if singular2 {
                cfg.signs.gamma2 = Sign::Zero;
            }
            out.push(IkSolution {
                joints,
                signs: cfg.signs,
                within_limits: g.joints_within_limits(&joints),
                serial_singular: singular1 || singular2,
            });
        }
    }
    Ok(out)
}

/// Assembles the configuration of an inverse-kinematic solution.
pub fn configuration(g: &Geometry, x: Pose, q: JointVector) -> ManipulatorConfiguration {
    ManipulatorConfiguration::assemble(g, x, q)
}

pub fn jacobians(g: &Geometry, c: &ManipulatorConfiguration) -> KinematicMatrices {
    let (t1, t2) = (c.joints.theta1, c.joints.theta2);
    let (t3, t4) = (c.passive.theta3, c.passive.theta4);
    let a = Matrix2::new(t3.cos(), t3.sin(), t4.cos(), t4.sin());
    let b11 = -g.l1 * (t3 - t1).sin();
    let b22 = -g.l3 * (t4 - t2).sin();
    let b = Matrix2::new(b11, 0.0, 0.0, b22);
    KinematicMatrices { a, b, det_a: a.determinant(), det_b: b11 * b22 }
}

/// `(det A, det B)`: parallel and serial singularity measures.
pub fn singularity_measures(g: &Geometry, c: &ManipulatorConfiguration) -> (f64, f64) {
    let m = jacobians(g, c);
    (m.det_a, m.det_b)
}

/// Posture and assembly signs of the configuration `(x, q)`.
pub fn branch_signs(g: &Geometry, x: Pose, q: JointVector) -> Result<BranchSigns, KinematicsError> {
    let cfg = ManipulatorConfiguration::assemble(g, x, q);
    let (r1, r2) = cfg.closure_residual(g);
    if r1.max(r2) > CLOSURE_TOL * g.scale() {
        return Err(KinematicsError::NotClosed(r1.max(r2)));
    }
    if cfg.signs.gamma1 == Sign::Zero || cfg.signs.gamma2 == Sign::Zero {
        return Err(KinematicsError::OnSerialSingularity);
    }
    if cfg.signs.mode == Sign::Zero {
        return Err(KinematicsError::OnParallelSingularity);
    }
    Ok(cfg.signs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    /// Root of 112 cos t - 128 sin t = -77 near 1.19, where |CD| = 10 for
    /// theta1 = pi/2.
    fn tangent_theta2() -> f64 {
        let f = |t: f64| 112.0 * t.cos() - 128.0 * t.sin() + 77.0;
        let (mut lo, mut hi) = (1.0, 1.4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn dkp_reference_pose() {
        let g = Geometry::reference();
        let q = JointVector::new(FRAC_PI_2, FRAC_PI_2);
        let up = dkp(&g, q, AssemblyMode::Positive).unwrap();
        let down = dkp(&g, q, AssemblyMode::Negative).unwrap();
        // C = (0, 8), D = (7, 8); P on the bisector x = 3.5 at height sqrt(25 - 3.5^2)
        let h = (25.0f64 - 12.25).sqrt();
        assert_relative_eq!(up.pose.x, 3.5, epsilon = 1e-12);
        assert_relative_eq!(up.pose.y, 8.0 + h, epsilon = 1e-12);
        assert_relative_eq!(down.pose.y, 8.0 - h, epsilon = 1e-12);
        assert!((up.pose.y - 11.5707).abs() < 1e-4 && (down.pose.y - 4.4293).abs() < 1e-4);
        for cfg in [up, down] {
            let (r1, r2) = cfg.closure_residual(&g);
            assert!(r1 < 1e-12 && r2 < 1e-12);
        }
        assert_eq!(up.signs.mode, Sign::Positive);
        assert_eq!(down.signs.mode, Sign::Negative);
    }

    #[test]
    fn dkp_tangent_circles_are_singular() {
        let g = Geometry::reference();
        let q = JointVector::new(FRAC_PI_2, tangent_theta2());
        let err = dkp(&g, q, AssemblyMode::Positive).unwrap_err();
        assert!(matches!(err, KinematicsError::SingularAssembly { distance } if (distance - 10.0).abs() < 1e-9));
    }

    #[test]
    fn dkp_out_of_reach() {
        let g = Geometry::reference();
        let err = dkp(&g, JointVector::new(PI, 0.0), AssemblyMode::Positive).unwrap_err();
        assert!(matches!(err, KinematicsError::NoAssembly { distance, .. } if (distance - 23.0).abs() < 1e-12));
    }

    #[test]
    fn ikp_reference_pose() {
        let g = Geometry::reference();
        let sols = ikp(&g, Pose::new(3.5, 4.4293)).unwrap();
        assert_eq!(sols.len(), 4);
        let mut t1: Vec<f64> = sols.iter().map(|s| s.joints.theta1).collect();
        t1.sort_by(f64::total_cmp);
        t1.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        assert_eq!(t1.len(), 2);
        assert!((t1[0] - 0.2332).abs() < 2e-3, "{t1:?}");
        assert!((t1[1] - FRAC_PI_2).abs() < 2e-3, "{t1:?}");
        let postures: std::collections::HashSet<_> = sols.iter().map(|s| (s.signs.gamma1, s.signs.gamma2)).collect();
        assert_eq!(postures.len(), 4);
    }

    #[test]
    fn ikp_stretched_leg() {
        let g = Geometry::reference();
        let sols = ikp(&g, Pose::new(13.0, 0.0)).unwrap();
        assert_eq!(sols.len(), 2);
        for s in &sols {
            assert!(s.serial_singular);
            assert_eq!(s.signs.gamma1, Sign::Zero);
            assert_eq!(s.joints.theta1, 0.0);
            let cfg = configuration(&g, Pose::new(13.0, 0.0), s.joints);
            let m = jacobians(&g, &cfg);
            assert!(m.b[(0, 0)].abs() < 1e-12 && m.det_b.abs() < 1e-12);
        }
    }

    #[test]
    fn ikp_unreachable() {
        let g = Geometry::reference();
        assert!(matches!(ikp(&g, Pose::new(100.0, 0.0)), Err(KinematicsError::Unreachable { .. })));
    }

    #[test]
    fn jacobian_determinants() {
        let g = Geometry::reference();
        let cfg = dkp(&g, JointVector::new(FRAC_PI_2, FRAC_PI_2), AssemblyMode::Positive).unwrap();
        let m = jacobians(&g, &cfg);
        assert!((cfg.passive.theta3 - 0.7954).abs() < 1e-4);
        assert!((cfg.passive.theta4 - 2.3462).abs() < 1e-4);
        assert!((m.det_a - (cfg.passive.theta4 - cfg.passive.theta3).sin()).abs() < 1e-12);
        assert!((m.det_a - 0.99980).abs() < 1e-5);
        let expected_b = g.l1 * g.l3 * (cfg.passive.theta3 - FRAC_PI_2).sin() * (cfg.passive.theta4 - FRAC_PI_2).sin();
        assert_relative_eq!(m.det_b, expected_b, epsilon = 1e-12);
        assert_eq!(singularity_measures(&g, &cfg), (m.det_a, m.det_b));
    }

    #[test]
    fn aligned_distal_links_have_zero_det_a() {
        let g = Geometry::reference();
        let q = JointVector::new(FRAC_PI_2, tangent_theta2());
        let (c, d) = (g.elbow_c(q.theta1), g.elbow_d(q.theta2));
        let mid = 0.5 * (c + d);
        let cfg = configuration(&g, Pose::new(mid.x, mid.y), q);
        assert!(jacobians(&g, &cfg).det_a.abs() < 1e-9);
        assert_eq!(branch_signs(&g, cfg.pose, q).unwrap_err(), KinematicsError::OnParallelSingularity);
    }

    #[test]
    fn branch_signs_cases() {
        let g = Geometry::reference();
        let q = JointVector::new(FRAC_PI_2, FRAC_PI_2);
        let cfg = dkp(&g, q, AssemblyMode::Positive).unwrap();
        let s = branch_signs(&g, cfg.pose, q).unwrap();
        assert_eq!(s.mode, Sign::Positive);
        assert_eq!(s.gamma1, Sign::of((cfg.passive.theta3 - q.theta1).sin()));
        assert_eq!(s.gamma2, Sign::of((cfg.passive.theta4 - q.theta2).sin()));
        // theta3 = 0.795 < pi/2 and theta4 = 2.346 > pi/2
        assert_eq!((s.gamma1, s.gamma2), (Sign::Negative, Sign::Positive));

        let x = Pose::new(13.0, 0.0);
        let stretched = ikp(&g, x).unwrap()[0].joints;
        assert_eq!(branch_signs(&g, x, stretched).unwrap_err(), KinematicsError::OnSerialSingularity);
        assert!(matches!(branch_signs(&g, Pose::new(0.0, 0.0), q), Err(KinematicsError::NotClosed(_))));
    }

    #[test]
    fn limits_and_normalization() {
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(-FRAC_PI_2) + FRAC_PI_2).abs() < 1e-15);
        let half = JointLimits::new(0.0, PI).unwrap();
        assert!(half.contains(0.0) && half.contains(PI) && half.contains(-TAU + 1.0));
        assert!(!half.contains(-0.1));
        let full = JointLimits::new(-PI, PI).unwrap();
        assert!(full.contains(-PI) && full.contains(PI) && full.contains(2.0));
        assert!(JointLimits::new(1.0, 1.0).is_err());
        assert!(JointLimits::new(0.0, 7.0).is_err());
        let shifted = JointLimits::new(TAU, TAU + 1.0).unwrap().normalized();
        assert!(shifted.min.abs() < 1e-12);
        assert_eq!(JointLimits::new(-PI, PI).unwrap().normalized().min, -PI);
    }

    #[test]
    fn geometry_validation() {
        let lim = JointLimits::new(0.0, PI).unwrap();
        assert!(Geometry::new([7.0, 8.0, 0.0, 8.0, 5.0], lim, lim).is_err());
        assert!(Geometry::new([7.0, 8.0, 5.0, 8.0, 5.0], lim, lim).is_ok());
    }

    #[test]
    fn spectral_norm_matches_svd() {
        let m = Matrix2::new(1.0, 2.0, -3.0, 0.5);
        let svd = m.svd(false, false);
        assert_relative_eq!(spectral_norm(&m), svd.singular_values.max(), epsilon = 1e-12);
    }
}
