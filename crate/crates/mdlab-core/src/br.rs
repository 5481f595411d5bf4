//! Best-response duopoly dynamics.
//!
//! Two firms alternate simultaneous best responses
//! `x <- max(0, sqrt(x_other / alpha) - x_other)` on the one-good market.
//! The unique interior fixed point is `(v beta, v alpha)/(alpha+beta)^2`
//! and its local behavior is governed by the Jacobian eigenvalue modulus
//! `|r - 1| / (2 sqrt(r))` with `r = alpha/beta`: the dynamics spiral
//! inwards for `r` between `r0^-1` and `r0 = 3 + 2 sqrt(2)`, cycle at the
//! boundary and spiral outwards beyond it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Stability class of the fixed point under the linearized dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    StableSpiral,
    NeutralCenter,
    UnstableSpiral,
}

/// Fixed point, asymmetry ratio and eigenvalue classification.
#[derive(Debug, Clone, Copy)]
pub struct StabilityReport<F> {
    pub fixed_point: (F, F),
    /// Asymmetry ratio `r = alpha / beta`.
    pub r: F,
    /// `|lambda| = |r - 1| / (2 sqrt(r))`.
    pub eigen_modulus: F,
    /// Critical ratio `3 + 2 sqrt(2)`.
    pub r0: F,
    pub class: StabilityClass,
}

impl<F: Scalar> StabilityReport<F> {
    pub fn to_json(&self) -> String {
        let to = |x: F| x.to_f64().unwrap_or(f64::NAN);
        let dto = StabilityJson {
            fixed_point: [to(self.fixed_point.0), to(self.fixed_point.1)],
            r: to(self.r),
            eigen_modulus: to(self.eigen_modulus),
            r0: to(self.r0),
            class: self.class,
        };
        serde_json::to_string_pretty(&dto).expect("report serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct StabilityJson {
    fixed_point: [f64; 2],
    r: f64,
    eigen_modulus: f64,
    r0: f64,
    class: StabilityClass,
}

/// Best response to the opponent's output `x` at own marginal cost
/// `alpha_i`, clamped at zero (large opponent output makes staying out
/// optimal).
pub fn br_step<F: Scalar>(x: F, alpha_i: F) -> Result<F> {
    if x <= F::zero() {
        return Err(Error::Domain(
            "best response undefined against zero output (market share is discontinuous there)"
                .into(),
        ));
    }
    if alpha_i <= F::zero() {
        return Err(Error::Precondition("marginal cost must be > 0".into()));
    }
    Ok(br_step_raw(x, alpha_i).max(F::zero()))
}

#[inline]
fn br_step_raw<F: Scalar>(x: F, alpha_i: F) -> F {
    (x / alpha_i).sqrt() - x
}

/// Interior fixed point `(x*, y*) = (v beta, v alpha) / (alpha + beta)^2`.
pub fn br_fixed_point<F: Scalar>(alpha: F, beta: F, v: F) -> Result<(F, F)> {
    if alpha <= F::zero() || beta <= F::zero() || v <= F::zero() {
        return Err(Error::Precondition("alpha, beta, v must be > 0".into()));
    }
    let s = alpha + beta;
    Ok((v * beta / (s * s), v * alpha / (s * s)))
}

/// Critical asymmetry ratio `3 + 2 sqrt(2)`.
pub fn critical_ratio<F: Scalar>() -> F {
    lit::<F>(3.0) + lit::<F>(2.0) * lit::<F>(2.0).sqrt()
}

/// Eigenvalue modulus of the linearized dynamics at the fixed point.
pub fn eigen_modulus<F: Scalar>(r: F) -> F {
    (r - F::one()).abs() / (lit::<F>(2.0) * r.sqrt())
}

/// Classify the fixed point by the asymmetry ratio `r = alpha/beta`.
///
/// The class is decided by `|lambda|` against 1, equivalently by `r`
/// against `r0` and `1/r0`; ratios within 1e-12 of the critical values are
/// reported as neutral centers.
pub fn classify_stability<F: Scalar>(alpha: F, beta: F) -> Result<StabilityReport<F>> {
    if alpha <= F::zero() || beta <= F::zero() {
        return Err(Error::Precondition("alpha, beta must be > 0".into()));
    }
    let r = alpha / beta;
    let modulus = eigen_modulus(r);
    let r0 = critical_ratio::<F>();
    let tol = lit::<F>(1e-12);
    let class = if (r - r0).abs() <= tol || (r - r0.recip()).abs() <= tol {
        StabilityClass::NeutralCenter
    } else if r0.recip() < r && r < r0 {
        StabilityClass::StableSpiral
    } else {
        StabilityClass::UnstableSpiral
    };
    Ok(StabilityReport {
        fixed_point: br_fixed_point(alpha, beta, F::one())?,
        r,
        eigen_modulus: modulus,
        r0,
        class,
    })
}

/// One recorded step of a best-response trajectory.
#[derive(Debug, Clone, Copy)]
pub struct BrStep<F> {
    pub x: F,
    pub y: F,
    /// Distance to the interior fixed point.
    pub dist: F,
    /// Whether either coordinate was clamped (negative best response, or a
    /// response to an opponent already at zero).
    pub clamped: bool,
}

/// Trajectory of the simultaneous best-response dynamics.
#[derive(Debug, Clone)]
pub struct BrTrajectory<F> {
    pub steps: Vec<BrStep<F>>,
    /// First step at which both coordinates were zero. From there the
    /// dynamics have left the model's domain (no output, no price); the
    /// recorded tail stays at the origin.
    pub terminated_at: Option<usize>,
}

impl<F: Scalar> BrTrajectory<F> {
    /// Mean recorded distance over the window `[t - width, t]`.
    pub fn windowed_distance(&self, t: usize, width: usize) -> F {
        let hi = t.min(self.steps.len() - 1);
        let lo = hi.saturating_sub(width);
        let count = F::from_usize(hi - lo + 1).unwrap();
        let sum: F = self.steps[lo..=hi].iter().map(|s| s.dist).sum();
        sum / count
    }
}

/// Simulate `steps` simultaneous best-response updates from a positive
/// start (unit revenue constant).
///
/// Negative responses are clamped at zero and flagged; a response against
/// an opponent already at zero is taken as zero (the supremum of the
/// payoff is not attained there) and also flagged. Once both coordinates
/// hit zero the orbit is terminated in the sense that the model's dynamics
/// are no longer defined; the state is absorbing and `terminated_at`
/// records the step.
pub fn simulate_br<F: Scalar>(
    x0: F,
    y0: F,
    alpha: F,
    beta: F,
    steps: usize,
) -> Result<BrTrajectory<F>> {
    if x0 <= F::zero() || y0 <= F::zero() {
        return Err(Error::Precondition("start must be strictly positive".into()));
    }
    let fp = br_fixed_point(alpha, beta, F::one())?;
    let dist_to_fp = |x: F, y: F| ((x - fp.0).powi(2) + (y - fp.1).powi(2)).sqrt();

    let mut x = x0;
    let mut y = y0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(BrStep {
        x,
        y,
        dist: dist_to_fp(x, y),
        clamped: false,
    });
    let mut terminated_at = None;
    for t in 1..=steps {
        let mut clamped = false;
        let nx = if y > F::zero() {
            let raw = br_step_raw(y, alpha);
            if raw < F::zero() {
                clamped = true;
                F::zero()
            } else {
                raw
            }
        } else {
            clamped = true;
            F::zero()
        };
        let ny = if x > F::zero() {
            let raw = br_step_raw(x, beta);
            if raw < F::zero() {
                clamped = true;
                F::zero()
            } else {
                raw
            }
        } else {
            clamped = true;
            F::zero()
        };
        x = nx;
        y = ny;
        out.push(BrStep {
            x,
            y,
            dist: dist_to_fp(x, y),
            clamped,
        });
        if x == F::zero() && y == F::zero() && terminated_at.is_none() {
            terminated_at = Some(t);
        }
    }
    Ok(BrTrajectory {
        steps: out,
        terminated_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_hand_values() {
        // alpha=1: x=1/4 -> 1/4 (fixed point), x=1 -> 0, x=4 -> clamped 0
        assert!((br_step(0.25_f64, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(br_step(1.0_f64, 1.0).unwrap(), 0.0);
        assert_eq!(br_step(4.0_f64, 1.0).unwrap(), 0.0);
        assert!(br_step(0.0_f64, 1.0).is_err());
        assert!(br_step(-0.5_f64, 1.0).is_err());
    }

    #[test]
    fn fixed_point_closed_form() {
        assert_eq!(br_fixed_point(1.0_f64, 1.0, 1.0).unwrap(), (0.25, 0.25));
        let (x, y) = br_fixed_point(2.0_f64, 1.0, 1.0).unwrap();
        assert!((x - 1.0 / 9.0).abs() < 1e-15);
        assert!((y - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_is_stationary() {
        for (alpha, beta, v) in [(1.0_f64, 1.0, 1.0), (2.0, 1.0, 1.0), (0.3, 1.7, 1.0)] {
            let (x, y) = br_fixed_point(alpha, beta, v).unwrap();
            assert!((br_step(y, alpha).unwrap() - x).abs() <= 1e-12);
            assert!((br_step(x, beta).unwrap() - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn classification_hand_values() {
        let rep = classify_stability(1.0_f64, 1.0).unwrap();
        assert_eq!(rep.eigen_modulus, 0.0);
        assert_eq!(rep.class, StabilityClass::StableSpiral);

        let rep = classify_stability(4.0_f64, 1.0).unwrap();
        assert!((rep.eigen_modulus - 0.75).abs() < 1e-12);
        assert_eq!(rep.class, StabilityClass::StableSpiral);

        let r0 = critical_ratio::<f64>();
        let rep = classify_stability(r0, 1.0).unwrap();
        assert!((rep.eigen_modulus - 1.0).abs() < 1e-12);
        assert_eq!(rep.class, StabilityClass::NeutralCenter);

        let rep = classify_stability(9.0_f64, 1.0).unwrap();
        assert!((rep.eigen_modulus - 8.0 / 6.0).abs() < 1e-12);
        assert_eq!(rep.class, StabilityClass::UnstableSpiral);
    }

    #[test]
    fn modulus_invariant_under_ratio_inversion() {
        for r in [0.2_f64, 0.5, 2.0, 5.0, 9.0] {
            let a = eigen_modulus::<f64>(r);
            let b = eigen_modulus::<f64>(1.0 / r);
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
            let ca = classify_stability(r, 1.0).unwrap().class;
            let cb = classify_stability(1.0, r).unwrap().class;
            assert_eq!(ca, cb);
        }
    }

    #[test]
    fn simulate_constant_at_fixed_point() {
        let (x, y) = br_fixed_point(2.0_f64, 1.0, 1.0).unwrap();
        let traj = simulate_br(x, y, 2.0, 1.0, 50).unwrap();
        for s in &traj.steps {
            assert!(s.dist < 1e-12);
            assert!(!s.clamped);
        }
        assert!(traj.terminated_at.is_none());
    }

    #[test]
    fn simulate_contracts_for_moderate_asymmetry() {
        let (x, y) = br_fixed_point(4.0_f64, 1.0, 1.0).unwrap();
        let traj = simulate_br(x * 1.1, y * 1.1, 4.0, 1.0, 220).unwrap();
        assert!(traj.windowed_distance(200, 10) < traj.windowed_distance(20, 10));
        assert!(traj.terminated_at.is_none());
    }

    #[test]
    fn simulate_expands_and_terminates_for_strong_asymmetry() {
        let (x, y) = br_fixed_point(9.0_f64, 1.0, 1.0).unwrap();
        let traj = simulate_br(x * 1.01, y * 1.01, 9.0, 1.0, 220).unwrap();
        assert!(traj.windowed_distance(200, 10) > traj.windowed_distance(20, 10));
        // the orbit blows past the clamp and leaves the domain
        assert!(traj.terminated_at.is_some());
        let t = traj.terminated_at.unwrap();
        assert_eq!(traj.steps[t].x, 0.0);
        assert_eq!(traj.steps[t].y, 0.0);
        assert!(traj.steps[t..].iter().all(|s| s.x == 0.0 && s.y == 0.0));
    }

    #[test]
    fn report_serializes() {
        let text = classify_stability(9.0_f64, 1.0).unwrap().to_json();
        assert!(text.contains("unstable_spiral"));
        assert!(text.contains("eigen_modulus"));
    }
}
