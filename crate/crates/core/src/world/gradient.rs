//! Central finite differences of scalar criteria over a planar pose.

use super::PlanarPose;
use crate::Error;

/// Finite-difference steps for translation (meters) and rotation (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientStep {
    delta_xy: f64,
    delta_theta: f64,
}

impl GradientStep {
    pub fn new(delta_xy: f64, delta_theta: f64) -> Result<Self, Error> {
        if !(delta_xy > 0.0 && delta_theta > 0.0) || !delta_xy.is_finite() || !delta_theta.is_finite() {
            return Err(Error::Config(format!(
                "gradient steps must be positive, got {delta_xy} and {delta_theta}"
            )));
        }
        Ok(Self {
            delta_xy,
            delta_theta,
        })
    }

    pub fn delta_xy(&self) -> f64 {
        self.delta_xy
    }

    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }
}

impl Default for GradientStep {
    fn default() -> Self {
        Self {
            delta_xy: 1e-3,
            delta_theta: 1e-3,
        }
    }
}

/// `(∂f/∂x, ∂f/∂y, ∂f/∂θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gradient {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// `(f(v + h) - f(v - h)) / 2h`, failing on non-finite samples.
pub fn central_difference(f: impl Fn(f64) -> f64, at: f64, h: f64) -> Result<f64, Error> {
    let plus = f(at + h);
    let minus = f(at - h);
    if !plus.is_finite() || !minus.is_finite() {
        return Err(Error::Numerical(format!(
            "criterion is not finite near {at} (f(+h) = {plus}, f(-h) = {minus})"
        )));
    }
    Ok((plus - minus) / (2.0 * h))
}

/// Central-difference gradient of `criterion` at `pose`.
pub fn fd_gradient(
    criterion: impl Fn(PlanarPose) -> f64,
    pose: PlanarPose,
    step: GradientStep,
) -> Result<Gradient, Error> {
    let x = central_difference(|v| criterion(PlanarPose::new(v, pose.y, pose.theta())), pose.x, step.delta_xy)?;
    let y = central_difference(|v| criterion(PlanarPose::new(pose.x, v, pose.theta())), pose.y, step.delta_xy)?;
    let theta = central_difference(|v| criterion(pose.with_theta(v)), pose.theta(), step.delta_theta)?;
    Ok(Gradient { x, y, theta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_criterion_has_zero_gradient() {
        let g = fd_gradient(|_| 3.5, PlanarPose::new(1.0, 2.0, 0.3), GradientStep::default()).unwrap();
        assert_eq!(g, Gradient::default());
    }

    #[test]
    fn linear_in_x_is_exact() {
        for delta in [1e-6, 1e-3, 0.5] {
            let step = GradientStep::new(delta, delta).unwrap();
            let g = fd_gradient(|p| p.x, PlanarPose::new(0.25, -1.0, 0.1), step).unwrap();
            assert!((g.x - 1.0).abs() < 1e-9, "{g:?}");
            assert_eq!(g.y, 0.0);
            assert_eq!(g.theta, 0.0);
        }
    }

    #[test]
    fn non_finite_criterion_is_an_error() {
        let r = fd_gradient(|p| if p.x > 0.0 { f64::NAN } else { 0.0 }, PlanarPose::new(0.0, 0.0, 0.0), GradientStep::default());
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn steps_must_be_positive() {
        assert!(GradientStep::new(0.0, 1e-3).is_err());
        assert!(GradientStep::new(1e-3, -1.0).is_err());
    }
}
