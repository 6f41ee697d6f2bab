//! Greedy digit expansions with verifiable certificates.
//!
//! Given a base z with 1/2 < |z| < 1 and a dense enough digit set, the greedy
//! step picks the digit a minimizing |z' − a| and replaces the working point
//! by (z' − a)/z. As long as the chosen digit satisfies |z' − a| ≤ 2|z|, the
//! orbit stays inside the closed disk of radius 2 and the emitted digit
//! prefix (a_0 .. a_N) satisfies |Σ a_n z^n − target| ≤ 2|z|^{N+1}.
//!
//! The remainder recurrence divides by z each step and therefore amplifies
//! rounding; certificates are judged by an independently recomputed
//! compensated partial sum, never by the remainder.

use crate::digitset::{angular_distance, realize_angle, DigitSet, ANGLE_TOLERANCE};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

/// Numerical slack allowed on the orbit bound |x_n| ≤ 2.
pub const REMAINDER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpansionError {
    #[error("base modulus {0} lies outside (1/2, 1)")]
    BaseOutOfRange(f64),
    #[error("target modulus {0} exceeds 2")]
    TargetOutOfRange(f64),
    #[error("working point modulus {0} exceeds 2")]
    PointOutOfRange(f64),
    #[error("no digit within reach: min |z' - a| = {min_distance:.6} exceeds 2|z| = {bound:.6}")]
    NoDigitInRange { min_distance: f64, bound: f64 },
    #[error("expansion failed at step {index}: min |x - a| = {min_distance:.6} exceeds 2|z| = {bound:.6}")]
    StepFailed {
        index: usize,
        min_distance: f64,
        bound: f64,
    },
    #[error("digit {index} (angle {angle}) is not in the certificate's digit set")]
    ForeignDigit { index: usize, angle: f64 },
    #[error("expansion needs at least one step")]
    NoSteps,
    #[error("certificate carries no digits")]
    NoDigits,
}

/// One greedy digit choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub digit_angle: f64,
    pub digit: Complex64,
    /// (z' − a) / z, the next working point.
    pub remainder: Complex64,
}

/// A digit prefix witnessing |Σ a_n z^n − target| ≤ 2|z|^{N+1}.
///
/// `achieved_residual` is recomputed from the digits by compensated
/// summation; `remainder` is the final orbit point x_N, kept for
/// diagnostics only.
#[derive(Debug, Clone)]
pub struct ExpansionCertificate {
    pub z: Complex64,
    pub target: Complex64,
    /// Digit angles a_0 .. a_N, lowest power first.
    pub digit_angles: Vec<f64>,
    pub remainder: Complex64,
    /// 2 |z|^{N+1}.
    pub tail_bound: f64,
    pub achieved_residual: f64,
    pub digit_set: Arc<DigitSet>,
}

/// Outcome of re-checking a certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub achieved_residual: f64,
    pub tail_bound: f64,
    /// Forward-error envelope 8 · N · ε_machine · (max partial-sum magnitude).
    pub numerical_slack: f64,
    /// tail_bound + numerical_slack − achieved_residual.
    pub slack: f64,
    pub passed: bool,
}

fn check_base(z: Complex64) -> Result<f64, ExpansionError> {
    let m = z.norm();
    if m > 0.5 && m < 1.0 {
        Ok(m)
    } else {
        Err(ExpansionError::BaseOutOfRange(m))
    }
}

/// Greedy digit selection: the digit minimizing |point − a|, ties broken by
/// smallest angle, accepted only if |point − a| ≤ 2|z|.
pub fn beta_step(
    z: Complex64,
    point: Complex64,
    digits: &DigitSet,
) -> Result<GreedyStep, ExpansionError> {
    let base_modulus = check_base(z)?;
    let point_modulus = point.norm();
    if point_modulus > 2.0 + REMAINDER_SLACK {
        return Err(ExpansionError::PointOutOfRange(point_modulus));
    }

    let mut best_distance = f64::INFINITY;
    let mut best_angle = 0.0;
    let mut best_digit = Complex64::new(1.0, 0.0);
    for &angle in digits.angles() {
        let digit = realize_angle(angle);
        let distance = (point - digit).norm();
        // strict comparison in ascending angle order = smallest angle on ties
        if distance < best_distance {
            best_distance = distance;
            best_angle = angle;
            best_digit = digit;
        }
    }

    let bound = 2.0 * base_modulus;
    if best_distance <= bound {
        Ok(GreedyStep {
            digit_angle: best_angle,
            digit: best_digit,
            remainder: (point - best_digit) / z,
        })
    } else {
        Err(ExpansionError::NoDigitInRange {
            min_distance: best_distance,
            bound,
        })
    }
}

/// Run the greedy recurrence for `steps` + 1 digits and certify the result.
pub fn expand(
    z: Complex64,
    target: Complex64,
    digits: &Arc<DigitSet>,
    steps: usize,
) -> Result<ExpansionCertificate, ExpansionError> {
    expand_with_trace(z, target, digits, steps).map(|(cert, _)| cert)
}

/// Like [`expand`], also returning the orbit trace x_0 .. x_N.
pub fn expand_with_trace(
    z: Complex64,
    target: Complex64,
    digits: &Arc<DigitSet>,
    steps: usize,
) -> Result<(ExpansionCertificate, Vec<Complex64>), ExpansionError> {
    if steps < 1 {
        return Err(ExpansionError::NoSteps);
    }
    let base_modulus = check_base(z)?;
    let target_modulus = target.norm();
    if target_modulus > 2.0 {
        return Err(ExpansionError::TargetOutOfRange(target_modulus));
    }

    let mut digit_angles = Vec::with_capacity(steps + 1);
    let mut trace = Vec::with_capacity(steps + 1);
    let mut point = target;
    for index in 0..=steps {
        let step = beta_step(z, point, digits).map_err(|e| match e {
            ExpansionError::NoDigitInRange {
                min_distance,
                bound,
            } => ExpansionError::StepFailed {
                index,
                min_distance,
                bound,
            },
            other => other,
        })?;
        digit_angles.push(step.digit_angle);
        point = step.remainder;
        trace.push(point);
    }

    let (sum, _) = evaluate_digit_series(&digit_angles, z);
    let cert = ExpansionCertificate {
        z,
        target,
        digit_angles,
        remainder: point,
        tail_bound: 2.0 * base_modulus.powi(steps as i32 + 1),
        achieved_residual: (sum - target).norm(),
        digit_set: Arc::clone(digits),
    };
    Ok((cert, trace))
}

/// Re-check a certificate: structural validity (base range, digits belong to
/// the stated set), then the tail bound against a freshly computed
/// compensated partial sum.
pub fn validate_certificate(
    cert: &ExpansionCertificate,
) -> Result<ValidationReport, ExpansionError> {
    check_base(cert.z)?;
    let target_modulus = cert.target.norm();
    if target_modulus > 2.0 {
        return Err(ExpansionError::TargetOutOfRange(target_modulus));
    }
    if cert.digit_angles.is_empty() {
        return Err(ExpansionError::NoDigits);
    }
    for (index, &angle) in cert.digit_angles.iter().enumerate() {
        let known = cert
            .digit_set
            .index_of_angle(angle)
            .map(|i| angular_distance(cert.digit_set.angle(i), angle) <= ANGLE_TOLERANCE)
            .unwrap_or(false);
        if !known {
            return Err(ExpansionError::ForeignDigit { index, angle });
        }
    }

    let steps = cert.digit_angles.len() - 1;
    let (sum, max_partial) = evaluate_digit_series(&cert.digit_angles, cert.z);
    let achieved_residual = (sum - cert.target).norm();
    let tail_bound = 2.0 * cert.z.norm().powi(steps as i32 + 1);
    let numerical_slack = 8.0 * steps as f64 * f64::EPSILON * max_partial;
    Ok(ValidationReport {
        achieved_residual,
        tail_bound,
        numerical_slack,
        slack: tail_bound + numerical_slack - achieved_residual,
        passed: achieved_residual <= tail_bound + numerical_slack,
    })
}

/// Σ a_n z^n by Neumaier-compensated summation in evaluation order,
/// returning the sum and the largest partial-sum magnitude seen.
fn evaluate_digit_series(angles: &[f64], z: Complex64) -> (Complex64, f64) {
    let mut sum_re = Compensated::default();
    let mut sum_im = Compensated::default();
    let mut power = Complex64::new(1.0, 0.0);
    let mut max_partial = 0.0_f64;
    for (n, &angle) in angles.iter().enumerate() {
        if n > 0 {
            power *= z;
        }
        let term = realize_angle(angle) * power;
        sum_re.add(term.re);
        sum_im.add(term.im);
        max_partial = max_partial.max(sum_re.value().hypot(sum_im.value()));
    }
    (Complex64::new(sum_re.value(), sum_im.value()), max_partial)
}

#[derive(Default)]
struct Compensated {
    sum: f64,
    correction: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.correction += (self.sum - t) + x;
        } else {
            self.correction += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.correction
    }
}
