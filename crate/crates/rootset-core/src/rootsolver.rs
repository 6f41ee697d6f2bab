//! Certified root finding for unit-modulus-coefficient polynomials.
//!
//! The solver is Aberth–Ehrlich simultaneous iteration started on the unit
//! circle (the geometric mean of the containing annulus [1/2, 2]), with a
//! companion-matrix eigenvalue fallback when the sweep budget runs out.
//! Multiple roots stall plain Newton-type iteration at roughly
//! eps^(1/m) accuracy, so approximations are post-processed: clusters are
//! detected, re-centered by Newton against the (m−1)-th derivative (which
//! has a simple zero at an m-fold root), verified by derivative-magnitude
//! thresholding, and only then merged.
//!
//! Residuals are scaled by Σ |z|^n, the worst-case magnitude of a
//! unit-modulus-coefficient evaluation, so 1e-10 means ten digits below the
//! trivial bound regardless of degree or location in the annulus.

use crate::digitset::DigitSet;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::sync::Arc;
use thiserror::Error;

/// Acceptance bound on the scaled residual |P(z)| / Σ|z|^n of a root.
pub const SCALED_RESIDUAL_BOUND: f64 = 1e-10;
/// Scaled-magnitude bound under which a derivative counts as vanishing.
pub const DERIVATIVE_BOUND: f64 = 1e-8;
/// Final merge tolerance: approximations closer than this become one record.
pub const MERGE_TOLERANCE: f64 = 1e-9;
/// Sweep budget for the simultaneous iteration.
pub const MAX_SWEEPS: usize = 200;
/// A sweep whose largest movement is below this counts as converged.
pub const CONVERGENCE_MOVEMENT: f64 = 1e-14;

/// Width of the cluster-detection pass. An m-fold root splits numerically
/// into a cluster of radius ~eps^(1/m) (about 1e-5 for triples), while
/// genuinely distinct roots of these polynomials sit far wider apart.
const CLUSTER_DETECT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolynomialError {
    #[error("a polynomial needs at least two coefficients, got {0}")]
    TooFewCoefficients(usize),
    #[error("digit index {index} at position {position} is out of range for {len} digits")]
    DigitIndexOutOfRange {
        position: usize,
        index: u32,
        len: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("point is not a root: scaled residual {residual:.3e}")]
    NotARoot { residual: f64 },
}

/// A polynomial whose coefficient a_n is the digit at `indices[n]`,
/// lowest power first. Degree = len − 1 ≥ 1; the leading coefficient has
/// modulus 1, so the degree never collapses.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularPolynomial {
    digit_set: Arc<DigitSet>,
    indices: Vec<u32>,
}

/// A located root with provenance.
#[derive(Debug, Clone)]
pub struct RootRecord {
    pub z: Complex64,
    /// Scaled residual |P(z)| / Σ|z|^n.
    pub residual: f64,
    /// Cluster multiplicity assigned by the solver's merge pass.
    pub multiplicity: u32,
    pub source: Arc<UnimodularPolynomial>,
}

/// Solver outcome. `converged` is false when some record violates the
/// residual or annulus bounds after all fallbacks; such records are kept so
/// callers can inspect them, never silently dropped or repaired.
#[derive(Debug, Clone)]
pub struct RootSolve {
    pub records: Vec<RootRecord>,
    pub converged: bool,
    pub used_fallback: bool,
}

impl UnimodularPolynomial {
    pub fn new(digit_set: Arc<DigitSet>, indices: Vec<u32>) -> Result<Self, PolynomialError> {
        if indices.len() < 2 {
            return Err(PolynomialError::TooFewCoefficients(indices.len()));
        }
        let len = digit_set.len();
        for (position, &index) in indices.iter().enumerate() {
            if index as usize >= len {
                return Err(PolynomialError::DigitIndexOutOfRange {
                    position,
                    index,
                    len,
                });
            }
        }
        Ok(UnimodularPolynomial { digit_set, indices })
    }

    pub fn degree(&self) -> usize {
        self.indices.len() - 1
    }

    pub fn digit_set(&self) -> &Arc<DigitSet> {
        &self.digit_set
    }

    pub fn digit_indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn coefficient(&self, n: usize) -> Complex64 {
        self.digit_set.digit(self.indices[n] as usize)
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.indices
            .iter()
            .map(|&i| self.digit_set.digit(i as usize))
            .collect()
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        horner(&self.coefficients(), z)
    }

    /// Coefficients read high power to low: the reversed polynomial
    /// z^d · P(1/z), whose roots are the reciprocals of P's.
    pub fn reversed(&self) -> Self {
        let mut indices = self.indices.clone();
        indices.reverse();
        UnimodularPolynomial {
            digit_set: Arc::clone(&self.digit_set),
            indices,
        }
    }

    /// |P(z)| / Σ |z|^n. Zero exactly when P(z) = 0 exactly.
    pub fn residual(&self, z: Complex64) -> f64 {
        scaled_magnitude(&self.coefficients(), z)
    }

    /// Largest m ≤ max_order with P, P', ..., P^(m−1) all vanishing at z to
    /// scaled magnitude [`DERIVATIVE_BOUND`]. Requires z to be a root to
    /// [`SCALED_RESIDUAL_BOUND`]; always at least 1.
    pub fn multiplicity_estimate(&self, z: Complex64, max_order: u32) -> Result<u32, SolverError> {
        let residual = self.residual(z);
        if residual > SCALED_RESIDUAL_BOUND {
            return Err(SolverError::NotARoot { residual });
        }
        let mut order = 1;
        let mut derivative = differentiate(&self.coefficients());
        while order < max_order && !derivative.is_empty() {
            if scaled_magnitude(&derivative, z) > DERIVATIVE_BOUND {
                break;
            }
            order += 1;
            derivative = differentiate(&derivative);
        }
        Ok(order)
    }

    /// All roots, counted with multiplicity.
    pub fn roots(&self) -> RootSolve {
        solve_roots(&Arc::new(self.clone()))
    }

    /// Position of this coefficient vector in the lexicographic enumeration
    /// of all digit-index vectors of the same length (a_0 most significant).
    pub fn lexicographic_rank(&self) -> u128 {
        let base = self.digit_set.len() as u128;
        self.indices
            .iter()
            .fold(0u128, |rank, &i| rank * base + i as u128)
    }
}

/// Solve for all roots of `source`, sharing it into each record.
pub fn solve_roots(source: &Arc<UnimodularPolynomial>) -> RootSolve {
    let coefficients = source.coefficients();
    let (mut approximations, aberth_converged) = aberth(&coefficients);
    let mut used_fallback = false;
    if !aberth_converged {
        if let Some(eigenvalues) = companion_roots(&coefficients) {
            approximations = eigenvalues;
            used_fallback = true;
        }
    }

    let located = locate_and_merge(&coefficients, &approximations);
    let mut converged = true;
    let mut records = Vec::with_capacity(located.len());
    for (z, multiplicity) in located {
        let residual = scaled_magnitude(&coefficients, z);
        let modulus = z.norm();
        if residual > SCALED_RESIDUAL_BOUND || !(modulus > 0.5 && modulus < 2.0) {
            converged = false;
        }
        records.push(RootRecord {
            z,
            residual,
            multiplicity,
            source: Arc::clone(source),
        });
    }
    RootSolve {
        records,
        converged,
        used_fallback,
    }
}

fn horner(coefficients: &[Complex64], z: Complex64) -> Complex64 {
    let mut value = Complex64::new(0.0, 0.0);
    for &c in coefficients.iter().rev() {
        value = value * z + c;
    }
    value
}

fn horner_with_derivative(coefficients: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut derivative = Complex64::new(0.0, 0.0);
    for &c in coefficients.iter().rev() {
        derivative = derivative * z + value;
        value = value * z + c;
    }
    (value, derivative)
}

/// |eval(coefficients, z)| / Σ |c_n| |z|^n.
fn scaled_magnitude(coefficients: &[Complex64], z: Complex64) -> f64 {
    let modulus = z.norm();
    let mut scale = 0.0;
    let mut power = 1.0;
    for c in coefficients {
        scale += c.norm() * power;
        power *= modulus;
    }
    horner(coefficients, z).norm() / scale
}

fn differentiate(coefficients: &[Complex64]) -> Vec<Complex64> {
    coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, &c)| c * n as f64)
        .collect()
}

/// Aberth–Ehrlich simultaneous iteration (Gauss–Seidel flavored). Returns
/// the approximations and whether the movement criterion was met within the
/// sweep budget.
fn aberth(coefficients: &[Complex64]) -> (Vec<Complex64>, bool) {
    let degree = coefficients.len() - 1;
    if degree == 1 {
        return (vec![-coefficients[0] / coefficients[1]], true);
    }

    // initial guesses on the unit circle, offset so no guess starts on the
    // real axis or at a root of unity shared by many inputs
    let mut zs: Vec<Complex64> = (0..degree)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / degree as f64 + 0.25))
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut max_movement = 0.0_f64;
        'points: for j in 0..degree {
            let (value, derivative) = horner_with_derivative(coefficients, zs[j]);
            if value == Complex64::new(0.0, 0.0) {
                continue;
            }
            let newton = if derivative == Complex64::new(0.0, 0.0) {
                // stationary point: nudge deterministically and retry next sweep
                zs[j] += Complex64::new(1e-6, 1e-6);
                max_movement = max_movement.max(1e-6);
                continue;
            } else {
                value / derivative
            };
            let mut repulsion = Complex64::new(0.0, 0.0);
            for k in 0..degree {
                if k != j {
                    let diff = zs[j] - zs[k];
                    if diff == Complex64::new(0.0, 0.0) {
                        // coincident approximations: separate and retry
                        zs[j] += Complex64::new(1e-9 * (j + 1) as f64, 1e-9);
                        max_movement = max_movement.max(1e-8);
                        continue 'points;
                    }
                    repulsion += diff.inv();
                }
            }
            let denominator = Complex64::new(1.0, 0.0) - newton * repulsion;
            let correction = if denominator == Complex64::new(0.0, 0.0) {
                newton
            } else {
                newton / denominator
            };
            if !correction.is_finite() {
                continue;
            }
            zs[j] -= correction;
            max_movement = max_movement.max(correction.norm());
        }
        if max_movement < CONVERGENCE_MOVEMENT {
            return (zs, true);
        }
    }
    (zs, false)
}

/// Eigenvalues of the Frobenius companion matrix.
fn companion_roots(coefficients: &[Complex64]) -> Option<Vec<Complex64>> {
    let degree = coefficients.len() - 1;
    if degree == 1 {
        return Some(vec![-coefficients[0] / coefficients[1]]);
    }
    let lead = coefficients[degree];
    let matrix = DMatrix::<Complex64>::from_fn(degree, degree, |row, col| {
        if col == degree - 1 {
            -coefficients[row] / lead
        } else if row == col + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eigenvalues = matrix.eigenvalues()?;
    let collected: Vec<Complex64> = eigenvalues.iter().cloned().collect();
    collected.iter().all(|z| z.is_finite()).then_some(collected)
}

/// Newton polish keeping the best iterate seen (plain Newton jitters at the
/// noise floor near multiple roots).
fn newton_polish(coefficients: &[Complex64], start: Complex64, max_iterations: usize) -> Complex64 {
    let mut z = start;
    let mut best = start;
    let mut best_magnitude = horner(coefficients, start).norm();
    for _ in 0..max_iterations {
        let (value, derivative) = horner_with_derivative(coefficients, z);
        if value == Complex64::new(0.0, 0.0) || derivative == Complex64::new(0.0, 0.0) {
            break;
        }
        let step = value / derivative;
        if !step.is_finite() {
            break;
        }
        z -= step;
        let magnitude = horner(coefficients, z).norm();
        if magnitude < best_magnitude {
            best_magnitude = magnitude;
            best = z;
        }
        if step.norm() < 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    best
}

/// Union-find clustering at `tolerance`; groups come out ordered by their
/// smallest member index.
fn cluster_indices(points: &[Complex64], tolerance: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (points[i] - points[j]).norm() <= tolerance {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = b.min(a);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if group_of[root] == usize::MAX {
            group_of[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of[root]].push(i);
    }
    groups
}

/// Re-center a suspected m-fold root: Newton against the (m−1)-th
/// derivative from the cluster centroid, then verify that P through
/// P^(m−1) all vanish there to [`DERIVATIVE_BOUND`].
fn refine_multiple_root(
    coefficients: &[Complex64],
    centroid: Complex64,
    multiplicity: usize,
) -> Option<Complex64> {
    let mut pilot = coefficients.to_vec();
    for _ in 0..multiplicity - 1 {
        pilot = differentiate(&pilot);
    }
    if pilot.len() < 2 {
        return None;
    }
    let refined = newton_polish(&pilot, centroid, 24);
    if (refined - centroid).norm() > 1e-3 {
        return None;
    }
    let mut derivative = coefficients.to_vec();
    for _ in 0..multiplicity {
        if scaled_magnitude(&derivative, refined) > DERIVATIVE_BOUND {
            return None;
        }
        derivative = differentiate(&derivative);
    }
    Some(refined)
}

/// Polish, detect multiple-root clusters, refine them, and merge at
/// [`MERGE_TOLERANCE`]. The multiset of outputs always carries total
/// multiplicity equal to the degree.
fn locate_and_merge(
    coefficients: &[Complex64],
    approximations: &[Complex64],
) -> Vec<(Complex64, u32)> {
    let mut points: Vec<Complex64> = approximations
        .iter()
        .map(|&z| newton_polish(coefficients, z, 12))
        .collect();

    for group in cluster_indices(&points, CLUSTER_DETECT_TOLERANCE) {
        if group.len() < 2 {
            continue;
        }
        let centroid = group.iter().map(|&i| points[i]).sum::<Complex64>() / group.len() as f64;
        if let Some(refined) = refine_multiple_root(coefficients, centroid, group.len()) {
            for &i in &group {
                points[i] = refined;
            }
        }
    }

    cluster_indices(&points, MERGE_TOLERANCE)
        .into_iter()
        .map(|group| {
            let center = group.iter().map(|&i| points[i]).sum::<Complex64>() / group.len() as f64;
            (center, group.len() as u32)
        })
        .collect()
}
