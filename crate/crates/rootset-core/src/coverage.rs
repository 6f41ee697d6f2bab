//! Annulus coverage reports and exclusion certificates.
//!
//! Coverage quantifies how a root cloud fills an annulus at a finite
//! resolution: the annulus is tiled by Cartesian squares of side ε (a cell
//! belongs to the grid iff its center's modulus lies in the annulus), and a
//! cell is hit iff some cloud record lies in the closed square.
//!
//! Exclusion goes the other way. For |z| < 1, every value of a power series
//! with unit-modulus coefficients is at least |a_0 + a_1 z| − |z|²/(1−|z|)
//! in magnitude for the best digit pair, because the tail from degree two
//! on is bounded by the geometric majorant |z|²/(1−|z|). A positive margin
//!
//! ```text
//! min over pairs |a_i + a_j z|  −  |z|²/(1−|z|)  >  0
//! ```
//!
//! therefore proves z is not a zero of any such series (nor of any such
//! polynomial). The margin is 1-Lipschitz in the pair term and the majorant
//! is increasing in |z|, which yields certified balls: delta is chosen so
//! that delta plus the majorant's increase over the ball stays below the
//! margin.

use crate::digitset::DigitSet;
use crate::enumeration::RootCloud;
use crate::expansion::{expand, validate_certificate};
use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::Arc;
use thiserror::Error;

/// Balls are kept inside |z| ≤ this bound so the majorant stays finite.
pub const BALL_MODULUS_CAP: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverageError {
    #[error("annulus bounds must satisfy 0 < inner < outer, got [{inner}, {outer}]")]
    BadAnnulus { inner: f64, outer: f64 },
    #[error("cell size must be positive and finite, got {0}")]
    BadCellSize(f64),
    #[error("no cell center falls in the annulus [{inner}, {outer}] at cell size {cell_size}")]
    EmptyGrid {
        inner: f64,
        outer: f64,
        cell_size: f64,
    },
    #[error("point modulus {0} must be below 1")]
    ModulusOutOfRange(f64),
    #[error("need at least 8 samples, got {0}")]
    TooFewSamples(usize),
}

/// Cartesian tiling of an annulus. Cell (ix, iy) is the closed square
/// [ix·ε, (ix+1)·ε] × [iy·ε, (iy+1)·ε]; it belongs to the grid iff its
/// center has modulus in [r_inner, r_outer]. Cells are ordered by
/// (iy, ix) ascending, deterministically.
#[derive(Debug, Clone)]
pub struct AnnulusGrid {
    r_inner: f64,
    r_outer: f64,
    cell_size: f64,
    cells: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
}

impl AnnulusGrid {
    pub fn new(r_inner: f64, r_outer: f64, cell_size: f64) -> Result<Self, CoverageError> {
        if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
            return Err(CoverageError::BadAnnulus {
                inner: r_inner,
                outer: r_outer,
            });
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(CoverageError::BadCellSize(cell_size));
        }
        let reach = (r_outer / cell_size).ceil() as i64 + 1;
        let mut cells = Vec::new();
        let mut index = HashMap::new();
        for iy in -reach..=reach {
            for ix in -reach..=reach {
                let center_re = (ix as f64 + 0.5) * cell_size;
                let center_im = (iy as f64 + 0.5) * cell_size;
                let modulus = center_re.hypot(center_im);
                if modulus >= r_inner && modulus <= r_outer {
                    index.insert((ix, iy), cells.len());
                    cells.push((ix, iy));
                }
            }
        }
        if cells.is_empty() {
            return Err(CoverageError::EmptyGrid {
                inner: r_inner,
                outer: r_outer,
                cell_size,
            });
        }
        Ok(AnnulusGrid {
            r_inner,
            r_outer,
            cell_size,
            cells,
            index,
        })
    }

    pub fn r_inner(&self) -> f64 {
        self.r_inner
    }

    pub fn r_outer(&self) -> f64 {
        self.r_outer
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cells(&self) -> &[(i64, i64)] {
        &self.cells
    }

    pub fn total_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_center(&self, cell: (i64, i64)) -> Complex64 {
        Complex64::new(
            (cell.0 as f64 + 0.5) * self.cell_size,
            (cell.1 as f64 + 0.5) * self.cell_size,
        )
    }

    /// Grid positions of every cell whose closed square contains `z`.
    /// A point on a shared edge belongs to each adjacent cell.
    fn cells_containing(&self, z: Complex64) -> Vec<usize> {
        let eps = self.cell_size;
        let ix0 = (z.re / eps).floor() as i64;
        let iy0 = (z.im / eps).floor() as i64;
        let mut hits = Vec::new();
        for ix in ix0 - 1..=ix0 + 1 {
            if !(ix as f64 * eps <= z.re && z.re <= (ix + 1) as f64 * eps) {
                continue;
            }
            for iy in iy0 - 1..=iy0 + 1 {
                if !(iy as f64 * eps <= z.im && z.im <= (iy + 1) as f64 * eps) {
                    continue;
                }
                if let Some(&slot) = self.index.get(&(ix, iy)) {
                    hits.push(slot);
                }
            }
        }
        hits
    }
}

/// Hit map of a cloud against a grid.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub r_inner: f64,
    pub r_outer: f64,
    pub cell_size: f64,
    /// Aligned with the grid's cell order.
    pub hit_flags: Vec<bool>,
    pub hit_cells: usize,
    pub total_cells: usize,
    pub hit_fraction: f64,
}

/// Mark every grid cell containing at least one cloud record.
pub fn coverage_report(cloud: &RootCloud, grid: &AnnulusGrid) -> CoverageReport {
    let mut hit_flags = vec![false; grid.total_cells()];
    for record in &cloud.records {
        for slot in grid.cells_containing(record.z) {
            hit_flags[slot] = true;
        }
    }
    let hit_cells = hit_flags.iter().filter(|&&h| h).count();
    CoverageReport {
        r_inner: grid.r_inner,
        r_outer: grid.r_outer,
        cell_size: grid.cell_size,
        hit_cells,
        total_cells: hit_flags.len(),
        hit_fraction: hit_cells as f64 / hit_flags.len() as f64,
        hit_flags,
    }
}

/// The tail majorant t²/(1−t).
fn majorant(t: f64) -> f64 {
    t * t / (1.0 - t)
}

/// min over ordered digit pairs (a_i, a_j) of |a_i + a_j z| − |z|²/(1−|z|).
/// Positive proves z is not a zero of any polynomial or power series over
/// the digit set; at an actual root the value is necessarily ≤ 0.
pub fn exclusion_test(z: Complex64, digit_set: &DigitSet) -> Result<f64, CoverageError> {
    let modulus = z.norm();
    if modulus >= 1.0 {
        return Err(CoverageError::ModulusOutOfRange(modulus));
    }
    let digits = digit_set.digits();
    let mut min_pair = f64::INFINITY;
    for &a in &digits {
        for &b in &digits {
            min_pair = min_pair.min((a + b * z).norm());
        }
    }
    Ok(min_pair - majorant(modulus))
}

/// A certified root-free ball: the margin stays positive on all of
/// B(z, delta).
#[derive(Debug, Clone)]
pub struct ExclusionCertificate {
    pub z: Complex64,
    pub margin: f64,
    pub delta: f64,
    pub digit_set: Arc<DigitSet>,
}

/// Largest delta with delta + majorant(|z|+delta) − majorant(|z|) below the
/// margin: the pair term loses at most delta over the ball (the digits are
/// unimodular) and the majorant gains at most its increment at the outer
/// modulus, so the margin stays positive throughout. Found by bisection,
/// capped so the ball stays inside |z| ≤ [`BALL_MODULUS_CAP`].
pub fn exclusion_ball(
    z: Complex64,
    digit_set: &Arc<DigitSet>,
) -> Result<Option<ExclusionCertificate>, CoverageError> {
    let margin = exclusion_test(z, digit_set)?;
    if margin <= 0.0 {
        return Ok(None);
    }
    let modulus = z.norm();
    let cap = BALL_MODULUS_CAP - modulus;
    if cap <= 0.0 {
        return Ok(None);
    }
    let budget = margin * (1.0 - 1e-9);
    let spend = |delta: f64| delta + majorant(modulus + delta) - majorant(modulus);
    let mut lo = 0.0;
    let mut hi = cap;
    if spend(hi) <= budget {
        lo = hi;
    } else {
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if spend(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    if lo <= 0.0 {
        return Ok(None);
    }
    Ok(Some(ExclusionCertificate {
        z,
        margin,
        delta: lo,
        digit_set: Arc::clone(digit_set),
    }))
}

/// Outcome of a hole search: the best certificate if any sampled margin was
/// positive, plus the best sampled point either way.
#[derive(Debug, Clone)]
pub struct HoleSearchOutcome {
    pub certificate: Option<ExclusionCertificate>,
    pub best_point: Complex64,
    pub best_margin: f64,
}

/// Sweep `samples` equally spaced arguments on the circle of the given
/// modulus, refine the best argument by golden-section search, and certify
/// the winner. Returns no certificate when every sampled margin is ≤ 0.
pub fn hole_search(
    digit_set: &Arc<DigitSet>,
    modulus: f64,
    samples: usize,
) -> Result<HoleSearchOutcome, CoverageError> {
    if !(modulus > 0.0 && modulus < 1.0) {
        return Err(CoverageError::ModulusOutOfRange(modulus));
    }
    if samples < 8 {
        return Err(CoverageError::TooFewSamples(samples));
    }

    let margin_at = |theta: f64| {
        let point = Complex64::from_polar(modulus, theta);
        exclusion_test(point, digit_set).expect("modulus below 1")
    };

    let mut best_index = 0;
    let mut best_margin = f64::NEG_INFINITY;
    for k in 0..samples {
        let margin = margin_at(TAU * k as f64 / samples as f64);
        if margin > best_margin {
            best_margin = margin;
            best_index = k;
        }
    }
    let coarse_theta = TAU * best_index as f64 / samples as f64;
    if best_margin <= 0.0 {
        return Ok(HoleSearchOutcome {
            certificate: None,
            best_point: Complex64::from_polar(modulus, coarse_theta),
            best_margin,
        });
    }

    // golden-section maximization on the bracket spanning the neighbors
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let step = TAU / samples as f64;
    let mut lo = coarse_theta - step;
    let mut hi = coarse_theta + step;
    let mut inner_lo = hi - golden * (hi - lo);
    let mut inner_hi = lo + golden * (hi - lo);
    let mut margin_lo = margin_at(inner_lo);
    let mut margin_hi = margin_at(inner_hi);
    for _ in 0..64 {
        if margin_lo < margin_hi {
            lo = inner_lo;
            inner_lo = inner_hi;
            margin_lo = margin_hi;
            inner_hi = lo + golden * (hi - lo);
            margin_hi = margin_at(inner_hi);
        } else {
            hi = inner_hi;
            inner_hi = inner_lo;
            margin_hi = margin_lo;
            inner_lo = hi - golden * (hi - lo);
            margin_lo = margin_at(inner_lo);
        }
    }
    let refined_theta = 0.5 * (lo + hi);
    let refined_margin = margin_at(refined_theta);
    let (theta, margin) = if refined_margin >= best_margin {
        (refined_theta, refined_margin)
    } else {
        (coarse_theta, best_margin)
    };

    let point = Complex64::from_polar(modulus, theta);
    Ok(HoleSearchOutcome {
        certificate: exclusion_ball(point, digit_set)?,
        best_point: point,
        best_margin: margin,
    })
}

/// Minimum margin over a side × side lattice restricted to the certified
/// ball. Positive everywhere confirms the certificate by brute force.
pub fn ball_scan_min_margin(certificate: &ExclusionCertificate, side: usize) -> f64 {
    let delta = certificate.delta;
    let mut min_margin = f64::INFINITY;
    for row in 0..side {
        for col in 0..side {
            let re = certificate.z.re - delta + 2.0 * delta * col as f64 / (side - 1) as f64;
            let im = certificate.z.im - delta + 2.0 * delta * row as f64 / (side - 1) as f64;
            let point = Complex64::new(re, im);
            if (point - certificate.z).norm() > delta {
                continue;
            }
            let margin = exclusion_test(point, &certificate.digit_set)
                .expect("ball stays below modulus 1");
            min_margin = min_margin.min(margin);
        }
    }
    min_margin
}

/// Per-sample result of the report-only comparison between certified
/// expansion points and the enumerated cloud.
#[derive(Debug, Clone)]
pub struct SampleCheck {
    pub z: Complex64,
    pub expanded: bool,
    pub nearest: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DensityCrossCheck {
    pub samples: Vec<SampleCheck>,
    pub expanded_count: usize,
    pub max_distance: Option<f64>,
    pub median_distance: Option<f64>,
    pub cloud_empty: bool,
}

/// For each sample admitting a validated expansion certificate, report the
/// distance to the nearest cloud record. Purely informational: no pass/fail
/// judgment is made, only summary statistics.
pub fn density_cross_check(
    digit_set: &Arc<DigitSet>,
    cloud: &RootCloud,
    samples: &[Complex64],
    steps: usize,
) -> DensityCrossCheck {
    let cloud_empty = cloud.records.is_empty();
    let mut checks = Vec::with_capacity(samples.len());
    let mut distances = Vec::new();
    for &z in samples {
        let expanded = expand(z, Complex64::new(0.0, 0.0), digit_set, steps)
            .ok()
            .and_then(|cert| validate_certificate(&cert).ok())
            .map(|report| report.passed)
            .unwrap_or(false);
        let nearest = if cloud_empty || !expanded {
            None
        } else {
            let d = cloud
                .records
                .iter()
                .map(|r| (r.z - z).norm())
                .fold(f64::INFINITY, f64::min);
            distances.push(d);
            Some(d)
        };
        checks.push(SampleCheck {
            z,
            expanded,
            nearest,
        });
    }
    distances.sort_by(f64::total_cmp);
    let max_distance = distances.last().copied();
    let median_distance = if distances.is_empty() {
        None
    } else {
        let mid = distances.len() / 2;
        Some(if distances.len() % 2 == 1 {
            distances[mid]
        } else {
            0.5 * (distances[mid - 1] + distances[mid])
        })
    };
    DensityCrossCheck {
        expanded_count: checks.iter().filter(|c| c.expanded).count(),
        samples: checks,
        max_distance,
        median_distance,
        cloud_empty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{all_roots, ResourceGuard, SymmetryMode};

    fn littlewood_set() -> Arc<DigitSet> {
        Arc::new(DigitSet::uniform(2).unwrap())
    }

    #[test]
    fn margin_at_half_i() {
        let margin = exclusion_test(Complex64::new(0.0, 0.5), &littlewood_set()).unwrap();
        assert!((margin - (1.25f64.sqrt() - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn margin_vanishes_at_roots() {
        // (sqrt 5 - 1)/2 is a root of -1 + z + z^2
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let margin = exclusion_test(Complex64::new(golden, 0.0), &littlewood_set()).unwrap();
        assert!(margin <= 0.0);
        assert!((margin - (-0.6180339887498951)).abs() < 1e-12);
    }

    #[test]
    fn margin_near_origin_is_large() {
        let margin = exclusion_test(Complex64::new(0.01, 0.0), &littlewood_set()).unwrap();
        assert!((margin - 0.98989898989899).abs() < 1e-10);
    }

    #[test]
    fn exclusion_test_rejects_unit_disk_exterior() {
        assert!(matches!(
            exclusion_test(Complex64::new(1.0, 0.0), &littlewood_set()),
            Err(CoverageError::ModulusOutOfRange(_))
        ));
    }

    #[test]
    fn ball_at_half_i_is_wide_and_sound() {
        let set = littlewood_set();
        let cert = exclusion_ball(Complex64::new(0.0, 0.5), &set)
            .unwrap()
            .expect("positive margin");
        assert!(cert.delta > 0.1, "delta = {}", cert.delta);
        assert!(ball_scan_min_margin(&cert, 100) > 0.0);
    }

    #[test]
    fn no_ball_at_a_root() {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let set = littlewood_set();
        assert!(exclusion_ball(Complex64::new(golden, 0.0), &set)
            .unwrap()
            .is_none());
    }

    #[test]
    fn hole_search_finds_the_imaginary_axis_hole() {
        let set = littlewood_set();
        let outcome = hole_search(&set, 0.5, 360).unwrap();
        let cert = outcome.certificate.expect("hole at modulus 1/2");
        let target = Complex64::new(0.0, 0.5);
        assert!(
            (cert.z - target).norm() < 0.01,
            "hole center {} not near i/2",
            cert.z
        );
        assert!((outcome.best_margin - (1.25f64.sqrt() - 0.5)).abs() < 1e-6);
    }

    #[test]
    fn hole_search_on_dense_set_reports_tiny_margin() {
        let set = Arc::new(DigitSet::uniform(360).unwrap());
        let outcome = hole_search(&set, 0.5, 64).unwrap();
        assert!(outcome.best_margin < 1e-4);
        if let Some(cert) = outcome.certificate {
            assert!(ball_scan_min_margin(&cert, 32) > 0.0);
        }
    }

    #[test]
    fn hole_search_validates_input() {
        let set = littlewood_set();
        assert!(matches!(
            hole_search(&set, 1.2, 64),
            Err(CoverageError::ModulusOutOfRange(_))
        ));
        assert!(matches!(
            hole_search(&set, 0.5, 4),
            Err(CoverageError::TooFewSamples(4))
        ));
    }

    #[test]
    fn grid_construction_is_deterministic() {
        let a = AnnulusGrid::new(0.85, 1.15, 0.05).unwrap();
        let b = AnnulusGrid::new(0.85, 1.15, 0.05).unwrap();
        assert_eq!(a.cells(), b.cells());
        assert_eq!(a.total_cells(), 752);
        assert!(AnnulusGrid::new(1.15, 0.85, 0.05).is_err());
        assert!(AnnulusGrid::new(0.85, 1.15, 0.0).is_err());
        // a ring thinner than the lattice spacing around it catches nothing
        assert!(matches!(
            AnnulusGrid::new(1e-9, 2e-9, 0.5),
            Err(CoverageError::EmptyGrid { .. })
        ));
    }

    #[test]
    fn coverage_of_cell_centers_is_total() {
        let grid = AnnulusGrid::new(0.6, 1.0, 0.1).unwrap();
        let set = littlewood_set();
        let mut cloud = all_roots(&set, 1, SymmetryMode::None, &ResourceGuard::default()).unwrap();
        cloud.records.clear();
        let report = coverage_report(&cloud, &grid);
        assert_eq!(report.hit_cells, 0);
        assert_eq!(report.hit_fraction, 0.0);

        // synthesize one record per cell center
        let template = all_roots(&set, 1, SymmetryMode::None, &ResourceGuard::default())
            .unwrap()
            .records[0]
            .clone();
        for &cell in grid.cells() {
            let mut record = template.clone();
            record.z = grid.cell_center(cell);
            cloud.records.push(record);
        }
        let report = coverage_report(&cloud, &grid);
        assert_eq!(report.hit_cells, report.total_cells);
        assert_eq!(report.hit_fraction, 1.0);
    }

    #[test]
    fn points_on_shared_edges_hit_both_cells() {
        let grid = AnnulusGrid::new(0.5, 1.5, 0.5).unwrap();
        // (1.0, 0.25) lies on the shared edge of cells (1,0) and (2,0)... of
        // the column boundary at re = 1.0 = 2 * 0.5
        let hits = grid.cells_containing(Complex64::new(1.0, 0.25));
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn cross_check_reports_distances() {
        let set = Arc::new(DigitSet::uniform(12).unwrap());
        let cloud = all_roots(&set, 3, SymmetryMode::None, &ResourceGuard::default()).unwrap();
        // one sample right at an enumerated root (any interior record), a few off
        let interior = cloud
            .records
            .iter()
            .find(|r| r.z.norm() > 0.55 && r.z.norm() < 0.95)
            .expect("interior root");
        let samples = vec![
            interior.z,
            Complex64::new(0.0, 0.8),
            Complex64::new(-0.6, 0.3),
        ];
        let report = density_cross_check(&set, &cloud, &samples, 120);
        assert_eq!(report.expanded_count, 3);
        assert!(!report.cloud_empty);
        assert!(report.samples[0].nearest.unwrap() < 1e-12);
        assert!(report.max_distance.unwrap() >= report.median_distance.unwrap());

        // empty cloud flags
        let mut empty = cloud.clone();
        empty.records.clear();
        let report = density_cross_check(&set, &empty, &samples, 120);
        assert!(report.cloud_empty);
        assert!(report.max_distance.is_none());
        assert!(report.samples.iter().all(|s| s.nearest.is_none()));
    }
}
