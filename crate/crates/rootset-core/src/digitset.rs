//! Digit alphabets on the unit circle.
//!
//! A [`DigitSet`] is a finite set of unit-modulus "digits" e^{iθ}, stored as
//! sorted angles in `[0, 2π)`. Density of the set is measured by the largest
//! angular gap between circularly consecutive digits; [`density_threshold`]
//! and [`DigitSet::min_covered_radius`] translate between that gap and the
//! annulus radius on which greedy expansions are guaranteed to succeed.
//!
//! Two readings of "δ-dense" are possible: max gap ≤ δ (every open arc of
//! width δ contains a digit), or every point of the circle within δ of a
//! digit (a factor-2 difference). We use the gap reading throughout; it is
//! the one under which the greedy step bound below holds.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

/// Absolute tolerance used when deduplicating and matching angles.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// Errors from digit-set construction and threshold queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DigitSetError {
    #[error("digit set needs at least one angle")]
    Empty,
    #[error("angle at position {0} is not finite")]
    NonFinite(usize),
    #[error("radius {0} must lie strictly between 1/2 and 1")]
    RadiusOutOfRange(f64),
    #[error("unknown digit set spec `{0}` (expected uniform:k, angles:a,b,..., or littlewood)")]
    UnknownSpec(String),
    #[error("invalid number `{0}` in digit set spec")]
    InvalidNumber(String),
}

/// A finite set of unit-modulus digits, stored as strictly increasing angles
/// in `[0, 2π)`. Immutable after construction; cheap to share.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitSet {
    angles: Vec<f64>,
}

/// Realize e^{iθ}, snapping sub-ulp trigonometric dust so that angles at
/// exact quadrants produce exact Gaussian units (e.g. angle π gives -1+0i).
pub fn realize_angle(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    let re = if c.abs() < 4e-16 { 0.0 } else { c };
    let im = if s.abs() < 4e-16 { 0.0 } else { s };
    Complex64::new(re, im)
}

/// Angular distance on the circle: the interior angle of the sector spanned
/// by e^{iθ} and e^{iθ'}. Symmetric, in `[0, π]`.
pub fn angular_distance(theta: f64, other: f64) -> f64 {
    let delta = (theta - other).rem_euclid(TAU);
    delta.min(TAU - delta)
}

/// The gap bound 2·arccos((5 − 4r²)/4): if a digit set's largest gap stays
/// below this value, greedy expansion succeeds everywhere on the annulus of
/// moduli `[r, 1)`. Strictly increasing in `r` on (1/2, 1).
pub fn density_threshold(r: f64) -> Result<f64, DigitSetError> {
    if !(r > 0.5 && r < 1.0) {
        return Err(DigitSetError::RadiusOutOfRange(r));
    }
    Ok(2.0 * ((5.0 - 4.0 * r * r) / 4.0).acos())
}

impl DigitSet {
    /// Build a digit set from raw angles in radians: reduces mod 2π into
    /// `[0, 2π)`, sorts, and deduplicates within [`ANGLE_TOLERANCE`]
    /// (including across the wraparound).
    pub fn from_angles(raw: &[f64]) -> Result<Self, DigitSetError> {
        if raw.is_empty() {
            return Err(DigitSetError::Empty);
        }
        if let Some(pos) = raw.iter().position(|a| !a.is_finite()) {
            return Err(DigitSetError::NonFinite(pos));
        }
        let mut angles: Vec<f64> = raw
            .iter()
            .map(|&a| {
                let mut r = a.rem_euclid(TAU);
                if TAU - r <= ANGLE_TOLERANCE {
                    r = 0.0;
                }
                r
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        let mut dedup: Vec<f64> = Vec::with_capacity(angles.len());
        for a in angles {
            match dedup.last() {
                Some(&last) if a - last <= ANGLE_TOLERANCE => {}
                _ => dedup.push(a),
            }
        }
        if dedup.len() > 1 {
            let first = dedup[0];
            let last = *dedup.last().unwrap();
            if first + TAU - last <= ANGLE_TOLERANCE {
                dedup.pop();
            }
        }
        Ok(DigitSet { angles: dedup })
    }

    /// The k-th roots of unity, k ≥ 1.
    pub fn uniform(k: usize) -> Result<Self, DigitSetError> {
        if k == 0 {
            return Err(DigitSetError::Empty);
        }
        let angles: Vec<f64> = (0..k).map(|j| TAU * j as f64 / k as f64).collect();
        Self::from_angles(&angles)
    }

    /// Parse a digit-set spec string: `uniform:k`, `angles:a,b,...`
    /// (radians), or `littlewood` (alias for `uniform:2`, digits {1, -1}).
    pub fn parse(spec: &str) -> Result<Self, DigitSetError> {
        let spec = spec.trim();
        if spec.eq_ignore_ascii_case("littlewood") {
            return Self::uniform(2);
        }
        if let Some(rest) = spec.strip_prefix("uniform:") {
            let k: usize = rest
                .trim()
                .parse()
                .map_err(|_| DigitSetError::InvalidNumber(rest.to_string()))?;
            return Self::uniform(k);
        }
        if let Some(rest) = spec.strip_prefix("angles:") {
            let angles = rest
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|_| DigitSetError::InvalidNumber(tok.to_string()))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            return Self::from_angles(&angles);
        }
        Err(DigitSetError::UnknownSpec(spec.to_string()))
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    /// Sorted angles in `[0, 2π)`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, index: usize) -> f64 {
        self.angles[index]
    }

    /// The digit e^{iθ} at `index`.
    pub fn digit(&self, index: usize) -> Complex64 {
        realize_angle(self.angles[index])
    }

    /// All digits, realized.
    pub fn digits(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&a| realize_angle(a)).collect()
    }

    /// Index of the digit whose angle matches `theta` within
    /// [`ANGLE_TOLERANCE`] (angular distance, so wraparound counts).
    pub fn index_of_angle(&self, theta: f64) -> Option<usize> {
        let n = self.angles.len();
        let reduced = theta.rem_euclid(TAU);
        let i = self.angles.partition_point(|&a| a < reduced);
        for off in [n - 1, 0, 1] {
            let cand = (i + off) % n;
            if angular_distance(self.angles[cand], reduced) <= ANGLE_TOLERANCE {
                return Some(cand);
            }
        }
        None
    }

    /// Largest angular gap between circularly consecutive digits, including
    /// the wraparound gap. A singleton has gap 2π.
    pub fn max_gap(&self) -> f64 {
        if self.angles.len() == 1 {
            return TAU;
        }
        let mut max = self.angles[0] + TAU - self.angles[self.angles.len() - 1];
        for w in self.angles.windows(2) {
            max = max.max(w[1] - w[0]);
        }
        max
    }

    /// Smallest radius r in (1/2, 1) for which the gap bound guarantees
    /// that greedy expansion covers the annulus of moduli `[r, 1)`:
    /// r = sqrt(5/4 − cos(max_gap / 2)). `None` when the gap is at least
    /// 2·arccos(1/4) ≈ 2.6362 and the formula would give r ≥ 1.
    pub fn min_covered_radius(&self) -> Option<f64> {
        let r2 = 1.25 - (self.max_gap() / 2.0).cos();
        if r2 >= 1.0 {
            None
        } else {
            Some(r2.sqrt())
        }
    }

    /// Order of the rotation group of the set: the largest s such that
    /// rotating every digit by 2π/s maps the set onto itself. Always a
    /// divisor of the set size; 1 when no nontrivial rotation works.
    pub fn rotation_order(&self) -> usize {
        let n = self.angles.len();
        for s in (2..=n).rev() {
            if n % s != 0 {
                continue;
            }
            if self.preserved_by_rotation(TAU / s as f64) {
                return s;
            }
        }
        1
    }

    /// Index permutation induced by rotating every digit by `by` radians,
    /// or `None` if the rotation does not preserve the set.
    pub fn rotation_permutation(&self, by: f64) -> Option<Vec<usize>> {
        self.angles
            .iter()
            .map(|&a| self.index_of_angle(a + by))
            .collect()
    }

    fn preserved_by_rotation(&self, by: f64) -> bool {
        self.angles
            .iter()
            .all(|&a| self.index_of_angle(a + by).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normalizes_and_dedups() {
        let set = DigitSet::from_angles(&[0.0, PI, TAU]).unwrap();
        assert_eq!(set.angles(), &[0.0, PI]);

        let set = DigitSet::from_angles(&[3.0 * PI]).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.angle(0) - PI).abs() <= 1e-12);

        let set = DigitSet::from_angles(&[0.1, 0.1 + 1e-15]).unwrap();
        assert_eq!(set.angles(), &[0.1]);
    }

    #[test]
    fn dedups_across_wraparound() {
        let set = DigitSet::from_angles(&[1e-15, TAU - 1e-15]).unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert_eq!(DigitSet::from_angles(&[]), Err(DigitSetError::Empty));
        assert_eq!(
            DigitSet::from_angles(&[0.0, f64::NAN]),
            Err(DigitSetError::NonFinite(1))
        );
    }

    #[test]
    fn angular_distance_examples() {
        assert!((angular_distance(0.0, PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((angular_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert_eq!(angular_distance(1.234, 1.234), 0.0);
    }

    #[test]
    fn max_gap_examples() {
        let set = DigitSet::uniform(5).unwrap();
        assert!((set.max_gap() - TAU / 5.0).abs() < 1e-14);

        let set = DigitSet::from_angles(&[0.0, PI / 2.0, PI]).unwrap();
        assert!((set.max_gap() - PI).abs() < 1e-14);

        let set = DigitSet::from_angles(&[0.0]).unwrap();
        assert_eq!(set.max_gap(), TAU);
    }

    #[test]
    fn density_threshold_examples() {
        // r = sqrt(3)/2 gives arccos(1/2) = pi/3 up to rounding
        let v = density_threshold(3f64.sqrt() / 2.0).unwrap();
        assert!((v - TAU / 3.0).abs() < 1e-13);

        let v = density_threshold(0.5 + 1e-12).unwrap();
        assert!(v < 1e-5);

        let v = density_threshold(0.95).unwrap();
        assert!((v - 2.431785399198807).abs() < 1e-12);

        assert!(density_threshold(0.5).is_err());
        assert!(density_threshold(1.0).is_err());
        assert!(density_threshold(0.2).is_err());
    }

    #[test]
    fn min_covered_radius_examples() {
        let r = DigitSet::uniform(3).unwrap().min_covered_radius().unwrap();
        assert!((r - 3f64.sqrt() / 2.0).abs() < 1e-12);

        let r = DigitSet::uniform(12).unwrap().min_covered_radius().unwrap();
        assert!((r - 0.5329860914798168).abs() < 1e-12);

        assert_eq!(DigitSet::uniform(2).unwrap().min_covered_radius(), None);
        assert_eq!(DigitSet::from_angles(&[0.0]).unwrap().min_covered_radius(), None);
    }

    #[test]
    fn parses_specs() {
        let set = DigitSet::parse("littlewood").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.digit(0), Complex64::new(1.0, 0.0));
        assert_eq!(set.digit(1), Complex64::new(-1.0, 0.0));

        assert_eq!(DigitSet::parse("uniform:12").unwrap().len(), 12);
        let set = DigitSet::parse("angles:0, 1.5707963267948966, 3.14159").unwrap();
        assert_eq!(set.len(), 3);

        assert!(DigitSet::parse("uniform:0").is_err());
        assert!(DigitSet::parse("uniform:x").is_err());
        assert!(DigitSet::parse("banana").is_err());
        assert!(DigitSet::parse("angles:1,two").is_err());
    }

    #[test]
    fn quadrant_digits_are_exact() {
        let set = DigitSet::uniform(4).unwrap();
        assert_eq!(set.digit(0), Complex64::new(1.0, 0.0));
        assert_eq!(set.digit(1), Complex64::new(0.0, 1.0));
        assert_eq!(set.digit(2), Complex64::new(-1.0, 0.0));
        assert_eq!(set.digit(3), Complex64::new(0.0, -1.0));
        for k in [1usize, 2, 3, 5, 7, 12, 360] {
            for d in DigitSet::uniform(k).unwrap().digits() {
                assert!((d.norm() - 1.0).abs() < 3e-16, "k={k} digit {d}");
            }
        }
    }

    #[test]
    fn rotation_orders() {
        for k in [1usize, 2, 3, 4, 6, 12] {
            assert_eq!(DigitSet::uniform(k).unwrap().rotation_order(), k);
        }
        // {0, 1} has no nontrivial rotation symmetry
        let set = DigitSet::from_angles(&[0.0, 1.0]).unwrap();
        assert_eq!(set.rotation_order(), 1);
        // {0, 1, pi, 1 + pi} is preserved by rotation by pi
        let set = DigitSet::from_angles(&[0.0, 1.0, PI, 1.0 + PI]).unwrap();
        assert_eq!(set.rotation_order(), 2);
        let perm = set.rotation_permutation(PI).unwrap();
        assert_eq!(perm, vec![2, 3, 0, 1]);
    }
}
