//! Exhaustive enumeration of digit polynomials and root-cloud aggregation.
//!
//! Polynomials of exact degree d are the |H|^(d+1) digit-index vectors of
//! length d+1, streamed in lexicographic order (a_0 most significant). When
//! the digit set is closed under rotation by 2π/s, multiplying every
//! coefficient by that unit leaves the zero set unchanged, so enumeration
//! can emit one representative per global-phase orbit. Rotation fixes no
//! digit, which makes canonicality a property of the first index alone:
//! a vector is canonical iff its first index is minimal in its rotation
//! orbit. Every orbit therefore has exactly s members and the orbit count
//! is |H|^(d+1)/s.
//!
//! Solving is data-parallel over contiguous rank ranges (fixed coefficient
//! prefixes). Partial results are concatenated in range order, so the cloud
//! record order is the global enumeration order regardless of worker count.

use crate::digitset::DigitSet;
use crate::rootsolver::{solve_roots, RootRecord, UnimodularPolynomial};
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::sync::Arc;
use thiserror::Error;

/// Default refusal cap on Σ_d |H|^(d+1).
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryMode {
    None,
    PhaseOrbit,
}

impl std::fmt::Display for SymmetryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryMode::None => write!(f, "none"),
            SymmetryMode::PhaseOrbit => write!(f, "phase-orbit"),
        }
    }
}

/// Refuses jobs whose full enumeration count exceeds `cap` unless
/// explicitly overridden.
#[derive(Debug, Clone, Copy)]
pub struct ResourceGuard {
    pub cap: u128,
    pub allow_over_cap: bool,
}

impl Default for ResourceGuard {
    fn default() -> Self {
        ResourceGuard {
            cap: DEFAULT_ENUMERATION_CAP,
            allow_over_cap: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnumerationError {
    #[error("degree must be at least 1")]
    DegreeTooSmall,
    #[error("order must be at least 2")]
    OrderTooSmall,
    #[error("job needs {required} polynomial solves, over the cap of {cap}")]
    OverCap { required: u128, cap: u128 },
    #[error("enumeration count overflows")]
    CountOverflow,
}

/// Aggregated roots of every polynomial of exact degree 1..=max_degree.
#[derive(Debug, Clone)]
pub struct RootCloud {
    pub digit_set: Arc<DigitSet>,
    pub max_degree: usize,
    pub symmetry: SymmetryMode,
    pub records: Vec<RootRecord>,
    /// Polynomials whose solve ended with an out-of-tolerance record.
    pub non_converged: usize,
    /// Polynomials that needed the companion-matrix fallback.
    pub fallback_solves: usize,
}

/// First-position digit indices allowed under the symmetry mode.
fn leading_indices(digit_set: &DigitSet, mode: SymmetryMode) -> Vec<u32> {
    let n = digit_set.len();
    match mode {
        SymmetryMode::None => (0..n as u32).collect(),
        SymmetryMode::PhaseOrbit => {
            let order = digit_set.rotation_order();
            if order == 1 {
                return (0..n as u32).collect();
            }
            let perm = digit_set
                .rotation_permutation(TAU / order as f64)
                .expect("rotation order implies a permutation");
            (0..n)
                .filter(|&i| {
                    let mut j = perm[i];
                    while j != i {
                        if j < i {
                            return false;
                        }
                        j = perm[j];
                    }
                    true
                })
                .map(|i| i as u32)
                .collect()
        }
    }
}

/// Number of polynomials of exact degree `degree` under `mode`.
pub fn polynomial_count(
    digit_set: &DigitSet,
    degree: usize,
    mode: SymmetryMode,
) -> Result<u128, EnumerationError> {
    if degree < 1 {
        return Err(EnumerationError::DegreeTooSmall);
    }
    let base = digit_set.len() as u128;
    let leading = leading_indices(digit_set, mode).len() as u128;
    base.checked_pow(degree as u32)
        .and_then(|suffixes| suffixes.checked_mul(leading))
        .ok_or(EnumerationError::CountOverflow)
}

/// Full enumeration cost Σ_{d=1}^{max_degree} |H|^(d+1), the quantity the
/// resource guard checks (independent of symmetry mode).
pub fn enumeration_cost(
    digit_set: &DigitSet,
    max_degree: usize,
) -> Result<u128, EnumerationError> {
    if max_degree < 1 {
        return Err(EnumerationError::DegreeTooSmall);
    }
    let base = digit_set.len() as u128;
    let mut total: u128 = 0;
    for degree in 1..=max_degree {
        let count = base
            .checked_pow(degree as u32 + 1)
            .ok_or(EnumerationError::CountOverflow)?;
        total = total
            .checked_add(count)
            .ok_or(EnumerationError::CountOverflow)?;
    }
    Ok(total)
}

/// Streaming enumeration of all polynomials of one exact degree, in
/// lexicographic digit-index order (restricted to canonical leading digits
/// under phase-orbit symmetry).
pub struct PolynomialStream {
    digit_set: Arc<DigitSet>,
    leading: Vec<u32>,
    state: Option<OdometerState>,
}

struct OdometerState {
    leading_cursor: usize,
    suffix: Vec<u32>,
}

impl PolynomialStream {
    fn new(digit_set: Arc<DigitSet>, degree: usize, mode: SymmetryMode) -> Self {
        let leading = leading_indices(&digit_set, mode);
        PolynomialStream {
            digit_set,
            leading,
            state: Some(OdometerState {
                leading_cursor: 0,
                suffix: vec![0; degree],
            }),
        }
    }

    /// Jump to the polynomial at `rank` in this stream's order.
    fn seek(&mut self, rank: u128) {
        let base = self.digit_set.len() as u128;
        let degree = match &self.state {
            Some(s) => s.suffix.len(),
            None => return,
        };
        let suffix_count = base.pow(degree as u32);
        let leading_cursor = (rank / suffix_count) as usize;
        if leading_cursor >= self.leading.len() {
            self.state = None;
            return;
        }
        let mut remainder = rank % suffix_count;
        let mut suffix = vec![0u32; degree];
        for position in (0..degree).rev() {
            suffix[position] = (remainder % base) as u32;
            remainder /= base;
        }
        self.state = Some(OdometerState {
            leading_cursor,
            suffix,
        });
    }
}

impl Iterator for PolynomialStream {
    type Item = UnimodularPolynomial;

    fn next(&mut self) -> Option<UnimodularPolynomial> {
        let state = self.state.as_mut()?;
        let mut indices = Vec::with_capacity(state.suffix.len() + 1);
        indices.push(self.leading[state.leading_cursor]);
        indices.extend_from_slice(&state.suffix);
        let item = UnimodularPolynomial::new(Arc::clone(&self.digit_set), indices)
            .expect("stream indices are valid by construction");

        // advance the odometer, carrying into the leading cursor
        let base = self.digit_set.len() as u32;
        let mut position = state.suffix.len();
        loop {
            if position == 0 {
                state.leading_cursor += 1;
                if state.leading_cursor >= self.leading.len() {
                    self.state = None;
                }
                break;
            }
            position -= 1;
            state.suffix[position] += 1;
            if state.suffix[position] < base {
                break;
            }
            state.suffix[position] = 0;
        }
        Some(item)
    }
}

/// Stream every polynomial of exact degree `degree` once.
pub fn iterate_polynomials(
    digit_set: &Arc<DigitSet>,
    degree: usize,
    mode: SymmetryMode,
) -> Result<PolynomialStream, EnumerationError> {
    if degree < 1 {
        return Err(EnumerationError::DegreeTooSmall);
    }
    polynomial_count(digit_set, degree, mode)?;
    Ok(PolynomialStream::new(Arc::clone(digit_set), degree, mode))
}

/// Solve every polynomial of exact degree 1..=max_degree and aggregate the
/// roots. Work is split over contiguous rank ranges whose size is a power
/// of |H| (a fixed coefficient prefix per range).
pub fn all_roots(
    digit_set: &Arc<DigitSet>,
    max_degree: usize,
    mode: SymmetryMode,
    guard: &ResourceGuard,
) -> Result<RootCloud, EnumerationError> {
    let required = enumeration_cost(digit_set, max_degree)?;
    if required > guard.cap && !guard.allow_over_cap {
        return Err(EnumerationError::OverCap {
            required,
            cap: guard.cap,
        });
    }

    let mut records = Vec::new();
    let mut non_converged = 0usize;
    let mut fallback_solves = 0usize;
    for degree in 1..=max_degree {
        let count = polynomial_count(digit_set, degree, mode)?;
        let chunk_size = chunk_size(digit_set.len() as u128, count);
        let chunk_count = count.div_ceil(chunk_size);
        let outputs: Vec<ChunkOutput> = (0..chunk_count)
            .into_par_iter()
            .map(|chunk| {
                let start = chunk * chunk_size;
                let len = chunk_size.min(count - start);
                solve_range(digit_set, degree, mode, start, len)
            })
            .collect();
        for output in outputs {
            records.extend(output.records);
            non_converged += output.non_converged;
            fallback_solves += output.fallback_solves;
        }
    }
    Ok(RootCloud {
        digit_set: Arc::clone(digit_set),
        max_degree,
        symmetry: mode,
        records,
        non_converged,
        fallback_solves,
    })
}

/// Chunk size |H|^(degree+1-p) with the prefix length p chosen so the
/// number of chunks is at least 8 per worker.
fn chunk_size(base: u128, count: u128) -> u128 {
    let target_chunks = 8 * rayon::current_num_threads() as u128;
    let mut size = count.max(1);
    while size > 1 && count.div_ceil(size) < target_chunks {
        size /= base;
    }
    size.max(1)
}

struct ChunkOutput {
    records: Vec<RootRecord>,
    non_converged: usize,
    fallback_solves: usize,
}

fn solve_range(
    digit_set: &Arc<DigitSet>,
    degree: usize,
    mode: SymmetryMode,
    start: u128,
    len: u128,
) -> ChunkOutput {
    let mut stream = PolynomialStream::new(Arc::clone(digit_set), degree, mode);
    stream.seek(start);
    let mut output = ChunkOutput {
        records: Vec::new(),
        non_converged: 0,
        fallback_solves: 0,
    };
    for polynomial in stream.take(len as usize) {
        let solve = solve_roots(&Arc::new(polynomial));
        if !solve.converged {
            output.non_converged += 1;
        }
        if solve.used_fallback {
            output.fallback_solves += 1;
        }
        output.records.extend(solve.records);
    }
    output
}

/// Roots whose derivative-based multiplicity estimate reaches `order`,
/// deduplicated across polynomials by [`crate::rootsolver::MERGE_TOLERANCE`]
/// clustering. Each surviving record carries the estimate as its
/// multiplicity; the representative of a cluster is the record with the
/// highest estimate, earliest in enumeration order on ties.
pub fn multiple_root_scan(
    digit_set: &Arc<DigitSet>,
    max_degree: usize,
    order: u32,
    mode: SymmetryMode,
    guard: &ResourceGuard,
) -> Result<Vec<RootRecord>, EnumerationError> {
    if order < 2 {
        return Err(EnumerationError::OrderTooSmall);
    }
    let cloud = all_roots(digit_set, max_degree, mode, guard)?;
    Ok(scan_cloud(&cloud, order))
}

/// The multiple-root filter of [`multiple_root_scan`], applied to an
/// existing cloud.
pub fn scan_cloud(cloud: &RootCloud, order: u32) -> Vec<RootRecord> {
    let max_order = cloud.max_degree as u32;
    let mut hits: Vec<RootRecord> = Vec::new();
    for record in &cloud.records {
        let Ok(estimate) = record.source.multiplicity_estimate(record.z, max_order) else {
            continue;
        };
        if estimate < order {
            continue;
        }
        hits.push(RootRecord {
            z: record.z,
            residual: record.residual,
            multiplicity: estimate,
            source: Arc::clone(&record.source),
        });
    }

    // dedup across polynomials: keep the strongest estimate per cluster
    let mut representatives: Vec<RootRecord> = Vec::new();
    for hit in hits {
        match representatives
            .iter_mut()
            .find(|r| (r.z - hit.z).norm() <= crate::rootsolver::MERGE_TOLERANCE)
        {
            Some(existing) => {
                if hit.multiplicity > existing.multiplicity {
                    *existing = hit;
                }
            }
            None => representatives.push(hit),
        }
    }
    representatives
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn guard() -> ResourceGuard {
        ResourceGuard::default()
    }

    #[test]
    fn counts_without_symmetry() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        assert_eq!(polynomial_count(&set, 2, SymmetryMode::None).unwrap(), 8);
        let stream = iterate_polynomials(&set, 2, SymmetryMode::None).unwrap();
        let all: Vec<_> = stream.collect();
        assert_eq!(all.len(), 8);
        // lexicographic order, first index most significant
        assert_eq!(all[0].digit_indices(), &[0, 0, 0]);
        assert_eq!(all[1].digit_indices(), &[0, 0, 1]);
        assert_eq!(all[7].digit_indices(), &[1, 1, 1]);
    }

    #[test]
    fn counts_with_phase_orbit() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        assert_eq!(
            polynomial_count(&set, 2, SymmetryMode::PhaseOrbit).unwrap(),
            4
        );
        let reps: Vec<_> = iterate_polynomials(&set, 2, SymmetryMode::PhaseOrbit)
            .unwrap()
            .collect();
        assert_eq!(reps.len(), 4);
        for rep in &reps {
            assert_eq!(rep.digit_indices()[0], 0);
        }

        let set4 = Arc::new(DigitSet::uniform(4).unwrap());
        assert_eq!(
            polynomial_count(&set4, 1, SymmetryMode::PhaseOrbit).unwrap(),
            4
        );
        assert_eq!(polynomial_count(&set4, 1, SymmetryMode::None).unwrap(), 16);
    }

    #[test]
    fn asymmetric_sets_get_no_reduction() {
        let set = Arc::new(DigitSet::from_angles(&[0.0, 1.0]).unwrap());
        assert_eq!(
            polynomial_count(&set, 3, SymmetryMode::PhaseOrbit).unwrap(),
            polynomial_count(&set, 3, SymmetryMode::None).unwrap()
        );
    }

    #[test]
    fn enumeration_cost_formula() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        // 4 + 8 + 16
        assert_eq!(enumeration_cost(&set, 3).unwrap(), 28);
        assert!(matches!(
            enumeration_cost(&set, 0),
            Err(EnumerationError::DegreeTooSmall)
        ));
    }

    #[test]
    fn guard_refuses_and_overrides() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        let tight = ResourceGuard {
            cap: 10,
            allow_over_cap: false,
        };
        assert!(matches!(
            all_roots(&set, 3, SymmetryMode::None, &tight),
            Err(EnumerationError::OverCap {
                required: 28,
                cap: 10
            })
        ));
        let overridden = ResourceGuard {
            cap: 10,
            allow_over_cap: true,
        };
        assert!(all_roots(&set, 3, SymmetryMode::None, &overridden).is_ok());
    }

    #[test]
    fn linear_roots_of_littlewood() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        let cloud = all_roots(&set, 1, SymmetryMode::None, &guard()).unwrap();
        assert_eq!(cloud.records.len(), 4);
        for r in &cloud.records {
            assert!(
                (r.z - Complex64::new(1.0, 0.0)).norm() < 1e-14
                    || (r.z - Complex64::new(-1.0, 0.0)).norm() < 1e-14
            );
        }
    }

    #[test]
    fn cloud_contains_golden_ratio_conjugate() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        let cloud = all_roots(&set, 2, SymmetryMode::None, &guard()).unwrap();
        assert_eq!(cloud.records.len(), 4 + 16);
        assert_eq!(cloud.non_converged, 0);
        let golden = Complex64::new((5f64.sqrt() - 1.0) / 2.0, 0.0);
        let nearest = cloud
            .records
            .iter()
            .map(|r| (r.z - golden).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-12);
    }

    #[test]
    fn symmetry_modes_agree_on_root_sets() {
        let set = Arc::new(DigitSet::uniform(4).unwrap());
        let full = all_roots(&set, 3, SymmetryMode::None, &guard()).unwrap();
        let reduced = all_roots(&set, 3, SymmetryMode::PhaseOrbit, &guard()).unwrap();
        assert_eq!(full.records.len(), reduced.records.len() * 4);
        // every reduced root appears in the full cloud and vice versa
        for r in &reduced.records {
            let nearest = full
                .records
                .iter()
                .map(|f| (f.z - r.z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10);
        }
        for f in &full.records {
            let nearest = reduced
                .records
                .iter()
                .map(|r| (f.z - r.z).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-10, "unmatched root {}", f.z);
        }
    }

    #[test]
    fn scan_finds_double_roots() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        let hits = multiple_root_scan(&set, 3, 2, SymmetryMode::None, &guard()).unwrap();
        let minus_one = hits
            .iter()
            .find(|r| (r.z - Complex64::new(-1.0, 0.0)).norm() < 1e-9)
            .expect("double root at -1");
        assert_eq!(minus_one.multiplicity, 2);
        // +1 is also a double root (of the sign-flipped reversal)
        assert!(hits
            .iter()
            .any(|r| (r.z - Complex64::new(1.0, 0.0)).norm() < 1e-9));
    }

    #[test]
    fn scan_is_empty_when_nothing_repeats() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        assert!(multiple_root_scan(&set, 1, 2, SymmetryMode::None, &guard())
            .unwrap()
            .is_empty());

        let set3 = Arc::new(DigitSet::uniform(3).unwrap());
        assert!(multiple_root_scan(&set3, 2, 3, SymmetryMode::None, &guard())
            .unwrap()
            .is_empty());

        assert!(matches!(
            multiple_root_scan(&set, 3, 1, SymmetryMode::None, &guard()),
            Err(EnumerationError::OrderTooSmall)
        ));
    }

    #[test]
    fn record_order_is_worker_independent() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| all_roots(&set, 6, SymmetryMode::None, &guard()).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.z, y.z);
            assert_eq!(x.multiplicity, y.multiplicity);
            assert_eq!(x.source.digit_indices(), y.source.digit_indices());
        }
    }

    #[test]
    fn stream_seek_matches_iteration() {
        let set = Arc::new(DigitSet::uniform(3).unwrap());
        let all: Vec<_> = iterate_polynomials(&set, 2, SymmetryMode::None)
            .unwrap()
            .collect();
        for rank in [0u128, 5, 13, 26] {
            let mut stream = PolynomialStream::new(Arc::clone(&set), 2, SymmetryMode::None);
            stream.seek(rank);
            let got = stream.next().unwrap();
            assert_eq!(got.digit_indices(), all[rank as usize].digit_indices());
        }
    }
}
