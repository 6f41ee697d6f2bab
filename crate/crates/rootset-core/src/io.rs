//! Deterministic file formats: the root-cloud CSV, flat key = value
//! documents for certificates and reports, and binary PGM rasters.
//!
//! Floats are printed with 17 significant digits (enough to round-trip any
//! f64 exactly), positional where reasonable and e-notation otherwise, so a
//! parse → emit → parse cycle is lossless and byte-stable.

use crate::coverage::{CoverageReport, HoleSearchOutcome};
use crate::enumeration::RootCloud;
use crate::expansion::{ExpansionCertificate, ValidationReport};
use num_complex::Complex64;
use std::io::{self, BufRead, Write};
use thiserror::Error;

/// Header of the root-cloud CSV.
pub const ROOT_CLOUD_CSV_HEADER: &str = "re,im,modulus,multiplicity,degree,source_index";

/// Half-side of the square region rasterized by [`render_counts`].
pub const RENDER_EXTENT: f64 = 2.2;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Format with 17 significant digits, mirroring printf's %.17g: positional
/// for exponents in [-4, 17), e-notation outside, trailing zeros trimmed.
pub fn format_significant(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x < 0.0 {
        return format!("-{}", format_significant(-x));
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("numeric exponent");
    let digits: Vec<u8> = mantissa
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .collect();
    debug_assert_eq!(digits.len(), 17);

    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };

    if (-4..17).contains(&exponent) {
        let point = (exponent + 1) as usize; // digits before the decimal point
        let text = if exponent < 0 {
            let mut t = String::from("0.");
            for _ in 0..(-exponent - 1) {
                t.push('0');
            }
            t.push_str(std::str::from_utf8(&digits).unwrap());
            t
        } else if point >= digits.len() {
            String::from_utf8(digits).unwrap()
        } else {
            let mut t = String::from_utf8(digits[..point].to_vec()).unwrap();
            t.push('.');
            t.push_str(std::str::from_utf8(&digits[point..]).unwrap());
            t
        };
        trim(text)
    } else {
        let mut t = String::new();
        t.push(digits[0] as char);
        t.push('.');
        t.push_str(std::str::from_utf8(&digits[1..]).unwrap());
        format!("{}e{}", trim(t), exponent)
    }
}

/// One root-cloud CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudCsvRow {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub multiplicity: u32,
    pub degree: usize,
    pub source_index: u128,
}

impl CloudCsvRow {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            format_significant(self.re),
            format_significant(self.im),
            format_significant(self.modulus),
            self.multiplicity,
            self.degree,
            self.source_index
        )
    }
}

/// Rows of a cloud, sorted by (degree, re, im, source_index, multiplicity)
/// so the emitted file is independent of solve order.
pub fn cloud_rows(cloud: &RootCloud) -> Vec<CloudCsvRow> {
    let mut rows: Vec<CloudCsvRow> = cloud
        .records
        .iter()
        .map(|record| CloudCsvRow {
            re: record.z.re,
            im: record.z.im,
            modulus: record.z.norm(),
            multiplicity: record.multiplicity,
            degree: record.source.degree(),
            source_index: record.source.lexicographic_rank(),
        })
        .collect();
    rows.sort_by(|a, b| {
        a.degree
            .cmp(&b.degree)
            .then(a.re.total_cmp(&b.re))
            .then(a.im.total_cmp(&b.im))
            .then(a.source_index.cmp(&b.source_index))
            .then(a.multiplicity.cmp(&b.multiplicity))
    });
    rows
}

pub fn write_root_cloud_csv<W: Write>(writer: &mut W, cloud: &RootCloud) -> io::Result<()> {
    write_csv_rows(writer, &cloud_rows(cloud))
}

pub fn write_csv_rows<W: Write>(writer: &mut W, rows: &[CloudCsvRow]) -> io::Result<()> {
    writeln!(writer, "{ROOT_CLOUD_CSV_HEADER}")?;
    for row in rows {
        writeln!(writer, "{}", row.to_line())?;
    }
    Ok(())
}

pub fn parse_root_cloud_csv<R: BufRead>(reader: R) -> Result<Vec<CloudCsvRow>, DocumentError> {
    let mut rows = Vec::new();
    for (number, line) in reader.lines().enumerate() {
        let line = line?;
        if number == 0 {
            if line.trim() != ROOT_CLOUD_CSV_HEADER {
                return Err(DocumentError::Malformed {
                    line: 1,
                    message: format!("expected header `{ROOT_CLOUD_CSV_HEADER}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(DocumentError::Malformed {
                line: number + 1,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let bad = |what: &str| DocumentError::Malformed {
            line: number + 1,
            message: format!("invalid {what}"),
        };
        rows.push(CloudCsvRow {
            re: fields[0].trim().parse().map_err(|_| bad("re"))?,
            im: fields[1].trim().parse().map_err(|_| bad("im"))?,
            modulus: fields[2].trim().parse().map_err(|_| bad("modulus"))?,
            multiplicity: fields[3].trim().parse().map_err(|_| bad("multiplicity"))?,
            degree: fields[4].trim().parse().map_err(|_| bad("degree"))?,
            source_index: fields[5].trim().parse().map_err(|_| bad("source_index"))?,
        });
    }
    Ok(rows)
}

fn push_kv(doc: &mut String, key: &str, value: impl AsRef<str>) {
    doc.push_str(key);
    doc.push_str(" = ");
    doc.push_str(value.as_ref());
    doc.push('\n');
}

/// One certificate as a flat key = value document. Keys, in order: z_re,
/// z_im, target_re, target_im, digit_angles, tail_bound, achieved_residual,
/// passed.
pub fn certificate_document(cert: &ExpansionCertificate, report: &ValidationReport) -> String {
    let mut doc = String::new();
    push_kv(&mut doc, "z_re", format_significant(cert.z.re));
    push_kv(&mut doc, "z_im", format_significant(cert.z.im));
    push_kv(&mut doc, "target_re", format_significant(cert.target.re));
    push_kv(&mut doc, "target_im", format_significant(cert.target.im));
    let angles = cert
        .digit_angles
        .iter()
        .map(|&a| format_significant(a))
        .collect::<Vec<_>>()
        .join(",");
    push_kv(&mut doc, "digit_angles", angles);
    push_kv(&mut doc, "tail_bound", format_significant(cert.tail_bound));
    push_kv(
        &mut doc,
        "achieved_residual",
        format_significant(cert.achieved_residual),
    );
    push_kv(&mut doc, "passed", if report.passed { "true" } else { "false" });
    doc
}

/// Failure document for an expansion that ran out of reachable digits.
/// Keys: z_re, z_im, target_re, target_im, error, failed_step,
/// min_distance, bound.
pub fn expansion_failure_document(
    z: Complex64,
    target: Complex64,
    failed_step: usize,
    min_distance: f64,
    bound: f64,
) -> String {
    let mut doc = String::new();
    push_kv(&mut doc, "z_re", format_significant(z.re));
    push_kv(&mut doc, "z_im", format_significant(z.im));
    push_kv(&mut doc, "target_re", format_significant(target.re));
    push_kv(&mut doc, "target_im", format_significant(target.im));
    push_kv(&mut doc, "error", "step_failed");
    push_kv(&mut doc, "failed_step", failed_step.to_string());
    push_kv(&mut doc, "min_distance", format_significant(min_distance));
    push_kv(&mut doc, "bound", format_significant(bound));
    doc
}

/// Coverage report document. Keys: r_inner, r_outer, cell_size,
/// total_cells, hit_cells, hit_fraction, hit_flags (one 0/1 per cell in
/// grid order).
pub fn coverage_document(report: &CoverageReport) -> String {
    let mut doc = String::new();
    push_kv(&mut doc, "r_inner", format_significant(report.r_inner));
    push_kv(&mut doc, "r_outer", format_significant(report.r_outer));
    push_kv(&mut doc, "cell_size", format_significant(report.cell_size));
    push_kv(&mut doc, "total_cells", report.total_cells.to_string());
    push_kv(&mut doc, "hit_cells", report.hit_cells.to_string());
    push_kv(
        &mut doc,
        "hit_fraction",
        format_significant(report.hit_fraction),
    );
    let flags: String = report
        .hit_flags
        .iter()
        .map(|&h| if h { '1' } else { '0' })
        .collect();
    push_kv(&mut doc, "hit_flags", flags);
    doc
}

/// Hole-search document. Keys: found, best_re, best_im, best_margin, then
/// z_re, z_im, margin, delta when a certificate was produced.
pub fn exclusion_document(outcome: &HoleSearchOutcome) -> String {
    let mut doc = String::new();
    push_kv(
        &mut doc,
        "found",
        if outcome.certificate.is_some() {
            "true"
        } else {
            "false"
        },
    );
    push_kv(&mut doc, "best_re", format_significant(outcome.best_point.re));
    push_kv(&mut doc, "best_im", format_significant(outcome.best_point.im));
    push_kv(
        &mut doc,
        "best_margin",
        format_significant(outcome.best_margin),
    );
    if let Some(cert) = &outcome.certificate {
        push_kv(&mut doc, "z_re", format_significant(cert.z.re));
        push_kv(&mut doc, "z_im", format_significant(cert.z.im));
        push_kv(&mut doc, "margin", format_significant(cert.margin));
        push_kv(&mut doc, "delta", format_significant(cert.delta));
    }
    doc
}

/// Rasterize rows over the square [-2.2, 2.2]²: top row carries the largest
/// imaginary parts, each root contributes its multiplicity to its pixel,
/// and counts map to 255·log(1+c)/log(1+c_max) rounded half-up.
pub fn render_counts(rows: &[CloudCsvRow], width: usize, height: usize) -> Vec<u8> {
    let extent = RENDER_EXTENT;
    let mut counts = vec![0u64; width * height];
    for row in rows {
        if row.re.abs() > extent || row.im.abs() > extent {
            continue;
        }
        let px = (((row.re + extent) / (2.0 * extent)) * width as f64).floor() as usize;
        let py = (((extent - row.im) / (2.0 * extent)) * height as f64).floor() as usize;
        let px = px.min(width - 1);
        let py = py.min(height - 1);
        counts[py * width + px] += row.multiplicity as u64;
    }
    let max_count = counts.iter().copied().max().unwrap_or(0);
    if max_count == 0 {
        return vec![0; width * height];
    }
    let scale = 255.0 / (1.0 + max_count as f64).ln();
    counts
        .into_iter()
        .map(|c| {
            if c == 0 {
                0
            } else {
                ((1.0 + c as f64).ln() * scale + 0.5).floor() as u8
            }
        })
        .collect()
}

/// Binary PGM, maxval 255, row-major from the top row.
pub fn write_pgm<W: Write>(
    writer: &mut W,
    width: usize,
    height: usize,
    pixels: &[u8],
) -> io::Result<()> {
    debug_assert_eq!(pixels.len(), width * height);
    write!(writer, "P5\n{width} {height}\n255\n")?;
    writer.write_all(pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitset::DigitSet;
    use crate::enumeration::{all_roots, ResourceGuard, SymmetryMode};
    use std::sync::Arc;

    #[test]
    fn formatting_covers_the_ranges() {
        assert_eq!(format_significant(0.0), "0");
        assert_eq!(format_significant(-0.0), "0");
        assert_eq!(format_significant(1.0), "1");
        assert_eq!(format_significant(-2.0), "-2");
        assert_eq!(format_significant(0.5), "0.5");
        assert_eq!(format_significant(1.25), "1.25");
        assert_eq!(
            format_significant((5f64.sqrt() - 1.0) / 2.0),
            "0.6180339887498949"
        );
        assert_eq!(format_significant(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_significant(6.103515625e-5), "6.103515625e-5");
        assert_eq!(format_significant(1e20), "1e20");
        assert_eq!(format_significant(0.0001), "0.0001");
        assert_eq!(format_significant(123456.75), "123456.75");
    }

    #[test]
    fn formatting_round_trips() {
        for &x in &[
            0.6180339887498949,
            -1.618033988749895,
            2.0943951023931953,
            1.4901161193847656e-8,
            9.981e-114,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            let parsed: f64 = format_significant(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let set = Arc::new(DigitSet::uniform(2).unwrap());
        let cloud = all_roots(&set, 3, SymmetryMode::None, &ResourceGuard::default()).unwrap();
        let mut first = Vec::new();
        write_root_cloud_csv(&mut first, &cloud).unwrap();
        let rows = parse_root_cloud_csv(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_csv_rows(&mut second, &rows).unwrap();
        assert_eq!(first, second);
        // 4 linear + 16 quadratic + 48 cubic rows, minus the four cubic
        // double roots merged into single rows
        assert_eq!(rows.len(), 64);
    }

    #[test]
    fn csv_parser_rejects_garbage() {
        assert!(parse_root_cloud_csv("nonsense\n".as_bytes()).is_err());
        let bad_row = format!("{ROOT_CLOUD_CSV_HEADER}\n1,2,3\n");
        assert!(parse_root_cloud_csv(bad_row.as_bytes()).is_err());
        let bad_field = format!("{ROOT_CLOUD_CSV_HEADER}\n1,x,3,1,1,0\n");
        assert!(parse_root_cloud_csv(bad_field.as_bytes()).is_err());
    }

    #[test]
    fn pgm_layout() {
        let mut out = Vec::new();
        write_pgm(&mut out, 3, 2, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(&out[..9], b"P5\n3 2\n25");
        assert_eq!(out.len(), "P5\n3 2\n255\n".len() + 6);
    }

    #[test]
    fn render_maps_counts_logarithmically() {
        let row = |re: f64, im: f64, mult: u32| CloudCsvRow {
            re,
            im,
            modulus: re.hypot(im),
            multiplicity: mult,
            degree: 1,
            source_index: 0,
        };
        // two roots in one pixel, one in another
        let rows = vec![row(1.0, 1.0, 1), row(1.0, 1.0, 1), row(-1.0, -1.0, 1)];
        let pixels = render_counts(&rows, 11, 11);
        let max = *pixels.iter().max().unwrap();
        assert_eq!(max, 255);
        let lit: Vec<usize> = pixels
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(lit.len(), 2);
        // (1,1) is up-right: px = floor((1+2.2)/4.4*11) = 8, py = floor((2.2-1)/4.4*11) = 3
        assert!(lit.contains(&(3 * 11 + 8)));
        assert!(lit.contains(&(8 * 11 + 3)));
        // the single-count pixel gets log(2)/log(3) of full scale
        let single = pixels[8 * 11 + 3];
        let expected = (255.0 * 2f64.ln() / 3f64.ln() + 0.5).floor() as u8;
        assert_eq!(single, expected);

        assert!(render_counts(&[], 4, 4).iter().all(|&v| v == 0));
    }
}
