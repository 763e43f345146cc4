//! Persistence of root sets.
//!
//! Binary layout (`MROOT1`), all integers and floats little-endian:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 6    | ASCII `MROOT1`                           |
//! | 6      | 8    | `u64` degree `n`                         |
//! | 14     | 1    | `u8` precision tag (0 = double, else digits) |
//! | 15     | 16n  | `n` pairs of IEEE-754 `f64` (re, im)     |
//!
//! CSV: one `re,im` row per point in index order. Double values are written
//! with 17 significant digits so they re-read bit-exactly; high-precision
//! values use the digit count of their context. An optional non-numeric first
//! line is skipped on load.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex;

use crate::numeric::{NumericContext, Real};
use crate::rootset::RootSet;
use crate::Error;

pub const MAGIC: &[u8; 6] = b"MROOT1";
const HEADER_LEN: usize = 6 + 8 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Csv,
}

impl Format {
    /// Guesses from the extension: `.csv` is CSV, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_rootset<T: Real>(rs: &RootSet<T>, path: &Path, format: Format) -> Result<(), Error> {
    if let Some(i) = rs
        .points()
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        return Err(Error::Validation(format!(
            "point {i} is not finite; refusing to write {}",
            path.display()
        )));
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Binary => {
            let mut buf = Vec::with_capacity(HEADER_LEN + 16 * rs.degree());
            buf.extend_from_slice(MAGIC);
            buf.extend_from_slice(&(rs.degree() as u64).to_le_bytes());
            buf.push(rs.context().tag());
            for z in rs.points() {
                buf.extend_from_slice(&z.re.to_f64().to_le_bytes());
                buf.extend_from_slice(&z.im.to_f64().to_le_bytes());
            }
            w.write_all(&buf).map_err(io_err(path))?;
        }
        Format::Csv => {
            let digits = rs.context().digits().max(17);
            let digits = if T::EPSILON < f64::EPSILON {
                rs.context().digits()
            } else {
                digits
            };
            for z in rs.points() {
                writeln!(
                    w,
                    "{},{}",
                    z.re.to_sci_string(digits),
                    z.im.to_sci_string(digits)
                )
                .map_err(io_err(path))?;
            }
        }
    }
    w.flush().map_err(io_err(path))
}

/// Loads a root set, sniffing the format from the leading magic bytes.
pub fn load_rootset(path: &Path) -> Result<RootSet<f64>, Error> {
    load_rootset_as::<f64>(path)
}

/// Loads into any working precision. Binary payloads are doubles, so widening
/// them is exact; CSV text is parsed directly in the target precision.
pub fn load_rootset_as<T: Real>(path: &Path) -> Result<RootSet<T>, Error> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.starts_with(MAGIC) {
        decode_binary(&bytes, path)
    } else {
        decode_csv(&bytes, path)
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn decode_binary<T: Real>(bytes: &[u8], path: &Path) -> Result<RootSet<T>, Error> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(path, "truncated header"));
    }
    let degree = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let ctx = NumericContext::from_tag(bytes[14])
        .map_err(|_| format_err(path, format!("bad precision tag {}", bytes[14])))?;
    let payload = &bytes[HEADER_LEN..];
    let expected = degree
        .checked_mul(16)
        .ok_or_else(|| format_err(path, "degree overflows"))?;
    if payload.len() as u64 != expected {
        return Err(format_err(
            path,
            format!(
                "payload holds {} bytes, header declares {} points",
                payload.len(),
                degree
            ),
        ));
    }
    let points = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex::new(T::from_f64(re), T::from_f64(im))
        })
        .collect();
    Ok(RootSet::new(points, ctx))
}

fn decode_csv<T: Real>(bytes: &[u8], path: &Path) -> Result<RootSet<T>, Error> {
    let reader = BufReader::new(bytes);
    let mut points = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match parse_row::<T>(line) {
            Some(z) => points.push(z),
            None if lineno == 0 => continue,
            None => {
                return Err(format_err(
                    path,
                    format!("line {}: expected `re,im`, got {line:?}", lineno + 1),
                ))
            }
        }
    }
    if points.is_empty() {
        return Err(format_err(path, "no points"));
    }
    let ctx = if T::EPSILON < f64::EPSILON {
        NumericContext::high(NumericContext::MAX_DIGITS)?
    } else {
        NumericContext::double()
    };
    Ok(RootSet::new(points, ctx))
}

fn parse_row<T: Real>(line: &str) -> Option<Complex<T>> {
    let mut it = line.split(',');
    let re = T::from_str_radix(it.next()?.trim(), 10).ok()?;
    let im = T::from_str_radix(it.next()?.trim(), 10).ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(Complex::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DoubleDouble;

    fn tmp(name: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(name);
        (dir, p)
    }

    #[test]
    fn single_point_binary() {
        let (_d, p) = tmp("one.mroot");
        let rs = RootSet::new(vec![Complex::new(-1.0, 0.0)], NumericContext::double());
        save_rootset(&rs, &p, Format::Binary).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 15 + 16);
        let back = load_rootset(&p).unwrap();
        assert_eq!(back.points(), &[Complex::new(-1.0, 0.0)]);
    }

    #[test]
    fn csv_preserves_order() {
        let (_d, p) = tmp("p2.csv");
        let pts = vec![
            Complex::new(-1.754877666246693, 0.0),
            Complex::new(-0.12256116687665362, 0.7448617666197442),
            Complex::new(-0.12256116687665362, -0.7448617666197442),
        ];
        let rs = RootSet::new(pts.clone(), NumericContext::double());
        save_rootset(&rs, &p, Format::Csv).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(load_rootset(&p).unwrap().points(), &pts[..]);
    }

    #[test]
    fn csv_header_is_skipped() {
        let (_d, p) = tmp("hdr.csv");
        fs::write(&p, "re,im\n0.5,-0.25\n1e-3,2\n").unwrap();
        let rs = load_rootset(&p).unwrap();
        assert_eq!(
            rs.points(),
            &[Complex::new(0.5, -0.25), Complex::new(1e-3, 2.0)]
        );
    }

    #[test]
    fn csv_garbage_after_first_line_fails() {
        let (_d, p) = tmp("bad.csv");
        fs::write(&p, "0.5,1\nnope\n").unwrap();
        assert!(matches!(load_rootset(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn truncated_binary_is_rejected() {
        let (_d, p) = tmp("t.mroot");
        let rs = RootSet::new(
            vec![Complex::new(1.0, 2.0), Complex::new(3.0, 4.0)],
            NumericContext::double(),
        );
        save_rootset(&rs, &p, Format::Binary).unwrap();
        let bytes = fs::read(&p).unwrap();
        for cut in [3, 10, 15, bytes.len() - 1] {
            fs::write(&p, &bytes[..cut]).unwrap();
            let r = load_rootset(&p);
            // a cut inside the magic falls back to CSV parsing, which also fails
            assert!(r.is_err(), "cut at {cut}");
        }
        fs::write(&p, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(load_rootset(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn non_finite_is_rejected() {
        let (_d, p) = tmp("nan.mroot");
        let rs = RootSet::new(vec![Complex::new(f64::NAN, 0.0)], NumericContext::double());
        assert!(matches!(
            save_rootset(&rs, &p, Format::Binary),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_rootset(Path::new("/nonexistent/roots.mroot")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/roots.mroot"));
    }

    #[test]
    fn high_precision_csv_keeps_digits() {
        let (_d, p) = tmp("hp.csv");
        let x: DoubleDouble = "-1.9854055851353386911234567890123".parse().unwrap();
        let ctx = NumericContext::high(30).unwrap();
        let rs = RootSet::new(vec![Complex::new(x, DoubleDouble::ZERO)], ctx);
        save_rootset(&rs, &p, Format::Csv).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("-1.98540558513533869112345678901e0,"));
        let back: RootSet<DoubleDouble> = load_rootset_as(&p).unwrap();
        let err = (back.points()[0].re - x).abs().to_f64();
        assert!(err < 1e-29, "{err}");
    }
}
