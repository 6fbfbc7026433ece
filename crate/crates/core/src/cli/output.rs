//! Number formatting and file output shared by all commands.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::CliError;

/// Formats with 9 significant digits, like C's `%.9g`.
///
/// Always uses `.` as decimal separator. Fixed notation for decimal exponents
/// in `[-5, 9)`, scientific otherwise; trailing zeros are dropped.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    let body = if (-5..9).contains(&exp) {
        let mut s = if exp >= 0 {
            let int_len = exp as usize + 1;
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        if s.contains('.') {
            s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        }
        s
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let m = if frac.is_empty() {
            digits[..1].to_string()
        } else {
            format!("{}.{}", &digits[..1], frac)
        };
        format!("{m}e{exp}")
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Builds a CSV document with `\n` line endings.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn with_header(columns: &[&str]) -> Self {
        let mut csv = Csv::default();
        csv.buf.push_str(&columns.join(","));
        csv.buf.push('\n');
        csv
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::io(format!("cannot write {}: {e}", path.display()));
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_num(0.7597469266479577), "0.759746927");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(-1.5), "-1.5");
        assert_eq!(fmt_num(10.0 / 3.0), "3.33333333");
        assert_eq!(fmt_num(123456789.4), "123456789");
        assert_eq!(fmt_num(1234567890.0), "1.23456789e9");
        assert_eq!(fmt_num(1.25e-7), "1.25e-7");
        assert_eq!(fmt_num(0.000012345), "0.000012345");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.99), "0.99");
        assert_eq!(fmt_num(9.999999999), "10");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::with_header(&["n", "w_star"]);
        csv.row(&[2.0, 2.0 - 2f64.sqrt()]);
        assert_eq!(csv.as_str(), "n,w_star\n2,0.585786438\n");
    }

    #[test]
    fn atomic_write_and_failure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_atomic(&path, "x\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "x\n");
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 1);
        let bad = dir.path().join("missing").join("a.csv");
        assert_eq!(write_atomic(&bad, "x").unwrap_err().exit_code(), 4);
    }
}
