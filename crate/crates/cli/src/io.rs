use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use tempfile::NamedTempFile;
use wlra::Matrix;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Invalid(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Invalid(m) => f.write_str(m),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<wlra::Error> for CliError {
    fn from(e: wlra::Error) -> Self {
        match e {
            wlra::Error::Io(e) => CliError::Io(e.to_string()),
            e if e.is_numerical() => CliError::Numerical(e.to_string()),
            e @ wlra::Error::NonFinite { .. } => CliError::Numerical(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let parsed = if is_csv(path) {
        Matrix::from_csv(&text)
    } else {
        Matrix::from_text(&text)
    };
    parsed.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

pub fn matrix_bytes(m: &Matrix, csv: bool) -> String {
    if csv {
        m.to_csv()
    } else {
        m.to_text()
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Matrix to `path` (format by extension) or to stdout.
pub fn emit_matrix(path: Option<&Path>, m: &Matrix) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, &matrix_bytes(m, is_csv(p))),
        None => {
            print!("{}", m.to_text());
            Ok(())
        }
    }
}

pub fn emit_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn output_is_csv(path: &Path) -> bool {
    is_csv(path)
}

/// Parses `a:step:b` (inclusive endpoints) or a comma-separated list.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> CliResult<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| CliError::invalid(format!("not a number: {s:?}")))?;
        if !v.is_finite() {
            return Err(CliError::invalid(format!("not a finite number: {s:?}")));
        }
        Ok(v)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
            if !(step > 0.0) {
                return Err(CliError::invalid(format!(
                    "range step must be > 0 in {spec:?}"
                )));
            }
            // Tolerate rounding at the upper end so 0.1:0.1:0.3 keeps 0.3.
            let count = ((b - a) / step + 1e-9).floor();
            if count < 0.0 {
                return Ok(Vec::new());
            }
            if count > 1e7 {
                return Err(CliError::invalid(format!("range {spec:?} is too long")));
            }
            Ok((0..=count as usize).map(|i| a + step * i as f64).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(CliError::invalid(format!(
            "expected a:step:b or a comma list, got {spec:?}"
        ))),
    }
}

pub fn parse_rank_range(spec: &str) -> CliResult<Vec<usize>> {
    parse_range(spec)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CliError::invalid(format!(
                    "rank must be a non-negative integer, got {v}"
                )))
            }
        })
        .collect()
}
