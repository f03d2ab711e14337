//! CSV and PGM writers for sweep fields, spectra, matrices and bounds.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::normalmode::{beljaars_bound, one_way_explicit_bound};
use crate::spectral::Stability;
use crate::sweep::{FieldMetadata, StabilityField};

/// Class label written for points where the eigensolver failed.
pub const FAILED_CLASS: &str = "failed";

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn class_label(c: Option<Stability>) -> &'static str {
    c.map_or(FAILED_CLASS, Stability::as_str)
}

/// `x_name,y_name,lambda_max,class` then one row per point, x fastest.
/// Floats use the shortest representation that round-trips.
pub fn field_csv(field: &StabilityField) -> String {
    let mut out = format!("{},{},lambda_max,class\n", field.x_name, field.y_name);
    for (iy, y) in field.ys.iter().enumerate() {
        for (ix, x) in field.xs.iter().enumerate() {
            let k = field.index(ix, iy);
            writeln!(out, "{x},{y},{},{}", field.lambda_max[k], class_label(field.class[k])).unwrap();
        }
    }
    out
}

pub fn write_csv(field: &StabilityField, path: &Path) -> Result<()> {
    write_text(path, &field_csv(field))
}

/// A sweep CSV read back in.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub x_name: String,
    pub y_name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub lambda_max: Vec<f64>,
    pub class: Vec<Option<Stability>>,
}

pub fn parse_csv(text: &str) -> Result<FieldTable> {
    let bad = |line: usize, msg: &str| Error::Config(format!("sweep CSV line {line}: {msg}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| bad(1, "empty file"))?.split(',').collect();
    if header.len() != 4 || header[2] != "lambda_max" || header[3] != "class" {
        return Err(bad(1, "expected `x,y,lambda_max,class` header"));
    }
    let mut t = FieldTable {
        x_name: header[0].to_string(),
        y_name: header[1].to_string(),
        xs: Vec::new(),
        ys: Vec::new(),
        lambda_max: Vec::new(),
        class: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(i + 2, "expected 4 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, &format!("bad number `{s}`")));
        let (x, y, l) = (num(f[0])?, num(f[1])?, num(f[2])?);
        if t.ys.last() != Some(&y) {
            t.ys.push(y);
        }
        if t.ys.len() == 1 {
            t.xs.push(x);
        }
        t.lambda_max.push(l);
        t.class.push(if f[3] == FAILED_CLASS { None } else { Some(f[3].parse()?) });
    }
    if t.lambda_max.len() != t.xs.len() * t.ys.len() {
        return Err(Error::Config("sweep CSV is not a full rectangular grid".into()));
    }
    Ok(t)
}

pub fn read_csv(path: &Path) -> Result<FieldTable> {
    parse_csv(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// Grey level `floor(255 min(lambda, 2) / 2)`; failed points are white.
pub fn pixel(lambda_max: f64) -> u8 {
    if lambda_max.is_nan() {
        return 255;
    }
    (255.0 * lambda_max.clamp(0.0, 2.0) / 2.0).floor() as u8
}

/// Plain PGM with the largest `y` in the first row.
pub fn field_pgm(field: &StabilityField) -> String {
    let (nx, ny) = (field.nx(), field.ny());
    let mut out = format!("P2\n{nx} {ny}\n255\n");
    for iy in (0..ny).rev() {
        let row: Vec<String> = (0..nx).map(|ix| pixel(field.lambda(ix, iy)).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm(field: &StabilityField, path: &Path) -> Result<()> {
    if field.lambda_max.is_empty() {
        return Err(Error::Config("cannot write an empty field".into()));
    }
    write_text(path, &field_pgm(field))
}

pub fn metadata_toml(meta: &FieldMetadata) -> Result<String> {
    toml::to_string(meta).map_err(|e| Error::Config(format!("cannot serialize metadata: {e}")))
}

/// Dense matrix, row-major, 17 significant digits.
pub fn matrix_csv(m: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `re,im` per eigenvalue.
pub fn spectrum_csv(eigenvalues: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in eigenvalues {
        writeln!(out, "{},{}", z.re, z.im).unwrap();
    }
    out
}

/// Analytic one-way limits at a single `d`.
pub fn bounds_at(d: f64) -> String {
    format!(
        "beta_max_explicit,{}\nbeta_beljaars,{}\nbeta_implicit_pole,{}\n",
        one_way_explicit_bound(d),
        beljaars_bound(d),
        2.0 * d
    )
}

/// Analytic one-way limits tabulated over `ds`.
pub fn bounds_table(ds: &[f64]) -> String {
    let mut out = String::from("d,beta_max_explicit,beta_beljaars,beta_implicit_pole\n");
    for &d in ds {
        writeln!(out, "{d},{},{},{}", one_way_explicit_bound(d), beljaars_bound(d), 2.0 * d).unwrap();
    }
    out
}
