//! Text formats: measure spec files, density and sample CSVs, and writers for
//! measure tables and goodness-of-fit reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value reads back bit-for-bit.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::measure::{Atom, Family, Measure};
use crate::rmt::GofReport;

/// Contents of a measure spec file.
///
/// ```text
/// # comment
/// family = marchenko_pastur
/// c = 0.5
/// ```
///
/// or a tabulated measure:
///
/// ```text
/// atoms = [(0, 0.25), (2, 0.25)]
/// density_csv = density.csv
/// ```
///
/// `density_csv` is resolved relative to the spec file and must have a header
/// row followed by `t,density` rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpecFile {
    pub family: Option<String>,
    pub params: Vec<(String, f64)>,
    pub atoms: Vec<(f64, f64)>,
    pub density_csv: Option<PathBuf>,
    pub points: Option<usize>,
}

impl SpecFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut spec = SpecFile::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}: {raw:?}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected key = value"))?;
            if key.is_empty() || value.is_empty() {
                return Err(err("empty key or value"));
            }
            match key {
                "family" => spec.family = Some(value.to_string()),
                "atoms" => spec.atoms = parse_atoms(value).map_err(|e| err(&e))?,
                "density_csv" => spec.density_csv = Some(base.join(value)),
                "points" => {
                    spec.points = Some(
                        value
                            .parse()
                            .map_err(|_| err("points must be an integer"))?,
                    )
                }
                _ => {
                    let v = parse_f64(value).map_err(|e| err(&e))?;
                    spec.params.push((key.to_string(), v));
                }
            }
        }
        if spec.family.is_some() && (spec.density_csv.is_some() || !spec.atoms.is_empty()) {
            return Err(Error::Parse(
                "spec gives both a family and a tabulated measure".into(),
            ));
        }
        if spec.family.is_none() && spec.density_csv.is_none() && spec.atoms.is_empty() {
            return Err(Error::Parse(
                "spec defines neither a family nor atoms/density_csv".into(),
            ));
        }
        Ok(spec)
    }

    /// Builds the measure. Named families use `points` density nodes unless
    /// the file sets its own.
    pub fn to_measure(&self, points: usize) -> Result<Measure<f64>> {
        if let Some(name) = &self.family {
            let fam = Family::from_name(name, &self.params)?;
            return Measure::named(fam, self.points.unwrap_or(points));
        }
        let (grid, density) = match &self.density_csv {
            Some(p) => read_density_csv(p)?,
            None => (vec![], vec![]),
        };
        let atoms = self.atoms.iter().map(|&(x, m)| Atom::new(x, m)).collect();
        Measure::new(atoms, grid, density)
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not finite: {s:?}"))
    }
}

/// `[(loc, mass), …]`, brackets optional.
fn parse_atoms(s: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    let inner = s
        .trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .trim();
    if inner.is_empty() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let rest_trim = rest.trim_start_matches([',', ' ', '\t']);
        if rest_trim.is_empty() {
            break;
        }
        let body = rest_trim
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' in atoms near {rest_trim:?}"))?;
        let close = body
            .find(')')
            .ok_or_else(|| "unclosed '(' in atoms".to_string())?;
        let (loc, mass) = body[..close]
            .split_once(',')
            .ok_or_else(|| "atom must be (location, mass)".to_string())?;
        out.push((parse_f64(loc)?, parse_f64(mass)?));
        rest = &body[close + 1..];
    }
    Ok(out)
}

fn data_rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Reads `t,density` rows after a header line. Extra columns are ignored.
pub fn read_density_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let (mut grid, mut dens) = (Vec::new(), Vec::new());
    for (lineno, line) in data_rows(&text) {
        let mut cols = line.split(',');
        let mut next = || -> Result<f64> {
            let c = cols.next().ok_or_else(|| {
                Error::Parse(format!("{}:{lineno}: expected t,density", path.display()))
            })?;
            parse_f64(c).map_err(|e| Error::Parse(format!("{}:{lineno}: {e}", path.display())))
        };
        grid.push(next()?);
        dens.push(next()?);
    }
    Ok((grid, dens))
}

/// Reads the first column of a CSV with a header row.
pub fn read_samples_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    data_rows(&text)
        .map(|(lineno, line)| {
            let c = line.split(',').next().unwrap_or("");
            parse_f64(c).map_err(|e| Error::Parse(format!("{}:{lineno}: {e}", path.display())))
        })
        .collect()
}

/// Single-column sample CSV with the given header.
pub fn samples_csv(header: &str, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

/// `t,density,cdf` at every grid node of the continuous part.
pub fn measure_csv(mu: &Measure<f64>) -> String {
    let mut out = String::from("t,density,cdf\n");
    for (&t, &f) in mu.grid().iter().zip(mu.density()) {
        out.push_str(&format!("{t},{f},{}\n", mu.cdf(t)));
    }
    out
}

/// Rows of [`measure_csv`] as `[t, density, cdf]` triples.
pub fn measure_rows(mu: &Measure<f64>) -> Vec<[f64; 3]> {
    mu.grid()
        .iter()
        .zip(mu.density())
        .map(|(&t, &f)| [t, f, mu.cdf(t)])
        .collect()
}

/// `x,ecdf,cdf` rows of a goodness-of-fit table.
pub fn gof_csv(report: &GofReport) -> String {
    let mut out = String::from("x,ecdf,cdf\n");
    for r in &report.cdf_table {
        out.push_str(&format!("{},{},{}\n", r.x, r.ecdf, r.cdf));
    }
    out
}

/// Reads a `t,density,cdf` table written by [`measure_csv`] back into a
/// measure, with the atoms supplied separately.
pub fn read_measure_csv(path: &Path, atoms: &[(f64, f64)]) -> Result<Measure<f64>> {
    let (grid, density) = read_density_csv(path)?;
    let atoms = atoms.iter().map(|&(x, m)| Atom::new(x, m)).collect();
    let m = Measure::from_raw(atoms, grid, density);
    let v = m.validate_real_line();
    if v.is_empty() {
        Ok(m)
    } else {
        Err(Error::InvalidMeasure(v))
    }
}
