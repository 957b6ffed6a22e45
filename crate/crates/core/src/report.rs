//! Text serializations of Gram matrices. Floats are written with 17
//! significant digits, so a write/read cycle is bit-exact (−0 reads back as 0).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::gram::GramMatrix;
use crate::params::DeformationSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub spec_hash: String,
    pub p: String,
    /// Basis tuples, 1-based sites.
    pub basis: Vec<Vec<usize>>,
    pub entries: DMatrix<Complex64>,
}

impl GramReport {
    pub fn new(spec: &DeformationSpec, g: &GramMatrix) -> Self {
        GramReport {
            spec_hash: spec.digest(),
            p: spec.declared_order().to_string(),
            basis: g
                .basis
                .elements()
                .iter()
                .map(|t| t.iter().map(|s| s + 1).collect())
                .collect(),
            entries: g.entries.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "spec_hash = \"{}\"", self.spec_hash);
        let _ = writeln!(out, "n = {}", self.n());
        let _ = writeln!(out, "p = \"{}\"", self.p);
        let rows = |f: &dyn Fn(Complex64) -> f64| {
            let mut s = String::from("[\n");
            for r in 0..self.entries.nrows() {
                let cells: Vec<String> = (0..self.entries.ncols())
                    .map(|c| fmt17(f(self.entries[(r, c)])))
                    .collect();
                let _ = writeln!(s, "  [{}],", cells.join(", "));
            }
            s.push(']');
            s
        };
        let basis: Vec<String> = self
            .basis
            .iter()
            .map(|t| {
                format!(
                    "[{}]",
                    t.iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            })
            .collect();
        let _ = writeln!(out, "basis = [{}]", basis.join(", "));
        let _ = writeln!(out, "re = {}", rows(&|z| z.re));
        let _ = writeln!(out, "im = {}", rows(&|z| z.im));
        out
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            spec_hash: String,
            n: usize,
            p: String,
            basis: Vec<Vec<usize>>,
            re: Vec<Vec<f64>>,
            im: Vec<Vec<f64>>,
        }
        let raw: Raw = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let dim = raw.basis.len();
        if raw.re.len() != dim
            || raw.im.len() != dim
            || raw.re.iter().chain(&raw.im).any(|r| r.len() != dim)
        {
            return Err(Error::Format(
                "matrix shape does not match the basis".into(),
            ));
        }
        if raw.basis.iter().any(|t| t.len() != raw.n) {
            return Err(Error::Format("basis tuple length differs from n".into()));
        }
        Ok(GramReport {
            spec_hash: raw.spec_hash,
            p: raw.p,
            basis: raw.basis,
            entries: DMatrix::from_fn(dim, dim, |r, c| Complex64::new(raw.re[r][c], raw.im[r][c])),
        })
    }

    /// `# key=value` metadata lines, then `row,col,re,im` with space-separated
    /// 1-based tuples.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# spec_hash={}", self.spec_hash);
        let _ = writeln!(out, "# n={}", self.n());
        let _ = writeln!(out, "# p={}", self.p);
        out.push_str("row,col,re,im\n");
        let label = |t: &Vec<usize>| t.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        for (r, rt) in self.basis.iter().enumerate() {
            for (c, ct) in self.basis.iter().enumerate() {
                let z = self.entries[(r, c)];
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    label(rt),
                    label(ct),
                    fmt17(z.re),
                    fmt17(z.im)
                );
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut spec_hash = None;
        let mut p = None;
        let mut cells: Vec<(Vec<usize>, Vec<usize>, Complex64)> = Vec::new();
        let bad = |line: &str| Error::Format(format!("bad line `{line}`"));
        let tuple = |s: &str| -> Result<Vec<usize>> {
            s.split_whitespace()
                .map(|x| {
                    x.parse()
                        .map_err(|_| Error::Format(format!("bad tuple `{s}`")))
                })
                .collect()
        };
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or_else(|| bad(line))?;
                match k {
                    "spec_hash" => spec_hash = Some(v.to_string()),
                    "p" => p = Some(v.to_string()),
                    _ => {}
                }
                continue;
            }
            if line.is_empty() || line == "row,col,re,im" {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            cells.push((
                tuple(f[0])?,
                tuple(f[1])?,
                Complex64::new(num(f[2])?, num(f[3])?),
            ));
        }
        let mut basis: Vec<Vec<usize>> = Vec::new();
        for (r, _, _) in &cells {
            if !basis.contains(r) {
                basis.push(r.clone());
            }
        }
        let dim = basis.len();
        if cells.len() != dim * dim {
            return Err(Error::Format("matrix is not square".into()));
        }
        let mut entries = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (k, (r, c, z)) in cells.into_iter().enumerate() {
            if basis[k / dim] != r || basis[k % dim] != c {
                return Err(Error::Format(
                    "entries are not in row-major basis order".into(),
                ));
            }
            entries[(k / dim, k % dim)] = z;
        }
        Ok(GramReport {
            spec_hash: spec_hash.ok_or_else(|| Error::Format("missing spec_hash".into()))?,
            p: p.ok_or_else(|| Error::Format("missing p".into()))?,
            basis,
            entries,
        })
    }
}
