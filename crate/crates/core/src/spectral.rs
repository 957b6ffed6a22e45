//! Spectrum, positivity and numerical rank of Gram matrices, plus parameter
//! scans locating the singular points.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::gram::{build_gram, hermiticity_gap, GramMatrix};
use crate::params::{make_preset, DeformationSpec, Family, Order, PresetArgs};

/// Inputs further than this from Hermitian are rejected.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

/// Relative factor of the default numerical-rank rule.
pub const RANK_REL_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eig: f64,
    pub rank: usize,
    pub tolerance: f64,
}

/// `dim · max|λ| · 1e-12`.
pub fn default_rank_tol(dim: usize, max_abs_eig: f64) -> f64 {
    dim as f64 * max_abs_eig * RANK_REL_TOL
}

/// Eigen-decomposition of a Hermitian matrix after symmetrization.
/// Returns ascending eigenvalues and the matching eigenvector columns.
pub fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Precondition("matrix must be square".into()));
    }
    let gap = hermiticity_gap(m);
    if gap > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitianMatrix {
            gap,
            tol: HERMITIAN_INPUT_TOL,
        });
    }
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig =
        SymmetricEigen::try_new(sym, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

pub fn spectrum_of(m: &DMatrix<Complex64>, tol: Option<f64>) -> Result<SpectrumReport> {
    let (eigenvalues, _) = hermitian_eigen(m)?;
    let max_abs = eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let tolerance = tol.unwrap_or_else(|| default_rank_tol(m.nrows(), max_abs));
    let rank = eigenvalues.iter().filter(|&&x| x > tolerance).count();
    Ok(SpectrumReport {
        min_eig: eigenvalues.first().copied().unwrap_or(0.0),
        eigenvalues,
        rank,
        tolerance,
    })
}

/// Spectrum of a Gram matrix; `tol` overrides the default rank rule.
pub fn spectrum(g: &GramMatrix, tol: Option<f64>) -> Result<SpectrumReport> {
    spectrum_of(&g.entries, tol)
}

/// Moore–Penrose inverse of a Hermitian matrix, restricted to the eigenspace
/// above the rank tolerance.
pub fn hermitian_pinv(m: &DMatrix<Complex64>, tol: Option<f64>) -> Result<DMatrix<Complex64>> {
    let (values, vectors) = hermitian_eigen(m)?;
    let max_abs = values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let cut = tol.unwrap_or_else(|| default_rank_tol(m.nrows(), max_abs));
    let n = m.nrows();
    let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (k, &lam) in values.iter().enumerate() {
        if lam.abs() <= cut {
            continue;
        }
        let v = vectors.column(k);
        out += (v * v.adjoint()).map(|z| z / lam);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub param: f64,
    pub min_eig: f64,
    pub rank: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
    /// Threshold below which a min eigenvalue counts as a violation.
    pub tolerance: f64,
}

impl ScanReport {
    /// Points with `min_eig < -tolerance`.
    pub fn violations(&self) -> Vec<&ScanPoint> {
        self.points
            .iter()
            .filter(|p| p.min_eig < -self.tolerance)
            .collect()
    }

    /// Points with rank below the dimension.
    pub fn singular_points(&self) -> Vec<&ScanPoint> {
        self.points.iter().filter(|p| p.rank < p.dim).collect()
    }

    /// `param,min_eig,rank`, floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,min_eig,rank\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", fmt17(p.param), fmt17(p.min_eig), p.rank);
        }
        out
    }
}

/// Default violation threshold for positivity scans.
pub const POSITIVITY_TOL: f64 = 1e-9;

fn check_grid(grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Precondition("empty grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "grid must be strictly increasing".into(),
        ));
    }
    if grid.iter().any(|&x| x < lo || x > hi) {
        return Err(Error::Precondition(format!(
            "grid must lie in [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Minimum eigenvalue and rank of `A^(n)` over a scalar-q grid in [-1, 1].
pub fn positivity_scan<F>(
    make_spec: F,
    base_tuple: &[usize],
    grid: &[f64],
    tol: Option<f64>,
) -> Result<ScanReport>
where
    F: Fn(f64) -> Result<DeformationSpec> + Sync,
{
    check_grid(grid, -1.0, 1.0)?;
    let points = grid
        .par_iter()
        .map(|&q| {
            let spec = make_spec(q)?;
            let g = build_gram(&spec, base_tuple)?;
            let s = spectrum(&g, None)?;
            Ok(ScanPoint {
                param: q,
                min_eig: s.min_eig,
                rank: s.rank,
                dim: g.dim(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        points,
        tolerance: tol.unwrap_or(POSITIVITY_TOL),
    })
}

/// Rank of `A^(n)` for the anyon preset along a λ grid in [0, 1]. Repeated
/// indices are allowed (those entries come from the oracle).
pub fn rank_scan_anyon(
    lambdas: &[f64],
    phi: &DMatrix<f64>,
    order: Order,
    base_tuple: &[usize],
    tol: Option<f64>,
) -> Result<ScanReport> {
    check_grid(lambdas, 0.0, 1.0)?;
    let points = lambdas
        .par_iter()
        .map(|&lambda| {
            let spec = make_preset(
                Family::Anyon,
                &PresetArgs {
                    lambda: Some(lambda),
                    phi: Some(phi.clone()),
                    order: Some(order),
                    ..Default::default()
                },
            )?;
            let g = build_gram(&spec, base_tuple)?;
            let s = spectrum(&g, None)?;
            Ok(ScanPoint {
                param: lambda,
                min_eig: s.min_eig,
                rank: s.rank,
                dim: g.dim(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        points,
        tolerance: tol.unwrap_or(POSITIVITY_TOL),
    })
}

/// Default phase matrix for anyon scans: φ_ij = π/3 for i < j.
pub fn default_phi(sites: usize) -> DMatrix<f64> {
    DMatrix::from_fn(sites, sites, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => PI / 3.0,
        std::cmp::Ordering::Greater => -PI / 3.0,
        std::cmp::Ordering::Equal => 0.0,
    })
}
