//! Eigendecomposition of the Laplacian with a biorthogonal left/right
//! eigenvector pair.
//!
//! Right eigenvectors come from a dense general eigensolver; the left
//! eigenvector matrix is the inverse of the right one, which enforces
//! `phi_i* psi_j = delta_ij` up to solver accuracy even inside repeated
//! eigenvalue eigenspaces. Arithmetic is complex throughout: a real
//! non-symmetric Laplacian can carry conjugate eigenvalue pairs, whose
//! contributions cancel downstream.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, Inverse, SVD};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laplacian::{validate, Laplacian};
use crate::report::Finding;

/// Dimensionless biorthogonality tolerance: allows inversion round-off while
/// catching genuine defects.
pub fn biorth_tolerance(n: usize) -> f64 {
    1e3 * n as f64 * f64::EPSILON
}

/// Eigenvalues and biorthogonal eigenvector pair of a Laplacian.
///
/// The zero mode is stored first. Remaining eigenvalues are sorted ascending
/// by (real part, imaginary part), which keeps conjugate pairs adjacent.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Array1<Complex64>,
    /// Right eigenvectors, one per column.
    right: Array2<Complex64>,
    /// Left eigenvectors, one per row; the inverse of `right`.
    left: Array2<Complex64>,
    zero_index: usize,
    /// Whether `phi_i* psi_i = 1` holds for every mode (true for the
    /// inverse-based construction, false after gauge rescaling).
    normalized: bool,
    /// 2-norm condition number of the right eigenvector matrix.
    cond_right: f64,
    /// Zero-mode detection band actually applied.
    tol_zero: f64,
    /// Cached per-mode inner products `phi_i* psi_i`, so that one resistance
    /// evaluation costs O(N) after the decomposition.
    inner: Array1<Complex64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &Array1<Complex64> {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, i: usize) -> Complex64 {
        self.eigenvalues[i]
    }

    /// Right eigenvector matrix (columns are eigenvectors).
    pub fn right(&self) -> &Array2<Complex64> {
        &self.right
    }

    /// Left eigenvector matrix (rows are eigenvectors).
    pub fn left(&self) -> &Array2<Complex64> {
        &self.left
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn cond_right(&self) -> f64 {
        self.cond_right
    }

    pub fn tol_zero(&self) -> f64 {
        self.tol_zero
    }

    /// Smallest nonzero eigenvalue magnitude.
    pub fn min_nonzero_abs(&self) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.zero_index)
            .map(|(_, l)| l.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// The inner product `phi_i* psi_i` entering the resistance denominators.
    pub fn mode_inner_product(&self, i: usize) -> Complex64 {
        self.inner[i]
    }

    /// Assembles a spectrum from caller-provided parts, e.g. hand-computed
    /// eigenvector tables. The zero mode must already be first.
    pub fn from_parts(
        eigenvalues: Array1<Complex64>,
        right: Array2<Complex64>,
        left: Array2<Complex64>,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if right.dim() != (n, n) || left.dim() != (n, n) {
            return Err(Error::InvalidMatrix(
                "eigenvector matrices must be N x N".to_string(),
            ));
        }
        let max_abs = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let tol_zero = zero_tolerance(n, max_abs, None);
        let zero_count = eigenvalues.iter().filter(|l| l.norm() <= tol_zero).count();
        if zero_count == 0 {
            return Err(Error::NoZeroMode { tol: tol_zero });
        }
        if zero_count > 1 {
            return Err(Error::MultipleZeroModes {
                count: zero_count,
                tol: tol_zero,
            });
        }
        if eigenvalues[0].norm() > tol_zero {
            return Err(Error::Structure(
                "zero eigenvalue must be stored first".to_string(),
            ));
        }
        let cond_right = condition_number(&right)?;
        let inner = mode_inner_products(&left, &right);
        let mut spectrum = Spectrum {
            eigenvalues,
            right,
            left,
            zero_index: 0,
            normalized: false,
            cond_right,
            tol_zero,
            inner,
        };
        let report = verify_biorthogonality(&spectrum, biorth_tolerance(n));
        spectrum.normalized = report.max_diagonal_deviation <= biorth_tolerance(n);
        Ok(spectrum)
    }

    /// Gauge change: rescales each right eigenvector by the given factor,
    /// leaving the left ones untouched. Downstream resistance values are
    /// invariant because the `phi_i* psi_i` denominators rescale identically.
    pub fn with_rescaled_right(&self, scales: &[Complex64]) -> Spectrum {
        assert_eq!(scales.len(), self.n());
        let mut right = self.right.clone();
        let mut inner = self.inner.clone();
        for (i, s) in scales.iter().enumerate() {
            right.column_mut(i).mapv_inplace(|v| v * s);
            inner[i] *= s;
        }
        Spectrum {
            eigenvalues: self.eigenvalues.clone(),
            right,
            left: self.left.clone(),
            zero_index: self.zero_index,
            normalized: scales.iter().all(|s| *s == Complex64::new(1.0, 0.0)) && self.normalized,
            cond_right: self.cond_right,
            tol_zero: self.tol_zero,
            inner,
        }
    }

    /// JSON export: eigenvalues as (re, im) pairs, eigenvector matrices
    /// row-major.
    pub fn to_json(&self) -> String {
        let pair = |c: &Complex64| (c.re, c.im);
        let doc = SpectrumJson {
            eigenvalues: self.eigenvalues.iter().map(pair).collect(),
            right: self
                .right
                .axis_iter(Axis(0))
                .map(|row| row.iter().map(pair).collect())
                .collect(),
            left: self
                .left
                .axis_iter(Axis(0))
                .map(|row| row.iter().map(pair).collect())
                .collect(),
            zero_index: self.zero_index,
            cond_right: self.cond_right,
        };
        serde_json::to_string_pretty(&doc).expect("spectrum serialization cannot fail")
    }
}

#[derive(Serialize)]
struct SpectrumJson {
    eigenvalues: Vec<(f64, f64)>,
    right: Vec<Vec<(f64, f64)>>,
    left: Vec<Vec<(f64, f64)>>,
    zero_index: usize,
    cond_right: f64,
}

fn zero_tolerance(n: usize, max_abs_eigenvalue: f64, override_tol: Option<f64>) -> f64 {
    match override_tol {
        Some(t) => t,
        None => (n as f64 * f64::EPSILON).max(1e-14) * max_abs_eigenvalue,
    }
}

fn mode_inner_products(left: &Array2<Complex64>, right: &Array2<Complex64>) -> Array1<Complex64> {
    let n = left.nrows();
    Array1::from_iter((0..n).map(|i| left.row(i).dot(&right.column(i))))
}

fn condition_number(m: &Array2<Complex64>) -> Result<f64> {
    let (_, sv, _) = m.svd(false, false)?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(smax / smin)
}

/// Computes the eigensystem of `laplacian`.
pub fn eigendecompose(laplacian: &Laplacian) -> Result<Spectrum> {
    eigendecompose_with_tol(laplacian, None)
}

/// Like [`eigendecompose`] but with an explicit zero-mode detection band.
pub fn eigendecompose_with_tol(
    laplacian: &Laplacian,
    tol_zero_override: Option<f64>,
) -> Result<Spectrum> {
    let report = validate(laplacian);
    if report.is_hard_failure() {
        let detail = report
            .findings
            .iter()
            .map(|f| f.message.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Structure(detail));
    }

    let n = laplacian.n();
    let (eigenvalues, right_raw) = laplacian.matrix().eig()?;

    let cond_right = condition_number(&right_raw)?;
    let cond_limit = 1.0 / (n as f64 * f64::EPSILON);
    if cond_right > cond_limit {
        return Err(Error::NonDiagonalizable {
            cond: cond_right,
            limit: cond_limit,
        });
    }

    let max_abs = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    let tol_zero = zero_tolerance(n, max_abs, tol_zero_override);
    let zero_modes: Vec<usize> = (0..n)
        .filter(|&i| eigenvalues[i].norm() <= tol_zero)
        .collect();
    let zero = match zero_modes.len() {
        0 => return Err(Error::NoZeroMode { tol: tol_zero }),
        1 => zero_modes[0],
        count => {
            return Err(Error::MultipleZeroModes {
                count,
                tol: tol_zero,
            })
        }
    };

    // zero mode first, rest ascending by (re, im); conjugate pairs stay adjacent
    let mut order: Vec<usize> = (0..n).filter(|&i| i != zero).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[a]
            .re
            .total_cmp(&eigenvalues[b].re)
            .then(eigenvalues[a].im.total_cmp(&eigenvalues[b].im))
    });
    order.insert(0, zero);

    let eigenvalues = Array1::from_iter(order.iter().map(|&i| eigenvalues[i]));
    let mut right = Array2::zeros((n, n));
    for (new, &old) in order.iter().enumerate() {
        right.column_mut(new).assign(&right_raw.column(old));
    }
    let left = right.inv()?;
    let inner = mode_inner_products(&left, &right);

    Ok(Spectrum {
        eigenvalues,
        right,
        left,
        zero_index: 0,
        normalized: true,
        cond_right,
        tol_zero,
        inner,
    })
}

/// Biorthogonality report: how far `Phi Psi` is from the identity.
#[derive(Debug, Clone, Serialize)]
pub struct BiorthReport {
    pub max_off_diagonal: f64,
    pub max_diagonal_deviation: f64,
    pub findings: Vec<Finding>,
}

/// Measures mutual orthogonality of the left and right eigenvectors:
/// `|phi_i* psi_j|` off the diagonal and `|phi_i* psi_i - 1|` on it.
pub fn verify_biorthogonality(spectrum: &Spectrum, tol: f64) -> BiorthReport {
    let n = spectrum.n();
    let product = spectrum.left().dot(spectrum.right());
    let mut max_off = 0.0f64;
    let mut max_diag = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = product[[i, j]];
            if i == j {
                max_diag = max_diag.max((v - Complex64::new(1.0, 0.0)).norm());
            } else {
                max_off = max_off.max(v.norm());
            }
        }
    }
    let mut findings = Vec::new();
    if max_off > tol {
        findings.push(Finding::error(format!(
            "off-diagonal |phi_i* psi_j| reaches {max_off:e}, above {tol:e}"
        )));
    }
    if max_diag > tol && spectrum.is_normalized() {
        findings.push(Finding::error(format!(
            "diagonal deviation |phi_i* psi_i - 1| reaches {max_diag:e}, above {tol:e}"
        )));
    }
    BiorthReport {
        max_off_diagonal: max_off,
        max_diagonal_deviation: max_diag,
        findings,
    }
}

/// Zero-mode report: simplicity plus all-ones proportionality residuals.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroModeReport {
    /// Max deviation of the right zero eigenvector from a constant vector,
    /// relative to its largest entry.
    pub right_residual: f64,
    /// Same for the left zero eigenvector.
    pub left_residual: f64,
    pub findings: Vec<Finding>,
}

/// Confirms the zero mode's eigenvectors are proportional to the all-ones
/// vector. Simplicity itself is enforced at decomposition time.
pub fn verify_zero_mode(spectrum: &Spectrum) -> ZeroModeReport {
    let z = spectrum.zero_index();
    let right = spectrum.right().column(z).to_owned();
    let left = spectrum.left().row(z).to_owned();
    let tol = biorth_tolerance(spectrum.n());

    let residual = |v: &Array1<Complex64>| -> f64 {
        let n = v.len() as f64;
        let mean = v.sum() / Complex64::new(n, 0.0);
        let max_entry = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max_entry == 0.0 {
            return f64::INFINITY;
        }
        v.iter().map(|c| (c - mean).norm()).fold(0.0, f64::max) / max_entry
    };

    let right_residual = residual(&right);
    let left_residual = residual(&left);
    let mut findings = Vec::new();
    for (label, r) in [("right", right_residual), ("left", left_residual)] {
        if r > tol {
            findings.push(Finding::error(format!(
                "{label} zero eigenvector deviates from the all-ones direction by {r:e} \
                 (tolerance {tol:e})"
            )));
        }
    }
    ZeroModeReport {
        right_residual,
        left_residual,
        findings,
    }
}
