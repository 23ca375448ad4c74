//! Two-point resistance from the eigensystem, the all-pairs matrix, and the
//! shift-regularized Green's function.
//!
//! The resistance between nodes alpha and beta is the sum over nonzero modes
//! of `(phi_ia - phi_ib)(psi_ia - psi_ib) / (lambda_i phi_i* psi_i)`. The
//! general denominator form is evaluated even though the inverse-based
//! construction normalizes `phi_i* psi_i` to one, so gauge changes of the
//! eigenvectors cancel exactly. Sums run in ascending mode order; results are
//! deterministic regardless of how pairs are scheduled.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netlist::NodeMap;
use crate::spectral::Spectrum;

/// A resistance value with its numerical diagnostics.
#[derive(Debug, Clone)]
pub struct ResistanceResult {
    /// Resistance in ohms (real part of the mode sum).
    pub value: f64,
    /// Magnitude of the discarded imaginary part.
    pub imag_residual: f64,
    /// Per-mode contributions, when requested.
    pub terms: Option<Vec<Complex64>>,
}

/// Tolerance on the discarded imaginary residue.
pub fn real_tolerance(value: f64) -> f64 {
    1e-8 * value.abs().max(1.0)
}

fn mode_sum(
    spectrum: &Spectrum,
    alpha: usize,
    beta: usize,
    keep_terms: bool,
) -> (Complex64, Option<Vec<Complex64>>) {
    let n = spectrum.n();
    let psi = spectrum.right();
    let phi = spectrum.left();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut terms = keep_terms.then(Vec::new);
    for i in 0..n {
        if i == spectrum.zero_index() {
            continue;
        }
        let d_phi = phi[[i, alpha]] - phi[[i, beta]];
        let d_psi = psi[[alpha, i]] - psi[[beta, i]];
        let denom = spectrum.eigenvalue(i) * spectrum.mode_inner_product(i);
        let term = d_phi * d_psi / denom;
        if let Some(t) = terms.as_mut() {
            t.push(term);
        }
        sum += term;
    }
    (sum, terms)
}

/// Resistance between two distinct nodes.
pub fn two_point_resistance(
    spectrum: &Spectrum,
    alpha: usize,
    beta: usize,
) -> Result<ResistanceResult> {
    resistance_impl(spectrum, alpha, beta, false)
}

/// Like [`two_point_resistance`], retaining per-mode terms for diagnostics.
pub fn two_point_resistance_with_terms(
    spectrum: &Spectrum,
    alpha: usize,
    beta: usize,
) -> Result<ResistanceResult> {
    resistance_impl(spectrum, alpha, beta, true)
}

fn resistance_impl(
    spectrum: &Spectrum,
    alpha: usize,
    beta: usize,
    keep_terms: bool,
) -> Result<ResistanceResult> {
    let n = spectrum.n();
    if alpha >= n || beta >= n {
        return Err(Error::UnknownNode(format!(
            "index {} out of range 0..{n}",
            alpha.max(beta)
        )));
    }
    if alpha == beta {
        // the trivial zero is not returned silently
        return Err(Error::SameNode(format!("alpha = beta = {alpha}")));
    }
    let (sum, terms) = mode_sum(spectrum, alpha, beta, keep_terms);
    let value = sum.re;
    let imag_residual = sum.im.abs();
    let tol = real_tolerance(value);
    if imag_residual > tol {
        return Err(Error::NonRealResult {
            residual: imag_residual,
            tol,
        });
    }
    Ok(ResistanceResult {
        value,
        imag_residual,
        terms,
    })
}

/// Storage layout of a resistance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Upper triangle populated, diagonal and lower triangle zero.
    Upper,
    /// Both triangles populated.
    Mirrored,
}

/// All-pairs resistance matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct ResistanceMatrix {
    values: Array2<f64>,
    node_map: NodeMap,
    layout: Layout,
}

impl ResistanceMatrix {
    pub fn n(&self) -> usize {
        self.node_map.len()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn node_map(&self) -> &NodeMap {
        &self.node_map
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// The resistance for a node pair, regardless of layout.
    pub fn get(&self, alpha: usize, beta: usize) -> f64 {
        match self.layout {
            Layout::Mirrored => self.values[[alpha, beta]],
            Layout::Upper => {
                let (lo, hi) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
                self.values[[lo, hi]]
            }
        }
    }

    /// A copy with the lower triangle mirrored from the upper.
    pub fn mirrored(&self) -> ResistanceMatrix {
        let n = self.n();
        let mut values = self.values.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.get(i, j);
                values[[i, j]] = v;
                values[[j, i]] = v;
            }
        }
        ResistanceMatrix {
            values,
            node_map: self.node_map.clone(),
            layout: Layout::Mirrored,
        }
    }

    /// Plain-text block in the reference layout: upper triangle in
    /// 7-significant-digit scientific notation, structural zeros as `0`.
    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let populated = match self.layout {
                    Layout::Upper => j > i,
                    Layout::Mirrored => j != i,
                };
                if populated {
                    row.push(format!("{:>13}", sci7(self.values[[i, j]])));
                } else {
                    row.push(format!("{:>13}", "0"));
                }
            }
            out.push_str(row.join(" ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.node_map.names().join(",");
        out.push('\n');
        for i in 0..self.n() {
            let row: Vec<String> = self.values.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            nodes: &'a [String],
            layout: Layout,
            matrix: Vec<Vec<f64>>,
        }
        let doc = Doc {
            nodes: self.node_map.names(),
            layout: self.layout,
            matrix: (0..self.n()).map(|i| self.values.row(i).to_vec()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("matrix serialization cannot fail")
    }
}

/// Evaluates the resistance for every pair `alpha < beta`.
pub fn all_pairs(spectrum: &Spectrum, node_map: &NodeMap) -> Result<ResistanceMatrix> {
    let n = spectrum.n();
    if node_map.len() != n {
        return Err(Error::InvalidMatrix(format!(
            "node map has {} names but the spectrum is {n}-dimensional",
            node_map.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let computed: Result<Vec<(usize, usize, f64)>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let r = two_point_resistance(spectrum, a, b).map_err(|e| Error::AtPair {
                alpha: node_map.name(a).to_string(),
                beta: node_map.name(b).to_string(),
                source: Box::new(e),
            })?;
            Ok((a, b, r.value))
        })
        .collect();
    let mut values = Array2::zeros((n, n));
    for (a, b, v) in computed? {
        values[[a, b]] = v;
    }
    Ok(ResistanceMatrix {
        values,
        node_map: node_map.clone(),
        layout: Layout::Upper,
    })
}

/// Green's function entry `G_ab(eps)` of the shifted Laplacian.
///
/// For `eps != 0` this is `1/(N eps)` plus the regular part; for `eps = 0`
/// the zero-mode term is omitted and the regular part `g_ab(0)` is returned.
/// The proof text introduces the shift as `eps L`, but its eigenvalue list
/// and inverse-matrix elements use `lambda_i + eps`; the additive shift is
/// implemented here, exactly as in those denominators.
pub fn greens_function(
    spectrum: &Spectrum,
    epsilon: f64,
    alpha: usize,
    beta: usize,
) -> Result<Complex64> {
    let n = spectrum.n();
    if alpha >= n || beta >= n {
        return Err(Error::UnknownNode(format!(
            "index {} out of range 0..{n}",
            alpha.max(beta)
        )));
    }
    let psi = spectrum.right();
    let phi = spectrum.left();
    let scale = spectrum
        .eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(epsilon.abs(), f64::max);
    let pole_tol = n as f64 * f64::EPSILON * scale;

    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        if i == spectrum.zero_index() {
            continue;
        }
        let shifted = spectrum.eigenvalue(i) + epsilon;
        if shifted.norm() <= pole_tol {
            return Err(Error::Pole {
                epsilon,
                index: i,
                gap: shifted.norm(),
            });
        }
        sum += psi[[alpha, i]] * phi[[i, beta]] / (shifted * spectrum.mode_inner_product(i));
    }
    if epsilon != 0.0 {
        sum += Complex64::new(1.0 / (n as f64 * epsilon), 0.0);
    }
    Ok(sum)
}

/// Formats a value in 7-significant-digit scientific notation with a signed
/// two-digit exponent, e.g. `1.864198E+02`.
pub fn sci7(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    let formatted = format!("{:.6E}", x);
    let (mantissa, exp) = formatted
        .split_once('E')
        .expect("{:.6E} always contains an exponent");
    let e: i32 = exp.parse().expect("exponent is an integer");
    format!("{mantissa}E{e:+03}")
}
