//! Nodal conductance matrix (Laplacian) construction and validation.
//!
//! Elements are stamped additively into a dense N x N matrix whose rows and
//! columns sum to zero by Kirchhoff's current law. Resistors stamp
//! symmetrically; a VCCS stamps asymmetrically whenever its control pair
//! differs from its output pair, which is what makes the Laplacian of an
//! active network non-symmetric.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::netlist::{expand_mos, Element, Netlist, NodeMap};
use crate::report::Finding;

/// Dense nodal conductance matrix with its node-name map.
#[derive(Debug, Clone)]
pub struct Laplacian {
    matrix: Array2<f64>,
    node_map: NodeMap,
}

impl Laplacian {
    /// An all-zero matrix over the given nodes, ready for stamping.
    pub fn zeros(node_map: NodeMap) -> Self {
        let n = node_map.len();
        Laplacian {
            matrix: Array2::zeros((n, n)),
            node_map,
        }
    }

    /// Wraps an externally supplied matrix. Requires a square matrix of at
    /// least 2 nodes matching the node map.
    pub fn from_parts(matrix: Array2<f64>, node_map: NodeMap) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {rows}x{cols}, expected square"
            )));
        }
        if rows != node_map.len() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {rows}x{rows} but {} node names given",
                node_map.len()
            )));
        }
        if rows < 2 {
            return Err(Error::InvalidMatrix(
                "a network needs at least 2 nodes".to_string(),
            ));
        }
        Ok(Laplacian { matrix, node_map })
    }

    pub fn n(&self) -> usize {
        self.node_map.len()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn node_map(&self) -> &NodeMap {
        &self.node_map
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Scale-aware stamping tolerance: N * eps * max|entry|.
    pub fn tol_stamp(&self) -> f64 {
        self.n() as f64 * f64::EPSILON * self.max_abs_entry()
    }

    /// Adds a conductance `c` between nodes `i` and `j`:
    /// +c at (i,i), (j,j) and -c at (i,j), (j,i).
    pub fn stamp_resistor(&mut self, i: usize, j: usize, c: f64) -> Result<()> {
        if i == j {
            return Err(Error::DegenerateElement(format!(
                "resistor stamped onto a single node (index {i})"
            )));
        }
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::DegenerateElement(format!(
                "resistor conductance must be positive and finite, got {c}"
            )));
        }
        self.matrix[[i, i]] += c;
        self.matrix[[j, j]] += c;
        self.matrix[[i, j]] -= c;
        self.matrix[[j, i]] -= c;
        Ok(())
    }

    /// Adds a VCCS stamp: current g*(Vj - Vj') flows into node k and out of
    /// node k'. Entries: +g at (k,j), -g at (k,j'), -g at (k',j), +g at (k',j').
    pub fn stamp_vccs(&mut self, k: usize, kp: usize, j: usize, jp: usize, g: f64) -> Result<()> {
        if k == kp {
            return Err(Error::DegenerateElement(format!(
                "vccs output pair collapsed (index {k})"
            )));
        }
        if j == jp {
            return Err(Error::DegenerateElement(format!(
                "vccs control pair collapsed (index {j})"
            )));
        }
        if !g.is_finite() {
            return Err(Error::DegenerateElement(format!(
                "vccs transconductance must be finite, got {g}"
            )));
        }
        self.matrix[[k, j]] += g;
        self.matrix[[k, jp]] -= g;
        self.matrix[[kp, j]] -= g;
        self.matrix[[kp, jp]] += g;
        Ok(())
    }
}

/// Structural health report for a stamped or ingested Laplacian.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub row_sum_max_abs: f64,
    pub col_sum_max_abs: f64,
    /// Symmetric within the stamping tolerance.
    pub is_symmetric: bool,
    pub tol_stamp: f64,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    /// Kirchhoff sums exceed the hard limit (1e6 x tol_stamp): the matrix is
    /// not usable as a Laplacian.
    pub fn is_hard_failure(&self) -> bool {
        self.findings
            .iter()
            .any(|f| f.severity == crate::report::Severity::Error)
    }
}

/// Checks row/column zero sums and symmetry.
///
/// Sums within `tol_stamp` are clean; between `tol_stamp` and 1e6 x
/// `tol_stamp` they are reported as warnings; beyond that the report is a
/// hard failure (the matrix cannot have come from element stamps).
pub fn validate(laplacian: &Laplacian) -> ValidationReport {
    let m = laplacian.matrix();
    let n = laplacian.n();
    let tol = laplacian.tol_stamp();

    let mut row_max = 0.0f64;
    let mut col_max = 0.0f64;
    for i in 0..n {
        let row_sum: f64 = m.row(i).sum();
        let col_sum: f64 = m.column(i).sum();
        row_max = row_max.max(row_sum.abs());
        col_max = col_max.max(col_sum.abs());
    }

    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[[i, j]] - m[[j, i]]).abs());
        }
    }
    let is_symmetric = asym <= tol;

    let mut findings = Vec::new();
    let hard = 1e6 * tol;
    for (label, value) in [("row", row_max), ("column", col_max)] {
        if value > hard {
            findings.push(Finding::error(format!(
                "{label} sums reach {value:e}, beyond the hard limit {hard:e}; \
                 Kirchhoff's current law is violated"
            )));
        } else if value > tol {
            findings.push(Finding::warning(format!(
                "{label} sums reach {value:e}, above the stamping tolerance {tol:e}"
            )));
        }
    }

    ValidationReport {
        row_sum_max_abs: row_max,
        col_sum_max_abs: col_max,
        is_symmetric,
        tol_stamp: tol,
        findings,
    }
}

/// Stamps every element of a merged netlist (MOS devices expanded first) and
/// validates the result.
pub fn build_laplacian(
    netlist: &Netlist,
    node_map: &NodeMap,
) -> Result<(Laplacian, ValidationReport)> {
    if node_map.len() < 2 {
        return Err(Error::Structure(format!(
            "{} surviving node(s); a network needs at least 2",
            node_map.len()
        )));
    }
    let mut laplacian = Laplacian::zeros(node_map.clone());
    for element in &netlist.elements {
        stamp_element(&mut laplacian, element)?;
    }
    let report = validate(&laplacian);
    Ok((laplacian, report))
}

fn stamp_element(laplacian: &mut Laplacian, element: &Element) -> Result<()> {
    match element {
        Element::Resistor {
            nodes: [a, b],
            resistance_ohms,
            ..
        } => {
            let (i, j) = (
                laplacian.node_map().require(a)?,
                laplacian.node_map().require(b)?,
            );
            laplacian.stamp_resistor(i, j, 1.0 / resistance_ohms)
        }
        Element::Vccs {
            nodes: [k, kp, j, jp],
            transconductance_siemens,
            ..
        } => {
            let map = laplacian.node_map();
            let (k, kp, j, jp) = (
                map.require(k)?,
                map.require(kp)?,
                map.require(j)?,
                map.require(jp)?,
            );
            laplacian.stamp_vccs(k, kp, j, jp, *transconductance_siemens)
        }
        Element::Mos { .. } => {
            for part in expand_mos(element)? {
                stamp_element(laplacian, &part)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{apply_merges, parse_netlist};

    fn two_nodes() -> NodeMap {
        NodeMap::new(vec!["a".into(), "b".into()]).unwrap()
    }

    pub(crate) fn example1_laplacian() -> Laplacian {
        let netlist = parse_netlist(crate::test_fixtures::EXAMPLE1_NET).unwrap();
        let (merged, map, _) = apply_merges(&netlist).unwrap();
        build_laplacian(&merged, &map).unwrap().0
    }

    pub(crate) fn example2_laplacian() -> Laplacian {
        let netlist = parse_netlist(crate::test_fixtures::EXAMPLE2_NET).unwrap();
        let (merged, map, _) = apply_merges(&netlist).unwrap();
        build_laplacian(&merged, &map).unwrap().0
    }

    #[test]
    fn unit_resistor_stamp() {
        let mut l = Laplacian::zeros(two_nodes());
        l.stamp_resistor(0, 1, 1.0).unwrap();
        assert_eq!(l.matrix()[[0, 0]], 1.0);
        assert_eq!(l.matrix()[[0, 1]], -1.0);
        assert_eq!(l.matrix()[[1, 0]], -1.0);
        assert_eq!(l.matrix()[[1, 1]], 1.0);
    }

    #[test]
    fn stamps_are_additive() {
        let mut l = Laplacian::zeros(two_nodes());
        l.stamp_resistor(0, 1, 0.25).unwrap();
        l.stamp_resistor(0, 1, 0.25).unwrap();
        assert_eq!(l.matrix()[[0, 0]], 0.5);
        assert_eq!(l.matrix()[[0, 1]], -0.5);
    }

    #[test]
    fn rejects_degenerate_stamps() {
        let mut l = Laplacian::zeros(two_nodes());
        assert!(l.stamp_resistor(0, 0, 1.0).is_err());
        assert!(l.stamp_resistor(0, 1, -1.0).is_err());
        let map = NodeMap::new((0..4).map(|i| format!("n{i}")).collect()).unwrap();
        let mut l = Laplacian::zeros(map);
        assert!(l.stamp_vccs(2, 2, 0, 1, 1.0).is_err());
        assert!(l.stamp_vccs(2, 3, 1, 1, 1.0).is_err());
    }

    #[test]
    fn vccs_stamp_placement() {
        let map = NodeMap::new((0..4).map(|i| format!("n{i}")).collect()).unwrap();
        let mut l = Laplacian::zeros(map);
        let g = 0.7;
        l.stamp_vccs(2, 3, 0, 1, g).unwrap();
        let m = l.matrix();
        assert_eq!(m[[2, 0]], g);
        assert_eq!(m[[2, 1]], -g);
        assert_eq!(m[[3, 0]], -g);
        assert_eq!(m[[3, 1]], g);
        assert_eq!(m.iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn zero_vccs_leaves_matrix_unchanged() {
        let map = NodeMap::new((0..4).map(|i| format!("n{i}")).collect()).unwrap();
        let mut l = Laplacian::zeros(map);
        l.stamp_vccs(2, 3, 0, 1, 0.0).unwrap();
        assert!(l.matrix().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn example1_matrix_entries() {
        let l = example1_laplacian();
        let (c1, c2, g) = (1.0 / 200.0, 1.0 / 4000.0, 0.03);
        let expected = [
            [2.0 * c1, -c1, 0.0, -c1],
            [-c1 + g, 2.0 * c1 + c2, -c1, -c2 - g],
            [0.0, -c1, 2.0 * c1, -c1],
            [-c1 - g, -c2, -c1, 2.0 * c1 + c2 + g],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l.matrix()[[i, j]], expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn example2_matrix_entries() {
        let l = example2_laplacian();
        let (c1, g) = (1.0, 2.0);
        let expected = [
            [3.0 * c1, -c1, -c1, -c1],
            [-c1, 3.0 * c1, -c1, -c1],
            [-c1 + g, -c1, 3.0 * c1, -c1 - g],
            [-c1 - g, -c1, -c1, 3.0 * c1 + g],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(l.matrix()[[i, j]], expected[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn opamp_matrix_to_four_significant_digits() {
        let netlist = parse_netlist(crate::test_fixtures::OPAMP_NET).unwrap();
        let (merged, map, _) = apply_merges(&netlist).unwrap();
        assert_eq!(map.names(), ["n1", "n2", "n3", "n4", "gnd"]);
        let (l, report) = build_laplacian(&merged, &map).unwrap();
        assert!(!report.is_hard_failure());
        assert!(!report.is_symmetric);

        for i in 0..5 {
            for j in 0..5 {
                let reference = crate::test_fixtures::OPAMP_L_REFERENCE[i][j];
                let got = l.matrix()[[i, j]];
                if reference == 0.0 {
                    assert_eq!(got, 0.0, "entry ({i},{j}) expected exact zero");
                } else {
                    // half-ulp agreement in the 4th significant digit
                    let ulp4 = 10f64.powi(reference.abs().log10().floor() as i32 - 3);
                    assert!(
                        (got - reference).abs() <= 0.5 * ulp4,
                        "entry ({i},{j}): {got:e} vs reference {reference:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_resistor_network() {
        let netlist = parse_netlist("R1 a b 1").unwrap();
        let (merged, map, _) = apply_merges(&netlist).unwrap();
        let (l, report) = build_laplacian(&merged, &map).unwrap();
        assert_eq!(l.matrix()[[0, 0]], 1.0);
        assert_eq!(l.matrix()[[0, 1]], -1.0);
        assert!(report.is_symmetric);
        assert!(report.findings.is_empty());
    }

    #[test]
    fn build_rejects_too_few_nodes() {
        let netlist = parse_netlist("R1 a b 1\n.short a b").unwrap();
        let (merged, map, _) = apply_merges(&netlist).unwrap();
        assert!(build_laplacian(&merged, &map).is_err());
    }

    #[test]
    fn validation_flags() {
        let l = example1_laplacian();
        let report = validate(&l);
        assert!(report.row_sum_max_abs <= l.tol_stamp());
        assert!(report.col_sum_max_abs <= l.tol_stamp());
        assert!(!report.is_symmetric);
        assert!(report.findings.is_empty());

        let sym = {
            let netlist = parse_netlist("R1 a b 200\nR2 b c 4000").unwrap();
            let (merged, map, _) = apply_merges(&netlist).unwrap();
            build_laplacian(&merged, &map).unwrap().0
        };
        assert!(validate(&sym).is_symmetric);
    }

    #[test]
    fn validation_hard_fails_on_malformed_matrix() {
        let map = two_nodes();
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = 1.0;
        m[[1, 1]] = 1.0;
        m[[0, 1]] = -0.5; // row/col sums badly nonzero
        let l = Laplacian::from_parts(m, map).unwrap();
        let report = validate(&l);
        assert!(report.is_hard_failure());
    }

    #[test]
    fn mos_expansion_stamp_equals_parts() {
        let map = NodeMap::new(vec!["d".into(), "g".into(), "s".into()]).unwrap();
        let mos = Element::Mos {
            name: "M1".into(),
            nodes: ["d".into(), "g".into(), "s".into()],
            gm_siemens: 5.155032E-04,
            gds_siemens: 2.816268E-03,
        };
        let mut whole = Laplacian::zeros(map.clone());
        stamp_element(&mut whole, &mos).unwrap();

        let mut parts = Laplacian::zeros(map.clone());
        parts
            .stamp_vccs(0, 2, 1, 2, 5.155032E-04)
            .and_then(|_| parts.stamp_resistor(0, 2, 2.816268E-03))
            .unwrap();
        assert_eq!(whole.matrix(), parts.matrix());
    }
}
