//! Direct-solve oracle: current injection into a grounded reduced system.
//!
//! This path never touches the eigensystem, so it cross-validates the
//! spectral formula independently. One node is grounded (its row and column
//! removed), the reduced system is solved by dense LU with partial pivoting,
//! and the resistance is the probe voltage difference per unit current.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laplacian::{validate, Laplacian};
use crate::report::Finding;
use crate::resistance::{two_point_resistance, ResistanceResult};
use crate::spectral::Spectrum;

/// A two-point probe: current `current` enters at `alpha` and leaves at `beta`.
#[derive(Debug, Clone, Copy)]
pub struct InjectionProblem<'a> {
    pub laplacian: &'a Laplacian,
    pub alpha: usize,
    pub beta: usize,
    /// Probe current in amperes.
    pub current: f64,
}

impl<'a> InjectionProblem<'a> {
    pub fn unit(laplacian: &'a Laplacian, alpha: usize, beta: usize) -> Self {
        InjectionProblem {
            laplacian,
            alpha,
            beta,
            current: 1.0,
        }
    }
}

/// Solves the injection problem grounding `beta`.
pub fn solve_direct(problem: &InjectionProblem) -> Result<ResistanceResult> {
    solve_grounded(problem, problem.beta)
}

/// Solves the injection problem grounding an arbitrary node. The resistance
/// is invariant to this choice; exposing it makes that testable.
pub fn solve_grounded(problem: &InjectionProblem, ground: usize) -> Result<ResistanceResult> {
    let potentials = solve_potentials(problem, ground)?;
    let value = (potentials[problem.alpha] - potentials[problem.beta]) / problem.current;
    Ok(ResistanceResult {
        value,
        imag_residual: 0.0,
        terms: None,
    })
}

/// Full node-potential vector for the injection problem, with the grounded
/// node pinned at zero volts.
pub fn solve_potentials(problem: &InjectionProblem, ground: usize) -> Result<Array1<f64>> {
    let l = problem.laplacian;
    let n = l.n();
    if problem.alpha >= n || problem.beta >= n || ground >= n {
        return Err(Error::UnknownNode(format!(
            "index out of range 0..{n}"
        )));
    }
    if problem.alpha == problem.beta {
        return Err(Error::SameNode(format!(
            "alpha = beta = {}",
            problem.alpha
        )));
    }
    let report = validate(l);
    if report.is_hard_failure() {
        return Err(Error::Structure(
            "Kirchhoff sums exceed the hard validation limit".to_string(),
        ));
    }
    check_connectivity(l, ground)?;

    let keep: Vec<usize> = (0..n).filter(|&i| i != ground).collect();
    let mut reduced = Array2::zeros((n - 1, n - 1));
    for (ri, &i) in keep.iter().enumerate() {
        for (rj, &j) in keep.iter().enumerate() {
            reduced[[ri, rj]] = l.matrix()[[i, j]];
        }
    }
    let mut rhs = Array1::zeros(n - 1);
    if let Some(pos) = keep.iter().position(|&i| i == problem.alpha) {
        rhs[pos] += problem.current;
    }
    if let Some(pos) = keep.iter().position(|&i| i == problem.beta) {
        rhs[pos] -= problem.current;
    }

    let solution = reduced.solve(&rhs).map_err(|e| {
        Error::SingularSystem(format!("LU factorization failed ({e}); network is degenerate"))
    })?;

    let mut potentials = Array1::zeros(n);
    for (ri, &i) in keep.iter().enumerate() {
        potentials[i] = solution[ri];
    }
    Ok(potentials)
}

/// Rejects galvanically separate networks up front, with a component count.
/// Connectivity is taken over the symmetrized nonzero pattern of the matrix.
fn check_connectivity(l: &Laplacian, ground: usize) -> Result<()> {
    let n = l.n();
    let m = l.matrix();
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        component[start] = count;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i != j
                    && component[j] == usize::MAX
                    && (m[[i, j]] != 0.0 || m[[j, i]] != 0.0)
                {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    if count > 1 {
        let sizes: Vec<usize> = (0..count)
            .map(|c| component.iter().filter(|&&x| x == c).count())
            .collect();
        return Err(Error::SingularSystem(format!(
            "network splits into {count} components (sizes {sizes:?}); \
             grounded node {} cannot reference the others",
            l.node_map().name(ground)
        )));
    }
    Ok(())
}

/// Cross-validation report between the spectral formula and the direct solve.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub pairs: usize,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    /// Pair with the largest relative deviation.
    pub worst_pair: Option<(String, String)>,
    pub findings: Vec<Finding>,
}

/// Evaluates every pair through both paths and reports the deviations.
/// Deviations are data, not errors; `findings` stays empty here.
pub fn compare(spectrum: &Spectrum, laplacian: &Laplacian) -> Result<CompareReport> {
    let n = laplacian.n();
    let mut max_abs = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut worst = None;
    let mut pairs = 0;
    for a in 0..n {
        for b in (a + 1)..n {
            let spectral = two_point_resistance(spectrum, a, b)?.value;
            let direct = solve_direct(&InjectionProblem::unit(laplacian, a, b))?.value;
            let abs = (spectral - direct).abs();
            let denom = spectral.abs().max(direct.abs());
            let rel = if denom == 0.0 { 0.0 } else { abs / denom };
            max_abs = max_abs.max(abs);
            if rel >= max_rel {
                max_rel = rel;
                worst = Some((
                    laplacian.node_map().name(a).to_string(),
                    laplacian.node_map().name(b).to_string(),
                ));
            }
            pairs += 1;
        }
    }
    Ok(CompareReport {
        pairs,
        max_abs_deviation: max_abs,
        max_rel_deviation: max_rel,
        worst_pair: worst,
        findings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacian::build_laplacian;
    use crate::netlist::{apply_merges, parse_netlist};
    use crate::spectral::eigendecompose;
    use crate::test_fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixture(net: &str) -> Laplacian {
        let netlist = parse_netlist(net).unwrap();
        let (merged, map, _) = apply_merges(&netlist).unwrap();
        build_laplacian(&merged, &map).unwrap().0
    }

    fn rel_dev(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn example1_probe() {
        let l = fixture(test_fixtures::EXAMPLE1_NET);
        let r = solve_direct(&InjectionProblem::unit(&l, 0, 2)).unwrap();
        assert!(rel_dev(r.value, 200.0) < 1e-12, "{}", r.value);
    }

    #[test]
    fn opamp_probe() {
        let l = fixture(test_fixtures::OPAMP_NET);
        let r = solve_direct(&InjectionProblem::unit(&l, 0, 1)).unwrap();
        assert!(rel_dev(r.value, 9.276302E+03) < 1e-5, "{}", r.value);
    }

    #[test]
    fn two_node_network() {
        let l = fixture("R1 a b 42");
        let r = solve_direct(&InjectionProblem::unit(&l, 0, 1)).unwrap();
        assert!(rel_dev(r.value, 42.0) < 1e-14);
    }

    #[test]
    fn disconnected_network_is_diagnosed() {
        let l = fixture(test_fixtures::DISCONNECTED_NET);
        let err = solve_direct(&InjectionProblem::unit(&l, 0, 2)).unwrap_err();
        match err {
            Error::SingularSystem(msg) => assert!(msg.contains("2 components"), "{msg}"),
            other => panic!("expected SingularSystem, got {other}"),
        }
    }

    #[test]
    fn ground_choice_is_irrelevant() {
        let l = fixture(test_fixtures::OPAMP_NET);
        let problem = InjectionProblem::unit(&l, 0, 1);
        let reference = solve_direct(&problem).unwrap().value;
        for ground in 2..l.n() {
            let r = solve_grounded(&problem, ground).unwrap();
            assert!(
                rel_dev(r.value, reference) < 1e-10,
                "ground {ground}: {} vs {reference}",
                r.value
            );
        }
    }

    #[test]
    fn probe_current_is_irrelevant() {
        let l = fixture(test_fixtures::EXAMPLE1_NET);
        let reference = solve_direct(&InjectionProblem::unit(&l, 1, 3)).unwrap().value;
        for current in [1e-3, 1e3] {
            let r = solve_direct(&InjectionProblem {
                laplacian: &l,
                alpha: 1,
                beta: 3,
                current,
            })
            .unwrap();
            assert!(rel_dev(r.value, reference) < 1e-13, "current {current}");
        }
    }

    #[test]
    fn solution_satisfies_kcl() {
        let l = fixture(test_fixtures::OPAMP_NET);
        let problem = InjectionProblem::unit(&l, 0, 4);
        let v = solve_potentials(&problem, 4).unwrap();
        let n = l.n();
        let mut injection = Array1::<f64>::zeros(n);
        injection[0] += 1.0;
        injection[4] -= 1.0;
        let residual = l.matrix().dot(&v) - &injection;
        let v_max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = n as f64 * f64::EPSILON * l.max_abs_entry() * v_max;
        for (i, r) in residual.iter().enumerate() {
            // the grounded row carries the return current, not a KCL balance
            if i == 4 {
                continue;
            }
            assert!(r.abs() <= tol, "node {i}: residual {r:e} (tol {tol:e})");
        }
    }

    #[test]
    fn compare_example2() {
        let l = fixture(test_fixtures::EXAMPLE2_NET);
        let s = eigendecompose(&l).unwrap();
        let report = compare(&s, &l).unwrap();
        assert_eq!(report.pairs, 6);
        assert!(report.max_rel_deviation <= 1e-12, "{report:?}");
    }

    #[test]
    fn compare_opamp() {
        let l = fixture(test_fixtures::OPAMP_NET);
        let s = eigendecompose(&l).unwrap();
        let report = compare(&s, &l).unwrap();
        assert!(report.max_rel_deviation <= 1e-9, "{report:?}");
        assert!(report.worst_pair.is_some());
    }

    #[test]
    fn compare_random_mesh() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let n = 20;
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let map = crate::netlist::NodeMap::new(names).unwrap();
        let mut l = Laplacian::zeros(map);
        for i in 1..n {
            let j = rng.gen_range(0..i);
            l.stamp_resistor(i, j, 1.0 / rng.gen_range(1.0..1000.0)).unwrap();
        }
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                l.stamp_resistor(i, j, 1.0 / rng.gen_range(1.0..1000.0)).unwrap();
            }
        }
        let s = eigendecompose(&l).unwrap();
        let report = compare(&s, &l).unwrap();
        assert!(report.max_rel_deviation <= 1e-10, "{report:?}");
    }
}
