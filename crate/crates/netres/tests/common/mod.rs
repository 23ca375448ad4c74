//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use rand::Rng;

use netres::laplacian::{build_laplacian, Laplacian};
use netres::netlist::{apply_merges, parse_netlist, Element, Netlist, NodeMap};
use netres::spectral::{eigendecompose, Spectrum};

pub const EXAMPLE1_NET: &str = include_str!("../fixtures/example1.net");
pub const EXAMPLE2_NET: &str = include_str!("../fixtures/example2.net");
pub const OPAMP_NET: &str = include_str!("../fixtures/opamp.net");
pub const DISCONNECTED_NET: &str = include_str!("../fixtures/disconnected.net");

pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Full ingestion pipeline: parse, merge, stamp.
pub fn laplacian_of(net: &str) -> (Laplacian, NodeMap) {
    let netlist = parse_netlist(net).expect("fixture parses");
    let (merged, map, _) = apply_merges(&netlist).expect("fixture merges");
    let (laplacian, report) = build_laplacian(&merged, &map).expect("fixture stamps");
    assert!(!report.is_hard_failure(), "fixture must be Kirchhoff-clean");
    (laplacian, map)
}

pub fn spectrum_of(net: &str) -> (Laplacian, Spectrum, NodeMap) {
    let (laplacian, map) = laplacian_of(net);
    let spectrum = eigendecompose(&laplacian).expect("fixture decomposes");
    (laplacian, spectrum, map)
}

/// Random connected resistor mesh with optional VCCS elements, expressed as
/// a netlist so generation exercises the same path as file ingestion.
pub fn random_network(rng: &mut impl Rng, n: usize, vccs_count: usize) -> Netlist {
    let node = |i: usize| format!("n{i}");
    let mut elements = Vec::new();
    // spanning tree keeps the mesh connected
    for i in 1..n {
        let j = rng.gen_range(0..i);
        elements.push(Element::Resistor {
            name: format!("Rt{i}"),
            nodes: [node(i), node(j)],
            resistance_ohms: rng.gen_range(1.0..1000.0),
        });
    }
    for e in 0..n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            elements.push(Element::Resistor {
                name: format!("Rx{e}"),
                nodes: [node(i), node(j)],
                resistance_ohms: rng.gen_range(1.0..1000.0),
            });
        }
    }
    for v in 0..vccs_count {
        let pick = |rng: &mut dyn rand::RngCore| -> (usize, usize) {
            loop {
                let a = (rng.next_u32() as usize) % n;
                let b = (rng.next_u32() as usize) % n;
                if a != b {
                    return (a, b);
                }
            }
        };
        let (k, kp) = pick(rng);
        let (j, jp) = pick(rng);
        elements.push(Element::Vccs {
            name: format!("Gv{v}"),
            nodes: [node(k), node(kp), node(j), node(jp)],
            transconductance_siemens: rng.gen_range(-0.05..0.05),
        });
    }
    Netlist {
        title: None,
        elements,
        merges: Vec::new(),
        order: None,
    }
}

/// Builds and decomposes a random network, rejecting spectrally degenerate
/// draws (failed decomposition, ill-conditioned eigenvectors, or a nonzero
/// eigenvalue collapsing onto the zero band).
pub fn accepted_random_spectrum(
    rng: &mut impl Rng,
    n: usize,
    vccs_count: usize,
) -> Option<(Laplacian, Spectrum, NodeMap)> {
    let netlist = random_network(rng, n, vccs_count);
    let (merged, map, _) = apply_merges(&netlist).ok()?;
    let (laplacian, report) = build_laplacian(&merged, &map).ok()?;
    if report.is_hard_failure() {
        return None;
    }
    let spectrum = eigendecompose(&laplacian).ok()?;
    if spectrum.cond_right() > 1e8 {
        return None;
    }
    let max_abs = spectrum
        .eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    if spectrum.min_nonzero_abs() < 1e-8 * max_abs {
        return None;
    }
    Some((laplacian, spectrum, map))
}
