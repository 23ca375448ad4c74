//! Shared fixtures for unit tests: the three reference networks and their
//! reference matrices.

pub const EXAMPLE1_NET: &str = include_str!("../tests/fixtures/example1.net");
pub const EXAMPLE2_NET: &str = include_str!("../tests/fixtures/example2.net");
pub const OPAMP_NET: &str = include_str!("../tests/fixtures/opamp.net");
pub const DISCONNECTED_NET: &str = include_str!("../tests/fixtures/disconnected.net");

/// Op-amp nodal conductance matrix reference, 4 significant digits,
/// node order n1, n2, n3, n4, gnd.
pub const OPAMP_L_REFERENCE: [[f64; 5]; 5] = [
    [5.414E-04, 0.0, 0.0, 0.0, -5.414E-04],
    [4.196E-03, 6.673E-03, -2.816E-03, -2.816E-03, -5.236E-03],
    [0.0, -3.332E-03, 3.415E-03, 0.0, -8.329E-05],
    [0.0, -3.332E-03, 5.954E-04, 2.820E-03, -8.329E-05],
    [-4.737E-03, -9.344E-06, -1.194E-03, -3.404E-06, 5.944E-03],
];

/// Op-amp nonzero eigenvalues, ascending.
pub const OPAMP_EIGENVALUES: [f64; 4] = [1.617872E-04, 2.819672E-03, 8.008586E-03, 8.402968E-03];

/// Op-amp upper-triangle resistances, row-major (alpha < beta).
pub const OPAMP_RESISTANCES: [(usize, usize, f64); 10] = [
    (0, 1, 9.276302E+03),
    (0, 2, 9.098426E+03),
    (0, 3, 9.448754E+03),
    (0, 4, 1.847062E+03),
    (1, 2, 3.000575E+02),
    (1, 3, 3.546762E+02),
    (1, 4, 8.490922E+02),
    (2, 3, 7.093024E+02),
    (2, 4, 8.317060E+02),
    (3, 4, 1.182034E+03),
];

/// Example 2 upper-triangle resistances: exact rationals.
pub const EXAMPLE2_RESISTANCES: [(usize, usize, f64); 6] = [
    (0, 1, 0.5),
    (0, 2, 7.0 / 12.0),
    (0, 3, 1.0 / 3.0),
    (1, 2, 0.5),
    (1, 3, 5.0 / 12.0),
    (2, 3, 1.0 / 3.0),
];
