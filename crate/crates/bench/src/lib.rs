//! Fixed parameter points shared by the benchmarks.

use qd_emission::{FrequencyGrid, PhysicalParams};

/// Fig-1 bath at the given Rabi frequency, driven on the polaron-shifted
/// resonance.
pub fn resonant_point(omega: f64) -> (PhysicalParams, FrequencyGrid) {
    let params = PhysicalParams::new(0.0, omega, 0.027, 2.2, 4.0, 1.0 / 700.0)
        .expect("benchmark parameters are valid");
    let grid = FrequencyGrid::reference(params.omega_c).expect("reference grid");
    let nu = qd_emission::variational::resonant_nu(&params, &grid).expect("polaron shift");
    (params.with_nu(nu), grid)
}
