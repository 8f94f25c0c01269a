#![allow(dead_code)]

use num_complex::Complex64;
use pathwit::bounds::{self, QubitConstraints};
use pathwit::fock::{self, DensityMatrix, FockSpace, MultiModeOperator};
use pathwit::linalg::{self, CMatrix};
use pathwit::sdp::{self, EntryMap, Relation, SdpProblem, SolveOptions};
use pathwit::source::{self, SourceParams};
use pathwit::witness::{self, Variant, WitnessSpec};

/// Density matrix `G G† / Tr` from a flat list of real and imaginary parts.
pub fn random_state(dims: &[usize], entries: &[f64]) -> DensityMatrix {
    let space = FockSpace::new(dims.to_vec()).unwrap();
    let d = space.total_dim();
    let g = CMatrix::from_fn(d, d, |r, c| {
        let k = 2 * (r * d + c);
        Complex64::new(entries[k % entries.len()], entries[(k + 1) % entries.len()])
    });
    let m = &g * g.adjoint();
    let t = m.trace().re;
    DensityMatrix::new(space, m / Complex64::from(t)).unwrap()
}

pub fn random_hermitian(dims: &[usize], entries: &[f64]) -> MultiModeOperator {
    let space = FockSpace::new(dims.to_vec()).unwrap();
    let d = space.total_dim();
    let g = CMatrix::from_fn(d, d, |r, c| {
        let k = 2 * (r * d + c);
        Complex64::new(entries[k % entries.len()], entries[(k + 1) % entries.len()])
    });
    MultiModeOperator::new(space, (&g + g.adjoint()) * Complex64::from(0.5)).unwrap()
}

/// `max|PT(PT(ρ)) - ρ|` together with the Hermitian deviation of `PT(ρ)`.
pub fn pt_involution(rho: &DensityMatrix, subset: &[usize]) -> (f64, f64) {
    let once = fock::partial_transpose(rho, subset).unwrap();
    let twice = once.partial_transpose(subset).unwrap();
    (
        linalg::max_abs_diff(twice.matrix(), rho.matrix()),
        linalg::hermitian_deviation(once.matrix()),
    )
}

/// `max|Φ(Φ(X)) - Φ(X)|` for total-number dephasing `Φ`.
pub fn dephasing_idempotence(op: &MultiModeOperator) -> f64 {
    let once = fock::dephase_total_number(op);
    let twice = fock::dephase_total_number(&once);
    linalg::max_abs_diff(once.matrix(), twice.matrix())
}

/// `max|Φ(Z) - Z|` for the witness operator.
pub fn witness_dephasing_invariance(n: usize, alpha: f64, dim: usize) -> f64 {
    let spec = WitnessSpec::general(n, alpha).unwrap();
    let z = witness::build_witness(&spec, &vec![dim; n]).unwrap();
    linalg::max_abs_diff(fock::dephase_total_number(&z).matrix(), z.matrix())
}

/// Optima of the two-mode qubit problem with growing constraint sets:
/// state only, plus PPT, plus W statistics.
pub fn nested_optima(alpha: f64) -> [f64; 3] {
    let opts = SolveOptions::default();
    let dims = [2, 2];
    let z = witness::build_witness(&WitnessSpec::general(2, alpha).unwrap(), &dims).unwrap();
    let mut p = SdpProblem::new();
    let rho = p.add_variable("rho", 4);
    p.set_objective(rho, z.into_matrix()).unwrap();
    p.add_psd(rho).unwrap();
    p.add_trace(rho, Relation::Eq, 1.0).unwrap();
    let state_only = sdp::solve(&p, &opts).unwrap();
    p.add_psd_map(rho, EntryMap::partial_transpose(&dims, &[0]).unwrap()).unwrap();
    let ppt = sdp::solve(&p, &opts).unwrap();
    let w = bounds::qubit_ppt_problem(2, alpha, &[0], QubitConstraints::WStatistics).unwrap();
    let w = sdp::solve(&w, &opts).unwrap();
    assert!(state_only.converged && ppt.converged && w.converged);
    [state_only.optimum, ppt.optimum, w.optimum]
}

/// Objective of a feasible point and the reported optimum, for the two-mode
/// W-statistics problem (incoherent W populations) and the plain PPT problem
/// (a product state built from two Bloch vectors).
pub fn feasible_points_below_optimum(alpha: f64, bloch: [f64; 6]) -> Vec<(f64, f64, f64)> {
    let opts = SolveOptions::default();
    let mut out = Vec::new();

    let w = bounds::qubit_ppt_problem(2, alpha, &[0], QubitConstraints::WStatistics).unwrap();
    let x = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from(0.0),
        Complex64::from(0.5),
        Complex64::from(0.5),
        Complex64::from(0.0),
    ]));
    let report = sdp::verify(&w, std::slice::from_ref(&x)).unwrap();
    out.push((report.objective, sdp::solve(&w, &opts).unwrap().optimum, report.max_residual()));

    let q = |v: &[f64]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1.0);
        let (x, y, z) = (v[0] / n, v[1] / n, v[2] / n);
        CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from((1.0 + z) / 2.0),
                Complex64::new(x / 2.0, -y / 2.0),
                Complex64::new(x / 2.0, y / 2.0),
                Complex64::from((1.0 - z) / 2.0),
            ],
        )
    };
    let product = q(&bloch[3..]).kronecker(&q(&bloch[..3]));
    let p = bounds::qubit_ppt_problem(2, alpha, &[0], QubitConstraints::None).unwrap();
    let report = sdp::verify(&p, std::slice::from_ref(&product)).unwrap();
    out.push((report.objective, sdp::solve(&p, &opts).unwrap().optimum, report.max_residual()));
    out
}

/// Qudit SDP bound and the closed-form bound for model two-path statistics.
pub fn qudit_vs_analytic(params: &SourceParams, pc: f64) -> pathwit::Result<(f64, f64)> {
    let stats = source::model_click_stats(params, Some([pc, pc]))?;
    let sdp = bounds::qudit_ppt_bound_sdp(&stats, params.alpha, &SolveOptions::default())?;
    let analytic = bounds::bipartite_bound_from_counts(&stats, params.alpha)?;
    Ok((sdp.value, analytic.value))
}

/// Two-path witness and closed-form bound for a separable product input
/// `ρ_a ⊗ ρ_b` with a random common phase, coincidence bounds taken from the
/// exact photon statistics.
pub fn separable_margin(a: &DensityMatrix, b: &DensityMatrix, alpha: f64) -> f64 {
    let rho = a.product(b).unwrap().phase_averaged();
    let pc = source::state_coincidences(&rho, 0.0).unwrap();
    let stats = source::fock_click_stats(&rho, alpha, 0.0, pc).unwrap();
    let spec = WitnessSpec::new(2, alpha, Variant::Bipartite).unwrap();
    let z = witness::witness_from_counts(&stats, &spec).unwrap();
    z - bounds::bipartite_bound_from_counts(&stats, alpha).unwrap().value
}

pub fn coherent(beta: Complex64, dim: usize) -> DensityMatrix {
    let amps = fock::coherent_amplitudes(beta, dim);
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let amps: Vec<Complex64> = amps.iter().map(|a| a / norm.sqrt()).collect();
    DensityMatrix::from_pure(FockSpace::new(vec![dim]).unwrap(), &amps).unwrap()
}

/// Thermal input split on a beam splitter: separable, classically correlated.
pub fn split_thermal_margin(nbar: f64, t: f64, alpha: f64) -> f64 {
    let dim = 16;
    let th = fock::thermal_state(nbar, dim).unwrap();
    let rho = source::split_state(&th, &[1.0 - t, t], 1.0).unwrap();
    let pc = source::state_coincidences(&rho, 0.0).unwrap();
    let stats = source::fock_click_stats(&rho, alpha, 0.0, pc).unwrap();
    let spec = WitnessSpec::new(2, alpha, Variant::Bipartite).unwrap();
    let z = witness::witness_from_counts(&stats, &spec).unwrap();
    z - bounds::bipartite_bound_from_counts(&stats, alpha).unwrap().value
}
