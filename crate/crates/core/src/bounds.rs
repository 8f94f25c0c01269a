//! Separability thresholds: closed forms and PPT optimizations.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::sdp::{self, EntryMap, Relation, SdpProblem, SdpSolution, SolveOptions};
use crate::witness::{self, ClickStats, Normalization, Variant, WitnessSpec};

/// Which cut a bound refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartition {
    /// The listed modes against the rest.
    Subset(Vec<usize>),
    /// Maximum over every bipartition.
    Genuine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    AnalyticW,
    AnalyticCounts,
    SdpQubit,
    SdpQudit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub bipartition: Bipartition,
    pub method: Method,
    pub alpha: f64,
    /// False when `alpha` lies outside the regime where the closed form holds.
    pub valid: bool,
    pub normalization: Normalization,
    /// Value per bipartition, for bounds computed as a maximum.
    pub per_bipartition: Vec<(Vec<usize>, f64)>,
}

/// Smallest displacement for which the two-mode closed form holds.
pub const BIPARTITE_ALPHA_MIN: f64 = 0.45;
/// Smallest displacement for which the three-mode closed form holds.
pub const TRIPARTITE_ALPHA_MIN: f64 = 0.67;

/// `witness - bound`, refusing to mix normalizations.
pub fn margin(witness_value: f64, witness_normalization: Normalization, bound: &BoundResult) -> Result<f64> {
    if witness_normalization != bound.normalization {
        return Err(Error::Normalization(format!(
            "witness in {witness_normalization:?} normalization, bound in {:?}",
            bound.normalization
        )));
    }
    Ok(witness_value - bound.value)
}

/// `z_W - z_ppt,m = 2^{N+3} m(N-m)/N |α|² e^{-2|α|²}` (general-N normalization).
pub fn margin_w_analytic(n_modes: usize, m: usize, alpha: f64) -> Result<f64> {
    if n_modes < 2 || m == 0 || m >= n_modes {
        return Err(Error::InvalidArgument(format!("bipartition size {m} invalid for {n_modes} modes")));
    }
    let n = n_modes as f64;
    let m = m as f64;
    let x = alpha * alpha;
    Ok(2f64.powi(n_modes as i32 + 3) * m * (n - m) / n * x * (-2.0 * x).exp())
}

/// Genuine margin: the minimum over bipartition sizes, reached at `m = 1`.
pub fn genuine_margin_w_analytic(n_modes: usize, alpha: f64) -> Result<f64> {
    margin_w_analytic(n_modes, 1, alpha)
}

fn check_stats(stats: &ClickStats, n: usize) -> Result<()> {
    if stats.n_modes() != n {
        return Err(Error::InvalidData(format!("expected {n}-mode statistics, got {}", stats.n_modes())));
    }
    Ok(())
}

/// Closed-form two-mode PPT bound from undisplaced clicks and coincidence bounds.
pub fn bipartite_bound_from_counts(stats: &ClickStats, alpha: f64) -> Result<BoundResult> {
    check_stats(stats, 2)?;
    let t = stats.undisplaced();
    let (p00, p0c, pc0, pcc) = (t.get("00")?, t.get("0c")?, t.get("c0")?, t.get("cc")?);
    let (c1, c2) = (stats.pc()[0], stats.pc()[1]);
    let x = alpha * alpha;
    let e = (-x).exp();
    let s = f64::sqrt;
    let value = (2.0 * (-1.0 + 2.0 * e).powi(2) - 1.0) * p00
        + (2.0 * (-1.0 + 2.0 * e) * (-1.0 + 2.0 * e * x) + 1.0) * (p0c + pc0)
        + 2.0 * (2.0 * (-1.0 + e * x * x).powi(2) - 1.0) * c1
        + 2.0 * (2.0 * (-1.0 + 2.0 * e) * (-1.0 + e * x * x) + 4.0) * (c1 + c2)
        + 16.0 * x * (-2.0 * x).exp()
            * (s(c1 * c2) * x * x + s(p00 * pcc) + (s(c2 * pcc) + s(c1 * pcc) + s(c1 * c2)) * x);
    Ok(BoundResult {
        value,
        bipartition: Bipartition::Subset(vec![0]),
        method: Method::AnalyticCounts,
        alpha,
        valid: alpha >= BIPARTITE_ALPHA_MIN,
        normalization: Normalization::Bipartite,
        per_bipartition: vec![(vec![0], value)],
    })
}

/// Closed-form three-mode genuine-entanglement bound.
pub fn tripartite_bound_from_counts(stats: &ClickStats, alpha: f64) -> Result<BoundResult> {
    check_stats(stats, 3)?;
    let t = stats.undisplaced();
    let p = |k: &str| t.get(k);
    let (p000, p00c, p0c0, pc00) = (p("000")?, p("00c")?, p("0c0")?, p("c00")?);
    let (p0cc, pc0c, pcc0) = (p("0cc")?, p("c0c")?, p("cc0")?);
    let (c1, c2, c3) = (stats.pc()[0], stats.pc()[1], stats.pc()[2]);
    let x = alpha * alpha;
    let e = (-x).exp();
    let s = f64::sqrt;
    let sum_pc = c1 + c2 + c3;

    let mut value = (-3.0 + 24.0 * (-1.0 + 2.0 * e).powi(2)) * p000
        + (5.0 + 16.0 * (-1.0 + 2.0 * e) * (-1.0 + 2.0 * e * x)) * (p00c + p0c0 + pc00)
        + 4.0 * (1.0 + 4.0 * (-1.0 + e * x * x) * (-3.0 + 4.0 * e + e * x * x)) * sum_pc;
    let coherences = x
        * (s(c3 * p0cc) + s(c3 * pc0c) + s(c2 * p0cc) + s(c2 * pcc0) + s(c1 * pc0c) + s(c1 * pcc0))
        + x * (1.0 + x) * (s(c3 * c2) + s(c3 * c1) + s(c2 * c1))
        + [
            s(p0c0 * p00c) + s(p000 * pc0c) + s(p000 * pcc0),
            s(pc00 * p00c) + s(p000 * p0cc) + s(p000 * pcc0),
            s(p0c0 * pc00) + s(p000 * pc0c) + s(p000 * p0cc),
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    value += 64.0 * x * (-2.0 * x).exp() * coherences;
    let overlap = [0.0, 2.0 * (c1 + c2) - 1.0, 2.0 * (c1 + c3) - 1.0, 2.0 * (c2 + c3) - 1.0]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    value += 33.0 * (2.0 * sum_pc - overlap);

    Ok(BoundResult {
        value,
        bipartition: Bipartition::Genuine,
        method: Method::AnalyticCounts,
        alpha,
        valid: alpha >= TRIPARTITE_ALPHA_MIN,
        normalization: Normalization::GeneralN,
        per_bipartition: Vec::new(),
    })
}

/// Extra knowledge about the state fed into the qubit-subspace optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitConstraints {
    /// Only physicality, unit trace and PPT.
    None,
    /// The photon-number populations of `W_N`: one photon in total, shared evenly.
    WStatistics,
}

/// Representatives of the inequivalent cuts `{0..m} | rest`, `m = 1..=N/2`.
pub fn bipartition_representatives(n_modes: usize) -> Vec<Vec<usize>> {
    (1..=n_modes / 2).map(|m| (0..m).collect()).collect()
}

/// Every cut once: subsets containing mode 0, excluding the full set.
pub fn all_bipartitions(n_modes: usize) -> Vec<Vec<usize>> {
    (0..(1usize << (n_modes - 1)) - 1)
        .map(|bits| {
            let mut s = vec![0];
            s.extend((1..n_modes).filter(|i| bits >> (i - 1) & 1 == 1));
            s
        })
        .collect()
}

fn check_subset(n_modes: usize, subset: &[usize]) -> Result<()> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.is_empty() || s.len() >= n_modes || s.iter().any(|&m| m >= n_modes) {
        return Err(Error::InvalidArgument(format!("{subset:?} is not a proper bipartition of {n_modes} modes")));
    }
    Ok(())
}

fn converged(sol: SdpSolution) -> Result<SdpSolution> {
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::NotConverged(Box::new(sol)))
    }
}

/// The qubit-subspace optimization problem for one cut.
pub fn qubit_ppt_problem(
    n_modes: usize,
    alpha: f64,
    subset: &[usize],
    constraints: QubitConstraints,
) -> Result<SdpProblem> {
    check_subset(n_modes, subset)?;
    let dims = vec![2; n_modes];
    let space = FockSpace::new(dims.clone())?;
    let z = witness::build_witness(&WitnessSpec::general(n_modes, alpha)?, &dims)?;
    let d = space.total_dim();

    let mut p = SdpProblem::new();
    let rho = p.add_variable("rho", d);
    p.set_objective(rho, z.into_matrix())?;
    p.add_psd(rho)?;
    p.add_trace(rho, Relation::Eq, 1.0)?;
    p.add_psd_map(rho, EntryMap::partial_transpose(&dims, subset)?)?;
    if constraints == QubitConstraints::WStatistics {
        let single = 1.0 / n_modes as f64;
        for i in 0..d {
            let target = if space.total_number(i) == 1 { single } else { 0.0 };
            p.add_diagonal(rho, i, Relation::Eq, target)?;
        }
        // Coherences across the cut vanish: |ρ_{1_i,1_j}|² ≤ p_{0..0} p_{1_i 1_j} = 0.
        for i in 0..n_modes {
            for j in 0..n_modes {
                if subset.contains(&i) && !subset.contains(&j) {
                    let mut oi = vec![0; n_modes];
                    oi[i] = 1;
                    let mut oj = vec![0; n_modes];
                    oj[j] = 1;
                    p.add_entry_bound(rho, space.index(&oi), space.index(&oj), 0.0)?;
                }
            }
        }
    }
    Ok(p)
}

/// Maximum of the dephased general-N witness over PPT states with at most one
/// photon per mode.
pub fn qubit_ppt_bound_sdp(
    n_modes: usize,
    alpha: f64,
    bipartition: &Bipartition,
    constraints: QubitConstraints,
    options: &SolveOptions,
) -> Result<BoundResult> {
    if !(2..=6).contains(&n_modes) {
        return Err(Error::InvalidArgument(format!("qubit optimization supports 2..=6 modes, got {n_modes}")));
    }
    let subsets = match bipartition {
        Bipartition::Subset(s) => vec![s.clone()],
        Bipartition::Genuine => bipartition_representatives(n_modes),
    };
    let per: Vec<(Vec<usize>, f64)> = subsets
        .into_par_iter()
        .map(|s| {
            let problem = qubit_ppt_problem(n_modes, alpha, &s, constraints)?;
            let sol = converged(sdp::solve(&problem, options)?)?;
            Ok((s, sol.optimum))
        })
        .collect::<Result<_>>()?;
    let value = per.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundResult {
        value,
        bipartition: bipartition.clone(),
        method: Method::SdpQubit,
        alpha,
        valid: true,
        normalization: Normalization::GeneralN,
        per_bipartition: per,
    })
}

/// Witness variant whose normalization the qudit bound uses for `n` modes.
pub fn qudit_witness_spec(n_modes: usize, alpha: f64) -> Result<WitnessSpec> {
    match n_modes {
        2 => WitnessSpec::new(2, alpha, Variant::Bipartite),
        3 => WitnessSpec::new(3, alpha, Variant::Tripartite),
        n => WitnessSpec::general(n, alpha),
    }
}

/// The qudit optimization (up to two photons per mode) for one cut, without
/// the outside-sector offset.
pub fn qudit_ppt_problem(stats: &ClickStats, alpha: f64, subset: &[usize]) -> Result<SdpProblem> {
    let n = stats.n_modes();
    check_subset(n, subset)?;
    let spec = qudit_witness_spec(n, alpha)?;
    let dims = vec![3; n];
    let space = FockSpace::new(dims.clone())?;
    let d = space.total_dim();
    let z = witness::build_witness(&spec, &dims)?;
    let pc = stats.pc();
    let table = stats.undisplaced();

    let mut p = SdpProblem::new();
    let rho = p.add_variable("rho", d);
    p.set_objective(rho, z.into_matrix())?;
    p.add_psd(rho)?;
    p.add_trace(rho, Relation::Le, 1.0)?;

    let qubit: Vec<usize> = (0..d).filter(|&i| space.occupations(i).iter().all(|&k| k <= 1)).collect();
    let mut a = crate::linalg::CMatrix::zeros(d, d);
    for &i in &qubit {
        a[(i, i)] = crate::linalg::ONE;
    }
    let outside = (2.0 * pc.iter().sum::<f64>()).min(1.0);
    p.add_linear(vec![(rho, a)], Relation::Ge, 1.0 - outside)?;
    p.add_psd_map(rho, EntryMap::principal_partial_transpose(&qubit, &vec![2; n], subset)?)?;

    for i in 0..d {
        let occ = space.occupations(i);
        let doubles: Vec<usize> = (0..n).filter(|&m| occ[m] == 2).collect();
        if doubles.is_empty() {
            let mask = (0..n).filter(|&m| occ[m] == 1).fold(0, |acc, m| acc | 1 << m);
            let rel = if mask == 0 { Relation::Eq } else { Relation::Le };
            p.add_diagonal(rho, i, rel, table.prob(mask))?;
        } else {
            let cap = doubles.iter().map(|&m| 2.0 * pc[m]).fold(f64::INFINITY, f64::min);
            p.add_diagonal(rho, i, Relation::Le, cap)?;
        }
    }
    Ok(p)
}

/// PPT bound without assuming at most one photon per mode: the qudit
/// optimization plus `2 z_alg Σ p_c` for the population beyond two photons.
pub fn qudit_ppt_bound_sdp(stats: &ClickStats, alpha: f64, options: &SolveOptions) -> Result<BoundResult> {
    let n = stats.n_modes();
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidArgument(format!("qudit optimization supports 2 or 3 modes, got {n}")));
    }
    let spec = qudit_witness_spec(n, alpha)?;
    let offset = 2.0 * spec.z_alg() * stats.pc().iter().sum::<f64>();
    let per: Vec<(Vec<usize>, f64)> = bipartition_representatives(n)
        .into_par_iter()
        .map(|s| {
            let problem = qudit_ppt_problem(stats, alpha, &s)?;
            let sol = converged(sdp::solve(&problem, options)?)?;
            Ok((s, sol.optimum + offset))
        })
        .collect::<Result<_>>()?;
    let value = per.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundResult {
        value,
        bipartition: Bipartition::Genuine,
        method: Method::SdpQudit,
        alpha,
        valid: true,
        normalization: spec.normalization(),
        per_bipartition: per,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceBound {
    /// `Σ_{n≥2} n/2ⁿ (2^{n-1} - 1) p_n`, reported as computed.
    pub pc: f64,
    /// `2 p_c`, an upper bound on the probability of two or more photons.
    pub multi_photon_bound: f64,
    /// Set when the raw value exceeds one and cannot be a probability.
    pub exceeds_one: bool,
}

/// Two-fold-coincidence figure of a single-mode photon-number distribution.
pub fn pc_from_photon_statistics(p_n: &[f64]) -> Result<CoincidenceBound> {
    if let Some(p) = p_n.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidData(format!("photon-number probability {p} is negative or not finite")));
    }
    let pc: f64 = p_n
        .iter()
        .enumerate()
        .skip(2)
        .map(|(n, p)| n as f64 / 2f64.powi(n as i32) * (2f64.powi(n as i32 - 1) - 1.0) * p)
        .sum();
    Ok(CoincidenceBound { pc, multi_photon_bound: 2.0 * pc, exceeds_one: pc > 1.0 })
}
