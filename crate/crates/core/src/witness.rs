//! Displaced on/off observables, witness operators and click statistics.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockSpace, MultiModeOperator};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::tol;

/// Displacement and detector settings for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub alpha: Complex64,
    pub eta: f64,
    /// Probability that the detector clicks with no light.
    pub dark_count: f64,
}

impl MeasurementSetting {
    pub fn new(alpha: Complex64, eta: f64) -> Result<Self> {
        Self::with_dark_count(alpha, eta, 0.0)
    }

    pub fn with_dark_count(alpha: Complex64, eta: f64, dark_count: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("detector efficiency {eta} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&dark_count) {
            return Err(Error::InvalidParameter(format!("dark-count probability {dark_count} outside [0, 1]")));
        }
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(Error::InvalidParameter("displacement must be finite".into()));
        }
        Ok(Self { alpha, eta, dark_count })
    }

    /// Unit-efficiency, noiseless detector after a real displacement.
    pub fn ideal(alpha: f64) -> Self {
        Self { alpha: Complex64::new(alpha, 0.0), eta: 1.0, dark_count: 0.0 }
    }
}

/// `+1` on no click, `-1` on click: `D†(α)(2(1-d)(1-η)^{a†a} - 1)D(α)`.
///
/// The returned matrix is the exact observable restricted to the first
/// `dim` Fock levels, obtained by building it on a padded space first.
pub fn sigma_observable(setting: &MeasurementSetting, dim: usize) -> Result<MultiModeOperator> {
    let s = MeasurementSetting::with_dark_count(setting.alpha, setting.eta, setting.dark_count)?;
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim {dim} < 2")));
    }
    let pad = 40 + (8.0 * s.alpha.norm_sqr()).ceil() as usize;
    let big = dim + pad;
    let no_click = 1.0 - s.dark_count;
    let diag: Vec<f64> = (0..big)
        .map(|n| 2.0 * no_click * (1.0 - s.eta).powi(n as i32) - 1.0)
        .collect();
    let m = MultiModeOperator::from_diagonal(FockSpace::new(vec![big])?, &diag)?;
    let d = fock::displacement_operator(s.alpha, big)?;
    let full = d.adjoint().compose(&m)?.compose(&d)?;
    let block = full.compress(&[dim])?;
    MultiModeOperator::new(block.space().clone(), linalg::hermitize(block.matrix()))
}

/// No-click effect `(1 + S)/2` of a setting.
pub fn no_click_effect(setting: &MeasurementSetting, dim: usize) -> Result<MultiModeOperator> {
    let s = sigma_observable(setting, dim)?;
    let id = CMatrix::identity(dim, dim);
    MultiModeOperator::new(s.space().clone(), (s.matrix() + id).scale(0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Identity,
    Sigma0,
    SigmaAlpha,
}

/// `coeff * ⊗_i factor_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub factors: Vec<Factor>,
}

impl Term {
    /// Modes carrying the displaced observable.
    pub fn displaced_modes(&self) -> Vec<usize> {
        self.modes_with(Factor::SigmaAlpha)
    }

    /// Modes carrying any non-identity factor.
    pub fn measured_modes(&self) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| self.factors[i] != Factor::Identity).collect()
    }

    fn modes_with(&self, f: Factor) -> Vec<usize> {
        (0..self.factors.len()).filter(|&i| self.factors[i] == f).collect()
    }
}

/// All distinct orderings of `pattern` (multiset permutations), each with `coeff`.
pub fn expand_sym(pattern: &[Factor], coeff: f64) -> Vec<Term> {
    let mut p = pattern.to_vec();
    p.sort();
    let mut out = vec![Term { coeff, factors: p.clone() }];
    while next_permutation(&mut p) {
        out.push(Term { coeff, factors: p.clone() });
    }
    out
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `Σ_m (N-2m) S0^m 1^{N-m} + 4 Σ_m S0^m 1^{N-2-m} Sα Sα`, symmetrized.
    GeneralN,
    /// `2 Sα Sα - S0 S0`, half of the general form at N = 2.
    Bipartite,
    /// The three-mode witness written out term by term.
    Tripartite,
}

/// Scale convention of a witness value; bounds carry the same tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    GeneralN,
    Bipartite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessSpec {
    pub n_modes: usize,
    pub alpha: f64,
    pub variant: Variant,
}

impl WitnessSpec {
    pub fn new(n_modes: usize, alpha: f64, variant: Variant) -> Result<Self> {
        if n_modes < 2 {
            return Err(Error::InvalidArgument(format!("a witness needs at least 2 modes, got {n_modes}")));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::InvalidParameter(format!("alpha {alpha} must be finite and >= 0")));
        }
        match variant {
            Variant::Bipartite if n_modes != 2 => {
                return Err(Error::InvalidArgument("the bipartite witness needs exactly 2 modes".into()))
            }
            Variant::Tripartite if n_modes != 3 => {
                return Err(Error::InvalidArgument("the tripartite witness needs exactly 3 modes".into()))
            }
            _ => {}
        }
        Ok(Self { n_modes, alpha, variant })
    }

    pub fn general(n_modes: usize, alpha: f64) -> Result<Self> {
        Self::new(n_modes, alpha, Variant::GeneralN)
    }

    pub fn normalization(&self) -> Normalization {
        match self.variant {
            Variant::Bipartite => Normalization::Bipartite,
            Variant::GeneralN | Variant::Tripartite => Normalization::GeneralN,
        }
    }

    pub fn terms(&self) -> Vec<Term> {
        use Factor::{Identity as I, Sigma0 as S0, SigmaAlpha as SA};
        let n = self.n_modes;
        let mut terms = Vec::new();
        match self.variant {
            Variant::GeneralN => {
                for m in 1..=n {
                    let mut p = vec![S0; m];
                    p.resize(n, I);
                    terms.extend(expand_sym(&p, n as f64 - 2.0 * m as f64));
                }
                for m in 0..=n - 2 {
                    let mut p = vec![S0; m];
                    p.resize(n - 2, I);
                    p.extend([SA, SA]);
                    terms.extend(expand_sym(&p, 4.0));
                }
            }
            Variant::Bipartite => {
                terms.push(Term { coeff: 2.0, factors: vec![SA, SA] });
                terms.push(Term { coeff: -1.0, factors: vec![S0, S0] });
            }
            Variant::Tripartite => {
                for (pattern, coeff) in [
                    ([S0, I, I], 1.0),
                    ([S0, I, S0], -1.0),
                    ([S0, S0, S0], -3.0),
                    ([I, SA, SA], 4.0),
                    ([S0, SA, SA], 4.0),
                ] {
                    terms.extend(expand_sym(&pattern, coeff));
                }
            }
        }
        terms.retain(|t| t.coeff != 0.0);
        terms
    }

    /// Algebraic maximum `Σ |coeff|`: every factor has spectrum in `[-1, 1]`.
    pub fn z_alg(&self) -> f64 {
        self.terms().iter().map(|t| t.coeff.abs()).sum()
    }
}

/// Dephased witness operator at unit detector efficiency.
pub fn build_witness(spec: &WitnessSpec, dims: &[usize]) -> Result<MultiModeOperator> {
    if dims.len() != spec.n_modes {
        return Err(Error::InvalidArgument(format!(
            "{} dims for a {}-mode witness",
            dims.len(),
            spec.n_modes
        )));
    }
    let space = FockSpace::new(dims.to_vec())?;
    let mut cache: BTreeMap<(Factor, usize), MultiModeOperator> = BTreeMap::new();
    for &d in dims {
        cache.insert((Factor::Identity, d), MultiModeOperator::identity(FockSpace::new(vec![d])?));
        cache.insert((Factor::Sigma0, d), sigma_observable(&MeasurementSetting::ideal(0.0), d)?);
        cache.insert((Factor::SigmaAlpha, d), sigma_observable(&MeasurementSetting::ideal(spec.alpha), d)?);
    }
    let total = space.total_dim();
    let mut acc = CMatrix::zeros(total, total);
    for term in spec.terms() {
        let ops: Vec<MultiModeOperator> =
            term.factors.iter().zip(dims).map(|(f, &d)| cache[&(*f, d)].clone()).collect();
        acc += fock::tensor(&ops)?.matrix().scale(term.coeff);
    }
    let op = MultiModeOperator::new(space, linalg::hermitize(&acc))?;
    Ok(fock::dephase_total_number(&op))
}

/// Largest eigenvalue of the dephased witness on the given truncation.
pub fn spectral_max(spec: &WitnessSpec, dims: &[usize]) -> Result<f64> {
    Ok(linalg::max_eigenvalue(build_witness(spec, dims)?.matrix()))
}

/// `(1/√N) Σ_i |0…1_i…0>`.
pub fn w_state(n_modes: usize, dims: &[usize]) -> Result<DensityMatrix> {
    if n_modes < 2 {
        return Err(Error::InvalidArgument(format!("W state needs at least 2 modes, got {n_modes}")));
    }
    if dims.len() != n_modes {
        return Err(Error::InvalidArgument(format!("{} dims for {n_modes} modes", dims.len())));
    }
    let space = FockSpace::new(dims.to_vec())?;
    let amp = ONE / (n_modes as f64).sqrt();
    let mut amps = vec![ZERO; space.total_dim()];
    for i in 0..n_modes {
        let mut occ = vec![0; n_modes];
        occ[i] = 1;
        amps[space.index(&occ)] = amp;
    }
    DensityMatrix::from_pure(space, &amps)
}

/// Closed-form witness value on `W_N` in the general-N normalization.
pub fn z_w_analytic(n_modes: usize, alpha: f64) -> f64 {
    let n = n_modes as f64;
    let x = alpha * alpha;
    let e = (-x).exp();
    (2f64.powi(n_modes as i32) - 1.0) * n
        + 2f64.powi(n_modes as i32 + 1) * (n - 1.0) * e * (x * (4.0 * e - 1.0) - 1.0)
}

/// Joint click/no-click probabilities for one measurement configuration.
///
/// Outcomes are bitmasks: bit `i` set means mode `i` clicked. As strings,
/// character `i` describes mode `i`, `'0'` for no click and `'c'` for a click.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickTable {
    n_modes: usize,
    probs: Vec<f64>,
}

impl ClickTable {
    pub fn new(n_modes: usize, probs: Vec<f64>) -> Result<Self> {
        if n_modes == 0 || n_modes > 16 {
            return Err(Error::InvalidArgument(format!("unsupported mode count {n_modes}")));
        }
        if probs.len() != 1 << n_modes {
            return Err(Error::InvalidData(format!(
                "{} outcomes for {n_modes} modes, expected {}",
                probs.len(),
                1usize << n_modes
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidData(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::PROBABILITY_SUM {
            return Err(Error::InvalidData(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { n_modes, probs })
    }

    /// Build from `(outcome string, probability)` pairs; every outcome is required.
    pub fn from_outcomes<'a>(n_modes: usize, entries: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut probs = vec![f64::NAN; 1 << n_modes];
        for (label, p) in entries {
            let mask = Self::parse_outcome(n_modes, label)?;
            probs[mask] = p;
        }
        if let Some(mask) = probs.iter().position(|p| p.is_nan()) {
            return Err(Error::InvalidData(format!("missing outcome {}", Self::label(n_modes, mask))));
        }
        Self::new(n_modes, probs)
    }

    pub fn parse_outcome(n_modes: usize, label: &str) -> Result<usize> {
        if label.chars().count() != n_modes {
            return Err(Error::InvalidData(format!("outcome '{label}' is not {n_modes} characters long")));
        }
        label.chars().enumerate().try_fold(0usize, |mask, (i, ch)| match ch {
            '0' => Ok(mask),
            'c' => Ok(mask | 1 << i),
            _ => Err(Error::InvalidData(format!("outcome '{label}' contains '{ch}'"))),
        })
    }

    pub fn label(n_modes: usize, mask: usize) -> String {
        (0..n_modes).map(|i| if mask >> i & 1 == 1 { 'c' } else { '0' }).collect()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    pub fn get(&self, label: &str) -> Result<f64> {
        Ok(self.probs[Self::parse_outcome(self.n_modes, label)?])
    }

    /// `<Π_{i∈modes} (±1)_i>`: marginals come from summing the joint table.
    pub fn correlator(&self, modes: &[usize]) -> f64 {
        let sel: usize = modes.iter().fold(0, |m, &i| m | 1 << i);
        self.probs
            .iter()
            .enumerate()
            .map(|(mask, p)| if (mask & sel).count_ones() % 2 == 0 { *p } else { -*p })
            .sum()
    }
}

/// Click statistics feeding a witness: one undisplaced table, one table per
/// displaced pair of modes, and per-mode two-fold-coincidence bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickStats {
    n_modes: usize,
    undisplaced: ClickTable,
    displaced: BTreeMap<(usize, usize), ClickTable>,
    pc: Vec<f64>,
}

impl ClickStats {
    pub fn new(
        undisplaced: ClickTable,
        displaced: impl IntoIterator<Item = ((usize, usize), ClickTable)>,
        pc: Vec<f64>,
    ) -> Result<Self> {
        let n = undisplaced.n_modes;
        if pc.len() != n {
            return Err(Error::InvalidData(format!("{} coincidence bounds for {n} modes", pc.len())));
        }
        if let Some(p) = pc.iter().find(|p| !(0.0..=0.5).contains(*p)) {
            return Err(Error::InvalidData(format!("coincidence bound {p} outside [0, 1/2]")));
        }
        let mut map = BTreeMap::new();
        for ((i, j), t) in displaced {
            let key = (i.min(j), i.max(j));
            if i == j || key.1 >= n || t.n_modes != n {
                return Err(Error::InvalidData(format!("displaced table for pair ({i}, {j}) does not fit {n} modes")));
            }
            map.insert(key, t);
        }
        Ok(Self { n_modes: n, undisplaced, displaced: map, pc })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn undisplaced(&self) -> &ClickTable {
        &self.undisplaced
    }

    pub fn displaced(&self, i: usize, j: usize) -> Option<&ClickTable> {
        self.displaced.get(&(i.min(j), i.max(j)))
    }

    pub fn displaced_pairs(&self) -> impl Iterator<Item = (&(usize, usize), &ClickTable)> {
        self.displaced.iter()
    }

    pub fn pc(&self) -> &[f64] {
        &self.pc
    }
}

/// Witness value assembled from outcome probabilities.
///
/// Each term is read from the table whose displaced modes match the term's
/// displaced factors; all other factors are undisplaced observables.
pub fn witness_from_counts(stats: &ClickStats, spec: &WitnessSpec) -> Result<f64> {
    if stats.n_modes != spec.n_modes {
        return Err(Error::InvalidArgument(format!(
            "{}-mode statistics for a {}-mode witness",
            stats.n_modes, spec.n_modes
        )));
    }
    let mut z = 0.0;
    for term in spec.terms() {
        let table = match term.displaced_modes().as_slice() {
            [] => &stats.undisplaced,
            [i, j] => stats
                .displaced(*i, *j)
                .ok_or_else(|| Error::InvalidData(format!("no displaced table for modes ({i}, {j})")))?,
            other => return Err(Error::InvalidData(format!("no setting displaces modes {other:?}"))),
        };
        z += term.coeff * table.correlator(&term.measured_modes());
    }
    Ok(z)
}

/// `Tr(⊗_i E_{o_i} ρ)` for every outcome string, one setting per mode.
pub fn click_table(rho: &DensityMatrix, settings: &[MeasurementSetting]) -> Result<ClickTable> {
    let dims = rho.space().dims();
    if settings.len() != dims.len() {
        return Err(Error::InvalidArgument(format!("{} settings for {} modes", settings.len(), dims.len())));
    }
    let mut effects = Vec::with_capacity(dims.len());
    for (s, &d) in settings.iter().zip(dims) {
        let e0 = no_click_effect(s, d)?;
        let e1 = MultiModeOperator::new(e0.space().clone(), CMatrix::identity(d, d) - e0.matrix())?;
        effects.push([e0, e1]);
    }
    let n = dims.len();
    let mut probs = Vec::with_capacity(1 << n);
    for mask in 0..1usize << n {
        let ops: Vec<MultiModeOperator> = (0..n).map(|i| effects[i][mask >> i & 1].clone()).collect();
        let p = fock::expectation(&fock::tensor(&ops)?, rho)?;
        probs.push(p.clamp(0.0, 1.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization(format!("state trace {total} is not 1")));
    }
    let probs = probs.iter().map(|p| p / total).collect();
    ClickTable::new(n, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::expectation;
    use crate::linalg::{eigvalsh, max_abs_diff};

    #[test]
    fn sigma_without_displacement() {
        let s = sigma_observable(&MeasurementSetting::ideal(0.0), 4).unwrap();
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE, -ONE, -ONE]));
        assert!(max_abs_diff(s.matrix(), &expect) < 1e-12);
        let q = sigma_observable(&MeasurementSetting::ideal(0.0), 2).unwrap();
        let z = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, -ONE]));
        assert!(max_abs_diff(q.matrix(), &z) < 1e-12);
    }

    #[test]
    fn sigma_vacuum_expectation() {
        let s = sigma_observable(&MeasurementSetting::ideal(0.83), 20).unwrap();
        let expect = 2.0 * (-0.6889f64).exp() - 1.0;
        assert!((s.matrix()[(0, 0)].re - expect).abs() < 1e-12);
    }

    #[test]
    fn sigma_spectrum_bounded() {
        for eta in [0.3, 0.6, 1.0] {
            for a in [0.0, 0.5, 0.83] {
                let s = sigma_observable(&MeasurementSetting::new(Complex64::new(a, 0.0), eta).unwrap(), 20).unwrap();
                assert!(s.is_hermitian());
                let ev = eigvalsh(s.matrix());
                assert!(ev[0] >= -1.0 - 1e-12 && ev[ev.len() - 1] <= 1.0 + 1e-12);
            }
        }
        assert!(matches!(MeasurementSetting::new(ZERO, 1.5), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sym_counts() {
        use Factor::*;
        assert_eq!(expand_sym(&[Sigma0, Identity, Identity], 1.0).len(), 3);
        assert_eq!(expand_sym(&[Sigma0, SigmaAlpha, SigmaAlpha], 1.0).len(), 3);
        assert_eq!(expand_sym(&[Sigma0, Identity, SigmaAlpha], 1.0).len(), 6);
        assert_eq!(expand_sym(&[Sigma0; 3], 1.0).len(), 1);
    }

    #[test]
    fn tripartite_terms_match_general_form() {
        let mut a: Vec<(Vec<Factor>, i64)> = WitnessSpec::new(3, 0.8, Variant::Tripartite)
            .unwrap()
            .terms()
            .into_iter()
            .map(|t| (t.factors, t.coeff as i64))
            .collect();
        let mut b: Vec<(Vec<Factor>, i64)> =
            WitnessSpec::general(3, 0.8).unwrap().terms().into_iter().map(|t| (t.factors, t.coeff as i64)).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn z_alg_values() {
        assert_eq!(WitnessSpec::new(2, 0.83, Variant::Bipartite).unwrap().z_alg(), 3.0);
        assert_eq!(WitnessSpec::new(3, 0.83, Variant::Tripartite).unwrap().z_alg(), 33.0);
        let spec = WitnessSpec::new(2, 0.83, Variant::Bipartite).unwrap();
        assert!(spectral_max(&spec, &[4, 4]).unwrap() <= 3.0 + 1e-12);
    }

    #[test]
    fn bipartite_at_zero_displacement() {
        let spec = WitnessSpec::new(2, 0.0, Variant::Bipartite).unwrap();
        let z = build_witness(&spec, &[3, 3]).unwrap();
        let s0 = sigma_observable(&MeasurementSetting::ideal(0.0), 3).unwrap();
        let s00 = fock::dephase_total_number(&fock::tensor(&[s0.clone(), s0]).unwrap());
        assert!(max_abs_diff(z.matrix(), s00.matrix()) < 1e-12);
    }

    #[test]
    fn general_is_twice_bipartite_on_w2() {
        let w = w_state(2, &[4, 4]).unwrap();
        let g = build_witness(&WitnessSpec::general(2, 0.83).unwrap(), &[4, 4]).unwrap();
        let b = build_witness(&WitnessSpec::new(2, 0.83, Variant::Bipartite).unwrap(), &[4, 4]).unwrap();
        let zg = expectation(&g, &w).unwrap();
        let zb = expectation(&b, &w).unwrap();
        assert!((zg - 2.0 * zb).abs() < 1e-12);
    }

    #[test]
    fn closed_form_values() {
        assert!((z_w_analytic(2, 0.0) + 2.0).abs() < 1e-15);
        assert!((z_w_analytic(3, 0.0) + 11.0).abs() < 1e-15);
        for n in [2, 3] {
            let dims = vec![4; n];
            let w = w_state(n, &dims).unwrap();
            for a in [0.3, 0.83] {
                let z = build_witness(&WitnessSpec::general(n, a).unwrap(), &dims).unwrap();
                assert!((expectation(&z, &w).unwrap() - z_w_analytic(n, a)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tripartite_matches_closed_form() {
        let w = w_state(3, &[4, 4, 4]).unwrap();
        let z = build_witness(&WitnessSpec::new(3, 0.83, Variant::Tripartite).unwrap(), &[4, 4, 4]).unwrap();
        assert!((expectation(&z, &w).unwrap() - z_w_analytic(3, 0.83)).abs() < 1e-8);
    }

    #[test]
    fn w_state_examples() {
        let w2 = w_state(2, &[2, 2]).unwrap();
        let s = w2.space().clone();
        assert!((w2.matrix()[(s.index(&[0, 1]), s.index(&[1, 0]))].re - 0.5).abs() < 1e-15);
        let w4 = w_state(4, &[2; 4]).unwrap();
        for m in 0..4 {
            let p = w4.photon_distribution(m).unwrap();
            assert!((p[1] - 0.25).abs() < 1e-15);
        }
        assert!(w_state(1, &[2]).is_err());
    }

    fn table2(p00: f64, p0c: f64, pc0: f64, pcc: f64) -> ClickTable {
        ClickTable::from_outcomes(2, [("00", p00), ("0c", p0c), ("c0", pc0), ("cc", pcc)]).unwrap()
    }

    #[test]
    fn counts_examples() {
        let spec = WitnessSpec::new(2, 0.83, Variant::Bipartite).unwrap();
        let vac = table2(1.0, 0.0, 0.0, 0.0);
        let stats = ClickStats::new(vac.clone(), [((0, 1), vac)], vec![0.0, 0.0]).unwrap();
        assert_eq!(witness_from_counts(&stats, &spec).unwrap(), 1.0);

        let anti = table2(0.0, 0.5, 0.5, 0.0);
        let disp = table2(0.3, 0.2, 0.2, 0.3);
        let stats = ClickStats::new(anti, [((0, 1), disp.clone())], vec![0.0, 0.0]).unwrap();
        let e_alpha = disp.correlator(&[0, 1]);
        assert!((witness_from_counts(&stats, &spec).unwrap() - (2.0 * e_alpha + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn counts_of_ideal_w_states_match_closed_form() {
        for (n, variant, scale) in [(2, Variant::Bipartite, 0.5), (3, Variant::Tripartite, 1.0)] {
            let dims = vec![4; n];
            let w = w_state(n, &dims).unwrap();
            let a = 0.83;
            let plain = vec![MeasurementSetting::ideal(0.0); n];
            let undisplaced = click_table(&w, &plain).unwrap();
            let mut displaced = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let mut s = plain.clone();
                    s[i] = MeasurementSetting::ideal(a);
                    s[j] = MeasurementSetting::ideal(a);
                    displaced.push(((i, j), click_table(&w, &s).unwrap()));
                }
            }
            let stats = ClickStats::new(undisplaced, displaced, vec![0.0; n]).unwrap();
            let spec = WitnessSpec::new(n, a, variant).unwrap();
            let z = witness_from_counts(&stats, &spec).unwrap();
            assert!((z - scale * z_w_analytic(n, a)).abs() < 1e-8, "{n}: {z}");
        }
    }

    #[test]
    fn table_validation() {
        assert!(matches!(ClickTable::new(2, vec![0.5, 0.5, 0.5, 0.0]), Err(Error::InvalidData(_))));
        assert!(matches!(ClickTable::new(2, vec![1.2, -0.2, 0.0, 0.0]), Err(Error::InvalidData(_))));
        assert!(ClickTable::from_outcomes(2, [("00", 1.0)]).is_err());
        assert!(ClickTable::parse_outcome(2, "0x").is_err());
        assert_eq!(ClickTable::parse_outcome(3, "0c0").unwrap(), 2);
        assert_eq!(ClickTable::label(3, 5), "c0c");
    }

    #[test]
    fn missing_displaced_table_is_data_error() {
        let spec = WitnessSpec::new(2, 0.83, Variant::Bipartite).unwrap();
        let stats = ClickStats::new(table2(1.0, 0.0, 0.0, 0.0), [], vec![0.0, 0.0]).unwrap();
        assert!(matches!(witness_from_counts(&stats, &spec), Err(Error::InvalidData(_))));
    }
}
