//! Truncated Fock-space linear algebra.
//!
//! Basis ordering is little-endian over modes: mode 0 varies fastest, so the
//! basis state `|n_0, n_1, ..., n_{N-1}>` sits at index
//! `n_0 + d_0 * (n_1 + d_1 * (n_2 + ...))`. Mode indices are zero-based.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::tol;

/// Tensor product of truncated single-mode Fock spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    dims: Vec<usize>,
}

impl FockSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension("a Fock space needs at least one mode".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(format!("mode dimension {d} < 2")));
        }
        Ok(Self { dims })
    }

    pub fn uniform(n_modes: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; n_modes])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index(&self, occupations: &[usize]) -> usize {
        debug_assert_eq!(occupations.len(), self.dims.len());
        occupations
            .iter()
            .zip(&self.dims)
            .rev()
            .fold(0, |acc, (&n, &d)| acc * d + n)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let n = index % d;
                index /= d;
                n
            })
            .collect()
    }

    pub fn total_number(&self, index: usize) -> usize {
        self.occupations(index).iter().sum()
    }

    /// Space of the listed modes, in the listed order.
    pub fn subspace(&self, modes: &[usize]) -> Result<FockSpace> {
        let dims = modes
            .iter()
            .map(|&m| {
                self.dims.get(m).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!("mode {m} out of range for {} modes", self.n_modes()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FockSpace::new(dims)
    }
}

/// Dense operator on a [`FockSpace`].
#[derive(Debug, Clone)]
pub struct MultiModeOperator {
    space: FockSpace,
    matrix: CMatrix,
    hermitian: bool,
}

impl MultiModeOperator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "matrix is {}x{}, space {:?} needs {d}x{d}",
                matrix.nrows(),
                matrix.ncols(),
                space.dims()
            )));
        }
        let hermitian = linalg::hermitian_deviation(&matrix) < tol::HERMITIAN;
        Ok(Self { space, matrix, hermitian })
    }

    pub fn identity(space: FockSpace) -> Self {
        let d = space.total_dim();
        Self { space, matrix: CMatrix::identity(d, d), hermitian: true }
    }

    pub fn from_diagonal(space: FockSpace, diagonal: &[f64]) -> Result<Self> {
        if diagonal.len() != space.total_dim() {
            return Err(Error::Shape(format!(
                "{} diagonal entries for dimension {}",
                diagonal.len(),
                space.total_dim()
            )));
        }
        let m = CMatrix::from_diagonal(&DVector::from_iterator(
            diagonal.len(),
            diagonal.iter().map(|&x| ONE * x),
        ));
        Self::new(space, m)
    }

    /// Lowering operator `a` on a single mode.
    pub fn annihilation(dim: usize) -> Result<Self> {
        let space = FockSpace::new(vec![dim])?;
        let mut m = CMatrix::zeros(dim, dim);
        for n in 1..dim {
            m[(n - 1, n)] = ONE * (n as f64).sqrt();
        }
        Self::new(space, m)
    }

    pub fn number(dim: usize) -> Result<Self> {
        let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
        Self::from_diagonal(FockSpace::new(vec![dim])?, &diag)
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint(), hermitian: self.hermitian }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Shape(format!(
                "spaces differ: {:?} vs {:?}",
                self.space.dims(),
                other.space.dims()
            )));
        }
        Ok(())
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Self::new(self.space.clone(), &self.matrix * &other.matrix)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Self::new(self.space.clone(), &self.matrix + &other.matrix)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(factor),
            hermitian: self.hermitian,
        }
    }

    /// Lift an operator acting on `modes` of `space` (in that order) to the
    /// full space, acting as the identity elsewhere.
    pub fn embed(&self, space: &FockSpace, modes: &[usize]) -> Result<Self> {
        let sub = space.subspace(modes)?;
        if sub != self.space {
            return Err(Error::Shape(format!(
                "operator on {:?} cannot act on modes {modes:?} of {:?}",
                self.space.dims(),
                space.dims()
            )));
        }
        let mut seen = vec![false; space.n_modes()];
        for &m in modes {
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidArgument(format!("mode {m} listed twice")));
            }
        }
        let d = space.total_dim();
        let occ: Vec<Vec<usize>> = (0..d).map(|i| space.occupations(i)).collect();
        let split = |o: &[usize]| -> (usize, Vec<usize>) {
            let local: Vec<usize> = modes.iter().map(|&m| o[m]).collect();
            let rest: Vec<usize> = (0..o.len()).filter(|m| !seen[*m]).map(|m| o[m]).collect();
            (sub.index(&local), rest)
        };
        let parts: Vec<(usize, Vec<usize>)> = occ.iter().map(|o| split(o)).collect();
        let mut m = CMatrix::zeros(d, d);
        for c in 0..d {
            for r in 0..d {
                if parts[r].1 == parts[c].1 {
                    m[(r, c)] = self.matrix[(parts[r].0, parts[c].0)];
                }
            }
        }
        Self::new(space.clone(), m)
    }

    /// Principal block on the states with `n_i < dims[i]` for every mode.
    pub fn compress(&self, dims: &[usize]) -> Result<Self> {
        let (space, indices) = compressed_indices(&self.space, dims)?;
        let m = CMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.matrix[(indices[r], indices[c])]
        });
        Self::new(space, m)
    }

    /// Transposition of the listed modes' indices only.
    pub fn partial_transpose(&self, subset: &[usize]) -> Result<Self> {
        check_proper_subset(&self.space, subset)?;
        Self::new(
            self.space.clone(),
            partial_transpose_matrix(&self.matrix, self.space.dims(), subset),
        )
    }
}

/// Indices of the full space that survive a per-mode truncation to `dims`.
pub(crate) fn compressed_indices(space: &FockSpace, dims: &[usize]) -> Result<(FockSpace, Vec<usize>)> {
    if dims.len() != space.n_modes() || dims.iter().zip(space.dims()).any(|(&n, &o)| n > o) {
        return Err(Error::InvalidDimension(format!(
            "cannot compress {:?} to {dims:?}",
            space.dims()
        )));
    }
    let target = FockSpace::new(dims.to_vec())?;
    let indices = (0..target.total_dim())
        .map(|i| space.index(&target.occupations(i)))
        .collect();
    Ok((target, indices))
}

fn check_proper_subset(space: &FockSpace, subset: &[usize]) -> Result<()> {
    let n = space.n_modes();
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty mode subset".into()));
    }
    if let Some(m) = subset.iter().find(|&&m| m >= n) {
        return Err(Error::InvalidArgument(format!("mode {m} out of range for {n} modes")));
    }
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() == n {
        return Err(Error::InvalidArgument("subset covers every mode".into()));
    }
    Ok(())
}

/// Source entry of the partial transpose: `PT(M)[r, c] = M[r', c']`.
pub(crate) fn partial_transpose_source(
    space: &FockSpace,
    subset: &[usize],
    r: usize,
    c: usize,
) -> (usize, usize) {
    let mut or = space.occupations(r);
    let mut oc = space.occupations(c);
    for &m in subset {
        std::mem::swap(&mut or[m], &mut oc[m]);
    }
    (space.index(&or), space.index(&oc))
}

pub fn partial_transpose_matrix(m: &CMatrix, dims: &[usize], subset: &[usize]) -> CMatrix {
    let space = FockSpace { dims: dims.to_vec() };
    let d = space.total_dim();
    CMatrix::from_fn(d, d, |r, c| {
        let (rs, cs) = partial_transpose_source(&space, subset, r, c);
        m[(rs, cs)]
    })
}

/// Physical state: Hermitian, positive semidefinite, `0 < Tr <= 1`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let state = Self::from_positive(space, matrix)?;
        let lmin = linalg::min_eigenvalue(&state.matrix);
        if lmin < tol::PSD_SLACK {
            return Err(Error::Contract(format!("density matrix has eigenvalue {lmin:.3e}")));
        }
        Ok(state)
    }

    /// Construction for matrices positive by design (congruences, tensor
    /// products, partial traces, principal blocks); skips the spectrum check.
    pub(crate) fn from_positive(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let op = MultiModeOperator::new(space, matrix)?;
        if !op.hermitian {
            return Err(Error::Contract(format!(
                "density matrix not Hermitian (deviation {:.2e})",
                linalg::hermitian_deviation(&op.matrix)
            )));
        }
        let trace = op.matrix.trace().re;
        if !(trace > 0.0 && trace <= 1.0 + tol::TRACE_EXCESS) {
            return Err(Error::Contract(format!("density matrix trace {trace} outside (0, 1]")));
        }
        Ok(Self { space: op.space, matrix: linalg::hermitize(&op.matrix) })
    }

    /// `|psi><psi|` for an amplitude vector of norm at most one.
    pub fn from_pure(space: FockSpace, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::Shape(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                space.total_dim()
            )));
        }
        let v = DVector::from_column_slice(amplitudes);
        let m = &v * v.adjoint();
        Self::new(space, m)
    }

    pub fn from_diagonal(space: FockSpace, probabilities: &[f64]) -> Result<Self> {
        if probabilities.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidData("negative or non-finite population".into()));
        }
        let op = MultiModeOperator::from_diagonal(space, probabilities)?;
        Self::new(op.space, op.matrix)
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn as_operator(&self) -> MultiModeOperator {
        MultiModeOperator { space: self.space.clone(), matrix: self.matrix.clone(), hermitian: true }
    }

    /// Photon-number distribution of one mode.
    pub fn photon_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        if mode >= self.space.n_modes() {
            return Err(Error::InvalidArgument(format!("mode {mode} out of range")));
        }
        let mut p = vec![0.0; self.space.dims()[mode]];
        for (i, pop) in self.populations().into_iter().enumerate() {
            p[self.space.occupations(i)[mode]] += pop;
        }
        Ok(p)
    }

    /// `U rho U†`.
    pub fn evolve(&self, unitary: &MultiModeOperator) -> Result<Self> {
        if unitary.space != self.space {
            return Err(Error::Shape("unitary and state live on different spaces".into()));
        }
        let u = &unitary.matrix;
        let m = if linalg::fill(u) < 0.25 {
            let x = linalg::mul_sparse_left(u, &self.matrix);
            linalg::mul_sparse_left(u, &x.adjoint()).adjoint()
        } else {
            u * &self.matrix * u.adjoint()
        };
        Self::from_positive(self.space.clone(), m)
    }

    /// Unnormalized block on `n_i < dims[i]`.
    pub fn compress(&self, dims: &[usize]) -> Result<Self> {
        let op = self.as_operator().compress(dims)?;
        Self::from_positive(op.space, op.matrix)
    }

    /// The state averaged over a common phase of all modes.
    pub fn phase_averaged(&self) -> Self {
        let m = dephase_total_number(&self.as_operator()).into_matrix();
        Self { space: self.space.clone(), matrix: m }
    }

    /// Product state `self ⊗ other`, with `other`'s modes appended.
    pub fn product(&self, other: &DensityMatrix) -> Result<Self> {
        let op = tensor(&[self.as_operator(), other.as_operator()])?;
        Self::from_positive(op.space, op.matrix)
    }
}

/// Truncated coherent-state amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(dim);
    let mut term = ONE * (-alpha.norm_sqr() / 2.0).exp();
    for n in 0..dim {
        amps.push(term);
        term = term * alpha / ((n + 1) as f64).sqrt();
    }
    amps
}

/// `D(alpha) = exp(alpha a† - alpha* a)` on a single truncated mode.
pub fn displacement_operator(alpha: Complex64, dim: usize) -> Result<MultiModeOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("displacement needs dim >= 2, got {dim}")));
    }
    let a = MultiModeOperator::annihilation(dim)?.into_matrix();
    let g = a.adjoint().scale(1.0).map(|z| z * alpha) - a.map(|z| z * alpha.conj());
    MultiModeOperator::new(FockSpace::new(vec![dim])?, linalg::expm_antihermitian(&g))
}

/// Two-mode beam splitter `a† -> sqrt(R) a† + sqrt(T) b†` with `R = 1 - T`.
///
/// Mode `a` is mode 0 of the returned space, `b` is mode 1.
pub fn beam_splitter(transmittivity: f64, dim_a: usize, dim_b: usize) -> Result<MultiModeOperator> {
    if !(0.0..=1.0).contains(&transmittivity) {
        return Err(Error::InvalidParameter(format!("transmittivity {transmittivity} outside [0, 1]")));
    }
    let space = FockSpace::new(vec![dim_a, dim_b])?;
    if transmittivity == 0.0 {
        return Ok(MultiModeOperator::identity(space));
    }
    let theta = transmittivity.sqrt().asin();
    let dim = space.total_dim();
    // g = θ (b†a - a†b)
    let mut g = CMatrix::zeros(dim, dim);
    for na in 0..dim_a {
        for nb in 0..dim_b {
            let src = space.index(&[na, nb]);
            if na > 0 && nb + 1 < dim_b {
                g[(space.index(&[na - 1, nb + 1]), src)] += ONE * theta * ((na * (nb + 1)) as f64).sqrt();
            }
            if nb > 0 && na + 1 < dim_a {
                g[(space.index(&[na + 1, nb - 1]), src)] -= ONE * theta * (((na + 1) * nb) as f64).sqrt();
            }
        }
    }
    // The generator conserves total photon number: exponentiate sector by sector.
    let mut u = CMatrix::zeros(dim, dim);
    for n in 0..dim_a + dim_b - 1 {
        let idx: Vec<usize> = (0..dim).filter(|&i| space.total_number(i) == n).collect();
        let block = CMatrix::from_fn(idx.len(), idx.len(), |r, c| g[(idx[r], idx[c])]);
        let e = linalg::expm_antihermitian(&block);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                u[(i, j)] = e[(r, c)];
            }
        }
    }
    MultiModeOperator::new(space, u)
}

/// Kronecker product in listed mode order; the first operator's modes vary fastest.
pub fn tensor(ops: &[MultiModeOperator]) -> Result<MultiModeOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("tensor of an empty list".into()))?;
    let mut dims = first.space.dims().to_vec();
    let mut m = first.matrix.clone();
    for op in rest {
        m = op.matrix.kronecker(&m);
        dims.extend_from_slice(op.space.dims());
    }
    MultiModeOperator::new(FockSpace::new(dims)?, m)
}

/// Reduced state on the `keep` modes (kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    let n = space.n_modes();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one mode".into()));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(m) = kept.iter().find(|&&m| m >= n) {
        return Err(Error::InvalidArgument(format!("mode {m} out of range for {n} modes")));
    }
    let traced: Vec<usize> = (0..n).filter(|m| !kept.contains(m)).collect();
    let reduced = space.subspace(&kept)?;
    let d = space.total_dim();
    let parts: Vec<(usize, Vec<usize>)> = (0..d)
        .map(|i| {
            let o = space.occupations(i);
            let local: Vec<usize> = kept.iter().map(|&m| o[m]).collect();
            (reduced.index(&local), traced.iter().map(|&m| o[m]).collect())
        })
        .collect();
    let mut m = CMatrix::zeros(reduced.total_dim(), reduced.total_dim());
    for c in 0..d {
        for r in 0..d {
            if parts[r].1 == parts[c].1 {
                m[(parts[r].0, parts[c].0)] += rho.matrix()[(r, c)];
            }
        }
    }
    DensityMatrix::from_positive(reduced, m)
}

/// Partial transpose of a state over the modes in `subset`.
pub fn partial_transpose(rho: &DensityMatrix, subset: &[usize]) -> Result<MultiModeOperator> {
    rho.as_operator().partial_transpose(subset)
}

/// Remove every coherence between different total photon numbers.
///
/// This is the exact average of `U(phi) M U(phi)†` over a common phase
/// `U(phi) = prod_i exp(i phi n_i)`.
pub fn dephase_total_number(op: &MultiModeOperator) -> MultiModeOperator {
    let space = op.space();
    let totals: Vec<usize> = (0..space.total_dim()).map(|i| space.total_number(i)).collect();
    let mut m = op.matrix().clone();
    for c in 0..totals.len() {
        for r in 0..totals.len() {
            if totals[r] != totals[c] {
                m[(r, c)] = ZERO;
            }
        }
    }
    MultiModeOperator { space: space.clone(), matrix: m, hermitian: op.hermitian }
}

/// Thermal photon-number distribution, renormalized over `dim` levels.
pub fn thermal_distribution(nbar: f64, dim: usize) -> Result<Vec<f64>> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("mean photon number {nbar} must be >= 0")));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim {dim} < 2")));
    }
    let ratio = nbar / (1.0 + nbar);
    let mut p: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32) / (1.0 + nbar)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

pub fn thermal_state(nbar: f64, dim: usize) -> Result<DensityMatrix> {
    let p = thermal_distribution(nbar, dim)?;
    DensityMatrix::from_diagonal(FockSpace::new(vec![dim])?, &p)
}

/// `Tr(op rho)` for a Hermitian operator.
pub fn expectation(op: &MultiModeOperator, rho: &DensityMatrix) -> Result<f64> {
    if op.space() != rho.space() {
        return Err(Error::Shape(format!(
            "operator on {:?}, state on {:?}",
            op.space().dims(),
            rho.space().dims()
        )));
    }
    if !op.is_hermitian() {
        return Err(Error::Contract("expectation of a non-Hermitian operator".into()));
    }
    let v = linalg::trace_product(op.matrix(), rho.matrix());
    if v.im.abs() > tol::IMAG_RESIDUE {
        return Err(Error::Contract(format!("imaginary residue {:.3e} in expectation", v.im)));
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, min_eigenvalue};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn w_state(n: usize) -> DensityMatrix {
        let space = FockSpace::uniform(n, 2).unwrap();
        let mut amps = vec![ZERO; space.total_dim()];
        for i in 0..n {
            let mut occ = vec![0; n];
            occ[i] = 1;
            amps[space.index(&occ)] = c(1.0 / (n as f64).sqrt());
        }
        DensityMatrix::from_pure(space, &amps).unwrap()
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(matches!(FockSpace::new(vec![2, 1]), Err(Error::InvalidDimension(_))));
        assert!(matches!(displacement_operator(c(0.1), 1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn little_endian_index() {
        let s = FockSpace::new(vec![2, 3, 4]).unwrap();
        assert_eq!(s.index(&[1, 0, 0]), 1);
        assert_eq!(s.index(&[0, 1, 0]), 2);
        assert_eq!(s.index(&[0, 0, 1]), 6);
        assert_eq!(s.index(&[1, 2, 3]), 1 + 2 * 2 + 6 * 3);
        for i in 0..s.total_dim() {
            assert_eq!(s.index(&s.occupations(i)), i);
        }
    }

    #[test]
    fn displacement_at_zero_is_identity() {
        let d = displacement_operator(ZERO, 5).unwrap();
        assert!(max_abs_diff(d.matrix(), &CMatrix::identity(5, 5)) < 1e-14);
    }

    #[test]
    fn coherent_mean_photon_number() {
        // Oracle: the mean of a Poisson distribution with mean |alpha|^2.
        let d = displacement_operator(c(0.83), 20).unwrap();
        let vac = d.matrix().column(0).into_owned();
        let mean: f64 = vac.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum();
        assert!((mean - 0.6889).abs() < 1e-9, "{mean}");
    }

    #[test]
    fn displacement_matches_coherent_amplitudes() {
        let alpha = Complex64::new(0.4, -0.3);
        let d = displacement_operator(alpha, 25).unwrap();
        let amps = coherent_amplitudes(alpha, 25);
        for n in 0..12 {
            assert!((d.matrix()[(n, 0)] - amps[n]).norm() < 1e-12);
        }
    }

    #[test]
    fn displacement_inverse() {
        let d = displacement_operator(c(0.5), 20).unwrap();
        let dm = displacement_operator(c(-0.5), 20).unwrap();
        let prod = d.compose(&dm).unwrap();
        assert!(max_abs_diff(prod.matrix(), &CMatrix::identity(20, 20)) < 1e-10);
    }

    #[test]
    fn displacement_unitarity_within_tail_bound() {
        for alpha in [0.3, 0.7, 1.0] {
            let mut last = f64::INFINITY;
            for dim in [6, 10, 14, 18] {
                let d = displacement_operator(c(alpha), dim).unwrap();
                let dev = max_abs_diff(&(d.matrix() * d.matrix().adjoint()), &CMatrix::identity(dim, dim));
                let amps = coherent_amplitudes(c(alpha), dim);
                let tail = 1.0 - amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
                assert!(dev < (10.0 * tail).max(1e-12), "alpha {alpha} dim {dim} dev {dev}");
                assert!(dev <= last + 1e-13);
                last = dev;
            }
        }
    }

    #[test]
    fn beam_splitter_zero_is_identity() {
        let u = beam_splitter(0.0, 3, 3).unwrap();
        assert!(max_abs_diff(u.matrix(), &CMatrix::identity(9, 9)) < 1e-15);
        assert!(matches!(beam_splitter(1.2, 3, 3), Err(Error::InvalidParameter(_))));
        assert!(matches!(beam_splitter(-0.1, 3, 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn beam_splitter_single_photon() {
        let u = beam_splitter(0.5, 3, 3).unwrap();
        let s = u.space().clone();
        let col = u.matrix().column(s.index(&[1, 0]));
        let h = 1.0 / 2f64.sqrt();
        assert!((col[s.index(&[1, 0])] - c(h)).norm() < 1e-12);
        assert!((col[s.index(&[0, 1])] - c(h)).norm() < 1e-12);
    }

    #[test]
    fn beam_splitter_splits_coherent_state() {
        // Oracle: |g>|0> -> |g/sqrt2>|g/sqrt2>, compared in the Fock basis.
        let dim = 15;
        let g = c(0.4);
        let u = beam_splitter(0.5, dim, dim).unwrap();
        let s = u.space().clone();
        let input = coherent_amplitudes(g, dim);
        let mut psi = DVector::zeros(s.total_dim());
        for n in 0..dim {
            psi[s.index(&[n, 0])] = input[n];
        }
        let out = u.matrix() * psi;
        let h = coherent_amplitudes(g / 2f64.sqrt(), dim);
        let mut target = DVector::zeros(s.total_dim());
        for i in 0..dim {
            for j in 0..dim {
                target[s.index(&[i, j])] = h[i] * h[j];
            }
        }
        let fid = target.dotc(&out).norm_sqr();
        assert!(fid > 1.0 - 1e-8, "{fid}");
    }

    #[test]
    fn tensor_examples() {
        let id2 = MultiModeOperator::identity(FockSpace::new(vec![2]).unwrap());
        let t = tensor(&[id2.clone(), id2]).unwrap();
        assert!(max_abs_diff(t.matrix(), &CMatrix::identity(4, 4)) < 1e-15);

        let z = MultiModeOperator::from_diagonal(FockSpace::new(vec![2]).unwrap(), &[1.0, -1.0]).unwrap();
        let zz = tensor(&[z.clone(), z]).unwrap();
        let diag: Vec<f64> = zz.matrix().diagonal().iter().map(|x| x.re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(matches!(tensor(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tensor_index_arithmetic() {
        let a = CMatrix::from_fn(2, 2, |r, c| Complex64::new((r * 2 + c) as f64 + 1.0, 0.5 * r as f64));
        let b = CMatrix::from_fn(3, 3, |r, c| Complex64::new(10.0 * r as f64 - c as f64, c as f64));
        let ta = MultiModeOperator::new(FockSpace::new(vec![2]).unwrap(), a.clone()).unwrap();
        let tb = MultiModeOperator::new(FockSpace::new(vec![3]).unwrap(), b.clone()).unwrap();
        let t = tensor(&[ta, tb]).unwrap();
        assert_eq!(t.space().dims(), &[2, 3]);
        for ra in 0..2 {
            for ca in 0..2 {
                for rb in 0..3 {
                    for cb in 0..3 {
                        let (r, c) = (ra + 2 * rb, ca + 2 * cb);
                        assert_eq!(t.matrix()[(r, c)], a[(ra, ca)] * b[(rb, cb)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_w_states() {
        let w2 = w_state(2);
        let r = partial_trace(&w2, &[0]).unwrap();
        assert!(max_abs_diff(r.matrix(), &CMatrix::from_diagonal_element(2, 2, c(0.5))) < 1e-15);

        // Oracle: explicit 8x8 trace-out of W3 over mode 2.
        let w3 = w_state(3);
        let r = partial_trace(&w3, &[0, 1]).unwrap();
        let mut expect = CMatrix::zeros(4, 4);
        expect[(0, 0)] = c(1.0 / 3.0);
        for &i in &[1usize, 2] {
            for &j in &[1usize, 2] {
                expect[(i, j)] = c(1.0 / 3.0);
            }
        }
        assert!(max_abs_diff(r.matrix(), &expect) < 1e-15);
        assert!(partial_trace(&w3, &[]).is_err());
        assert!(partial_trace(&w3, &[3]).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = thermal_state(0.3, 3).unwrap();
        let b = thermal_state(0.8, 4).unwrap();
        let ab = a.product(&b).unwrap();
        let r = partial_trace(&ab, &[0]).unwrap();
        assert!(max_abs_diff(r.matrix(), a.matrix()) < 1e-15);
    }

    #[test]
    fn partial_transpose_examples() {
        // Oracle: the partial transpose of W2 has spectrum {-1/2, 1/2, 1/2, 1/2}.
        let pt = partial_transpose(&w_state(2), &[0]).unwrap();
        assert!((min_eigenvalue(pt.matrix()) + 0.5).abs() < 1e-12);
        assert!(pt.is_hermitian());

        let space = FockSpace::uniform(2, 2).unwrap();
        let mut p = vec![0.0; 4];
        p[space.index(&[0, 1])] = 0.5;
        p[space.index(&[1, 0])] = 0.5;
        let sep = DensityMatrix::from_diagonal(space, &p).unwrap();
        assert!(min_eigenvalue(partial_transpose(&sep, &[1]).unwrap().matrix()) >= -1e-15);

        assert!(partial_transpose(&sep, &[]).is_err());
        assert!(partial_transpose(&sep, &[0, 1]).is_err());
    }

    #[test]
    fn partial_transpose_of_product_keeps_spectrum() {
        let psi = coherent_amplitudes(Complex64::new(0.3, 0.2), 3);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<_> = psi.iter().map(|z| z / norm).collect();
        let a = DensityMatrix::from_pure(FockSpace::new(vec![3]).unwrap(), &psi).unwrap();
        let b = thermal_state(0.5, 3).unwrap();
        let ab = a.product(&b).unwrap();
        let before = crate::linalg::eigvalsh(ab.matrix());
        for subset in [[0usize], [1]] {
            let after = crate::linalg::eigvalsh(partial_transpose(&ab, &subset).unwrap().matrix());
            for (x, y) in before.iter().zip(&after) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dephasing_examples() {
        let space = FockSpace::uniform(2, 2).unwrap();
        let i10 = space.index(&[1, 0]);
        let i01 = space.index(&[0, 1]);
        let i00 = space.index(&[0, 0]);
        let i11 = space.index(&[1, 1]);
        let diag = MultiModeOperator::from_diagonal(space.clone(), &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(dephase_total_number(&diag).matrix(), diag.matrix());

        let mut m = CMatrix::zeros(4, 4);
        m[(i10, i01)] = ONE;
        let op = MultiModeOperator::new(space.clone(), m.clone()).unwrap();
        assert_eq!(dephase_total_number(&op).matrix(), &m);

        let mut m = CMatrix::zeros(4, 4);
        m[(i00, i11)] = ONE;
        let op = MultiModeOperator::new(space, m).unwrap();
        assert!(dephase_total_number(&op).matrix().iter().all(|z| *z == ZERO));
    }

    #[test]
    fn thermal_examples() {
        let t0 = thermal_state(0.0, 5).unwrap();
        assert_eq!(t0.populations(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let t1 = thermal_state(1.0, 30).unwrap();
        let p = t1.populations();
        assert!((p[0] - 0.5).abs() < 1e-8 && (p[1] - 0.25).abs() < 1e-8);
        assert!((t1.trace() - 1.0).abs() < 1e-12);
        let t = thermal_state(0.1, 15).unwrap();
        let mean: f64 = t.populations().iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert!((mean - 0.1).abs() < 1e-6);
        assert!(matches!(thermal_state(-0.1, 5), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn expectation_examples() {
        let space = FockSpace::new(vec![2]).unwrap();
        let id = MultiModeOperator::identity(space.clone());
        assert!((expectation(&id, &thermal_state(0.3, 2).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        let z = MultiModeOperator::from_diagonal(space.clone(), &[1.0, -1.0]).unwrap();
        let one = DensityMatrix::from_diagonal(space.clone(), &[0.0, 1.0]).unwrap();
        assert_eq!(expectation(&z, &one).unwrap(), -1.0);

        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        let nh = MultiModeOperator::new(space, m).unwrap();
        assert!(matches!(expectation(&nh, &one), Err(Error::Contract(_))));
        assert!(matches!(expectation(&z, &thermal_state(0.1, 3).unwrap()), Err(Error::Shape(_))));
    }

    #[test]
    fn density_matrix_validation() {
        let space = FockSpace::new(vec![2]).unwrap();
        assert!(DensityMatrix::from_diagonal(space.clone(), &[0.7, 0.6]).is_err());
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.6), c(0.6), c(0.5)]);
        assert!(matches!(DensityMatrix::new(space, m), Err(Error::Contract(_))));
    }
}
