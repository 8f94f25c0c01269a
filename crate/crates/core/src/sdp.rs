//! Dense semidefinite optimizer.
//!
//! Maximizes `Σ_v Re Tr(C_v X_v)` over Hermitian matrix variables `X_v`.
//! Every constraint reads a fixed set of entries of the variables (a
//! principal block, a partially transposed block, the support of a linear
//! functional, a single off-diagonal pair) and owns a convex set on that
//! local vector. The solver runs consensus ADMM: each constraint keeps a
//! local copy projected onto its set, and the variables are the per-entry
//! average of the copies shifted by the objective.

use crate::error::{Error, Result};
use crate::fock::{partial_transpose_source, FockSpace};
use crate::linalg::{self, CMatrix, ZERO};
use crate::tol;

/// Handle to a variable declared on an [`SdpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(pub usize);

/// Linear injective map reading entries of a variable: `out[r, c] = X[source(r, c)]`.
#[derive(Debug, Clone)]
pub struct EntryMap {
    dim: usize,
    sources: Vec<(usize, usize)>,
}

impl EntryMap {
    pub fn identity(n: usize) -> Self {
        Self::principal(&(0..n).collect::<Vec<_>>())
    }

    /// Principal sub-block on the listed indices.
    pub fn principal(indices: &[usize]) -> Self {
        let m = indices.len();
        let mut sources = Vec::with_capacity(m * m);
        for c in 0..m {
            for r in 0..m {
                sources.push((indices[r], indices[c]));
            }
        }
        Self { dim: m, sources }
    }

    /// Partial transpose of a Fock-space variable over the listed modes.
    pub fn partial_transpose(dims: &[usize], subset: &[usize]) -> Result<Self> {
        let n: usize = dims.iter().product();
        Self::principal_partial_transpose(&(0..n).collect::<Vec<_>>(), dims, subset)
    }

    /// Partial transpose of the principal block on `indices`; `dims` describes
    /// the tensor structure of the block itself.
    pub fn principal_partial_transpose(indices: &[usize], dims: &[usize], subset: &[usize]) -> Result<Self> {
        let space = FockSpace::new(dims.to_vec())?;
        if space.total_dim() != indices.len() {
            return Err(Error::Shape(format!(
                "block of {} indices cannot carry modes {dims:?}",
                indices.len()
            )));
        }
        if subset.iter().any(|&m| m >= dims.len()) {
            return Err(Error::InvalidArgument(format!("subset {subset:?} out of range")));
        }
        let m = indices.len();
        let mut sources = Vec::with_capacity(m * m);
        for c in 0..m {
            for r in 0..m {
                let (rs, cs) = partial_transpose_source(&space, subset, r, c);
                sources.push((indices[rs], indices[cs]));
            }
        }
        Ok(Self { dim: m, sources })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &CMatrix) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |r, c| x[self.sources[r + c * self.dim]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone)]
pub enum Constraint {
    /// `map(X_var) ⪰ 0`.
    Psd { var: VarId, map: EntryMap },
    /// `Σ Re Tr(A_k X_k)  rel  rhs` with Hermitian `A_k`.
    Linear { terms: Vec<(VarId, CMatrix)>, relation: Relation, rhs: f64 },
    /// `|X[row, col]| <= bound`.
    EntryBound { var: VarId, row: usize, col: usize, bound: f64 },
}

impl Constraint {
    fn kind(&self) -> &'static str {
        match self {
            Constraint::Psd { .. } => "psd",
            Constraint::Linear { relation: Relation::Eq, .. } => "linear-eq",
            Constraint::Linear { .. } => "linear-ineq",
            Constraint::EntryBound { .. } => "entry-bound",
        }
    }
}

/// Maximize a real-linear objective over Hermitian matrix variables.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    variables: Vec<(String, usize)>,
    objective: Vec<CMatrix>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: &str, dim: usize) -> VarId {
        self.variables.push((name.to_string(), dim));
        self.objective.push(CMatrix::zeros(dim, dim));
        VarId(self.variables.len() - 1)
    }

    pub fn variables(&self) -> &[(String, usize)] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn var_dim(&self, var: VarId) -> Result<usize> {
        self.variables
            .get(var.0)
            .map(|v| v.1)
            .ok_or_else(|| Error::InvalidArgument(format!("undeclared variable {}", var.0)))
    }

    fn check_coefficient(&self, var: VarId, m: &CMatrix) -> Result<()> {
        let d = self.var_dim(var)?;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Shape(format!(
                "coefficient {}x{} for variable of dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        if linalg::hermitian_deviation(m) >= tol::HERMITIAN {
            return Err(Error::Contract("coefficient matrix is not Hermitian".into()));
        }
        Ok(())
    }

    pub fn set_objective(&mut self, var: VarId, c: CMatrix) -> Result<()> {
        self.check_coefficient(var, &c)?;
        self.objective[var.0] = linalg::hermitize(&c);
        Ok(())
    }

    pub fn add_psd(&mut self, var: VarId) -> Result<()> {
        let d = self.var_dim(var)?;
        self.add_psd_map(var, EntryMap::identity(d))
    }

    pub fn add_psd_map(&mut self, var: VarId, map: EntryMap) -> Result<()> {
        let d = self.var_dim(var)?;
        let mut seen = vec![false; d * d];
        for (k, &(r, c)) in map.sources.iter().enumerate() {
            if r >= d || c >= d {
                return Err(Error::Shape(format!("map reads ({r}, {c}) of a {d}x{d} variable")));
            }
            if std::mem::replace(&mut seen[r + c * d], true) {
                return Err(Error::Contract("map reads an entry twice".into()));
            }
            let (i, j) = (k % map.dim, k / map.dim);
            if map.sources[j + i * map.dim] != (c, r) {
                return Err(Error::Contract("map does not preserve Hermiticity".into()));
            }
        }
        self.constraints.push(Constraint::Psd { var, map });
        Ok(())
    }

    pub fn add_linear(&mut self, terms: Vec<(VarId, CMatrix)>, relation: Relation, rhs: f64) -> Result<()> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("linear constraint without terms".into()));
        }
        for (var, a) in &terms {
            self.check_coefficient(*var, a)?;
        }
        let terms = terms.into_iter().map(|(v, a)| (v, linalg::hermitize(&a))).collect();
        self.constraints.push(Constraint::Linear { terms, relation, rhs });
        Ok(())
    }

    pub fn add_trace(&mut self, var: VarId, relation: Relation, rhs: f64) -> Result<()> {
        let d = self.var_dim(var)?;
        self.add_linear(vec![(var, CMatrix::identity(d, d))], relation, rhs)
    }

    /// Constraint on a single diagonal entry, `X[i, i] rel rhs`.
    pub fn add_diagonal(&mut self, var: VarId, index: usize, relation: Relation, rhs: f64) -> Result<()> {
        let d = self.var_dim(var)?;
        if index >= d {
            return Err(Error::Shape(format!("diagonal index {index} >= {d}")));
        }
        let mut a = CMatrix::zeros(d, d);
        a[(index, index)] = linalg::ONE;
        self.add_linear(vec![(var, a)], relation, rhs)
    }

    pub fn add_entry_bound(&mut self, var: VarId, row: usize, col: usize, bound: f64) -> Result<()> {
        let d = self.var_dim(var)?;
        if row >= d || col >= d {
            return Err(Error::Shape(format!("entry ({row}, {col}) outside {d}x{d}")));
        }
        if !(bound >= 0.0) {
            return Err(Error::InvalidParameter(format!("entry bound {bound} must be >= 0")));
        }
        self.constraints.push(Constraint::EntryBound { var, row, col, bound });
        Ok(())
    }

    pub fn objective_value(&self, x: &[CMatrix]) -> f64 {
        self.objective
            .iter()
            .zip(x)
            .map(|(c, x)| linalg::trace_product_re(c, x))
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tolerance: 1e-7, max_iterations: 200_000 }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub optimum: f64,
    pub optimizer: Vec<CMatrix>,
    pub primal_residual: f64,
    pub psd_violation: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nearest positive-semidefinite matrix in Frobenius norm.
pub fn project_psd(m: &CMatrix) -> Result<CMatrix> {
    if linalg::hermitian_deviation(m) >= tol::HERMITIAN {
        return Err(Error::Contract("project_psd needs a Hermitian matrix".into()));
    }
    Ok(clip_psd(m))
}

fn clip_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = linalg::eigh(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let v = vecs.column(k);
        for c in 0..n {
            let w = v[c].conj() * lambda;
            for r in 0..n {
                out[(r, c)] += v[r] * w;
            }
        }
    }
    linalg::hermitize(&out)
}

/// Flat address of a variable entry: (variable, row + col * dim).
type Slot = (usize, usize);

enum LocalSet {
    Psd { dim: usize },
    Halfspace { weights: Vec<num_complex::Complex64>, norm2: f64, relation: Relation, rhs: f64 },
    Disc { bound: f64 },
}

struct Block {
    slots: Vec<Slot>,
    set: LocalSet,
}

impl Block {
    fn project(&self, v: &mut [num_complex::Complex64]) {
        match &self.set {
            LocalSet::Psd { dim } => {
                let m = CMatrix::from_column_slice(*dim, *dim, v);
                let p = clip_psd(&linalg::hermitize(&m));
                v.copy_from_slice(p.as_slice());
            }
            LocalSet::Halfspace { weights, norm2, relation, rhs } => {
                let f: f64 = weights.iter().zip(v.iter()).map(|(a, z)| (a.conj() * z).re).sum();
                let excess = f - rhs;
                let active = match relation {
                    Relation::Eq => true,
                    Relation::Le => excess > 0.0,
                    Relation::Ge => excess < 0.0,
                };
                if active && *norm2 > 0.0 {
                    let step = excess / norm2;
                    for (z, a) in v.iter_mut().zip(weights) {
                        *z -= a * step;
                    }
                }
            }
            LocalSet::Disc { bound } => {
                for z in v.iter_mut() {
                    let r = z.norm();
                    if r > *bound {
                        *z *= bound / r;
                    }
                }
            }
        }
    }
}

fn build_blocks(problem: &SdpProblem) -> Vec<Block> {
    let dims: Vec<usize> = problem.variables.iter().map(|v| v.1).collect();
    problem
        .constraints
        .iter()
        .map(|con| match con {
            Constraint::Psd { var, map } => Block {
                slots: map.sources.iter().map(|&(r, c)| (var.0, r + c * dims[var.0])).collect(),
                set: LocalSet::Psd { dim: map.dim },
            },
            Constraint::Linear { terms, relation, rhs } => {
                let mut slots = Vec::new();
                let mut weights = Vec::new();
                for (var, a) in terms {
                    let d = dims[var.0];
                    for c in 0..d {
                        for r in 0..d {
                            if a[(r, c)] != ZERO {
                                slots.push((var.0, r + c * d));
                                // Re Tr(A X) = Σ Re(conj(A[r, c]) X[r, c]) for Hermitian A.
                                weights.push(a[(r, c)]);
                            }
                        }
                    }
                }
                let norm2 = weights.iter().map(|w| w.norm_sqr()).sum();
                Block { slots, set: LocalSet::Halfspace { weights, norm2, relation: *relation, rhs: *rhs } }
            }
            Constraint::EntryBound { var, row, col, bound } => {
                let d = dims[var.0];
                let mut slots = vec![(var.0, row + col * d)];
                if row != col {
                    slots.push((var.0, col + row * d));
                }
                Block { slots, set: LocalSet::Disc { bound: *bound } }
            }
        })
        .collect()
}

fn gather(x: &[CMatrix], slots: &[Slot]) -> Vec<num_complex::Complex64> {
    slots.iter().map(|&(v, k)| x[v].as_slice()[k]).collect()
}

fn psd_violation(problem: &SdpProblem, x: &[CMatrix]) -> f64 {
    problem
        .constraints
        .iter()
        .filter_map(|con| match con {
            Constraint::Psd { var, map } => Some((-linalg::min_eigenvalue(&map.apply(&x[var.0]))).max(0.0)),
            _ => None,
        })
        .fold(0.0, f64::max)
}

fn residual_of(con: &Constraint, x: &[CMatrix]) -> f64 {
    match con {
        Constraint::Psd { var, map } => (-linalg::min_eigenvalue(&map.apply(&x[var.0]))).max(0.0),
        Constraint::Linear { terms, relation, rhs } => {
            let f: f64 = terms.iter().map(|(v, a)| linalg::trace_product_re(a, &x[v.0])).sum();
            match relation {
                Relation::Eq => (f - rhs).abs(),
                Relation::Le => (f - rhs).max(0.0),
                Relation::Ge => (rhs - f).max(0.0),
            }
        }
        Constraint::EntryBound { var, row, col, bound } => (x[var.0][(*row, *col)].norm() - bound).max(0.0),
    }
}

const CHECK_EVERY: usize = 20;
const ADAPT_EVERY: usize = 100;
const RHO_RATIO: f64 = 10.0;
const RHO_SCALE: f64 = 2.0;

/// Solve the problem by consensus ADMM.
///
/// Running out of iterations is not an error: the returned solution has
/// `converged == false` and callers decide what to do with it.
pub fn solve(problem: &SdpProblem, options: &SolveOptions) -> Result<SdpSolution> {
    if problem.variables.is_empty() {
        return Err(Error::InvalidArgument("problem has no variables".into()));
    }
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    for c in &problem.objective {
        if linalg::hermitian_deviation(c) >= tol::HERMITIAN {
            return Err(Error::Contract("objective is not Hermitian".into()));
        }
    }
    let blocks = build_blocks(problem);
    let dims: Vec<usize> = problem.variables.iter().map(|v| v.1).collect();

    let mut count: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d * d]).collect();
    for b in &blocks {
        for &(v, k) in &b.slots {
            count[v][k] += 1.0;
        }
    }
    for (v, c) in problem.objective.iter().enumerate() {
        if c.iter().zip(&count[v]).any(|(z, &n)| *z != ZERO && n == 0.0) {
            return Err(Error::Contract(format!(
                "objective on variable '{}' touches an unconstrained entry",
                problem.variables[v].0
            )));
        }
    }

    let mut x: Vec<CMatrix> = dims.iter().map(|&d| CMatrix::zeros(d, d)).collect();
    let mut z: Vec<Vec<num_complex::Complex64>> = blocks.iter().map(|b| vec![ZERO; b.slots.len()]).collect();
    let mut u = z.clone();
    let mut rho = 1.0;
    let mut z_prev = z.clone();

    let mut iterations = 0;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut psd = f64::INFINITY;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;

        // x-update: per-entry average of (z - u) shifted by the objective.
        let mut acc: Vec<Vec<num_complex::Complex64>> =
            problem.objective.iter().map(|c| c.iter().map(|w| w / rho).collect()).collect();
        for (bi, b) in blocks.iter().enumerate() {
            for (k, &(v, e)) in b.slots.iter().enumerate() {
                acc[v][e] += z[bi][k] - u[bi][k];
            }
        }
        for v in 0..x.len() {
            let d = dims[v];
            let m = CMatrix::from_fn(d, d, |r, c| {
                let e = r + c * d;
                if count[v][e] > 0.0 {
                    acc[v][e] / count[v][e]
                } else {
                    ZERO
                }
            });
            x[v] = linalg::hermitize(&m);
        }

        // z- and u-updates.
        let check = iterations % CHECK_EVERY == 0 || iterations == options.max_iterations;
        if check {
            z_prev.clone_from(&z);
        }
        let mut r2 = 0.0f64;
        let mut rmax = 0.0f64;
        for (bi, b) in blocks.iter().enumerate() {
            let lx = gather(&x, &b.slots);
            let mut w: Vec<_> = lx.iter().zip(&u[bi]).map(|(a, b)| a + b).collect();
            b.project(&mut w);
            for k in 0..w.len() {
                let diff = lx[k] - w[k];
                u[bi][k] += diff;
                if check {
                    r2 += diff.norm_sqr();
                    rmax = rmax.max(diff.norm());
                }
            }
            z[bi] = w;
        }

        if check {
            let mut s_acc: Vec<Vec<num_complex::Complex64>> = dims.iter().map(|&d| vec![ZERO; d * d]).collect();
            for (bi, b) in blocks.iter().enumerate() {
                for (k, &(v, e)) in b.slots.iter().enumerate() {
                    s_acc[v][e] += z[bi][k] - z_prev[bi][k];
                }
            }
            let s2: f64 = s_acc.iter().flatten().map(|w| w.norm_sqr()).sum::<f64>() * rho * rho;
            primal = rmax;
            dual = s2.sqrt();
            if primal < options.tolerance && dual < options.tolerance {
                psd = psd_violation(problem, &x);
                let linear = problem
                    .constraints
                    .iter()
                    .filter(|c| !matches!(c, Constraint::Psd { .. }))
                    .map(|c| residual_of(c, &x))
                    .fold(0.0, f64::max);
                primal = primal.max(linear);
                if psd < options.tolerance / 10.0 && primal < options.tolerance {
                    converged = true;
                    break;
                }
            }
            if iterations % ADAPT_EVERY == 0 {
                let r = r2.sqrt();
                let s = dual;
                let factor = if r > RHO_RATIO * s {
                    RHO_SCALE
                } else if s > RHO_RATIO * r {
                    1.0 / RHO_SCALE
                } else {
                    1.0
                };
                if factor != 1.0 {
                    rho *= factor;
                    for ub in u.iter_mut() {
                        for w in ub.iter_mut() {
                            *w /= factor;
                        }
                    }
                }
            }
        }
    }
    if !converged {
        psd = psd_violation(problem, &x);
    }
    let optimum = problem.objective_value(&x);
    Ok(SdpSolution { optimum, optimizer: x, primal_residual: primal, psd_violation: psd, dual_residual: dual, iterations, converged })
}

#[derive(Debug, Clone)]
pub struct ConstraintResidual {
    pub index: usize,
    pub kind: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub objective: f64,
    pub residuals: Vec<ConstraintResidual>,
}

impl VerifyReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Independent re-evaluation of the objective and every constraint at a point.
pub fn verify(problem: &SdpProblem, point: &[CMatrix]) -> Result<VerifyReport> {
    if point.len() != problem.variables.len()
        || point.iter().zip(&problem.variables).any(|(x, v)| x.nrows() != v.1 || x.ncols() != v.1)
    {
        return Err(Error::Shape("point does not match the problem's variables".into()));
    }
    let residuals = problem
        .constraints
        .iter()
        .enumerate()
        .map(|(index, con)| ConstraintResidual { index, kind: con.kind(), residual: residual_of(con, point) })
        .collect();
    Ok(VerifyReport { objective: problem.objective_value(point), residuals })
}
