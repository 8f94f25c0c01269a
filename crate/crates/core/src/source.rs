//! Heralded single-photon source, loss, splitting and predicted click statistics.
//!
//! The heralded state is a weighted difference of two thermal states, so
//! every click probability reduces to Gaussian averages over coherent states.
//! Mode `a` is the reflected output of the splitter (amplitude `√R`), mode
//! `b` the transmitted one (amplitude `√T`).

use num_complex::Complex64;

use crate::bounds::{self, BoundResult};
use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockSpace};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::tol;
use crate::witness::{self, ClickStats, ClickTable, MeasurementSetting, Variant, WitnessSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// `T_g = tanh(g)`.
    pub t_g: f64,
    /// Heralding efficiency; `R_h = √(1 - η_h)`.
    pub eta_h: f64,
    /// Source-to-detector efficiency including detection.
    pub eta_total: f64,
    /// Splitter transmittivity `T`; the reflectivity is `1 - T`.
    pub transmittivity: f64,
    pub alpha: f64,
    /// Per-gate probability that a detector clicks on vacuum.
    pub dark_count: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            t_g: 1e-3f64.sqrt(),
            eta_h: 0.9,
            eta_total: 1.0,
            transmittivity: 0.5,
            alpha: 0.83,
            dark_count: 0.0,
        }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str, v: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} = {v} out of range")))
            }
        };
        check(self.t_g > 0.0 && self.t_g < 1.0, "t_g", self.t_g)?;
        check(self.eta_h > 0.0 && self.eta_h <= 1.0, "eta_h", self.eta_h)?;
        check((0.0..=1.0).contains(&self.eta_total), "eta_total", self.eta_total)?;
        check((0.0..=1.0).contains(&self.transmittivity), "transmittivity", self.transmittivity)?;
        check(self.alpha.is_finite() && self.alpha >= 0.0, "alpha", self.alpha)?;
        check((0.0..1.0).contains(&self.dark_count), "dark_count", self.dark_count)?;
        Ok(())
    }

    pub fn reflectivity(&self) -> f64 {
        1.0 - self.transmittivity
    }

    /// `R_h² = 1 - η_h`.
    pub fn r_h2(&self) -> f64 {
        1.0 - self.eta_h
    }

    /// Mean photon numbers of the two thermal components.
    pub fn thermal_nbars(&self) -> (f64, f64) {
        let t2 = self.t_g * self.t_g;
        let r2t2 = self.r_h2() * t2;
        (t2 / (1.0 - t2), r2t2 / (1.0 - r2t2))
    }

    /// `(K, c)` with `ρ_h = K [ρ_th(n̄₁) - c ρ_th(n̄₂)]`.
    pub fn herald_weights(&self) -> (f64, f64) {
        let t2 = self.t_g * self.t_g;
        let r2t2 = self.r_h2() * t2;
        ((1.0 - r2t2) / (t2 * (1.0 - self.r_h2())), (1.0 - t2) / (1.0 - r2t2))
    }
}

/// Photon-number distribution of the heralded state over `dim` levels.
pub fn heralded_photon_distribution(params: &SourceParams, dim: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim {dim} < 2")));
    }
    let t2 = params.t_g * params.t_g;
    let r2 = params.r_h2();
    let pref = (1.0 - t2) * (1.0 - r2 * t2) / t2;
    let mut p = Vec::with_capacity(dim);
    let mut geometric = 0.0;
    let mut r_pow = 1.0;
    let mut t_pow = 1.0;
    for _ in 0..dim {
        // p_n = pref · T^{2n} · Σ_{k<n} R^{2k}
        p.push(pref * t_pow * geometric);
        geometric += r_pow;
        r_pow *= r2;
        t_pow *= t2;
    }
    let tail = 1.0 - p.iter().sum::<f64>();
    if tail > tol::TAIL {
        return Err(Error::Truncation(format!("heralded tail {tail:.2e} beyond {dim} levels")));
    }
    let total: f64 = p.iter().sum();
    Ok(p.into_iter().map(|x| x / total).collect())
}

/// Smallest dimension whose heralded tail is below the truncation tolerance.
pub fn heralded_dim(params: &SourceParams) -> Result<usize> {
    (2..200)
        .find(|&d| heralded_photon_distribution(params, d).is_ok())
        .ok_or_else(|| Error::Truncation("heralded state needs more than 200 levels".into()))
}

pub fn heralded_state(params: &SourceParams, dim: usize) -> Result<DensityMatrix> {
    let p = heralded_photon_distribution(params, dim)?;
    DensityMatrix::from_diagonal(FockSpace::new(vec![dim])?, &p)
}

/// Both detectors silent for a thermal input of mean `nbar`, attenuated by
/// `eta`, split on `r : t`, displaced by `alpha_a`, `alpha_b`.
pub fn thermal_no_click_pair(nbar: f64, eta: f64, r: f64, t: f64, alpha_a: f64, alpha_b: f64, dark: f64) -> f64 {
    let m = nbar * eta;
    let s = r.sqrt() * alpha_a + t.sqrt() * alpha_b;
    (1.0 - dark).powi(2) * (-(alpha_a * alpha_a + alpha_b * alpha_b) + m / (1.0 + m) * s * s).exp() / (1.0 + m)
}

/// One detector silent for a thermal input whose arm carries `fraction` of it.
pub fn thermal_no_click_single(nbar: f64, eta: f64, fraction: f64, alpha: f64, dark: f64) -> f64 {
    let m = 1.0 + nbar * eta * fraction;
    (1.0 - dark) * (-alpha * alpha / m).exp() / m
}

/// `P_00^α` for a thermal input with both arms displaced by `params.alpha`.
pub fn p00_alpha(params: &SourceParams, nbar: f64) -> Result<f64> {
    params.validate()?;
    check_nbar(nbar)?;
    let a = params.alpha;
    Ok(thermal_no_click_pair(nbar, params.eta_total, params.reflectivity(), params.transmittivity, a, a, params.dark_count))
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidParameter(format!("mean photon number {nbar} must be >= 0")));
    }
    Ok(())
}

fn thermal_correlator_at(params: &SourceParams, nbar: f64, alpha: f64) -> f64 {
    let (eta, d) = (params.eta_total, params.dark_count);
    let (r, t) = (params.reflectivity(), params.transmittivity);
    1.0 + 4.0 * thermal_no_click_pair(nbar, eta, r, t, alpha, alpha, d)
        - 2.0 * thermal_no_click_single(nbar, eta, r, alpha, d)
        - 2.0 * thermal_no_click_single(nbar, eta, t, alpha, d)
}

/// `Tr(ρ_th(n̄) Sα ⊗ Sα) = P00 + Pcc - P0c - Pc0` at `params.alpha`.
pub fn thermal_correlator(params: &SourceParams, nbar: f64) -> Result<f64> {
    params.validate()?;
    check_nbar(nbar)?;
    Ok(thermal_correlator_at(params, nbar, params.alpha))
}

fn heralded_combination(params: &SourceParams, f: impl Fn(f64) -> f64) -> f64 {
    let (n1, n2) = params.thermal_nbars();
    let (k, c) = params.herald_weights();
    k * (f(n1) - c * f(n2))
}

/// Correlator of the heralded state at displacement `alpha` on both arms.
pub fn heralded_correlator_at(params: &SourceParams, alpha: f64) -> Result<f64> {
    params.validate()?;
    Ok(heralded_combination(params, |n| thermal_correlator_at(params, n, alpha)))
}

pub fn heralded_correlator(params: &SourceParams) -> Result<f64> {
    heralded_correlator_at(params, params.alpha)
}

/// Predicted two-mode witness `2 E(α) - E(0)` (bipartite normalization).
pub fn model_witness_value(params: &SourceParams) -> Result<f64> {
    Ok(2.0 * heralded_correlator_at(params, params.alpha)? - heralded_correlator_at(params, 0.0)?)
}

/// Closed-form two-mode click table of the heralded state.
pub fn model_click_table(params: &SourceParams, displaced: bool) -> Result<ClickTable> {
    params.validate()?;
    let a = if displaced { params.alpha } else { 0.0 };
    let (eta, d) = (params.eta_total, params.dark_count);
    let (r, t) = (params.reflectivity(), params.transmittivity);
    let p00 = heralded_combination(params, |n| thermal_no_click_pair(n, eta, r, t, a, a, d));
    let pa0 = heralded_combination(params, |n| thermal_no_click_single(n, eta, r, a, d));
    let pb0 = heralded_combination(params, |n| thermal_no_click_single(n, eta, t, a, d));
    let probs = vec![p00, pb0 - p00, pa0 - p00, 1.0 - pa0 - pb0 + p00];
    ClickTable::new(2, probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect())
}

/// Binomial thinning of a photon-number distribution by transmission `t`.
pub fn thinned_distribution(p_n: &[f64], t: f64) -> Vec<f64> {
    let mut out = vec![0.0; p_n.len()];
    for (n, &p) in p_n.iter().enumerate() {
        let mut binom = 1.0;
        for k in 0..=n {
            out[k] += p * binom * t.powi(k as i32) * (1.0 - t).powi((n - k) as i32);
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
    }
    out
}

/// Probability that both detectors behind a 50/50 splitter click.
pub fn coincidence_probability(p_n: &[f64], dark: f64) -> f64 {
    let q = 1.0 - dark;
    p_n.iter()
        .enumerate()
        .map(|(n, p)| {
            let both_silent = if n == 0 { q * q } else { 0.0 };
            p * (1.0 - 2.0 * q * 0.5f64.powi(n as i32) + both_silent)
        })
        .sum()
}

/// Coincidence bounds of the two arms predicted by the model.
pub fn model_coincidence(params: &SourceParams) -> Result<[f64; 2]> {
    let p = heralded_photon_distribution(params, heralded_dim(params)?)?;
    let arm = |f: f64| coincidence_probability(&thinned_distribution(&p, params.eta_total * f), params.dark_count);
    Ok([arm(params.reflectivity()), arm(params.transmittivity)])
}

/// Two-mode statistics predicted by the model; `pc` overrides the coincidence bounds.
pub fn model_click_stats(params: &SourceParams, pc: Option<[f64; 2]>) -> Result<ClickStats> {
    let pc = match pc {
        Some(pc) => pc,
        None => model_coincidence(params)?,
    };
    ClickStats::new(
        model_click_table(params, false)?,
        [((0, 1), model_click_table(params, true)?)],
        pc.to_vec(),
    )
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub witness: f64,
    pub bound: BoundResult,
    pub margin: f64,
    pub stats: ClickStats,
}

/// Two-mode witness, analytic bound and margin predicted by the model.
pub fn bipartite_prediction(params: &SourceParams, pc: Option<[f64; 2]>) -> Result<Prediction> {
    let stats = model_click_stats(params, pc)?;
    let spec = WitnessSpec::new(2, params.alpha, Variant::Bipartite)?;
    let z = witness::witness_from_counts(&stats, &spec)?;
    let bound = bounds::bipartite_bound_from_counts(&stats, params.alpha)?;
    let margin = bounds::margin(z, spec.normalization(), &bound)?;
    Ok(Prediction { witness: z, bound, margin, stats })
}

/// Kraus operators `A_k = Σ_n √(C(n,k) η^{n-k} (1-η)^k) |n-k><n|` of pure loss.
pub fn loss_kraus(eta: f64, dim: usize) -> Vec<CMatrix> {
    (0..dim)
        .map(|k| {
            let mut a = CMatrix::zeros(dim, dim);
            for n in k..dim {
                let c = binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
                a[(n - k, n)] = ONE * c.sqrt();
            }
            a
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("loss transmission {eta} outside [0, 1]")));
    }
    Ok(())
}

/// Single-mode loss: mix with vacuum on a splitter of transmittivity `eta`
/// and keep the transmitted port.
pub fn loss_channel(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    if rho.space().n_modes() != 1 {
        return Err(Error::InvalidArgument("loss_channel acts on single-mode states; use loss_on_mode".into()));
    }
    let d = rho.space().dims()[0];
    let vac = DensityMatrix::from_diagonal(FockSpace::new(vec![d])?, &unit(d, 0))?;
    let joint = rho.product(&vac)?;
    let u = fock::beam_splitter(eta, d, d)?;
    fock::partial_trace(&joint.evolve(&u)?, &[1])
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

/// Pure loss on one mode of a multi-mode state, applied through its Kraus form.
pub fn loss_on_mode(rho: &DensityMatrix, mode: usize, eta: f64) -> Result<DensityMatrix> {
    check_eta(eta)?;
    let space = rho.space().clone();
    if mode >= space.n_modes() {
        return Err(Error::InvalidArgument(format!("mode {mode} out of range")));
    }
    if eta == 1.0 {
        return Ok(rho.clone());
    }
    let d = space.dims()[mode];
    let stride: usize = space.dims()[..mode].iter().product();
    // amp[n][k] = √(C(n,k) η^{n-k} (1-η)^k)
    let amp: Vec<Vec<f64>> = (0..d)
        .map(|n| {
            (0..=n)
                .map(|k| (binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt())
                .collect()
        })
        .collect();
    let dim = space.total_dim();
    let occ: Vec<usize> = (0..dim).map(|i| (i / stride) % d).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            let v = rho.matrix()[(r, c)];
            if v == ZERO {
                continue;
            }
            let (nr, nc) = (occ[r], occ[c]);
            for k in 0..=nr.min(nc) {
                out[(r - k * stride, c - k * stride)] += v * (amp[nr][k] * amp[nc][k]);
            }
        }
    }
    DensityMatrix::from_positive(space, out)
}

/// Largest deviation from `U D_a(α) = D_a(α√(1-η)) D_b(α√η) U`, with `U` the
/// loss splitter of transmittivity `η`, over input columns `|k⟩_a|0⟩_b`, `k <= max_input`.
pub fn displacement_loss_deviation(alpha: f64, eta: f64, dim: usize, max_input: usize) -> Result<f64> {
    check_eta(eta)?;
    if max_input >= dim {
        return Err(Error::InvalidArgument(format!("input photon number {max_input} not below dim {dim}")));
    }
    let space = FockSpace::new(vec![dim, dim])?;
    let u = fock::beam_splitter(eta, dim, dim)?;
    let d = |a: f64| fock::displacement_operator(Complex64::new(a, 0.0), dim);
    let before = d(alpha)?.embed(&space, &[0])?;
    let after = fock::tensor(&[d(alpha * (1.0 - eta).sqrt())?, d(alpha * eta.sqrt())?])?;
    let lhs = u.compose(&before)?;
    let rhs = after.compose(&u)?;
    let mut dev: f64 = 0.0;
    for k in 0..=max_input {
        let c = space.index(&[k, 0]);
        for r in 0..space.total_dim() {
            dev = dev.max((lhs.matrix()[(r, c)] - rhs.matrix()[(r, c)]).norm());
        }
    }
    Ok(dev)
}

/// Spread a single-mode state over `fractions.len()` modes with a splitter
/// cascade, then attenuate every arm by `arm_transmission`.
///
/// Mode `i` receives `fractions[i]` of the input intensity. The result keeps
/// the input dimension on every mode, which holds all photons exactly.
pub fn split_state(input: &DensityMatrix, fractions: &[f64], arm_transmission: f64) -> Result<DensityMatrix> {
    check_eta(arm_transmission)?;
    if input.space().n_modes() != 1 {
        return Err(Error::InvalidArgument("split_state needs a single-mode input".into()));
    }
    if fractions.len() < 2 || fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::InvalidParameter(format!("bad splitting fractions {fractions:?}")));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("fractions {fractions:?} do not sum to 1")));
    }
    let n = fractions.len();
    let d = input.space().dims()[0];
    let mut state = input.clone();
    for _ in 1..n {
        state = state.product(&DensityMatrix::from_diagonal(FockSpace::new(vec![d])?, &unit(d, 0))?)?;
    }
    let space = state.space().clone();
    let mut remaining = 1.0;
    for i in 0..n - 1 {
        let t = if remaining > 0.0 { (1.0 - fractions[i] / remaining).clamp(0.0, 1.0) } else { 0.0 };
        let u = fock::beam_splitter(t, d, d)?.embed(&space, &[i, i + 1])?;
        state = state.evolve(&u)?;
        remaining -= fractions[i];
    }
    for m in 0..n {
        state = loss_on_mode(&state, m, arm_transmission)?;
    }
    Ok(state)
}

/// Click statistics of a state: the undisplaced table and one table per
/// displaced pair, all detectors sharing `dark`.
///
/// Displacements are real. For phase-sensitive inputs the witness bounds
/// apply to [`DensityMatrix::phase_averaged`] states.
pub fn fock_click_stats(rho: &DensityMatrix, alpha: f64, dark: f64, pc: Vec<f64>) -> Result<ClickStats> {
    let n = rho.space().n_modes();
    let off = MeasurementSetting::with_dark_count(ZERO, 1.0, dark)?;
    let on = MeasurementSetting::with_dark_count(Complex64::new(alpha, 0.0), 1.0, dark)?;
    let undisplaced = witness::click_table(rho, &vec![off; n])?;
    let mut displaced = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut s = vec![off; n];
            s[i] = on;
            s[j] = on;
            displaced.push(((i, j), witness::click_table(rho, &s)?));
        }
    }
    ClickStats::new(undisplaced, displaced, pc)
}

/// Exact coincidence probability of every mode of a state.
pub fn state_coincidences(rho: &DensityMatrix, dark: f64) -> Result<Vec<f64>> {
    (0..rho.space().n_modes())
        .map(|m| Ok(coincidence_probability(&rho.photon_distribution(m)?, dark)))
        .collect()
}

/// Three-arm experiment: heralded photon, splitter cascade with the given
/// intensity fractions, equal per-arm transmission, analytic genuine bound.
pub fn tripartite_prediction(params: &SourceParams, fractions: &[f64], arm_transmission: f64) -> Result<Prediction> {
    if fractions.len() != 3 {
        return Err(Error::InvalidParameter("the three-arm prediction needs three fractions".into()));
    }
    let dim = heralded_dim(params)?;
    let rho = split_state(&heralded_state(params, dim)?, fractions, arm_transmission)?;
    let pc = state_coincidences(&rho, params.dark_count)?;
    let detect_dim = dim.min(4);
    let small = rho.compress(&[detect_dim; 3])?;
    let stats = fock_click_stats(&small, params.alpha, params.dark_count, pc)?;
    let spec = WitnessSpec::new(3, params.alpha, Variant::Tripartite)?;
    let z = witness::witness_from_counts(&stats, &spec)?;
    let bound = bounds::tripartite_bound_from_counts(&stats, params.alpha)?;
    let margin = bounds::margin(z, spec.normalization(), &bound)?;
    Ok(Prediction { witness: z, bound, margin, stats })
}

/// Ideal `W_3` click statistics at displacement `alpha`.
pub fn ideal_w3_stats(alpha: f64) -> Result<ClickStats> {
    let w = witness::w_state(3, &[2, 2, 2])?;
    fock_click_stats(&w, alpha, 0.0, vec![0.0; 3])
}
