//! Sweeps, headline numbers and verdicts, driven by flat `key = value` configs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use rayon::prelude::*;

use crate::bounds::{self, Bipartition, BoundResult, QubitConstraints};
use crate::error::{Error, Result};
use crate::sdp::SolveOptions;
use crate::source::{self, SourceParams};
use crate::tol;
use crate::witness::{self, ClickStats, ClickTable, Variant, WitnessSpec};

/// Parsed `key = value` file. Keys are unique; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, |line, msg| Error::Config(format!("line {line}: {msg}")))
    }

    fn parse_with(text: &str, err: impl Fn(usize, String) -> Error) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected key = value, got {content:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err(line, "empty key".into()));
            }
            if entries.insert(k.to_string(), (line, v.to_string())).is_some() {
                return Err(err(line, format!("duplicate key {k:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (0, value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn bad(&self, key: &str, msg: &str) -> Error {
        let line = self.entries.get(key).map_or(0, |(l, _)| *l);
        Error::Config(format!("line {line}: {key}: {msg}"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| self.bad(key, &format!("not a number: {v:?}"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(self.bad(key, &format!("expected true or false, got {v:?}"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(key, &format!("not a count: {v:?}"))),
        }
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| self.bad(key, &format!("bad list entry {x:?}"))))
                .collect(),
        }
    }

    pub fn grid_or(&self, key: &str, default: Grid) -> Result<Grid> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => Grid::parse(v).map_err(|e| self.bad(key, &e.to_string())),
        }
    }

    /// Source parameters; `pair_probability` sets `t_g = √p` unless `t_g` is given.
    pub fn source_params(&self) -> Result<SourceParams> {
        let d = SourceParams::default();
        let t_g = match (self.get("t_g"), self.get("pair_probability")) {
            (Some(_), _) => self.f64_or("t_g", d.t_g)?,
            (None, Some(_)) => self.f64_or("pair_probability", 0.0)?.sqrt(),
            (None, None) => d.t_g,
        };
        let p = SourceParams {
            t_g,
            eta_h: self.f64_or("eta_h", d.eta_h)?,
            eta_total: self.f64_or("eta_total", d.eta_total)?,
            transmittivity: self.f64_or("transmittivity", d.transmittivity)?,
            alpha: self.f64_or("alpha", d.alpha)?,
            dark_count: self.f64_or("dark_count", d.dark_count)?,
        };
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    /// Coincidence bound override: a number for both arms, or `model`.
    pub fn pc_override(&self) -> Result<Option<[f64; 2]>> {
        match self.get("pc") {
            None | Some("model") => Ok(None),
            Some(_) => {
                let pc = self.f64_or("pc", 0.0)?;
                if !(0.0..=0.5).contains(&pc) {
                    return Err(self.bad("pc", "must lie in [0, 0.5]"));
                }
                Ok(Some([pc, pc]))
            }
        }
    }
}

/// Inclusive grid `lo:hi:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || hi < lo || step <= 0.0 {
            return Err(Error::Config(format!("grid {lo}:{hi}:{step} needs lo <= hi and step > 0")));
        }
        Ok(Self { lo, hi, step })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [lo, hi, step] = parts[..] else {
            return Err(Error::Config(format!("grid {s:?} is not lo:hi:step")));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| Error::Config(format!("grid entry {x:?} is not a number")));
        Self::new(num(lo)?, num(hi)?, num(step)?)
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// Numeric table rendered as CSV; NaN cells are left empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_sig(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Twelve significant digits, fixed notation for moderate exponents.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let s = format!("{:.*}", (11 - exp).max(0) as usize, x);
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{x:.11e}")
    }
}

/// Thread pool honouring `PATHWIT_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("PATHWIT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("PATHWIT_THREADS={v:?} is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

fn par_rows<F>(points: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync + Send,
{
    thread_pool()?.install(|| points.par_iter().map(|&x| f(x)).collect())
}

struct SweepSetup {
    base: SourceParams,
    pc: Option<[f64; 2]>,
    alpha_spread: f64,
    eta_spread: f64,
}

impl SweepSetup {
    fn from_config(cfg: &Config, default_eta: f64) -> Result<Self> {
        let mut c = cfg.clone();
        if c.get("eta_total").is_none() {
            c.set("eta_total", default_eta.to_string());
        }
        Ok(Self {
            base: c.source_params()?,
            pc: c.pc_override()?,
            alpha_spread: c.f64_or("alpha_spread", 0.02)?,
            eta_spread: c.f64_or("eta_spread", 0.01)?,
        })
    }

    fn row(&self, x: f64, params: SourceParams) -> Result<Vec<f64>> {
        let p = source::bipartite_prediction(&params, self.pc)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for da in [-1.0, 0.0, 1.0] {
            for de in [-1.0, 0.0, 1.0] {
                let q = SourceParams {
                    alpha: (params.alpha + da * self.alpha_spread).max(0.0),
                    eta_total: (params.eta_total + de * self.eta_spread).clamp(0.0, 1.0),
                    ..params
                };
                let m = source::bipartite_prediction(&q, self.pc)?.margin;
                lo = lo.min(m);
                hi = hi.max(m);
            }
        }
        Ok(vec![x, p.witness, p.bound.value, p.witness - p.bound.value, lo, hi])
    }
}

const SWEEP_HEADER: [&str; 5] = ["witness_value", "ppt_bound", "margin", "envelope_lo", "envelope_hi"];

fn sweep_header(first: &str) -> Vec<&str> {
    std::iter::once(first).chain(SWEEP_HEADER).collect()
}

/// Margin against the splitter transmittivity `T`.
pub fn run_bs_sweep(cfg: &Config) -> Result<Table> {
    let setup = SweepSetup::from_config(cfg, 0.31)?;
    let grid = cfg.grid_or("grid", Grid::new(0.0, 1.0, 0.05)?)?;
    let mut table = Table::new(&sweep_header("ratio"));
    table.rows = par_rows(&grid.points(), |t| {
        setup.row(t, SourceParams { transmittivity: t.clamp(0.0, 1.0), ..setup.base })
    })?;
    Ok(table)
}

/// Margin against the total transmission `η_t η`.
pub fn run_loss_sweep(cfg: &Config) -> Result<Table> {
    let setup = SweepSetup::from_config(cfg, 1.0)?;
    let grid = cfg.grid_or("grid", Grid::new(0.0, 1.0, 0.05)?)?;
    let mut table = Table::new(&sweep_header("eta_total"));
    table.rows = par_rows(&grid.points(), |e| {
        setup.row(e, SourceParams { eta_total: e.clamp(0.0, 1.0), ..setup.base })
    })?;
    Ok(table)
}

/// Smallest grid position where `margin` changes sign, linearly interpolated.
pub fn zero_crossing(table: &Table) -> Option<f64> {
    let x = table.rows.iter().map(|r| r[0]).collect::<Vec<_>>();
    let m = table.column("margin")?;
    (1..m.len()).find_map(|i| {
        let (a, b) = (m[i - 1], m[i]);
        ((a <= 0.0) != (b <= 0.0)).then(|| x[i - 1] + (x[i] - x[i - 1]) * a / (a - b))
    })
}

/// Golden-section maximization on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Genuine W-state margins against the number of paths, with SDP cross-checks.
pub fn run_n_scaling(cfg: &Config) -> Result<Table> {
    let lo = cfg.usize_or("n_min", 2)?;
    let hi = cfg.usize_or("n_max", 8)?;
    let sdp_max = cfg.usize_or("sdp_max_modes", 4)?.min(6);
    if lo < 2 || hi < lo {
        return Err(Error::Config(format!("mode range {lo}..{hi} needs 2 <= n_min <= n_max")));
    }
    let fixed_alpha = cfg.get("alpha").map(|_| cfg.f64_or("alpha", 0.0)).transpose()?;
    let opts = SolveOptions::default();
    let ns: Vec<f64> = (lo..=hi).map(|n| n as f64).collect();
    let mut table = Table::new(&["N", "alpha_opt", "z_w", "z_ppt_max", "margin", "sdp_margin"]);
    table.rows = par_rows(&ns, |nf| {
        let n = nf as usize;
        let alpha = match fixed_alpha {
            Some(a) => a,
            None => golden_max(|a| bounds::genuine_margin_w_analytic(n, a).unwrap_or(f64::NEG_INFINITY), 0.05, 2.0, 1e-10),
        };
        let z = witness::z_w_analytic(n, alpha);
        let margin = bounds::genuine_margin_w_analytic(n, alpha)?;
        let sdp = if n <= sdp_max {
            let b = bounds::qubit_ppt_bound_sdp(n, alpha, &Bipartition::Genuine, QubitConstraints::WStatistics, &opts)?;
            z - b.value
        } else {
            f64::NAN
        };
        Ok(vec![nf, alpha, z, z - margin, margin, sdp])
    })?;
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct TripartiteReport {
    pub ideal_alpha: f64,
    pub ideal_witness: f64,
    pub ideal_bound: f64,
    pub ideal_margin: f64,
    pub lossy: source::Prediction,
    pub zero_transmission_margin: f64,
}

impl TripartiteReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["case", "alpha", "witness_value", "ppt_bound", "margin"]);
        t.rows.push(vec![0.0, self.ideal_alpha, self.ideal_witness, self.ideal_bound, self.ideal_margin]);
        let l = &self.lossy;
        t.rows.push(vec![1.0, l.bound.alpha, l.witness, l.bound.value, l.witness - l.bound.value]);
        t
    }
}

impl fmt::Display for TripartiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ideal: alpha={:.4} z={:.6} bound={:.6} margin={:.6}",
            self.ideal_alpha, self.ideal_witness, self.ideal_bound, self.ideal_margin
        )?;
        let l = &self.lossy;
        writeln!(f, "lossy: alpha={:.4} z={:.6} bound={:.6} margin={:.6}", l.bound.alpha, l.witness, l.bound.value, l.margin)?;
        write!(f, "zero transmission: margin={:.6}", self.zero_transmission_margin)
    }
}

/// Ideal three-path margin and the matching witness and bound.
pub fn ideal_tripartite(alpha: f64) -> Result<(f64, BoundResult)> {
    let stats = source::ideal_w3_stats(alpha)?;
    let spec = WitnessSpec::new(3, alpha, Variant::Tripartite)?;
    Ok((witness::witness_from_counts(&stats, &spec)?, bounds::tripartite_bound_from_counts(&stats, alpha)?))
}

pub fn run_tripartite(cfg: &Config) -> Result<TripartiteReport> {
    let mut c = cfg.clone();
    if c.get("dark_count").is_none() {
        c.set("dark_count", "0");
    }
    let params = c.source_params()?;
    let fractions = c.list_or("fractions", &[0.5, 0.15, 0.35])?;
    let arm = c.f64_or("arm_transmission", 0.19)?;
    let grid = c.grid_or("grid", Grid::new(0.70, 0.90, 0.005)?)?;
    let ideal = thread_pool()?.install(|| {
        grid.points()
            .par_iter()
            .map(|&a| ideal_tripartite(a).map(|(z, b)| (a, z, b.value)))
            .collect::<Result<Vec<_>>>()
    })?;
    let (ideal_alpha, ideal_witness, ideal_bound) = ideal
        .into_iter()
        .fold(None, |best: Option<(f64, f64, f64)>, r| match best {
            Some(b) if b.1 - b.2 >= r.1 - r.2 => Some(b),
            _ => Some(r),
        })
        .ok_or_else(|| Error::Config("empty alpha grid".into()))?;
    let lossy = source::tripartite_prediction(&params, &fractions, arm)?;
    let zero = source::tripartite_prediction(&params, &fractions, 0.0)?;
    Ok(TripartiteReport {
        ideal_alpha,
        ideal_witness,
        ideal_bound,
        ideal_margin: ideal_witness - ideal_bound,
        lossy,
        zero_transmission_margin: zero.margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Two paths: the witness exceeds the separable bound.
    Entangled,
    /// Three paths: the witness exceeds every biseparable bound.
    GenuinelyEntangled,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Entangled => "entangled",
            Verdict::GenuinelyEntangled => "genuinely-entangled",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct VerdictReport {
    pub n_modes: usize,
    pub alpha: f64,
    pub witness: f64,
    pub bound: BoundResult,
    pub margin: f64,
    pub verdict: Verdict,
}

impl fmt::Display for VerdictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let _ = writeln!(s, "modes: {}", self.n_modes);
        let _ = writeln!(s, "alpha: {}", self.alpha);
        let _ = writeln!(s, "witness: {:.6}", self.witness);
        let _ = writeln!(s, "bound: {:.6}", self.bound.value);
        let _ = writeln!(s, "margin: {:.6}", self.margin);
        if !self.bound.valid {
            let _ = writeln!(s, "warning: alpha outside the validity range of the closed-form bound");
        }
        write!(f, "{s}verdict: {}", self.verdict)
    }
}

/// Click statistics and displacement read from a counts file.
///
/// Two paths use `P_00 … P_cc` and `P_00_disp …`; three paths use
/// `P_000 … P_ccc` and `P_xxx_dispIJ` for the displaced pair `I < J`
/// (1-based). `pc_i` and `alpha` are required.
pub fn parse_counts(text: &str) -> Result<(ClickStats, f64)> {
    let cfg = Config::parse_with(text, |line, msg| Error::Parse { line, msg })?;
    let bad = |key: &str, msg: String| {
        let line = cfg.entries.get(key).map_or(0, |(l, _)| *l);
        Error::Parse { line, msg }
    };
    let num = |key: &str| -> Result<f64> {
        let v = cfg.get(key).ok_or_else(|| Error::InvalidData(format!("missing key {key}")))?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(key, format!("{key}: not a number: {v:?}")))
    };
    for (k, (line, v)) in &cfg.entries {
        if !v.parse::<f64>().is_ok_and(f64::is_finite) {
            return Err(Error::Parse { line: *line, msg: format!("{k}: not a number: {v:?}") });
        }
    }
    let n = if cfg.get("P_000").is_some() { 3 } else { 2 };
    let labels: Vec<String> = (0..1usize << n).map(|m| ClickTable::label(n, m)).collect();
    let table = |suffix: &str| -> Result<ClickTable> {
        let probs = labels.iter().map(|l| num(&format!("P_{l}{suffix}"))).collect::<Result<Vec<_>>>()?;
        ClickTable::new(n, probs).map_err(|e| Error::InvalidData(format!("table P_*{suffix}: {e}")))
    };
    let mut known: Vec<String> = vec!["alpha".into()];
    let undisplaced = table("")?;
    let mut displaced = Vec::new();
    if n == 2 {
        displaced.push(((0, 1), table("_disp")?));
        known.extend(labels.iter().flat_map(|l| [format!("P_{l}"), format!("P_{l}_disp")]));
    } else {
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let suffix = format!("_disp{}{}", i + 1, j + 1);
            displaced.push(((i, j), table(&suffix)?));
            known.extend(labels.iter().map(|l| format!("P_{l}{suffix}")));
        }
        known.extend(labels.iter().map(|l| format!("P_{l}")));
    }
    let pc = (1..=n).map(|i| num(&format!("pc_{i}"))).collect::<Result<Vec<_>>>()?;
    known.extend((1..=n).map(|i| format!("pc_{i}")));
    if let Some(k) = cfg.keys().find(|k| !known.iter().any(|x| x == k)) {
        return Err(bad(k, format!("unknown key {k:?}")));
    }
    let alpha = num("alpha")?;
    let stats = ClickStats::new(undisplaced, displaced, pc).map_err(|e| Error::InvalidData(e.to_string()))?;
    Ok((stats, alpha))
}

pub fn verdict_from_stats(stats: &ClickStats, alpha: f64) -> Result<VerdictReport> {
    let n = stats.n_modes();
    let (spec, bound, positive) = match n {
        2 => (
            WitnessSpec::new(2, alpha, Variant::Bipartite)?,
            bounds::bipartite_bound_from_counts(stats, alpha)?,
            Verdict::Entangled,
        ),
        3 => (
            WitnessSpec::new(3, alpha, Variant::Tripartite)?,
            bounds::tripartite_bound_from_counts(stats, alpha)?,
            Verdict::GenuinelyEntangled,
        ),
        _ => return Err(Error::InvalidData(format!("verdicts need two or three paths, got {n}"))),
    };
    let z = witness::witness_from_counts(stats, &spec)?;
    let margin = bounds::margin(z, spec.normalization(), &bound)?;
    let verdict = if margin > tol::VERDICT_MARGIN { positive } else { Verdict::Inconclusive };
    Ok(VerdictReport { n_modes: n, alpha, witness: z, bound, margin, verdict })
}

pub fn run_verdict(text: &str) -> Result<VerdictReport> {
    let (stats, alpha) = parse_counts(text)?;
    verdict_from_stats(&stats, alpha)
}

/// Counts-file text for a set of statistics, readable by [`parse_counts`].
pub fn format_counts(stats: &ClickStats, alpha: f64) -> String {
    let n = stats.n_modes();
    let mut s = String::new();
    let mut emit = |t: &ClickTable, suffix: &str| {
        for m in 0..1usize << n {
            let _ = writeln!(s, "P_{}{} = {}", ClickTable::label(n, m), suffix, format_sig(t.prob(m)));
        }
    };
    emit(stats.undisplaced(), "");
    for (&(i, j), t) in stats.displaced_pairs() {
        let suffix = if n == 2 { "_disp".to_string() } else { format!("_disp{}{}", i + 1, j + 1) };
        emit(t, &suffix);
    }
    for (i, pc) in stats.pc().iter().enumerate() {
        let _ = writeln!(s, "pc_{} = {}", i + 1, format_sig(*pc));
    }
    let _ = writeln!(s, "alpha = {}", format_sig(alpha));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = Config::parse("# header\nalpha = 0.8  # trailing\n\nflag=true\n").unwrap();
        assert_eq!(c.f64_or("alpha", 0.0).unwrap(), 0.8);
        assert!(c.bool_or("flag", false).unwrap());
        assert_eq!(c.f64_or("missing", 1.5).unwrap(), 1.5);
        let e = Config::parse("alpha = 1\nnonsense\n").unwrap_err();
        assert!(e.to_string().contains("line 2"));
        assert!(Config::parse("a=1\na=2").is_err());
        let c = Config::parse("alpha = abc").unwrap();
        assert!(matches!(c.f64_or("alpha", 0.0), Err(Error::Config(_))));
    }

    #[test]
    fn grid_points() {
        assert_eq!(Grid::parse("0:1:0.25").unwrap().points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Grid::parse("0.7:0.9:0.1").unwrap().points().len(), 3);
        assert!(Grid::parse("1:0:0.1").is_err());
        assert!(Grid::parse("0:1:0").is_err());
        assert!(Grid::parse("0:1").is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(2.942439021434), "2.94243902143");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(-0.3125), "-0.3125");
        assert_eq!(format_sig(1e-7), "1.00000000000e-7");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(f64::NAN), "");
        assert_eq!(format_sig(3.0), "3");
    }

    #[test]
    fn golden_section_finds_peak() {
        let a = golden_max(|x| x * x * (-2.0 * x * x).exp(), 0.05, 2.0, 1e-10);
        assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
    }

    #[test]
    fn counts_round_trip() {
        let stats = source::ideal_w3_stats(0.83).unwrap();
        let (back, alpha) = parse_counts(&format_counts(&stats, 0.83)).unwrap();
        assert_eq!(alpha, 0.83);
        assert_eq!(back.n_modes(), 3);
        let r = verdict_from_stats(&back, alpha).unwrap();
        assert_eq!(r.verdict, Verdict::GenuinelyEntangled);
    }

    #[test]
    fn counts_errors_carry_line_numbers() {
        let e = parse_counts("P_00 = 1\nP_0c = x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_counts("P_00 = 1\ngarbage\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert_eq!(e.exit_code(), 3);
        assert!(matches!(parse_counts("P_00 = 1\n"), Err(Error::InvalidData(_))));
    }

    #[test]
    fn zero_crossing_interpolates() {
        let mut t = Table::new(&["x", "margin"]);
        t.rows = vec![vec![0.0, -1.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(zero_crossing(&t), Some(0.5));
    }
}
