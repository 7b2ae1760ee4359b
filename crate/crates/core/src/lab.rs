//! Perturbation experiments: random ε-close systems, semicontinuity
//! probes of the pressure, dimension sweeps, the worked example with
//! a persistent dimension gap, and the positive-measure experiment.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_indexed, Budget};
use crate::export::{fmt_bool, fmt_num};
use crate::ifs::{attractor_cover_with, cplifs_distance, generated_self_similar, validate, Cplifs};
use crate::markov::{spectral_radius, DiagramCaps, MarkovModel, DEFAULT_RADIUS_TOL};
use crate::number::Number;
use crate::orbit::{exact_overlap_search_with, orbit_graph_of, periodic_flags, OrbitCaps, OverlapOptions};
use crate::pressure::{
    lebesgue_upper_estimate_with, moran_dimension, natural_dimension_direct_with, CylinderLengths, DimensionResult, Method,
};
use crate::{systems, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PerturbMode {
    /// Uniform random perturbation of the selected parameter families.
    Uniform { translations: bool, breakpoints: bool, slopes: bool },
    /// Add exactly `delta` to the offsets of the listed maps (0-based).
    Offset { maps: Vec<usize> },
}

impl PerturbMode {
    pub fn translations() -> Self {
        PerturbMode::Uniform { translations: true, breakpoints: false, slopes: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub mode: PerturbMode,
    pub seed: u64,
    pub trials: usize,
}

impl PerturbationSpec {
    pub fn new(delta: f64, mode: PerturbMode, seed: u64, trials: usize) -> Self {
        PerturbationSpec { delta, mode, seed, trials }
    }
}

const MAX_ATTEMPTS: usize = 100;

/// Perturbed copy of `f` for one trial.
///
/// In uniform mode a direction is drawn once per `(seed, trial)`: offsets
/// move by `δ·u`, breakpoints by `δ·u`, slopes are multiplied by `exp(δ·u)`
/// with `u ∈ [-1, 1]`. The amplitude shrinks by 0.8 per rejected attempt
/// until the result is valid and within `δ` of `f`.
pub fn perturb(f: &Cplifs, spec: &PerturbationSpec, trial: u64) -> Result<Cplifs> {
    if !(spec.delta >= 0.0 && spec.delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be finite and >= 0, got {}", spec.delta)));
    }
    if spec.delta == 0.0 {
        return Ok(f.clone());
    }
    let raw = f.raw();
    let (translations, breakpoints, slopes) = match &spec.mode {
        PerturbMode::Offset { maps } => {
            let mut raw = raw;
            for &k in maps {
                let map = raw.get_mut(k).ok_or_else(|| Error::InvalidArgument(format!("no map {}", k + 1)))?;
                map.offset = Number::from_f64(map.offset.value() + spec.delta);
            }
            return validate(&raw);
        }
        PerturbMode::Uniform { translations, breakpoints, slopes } => (*translations, *breakpoints, *slopes),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial);
    let mut draw = |on: bool, count: usize| -> Vec<f64> {
        (0..count).map(|_| if on { rng.gen_range(-1.0..=1.0) } else { 0.0 }).collect()
    };
    let dirs: Vec<(f64, Vec<f64>, Vec<f64>)> = raw
        .iter()
        .map(|m| (draw(translations, 1)[0], draw(breakpoints, m.breakpoints.len()), draw(slopes, m.slopes.len())))
        .collect();

    let mut amp = spec.delta;
    for _ in 0..MAX_ATTEMPTS {
        let mut cand = raw.clone();
        for (m, (dt, db, ds)) in cand.iter_mut().zip(&dirs) {
            m.offset = Number::from_f64(m.offset.value() + amp * dt);
            for (b, u) in m.breakpoints.iter_mut().zip(db) {
                if *u != 0.0 {
                    *b = Number::from_f64(b.value() + amp * u);
                }
            }
            for (r, u) in m.slopes.iter_mut().zip(ds) {
                if *u != 0.0 {
                    *r = Number::from_f64(r.value() * (amp * u).exp());
                }
            }
        }
        if let Ok(g) = validate(&cand) {
            if cplifs_distance(f, &g).is_ok_and(|d| d.epsilon <= spec.delta) {
                return Ok(g);
            }
        }
        amp *= 0.8;
    }
    Err(Error::InfeasiblePerturbation { attempts: MAX_ATTEMPTS })
}

/// Settings shared by the experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabSettings {
    pub tol: f64,
    /// Depth of the direct fallback.
    pub depth: usize,
    pub caps: DiagramCaps,
    pub orbit_depth: usize,
    pub overlap_depth: usize,
    pub budget: Budget,
}

impl Default for LabSettings {
    fn default() -> Self {
        LabSettings {
            tol: 1e-6,
            depth: 12,
            caps: DiagramCaps { max_level: 20, max_nodes: 10_000 },
            orbit_depth: 12,
            overlap_depth: 6,
            budget: Budget::default(),
        }
    }
}

/// Pressure of one system: diagram radius when the diagram closes, direct
/// cylinder sums otherwise.
pub struct PressureOracle {
    model: MarkovModel,
    lengths: Option<CylinderLengths>,
}

impl PressureOracle {
    pub fn new(f: &Cplifs, settings: &LabSettings) -> Result<Self> {
        let model = MarkovModel::build_with(f, &[], settings.caps, settings.budget.exec)?;
        let lengths = if model.diagram.closed() { None } else { Some(CylinderLengths::compute(f, settings.depth, &settings.budget)?) };
        Ok(PressureOracle { model, lengths })
    }

    pub fn method(&self) -> Method {
        if self.lengths.is_some() {
            Method::Direct
        } else {
            Method::Markov
        }
    }

    pub fn pressure(&self, s: f64) -> Result<f64> {
        match &self.lengths {
            Some(l) => Ok(l.pressure(s)),
            None => self.model.pressure(s),
        }
    }

    pub fn model(&self) -> &MarkovModel {
        &self.model
    }
}

/// Natural dimension by the diagram when it closes, else by direct sums.
pub fn best_dimension(f: &Cplifs, settings: &LabSettings) -> Result<DimensionResult> {
    let model = MarkovModel::build_with(f, &[], settings.caps, settings.budget.exec)?;
    if model.diagram.closed() {
        model.dimension(settings.tol)
    } else {
        natural_dimension_direct_with(f, settings.depth, settings.tol, &settings.budget)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemicontinuityRow {
    pub s: f64,
    pub phi: f64,
    pub phi_hat: f64,
    pub log_rho_g: f64,
    /// `Φ(s) - band < Φ̂(s)`.
    pub lower_ok: bool,
    /// `Φ̂(s) < max{Φ(s), log ϱ(G(s))} + band`.
    pub upper_ok: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemicontinuityReport {
    pub band: f64,
    pub rows: Vec<SemicontinuityRow>,
}

impl SemicontinuityReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !(r.lower_ok && r.upper_ok)).count()
    }

    pub fn upper_violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.upper_ok).count()
    }
}

pub const BAND: f64 = 0.05;

pub fn semicontinuity_check(f: &Cplifs, fhat: &Cplifs, s_grid: &[f64], settings: &LabSettings) -> Result<SemicontinuityReport> {
    let base = PressureOracle::new(f, settings)?;
    let hat = PressureOracle::new(fhat, settings)?;
    let m = base.model();
    let g = orbit_graph_of(&m.dynamics, &m.partition, OrbitCaps { depth: settings.orbit_depth, ..Default::default() });
    let gm = g.matrix();
    let rows = s_grid
        .iter()
        .map(|&s| {
            let phi = base.pressure(s)?;
            let phi_hat = hat.pressure(s)?;
            let log_rho_g = spectral_radius(&gm.materialize(s), DEFAULT_RADIUS_TOL)?.ln();
            Ok(SemicontinuityRow {
                s,
                phi,
                phi_hat,
                log_rho_g,
                lower_ok: phi - BAND < phi_hat,
                upper_ok: phi_hat < phi.max(log_rho_g) + BAND,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SemicontinuityReport { band: BAND, rows })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub trial: usize,
    pub s_base: f64,
    pub s_hat: f64,
    pub gap: f64,
    pub overlap_flag: bool,
    pub periodic_flag: bool,
    pub method_base: Method,
    pub method_hat: Method,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "delta,trial,s_base,s_hat,gap,overlap_flag,periodic_flag,method_base,method_hat";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            fmt_num(self.delta),
            self.trial,
            fmt_num(self.s_base),
            fmt_num(self.s_hat),
            fmt_num(self.gap),
            fmt_bool(self.overlap_flag),
            fmt_bool(self.periodic_flag),
            self.method_base.as_str(),
            self.method_hat.as_str()
        )
    }
}

/// Diagnostic flags for one system.
fn flags(f: &Cplifs, settings: &LabSettings) -> Result<(bool, bool)> {
    let opts = OverlapOptions { budget: settings.budget, ..Default::default() };
    let overlap = exact_overlap_search_with(&generated_self_similar(f), settings.overlap_depth, &opts)?.has_overlap();
    let model = MarkovModel::build_with(f, &[], DiagramCaps { max_level: 0, max_nodes: 1 }, settings.budget.exec)?;
    let g = orbit_graph_of(&model.dynamics, &model.partition, OrbitCaps { depth: settings.orbit_depth, ..Default::default() });
    let periodic = !periodic_flags(f, &model.dynamics, &g, settings.orbit_depth).is_empty();
    Ok((overlap, periodic))
}

/// Dimension gap between `f` and its perturbations for every delta and
/// trial. Rows are ordered by delta, then trial. Trials with no feasible
/// perturbation are skipped and counted in the second return value.
pub fn continuity_sweep(
    f: &Cplifs,
    deltas: &[f64],
    template: &PerturbationSpec,
    settings: &LabSettings,
) -> Result<(Vec<SweepRow>, usize)> {
    let base = best_dimension(f, settings)?;
    let trials = template.trials;
    let jobs = deltas.len() * trials;
    let results = map_indexed(settings.budget.exec, jobs, |job| -> Result<Option<SweepRow>> {
        let (di, trial) = (job / trials, job % trials);
        let spec = PerturbationSpec { delta: deltas[di], ..template.clone() };
        let fhat = match perturb(f, &spec, trial as u64) {
            Ok(g) => g,
            Err(Error::InfeasiblePerturbation { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let hat = best_dimension(&fhat, settings)?;
        let (overlap_flag, periodic_flag) = flags(&fhat, settings)?;
        Ok(Some(SweepRow {
            delta: spec.delta,
            trial,
            s_base: base.value,
            s_hat: hat.value,
            gap: (base.value - hat.value).abs(),
            overlap_flag,
            periodic_flag,
            method_base: base.method,
            method_hat: hat.method,
        }))
    });
    let mut rows = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r? {
            Some(row) => rows.push(row),
            None => skipped += 1,
        }
    }
    Ok((rows, skipped))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SweepRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Closed form of the level-`n` cylinder length of the worked example,
/// where `k` counts the letters equal to the kinked map.
pub fn example_5_1_length(n: usize, k: usize) -> f64 {
    (1.0_f64 / 3.0).powi((n - k) as i32) * (2f64.powi(k as i32) + 1.0) / (2.0 * 5f64.powi(k as i32))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormulaRow {
    pub n: usize,
    pub words_checked: usize,
    pub max_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapRow {
    pub eps: f64,
    pub s_hat_direct: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Example51Report {
    pub eps: f64,
    pub n_max: usize,
    pub formula: Vec<FormulaRow>,
    /// Length of the first-level cylinder of map 1 if `k` counted the
    /// other letter instead (it should be 3/10).
    pub other_convention_len: f64,
    pub s_moran: f64,
    pub s_nat: f64,
    pub s_nat_direct: f64,
    pub gaps: Vec<GapRow>,
    pub agreement_ok: bool,
    pub gap_persists: bool,
}

pub const EXAMPLE_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

pub fn example_5_1(eps: f64, n_max: usize) -> Result<Example51Report> {
    example_5_1_with(eps, n_max, &Budget::default())
}

pub fn example_5_1_with(eps: f64, n_max: usize, budget: &Budget) -> Result<Example51Report> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1/10), got {eps}")));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("nmax must be at least 1".into()));
    }
    let f = systems::example_5_1()?;
    let mut formula = Vec::new();
    for n in 1..=n_max {
        let cover = attractor_cover_with(&f, n, budget)?;
        let mut max_rel_err = 0.0_f64;
        for (idx, j) in cover.iter().enumerate() {
            let word: Vec<usize> = (0..n).rev().map(|p| (idx >> p) & 1).collect();
            let k = word.iter().filter(|&&c| c == 0).count();
            let want = example_5_1_length(n, k);
            let rel = (j.len() - want).abs() / want;
            if rel > 1e-12 {
                return Err(Error::FormulaMismatch { word: word.iter().map(|c| c + 1).collect(), rel_err: rel });
            }
            max_rel_err = max_rel_err.max(rel);
        }
        formula.push(FormulaRow { n, words_checked: cover.len(), max_rel_err });
    }

    let s_moran = moran_dimension(&[1.0 / 3.0, 1.0 / 5.0])?;
    let settings = LabSettings { budget: *budget, ..Default::default() };
    let s_nat = best_dimension(&f, &settings)?.value;
    let s_nat_direct = natural_dimension_direct_with(&f, n_max, 1e-9, budget)?.value;

    let mut eps_list = vec![eps];
    eps_list.extend(EXAMPLE_EPS.iter().filter(|&&e| e != eps));
    let gaps = eps_list
        .iter()
        .map(|&e| {
            let hat = systems::example_5_1_perturbed(e)?;
            let s = natural_dimension_direct_with(&hat, n_max, 1e-9, budget)?.value;
            Ok(GapRow { eps: e, s_hat_direct: s, gap: s_nat - s })
        })
        .collect::<Result<Vec<_>>>()?;
    let agreement_ok = gaps.iter().all(|g| (g.s_hat_direct - s_moran).abs() <= 2e-3);
    let lo = gaps.iter().map(|g| g.gap).fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().map(|g| g.gap).fold(f64::NEG_INFINITY, f64::max);
    let gap_persists = lo > 0.0 && hi - lo <= 2e-3;

    Ok(Example51Report {
        eps,
        n_max,
        formula,
        other_convention_len: example_5_1_length(1, 0),
        s_moran,
        s_nat,
        s_nat_direct,
        gaps,
        agreement_ok,
        gap_persists,
    })
}

impl Example51Report {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "worked example: f1 = 2x/5 (x<0), x/5 (x>=0); f2 = x/3; perturbation f2 + eps");
        let _ = writeln!(out, "eps = {}, nmax = {}", fmt_num(self.eps), self.n_max);
        let words: usize = self.formula.iter().map(|r| r.words_checked).sum();
        let worst = self.formula.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
        let _ = writeln!(out, "cylinder formula: {words} words checked, max relative error {worst:e}");
        let _ = writeln!(
            out,
            "index convention: k counts occurrences of map 1; counting map 2 instead gives |I_1| = {} but enumeration gives 0.3",
            fmt_num(self.other_convention_len)
        );
        let _ = writeln!(out, "moran root of 3^-s + 5^-s = 1: {}", fmt_num(self.s_moran));
        let _ = writeln!(out, "s_nat (markov): {}", fmt_num(self.s_nat));
        let _ = writeln!(out, "s_nat (direct, n = {}): {}", self.n_max, fmt_num(self.s_nat_direct));
        for g in &self.gaps {
            let _ = writeln!(out, "eps = {}: s_hat (direct) = {}, gap = {}", fmt_num(g.eps), fmt_num(g.s_hat_direct), fmt_num(g.gap));
        }
        let _ = writeln!(out, "moran/direct agreement within 2e-3: {}", if self.agreement_ok { "yes" } else { "no" });
        let _ = writeln!(out, "{}", if self.gap_persists { "GAP-PERSISTS" } else { "GAP-NOT-CONSTANT" });
        out
    }

    pub const CSV_HEADER: &'static str = "n,word_count_checked,max_rel_err";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.formula {
            let _ = writeln!(out, "{},{},{:e}", r.n, r.words_checked, r.max_rel_err);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureVerdict {
    Plateau,
    Decay,
    Inconclusive,
}

impl MeasureVerdict {
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio > 0.8 {
            MeasureVerdict::Plateau
        } else if ratio < 0.4 {
            MeasureVerdict::Decay
        } else {
            MeasureVerdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureVerdict::Plateau => "plateau",
            MeasureVerdict::Decay => "decay",
            MeasureVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LebesgueRow {
    pub trial: usize,
    pub s_hat: f64,
    /// `(depth, union length)` at `n`, `n + 2`, `n + 4`.
    pub estimates: Vec<(usize, f64)>,
    pub verdict: MeasureVerdict,
}

impl LebesgueRow {
    pub const CSV_HEADER: &'static str = "trial,s_hat,depth,estimate,verdict";
}

/// For each trial: the dimension estimate of the perturbed system and the
/// covered length at depths `n`, `n + 2`, `n + 4`.
pub fn lebesgue_positivity_experiment(f: &Cplifs, spec: &PerturbationSpec, n: usize, settings: &LabSettings) -> Result<Vec<LebesgueRow>> {
    let trials = spec.trials.max(1);
    let rows = map_indexed(settings.budget.exec, trials, |trial| -> Result<LebesgueRow> {
        let fhat = perturb(f, spec, trial as u64)?;
        let s_hat = natural_dimension_direct_with(&fhat, settings.depth, settings.tol, &settings.budget)?.value;
        let estimates = [n, n + 2, n + 4]
            .iter()
            .map(|&d| Ok((d, lebesgue_upper_estimate_with(&fhat, d, &settings.budget)?)))
            .collect::<Result<Vec<_>>>()?;
        let ratio = if estimates[0].1 > 0.0 { estimates[2].1 / estimates[0].1 } else { 0.0 };
        Ok(LebesgueRow { trial, s_hat, estimates, verdict: MeasureVerdict::from_ratio(ratio) })
    });
    rows.into_iter().collect()
}

pub fn lebesgue_csv(rows: &[LebesgueRow]) -> String {
    let mut out = String::from(LebesgueRow::CSV_HEADER);
    out.push('\n');
    for r in rows {
        for (d, e) in &r.estimates {
            let _ = writeln!(out, "{},{},{},{},{}", r.trial, fmt_num(r.s_hat), d, fmt_num(*e), r.verdict.as_str());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_is_identity() {
        let f = systems::kinked_separated().unwrap();
        let spec = PerturbationSpec::new(0.0, PerturbMode::translations(), 1, 1);
        assert_eq!(perturb(&f, &spec, 0).unwrap(), f);
    }

    #[test]
    fn perturbation_is_deterministic_and_close() {
        let f = systems::kinked_separated().unwrap();
        let mode = PerturbMode::Uniform { translations: true, breakpoints: true, slopes: true };
        let spec = PerturbationSpec::new(1e-3, mode, 42, 1);
        let a = perturb(&f, &spec, 3).unwrap();
        assert_eq!(a, perturb(&f, &spec, 3).unwrap());
        assert_ne!(a, perturb(&f, &spec, 4).unwrap());
        assert!(cplifs_distance(&f, &a).unwrap().epsilon <= 1e-3);
        assert_eq!(a.type_vector(), f.type_vector());
    }

    #[test]
    fn offset_mode_reproduces_worked_perturbation() {
        let f = systems::example_5_1().unwrap();
        let spec = PerturbationSpec::new(0.01, PerturbMode::Offset { maps: vec![1] }, 0, 1);
        let g = perturb(&f, &spec, 0).unwrap();
        assert_eq!(g.maps()[1].offset(), 0.01);
        assert_eq!(g.maps()[0], f.maps()[0]);
    }

    #[test]
    fn length_formula_small_words() {
        assert!((example_5_1_length(1, 1) - 0.3).abs() < 1e-15);
        assert!((example_5_1_length(1, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((example_5_1_length(2, 2) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn worked_example_report() {
        let r = example_5_1(1e-3, 8).unwrap();
        assert!(r.gap_persists && r.agreement_ok);
        assert!((r.s_moran - 0.5185).abs() < 1e-3);
        assert!(r.s_nat > r.s_moran);
        let text = r.text();
        assert!(text.contains("GAP-PERSISTS"));
        assert_eq!(r.csv().lines().count(), 9);
        assert!(example_5_1(0.5, 4).is_err());
    }

    #[test]
    fn measure_verdicts() {
        assert_eq!(MeasureVerdict::from_ratio(1.0), MeasureVerdict::Plateau);
        assert_eq!(MeasureVerdict::from_ratio(0.2), MeasureVerdict::Decay);
        assert_eq!(MeasureVerdict::from_ratio(0.6), MeasureVerdict::Inconclusive);
    }
}
