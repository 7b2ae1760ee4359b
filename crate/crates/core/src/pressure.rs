//! Direct pressure from cylinder lengths, and the dimension oracles built
//! around it.
//!
//! The finite-depth pressure is
//! `Φ_n(s) = (1/n) log Σ_{|w|=n} (|I_w| / |I|)^s`.
//! Normalising by `|I|` leaves the limit unchanged and removes the
//! `(s/n) log|I|` bias at finite depth.

use crate::exec::{map_indexed, Budget, Exec};
use crate::export::fmt_num;
use crate::ifs::{attractor_cover_with, walk_cylinders, Cplifs, Interval};
use crate::{Error, Result};

/// Normalised level-`n` cylinder lengths, grouped in fixed blocks.
#[derive(Clone, Debug)]
pub struct CylinderLengths {
    pub n: usize,
    pub m: usize,
    blocks: Vec<Vec<f64>>,
    exec: Exec,
}

impl CylinderLengths {
    pub fn compute(f: &Cplifs, n: usize, budget: &Budget) -> Result<Self> {
        let base = f.support()?;
        let scale = base.len();
        let blocks = walk_cylinders(f, base, n, budget, |_, j| j.len() / scale)?;
        Ok(CylinderLengths { n, m: f.len(), blocks, exec: budget.exec })
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flatten().copied()
    }

    /// `Σ (|I_w|/|I|)^s`, summed per block and then across blocks in order.
    pub fn power_sum(&self, s: f64) -> f64 {
        let partial = map_indexed(self.exec, self.blocks.len(), |b| {
            self.blocks[b].iter().map(|&l| if l > 0.0 { l.powf(s) } else { 0.0 }).sum::<f64>()
        });
        partial.into_iter().sum()
    }

    pub fn pressure(&self, s: f64) -> f64 {
        if s == 0.0 || self.n == 0 {
            // Every word counts once at s = 0, degenerate or not.
            return if self.n == 0 { 0.0 } else { (self.m as f64).ln() };
        }
        self.power_sum(s).ln() / self.n as f64
    }
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("s must be finite and >= 0, got {s}")))
    }
}

pub fn direct_pressure(f: &Cplifs, s: f64, n: usize) -> Result<f64> {
    direct_pressure_with(f, s, n, &Budget::default())
}

pub fn direct_pressure_with(f: &Cplifs, s: f64, n: usize, budget: &Budget) -> Result<f64> {
    check_s(s)?;
    if n == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    Ok(CylinderLengths::compute(f, n, budget)?.pressure(s))
}

/// `Φ_n(s)` for each depth in `depths`, reported as a window rather than
/// a limit.
pub fn pressure_window(f: &Cplifs, s: f64, depths: impl IntoIterator<Item = usize>, budget: &Budget) -> Result<Vec<(usize, f64)>> {
    depths.into_iter().map(|n| Ok((n, direct_pressure_with(f, s, n, budget)?))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    Markov,
    Moran,
    BoxCount,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Markov => "markov",
            Method::Moran => "moran",
            Method::BoxCount => "boxcount",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "markov" => Ok(Method::Markov),
            "moran" => Ok(Method::Moran),
            "boxcount" => Ok(Method::BoxCount),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionResult {
    pub value: f64,
    pub method: Method,
    pub bracket: Interval,
    /// Depth `n` (direct, boxcount) or diagram level `r` (markov).
    pub depth: usize,
    /// Set when the value is only a lower approximant (truncated diagram).
    pub lower_bound: bool,
}

impl DimensionResult {
    pub const CSV_HEADER: &'static str = "method,value,bracket_lo,bracket_hi,depth";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.method.as_str(),
            fmt_num(self.value),
            fmt_num(self.bracket.lo),
            fmt_num(self.bracket.hi),
            self.depth
        )
    }
}

/// Initial bracket top: `Φ(s) <= log m + s log ρ_max` vanishes at `log m / -log ρ_max`.
pub fn s_upper(m: usize, rho_max: f64) -> f64 {
    (m as f64).ln() / -rho_max.ln() + 1.0
}

/// Root of a non-increasing `g` on `[0, hi]` by bisection, to bracket width
/// `tol`. The top is doubled (up to 20 times) while `g(hi) >= 0`.
pub fn bisect_decreasing<G>(mut g: G, hi: f64, tol: f64) -> Result<Interval>
where
    G: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    let mut hi = hi;
    let mut g_hi = g(hi)?;
    let mut doublings = 0;
    while g_hi >= 0.0 {
        if doublings == 20 {
            return Err(Error::BracketFailure { s_hi: hi, value: g_hi });
        }
        hi *= 2.0;
        g_hi = g(hi)?;
        doublings += 1;
    }
    let mut lo = 0.0;
    if g(lo)? <= 0.0 {
        return Ok(Interval::new(0.0, 0.0));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Interval::new(lo, hi))
}

pub fn natural_dimension_direct(f: &Cplifs, n: usize, tol: f64) -> Result<DimensionResult> {
    natural_dimension_direct_with(f, n, tol, &Budget::default())
}

pub fn natural_dimension_direct_with(f: &Cplifs, n: usize, tol: f64, budget: &Budget) -> Result<DimensionResult> {
    if n == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let lengths = CylinderLengths::compute(f, n, budget)?;
    let bracket = bisect_decreasing(|s| Ok(lengths.pressure(s)), s_upper(f.len(), f.rho_max()), tol)?;
    Ok(DimensionResult { value: bracket.mid(), method: Method::Direct, bracket, depth: n, lower_bound: false })
}

/// Unique `s >= 0` with `Σ r_i^s = 1`.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::EmptyList);
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidArgument(format!("ratio {r} not in (0,1)")));
    }
    let r_max = ratios.iter().cloned().fold(0.0, f64::max);
    let g = |s: f64| Ok(ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0);
    let b = bisect_decreasing(g, s_upper(ratios.len(), r_max), 1e-13)?;
    Ok(b.mid())
}

pub fn moran_result(ratios: &[f64]) -> Result<DimensionResult> {
    let s = moran_dimension(ratios)?;
    Ok(DimensionResult {
        value: s,
        method: Method::Moran,
        bracket: Interval::new(s - 5e-14, s + 5e-14),
        depth: 0,
        lower_bound: false,
    })
}

/// Least-squares slope of `log N(δ)` against `log(1/δ)` for `δ = base^{-k}`.
///
/// `N(δ)` counts half-open grid boxes `[iδ, (i+1)δ)` meeting the cover;
/// contacts within a relative `1e-9` of a box edge are ignored, and each
/// interval meets at least one box.
pub fn box_counting_estimate(cover: &[Interval], base: f64, exponents: &[i32]) -> Result<f64> {
    if cover.is_empty() {
        return Err(Error::InvalidArgument("empty cover".into()));
    }
    if !(base > 1.0) {
        return Err(Error::InvalidArgument(format!("grid base must exceed 1, got {base}")));
    }
    let mut ks: Vec<i32> = exponents.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} distinct grid scales, need 3", ks.len())));
    }
    let points: Vec<(f64, f64)> = ks
        .iter()
        .map(|&k| {
            let inv = base.powi(k);
            ((inv).ln(), (box_count(cover, inv) as f64).ln())
        })
        .collect();
    Ok(least_squares_slope(&points))
}

/// Number of grid boxes of side `1/inv` meeting the cover.
pub fn box_count(cover: &[Interval], inv: f64) -> u64 {
    const ETA: f64 = 1e-9;
    let mut ranges: Vec<(i64, i64)> = cover
        .iter()
        .map(|j| {
            let a = (j.lo * inv + ETA).floor() as i64;
            let b = (j.hi * inv - ETA).floor() as i64;
            (a, b.max(a))
        })
        .collect();
    ranges.sort_unstable();
    let mut total = 0u64;
    let mut cur: Option<(i64, i64)> = None;
    for (a, b) in ranges {
        match cur {
            Some((ca, cb)) if a <= cb + 1 => cur = Some((ca, cb.max(b))),
            Some((ca, cb)) => {
                total += (cb - ca + 1) as u64;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((ca, cb)) = cur {
        total += (cb - ca + 1) as u64;
    }
    total
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Box-counting dimension of the level-`n` attractor cover on a grid of
/// `δ = base^{-k}`, `k ∈ exponents`, with `|I|` rescaled to 1.
pub fn box_counting_dimension(f: &Cplifs, n: usize, base: f64, exponents: &[i32], budget: &Budget) -> Result<DimensionResult> {
    let i = f.support()?;
    let cover: Vec<Interval> = attractor_cover_with(f, n, budget)?
        .into_iter()
        .map(|j| Interval::new((j.lo - i.lo) / i.len(), (j.hi - i.lo) / i.len()))
        .collect();
    let v = box_counting_estimate(&cover, base, exponents)?;
    Ok(DimensionResult { value: v, method: Method::BoxCount, bracket: Interval::point(v), depth: n, lower_bound: false })
}

/// Total length of the union of level-`n` cylinders.
pub fn lebesgue_upper_estimate(f: &Cplifs, n: usize) -> Result<f64> {
    lebesgue_upper_estimate_with(f, n, &Budget::default())
}

pub fn lebesgue_upper_estimate_with(f: &Cplifs, n: usize, budget: &Budget) -> Result<f64> {
    let mut cover = attractor_cover_with(f, n, budget)?;
    Ok(union_length(&mut cover))
}

pub fn union_length(cover: &mut [Interval]) -> f64 {
    cover.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut total = 0.0;
    let mut cur: Option<Interval> = None;
    for j in cover.iter() {
        match cur {
            Some(c) if j.lo <= c.hi => cur = Some(Interval::new(c.lo, c.hi.max(j.hi))),
            Some(c) => {
                total += c.len();
                cur = Some(*j);
            }
            None => cur = Some(*j),
        }
    }
    total + cur.map_or(0.0, |c| c.len())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureCurve {
    pub s_grid: Vec<f64>,
    pub phi_values: Vec<f64>,
    pub depth: usize,
}

impl PressureCurve {
    pub const CSV_HEADER: &'static str = "s,phi_n,n";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (s, p) in self.s_grid.iter().zip(&self.phi_values) {
            out.push_str(&format!("{},{},{}\n", fmt_num(*s), fmt_num(*p), self.depth));
        }
        out
    }
}

pub fn pressure_curve(f: &Cplifs, s_grid: &[f64], n: usize, budget: &Budget) -> Result<PressureCurve> {
    for &s in s_grid {
        check_s(s)?;
    }
    let lengths = CylinderLengths::compute(f, n, budget)?;
    Ok(PressureCurve { s_grid: s_grid.to_vec(), phi_values: s_grid.iter().map(|&s| lengths.pressure(s)).collect(), depth: n })
}

/// Evenly spaced grid with `steps` points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![a],
        _ => (0..steps).map(|i| a + (b - a) * i as f64 / (steps - 1) as f64).collect(),
    }
}
