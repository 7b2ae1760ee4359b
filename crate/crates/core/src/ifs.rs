//! Continuous piecewise-linear contractions and the systems they form.
//!
//! A [`PlMap`] is stored by its breakpoints, one slope per linearity piece,
//! and its value at 0. Everything else (the translation of each piece, the
//! generated similarities, interval images) is derived from those.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::exec::{map_indexed, split_depth, Budget};
use crate::number::{ratio_to_f64, Number};
use crate::{Error, Result, Violation};

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    /// Interval spanned by two points in either order.
    pub fn spanning(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn contains_interval(&self, other: &Interval, tol: f64) -> bool {
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn approx_eq(&self, other: &Interval, tol: f64) -> bool {
        (self.lo - other.lo).abs() <= tol && (self.hi - other.hi).abs() <= tol
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", crate::export::fmt_num(self.lo), crate::export::fmt_num(self.hi))
    }
}

/// Label `(k, j)` of a linearity branch: map `k`, piece `j`, both 0-based.
/// Displays 1-based as `k.j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub map: usize,
    pub piece: usize,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.map + 1, self.piece + 1)
    }
}

/// Unvalidated parameters of one map, as found in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMap {
    #[serde(default)]
    pub breakpoints: Vec<Number>,
    pub slopes: Vec<Number>,
    pub offset: Number,
}

impl RawMap {
    pub fn from_f64(breakpoints: &[f64], slopes: &[f64], offset: f64) -> Self {
        RawMap {
            breakpoints: breakpoints.iter().map(|&b| b.into()).collect(),
            slopes: slopes.iter().map(|&r| r.into()).collect(),
            offset: offset.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct ExactParams {
    slopes: Vec<BigRational>,
    translations: Vec<BigRational>,
}

/// A continuous piecewise-linear contraction of the line.
#[derive(Clone, Debug, PartialEq)]
pub struct PlMap {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    offset: f64,
    translations: Vec<f64>,
    raw: RawMap,
    exact: Option<ExactParams>,
}

impl PlMap {
    /// Build a single map; `index` (0-based) is only used in violation reports.
    fn from_raw(raw: &RawMap, index: usize, out: &mut Vec<Violation>) -> Option<PlMap> {
        let map = index + 1;
        let breakpoints: Vec<f64> = raw.breakpoints.iter().map(Number::value).collect();
        let slopes: Vec<f64> = raw.slopes.iter().map(Number::value).collect();
        let offset = raw.offset.value();
        let before = out.len();

        if breakpoints.iter().chain(&slopes).chain(std::iter::once(&offset)).any(|v| !v.is_finite()) {
            out.push(Violation::NonFinite { map });
            return None;
        }
        if slopes.len() != breakpoints.len() + 1 {
            out.push(Violation::SlopeCountMismatch {
                map,
                breakpoints: breakpoints.len(),
                slopes: slopes.len(),
            });
            return None;
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            if w[1] <= w[0] {
                out.push(Violation::NonIncreasingBreakpoints { map, index: i + 2, value: w[1] });
            }
        }
        for (i, &r) in slopes.iter().enumerate() {
            if r == 0.0 || r.abs() >= 1.0 {
                out.push(Violation::SlopeOutOfRange { map, branch: i + 1, value: r });
            }
        }
        for (i, w) in slopes.windows(2).enumerate() {
            if w[0] == w[1] {
                out.push(Violation::EqualAdjacentSlopes { map, branch: i + 1, value: w[0] });
            }
        }
        if out.len() > before {
            return None;
        }

        let translations = translations_from(&breakpoints, &slopes, offset, |a, b| a < b, 0.0);
        let exact = exact_params(raw);
        Some(PlMap { breakpoints, slopes, offset, translations, raw: raw.clone(), exact })
    }

    /// Validate and build a single map.
    pub fn new(breakpoints: &[f64], slopes: &[f64], offset: f64) -> Result<PlMap> {
        let mut v = Vec::new();
        PlMap::from_raw(&RawMap::from_f64(breakpoints, slopes, offset), 0, &mut v).ok_or(Error::Invalid(v))
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Translation `t` of each piece, so that `f(x) = slope * x + t` there.
    pub fn translations(&self) -> &[f64] {
        &self.translations
    }

    pub fn pieces(&self) -> usize {
        self.slopes.len()
    }

    pub fn raw(&self) -> &RawMap {
        &self.raw
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Piece index of `x`. Points on a breakpoint report the left piece;
    /// both pieces agree there.
    pub fn piece_of(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.piece_of(x);
        self.slopes[p] * x + self.translations[p]
    }

    /// Closure of piece `p` as `(lo, hi)`, with infinite ends on the outer pieces.
    pub fn piece_bounds(&self, p: usize) -> (f64, f64) {
        let lo = if p == 0 { f64::NEG_INFINITY } else { self.breakpoints[p - 1] };
        let hi = self.breakpoints.get(p).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Exact image of a closed interval: hull of the endpoint images and the
    /// images of interior breakpoints.
    pub fn image(&self, j: &Interval) -> Interval {
        let a = self.eval(j.lo);
        let b = self.eval(j.hi);
        let mut out = Interval::spanning(a, b);
        let start = self.breakpoints.partition_point(|&x| x <= j.lo);
        for &bp in self.breakpoints[start..].iter().take_while(|&&x| x < j.hi) {
            let y = self.eval(bp);
            out.lo = out.lo.min(y);
            out.hi = out.hi.max(y);
        }
        out
    }

    pub fn max_abs_slope(&self) -> f64 {
        self.slopes.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    /// The unique fixed point. `f(x) - x` is strictly decreasing, so the
    /// fixed point lies in the first piece whose right breakpoint has
    /// `f(b) <= b`.
    pub fn fixed_point(&self) -> f64 {
        let p = self
            .breakpoints
            .iter()
            .position(|&b| self.eval(b) - b <= 0.0)
            .unwrap_or(self.breakpoints.len());
        self.translations[p] / (1.0 - self.slopes[p])
    }

    pub(crate) fn exact_branch(&self, p: usize) -> Option<(BigRational, BigRational)> {
        self.exact.as_ref().map(|e| (e.slopes[p].clone(), e.translations[p].clone()))
    }
}

/// Translations of each piece from continuity, anchored at the piece containing 0.
fn translations_from<T>(
    breakpoints: &[T],
    slopes: &[T],
    offset: T,
    less: impl Fn(&T, &T) -> bool,
    zero: T,
) -> Vec<T>
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T>,
{
    let p0 = breakpoints.iter().filter(|b| less(b, &zero)).count();
    let mut t = vec![offset.clone(); slopes.len()];
    for p in p0 + 1..slopes.len() {
        let b = breakpoints[p - 1].clone();
        t[p] = t[p - 1].clone() + (slopes[p - 1].clone() - slopes[p].clone()) * b;
    }
    for p in (0..p0).rev() {
        let b = breakpoints[p].clone();
        t[p] = t[p + 1].clone() + (slopes[p + 1].clone() - slopes[p].clone()) * b;
    }
    t
}

fn exact_params(raw: &RawMap) -> Option<ExactParams> {
    let bps: Option<Vec<BigRational>> = raw.breakpoints.iter().map(|n| n.exact().cloned()).collect();
    let slopes: Option<Vec<BigRational>> = raw.slopes.iter().map(|n| n.exact().cloned()).collect();
    let offset = raw.offset.exact().cloned()?;
    let (bps, slopes) = (bps?, slopes?);
    let zero = BigRational::from_integer(0.into());
    let translations = translations_from(&bps, &slopes, offset, |a, b| a < b, zero);
    Some(ExactParams { slopes, translations })
}

/// A continuous piecewise-linear iterated function system with `m >= 2` maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Cplifs {
    maps: Vec<PlMap>,
}

/// Validate raw parameters, reporting every violated constraint.
pub fn validate(raw: &[RawMap]) -> Result<Cplifs> {
    let mut violations = Vec::new();
    if raw.len() < 2 {
        violations.push(Violation::TooFewMaps { count: raw.len() });
    }
    let maps: Vec<Option<PlMap>> =
        raw.iter().enumerate().map(|(i, r)| PlMap::from_raw(r, i, &mut violations)).collect();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    Ok(Cplifs { maps: maps.into_iter().map(Option::unwrap).collect() })
}

impl Cplifs {
    pub fn new(maps: Vec<PlMap>) -> Result<Cplifs> {
        if maps.len() < 2 {
            return Err(Error::Invalid(vec![Violation::TooFewMaps { count: maps.len() }]));
        }
        Ok(Cplifs { maps })
    }

    /// Convenience constructor from `(breakpoints, slopes, offset)` triples.
    pub fn from_params(params: &[(&[f64], &[f64], f64)]) -> Result<Cplifs> {
        let raw: Vec<RawMap> = params.iter().map(|(b, s, t)| RawMap::from_f64(b, s, *t)).collect();
        validate(&raw)
    }

    pub fn maps(&self) -> &[PlMap] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// Number of breakpoints of each map.
    pub fn type_vector(&self) -> Vec<usize> {
        self.maps.iter().map(|f| f.breakpoints.len()).collect()
    }

    pub fn rho_max(&self) -> f64 {
        self.maps.iter().fold(0.0_f64, |m, f| m.max(f.max_abs_slope()))
    }

    /// True when every parameter was given as an exact rational.
    pub fn is_exact(&self) -> bool {
        self.maps.iter().all(PlMap::is_exact)
    }

    pub fn raw(&self) -> Vec<RawMap> {
        self.maps.iter().map(|f| f.raw.clone()).collect()
    }

    /// Branch labels in `(k, j)` lexicographic order.
    pub fn branches(&self) -> Vec<Branch> {
        self.maps
            .iter()
            .enumerate()
            .flat_map(|(k, f)| (0..f.pieces()).map(move |j| Branch { map: k, piece: j }))
            .collect()
    }

    /// Smallest compact interval mapped into itself by every map.
    ///
    /// Iterates `J <- hull(f_1(J) ∪ ... ∪ f_m(J))` from the fixed point of
    /// `f_1`. The iterates increase to the invariant interval at rate
    /// `rho_max`; after the movement drops below `tol * (1 - rho_max)` the
    /// iteration continues until the endpoints stop changing. A single
    /// common fixed point `φ` yields `[φ - 1/2, φ + 1/2]`.
    pub fn supporting_interval(&self, tol: f64) -> Result<Interval> {
        if !(tol > 0.0) {
            return Err(Error::NoConvergence(format!("supporting interval needs tol > 0, got {tol}")));
        }
        let rho = self.rho_max();
        let stop = tol * (1.0 - rho);
        let phi = self.maps[0].fixed_point();
        let mut j = Interval::point(phi);
        let mut settled = false;
        let mut polish = 0;
        for _ in 0..1_000_000 {
            let next = self.maps.iter().map(|f| f.image(&j)).fold(j, |acc, im| acc.hull(&im));
            let moved = (next.lo - j.lo).abs().max((next.hi - j.hi).abs());
            j = next;
            if moved <= stop {
                settled = true;
            }
            if settled {
                polish += 1;
                if moved == 0.0 || polish > 200 {
                    break;
                }
            }
        }
        if !settled {
            return Err(Error::NoConvergence("supporting interval iteration cap".into()));
        }
        if j.len() < 10.0 * tol {
            let c = j.mid();
            if self.maps.iter().all(|f| (f.eval(c) - c).abs() <= 10.0 * tol) {
                return Ok(Interval::new(c - 0.5, c + 0.5));
            }
        }
        Ok(j)
    }

    /// Supporting interval at the default tolerance `1e-12`.
    pub fn support(&self) -> Result<Interval> {
        self.supporting_interval(DEFAULT_SUPPORT_TOL)
    }
}

pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// One similarity `x ↦ slope * x + translation` of the generated system.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMap {
    pub slope: f64,
    pub translation: f64,
    pub source: Branch,
    pub exact: Option<(BigRational, BigRational)>,
}

impl SimilarityMap {
    pub fn new(slope: f64, translation: f64) -> Self {
        SimilarityMap { slope, translation, source: Branch { map: 0, piece: 0 }, exact: None }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.translation
    }
}

/// Extend every linearity piece of every map to a similarity on the line.
pub fn generated_self_similar(f: &Cplifs) -> Vec<SimilarityMap> {
    f.branches()
        .into_iter()
        .map(|b| {
            let map = &f.maps[b.map];
            SimilarityMap {
                slope: map.slopes[b.piece],
                translation: map.translations[b.piece],
                source: b,
                exact: map.exact_branch(b.piece),
            }
        })
        .collect()
}

/// Build a similarity system directly from `(slope, translation)` pairs.
pub fn similarity_system(params: &[(f64, f64)]) -> Vec<SimilarityMap> {
    params
        .iter()
        .enumerate()
        .map(|(k, &(r, t))| SimilarityMap { slope: r, translation: t, source: Branch { map: k, piece: 0 }, exact: None })
        .collect()
}

/// Exact similarity system from rational `(slope, translation)` strings.
pub fn exact_similarity_system(params: &[(&str, &str)]) -> Result<Vec<SimilarityMap>> {
    params
        .iter()
        .enumerate()
        .map(|(k, (r, t))| {
            let r = Number::parse(r).map_err(Error::Config)?;
            let t = Number::parse(t).map_err(Error::Config)?;
            let (re, te) = (r.exact().unwrap().clone(), t.exact().unwrap().clone());
            Ok(SimilarityMap {
                slope: ratio_to_f64(&re),
                translation: ratio_to_f64(&te),
                source: Branch { map: k, piece: 0 },
                exact: Some((re, te)),
            })
        })
        .collect()
}

/// Cylinder `f_{i_1} ∘ ... ∘ f_{i_n}(base)`; letters are 0-based map indices.
pub fn cylinder(f: &Cplifs, word: &[usize], base: &Interval) -> Interval {
    word.iter().rev().fold(*base, |j, &k| f.maps[k].image(&j))
}

/// Depth-first enumeration of all depth-`n` cylinders, innermost letter
/// first. `visit` receives the lexicographic index of the word
/// `(i_1, ..., i_n)` (with `i_1` most significant) and its cylinder.
pub(crate) fn walk_cylinders<T, V>(f: &Cplifs, base: Interval, n: usize, budget: &Budget, visit: V) -> Result<Vec<Vec<T>>>
where
    T: Send,
    V: Fn(usize, Interval) -> T + Sync + Send,
{
    let m = f.len();
    budget.check(m, n)?;
    let p = split_depth(m, n);
    let blocks = m.pow(p as u32);
    Ok(map_indexed(budget.exec, blocks, |block| {
        let mut j = base;
        let mut idx = 0usize;
        let mut rest = block;
        let mut weight = 1usize;
        for _ in 0..p {
            let k = rest % m;
            rest /= m;
            j = f.maps[k].image(&j);
            idx += k * weight;
            weight *= m;
        }
        let mut out = Vec::new();
        descend(f, j, idx, weight, n - p, &visit, &mut out);
        out
    }))
}

fn descend<T, V>(f: &Cplifs, j: Interval, idx: usize, weight: usize, remaining: usize, visit: &V, out: &mut Vec<T>)
where
    V: Fn(usize, Interval) -> T,
{
    if remaining == 0 {
        out.push(visit(idx, j));
        return;
    }
    for (k, map) in f.maps.iter().enumerate() {
        descend(f, map.image(&j), idx + k * weight, weight * f.len(), remaining - 1, visit, out);
    }
}

/// All `m^n` level-`n` cylinders of the supporting interval, in
/// lexicographic word order.
pub fn attractor_cover(f: &Cplifs, n: usize) -> Result<Vec<Interval>> {
    attractor_cover_with(f, n, &Budget::default())
}

pub fn attractor_cover_with(f: &Cplifs, n: usize, budget: &Budget) -> Result<Vec<Interval>> {
    let base = f.support()?;
    let count = budget.check(f.len(), n)?;
    let blocks = walk_cylinders(f, base, n, budget, |i, j| (i, j))?;
    let mut out = vec![base; count];
    for (i, j) in blocks.into_iter().flatten() {
        out[i] = j;
    }
    Ok(out)
}

/// Per-clause closeness of two systems with the same number of maps.
#[derive(Clone, Debug, PartialEq)]
pub struct Closeness {
    /// Largest endpoint displacement between matched monotonicity cells
    /// (infinite if the partitions have different cell counts).
    pub partition_displacement: f64,
    pub same_breakpoint_counts: bool,
    /// Largest `| log|ρ| - log|ρ̂| |` over branches with the same label.
    pub log_slope_gap: f64,
    /// Largest `sup |f_k - f̂_k|` over the hull of both supporting intervals.
    pub sup_norm: f64,
    /// Infimal ε: the systems are ε-close for every ε strictly above it.
    pub epsilon: f64,
}

pub fn cplifs_distance(f: &Cplifs, g: &Cplifs) -> Result<Closeness> {
    if f.len() != g.len() {
        return Err(Error::TypeMismatch { left: f.len(), right: g.len() });
    }
    let same_counts = f.type_vector() == g.type_vector();

    let pf = crate::markov::monotonicity_partition(f, &[])?;
    let pg = crate::markov::monotonicity_partition(g, &[])?;
    let partition_displacement = if pf.cells.len() == pg.cells.len() {
        pf.cells
            .iter()
            .zip(&pg.cells)
            .map(|(a, b)| (a.lo - b.lo).abs().max((a.hi - b.hi).abs()))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let log_slope_gap = if same_counts {
        f.maps
            .iter()
            .zip(&g.maps)
            .flat_map(|(a, b)| a.slopes.iter().zip(&b.slopes))
            .map(|(r, q)| (r.abs().ln() - q.abs().ln()).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let dom = f.support()?.hull(&g.support()?);
    let sup_norm = f
        .maps
        .iter()
        .zip(&g.maps)
        .map(|(a, b)| {
            let inner = a.breakpoints.iter().chain(&b.breakpoints).filter(|&&x| x > dom.lo && x < dom.hi);
            [dom.lo, dom.hi]
                .iter()
                .chain(inner)
                .map(|&x| (a.eval(x) - b.eval(x)).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let epsilon = if same_counts {
        partition_displacement.max(log_slope_gap).max(sup_norm)
    } else {
        f64::INFINITY
    };
    Ok(Closeness { partition_displacement, same_breakpoint_counts: same_counts, log_slope_gap, sup_norm, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    #[test]
    fn validate_accepts_example_and_rejects_bad_params() {
        systems::example_5_1().unwrap();

        let err = Cplifs::from_params(&[(&[0.0], &[1.0 / 3.0, 1.0 / 3.0], 0.0), (&[], &[0.5], 0.0)]).unwrap_err();
        match err {
            Error::Invalid(v) => assert!(matches!(v[0], Violation::EqualAdjacentSlopes { map: 1, branch: 1, .. })),
            e => panic!("{e}"),
        }

        let err = Cplifs::from_params(&[(&[1.0, 0.5], &[0.2, 0.3, 0.4], 0.0), (&[], &[0.5], 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Invalid(ref v) if matches!(v[0], Violation::NonIncreasingBreakpoints { map: 1, index: 2, .. })));

        let err = Cplifs::from_params(&[(&[], &[1.2], 0.0), (&[], &[0.0], 0.0)]).unwrap_err();
        let Error::Invalid(v) = err else { panic!() };
        assert_eq!(v.len(), 2);
        assert!(v[0].to_string().contains("SlopeOutOfRange"));

        let err = Cplifs::from_params(&[(&[], &[0.5], 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Invalid(ref v) if v[0] == Violation::TooFewMaps { count: 1 }));
    }

    #[test]
    fn eval_matches_example_values() {
        let f = systems::example_5_1().unwrap();
        let f1 = &f.maps()[0];
        assert!((f1.eval(-0.5) + 0.2).abs() < 1e-15);
        assert!((f1.eval(0.5) - 0.1).abs() < 1e-15);
        for m in f.maps() {
            assert_eq!(m.eval(0.0), m.offset());
        }
    }

    #[test]
    fn translations_follow_continuity() {
        let m = PlMap::new(&[1.0], &[0.5, 0.25], 0.0).unwrap();
        assert_eq!(m.translations(), &[0.0, 0.25]);
        // Offset anchored in a right-hand piece.
        let m = PlMap::new(&[-1.0, -0.5], &[0.5, -0.25, 0.75], 0.1).unwrap();
        for &b in m.breakpoints() {
            let l = m.slopes()[m.piece_of(b)] * b + m.translations()[m.piece_of(b)];
            let r = m.slopes()[m.piece_of(b) + 1] * b + m.translations()[m.piece_of(b) + 1];
            assert!((l - r).abs() < 1e-15);
        }
        assert!((m.eval(0.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn supporting_interval_examples() {
        let half = systems::full_interval().unwrap();
        assert_eq!(half.supporting_interval(1e-12).unwrap(), Interval::new(0.0, 1.0));

        let ex = systems::example_5_1().unwrap();
        assert_eq!(ex.supporting_interval(1e-12).unwrap(), Interval::new(-0.5, 0.5));

        let common = Cplifs::from_params(&[(&[], &[0.5], 0.0), (&[], &[1.0 / 3.0], 0.0)]).unwrap();
        assert_eq!(common.support().unwrap(), Interval::new(-0.5, 0.5));

        assert!(matches!(half.supporting_interval(0.0), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn supporting_interval_is_minimal() {
        for f in [systems::kinked_separated().unwrap(), systems::negative_slopes().unwrap(), systems::cantor().unwrap()] {
            let tol = 1e-12;
            let i = f.supporting_interval(tol).unwrap();
            for m in f.maps() {
                assert!(i.contains_interval(&m.image(&i), tol));
            }
            let lower = Interval::new(i.lo + 10.0 * tol, i.hi);
            let upper = Interval::new(i.lo, i.hi - 10.0 * tol);
            assert!(f.maps().iter().any(|m| !lower.contains_interval(&m.image(&lower), 0.0)));
            assert!(f.maps().iter().any(|m| !upper.contains_interval(&m.image(&upper), 0.0)));
        }
    }

    #[test]
    fn generated_system_examples() {
        let ex = systems::example_5_1().unwrap();
        let s = generated_self_similar(&ex);
        let slopes: Vec<f64> = s.iter().map(|m| m.slope).collect();
        assert_eq!(slopes, vec![0.4, 0.2, 1.0 / 3.0]);
        assert!(s.iter().all(|m| m.translation == 0.0));

        let c = systems::cantor().unwrap();
        let s = generated_self_similar(&c);
        assert_eq!(s.len(), 2);
        assert_eq!((s[1].slope, s[1].translation), (1.0 / 3.0, 2.0 / 3.0));
    }

    #[test]
    fn cylinder_examples() {
        let c = systems::cantor().unwrap();
        let i = c.support().unwrap();
        assert_eq!(cylinder(&c, &[], &i), i);
        let j = cylinder(&c, &[0, 1], &i);
        assert!(j.approx_eq(&Interval::new(2.0 / 9.0, 1.0 / 3.0), 1e-15));

        let ex = systems::example_5_1().unwrap();
        let i = ex.support().unwrap();
        // Oracle: hull of f1 at the endpoints and the interior breakpoint.
        let f1 = &ex.maps()[0];
        let pts = [f1.eval(-0.5), f1.eval(0.0), f1.eval(0.5)];
        let oracle = Interval::new(pts.iter().cloned().fold(f64::MAX, f64::min), pts.iter().cloned().fold(f64::MIN, f64::max));
        assert_eq!(cylinder(&ex, &[0], &i), oracle);
        assert!(oracle.approx_eq(&Interval::new(-0.2, 0.1), 1e-15));
    }

    #[test]
    fn attractor_cover_examples() {
        let c = systems::cantor().unwrap();
        let cov = attractor_cover(&c, 1).unwrap();
        assert!(cov[0].approx_eq(&Interval::new(0.0, 1.0 / 3.0), 1e-15));
        assert!(cov[1].approx_eq(&Interval::new(2.0 / 3.0, 1.0), 1e-15));
        assert_eq!(attractor_cover(&c, 0).unwrap(), vec![c.support().unwrap()]);

        let ex = systems::example_5_1().unwrap();
        let cov = attractor_cover(&ex, 2).unwrap();
        assert!(cov[0].approx_eq(&Interval::new(-2.0 / 25.0, 1.0 / 50.0), 1e-15));
        assert!((cov[0].len() - 0.1).abs() < 1e-15);

        // Lexicographic order: entry index = Σ i_k m^{n-k}.
        let three = systems::three_map_overlap().unwrap();
        let cov = attractor_cover(&three, 3).unwrap();
        let i = three.support().unwrap();
        for (idx, j) in cov.iter().enumerate() {
            let word = [idx / 9, (idx / 3) % 3, idx % 3];
            assert_eq!(*j, cylinder(&three, &word, &i));
        }

        assert!(matches!(attractor_cover_with(&c, 20, &Budget::new(1000)), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn distance_examples() {
        let ex = systems::example_5_1().unwrap();
        let d = cplifs_distance(&ex, &ex).unwrap();
        assert_eq!((d.partition_displacement, d.log_slope_gap, d.sup_norm, d.epsilon), (0.0, 0.0, 0.0, 0.0));

        let eps = 1e-3;
        let hat = systems::example_5_1_perturbed(eps).unwrap();
        let d = cplifs_distance(&ex, &hat).unwrap();
        assert!((d.sup_norm - eps).abs() < 1e-15);
        assert_eq!(d.log_slope_gap, 0.0);
        assert!(d.same_breakpoint_counts);

        let two = Cplifs::from_params(&[(&[0.0, 0.1], &[0.4, 0.2, 0.3], 0.0), (&[], &[1.0 / 3.0], 0.0)]).unwrap();
        let d = cplifs_distance(&ex, &two).unwrap();
        assert!(!d.same_breakpoint_counts);
        assert_eq!(d.epsilon, f64::INFINITY);

        let c = systems::cantor().unwrap();
        assert!(matches!(cplifs_distance(&c, &three_maps()), Err(Error::TypeMismatch { left: 2, right: 3 })));
    }

    fn three_maps() -> Cplifs {
        systems::three_map_overlap().unwrap()
    }
}
