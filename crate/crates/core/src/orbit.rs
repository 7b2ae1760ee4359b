//! Orbit graph of critical points, exact-overlap and separation search in
//! the generated self-similar system, and the periodic critical orbit check.
//!
//! The orbit graph lives on a line where some points are doubled: a value
//! in the backward orbit `W` of the partition endpoints splits into a left
//! copy `x-` and a right copy `x+`. Only values met while expanding the
//! graph are ever doubled.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exec::{map_indexed, split_depth, Budget};
use crate::export::{fmt_num, fmt_word};
use crate::ifs::{Branch, Cplifs, SimilarityMap};
use crate::markov::{critical_points_of, partition_of, BranchInfo, Dynamics, Partition, WeightedGraphMatrix};
use crate::number::ratio_to_f64;
use crate::{Error, Result, EQ_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Minus,
    Plus,
    Plain,
}

impl Side {
    fn flipped(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
            Side::Plain => Side::Plain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubledPoint {
    pub value: f64,
    pub side: Side,
}

impl fmt::Display for DoubledPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.side {
            Side::Minus => "-",
            Side::Plus => "+",
            Side::Plain => "",
        };
        write!(f, "{}{}", fmt_num(self.value), tag)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitNode {
    pub point: DoubledPoint,
    /// Index of the partition endpoint copy this orbit started from.
    pub origin: usize,
    /// Inverse branches applied, first to last.
    pub word: Vec<Branch>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitEdge {
    pub from: usize,
    pub to: usize,
    pub branch: Branch,
    pub abs_slope: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitGraph {
    pub nodes: Vec<OrbitNode>,
    pub edges: Vec<OrbitEdge>,
    pub depth: usize,
    /// The node cap stopped the expansion early.
    pub truncated: bool,
    /// Sorted values found to be doubled.
    pub doubled: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitCaps {
    pub depth: usize,
    pub max_nodes: usize,
}

impl Default for OrbitCaps {
    fn default() -> Self {
        OrbitCaps { depth: 12, max_nodes: 50_000 }
    }
}

struct Space<'a> {
    dynamics: &'a Dynamics,
    doubled: Vec<f64>,
}

impl Space<'_> {
    fn is_doubled(&self, y: f64) -> bool {
        let i = self.doubled.partition_point(|&w| w < y - EQ_TOL);
        self.doubled.get(i).is_some_and(|&w| (w - y).abs() <= EQ_TOL)
    }

    /// Membership in the closure of `𝓘 ∖ W` on the doubled line.
    fn admits(&self, p: DoubledPoint) -> bool {
        let y = p.value;
        self.dynamics.components.iter().any(|c| match p.side {
            Side::Plain => c.contains(y, EQ_TOL),
            Side::Minus => y > c.lo + EQ_TOL && y <= c.hi + EQ_TOL,
            Side::Plus => y >= c.lo - EQ_TOL && y < c.hi - EQ_TOL,
        })
    }

    /// Whether the inverse branch is defined at `p`: a one-sided copy needs
    /// the domain on its side.
    fn applicable(b: &BranchInfo, p: DoubledPoint) -> bool {
        let (x, d) = (p.value, b.domain);
        match p.side {
            Side::Plain => d.contains(x, EQ_TOL),
            Side::Minus => x > d.lo + EQ_TOL && x <= d.hi + EQ_TOL,
            Side::Plus => x >= d.lo - EQ_TOL && x < d.hi - EQ_TOL,
        }
    }

    fn images(&self, b: &BranchInfo, p: DoubledPoint) -> Vec<DoubledPoint> {
        if !Self::applicable(b, p) {
            return vec![];
        }
        let y = b.inverse(p.value);
        let sides = if !self.is_doubled(y) {
            vec![Side::Plain]
        } else if p.side == Side::Plain {
            vec![Side::Minus, Side::Plus]
        } else if b.slope < 0.0 {
            vec![p.side.flipped()]
        } else {
            vec![p.side]
        };
        sides.into_iter().map(|side| DoubledPoint { value: y, side }).filter(|&q| self.admits(q)).collect()
    }
}

/// Backward orbit of the partition endpoints other than `u, v`, to `depth`
/// steps, with `u, v` removed.
fn doubled_values(dynamics: &Dynamics, endpoints: &[f64], depth: usize, cap: usize) -> Vec<f64> {
    let i = dynamics.support;
    let outer = |x: f64| (x - i.lo).abs() <= EQ_TOL || (x - i.hi).abs() <= EQ_TOL;
    let mut seen: Vec<f64> = endpoints.iter().copied().filter(|&x| !outer(x)).collect();
    let mut frontier = seen.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for &x in &frontier {
            for b in dynamics.branches.iter().filter(|b| b.domain.contains(x, EQ_TOL)) {
                let y = b.inverse(x);
                if dynamics.in_image(y, EQ_TOL)
                    && !outer(y)
                    && !seen.iter().chain(&next).any(|&z| (z - y).abs() <= EQ_TOL)
                {
                    next.push(y);
                }
            }
        }
        if next.is_empty() || seen.len() + next.len() > cap {
            seen.extend(next);
            break;
        }
        seen.extend_from_slice(&next);
        frontier = next;
    }
    seen.sort_by(f64::total_cmp);
    seen.dedup_by(|b, a| (*b - *a).abs() <= EQ_TOL);
    seen
}

fn value_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

#[derive(Default)]
struct PointIndex {
    by_value: BTreeMap<i64, Vec<usize>>,
}

impl PointIndex {
    fn at(&self, y: f64) -> impl Iterator<Item = usize> + '_ {
        self.by_value.range(value_key(y - EQ_TOL)..=value_key(y + EQ_TOL)).flat_map(|(_, v)| v.iter().copied())
    }

    fn find(&self, p: DoubledPoint, nodes: &[OrbitNode]) -> Option<usize> {
        self.at(p.value).find(|&id| nodes[id].point.side == p.side)
    }

    fn insert(&mut self, p: DoubledPoint, id: usize) {
        self.by_value.entry(value_key(p.value)).or_default().push(id);
    }
}

pub fn build_orbit_graph(f: &Cplifs, partition: &Partition, caps: OrbitCaps) -> Result<OrbitGraph> {
    if caps.depth == 0 {
        return Err(Error::InvalidArgument("orbit depth must be at least 1".into()));
    }
    let dynamics = Dynamics::new(f)?;
    Ok(orbit_graph_of(&dynamics, partition, caps))
}

/// Build with the monotonicity partition.
pub fn orbit_graph(f: &Cplifs, caps: OrbitCaps) -> Result<OrbitGraph> {
    let dynamics = Dynamics::new(f)?;
    let crit = critical_points_of(f, &dynamics);
    let partition = partition_of(&dynamics, &crit, &[])?;
    if caps.depth == 0 {
        return Err(Error::InvalidArgument("orbit depth must be at least 1".into()));
    }
    Ok(orbit_graph_of(&dynamics, &partition, caps))
}

pub fn orbit_graph_of(dynamics: &Dynamics, partition: &Partition, caps: OrbitCaps) -> OrbitGraph {
    let endpoints = partition.endpoints();
    let space = Space { dynamics, doubled: doubled_values(dynamics, &endpoints, caps.depth, caps.max_nodes) };

    let mut nodes: Vec<OrbitNode> = Vec::new();
    let mut index = PointIndex::default();

    // Partition endpoints, each seen from the cells it bounds.
    let mut starts = Vec::new();
    for c in &partition.cells {
        for (x, side) in [(c.lo, Side::Plus), (c.hi, Side::Minus)] {
            let side = if space.is_doubled(x) { side } else { Side::Plain };
            starts.push(DoubledPoint { value: x, side });
        }
    }
    starts.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.side.cmp(&b.side)));
    let mut frontier = Vec::new();
    for p in starts {
        let origin = frontier.len();
        if let Some(id) = add_node(&mut index, &mut nodes, p, origin, vec![]) {
            frontier.push(id);
        }
    }

    let mut truncated = false;
    for _ in 0..caps.depth {
        let mut next = Vec::new();
        for &a in &frontier {
            let (p, origin, word) = (nodes[a].point, nodes[a].origin, nodes[a].word.clone());
            for b in &dynamics.branches {
                for q in space.images(b, p) {
                    if nodes.len() >= caps.max_nodes {
                        truncated |= index.find(q, &nodes).is_none();
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(b.label);
                    if let Some(id) = add_node(&mut index, &mut nodes, q, origin, w) {
                        next.push(id);
                    }
                }
            }
        }
        frontier = next;
    }

    // A stored edge a -> b exists when b or its twin is the image of a.
    let mut edges = Vec::new();
    let mut index = PointIndex::default();
    for (id, n) in nodes.iter().enumerate() {
        index.insert(n.point, id);
    }
    for (a, n) in nodes.iter().enumerate() {
        for b in &dynamics.branches {
            if space.images(b, n.point).is_empty() {
                continue;
            }
            let y = b.inverse(n.point.value);
            let mut targets: Vec<usize> = index.at(y).collect();
            targets.sort_unstable();
            for to in targets {
                edges.push(OrbitEdge { from: a, to, branch: b.label, abs_slope: b.slope.abs() });
            }
        }
    }
    OrbitGraph { nodes, edges, depth: caps.depth, truncated, doubled: space.doubled }
}

fn add_node(index: &mut PointIndex, nodes: &mut Vec<OrbitNode>, p: DoubledPoint, origin: usize, word: Vec<Branch>) -> Option<usize> {
    if index.find(p, nodes).is_some() {
        return None;
    }
    let id = nodes.len();
    index.insert(p, id);
    nodes.push(OrbitNode { point: p, origin, word });
    Some(id)
}

impl OrbitGraph {
    pub fn matrix(&self) -> WeightedGraphMatrix {
        let mut w = WeightedGraphMatrix::new(self.nodes.len());
        for e in &self.edges {
            w.push(e.from, e.to, e.abs_slope);
        }
        w
    }

    pub fn nodes_at(&self, x: f64) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| (self.nodes[i].point.value - x).abs() <= EQ_TOL).collect()
    }

    pub fn find(&self, x: f64, side: Side) -> Option<usize> {
        self.nodes.iter().position(|n| n.point.side == side && (n.point.value - x).abs() <= EQ_TOL)
    }

    pub fn has_edge(&self, from: usize, to: usize, branch: Branch) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to && e.branch == branch)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph orbit {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}@{}\"];", n.point, n.word.len());
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}:{}\"];", e.from, e.to, e.branch, fmt_num(e.abs_slope));
        }
        out.push_str("}\n");
        out
    }

    pub const CSV_HEADER: &'static str = "from,to,k,j,abs_slope";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.edges {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.nodes[e.from].point,
                self.nodes[e.to].point,
                e.branch.map + 1,
                e.branch.piece + 1,
                fmt_num(e.abs_slope)
            );
        }
        out
    }
}

pub fn orbit_matrix(g: &OrbitGraph) -> WeightedGraphMatrix {
    g.matrix()
}

/// An inner breakpoint image whose orbit returns to itself.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFlag {
    pub value: f64,
    /// Map and left piece of the breakpoint.
    pub branch: Branch,
    /// Length of the shortest return found.
    pub period: usize,
}

/// Breakpoint images `x = f_k(b)` in the interior of `⋃ f_k(I)` from which
/// a path of at most `depth` edges, starting with one of the two branches
/// meeting at `b`, returns to `x`.
pub fn periodic_critical_orbit_check(f: &Cplifs, depth: usize) -> Result<Vec<PeriodicFlag>> {
    let graph = orbit_graph(f, OrbitCaps { depth, ..Default::default() })?;
    let dynamics = Dynamics::new(f)?;
    Ok(periodic_flags(f, &dynamics, &graph, depth))
}

pub fn periodic_flags(f: &Cplifs, dynamics: &Dynamics, graph: &OrbitGraph, depth: usize) -> Vec<PeriodicFlag> {
    let mut succ: Vec<Vec<(usize, Branch)>> = vec![Vec::new(); graph.nodes.len()];
    for e in &graph.edges {
        succ[e.from].push((e.to, e.branch));
    }
    let mut flags = Vec::new();
    for (k, g) in f.maps().iter().enumerate() {
        for (j, &b) in g.breakpoints().iter().enumerate() {
            if !dynamics.support.contains(b, 0.0) {
                continue;
            }
            let x = g.eval(b);
            if !dynamics.is_inner(x) {
                continue;
            }
            let meet = [Branch { map: k, piece: j }, Branch { map: k, piece: j + 1 }];
            let targets = graph.nodes_at(x);
            let is_target = |id: usize| targets.contains(&id);
            let mut seen = vec![false; graph.nodes.len()];
            let mut frontier: Vec<usize> = Vec::new();
            for &s in &targets {
                for &(to, br) in &succ[s] {
                    if meet.contains(&br) && !seen[to] {
                        seen[to] = true;
                        frontier.push(to);
                    }
                }
            }
            let mut period = None;
            for step in 1..=depth {
                if frontier.iter().any(|&id| is_target(id)) {
                    period = Some(step);
                    break;
                }
                let mut next = Vec::new();
                for &a in &frontier {
                    for &(to, _) in &succ[a] {
                        if !seen[to] {
                            seen[to] = true;
                            next.push(to);
                        }
                    }
                }
                frontier = next;
            }
            if let Some(period) = period {
                flags.push(PeriodicFlag { value: x, branch: meet[0], period });
            }
        }
    }
    flags
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Identical in exact rational arithmetic.
    Exact,
    /// Equal within tolerance in floating point only.
    Suspected,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Exact => "exact",
            Verdict::Suspected => "suspected",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapPair {
    pub depth: usize,
    pub word_i: Vec<usize>,
    pub word_j: Vec<usize>,
    pub slope: f64,
    pub gap: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthSummary {
    pub depth: usize,
    /// All coinciding pairs at this depth, reported or not.
    pub pair_count: u64,
    /// Smallest translation gap between distinct words with equal slope
    /// products; infinite if no two slope products agree.
    pub esc_min_distance: f64,
    /// `esc_min_distance^{1/depth}` when finite.
    pub c_estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlapReport {
    pub pairs: Vec<OverlapPair>,
    pub depths: Vec<DepthSummary>,
    pub exact_mode: bool,
}

impl OverlapReport {
    pub fn has_overlap(&self) -> bool {
        self.depths.iter().any(|d| d.pair_count > 0)
    }

    pub fn has_exact_overlap(&self) -> bool {
        self.pairs.iter().any(|p| p.verdict == Verdict::Exact)
    }

    pub fn first_overlap_depth(&self) -> Option<usize> {
        self.depths.iter().find(|d| d.pair_count > 0).map(|d| d.depth)
    }

    pub const CSV_HEADER: &'static str = "depth,word_i,word_j,slope_product,translation_gap,verdict";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                p.depth,
                fmt_word(&p.word_i),
                fmt_word(&p.word_j),
                fmt_num(p.slope),
                fmt_num(p.gap),
                p.verdict.as_str()
            );
        }
        out
    }

    pub const ESC_CSV_HEADER: &'static str = "depth,pair_count,esc_min_distance,c_estimate";

    pub fn esc_csv(&self) -> String {
        let mut out = String::from(Self::ESC_CSV_HEADER);
        out.push('\n');
        for d in &self.depths {
            let c = d.c_estimate.map_or_else(|| "inf".to_string(), fmt_num);
            let _ = writeln!(out, "{},{},{},{}", d.depth, d.pair_count, fmt_num(d.esc_min_distance), c);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapOptions {
    /// Confirm candidate pairs in rational arithmetic (needs exact maps).
    pub exact: bool,
    /// Reported pairs per depth; counts are always complete.
    pub pair_cap: usize,
    pub budget: Budget,
}

impl Default for OverlapOptions {
    fn default() -> Self {
        OverlapOptions { exact: true, pair_cap: 1_000, budget: Budget::default() }
    }
}

/// Slope product and translation of every depth-`n` composition
/// `S_{i_1} ∘ ... ∘ S_{i_n}`, in lexicographic word order.
fn compositions(s: &[SimilarityMap], n: usize, budget: &Budget) -> Result<Vec<(f64, f64)>> {
    let m = s.len();
    budget.check(m, n)?;
    let p = split_depth(m, n);
    let blocks = map_indexed(budget.exec, m.pow(p as u32), |block| {
        let (mut slope, mut trans) = (1.0, 0.0);
        let mut rest = block;
        let mut prefix = Vec::with_capacity(p);
        for _ in 0..p {
            prefix.push(rest % m);
            rest /= m;
        }
        for &k in prefix.iter().rev() {
            trans += slope * s[k].translation;
            slope *= s[k].slope;
        }
        let mut out = Vec::with_capacity(m.pow((n - p) as u32));
        extend(s, slope, trans, n - p, &mut out);
        out
    });
    Ok(blocks.into_iter().flatten().collect())
}

fn extend(s: &[SimilarityMap], slope: f64, trans: f64, remaining: usize, out: &mut Vec<(f64, f64)>) {
    if remaining == 0 {
        out.push((slope, trans));
        return;
    }
    for g in s {
        extend(s, slope * g.slope, trans + slope * g.translation, remaining - 1, out);
    }
}

fn word_of(mut idx: usize, m: usize, n: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for i in (0..n).rev() {
        w[i] = idx % m;
        idx /= m;
    }
    w
}

fn exact_compose(s: &[SimilarityMap], word: &[usize]) -> Option<(BigRational, BigRational)> {
    let mut slope = BigRational::one();
    let mut trans = BigRational::zero();
    for &k in word {
        let (r, t) = s[k].exact.as_ref()?;
        trans += &slope * t;
        slope *= r;
    }
    Some((slope, trans))
}

fn slopes_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

struct DepthScan {
    summary: DepthSummary,
    candidates: Vec<(usize, usize, f64, f64)>,
}

fn scan_depth(comp: &[(f64, f64)], depth: usize, pair_cap: usize) -> DepthScan {
    let mut order: Vec<usize> = (0..comp.len()).collect();
    order.sort_by(|&a, &b| comp[a].0.total_cmp(&comp[b].0).then(comp[a].1.total_cmp(&comp[b].1)).then(a.cmp(&b)));
    let mut min_gap = f64::INFINITY;
    let mut count = 0u64;
    let mut candidates = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let head = comp[order[start]].0;
        let mut end = start + 1;
        while end < order.len() && slopes_match(head, comp[order[end]].0) {
            end += 1;
        }
        let mut group: Vec<usize> = order[start..end].to_vec();
        group.sort_by(|&a, &b| comp[a].1.total_cmp(&comp[b].1).then(a.cmp(&b)));
        let mut c0 = 0;
        while c0 < group.len() {
            let mut c1 = c0 + 1;
            while c1 < group.len() && comp[group[c1]].1 - comp[group[c1 - 1]].1 <= EQ_TOL {
                c1 += 1;
            }
            if c1 < group.len() {
                min_gap = min_gap.min(comp[group[c1]].1 - comp[group[c1 - 1]].1);
            }
            let size = (c1 - c0) as u64;
            if size > 1 {
                count += size * (size - 1) / 2;
                let mut cluster: Vec<usize> = group[c0..c1].to_vec();
                cluster.sort_unstable();
                for (x, &a) in cluster.iter().enumerate() {
                    for &b in &cluster[x + 1..] {
                        if candidates.len() < pair_cap {
                            candidates.push((a, b, comp[a].0, (comp[a].1 - comp[b].1).abs()));
                        }
                    }
                }
                let within = group[c0..c1].windows(2).map(|w| comp[w[1]].1 - comp[w[0]].1);
                min_gap = min_gap.min(within.fold(f64::INFINITY, f64::min));
            }
            c0 = c1;
        }
        start = end;
    }
    candidates.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let c_estimate = min_gap.is_finite().then(|| min_gap.powf(1.0 / depth as f64));
    DepthScan { summary: DepthSummary { depth, pair_count: count, esc_min_distance: min_gap, c_estimate }, candidates }
}

pub fn exact_overlap_search(s: &[SimilarityMap], n_max: usize) -> Result<OverlapReport> {
    exact_overlap_search_with(s, n_max, &OverlapOptions::default())
}

/// Group all compositions of each depth `1..=n_max` by slope product and
/// report pairs with coinciding translations.
pub fn exact_overlap_search_with(s: &[SimilarityMap], n_max: usize, opts: &OverlapOptions) -> Result<OverlapReport> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("overlap depth must be at least 1".into()));
    }
    if s.is_empty() {
        return Err(Error::EmptyList);
    }
    let exact_mode = opts.exact && s.iter().all(|g| g.exact.is_some());
    let m = s.len();
    let mut pairs = Vec::new();
    let mut depths = Vec::new();
    for n in 1..=n_max {
        let comp = compositions(s, n, &opts.budget)?;
        let scan = scan_depth(&comp, n, opts.pair_cap);
        for (a, b, slope, gap) in scan.candidates {
            let (wi, wj) = (word_of(a, m, n), word_of(b, m, n));
            let (verdict, gap) = if exact_mode {
                let (ra, ta) = exact_compose(s, &wi).expect("exact maps");
                let (rb, tb) = exact_compose(s, &wj).expect("exact maps");
                let residual = ratio_to_f64(&(&ta - &tb).abs());
                if ra == rb && ta == tb {
                    (Verdict::Exact, 0.0)
                } else {
                    (Verdict::Suspected, residual)
                }
            } else {
                (Verdict::Suspected, gap)
            };
            pairs.push(OverlapPair { depth: n, word_i: wi, word_j: wj, slope, gap, verdict });
        }
        depths.push(scan.summary);
    }
    Ok(OverlapReport { pairs, depths, exact_mode })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Esc {
    pub distance: f64,
    pub c_estimate: Option<f64>,
}

/// Minimum distance between distinct depth-`n` compositions.
pub fn esc_min_distance(s: &[SimilarityMap], n: usize) -> Result<Esc> {
    esc_min_distance_with(s, n, &Budget::default())
}

pub fn esc_min_distance_with(s: &[SimilarityMap], n: usize, budget: &Budget) -> Result<Esc> {
    if n == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let comp = compositions(s, n, budget)?;
    let d = scan_depth(&comp, n, 0).summary;
    Ok(Esc { distance: d.esc_min_distance, c_estimate: d.c_estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{exact_similarity_system, generated_self_similar, similarity_system};
    use crate::markov::monotonicity_partition;
    use crate::systems;

    fn b(k: usize, j: usize) -> Branch {
        Branch { map: k - 1, piece: j - 1 }
    }

    fn graph(f: &Cplifs, depth: usize) -> OrbitGraph {
        let p = monotonicity_partition(f, &[]).unwrap();
        build_orbit_graph(f, &p, OrbitCaps { depth, ..Default::default() }).unwrap()
    }

    fn node(g: &OrbitGraph, x: f64) -> usize {
        let ids = g.nodes_at(x);
        assert_eq!(ids.len(), 1, "{x}: {ids:?}");
        ids[0]
    }

    #[test]
    fn cantor_orbit_graph() {
        let g = graph(&systems::cantor().unwrap(), 3);
        let (n0, n1, n13, n23) = (node(&g, 0.0), node(&g, 1.0), node(&g, 1.0 / 3.0), node(&g, 2.0 / 3.0));
        assert!(g.has_edge(n0, n0, b(1, 1)));
        assert!(g.has_edge(n1, n1, b(2, 1)));
        assert!(g.has_edge(n13, n1, b(1, 1)));
        assert!(g.has_edge(n23, n0, b(2, 1)));
        assert_eq!(g.nodes[n13].point.side, Side::Minus);
        assert_eq!(g.nodes[n23].point.side, Side::Plus);
        assert_eq!(g.edges.len(), 4);
    }

    #[test]
    fn full_interval_orbit_graph() {
        let g = graph(&systems::full_interval().unwrap(), 2);
        let (n0, n1) = (node(&g, 0.0), node(&g, 1.0));
        let minus = g.find(0.5, Side::Minus).unwrap();
        let plus = g.find(0.5, Side::Plus).unwrap();
        assert!(g.has_edge(minus, n1, b(1, 1)));
        assert!(g.has_edge(plus, n0, b(2, 1)));
        assert!(g.has_edge(n0, n0, b(1, 1)) && g.has_edge(n1, n1, b(2, 1)));
        assert!(!g.has_edge(minus, n0, b(2, 1)));
    }

    #[test]
    fn orbit_matrix_radius() {
        use crate::markov::spectral_radius;
        for (f, base) in [(systems::cantor().unwrap(), 3.0_f64), (systems::full_interval().unwrap(), 2.0)] {
            let g = graph(&f, 6);
            for s in [0.25, 0.5, 1.0] {
                let r = spectral_radius(&orbit_matrix(&g).materialize(s), 1e-12).unwrap();
                assert!((r - base.powf(-s)).abs() < 1e-12);
            }
        }
        let empty = OrbitGraph { nodes: vec![], edges: vec![], depth: 1, truncated: false, doubled: vec![] };
        assert_eq!(spectral_radius(&orbit_matrix(&empty).materialize(1.0), 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn isolated_start_point() {
        // 1/10 is a partition endpoint of the worked example; at depth 1 its
        // right copy has no defined inverse branch landing in the image.
        let g = graph(&systems::example_5_1().unwrap(), 1);
        let id = g.find(1.0 / 6.0, Side::Minus).or_else(|| g.find(1.0 / 6.0, Side::Plain)).unwrap();
        assert!(g.edges.iter().all(|e| e.from != id));
    }

    #[test]
    fn edges_reverify() {
        for f in [systems::example_5_1().unwrap(), systems::kinked_separated().unwrap(), systems::negative_slopes().unwrap()] {
            let g = graph(&f, 5);
            let d = Dynamics::new(&f).unwrap();
            for e in &g.edges {
                let br = d.branch(e.branch).unwrap();
                let y = br.inverse(g.nodes[e.from].point.value);
                assert!((g.nodes[e.to].point.value - y).abs() <= EQ_TOL);
            }
        }
    }

    #[test]
    fn periodic_examples() {
        let flags = periodic_critical_orbit_check(&systems::example_5_1().unwrap(), 4).unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!((flags[0].value, flags[0].period), (0.0, 1));
        assert!(periodic_critical_orbit_check(&systems::cantor().unwrap(), 6).unwrap().is_empty());
        assert!(periodic_critical_orbit_check(&systems::full_interval().unwrap(), 6).unwrap().is_empty());
    }

    #[test]
    fn overlap_examples() {
        let three = generated_self_similar(&systems::three_map_overlap().unwrap());
        let r = exact_overlap_search(&three, 2).unwrap();
        assert!(r.exact_mode);
        assert_eq!(r.first_overlap_depth(), Some(2));
        assert!(r.pairs.iter().any(|p| p.word_i == vec![0, 1] && p.word_j == vec![2, 0] && p.verdict == Verdict::Exact && p.gap == 0.0));

        let ex = generated_self_similar(&systems::example_5_1().unwrap());
        let r = exact_overlap_search(&ex, 2).unwrap();
        assert!(r.pairs.iter().any(|p| p.depth == 2 && p.word_i == vec![0, 1] && p.word_j == vec![1, 0]));
        assert!((r.pairs[0].slope - 2.0 / 25.0).abs() < 1e-15);

        let c = generated_self_similar(&systems::cantor().unwrap());
        assert!(!exact_overlap_search(&c, 4).unwrap().has_overlap());
    }

    #[test]
    fn float_mode_is_suspected_only() {
        let three = similarity_system(&[(0.5, 0.0), (0.5, 0.5), (0.5, 0.25)]);
        let r = exact_overlap_search(&three, 2).unwrap();
        assert!(!r.exact_mode && r.has_overlap() && !r.has_exact_overlap());
        assert!(r.pairs.iter().all(|p| p.verdict == Verdict::Suspected));

        // Close but not equal in rationals.
        let near = exact_similarity_system(&[("1/2", "0"), ("1/2", "1/2"), ("1/2", "1/4"), ("1/2", "1/4000000000000")]).unwrap();
        let r = exact_overlap_search(&near, 1).unwrap();
        assert!(r.pairs.iter().any(|p| p.verdict == Verdict::Suspected && p.gap > 0.0));
    }

    #[test]
    fn esc_examples() {
        let c = generated_self_similar(&systems::cantor().unwrap());
        let e = esc_min_distance(&c, 2).unwrap();
        assert!((e.distance - 2.0 / 9.0).abs() < 1e-15);
        assert!((e.c_estimate.unwrap() - (2.0_f64 / 9.0).sqrt()).abs() < 1e-15);

        let ex = generated_self_similar(&systems::example_5_1().unwrap());
        assert_eq!(esc_min_distance(&ex, 2).unwrap().distance, 0.0);

        let distinct = similarity_system(&[(0.5, 0.0), (0.3, 0.6)]);
        let e = esc_min_distance(&distinct, 1).unwrap();
        assert_eq!((e.distance, e.c_estimate), (f64::INFINITY, None));
    }

    #[test]
    fn overlaps_propagate_by_suffix() {
        let three = generated_self_similar(&systems::three_map_overlap().unwrap());
        let r = exact_overlap_search(&three, 3).unwrap();
        for w in 0..3 {
            assert!(r.pairs.iter().any(|p| p.word_i == vec![0, 1, w] && p.word_j == vec![2, 0, w] && p.verdict == Verdict::Exact));
        }
    }
}
