//! Markov diagram of the expanding multi-valued map whose branches are the
//! inverses of the linearity pieces, and the pressure read off its matrix.
//!
//! Nodes are closed intervals. Starting from the monotonicity partition,
//! each node `C` is pulled back by every branch `f_{k,j}^{-1}` that is
//! defined on a non-degenerate part of `C`, and the preimage is cut by the
//! partition cells. The matrix entry between two nodes sums `|ρ_{k,j}|^s`
//! over the labels connecting them.

mod spectral;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use spectral::{
    components, spectral_radius, tarjan_scc, Scc, SparseMatrix, WeightedGraphMatrix, DEFAULT_RADIUS_TOL,
};

use crate::exec::{map_indexed, Exec};
use crate::export::fmt_num;
use crate::ifs::{Branch, Cplifs, Interval};
use crate::pressure::{bisect_decreasing, s_upper, DimensionResult, Method};
use crate::{Error, Result, EQ_TOL};

/// One linearity branch restricted to the supporting interval.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchInfo {
    pub label: Branch,
    pub slope: f64,
    pub translation: f64,
    /// Closure of the linearity piece intersected with `I`.
    pub piece: Interval,
    /// Image of `piece`: where the inverse branch is defined.
    pub domain: Interval,
}

impl BranchInfo {
    pub fn inverse(&self, x: f64) -> f64 {
        (x - self.translation) / self.slope
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.slope * x + self.translation
    }
}

/// Data shared by the partition, diagram and orbit-graph constructions.
#[derive(Clone, Debug, PartialEq)]
pub struct Dynamics {
    pub support: Interval,
    /// First-level cylinders `f_k(I)`.
    pub images: Vec<Interval>,
    /// Connected components of `⋃ f_k(I)`, sorted.
    pub components: Vec<Interval>,
    pub branches: Vec<BranchInfo>,
    pub rho_max: f64,
    pub maps: usize,
}

impl Dynamics {
    pub fn new(f: &Cplifs) -> Result<Dynamics> {
        let support = f.support()?;
        let images: Vec<Interval> = f.maps().iter().map(|g| g.image(&support)).collect();
        let mut sorted = images.clone();
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut components: Vec<Interval> = Vec::new();
        for j in sorted {
            match components.last_mut() {
                Some(c) if j.lo <= c.hi + EQ_TOL => c.hi = c.hi.max(j.hi),
                _ => components.push(j),
            }
        }
        let mut branches = Vec::new();
        for label in f.branches() {
            let g = &f.maps()[label.map];
            let (lo, hi) = g.piece_bounds(label.piece);
            let Some(piece) = support.intersect(&Interval { lo, hi }) else { continue };
            let slope = g.slopes()[label.piece];
            let translation = g.translations()[label.piece];
            let domain = Interval::spanning(slope * piece.lo + translation, slope * piece.hi + translation);
            branches.push(BranchInfo { label, slope, translation, piece, domain });
        }
        Ok(Dynamics { support, images, components, branches, rho_max: f.rho_max(), maps: f.len() })
    }

    /// Membership in `⋃ f_k(I)` up to `tol`.
    pub fn in_image(&self, x: f64, tol: f64) -> bool {
        self.components.iter().any(|c| c.contains(x, tol))
    }

    /// Interior of `⋃ f_k(I)`.
    pub fn is_inner(&self, x: f64) -> bool {
        self.components.iter().any(|c| x > c.lo + EQ_TOL && x < c.hi - EQ_TOL)
    }

    pub fn branch(&self, label: Branch) -> Option<&BranchInfo> {
        self.branches.iter().find(|b| b.label == label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriticalKind {
    EndpointImage,
    BreakpointImage,
    Crossing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub value: f64,
    pub kinds: Vec<CriticalKind>,
}

impl CriticalPoint {
    pub fn is(&self, kind: CriticalKind) -> bool {
        self.kinds.contains(&kind)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalSet {
    pub points: Vec<CriticalPoint>,
    /// Values of the points interior to `⋃ f_k(I)`.
    pub inner: Vec<f64>,
}

impl CriticalSet {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

pub fn critical_points(f: &Cplifs) -> Result<CriticalSet> {
    let dynamics = Dynamics::new(f)?;
    Ok(critical_points_of(f, &dynamics))
}

/// Endpoint images `f_k(u), f_k(v)` of `I = [u, v]`, images of the
/// breakpoints lying in `I`, and crossing points where two inverse
/// branches agree on a common preimage in `I`.
pub fn critical_points_of(f: &Cplifs, dynamics: &Dynamics) -> CriticalSet {
    let i = dynamics.support;
    let mut raw: Vec<(f64, CriticalKind)> = Vec::new();
    for g in f.maps() {
        raw.push((g.eval(i.lo), CriticalKind::EndpointImage));
        raw.push((g.eval(i.hi), CriticalKind::EndpointImage));
        for &b in g.breakpoints().iter().filter(|&&b| i.contains(b, 0.0)) {
            raw.push((g.eval(b), CriticalKind::BreakpointImage));
        }
    }
    let br = &dynamics.branches;
    for (p, a) in br.iter().enumerate() {
        for b in &br[p + 1..] {
            if a.slope == b.slope {
                continue;
            }
            let x = (b.slope * a.translation - a.slope * b.translation) / (b.slope - a.slope);
            let y = a.inverse(x);
            if a.piece.contains(y, EQ_TOL) && b.piece.contains(y, EQ_TOL) && dynamics.in_image(x, EQ_TOL) {
                raw.push((x, CriticalKind::Crossing));
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut points: Vec<CriticalPoint> = Vec::new();
    for (x, kind) in raw {
        match points.last_mut() {
            Some(p) if (x - p.value).abs() <= EQ_TOL => {
                if !p.kinds.contains(&kind) {
                    p.kinds.push(kind);
                    p.kinds.sort();
                }
            }
            _ => points.push(CriticalPoint { value: x, kinds: vec![kind] }),
        }
    }
    let inner = points.iter().map(|p| p.value).filter(|&x| dynamics.is_inner(x)).collect();
    CriticalSet { points, inner }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub cells: Vec<Interval>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cell endpoints in increasing order, shared endpoints listed once.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for c in &self.cells {
            for x in [c.lo, c.hi] {
                if out.last().map_or(true, |&l| (x - l).abs() > EQ_TOL) {
                    out.push(x);
                }
            }
        }
        out
    }
}

pub fn monotonicity_partition(f: &Cplifs, refinement: &[f64]) -> Result<Partition> {
    let dynamics = Dynamics::new(f)?;
    let crit = critical_points_of(f, &dynamics);
    partition_of(&dynamics, &crit, refinement)
}

/// Cut `⋃ f_k(I)` at the critical points, the component boundaries and
/// the refinement points.
pub fn partition_of(dynamics: &Dynamics, crit: &CriticalSet, refinement: &[f64]) -> Result<Partition> {
    if let Some(x) = refinement.iter().find(|&&x| !dynamics.in_image(x, EQ_TOL)) {
        return Err(Error::InvalidArgument(format!("refinement point {x} lies outside the first-level image")));
    }
    let mut cuts: Vec<f64> = crit.values();
    cuts.extend(dynamics.components.iter().flat_map(|c| [c.lo, c.hi]));
    cuts.extend_from_slice(refinement);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|b, a| (*b - *a).abs() <= EQ_TOL);
    let cells = cuts
        .windows(2)
        .map(|w| Interval::new(w[0], w[1]))
        .filter(|c| c.len() > EQ_TOL && dynamics.in_image(c.mid(), 0.0))
        .collect();
    Ok(Partition { cells })
}

/// Images of the inner crossing points under inverse branches, up to
/// `depth` steps, as optional extra cut points.
pub fn crossing_orbit_refinement(f: &Cplifs, depth: usize) -> Result<Vec<f64>> {
    const LIMIT: usize = 10_000;
    let dynamics = Dynamics::new(f)?;
    let crit = critical_points_of(f, &dynamics);
    let known = crit.values();
    let mut frontier: Vec<f64> = crit
        .points
        .iter()
        .filter(|p| p.is(CriticalKind::Crossing) && dynamics.is_inner(p.value))
        .map(|p| p.value)
        .collect();
    let mut out: Vec<f64> = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for &x in &frontier {
            for b in dynamics.branches.iter().filter(|b| b.domain.contains(x, EQ_TOL)) {
                let y = b.inverse(x);
                let seen = known.iter().chain(&out).chain(&next).any(|&z| (z - y).abs() <= EQ_TOL);
                if !seen && dynamics.is_inner(y) {
                    next.push(y);
                }
            }
        }
        if next.is_empty() || out.len() + next.len() > LIMIT {
            break;
        }
        out.extend_from_slice(&next);
        frontier = next;
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Labeled successors of `c`: for each branch, the part of `c` inside the
/// branch domain is pulled back and cut by every cell. Pieces no longer
/// than the point tolerance are dropped.
pub fn successors(c: &Interval, dynamics: &Dynamics, partition: &Partition) -> Vec<(Interval, Branch)> {
    let mut out = Vec::new();
    for b in &dynamics.branches {
        let Some(r) = c.intersect(&b.domain) else { continue };
        if r.len() <= EQ_TOL {
            continue;
        }
        let pre = Interval::spanning(b.inverse(r.lo), b.inverse(r.hi));
        for cell in &partition.cells {
            if let Some(d) = pre.intersect(cell) {
                if d.len() > EQ_TOL {
                    out.push((d, b.label));
                }
            }
        }
    }
    out
}

/// Provenance of a node: the base cell it descends from and the branch
/// labels used to reach it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCode {
    pub cell: usize,
    pub word: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramNode {
    pub interval: Interval,
    pub level: usize,
    pub code: NodeCode,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub branch: Branch,
    pub abs_slope: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthStatus {
    /// Successor-closed: the diagram is complete.
    Closed,
    LevelCap,
    NodeCap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagramCaps {
    pub max_level: usize,
    pub max_nodes: usize,
}

impl Default for DiagramCaps {
    fn default() -> Self {
        DiagramCaps { max_level: 40, max_nodes: 10_000 }
    }
}

impl DiagramCaps {
    pub fn levels(max_level: usize) -> Self {
        DiagramCaps { max_level, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovDiagram {
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<Edge>,
    pub status: GrowthStatus,
}

impl MarkovDiagram {
    pub fn closed(&self) -> bool {
        self.status == GrowthStatus::Closed
    }

    pub fn levels(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn matrix(&self) -> WeightedGraphMatrix {
        let mut w = WeightedGraphMatrix::new(self.nodes.len());
        for e in &self.edges {
            w.push(e.from, e.to, e.abs_slope);
        }
        w
    }

    pub fn successor_lists(&self) -> Vec<Vec<usize>> {
        self.matrix().successor_lists()
    }

    pub fn strongly_connected_components(&self) -> Vec<Scc> {
        components(&self.successor_lists())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph markov {\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{}@{}\"];", n.interval, n.level);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}:{}\"];", e.from, e.to, e.branch, fmt_num(e.abs_slope));
        }
        out.push_str("}\n");
        out
    }

    pub const CSV_HEADER: &'static str = "from_lo,from_hi,to_lo,to_hi,k,j,abs_slope";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for e in &self.edges {
            let (a, b) = (self.nodes[e.from].interval, self.nodes[e.to].interval);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_num(a.lo),
                fmt_num(a.hi),
                fmt_num(b.lo),
                fmt_num(b.hi),
                e.branch.map + 1,
                e.branch.piece + 1,
                fmt_num(e.abs_slope)
            );
        }
        out
    }
}

/// Interval lookup with tolerance `EQ_TOL` on both endpoints.
#[derive(Default)]
struct IntervalIndex {
    by_lo: BTreeMap<i64, Vec<usize>>,
}

fn order_key(x: f64) -> i64 {
    let b = x.to_bits() as i64;
    if b < 0 {
        b ^ i64::MAX
    } else {
        b
    }
}

impl IntervalIndex {
    fn find(&self, j: &Interval, nodes: &[DiagramNode]) -> Option<usize> {
        self.by_lo
            .range(order_key(j.lo - EQ_TOL)..=order_key(j.lo + EQ_TOL))
            .flat_map(|(_, ids)| ids.iter().copied())
            .find(|&id| nodes[id].interval.approx_eq(j, EQ_TOL))
    }

    fn insert(&mut self, j: &Interval, id: usize) {
        self.by_lo.entry(order_key(j.lo)).or_default().push(id);
    }
}

pub fn grow_diagram(f: &Cplifs, partition: &Partition, caps: DiagramCaps) -> Result<MarkovDiagram> {
    Ok(grow_diagram_with(&Dynamics::new(f)?, partition, caps, Exec::default()))
}

/// Breadth-first successor closure from the partition cells. Nodes refused
/// by a cap are left out together with their incoming edges, so the matrix
/// is a principal submatrix of the full one.
pub fn grow_diagram_with(dynamics: &Dynamics, partition: &Partition, caps: DiagramCaps, exec: Exec) -> MarkovDiagram {
    let mut nodes: Vec<DiagramNode> = Vec::new();
    let mut index = IntervalIndex::default();
    for (i, c) in partition.cells.iter().enumerate() {
        index.insert(c, nodes.len());
        nodes.push(DiagramNode { interval: *c, level: 0, code: NodeCode { cell: i, word: vec![] } });
    }
    let slope = |b: Branch| dynamics.branch(b).map_or(0.0, |x| x.slope.abs());
    let mut edges = Vec::new();
    let mut status = GrowthStatus::Closed;
    let mut frontier: Vec<usize> = (0..nodes.len()).collect();
    let mut level = 0;
    while !frontier.is_empty() {
        let succ = map_indexed(exec, frontier.len(), |i| successors(&nodes[frontier[i]].interval, dynamics, partition));
        let mut next = Vec::new();
        for (&from, list) in frontier.iter().zip(succ) {
            for (d, b) in list {
                let to = match index.find(&d, &nodes) {
                    Some(id) => id,
                    None if level + 1 > caps.max_level => {
                        if status == GrowthStatus::Closed {
                            status = GrowthStatus::LevelCap;
                        }
                        continue;
                    }
                    None if nodes.len() >= caps.max_nodes => {
                        status = GrowthStatus::NodeCap;
                        continue;
                    }
                    None => {
                        let mut code = nodes[from].code.clone();
                        code.word.push(b);
                        let id = nodes.len();
                        index.insert(&d, id);
                        nodes.push(DiagramNode { interval: d, level: level + 1, code });
                        next.push(id);
                        id
                    }
                };
                edges.push(Edge { from, to, branch: b, abs_slope: slope(b) });
            }
        }
        frontier = next;
        level += 1;
    }
    MarkovDiagram { nodes, edges, status }
}

/// A grown diagram with everything needed to evaluate its pressure.
#[derive(Clone, Debug)]
pub struct MarkovModel {
    pub dynamics: Dynamics,
    pub partition: Partition,
    pub diagram: MarkovDiagram,
    pub matrix: WeightedGraphMatrix,
    pub radius_tol: f64,
}

impl MarkovModel {
    pub fn build(f: &Cplifs, refinement: &[f64], caps: DiagramCaps) -> Result<MarkovModel> {
        MarkovModel::build_with(f, refinement, caps, Exec::default())
    }

    pub fn build_with(f: &Cplifs, refinement: &[f64], caps: DiagramCaps, exec: Exec) -> Result<MarkovModel> {
        let dynamics = Dynamics::new(f)?;
        let crit = critical_points_of(f, &dynamics);
        let partition = partition_of(&dynamics, &crit, refinement)?;
        Ok(MarkovModel::from_partition(dynamics, partition, caps, exec))
    }

    pub fn from_partition(dynamics: Dynamics, partition: Partition, caps: DiagramCaps, exec: Exec) -> MarkovModel {
        let diagram = grow_diagram_with(&dynamics, &partition, caps, exec);
        let matrix = diagram.matrix();
        MarkovModel { dynamics, partition, diagram, matrix, radius_tol: DEFAULT_RADIUS_TOL }
    }

    pub fn radius(&self, s: f64) -> Result<f64> {
        spectral_radius(&self.matrix.materialize(s), self.radius_tol)
    }

    /// `log ϱ(F(s))`; `-inf` for a nilpotent matrix.
    pub fn pressure(&self, s: f64) -> Result<f64> {
        Ok(self.radius(s)?.ln())
    }

    pub fn dimension(&self, tol: f64) -> Result<DimensionResult> {
        let bracket = bisect_decreasing(|s| self.pressure(s), s_upper(self.dynamics.maps, self.dynamics.rho_max), tol)?;
        Ok(DimensionResult {
            value: bracket.mid(),
            method: Method::Markov,
            bracket,
            depth: self.diagram.levels(),
            lower_bound: !self.diagram.closed(),
        })
    }
}

pub fn pressure_via_diagram(f: &Cplifs, partition: &Partition, s: f64, r: usize) -> Result<f64> {
    let model = MarkovModel::from_partition(Dynamics::new(f)?, partition.clone(), DiagramCaps::levels(r), Exec::default());
    model.pressure(s)
}

pub fn natural_dimension_markov(f: &Cplifs, partition: &Partition, r: usize, tol: f64) -> Result<DimensionResult> {
    let model = MarkovModel::from_partition(Dynamics::new(f)?, partition.clone(), DiagramCaps::levels(r), Exec::default());
    model.dimension(tol)
}

/// One row of an exported edge list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeRow {
    pub from: Interval,
    pub to: Interval,
    pub branch: Branch,
    pub abs_slope: f64,
}

pub fn parse_edge_csv(text: &str) -> Result<Vec<EdgeRow>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == MarkovDiagram::CSV_HEADER {
            continue;
        }
        let bad = || Error::Config(format!("edge csv line {}: {line:?}", ln + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad());
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let idx = |s: &str| s.trim().parse::<usize>().ok().filter(|&v| v >= 1).ok_or_else(bad);
        rows.push(EdgeRow {
            from: Interval::new(num(f[0])?, num(f[1])?),
            to: Interval::new(num(f[2])?, num(f[3])?),
            branch: Branch { map: idx(f[4])? - 1, piece: idx(f[5])? - 1 },
            abs_slope: num(f[6])?,
        });
    }
    Ok(rows)
}

/// Recompute each edge from its source interval; returns one message per
/// edge that is not reproduced.
pub fn verify_edges(dynamics: &Dynamics, partition: &Partition, rows: &[EdgeRow]) -> Vec<String> {
    let tol = 1e-9;
    rows.iter()
        .enumerate()
        .filter_map(|(i, row)| {
            let found = successors(&row.from, dynamics, partition)
                .iter()
                .any(|(d, b)| *b == row.branch && d.approx_eq(&row.to, tol));
            let slope_ok = dynamics.branch(row.branch).is_some_and(|b| (b.slope.abs() - row.abs_slope).abs() <= tol);
            (!found || !slope_ok).then(|| format!("edge {}: {} -> {} via {} not reproduced", i + 1, row.from, row.to, row.branch))
        })
        .collect()
}
