//! Sparse nonnegative matrices, strongly connected components, and the
//! spectral radius by per-component power iteration.

use crate::{Error, Result};

/// Weighted edge list; each edge carries `|ρ|` and contributes `|ρ|^s`
/// once materialised at exponent `s`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedGraphMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl WeightedGraphMatrix {
    pub fn new(n: usize) -> Self {
        WeightedGraphMatrix { n, entries: Vec::new() }
    }

    pub fn push(&mut self, from: usize, to: usize, weight: f64) {
        debug_assert!(from < self.n && to < self.n && weight > 0.0);
        self.entries.push((from, to, weight));
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Sum `weight^s` over parallel edges.
    pub fn materialize(&self, s: f64) -> SparseMatrix {
        let trip: Vec<(usize, usize, f64)> = self.entries.iter().map(|&(r, c, w)| (r, c, w.powf(s))).collect();
        SparseMatrix::from_triplets(self.n, &trip)
    }

    pub fn successor_lists(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for &(r, c, _) in &self.entries {
            out[r].push(c);
        }
        for l in &mut out {
            l.sort_unstable();
            l.dedup();
        }
        out
    }
}

/// Compressed sparse rows, duplicate entries summed.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(n: usize, trip: &[(usize, usize, f64)]) -> Self {
        let mut sorted = trip.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut vals: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if v == 0.0 {
                continue;
            }
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n, row_ptr, cols, vals }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let trip: Vec<(usize, usize, f64)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)))
            .collect();
        SparseMatrix::from_triplets(n, &trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                out[i][c] = v;
            }
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    fn successor_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.row(i).map(|(c, _)| c).collect()).collect()
    }

    /// Principal submatrix on `idx` (in the given order).
    fn restrict(&self, idx: &[usize]) -> SparseMatrix {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let trip: Vec<(usize, usize, f64)> = idx
            .iter()
            .enumerate()
            .flat_map(|(k, &i)| self.row(i).filter(|&(c, _)| pos[c] != usize::MAX).map(move |(c, v)| (k, c, v)).collect::<Vec<_>>())
            .map(|(k, c, v)| (k, pos[c], v))
            .collect();
        SparseMatrix::from_triplets(idx.len(), &trip)
    }
}

/// Strongly connected components (Tarjan, iterative), in reverse
/// topological order of the condensation. Each component's nodes are sorted.
pub fn tarjan_scc(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*ei) {
                *ei += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scc {
    pub nodes: Vec<usize>,
    /// No edge leaves the component.
    pub closed: bool,
}

pub fn components(succ: &[Vec<usize>]) -> Vec<Scc> {
    let comps = tarjan_scc(succ);
    let mut owner = vec![0; succ.len()];
    for (c, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            owner[v] = c;
        }
    }
    comps
        .into_iter()
        .enumerate()
        .map(|(c, nodes)| {
            let closed = nodes.iter().all(|&v| succ[v].iter().all(|&w| owner[w] == c));
            Scc { nodes, closed }
        })
        .collect()
}

pub const DEFAULT_RADIUS_TOL: f64 = 1e-12;

/// Spectral radius of a nonnegative matrix, the maximum over strongly
/// connected components.
pub fn spectral_radius(m: &SparseMatrix, tol: f64) -> Result<f64> {
    if m.vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidArgument("matrix must be finite and nonnegative".into()));
    }
    let sums = m.row_sums();
    let mut best = 0.0_f64;
    for comp in tarjan_scc(&m.successor_lists()) {
        // Row sums inside the component bound its radius from above.
        let bound = comp.iter().map(|&i| sums[i]).fold(0.0, f64::max);
        if bound <= best {
            continue;
        }
        let r = if comp.len() == 1 { m.get(comp[0], comp[0]) } else { irreducible_radius(&m.restrict(&comp), tol)? };
        best = best.max(r);
    }
    Ok(best)
}

/// Power iteration on an irreducible block with Collatz–Wielandt bounds.
/// A shift `c·Id` breaks periodicity; escalated until the bounds meet.
fn irreducible_radius(a: &SparseMatrix, tol: f64) -> Result<f64> {
    let rowmax = a.row_sums().into_iter().fold(0.0, f64::max);
    if rowmax == 0.0 {
        return Ok(0.0);
    }
    let n = a.dimension();
    for (c, cap) in [(0.0, 2_000), (rowmax * 1e-3, 50_000), (rowmax, 200_000)] {
        let mut x = vec![1.0; n];
        let mut y = vec![0.0; n];
        for _ in 0..cap {
            let (mut lo, mut hi, mut top) = (f64::INFINITY, 0.0_f64, 0.0_f64);
            for i in 0..n {
                let v: f64 = a.row(i).map(|(j, w)| w * x[j]).sum::<f64>() + c * x[i];
                y[i] = v;
                let q = v / x[i];
                lo = lo.min(q);
                hi = hi.max(q);
                top = top.max(v);
            }
            if !(top.is_finite() && top > 0.0 && lo.is_finite()) {
                break;
            }
            if hi - lo <= tol * hi {
                return Ok(0.5 * (lo + hi) - c);
            }
            for i in 0..n {
                x[i] = y[i] / top;
            }
            if x.iter().any(|&v| v == 0.0) {
                break;
            }
        }
    }
    Err(Error::NoConvergence(format!("power iteration on a {n}-node component")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_examples() {
        for s in [0.3, 0.63, 1.0] {
            let w = 3f64.powf(-s);
            let m = SparseMatrix::from_dense(&[vec![w, w], vec![w, w]]);
            assert!((spectral_radius(&m, 1e-12).unwrap() - 2.0 * w).abs() < 1e-12);
        }
        let z = SparseMatrix::from_dense(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]);
        assert_eq!(spectral_radius(&z, 1e-12).unwrap(), 0.0);
        let d = SparseMatrix::from_dense(&[vec![0.7, 0.0], vec![0.0, 0.7]]);
        assert_eq!(spectral_radius(&d, 1e-12).unwrap(), 0.7);
    }

    #[test]
    fn periodic_block_needs_shift() {
        // Cycle of length 3 with weights 2, 1/2, 1: radius 1.
        let m = SparseMatrix::from_dense(&[vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.5], vec![1.0, 0.0, 0.0]]);
        assert!((spectral_radius(&m, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reducible_takes_max_component() {
        let m = SparseMatrix::from_dense(&[vec![0.5, 1.0, 0.0], vec![0.0, 0.2, 0.3], vec![0.0, 0.3, 0.2]]);
        assert!((spectral_radius(&m, 1e-12).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parallel_edges_are_summed() {
        let mut w = WeightedGraphMatrix::new(2);
        w.push(0, 1, 0.5);
        w.push(0, 1, 0.25);
        w.push(1, 1, 0.5);
        let m = w.materialize(1.0);
        assert_eq!(m.get(0, 1), 0.75);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.nnz(), 2);
        assert_eq!(w.materialize(0.0).get(0, 1), 2.0);
    }

    #[test]
    fn scc_examples() {
        let edgeless = components(&[vec![], vec![], vec![]]);
        assert_eq!(edgeless.len(), 3);
        assert!(edgeless.iter().all(|c| c.nodes.len() == 1 && c.closed));

        let chain = components(&[vec![1], vec![]]);
        assert_eq!(chain.len(), 2);
        let b = chain.iter().find(|c| c.nodes == vec![1]).unwrap();
        let a = chain.iter().find(|c| c.nodes == vec![0]).unwrap();
        assert!(b.closed && !a.closed);

        let cyc = components(&[vec![1], vec![0]]);
        assert_eq!(cyc, vec![Scc { nodes: vec![0, 1], closed: true }]);
    }

    #[test]
    fn deep_chain_does_not_recurse() {
        let n = 200_000;
        let succ: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![0] }).collect();
        assert_eq!(tarjan_scc(&succ).len(), 1);
    }
}
