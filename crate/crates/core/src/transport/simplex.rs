//! Network simplex on the complete bipartite transport graph.
//!
//! The basis is a spanning tree of `n + m - 1` arcs, started from the
//! north-west corner rule. Entering arcs are priced by block search
//! (most negative reduced cost within a block). After a run of degenerate
//! pivots the solver switches to Bland's rule (lowest arc index enters,
//! lowest arc index leaves among ties) until progress resumes, which rules
//! out cycling.

use ndarray::Array2;

use crate::error::{Error, Result};

const DEGENERATE_RUN_BEFORE_BLAND: usize = 32;

#[derive(Debug, Clone, Copy)]
struct TreeArc {
    source: usize,
    target: usize,
    flow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pricing {
    Block,
    Bland,
}

pub(crate) struct NetworkSimplex<'a> {
    supply: &'a [f64],
    demand: &'a [f64],
    cost: &'a Array2<f64>,
    arcs: Vec<TreeArc>,
    adjacency: Vec<Vec<usize>>,
    // Rooted-tree view of the basis, kept current across pivots.
    parent_arc: Vec<usize>,
    parent: Vec<usize>,
    depth: Vec<usize>,
    potential: Vec<f64>,
    cursor: usize,
    block: usize,
    pub(crate) pivots: usize,
}

impl<'a> NetworkSimplex<'a> {
    pub(crate) fn new(supply: &'a [f64], demand: &'a [f64], cost: &'a Array2<f64>) -> Self {
        let (n, m) = (supply.len(), demand.len());
        let nodes = n + m;
        let block = ((n * m) as f64).sqrt().ceil().max(16.0) as usize;
        let mut solver = Self {
            supply,
            demand,
            cost,
            arcs: Vec::with_capacity(nodes - 1),
            adjacency: vec![Vec::new(); nodes],
            parent_arc: vec![usize::MAX; nodes],
            parent: vec![usize::MAX; nodes],
            depth: vec![0; nodes],
            potential: vec![0.0; nodes],
            cursor: 0,
            block,
            pivots: 0,
        };
        solver.north_west_corner();
        solver
    }

    fn n(&self) -> usize {
        self.supply.len()
    }

    fn m(&self) -> usize {
        self.demand.len()
    }

    fn north_west_corner(&mut self) {
        let (n, m) = (self.n(), self.m());
        let mut left: Vec<f64> = self.supply.to_vec();
        let mut right: Vec<f64> = self.demand.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let flow = left[i].min(right[j]).max(0.0);
            self.push_arc(TreeArc {
                source: i,
                target: j,
                flow,
            });
            let source_exhausted = left[i] <= right[j];
            left[i] -= flow;
            right[j] -= flow;
            if i == n - 1 && j == m - 1 {
                break;
            }
            if i == n - 1 {
                j += 1;
            } else if j == m - 1 || source_exhausted {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(self.arcs.len(), n + m - 1);
    }

    fn push_arc(&mut self, arc: TreeArc) {
        let id = self.arcs.len();
        let n = self.n();
        self.adjacency[arc.source].push(id);
        self.adjacency[n + arc.target].push(id);
        self.arcs.push(arc);
    }

    /// Full BFS from node 0 filling parents, depths and dual potentials.
    /// Sources carry `u_i`, targets `v_j`, with `u_i + v_j = C_ij` on tree arcs.
    fn build_tree(&mut self) {
        self.parent[0] = usize::MAX;
        self.parent_arc[0] = usize::MAX;
        self.depth[0] = 0;
        self.potential[0] = 0.0;
        self.hang_subtree(0);
    }

    /// Re-derives parent links, depths and potentials below `top`, whose own
    /// entries must already be correct.
    fn hang_subtree(&mut self, top: usize) {
        let n = self.n();
        let mut stack = vec![top];
        while let Some(node) = stack.pop() {
            for k in 0..self.adjacency[node].len() {
                let id = self.adjacency[node][k];
                if id == self.parent_arc[node] {
                    continue;
                }
                let arc = self.arcs[id];
                let other = if node < n { n + arc.target } else { arc.source };
                self.parent[other] = node;
                self.parent_arc[other] = id;
                self.depth[other] = self.depth[node] + 1;
                self.potential[other] = self.cost[[arc.source, arc.target]] - self.potential[node];
                stack.push(other);
            }
        }
    }

    fn in_subtree(&self, mut node: usize, top: usize) -> bool {
        while self.depth[node] > self.depth[top] {
            node = self.parent[node];
        }
        node == top
    }

    fn reduced_cost(&self, i: usize, j: usize) -> f64 {
        let n = self.n();
        self.cost[[i, j]] - self.potential[i] - self.potential[n + j]
    }

    fn find_entering(&mut self, pricing: Pricing, tol: f64) -> Option<(usize, usize)> {
        let (n, m) = (self.n(), self.m());
        let total = n * m;
        match pricing {
            Pricing::Bland => (0..total)
                .map(|a| (a / m, a % m))
                .find(|&(i, j)| self.reduced_cost(i, j) < -tol),
            Pricing::Block => {
                let mut best: Option<(usize, f64)> = None;
                let mut scanned = 0;
                while scanned < total {
                    let len = self.block.min(total - scanned);
                    for k in 0..len {
                        let a = (self.cursor + k) % total;
                        let rc = self.reduced_cost(a / m, a % m);
                        if rc < -tol && best.is_none_or(|(_, b)| rc < b) {
                            best = Some((a, rc));
                        }
                    }
                    self.cursor = (self.cursor + len) % total;
                    scanned += len;
                    if best.is_some() {
                        break;
                    }
                }
                best.map(|(a, _)| (a / m, a % m))
            }
        }
    }

    /// Tree arcs on the cycle closed by the entering arc, ordered starting
    /// at the entering arc's target. Even positions lose flow, odd gain.
    fn cycle(&self, i: usize, j: usize) -> Vec<usize> {
        let mut a = self.n() + j;
        let mut b = i;
        let mut from_target = Vec::new();
        let mut from_source = Vec::new();
        while self.depth[a] > self.depth[b] {
            from_target.push(self.parent_arc[a]);
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            from_source.push(self.parent_arc[b]);
            b = self.parent[b];
        }
        while a != b {
            from_target.push(self.parent_arc[a]);
            a = self.parent[a];
            from_source.push(self.parent_arc[b]);
            b = self.parent[b];
        }
        from_target.extend(from_source.into_iter().rev());
        from_target
    }

    pub(crate) fn solve(&mut self, max_pivots: usize) -> Result<Vec<(usize, usize, f64)>> {
        let m = self.m();
        let scale = self.cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        let tol = 1e-11 * scale.max(f64::MIN_POSITIVE);
        let mut pricing = Pricing::Block;
        let mut degenerate_run = 0;

        self.build_tree();
        while let Some((i, j)) = self.find_entering(pricing, tol) {
            if self.pivots >= max_pivots {
                return Err(Error::Solver {
                    message: format!("pivot limit {max_pivots} reached"),
                    row_residual: f64::NAN,
                    col_residual: f64::NAN,
                });
            }
            self.pivots += 1;

            let cycle = self.cycle(i, j);
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            let mut leaving_key = usize::MAX;
            for &id in cycle.iter().step_by(2) {
                let arc = self.arcs[id];
                let key = arc.source * m + arc.target;
                if arc.flow < theta || (arc.flow == theta && key < leaving_key) {
                    theta = arc.flow;
                    leaving = id;
                    leaving_key = key;
                }
            }

            for (pos, &id) in cycle.iter().enumerate() {
                let arc = &mut self.arcs[id];
                if pos % 2 == 0 {
                    arc.flow = (arc.flow - theta).max(0.0);
                } else {
                    arc.flow += theta;
                }
            }

            // Swap the leaving arc out of the tree and the entering arc in,
            // then re-hang the subtree that the leaving arc used to attach.
            let n = self.n();
            let old = self.arcs[leaving];
            let child = if self.parent_arc[old.source] == leaving {
                old.source
            } else {
                n + old.target
            };
            let (inside, outside) = if self.in_subtree(i, child) {
                (i, n + j)
            } else {
                (n + j, i)
            };
            self.adjacency[old.source].retain(|&x| x != leaving);
            self.adjacency[n + old.target].retain(|&x| x != leaving);
            self.arcs[leaving] = TreeArc {
                source: i,
                target: j,
                flow: theta,
            };
            self.adjacency[i].push(leaving);
            self.adjacency[n + j].push(leaving);
            self.parent[inside] = outside;
            self.parent_arc[inside] = leaving;
            self.depth[inside] = self.depth[outside] + 1;
            self.potential[inside] = self.cost[[i, j]] - self.potential[outside];
            self.hang_subtree(inside);

            if theta == 0.0 {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                    pricing = Pricing::Bland;
                }
            } else {
                degenerate_run = 0;
                pricing = Pricing::Block;
            }
        }

        Ok(self
            .arcs
            .iter()
            .map(|a| (a.source, a.target, a.flow))
            .collect())
    }
}
