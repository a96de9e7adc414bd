//! Leaf structure of a region along one block.
//!
//! A component `f_j` of a `C^n`-holomorphic tuple is locally constant along
//! the other blocks, so it lives on the space of connected components of the
//! slices `U ∩ pi_j^{-1}(a_j)`, glued across adjacent block-`j` cells. This
//! module labels those components, builds the gluing graph and lifts the
//! logarithm along it.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::region::{BlockShape, Grid, Region};

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        Self { parent: (0..len as u32).collect(), rank: vec![0; len] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

/// Connected components (face adjacency) of one slice.
#[derive(Clone, Debug)]
pub struct SliceComponents {
    pub j: usize,
    /// Block-`j` cell of the slice.
    pub block_cell: usize,
    /// Centre of the block-`j` cell.
    pub a_j: Vec<Complex64>,
    /// `(complementary cell, component id)` for every inside cell, sorted by cell.
    pub labels: Vec<(u32, u32)>,
    pub count: usize,
}

impl SliceComponents {
    pub fn label_of(&self, comp_cell: usize) -> Option<u32> {
        self.labels
            .binary_search_by_key(&(comp_cell as u32), |&(c, _)| c)
            .ok()
            .map(|i| self.labels[i].1)
    }
}

struct SliceGrids {
    block: Grid,
    comp: Grid,
}

fn slice_grids(region: &Region, j: usize) -> SliceGrids {
    SliceGrids {
        block: region.grid().sub_grid(&region.block_axes(j)),
        comp: region.grid().sub_grid(&region.complement_axes(j)),
    }
}

fn label_slice(region: &Region, j: usize, block_cell: usize, grids: &SliceGrids) -> SliceComponents {
    let comp = &grids.comp;
    let cells: Vec<u32> = (0..comp.total_cells())
        .filter(|&c| region.is_inside_cell(region.join_cell(block_cell, c, &grids.block, comp, j)))
        .map(|c| c as u32)
        .collect();
    let index_of = |c: usize| cells.binary_search(&(c as u32)).ok();
    let mut uf = UnionFind::new(cells.len());
    for (i, &c) in cells.iter().enumerate() {
        for a in 0..comp.axes() {
            if comp.axis_index(c as usize, a) + 1 < comp.counts()[a] {
                if let Some(k) = index_of(c as usize + comp.strides()[a]) {
                    uf.union(i as u32, k as u32);
                }
            }
        }
    }
    let mut ids = std::collections::HashMap::new();
    let mut labels = Vec::with_capacity(cells.len());
    for (i, &c) in cells.iter().enumerate() {
        let root = uf.find(i as u32);
        let next = ids.len() as u32;
        let id = *ids.entry(root).or_insert(next);
        labels.push((c, id));
    }
    let mut a_j = vec![Complex64::new(0.0, 0.0); grids.block.axes() / 2];
    grids.block.write_center(block_cell, &mut a_j);
    SliceComponents { j, block_cell, a_j, labels, count: ids.len() }
}

/// Labels the slice of `region` over the block-`j` value `a_j`.
pub fn slice_components(region: &Region, j: usize, a_j: &[Complex64]) -> Result<SliceComponents> {
    let block_cell = region.block_cell_of(j, a_j)?;
    region.shape().without(j)?;
    let grids = slice_grids(region, j);
    let s = label_slice(region, j, block_cell, &grids);
    if s.count == 0 {
        return Err(Error::EmptySlice);
    }
    Ok(s)
}

/// Node of a leaf graph: a slice component over a block-`j` cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeafNode {
    pub block_cell: u32,
    pub component: u32,
}

/// Slice components glued across face-adjacent block-`j` cells. Nodes are
/// sorted lexicographically and node 0 is the basepoint.
#[derive(Clone, Debug)]
pub struct LeafGraph {
    pub j: usize,
    shape: BlockShape,
    block_grid: Grid,
    comp_grid: Grid,
    slices: Vec<SliceComponents>,
    offsets: Vec<u32>,
    nodes: Vec<LeafNode>,
    edges: Vec<(u32, u32)>,
    adjacency: Vec<Vec<u32>>,
}

/// Builds the leaf graph of `region` along block `j`.
pub fn build_leaf_graph(region: &Region, j: usize) -> Result<LeafGraph> {
    region.shape().without(j)?;
    let grids = slice_grids(region, j);
    let projection = region.project(j)?;
    if projection.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let slices: Vec<SliceComponents> =
        projection.inside_cells().map(|b| label_slice(region, j, b, &grids)).collect();
    let mut offsets = Vec::with_capacity(slices.len());
    let mut nodes = Vec::new();
    for s in &slices {
        offsets.push(nodes.len() as u32);
        nodes.extend((0..s.count as u32).map(|c| LeafNode { block_cell: s.block_cell as u32, component: c }));
    }
    let slice_index = |b: usize| slices.binary_search_by_key(&b, |s| s.block_cell).ok();

    let mut edges = BTreeSet::new();
    let bg = &grids.block;
    for (si, s) in slices.iter().enumerate() {
        for a in 0..bg.axes() {
            if bg.axis_index(s.block_cell, a) + 1 >= bg.counts()[a] {
                continue;
            }
            let Some(ti) = slice_index(s.block_cell + bg.strides()[a]) else { continue };
            let t = &slices[ti];
            let (mut x, mut y) = (0, 0);
            while x < s.labels.len() && y < t.labels.len() {
                let (cx, lx) = s.labels[x];
                let (cy, ly) = t.labels[y];
                match cx.cmp(&cy) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        let u = offsets[si] + lx;
                        let v = offsets[ti] + ly;
                        edges.insert((u.min(v), u.max(v)));
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
    }
    let edges: Vec<(u32, u32)> = edges.into_iter().collect();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for &(u, v) in &edges {
        adjacency[u as usize].push(v);
        adjacency[v as usize].push(u);
    }
    adjacency.iter_mut().for_each(|a| a.sort_unstable());
    Ok(LeafGraph {
        j,
        shape: region.shape().clone(),
        block_grid: grids.block,
        comp_grid: grids.comp,
        slices,
        offsets,
        nodes,
        edges,
        adjacency,
    })
}

impl LeafGraph {
    pub fn nodes(&self) -> &[LeafNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn basepoint(&self) -> usize {
        0
    }

    pub fn slices(&self) -> &[SliceComponents] {
        &self.slices
    }

    pub fn block_grid(&self) -> &Grid {
        &self.block_grid
    }

    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }

    fn slice_pos(&self, block_cell: usize) -> Option<usize> {
        self.slices.binary_search_by_key(&block_cell, |s| s.block_cell).ok()
    }

    /// Nodes over a block-`j` cell.
    pub fn nodes_over(&self, block_cell: usize) -> std::ops::Range<usize> {
        match self.slice_pos(block_cell) {
            Some(i) => {
                let start = self.offsets[i] as usize;
                start..start + self.slices[i].count
            }
            None => 0..0,
        }
    }

    /// Nodes over the block-`j` cell containing `a_j`.
    pub fn nodes_at(&self, a_j: &[Complex64]) -> Result<std::ops::Range<usize>> {
        let b = self.block_grid.cell_of_point(a_j).ok_or(Error::OffGrid)?;
        Ok(self.nodes_over(b))
    }

    /// Centre `a_j` of a node's block cell.
    pub fn node_value(&self, node: usize) -> &[Complex64] {
        let b = self.nodes[node].block_cell as usize;
        &self.slices[self.slice_pos(b).expect("node cell has a slice")].a_j
    }

    /// Node containing the full point `z`.
    pub fn locate(&self, z: &[Complex64]) -> Result<usize> {
        if z.len() != self.shape.total_dim() {
            return Err(Error::ShapeMismatch { expected: self.shape.total_dim(), got: z.len() });
        }
        let range = self.shape.block_range(self.j);
        let block_cell = self.block_grid.cell_of_point(&z[range.clone()]).ok_or(Error::UnresolvableLeaf)?;
        let rest: Vec<Complex64> = z
            .iter()
            .enumerate()
            .filter(|(i, _)| !range.contains(i))
            .map(|(_, w)| *w)
            .collect();
        let comp_cell = self.comp_grid.cell_of_point(&rest).ok_or(Error::UnresolvableLeaf)?;
        let si = self.slice_pos(block_cell).ok_or(Error::UnresolvableLeaf)?;
        let label = self.slices[si].label_of(comp_cell).ok_or(Error::UnresolvableLeaf)?;
        Ok((self.offsets[si] + label) as usize)
    }

    /// Number of connected components of the graph.
    pub fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.nodes.len());
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        (0..self.nodes.len() as u32).filter(|&i| uf.find(i) == i).count()
    }

    /// Number of elementary grid squares whose four corner nodes form a
    /// 4-cycle. Only defined when block `j` has one complex coordinate.
    pub fn square_count(&self) -> Option<usize> {
        if self.block_grid.axes() != 2 {
            return None;
        }
        let (sx, sy) = (self.block_grid.strides()[0], self.block_grid.strides()[1]);
        let adjacent = |u: usize, v: usize| self.adjacency[u].binary_search(&(v as u32)).is_ok();
        let mut faces = 0;
        for s in &self.slices {
            let b = s.block_cell;
            if self.block_grid.axis_index(b, 0) + 1 >= self.block_grid.counts()[0]
                || self.block_grid.axis_index(b, 1) + 1 >= self.block_grid.counts()[1]
            {
                continue;
            }
            let (r10, r01, r11) = (self.nodes_over(b + sx), self.nodes_over(b + sy), self.nodes_over(b + sx + sy));
            for n00 in self.nodes_over(b) {
                for n10 in r10.clone().filter(|&n| adjacent(n00, n)) {
                    for n01 in r01.clone().filter(|&n| adjacent(n00, n)) {
                        faces += r11.clone().filter(|&n| adjacent(n10, n) && adjacent(n01, n)).count();
                    }
                }
            }
        }
        Some(faces)
    }

    /// First Betti number of the leaf complex with elementary squares filled:
    /// `E - N + C - F`. Zero means every loop in the graph is a union of
    /// trivial grid squares.
    pub fn cycle_rank(&self) -> Option<i64> {
        let faces = self.square_count()? as i64;
        Some(self.edges.len() as i64 - self.nodes.len() as i64 + self.component_count() as i64 - faces)
    }

    /// Edge-list text: one `b:c b:c` line per edge, isolated nodes on their
    /// own line; `b` is the block-cell index and `c` the component id.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# leaf graph block={} nodes={} edges={}", self.j, self.nodes.len(), self.edges.len());
        let name = |n: usize| format!("{}:{}", self.nodes[n].block_cell, self.nodes[n].component);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", name(u as usize), name(v as usize));
        }
        for (n, adj) in self.adjacency.iter().enumerate() {
            if adj.is_empty() {
                let _ = writeln!(out, "{}", name(n));
            }
        }
        out
    }
}

/// A branch of `log a_j` on every node of a leaf graph.
#[derive(Clone, Debug)]
pub struct BranchAssignment {
    pub values: Vec<Complex64>,
    /// `max_edges |(v_b - v_a) - Log(a_b / a_a)|`.
    pub residual: f64,
    /// Edges whose principal increment has argument beyond `pi / 2`.
    pub flagged_edges: Vec<(u32, u32)>,
}

fn scalar(graph: &LeafGraph, node: usize) -> Complex64 {
    graph.node_value(node)[0]
}

/// Lifts `log a_j` along the leaf graph by breadth-first propagation from the
/// basepoint (value `base_value`), accumulating principal logs of ratios.
/// Further components start from the principal log shifted by the same gauge
/// offset as the basepoint.
pub fn lift_branch_log(graph: &LeafGraph, base_value: Complex64) -> Result<BranchAssignment> {
    if graph.block_grid.axes() != 2 {
        return Err(Error::Unsupported("log lifts need a single complex coordinate in the block".into()));
    }
    let g = &graph.block_grid;
    let h = g.h();
    for dx in [-0.5 * h, 0.5 * h] {
        for dy in [-0.5 * h, 0.5 * h] {
            if let Some(cell) = g.cell_of_point(&[Complex64::new(dx, dy)]) {
                if !graph.nodes_over(cell).is_empty() {
                    return Err(Error::LogUndefined("0 lies in the closure of the projection".into()));
                }
            }
        }
    }
    let n = graph.nodes.len();
    if n == 0 {
        return Err(Error::EmptyRegion);
    }
    let gauge = base_value - scalar(graph, 0).ln();
    let mut values = vec![Complex64::new(f64::NAN, f64::NAN); n];
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        values[start] = scalar(graph, start).ln() + gauge;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &graph.adjacency[u] {
                let v = v as usize;
                if !seen[v] {
                    seen[v] = true;
                    values[v] = values[u] + (scalar(graph, v) / scalar(graph, u)).ln();
                    queue.push_back(v);
                }
            }
        }
    }
    let mut residual = 0.0f64;
    let mut flagged_edges = Vec::new();
    for &(u, v) in &graph.edges {
        let inc = (scalar(graph, v as usize) / scalar(graph, u as usize)).ln();
        if inc.im.abs() > std::f64::consts::FRAC_PI_2 {
            flagged_edges.push((u, v));
        }
        residual = residual.max((values[v as usize] - values[u as usize] - inc).norm());
    }
    Ok(BranchAssignment { values, residual, flagged_edges })
}

/// Largest disagreement between branch values on nodes over the same block
/// cell. Zero iff the lift descends to a function on the projection.
pub fn descent_discrepancy(graph: &LeafGraph, assignment: &BranchAssignment) -> f64 {
    let mut worst = 0.0f64;
    for s in &graph.slices {
        let range = graph.nodes_over(s.block_cell);
        for a in range.clone() {
            for b in range.clone().skip(a - range.start + 1) {
                worst = worst.max((assignment.values[a] - assignment.values[b]).norm());
            }
        }
    }
    worst
}

/// Evaluator of the lifted logarithm at arbitrary points of the region:
/// node value plus the principal log of `z_j / a_j`.
#[derive(Clone, Debug)]
pub struct LeafLift {
    pub graph: Arc<LeafGraph>,
    pub assignment: Arc<BranchAssignment>,
}

impl LeafLift {
    pub fn new(region: &Region, j: usize) -> Result<Self> {
        let graph = build_leaf_graph(region, j)?;
        let assignment = lift_branch_log(&graph, scalar(&graph, 0).ln())?;
        Ok(Self { graph: Arc::new(graph), assignment: Arc::new(assignment) })
    }

    /// Lift normalised so that its value at the point `z` is `value`.
    pub fn anchored(region: &Region, j: usize, z: &[Complex64], value: Complex64) -> Result<Self> {
        let graph = build_leaf_graph(region, j)?;
        let mut assignment = lift_branch_log(&graph, Complex64::new(0.0, 0.0))?;
        let lift = Self { graph: Arc::new(graph), assignment: Arc::new(assignment.clone()) };
        let shift = value - lift.eval(z)?;
        assignment.values.iter_mut().for_each(|v| *v += shift);
        Ok(Self { graph: lift.graph, assignment: Arc::new(assignment) })
    }

    pub fn block(&self) -> usize {
        self.graph.j
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let node = self.graph.locate(z)?;
        let zj = z[self.graph.shape.block_range(self.graph.j).start];
        Ok(self.assignment.values[node] + (zj / scalar(&self.graph, node)).ln())
    }
}
