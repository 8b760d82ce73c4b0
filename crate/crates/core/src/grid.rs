//! Uniform tensor grids with a mimetic gradient/divergence pair.
//!
//! Nodes sit at the vertices of a uniform mesh of `cells + 1` points per axis.
//! Every node owns the dual cell around it, so interior nodes carry the full
//! cell volume and boundary nodes a half (corner nodes a quarter in 2D). Edges
//! carry the dual face measure. With these weights
//!
//! ```text
//! sum_i W_i div(F)_i u_i = - sum_e w_e F_e grad(u)_e
//! ```
//!
//! holds exactly for every node field `u` and edge field `F`. No edge crosses
//! the boundary, so homogeneous Neumann conditions are structural and
//! `sum_i W_i div(F)_i = 0` identically.
//!
//! Ordering: nodes are row-major with axis 0 varying fastest
//! (`idx = i0 + n0 * i1`). Edges are axis-major: all axis-0 edges first
//! (`i0 + cells0 * i1`), then all axis-1 edges (`i0 + n0 * i1`).

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A directed interior edge from `tail` to `head` (`head = tail + unit step`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub axis: usize,
}

/// A gradient reconstruction site: one edge per axis meeting at a node.
///
/// In 1D every edge is its own corner. In 2D every cell has four corners, each
/// pairing the axis-0 and axis-1 cell edges that meet at one cell vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corner {
    pub edges: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct Grid<T> {
    dim: usize,
    cells: [usize; 2],
    lengths: [T; 2],
    spacing: [T; 2],
    node_weights: Vec<T>,
    edges: Vec<Edge>,
    edge_weights: Vec<T>,
    corners: Vec<Corner>,
    corner_weight: T,
}

impl<T: Scalar> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.cells == other.cells && self.lengths == other.lengths
    }
}

/// Builds a grid of `dim` axes with the given cell counts and side lengths.
pub fn build_grid<T: Scalar>(dim: usize, cells: &[usize], lengths: &[T]) -> Result<Grid<T>> {
    Grid::new(dim, cells, lengths)
}

impl<T: Scalar> Grid<T> {
    pub fn new(dim: usize, cells: &[usize], lengths: &[T]) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if cells.len() != dim || lengths.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} cell counts and lengths, got {} and {}",
                cells.len(),
                lengths.len()
            )));
        }
        let mut c = [0usize; 2];
        let mut l = [T::one(); 2];
        let mut h = [T::one(); 2];
        for a in 0..dim {
            if cells[a] == 0 {
                return Err(Error::InvalidGrid(format!("axis {a} has no cells")));
            }
            if !(lengths[a] > T::zero()) || !lengths[a].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {a} length must be positive")));
            }
            c[a] = cells[a];
            l[a] = lengths[a];
            h[a] = lengths[a] / T::from_usize_lossy(cells[a]);
        }

        let n = [c[0] + 1, if dim == 2 { c[1] + 1 } else { 1 }];
        let half = T::lit(0.5);
        let axis_weight = |a: usize, i: usize| -> T {
            if a >= dim {
                T::one()
            } else if i == 0 || i == c[a] {
                h[a] * half
            } else {
                h[a]
            }
        };

        let mut node_weights = Vec::with_capacity(n[0] * n[1]);
        for i1 in 0..n[1] {
            for i0 in 0..n[0] {
                node_weights.push(axis_weight(0, i0) * axis_weight(1, i1));
            }
        }

        let mut edges = Vec::new();
        let mut edge_weights = Vec::new();
        for i1 in 0..n[1] {
            for i0 in 0..c[0] {
                let tail = i0 + n[0] * i1;
                edges.push(Edge { tail, head: tail + 1, axis: 0 });
                edge_weights.push(h[0] * axis_weight(1, i1));
            }
        }
        if dim == 2 {
            for i1 in 0..c[1] {
                for i0 in 0..n[0] {
                    let tail = i0 + n[0] * i1;
                    edges.push(Edge { tail, head: tail + n[0], axis: 1 });
                    edge_weights.push(axis_weight(0, i0) * h[1]);
                }
            }
        }

        let mut corners = Vec::new();
        let corner_weight;
        if dim == 1 {
            for e in 0..c[0] {
                corners.push(Corner { edges: [e, usize::MAX] });
            }
            corner_weight = h[0];
        } else {
            let offset = c[0] * n[1];
            for c1 in 0..c[1] {
                for c0 in 0..c[0] {
                    for dy in 0..2 {
                        for dx in 0..2 {
                            let xe = c0 + c[0] * (c1 + dy);
                            let ye = offset + (c0 + dx) + n[0] * c1;
                            corners.push(Corner { edges: [xe, ye] });
                        }
                    }
                }
            }
            corner_weight = h[0] * h[1] * T::lit(0.25);
        }

        Ok(Self {
            dim,
            cells: c,
            lengths: l,
            spacing: h,
            node_weights,
            edges,
            edge_weights,
            corners,
            corner_weight,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths[..self.dim]
    }

    pub fn spacing(&self) -> &[T] {
        &self.spacing[..self.dim]
    }

    /// Nodes along `axis` (1 for the unused axis of a 1D grid).
    pub fn nodes_along(&self, axis: usize) -> usize {
        if axis < self.dim {
            self.cells[axis] + 1
        } else {
            1
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    /// Quadrature weight shared by every corner.
    pub fn corner_weight(&self) -> T {
        self.corner_weight
    }

    /// Dual-cell volume of every node; sums to the domain measure.
    pub fn node_weights(&self) -> &[T] {
        &self.node_weights
    }

    /// Dual-face measure of every edge.
    pub fn edge_weights(&self) -> &[T] {
        &self.edge_weights
    }

    pub fn measure(&self) -> T {
        self.lengths().iter().fold(T::one(), |acc, &l| acc * l)
    }

    pub fn node_index(&self, i0: usize, i1: usize) -> usize {
        i0 + self.nodes_along(0) * i1
    }

    pub fn node_coords(&self, idx: usize) -> (usize, usize) {
        let n0 = self.nodes_along(0);
        (idx % n0, idx / n0)
    }

    /// Physical position of a node; the second entry is 0 in 1D.
    pub fn position(&self, idx: usize) -> [T; 2] {
        let (i0, i1) = self.node_coords(idx);
        let x = T::from_usize_lossy(i0) * self.spacing[0];
        let y = if self.dim == 2 {
            T::from_usize_lossy(i1) * self.spacing[1]
        } else {
            T::zero()
        };
        [x, y]
    }

    /// Largest index distance between two nodes sharing a cell.
    pub(crate) fn cell_bandwidth(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.nodes_along(0) + 1
        }
    }

    // ---- slice kernels used by the operators and solvers ----

    pub(crate) fn gradient_into(&self, u: &[T], out: &mut [T]) {
        for (g, e) in out.iter_mut().zip(&self.edges) {
            *g = (u[e.head] - u[e.tail]) / self.spacing[e.axis];
        }
    }

    pub(crate) fn gradient_slice(&self, u: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.edge_count()];
        self.gradient_into(u, &mut g);
        g
    }

    /// Divergence of fluxes already multiplied by their edge weights.
    pub(crate) fn divergence_weighted_into(&self, weighted: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (phi, e) in weighted.iter().zip(&self.edges) {
            let q = *phi / self.spacing[e.axis];
            out[e.tail] += q;
            out[e.head] -= q;
        }
        for (v, w) in out.iter_mut().zip(&self.node_weights) {
            *v /= *w;
        }
    }

    /// Divergence stencil applied to `|weighted|`; the magnitude against
    /// which roundoff in a divergence is measured.
    pub(crate) fn divergence_magnitude(&self, weighted: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.node_count()];
        for (phi, e) in weighted.iter().zip(&self.edges) {
            let q = phi.abs() / self.spacing[e.axis];
            out[e.tail] += q;
            out[e.head] += q;
        }
        for (v, w) in out.iter_mut().zip(&self.node_weights) {
            *v /= *w;
        }
        out
    }

    pub(crate) fn divergence_slice(&self, flux: &[T]) -> Vec<T> {
        let weighted: Vec<T> = flux
            .iter()
            .zip(&self.edge_weights)
            .map(|(f, w)| *f * *w)
            .collect();
        let mut out = vec![T::zero(); self.node_count()];
        self.divergence_weighted_into(&weighted, &mut out);
        out
    }

    /// Plain Laplacian `div(grad u)`.
    pub(crate) fn laplacian_slice(&self, u: &[T]) -> Vec<T> {
        self.divergence_slice(&self.gradient_slice(u))
    }

    pub(crate) fn integrate_slice(&self, u: &[T]) -> T {
        u.iter()
            .zip(&self.node_weights)
            .fold(T::zero(), |acc, (v, w)| acc + *v * *w)
    }

    pub(crate) fn inner_slice(&self, u: &[T], v: &[T]) -> T {
        u.iter()
            .zip(v)
            .zip(&self.node_weights)
            .fold(T::zero(), |acc, ((a, b), w)| acc + *a * *b * *w)
    }

    pub(crate) fn edge_inner_slice(&self, f: &[T], g: &[T]) -> T {
        f.iter()
            .zip(g)
            .zip(&self.edge_weights)
            .fold(T::zero(), |acc, ((a, b), w)| acc + *a * *b * *w)
    }

    /// Weighted discrete `L^q` norm; `q = inf` gives the max norm.
    pub(crate) fn norm_slice(&self, u: &[T], q: T) -> T {
        if q.is_infinite() {
            return u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        }
        if q == T::lit(2.0) {
            return self.inner_slice(u, u).sqrt();
        }
        let s = u
            .iter()
            .zip(&self.node_weights)
            .fold(T::zero(), |acc, (v, w)| acc + v.abs().powf(q) * *w);
        s.powf(T::one() / q)
    }
}

fn check_finite<T: Scalar>(values: &[T], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Scalar values at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct NodeField<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

/// Values on the interior directed edges of a grid.
#[derive(Debug, Clone)]
pub struct EdgeField<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Scalar> NodeField<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::LengthMismatch { expected: grid.node_count(), got: values.len() });
        }
        check_finite(&values, "node field")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: Arc<Grid<T>>, c: T) -> Self {
        let n = grid.node_count();
        Self { grid, values: vec![c; n] }
    }

    /// Samples `f` at node positions.
    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = (0..grid.node_count()).map(|i| f(grid.position(i))).collect();
        Self { grid, values }
    }

    pub(crate) fn from_vec_unchecked(grid: Arc<Grid<T>>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn ensure_grid(&self, grid: &Grid<T>) -> Result<()> {
        if *self.grid == *grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Weighted `L^q` norm (`q = T::infinity()` for the max norm).
    pub fn norm(&self, q: T) -> T {
        self.grid.norm_slice(&self.values, q)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// Weighted inner product.
    pub fn inner(&self, other: &Self) -> Result<T> {
        other.ensure_grid(&self.grid)?;
        Ok(self.grid.inner_slice(&self.values, &other.values))
    }

    /// Writes the field in the snapshot text format.
    pub fn to_snapshot(&self) -> String {
        write_snapshot(&self.grid, &self.values)
    }
}

impl<T: Scalar> EdgeField<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.edge_count() {
            return Err(Error::LengthMismatch { expected: grid.edge_count(), got: values.len() });
        }
        check_finite(&values, "edge field")?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let n = grid.edge_count();
        Self { grid, values: vec![T::zero(); n] }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Weighted edge inner product.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.grid.edge_inner_slice(&self.values, &other.values))
    }
}

/// Edge differences `(u_head - u_tail) / h`.
pub fn gradient<T: Scalar>(u: &NodeField<T>) -> EdgeField<T> {
    let values = u.grid.gradient_slice(&u.values);
    EdgeField { grid: u.grid.clone(), values }
}

/// Negative adjoint of [`gradient`] under the weighted node and edge products.
pub fn divergence<T: Scalar>(flux: &EdgeField<T>) -> NodeField<T> {
    let values = flux.grid.divergence_slice(&flux.values);
    NodeField { grid: flux.grid.clone(), values }
}

/// Plain discrete Laplacian `divergence(gradient(u))`.
pub fn laplacian<T: Scalar>(u: &NodeField<T>) -> NodeField<T> {
    NodeField { grid: u.grid.clone(), values: u.grid.laplacian_slice(&u.values) }
}

/// Dual-cell quadrature of a node field.
pub fn integrate<T: Scalar>(u: &NodeField<T>) -> T {
    u.grid.integrate_slice(&u.values)
}

pub(crate) fn write_snapshot<T: Scalar>(grid: &Grid<T>, values: &[T]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# dim {}", grid.dim());
    let cells: Vec<String> = grid.cells().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(s, "# cells {}", cells.join(" "));
    let hs: Vec<String> = grid.spacing().iter().map(|h| format_real(h.as_f64())).collect();
    let _ = writeln!(s, "# h {}", hs.join(" "));
    let n0 = grid.nodes_along(0);
    for row in values.chunks(n0) {
        let line: Vec<String> = row.iter().map(|v| format_real(v.as_f64())).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

/// Formats a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses the snapshot text format back into a grid and node field.
pub fn parse_snapshot(text: &str) -> Result<NodeField<f64>> {
    let mut dim = None;
    let mut cells = None;
    let mut h = None;
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            let key = parts.next().unwrap_or("");
            let rest: Vec<&str> = parts.collect();
            let bad = |k: &str| Error::Parse(format!("bad `{k}` header"));
            match key {
                "dim" => dim = Some(rest.first().and_then(|v| v.parse::<usize>().ok()).ok_or_else(|| bad("dim"))?),
                "cells" => {
                    cells = Some(
                        rest.iter()
                            .map(|v| v.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad("cells"))?,
                    )
                }
                "h" => {
                    h = Some(
                        rest.iter()
                            .map(|v| v.parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| bad("h"))?,
                    )
                }
                _ => {}
            }
            continue;
        }
        for tok in line.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{tok}`")))?);
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("missing `# dim`".into()))?;
    let cells = cells.ok_or_else(|| Error::Parse("missing `# cells`".into()))?;
    let h = h.ok_or_else(|| Error::Parse("missing `# h`".into()))?;
    if cells.len() != dim || h.len() != dim {
        return Err(Error::Parse("header arity does not match dim".into()));
    }
    let lengths: Vec<f64> = cells.iter().zip(&h).map(|(c, h)| *c as f64 * h).collect();
    let grid = Arc::new(Grid::new(dim, &cells, &lengths)?);
    NodeField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(cells: usize, len: f64) -> Arc<Grid<f64>> {
        Arc::new(Grid::new(1, &[cells], &[len]).unwrap())
    }

    #[test]
    fn build_grid_counts() {
        let g = grid1(4, 1.0);
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.spacing()[0], 0.25);

        let g2 = Grid::new(2, &[2, 2], &[1.0, 1.0]).unwrap();
        assert_eq!(g2.node_count(), 9);
        // enumerate neighbouring pairs directly
        let mut pairs = 0;
        for i1 in 0..3 {
            for i0 in 0..3 {
                if i0 + 1 < 3 {
                    pairs += 1;
                }
                if i1 + 1 < 3 {
                    pairs += 1;
                }
            }
        }
        assert_eq!(g2.edge_count(), pairs);
        assert_eq!(pairs, 12);
        assert_eq!(g2.edges().iter().filter(|e| e.axis == 0).count(), 6);
        assert_eq!(g2.corners().len(), 16);
    }

    #[test]
    fn build_grid_rejects_degenerate() {
        assert!(matches!(build_grid::<f64>(1, &[0], &[1.0]), Err(Error::InvalidGrid(_))));
        assert!(build_grid::<f64>(3, &[2, 2, 2], &[1.0, 1.0, 1.0]).is_err());
        assert!(build_grid::<f64>(1, &[4], &[-1.0]).is_err());
        assert!(build_grid::<f64>(2, &[4], &[1.0]).is_err());
    }

    #[test]
    fn weights_sum_to_measure() {
        let g = Grid::new(2, &[5, 3], &[2.0, 0.5]).unwrap();
        let total: f64 = g.node_weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_examples() {
        let g = grid1(2, 2.0);
        let u = NodeField::new(g.clone(), vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(gradient(&u).values(), &[1.0, 3.0]);

        let c = NodeField::constant(g.clone(), 3.7);
        assert!(gradient(&c).values().iter().all(|v| *v == 0.0));

        let g = grid1(8, 1.0);
        let x = NodeField::from_fn(g, |p| p[0]);
        for v in gradient(&x).values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn divergence_three_node_adjoint() {
        // Hand adjoint on nodes {0,1,2}, h = 1, weights (1/2, 1, 1/2):
        // <div F, u> = -(F_0 (u_1 - u_0) + F_1 (u_2 - u_1)); read off the
        // coefficient of each u_i and divide by W_i.
        let g = grid1(2, 2.0);
        let f = EdgeField::new(g.clone(), vec![1.0, 1.0]).unwrap();
        let d = divergence(&f);
        assert_eq!(d.values(), &[2.0, 0.0, -2.0]);
        assert_eq!(integrate(&d), 0.0);
        assert!(divergence(&EdgeField::zeros(g)).values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn integrate_examples() {
        let g = grid1(10, 1.0);
        assert!((integrate(&NodeField::constant(g.clone(), 1.0)) - 1.0).abs() < 1e-15);
        assert_eq!(integrate(&NodeField::zeros(g)), 0.0);
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Arc::new(Grid::<f64>::new(2, &[3, 2], &[1.0, 0.7]).unwrap());
        let u = NodeField::from_fn(g, |p| (p[0] * 3.1).sin() + p[1] / 3.0);
        let text = u.to_snapshot();
        assert!(text.starts_with("# dim 2\n# cells 3 2\n# h "));
        let back = parse_snapshot(&text).unwrap();
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn f32_instantiation_is_adjoint() {
        let g = Arc::new(Grid::<f32>::new(2, &[4, 3], &[1.0, 1.0]).unwrap());
        let u = NodeField::from_fn(g.clone(), |p| p[0] * p[0] - p[1]);
        let f = EdgeField::new(g.clone(), (0..g.edge_count()).map(|i| (i as f32).sin()).collect()).unwrap();
        let lhs = divergence(&f).inner(&u).unwrap();
        let rhs = -f.inner(&gradient(&u)).unwrap();
        assert!((lhs - rhs).abs() < 1e-5);
    }
}
