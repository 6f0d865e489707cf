//! Rectangle Ω = (0,L1)×(0,L2), uniform tensor grid, boundary parameterization
//! and quadrature, and the collar neighborhood of Γ.
//!
//! Interior nodes are x_{ij} = ((i+1)h1, (j+1)h2) with h_i = L_i/(n_i+1),
//! flat index j·n1 + i. Boundary nodes are the grid points on each edge with
//! the four corners excluded (the rectangle breaks C² there; quadrature mass
//! of the corner trapezoid endpoints is folded onto the corner-adjacent
//! nodes so each edge rule stays exact for polynomials of degree ≤ 1 and the
//! weights sum to the perimeter).

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Edge {
    South,
    East,
    North,
    West,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::South, Edge::East, Edge::North, Edge::West];

    /// Unit outward normal.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Edge::South => [0.0, -1.0],
            Edge::East => [1.0, 0.0],
            Edge::North => [0.0, 1.0],
            Edge::West => [-1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryNode {
    pub pos: [f64; 2],
    pub normal: [f64; 2],
    /// Trapezoid quadrature weight (length units).
    pub weight: f64,
    pub edge: Edge,
    /// Index along the owning edge, ordered by increasing tangential coordinate.
    pub along: usize,
}

/// Uniform tensor grid on the rectangle.
#[derive(Debug, Clone)]
pub struct Grid {
    pub l1: f64,
    pub l2: f64,
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub collar_width: f64,
    boundary: Vec<BoundaryNode>,
    collar: Vec<bool>,
}

/// Create a grid; `collar_width = 0` selects the default 0.15·min(L1,L2).
pub fn make_grid(l1: f64, l2: f64, n1: usize, n2: usize, collar_width: f64) -> Result<Grid> {
    Grid::new(l1, l2, n1, n2, collar_width)
}

impl Grid {
    pub fn new(l1: f64, l2: f64, n1: usize, n2: usize, collar_width: f64) -> Result<Grid> {
        if !(l1 > 0.0) || !(l2 > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "side lengths must be positive, got ({l1}, {l2})"
            )));
        }
        if n1 < 8 || n2 < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 interior nodes per axis, got ({n1}, {n2})"
            )));
        }
        let w = if collar_width == 0.0 {
            0.15 * l1.min(l2)
        } else {
            collar_width
        };
        if !(w > 0.0 && w < l1.min(l2) / 4.0) {
            return Err(Error::InvalidGrid(format!(
                "collar width {w} out of range (0, {})",
                l1.min(l2) / 4.0
            )));
        }
        let h1 = l1 / (n1 + 1) as f64;
        let h2 = l2 / (n2 + 1) as f64;

        let mut boundary = Vec::with_capacity(2 * (n1 + n2));
        let edge_weight = |m: usize, t: usize, h: f64| -> f64 {
            // Composite trapezoid with the excluded corner mass folded onto
            // the end nodes: ends 3h/2, interior h; sums to (m+1)h = L.
            if t == 0 || t == m - 1 {
                1.5 * h
            } else {
                h
            }
        };
        for t in 0..n1 {
            boundary.push(BoundaryNode {
                pos: [(t + 1) as f64 * h1, 0.0],
                normal: Edge::South.normal(),
                weight: edge_weight(n1, t, h1),
                edge: Edge::South,
                along: t,
            });
        }
        for t in 0..n2 {
            boundary.push(BoundaryNode {
                pos: [l1, (t + 1) as f64 * h2],
                normal: Edge::East.normal(),
                weight: edge_weight(n2, t, h2),
                edge: Edge::East,
                along: t,
            });
        }
        for t in 0..n1 {
            boundary.push(BoundaryNode {
                pos: [(t + 1) as f64 * h1, l2],
                normal: Edge::North.normal(),
                weight: edge_weight(n1, t, h1),
                edge: Edge::North,
                along: t,
            });
        }
        for t in 0..n2 {
            boundary.push(BoundaryNode {
                pos: [0.0, (t + 1) as f64 * h2],
                normal: Edge::West.normal(),
                weight: edge_weight(n2, t, h2),
                edge: Edge::West,
                along: t,
            });
        }

        let mut collar = vec![false; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                let x = (i + 1) as f64 * h1;
                let y = (j + 1) as f64 * h2;
                let d = x.min(l1 - x).min(y).min(l2 - y);
                collar[j * n1 + i] = d < w;
            }
        }

        Ok(Grid {
            l1,
            l2,
            n1,
            n2,
            h1,
            h2,
            collar_width: w,
            boundary,
            collar,
        })
    }

    /// Number of interior nodes.
    pub fn n_interior(&self) -> usize {
        self.n1 * self.n2
    }

    /// Number of boundary nodes (corners excluded).
    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n1 && j < self.n2);
        j * self.n1 + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.n1, idx / self.n1)
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize) -> [f64; 2] {
        [(i + 1) as f64 * self.h1, (j + 1) as f64 * self.h2]
    }

    /// True for interior nodes within distance `collar_width` of Γ.
    pub fn collar_mask(&self) -> &[bool] {
        &self.collar
    }

    pub fn diameter(&self) -> f64 {
        (self.l1 * self.l1 + self.l2 * self.l2).sqrt()
    }

    /// Grid spacing along the normal of the edge that owns boundary node `b`.
    pub fn normal_spacing(&self, b: &BoundaryNode) -> f64 {
        match b.edge {
            Edge::South | Edge::North => self.h2,
            Edge::East | Edge::West => self.h1,
        }
    }

    /// Interior node `depth` layers inward of boundary node `b` (depth ≥ 1).
    pub fn inward(&self, b: &BoundaryNode, depth: usize) -> usize {
        debug_assert!(depth >= 1);
        let d = depth - 1;
        match b.edge {
            Edge::South => self.idx(b.along, d),
            Edge::North => self.idx(b.along, self.n2 - 1 - d),
            Edge::West => self.idx(d, b.along),
            Edge::East => self.idx(self.n1 - 1 - d, b.along),
        }
    }

    /// Index of the boundary node at (`edge`, `along`) in the node list.
    pub fn boundary_index(&self, edge: Edge, along: usize) -> usize {
        let off = match edge {
            Edge::South => 0,
            Edge::East => self.n1,
            Edge::North => self.n1 + self.n2,
            Edge::West => 2 * self.n1 + self.n2,
        };
        off + along
    }

    /// Weighted discrete L²(Ω) inner product (conjugate-linear in `g`).
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        debug_assert_eq!(f.len(), g.len());
        let w = self.h1 * self.h2;
        let mut acc = C64::new(0.0, 0.0);
        for (a, b) in f.iter().zip(g.iter()) {
            acc += a * b.conj();
        }
        acc * w
    }

    pub fn norm(&self, f: &[C64]) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }

    /// Tensor trapezoid quadrature of a closed-form integrand over the closed
    /// rectangle (includes boundary and corner samples).
    pub fn quad_trapezoid(&self, f: impl Fn([f64; 2]) -> C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..=(self.n1 + 1) {
            let wx = if a == 0 || a == self.n1 + 1 { 0.5 } else { 1.0 };
            let x = a as f64 * self.h1;
            for b in 0..=(self.n2 + 1) {
                let wy = if b == 0 || b == self.n2 + 1 { 0.5 } else { 1.0 };
                let y = b as f64 * self.h2;
                acc += f([x, y]) * (wx * wy);
            }
        }
        acc * (self.h1 * self.h2)
    }
}

/// One complex value per boundary node.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField {
    pub values: Vec<C64>,
}

impl BoundaryField {
    pub fn zeros(grid: &Grid) -> Self {
        BoundaryField {
            values: vec![C64::new(0.0, 0.0); grid.n_boundary()],
        }
    }

    pub fn sample(grid: &Grid, f: impl Fn([f64; 2]) -> C64) -> Self {
        BoundaryField {
            values: grid.boundary_nodes().iter().map(|b| f(b.pos)).collect(),
        }
    }
}

/// A boundary pair (two components per boundary node): the Dirichlet pair
/// (u, ∂_ν u) or the Neumann pair (∂_ν Δu - i(B·ν)u, -Δu).
#[derive(Debug, Clone, PartialEq)]
pub struct TracePair {
    pub c0: Vec<C64>,
    pub c1: Vec<C64>,
}

impl TracePair {
    pub fn zeros(grid: &Grid) -> Self {
        let nb = grid.n_boundary();
        TracePair {
            c0: vec![C64::new(0.0, 0.0); nb],
            c1: vec![C64::new(0.0, 0.0); nb],
        }
    }

    pub fn len(&self) -> usize {
        self.c0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c0.is_empty()
    }

    pub fn conj(&self) -> TracePair {
        TracePair {
            c0: self.c0.iter().map(|z| z.conj()).collect(),
            c1: self.c1.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn axpy(&mut self, a: C64, other: &TracePair) {
        for (x, y) in self.c0.iter_mut().zip(&other.c0) {
            *x += a * y;
        }
        for (x, y) in self.c1.iter_mut().zip(&other.c1) {
            *x += a * y;
        }
    }

    pub fn sub(&self, other: &TracePair) -> TracePair {
        TracePair {
            c0: self.c0.iter().zip(&other.c0).map(|(a, b)| a - b).collect(),
            c1: self.c1.iter().zip(&other.c1).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, a: C64) -> TracePair {
        TracePair {
            c0: self.c0.iter().map(|z| a * z).collect(),
            c1: self.c1.iter().map(|z| a * z).collect(),
        }
    }
}

/// ⟨f, g⟩ = Σ_nodes w · (f0·conj(g0) + f1·conj(g1)), the discrete inner
/// product on (L²(Γ))²; conjugate-linear in the second argument.
pub fn boundary_inner_product(f: &TracePair, g: &TracePair, grid: &Grid) -> Result<C64> {
    let nb = grid.n_boundary();
    if f.len() != nb || g.len() != nb {
        return Err(Error::ShapeMismatch(format!(
            "trace pairs have {} / {} nodes, grid has {}",
            f.len(),
            g.len(),
            nb
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (k, b) in grid.boundary_nodes().iter().enumerate() {
        acc += (f.c0[k] * g.c0[k].conj() + f.c1[k] * g.c1[k].conj()) * b.weight;
    }
    Ok(acc)
}

/// Norm induced by [`boundary_inner_product`].
pub fn boundary_norm(f: &TracePair, grid: &Grid) -> f64 {
    boundary_inner_product(f, f, grid)
        .map(|z| z.re.max(0.0).sqrt())
        .unwrap_or(f64::NAN)
}

/// Samples of a field on the extended tensor grid: interior nodes, the
/// boundary ring (including corners) and one ghost ring outside. Index
/// (a, b) with a ∈ 0..n1+4 covers x = (a-1)·h1 ∈ {-h1, 0, …, L1, L1+h1}.
#[derive(Debug, Clone)]
pub struct ExtField {
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<C64>,
}

impl ExtField {
    #[inline]
    pub fn at(&self, a: isize, b: isize) -> C64 {
        debug_assert!(a >= 0 && b >= 0);
        self.values[b as usize * (self.n1 + 4) + a as usize]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: C64) {
        self.values[b * (self.n1 + 4) + a] = v;
    }

    /// Extended index of interior node (i, j).
    #[inline]
    pub fn of_interior(i: usize, j: usize) -> (usize, usize) {
        (i + 2, j + 2)
    }

    pub fn zeros(grid: &Grid) -> Self {
        ExtField {
            n1: grid.n1,
            n2: grid.n2,
            values: vec![C64::new(0.0, 0.0); (grid.n1 + 4) * (grid.n2 + 4)],
        }
    }

    /// Sample a closed-form field at every extended node.
    pub fn sample(grid: &Grid, f: impl Fn([f64; 2]) -> C64) -> Self {
        let mut e = ExtField::zeros(grid);
        for b in 0..grid.n2 + 4 {
            let y = (b as f64 - 1.0) * grid.h2;
            for a in 0..grid.n1 + 4 {
                let x = (a as f64 - 1.0) * grid.h1;
                e.set(a, b, f([x, y]));
            }
        }
        e
    }

    /// Embed an interior field with the clamped convention: zero on the
    /// boundary ring, mirror reflection on the ghost ring (u(-h) = u(h)),
    /// zero at the unused ghost corners.
    pub fn embed_clamped(grid: &Grid, u: &[C64]) -> Self {
        assert_eq!(u.len(), grid.n_interior());
        let mut e = ExtField::zeros(grid);
        let (n1, n2) = (grid.n1, grid.n2);
        for j in 0..n2 {
            for i in 0..n1 {
                e.set(i + 2, j + 2, u[grid.idx(i, j)]);
            }
        }
        // ghost rings by reflection across the boundary line
        for j in 0..n2 {
            e.set(0, j + 2, u[grid.idx(0, j)]);
            e.set(n1 + 3, j + 2, u[grid.idx(n1 - 1, j)]);
        }
        for i in 0..n1 {
            e.set(i + 2, 0, u[grid.idx(i, 0)]);
            e.set(i + 2, n2 + 3, u[grid.idx(i, n2 - 1)]);
        }
        e
    }

    /// Interior restriction as a flat vector.
    pub fn interior(&self, grid: &Grid) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); grid.n_interior()];
        for j in 0..grid.n2 {
            for i in 0..grid.n1 {
                v[grid.idx(i, j)] = self.at(i as isize + 2, j as isize + 2);
            }
        }
        v
    }

    /// Values at the boundary nodes (corner-free ordering of `grid`).
    pub fn boundary_values(&self, grid: &Grid) -> BoundaryField {
        let vals = grid
            .boundary_nodes()
            .iter()
            .map(|b| {
                let (a, bb) = ext_index_of_boundary(grid, b);
                self.at(a as isize, bb as isize)
            })
            .collect();
        BoundaryField { values: vals }
    }
}

/// Extended-grid index of a boundary node.
pub fn ext_index_of_boundary(grid: &Grid, b: &BoundaryNode) -> (usize, usize) {
    match b.edge {
        Edge::South => (b.along + 2, 1),
        Edge::North => (b.along + 2, grid.n2 + 2),
        Edge::West => (1, b.along + 2),
        Edge::East => (grid.n1 + 2, b.along + 2),
    }
}
