//! Structured triangulations of the unit square.
//!
//! Level 0 is a 2x2 grid of squares, each cut by its lower-left to upper-right
//! diagonal (8 triangles). Level `L` is level 0 after `L` red refinements, which
//! for this family is again a structured grid with `2^(L+1)` cells per side.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A mesh edge. The vertex pair is stored smaller index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// First adjacent triangle, and the second one for interior edges.
    pub triangles: (usize, Option<usize>),
    pub boundary: bool,
}

/// Triangles incident to one vertex; their union is the support of that vertex's hat function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPatch {
    pub vertex: usize,
    pub triangles: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Mesh<T: Real> {
    vertices: Vec<Point2<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// `triangle_edges[t][k]` is the edge opposite local vertex `k`.
    triangle_edges: Vec<[usize; 3]>,
    patch_offsets: Vec<usize>,
    patch_triangles: Vec<usize>,
    level: usize,
}

/// Number of grid cells per side of the unit square at a refinement level.
pub fn cells_per_side(level: usize) -> usize {
    2usize << level
}

/// Structured mesh of the unit square at the given refinement level.
pub fn build_unit_square<T: Real>(level: usize) -> Mesh<T> {
    let n = cells_per_side(level);
    let inv = T::one() / T::from_usize_lossy(n);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(
                T::from_usize_lossy(i) * inv,
                T::from_usize_lossy(j) * inv,
            ));
        }
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    Mesh::from_parts(vertices, triangles, level).expect("structured grid is valid")
}

/// Red refinement: every triangle is split into four through its edge midpoints.
pub fn refine_uniform<T: Real>(mesh: &Mesh<T>) -> Mesh<T> {
    let half = T::lit(0.5);
    let mut vertices = mesh.vertices.clone();
    // New vertex per parent edge, numbered after the existing vertices.
    let midpoint: Vec<usize> = mesh
        .edges
        .iter()
        .map(|e| {
            let [a, b] = e.vertices;
            let pa = mesh.vertices[a].coords;
            let pb = mesh.vertices[b].coords;
            vertices.push(Point2::from((pa + pb) * half));
            vertices.len() - 1
        })
        .collect();
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for (t, &[v0, v1, v2]) in mesh.triangles.iter().enumerate() {
        let [e0, e1, e2] = mesh.triangle_edges[t];
        let (m0, m1, m2) = (midpoint[e0], midpoint[e1], midpoint[e2]);
        triangles.push([v0, m2, m1]);
        triangles.push([m2, v1, m0]);
        triangles.push([m1, m0, v2]);
        triangles.push([m0, m1, m2]);
    }
    Mesh::from_parts(vertices, triangles, mesh.level + 1).expect("refinement keeps orientation")
}

impl<T: Real> Mesh<T> {
    /// Builds edge and patch connectivity for counter-clockwise triangles.
    pub fn from_parts(vertices: Vec<Point2<T>>, triangles: Vec<[usize; 3]>, level: usize) -> Result<Self> {
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::IndexOutOfRange { what: "vertex", index: v, len: vertices.len() });
                }
            }
            let area = signed_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area <= T::zero() {
                return Err(Error::DegenerateTriangle { triangle: t, area: area.as_f64() });
            }
        }

        let mut keys: Vec<[usize; 2]> = triangles
            .iter()
            .flat_map(|tri| (0..3).map(move |k| sorted_pair(tri[(k + 1) % 3], tri[(k + 2) % 3])))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let lookup: HashMap<[usize; 2], usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();

        let mut adjacent: Vec<Vec<usize>> = vec![Vec::with_capacity(2); keys.len()];
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0; 3];
            for (k, slot) in local.iter_mut().enumerate() {
                let e = lookup[&sorted_pair(tri[(k + 1) % 3], tri[(k + 2) % 3])];
                adjacent[e].push(t);
                *slot = e;
            }
            triangle_edges.push(local);
        }
        let edges = keys
            .into_iter()
            .zip(adjacent)
            .map(|(vertices, adj)| match adj.as_slice() {
                [a] => Ok(Edge { vertices, triangles: (*a, None), boundary: true }),
                [a, b] => Ok(Edge { vertices, triangles: (*a, Some(*b)), boundary: false }),
                _ => Err(Error::Parse(format!("edge {vertices:?} has {} adjacent triangles", adj.len()))),
            })
            .collect::<Result<Vec<_>>>()?;

        let mut counts = vec![0usize; vertices.len() + 1];
        for tri in &triangles {
            for &v in tri {
                counts[v + 1] += 1;
            }
        }
        for i in 0..vertices.len() {
            counts[i + 1] += counts[i];
        }
        let patch_offsets = counts;
        let mut fill = patch_offsets.clone();
        let mut patch_triangles = vec![0; 3 * triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                patch_triangles[fill[v]] = t;
                fill[v] += 1;
            }
        }

        Ok(Self { vertices, triangles, edges, triangle_edges, patch_offsets, patch_triangles, level })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge indices of triangle `t`, the `k`-th one opposite local vertex `k`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn triangle_points(&self, t: usize) -> [Point2<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_points(t);
        signed_area(&a, &b, &c)
    }

    pub fn total_area(&self) -> T {
        (0..self.n_triangles()).fold(T::zero(), |acc, t| acc + self.area(t))
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[b] - self.vertices[a]).norm()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point2<T> {
        let [a, b] = self.edges[e].vertices;
        nalgebra::center(&self.vertices[a], &self.vertices[b])
    }

    /// Mesh size: the longest edge.
    pub fn h(&self) -> T {
        (0..self.n_edges()).fold(T::zero(), |acc, e| acc.max(self.edge_length(e)))
    }

    /// Diameter (longest side) of triangle `t`.
    pub fn diameter(&self, t: usize) -> T {
        self.triangle_edges[t]
            .iter()
            .fold(T::zero(), |acc, &e| acc.max(self.edge_length(e)))
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let p = self.vertices[v];
        let eps = T::lit(1e-12);
        p.x.abs() < eps || p.y.abs() < eps || (p.x - T::one()).abs() < eps || (p.y - T::one()).abs() < eps
    }

    /// Triangles whose closure contains vertex `i`.
    pub fn vertex_patch(&self, i: usize) -> Result<VertexPatch> {
        if i >= self.n_vertices() {
            return Err(Error::IndexOutOfRange { what: "vertex", index: i, len: self.n_vertices() });
        }
        Ok(VertexPatch { vertex: i, triangles: self.patch(i).to_vec() })
    }

    /// Colours the vertices with `0, 1, 2` so that every triangle carries all three
    /// colours, if such a colouring exists.
    ///
    /// The colouring is unique up to permuting the colours on a connected mesh,
    /// so propagating from the first triangle across edges either finds it or
    /// hits a conflict.
    pub fn vertex_three_colouring(&self) -> Option<Vec<u8>> {
        const UNSET: u8 = u8::MAX;
        let mut colour = vec![UNSET; self.n_vertices()];
        let mut seen = vec![false; self.n_triangles()];
        let mut stack = Vec::new();
        for start in 0..self.n_triangles() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            while let Some(t) = stack.pop() {
                let tri = self.triangles[t];
                let set: Vec<u8> = tri.iter().map(|&v| colour[v]).filter(|&c| c != UNSET).collect();
                if set.is_empty() {
                    for (k, &v) in tri.iter().enumerate() {
                        colour[v] = k as u8;
                    }
                } else if set.len() == 2 && set[0] != set[1] {
                    for &v in &tri {
                        if colour[v] == UNSET {
                            colour[v] = 3 - set[0] - set[1];
                        }
                    }
                }
                for &e in &self.triangle_edges[t] {
                    let (a, b) = self.edges[e].triangles;
                    for n in std::iter::once(a).chain(b) {
                        if !seen[n] {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
        }
        let valid = self.triangles.iter().all(|tri| {
            let mut mask = 0u8;
            for &v in tri {
                if colour[v] == UNSET {
                    return false;
                }
                mask |= 1 << colour[v];
            }
            mask == 0b111
        });
        valid.then_some(colour)
    }

    pub(crate) fn patch(&self, i: usize) -> &[usize] {
        &self.patch_triangles[self.patch_offsets[i]..self.patch_offsets[i + 1]]
    }

    /// Writes `V E T`, then `x y` per vertex, then `i j k` per triangle.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.n_vertices(), self.n_edges(), self.n_triangles())?;
        for p in &self.vertices {
            writeln!(out, "{} {}", p.x, p.y)?;
        }
        for [a, b, c] in &self.triangles {
            writeln!(out, "{a} {b} {c}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Mesh::write_text`].
    pub fn read_text<R: BufRead>(input: R, level: usize) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| Error::Parse("unexpected end of file".into()))?.map_err(Error::from)
        };
        let header = parse_fields::<usize>(&next()?, 3)?;
        let (nv, ne, nt) = (header[0], header[1], header[2]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let xy = parse_fields::<f64>(&next()?, 2)?;
            vertices.push(Point2::new(T::lit(xy[0]), T::lit(xy[1])));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let ijk = parse_fields::<usize>(&next()?, 3)?;
            triangles.push([ijk[0], ijk[1], ijk[2]]);
        }
        let mesh = Self::from_parts(vertices, triangles, level)?;
        if mesh.n_edges() != ne {
            return Err(Error::Parse(format!("header announces {ne} edges, connectivity has {}", mesh.n_edges())));
        }
        Ok(mesh)
    }
}

fn parse_fields<F: std::str::FromStr>(line: &str, n: usize) -> Result<Vec<F>> {
    let fields = line
        .split_whitespace()
        .map(|s| s.parse::<F>().map_err(|_| Error::Parse(format!("bad field `{s}` in `{line}`"))))
        .collect::<Result<Vec<_>>>()?;
    if fields.len() != n {
        return Err(Error::Parse(format!("expected {n} fields in `{line}`")));
    }
    Ok(fields)
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub(crate) fn signed_area<T: Real>(a: &Point2<T>, b: &Point2<T>, c: &Point2<T>) -> T {
    let ab: Vector2<T> = b - a;
    let ac: Vector2<T> = c - a;
    (ab.x * ac.y - ab.y * ac.x) * T::lit(0.5)
}
