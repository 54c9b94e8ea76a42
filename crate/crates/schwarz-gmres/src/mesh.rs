//! Structured triangulations of the unit square and their edge skeleton.
//!
//! `build_structured(level)` tiles `[0,1]^2` with `2^level` squares per side
//! and splits every square along the diagonal from its lower-left to its
//! upper-right corner. The resulting family of meshes is nested across
//! levels, which is what the two-level preconditioner needs.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::Write;

pub const MIN_LEVEL: usize = 1;
pub const MAX_LEVEL: usize = 12;

/// Triangulation of the unit square. Triangles are counterclockwise vertex
/// index triples; vertices sit on the uniform grid with spacing `h` and are
/// stored in row-major grid order.
#[derive(Clone, Debug)]
pub struct TriMesh {
    pub level: usize,
    pub h: f64,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_vertices(&self, e: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[e];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Signed area; positive for counterclockwise triangles.
    pub fn signed_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(e);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn barycenter(&self, e: usize) -> [f64; 2] {
        let [a, b, c] = self.triangle_vertices(e);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Plain-text element/vertex listing, one item per line.
    pub fn write_listing<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "mesh level {} h {:e}", self.level, self.h)?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(w, "v {} {:.17e} {:.17e}", i, v[0], v[1])?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "t {} {} {} {}", i, t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// Which adjacent element plays the `K+` role on interior edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideConvention {
    /// `K+` is the element with the smaller index (the default).
    LowerIndexPlus,
    /// Opposite choice; assembled forms must not depend on it.
    HigherIndexPlus,
}

/// One edge of the skeleton. The normal has unit length and points from
/// `plus` into `minus` on interior edges, outward on boundary edges.
#[derive(Clone, Debug)]
pub struct Edge {
    pub endpoints: [[f64; 2]; 2],
    pub length: f64,
    pub normal: [f64; 2],
    pub plus: usize,
    pub minus: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }

    pub fn midpoint(&self) -> [f64; 2] {
        [
            0.5 * (self.endpoints[0][0] + self.endpoints[1][0]),
            0.5 * (self.endpoints[0][1] + self.endpoints[1][1]),
        ]
    }
}

/// All element edges of a mesh, interior ones listed once.
#[derive(Clone, Debug)]
pub struct EdgeSkeleton {
    pub edges: Vec<Edge>,
}

impl EdgeSkeleton {
    pub fn from_mesh(mesh: &TriMesh) -> EdgeSkeleton {
        EdgeSkeleton::from_mesh_with(mesh, SideConvention::LowerIndexPlus)
    }

    /// Skeleton with an explicit `K+`/`K-` convention. Used to check that
    /// assembled bilinear forms are convention-independent.
    pub fn from_mesh_with(mesh: &TriMesh, convention: SideConvention) -> EdgeSkeleton {
        // map sorted vertex pair -> adjacent elements, in deterministic order
        let mut by_pair: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (e, t) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                by_pair.entry(key).or_default().push(e);
            }
        }
        let mut edges = Vec::with_capacity(by_pair.len());
        for ((va, vb), elems) in by_pair {
            assert!(
                elems.len() <= 2,
                "edge ({va}, {vb}) shared by more than two elements"
            );
            let (plus, minus) = match (elems.len(), convention) {
                (1, _) => (elems[0], None),
                (2, SideConvention::LowerIndexPlus) => {
                    (elems[0].min(elems[1]), Some(elems[0].max(elems[1])))
                }
                (2, SideConvention::HigherIndexPlus) => {
                    (elems[0].max(elems[1]), Some(elems[0].min(elems[1])))
                }
                _ => unreachable!(),
            };
            let pa = mesh.vertices[va];
            let pb = mesh.vertices[vb];
            let dx = pb[0] - pa[0];
            let dy = pb[1] - pa[1];
            let length = (dx * dx + dy * dy).sqrt();
            // rotate the tangent, then orient away from K+
            let mut normal = [dy / length, -dx / length];
            let t = mesh.triangles[plus];
            let opposite = t
                .iter()
                .copied()
                .find(|&v| v != va && v != vb)
                .expect("degenerate triangle");
            let po = mesh.vertices[opposite];
            let toward_opp =
                normal[0] * (po[0] - pa[0]) + normal[1] * (po[1] - pa[1]);
            if toward_opp > 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            edges.push(Edge {
                endpoints: [pa, pb],
                length,
                normal,
                plus,
                minus,
            });
        }
        EdgeSkeleton { edges }
    }

    pub fn num_boundary(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }
}

/// Builds the structured triangulation and its skeleton for a given level.
pub fn build_structured(level: usize) -> Result<(TriMesh, EdgeSkeleton)> {
    if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
        return Err(Error::LevelOutOfRange {
            level,
            min: MIN_LEVEL,
            max: MAX_LEVEL,
        });
    }
    let n = 1usize << level;
    let h = 0.5f64.powi(level as i32);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            // diagonal from lower-left to upper-right
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mesh = TriMesh {
        level,
        h,
        vertices,
        triangles,
    };
    let skeleton = EdgeSkeleton::from_mesh(&mesh);
    Ok((mesh, skeleton))
}

/// For each fine triangle, the coarse triangle whose closure contains it.
#[derive(Clone, Debug)]
pub struct NestingMap {
    pub coarse_of: Vec<usize>,
}

pub fn build_nesting(fine: &TriMesh, coarse: &TriMesh) -> Result<NestingMap> {
    if fine.level <= coarse.level {
        return Err(Error::NotNested {
            fine: fine.level,
            coarse: coarse.level,
        });
    }
    let nc = 1usize << coarse.level;
    let hc = coarse.h;
    let mut coarse_of = Vec::with_capacity(fine.num_triangles());
    for e in 0..fine.num_triangles() {
        let [xb, yb] = fine.barycenter(e);
        let i = ((xb / hc).floor() as usize).min(nc - 1);
        let j = ((yb / hc).floor() as usize).min(nc - 1);
        // below the square's lower-left/upper-right diagonal -> lower triangle
        let upper = (yb - j as f64 * hc) > (xb - i as f64 * hc);
        coarse_of.push(2 * (j * nc + i) + usize::from(upper));
    }
    Ok(NestingMap { coarse_of })
}

/// Barycentric coordinates of `p` with respect to a triangle.
pub fn barycentric(tri: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let [a, b, c] = *tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (p[1] - a[1]) * (c[0] - a[0])) / det;
    let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])) / det;
    [1.0 - l1 - l2, l1, l2]
}
