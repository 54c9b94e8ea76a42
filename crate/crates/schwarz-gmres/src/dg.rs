//! Interior penalty discontinuous Galerkin assembly on triangles.
//!
//! The discrete space is elementwise linear Lagrange with no continuity
//! across edges; every triangle owns three degrees of freedom, numbered
//! element-major. Two operators are assembled:
//!
//! * the incomplete interior penalty form: element gradients, a single
//!   (nonsymmetrized) consistency flux `-sum_e int_e {grad u} . [v]`, and
//!   the jump penalty `sum_e (eta/|e|) int_e [u] . [v]` — its matrix is
//!   nonsymmetric;
//! * the symmetric form with gradients and penalty only, which is assembled
//!   bit-symmetrically and serves as the s.p.d. reference operator.
//!
//! Jumps and averages use the usual convention: on an interior edge with
//! normal `n+` leaving `K+`, `[v] = v+ n+ + v- n-` and `{t} = (t+ + t-)/2`;
//! on a boundary edge `[v] = v n` and `{t} = t`, so homogeneous Dirichlet
//! data enters only through the edge terms.
//!
//! Quadrature: element gradient terms are exact with the centroid rule,
//! edge terms use 2-point Gauss (exact for the quadratics involved), and
//! load/error integrals use the 6-point degree-4 triangle rule.

use crate::error::{Error, Result};
use crate::mesh::{barycentric, EdgeSkeleton, SideConvention, TriMesh};
use crate::sparse::{CsrMatrix, DenseVector};

/// Elementwise-linear discontinuous space on a triangulation.
#[derive(Clone, Debug)]
pub struct DgSpace {
    pub mesh: TriMesh,
    pub skeleton: EdgeSkeleton,
}

pub const DOFS_PER_ELEMENT: usize = 3;

impl DgSpace {
    pub fn new(mesh: TriMesh, skeleton: EdgeSkeleton) -> DgSpace {
        DgSpace { mesh, skeleton }
    }

    pub fn from_level(level: usize) -> Result<DgSpace> {
        let (mesh, skeleton) = crate::mesh::build_structured(level)?;
        Ok(DgSpace { mesh, skeleton })
    }

    pub fn num_dofs(&self) -> usize {
        DOFS_PER_ELEMENT * self.mesh.num_triangles()
    }

    #[inline]
    pub fn dof(&self, element: usize, local: usize) -> usize {
        DOFS_PER_ELEMENT * element + local
    }

    /// Lagrange node of a dof (the matching triangle vertex).
    pub fn dof_node(&self, dof: usize) -> [f64; 2] {
        let e = dof / DOFS_PER_ELEMENT;
        let i = dof % DOFS_PER_ELEMENT;
        self.mesh.vertices[self.mesh.triangles[e][i]]
    }

    /// Evaluates the discrete function on a given element at a point.
    pub fn eval_on_element(&self, u: &[f64], element: usize, p: [f64; 2]) -> f64 {
        let tri = self.mesh.triangle_vertices(element);
        let lam = barycentric(&tri, p);
        (0..3).map(|i| lam[i] * u[self.dof(element, i)]).sum()
    }
}

/// Penalty parameters: `eta` for the nonsymmetric form, `eta0` for the
/// symmetric reference form, and the coarse-grid rule `eta * H / h`.
#[derive(Clone, Copy, Debug)]
pub struct PenaltyConfig {
    pub eta: f64,
    pub eta0: f64,
}

impl PenaltyConfig {
    pub fn new(eta: f64, eta0: f64) -> PenaltyConfig {
        assert!(eta > 0.0 && eta0 > 0.0);
        PenaltyConfig { eta, eta0 }
    }

    /// Coarse-grid penalty scaled by the mesh-size ratio.
    pub fn coarse_eta(&self, h_fine: f64, h_coarse: f64) -> f64 {
        self.eta * h_coarse / h_fine
    }

    pub fn coarse_eta0(&self, h_fine: f64, h_coarse: f64) -> f64 {
        self.eta0 * h_coarse / h_fine
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig::new(5.0, 5.0)
    }
}

// 6-point degree-4 rule; barycentric points with weights relative to area.
const TRI_QUAD_DEG4: [([f64; 3], f64); 6] = [
    (
        [0.108103018168070, 0.445948490915965, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.108103018168070, 0.445948490915965],
        0.223381589678011,
    ),
    (
        [0.445948490915965, 0.445948490915965, 0.108103018168070],
        0.223381589678011,
    ),
    (
        [0.816847572980459, 0.091576213509771, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.816847572980459, 0.091576213509771],
        0.109951743655322,
    ),
    (
        [0.091576213509771, 0.091576213509771, 0.816847572980459],
        0.109951743655322,
    ),
];

// 2-point Gauss on [0, 1], weights relative to length.
const EDGE_GAUSS_2: [(f64, f64); 2] = [
    (0.211324865405187, 0.5), // (1 - 1/sqrt(3)) / 2
    (0.788675134594813, 0.5),
];

fn perp(a: [f64; 2]) -> [f64; 2] {
    [-a[1], a[0]]
}

/// Constant gradients of the three barycentric basis functions.
fn basis_gradients(tri: &[[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let [p0, p1, p2] = *tri;
    let two_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
    let g = |a: [f64; 2], b: [f64; 2]| {
        let d = perp([b[0] - a[0], b[1] - a[1]]);
        [d[0] / two_area, d[1] / two_area]
    };
    [g(p1, p2), g(p2, p0), g(p0, p1)]
}

fn point_on_edge(endpoints: &[[f64; 2]; 2], t: f64) -> [f64; 2] {
    [
        endpoints[0][0] + t * (endpoints[1][0] - endpoints[0][0]),
        endpoints[0][1] + t * (endpoints[1][1] - endpoints[0][1]),
    ]
}

/// Element-gradient plus penalty triplets; every block is pushed with
/// bitwise-symmetric values so the assembled matrix is exactly symmetric.
fn symmetric_part_triplets(space: &DgSpace, eta: f64) -> Vec<(usize, usize, f64)> {
    let mesh = &space.mesh;
    let mut triplets = Vec::new();

    for e in 0..mesh.num_triangles() {
        let tri = mesh.triangle_vertices(e);
        let grads = basis_gradients(&tri);
        let area = mesh.signed_area(e);
        for i in 0..3 {
            for j in 0..3 {
                let v = area * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                triplets.push((space.dof(e, i), space.dof(e, j), v));
            }
        }
    }

    for edge in &space.skeleton.edges {
        let weight = eta / edge.length;
        let sides: Vec<(usize, f64)> = match edge.minus {
            Some(minus) => vec![(edge.plus, 1.0), (minus, -1.0)],
            None => vec![(edge.plus, 1.0)],
        };
        // traces of the three basis functions of each side at the Gauss points
        let traces: Vec<[[f64; 3]; 2]> = sides
            .iter()
            .map(|&(elem, _)| {
                let tri = mesh.triangle_vertices(elem);
                let mut vals = [[0.0; 3]; 2];
                for (q, &(t, _)) in EDGE_GAUSS_2.iter().enumerate() {
                    vals[q] = barycentric(&tri, point_on_edge(&edge.endpoints, t));
                }
                vals
            })
            .collect();
        for (ti, &(elem_i, sign_i)) in sides.iter().enumerate() {
            for (tj, &(elem_j, sign_j)) in sides.iter().enumerate() {
                for i in 0..3 {
                    for j in 0..3 {
                        let mut acc = 0.0;
                        for (q, &(_, w)) in EDGE_GAUSS_2.iter().enumerate() {
                            acc += w * traces[ti][q][i] * traces[tj][q][j];
                        }
                        let v = weight * sign_i * sign_j * edge.length * acc;
                        triplets.push((space.dof(elem_i, i), space.dof(elem_j, j), v));
                    }
                }
            }
        }
    }
    triplets
}

/// The consistency flux `sum_e int_e {grad u} . [v]` as a matrix.
/// The nonsymmetric form subtracts this from the symmetric part.
pub fn assemble_flux(space: &DgSpace) -> CsrMatrix {
    let mesh = &space.mesh;
    let n = space.num_dofs();
    let mut triplets = Vec::new();

    for edge in &space.skeleton.edges {
        let normal = edge.normal;
        let (u_sides, v_sides): (Vec<(usize, f64)>, Vec<(usize, f64)>) = match edge.minus {
            // {grad u} halves both contributions; [v] flips sign across the edge
            Some(minus) => (
                vec![(edge.plus, 0.5), (minus, 0.5)],
                vec![(edge.plus, 1.0), (minus, -1.0)],
            ),
            None => (vec![(edge.plus, 1.0)], vec![(edge.plus, 1.0)]),
        };
        for &(elem_v, sign_v) in &v_sides {
            let tri_v = mesh.triangle_vertices(elem_v);
            let mut trace = [[0.0; 3]; 2];
            for (q, &(t, _)) in EDGE_GAUSS_2.iter().enumerate() {
                trace[q] = barycentric(&tri_v, point_on_edge(&edge.endpoints, t));
            }
            for &(elem_u, half) in &u_sides {
                let tri_u = mesh.triangle_vertices(elem_u);
                let grads = basis_gradients(&tri_u);
                for j in 0..3 {
                    let gn = grads[j][0] * normal[0] + grads[j][1] * normal[1];
                    for i in 0..3 {
                        let mut acc = 0.0;
                        for (q, &(_, w)) in EDGE_GAUSS_2.iter().enumerate() {
                            acc += w * trace[q][i];
                        }
                        let v = half * sign_v * gn * edge.length * acc;
                        triplets.push((space.dof(elem_v, i), space.dof(elem_u, j), v));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Nonsymmetric interior penalty operator.
pub fn assemble_iipg(space: &DgSpace, eta: f64) -> CsrMatrix {
    assert!(eta > 0.0);
    assemble_sym(space, eta).add_scaled(-1.0, &assemble_flux(space))
}

/// Symmetric reference operator: gradients plus penalty, no flux term.
pub fn assemble_sym(space: &DgSpace, eta0: f64) -> CsrMatrix {
    assert!(eta0 > 0.0);
    let n = space.num_dofs();
    CsrMatrix::from_triplets(n, n, &symmetric_part_triplets(space, eta0))
}

/// Load vector for a general right-hand side.
pub fn assemble_rhs_for<F: Fn(f64, f64) -> f64>(space: &DgSpace, f: F) -> DenseVector {
    let mesh = &space.mesh;
    let mut rhs = DenseVector::zeros(space.num_dofs());
    for e in 0..mesh.num_triangles() {
        let tri = mesh.triangle_vertices(e);
        let area = mesh.signed_area(e);
        for &(lam, w) in &TRI_QUAD_DEG4 {
            let x = lam[0] * tri[0][0] + lam[1] * tri[1][0] + lam[2] * tri[2][0];
            let y = lam[0] * tri[0][1] + lam[1] * tri[1][1] + lam[2] * tri[2][1];
            let fv = f(x, y);
            for i in 0..3 {
                rhs[space.dof(e, i)] += w * area * fv * lam[i];
            }
        }
    }
    debug_assert!(rhs.is_finite());
    rhs
}

/// Load vector for the manufactured solution `sin(pi x) sin(pi y)`.
pub fn assemble_rhs(space: &DgSpace) -> DenseVector {
    let pi = std::f64::consts::PI;
    assemble_rhs_for(space, move |x, y| {
        2.0 * pi * pi * (pi * x).sin() * (pi * y).sin()
    })
}

/// L2 and broken-energy error of a discrete function against an arbitrary
/// exact solution. The energy norm combines elementwise gradients with the
/// penalty-weighted jumps.
pub fn error_norms_against<F, G>(
    space: &DgSpace,
    u_h: &DenseVector,
    eta: f64,
    exact: F,
    grad_exact: G,
) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> f64,
    G: Fn(f64, f64) -> [f64; 2],
{
    if u_h.len() != space.num_dofs() {
        return Err(Error::DimensionMismatch {
            context: "error_norms",
            expected: space.num_dofs(),
            got: u_h.len(),
        });
    }
    let mesh = &space.mesh;
    let mut l2_sq = 0.0;
    let mut energy_sq = 0.0;

    for e in 0..mesh.num_triangles() {
        let tri = mesh.triangle_vertices(e);
        let grads = basis_gradients(&tri);
        let area = mesh.signed_area(e);
        let mut grad_uh = [0.0, 0.0];
        for i in 0..3 {
            grad_uh[0] += u_h[space.dof(e, i)] * grads[i][0];
            grad_uh[1] += u_h[space.dof(e, i)] * grads[i][1];
        }
        for &(lam, w) in &TRI_QUAD_DEG4 {
            let x = lam[0] * tri[0][0] + lam[1] * tri[1][0] + lam[2] * tri[2][0];
            let y = lam[0] * tri[0][1] + lam[1] * tri[1][1] + lam[2] * tri[2][1];
            let uh = (0..3).map(|i| lam[i] * u_h[space.dof(e, i)]).sum::<f64>();
            let diff = uh - exact(x, y);
            l2_sq += w * area * diff * diff;
            let ge = grad_exact(x, y);
            let dx = grad_uh[0] - ge[0];
            let dy = grad_uh[1] - ge[1];
            energy_sq += w * area * (dx * dx + dy * dy);
        }
    }

    for edge in &space.skeleton.edges {
        let weight = eta / edge.length;
        for &(t, w) in &EDGE_GAUSS_2 {
            let p = point_on_edge(&edge.endpoints, t);
            let ex = exact(p[0], p[1]);
            let jump = match edge.minus {
                Some(minus) => {
                    (space.eval_on_element(u_h, edge.plus, p) - ex)
                        - (space.eval_on_element(u_h, minus, p) - ex)
                }
                None => space.eval_on_element(u_h, edge.plus, p) - ex,
            };
            energy_sq += weight * w * edge.length * jump * jump;
        }
    }

    Ok((l2_sq.sqrt(), energy_sq.sqrt()))
}

/// Errors against the manufactured solution `sin(pi x) sin(pi y)`.
pub fn error_norms(space: &DgSpace, u_h: &DenseVector, eta: f64) -> Result<(f64, f64)> {
    let pi = std::f64::consts::PI;
    error_norms_against(
        space,
        u_h,
        eta,
        |x, y| (pi * x).sin() * (pi * y).sin(),
        |x, y| {
            [
                pi * (pi * x).cos() * (pi * y).sin(),
                pi * (pi * x).sin() * (pi * y).cos(),
            ]
        },
    )
}

/// Nodal interpolant of a function into the discontinuous space.
pub fn interpolate<F: Fn(f64, f64) -> f64>(space: &DgSpace, f: F) -> DenseVector {
    let mut u = DenseVector::zeros(space.num_dofs());
    for d in 0..space.num_dofs() {
        let p = space.dof_node(d);
        u[d] = f(p[0], p[1]);
    }
    u
}

/// Reassembles the nonsymmetric operator under the opposite edge-side
/// convention; the result must agree with [`assemble_iipg`].
pub fn assemble_iipg_swapped_convention(space: &DgSpace, eta: f64) -> CsrMatrix {
    let skeleton = EdgeSkeleton::from_mesh_with(&space.mesh, SideConvention::HigherIndexPlus);
    let swapped = DgSpace::new(space.mesh.clone(), skeleton);
    assemble_iipg(&swapped, eta)
}
