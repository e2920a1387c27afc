//! Scalar multiplier basis on a weakly constrained boundary segment:
//! Chebyshev polynomials of the second kind mapped to the segment, then
//! orthonormalized in L²(segment) by Gram–Schmidt. The triangular change of
//! basis keeps degrees nested, so the m-th function is a polynomial of
//! degree exactly m. Each velocity component carries its own copy of this
//! scalar basis; that replication lives in the assembly code, not here.

use super::mesh::Mesh2D;
use super::quad::gauss_legendre;
use super::{FomError, Result};
use crate::tensor::{cholesky, SparseMatrix};
use crate::{DMat, DVec};

/// Orthonormal polynomial trace basis on one straight boundary segment.
#[derive(Debug, Clone)]
pub struct TraceBasis {
    boundary: u8,
    degree: usize,
    start: [f64; 2],
    tangent: [f64; 2],
    length: f64,
    inward: [f64; 2],
    /// Upper-triangular columns: the m-th orthonormal function expressed in
    /// raw Chebyshev-of-the-second-kind coordinates.
    coeff: DMat,
}

/// Values of U_0 … U_n at `x` by the three-term recurrence.
fn chebyshev_u(n: usize, x: f64) -> DVec {
    let mut v = DVec::zeros(n + 1);
    v[0] = 1.0;
    if n >= 1 {
        v[1] = 2.0 * x;
    }
    for k in 2..=n {
        v[k] = 2.0 * x * v[k - 1] - v[k - 2];
    }
    v
}

impl TraceBasis {
    /// Builds the basis of degree `n_in` on boundary IN_`k` of the mesh.
    /// The boundary must form one straight open path.
    pub fn build(mesh: &Mesh2D, k: u8, n_in: usize) -> Result<Self> {
        let edges: Vec<_> = mesh.boundary_edges_of(k).collect();
        if edges.is_empty() {
            return Err(FomError::BadParameter(format!("boundary IN_{k} has no edges")));
        }

        // Path endpoints are the vertices incident to exactly one edge.
        let mut incidence: Vec<(usize, usize)> = Vec::new();
        for e in &edges {
            for v in [e.a, e.b] {
                match incidence.iter_mut().find(|(id, _)| *id == v) {
                    Some((_, c)) => *c += 1,
                    None => incidence.push((v, 1)),
                }
            }
        }
        let mut ends: Vec<usize> =
            incidence.iter().filter(|(_, c)| *c == 1).map(|&(v, _)| v).collect();
        if ends.len() != 2 {
            return Err(FomError::CurvedBoundary { boundary: k });
        }
        ends.sort_by(|&p, &q| {
            let (cp, cq) = (mesh.vertex(p), mesh.vertex(q));
            cp[0].partial_cmp(&cq[0]).unwrap().then(cp[1].partial_cmp(&cq[1]).unwrap())
        });
        let start = mesh.vertex(ends[0]);
        let end = mesh.vertex(ends[1]);
        let length = ((end[0] - start[0]).powi(2) + (end[1] - start[1]).powi(2)).sqrt();
        let tangent = [(end[0] - start[0]) / length, (end[1] - start[1]) / length];
        for e in &edges {
            for v in [e.a, e.b] {
                let c = mesh.vertex(v);
                let cross = (c[0] - start[0]) * tangent[1] - (c[1] - start[1]) * tangent[0];
                if cross.abs() > 1e-10 * length {
                    return Err(FomError::CurvedBoundary { boundary: k });
                }
            }
        }

        // Domain-on-left orientation of any edge gives the inward normal.
        let (ea, eb) = (mesh.vertex(edges[0].a), mesh.vertex(edges[0].b));
        let el = ((eb[0] - ea[0]).powi(2) + (eb[1] - ea[1]).powi(2)).sqrt();
        let inward = [-(eb[1] - ea[1]) / el, (eb[0] - ea[0]) / el];

        // Gram matrix of the raw basis over the segment, then the triangular
        // factor X = HᵀH turns columns of H⁻¹ into an orthonormal set.
        let n = n_in + 1;
        let (xs, ws) = gauss_legendre(n_in + 3);
        let mut gram = DMat::zeros(n, n);
        for (&x, &w) in xs.iter().zip(&ws) {
            let u = chebyshev_u(n_in, x);
            gram.ger(0.5 * length * w, &u, &u, 1.0);
        }
        let mut triplets = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                triplets.push((i, j, gram[(i, j)]));
            }
        }
        let gram_sp = SparseMatrix::from_triplets(n, n, &triplets)?;
        let factor = cholesky(&gram_sp)?;
        let coeff = factor.solve_upper_mat(&DMat::identity(n, n));

        Ok(TraceBasis { boundary: k, degree: n_in, start, tangent, length, inward, coeff })
    }

    pub fn boundary(&self) -> u8 {
        self.boundary
    }

    /// Number of scalar basis functions, degree + 1.
    pub fn count(&self) -> usize {
        self.degree + 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn inward(&self) -> [f64; 2] {
        self.inward
    }

    /// Arclength from the segment start to the projection of `point`.
    pub fn arclength(&self, point: [f64; 2]) -> f64 {
        (point[0] - self.start[0]) * self.tangent[0] + (point[1] - self.start[1]) * self.tangent[1]
    }

    /// Maps a boundary point to the reference coordinate in [-1, 1].
    pub fn param_of(&self, point: [f64; 2]) -> f64 {
        2.0 * self.arclength(point) / self.length - 1.0
    }

    /// Values of all orthonormal functions at reference coordinate `x`.
    pub fn values_at_param(&self, x: f64) -> DVec {
        self.coeff.transpose() * chebyshev_u(self.degree, x)
    }

    /// Value of the m-th orthonormal function at a boundary point.
    pub fn eval(&self, m: usize, point: [f64; 2]) -> f64 {
        let u = chebyshev_u(self.degree, self.param_of(point));
        self.coeff.column(m).dot(&u)
    }
}
