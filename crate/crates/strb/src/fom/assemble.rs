//! Taylor–Hood assembly: quadratic velocity / linear pressure on the
//! triangulation, multiplier trace coupling on each inflow boundary, and the
//! wall treatment that fixes the block convention for everything downstream.
//!
//! Velocity DOFs interleave components, `dof = 2 * node + component`. Wall
//! rows of the mass and stiffness matrices are replaced by scaled identity
//! rows (the scale is the mean diagonal, keeping the step matrix balanced),
//! and the same rows of the momentum-block couplings `Bᵀ_bc`, `Cᵀ_bc` are
//! zeroed. Columns stay untouched, so the constraint rows `B`, `C` are *not*
//! transposes of the momentum couplings. The velocity norm matrix instead
//! zeroes wall rows and columns symmetrically, which keeps it positive
//! definite and makes any norm-orthogonal solve respect the wall conditions
//! automatically.

use super::mesh::Mesh2D;
use super::multiplier::TraceBasis;
use super::quad::{gauss_legendre, TRIANGLE_DEGREE4};
use super::{FomError, Result};
use crate::tensor::{cholesky, SparseMatrix};
use std::ops::Range;

/// Every parameter-independent spatial operator of the model.
#[derive(Debug, Clone)]
pub struct FomSpatialBlocks {
    /// ρ-weighted vector mass, wall rows replaced.
    pub m: SparseMatrix,
    /// 2μ strain-rate stiffness, wall rows replaced.
    pub a: SparseMatrix,
    /// Mass and stiffness before wall treatment (norms, diagnostics).
    pub m_raw: SparseMatrix,
    pub a_raw: SparseMatrix,
    /// Negative divergence, pressure rows by velocity columns.
    pub b: SparseMatrix,
    /// Pressure coupling of the momentum rows: transpose of `b` with wall
    /// rows zeroed.
    pub bt_bc: SparseMatrix,
    /// Trace coupling per inflow boundary, multiplier rows by velocity
    /// columns, and their vertical stack.
    pub c_blocks: Vec<SparseMatrix>,
    pub c: SparseMatrix,
    /// Multiplier coupling of the momentum rows: transpose of `c` with wall
    /// rows zeroed.
    pub ct_bc: SparseMatrix,
    /// Velocity norm (1/ρ) M + (1/2μ) A with symmetric wall treatment.
    pub x_u: SparseMatrix,
    /// Pressure norm: the plain pressure mass matrix.
    pub x_p: SparseMatrix,
    /// Velocity DOFs strongly fixed to zero, sorted.
    pub wall_dofs: Vec<usize>,
    pub trace_bases: Vec<TraceBasis>,
    pub degrees: Vec<usize>,
    pub rho: f64,
    pub mu: f64,
    pub n_u: usize,
    pub n_p: usize,
    pub n_lambda: usize,
}

impl FomSpatialBlocks {
    pub fn n_total(&self) -> usize {
        self.n_u + self.n_p + self.n_lambda
    }

    pub fn velocity_range(&self) -> Range<usize> {
        0..self.n_u
    }

    pub fn pressure_range(&self) -> Range<usize> {
        self.n_u..self.n_u + self.n_p
    }

    pub fn multiplier_range(&self) -> Range<usize> {
        self.n_u + self.n_p..self.n_total()
    }

    /// Sizes of the per-boundary multiplier blocks, 2 (degree + 1) each.
    pub fn multiplier_sizes(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| 2 * (d + 1)).collect()
    }

    /// Rows of boundary `k` (1-based) within the stacked multiplier block.
    pub fn multiplier_block_range(&self, k: u8) -> Range<usize> {
        let sizes = self.multiplier_sizes();
        let lo: usize = sizes[..k as usize - 1].iter().sum();
        lo..lo + sizes[k as usize - 1]
    }

    /// The multiplier norm is the identity.
    pub fn x_lambda(&self) -> SparseMatrix {
        SparseMatrix::identity(self.n_lambda)
    }
}

/// Values and reference gradients of the six quadratic shape functions at a
/// barycentric point.
fn p2_shapes(l: [f64; 3]) -> ([f64; 6], [[f64; 2]; 6]) {
    let g = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let vals = [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ];
    let mut grads = [[0.0; 2]; 6];
    for v in 0..3 {
        for d in 0..2 {
            grads[v][d] = (4.0 * l[v] - 1.0) * g[v][d];
        }
    }
    for (slot, (p, q)) in [(0usize, 1usize), (1, 2), (2, 0)].into_iter().enumerate() {
        for d in 0..2 {
            grads[3 + slot][d] = 4.0 * (l[p] * g[q][d] + l[q] * g[p][d]);
        }
    }
    (vals, grads)
}

/// Zeroes wall rows and columns of a symmetric matrix and pins the wall
/// diagonal to `kappa`, preserving symmetry and definiteness.
fn wall_symmetrized(raw: &SparseMatrix, wall: &[usize], kappa: f64) -> Result<SparseMatrix> {
    let is_wall = {
        let mut mask = vec![false; raw.rows()];
        for &d in wall {
            mask[d] = true;
        }
        mask
    };
    let mut triplets: Vec<(usize, usize, f64)> = raw
        .iter()
        .filter(|&(i, j, _)| !is_wall[i] && !is_wall[j])
        .collect();
    triplets.extend(wall.iter().map(|&d| (d, d, kappa)));
    Ok(SparseMatrix::from_triplets(raw.rows(), raw.cols(), &triplets)?)
}

/// Assembles every spatial block on the mesh. `degrees[k-1]` is the
/// polynomial degree of the multiplier basis on boundary IN_k.
pub fn assemble_fom(mesh: &Mesh2D, rho: f64, mu: f64, degrees: &[usize]) -> Result<FomSpatialBlocks> {
    if rho <= 0.0 || mu <= 0.0 {
        return Err(FomError::BadParameter("density and viscosity must be positive".into()));
    }
    if degrees.len() != mesh.dirichlet_count() as usize {
        return Err(FomError::BadParameter(format!(
            "mesh has {} inflow boundaries but {} multiplier degrees were given",
            mesh.dirichlet_count(),
            degrees.len()
        )));
    }

    let n_scalar = mesh.n_scalar_nodes();
    let n_u = 2 * n_scalar;
    let n_p = mesh.n_vertices();

    let mut m_t: Vec<(usize, usize, f64)> = Vec::new();
    let mut a_t: Vec<(usize, usize, f64)> = Vec::new();
    let mut b_t: Vec<(usize, usize, f64)> = Vec::new();
    let mut xp_t: Vec<(usize, usize, f64)> = Vec::new();

    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let nodes = mesh.tri_scalar(t);
        let [v0, v1, v2] = [mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2])];
        let jac = [[v1[0] - v0[0], v2[0] - v0[0]], [v1[1] - v0[1], v2[1] - v0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        let area = 0.5 * det;

        for &(l, wq) in &TRIANGLE_DEGREE4 {
            let w = wq * area;
            let (p2, dref) = p2_shapes(l);
            // Physical gradients: J⁻ᵀ times the reference gradient.
            let mut dn = [[0.0; 2]; 6];
            for i in 0..6 {
                for a in 0..2 {
                    dn[i][a] = inv[0][a] * dref[i][0] + inv[1][a] * dref[i][1];
                }
            }
            let p1 = [l[0], l[1], l[2]];

            for i in 0..6 {
                for j in 0..6 {
                    let mass = rho * w * p2[i] * p2[j];
                    let lap = dn[i][0] * dn[j][0] + dn[i][1] * dn[j][1];
                    for a in 0..2 {
                        m_t.push((2 * nodes[i] + a, 2 * nodes[j] + a, mass));
                        for b in 0..2 {
                            let strain = if a == b { lap } else { 0.0 } + dn[j][a] * dn[i][b];
                            a_t.push((2 * nodes[i] + a, 2 * nodes[j] + b, mu * w * strain));
                        }
                    }
                }
            }
            for i in 0..3 {
                for j in 0..6 {
                    for b in 0..2 {
                        b_t.push((tri[i], 2 * nodes[j] + b, -w * p1[i] * dn[j][b]));
                    }
                }
                for j in 0..3 {
                    xp_t.push((tri[i], tri[j], w * p1[i] * p1[j]));
                }
            }
        }
    }

    let m_raw = SparseMatrix::from_triplets(n_u, n_u, &m_t)?;
    let a_raw = SparseMatrix::from_triplets(n_u, n_u, &a_t)?;
    let b = SparseMatrix::from_triplets(n_p, n_u, &b_t)?;
    let x_p = SparseMatrix::from_triplets(n_p, n_p, &xp_t)?;

    // Trace coupling rows: component c of the velocity against multiplier
    // function m of boundary k, row index c (degree+1) + m in block k.
    let mut trace_bases = Vec::new();
    let mut c_blocks = Vec::new();
    for (idx, &deg) in degrees.iter().enumerate() {
        let k = (idx + 1) as u8;
        let basis = TraceBasis::build(mesh, k, deg)?;
        let rows = 2 * (deg + 1);
        let mut c_t: Vec<(usize, usize, f64)> = Vec::new();
        let (xs, ws) = gauss_legendre(deg + 3);
        for e in mesh.boundary_edges_of(k) {
            let (pa, pb) = (mesh.vertex(e.a), mesh.vertex(e.b));
            let el = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            for (&xq, &wq) in xs.iter().zip(&ws) {
                let xi = 0.5 * (xq + 1.0);
                let w = 0.5 * wq * el;
                let point = [pa[0] + xi * (pb[0] - pa[0]), pa[1] + xi * (pb[1] - pa[1])];
                let q = basis.values_at_param(basis.param_of(point));
                // Quadratic trace on the edge: ends and midpoint.
                let tr = [
                    (e.a, (1.0 - xi) * (1.0 - 2.0 * xi)),
                    (e.b, xi * (2.0 * xi - 1.0)),
                    (e.mid, 4.0 * xi * (1.0 - xi)),
                ];
                for c in 0..2 {
                    for mfun in 0..=deg {
                        for &(node, val) in &tr {
                            c_t.push((c * (deg + 1) + mfun, 2 * node + c, w * q[mfun] * val));
                        }
                    }
                }
            }
        }
        c_blocks.push(SparseMatrix::from_triplets(rows, n_u, &c_t)?);
        trace_bases.push(basis);
    }
    let c = if c_blocks.is_empty() {
        SparseMatrix::from_triplets(0, n_u, &[])?
    } else {
        SparseMatrix::vstack(&c_blocks.iter().collect::<Vec<_>>())?
    };
    let n_lambda = c.rows();

    let wall_dofs: Vec<usize> = mesh
        .wall_scalar_nodes()
        .iter()
        .flat_map(|&n| [2 * n, 2 * n + 1])
        .collect();

    let kappa_m = m_raw.diagonal().iter().sum::<f64>() / n_u as f64;
    let kappa_a = a_raw.diagonal().iter().sum::<f64>() / n_u as f64;
    let m = m_raw.with_rows_replaced_by_scaled_identity(&wall_dofs, kappa_m);
    let a = a_raw.with_rows_replaced_by_scaled_identity(&wall_dofs, kappa_a);
    let bt_bc = b.transpose().with_rows_zeroed(&wall_dofs);
    let ct_bc = c.transpose().with_rows_zeroed(&wall_dofs);

    let m_sym = wall_symmetrized(&m_raw, &wall_dofs, kappa_m)?;
    let a_sym = wall_symmetrized(&a_raw, &wall_dofs, kappa_a)?;
    let x_u = SparseMatrix::linear_combination(&m_sym, 1.0 / rho, &a_sym, 1.0 / (2.0 * mu))?;

    Ok(FomSpatialBlocks {
        m,
        a,
        m_raw,
        a_raw,
        b,
        bt_bc,
        c_blocks,
        c,
        ct_bc,
        x_u,
        x_p,
        wall_dofs,
        trace_bases,
        degrees: degrees.to_vec(),
        rho,
        mu,
        n_u,
        n_p,
        n_lambda,
    })
}

/// Discrete inf-sup constant of the pressure coupling: the smallest singular
/// value of H_u⁻ᵀ Bᵀ_bc H_p⁻¹ where X = HᵀH factors the two norms. A value
/// bounded away from zero certifies the velocity/pressure pairing.
pub fn inf_sup_sigma_min(blocks: &FomSpatialBlocks) -> Result<f64> {
    let hu = cholesky(&blocks.x_u)?;
    let hp = cholesky(&blocks.x_p)?;
    let y = hu.solve_upper_transpose_mat(&blocks.bt_bc.to_dense());
    let z = hp.solve_upper_transpose_mat(&y.transpose()).transpose();
    let gram = z.transpose() * &z;
    let eig = gram.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(min.max(0.0).sqrt())
}
