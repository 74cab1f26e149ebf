//! Galerkin assembly of the mass, stiffness, boundary and load operators.
//!
//! Volume terms use 3×3 Gauss, boundary terms 3-point Gauss per edge: exact
//! for every Q2 bilinear form with constant coefficients. The emission box is
//! clipped against each element before integration, since the box edges need
//! not line up with the grid.

use super::basis::{dshape1, shape1, shape_q2, GAUSS3};
use super::mesh::{BoundaryFacet, BoundaryTag, Mesh};
use super::sparse::SparseOperator;
use crate::domain::Rect;
use crate::error::FemError;

/// Consistent mass matrix M_ij = ∫ φ_i φ_j.
pub fn assemble_mass(mesh: &Mesh) -> SparseOperator {
    let jac = 0.25 * mesh.hx() * mesh.hy();
    let mut local = [[0.0; 9]; 9];
    for &(eta, weta) in &GAUSS3 {
        for &(xi, wxi) in &GAUSS3 {
            let shapes = shape_q2(xi, eta);
            let w = wxi * weta * jac;
            for i in 0..9 {
                for j in 0..9 {
                    local[i][j] += w * shapes[i] * shapes[j];
                }
            }
        }
    }
    scatter_constant_local(mesh, &local)
}

/// Stiffness matrix K_ij = ∫ ∇φ_i · ∇φ_j. Positive semidefinite; constants
/// span the kernel (pure Neumann).
pub fn assemble_stiffness(mesh: &Mesh) -> SparseOperator {
    let hx = mesh.hx();
    let hy = mesh.hy();
    let jac = 0.25 * hx * hy;
    let (sx, sy) = (2.0 / hx, 2.0 / hy);
    let mut local = [[0.0; 9]; 9];
    for &(eta, weta) in &GAUSS3 {
        for &(xi, wxi) in &GAUSS3 {
            let w = wxi * weta * jac;
            let mut gx = [0.0; 9];
            let mut gy = [0.0; 9];
            for b in 0..3 {
                for a in 0..3 {
                    gx[b * 3 + a] = dshape1(a, xi) * shape1(b, eta) * sx;
                    gy[b * 3 + a] = shape1(a, xi) * dshape1(b, eta) * sy;
                }
            }
            for i in 0..9 {
                for j in 0..9 {
                    local[i][j] += w * (gx[i] * gx[j] + gy[i] * gy[j]);
                }
            }
        }
    }
    scatter_constant_local(mesh, &local)
}

/// All elements share the same local matrix on a uniform grid.
fn scatter_constant_local(mesh: &Mesh, local: &[[f64; 9]; 9]) -> SparseOperator {
    let mut triplets = Vec::with_capacity(mesh.elements.len() * 81);
    for conn in &mesh.elements {
        for i in 0..9 {
            for j in 0..9 {
                triplets.push((conn[i] as u32, conn[j] as u32, local[i][j]));
            }
        }
    }
    SparseOperator::from_triplets(mesh.n_nodes(), triplets, true)
        .expect("Galerkin assembly is symmetric by construction")
}

/// Triplets of a boundary mass matrix over the facets carrying `tag`, with a
/// pointwise weight evaluated at the quadrature points. The triplet layout
/// depends only on the mesh and tag, so operators built from different
/// weights share their sparsity pattern.
fn boundary_mass_triplets(
    mesh: &Mesh,
    tag: BoundaryTag,
    mut weight: impl FnMut(&BoundaryFacet, f64, [usize; 3]) -> f64,
) -> Vec<(u32, u32, f64)> {
    let mut triplets = Vec::new();
    for facet in &mesh.boundary_facets {
        if facet.tag != tag {
            continue;
        }
        let nodes = mesh.facet_nodes(facet);
        let jac = 0.5 * mesh.facet_length(facet);
        for &(s, w) in &GAUSS3 {
            let shapes = [shape1(0, s), shape1(1, s), shape1(2, s)];
            let wq = w * jac * weight(facet, s, nodes);
            for i in 0..3 {
                for j in 0..3 {
                    triplets.push((nodes[i] as u32, nodes[j] as u32, wq * shapes[i] * shapes[j]));
                }
            }
        }
    }
    triplets
}

/// Boundary mass matrix B_ij = ∫_{tagged} φ_i φ_j over the trace. Defined for
/// the road (`Gamma`) and ambient (`GammaR`) segments; the no-flux segment
/// carries no operator.
pub fn assemble_boundary_mass(mesh: &Mesh, tag: BoundaryTag) -> Result<SparseOperator, FemError> {
    if tag == BoundaryTag::GammaN {
        return Err(FemError::UnsupportedBoundaryTag);
    }
    let triplets = boundary_mass_triplets(mesh, tag, |_, _, _| 1.0);
    SparseOperator::from_triplets(mesh.n_nodes(), triplets, true)
}

/// Boundary mass with the ambient-exchange switch applied: quadrature points
/// where the previous solution does not exceed the threshold contribute
/// nothing. With a zero threshold and a nonnegative field this reduces to the
/// plain boundary mass.
pub fn assemble_boundary_mass_switched(
    mesh: &Mesh,
    tag: BoundaryTag,
    u_prev: &[f64],
    threshold: f64,
) -> Result<SparseOperator, FemError> {
    if tag == BoundaryTag::GammaN {
        return Err(FemError::UnsupportedBoundaryTag);
    }
    let triplets = boundary_mass_triplets(mesh, tag, |_, s, nodes| {
        let shapes = [shape1(0, s), shape1(1, s), shape1(2, s)];
        let u: f64 = (0..3).map(|k| shapes[k] * u_prev[nodes[k]]).sum();
        if u > threshold {
            1.0
        } else {
            0.0
        }
    });
    SparseOperator::from_triplets(mesh.n_nodes(), triplets, true)
}

/// Load vector l_i = weight · ∫_{region ∩ element} φ_i, exact via Gauss on
/// each clipped sub-rectangle.
pub fn assemble_box_load(mesh: &Mesh, region: &Rect, weight: f64) -> Result<Vec<f64>, FemError> {
    if !region.is_valid()
        || region.x0 < -1e-12
        || region.y0 < -1e-12
        || region.x1 > mesh.width + 1e-12
        || region.y1 > mesh.height + 1e-12
    {
        return Err(FemError::RegionOutsideDomain {
            x0: region.x0,
            x1: region.x1,
            y0: region.y0,
            y1: region.y1,
        });
    }
    let hx = mesh.hx();
    let hy = mesh.hy();
    let mut load = vec![0.0; mesh.n_nodes()];
    for (e, conn) in mesh.elements.iter().enumerate() {
        let ex = e % mesh.nx;
        let ey = e / mesh.nx;
        let x0 = ex as f64 * hx;
        let y0 = ey as f64 * hy;
        // Clip the region against this element.
        let cx0 = region.x0.max(x0);
        let cx1 = region.x1.min(x0 + hx);
        let cy0 = region.y0.max(y0);
        let cy1 = region.y1.min(y0 + hy);
        if cx1 <= cx0 || cy1 <= cy0 {
            continue;
        }
        // Sub-rectangle in reference coordinates.
        let (ax, bx) = (2.0 * (cx0 - x0) / hx - 1.0, 2.0 * (cx1 - x0) / hx - 1.0);
        let (ay, by) = (2.0 * (cy0 - y0) / hy - 1.0, 2.0 * (cy1 - y0) / hy - 1.0);
        let jac = 0.25 * (cx1 - cx0) * (cy1 - cy0);
        for &(q_eta, weta) in &GAUSS3 {
            let eta = 0.5 * ((by - ay) * q_eta + ay + by);
            for &(q_xi, wxi) in &GAUSS3 {
                let xi = 0.5 * ((bx - ax) * q_xi + ax + bx);
                let shapes = shape_q2(xi, eta);
                let w = wxi * weta * jac * weight;
                for l in 0..9 {
                    load[conn[l]] += w * shapes[l];
                }
            }
        }
    }
    Ok(load)
}

/// Load vector for a general source, l_i = ∫ f(x,y) φ_i, with 3×3 Gauss.
pub fn assemble_load_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let hx = mesh.hx();
    let hy = mesh.hy();
    let jac = 0.25 * hx * hy;
    let mut load = vec![0.0; mesh.n_nodes()];
    for (e, conn) in mesh.elements.iter().enumerate() {
        let ex = e % mesh.nx;
        let ey = e / mesh.nx;
        let x0 = ex as f64 * hx;
        let y0 = ey as f64 * hy;
        for &(eta, weta) in &GAUSS3 {
            for &(xi, wxi) in &GAUSS3 {
                let x = x0 + 0.5 * (xi + 1.0) * hx;
                let y = y0 + 0.5 * (eta + 1.0) * hy;
                let shapes = shape_q2(xi, eta);
                let w = wxi * weta * jac * f(x, y);
                for l in 0..9 {
                    load[conn[l]] += w * shapes[l];
                }
            }
        }
    }
    load
}
