//! Structured rectangular mesh with Q2 elements and tagged boundary facets.

use serde::{Deserialize, Serialize};

use super::basis::{shape_q2, GAUSS4};
use super::Field;
use crate::domain::Geometry;
use crate::error::FemError;

/// Boundary segments of the cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryTag {
    /// Road surface (photo-catalytic asphalt).
    Gamma,
    /// Banks on the bottom edge outside the road: no flux.
    GammaN,
    /// Top and lateral edges: exchange with the ambient atmosphere.
    GammaR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

/// One element edge lying on the domain boundary.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryFacet {
    pub element: usize,
    pub side: Side,
    pub tag: BoundaryTag,
}

/// Uniform tensor-product grid of nx × ny Q2 elements over
/// [0,width] × [0,height] (dimensionless).
#[derive(Debug, Clone)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub width: f64,
    pub height: f64,
    pub node_coords: Vec<(f64, f64)>,
    /// Per element, the nine global node ids in tensor order (left-to-right,
    /// bottom-to-top).
    pub elements: Vec<[usize; 9]>,
    pub boundary_facets: Vec<BoundaryFacet>,
}

/// Build the mesh for a dimensionless geometry. Bottom-edge facets whose
/// midpoint falls inside the road span are tagged `Gamma`, the remaining
/// bottom facets `GammaN`; top and side facets are `GammaR`. Tagging is
/// resolved per facet, so the road boundary is exact only when the grid lines
/// hit it.
pub fn build_mesh(geometry: &Geometry, nx: usize, ny: usize) -> Result<Mesh, FemError> {
    if !(geometry.width > 0.0 && geometry.height > 0.0)
        || !geometry.width.is_finite()
        || !geometry.height.is_finite()
    {
        return Err(FemError::InvalidGeometry(format!(
            "degenerate extents {} x {}",
            geometry.width, geometry.height
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(FemError::InvalidGeometry(format!(
            "element counts must be at least 1, got {nx} x {ny}"
        )));
    }
    let (width, height) = (geometry.width, geometry.height);
    let cols = 2 * nx + 1;
    let rows = 2 * ny + 1;
    let mut node_coords = Vec::with_capacity(cols * rows);
    for j in 0..rows {
        for i in 0..cols {
            node_coords.push((
                width * i as f64 / (cols - 1) as f64,
                height * j as f64 / (rows - 1) as f64,
            ));
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    for ey in 0..ny {
        for ex in 0..nx {
            let mut conn = [0usize; 9];
            for b in 0..3 {
                for a in 0..3 {
                    conn[b * 3 + a] = (2 * ey + b) * cols + 2 * ex + a;
                }
            }
            elements.push(conn);
        }
    }

    let road = geometry.road_span();
    let hx = width / nx as f64;
    let mut boundary_facets = Vec::with_capacity(2 * (nx + ny));
    for ex in 0..nx {
        let midpoint = (ex as f64 + 0.5) * hx;
        let tag = if midpoint >= road.0 && midpoint <= road.1 {
            BoundaryTag::Gamma
        } else {
            BoundaryTag::GammaN
        };
        boundary_facets.push(BoundaryFacet {
            element: ex,
            side: Side::Bottom,
            tag,
        });
        boundary_facets.push(BoundaryFacet {
            element: (ny - 1) * nx + ex,
            side: Side::Top,
            tag: BoundaryTag::GammaR,
        });
    }
    for ey in 0..ny {
        boundary_facets.push(BoundaryFacet {
            element: ey * nx,
            side: Side::Left,
            tag: BoundaryTag::GammaR,
        });
        boundary_facets.push(BoundaryFacet {
            element: ey * nx + nx - 1,
            side: Side::Right,
            tag: BoundaryTag::GammaR,
        });
    }
    Ok(Mesh {
        nx,
        ny,
        width,
        height,
        node_coords,
        elements,
        boundary_facets,
    })
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn hx(&self) -> f64 {
        self.width / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.height / self.ny as f64
    }

    /// Geometric length of a boundary facet.
    pub fn facet_length(&self, facet: &BoundaryFacet) -> f64 {
        match facet.side {
            Side::Bottom | Side::Top => self.hx(),
            Side::Left | Side::Right => self.hy(),
        }
    }

    /// The three nodes along a facet, ordered with the edge parameter.
    pub fn facet_nodes(&self, facet: &BoundaryFacet) -> [usize; 3] {
        let conn = &self.elements[facet.element];
        match facet.side {
            Side::Bottom => [conn[0], conn[1], conn[2]],
            Side::Top => [conn[6], conn[7], conn[8]],
            Side::Left => [conn[0], conn[3], conn[6]],
            Side::Right => [conn[2], conn[5], conn[8]],
        }
    }

    /// Element index and local coordinates containing a point.
    pub fn locate(&self, x: f64, y: f64) -> Result<(usize, f64, f64), FemError> {
        if !(0.0..=self.width).contains(&x) || !(0.0..=self.height).contains(&y) {
            return Err(FemError::PointOutsideDomain { x, y });
        }
        let hx = self.hx();
        let hy = self.hy();
        let ex = ((x / hx) as usize).min(self.nx - 1);
        let ey = ((y / hy) as usize).min(self.ny - 1);
        let xi = 2.0 * (x - ex as f64 * hx) / hx - 1.0;
        let eta = 2.0 * (y - ey as f64 * hy) / hy - 1.0;
        Ok((ey * self.nx + ex, xi, eta))
    }

    /// Validate that a field belongs to this mesh.
    pub fn check_field(&self, field: &Field) -> Result<(), FemError> {
        if field.coefficients.len() != self.n_nodes() {
            return Err(FemError::FieldSizeMismatch {
                expected: self.n_nodes(),
                got: field.coefficients.len(),
            });
        }
        if field.coefficients.iter().any(|v| !v.is_finite()) {
            return Err(FemError::NonFiniteField);
        }
        Ok(())
    }
}

/// Evaluate a Q2 field at an arbitrary point; exact for biquadratic fields.
pub fn evaluate_at(mesh: &Mesh, field: &Field, x: f64, y: f64) -> Result<f64, FemError> {
    mesh.check_field(field)?;
    let (e, xi, eta) = mesh.locate(x, y)?;
    let shapes = shape_q2(xi, eta);
    let conn = &mesh.elements[e];
    Ok((0..9)
        .map(|l| shapes[l] * field.coefficients[conn[l]])
        .sum())
}

/// L2 norm of (field - exact) over the domain, 4×4 Gauss per element.
pub fn l2_error(mesh: &Mesh, field: &Field, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let hx = mesh.hx();
    let hy = mesh.hy();
    let jac = 0.25 * hx * hy;
    let mut acc = 0.0;
    for (e, conn) in mesh.elements.iter().enumerate() {
        let ex = e % mesh.nx;
        let ey = e / mesh.nx;
        let x0 = ex as f64 * hx;
        let y0 = ey as f64 * hy;
        for &(eta, weta) in &GAUSS4 {
            for &(xi, wxi) in &GAUSS4 {
                let shapes = shape_q2(xi, eta);
                let uh: f64 = (0..9)
                    .map(|l| shapes[l] * field.coefficients[conn[l]])
                    .sum();
                let x = x0 + 0.5 * (xi + 1.0) * hx;
                let y = y0 + 0.5 * (eta + 1.0) * hy;
                let diff = uh - exact(x, y);
                acc += wxi * weta * jac * diff * diff;
            }
        }
    }
    acc.sqrt()
}

/// Nodal interpolant of a function.
pub fn interpolate(mesh: &Mesh, f: impl Fn(f64, f64) -> f64, time: f64) -> Field {
    Field {
        coefficients: mesh.node_coords.iter().map(|&(x, y)| f(x, y)).collect(),
        time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Geometry;

    fn unit_strip() -> Geometry {
        Geometry::default().scaled_by_reference(40.0)
    }

    #[test]
    fn smallest_mesh_has_nine_nodes_and_four_facets() {
        let mesh = build_mesh(&unit_strip(), 1, 1).unwrap();
        assert_eq!(mesh.n_nodes(), 9);
        assert_eq!(mesh.boundary_facets.len(), 4);
        // With one element the bottom midpoint (0.5) is inside the road span.
        let bottom: Vec<_> = mesh
            .boundary_facets
            .iter()
            .filter(|f| matches!(f.side, Side::Bottom))
            .collect();
        assert_eq!(bottom.len(), 1);
        assert_eq!(bottom[0].tag, BoundaryTag::Gamma);
    }

    #[test]
    fn default_mesh_node_count() {
        let mesh = build_mesh(&unit_strip(), 30, 30).unwrap();
        assert_eq!(mesh.n_nodes(), 61 * 61);
        assert_eq!(mesh.n_nodes(), 3721);
        assert_eq!(mesh.elements.len(), 900);
    }

    #[test]
    fn facet_lengths_sum_to_perimeter() {
        let mesh = build_mesh(&unit_strip(), 30, 30).unwrap();
        let total: f64 = mesh
            .boundary_facets
            .iter()
            .map(|f| mesh.facet_length(f))
            .sum();
        let perimeter = 2.0 * (1.0 + 0.2);
        assert!((total - perimeter).abs() < 1e-12);
    }

    #[test]
    fn boundary_tags_partition_as_in_the_geometry() {
        // nx = 16 aligns the road ends with grid lines: exactly 6 facets.
        let mesh = build_mesh(&unit_strip(), 16, 4).unwrap();
        let gamma_len: f64 = mesh
            .boundary_facets
            .iter()
            .filter(|f| f.tag == BoundaryTag::Gamma)
            .map(|f| mesh.facet_length(f))
            .sum();
        assert!((gamma_len - 0.375).abs() < 1e-12);
        let gn_len: f64 = mesh
            .boundary_facets
            .iter()
            .filter(|f| f.tag == BoundaryTag::GammaN)
            .map(|f| mesh.facet_length(f))
            .sum();
        assert!((gn_len - 0.625).abs() < 1e-12);
        let gr_len: f64 = mesh
            .boundary_facets
            .iter()
            .filter(|f| f.tag == BoundaryTag::GammaR)
            .map(|f| mesh.facet_length(f))
            .sum();
        assert!((gr_len - (1.0 + 2.0 * 0.2)).abs() < 1e-12);
    }

    #[test]
    fn midpoint_tagging_at_the_default_resolution() {
        // 30 elements cannot resolve the road ends exactly: the two facets
        // containing them are tagged whole, giving 12 road facets (length 0.4).
        let mesh = build_mesh(&unit_strip(), 30, 30).unwrap();
        let n_gamma = mesh
            .boundary_facets
            .iter()
            .filter(|f| f.tag == BoundaryTag::Gamma)
            .count();
        assert_eq!(n_gamma, 12);
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        let mut g = unit_strip();
        g.height = 0.0;
        assert!(build_mesh(&g, 4, 4).is_err());
        assert!(build_mesh(&unit_strip(), 0, 4).is_err());
    }

    #[test]
    fn constant_field_evaluates_to_the_constant() {
        let mesh = build_mesh(&unit_strip(), 5, 3).unwrap();
        let field = Field {
            coefficients: vec![2.5; mesh.n_nodes()],
            time: 0.0,
        };
        for (x, y) in [(0.0, 0.0), (0.51, 0.13), (1.0, 0.2), (0.999, 0.001)] {
            assert!((evaluate_at(&mesh, &field, x, y).unwrap() - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn biquadratic_fields_are_reproduced_exactly() {
        let mesh = build_mesh(&unit_strip(), 4, 4).unwrap();
        let f = |x: f64, y: f64| 3.0 * x * x - 2.0 * x * y + 0.5 * y * y + x - 7.0;
        let field = interpolate(&mesh, f, 0.0);
        for (x, y) in [(0.13, 0.05), (0.5, 0.1), (0.77, 0.19)] {
            let v = evaluate_at(&mesh, &field, x, y).unwrap();
            assert!(
                (v - f(x, y)).abs() < 1e-12,
                "at ({x},{y}): {v} vs {}",
                f(x, y)
            );
        }
    }

    #[test]
    fn probe_at_a_node_returns_the_coefficient() {
        let mesh = build_mesh(&unit_strip(), 3, 2).unwrap();
        let mut field = Field {
            coefficients: vec![0.0; mesh.n_nodes()],
            time: 0.0,
        };
        let node = 11;
        field.coefficients[node] = 42.0;
        let (x, y) = mesh.node_coords[node];
        assert!((evaluate_at(&mesh, &field, x, y).unwrap() - 42.0).abs() < 1e-12);
    }

    #[test]
    fn points_outside_error() {
        let mesh = build_mesh(&unit_strip(), 3, 2).unwrap();
        let field = Field {
            coefficients: vec![0.0; mesh.n_nodes()],
            time: 0.0,
        };
        assert!(matches!(
            evaluate_at(&mesh, &field, 1.5, 0.1),
            Err(FemError::PointOutsideDomain { .. })
        ));
        assert!(matches!(
            evaluate_at(&mesh, &field, 0.5, -0.01),
            Err(FemError::PointOutsideDomain { .. })
        ));
    }
}
