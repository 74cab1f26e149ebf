//! Finite element engine: structured Q2 mesh, operator assembly, θ-scheme
//! stepping and a preconditioned conjugate-gradient solve.

pub mod assemble;
pub mod basis;
pub mod mesh;
pub mod pcg;
pub mod sparse;
pub mod stepper;

pub use assemble::{
    assemble_boundary_mass, assemble_box_load, assemble_load_fn, assemble_mass, assemble_stiffness,
};
pub use mesh::{build_mesh, evaluate_at, interpolate, l2_error, BoundaryTag, Mesh};
pub use pcg::{pcg, solve_spd, SolveStats};
pub use sparse::{OperatorCombo, SparseOperator};
pub use stepper::{StepCoeffs, System};

use std::io::Write;

/// Nodal coefficients of the concentration at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub coefficients: Vec<f64>,
    /// Dimensionless time in [0,1].
    pub time: f64,
}

impl Field {
    pub fn uniform(n: usize, value: f64, time: f64) -> Self {
        Field {
            coefficients: vec![value; n],
            time,
        }
    }

    pub fn min(&self) -> f64 {
        self.coefficients
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.coefficients
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Dump a field as `x,y,u` rows over the node grid, for external plotting.
pub fn write_field_csv<W: Write>(mesh: &Mesh, field: &Field, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "x,y,u")?;
    for (node, &(x, y)) in mesh.node_coords.iter().enumerate() {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", x, y, field.coefficients[node])?;
    }
    Ok(())
}
