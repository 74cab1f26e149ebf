//! One-parameter (θ) time discretization of the reaction–diffusion system.
//!
//! Each step solves
//!
//! ```text
//! [M + θ dt (K + c_new M + r B_R + a B_Γ)] u_new =
//!     [M - (1-θ) dt (K + c_prev M + r B_R + a B_Γ)] u_prev
//!     + dt (θ f_new + (1-θ) f_prev) F + dt r ū_T (B_R 1)
//! ```
//!
//! where `c` is the volume sink coefficient, `r` the ambient-exchange
//! coefficient, `a` the asphalt coefficient and `F` the source load vector.
//! The positive-part switch of the ambient exchange is frozen at the previous
//! time level, so every step is one linear SPD solve; `B_R` above is the
//! switched boundary mass.

use super::assemble::{
    assemble_boundary_mass, assemble_boundary_mass_switched, assemble_mass, assemble_stiffness,
};
use super::mesh::{BoundaryTag, Mesh};
use super::pcg::pcg;
use super::sparse::{OperatorCombo, SparseOperator};
use super::Field;
use crate::error::{FemError, SolverError};

/// Time-dependent scalars of one step, sampled at both time levels.
#[derive(Debug, Clone, Copy)]
pub struct StepCoeffs {
    /// Source scale A_f·m(t) at (t_prev, t_new); multiplies the load vector.
    pub source: (f64, f64),
    /// Volume sink κ̄·A_s·s(t) at (t_prev, t_new); multiplies the mass matrix.
    pub sink: (f64, f64),
    /// Ambient exchange coefficient σL/D (constant in time).
    pub robin: f64,
    /// Asphalt sink coefficient γ·κL/D (constant in time).
    pub asphalt: f64,
}

impl StepCoeffs {
    pub fn zero() -> Self {
        StepCoeffs {
            source: (0.0, 0.0),
            sink: (0.0, 0.0),
            robin: 0.0,
            asphalt: 0.0,
        }
    }
}

/// Assembled operators of one simulation, reused across steps.
pub struct System {
    mass: SparseOperator,
    stiffness: SparseOperator,
    asphalt: SparseOperator,
    combo: OperatorCombo,
    system: SparseOperator,
    /// Dimensionless exchange threshold u_T/u_r.
    threshold: f64,
    solver_tol: f64,
    scratch: Vec<f64>,
    /// Solution of the step before the last one, for extrapolated initial
    /// guesses.
    previous: Option<Vec<f64>>,
}

impl System {
    pub fn new(mesh: &Mesh, threshold: f64, solver_tol: f64) -> Result<Self, FemError> {
        let mass = assemble_mass(mesh);
        let stiffness = assemble_stiffness(mesh);
        let robin_pattern = assemble_boundary_mass(mesh, BoundaryTag::GammaR)?;
        let asphalt = assemble_boundary_mass(mesh, BoundaryTag::Gamma)?;
        let combo = OperatorCombo::new(&[&mass, &stiffness, &robin_pattern, &asphalt]);
        let system = combo.zero_operator(true);
        let n = mesh.n_nodes();
        Ok(System {
            mass,
            stiffness,
            asphalt,
            combo,
            system,
            threshold,
            solver_tol,
            scratch: vec![0.0; n],
            previous: None,
        })
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    /// Total dimensionless mass 1ᵀ M u of a field.
    pub fn total_mass(&self, field: &Field) -> f64 {
        self.mass.matvec(&field.coefficients).iter().sum()
    }

    /// Advance one step of length `dt` from `u_prev`; `load` is the
    /// space-only part of the source. Produces the field at
    /// `u_prev.time + dt`.
    pub fn step_theta(
        &mut self,
        mesh: &Mesh,
        u_prev: &Field,
        dt: f64,
        theta: f64,
        coeffs: &StepCoeffs,
        load: &[f64],
    ) -> Result<Field, SolverError> {
        assert!(dt > 0.0, "dt must be positive");
        assert!((0.0..=1.0).contains(&theta), "theta must lie in [0,1]");
        let n = u_prev.coefficients.len();

        // Ambient-exchange switch frozen at the previous level.
        let robin = assemble_boundary_mass_switched(
            mesh,
            BoundaryTag::GammaR,
            &u_prev.coefficients,
            self.threshold,
        )?;

        // Left-hand operator.
        self.combo.combine_into(
            &[
                (&self.mass, 1.0 + theta * dt * coeffs.sink.1),
                (&self.stiffness, theta * dt),
                (&robin, theta * dt * coeffs.robin),
                (&self.asphalt, theta * dt * coeffs.asphalt),
            ],
            &mut self.system,
        );

        // Right-hand side.
        let u = &u_prev.coefficients;
        let mut rhs = self.mass.matvec(u);
        let explicit = (1.0 - theta) * dt;
        if explicit != 0.0 {
            self.stiffness.matvec_into(u, &mut self.scratch);
            for i in 0..n {
                rhs[i] -= explicit * self.scratch[i];
            }
            if coeffs.sink.0 != 0.0 {
                self.mass.matvec_into(u, &mut self.scratch);
                for i in 0..n {
                    rhs[i] -= explicit * coeffs.sink.0 * self.scratch[i];
                }
            }
            if coeffs.robin != 0.0 {
                robin.matvec_into(u, &mut self.scratch);
                for i in 0..n {
                    rhs[i] -= explicit * coeffs.robin * self.scratch[i];
                }
            }
            if coeffs.asphalt != 0.0 {
                self.asphalt.matvec_into(u, &mut self.scratch);
                for i in 0..n {
                    rhs[i] -= explicit * coeffs.asphalt * self.scratch[i];
                }
            }
        }
        let source_scale = dt * (theta * coeffs.source.1 + (1.0 - theta) * coeffs.source.0);
        if source_scale != 0.0 {
            for i in 0..n {
                rhs[i] += source_scale * load[i];
            }
        }
        if coeffs.robin != 0.0 && self.threshold != 0.0 {
            // The threshold part of (u - ū_T)⁺ contributes a constant source
            // on the exchanging boundary.
            let b1 = robin.row_sums();
            let scale = dt * coeffs.robin * self.threshold;
            for i in 0..n {
                rhs[i] += scale * b1[i];
            }
        }

        // Linear extrapolation of the last two solutions is a better guess
        // than u_prev once the run is underway.
        let guess: Vec<f64> = match &self.previous {
            Some(prev) if prev.len() == n => (0..n).map(|i| 2.0 * u[i] - prev[i]).collect(),
            _ => u.to_vec(),
        };
        let max_iter = 10 * n;
        let (coefficients, _) = pcg(&self.system, &rhs, Some(&guess), self.solver_tol, max_iter)?;
        self.previous = Some(u.to_vec());
        Ok(Field {
            coefficients,
            time: u_prev.time + dt,
        })
    }

    /// The operator assembled by the most recent step.
    pub fn system_operator(&self) -> &SparseOperator {
        &self.system
    }

    /// Per-step discrete balance bookkeeping for the latest step: returns
    /// (mass change, dt·(source - sinks)) for θ = 1 verification.
    pub fn balance_terms(
        &self,
        mesh: &Mesh,
        u_prev: &Field,
        u_new: &Field,
        dt: f64,
        coeffs: &StepCoeffs,
        load: &[f64],
    ) -> Result<(f64, f64), FemError> {
        let robin = assemble_boundary_mass_switched(
            mesh,
            BoundaryTag::GammaR,
            &u_prev.coefficients,
            self.threshold,
        )?;
        let lhs = self.total_mass(u_new) - self.total_mass(u_prev);
        let source: f64 = load.iter().sum::<f64>() * coeffs.source.1;
        let sink_volume: f64 =
            coeffs.sink.1 * self.mass.matvec(&u_new.coefficients).iter().sum::<f64>();
        let exchanged: f64 = robin.matvec(&u_new.coefficients).iter().sum::<f64>()
            - self.threshold * robin.total_sum();
        let asphalt: f64 =
            coeffs.asphalt * self.asphalt.matvec(&u_new.coefficients).iter().sum::<f64>();
        let rhs = dt * (source - sink_volume - coeffs.robin * exchanged - asphalt);
        Ok((lhs, rhs))
    }
}
