//! The continuous model: states, pressure laws, the symbol and its
//! symmetrizer, and the pressure-free right-hand side shared by every scheme.

mod law;
mod rhs;
mod state;
pub mod symbol;

pub use law::{check_admissible, AdmissibilityReport, PressureFunction, PressureLaw};
pub use rhs::{advective_rhs, apply_symmetrizer, block_project, recover_pressure};
pub(crate) use rhs::{advection_terms, dealiased, eval_law};
pub(crate) use state::check_density;
pub use state::{translate, untranslate, State, Tendency, RHO_FLOOR};
pub use symbol::{
    analyze_symbol, assemble_symbol, eigenvalues_closed_form, numeric_eigenvalues, symmetrizer,
    SymbolAnalysis, SymbolMatrices, Symmetrizer,
};
