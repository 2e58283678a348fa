//! Exact steady state in the permutation-symmetric Dicke basis.
//!
//! The density matrix is expanded as
//! `ρ = Σ ρ^{n,n′}_{J,M,M′} P_{J,M,M′} ⊗ |n⟩⟨n′|` with
//! `P_{J,M,M′} = D_J⁻¹ Σ_ι |J,M,ι⟩⟨J,M′,ι|`; only coefficients with
//! `M + n = M′ + n′` can be populated.

mod basis;
mod liouvillian;
pub mod oracle;
mod solve;

pub use basis::{
    enumerate_basis, multiplicity, multiplicity_f64, ChargeSector, DickeBasis, DickeIndex,
};
pub use liouvillian::{assemble_liouvillian, LiouvillianMatrix};
pub use oracle::{brute_force_steady_state, FullSpace, FullSteadyState};
pub use solve::{
    converge_cutoff, distributions, monomial_matrix_element, observables, solve_exact,
    steady_state, ConvergedSolution, CutoffPolicy, Distributions, LadderStep, Monomial,
    SteadyStateSolution, DEGENERACY_GAP,
};
