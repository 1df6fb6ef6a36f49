//! Hecke systems, Petersson sums on both sides of the trace formula, the
//! newform sieve and the relation inversion engine behind it.

mod bessel;
mod delta;
mod dimension;
mod hecke;
mod relation;

pub use bessel::{bessel_j, bessel_j_bound};
pub use delta::{
    c_kappa, crude_bound_ratio, default_c_max, delta_geometric, delta_geometric_grid, delta_spectral, derive_one_dimensional,
    petersson_tail_bound, DeltaEstimate, DeltaMode, DerivedSpace, MAX_C,
};
pub use dimension::{cusp_form_dimension, newform_dimension};
pub use hecke::{
    f_phi_coefficients, lambda_f_phi, rho_f, rho_inv_tail_bound, rho_inv_truncated, sign_orthogonality, t_mn_identity_check, HeckeSystem,
    Provenance, SignCharacter, TmnReport,
};
pub use relation::{
    apply_relation, delta_star_truncated, delta_tilde, ell_tail_scale, evaluate_expansion, forward_expansion, inverse_expansion,
    invert_relation, tilde_expansion, ExpansionTerm, LocalTerm, OldformRelation, RelationSpec,
};
