//! Security bounds: closed-form formulas, the semidefinite-programming witnesses
//! for the single-qubit extraction game, their n-fold tensor powers, and a
//! restricted search that attains the optimum.

mod choi;
mod formulas;
mod sdp;
mod search;
mod tensor;

pub use choi::ChoiMatrix;
pub use formulas::{alpha, fixed_output_bound, interactive_bound, noninteractive_bound, pairs};
pub use sdp::{
    breidbart_vectors, certify, dual_witness, embedded_objective, embedded_primal, objective_a_prime, primal_witness,
    v_bc, verify_witness_pair, verify_witnesses, ConstraintCheck, ConstraintKind, SdpCertificate, SdpWitnessPair,
    WITNESS_TOL,
};
pub use search::{attack_channel, numeric_search_n1, AssignmentConvention, SearchResult};
pub use tensor::{tensor_check_blocks, tensor_check_dense, TensorCheck};
