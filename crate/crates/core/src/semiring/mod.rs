//! The free commutative-additive semiring over an alphabet, single
//! expansions modulo equations `e = 1`, and certificates that two
//! polynomials have a common expansion.

mod cert;
mod grid;
mod poly;
mod search;
mod witness;

pub use cert::{
    apply_parallel, apply_step, cert_context, compose_certificates, diamond_join, expand_word,
    replay, reverse_certificate, sequentialize, single_expansions, verify_certificate, Applied,
    Certificate, DiamondJoin, ExpansionStep,
};
pub use grid::{
    absorb_certificate, all_letters, column_equation, derive_decrease_certificate, extract_sums,
    grid_equations, grid_indices, grid_symbol, grow_certificate, row_equation, ExtractedSums,
};
pub use poly::{Alphabet, EquationSet, Polynomial, Symbol, Word};
pub use search::{expand_search, DEFAULT_SUMMAND_BUDGET};
pub use witness::{
    assemble_decreased_terms, check_decreased_in_algebra, check_witness_in_algebra, position_words,
    shared_size, summarize, witness_for_steps, witness_transform, DecreasedTerms,
};
