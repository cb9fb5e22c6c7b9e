//! Objective suite: quadratics, the smooth ℓ1 reformulation, multinomial
//! regression and nonnegative matrix factorization.

pub mod data;
mod l1;
mod multinomial;
mod nnmf;
mod quadratic;
mod tscad;

pub use data::{
    half_normal_init, load_labeled_csv, load_matrix_csv, random_nnls, synthetic_classification,
    synthetic_nnmf, NNLS_NOISE,
};
pub use l1::{l1_reformulate, L1Reformulation};
pub use multinomial::{make_multinomial, MultinomialProblem};
pub use nnmf::{make_nnmf, Distance, NnmfProblem, COSINE_ROW_FLOOR};
pub use quadratic::{make_quadratic, QuadraticProblem};
pub use tscad::{tscad, Tscad};
