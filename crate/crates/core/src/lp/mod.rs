//! Exact LP machinery: the model, a rational simplex, the cut LP, CG cuts and
//! the k-wide LP.

pub mod cg;
pub mod cut;
pub mod kwide;
pub mod lambda;
pub mod model;
pub mod simplex;

pub use cg::{cg_cut, separate_cg, separate_cg_with, solve_cg_lp, CgCut, CgLpSolution};
pub use cut::{build_cut_lp, build_cut_lp_as};
pub use kwide::{solve_k_wide_lp, solve_k_wide_lp_with, KWideLpSolution};
pub use lambda::{enumerate_lambda_families, enumerate_lambda_families_with, Column, LambdaFamily};
pub use model::{LpError, LpModel, LpSolution, Relation, Row, Variable};
pub use simplex::solve_lp;
