/// Size guards for the exponential parts of the toolkit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest tree the branch-and-bound cover solver accepts.
    pub exact_max_vertices: usize,
    /// Largest tree for which the harness computes OPT.
    pub oracle_max_vertices: usize,
    /// Largest tree for exhaustive CG separation.
    pub cg_max_vertices: usize,
    /// Largest cross-set size enumerated per principal subtree.
    pub lambda_max_k: usize,
    /// Leaf bound of the few-leaf solver.
    pub few_leaf_max_leaves: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            exact_max_vertices: 24,
            oracle_max_vertices: 14,
            cg_max_vertices: 22,
            lambda_max_k: 3,
            few_leaf_max_leaves: 6,
        }
    }
}
