use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Variable<T> {
    pub name: String,
    pub lower: T,
    pub upper: Option<T>,
}

#[derive(Clone, Debug)]
pub struct Row<T> {
    pub name: String,
    pub coeffs: Vec<(usize, T)>,
    pub rel: Relation,
    pub rhs: T,
}

impl<T: Scalar> Row<T> {
    pub fn activity(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for (j, a) in &self.coeffs {
            s += &a.mul_ref(&x[*j]);
        }
        s
    }

    pub fn holds(&self, x: &[T]) -> bool {
        let lhs = self.activity(x);
        match self.rel {
            Relation::Le => lhs.cmp_tol(&self.rhs).is_le(),
            Relation::Ge => lhs.cmp_tol(&self.rhs).is_ge(),
            Relation::Eq => lhs.cmp_tol(&self.rhs).is_eq(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("variable {var} appears twice in row {row}")]
    DuplicateVariable { row: String, var: usize },
}

/// A minimization LP with bounded variables and sparse rows.
#[derive(Clone, Debug, Default)]
pub struct LpModel<T> {
    pub vars: Vec<Variable<T>>,
    pub rows: Vec<Row<T>>,
    pub objective: Vec<(usize, T)>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub value: T,
    pub x: Vec<T>,
}

impl<T: Scalar> LpModel<T> {
    pub fn new() -> Self {
        LpModel { vars: Vec::new(), rows: Vec::new(), objective: Vec::new(), warnings: Vec::new() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: T, upper: Option<T>) -> usize {
        self.vars.push(Variable { name: name.into(), lower, upper });
        self.vars.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, T)>, rel: Relation, rhs: T) -> usize {
        self.rows.push(Row { name: name.into(), coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, T)>) {
        self.objective = coeffs;
    }

    pub fn validate(&self) -> Result<(), LpError> {
        for row in &self.rows {
            let mut seen = std::collections::BTreeSet::new();
            for (j, _) in &row.coeffs {
                if !seen.insert(*j) {
                    return Err(LpError::DuplicateVariable { row: row.name.clone(), var: *j });
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for (j, c) in &self.objective {
            s += &c.mul_ref(&x[*j]);
        }
        s
    }

    /// Bounds and every row hold at `x`.
    pub fn is_feasible_point(&self, x: &[T]) -> bool {
        self.vars.iter().zip(x).all(|(v, xi)| {
            xi.cmp_tol(&v.lower).is_ge() && v.upper.as_ref().is_none_or(|u| xi.cmp_tol(u).is_le())
        }) && self.rows.iter().all(|r| r.holds(x))
    }

    /// CPLEX LP text format with fractions kept exact.
    pub fn to_lp_format(&self) -> String {
        let term = |c: &T, name: &str, first: bool| {
            let neg = c.is_neg();
            let mag = if neg { -c.clone() } else { c.clone() };
            let sign = match (first, neg) {
                (true, true) => "- ",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            if mag == T::one() {
                format!("{sign}{name}")
            } else {
                format!("{sign}{mag} {name}")
            }
        };
        let expr = |coeffs: &[(usize, T)]| {
            if coeffs.is_empty() {
                return "0".to_string();
            }
            coeffs
                .iter()
                .enumerate()
                .map(|(i, (j, c))| term(c, &self.vars[*j].name, i == 0))
                .collect::<String>()
        };
        let mut out = String::new();
        for w in &self.warnings {
            let _ = writeln!(out, "\\ warning: {w}");
        }
        let _ = writeln!(out, "Minimize\n obj: {}", expr(&self.objective));
        let _ = writeln!(out, "Subject To");
        for r in &self.rows {
            let rel = match r.rel {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {}: {} {} {}", r.name, expr(&r.coeffs), rel, r.rhs);
        }
        let _ = writeln!(out, "Bounds");
        for v in &self.vars {
            match &v.upper {
                Some(u) => {
                    let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, u);
                }
                None => {
                    let _ = writeln!(out, " {} >= {}", v.name, v.lower);
                }
            }
        }
        out.push_str("End\n");
        out
    }
}
