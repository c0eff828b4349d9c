//! Dense two-phase tableau simplex with Bland's rule.

use super::model::{LpError, LpModel, LpSolution, Relation};
use crate::scalar::Scalar;

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    width: usize, // number of columns, rhs lives at index `width`
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &nz {
            self.rows[r][j] /= &piv;
        }
        let prow = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<T>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                let t = prow[j].mul_ref(&f);
                row[j] -= &t;
            }
            row[c] = T::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Run Bland iterations over columns `< limit`.
    fn optimize(&mut self, limit: usize) -> Result<(), LpError> {
        loop {
            let Some(c) = (0..limit).find(|&j| self.obj[j].is_neg()) else {
                return Ok(());
            };
            let mut pick: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let ratio = row[self.width].clone() / row[c].clone();
                let better = match &pick {
                    None => true,
                    Some((bi, br)) => match ratio.cmp_tol(br) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Equal => self.basis[i] < self.basis[*bi],
                        std::cmp::Ordering::Greater => false,
                    },
                };
                if better {
                    pick = Some((i, ratio));
                }
            }
            match pick {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(LpError::Unbounded),
            }
        }
    }

    fn load_objective(&mut self, cost: &[T]) {
        self.obj = vec![T::zero(); self.width + 1];
        self.obj[..cost.len()].clone_from_slice(cost);
        for i in 0..self.rows.len() {
            let cb = self.obj[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.width {
                if !self.rows[i][j].is_zero() {
                    let t = self.rows[i][j].mul_ref(&cb);
                    self.obj[j] -= &t;
                }
            }
        }
    }
}

/// Exact optimum of a minimization model. The returned point is the basic
/// solution the simplex stopped at.
pub fn solve_lp<T: Scalar>(model: &LpModel<T>) -> Result<LpSolution<T>, LpError> {
    model.validate()?;
    let n = model.vars.len();

    // shift to x' = x - lower ≥ 0; upper bounds become rows
    let mut rows: Vec<(Vec<(usize, T)>, Relation, T)> = Vec::new();
    for row in &model.rows {
        let mut rhs = row.rhs.clone();
        for (j, a) in &row.coeffs {
            rhs -= &a.mul_ref(&model.vars[*j].lower);
        }
        rows.push((row.coeffs.clone(), row.rel, rhs));
    }
    for (j, v) in model.vars.iter().enumerate() {
        if let Some(u) = &v.upper {
            let mut cap = u.clone();
            cap -= &v.lower;
            rows.push((vec![(j, T::one())], Relation::Le, cap));
        }
    }
    for (coeffs, rel, rhs) in rows.iter_mut() {
        if rhs.is_neg() {
            for (_, a) in coeffs.iter_mut() {
                *a = -a.clone();
            }
            *rhs = -rhs.clone();
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let arts = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let art_start = n + slacks;
    let width = art_start + arts;
    let mut t = Tableau { rows: Vec::with_capacity(m), obj: Vec::new(), basis: Vec::with_capacity(m), width };
    let (mut s, mut a) = (n, art_start);
    for (coeffs, rel, rhs) in rows {
        let mut row = vec![T::zero(); width + 1];
        for (j, c) in coeffs {
            row[j] += &c;
        }
        row[width] = rhs;
        match rel {
            Relation::Le => {
                row[s] = T::one();
                t.basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -T::one();
                row[a] = T::one();
                t.basis.push(a);
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                row[a] = T::one();
                t.basis.push(a);
                a += 1;
            }
        }
        t.rows.push(row);
    }

    if arts > 0 {
        let mut phase1 = vec![T::zero(); width];
        for c in phase1.iter_mut().skip(art_start) {
            *c = T::one();
        }
        t.load_objective(&phase1);
        t.optimize(width)?;
        if (-t.obj[width].clone()).is_pos() {
            return Err(LpError::Infeasible);
        }
        // drive artificials out of the basis; drop rows that are redundant
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| !t.rows[i][j].is_nil()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![T::zero(); art_start];
    for (j, c) in &model.objective {
        cost[*j] += c;
    }
    t.load_objective(&cost);
    t.optimize(art_start)?;

    let mut x: Vec<T> = model.vars.iter().map(|v| v.lower.clone()).collect();
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] += &t.rows[i][width];
        }
    }
    let value = model.objective_value(&x);
    Ok(LpSolution { value, x })
}
