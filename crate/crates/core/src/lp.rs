//! Dense two-phase simplex with Bland's rule.
//!
//! Sized for the programs this crate produces: one variable per node and
//! `O(m^2)` order rows. With an exact scalar the result is exact; with a
//! float scalar the scalar tolerance decides signs.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// `maximize objective·x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub value: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs; the last entry is minus the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
    /// Columns that may enter the basis.
    allowed: Vec<bool>,
}

impl<T: Scalar> Tableau<T> {
    fn width(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        self.basis[r] = c;
    }

    /// Loads `cost` as the objective and prices out the current basis.
    fn set_objective(&mut self, cost: &[T]) {
        let w = self.width();
        self.obj = cost.to_vec();
        self.obj.resize(w + 1, T::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            if self.obj[b].is_zero() {
                continue;
            }
            let f = self.obj[b].clone();
            for (v, rv) in self.obj.iter_mut().zip(&self.rows[r]) {
                *v = v.clone() - f.clone() * rv.clone();
            }
        }
    }

    fn run(&mut self) -> Result<(), LpError> {
        loop {
            let w = self.width();
            // Bland: lowest improving column, then lowest basic index on ties.
            let Some(c) = (0..w).find(|&j| self.allowed[j] && self.obj[j].is_pos()) else {
                return Ok(());
            };
            let mut best: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let ratio = row[w].clone() / row[c].clone();
                let better = match &best {
                    None => true,
                    Some((br, bv)) => {
                        ratio < *bv || (!(ratio > *bv) && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let (r, _) = best.ok_or(LpError::Unbounded)?;
            self.pivot(r, c);
        }
    }

    fn objective_value(&self) -> T {
        -self.obj[self.width()].clone()
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn maximize(&self) -> Result<LpSolution<T>, LpError> {
        let n = self.objective.len();
        let m = self.constraints.len();

        // Normalize to non-negative right-hand sides.
        let rows: Vec<(Vec<T>, Relation, T)> = self
            .constraints
            .iter()
            .map(|c| {
                let mut coeffs = c.coeffs.clone();
                coeffs.resize(n, T::zero());
                if c.rhs.is_neg() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (coeffs.into_iter().map(|v| -v).collect(), flipped, -c.rhs.clone())
                } else {
                    (coeffs, c.relation, c.rhs.clone())
                }
            })
            .collect();

        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let width = n + n_slack + n_art;

        let mut tab = Tableau {
            rows: Vec::with_capacity(m),
            obj: vec![T::zero(); width + 1],
            basis: Vec::with_capacity(m),
            allowed: vec![true; width],
        };
        let (mut next_slack, mut next_art) = (n, n + n_slack);
        for (coeffs, rel, rhs) in rows {
            let mut row = coeffs;
            row.resize(width + 1, T::zero());
            row[width] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = T::one();
                    tab.basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -T::one();
                    next_slack += 1;
                    row[next_art] = T::one();
                    tab.basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = T::one();
                    tab.basis.push(next_art);
                    next_art += 1;
                }
            }
            tab.rows.push(row);
        }

        let art_start = n + n_slack;
        if n_art > 0 {
            let mut cost = vec![T::zero(); width];
            for c in cost.iter_mut().skip(art_start) {
                *c = -T::one();
            }
            tab.set_objective(&cost);
            tab.run()?;
            if tab.objective_value().is_neg() {
                return Err(LpError::Infeasible);
            }
            // Drive artificial variables out of the basis; drop redundant rows.
            let mut r = 0;
            while r < tab.rows.len() {
                if tab.basis[r] < art_start {
                    r += 1;
                    continue;
                }
                match (0..art_start).find(|&j| !tab.rows[r][j].is_negligible()) {
                    Some(c) => {
                        tab.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            }
            for a in tab.allowed.iter_mut().skip(art_start) {
                *a = false;
            }
        }

        tab.set_objective(&self.objective);
        tab.run()?;

        let mut x = vec![T::zero(); n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rows[r][width].clone();
            }
        }
        let value = self
            .objective
            .iter()
            .zip(&x)
            .fold(T::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
        Ok(LpSolution { x, value })
    }
}
