//! Dense exact simplex with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Prob;

/// An optimal basic solution of `max{c·x : Ax ≤ b, x ≥ 0}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub optimum: Prob,
    pub x: Vec<Prob>,
    /// Optimal dual values, one per constraint row.
    pub dual: Vec<Prob>,
}

struct Tableau {
    rows: Vec<Vec<Prob>>,
    rhs: Vec<Prob>,
    cost: Vec<Prob>,
    basis: Vec<usize>,
    reduced: Vec<Prob>,
    value: Prob,
}

impl Tableau {
    fn new(rows: Vec<Vec<Prob>>, rhs: Vec<Prob>, cost: Vec<Prob>, basis: Vec<usize>) -> Self {
        let n = cost.len();
        let mut reduced: Vec<Prob> = cost.iter().map(|c| -c).collect();
        let mut value = Prob::zero();
        for (i, &b) in basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in reduced.iter_mut().enumerate().take(n) {
                if !rows[i][j].is_zero() {
                    *r += cb * &rows[i][j];
                }
            }
            value += cb * &rhs[i];
        }
        Tableau {
            rows,
            rhs,
            cost,
            basis,
            reduced,
            value,
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        if !p.is_one() {
            let inv = Prob::one() / &p;
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for &j in &nz {
                let d = &f * &pivot_row[j];
                self.rows[i][j] -= d;
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        let f = self.reduced[col].clone();
        if !f.is_zero() {
            for &j in &nz {
                let d = &f * &pivot_row[j];
                self.reduced[j] -= d;
            }
            self.value -= &f * &pivot_rhs;
        }
        self.basis[r] = col;
    }

    /// Runs Bland's rule to optimality.
    fn optimize(&mut self) -> Result<()> {
        loop {
            let Some(col) = (0..self.cost.len()).find(|&j| self.reduced[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Prob)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Err(Error::Unbounded),
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }

    fn solution(&self) -> Vec<Prob> {
        let mut x = vec![Prob::zero(); self.cost.len()];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[i].clone();
        }
        x
    }
}

/// Solves `max{c·x : Ax ≤ b, x ≥ 0}` for `b ≥ 0` exactly.
pub fn simplex_solve(a: &[Vec<Prob>], b: &[Prob], c: &[Prob]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::invalid("constraint matrix has inconsistent dimensions"));
    }
    if b.iter().any(|v| v.is_negative()) {
        return Err(Error::invalid("right-hand side must be non-negative"));
    }
    let rows: Vec<Vec<Prob>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|k| if k == i { Prob::one() } else { Prob::zero() }));
            r
        })
        .collect();
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat_n(Prob::zero(), m));
    let mut t = Tableau::new(rows, b.to_vec(), cost, (n..n + m).collect());
    t.optimize()?;
    let x = t.solution()[..n].to_vec();
    let dual = t.reduced[n..].to_vec();
    Ok(LpSolution {
        optimum: t.value.clone(),
        x,
        dual,
    })
}

/// Whether `{x ≥ 0 : Ax = b}` is non-empty, by a phase-one problem with
/// one artificial variable per row. Returns a feasible point when it is.
pub fn equality_feasible(a: &[Vec<Prob>], b: &[Prob]) -> Result<Option<Vec<Prob>>> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let sign = if b[i].is_negative() { -Prob::one() } else { Prob::one() };
        let mut r: Vec<Prob> = row.iter().map(|v| v * &sign).collect();
        r.extend((0..m).map(|k| if k == i { Prob::one() } else { Prob::zero() }));
        rows.push(r);
        rhs.push(&b[i] * &sign);
    }
    let mut cost = vec![Prob::zero(); n];
    cost.extend(std::iter::repeat_n(-Prob::one(), m));
    let mut t = Tableau::new(rows, rhs, cost, (n..n + m).collect());
    t.optimize()?;
    if t.value.is_zero() {
        Ok(Some(t.solution()[..n].to_vec()))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn small_programs() {
        let s = simplex_solve(&[vec![int(1)]], &[int(1)], &[int(1)]).unwrap();
        assert_eq!(s.optimum, int(1));
        let s = simplex_solve(
            &[vec![int(1), int(1)], vec![int(1), int(0)]],
            &[int(1), ratio(1, 2)],
            &[int(1), int(1)],
        )
        .unwrap();
        assert_eq!(s.optimum, int(1));
        let primal: Prob = s.x.iter().sum();
        assert_eq!(primal, int(1));
        let dual_value: Prob = s.dual[0].clone() + &s.dual[1] * ratio(1, 2);
        assert_eq!(dual_value, s.optimum);
    }

    #[test]
    fn unbounded_is_reported() {
        let r = simplex_solve(&[vec![int(1), int(-1)]], &[int(1)], &[int(0), int(1)]);
        assert!(matches!(r, Err(Error::Unbounded)));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the largest-coefficient rule.
        let a = vec![
            vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9)],
            vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3)],
            vec![int(0), int(0), int(1), int(0)],
        ];
        let b = vec![int(0), int(0), int(1)];
        let c = vec![ratio(3, 4), int(-150), ratio(1, 50), int(-6)];
        let s = simplex_solve(&a, &b, &c).unwrap();
        assert_eq!(s.optimum, ratio(1, 20));
    }

    #[test]
    fn equality_feasibility() {
        let a = vec![vec![int(1), int(1)], vec![int(1), int(0)]];
        assert!(equality_feasible(&a, &[int(1), ratio(1, 2)]).unwrap().is_some());
        assert!(equality_feasible(&a, &[int(1), int(2)]).unwrap().is_none());
    }
}
