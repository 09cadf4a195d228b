//! Dual simplex over exact rationals.
//!
//! The tableau starts from the all-slack basis, which is dual feasible by
//! construction (every reduced cost is 0 or 1), and pivots until the basic
//! values are nonnegative. Row choice is the most negative basic value with
//! lowest-index tie-breaking; the column is the minimum ratio of reduced
//! cost to pivot magnitude, again breaking ties by lowest index. If a basis
//! ever repeats, the solver switches to Bland's rule, which cannot cycle.
//!
//! The same pivot kernel drives two follow-up searches on the optimal face:
//! the corner walk used for enumeration and an auxiliary primal simplex that
//! maximizes single coordinates (used to decide uniqueness cheaply). Both
//! only ever enter columns with zero reduced cost, so optimality of the
//! basis is preserved by construction.

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lp::{ColumnLabel, LpLayout, StandardLp};
use crate::rational::Rat;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    /// The dual became unbounded. The feasible set of every valid instance
    /// is nonempty, so this signals a construction bug, not a property of
    /// the input.
    #[error("dual unbounded: the LP was assembled inconsistently")]
    InternalUnbounded,
    /// The anti-cycling safeguard ran out of pivots.
    #[error("anti-cycling safeguard exhausted after {0} pivots")]
    CycleDetected(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("tableau is not at an optimal basis")]
pub struct NotOptimal;

/// One optimal assignment read off a solved tableau.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimalSolution {
    /// Node coordinates; entry 0 is the gauge node and always zero.
    pub x: Vec<Rat>,
    /// Edge costs (absolute residuals).
    pub z: Vec<Rat>,
    pub s_plus: Vec<Rat>,
    pub s_minus: Vec<Rat>,
    pub cost: Rat,
}

/// Dual variables recovered from the reduced-cost row of the slack columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub p_plus: Vec<Rat>,
    pub p_minus: Vec<Rat>,
    /// The dual objective, computed from the certificate itself.
    pub value: Rat,
}

/// Dual simplex working state with exact rational entries.
#[derive(Debug, Clone)]
pub struct Tableau {
    layout: LpLayout,
    rows: Vec<Vec<Rat>>,
    values: Vec<Rat>,
    reduced: Vec<Rat>,
    objective: Rat,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
}

impl Tableau {
    /// Initial tableau with all slack variables basic. Basic values are the
    /// right-hand side and the reduced-cost row is the cost vector.
    pub fn initial(lp: &StandardLp) -> Tableau {
        let layout = lp.layout;
        let mut basis = Vec::with_capacity(layout.num_rows());
        let mut in_basis = vec![false; layout.num_cols()];
        for e in 0..layout.num_edges {
            basis.push(layout.s_plus_col(e));
        }
        for e in 0..layout.num_edges {
            basis.push(layout.s_minus_col(e));
        }
        for &col in &basis {
            in_basis[col] = true;
        }
        Tableau {
            layout,
            rows: lp.matrix.clone(),
            values: lp.rhs.clone(),
            reduced: lp.cost.clone(),
            objective: Rat::zero(),
            basis,
            in_basis,
        }
    }

    pub fn layout(&self) -> &LpLayout {
        &self.layout
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &Rat {
        &self.objective
    }

    pub fn basic_values(&self) -> &[Rat] {
        &self.values
    }

    pub fn reduced_costs(&self) -> &[Rat] {
        &self.reduced
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rat {
        &self.rows[row][col]
    }

    /// Sorted basis column set, the identity of a basis.
    pub fn basis_key(&self) -> Vec<usize> {
        let mut key = self.basis.clone();
        key.sort_unstable();
        key
    }

    pub fn is_primal_feasible(&self) -> bool {
        self.values.iter().all(|v| !v.is_negative())
    }

    pub fn is_dual_feasible(&self) -> bool {
        self.reduced.iter().all(|c| !c.is_negative())
    }

    /// Current value of a variable: its basic value if basic, else zero.
    pub fn value_of(&self, col: usize) -> Rat {
        if self.in_basis[col] {
            let row = self.basis.iter().position(|&b| b == col).expect("basis row");
            self.values[row].clone()
        } else {
            Rat::zero()
        }
    }

    /// Replaces the basic variable of `pivot_row` with `pivot_col` and
    /// re-normalizes the tableau. The pivot entry must be nonzero.
    pub(crate) fn pivot(&mut self, pivot_row: usize, pivot_col: usize) {
        let pivot = self.rows[pivot_row][pivot_col].clone();
        debug_assert!(!pivot.is_zero(), "pivot on a zero entry");

        if !pivot.is_one() {
            for entry in &mut self.rows[pivot_row] {
                if !entry.is_zero() {
                    *entry /= &pivot;
                }
            }
            self.values[pivot_row] /= &pivot;
        }

        for row in 0..self.rows.len() {
            if row == pivot_row {
                continue;
            }
            let factor = self.rows[row][pivot_col].clone();
            if factor.is_zero() {
                continue;
            }
            let (target, source) = borrow_two(&mut self.rows, row, pivot_row);
            for (t, s) in target.iter_mut().zip(source.iter()) {
                if !s.is_zero() {
                    *t -= &factor * s;
                }
            }
            let delta = &factor * &self.values[pivot_row];
            self.values[row] -= delta;
        }

        let factor = self.reduced[pivot_col].clone();
        if !factor.is_zero() {
            for (c, s) in self.reduced.iter_mut().zip(self.rows[pivot_row].iter()) {
                if !s.is_zero() {
                    *c -= &factor * s;
                }
            }
            self.objective += &factor * &self.values[pivot_row];
        }

        let leaving = self.basis[pivot_row];
        self.in_basis[leaving] = false;
        self.in_basis[pivot_col] = true;
        self.basis[pivot_row] = pivot_col;
    }

    /// Runs the dual simplex to primal feasibility.
    pub fn solve_dual_simplex(&mut self) -> Result<(), SolveError> {
        self.solve_dual_simplex_traced(&mut |_, _, _| {})
    }

    /// Same as [`solve_dual_simplex`](Self::solve_dual_simplex) but reports
    /// `(row, entering label, objective)` after every pivot. Rows are
    /// 1-based in the report.
    pub fn solve_dual_simplex_traced(
        &mut self,
        on_pivot: &mut dyn FnMut(usize, ColumnLabel, &Rat),
    ) -> Result<(), SolveError> {
        debug_assert!(self.is_dual_feasible());
        let mut seen_bases: HashSet<Vec<usize>> = HashSet::new();
        seen_bases.insert(self.basis_key());
        let mut bland = false;
        let pivot_cap = 1000 + 200 * (self.rows.len() + self.layout.num_cols());

        for _ in 0..pivot_cap {
            let Some(pivot_row) = self.choose_dual_pivot_row(bland) else {
                return Ok(());
            };
            let pivot_col = self
                .choose_dual_pivot_col(pivot_row)
                .ok_or(SolveError::InternalUnbounded)?;
            self.pivot(pivot_row, pivot_col);
            on_pivot(pivot_row + 1, self.layout.label(pivot_col), &self.objective);
            if !bland && !seen_bases.insert(self.basis_key()) {
                bland = true;
            }
        }
        Err(SolveError::CycleDetected(pivot_cap))
    }

    /// Row with a negative basic value. Default rule: most negative value,
    /// ties to the lowest row. Bland rule: the row whose basic variable has
    /// the lowest column index.
    fn choose_dual_pivot_row(&self, bland: bool) -> Option<usize> {
        if bland {
            self.values
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_negative())
                .min_by_key(|&(row, _)| self.basis[row])
                .map(|(row, _)| row)
        } else {
            let mut best: Option<(usize, &Rat)> = None;
            for (row, value) in self.values.iter().enumerate() {
                if value.is_negative() && best.map_or(true, |(_, b)| value < b) {
                    best = Some((row, value));
                }
            }
            best.map(|(row, _)| row)
        }
    }

    /// Minimum-ratio column over negative entries of the pivot row; ties go
    /// to the lowest column index. `None` means the dual is unbounded.
    fn choose_dual_pivot_col(&self, pivot_row: usize) -> Option<usize> {
        let row = &self.rows[pivot_row];
        let mut best: Option<(usize, Rat)> = None;
        for (col, entry) in row.iter().enumerate() {
            if !entry.is_negative() {
                continue;
            }
            let ratio = &self.reduced[col] / entry.abs();
            match &best {
                Some((_, incumbent)) if *incumbent <= ratio => {}
                _ => best = Some((col, ratio)),
            }
        }
        best.map(|(col, _)| col)
    }

    /// Columns eligible for moves along the optimal face: nonbasic with zero
    /// reduced cost.
    pub(crate) fn zero_cost_nonbasic_cols(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.layout.num_cols())
            .filter(move |&c| !self.in_basis[c] && self.reduced[c].is_zero())
    }

    /// Rows attaining the minimum ratio `value / entry` over positive
    /// entries of `col`. Pivoting any of them keeps the basis feasible.
    /// Empty when the column has no positive entry (an unbounded edge of
    /// the face).
    pub(crate) fn min_ratio_rows(&self, col: usize) -> Vec<usize> {
        let mut best: Option<Rat> = None;
        let mut rows = Vec::new();
        for (row, entry) in self.rows.iter().map(|r| &r[col]).enumerate() {
            if !entry.is_positive() {
                continue;
            }
            let ratio = &self.values[row] / entry;
            match &best {
                Some(incumbent) if ratio > *incumbent => {}
                Some(incumbent) if ratio == *incumbent => rows.push(row),
                _ => {
                    best = Some(ratio);
                    rows.clear();
                    rows.push(row);
                }
            }
        }
        rows
    }

    /// Minimizes `weights . q` over the optimal face of the solved LP by a
    /// Bland-rule primal simplex that only enters zero-reduced-cost columns.
    /// Returns the minimum. The face of every valid instance is bounded in
    /// each coordinate direction, so an unbounded ray is a construction bug.
    pub fn minimize_on_optimal_face(&mut self, weights: &[Rat]) -> Result<Rat, SolveError> {
        debug_assert!(self.is_primal_feasible() && self.is_dual_feasible());
        assert_eq!(weights.len(), self.layout.num_cols());

        let mut aux_reduced: Vec<Rat> = (0..self.layout.num_cols())
            .map(|col| {
                let mut value = weights[col].clone();
                for (row, coeff) in self.rows.iter().map(|r| &r[col]).enumerate() {
                    let w = &weights[self.basis[row]];
                    if !w.is_zero() && !coeff.is_zero() {
                        value -= w * coeff;
                    }
                }
                value
            })
            .collect();
        let mut aux_objective: Rat = self
            .basis
            .iter()
            .zip(&self.values)
            .map(|(&col, value)| &weights[col] * value)
            .sum();

        let pivot_cap = 1000 + 200 * (self.rows.len() + self.layout.num_cols());
        for _ in 0..pivot_cap {
            let entering = (0..self.layout.num_cols()).find(|&c| {
                !self.in_basis[c] && self.reduced[c].is_zero() && aux_reduced[c].is_negative()
            });
            let Some(col) = entering else {
                return Ok(aux_objective);
            };
            let rows = self.min_ratio_rows(col);
            let &row = rows
                .iter()
                .min_by_key(|&&r| self.basis[r])
                .ok_or(SolveError::InternalUnbounded)?;

            let factor = aux_reduced[col].clone();
            self.pivot(row, col);
            for (c, s) in aux_reduced.iter_mut().zip(self.rows[row].iter()) {
                if !s.is_zero() {
                    *c -= &factor * s;
                }
            }
            aux_objective += &factor * &self.values[row];
        }
        Err(SolveError::CycleDetected(pivot_cap))
    }

    /// Reads the primal solution off the tableau.
    pub fn primal_solution(&self) -> PrimalSolution {
        let n = self.layout.num_nodes;
        let m = self.layout.num_edges;
        let mut x = vec![Rat::zero(); n];
        for node in 2..=n {
            let plus = self.layout.x_plus_col(node).expect("non-gauge node");
            let minus = self.layout.x_minus_col(node).expect("non-gauge node");
            x[node - 1] = self.value_of(plus) - self.value_of(minus);
        }
        let z: Vec<Rat> = (0..m).map(|e| self.value_of(self.layout.z_col(e))).collect();
        let s_plus = (0..m)
            .map(|e| self.value_of(self.layout.s_plus_col(e)))
            .collect();
        let s_minus = (0..m)
            .map(|e| self.value_of(self.layout.s_minus_col(e)))
            .collect();
        PrimalSolution {
            x,
            z,
            s_plus,
            s_minus,
            cost: self.objective.clone(),
        }
    }

    /// Recovers the dual certificate from the reduced costs of the slack
    /// columns. The dual value is recomputed from the certificate and the
    /// outlier vector, independently of the primal objective.
    pub fn dual_certificate(&self, epsilon: &[Rat]) -> Result<DualCertificate, NotOptimal> {
        if !self.is_primal_feasible() || !self.is_dual_feasible() {
            return Err(NotOptimal);
        }
        assert_eq!(epsilon.len(), self.layout.num_edges);
        let m = self.layout.num_edges;
        let p_plus: Vec<Rat> = (0..m)
            .map(|e| -self.reduced[self.layout.s_plus_col(e)].clone())
            .collect();
        let p_minus: Vec<Rat> = (0..m)
            .map(|e| -self.reduced[self.layout.s_minus_col(e)].clone())
            .collect();
        let value = epsilon
            .iter()
            .enumerate()
            .map(|(e, eps)| eps * (&p_plus[e] - &p_minus[e]))
            .sum();
        Ok(DualCertificate {
            p_plus,
            p_minus,
            value,
        })
    }
}

/// Mutable borrow of two distinct rows at once.
fn borrow_two<T>(rows: &mut [T], target: usize, source: usize) -> (&mut T, &T) {
    debug_assert_ne!(target, source);
    if target < source {
        let (head, tail) = rows.split_at_mut(source);
        (&mut head[target], &tail[0])
    } else {
        let (head, tail) = rows.split_at_mut(target);
        (&mut tail[0], &head[source])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MeasurementGraph;
    use crate::instance::ProblemInstance;
    use crate::lp::build_lp;
    use crate::rational::{int, rat};

    fn solve(inst: &ProblemInstance) -> Tableau {
        let lp = build_lp(inst);
        let mut t = Tableau::initial(&lp);
        t.solve_dual_simplex().unwrap();
        t
    }

    fn triangle_instance(eps: [i64; 3]) -> ProblemInstance {
        let g = MeasurementGraph::new(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        ProblemInstance::new(g, eps.iter().map(|&v| vec![int(v)]).collect()).unwrap()
    }

    #[test]
    fn initial_tableau_uses_slack_basis() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let inst = ProblemInstance::new(g, vec![vec![int(1)]]).unwrap();
        let lp = build_lp(&inst);
        let t = Tableau::initial(&lp);
        assert_eq!(t.basis(), &[lp.layout.s_plus_col(0), lp.layout.s_minus_col(0)]);
        assert_eq!(t.basic_values(), &[int(1), int(-1)]);
        assert_eq!(t.reduced_costs(), lp.cost.as_slice());
        assert!(t.is_dual_feasible());
    }

    #[test]
    fn clean_instance_is_immediately_optimal() {
        let g = MeasurementGraph::complete(4);
        let inst = ProblemInstance::clean(g, 1);
        let lp = build_lp(&inst);
        let mut t = Tableau::initial(&lp);
        assert!(t.is_primal_feasible());
        t.solve_dual_simplex().unwrap();
        assert!(t.objective().is_zero());
        let sol = t.primal_solution();
        assert!(sol.x.iter().all(Rat::is_zero));
    }

    #[test]
    fn single_edge_outlier_fits_exactly() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let inst = ProblemInstance::new(g, vec![vec![int(1)]]).unwrap();
        let t = solve(&inst);
        assert!(t.objective().is_zero());
        let sol = t.primal_solution();
        assert_eq!(sol.x, vec![int(0), int(1)]);
        assert_eq!(sol.z, vec![int(0)]);
    }

    #[test]
    fn triangle_with_one_outlier_costs_one() {
        let inst = triangle_instance([0, 0, 1]);
        let t = solve(&inst);
        assert_eq!(*t.objective(), int(1));
        // The origin attains the same cost, so it is among the optima.
        assert_eq!(inst.origin_cost(), int(1));
    }

    #[test]
    fn primal_solution_satisfies_residual_identities() {
        let g = MeasurementGraph::new(4, [(1, 2), (2, 3), (3, 4), (1, 4), (2, 4)]).unwrap();
        let eps = [int(2), int(0), rat(-3, 2), int(0), rat(1, 3)];
        let inst = ProblemInstance::new(g, eps.iter().map(|v| vec![v.clone()]).collect()).unwrap();
        let t = solve(&inst);
        let sol = t.primal_solution();
        for (e, edge) in inst.graph().edges().iter().enumerate() {
            let residual = &sol.x[edge.j - 1] - &sol.x[edge.i - 1] - inst.epsilon_1d(e);
            assert_eq!(sol.z[e], residual.abs());
            assert_eq!(&sol.s_plus[e] + &sol.s_minus[e], int(2) * &sol.z[e]);
        }
        let total: Rat = sol.z.iter().sum();
        assert_eq!(total, sol.cost);
    }

    #[test]
    fn dual_certificate_matches_primal_cost() {
        let inst = triangle_instance([0, 0, 1]);
        let t = solve(&inst);
        let eps: Vec<Rat> = (0..3).map(|e| inst.epsilon_1d(e).clone()).collect();
        let cert = t.dual_certificate(&eps).unwrap();
        assert_eq!(cert.value, *t.objective());
        for e in 0..3 {
            assert!(!cert.p_plus[e].is_positive() && cert.p_plus[e] >= int(-1));
            assert!(!cert.p_minus[e].is_positive() && cert.p_minus[e] >= int(-1));
            assert!(-&cert.p_plus[e] - &cert.p_minus[e] <= int(1));
        }
        // The support edge carries a discrete dual pair.
        assert_eq!(
            (cert.p_plus[2].clone(), cert.p_minus[2].clone()),
            (int(0), int(-1))
        );
    }

    #[test]
    fn dual_certificate_requires_optimality() {
        let g = MeasurementGraph::new(2, [(1, 2)]).unwrap();
        let inst = ProblemInstance::new(g, vec![vec![int(1)]]).unwrap();
        let lp = build_lp(&inst);
        let t = Tableau::initial(&lp);
        assert_eq!(t.dual_certificate(&[int(1)]), Err(NotOptimal));
    }

    #[test]
    fn trace_reports_pivots() {
        let inst = triangle_instance([0, 0, 1]);
        let lp = build_lp(&inst);
        let mut t = Tableau::initial(&lp);
        let mut lines = Vec::new();
        t.solve_dual_simplex_traced(&mut |row, label, obj| {
            lines.push(format!(
                "pivot row={row} col={label} obj={}",
                crate::rational::format_rat(obj)
            ));
        })
        .unwrap();
        assert!(!lines.is_empty());
        assert!(lines[0].starts_with("pivot row="));
    }

    #[test]
    fn face_minimization_finds_coordinate_extremes() {
        // Verifiable triangle: x_3 ranges over [0, 1] on the optimal face.
        let inst = triangle_instance([0, 0, 1]);
        let t = solve(&inst);
        let layout = *t.layout();
        let mut weights = vec![Rat::zero(); layout.num_cols()];
        weights[layout.x_plus_col(3).unwrap()] = int(1);
        weights[layout.x_minus_col(3).unwrap()] = int(-1);
        let min_x3 = t.clone().minimize_on_optimal_face(&weights).unwrap();
        assert_eq!(min_x3, int(0));
        let neg: Vec<Rat> = weights.iter().map(|w| -w.clone()).collect();
        let max_x3 = -t.clone().minimize_on_optimal_face(&neg).unwrap();
        assert_eq!(max_x3, int(1));
    }
}
