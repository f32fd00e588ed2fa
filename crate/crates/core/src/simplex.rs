//! Exact two-phase primal simplex over rational arithmetic.
//!
//! Variables are non-negative; constraints may be `<=`, `=` or `>=`.
//! Phase one drives artificial variables out of the basis, phase two
//! optimizes the real objective. Pivoting is exact (no tolerances), rows
//! are kept sparse, and Bland's anti-cycling rule kicks in after a run of
//! degenerate pivots, which guarantees termination; otherwise the entering
//! column is chosen by the most negative reduced cost.

use crate::lp::{LinearProgram, Relation};
use crate::rational::Rat;
use crate::scalar::Scalar;

/// Outcome status of a simplex run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of solving a linear program exactly.
#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub status: SimplexStatus,
    /// Optimal objective value; zero unless `status == Optimal`.
    pub value: Rat,
    /// One value per LP variable; empty unless `status == Optimal`.
    pub assignment: Vec<Rat>,
    pub pivots: u64,
}

/// Number of consecutive degenerate pivots after which the entering rule
/// switches to Bland's.
const DEGENERACY_PATIENCE: u32 = 32;

type SparseRow = Vec<(u32, Scalar)>;

fn row_get(row: &SparseRow, col: u32) -> Option<&Scalar> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| &row[i].1)
}

/// `target - factor * source`, keeping the row sorted and free of zeros.
fn row_axpy(target: &SparseRow, factor: &Scalar, source: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        if j >= source.len() || (i < target.len() && target[i].0 < source[j].0) {
            out.push(target[i].clone());
            i += 1;
        } else if i >= target.len() || source[j].0 < target[i].0 {
            let v = factor.mul(&source[j].1).neg();
            if !v.is_zero() {
                out.push((source[j].0, v));
            }
            j += 1;
        } else {
            let v = target[i].1.sub(&factor.mul(&source[j].1));
            if !v.is_zero() {
                out.push((target[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

struct Tableau {
    rows: Vec<SparseRow>,
    rhs: Vec<Scalar>,
    basis: Vec<u32>,
    /// Reduced costs, dense over all columns.
    reduced: Vec<Scalar>,
    value: Scalar,
    banned: Vec<bool>,
    pivots: u64,
    degenerate_streak: u32,
}

enum Step {
    Optimal,
    Unbounded,
    Pivoted,
}

impl Tableau {
    fn num_cols(&self) -> usize {
        self.banned.len()
    }

    fn enter_column(&self) -> Option<u32> {
        if self.degenerate_streak >= DEGENERACY_PATIENCE {
            // Bland: smallest index with negative reduced cost.
            (0..self.num_cols())
                .find(|&j| !self.banned[j] && self.reduced[j].is_negative())
                .map(|j| j as u32)
        } else {
            // Dantzig: most negative reduced cost, smallest index on ties.
            let mut best: Option<usize> = None;
            for j in 0..self.num_cols() {
                if self.banned[j] || !self.reduced[j].is_negative() {
                    continue;
                }
                match best {
                    Some(b) if self.reduced[j] >= self.reduced[b] => {}
                    _ => best = Some(j),
                }
            }
            best.map(|j| j as u32)
        }
    }

    fn leave_row(&self, col: u32) -> Option<usize> {
        let mut best: Option<(usize, Scalar)> = None;
        for r in 0..self.rows.len() {
            let Some(a) = row_get(&self.rows[r], col) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs[r].div(a);
            let better = match &best {
                None => true,
                Some((br, bratio)) => {
                    ratio < *bratio || (ratio == *bratio && self.basis[r] < self.basis[*br])
                }
            };
            if better {
                best = Some((r, ratio));
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, row: usize, col: u32) {
        // Normalize the pivot row.
        let piv = row_get(&self.rows[row], col).expect("pivot entry").clone();
        if !piv.is_one() {
            for e in self.rows[row].iter_mut() {
                e.1 = e.1.div(&piv);
            }
            self.rhs[row] = self.rhs[row].div(&piv);
        }
        let prow = std::mem::take(&mut self.rows[row]);
        let prhs = self.rhs[row].clone();
        // Eliminate the column from every other row.
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let Some(a) = row_get(&self.rows[r], col).cloned() else { continue };
            self.rows[r] = row_axpy(&self.rows[r], &a, &prow);
            self.rhs[r] = self.rhs[r].sub(&a.mul(&prhs));
        }
        // And from the reduced-cost row, accounting the objective change.
        let cbar = self.reduced[col as usize].clone();
        if !cbar.is_zero() {
            self.value = self.value.add(&cbar.mul(&prhs));
            for (c, v) in &prow {
                let cell = &self.reduced[*c as usize];
                self.reduced[*c as usize] = cell.sub(&cbar.mul(v));
            }
        }
        self.rows[row] = prow;
        if prhs.is_zero() {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    fn step(&mut self) -> Step {
        let Some(col) = self.enter_column() else { return Step::Optimal };
        let Some(row) = self.leave_row(col) else { return Step::Unbounded };
        self.pivot(row, col);
        Step::Pivoted
    }

    fn run(&mut self) -> SimplexStatus {
        loop {
            match self.step() {
                Step::Optimal => return SimplexStatus::Optimal,
                Step::Unbounded => return SimplexStatus::Unbounded,
                Step::Pivoted => {}
            }
        }
    }
}

/// Solves the program exactly. Deterministic for identical inputs.
pub fn solve_simplex(lp: &LinearProgram) -> SimplexResult {
    let n = lp.num_vars();
    let num_rows = lp.constraints().len();

    // Standard form: flip rows to non-negative rhs, then append one slack
    // or surplus column per inequality and artificials for rows without a
    // natural basic column.
    let mut rows: Vec<SparseRow> = Vec::with_capacity(num_rows);
    let mut rhs: Vec<Scalar> = Vec::with_capacity(num_rows);
    let mut kinds: Vec<Relation> = Vec::with_capacity(num_rows);
    for c in lp.constraints() {
        let mut coeffs: SparseRow = c
            .coeffs
            .iter()
            .map(|(i, v)| (*i as u32, Scalar::from_rat(v)))
            .collect();
        coeffs.sort_by_key(|e| e.0);
        coeffs.retain(|e| !e.1.is_zero());
        let mut b = Scalar::from_rat(&c.rhs);
        let mut rel = c.relation;
        if b.is_negative() {
            for e in coeffs.iter_mut() {
                e.1 = e.1.neg();
            }
            b = b.neg();
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push(coeffs);
        rhs.push(b);
        kinds.push(rel);
    }

    let num_slack = kinds.iter().filter(|k| !matches!(k, Relation::Eq)).count();
    let num_art = kinds.iter().filter(|k| !matches!(k, Relation::Le)).count();
    let total = n + num_slack + num_art;
    let art_start = (n + num_slack) as u32;

    let mut basis = vec![0u32; num_rows];
    let mut next_slack = n as u32;
    let mut next_art = art_start;
    for (r, kind) in kinds.iter().enumerate() {
        match kind {
            Relation::Le => {
                rows[r].push((next_slack, Scalar::one()));
                basis[r] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                rows[r].push((next_slack, Scalar::one().neg()));
                next_slack += 1;
                rows[r].push((next_art, Scalar::one()));
                basis[r] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                rows[r].push((next_art, Scalar::one()));
                basis[r] = next_art;
                next_art += 1;
            }
        }
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis,
        reduced: vec![Scalar::zero(); total],
        value: Scalar::zero(),
        banned: vec![false; total],
        pivots: 0,
        degenerate_streak: 0,
    };

    // Phase one: minimize the sum of artificials.
    if num_art > 0 {
        for j in art_start as usize..total {
            t.reduced[j] = Scalar::one();
        }
        for r in 0..t.rows.len() {
            if t.basis[r] >= art_start {
                let row = t.rows[r].clone();
                for (c, v) in &row {
                    t.reduced[*c as usize] = t.reduced[*c as usize].sub(v);
                }
                t.value = t.value.add(&t.rhs[r]);
            }
        }
        // The phase-one objective is bounded below by zero, so the run can
        // only end at an optimum.
        let status = t.run();
        debug_assert_eq!(status, SimplexStatus::Optimal);
        if t.value.is_positive() {
            return SimplexResult {
                status: SimplexStatus::Infeasible,
                value: Rat::zero(),
                assignment: Vec::new(),
                pivots: t.pivots,
            };
        }
        // Pivot lingering artificials out of the basis; rows that offer no
        // pivot are redundant and dropped.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                let col = t.rows[r].iter().find(|(c, _)| *c < art_start).map(|(c, _)| *c);
                match col {
                    Some(c) => t.pivot(r, c),
                    None => {
                        t.rows.swap_remove(r);
                        t.rhs.swap_remove(r);
                        t.basis.swap_remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for j in art_start as usize..total {
            t.banned[j] = true;
        }
        for row in t.rows.iter_mut() {
            row.retain(|(c, _)| *c < art_start);
        }
    }

    // Phase two: the real objective.
    t.value = Scalar::zero();
    for j in 0..total {
        t.reduced[j] =
            if j < n { Scalar::from_rat(&lp.objective()[j]) } else { Scalar::zero() };
    }
    for r in 0..t.rows.len() {
        let b = t.basis[r] as usize;
        debug_assert!((b as u32) < art_start);
        let cb = if b < n { Scalar::from_rat(&lp.objective()[b]) } else { Scalar::zero() };
        if !cb.is_zero() {
            let row = t.rows[r].clone();
            for (c, v) in &row {
                t.reduced[*c as usize] = t.reduced[*c as usize].sub(&cb.mul(v));
            }
            t.value = t.value.add(&cb.mul(&t.rhs[r]));
        }
    }
    match t.run() {
        SimplexStatus::Unbounded => SimplexResult {
            status: SimplexStatus::Unbounded,
            value: Rat::zero(),
            assignment: Vec::new(),
            pivots: t.pivots,
        },
        SimplexStatus::Optimal => {
            let mut assignment = vec![Rat::zero(); n];
            for r in 0..t.rows.len() {
                if (t.basis[r] as usize) < n {
                    assignment[t.basis[r] as usize] = t.rhs[r].to_rat();
                }
            }
            SimplexResult {
                status: SimplexStatus::Optimal,
                value: t.value.to_rat(),
                assignment,
                pivots: t.pivots,
            }
        }
        SimplexStatus::Infeasible => unreachable!("phase two never reports infeasible"),
    }
}
