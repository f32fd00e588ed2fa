//! The normal-schedule linear program and its exact solution.
//!
//! A normal schedule runs each job `j` on each machine `q` in one possibly
//! empty interval `[S_{j,q}, C_{j,q})`, uses machines in decreasing index
//! order per job, and starts job `j+1` no earlier than job `j` finishes on
//! every machine. The program minimizes `sum_j C_{j,1}` subject to:
//!
//! ```text
//!   -S_{j,m}                 <= -r_j      j = 1..n
//!   sum_q (C_{j,q} - S_{j,q}) = p         j = 1..n
//!   S_{j,q} - C_{j,q}        <= 0         j = 1..n, q = 1..m
//!   C_{j,q} - S_{j,q-1}      <= 0         j = 1..n, q = 2..m
//!   C_{j,q} - S_{j+1,q}      <= 0         j = 1..n-1, q = 1..m
//! ```
//!
//! Every coefficient is -1, 0 or 1. Feasible points all have non-negative
//! coordinates (each variable is chained above `S_{j,m} >= r_j >= 0`), so
//! the non-negative simplex solves the program as stated.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rat;
use crate::schedule::{ExecInterval, Schedule};
use crate::simplex::{solve_simplex, SimplexResult, SimplexStatus};

/// Constraint relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One constraint row, sparse over variable indices.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rat)>,
    pub relation: Relation,
    pub rhs: Rat,
    pub name: String,
}

/// A linear program over named non-negative variables.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    var_names: Vec<String>,
    objective: Vec<Rat>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn from_parts(
        var_names: Vec<String>,
        objective: Vec<Rat>,
        constraints: Vec<Constraint>,
    ) -> Self {
        assert_eq!(var_names.len(), objective.len());
        for c in &constraints {
            for (col, _) in &c.coeffs {
                assert!(
                    *col < var_names.len(),
                    "constraint `{}` references variable {col}, program has {}",
                    c.name,
                    var_names.len()
                );
            }
        }
        LinearProgram { var_names, objective, constraints }
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn objective(&self) -> &[Rat] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Human-readable dump, one constraint per line. Debugging aid, not a
    /// stable format.
    pub fn dump_text(&self) -> String {
        use std::fmt::Write;
        let term = |coeff: &Rat, var: usize| {
            if *coeff == Rat::one() {
                self.var_names[var].clone()
            } else if *coeff == -Rat::one() {
                format!("-{}", self.var_names[var])
            } else {
                format!("{}*{}", coeff, self.var_names[var])
            }
        };
        let mut out = String::new();
        let obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| term(c, i))
            .collect();
        writeln!(out, "minimize {}", obj.join(" + ")).unwrap();
        writeln!(out, "subject to").unwrap();
        for c in &self.constraints {
            let lhs: Vec<String> = c.coeffs.iter().map(|(i, v)| term(v, *i)).collect();
            writeln!(out, "  {}: {} {} {}", c.name, lhs.join(" + "), c.relation, c.rhs).unwrap();
        }
        out
    }
}

/// Index of `S_{j,q}` (1-based job and machine).
fn s_var(n: usize, m: usize, j: usize, q: usize) -> usize {
    let _ = n;
    (j - 1) * m + (q - 1)
}

/// Index of `C_{j,q}`.
fn c_var(n: usize, m: usize, j: usize, q: usize) -> usize {
    n * m + (j - 1) * m + (q - 1)
}

/// Builds the normal-schedule program for an instance. Feasible points are
/// exactly the normal solutions; the objective is `sum_j C_{j,1}`.
pub fn build_lp(instance: &Instance) -> LinearProgram {
    let n = instance.jobs();
    let m = instance.machines();
    let p = instance.processing_time();

    let mut names = vec![String::new(); 2 * n * m];
    for j in 1..=n {
        for q in 1..=m {
            names[s_var(n, m, j, q)] = format!("S[{j},{q}]");
            names[c_var(n, m, j, q)] = format!("C[{j},{q}]");
        }
    }

    let mut objective = vec![Rat::zero(); 2 * n * m];
    for j in 1..=n {
        objective[c_var(n, m, j, 1)] = Rat::one();
    }

    let one = Rat::one;
    let mut constraints = Vec::new();
    // Release: -S_{j,m} <= -r_j.
    for j in 1..=n {
        constraints.push(Constraint {
            coeffs: vec![(s_var(n, m, j, m), -one())],
            relation: Relation::Le,
            rhs: -instance.release(j),
            name: format!("release[{j}]"),
        });
    }
    // Work: sum_q (C_{j,q} - S_{j,q}) = p.
    for j in 1..=n {
        let mut coeffs = Vec::with_capacity(2 * m);
        for q in 1..=m {
            coeffs.push((s_var(n, m, j, q), -one()));
            coeffs.push((c_var(n, m, j, q), one()));
        }
        constraints.push(Constraint {
            coeffs,
            relation: Relation::Eq,
            rhs: p.clone(),
            name: format!("work[{j}]"),
        });
    }
    // Interval: S_{j,q} - C_{j,q} <= 0.
    for j in 1..=n {
        for q in 1..=m {
            constraints.push(Constraint {
                coeffs: vec![(s_var(n, m, j, q), one()), (c_var(n, m, j, q), -one())],
                relation: Relation::Le,
                rhs: Rat::zero(),
                name: format!("interval[{j},{q}]"),
            });
        }
    }
    // Machine order: C_{j,q} - S_{j,q-1} <= 0 for q >= 2.
    for j in 1..=n {
        for q in 2..=m {
            constraints.push(Constraint {
                coeffs: vec![(c_var(n, m, j, q), one()), (s_var(n, m, j, q - 1), -one())],
                relation: Relation::Le,
                rhs: Rat::zero(),
                name: format!("machine_order[{j},{q}]"),
            });
        }
    }
    // Job order: C_{j,q} - S_{j+1,q} <= 0 for j < n.
    for j in 1..n {
        for q in 1..=m {
            constraints.push(Constraint {
                coeffs: vec![(c_var(n, m, j, q), one()), (s_var(n, m, j + 1, q), -one())],
                relation: Relation::Le,
                rhs: Rat::zero(),
                name: format!("job_order[{j},{q}]"),
            });
        }
    }

    LinearProgram { var_names: names, objective, constraints }
}

/// A feasible point of the normal-schedule program: start and completion
/// matrices indexed `[job-1][machine-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalSolution {
    pub s: Vec<Vec<Rat>>,
    pub c: Vec<Vec<Rat>>,
}

impl NormalSolution {
    /// Reads a solution off an LP assignment vector.
    pub fn from_assignment(instance: &Instance, assignment: &[Rat]) -> Result<Self> {
        let n = instance.jobs();
        let m = instance.machines();
        if assignment.len() != 2 * n * m {
            return Err(Error::InvalidArgument(format!(
                "expected {} variables, got {}",
                2 * n * m,
                assignment.len()
            )));
        }
        let grab = |f: &dyn Fn(usize, usize) -> usize| {
            (1..=n)
                .map(|j| (1..=m).map(|q| assignment[f(j, q)].clone()).collect())
                .collect()
        };
        let sol = NormalSolution {
            s: grab(&|j, q| s_var(n, m, j, q)),
            c: grab(&|j, q| c_var(n, m, j, q)),
        };
        sol.validate(instance)?;
        Ok(sol)
    }

    /// Checks every program constraint exactly.
    pub fn validate(&self, instance: &Instance) -> Result<()> {
        let n = instance.jobs();
        let m = instance.machines();
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.s.len() != n || self.c.len() != n {
            return fail(format!("expected {n} job rows"));
        }
        for j in 1..=n {
            if self.s[j - 1].len() != m || self.c[j - 1].len() != m {
                return fail(format!("expected {m} machine columns for job {j}"));
            }
            if &self.s[j - 1][m - 1] < instance.release(j) {
                return fail(format!(
                    "S[{j},{m}] = {} is before release {}",
                    self.s[j - 1][m - 1],
                    instance.release(j)
                ));
            }
            let total: Rat = (0..m).map(|q| &self.c[j - 1][q] - &self.s[j - 1][q]).sum();
            if &total != instance.processing_time() {
                return fail(format!(
                    "job {j} executes for {total} instead of {}",
                    instance.processing_time()
                ));
            }
            for q in 1..=m {
                if self.s[j - 1][q - 1] > self.c[j - 1][q - 1] {
                    return fail(format!("S[{j},{q}] > C[{j},{q}]"));
                }
                if q > 1 && self.c[j - 1][q - 1] > self.s[j - 1][q - 2] {
                    return fail(format!("C[{j},{q}] > S[{j},{}]", q - 1));
                }
                if j < n && self.c[j - 1][q - 1] > self.s[j][q - 1] {
                    return fail(format!("C[{j},{q}] > S[{},{q}]", j + 1));
                }
            }
        }
        Ok(())
    }

    /// `sum_j C_{j,1}`, the program's objective at this point.
    pub fn lp_objective(&self) -> Rat {
        self.c.iter().map(|row| row[0].clone()).sum()
    }
}

/// Turns a normal solution into a schedule: job `j` runs on machine `q`
/// during `[S_{j,q}, C_{j,q})`; empty intervals are dropped. A job may
/// complete earlier than `C_{j,1}` when its machine-1 interval is empty.
pub fn extract_schedule(instance: &Instance, sol: &NormalSolution) -> Result<Schedule> {
    sol.validate(instance)?;
    let n = instance.jobs();
    let m = instance.machines();
    let mut intervals = Vec::new();
    for j in 1..=n {
        for q in 1..=m {
            let s = &sol.s[j - 1][q - 1];
            let c = &sol.c[j - 1][q - 1];
            if s < c {
                intervals.push(ExecInterval::new(j, q, s.clone(), c.clone()));
            }
        }
    }
    Ok(Schedule::new(instance.clone(), intervals))
}

/// Solves an instance to optimality: builds the program, runs exact
/// simplex and extracts an optimal schedule. Returns the schedule and the
/// optimal objective `min sum_j C_j`.
pub fn solve(instance: &Instance) -> (Schedule, Rat) {
    let lp = build_lp(instance);
    let result = solve_simplex(&lp);
    assert_eq!(
        result.status,
        SimplexStatus::Optimal,
        "the normal-schedule program is always feasible and bounded"
    );
    let sol = NormalSolution::from_assignment(instance, &result.assignment)
        .expect("optimal simplex point satisfies the program constraints");
    let schedule = extract_schedule(instance, &sol).expect("validated solution extracts");
    (schedule, result.value)
}

/// Solves and also returns the raw simplex result (pivot counts, the LP
/// value) for diagnostics.
pub fn solve_with_stats(instance: &Instance) -> (Schedule, Rat, SimplexResult) {
    let lp = build_lp(instance);
    let result = solve_simplex(&lp);
    assert_eq!(result.status, SimplexStatus::Optimal);
    let sol = NormalSolution::from_assignment(instance, &result.assignment)
        .expect("optimal simplex point satisfies the program constraints");
    let schedule = extract_schedule(instance, &sol).expect("validated solution extracts");
    let value = result.value.clone();
    (schedule, value, result)
}

/// Reads the `(S, C)` matrices off a normal schedule, yielding a feasible
/// program point. Empty intervals are placed as early as the constraints
/// allow; for schedules with ordered completion times this makes
/// `C_{j,1} = C_j`, so the program objective of the read-off point equals
/// the schedule objective. Fails if the schedule is not normal.
pub fn solution_of_normal_schedule(schedule: &Schedule) -> Result<NormalSolution> {
    let instance = schedule.instance();
    let n = instance.jobs();
    let m = instance.machines();
    let mut s = vec![vec![Rat::zero(); m]; n];
    let mut c = vec![vec![Rat::zero(); m]; n];
    // Completion of the previous job on each machine: the cross-job lower
    // bound for placements.
    let mut prev_c = vec![Rat::zero(); m];
    for j in 1..=n {
        let mut seen: Vec<Option<(Rat, Rat)>> = vec![None; m];
        for iv in schedule.intervals().iter().filter(|iv| iv.job == j) {
            if seen[iv.machine - 1].is_some() {
                return Err(Error::Precondition(format!(
                    "job {j} runs on machine {} in more than one interval",
                    iv.machine
                )));
            }
            seen[iv.machine - 1] = Some((iv.start.clone(), iv.end.clone()));
        }
        // Walk machines in use order (m down to 1), placing each empty
        // interval at the smallest point satisfying the release, the
        // previous job's completion on that machine, and the
        // machine-above completion of this job.
        let mut cursor = instance.release(j).clone();
        for q in (1..=m).rev() {
            let lb = cursor.clone().max(prev_c[q - 1].clone());
            let (start, end) = match &seen[q - 1] {
                Some((a, b)) => {
                    if a < &lb {
                        return Err(Error::Precondition(format!(
                            "job {j} on machine {q} starts at {a}, not normal (needs >= {lb})"
                        )));
                    }
                    (a.clone(), b.clone())
                }
                None => (lb.clone(), lb),
            };
            cursor = end.clone();
            s[j - 1][q - 1] = start;
            c[j - 1][q - 1] = end.clone();
            prev_c[q - 1] = end;
        }
    }
    let sol = NormalSolution { s, c };
    sol.validate(instance)?;
    Ok(sol)
}
