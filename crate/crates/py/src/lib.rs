//! Python bindings for the exact equal-length preemptive scheduling
//! solver. Times cross the boundary as exact `num/den` strings (plain
//! integers accepted on input); nothing is ever rounded.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use flowtime_core::hardness::{self, ThreePartition};
use flowtime_core::openshop::{self, OpenShopInstance};
use flowtime_core::schedule::ExecInterval;
use flowtime_core::{flow, gantt, lp, normalize, Rat};

/// A time value from Python: an integer or a `num/den` string.
#[derive(FromPyObject)]
enum RatArg {
    Int(i64),
    Text(String),
}

impl RatArg {
    fn to_rat(&self) -> PyResult<Rat> {
        match self {
            RatArg::Int(v) => Ok(Rat::from_int(*v)),
            RatArg::Text(s) => {
                s.parse().map_err(|e| PyValueError::new_err(format!("{e}")))
            }
        }
    }
}

fn core_err(e: flowtime_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An equal-length scheduling instance.
#[pyclass(frozen)]
struct Instance {
    inner: flowtime_core::Instance,
}

#[pymethods]
impl Instance {
    #[new]
    fn new(m: usize, p: RatArg, releases: Vec<RatArg>) -> PyResult<Self> {
        let releases = releases.iter().map(|r| r.to_rat()).collect::<PyResult<Vec<_>>>()?;
        let inner =
            flowtime_core::Instance::new(m, p.to_rat()?, releases).map_err(core_err)?;
        Ok(Instance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: flowtime_core::Instance =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Instance { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("instance serializes")
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.machines()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.jobs()
    }

    #[getter]
    fn p(&self) -> String {
        self.inner.processing_time().to_string()
    }

    #[getter]
    fn releases(&self) -> Vec<String> {
        self.inner.releases().iter().map(|r| r.to_string()).collect()
    }

    fn horizon(&self) -> String {
        self.inner.horizon().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Instance(m={}, p={}, n={})", self.m(), self.p(), self.n())
    }
}

/// A schedule: per-job, per-machine execution intervals.
#[pyclass(frozen)]
struct Schedule {
    inner: flowtime_core::Schedule,
}

#[pymethods]
impl Schedule {
    /// Builds a schedule from `(job, machine, start, end)` tuples.
    #[new]
    fn new(
        instance: &Instance,
        intervals: Vec<(usize, usize, RatArg, RatArg)>,
    ) -> PyResult<Self> {
        let intervals = intervals
            .iter()
            .map(|(job, machine, start, end)| {
                Ok(ExecInterval::new(*job, *machine, start.to_rat()?, end.to_rat()?))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Schedule {
            inner: flowtime_core::Schedule::new(instance.inner.clone(), intervals),
        })
    }

    fn intervals(&self) -> Vec<(usize, usize, String, String)> {
        self.inner
            .intervals()
            .iter()
            .map(|iv| (iv.job, iv.machine, iv.start.to_string(), iv.end.to_string()))
            .collect()
    }

    fn objective(&self) -> String {
        self.inner.objective().to_string()
    }

    fn completions(&self) -> Vec<String> {
        self.inner.completions().iter().map(|c| c.to_string()).collect()
    }

    /// Runs every structural check; returns `(passed, report_lines)`.
    fn verify(&self) -> (bool, Vec<String>) {
        let report = self.inner.verify();
        let lines = format!("{report}").lines().map(str::to_owned).collect();
        (report.passed(), lines)
    }

    fn is_integral(&self) -> bool {
        self.inner.is_integral()
    }

    fn is_busy(&self) -> bool {
        self.inner.check_busy()
    }

    fn is_irreducible(&self) -> bool {
        self.inner.check_irreducible()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_wire()).expect("schedule serializes")
    }

    /// SVG Gantt chart; `scale` is pixels per time unit.
    #[pyo3(signature = (scale = 20))]
    fn gantt_svg(&self, scale: u32) -> String {
        gantt::emit_gantt(&self.inner, scale)
    }

    fn __repr__(&self) -> String {
        format!(
            "Schedule(objective={}, intervals={})",
            self.objective(),
            self.inner.intervals().len()
        )
    }
}

/// Solves an instance exactly; returns `(schedule, objective)`.
#[pyfunction]
fn solve(instance: &Instance) -> (Schedule, String) {
    let (schedule, value) = lp::solve(&instance.inner);
    (Schedule { inner: schedule }, value.to_string())
}

/// Converts a schedule into one with integer preemptions only, without
/// increasing the objective.
#[pyfunction]
fn integralize(instance: &Instance, schedule: &Schedule) -> PyResult<Schedule> {
    let inner = flow::integralize(&instance.inner, &schedule.inner).map_err(core_err)?;
    Ok(Schedule { inner })
}

/// Busy-fills and then reduces the schedule until every job pair is in
/// order.
#[pyfunction]
fn normalize_schedule(schedule: &Schedule) -> PyResult<Schedule> {
    let busy = normalize::make_busy(&schedule.inner).map_err(core_err)?;
    let inner = normalize::make_irreducible(&busy).map_err(core_err)?;
    Ok(Schedule { inner })
}

/// Exact optimum of a small instance by dynamic programming. Refuses
/// oversize inputs.
#[pyfunction]
#[pyo3(signature = (instance, integral_only = true))]
fn oracle(instance: &Instance, integral_only: bool) -> PyResult<String> {
    hardness::brute_force_equal_p(&instance.inner, integral_only)
        .map(|v| v.to_string())
        .map_err(core_err)
}

type OpList = Vec<(usize, usize, u64)>;

/// Solves a unit-time open shop; returns `(assignments, objective)` where
/// assignments are `(job, machine, slot)` triples.
#[pyfunction]
fn solve_openshop(m: usize, releases: Vec<u64>) -> PyResult<(OpList, String)> {
    let instance = OpenShopInstance::new(m, releases).map_err(core_err)?;
    let (schedule, objective) = openshop::solve_openshop(&instance).map_err(core_err)?;
    let ops = schedule
        .assignments
        .iter()
        .map(|op| (op.job, op.machine, op.slot))
        .collect();
    Ok((ops, objective.to_string()))
}

/// Builds the 3-Partition hardness instance; returns
/// `(threshold, instance_json)`.
#[pyfunction]
fn generate_hard(n: usize, y: u64, x: Vec<u64>) -> PyResult<(String, String)> {
    let tp = ThreePartition::new(n, y, x).map_err(core_err)?;
    let hard = hardness::generate(&tp).map_err(core_err)?;
    let json = serde_json::to_string(&hard.instance).expect("instance serializes");
    Ok((hard.threshold.to_string(), json))
}

#[pymodule]
fn flowtime(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Schedule>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(integralize, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_schedule, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(solve_openshop, m)?)?;
    m.add_function(wrap_pyfunction!(generate_hard, m)?)?;
    Ok(())
}
