//! Min-cost-flow integralization.
//!
//! Any valid schedule of an integer-data instance converts into an
//! integral schedule (all preemptions at integer times) without increasing
//! the objective. Breakpoints are the releases and the floors and ceilings
//! of the completion times; a bipartite network routes each job's `p`
//! units into the breakpoint intervals it may use. Only the arcs that let
//! a job spill past `floor(C_j)` cost anything (capacity 1, cost 1), so
//! the cost of a flow counts the completions that stay fractional.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::intervals::IntervalSet;
use crate::rational::Rat;
use crate::schedule::Schedule;

/// One arc with integral capacity and 0/1 cost.
#[derive(Clone, Debug)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: BigInt,
    pub cost: u8,
}

/// The job/interval network built from a schedule.
///
/// Node numbering: 0 is the source, 1 the sink, `2..2+n` the job nodes,
/// then one node per breakpoint interval.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    jobs: usize,
    /// Breakpoints `t_1 < ... < t_k`; node `interval_node(i)` carries
    /// `[t_i, t_{i+1})`.
    pub breakpoints: Vec<BigInt>,
    pub arcs: Vec<FlowArc>,
}

/// A flow on a [`FlowNetwork`], aligned with its arc list. Min-cost flows
/// are integral; flows induced by fractional schedules are not.
#[derive(Clone, Debug)]
pub struct FlowResult {
    pub flows: Vec<Rat>,
    pub value: Rat,
    pub cost: Rat,
}

impl FlowNetwork {
    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        1
    }

    pub fn job_node(&self, job: usize) -> usize {
        1 + job
    }

    /// Node of the `i`-th breakpoint interval (1-based).
    pub fn interval_node(&self, i: usize) -> usize {
        1 + self.jobs + i
    }

    pub fn num_intervals(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        2 + self.jobs + self.num_intervals()
    }

    fn interval_span(&self, i: usize) -> (Rat, Rat) {
        (
            Rat::from_bigint(self.breakpoints[i - 1].clone()),
            Rat::from_bigint(self.breakpoints[i].clone()),
        )
    }

    /// The flow the source schedule itself induces: the mass of job `j`
    /// inside each breakpoint interval.
    pub fn induced_flow(&self, schedule: &Schedule) -> FlowResult {
        let mut flows = vec![Rat::zero(); self.arcs.len()];
        // Job -> interval arcs carry the support mass in their window;
        // source and sink arcs carry the implied totals.
        // At most one arc joins a job to an interval, so its flow is the
        // whole support mass inside the window.
        for (a, arc) in self.arcs.iter().enumerate() {
            if arc.from > 1 && arc.from <= 1 + self.jobs && arc.to > 1 + self.jobs {
                let job = arc.from - 1;
                let i = arc.to - 1 - self.jobs;
                let (lo, hi) = self.interval_span(i);
                let window = IntervalSet::single(lo, hi);
                flows[a] = schedule.support(job).intersect(&window).measure();
            }
        }
        for (a, arc) in self.arcs.iter().enumerate() {
            if arc.from == 0 {
                let job = arc.to - 1;
                flows[a] = schedule.support(job).measure();
            } else if arc.to == 1 {
                let node = arc.from;
                flows[a] = self
                    .arcs
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| x.to == node)
                    .map(|(b, _)| flows[b].clone())
                    .sum();
            }
        }
        let value: Rat = self
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, x)| x.from == 0)
            .map(|(a, _)| flows[a].clone())
            .sum();
        let cost: Rat = self
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, x)| x.cost == 1)
            .map(|(a, _)| flows[a].clone())
            .sum();
        FlowResult { flows, value, cost }
    }

    /// Checks conservation, capacities and non-negativity of a flow.
    pub fn check_flow(&self, result: &FlowResult) -> Result<()> {
        if result.flows.len() != self.arcs.len() {
            return Err(Error::InvalidArgument("flow vector length mismatch".into()));
        }
        let mut balance = vec![Rat::zero(); self.num_nodes()];
        for (a, arc) in self.arcs.iter().enumerate() {
            let f = &result.flows[a];
            if f.is_negative() || f > &Rat::from_bigint(arc.capacity.clone()) {
                return Err(Error::Infeasible(format!(
                    "arc {a} flow {f} outside [0, {}]",
                    arc.capacity
                )));
            }
            balance[arc.from] = &balance[arc.from] - f;
            balance[arc.to] = &balance[arc.to] + f;
        }
        for (node, gain) in balance.iter().enumerate().skip(2) {
            if !gain.is_zero() {
                return Err(Error::Infeasible(format!("node {node} gains {gain} units")));
            }
        }
        if balance[self.sink()] != result.value || balance[self.source()] != -&result.value {
            return Err(Error::Infeasible("flow value inconsistent".into()));
        }
        Ok(())
    }

    /// DOT dump for visual inspection.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut out = String::from("digraph flow {\n  rankdir=LR;\n");
        writeln!(out, "  n0 [label=\"source\"]; n1 [label=\"sink\"];").unwrap();
        for j in 1..=self.jobs {
            writeln!(out, "  n{} [label=\"job {j}\"];", self.job_node(j)).unwrap();
        }
        for i in 1..=self.num_intervals() {
            writeln!(
                out,
                "  n{} [label=\"[{}, {})\"];",
                self.interval_node(i),
                self.breakpoints[i - 1],
                self.breakpoints[i]
            )
            .unwrap();
        }
        for arc in &self.arcs {
            writeln!(
                out,
                "  n{} -> n{} [label=\"{}c{}\"];",
                arc.from, arc.to, arc.capacity, arc.cost
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the integralization network for a valid schedule of an
/// integer-data instance.
pub fn build_network(instance: &Instance, schedule: &Schedule) -> Result<FlowNetwork> {
    if !instance.is_integral() {
        return Err(Error::NonIntegral(
            "integralization needs integer p and releases; shift or scale the instance first"
                .into(),
        ));
    }
    let report = schedule.verify();
    if let Some(fail) = report.first_failure() {
        return Err(Error::InvalidSchedule {
            condition: fail.condition,
            detail: fail.detail.clone().unwrap_or_default(),
        });
    }

    let n = instance.jobs();
    let m = instance.machines();
    let completions = schedule.completions();

    let mut breakpoints: Vec<BigInt> = instance
        .releases()
        .iter()
        .map(|r| r.to_bigint().expect("integral release"))
        .collect();
    for c in &completions {
        breakpoints.push(c.floor_int());
        breakpoints.push(c.ceil_int());
    }
    breakpoints.sort();
    breakpoints.dedup();

    let mut net = FlowNetwork { jobs: n, breakpoints, arcs: Vec::new() };

    let p_int = instance.processing_time().to_bigint().expect("integral p");
    for j in 1..=n {
        net.arcs.push(FlowArc {
            from: net.source(),
            to: net.job_node(j),
            capacity: p_int.clone(),
            cost: 0,
        });
    }
    for i in 1..=net.num_intervals() {
        let len = &net.breakpoints[i] - &net.breakpoints[i - 1];
        net.arcs.push(FlowArc {
            from: net.interval_node(i),
            to: net.sink(),
            capacity: BigInt::from(m as u64) * &len,
            cost: 0,
        });
    }
    for j in 1..=n {
        let r = instance.release(j).to_bigint().expect("integral release");
        let floor_c = completions[j - 1].floor_int();
        for i in 1..=net.num_intervals() {
            let (t_lo, t_hi) = (&net.breakpoints[i - 1], &net.breakpoints[i]);
            if t_lo >= &r && t_hi <= &floor_c {
                net.arcs.push(FlowArc {
                    from: net.job_node(j),
                    to: net.interval_node(i),
                    capacity: t_hi - t_lo,
                    cost: 0,
                });
            }
        }
        if !completions[j - 1].is_integer() {
            let i = net
                .breakpoints
                .iter()
                .position(|t| t == &floor_c)
                .expect("floor is a breakpoint")
                + 1;
            net.arcs.push(FlowArc {
                from: net.job_node(j),
                to: net.interval_node(i),
                capacity: BigInt::from(1),
                cost: 1,
            });
        }
    }
    Ok(net)
}

/// Integral min-cost flow of maximal value by successive shortest
/// augmenting paths with a label-correcting search. Costs are 0/1 so
/// residual graphs of partial min-cost flows never hold negative cycles.
pub fn min_cost_flow(network: &FlowNetwork) -> Result<FlowResult> {
    let nodes = network.num_nodes();
    // Paired residual edges: even index forward, odd backward.
    struct Edge {
        to: usize,
        residual: BigInt,
        cost: i64,
    }
    let mut edges: Vec<Edge> = Vec::with_capacity(network.arcs.len() * 2);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for arc in &network.arcs {
        adj[arc.from].push(edges.len());
        edges.push(Edge { to: arc.to, residual: arc.capacity.clone(), cost: arc.cost as i64 });
        adj[arc.to].push(edges.len());
        edges.push(Edge { to: arc.from, residual: BigInt::zero(), cost: -(arc.cost as i64) });
    }

    let (source, sink) = (network.source(), network.sink());
    let target: BigInt = network
        .arcs
        .iter()
        .filter(|a| a.from == source)
        .map(|a| a.capacity.clone())
        .sum();

    let mut value = BigInt::zero();
    let mut cost = BigInt::zero();
    while value < target {
        // Shortest path by cost, SPFA with deterministic arc order.
        const UNREACHED: i64 = i64::MAX / 2;
        let mut dist = vec![UNREACHED; nodes];
        let mut parent: Vec<Option<usize>> = vec![None; nodes];
        let mut queued = vec![false; nodes];
        let mut queue = std::collections::VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        queued[source] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &adj[u] {
                if edges[e].residual.is_zero() {
                    continue;
                }
                let v = edges[e].to;
                let cand = dist[u] + edges[e].cost;
                if cand < dist[v] {
                    dist[v] = cand;
                    parent[v] = Some(e);
                    if !queued[v] {
                        queue.push_back(v);
                        queued[v] = true;
                    }
                }
            }
        }
        if parent[sink].is_none() && sink != source {
            return Err(Error::Infeasible(format!(
                "maximum flow {value} falls short of the required {target}"
            )));
        }
        // Bottleneck along the path, then augment.
        let mut bottleneck: Option<BigInt> = None;
        let mut v = sink;
        while v != source {
            let e = parent[v].expect("path edge");
            bottleneck = Some(match bottleneck {
                None => edges[e].residual.clone(),
                Some(b) => b.min(edges[e].residual.clone()),
            });
            v = edges[e ^ 1].to;
        }
        let bottleneck = bottleneck.expect("non-trivial path");
        debug_assert!(bottleneck > BigInt::zero());
        let mut v = sink;
        while v != source {
            let e = parent[v].expect("path edge");
            edges[e].residual -= &bottleneck;
            edges[e ^ 1].residual += &bottleneck;
            cost += BigInt::from(edges[e].cost) * &bottleneck;
            v = edges[e ^ 1].to;
        }
        value += &bottleneck;
    }

    let flows: Vec<Rat> = (0..network.arcs.len())
        .map(|a| {
            let spent = &network.arcs[a].capacity - &edges[2 * a].residual;
            Rat::from_bigint(spent)
        })
        .collect();
    Ok(FlowResult {
        flows,
        value: Rat::from_bigint(value),
        cost: Rat::from_bigint(cost),
    })
}

/// Converts a valid schedule into an integral one without increasing the
/// objective. Integral inputs come back unchanged up to the canonical
/// machine assignment; otherwise a min-cost flow redistributes the work
/// and each interval's allotment is packed job by job, machine by machine,
/// left to right.
pub fn integralize(instance: &Instance, schedule: &Schedule) -> Result<Schedule> {
    if schedule.is_integral() {
        // Already a fixed point; reassign machines canonically.
        let report = schedule.verify();
        if let Some(fail) = report.first_failure() {
            return Err(Error::InvalidSchedule {
                condition: fail.condition,
                detail: fail.detail.clone().unwrap_or_default(),
            });
        }
        if !instance.is_integral() {
            return Err(Error::NonIntegral(
                "integralization needs integer p and releases".into(),
            ));
        }
        return Ok(schedule.canonical_machines());
    }
    let network = build_network(instance, schedule)?;
    let flow = min_cost_flow(&network)?;
    Ok(pack_flow(instance, &network, &flow))
}

/// Lays out per-interval flow amounts on the machines: the interval's
/// `m * len` machine-time is one long timeline, filled by jobs in index
/// order; an allotment wraps to the next machine at multiples of `len`,
/// and since no allotment exceeds `len` the two pieces never overlap in
/// time.
pub(crate) fn pack_flow(
    instance: &Instance,
    network: &FlowNetwork,
    flow: &FlowResult,
) -> Schedule {
    let n = instance.jobs();
    let mut supports: Vec<Vec<(Rat, Rat)>> = vec![Vec::new(); n];
    for i in 1..=network.num_intervals() {
        let t_lo = Rat::from_bigint(network.breakpoints[i - 1].clone());
        let t_hi = Rat::from_bigint(network.breakpoints[i].clone());
        let len = &t_hi - &t_lo;
        let node = network.interval_node(i);
        let mut offset = Rat::zero();
        for j in 1..=n {
            // At most one arc (cost 0 or cost 1) joins job j to this
            // interval.
            let amount: Rat = network
                .arcs
                .iter()
                .enumerate()
                .filter(|(_, a)| a.from == network.job_node(j) && a.to == node)
                .map(|(idx, _)| flow.flows[idx].clone())
                .sum();
            if amount.is_zero() {
                continue;
            }
            let within = {
                // offset mod len, with machine index offset / len.
                let q = (&offset / &len).floor_int();
                &offset - &(&Rat::from_bigint(q) * &len)
            };
            let fits = &within + &amount <= len;
            if fits {
                let s = &t_lo + &within;
                supports[j - 1].push((s.clone(), &s + &amount));
            } else {
                let first = &len - &within;
                supports[j - 1].push((&t_lo + &within, t_hi.clone()));
                supports[j - 1].push((t_lo.clone(), &t_lo + &(&amount - &first)));
            }
            offset = &offset + &amount;
        }
    }
    let supports: Vec<IntervalSet> =
        supports.into_iter().map(IntervalSet::from_spans).collect();
    Schedule::from_supports(instance.clone(), &supports)
}
