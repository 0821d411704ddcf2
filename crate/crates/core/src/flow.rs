//! The source / jobs / intervals / sink network and exact maximum flows on it.
//!
//! Edges come in three families: `s -> job` (remaining demand), `job -> interval`
//! (the per-interval energy limit) and `interval -> t` (the sink capacity the
//! scheduler raises round by round). A flow on this network is a (partial)
//! charging schedule: `f(job, interval)` is the energy charged.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::partition::ChargingProblem;
use crate::rational::{format_rational, Q};
use crate::schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("negative capacity {value} on {edge:?}")]
    NegativeCapacity { edge: EdgeRef, value: String },
    #[error("no such edge {0:?}")]
    UnknownEdge(EdgeRef),
    #[error("expected {expected} {what}, got {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("flow {value} on {edge:?} outside [0, {cap}]")]
    CapacityViolated {
        edge: EdgeRef,
        value: String,
        cap: String,
    },
    #[error("flow not conserved at {node}")]
    NotConserved { node: String },
}

/// Names one edge of a [`FlowNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeRef {
    Source(usize),
    Assign { job: usize, interval: usize },
    Sink(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignEdge {
    pub job: usize,
    pub interval: usize,
    pub cap: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    source_caps: Vec<Q>,
    assign: Vec<AssignEdge>,
    sink_caps: Vec<Option<Q>>,
    job_order: Vec<usize>,
    lookup: HashMap<(usize, usize), usize>,
    by_job: Vec<Vec<usize>>,
    by_interval: Vec<Vec<usize>>,
}

/// Builds the network for `problem`.
///
/// `source_caps[j]` bounds job `j`'s inflow, every available `(job, interval)`
/// pair gets its energy limit, and only intervals in `mask` get a sink edge,
/// with capacity `sink_caps[i]`.
pub fn build_network(
    problem: &ChargingProblem,
    source_caps: Vec<Q>,
    sink_caps: &[Q],
    mask: &BTreeSet<usize>,
) -> Result<FlowNetwork, FlowError> {
    let n = problem.num_jobs();
    let m = problem.num_intervals();
    if source_caps.len() != n {
        return Err(FlowError::Dimension {
            what: "source capacities",
            expected: n,
            found: source_caps.len(),
        });
    }
    if sink_caps.len() != m {
        return Err(FlowError::Dimension {
            what: "sink capacities",
            expected: m,
            found: sink_caps.len(),
        });
    }
    if let Some(&bad) = mask.iter().find(|&&i| i >= m) {
        return Err(FlowError::UnknownEdge(EdgeRef::Sink(bad)));
    }

    let mut assign = Vec::new();
    for j in 0..n {
        for i in problem.partition().intervals_of(j) {
            let cap = problem.energy_limit(j, i).expect("available").clone();
            assign.push(AssignEdge {
                job: j,
                interval: i,
                cap,
            });
        }
    }
    let sink = (0..m)
        .map(|i| mask.contains(&i).then(|| sink_caps[i].clone()))
        .collect();
    FlowNetwork::from_parts(source_caps, assign, sink, (0..n).collect())
}

impl FlowNetwork {
    pub(crate) fn from_parts(
        source_caps: Vec<Q>,
        assign: Vec<AssignEdge>,
        sink_caps: Vec<Option<Q>>,
        job_order: Vec<usize>,
    ) -> Result<Self, FlowError> {
        for (j, c) in source_caps.iter().enumerate() {
            if c.is_negative() {
                return Err(FlowError::NegativeCapacity {
                    edge: EdgeRef::Source(j),
                    value: format_rational(c),
                });
            }
        }
        for e in &assign {
            if e.cap.is_negative() {
                return Err(FlowError::NegativeCapacity {
                    edge: EdgeRef::Assign {
                        job: e.job,
                        interval: e.interval,
                    },
                    value: format_rational(&e.cap),
                });
            }
        }
        for (i, c) in sink_caps.iter().enumerate() {
            if let Some(c) = c.as_ref().filter(|c| c.is_negative()) {
                return Err(FlowError::NegativeCapacity {
                    edge: EdgeRef::Sink(i),
                    value: format_rational(c),
                });
            }
        }

        let mut net = FlowNetwork {
            by_job: vec![Vec::new(); source_caps.len()],
            by_interval: vec![Vec::new(); sink_caps.len()],
            source_caps,
            assign,
            sink_caps,
            job_order,
            lookup: HashMap::new(),
        };
        net.reindex();
        Ok(net)
    }

    fn reindex(&mut self) {
        self.lookup.clear();
        self.by_job.iter_mut().for_each(Vec::clear);
        self.by_interval.iter_mut().for_each(Vec::clear);
        for (k, e) in self.assign.iter().enumerate() {
            self.lookup.insert((e.job, e.interval), k);
            self.by_job[e.job].push(k);
            self.by_interval[e.interval].push(k);
        }
    }

    pub fn num_jobs(&self) -> usize {
        self.source_caps.len()
    }

    pub fn num_intervals(&self) -> usize {
        self.sink_caps.len()
    }

    /// `2 + jobs + intervals`.
    pub fn num_nodes(&self) -> usize {
        2 + self.num_jobs() + self.num_intervals()
    }

    pub fn num_edges(&self) -> usize {
        self.source_caps.len() + self.assign.len() + self.sink_caps.iter().flatten().count()
    }

    pub fn source_caps(&self) -> &[Q] {
        &self.source_caps
    }

    pub fn total_source_cap(&self) -> Q {
        self.source_caps.iter().fold(Q::zero(), |acc, c| acc + c)
    }

    pub fn assign_edges(&self) -> &[AssignEdge] {
        &self.assign
    }

    pub fn sink_cap(&self, interval: usize) -> Option<&Q> {
        self.sink_caps.get(interval).and_then(Option::as_ref)
    }

    pub fn has_sink_edge(&self, interval: usize) -> bool {
        self.sink_cap(interval).is_some()
    }

    pub fn capacity(&self, edge: EdgeRef) -> Option<&Q> {
        match edge {
            EdgeRef::Source(j) => self.source_caps.get(j),
            EdgeRef::Assign { job, interval } => self
                .lookup
                .get(&(job, interval))
                .map(|&k| &self.assign[k].cap),
            EdgeRef::Sink(i) => self.sink_cap(i),
        }
    }

    pub(crate) fn assign_index(&self, job: usize, interval: usize) -> Option<usize> {
        self.lookup.get(&(job, interval)).copied()
    }

    pub(crate) fn edges_of_job(&self, job: usize) -> &[usize] {
        &self.by_job[job]
    }

    pub(crate) fn edges_of_interval(&self, interval: usize) -> &[usize] {
        &self.by_interval[interval]
    }

    /// Replaces the capacity of an existing sink edge.
    pub fn set_sink_cap(&mut self, interval: usize, cap: Q) -> Result<(), FlowError> {
        if cap.is_negative() {
            return Err(FlowError::NegativeCapacity {
                edge: EdgeRef::Sink(interval),
                value: format_rational(&cap),
            });
        }
        match self.sink_caps.get_mut(interval) {
            Some(Some(slot)) => {
                *slot = cap;
                Ok(())
            }
            _ => Err(FlowError::UnknownEdge(EdgeRef::Sink(interval))),
        }
    }

    pub(crate) fn set_source_cap(&mut self, job: usize, cap: Q) -> Result<(), FlowError> {
        if cap.is_negative() {
            return Err(FlowError::NegativeCapacity {
                edge: EdgeRef::Source(job),
                value: format_rational(&cap),
            });
        }
        self.source_caps[job] = cap;
        Ok(())
    }

    /// Drops the sink edge of `interval` and every job edge into it.
    pub(crate) fn remove_interval(&mut self, interval: usize) {
        self.sink_caps[interval] = None;
        self.assign.retain(|e| e.interval != interval);
        self.reindex();
    }

    /// Same network with a different exploration order for the solver.
    ///
    /// Jobs are visited in `job_order`; each job's edges follow `interval_order`.
    /// The maximum flow value is order independent, the flow itself is not.
    pub fn reordered(&self, job_order: &[usize], interval_order: &[usize]) -> FlowNetwork {
        let mut rank = vec![0usize; self.num_intervals()];
        for (r, &i) in interval_order.iter().enumerate() {
            rank[i] = r;
        }
        let mut job_rank = vec![0usize; self.num_jobs()];
        for (r, &j) in job_order.iter().enumerate() {
            job_rank[j] = r;
        }
        let mut net = self.clone();
        net.assign
            .sort_by_key(|e| (job_rank[e.job], rank[e.interval]));
        net.job_order = job_order.to_vec();
        net.reindex();
        net
    }

    /// Graphviz rendering with `flow/cap` edge labels.
    pub fn to_dot(&self, flow: Option<&Flow>) -> String {
        let label = |f: Option<&Q>, c: &Q| match f {
            Some(f) => format!("{}/{}", format_rational(f), format_rational(c)),
            None => format_rational(c),
        };
        let mut out = String::from("digraph flow {\n  rankdir=LR;\n");
        for (j, c) in self.source_caps.iter().enumerate() {
            let f = flow.map(|f| &f.source[j]);
            let _ = writeln!(out, "  s -> j{} [label=\"{}\"];", j + 1, label(f, c));
        }
        for (k, e) in self.assign.iter().enumerate() {
            let f = flow.map(|f| &f.assign[k]);
            let _ = writeln!(
                out,
                "  j{} -> I{} [label=\"{}\"];",
                e.job + 1,
                e.interval + 1,
                label(f, &e.cap)
            );
        }
        for (i, c) in self.sink_caps.iter().enumerate() {
            if let Some(c) = c {
                let f = flow.map(|f| &f.sink[i]);
                let _ = writeln!(out, "  I{} -> t [label=\"{}\"];", i + 1, label(f, c));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// A flow on a specific [`FlowNetwork`]; edge vectors are parallel to the network's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub source: Vec<Q>,
    pub assign: Vec<Q>,
    pub sink: Vec<Q>,
    pub value: Q,
}

impl Flow {
    pub fn zero(network: &FlowNetwork) -> Flow {
        Flow {
            source: vec![Q::zero(); network.num_jobs()],
            assign: vec![Q::zero(); network.assign.len()],
            sink: vec![Q::zero(); network.num_intervals()],
            value: Q::zero(),
        }
    }

    /// Flow induced by a schedule: `f(j, I_i) = e[i][j]`, source and sink edges
    /// carry the row and column sums.
    ///
    /// `network` must contain an edge for every available pair of `schedule`.
    pub fn from_schedule(network: &FlowNetwork, schedule: &Schedule) -> Flow {
        let mut flow = Flow::zero(network);
        for (k, e) in network.assign.iter().enumerate() {
            let x = schedule.get(e.job, e.interval).cloned().unwrap_or_default();
            flow.source[e.job] += &x;
            flow.sink[e.interval] += &x;
            flow.value += &x;
            flow.assign[k] = x;
        }
        flow
    }

    pub fn get(&self, network: &FlowNetwork, edge: EdgeRef) -> Option<&Q> {
        match edge {
            EdgeRef::Source(j) => self.source.get(j),
            EdgeRef::Assign { job, interval } => network
                .assign_index(job, interval)
                .map(|k| &self.assign[k]),
            EdgeRef::Sink(i) => network.has_sink_edge(i).then(|| &self.sink[i]),
        }
    }

    /// Capacity bounds and conservation, exactly.
    pub fn validate(&self, network: &FlowNetwork) -> Result<(), FlowError> {
        let check = |edge: EdgeRef, f: &Q, c: &Q| {
            if f.is_negative() || f > c {
                Err(FlowError::CapacityViolated {
                    edge,
                    value: format_rational(f),
                    cap: format_rational(c),
                })
            } else {
                Ok(())
            }
        };
        if self.source.len() != network.num_jobs()
            || self.assign.len() != network.assign.len()
            || self.sink.len() != network.num_intervals()
        {
            return Err(FlowError::Dimension {
                what: "flow edges",
                expected: network.num_edges(),
                found: self.source.len() + self.assign.len() + self.sink.len(),
            });
        }
        for (j, c) in network.source_caps.iter().enumerate() {
            check(EdgeRef::Source(j), &self.source[j], c)?;
        }
        for (k, e) in network.assign.iter().enumerate() {
            let edge = EdgeRef::Assign {
                job: e.job,
                interval: e.interval,
            };
            check(edge, &self.assign[k], &e.cap)?;
        }
        for (i, c) in network.sink_caps.iter().enumerate() {
            match c {
                Some(c) => check(EdgeRef::Sink(i), &self.sink[i], c)?,
                None if !self.sink[i].is_zero() => {
                    return Err(FlowError::UnknownEdge(EdgeRef::Sink(i)))
                }
                None => {}
            }
        }

        let mut out_of_job = vec![Q::zero(); network.num_jobs()];
        let mut into_interval = vec![Q::zero(); network.num_intervals()];
        for (k, e) in network.assign.iter().enumerate() {
            out_of_job[e.job] += &self.assign[k];
            into_interval[e.interval] += &self.assign[k];
        }
        for (j, out) in out_of_job.iter().enumerate() {
            if *out != self.source[j] {
                return Err(FlowError::NotConserved {
                    node: format!("j{}", j + 1),
                });
            }
        }
        for (i, inflow) in into_interval.iter().enumerate() {
            if *inflow != self.sink[i] {
                return Err(FlowError::NotConserved {
                    node: format!("I{}", i + 1),
                });
            }
        }
        let total_in = self.source.iter().fold(Q::zero(), |acc, x| acc + x);
        let total_out = self.sink.iter().fold(Q::zero(), |acc, x| acc + x);
        if total_in != self.value || total_out != self.value {
            return Err(FlowError::NotConserved {
                node: "s/t".to_string(),
            });
        }
        Ok(())
    }
}

const SOURCE: usize = 0;
const SINK: usize = 1;

struct Arc {
    to: usize,
    residual: Q,
    rev: usize,
}

struct Residual {
    adj: Vec<Vec<Arc>>,
}

impl Residual {
    fn add_edge(&mut self, from: usize, to: usize, cap: Q) -> (usize, usize) {
        let fwd = self.adj[from].len();
        let bwd = self.adj[to].len();
        self.adj[from].push(Arc {
            to,
            residual: cap,
            rev: bwd,
        });
        self.adj[to].push(Arc {
            to: from,
            residual: Q::zero(),
            rev: fwd,
        });
        (from, fwd)
    }

    /// BFS for a shortest augmenting path; returns `(node, arc)` hops from s.
    fn shortest_path(&self) -> Option<Vec<(usize, usize)>> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(u) = queue.pop_front() {
            for (k, arc) in self.adj[u].iter().enumerate() {
                if seen[arc.to] || !arc.residual.is_positive() {
                    continue;
                }
                seen[arc.to] = true;
                parent[arc.to] = Some((u, k));
                if arc.to == SINK {
                    let mut path = Vec::new();
                    let mut v = SINK;
                    while let Some((p, k)) = parent[v] {
                        path.push((p, k));
                        v = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(arc.to);
            }
        }
        None
    }
}

/// Exact maximum flow by shortest augmenting paths (Edmonds-Karp).
///
/// Deterministic: jobs are explored in the network's job order and each job's
/// edges in the network's edge order (ascending `(job, interval)` unless the
/// network was [`reordered`](FlowNetwork::reordered)).
pub fn max_flow(network: &FlowNetwork) -> Flow {
    let n = network.num_jobs();
    let job_node = |j: usize| 2 + j;
    let interval_node = |i: usize| 2 + n + i;

    let mut g = Residual {
        adj: (0..network.num_nodes()).map(|_| Vec::new()).collect(),
    };
    let mut source_arcs = vec![(0, 0); n];
    for &j in &network.job_order {
        source_arcs[j] = g.add_edge(SOURCE, job_node(j), network.source_caps[j].clone());
    }
    let mut sink_arcs = vec![None; network.num_intervals()];
    for (i, cap) in network.sink_caps.iter().enumerate() {
        if let Some(cap) = cap {
            sink_arcs[i] = Some(g.add_edge(interval_node(i), SINK, cap.clone()));
        }
    }
    let assign_arcs: Vec<_> = network
        .assign
        .iter()
        .map(|e| g.add_edge(job_node(e.job), interval_node(e.interval), e.cap.clone()))
        .collect();

    while let Some(path) = g.shortest_path() {
        let bottleneck = path
            .iter()
            .map(|&(u, k)| &g.adj[u][k].residual)
            .min()
            .expect("non-empty path")
            .clone();
        for &(u, k) in &path {
            let (to, rev) = (g.adj[u][k].to, g.adj[u][k].rev);
            g.adj[u][k].residual -= &bottleneck;
            g.adj[to][rev].residual += &bottleneck;
        }
    }

    // flow on an edge = residual of its reverse arc
    let pushed = |(u, k): (usize, usize)| {
        let arc = &g.adj[u][k];
        g.adj[arc.to][arc.rev].residual.clone()
    };
    let source: Vec<Q> = source_arcs.iter().map(|&a| pushed(a)).collect();
    let assign = assign_arcs.iter().map(|&a| pushed(a)).collect();
    let sink = sink_arcs
        .iter()
        .map(|a| a.map(pushed).unwrap_or_else(Q::zero))
        .collect();
    let value = source.iter().fold(Q::zero(), |acc, x| acc + x);
    Flow {
        source,
        assign,
        sink,
        value,
    }
}

/// `f(e) == c(e)`, exactly.
pub fn is_saturated(network: &FlowNetwork, flow: &Flow, edge: EdgeRef) -> Result<bool, FlowError> {
    match (network.capacity(edge), flow.get(network, edge)) {
        (Some(c), Some(f)) => Ok(f == c),
        _ => Err(FlowError::UnknownEdge(edge)),
    }
}

/// A relation on interval indices (`i` reaches `i'`), irreflexive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalRelation {
    reach: Vec<BTreeSet<usize>>,
}

impl IntervalRelation {
    pub fn from_sets(reach: Vec<BTreeSet<usize>>) -> Self {
        IntervalRelation { reach }
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.reach[from].contains(&to)
    }

    pub fn reachable_from(&self, from: usize) -> &BTreeSet<usize> {
        &self.reach[from]
    }

    pub fn is_empty(&self) -> bool {
        self.reach.iter().all(BTreeSet::is_empty)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.reach
            .iter()
            .enumerate()
            .flat_map(|(i, set)| set.iter().map(move |&k| (i, k)))
    }
}

/// One residual hop `I_i -> j -> I_k` among job and interval nodes: needs
/// `f(j, I_i) > 0` (reverse residual) and `f(j, I_k) < c(j, I_k)` (forward
/// residual).
pub fn residual_interval_hops(network: &FlowNetwork, flow: &Flow) -> IntervalRelation {
    let reach = (0..network.num_intervals())
        .map(|i| {
            let mut next = BTreeSet::new();
            for &k in network.edges_of_interval(i) {
                if !flow.assign[k].is_positive() {
                    continue;
                }
                let job = network.assign[k].job;
                for &k2 in network.edges_of_job(job) {
                    let e = &network.assign[k2];
                    if e.interval != i && flow.assign[k2] < e.cap {
                        next.insert(e.interval);
                    }
                }
            }
            next
        })
        .collect();
    IntervalRelation { reach }
}

/// Which intervals reach which through residual edges among job and interval
/// nodes only: the transitive closure of [`residual_interval_hops`], without
/// self pairs.
pub fn residual_interval_reachability(network: &FlowNetwork, flow: &Flow) -> IntervalRelation {
    let hop = residual_interval_hops(network, flow).reach;
    let reach = (0..hop.len())
        .map(|start| {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> = hop[start].iter().copied().collect();
            while let Some(u) = stack.pop() {
                if seen.insert(u) {
                    stack.extend(hop[u].iter().copied().filter(|v| !seen.contains(v)));
                }
            }
            seen.remove(&start);
            seen
        })
        .collect();
    IntervalRelation { reach }
}

/// Active intervals whose sink edge is unsaturated in *some* maximum flow.
///
/// That is: the interval's own sink edge is unsaturated in `flow`, or it reaches
/// (in the residual sense above) an interval whose existing sink edge is
/// unsaturated. Computed by one backward search from the unsaturated sink
/// edges, so the answer does not depend on which maximum flow the solver chose.
pub fn subcritical_intervals(
    network: &FlowNetwork,
    flow: &Flow,
    active: &BTreeSet<usize>,
) -> BTreeSet<usize> {
    let m = network.num_intervals();
    let mut marked = vec![false; m];
    let mut job_seen = vec![false; network.num_jobs()];
    let mut queue = VecDeque::new();
    for i in 0..m {
        if let Some(cap) = network.sink_cap(i) {
            if flow.sink[i] < *cap {
                marked[i] = true;
                queue.push_back(i);
            }
        }
    }
    while let Some(target) = queue.pop_front() {
        for &k in network.edges_of_interval(target) {
            let e = &network.assign[k];
            if job_seen[e.job] || flow.assign[k] >= e.cap {
                continue;
            }
            job_seen[e.job] = true;
            for &k2 in network.edges_of_job(e.job) {
                let from = network.assign[k2].interval;
                if !marked[from] && flow.assign[k2].is_positive() {
                    marked[from] = true;
                    queue.push_back(from);
                }
            }
        }
    }
    active.iter().copied().filter(|&i| marked[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Instance, Job};
    use crate::rational::{q, ratio};

    fn nested_pair() -> ChargingProblem {
        ChargingProblem::new(
            Instance::new(vec![
                Job::new("1", q(0), q(3), q(2), q(2)),
                Job::new("2", q(1), q(2), q(2), q(2)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn limited_pair() -> ChargingProblem {
        ChargingProblem::new(
            Instance::new(vec![
                Job::new("1", q(0), q(2), q(2), q(1)),
                Job::new("2", q(1), q(2), q(2), q(2)),
            ])
            .unwrap(),
        )
        .unwrap()
    }

    fn all(m: usize) -> BTreeSet<usize> {
        (0..m).collect()
    }

    fn assign(net: &FlowNetwork, flow: &Flow, job: usize, interval: usize) -> Q {
        flow.get(net, EdgeRef::Assign { job, interval }).unwrap().clone()
    }

    #[test]
    fn nested_pair_construction() {
        let p = nested_pair();
        let g = vec![ratio(4, 3); 3];
        let net = build_network(&p, vec![q(2), q(2)], &g, &all(3)).unwrap();
        assert_eq!(net.num_nodes(), 7);
        assert_eq!(net.num_edges(), 9);
        assert_eq!(net.capacity(EdgeRef::Assign { job: 1, interval: 1 }), Some(&q(2)));
        assert_eq!(net.capacity(EdgeRef::Sink(1)), Some(&ratio(4, 3)));
        assert_eq!(net.capacity(EdgeRef::Assign { job: 1, interval: 0 }), None);
    }

    #[test]
    fn limited_pair_job_edges_are_energy_limits() {
        let p = limited_pair();
        let net = build_network(&p, vec![q(2), q(2)], &[q(2), q(2)], &all(2)).unwrap();
        assert_eq!(net.capacity(EdgeRef::Assign { job: 0, interval: 0 }), Some(&q(1)));
        assert_eq!(net.capacity(EdgeRef::Assign { job: 0, interval: 1 }), Some(&q(1)));
        assert_eq!(net.capacity(EdgeRef::Assign { job: 1, interval: 1 }), Some(&q(2)));
    }

    #[test]
    fn negative_capacity_rejected() {
        let p = limited_pair();
        let err = build_network(&p, vec![q(-1), q(2)], &[q(2), q(2)], &all(2)).unwrap_err();
        assert!(matches!(err, FlowError::NegativeCapacity { .. }));
        let err = build_network(&p, vec![q(1), q(2)], &[q(2), q(-2)], &all(2)).unwrap_err();
        assert!(matches!(err, FlowError::NegativeCapacity { .. }));
    }

    #[test]
    fn empty_mask_has_no_flow() {
        let p = nested_pair();
        let net = build_network(&p, vec![q(2), q(2)], &[q(5), q(5), q(5)], &BTreeSet::new()).unwrap();
        assert_eq!(net.num_edges(), 2 + 4);
        let f = max_flow(&net);
        assert!(f.value.is_zero());
        f.validate(&net).unwrap();
    }

    #[test]
    fn nested_pair_first_iteration_canonical_flow() {
        let p = nested_pair();
        let net = build_network(&p, vec![q(2), q(2)], &vec![ratio(4, 3); 3], &all(3)).unwrap();
        let f = max_flow(&net);
        f.validate(&net).unwrap();
        assert_eq!(f.value, ratio(10, 3));
        assert_eq!(assign(&net, &f, 0, 0), ratio(4, 3));
        assert_eq!(assign(&net, &f, 0, 1), q(0));
        assert_eq!(assign(&net, &f, 0, 2), ratio(2, 3));
        assert_eq!(assign(&net, &f, 1, 1), ratio(4, 3));

        assert!(is_saturated(&net, &f, EdgeRef::Sink(1)).unwrap());
        assert!(!is_saturated(&net, &f, EdgeRef::Sink(2)).unwrap());
        assert!(is_saturated(&net, &f, EdgeRef::Assign { job: 1, interval: 0 }).is_err());
        assert_eq!(subcritical_intervals(&net, &f, &all(3)), BTreeSet::from([0, 2]));
    }

    #[test]
    fn nested_pair_second_iteration_reaches_demand() {
        let p = nested_pair();
        let caps = [ratio(4, 3), q(2), ratio(4, 3)];
        let net = build_network(&p, vec![q(2), q(2)], &caps, &all(3)).unwrap();
        let f = max_flow(&net);
        assert_eq!(f.value, q(4));
        assert_eq!(assign(&net, &f, 1, 1), q(2));
        assert!(subcritical_intervals(&net, &f, &BTreeSet::from([1])).is_empty());
    }

    #[test]
    fn limited_pair_first_iteration() {
        let p = limited_pair();
        let net = build_network(&p, vec![q(2), q(2)], &[q(2), q(2)], &all(2)).unwrap();
        let f = max_flow(&net);
        assert_eq!(f.value, q(3));
        assert_eq!(f.sink[0], q(1));
        assert_eq!(subcritical_intervals(&net, &f, &all(2)), BTreeSet::from([0]));
    }

    #[test]
    fn saturation_edge_cases() {
        let p = limited_pair();
        let net = build_network(&p, vec![q(0), q(2)], &[q(0), q(2)], &all(2)).unwrap();
        let zero = Flow::zero(&net);
        assert!(is_saturated(&net, &zero, EdgeRef::Source(0)).unwrap());
        assert!(is_saturated(&net, &zero, EdgeRef::Sink(0)).unwrap());
        assert!(!is_saturated(&net, &zero, EdgeRef::Source(1)).unwrap());
    }

    #[test]
    fn reachability_on_optimal_schedules() {
        let p = nested_pair();
        let net = build_network(&p, vec![q(2), q(2)], &[q(1), q(2), q(1)], &all(3)).unwrap();
        let s = Schedule::from_entries(&p, [(0, 0, q(1)), (0, 2, q(1)), (1, 1, q(2))]).unwrap();
        let f = Flow::from_schedule(&net, &s);
        f.validate(&net).unwrap();
        let r = residual_interval_reachability(&net, &f);
        assert!(r.contains(0, 2));
        assert!(r.contains(2, 0));
        // job 1 has slack in I_2, so I_1 and I_3 can push into it; nothing leaves I_2
        assert!(r.reachable_from(1).is_empty());

        let p = limited_pair();
        let net = build_network(&p, vec![q(2), q(2)], &[q(1), q(3)], &all(2)).unwrap();
        let s = Schedule::from_entries(&p, [(0, 0, q(1)), (0, 1, q(1)), (1, 1, q(2))]).unwrap();
        let r = residual_interval_reachability(&net, &Flow::from_schedule(&net, &s));
        assert!(!r.contains(1, 0));
        assert!(!r.contains(0, 1));
    }

    #[test]
    fn zero_flow_reaches_nothing() {
        let p = nested_pair();
        let net = build_network(&p, vec![q(2), q(2)], &vec![q(1); 3], &all(3)).unwrap();
        assert!(residual_interval_reachability(&net, &Flow::zero(&net)).is_empty());
    }

    #[test]
    fn dot_output_mentions_every_edge() {
        let p = limited_pair();
        let net = build_network(&p, vec![q(2), q(2)], &[q(2), q(2)], &all(2)).unwrap();
        let dot = net.to_dot(Some(&max_flow(&net)));
        assert!(dot.contains("s -> j1"));
        assert!(dot.contains("j2 -> I2 [label=\"2/2\"]") || dot.contains("j2 -> I2 [label=\"1/2\"]"));
        assert!(dot.contains("I1 -> t [label=\"1/2\"]"));
    }
}
