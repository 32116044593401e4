//! The five conditions under which an ASYNC execution has a similar SSYNC
//! execution: stationarity, pairwise alignment, consistency,
//! serializability and naturality.
//!
//! Everything here reads a finished (core) trace. A missing `f(j-1)` for a
//! first cycle is `-inf`; a missing `s(j+1)` after the last materialized
//! cycle is `+inf`, and happened-before edges that rely on it are marked
//! open.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::engine::{CycleRecord, Trace};
use crate::geometry::{squared_distance, Point};
use crate::scheduling::CycleId;

pub const REPORT_SCHEMA: u32 = 1;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

fn rec(trace: &Trace, id: CycleId) -> &CycleRecord {
    &trace.records[id.robot][id.j - 1]
}

fn prev_f(trace: &Trace, id: CycleId) -> f64 {
    if id.j == 1 {
        f64::NEG_INFINITY
    } else {
        trace.records[id.robot][id.j - 2].cycle.f
    }
}

fn next_s(trace: &Trace, id: CycleId) -> Option<f64> {
    trace.records[id.robot].get(id.j).map(|r| r.cycle.s)
}

/// Both cycles' `[o, f]` intervals meet and the later-Looking robot sees the
/// earlier one (either direction when the Looks coincide).
pub fn cycles_overlap(trace: &Trace, a: CycleId, b: CycleId) -> bool {
    if a.robot == b.robot {
        return false;
    }
    let (ra, rb) = (rec(trace, a), rec(trace, b));
    let (ca, cb) = (&ra.cycle, &rb.cycle);
    if ca.o > cb.f || cb.o > ca.f {
        return false;
    }
    if ca.o < cb.o {
        rb.sees(a.robot)
    } else if cb.o < ca.o {
        ra.sees(b.robot)
    } else {
        ra.sees(b.robot) || rb.sees(a.robot)
    }
}

/// `a` Looks no later than `b`, after `b`'s previous Move, and `b` Looks
/// before `a`'s Move starts, with `a` seeing `b`.
fn concurrent_directed(trace: &Trace, a: CycleId, b: CycleId) -> bool {
    let (ra, rb) = (rec(trace, a), rec(trace, b));
    let (oa, ob) = (ra.cycle.o, rb.cycle.o);
    prev_f(trace, b) < oa && oa <= ob && ob <= ra.cycle.s && ra.sees(b.robot)
}

pub fn cycles_concurrent(trace: &Trace, a: CycleId, b: CycleId) -> bool {
    if a.robot == b.robot {
        return a.j == b.j;
    }
    concurrent_directed(trace, a, b) || concurrent_directed(trace, b, a)
}

/// A happened-before edge and the clause that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HbEdge {
    pub from: CycleId,
    pub to: CycleId,
    pub case: u8,
    /// Holds only because the bounding next cycle lies past the horizon.
    pub open: bool,
}

pub fn hb_edge(trace: &Trace, a: CycleId, b: CycleId) -> Option<HbEdge> {
    let edge = |case, open| {
        Some(HbEdge {
            from: a,
            to: b,
            case,
            open,
        })
    };
    if a.robot == b.robot {
        return if b.j == a.j + 1 { edge(1, false) } else { None };
    }
    let (ra, rb) = (rec(trace, a), rec(trace, b));
    let ob = rb.cycle.o;
    if rb.sees(a.robot) && ob > ra.cycle.f {
        match next_s(trace, a) {
            Some(s) if ob <= s => return edge(2, false),
            None => return edge(2, true),
            _ => {}
        }
    }
    if ra.sees(b.robot) && prev_f(trace, b) < ra.cycle.o && ra.cycle.f < ob {
        return edge(3, false);
    }
    None
}

pub fn happened_before(trace: &Trace, a: CycleId, b: CycleId) -> bool {
    hb_edge(trace, a, b).is_some()
}

pub fn cycle_ids(trace: &Trace) -> Vec<CycleId> {
    trace.all_records().map(CycleRecord::id).collect()
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

fn look_key(trace: &Trace, id: CycleId) -> (f64, CycleId) {
    (rec(trace, id).cycle.o, id)
}

fn cmp_look(trace: &Trace, a: CycleId, b: CycleId) -> std::cmp::Ordering {
    let (ta, ia) = look_key(trace, a);
    let (tb, ib) = look_key(trace, b);
    ta.total_cmp(&tb).then(ia.cmp(&ib))
}

/// Distinct-robot concurrent pairs, each once with the smaller id first.
pub fn concurrent_pairs(trace: &Trace) -> Vec<(CycleId, CycleId)> {
    let ids = cycle_ids(trace);
    let mut out = Vec::new();
    for (x, &a) in ids.iter().enumerate() {
        for &b in &ids[x + 1..] {
            if a.robot != b.robot && cycles_concurrent(trace, a, b) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Partition into classes of the transitive closure of concurrency. Members
/// are sorted by Look time; classes by their earliest Look, ties by id.
pub fn equivalence_classes(trace: &Trace) -> Vec<Vec<CycleId>> {
    classes_from_pairs(trace, &concurrent_pairs(trace))
}

fn classes_from_pairs(trace: &Trace, pairs: &[(CycleId, CycleId)]) -> Vec<Vec<CycleId>> {
    let ids = cycle_ids(trace);
    let offsets = offsets(trace);
    let idx = |c: CycleId| offsets[c.robot] + c.j - 1;
    let mut uf = UnionFind::new(ids.len());
    for &(a, b) in pairs {
        uf.union(idx(a), idx(b));
    }
    let mut groups: Vec<Vec<CycleId>> = vec![Vec::new(); ids.len()];
    for (k, &id) in ids.iter().enumerate() {
        let root = uf.find(k);
        groups[root].push(id);
    }
    let mut classes: Vec<Vec<CycleId>> = groups.into_iter().filter(|g| !g.is_empty()).collect();
    for c in &mut classes {
        c.sort_by(|&a, &b| cmp_look(trace, a, b));
    }
    classes.sort_by(|a, b| cmp_look(trace, a[0], b[0]));
    classes
}

fn offsets(trace: &Trace) -> Vec<usize> {
    let mut acc = 0;
    trace
        .records
        .iter()
        .map(|r| {
            let o = acc;
            acc += r.len();
            o
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEdge {
    pub from: usize,
    pub to: usize,
    /// Every supporting happened-before edge is open.
    pub open: bool,
}

/// Concurrency classes, happened-before edges and the class graph of a trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcurrencyAnalysis {
    pub concurrent_pairs: Vec<(CycleId, CycleId)>,
    pub classes: Vec<Vec<CycleId>>,
    /// `class_of[robot][j - 1]`.
    pub class_of: Vec<Vec<usize>>,
    pub hb_edges: Vec<HbEdge>,
    pub class_edges: Vec<ClassEdge>,
}

impl ConcurrencyAnalysis {
    pub fn new(trace: &Trace) -> Self {
        let concurrent_pairs = concurrent_pairs(trace);
        let classes = classes_from_pairs(trace, &concurrent_pairs);
        let mut class_of: Vec<Vec<usize>> = trace.records.iter().map(|r| vec![0; r.len()]).collect();
        for (k, c) in classes.iter().enumerate() {
            for id in c {
                class_of[id.robot][id.j - 1] = k;
            }
        }
        let ids = cycle_ids(trace);
        let mut hb_edges = Vec::new();
        for &a in &ids {
            for &b in &ids {
                if a != b {
                    if let Some(e) = hb_edge(trace, a, b) {
                        hb_edges.push(e);
                    }
                }
            }
        }
        let mut seen = std::collections::BTreeMap::new();
        for e in &hb_edges {
            let key = (class_of[e.from.robot][e.from.j - 1], class_of[e.to.robot][e.to.j - 1]);
            let open = seen.entry(key).or_insert(true);
            *open &= e.open;
        }
        let class_edges = seen
            .into_iter()
            .map(|((from, to), open)| ClassEdge { from, to, open })
            .collect();
        ConcurrencyAnalysis {
            concurrent_pairs,
            classes,
            class_of,
            hb_edges,
            class_edges,
        }
    }

    pub fn class(&self, id: CycleId) -> usize {
        self.class_of[id.robot][id.j - 1]
    }

    /// Successor lists of the class graph; open edges only when asked.
    pub fn successors(&self, with_open: bool) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes.len()];
        for e in &self.class_edges {
            if with_open || !e.open {
                out[e.from].push(e.to);
            }
        }
        out
    }
}

/// A directed cycle in a graph given by successor lists, if any.
pub fn find_cycle(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = succ.len();
    let mut mark = vec![Mark::New; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // iterative DFS: (node, next successor position)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let start = stack.iter().position(|&(u, _)| u == w).unwrap();
                        return Some(stack[start..].iter().map(|&(u, _)| u).collect());
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    OpenAtHorizon,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub cycles: Vec<CycleId>,
    pub clause: String,
}

impl Witness {
    fn new(cycles: Vec<CycleId>, clause: impl Into<String>) -> Self {
        Witness {
            cycles,
            clause: clause.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub status: Status,
    pub witnesses: Vec<Witness>,
}

impl CheckResult {
    fn from_witnesses(witnesses: Vec<Witness>) -> Self {
        let status = if witnesses.is_empty() { Status::Pass } else { Status::Fail };
        CheckResult { status, witnesses }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Looks that land strictly inside the Move of a robot they see.
pub fn check_stationary(trace: &Trace) -> CheckResult {
    let mut w = Vec::new();
    for r in trace.all_records() {
        let t = r.cycle.o;
        for &other in &r.visible_set {
            if other == r.cycle.robot {
                continue;
            }
            let recs = &trace.records[other];
            let k = recs.partition_point(|m| m.cycle.s < t);
            if k > 0 && t < recs[k - 1].cycle.f {
                w.push(Witness::new(vec![r.id(), recs[k - 1].id()], "look inside a visible move"));
            }
        }
    }
    CheckResult::from_witnesses(w)
}

/// Overlapping pairs that are not concurrent.
pub fn check_pairwise_aligned(trace: &Trace) -> CheckResult {
    let ids = cycle_ids(trace);
    let mut w = Vec::new();
    for (x, &a) in ids.iter().enumerate() {
        for &b in &ids[x + 1..] {
            if cycles_overlap(trace, a, b) && !cycles_concurrent(trace, a, b) {
                let (first, second) = if cmp_look(trace, a, b).is_le() { (a, b) } else { (b, a) };
                w.push(Witness::new(vec![first, second], "overlap without concurrency"));
            }
        }
    }
    CheckResult::from_witnesses(w)
}

/// The three clauses over every pair within a class, same-robot pairs
/// included.
pub fn check_consistent(trace: &Trace, classes: &[Vec<CycleId>]) -> CheckResult {
    let mut w = Vec::new();
    for class in classes {
        let mut members = class.clone();
        members.sort();
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                let (ra, rb) = (rec(trace, a), rec(trace, b));
                let (ab, ba) = (ra.sees(b.robot), rb.sees(a.robot));
                if ab != ba {
                    w.push(Witness::new(vec![a, b], "1: visibility is not mutual"));
                } else if ab {
                    if !cycles_concurrent(trace, a, b) {
                        w.push(Witness::new(vec![a, b], "2: mutually visible but not concurrent"));
                    }
                } else if squared_distance(ra.pos_at_look, rb.pos_at_look) <= 1.0 {
                    w.push(Witness::new(vec![a, b], "3: invisible pair within unit distance"));
                }
            }
        }
    }
    CheckResult::from_witnesses(w)
}

/// Acyclicity of the class graph. Open edges alone closing a cycle give
/// `OpenAtHorizon`.
pub fn check_serializable(analysis: &ConcurrencyAnalysis) -> CheckResult {
    let cycle_witness = |cyc: Vec<usize>| {
        let cycles = cyc.iter().map(|&k| analysis.classes[k][0]).collect();
        Witness::new(cycles, format!("class cycle {cyc:?}"))
    };
    if let Some(c) = find_cycle(&analysis.successors(false)) {
        return CheckResult {
            status: Status::Fail,
            witnesses: vec![cycle_witness(c)],
        };
    }
    match find_cycle(&analysis.successors(true)) {
        None => CheckResult::from_witnesses(Vec::new()),
        Some(c) => CheckResult {
            status: Status::OpenAtHorizon,
            witnesses: vec![cycle_witness(c)],
        },
    }
}

/// How a backtracking enumeration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search {
    /// The visitor asked to stop.
    Stopped,
    Exhausted,
    OverBudget,
}

/// Depth-first enumeration of topological orders. Available classes are
/// tried in index order; `admit(order, k)` may prune placing `k` next, and
/// `visit` receives every complete order and returns `true` to stop.
pub fn enumerate_orders(
    succ: &[Vec<usize>],
    budget: u64,
    admit: &mut dyn FnMut(&[usize], usize) -> bool,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> Search {
    struct St<'a> {
        succ: &'a [Vec<usize>],
        indeg: Vec<usize>,
        order: Vec<usize>,
        placed: Vec<bool>,
        nodes: u64,
        budget: u64,
    }
    fn go(
        st: &mut St<'_>,
        admit: &mut dyn FnMut(&[usize], usize) -> bool,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> Option<Search> {
        let n = st.succ.len();
        if st.order.len() == n {
            return visit(&st.order).then_some(Search::Stopped);
        }
        for k in 0..n {
            if st.placed[k] || st.indeg[k] != 0 {
                continue;
            }
            st.nodes += 1;
            if st.nodes > st.budget {
                return Some(Search::OverBudget);
            }
            if !admit(&st.order, k) {
                continue;
            }
            st.placed[k] = true;
            st.order.push(k);
            for &w in &st.succ[k] {
                st.indeg[w] -= 1;
            }
            let r = go(st, admit, visit);
            for &w in &st.succ[k] {
                st.indeg[w] += 1;
            }
            st.order.pop();
            st.placed[k] = false;
            if r.is_some() {
                return r;
            }
        }
        None
    }
    let n = succ.len();
    let mut indeg = vec![0; n];
    for s in succ {
        for &w in s {
            indeg[w] += 1;
        }
    }
    let mut st = St {
        succ,
        indeg,
        order: Vec::with_capacity(n),
        placed: vec![false; n],
        nodes: 0,
        budget,
    };
    go(&mut st, admit, visit).unwrap_or(Search::Exhausted)
}

/// Naturality of placing `class` right after the classes already placed:
/// every cycle in it is compared with the next unplaced cycle of each robot
/// outside the class. Returns the first violated pair.
fn naturality_violation(
    trace: &Trace,
    class: &[CycleId],
    next: &[usize],
) -> Option<Witness> {
    let members: HashSet<usize> = class.iter().map(|c| c.robot).collect();
    for &id in class {
        let r = rec(trace, id);
        for other in 0..trace.num_robots() {
            if members.contains(&other) {
                continue;
            }
            let jn = next[other];
            let nxt = trace.records[other].get(jn - 1);
            let (o_next, pos_next): (f64, Point) = match nxt {
                Some(m) => (m.cycle.o, m.pos_at_look),
                None => (f64::INFINITY, trace.final_position(other)),
            };
            let cyc = vec![id, CycleId::new(other, jn)];
            if r.sees(other) {
                if r.cycle.o >= o_next {
                    return Some(Witness::new(cyc, "1: seen robot's next Look is not later"));
                }
            } else if squared_distance(r.pos_at_look, pos_next) <= 1.0 {
                return Some(Witness::new(cyc, "2: unseen robot's next position within unit distance"));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NaturalSort {
    Found(Vec<usize>),
    /// No topological order is natural; the first violation met on the way.
    NoneExists(Option<Witness>),
    Inconclusive,
}

/// Backtracking search for a natural topological order of the class graph.
pub fn find_natural_sort(trace: &Trace, analysis: &ConcurrencyAnalysis, with_open: bool, budget: u64) -> NaturalSort {
    let succ = analysis.successors(with_open);
    if find_cycle(&succ).is_some() {
        return NaturalSort::NoneExists(None);
    }
    let mut first_violation: Option<Witness> = None;
    let mut found = None;
    let mut admit = |order: &[usize], k: usize| {
        let mut next = vec![1usize; trace.num_robots()];
        for &p in order {
            for id in &analysis.classes[p] {
                next[id.robot] = next[id.robot].max(id.j + 1);
            }
        }
        match naturality_violation(trace, &analysis.classes[k], &next) {
            None => true,
            Some(w) => {
                first_violation.get_or_insert(w);
                false
            }
        }
    };
    let mut visit = |order: &[usize]| {
        found = Some(order.to_vec());
        true
    };
    match enumerate_orders(&succ, budget, &mut admit, &mut visit) {
        Search::Stopped => NaturalSort::Found(found.unwrap()),
        Search::Exhausted => NaturalSort::NoneExists(first_violation),
        Search::OverBudget => NaturalSort::Inconclusive,
    }
}

/// Whether `order` is a natural topological order.
pub fn is_natural_order(trace: &Trace, analysis: &ConcurrencyAnalysis, order: &[usize]) -> bool {
    let mut pos = vec![usize::MAX; analysis.classes.len()];
    for (p, &k) in order.iter().enumerate() {
        if k >= pos.len() || pos[k] != usize::MAX {
            return false;
        }
        pos[k] = p;
    }
    if pos.contains(&usize::MAX) {
        return false;
    }
    if analysis.class_edges.iter().any(|e| pos[e.from] >= pos[e.to]) {
        return false;
    }
    let mut next = vec![1usize; trace.num_robots()];
    for &k in order {
        if naturality_violation(trace, &analysis.classes[k], &next).is_some() {
            return false;
        }
        for id in &analysis.classes[k] {
            next[id.robot] = next[id.robot].max(id.j + 1);
        }
    }
    true
}

/// Violation counts of the propositions that follow from the conditions.
/// `None` when the premises do not hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionReport {
    /// Classes holding two cycles of one robot (stationary, aligned, consistent).
    pub same_robot_in_class: Option<usize>,
    /// Happened-before pairs inside one class (same premises).
    pub hb_within_class: Option<usize>,
    /// Classes with more than one cycle per robot (adding serializable).
    pub multiple_cycles_per_robot: Option<usize>,
    /// Happened-before pairs that are also concurrent (always checked).
    pub hb_and_concurrent: usize,
}

fn same_robot_classes(classes: &[Vec<CycleId>]) -> usize {
    classes
        .iter()
        .filter(|c| {
            let robots: HashSet<usize> = c.iter().map(|id| id.robot).collect();
            robots.len() != c.len()
        })
        .count()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionReport {
    pub schema: u32,
    pub stationary: CheckResult,
    pub pairwise_aligned: CheckResult,
    pub consistent: CheckResult,
    pub serializable: CheckResult,
    pub natural: CheckResult,
    /// Class indices in the natural order found, if any.
    pub natural_order: Option<Vec<usize>>,
    pub classes: Vec<Vec<CycleId>>,
    pub class_edges: Vec<ClassEdge>,
    pub propositions: PropositionReport,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        [
            &self.stationary,
            &self.pairwise_aligned,
            &self.consistent,
            &self.serializable,
            &self.natural,
        ]
        .iter()
        .all(|c| c.passed())
    }

    pub fn first_failure(&self) -> Option<(&'static str, &CheckResult)> {
        [
            ("stationary", &self.stationary),
            ("pairwise_aligned", &self.pairwise_aligned),
            ("consistent", &self.consistent),
            ("serializable", &self.serializable),
            ("natural", &self.natural),
        ]
        .into_iter()
        .find(|(_, c)| !c.passed())
    }
}

pub fn check_all(trace: &Trace) -> ConditionReport {
    check_all_with_budget(trace, DEFAULT_BUDGET)
}

pub fn check_all_with_budget(trace: &Trace, budget: u64) -> ConditionReport {
    let analysis = ConcurrencyAnalysis::new(trace);
    check_all_with_analysis(trace, &analysis, budget)
}

pub fn check_all_with_analysis(trace: &Trace, analysis: &ConcurrencyAnalysis, budget: u64) -> ConditionReport {
    let stationary = check_stationary(trace);
    let pairwise_aligned = check_pairwise_aligned(trace);
    let consistent = check_consistent(trace, &analysis.classes);
    let serializable = check_serializable(analysis);

    let (natural, natural_order) = match serializable.status {
        Status::Fail => (
            CheckResult {
                status: Status::Fail,
                witnesses: vec![Witness::new(Vec::new(), "no topological order: class graph is cyclic")],
            },
            None,
        ),
        st => {
            let with_open = st == Status::Pass;
            match find_natural_sort(trace, analysis, with_open, budget) {
                NaturalSort::Found(order) => (CheckResult::from_witnesses(Vec::new()), Some(order)),
                NaturalSort::NoneExists(w) => (
                    CheckResult {
                        status: Status::Fail,
                        witnesses: vec![w.unwrap_or_else(|| Witness::new(Vec::new(), "no natural order"))],
                    },
                    None,
                ),
                NaturalSort::Inconclusive => (
                    CheckResult {
                        status: Status::Inconclusive,
                        witnesses: Vec::new(),
                    },
                    None,
                ),
            }
        }
    };

    let first_three = stationary.passed() && pairwise_aligned.passed() && consistent.passed();
    let hb_within = analysis
        .hb_edges
        .iter()
        .filter(|e| analysis.class(e.from) == analysis.class(e.to))
        .count();
    let hb_and_concurrent = analysis
        .hb_edges
        .iter()
        .filter(|e| cycles_concurrent(trace, e.from, e.to))
        .count();
    let same_robot = same_robot_classes(&analysis.classes);
    let propositions = PropositionReport {
        same_robot_in_class: first_three.then_some(same_robot),
        hb_within_class: first_three.then_some(hb_within),
        multiple_cycles_per_robot: (first_three && serializable.passed()).then_some(same_robot),
        hb_and_concurrent,
    };

    ConditionReport {
        schema: REPORT_SCHEMA,
        stationary,
        pairwise_aligned,
        consistent,
        serializable,
        natural,
        natural_order,
        classes: analysis.classes.clone(),
        class_edges: analysis.class_edges.clone(),
        propositions,
    }
}
