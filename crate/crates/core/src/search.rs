//! Exhaustive search for the longest sequences that avoid zero-sum
//! subsequences with lengths in `L`, giving `s_L(G)` for small groups.
//!
//! Sequences are enumerated as nondecreasing index paths. Each node keeps
//! bitsets `R_c = {σ(T) : T | S, |T| = c}` for `c < max L`; a candidate `g`
//! closes a forbidden zero-sum iff `−g ∈ R_c` for some `c + 1 ∈ L`. When
//! `L` is every positive length the layers collapse to `Σ(S) ∪ {0}`.
//! Nodes that are not the least member of their automorphism orbit are cut;
//! any prefix of a least sorted multiset is itself least, so this is sound at
//! every depth.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::dp::ZeroSumDp;
use crate::error::{Error, Result};
use crate::group::{GroupSpec, Indexer};
use crate::lengths::LengthSet;
use crate::sequence::Sequence;
use crate::symmetry::{Entry, Symmetry};

pub const DEFAULT_MAX_ORDER: u64 = 1000;
const CHECKPOINT_HEADER: &str = "zerosum-search-checkpoint v1";

/// Depths at which orbit pruning is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pruning {
    Off,
    /// Only nodes of depth `≤ k`.
    UpTo(usize),
    All,
    /// Up to the split depth, and below it wherever at least
    /// [`AUTO_MARGIN`] more levels are known to be reachable.
    Auto,
}

/// Deep nodes have small subtrees, where an orbit test costs more than the
/// duplicates it removes.
pub const AUTO_MARGIN: usize = 5;

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub budget_nodes: Option<u64>,
    pub budget_time: Option<Duration>,
    pub workers: usize,
    pub pruning: Pruning,
    /// Depth of the prefixes handed out as independent tasks.
    pub split_depth: usize,
    pub checkpoint: Option<PathBuf>,
    pub checkpoint_interval: Duration,
    pub max_order: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget_nodes: None,
            budget_time: None,
            workers: 1,
            pruning: Pruning::Auto,
            split_depth: 3,
            checkpoint: None,
            checkpoint_interval: Duration::from_secs(10),
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

impl SearchConfig {
    pub fn with_nodes(mut self, n: u64) -> Self {
        self.budget_nodes = Some(n);
        self
    }

    pub fn with_time(mut self, t: Duration) -> Self {
        self.budget_time = Some(t);
        self
    }

    pub fn with_workers(mut self, w: usize) -> Self {
        self.workers = w.max(1);
        self
    }

    pub fn with_pruning(mut self, p: Pruning) -> Self {
        self.pruning = p;
        self
    }

    pub fn with_checkpoint(mut self, path: impl Into<PathBuf>) -> Self {
        self.checkpoint = Some(path.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Exhaustive,
    LowerBoundOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtremalCertificate {
    pub group: GroupSpec,
    pub avoided_lengths: LengthSet,
    #[serde(serialize_with = "inline_seq")]
    pub witness: Sequence,
    pub witness_length: u64,
    pub status: Status,
    pub nodes_explored: u64,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

fn inline_seq<S: serde::Serializer>(seq: &Sequence, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&seq.to_inline())
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

/// `s_L(G)` exactly, or the sound lower bound `witness_length + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantValue {
    pub value: Option<u64>,
    pub lower_bound: u64,
    pub exact: bool,
    pub certificate: ExtremalCertificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UpperBoundCertificate {
    pub group: GroupSpec,
    pub avoided_lengths: LengthSet,
    pub length: u64,
    pub verdict: Verdict,
    #[serde(serialize_with = "inline_opt")]
    pub counterexample: Option<Sequence>,
    pub nodes_explored: u64,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

fn inline_opt<S: serde::Serializer>(seq: &Option<Sequence>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match seq {
        Some(q) => s.serialize_some(&q.to_inline()),
        None => s.serialize_none(),
    }
}

/// Longest sequence over `G` with no zero-sum subsequence of length in `L`.
pub fn max_avoiding(group: &GroupSpec, lengths: &LengthSet, cfg: &SearchConfig) -> Result<ExtremalCertificate> {
    let out = run(group, lengths, cfg, None)?;
    Ok(out.certificate)
}

pub fn compute_s_l(group: &GroupSpec, lengths: &LengthSet, cfg: &SearchConfig) -> Result<InvariantValue> {
    let cert = max_avoiding(group, lengths, cfg)?;
    let bound = cert.witness_length + 1;
    let exact = cert.status == Status::Exhaustive;
    Ok(InvariantValue {
        value: exact.then_some(bound),
        lower_bound: bound,
        exact,
        certificate: cert,
    })
}

/// Decides whether every sequence of length `len` has a zero-sum subsequence
/// with length in `L`, i.e. `s_L(G) ≤ len`.
pub fn verify_upper_bound(
    group: &GroupSpec,
    lengths: &LengthSet,
    len: u64,
    cfg: &SearchConfig,
) -> Result<UpperBoundCertificate> {
    if len == 0 {
        return Err(Error::Precondition("length must be at least 1".into()));
    }
    let out = run(group, lengths, cfg, Some(len as usize))?;
    let c = out.certificate;
    let verdict = if c.witness_length >= len {
        Verdict::Refuted
    } else if c.status == Status::Exhaustive {
        Verdict::Confirmed
    } else {
        Verdict::Inconclusive
    };
    Ok(UpperBoundCertificate {
        group: c.group,
        avoided_lengths: c.avoided_lengths,
        length: len,
        counterexample: (verdict == Verdict::Refuted).then_some(c.witness),
        verdict,
        nodes_explored: c.nodes_explored,
        elapsed: c.elapsed,
    })
}

struct RunOutput {
    certificate: ExtremalCertificate,
}

/// Bitset layout of one reachability layer.
enum Layout {
    /// One `u64` per coset of the last cyclic factor (`exp(G) ≤ 64`):
    /// translating permutes the rows and rotates each row.
    Rows {
        width: usize,
        mask: u64,
        /// `row_trans[r·rows + i]`: row of `i` shifted by row part `r`.
        row_trans: Vec<u32>,
    },
    /// Plain bitset with an explicit translation table.
    Bits { trans: Vec<u32> },
}

/// Read-only tables shared by all workers.
struct Tables {
    order: usize,
    /// `u64` words per layer.
    words: usize,
    layout: Layout,
    /// Number of reachability layers (1 when collapsed).
    layers: usize,
    collapsed: bool,
    /// `forbid[c]`: a zero-sum of size `c + 1` is not allowed.
    forbid: Vec<bool>,
    /// Word and bit holding `−g`.
    neg_pos: Vec<(u32, u32)>,
    depth_cap: usize,
    pruning: Pruning,
    split_depth: usize,
    /// Length of the greedy path, a cheap deterministic depth estimate.
    hint: usize,
}

impl Tables {
    fn new(group: &GroupSpec, lengths: &LengthSet, depth_cap: Option<usize>, cfg: &SearchConfig) -> Self {
        let ix = Indexer::new(group);
        let order = ix.order();
        let (collapsed, layers, forbid) = match lengths {
            LengthSet::AllPositive => (true, 1, vec![true]),
            LengthSet::Finite(set) => {
                let max = *set.iter().next_back().unwrap();
                let forbid = (0..max).map(|c| set.contains(&(c + 1))).collect();
                (false, max, forbid)
            }
        };
        let width = group.exponent() as usize;
        let (layout, words) = if width <= 64 {
            let rows = order / width;
            let mut row_trans = Vec::with_capacity(rows * rows);
            for r in 0..rows {
                row_trans.extend((0..rows).map(|i| (ix.add(i * width, r * width) / width) as u32));
            }
            let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            (Layout::Rows { width, mask, row_trans }, rows)
        } else {
            let mut trans = Vec::with_capacity(order * order);
            for g in 0..order {
                trans.extend(ix.translation(g));
            }
            (Layout::Bits { trans }, order.div_ceil(64))
        };
        let neg_pos = (0..order)
            .map(|g| {
                let e = ix.neg(g);
                match layout {
                    Layout::Rows { width, .. } => ((e / width) as u32, (e % width) as u32),
                    Layout::Bits { .. } => ((e >> 6) as u32, (e & 63) as u32),
                }
            })
            .collect();
        // each step grows Σ(S) ∪ {0} when all lengths are avoided
        let natural_cap = if collapsed { order - 1 } else { usize::MAX };
        Tables {
            order,
            words,
            layout,
            layers,
            collapsed,
            forbid,
            neg_pos,
            depth_cap: depth_cap.unwrap_or(usize::MAX).min(natural_cap),
            pruning: cfg.pruning,
            split_depth: cfg.split_depth,
            hint: 0,
        }
    }

    fn frame(&self) -> usize {
        self.layers * self.words
    }

    fn root(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.frame()];
        v[0] = 1;
        v
    }

    /// Whether `−g` lies in `bits`.
    #[inline]
    fn has_neg(&self, bits: &[u64], g: usize) -> bool {
        let (w, b) = self.neg_pos[g];
        bits[w as usize] >> b & 1 == 1
    }

    /// `dst ∪= src + g` over one layer.
    #[inline]
    fn shift_or(&self, dst: &mut [u64], src: &[u64], g: usize) {
        match &self.layout {
            Layout::Rows { width, mask, row_trans } => {
                let rows = self.words;
                let (gr, k) = (g / width, (g % width) as u32);
                let rt = &row_trans[gr * rows..(gr + 1) * rows];
                for (i, &x) in src.iter().enumerate() {
                    if x != 0 {
                        let y = if k == 0 {
                            x
                        } else {
                            ((x << k) | (x >> (*width as u32 - k))) & mask
                        };
                        dst[rt[i] as usize] |= y;
                    }
                }
            }
            Layout::Bits { trans } => {
                let t = &trans[g * self.order..(g + 1) * self.order];
                for (w, &word) in src.iter().enumerate() {
                    let mut word = word;
                    while word != 0 {
                        let b = word.trailing_zeros() as usize;
                        word &= word - 1;
                        let y = t[(w << 6) | b] as usize;
                        dst[y >> 6] |= 1 << (y & 63);
                    }
                }
            }
        }
    }

    /// Union of the layers that would close a forbidden zero-sum.
    fn forbidden(&self, frame: &[u64], out: &mut [u64]) {
        out.fill(0);
        for c in 0..self.layers {
            if self.forbid[c] {
                let layer = &frame[c * self.words..(c + 1) * self.words];
                for (o, &x) in out.iter_mut().zip(layer) {
                    *o |= x;
                }
            }
        }
    }

    fn child(&self, parent: &[u64], g: usize, out: &mut [u64]) {
        out.copy_from_slice(parent);
        if self.collapsed {
            self.shift_or(out, parent, g);
        } else {
            let w = self.words;
            for c in 1..self.layers {
                self.shift_or(&mut out[c * w..(c + 1) * w], &parent[(c - 1) * w..c * w], g);
            }
        }
    }

    fn prune_at(&self, depth: usize, best: usize) -> bool {
        match self.pruning {
            Pruning::Off => false,
            Pruning::UpTo(k) => depth <= k,
            Pruning::All => true,
            Pruning::Auto => depth <= self.split_depth + 1 || depth + AUTO_MARGIN <= best.max(self.hint),
        }
    }
}

/// Shared limits; the search stops once any is hit.
struct Limits {
    nodes: AtomicU64,
    budget_nodes: u64,
    deadline: Option<Instant>,
    aborted: AtomicBool,
    /// Stop as soon as a path of this length is found.
    target: Option<usize>,
    found_target: AtomicBool,
    /// Nodes a walker accumulates before touching the shared counter.
    granularity: u64,
}

impl Limits {
    fn new(budget_nodes: Option<u64>, deadline: Option<Instant>, target: Option<usize>) -> Self {
        let budget = budget_nodes.unwrap_or(u64::MAX);
        Limits {
            nodes: AtomicU64::new(0),
            budget_nodes: budget,
            deadline,
            aborted: AtomicBool::new(false),
            target,
            found_target: AtomicBool::new(false),
            granularity: (budget / 1024).clamp(1, 4096),
        }
    }

    fn stop(&self) -> bool {
        self.aborted.load(AtomicOrdering::Relaxed) || self.found_target.load(AtomicOrdering::Relaxed)
    }

    fn charge(&self, n: u64) -> bool {
        let total = self.nodes.fetch_add(n, AtomicOrdering::Relaxed) + n;
        let over_time = self.deadline.is_some_and(|d| Instant::now() >= d);
        if total > self.budget_nodes || over_time {
            self.aborted.store(true, AtomicOrdering::Relaxed);
        }
        !self.stop()
    }
}

/// Per-worker DFS state.
struct Walker<'a> {
    t: &'a Tables,
    limits: &'a Limits,
    sym: Symmetry,
    stack: Vec<u64>,
    scratch: Vec<u64>,
    /// Admissible extensions per depth.
    cands: Vec<Vec<u32>>,
    path: Vec<u32>,
    entries: Vec<Entry>,
    best: Vec<u32>,
    pending_nodes: u64,
    /// Collected prefixes instead of descending past this depth.
    frontier_depth: Option<usize>,
    frontier: Vec<Vec<u32>>,
}

impl<'a> Walker<'a> {
    fn new(t: &'a Tables, limits: &'a Limits, sym: Symmetry) -> Self {
        Walker {
            t,
            limits,
            sym,
            stack: Vec::new(),
            scratch: vec![0; t.words],
            cands: Vec::new(),
            path: Vec::new(),
            entries: Vec::new(),
            best: Vec::new(),
            pending_nodes: 0,
            frontier_depth: None,
            frontier: Vec::new(),
        }
    }

    fn frame_range(&self, depth: usize) -> std::ops::Range<usize> {
        let f = self.t.frame();
        depth * f..(depth + 1) * f
    }

    fn ensure_depth(&mut self, depth: usize) {
        let need = (depth + 1) * self.t.frame();
        if self.stack.len() < need {
            self.stack.resize(need, 0);
        }
    }

    fn push_element(&mut self, g: u32) {
        self.path.push(g);
        match self.entries.last_mut() {
            Some(e) if e.0 == g => e.1 += 1,
            _ => self.entries.push((g, 1)),
        }
    }

    fn pop_element(&mut self) {
        self.path.pop();
        let last = self.entries.last_mut().unwrap();
        last.1 -= 1;
        if last.1 == 0 {
            self.entries.pop();
        }
    }

    fn record(&mut self) {
        if self.path.len() > self.best.len() {
            self.best.clone_from(&self.path);
            if self.limits.target.is_some_and(|t| self.path.len() >= t) {
                self.limits.found_target.store(true, AtomicOrdering::Relaxed);
            }
        }
    }

    /// Replays `prefix` from the root; false if some step is not admissible.
    fn load_prefix(&mut self, prefix: &[u32]) -> bool {
        self.path.clear();
        self.entries.clear();
        self.ensure_depth(0);
        let root = self.t.root();
        let r = self.frame_range(0);
        self.stack[r].copy_from_slice(&root);
        for (d, &g) in prefix.iter().enumerate() {
            if !self.admissible(d, g) {
                return false;
            }
            self.ensure_depth(d + 1);
            let (lo, hi) = self.stack.split_at_mut((d + 1) * self.t.frame());
            self.t.child(&lo[d * self.t.frame()..], g as usize, &mut hi[..self.t.frame()]);
            self.push_element(g);
        }
        true
    }

    fn admissible(&mut self, depth: usize, g: u32) -> bool {
        let f = self.frame_range(depth);
        let mut forb = std::mem::take(&mut self.scratch);
        self.t.forbidden(&self.stack[f], &mut forb);
        let ok = !self.t.has_neg(&forb, g as usize);
        self.scratch = forb;
        ok
    }

    /// DFS below the current path. Returns false when stopped early.
    fn explore(&mut self) -> bool {
        let depth = self.path.len();
        self.record();
        if depth >= self.t.depth_cap {
            return true;
        }
        if self.frontier_depth == Some(depth) {
            self.frontier.push(self.path.clone());
            return true;
        }
        self.ensure_depth(depth + 1);
        let frame = self.t.frame();
        if self.cands.len() <= depth {
            self.cands.resize_with(depth + 1, Vec::new);
        }
        let mut cands = std::mem::take(&mut self.cands[depth]);
        cands.clear();
        self.t.forbidden(&self.stack[depth * frame..(depth + 1) * frame], &mut self.scratch);
        let start = self.path.last().copied().unwrap_or(0) as usize;
        cands.extend((start..self.t.order).filter(|&g| !self.t.has_neg(&self.scratch, g)).map(|g| g as u32));
        let mut cont = true;
        for &g in &cands {
            self.push_element(g);
            if self.t.prune_at(depth + 1, self.best.len()) && !self.sym.is_canonical(&self.entries) {
                self.pop_element();
                continue;
            }
            self.pending_nodes += 1;
            if self.pending_nodes >= self.limits.granularity {
                let n = std::mem::take(&mut self.pending_nodes);
                if !self.limits.charge(n) {
                    self.pop_element();
                    cont = false;
                    break;
                }
            }
            {
                let (lo, hi) = self.stack.split_at_mut((depth + 1) * frame);
                self.t.child(&lo[depth * frame..], g as usize, &mut hi[..frame]);
            }
            cont = self.explore();
            self.pop_element();
            if !cont || self.limits.stop() {
                cont = false;
                break;
            }
        }
        self.cands[depth] = cands;
        cont
    }

    fn flush(&mut self) -> bool {
        let n = std::mem::take(&mut self.pending_nodes);
        self.limits.charge(n)
    }
}

/// State that survives a checkpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Progress {
    group: GroupSpec,
    lengths: LengthSet,
    depth_cap: Option<usize>,
    nodes: u64,
    best: Vec<u32>,
    pending: Vec<Vec<u32>>,
}

fn better(a: &[u32], b: &[u32]) -> bool {
    a.len() > b.len() || (a.len() == b.len() && a < b)
}

fn run(group: &GroupSpec, lengths: &LengthSet, cfg: &SearchConfig, depth_cap: Option<usize>) -> Result<RunOutput> {
    let started = Instant::now();
    validate(group, lengths, cfg, depth_cap.is_some())?;
    let tables = Tables::new(group, lengths, depth_cap, cfg);
    let mut tables = tables;
    tables.hint = greedy_length(&tables);
    let limits = Limits::new(cfg.budget_nodes, cfg.budget_time.map(|t| started + t), depth_cap);
    let sym = Symmetry::for_group(group);

    let resumed = match &cfg.checkpoint {
        Some(path) if path.exists() => {
            let p = load_checkpoint(path)?;
            if p.group != *group || p.lengths != *lengths || p.depth_cap != depth_cap {
                return Err(Error::Checkpoint(format!(
                    "{} belongs to a different search ({} avoiding {})",
                    path.display(),
                    p.group,
                    p.lengths
                )));
            }
            Some(p)
        }
        _ => None,
    };

    let mut progress = match resumed {
        Some(p) => {
            limits.nodes.store(p.nodes, AtomicOrdering::Relaxed);
            p
        }
        None => {
            // the frontier must be complete, so it is built without budgets
            let unlimited = Limits::new(None, None, depth_cap);
            let mut w = Walker::new(&tables, &unlimited, sym.clone());
            w.frontier_depth = Some(cfg.split_depth);
            w.load_prefix(&[]);
            w.explore();
            w.flush();
            if unlimited.found_target.load(AtomicOrdering::Relaxed) {
                limits.found_target.store(true, AtomicOrdering::Relaxed);
            }
            limits.charge(unlimited.nodes.load(AtomicOrdering::Relaxed));
            Progress {
                group: group.clone(),
                lengths: lengths.clone(),
                depth_cap,
                nodes: limits.nodes.load(AtomicOrdering::Relaxed),
                best: std::mem::take(&mut w.best),
                pending: std::mem::take(&mut w.frontier),
            }
        }
    };

    if !limits.stop() && !progress.pending.is_empty() {
        let shared = Mutex::new((progress.clone(), vec![false; progress.pending.len()], Instant::now()));
        let tasks: Vec<(usize, Vec<u32>)> = progress.pending.iter().cloned().enumerate().collect();
        let solve = |(i, prefix): &(usize, Vec<u32>)| {
            if limits.stop() {
                return;
            }
            let mut w = Walker::new(&tables, &limits, sym.clone());
            let ok = w.load_prefix(prefix);
            debug_assert!(ok, "frontier prefixes are admissible");
            let finished = w.explore() & w.flush();
            let mut guard = shared.lock().unwrap();
            let (state, done, last_write) = &mut *guard;
            if better(&w.best, &state.best) {
                state.best = std::mem::take(&mut w.best);
            }
            if finished {
                done[*i] = true;
            }
            if let Some(path) = &cfg.checkpoint {
                if last_write.elapsed() >= cfg.checkpoint_interval {
                    let mut snapshot = state.clone();
                    snapshot.nodes = limits.nodes.load(AtomicOrdering::Relaxed);
                    snapshot.pending = pending_of(&state.pending, done);
                    // a failed write only loses resumability
                    let _ = save_checkpoint(path, &snapshot);
                    *last_write = Instant::now();
                }
            }
        };
        if cfg.workers <= 1 {
            tasks.iter().for_each(solve);
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
            pool.install(|| tasks.par_iter().with_max_len(1).for_each(solve));
        }
        let (state, done, _) = shared.into_inner().unwrap();
        progress.best = state.best;
        progress.pending = pending_of(&progress.pending, &done);
    }
    progress.nodes = limits.nodes.load(AtomicOrdering::Relaxed);

    let aborted = limits.aborted.load(AtomicOrdering::Relaxed);
    let status = if !aborted && progress.pending.is_empty() || limits.found_target.load(AtomicOrdering::Relaxed) {
        Status::Exhaustive
    } else {
        Status::LowerBoundOnly
    };
    if let Some(path) = &cfg.checkpoint {
        save_checkpoint(path, &progress)?;
    }

    let entries = path_entries(&progress.best);
    let witness = Sequence::from_index_entries(group, &entries);
    if let Some(bad) = ZeroSumDp::default().find_zero_sum_length_in(&witness, lengths)? {
        return Err(Error::InvariantViolation(format!(
            "search witness {} contains the zero-sum {}",
            witness.to_inline(),
            bad.sub.to_inline()
        )));
    }
    Ok(RunOutput {
        certificate: ExtremalCertificate {
            group: group.clone(),
            avoided_lengths: lengths.clone(),
            witness_length: witness.length(),
            witness,
            status,
            nodes_explored: progress.nodes,
            elapsed: started.elapsed(),
        },
    })
}

/// Length reached by always appending the least admissible element.
fn greedy_length(t: &Tables) -> usize {
    let mut frame = t.root();
    let mut next = vec![0u64; t.frame()];
    let mut forb = vec![0u64; t.words];
    let mut last = 0;
    let mut depth = 0;
    while depth < t.depth_cap {
        t.forbidden(&frame, &mut forb);
        let Some(g) = (last..t.order).find(|&g| !t.has_neg(&forb, g)) else {
            break;
        };
        t.child(&frame, g, &mut next);
        std::mem::swap(&mut frame, &mut next);
        last = g;
        depth += 1;
    }
    depth
}

fn pending_of(all: &[Vec<u32>], done: &[bool]) -> Vec<Vec<u32>> {
    all.iter()
        .zip(done)
        .filter(|(_, &d)| !d)
        .map(|(p, _)| p.clone())
        .collect()
}

fn path_entries(path: &[u32]) -> Vec<Entry> {
    let mut out: Vec<Entry> = Vec::new();
    for &g in path {
        match out.last_mut() {
            Some(e) if e.0 == g => e.1 += 1,
            _ => out.push((g, 1)),
        }
    }
    out
}

fn validate(group: &GroupSpec, lengths: &LengthSet, cfg: &SearchConfig, capped: bool) -> Result<()> {
    if lengths.is_empty() {
        return Err(Error::Precondition("the avoided length set is empty".into()));
    }
    if lengths.contains(0) {
        return Err(Error::Precondition("length 0 cannot be avoided".into()));
    }
    if group.order() > cfg.max_order {
        return Err(Error::Precondition(format!(
            "|G| = {} exceeds the search limit {}",
            group.order(),
            cfg.max_order
        )));
    }
    // g^[N] with ord(g) = exp(G) only has zero-sums of lengths divisible by exp(G)
    let exp = group.exponent() as usize;
    if let (LengthSet::Finite(set), false) = (lengths, capped) {
        if !set.iter().any(|k| k % exp == 0) {
            return Err(Error::Domain(format!(
                "s_L is infinite: {lengths} has no multiple of exp(G) = {exp}"
            )));
        }
    }
    Ok(())
}

fn path_text(group: &GroupSpec, path: &[u32]) -> String {
    if path.is_empty() {
        return "-".into();
    }
    Sequence::from_index_entries(group, &path_entries(path)).to_inline()
}

fn parse_path(group: &GroupSpec, text: &str) -> Result<Vec<u32>> {
    if text == "-" {
        return Ok(Vec::new());
    }
    let seq = Sequence::parse_inline(group, text)?;
    Ok(seq
        .index_entries()
        .into_iter()
        .flat_map(|(g, m)| std::iter::repeat_n(g, m as usize))
        .collect())
}

fn save_checkpoint(path: &Path, p: &Progress) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{CHECKPOINT_HEADER}");
    let _ = writeln!(out, "group {}", p.group);
    let _ = writeln!(out, "avoid {}", p.lengths);
    let _ = writeln!(out, "depth-cap {}", p.depth_cap.map_or("-".to_string(), |d| d.to_string()));
    let _ = writeln!(out, "nodes {}", p.nodes);
    let _ = writeln!(out, "best {}", path_text(&p.group, &p.best));
    let _ = writeln!(out, "pending {}", p.pending.len());
    for prefix in &p.pending {
        let _ = writeln!(out, "{}", path_text(&p.group, prefix));
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, out)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<Progress> {
    let text = std::fs::read_to_string(path)?;
    let bad = |what: &str| Error::Checkpoint(format!("{}: {what}", path.display()));
    let mut lines = text.lines();
    if lines.next() != Some(CHECKPOINT_HEADER) {
        return Err(bad("unknown header"));
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(&format!("missing {name}")))?;
        line.strip_prefix(name)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("expected {name}")))
    };
    let group: GroupSpec = field("group")?.parse()?;
    let lengths: LengthSet = field("avoid")?.parse()?;
    let depth_cap = match field("depth-cap")?.as_str() {
        "-" => None,
        d => Some(d.parse().map_err(|_| bad("depth-cap"))?),
    };
    let nodes = field("nodes")?.parse().map_err(|_| bad("nodes"))?;
    let best = parse_path(&group, &field("best")?)?;
    let count: usize = field("pending")?.parse().map_err(|_| bad("pending"))?;
    let pending = lines
        .take(count)
        .map(|l| parse_path(&group, l))
        .collect::<Result<Vec<_>>>()?;
    if pending.len() != count {
        return Err(bad("truncated pending list"));
    }
    Ok(Progress {
        group,
        lengths,
        depth_cap,
        nodes,
        best,
        pending,
    })
}
