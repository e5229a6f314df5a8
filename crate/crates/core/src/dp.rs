//! Counting and extracting zero-sum subsequences by dynamic programming over
//! `(cardinality, group element)`.
//!
//! Entries are processed one distinct element at a time; an entry `g^[m]`
//! contributes `C(m, j)` index subsets that use `j` copies of `g`, so the
//! counts are counts of index subsets `I ⊂ [1, ℓ]` as in `N^k(S)`. The cost
//! is `O(ℓ · (kmax + 1) · |G|)` cell updates.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupSpec, Indexer};
use crate::lengths::LengthSet;
use crate::sequence::Sequence;

/// Default cap on DP cell updates (`ℓ · (kmax + 1) · |G|`).
pub const DEFAULT_CELL_BUDGET: u64 = 20_000_000_000;

/// Exact `N^k(S)` for `k = 0..=|S|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    group: GroupSpec,
    source_length: u64,
    counts: Vec<BigUint>,
}

impl CountTable {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn source_length(&self) -> u64 {
        self.source_length
    }

    /// `N^k(S)`; zero outside `0..=|S|`.
    pub fn get(&self, k: usize) -> BigUint {
        self.counts.get(k).cloned().unwrap_or_default()
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn mod_p(&self, p: u32) -> Vec<u32> {
        let p = BigUint::from(p);
        self.counts
            .iter()
            .map(|c| (c % &p).to_u32().expect("residue fits"))
            .collect()
    }

    /// Lengths `k ≥ 1` with `N^k(S) > 0`.
    pub fn spectrum(&self) -> Vec<usize> {
        (1..self.counts.len()).filter(|&k| !self.counts[k].is_zero()).collect()
    }

    /// `{"length": ℓ, "counts": {"k": "decimal", …}}` with a schema tag.
    pub fn to_json(&self) -> serde_json::Value {
        let counts: serde_json::Map<String, serde_json::Value> = self
            .counts
            .iter()
            .enumerate()
            .map(|(k, c)| (k.to_string(), serde_json::Value::String(c.to_string())))
            .collect();
        serde_json::json!({
            "schema": "zerosum/1",
            "group": self.group.to_string(),
            "length": self.source_length,
            "counts": counts,
        })
    }
}

/// A zero-sum subsequence of a prescribed length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "serialize_inline")]
    pub sub: Sequence,
    pub target_length: u64,
}

fn serialize_inline<S: serde::Serializer>(seq: &Sequence, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&seq.to_inline())
}

impl Witness {
    /// Checks `σ = 0`, the exact length and containment in `source`.
    pub fn verify(&self, source: &Sequence) -> Result<()> {
        if self.sub.length() != self.target_length {
            return Err(Error::InvariantViolation(format!(
                "witness has length {} instead of {}",
                self.sub.length(),
                self.target_length
            )));
        }
        if !self.sub.is_zero_sum() {
            return Err(Error::InvariantViolation(format!(
                "witness sums to {} instead of 0",
                self.sub.sigma()
            )));
        }
        source.remove(&self.sub).map(|_| ())
    }
}

/// DP entry points with an explicit cell budget.
#[derive(Clone, Copy, Debug)]
pub struct ZeroSumDp {
    cell_budget: u64,
}

impl Default for ZeroSumDp {
    fn default() -> Self {
        ZeroSumDp {
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

trait CountRing {
    type T: Clone;
    fn zero(&self) -> Self::T;
    fn one(&self) -> Self::T;
    /// `acc += C(m, j) · x`
    fn add_scaled(&self, acc: &mut Self::T, x: &Self::T, m: u32, j: u32);
    fn is_zero(&self, x: &Self::T) -> bool;
}

/// Exact counts in `u128`; valid while `|S| ≤ 127` since `N^k ≤ 2^|S|`.
struct Wide {
    binom: Vec<Vec<u128>>,
}

struct Big {
    binom: Vec<Vec<BigUint>>,
}

struct ModP {
    p: u32,
    binom: Vec<Vec<u32>>,
}

impl CountRing for Wide {
    type T = u128;
    fn zero(&self) -> u128 {
        0
    }
    fn one(&self) -> u128 {
        1
    }
    fn add_scaled(&self, acc: &mut u128, x: &u128, m: u32, j: u32) {
        *acc += self.binom[m as usize][j as usize] * *x;
    }
    fn is_zero(&self, x: &u128) -> bool {
        *x == 0
    }
}

impl CountRing for Big {
    type T = BigUint;
    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one()
    }
    fn add_scaled(&self, acc: &mut BigUint, x: &BigUint, m: u32, j: u32) {
        if x.is_zero() {
            return;
        }
        if j == 0 || j == m {
            *acc += x;
        } else {
            *acc += &self.binom[m as usize][j as usize] * x;
        }
    }
    fn is_zero(&self, x: &BigUint) -> bool {
        x.is_zero()
    }
}

impl CountRing for ModP {
    type T = u32;
    fn zero(&self) -> u32 {
        0
    }
    fn one(&self) -> u32 {
        1 % self.p
    }
    fn add_scaled(&self, acc: &mut u32, x: &u32, m: u32, j: u32) {
        let b = self.binom[m as usize][j as usize] as u64;
        *acc = ((*acc as u64 + b * *x as u64) % self.p as u64) as u32;
    }
    fn is_zero(&self, x: &u32) -> bool {
        *x == 0
    }
}

fn pascal<T: Clone>(n: usize, zero: T, one: T, add: impl Fn(&T, &T) -> T) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![zero.clone(); i + 1];
        row[0] = one.clone();
        row[i] = one.clone();
        for j in 1..i {
            row[j] = add(&rows[i - 1][j - 1], &rows[i - 1][j]);
        }
        rows.push(row);
    }
    rows
}

fn max_multiplicity(s: &Sequence) -> usize {
    s.entries().iter().map(|(_, m)| *m as usize).max().unwrap_or(0)
}

/// Runs the counting DP and returns the final layer `[c][x]` for `c ≤ kmax`.
fn run_counts<R: CountRing>(ring: &R, s: &Sequence, kmax: usize) -> Vec<Vec<R::T>> {
    let ix = Indexer::new(s.group());
    let n = ix.order();
    let mut table: Vec<Vec<R::T>> = vec![vec![ring.zero(); n]; kmax + 1];
    table[0][0] = ring.one();
    let mut filled = 0usize;
    for (g, m) in s.entries() {
        let gi = s.group().index_of(g);
        let m = *m;
        // translations by j·g for j = 1..=m
        let shifts: Vec<Vec<u32>> = (1..=m as u64).map(|j| ix.translation(ix.scale(j, gi))).collect();
        let top = (filled + m as usize).min(kmax);
        for c in (1..=top).rev() {
            let mut next = table[c].clone();
            for j in 1..=(m as usize).min(c) {
                let shift = &shifts[j - 1];
                let src = &table[c - j];
                for (x, v) in src.iter().enumerate() {
                    if !ring.is_zero(v) {
                        ring.add_scaled(&mut next[shift[x] as usize], v, m, j as u32);
                    }
                }
            }
            table[c] = next;
        }
        filled += m as usize;
    }
    table
}

impl ZeroSumDp {
    pub fn with_budget(cell_budget: u64) -> Self {
        ZeroSumDp { cell_budget }
    }

    fn check_budget(&self, s: &Sequence, kmax: usize) -> Result<()> {
        let cells = s
            .length()
            .saturating_mul(kmax as u64 + 1)
            .saturating_mul(s.group().order());
        if cells > self.cell_budget {
            return Err(Error::Budget {
                what: "dp cell updates",
                requested: cells,
                limit: self.cell_budget,
            });
        }
        Ok(())
    }

    pub fn count_table(&self, s: &Sequence) -> Result<CountTable> {
        let len = s.length() as usize;
        self.check_budget(s, len)?;
        let counts = if len <= 127 {
            let ring = Wide {
                binom: pascal(max_multiplicity(s), 0u128, 1u128, |a, b| a + b),
            };
            run_counts(&ring, s, len)
                .into_iter()
                .map(|layer| BigUint::from(layer[0]))
                .collect()
        } else {
            let ring = Big {
                binom: pascal(max_multiplicity(s), BigUint::zero(), BigUint::one(), |a, b| a + b),
            };
            run_counts(&ring, s, len)
                .into_iter()
                .map(|mut layer| layer.swap_remove(0))
                .collect()
        };
        Ok(CountTable {
            group: s.group().clone(),
            source_length: s.length(),
            counts,
        })
    }

    /// `N^k(S) mod p` for `k = 0..=|S|`, computed entirely mod `p`.
    pub fn count_mod_p(&self, s: &Sequence, p: u32) -> Result<Vec<u32>> {
        if p < 2 {
            return Err(Error::Domain(format!("modulus {p} < 2")));
        }
        let len = s.length() as usize;
        self.check_budget(s, len)?;
        let ring = ModP {
            p,
            binom: pascal(max_multiplicity(s), 0u32, 1 % p, |a, b| (a + b) % p),
        };
        Ok(run_counts(&ring, s, len).into_iter().map(|layer| layer[0]).collect())
    }

    /// Reachability of `(c, 0)` for `c ≤ kmax`.
    fn zero_reachable(&self, s: &Sequence, kmax: usize) -> Result<Vec<bool>> {
        self.check_budget(s, kmax)?;
        let table = ReachTable::build(s, kmax, false);
        Ok((0..=kmax).map(|c| table.final_layer()[c * table.order]).collect())
    }

    /// Lengths `k ≥ 1` with `N^k(S) > 0`.
    pub fn zero_sum_length_spectrum(&self, s: &Sequence) -> Result<Vec<usize>> {
        let len = s.length() as usize;
        let reach = self.zero_reachable(s, len)?;
        Ok((1..=len).filter(|&k| reach[k]).collect())
    }

    pub fn find_zero_sum_of_length(&self, s: &Sequence, k: u64) -> Result<Option<Witness>> {
        if k > s.length() {
            return Err(Error::Precondition(format!(
                "target length {k} exceeds |S| = {}",
                s.length()
            )));
        }
        self.check_budget(s, k as usize)?;
        let table = ReachTable::build(s, k as usize, true);
        Ok(table.extract(s, k as usize))
    }

    /// Witness with length in `lengths`, preferring the smallest such length.
    pub fn find_zero_sum_length_in(&self, s: &Sequence, lengths: &LengthSet) -> Result<Option<Witness>> {
        let len = s.length() as usize;
        let kmax = lengths.max().map_or(len, |m| m.min(len));
        let wanted = lengths.members_up_to(kmax);
        if wanted.is_empty() {
            return Ok(None);
        }
        if wanted[0] == 0 {
            return Ok(Some(Witness {
                sub: Sequence::empty(s.group()),
                target_length: 0,
            }));
        }
        self.check_budget(s, kmax)?;
        let table = ReachTable::build(s, kmax, true);
        let last = table.final_layer();
        match wanted.into_iter().find(|&k| last[k * table.order]) {
            Some(k) => Ok(table.extract(s, k)),
            None => Ok(None),
        }
    }
}

/// Boolean `(c, x)` reachability, optionally keeping every intermediate
/// layer for witness extraction. Entries are absorbed from the largest
/// element down, so the backtrack walks from the smallest element up and can
/// greedily prefer early elements.
struct ReachTable {
    order: usize,
    kmax: usize,
    /// layers[i] = reachability using entries i.. (in sorted order); layers[d] is the start.
    layers: Vec<Vec<bool>>,
    keep: bool,
    ix: Indexer,
}

impl ReachTable {
    fn build(s: &Sequence, kmax: usize, keep: bool) -> Self {
        let ix = Indexer::new(s.group());
        let order = ix.order();
        let d = s.distinct();
        let mut start = vec![false; (kmax + 1) * order];
        start[0] = true;
        let mut layers = Vec::with_capacity(if keep { d + 1 } else { 1 });
        let mut cur = start;
        let mut stored = Vec::new();
        for (g, m) in s.entries().iter().rev() {
            let gi = s.group().index_of(g);
            let mut next = cur.clone();
            let mut shift_el = 0usize;
            for j in 1..=(*m as usize).min(kmax) {
                shift_el = ix.add(shift_el, gi);
                let shift = ix.translation(shift_el);
                for c in j..=kmax {
                    let (src_off, dst_off) = ((c - j) * order, c * order);
                    for x in 0..order {
                        if cur[src_off + x] {
                            next[dst_off + shift[x] as usize] = true;
                        }
                    }
                }
            }
            if keep {
                stored.push(std::mem::replace(&mut cur, next));
            } else {
                cur = next;
            }
        }
        if keep {
            stored.push(cur);
            // stored[t] = after absorbing t entries from the end; flip so layers[i] uses entries i..
            stored.reverse();
            layers = stored;
        } else {
            layers.push(cur);
        }
        ReachTable {
            order,
            kmax,
            layers,
            keep,
            ix,
        }
    }

    fn final_layer(&self) -> &[bool] {
        &self.layers[0]
    }

    fn extract(&self, s: &Sequence, k: usize) -> Option<Witness> {
        debug_assert!(self.keep && k <= self.kmax);
        if !self.layers[0][k * self.order] {
            return None;
        }
        let mut c = k;
        let mut x = 0usize;
        let mut picked = Vec::new();
        for (i, (g, m)) in s.entries().iter().enumerate() {
            if c == 0 {
                break;
            }
            let gi = s.group().index_of(g);
            let rest = &self.layers[i + 1];
            let neg_g = self.ix.neg(gi);
            // largest j with (c − j, x − j·g) reachable from the remaining entries
            let mut chosen = None;
            for j in (0..=(*m as usize).min(c)).rev() {
                let y = self.ix.add(x, self.ix.scale(j as u64, neg_g));
                if rest[(c - j) * self.order + y] {
                    chosen = Some((j, y));
                    break;
                }
            }
            let (j, y) = chosen.expect("reachable state has a predecessor");
            if j > 0 {
                picked.push((g.clone(), j as u32));
            }
            c -= j;
            x = y;
        }
        debug_assert!(c == 0 && x == 0);
        let sub = Sequence::from_entries(s.group(), picked).expect("valid sub-multiset");
        Some(Witness {
            sub,
            target_length: k as u64,
        })
    }
}

pub fn count_table(s: &Sequence) -> Result<CountTable> {
    ZeroSumDp::default().count_table(s)
}

pub fn count_mod_p(s: &Sequence, p: u32) -> Result<Vec<u32>> {
    ZeroSumDp::default().count_mod_p(s, p)
}

pub fn find_zero_sum_of_length(s: &Sequence, k: u64) -> Result<Option<Witness>> {
    ZeroSumDp::default().find_zero_sum_of_length(s, k)
}

pub fn find_zero_sum_length_in(s: &Sequence, lengths: &LengthSet) -> Result<Option<Witness>> {
    ZeroSumDp::default().find_zero_sum_length_in(s, lengths)
}

pub fn zero_sum_length_spectrum(s: &Sequence) -> Result<Vec<usize>> {
    ZeroSumDp::default().zero_sum_length_spectrum(s)
}
