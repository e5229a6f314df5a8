//! Lexicographically least images of multisets under group automorphisms.
//!
//! Multisets are handled as sorted `(index, multiplicity)` lists, where the
//! index is the mixed-radix element index (so index order = element order).
//! Two such lists are compared as the sorted expanded tuples they stand for:
//! at the first differing entry the smaller element wins, and on equal
//! elements the larger multiplicity wins.
//!
//! For `C_p^r` the full group `GL(r, p)` is used. The least image is found
//! by building the linear map one basis vector at a time: every image of
//! `span(x_1..x_k)` precedes `u_{k+1}` (the smallest vector outside
//! `span(u_1..u_k)`), so the next basis class must be sent to `u_{k+1}` and
//! must have maximal multiplicity among the classes still undetermined. Ties
//! are the only branching points. For every other group the automorphisms
//! used are coordinate permutations among equal invariant factors combined
//! with a global unit scaling, enumerated exhaustively.

use std::cmp::Ordering;

use crate::group::{gcd, GroupSpec};

pub type Entry = (u32, u32);

/// Compares two sorted multisets of equal total length as expanded tuples.
pub fn cmp_entries(a: &[Entry], b: &[Entry]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match cmp_entry(*x, *y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

#[inline]
fn cmp_entry(x: Entry, y: Entry) -> Ordering {
    x.0.cmp(&y.0).then(y.1.cmp(&x.1))
}

/// Automorphism-orbit reduction for one group.
#[derive(Clone, Debug)]
pub enum Symmetry {
    Linear(LinearCanon),
    Weak(WeakCanon),
}

impl Symmetry {
    pub fn for_group(group: &GroupSpec) -> Self {
        match group.elementary_prime() {
            Some(p) => Symmetry::Linear(LinearCanon::new(p, group.rank())),
            None => Symmetry::Weak(WeakCanon::new(group)),
        }
    }

    /// True iff `entries` is the least member of its orbit.
    pub fn is_canonical(&mut self, entries: &[Entry]) -> bool {
        match self {
            Symmetry::Linear(c) => c.is_canonical(entries),
            Symmetry::Weak(c) => c.is_canonical(entries),
        }
    }

    pub fn canonical(&mut self, entries: &[Entry]) -> Vec<Entry> {
        match self {
            Symmetry::Linear(c) => c.canonical(entries),
            Symmetry::Weak(c) => c.canonical(entries),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Test,
    Minimize,
}

enum Flow {
    Continue,
    FoundSmaller,
}

/// Least image under `GL(r, p)` for multisets over `C_p^r`.
///
/// The chosen basis classes `x_1..x_k` are kept in echelon form together with
/// their expressions in the `x`'s, so the image of a class under the partial
/// map `x_j ↦ u_j` is found by one reduction of its digit vector.
#[derive(Clone, Debug)]
pub struct LinearCanon {
    p: u32,
    r: usize,
    order: usize,
    inv: Vec<u32>,
    classes: Vec<Entry>,
    /// Digit vectors of `classes`, `r` per class, least significant first.
    digits: Vec<u32>,
    /// Echelon rows (`r` digits each), their pivots and their coefficients
    /// in terms of the chosen classes (`r` slots each).
    rows: Vec<u32>,
    pivots: Vec<usize>,
    coefs: Vec<u32>,
    pool: Vec<Vec<usize>>,
    fresh_pool: Vec<Vec<Entry>>,
    best: Vec<Entry>,
    out: Vec<Entry>,
    mode: Mode,
}

impl LinearCanon {
    pub fn new(p: u32, r: usize) -> Self {
        let order = (p as usize).pow(r as u32);
        let inv = (0..p)
            .map(|a| if a == 0 { 0 } else { (1..p).find(|&b| a * b % p == 1).unwrap() })
            .collect();
        LinearCanon {
            p,
            r,
            order,
            inv,
            classes: Vec::new(),
            digits: Vec::new(),
            rows: Vec::new(),
            pivots: Vec::new(),
            coefs: Vec::new(),
            pool: Vec::new(),
            fresh_pool: Vec::new(),
            best: Vec::new(),
            out: Vec::new(),
            mode: Mode::Test,
        }
    }

    #[cfg(test)]
    fn add(&self, mut a: u32, mut b: u32) -> u32 {
        let p = self.p;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place *= p;
        }
        out
    }

    #[cfg(test)]
    fn scale(&self, c: u32, mut a: u32) -> u32 {
        let p = self.p;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += ((a % p) * c % p) * place;
            a /= p;
            place *= p;
        }
        out
    }

    pub fn is_canonical(&mut self, entries: &[Entry]) -> bool {
        self.mode = Mode::Test;
        matches!(self.run(entries), Flow::Continue)
    }

    pub fn canonical(&mut self, entries: &[Entry]) -> Vec<Entry> {
        self.mode = Mode::Minimize;
        self.run(entries);
        self.best.clone()
    }

    fn run(&mut self, entries: &[Entry]) -> Flow {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|e| (e.0 as usize) < self.order));
        self.best.clear();
        self.best.extend_from_slice(entries);
        self.out.clear();
        self.classes.clear();
        let mut rest = entries;
        if let Some(&(0, m)) = entries.first() {
            self.out.push((0, m));
            rest = &entries[1..];
        }
        self.classes.extend_from_slice(rest);
        self.digits.clear();
        for &(idx, _) in rest {
            let mut v = idx;
            for _ in 0..self.r {
                self.digits.push(v % self.p);
                v /= self.p;
            }
        }
        self.rows.clear();
        self.pivots.clear();
        self.coefs.clear();
        let mut remaining = self.pool.pop().unwrap_or_default();
        remaining.clear();
        remaining.extend(0..self.classes.len());
        let flow = self.descend(&remaining);
        self.pool.push(remaining);
        flow
    }

    /// Reduces class `c` against the echelon rows. Returns the residual and
    /// the coordinates in the chosen classes (`r` slots each, in `buf`).
    fn reduce(&self, c: usize, residual: &mut [u32], coords: &mut [u32]) {
        let (p, r) = (self.p, self.r);
        residual.copy_from_slice(&self.digits[c * r..(c + 1) * r]);
        coords.fill(0);
        for (i, &piv) in self.pivots.iter().enumerate() {
            let f = residual[piv];
            if f == 0 {
                continue;
            }
            let row = &self.rows[i * r..(i + 1) * r];
            for t in 0..r {
                residual[t] = (residual[t] + (p - f) * row[t]) % p;
            }
            let coef = &self.coefs[i * r..(i + 1) * r];
            for t in 0..=i {
                coords[t] = (coords[t] + f * coef[t]) % p;
            }
        }
    }

    fn push_basis(&mut self, c: usize) {
        let (p, r) = (self.p, self.r);
        let k = self.pivots.len();
        let mut z = [0u32; 32];
        let mut x = [0u32; 32];
        self.reduce(c, &mut z[..r], &mut x[..r]);
        let piv = (0..r).find(|&t| z[t] != 0).expect("new basis class is independent");
        let s = self.inv[z[piv] as usize];
        self.rows.extend(z[..r].iter().map(|&v| v * s % p));
        // z = x_c − Σ coords_j x_j
        for (t, &xt) in x[..r].iter().enumerate() {
            let v = if t < k {
                (p - xt) % p * s % p
            } else if t == k {
                s
            } else {
                0
            };
            self.coefs.push(v);
        }
        self.pivots.push(piv);
    }

    fn pop_basis(&mut self) {
        let r = self.r;
        self.pivots.pop();
        self.rows.truncate(self.rows.len() - r);
        self.coefs.truncate(self.coefs.len() - r);
    }

    fn descend(&mut self, remaining: &[usize]) -> Flow {
        if remaining.is_empty() {
            if self.mode == Mode::Minimize && cmp_entries(&self.out, &self.best) == Ordering::Less {
                self.best.clone_from(&self.out);
            }
            return Flow::Continue;
        }
        let level = self.pivots.len();
        debug_assert!(level < self.r);
        let r = self.r;
        let max_mult = remaining.iter().map(|&c| self.classes[c].1).max().unwrap();
        let mut candidates = self.pool.pop().unwrap_or_default();
        candidates.clear();
        candidates.extend(remaining.iter().copied().filter(|&c| self.classes[c].1 == max_mult));
        let mut still = self.pool.pop().unwrap_or_default();
        let mut fresh = self.fresh_pool.pop().unwrap_or_default();
        let mut place = [0u32; 32];
        for (t, slot) in place.iter_mut().enumerate().take(level + 1) {
            *slot = self.p.pow(t as u32);
        }

        let mut result = Flow::Continue;
        for &cand in candidates.iter() {
            self.push_basis(cand);
            still.clear();
            fresh.clear();
            fresh.push((place[level], self.classes[cand].1));
            let mut z = [0u32; 32];
            let mut x = [0u32; 32];
            for &c in remaining.iter() {
                if c == cand {
                    continue;
                }
                self.reduce(c, &mut z[..r], &mut x[..r]);
                if z[..r].iter().all(|&d| d == 0) {
                    let img: u32 = (0..=level).map(|t| x[t] * place[t]).sum();
                    fresh.push((img, self.classes[c].1));
                } else {
                    still.push(c);
                }
            }
            fresh.sort_unstable_by_key(|e| e.0);
            let mark = self.out.len();
            self.out.extend_from_slice(&fresh);
            let end = self.out.len();
            let verdict = match self.mode {
                Mode::Test => cmp_entries(&self.out[mark..], &self.best[mark..end]),
                Mode::Minimize => cmp_entries(&self.out, &self.best[..end]),
            };
            let flow = match verdict {
                Ordering::Greater => Flow::Continue,
                Ordering::Less if self.mode == Mode::Test => Flow::FoundSmaller,
                _ => {
                    let next = std::mem::take(&mut still);
                    let f = self.descend(&next);
                    still = next;
                    f
                }
            };
            self.out.truncate(mark);
            self.pop_basis();
            if let Flow::FoundSmaller = flow {
                result = flow;
                break;
            }
        }
        self.pool.push(candidates);
        self.pool.push(still);
        self.fresh_pool.push(fresh);
        result
    }
}

/// Least image under coordinate permutations among equal invariant factors
/// combined with multiplication by a unit of `Z/exp(G)`.
#[derive(Clone, Debug)]
pub struct WeakCanon {
    factors: Vec<u32>,
    maps: Vec<(Vec<usize>, u32)>,
    scratch: Vec<Entry>,
    best: Vec<Entry>,
}

impl WeakCanon {
    pub fn new(group: &GroupSpec) -> Self {
        let factors = group.factors().to_vec();
        let exp = group.exponent();
        let units: Vec<u32> = (1..exp).filter(|&u| gcd(u as u64, exp as u64) == 1).collect();
        let mut perms = Vec::new();
        permutations_preserving(&factors, &mut Vec::new(), &mut vec![false; factors.len()], &mut perms);
        let mut maps = Vec::new();
        for perm in &perms {
            for &u in &units {
                let identity = u == 1 && perm.iter().enumerate().all(|(i, &j)| i == j);
                if !identity {
                    maps.push((perm.clone(), u));
                }
            }
        }
        WeakCanon {
            factors,
            maps,
            scratch: Vec::new(),
            best: Vec::new(),
        }
    }

    pub fn automorphism_count(&self) -> usize {
        self.maps.len() + 1
    }

    fn apply(&self, perm: &[usize], unit: u32, idx: u32) -> u32 {
        let r = self.factors.len();
        let mut coords = [0u32; 16];
        let mut rest = idx;
        for i in (0..r).rev() {
            coords[i] = rest % self.factors[i];
            rest /= self.factors[i];
        }
        // new coordinate i takes old coordinate perm[i]
        let mut out = 0u32;
        for i in 0..r {
            let n = self.factors[i];
            let v = (coords[perm[i]] as u64 * unit as u64 % n as u64) as u32;
            out = out * n + v;
        }
        out
    }

    fn image_into(&mut self, perm: &[usize], unit: u32, entries: &[Entry]) {
        let mut img = std::mem::take(&mut self.scratch);
        img.clear();
        img.extend(entries.iter().map(|&(i, m)| (self.apply(perm, unit, i), m)));
        img.sort_unstable_by_key(|e| e.0);
        self.scratch = img;
    }

    pub fn is_canonical(&mut self, entries: &[Entry]) -> bool {
        for k in 0..self.maps.len() {
            let (perm, unit) = std::mem::take(&mut self.maps[k]);
            self.image_into(&perm, unit, entries);
            self.maps[k] = (perm, unit);
            if cmp_entries(&self.scratch, entries) == Ordering::Less {
                return false;
            }
        }
        true
    }

    pub fn canonical(&mut self, entries: &[Entry]) -> Vec<Entry> {
        self.best.clear();
        self.best.extend_from_slice(entries);
        for k in 0..self.maps.len() {
            let (perm, unit) = std::mem::take(&mut self.maps[k]);
            self.image_into(&perm, unit, entries);
            self.maps[k] = (perm, unit);
            if cmp_entries(&self.scratch, &self.best) == Ordering::Less {
                self.best.clone_from(&self.scratch);
            }
        }
        self.best.clone()
    }
}

fn permutations_preserving(
    factors: &[u32],
    current: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let i = current.len();
    if i == factors.len() {
        out.push(current.clone());
        return;
    }
    for j in 0..factors.len() {
        if !used[j] && factors[j] == factors[i] {
            used[j] = true;
            current.push(j);
            permutations_preserving(factors, current, used, out);
            current.pop();
            used[j] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every invertible r×r matrix over F_p, as column images of the unit vectors.
    fn all_gl(p: u32, r: usize) -> Vec<Vec<u32>> {
        let order = p.pow(r as u32);
        let lin = LinearCanon::new(p, r);
        let mut out = Vec::new();
        let mut cols = Vec::new();
        fn rec(lin: &LinearCanon, order: u32, r: usize, cols: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cols.len() == r {
                out.push(cols.clone());
                return;
            }
            // span of current columns
            let mut span = vec![0u32];
            for &c in cols.iter() {
                let mut next = Vec::new();
                for &s in &span {
                    for k in 0..lin.p {
                        next.push(lin.add(s, lin.scale(k, c)));
                    }
                }
                span = next;
            }
            for v in 0..order {
                if !span.contains(&v) {
                    cols.push(v);
                    rec(lin, order, r, cols, out);
                    cols.pop();
                }
            }
        }
        rec(&lin, order, r, &mut cols, &mut out);
        out
    }

    fn apply_matrix(lin: &LinearCanon, cols: &[u32], idx: u32) -> u32 {
        // idx digits: least significant digit is coordinate r-1 = coefficient of u_1
        let mut out = 0;
        let mut rest = idx;
        for &col in &cols[..lin.r] {
            let c = rest % lin.p;
            rest /= lin.p;
            out = lin.add(out, lin.scale(c, col));
        }
        out
    }

    fn brute_min(p: u32, r: usize, entries: &[Entry]) -> Vec<Entry> {
        let lin = LinearCanon::new(p, r);
        let mut best = entries.to_vec();
        for cols in all_gl(p, r) {
            let mut img: Vec<Entry> = entries.iter().map(|&(i, m)| (apply_matrix(&lin, &cols, i), m)).collect();
            img.sort_unstable_by_key(|e| e.0);
            if cmp_entries(&img, &best) == Ordering::Less {
                best = img;
            }
        }
        best
    }

    fn lcg(seed: &mut u64) -> u64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *seed >> 33
    }

    fn random_entries(seed: &mut u64, order: u32, len: usize) -> Vec<Entry> {
        let mut m = std::collections::BTreeMap::new();
        for _ in 0..len {
            *m.entry((lcg(seed) % order as u64) as u32).or_insert(0u32) += 1;
        }
        m.into_iter().collect()
    }

    #[test]
    fn gl_sizes() {
        assert_eq!(all_gl(2, 2).len(), 6);
        assert_eq!(all_gl(3, 2).len(), 48);
        assert_eq!(all_gl(3, 3).len(), 11232);
    }

    #[test]
    fn linear_minimum_matches_brute_force_c3_2() {
        let mut seed = 11;
        let mut lin = LinearCanon::new(3, 2);
        for len in 0..7 {
            for _ in 0..60 {
                let s = random_entries(&mut seed, 9, len);
                let brute = brute_min(3, 2, &s);
                assert_eq!(lin.canonical(&s), brute, "input {s:?}");
                assert_eq!(lin.is_canonical(&s), brute == s);
            }
        }
    }

    #[test]
    fn linear_minimum_matches_brute_force_c3_3() {
        let mut seed = 5;
        let mut lin = LinearCanon::new(3, 3);
        for len in [1, 2, 3, 5, 8] {
            for _ in 0..8 {
                let s = random_entries(&mut seed, 27, len);
                let brute = brute_min(3, 3, &s);
                assert_eq!(lin.canonical(&s), brute, "input {s:?}");
                assert_eq!(lin.is_canonical(&s), brute == s);
            }
        }
    }

    #[test]
    fn linear_minimum_matches_brute_force_c5_2() {
        let mut seed = 99;
        let mut lin = LinearCanon::new(5, 2);
        for len in [2, 4, 6] {
            for _ in 0..20 {
                let s = random_entries(&mut seed, 25, len);
                assert_eq!(lin.canonical(&s), brute_min(5, 2, &s));
            }
        }
    }

    #[test]
    fn weak_reduction_permutes_and_scales() {
        let g: GroupSpec = "9,9".parse().unwrap();
        let mut weak = WeakCanon::new(&g);
        // 2 permutations × 6 units
        assert_eq!(weak.automorphism_count(), 12);
        let a = vec![(g.index_of(&g.element(&[0, 2]).unwrap()) as u32, 1)];
        let b = vec![(g.index_of(&g.element(&[4, 0]).unwrap()) as u32, 1)];
        assert_eq!(weak.canonical(&a), weak.canonical(&b));
        assert_eq!(weak.canonical(&a), vec![(1, 1)]);
    }

    #[test]
    fn weak_reduction_respects_unequal_factors() {
        let g: GroupSpec = "3,9".parse().unwrap();
        let weak = WeakCanon::new(&g);
        // no permutation swaps a C_3 coordinate with a C_9 coordinate
        assert_eq!(weak.automorphism_count(), 6);
    }
}
