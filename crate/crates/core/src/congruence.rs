//! Executable forms of the mod-`p` congruences on `N^k(S)`, Lucas' theorem,
//! a binomial determinant identity and the window double-counting identity.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::dp::ZeroSumDp;
use crate::error::{Error, Result};
use crate::group::is_prime;
use crate::sequence::Sequence;

/// Cap on distinct windows enumerated by [`window_identity_check`].
pub const WINDOW_BUDGET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StatementId {
    Olson,
    CorollaryPn,
    WindowIdentity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub statement_id: StatementId,
    pub inputs: String,
    pub modulus: u32,
    pub lhs_residue: u32,
    pub holds: bool,
    /// Whether the length hypothesis that forces the congruence is met.
    pub hypothesis_met: bool,
}

/// Exact equality report for the window identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowReport {
    pub statement_id: StatementId,
    pub inputs: String,
    #[serde(serialize_with = "as_decimal")]
    pub lhs: BigUint,
    #[serde(serialize_with = "as_decimal")]
    pub rhs: BigUint,
    pub windows: u64,
    pub holds: bool,
}

fn as_decimal<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn require_p_group(s: &Sequence, p: u32) -> Result<()> {
    match s.group().p_group_prime() {
        Some(q) if q == p => Ok(()),
        _ => Err(Error::UnsupportedGroup(format!(
            "{} is not a {p}-group",
            s.group()
        ))),
    }
}

/// `Σ_j (−1)^j N^{j·step}(S) mod p` with `N^0 = 1`.
fn alternating(counts: &[u32], step: usize, p: u32) -> u32 {
    let p = p as i64;
    let mut acc = 0i64;
    for (j, k) in (0..counts.len()).step_by(step).enumerate() {
        let v = counts[k] as i64;
        acc += if j % 2 == 0 { v } else { p - v };
    }
    (acc % p) as u32
}

/// `Σ_{k=0}^{ℓ} (−1)^k N^k(S) mod p`; forced to vanish once `ℓ ≥ D*(G)`.
pub fn olson_alternating(s: &Sequence, p: u32) -> Result<CongruenceReport> {
    require_p_group(s, p)?;
    let counts = ZeroSumDp::default().count_mod_p(s, p)?;
    let lhs = alternating(&counts, 1, p);
    Ok(CongruenceReport {
        statement_id: StatementId::Olson,
        inputs: format!("group={} length={}", s.group(), s.length()),
        modulus: p,
        lhs_residue: lhs,
        holds: lhs == 0,
        hypothesis_met: s.length() >= s.group().davenport_star(),
    })
}

/// `Σ_j (−1)^j N^{j·q}(S) mod p` for `q = p^n`; forced once `ℓ ≥ D*(G) + q − 1`.
pub fn corollary_pn(s: &Sequence, p: u32, q: u64) -> Result<CongruenceReport> {
    require_p_group(s, p)?;
    if q == 0 || !is_power(q, p as u64) {
        return Err(Error::Domain(format!("{q} is not a power of {p}")));
    }
    let counts = ZeroSumDp::default().count_mod_p(s, p)?;
    let lhs = alternating(&counts, q as usize, p);
    Ok(CongruenceReport {
        statement_id: StatementId::CorollaryPn,
        inputs: format!("group={} length={} q={q}", s.group(), s.length()),
        modulus: p,
        lhs_residue: lhs,
        holds: lhs == 0,
        hypothesis_met: s.length() + 1 >= s.group().davenport_star() + q,
    })
}

fn is_power(mut q: u64, p: u64) -> bool {
    while q > 1 && q.is_multiple_of(p) {
        q /= p;
    }
    q == 1
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Verifies `Σ_{T | S, |T| = m} N^j(T) = C(|S|−j, m−j)·N^j(S)` exactly, with
/// windows `T` enumerated as distinct sub-multisets weighted by `Π C(m_i, t_i)`.
pub fn window_identity_check(s: &Sequence, j: u64, m: u64) -> Result<WindowReport> {
    window_identity_check_with_budget(s, j, m, WINDOW_BUDGET)
}

pub fn window_identity_check_with_budget(s: &Sequence, j: u64, m: u64, budget: u64) -> Result<WindowReport> {
    if j > m || m > s.length() {
        return Err(Error::Precondition(format!(
            "need 0 ≤ j ≤ m ≤ |S|, got j={j} m={m} |S|={}",
            s.length()
        )));
    }
    let span: u64 = s
        .entries()
        .iter()
        .try_fold(1u64, |acc, (_, mult)| acc.checked_mul(*mult as u64 + 1))
        .unwrap_or(u64::MAX);
    if span > budget {
        return Err(Error::Budget {
            what: "window enumeration",
            requested: span,
            limit: budget,
        });
    }
    let dp = ZeroSumDp::default();
    let entries = s.entries();
    // suffix capacity to prune choices that cannot reach m
    let mut suffix = vec![0u64; entries.len() + 1];
    for i in (0..entries.len()).rev() {
        suffix[i] = suffix[i + 1] + entries[i].1 as u64;
    }
    let mut lhs = BigUint::zero();
    let mut windows = 0u64;
    let mut picked: Vec<u32> = vec![0; entries.len()];
    // DFS over entries; picked[i] holds the current choice for entry i
    #[allow(clippy::too_many_arguments)]
    fn visit(
        i: usize,
        chosen: u64,
        m: u64,
        j: u64,
        s: &Sequence,
        suffix: &[u64],
        picked: &mut Vec<u32>,
        dp: &ZeroSumDp,
        lhs: &mut BigUint,
        windows: &mut u64,
    ) -> Result<()> {
        let entries = s.entries();
        if i == entries.len() {
            if chosen != m {
                return Ok(());
            }
            let mut weight = BigUint::one();
            let mut sub = Vec::new();
            for (k, (g, mult)) in entries.iter().enumerate() {
                if picked[k] > 0 {
                    weight *= binomial(*mult as u64, picked[k] as u64);
                    sub.push((g.clone(), picked[k]));
                }
            }
            let t = Sequence::from_entries(s.group(), sub)?;
            let n = dp.count_table(&t)?.get(j as usize);
            *lhs += weight * n;
            *windows += 1;
            return Ok(());
        }
        let need = m - chosen;
        let mult = entries[i].1 as u64;
        let lo = need.saturating_sub(suffix[i + 1]);
        let hi = mult.min(need);
        for t in lo..=hi {
            picked[i] = t as u32;
            visit(i + 1, chosen + t, m, j, s, suffix, picked, dp, lhs, windows)?;
        }
        picked[i] = 0;
        Ok(())
    }
    visit(0, 0, m, j, s, &suffix, &mut picked, &dp, &mut lhs, &mut windows)?;
    let rhs = binomial(s.length() - j, m - j) * dp.count_table(s)?.get(j as usize);
    Ok(WindowReport {
        statement_id: StatementId::WindowIdentity,
        inputs: format!("group={} length={} j={j} m={m}", s.group(), s.length()),
        holds: lhs == rhs,
        lhs,
        rhs,
        windows,
    })
}

/// `C(a, b) mod p` as the product of digit-wise binomials in base `p`.
pub fn lucas_binomial(a: u64, b: u64, p: u32) -> Result<u32> {
    if !is_prime(p as u64) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    let p = p as u64;
    let (mut a, mut b) = (a, b);
    let mut acc = 1u64;
    while a > 0 || b > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return Ok(0);
        }
        let digit = binomial(ad, bd) % BigUint::from(p);
        acc = acc * digit.to_u64().unwrap() % p;
        a /= p;
        b /= p;
    }
    Ok(acc as u32)
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeterminantReport {
    pub a: u64,
    pub k: u64,
    #[serde(serialize_with = "signed_decimal")]
    pub det: BigInt,
    #[serde(serialize_with = "signed_decimal")]
    pub formula_value: BigInt,
    pub holds: bool,
}

fn signed_decimal<S: serde::Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// The `(k+1)×(k+1)` matrix whose column tops are `a+k, 2k−1, 2k−2, …, k`
/// and whose row `i` holds `C(top, i)`.
pub fn lemma6_matrix(a: u64, k: u64) -> Vec<Vec<BigInt>> {
    let tops: Vec<u64> = std::iter::once(a + k).chain((k..2 * k).rev()).collect();
    (0..=k)
        .map(|i| tops.iter().map(|&t| BigInt::from(binomial(t, i))).collect())
        .collect()
}

fn sign_k(k: u64) -> BigInt {
    if (k * (k + 1) / 2).is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Determinant of [`lemma6_matrix`] next to `(−1)^{k(k+1)/2}·C(a, k)`.
pub fn lemma6_matrix_det(a: u64, k: u64) -> Result<DeterminantReport> {
    if a == 0 || k == 0 {
        return Err(Error::Domain(format!("need a, k ≥ 1, got a={a} k={k}")));
    }
    let det = determinant(lemma6_matrix(a, k));
    let formula_value = sign_k(k) * BigInt::from(binomial(a, k));
    Ok(DeterminantReport {
        a,
        k,
        holds: det == formula_value,
        det,
        formula_value,
    })
}

/// Rank over `F_p` by Gaussian elimination.
pub fn rank_mod_p(rows: &[Vec<BigInt>], p: u32) -> usize {
    let p64 = p as i64;
    let pb = BigInt::from(p);
    let mut m: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    let v = ((x % &pb) + &pb) % &pb;
                    v.to_i64().unwrap()
                })
                .collect()
        })
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = mod_inverse(m[rank][c], p64);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p64;
        }
        let pivot = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = (*x - f * y).rem_euclid(p64);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    // Fermat; p is prime
    let mut result = 1i64;
    let mut base = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub p: u32,
    pub n: u32,
    pub r: u32,
    pub k: u64,
    pub sequence_length: u64,
    pub rank_a: usize,
    pub rank_augmented: usize,
    /// `(−1)^{k(k+1)/2} C(rp^n − r + 1, k) mod p`.
    pub det_residue: u32,
    /// `C(rp^n − r + 1, k) mod p` via Lucas.
    pub lucas_residue: u32,
    /// `C(p − r + 1, k) mod p`.
    pub reduced_residue: u32,
    pub certified: bool,
}

/// Linear-algebra step behind `s_{≤D(G)−k}(C_{p^n}^r) ≤ D(G) + k`: the system
/// `A·X + b ≡ 0 (mod p)` coming from the counting identities cannot be
/// solvable, because `rank(A) ≤ k < k + 1 = rank(A | b)`.
pub fn theorem3_rank_argument(p: u32, n: u32, r: u32, k: u64) -> Result<RankReport> {
    if !is_prime(p as u64) || n < 1 || r < 3 || r >= p || k < 2 || k > (p - r + 1) as u64 {
        return Err(Error::Domain(format!(
            "need p prime, n ≥ 1, 3 ≤ r < p, 2 ≤ k ≤ p−r+1; got p={p} n={n} r={r} k={k}"
        )));
    }
    let pn = (p as u64)
        .checked_pow(n)
        .ok_or_else(|| Error::Domain(format!("{p}^{n} overflows")))?;
    let d = r as u64 * pn - r as u64 + 1;
    let len = d + k;
    // column i ↔ N^{len − (2k − 1 − i)}, so its entries are C(2k − 1 − i, t)
    let a_rows: Vec<Vec<BigInt>> = (0..=k)
        .map(|t| (0..k).map(|i| BigInt::from(binomial(2 * k - 1 - i, t))).collect())
        .collect();
    let aug_rows: Vec<Vec<BigInt>> = a_rows
        .iter()
        .enumerate()
        .map(|(t, row)| {
            let mut v = vec![BigInt::from(binomial(len, t as u64))];
            v.extend(row.iter().cloned());
            v
        })
        .collect();
    let rank_a = rank_mod_p(&a_rows, p);
    let rank_augmented = rank_mod_p(&aug_rows, p);
    let pb = BigInt::from(p);
    let det = determinant(aug_rows);
    let det_residue = ((det % &pb) + &pb) % &pb;
    let lucas_residue = lucas_binomial(d, k, p)?;
    let reduced_residue = lucas_binomial((p - r + 1) as u64, k, p)?;
    let formula = (sign_k(k) * BigInt::from(lucas_residue) % &pb + &pb) % &pb;
    let det_residue = det_residue.to_u32().unwrap();
    let certified = rank_a <= k as usize
        && rank_augmented == k as usize + 1
        && det_residue != 0
        && BigInt::from(det_residue) == formula
        && lucas_residue == reduced_residue
        && reduced_residue != 0;
    Ok(RankReport {
        p,
        n,
        r,
        k,
        sequence_length: len,
        rank_a,
        rank_augmented,
        det_residue,
        lucas_residue,
        reduced_residue,
        certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;

    fn c3() -> GroupSpec {
        "3".parse().unwrap()
    }

    #[test]
    fn olson_examples() {
        let g = c3();
        let s = Sequence::from_coords(&g, &[(&[1], 3)]).unwrap();
        let r = olson_alternating(&s, 3).unwrap();
        assert!(r.holds && r.hypothesis_met);
        let short = Sequence::from_coords(&g, &[(&[1], 1)]).unwrap();
        let r = olson_alternating(&short, 3).unwrap();
        assert_eq!(r.lhs_residue, 1);
        assert!(!r.holds && !r.hypothesis_met);
        assert!(olson_alternating(&s, 5).is_err());
        let mixed: GroupSpec = "6".parse().unwrap();
        let t = Sequence::from_coords(&mixed, &[(&[1], 2)]).unwrap();
        assert!(matches!(olson_alternating(&t, 2), Err(Error::UnsupportedGroup(_))));
    }

    #[test]
    fn corollary_examples() {
        let g = c3();
        let zeros = Sequence::from_entries(&g, [(g.zero(), 3)]).unwrap();
        assert!(corollary_pn(&zeros, 3, 3).unwrap().holds);
        assert!(corollary_pn(&zeros, 3, 6).is_err());
    }

    #[test]
    fn window_examples() {
        let g = c3();
        let s = Sequence::from_entries(&g, [(g.zero(), 4)]).unwrap();
        let r = window_identity_check(&s, 1, 2).unwrap();
        assert_eq!(r.lhs, BigUint::from(12u32));
        assert_eq!(r.rhs, BigUint::from(12u32));
        assert!(r.holds);
        let r0 = window_identity_check(&s, 0, 3).unwrap();
        assert_eq!(r0.lhs, BigUint::from(4u32));
        assert!(window_identity_check(&s, 3, 2).is_err());
        assert!(matches!(
            window_identity_check_with_budget(&s, 1, 2, 2),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(lucas_binomial(10, 4, 3).unwrap(), 0);
        assert_eq!(lucas_binomial(7, 4, 3).unwrap(), 2);
        assert_eq!(lucas_binomial(9, 9, 7).unwrap(), 1);
        assert_eq!(lucas_binomial(3, 5, 7).unwrap(), 0);
        assert!(lucas_binomial(3, 1, 4).is_err());
    }

    #[test]
    fn determinant_examples() {
        let m = lemma6_matrix(2, 1);
        assert_eq!(m, vec![vec![BigInt::from(1), BigInt::from(1)], vec![BigInt::from(3), BigInt::from(1)]]);
        let r = lemma6_matrix_det(2, 1).unwrap();
        assert_eq!(r.det, BigInt::from(-2));
        assert!(r.holds);
        let m = lemma6_matrix(3, 2);
        let expect: Vec<Vec<BigInt>> = [[1, 1, 1], [5, 3, 2], [10, 3, 1]]
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(m, expect);
        assert_eq!(lemma6_matrix_det(3, 2).unwrap().det, BigInt::from(-3));
    }

    #[test]
    fn bareiss_handles_pivot_swaps() {
        let m: Vec<Vec<BigInt>> = [[0, 2, 1], [1, 0, 0], [0, 1, 3]]
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        // expand along the second row: −1·(2·3 − 1·1) = −5
        assert_eq!(determinant(m), BigInt::from(-5));
    }

    #[test]
    fn rank_argument_examples() {
        for (p, k) in [(5, 2), (5, 3), (7, 2)] {
            let r = theorem3_rank_argument(p, 1, 3, k).unwrap();
            assert!(r.certified, "{r:?}");
            assert_eq!(r.rank_augmented, k as usize + 1);
        }
        assert!(theorem3_rank_argument(5, 1, 3, 4).is_err());
        assert!(theorem3_rank_argument(5, 1, 5, 2).is_err());
    }

    #[test]
    fn rank_mod_p_basics() {
        let rows: Vec<Vec<BigInt>> = [[1, 2], [2, 4], [0, 5]]
            .iter()
            .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(rank_mod_p(&rows, 5), 1);
        assert_eq!(rank_mod_p(&rows, 7), 2);
    }
}
