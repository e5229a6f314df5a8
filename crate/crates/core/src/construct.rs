//! Explicit extremal sequences, each checked against its claimed zero-sum
//! length spectrum before it is returned.

use std::fmt;

use serde::Serialize;

use crate::dp::ZeroSumDp;
use crate::error::{Error, Result};
use crate::group::{is_prime, GroupSpec};
use crate::lengths::LengthSet;
use crate::search::{max_avoiding, SearchConfig, Status};
use crate::sequence::Sequence;

/// A generated sequence with the property it was certified against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Construction {
    pub which: Which,
    #[serde(serialize_with = "inline")]
    pub sequence: Sequence,
    pub length: u64,
    pub spectrum: Vec<usize>,
    pub claim: String,
}

fn inline<S: serde::Serializer>(seq: &Sequence, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&seq.to_inline())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Thm2,
    Thm3,
    Thm6,
    Cor5,
    Egz,
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Thm2 => "thm2",
            Which::Thm3 => "thm3",
            Which::Thm6 => "thm6",
            Which::Cor5 => "cor5",
            Which::Egz => "egz",
        })
    }
}

fn certify(which: Which, sequence: Sequence, claim: String, ok: impl FnOnce(&[usize]) -> bool) -> Result<Construction> {
    let spectrum = ZeroSumDp::default().zero_sum_length_spectrum(&sequence)?;
    if !ok(&spectrum) {
        return Err(Error::InvariantViolation(format!(
            "{which} construction fails its certificate ({claim}); spectrum {spectrum:?}"
        )));
    }
    Ok(Construction {
        which,
        length: sequence.length(),
        sequence,
        spectrum,
        claim,
    })
}

fn require_prime(p: u32) -> Result<()> {
    if is_prime(p as u64) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not prime")))
    }
}

fn unit_and_ones(group: &GroupSpec, per_unit: u32, ones: u32) -> Result<Sequence> {
    let r = group.rank();
    let mut items: Vec<(Vec<i64>, u32)> = (0..r)
        .map(|i| {
            let mut v = vec![0i64; r];
            v[i] = 1;
            (v, per_unit)
        })
        .filter(|(_, m)| *m > 0)
        .collect();
    if ones > 0 {
        items.push((vec![1; r], ones));
    }
    let refs: Vec<(&[i64], u32)> = items.iter().map(|(v, m)| (v.as_slice(), *m)).collect();
    Sequence::from_coords(group, &refs)
}

/// `e_1^[p−1] ⋯ e_r^[p−1]·(1,…,1)` over `C_p^r`: a minimal zero-sum sequence
/// of length `D(C_p^r) = rp − r + 1`.
pub fn construct_thm2_lower(p: u32, r: usize) -> Result<Construction> {
    require_prime(p)?;
    if r < 2 {
        return Err(Error::Domain(format!("rank {r} < 2")));
    }
    let group = GroupSpec::elementary(p, r)?;
    let seq = unit_and_ones(&group, p - 1, 1)?;
    let d = r * (p as usize) - r + 1;
    certify(Which::Thm2, seq, format!("minimal zero-sum, spectrum = {{{d}}}"), |s| s == [d])
}

/// `e_1^[p^n−1] ⋯ e_r^[p^n−1]·(1,…,1)^[⌈k/(r−1)⌉]` over `C_{p^n}^r`, whose
/// shortest zero-sum has length `rp^n − (r−1)⌈k/(r−1)⌉ > D(G) − k`.
pub fn construct_thm3_lower(p: u32, n: u32, r: u32, k: u32) -> Result<Construction> {
    require_prime(p)?;
    if n < 1 || r < 3 || r >= p || k < 2 || k > p - r + 1 {
        return Err(Error::Domain(format!(
            "need n ≥ 1, 3 ≤ r < p, 2 ≤ k ≤ p−r+1; got p={p} n={n} r={r} k={k}"
        )));
    }
    let group = GroupSpec::homocyclic(p, n, r as usize)?;
    let q = group.exponent() as usize;
    let m = (k as usize).div_ceil(r as usize - 1);
    let seq = unit_and_ones(&group, q as u32 - 1, m as u32)?;
    let (r, k) = (r as usize, k as usize);
    let d = r * q - r + 1;
    let shortest = r * q - (r - 1) * m;
    let expect_len = (d + m - 1) as u64;
    if seq.length() != expect_len {
        return Err(Error::InvariantViolation(format!("length {} != {expect_len}", seq.length())));
    }
    certify(
        Which::Thm3,
        seq,
        format!("shortest zero-sum {shortest} > D(G) − k = {}", d - k),
        |s| s.first() == Some(&shortest) && shortest > d - k,
    )
}

fn thm6_items(q: i64, with_extra: bool) -> Vec<(Vec<i64>, u32)> {
    let m = q as u32 - 1;
    let mut items = vec![
        (vec![1, 0, 0], m),
        (vec![0, 1, 0], m),
        (vec![0, 0, 1], m),
        (vec![1, 1, -1], m),
    ];
    if with_extra {
        items.push((vec![1, 1, 0], 1));
    }
    items
}

fn thm6_group(p: u32, n: u32) -> Result<GroupSpec> {
    require_prime(p)?;
    if p == 2 || n < 1 {
        return Err(Error::Domain(format!("need an odd prime and n ≥ 1, got p={p} n={n}")));
    }
    GroupSpec::homocyclic(p, n, 3)
}

fn from_items(group: &GroupSpec, items: &[(Vec<i64>, u32)]) -> Result<Sequence> {
    let refs: Vec<(&[i64], u32)> = items.iter().map(|(v, m)| (v.as_slice(), *m)).collect();
    Sequence::from_coords(group, &refs)
}

/// `(1,0,0)^[q−1]·(0,1,0)^[q−1]·(0,0,1)^[q−1]·(1,1,−1)^[q−1]·(1,1,0)` over
/// `C_q^3`, `q = p^n`: length `4q − 3`, zero-sum lengths exactly `{2q−1, 2q}`.
pub fn construct_thm6_lower(p: u32, n: u32) -> Result<Construction> {
    let group = thm6_group(p, n)?;
    let q = group.exponent() as usize;
    let seq = from_items(&group, &thm6_items(q as i64, true))?;
    certify(Which::Thm6, seq, format!("spectrum = {{{}, {}}}", 2 * q - 1, 2 * q), |s| {
        s == [2 * q - 1, 2 * q]
    })
}

/// The previous sequence without `(1,1,0)`: length `4q − 4`, and every
/// zero-sum subsequence has length exactly `2q`.
pub fn construct_cor5_lower(p: u32, n: u32) -> Result<Construction> {
    let group = thm6_group(p, n)?;
    let q = group.exponent() as usize;
    let seq = from_items(&group, &thm6_items(q as i64, false))?;
    certify(Which::Cor5, seq, format!("spectrum = {{{}}}", 2 * q), |s| s == [2 * q])
}

/// A zero-sum free sequence of length `D(G) − 1`.
pub fn zero_sum_free_of_max_length(group: &GroupSpec, cfg: &SearchConfig) -> Result<Sequence> {
    if let Some(p) = group.elementary_prime() {
        if group.rank() >= 2 {
            let full = construct_thm2_lower(p, group.rank())?.sequence;
            let ones = Sequence::from_coords(group, &[(&vec![1; group.rank()], 1)])?;
            return full.remove(&ones);
        }
    }
    if group.p_group_prime().is_some() {
        // D(G) = D*(G) for p-groups
        let items: Vec<(Vec<i64>, u32)> = group
            .factors()
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let mut v = vec![0i64; group.rank()];
                v[i] = 1;
                (v, n - 1)
            })
            .collect();
        return from_items(group, &items);
    }
    let cert = max_avoiding(group, &LengthSet::AllPositive, cfg)?;
    if cert.status != Status::Exhaustive {
        return Err(Error::Budget {
            what: "zero-sum free search",
            requested: cert.nodes_explored,
            limit: cfg.budget_nodes.unwrap_or(u64::MAX),
        });
    }
    Ok(cert.witness)
}

/// `0^[k·exp(G)−1]·W` with `W` zero-sum free of length `D(G) − 1`: no
/// zero-sum subsequence of length exactly `k·exp(G)`.
pub fn construct_egz_lower(group: &GroupSpec, k: u32, cfg: &SearchConfig) -> Result<Construction> {
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let w = zero_sum_free_of_max_length(group, cfg)?;
    let target = k as usize * group.exponent() as usize;
    let zeros = Sequence::from_entries(group, [(group.zero(), target as u32 - 1)])?;
    let seq = if target > 1 { zeros.concat(&w)? } else { w };
    certify(Which::Egz, seq, format!("no zero-sum of length {target}"), |s| !s.contains(&target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm2_examples() {
        let c = construct_thm2_lower(3, 3).unwrap();
        assert_eq!((c.length, c.spectrum.clone()), (7, vec![7]));
        let c = construct_thm2_lower(5, 3).unwrap();
        assert_eq!((c.length, c.spectrum.clone()), (13, vec![13]));
        assert!(construct_thm2_lower(4, 3).is_err());
        assert!(construct_thm2_lower(3, 1).is_err());
    }

    #[test]
    fn thm3_examples() {
        // length D(G) + ⌈k/(r−1)⌉ − 1
        let c = construct_thm3_lower(5, 1, 3, 2).unwrap();
        assert_eq!(c.length, 13);
        assert_eq!(c.spectrum[0], 13);
        let c = construct_thm3_lower(5, 1, 3, 3).unwrap();
        assert_eq!(c.length, 14);
        assert_eq!(c.spectrum[0], 11);
        let c = construct_thm3_lower(7, 1, 3, 2).unwrap();
        assert_eq!(c.length, 19);
        assert_eq!(c.spectrum[0], 19);
        assert!(construct_thm3_lower(5, 1, 3, 4).is_err());
        assert!(construct_thm3_lower(5, 1, 2, 2).is_err());
    }

    #[test]
    fn thm6_and_cor5_examples() {
        let c = construct_thm6_lower(3, 1).unwrap();
        assert_eq!((c.length, c.spectrum.clone()), (9, vec![5, 6]));
        let c = construct_cor5_lower(3, 1).unwrap();
        assert_eq!((c.length, c.spectrum.clone()), (8, vec![6]));
        assert!(matches!(construct_thm6_lower(2, 1), Err(Error::Domain(_))));
        // (1,1,−1) is stored with reduced residues
        let g = GroupSpec::homocyclic(3, 1, 3).unwrap();
        assert_eq!(c.sequence.multiplicity(&g.element(&[1, 1, 2]).unwrap()), 2);
    }

    #[test]
    fn egz_examples() {
        let cfg = SearchConfig::default();
        let g = GroupSpec::elementary(3, 3).unwrap();
        let c = construct_egz_lower(&g, 1, &cfg).unwrap();
        assert_eq!(c.length, 8);
        let c = construct_egz_lower(&g, 3, &cfg).unwrap();
        assert_eq!(c.length, 14);
        assert!(!c.spectrum.contains(&9));
        let c3: GroupSpec = "3".parse().unwrap();
        let c = construct_egz_lower(&c3, 1, &cfg).unwrap();
        assert_eq!(c.sequence, Sequence::from_coords(&c3, &[(&[0], 2), (&[1], 2)]).unwrap());
        // C_6 is not a p-group, so W comes from the search
        let c6: GroupSpec = "6".parse().unwrap();
        let c = construct_egz_lower(&c6, 1, &cfg).unwrap();
        assert_eq!(c.length, 6 + 6 - 2);
    }
}
