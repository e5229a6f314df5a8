//! Sets `L ⊆ ℕ` of admissible zero-sum lengths.
//!
//! Text syntax: `a..b` for ranges, `k` or `{k}` for singletons, comma for
//! union, and `all` (or `1..`) for every positive length, which is how the
//! Davenport constant `D(G) = s_ℕ(G)` is requested.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupSpec;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LengthSet {
    /// Every positive length.
    AllPositive,
    Finite(BTreeSet<usize>),
}

impl LengthSet {
    pub fn all_positive() -> Self {
        LengthSet::AllPositive
    }

    /// `[lo, hi]`.
    pub fn range(lo: usize, hi: usize) -> Self {
        LengthSet::Finite((lo..=hi).collect())
    }

    /// `[1, t]`, the set behind `s_{≤t}`.
    pub fn up_to(t: usize) -> Self {
        Self::range(1, t)
    }

    pub fn single(k: usize) -> Self {
        LengthSet::Finite([k].into_iter().collect())
    }

    pub fn from_lengths<I: IntoIterator<Item = usize>>(it: I) -> Self {
        LengthSet::Finite(it.into_iter().collect())
    }

    pub fn contains(&self, k: usize) -> bool {
        match self {
            LengthSet::AllPositive => k >= 1,
            LengthSet::Finite(s) => s.contains(&k),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LengthSet::Finite(s) if s.is_empty())
    }

    /// Largest member, `None` for the unbounded set.
    pub fn max(&self) -> Option<usize> {
        match self {
            LengthSet::AllPositive => None,
            LengthSet::Finite(s) => s.iter().next_back().copied(),
        }
    }

    /// Members that do not exceed `bound`, in increasing order.
    pub fn members_up_to(&self, bound: usize) -> Vec<usize> {
        match self {
            LengthSet::AllPositive => (1..=bound).collect(),
            LengthSet::Finite(s) => s.range(..=bound).copied().collect(),
        }
    }

    /// `AllPositive` when `L ⊇ [1, D(G)]`: every minimal zero-sum sequence
    /// has length at most `D(G)`, so both sets are avoided by the same
    /// sequences. Uses `D(G) = D*(G)` for p-groups and `D(G) ≤ |G|` otherwise.
    pub fn normalized_for(&self, group: &GroupSpec) -> LengthSet {
        let d = if group.p_group_prime().is_some() {
            group.davenport_star()
        } else {
            group.order()
        };
        match self {
            LengthSet::Finite(s) if (1..=d as usize).all(|k| s.contains(&k)) => LengthSet::AllPositive,
            _ => self.clone(),
        }
    }

    pub fn is_subset_of(&self, other: &LengthSet) -> bool {
        match (self, other) {
            (_, LengthSet::AllPositive) => !self.contains(0),
            (LengthSet::AllPositive, LengthSet::Finite(_)) => false,
            (LengthSet::Finite(a), LengthSet::Finite(b)) => a.is_subset(b),
        }
    }
}

impl fmt::Display for LengthSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = match self {
            LengthSet::AllPositive => return f.write_str("all"),
            LengthSet::Finite(s) => s,
        };
        if set.is_empty() {
            return f.write_str("{}");
        }
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &k in set {
            match runs.last_mut() {
                Some((_, hi)) if *hi + 1 == k => *hi = k,
                _ => runs.push((k, k)),
            }
        }
        let parts: Vec<String> = runs
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo.to_string() } else { format!("{lo}..{hi}") })
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for LengthSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim();
        if text == "all" || text == "1.." {
            return Ok(LengthSet::AllPositive);
        }
        let bad = |why: &str| Error::Precondition(format!("bad length set {s:?}: {why}"));
        if text.replace(' ', "") == "{}" {
            return Ok(LengthSet::Finite(BTreeSet::new()));
        }
        let mut out = BTreeSet::new();
        for part in text.split(',').map(str::trim) {
            let part = part.trim_start_matches('{').trim_end_matches('}').trim();
            if part.is_empty() {
                return Err(bad("empty component"));
            }
            if let Some((lo, hi)) = part.split_once("..") {
                let lo: usize = lo.trim().parse().map_err(|_| bad("range start"))?;
                let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(|_| bad("range end"))?;
                if lo > hi {
                    return Err(bad("empty range"));
                }
                out.extend(lo..=hi);
            } else {
                out.insert(part.parse::<usize>().map_err(|_| bad("not a length"))?);
            }
        }
        Ok(LengthSet::Finite(out))
    }
}

impl TryFrom<String> for LengthSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LengthSet> for String {
    fn from(l: LengthSet) -> String {
        l.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_ranges_become_all_lengths() {
        let g: GroupSpec = "3^1^3".parse().unwrap();
        assert_eq!(LengthSet::up_to(7).normalized_for(&g), LengthSet::AllPositive);
        assert_eq!(LengthSet::up_to(6).normalized_for(&g), LengthSet::up_to(6));
        let c6: GroupSpec = "6".parse().unwrap();
        assert_eq!(LengthSet::up_to(5).normalized_for(&c6), LengthSet::up_to(5));
        assert_eq!(LengthSet::up_to(6).normalized_for(&c6), LengthSet::AllPositive);
    }

    #[test]
    fn parse_forms() {
        assert_eq!("1..5".parse::<LengthSet>().unwrap(), LengthSet::up_to(5));
        assert_eq!("{9}".parse::<LengthSet>().unwrap(), LengthSet::single(9));
        assert_eq!("9".parse::<LengthSet>().unwrap(), LengthSet::single(9));
        assert_eq!(
            "1..4,9".parse::<LengthSet>().unwrap(),
            LengthSet::from_lengths([1, 2, 3, 4, 9])
        );
        assert_eq!("all".parse::<LengthSet>().unwrap(), LengthSet::AllPositive);
        assert_eq!("1..".parse::<LengthSet>().unwrap(), LengthSet::AllPositive);
        assert!("5..1".parse::<LengthSet>().is_err());
        assert!("a".parse::<LengthSet>().is_err());
        assert!("1,,2".parse::<LengthSet>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["1..5", "9", "1..4,9", "all", "2,4,6..8"] {
            let l: LengthSet = text.parse().unwrap();
            assert_eq!(l.to_string(), text);
            assert_eq!(l.to_string().parse::<LengthSet>().unwrap(), l);
        }
    }

    #[test]
    fn membership() {
        let l = LengthSet::from_lengths([1, 2, 9]);
        assert!(l.contains(9) && !l.contains(3));
        assert_eq!(l.max(), Some(9));
        assert_eq!(l.members_up_to(5), vec![1, 2]);
        assert!(LengthSet::AllPositive.contains(100));
        assert!(!LengthSet::AllPositive.contains(0));
        assert!(LengthSet::up_to(3).is_subset_of(&LengthSet::up_to(5)));
        assert!(LengthSet::up_to(3).is_subset_of(&LengthSet::AllPositive));
        assert!(!LengthSet::AllPositive.is_subset_of(&LengthSet::up_to(5)));
    }
}
