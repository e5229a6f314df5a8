//! Sequences over a group as multisets of elements (the free abelian monoid
//! `F(G)`), with the text file format used by the CLI.
//!
//! ```text
//! # comment
//! group 3^1^3
//! 0,1,0
//! 1,0,0 x2
//! ```

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{Element, GroupSpec};
use crate::symmetry::{Entry, Symmetry};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sequence {
    group: GroupSpec,
    /// Sorted by element, multiplicities ≥ 1, no duplicate keys.
    entries: Vec<(Element, u32)>,
}

impl Sequence {
    pub fn empty(group: &GroupSpec) -> Self {
        Sequence {
            group: group.clone(),
            entries: Vec::new(),
        }
    }

    pub fn from_elements<I>(group: &GroupSpec, elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = Element>,
    {
        Self::from_entries(group, elements.into_iter().map(|g| (g, 1)))
    }

    /// Aggregates repeated elements; rejects zero multiplicities.
    pub fn from_entries<I>(group: &GroupSpec, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Element, u32)>,
    {
        let mut map: BTreeMap<Element, u32> = BTreeMap::new();
        for (g, m) in entries {
            group.validate(&g)?;
            if m == 0 {
                return Err(Error::InvalidElement(format!("zero multiplicity for {g}")));
            }
            *map.entry(g).or_insert(0) += m;
        }
        Ok(Sequence {
            group: group.clone(),
            entries: map.into_iter().collect(),
        })
    }

    /// `len` elements drawn uniformly and independently from `G`.
    pub fn random<R: Rng + ?Sized>(group: &GroupSpec, len: usize, rng: &mut R) -> Self {
        let order = group.order() as usize;
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for _ in 0..len {
            *counts.entry(rng.gen_range(0..order)).or_insert(0) += 1;
        }
        Sequence {
            group: group.clone(),
            entries: counts.into_iter().map(|(i, m)| (group.element_at(i), m)).collect(),
        }
    }

    /// Convenience constructor from integer tuples; `−1` style coordinates
    /// are reduced into range.
    pub fn from_coords(group: &GroupSpec, items: &[(&[i64], u32)]) -> Result<Self> {
        let entries = items
            .iter()
            .map(|(c, m)| Ok((group.reduce(c)?, *m)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(group, entries)
    }

    pub(crate) fn from_index_entries(group: &GroupSpec, entries: &[Entry]) -> Self {
        Sequence {
            group: group.clone(),
            entries: entries
                .iter()
                .map(|&(i, m)| (group.element_at(i as usize), m))
                .collect(),
        }
    }

    pub(crate) fn index_entries(&self) -> Vec<Entry> {
        self.entries
            .iter()
            .map(|(g, m)| (self.group.index_of(g) as u32, *m))
            .collect()
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn entries(&self) -> &[(Element, u32)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|S|`, the total multiplicity.
    pub fn length(&self) -> u64 {
        self.entries.iter().map(|(_, m)| *m as u64).sum()
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn multiplicity(&self, g: &Element) -> u32 {
        self.entries
            .binary_search_by(|(h, _)| h.cmp(g))
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// `σ(S)`.
    pub fn sigma(&self) -> Element {
        self.entries.iter().fold(self.group.zero(), |acc, (g, m)| {
            let term = self.group.scalar_mul_unchecked(*m as i64, g);
            self.group.add_unchecked(&acc, &term)
        })
    }

    pub fn is_zero_sum(&self) -> bool {
        self.sigma().is_zero()
    }

    /// Elements in order, each repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Element> {
        self.entries
            .iter()
            .flat_map(|(g, m)| std::iter::repeat_n(g.clone(), *m as usize))
            .collect()
    }

    pub fn is_subsequence_of(&self, other: &Sequence) -> bool {
        self.group == other.group
            && self.entries.iter().all(|(g, m)| other.multiplicity(g) >= *m)
    }

    /// Multiset difference `S·T^{−1}`.
    pub fn remove(&self, t: &Sequence) -> Result<Sequence> {
        if self.group != t.group {
            return Err(Error::NotContained(format!(
                "group {} differs from {}",
                t.group, self.group
            )));
        }
        let mut map: BTreeMap<Element, u32> = self.entries.iter().cloned().collect();
        for (g, m) in &t.entries {
            match map.get_mut(g) {
                Some(have) if *have >= *m => {
                    *have -= m;
                    if *have == 0 {
                        map.remove(g);
                    }
                }
                _ => {
                    return Err(Error::NotContained(format!(
                        "{g} needed {m} time(s), available {}",
                        self.multiplicity(g)
                    )))
                }
            }
        }
        Ok(Sequence {
            group: self.group.clone(),
            entries: map.into_iter().collect(),
        })
    }

    /// Multiset sum `S·T`.
    pub fn concat(&self, t: &Sequence) -> Result<Sequence> {
        if self.group != t.group {
            return Err(Error::InvalidGroup(format!(
                "cannot join sequences over {} and {}",
                self.group, t.group
            )));
        }
        Sequence::from_entries(&self.group, self.entries.iter().chain(&t.entries).cloned())
    }

    /// Applies an element-wise map (an endomorphism, or a change of group).
    pub fn map_elements<F>(&self, target: &GroupSpec, mut f: F) -> Result<Sequence>
    where
        F: FnMut(&Element) -> Result<Element>,
    {
        let mapped = self
            .entries
            .iter()
            .map(|(g, m)| Ok((f(g)?, *m)))
            .collect::<Result<Vec<_>>>()?;
        Sequence::from_entries(target, mapped)
    }

    /// Least image of `S` under the automorphisms used for symmetry
    /// reduction: all of `GL(r, p)` on `C_p^r`, otherwise coordinate
    /// permutations among equal factors with global unit scaling.
    pub fn canonical_form(&self) -> Sequence {
        let mut sym = Symmetry::for_group(&self.group);
        let canon = sym.canonical(&self.index_entries());
        Sequence::from_index_entries(&self.group, &canon)
    }

    pub fn parse(text: &str) -> Result<Sequence> {
        let mut group: Option<GroupSpec> = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(grp) = &group else {
                let spec = line
                    .strip_prefix("group")
                    .filter(|rest| rest.starts_with(char::is_whitespace))
                    .ok_or_else(|| err(format!("expected \"group <spec>\", found {line:?}")))?;
                group = Some(spec.trim().parse().map_err(|e: Error| err(e.to_string()))?);
                continue;
            };
            let mut parts = line.split_whitespace();
            let residues = parts.next().expect("non-empty line");
            let mult = match parts.next() {
                None => 1,
                Some(tok) => {
                    let digits = tok
                        .strip_prefix('x')
                        .ok_or_else(|| err(format!("bad multiplicity {tok:?}")))?;
                    let m: u32 = digits
                        .parse()
                        .map_err(|_| err(format!("bad multiplicity {tok:?}")))?;
                    if m == 0 {
                        return Err(err("zero multiplicity".into()));
                    }
                    m
                }
            };
            if let Some(extra) = parts.next() {
                return Err(err(format!("unexpected token {extra:?}")));
            }
            let g = grp
                .parse_element(residues)
                .map_err(|e| err(e.to_string()))?;
            entries.push((g, mult));
        }
        let group = group.ok_or(Error::Parse {
            line: 0,
            message: "missing \"group <spec>\" header".into(),
        })?;
        Sequence::from_entries(&group, entries)
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Compact single-line form `g1;g2 x3;…` used in JSON reports and checkpoints.
    pub fn to_inline(&self) -> String {
        self.entries
            .iter()
            .map(|(g, m)| if *m == 1 { g.to_string() } else { format!("{g} x{m}") })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn parse_inline(group: &GroupSpec, text: &str) -> Result<Sequence> {
        let mut entries = Vec::new();
        for part in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (res, mult) = match part.split_once(" x") {
                Some((r, m)) => (
                    r,
                    m.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidElement(format!("bad multiplicity in {part:?}")))?,
                ),
                None => (part, 1),
            };
            entries.push((group.parse_element(res)?, mult));
        }
        Sequence::from_entries(group, entries)
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "group {}", self.group)?;
        for (g, m) in &self.entries {
            if *m == 1 {
                writeln!(f, "{g}")?;
            } else {
                writeln!(f, "{g} x{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c33() -> GroupSpec {
        "3^1^3".parse().unwrap()
    }

    fn el(g: &GroupSpec, v: &[i64]) -> Element {
        g.element(v).unwrap()
    }

    #[test]
    fn length_and_sigma() {
        let g = c33();
        let empty = Sequence::empty(&g);
        assert_eq!(empty.length(), 0);
        assert_eq!(empty.sigma(), g.zero());
        let s = Sequence::from_coords(&g, &[(&[1, 0, 0], 2), (&[0, 1, 0], 1)]).unwrap();
        assert_eq!(s.length(), 3);
        assert_eq!(s.sigma(), el(&g, &[2, 1, 0]));
        for x in g.elements() {
            let cube = Sequence::from_entries(&g, [(x, 3)]).unwrap();
            assert!(cube.is_zero_sum());
        }
    }

    #[test]
    fn remove_examples() {
        let g = c33();
        let a = el(&g, &[1, 2, 0]);
        let b = el(&g, &[0, 0, 1]);
        let s = Sequence::from_entries(&g, [(a.clone(), 3), (b.clone(), 1)]).unwrap();
        assert!(s.remove(&s).unwrap().is_empty());
        let one = Sequence::from_entries(&g, [(a.clone(), 1)]).unwrap();
        let rest = s.remove(&one).unwrap();
        assert_eq!(rest.entries(), &[(b.clone(), 1), (a.clone(), 2)]);
        let too_many = Sequence::from_entries(&g, [(b, 2)]).unwrap();
        assert!(matches!(s.remove(&too_many), Err(Error::NotContained(_))));
    }

    #[test]
    fn parse_example() {
        let s = Sequence::parse("group 3^1^3\n1,0,0 x2\n0,1,0").unwrap();
        let g = c33();
        assert_eq!(s.multiplicity(&el(&g, &[1, 0, 0])), 2);
        assert_eq!(s.multiplicity(&el(&g, &[0, 1, 0])), 1);
        assert_eq!(s.length(), 3);
    }

    #[test]
    fn serialize_empty_and_sorted() {
        let g = c33();
        assert_eq!(Sequence::empty(&g).to_text(), "group 3^1^3\n");
        let s = Sequence::parse("group 3^1^3\n# hi\n1,0,0\n0,1,0\n1,0,0\n").unwrap();
        assert_eq!(s.to_text(), "group 3^1^3\n0,1,0\n1,0,0 x2\n");
        assert_eq!(Sequence::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("group 3^1^3\n1,0\n", 2),
            ("group 3^1^3\n\n3,0,0\n", 3),
            ("group 3^1^3\n1,0,0 x0\n", 2),
            ("group 3^1^3\n1,0,0 2\n", 2),
            ("1,0,0\n", 1),
            ("group 4^1^2\n", 1),
        ];
        for (text, line) in cases {
            match Sequence::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!(matches!(Sequence::parse("# only\n"), Err(Error::Parse { line: 0, .. })));
    }

    #[test]
    fn inline_round_trip() {
        let g: GroupSpec = "3^2^3".parse().unwrap();
        let s = Sequence::from_coords(&g, &[(&[1, 0, 0], 8), (&[1, 1, -1], 8), (&[1, 1, 0], 1)]).unwrap();
        assert_eq!(Sequence::parse_inline(&g, &s.to_inline()).unwrap(), s);
    }

    #[test]
    fn canonical_form_examples() {
        let g = c33();
        let a = Sequence::from_entries(&g, [(el(&g, &[1, 0, 0]), 2)]).unwrap();
        let b = Sequence::from_entries(&g, [(el(&g, &[0, 1, 0]), 2)]).unwrap();
        assert_eq!(a.canonical_form(), b.canonical_form());

        let s = Sequence::from_coords(&g, &[(&[1, 2, 0], 2), (&[0, 1, 1], 1), (&[2, 2, 2], 1)]).unwrap();
        let doubled = s.map_elements(&g, |x| g.scalar_mul(2, x)).unwrap();
        assert_eq!(s.canonical_form(), doubled.canonical_form());
        let c = s.canonical_form();
        assert_eq!(c.canonical_form(), c);
        assert_eq!(c.length(), s.length());
    }

    #[test]
    fn canonical_form_weak_groups() {
        let g: GroupSpec = "3^2^3".parse().unwrap();
        let s = Sequence::from_coords(&g, &[(&[0, 4, 0], 1), (&[3, 0, 1], 2)]).unwrap();
        // (x, y, z) ↦ 2·(z, x, y)
        let t = Sequence::from_coords(&g, &[(&[0, 0, 8], 1), (&[2, 6, 0], 2)]).unwrap();
        assert_eq!(s.canonical_form(), t.canonical_form());
        let c = s.canonical_form();
        assert_eq!(c.canonical_form(), c);
    }
}
