//! Finite abelian groups presented by an invariant-factor chain
//! `C_{n_1} ⊕ ⋯ ⊕ C_{n_r}` with `n_1 | n_2 | ⋯ | n_r`.
//!
//! Elements are residue tuples stored fully reduced, so structural equality
//! is group equality and the derived lexicographic order is the fixed total
//! order used everywhere else in the crate (sorting, DFS, canonical forms).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A group element as a tuple of reduced residues, one per invariant factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Element(Vec<u32>);

impl Element {
    pub fn residues(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Parses the comma-separated residue form, e.g. `"1,0,2"`. Range checks
    /// happen when the element is attached to a group via [`GroupSpec::element`].
    pub fn parse(text: &str) -> Result<Vec<i64>> {
        text.split(',')
            .map(|part| {
                part.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::InvalidElement(format!("bad residue {:?} in {:?}", part.trim(), text)))
            })
            .collect()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// `C_{n_1} ⊕ ⋯ ⊕ C_{n_r}` with each `n_i ≥ 2` and `n_i | n_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GroupSpec {
    factors: Vec<u32>,
}

impl GroupSpec {
    pub fn new(factors: Vec<u32>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGroup("no invariant factors".into()));
        }
        if let Some(&bad) = factors.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroup(format!("invariant factor {bad} < 2")));
        }
        for w in factors.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(Error::InvalidGroup(format!(
                    "divisibility chain broken: {} does not divide {}",
                    w[0], w[1]
                )));
            }
        }
        let order = factors
            .iter()
            .try_fold(1u64, |acc, &n| acc.checked_mul(n as u64))
            .ok_or_else(|| Error::InvalidGroup("group order overflows u64".into()))?;
        if order > u32::MAX as u64 {
            return Err(Error::InvalidGroup(format!("group order {order} too large")));
        }
        Ok(GroupSpec { factors })
    }

    /// `C_{p^n}^r`.
    pub fn homocyclic(p: u32, n: u32, r: usize) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidGroup(format!("{p} is not prime")));
        }
        if n == 0 || r == 0 {
            return Err(Error::InvalidGroup("exponent and rank must be positive".into()));
        }
        let q = p
            .checked_pow(n)
            .ok_or_else(|| Error::InvalidGroup(format!("{p}^{n} overflows")))?;
        GroupSpec::new(vec![q; r])
    }

    /// `C_p^r`.
    pub fn elementary(p: u32, r: usize) -> Result<Self> {
        Self::homocyclic(p, 1, r)
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn exponent(&self) -> u32 {
        *self.factors.last().expect("non-empty factor list")
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().map(|&n| n as u64).product()
    }

    /// `D*(G) = 1 + Σ (n_i − 1)`.
    pub fn davenport_star(&self) -> u64 {
        1 + self.factors.iter().map(|&n| (n - 1) as u64).sum::<u64>()
    }

    /// The prime `p` if every invariant factor is a power of `p`.
    pub fn p_group_prime(&self) -> Option<u32> {
        let p = smallest_prime_factor(self.factors[0] as u64) as u32;
        self.factors
            .iter()
            .all(|&n| is_power_of(n as u64, p as u64))
            .then_some(p)
    }

    /// `Some(p)` iff the group is `C_p^r` for a prime `p`.
    pub fn elementary_prime(&self) -> Option<u32> {
        let p = self.factors[0];
        (is_prime(p as u64) && self.factors.iter().all(|&n| n == p)).then_some(p)
    }

    /// `Some((p, n))` iff the group is `C_{p^n}^r`.
    pub fn homocyclic_prime_power(&self) -> Option<(u32, u32)> {
        let q = self.factors[0];
        if self.factors.iter().any(|&n| n != q) {
            return None;
        }
        let p = self.p_group_prime()?;
        let mut n = 0;
        let mut x = q;
        while x > 1 {
            x /= p;
            n += 1;
        }
        Some((p, n))
    }

    pub fn zero(&self) -> Element {
        Element(vec![0; self.rank()])
    }

    /// Builds an element from arbitrary integers, reducing each coordinate.
    pub fn reduce(&self, coords: &[i64]) -> Result<Element> {
        self.check_arity(coords.len())?;
        Ok(Element(
            coords
                .iter()
                .zip(&self.factors)
                .map(|(&x, &n)| x.rem_euclid(n as i64) as u32)
                .collect(),
        ))
    }

    /// Builds an element from residues that must already lie in `[0, n_i)`.
    pub fn element(&self, residues: &[i64]) -> Result<Element> {
        self.check_arity(residues.len())?;
        for (i, (&x, &n)) in residues.iter().zip(&self.factors).enumerate() {
            if x < 0 || x >= n as i64 {
                return Err(Error::InvalidElement(format!(
                    "coordinate {i} = {x} outside [0, {n})"
                )));
            }
        }
        Ok(Element(residues.iter().map(|&x| x as u32).collect()))
    }

    pub fn parse_element(&self, text: &str) -> Result<Element> {
        self.element(&Element::parse(text)?)
    }

    /// The `i`-th standard generator `e_i`.
    pub fn basis(&self, i: usize) -> Element {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        Element(v)
    }

    pub fn validate(&self, g: &Element) -> Result<()> {
        self.check_arity(g.arity())?;
        for (i, (&x, &n)) in g.0.iter().zip(&self.factors).enumerate() {
            if x >= n {
                return Err(Error::InvalidElement(format!(
                    "coordinate {i} = {x} outside [0, {n})"
                )));
            }
        }
        Ok(())
    }

    fn check_arity(&self, len: usize) -> Result<()> {
        if len != self.rank() {
            return Err(Error::InvalidElement(format!(
                "arity {len} does not match group rank {}",
                self.rank()
            )));
        }
        Ok(())
    }

    pub fn add(&self, g: &Element, h: &Element) -> Result<Element> {
        self.validate(g)?;
        self.validate(h)?;
        Ok(self.add_unchecked(g, h))
    }

    pub(crate) fn add_unchecked(&self, g: &Element, h: &Element) -> Element {
        Element(
            g.0.iter()
                .zip(&h.0)
                .zip(&self.factors)
                .map(|((&a, &b), &n)| ((a as u64 + b as u64) % n as u64) as u32)
                .collect(),
        )
    }

    pub fn neg(&self, g: &Element) -> Result<Element> {
        self.scalar_mul(-1, g)
    }

    pub fn sub(&self, g: &Element, h: &Element) -> Result<Element> {
        let minus_h = self.neg(h)?;
        self.add(g, &minus_h)
    }

    /// `c·g`, with negative `c` allowed.
    pub fn scalar_mul(&self, c: i64, g: &Element) -> Result<Element> {
        self.validate(g)?;
        Ok(self.scalar_mul_unchecked(c, g))
    }

    pub(crate) fn scalar_mul_unchecked(&self, c: i64, g: &Element) -> Element {
        Element(
            g.0.iter()
                .zip(&self.factors)
                .map(|(&x, &n)| {
                    let n = n as i128;
                    ((c as i128 * x as i128).rem_euclid(n)) as u32
                })
                .collect(),
        )
    }

    /// Least `m ≥ 1` with `m·g = 0`: the lcm of the coordinate orders.
    pub fn order_of(&self, g: &Element) -> Result<u64> {
        self.validate(g)?;
        Ok(g.0.iter().zip(&self.factors).fold(1u64, |acc, (&x, &n)| {
            let ord = n as u64 / gcd(x as u64, n as u64);
            lcm(acc, ord)
        }))
    }

    /// Mixed-radix index with the first coordinate most significant, so the
    /// index order agrees with the lexicographic element order.
    pub fn index_of(&self, g: &Element) -> usize {
        g.0.iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    pub fn element_at(&self, mut index: usize) -> Element {
        let mut v = vec![0u32; self.rank()];
        for (slot, &n) in v.iter_mut().zip(&self.factors).rev() {
            *slot = (index % n as usize) as u32;
            index /= n as usize;
        }
        Element(v)
    }

    /// All elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((p, n)) = self.homocyclic_prime_power() {
            return write!(f, "{p}^{n}^{}", self.rank());
        }
        for (i, n) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

impl FromStr for GroupSpec {
    type Err = Error;

    /// Accepts `"p^n^r"` (e.g. `"3^2^3"` for `C_9^3`) or a comma list of
    /// invariant factors (`"9,9,9"`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |what: &str| Error::InvalidGroup(format!("{what} in group spec {s:?}"));
        if s.contains('^') {
            let parts: Vec<&str> = s.split('^').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(bad("expected p^n^r"));
            }
            let p: u32 = parts[0].parse().map_err(|_| bad("bad prime"))?;
            let n: u32 = parts[1].parse().map_err(|_| bad("bad exponent"))?;
            let r: usize = parts[2].parse().map_err(|_| bad("bad rank"))?;
            return GroupSpec::homocyclic(p, n, r);
        }
        let factors = s
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad("bad invariant factor")))
            .collect::<Result<Vec<_>>>()?;
        GroupSpec::new(factors)
    }
}

impl TryFrom<String> for GroupSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupSpec> for String {
    fn from(g: GroupSpec) -> String {
        g.to_string()
    }
}

/// The multiplication-by-`p^{n−1}` map `C_{p^n}^r → C_p^r` together with the
/// divide-by-`p` identification of its kernel with `C_{p^{n−1}}^r`.
#[derive(Clone, Debug)]
pub struct PowerProjection {
    source: GroupSpec,
    image: GroupSpec,
    kernel: GroupSpec,
    p: u32,
    n: u32,
}

impl PowerProjection {
    pub fn new(source: &GroupSpec) -> Result<Self> {
        let (p, n) = source.homocyclic_prime_power().ok_or_else(|| {
            Error::UnsupportedGroup(format!("{source} is not homocyclic of prime-power exponent"))
        })?;
        if n < 2 {
            return Err(Error::UnsupportedGroup(format!(
                "{source} has exponent {p}; the projection needs p^n with n ≥ 2"
            )));
        }
        Ok(PowerProjection {
            source: source.clone(),
            image: GroupSpec::homocyclic(p, 1, source.rank())?,
            kernel: GroupSpec::homocyclic(p, n - 1, source.rank())?,
            p,
            n,
        })
    }

    pub fn source(&self) -> &GroupSpec {
        &self.source
    }

    /// `C_p^r`.
    pub fn image(&self) -> &GroupSpec {
        &self.image
    }

    /// `C_{p^{n−1}}^r`.
    pub fn kernel(&self) -> &GroupSpec {
        &self.kernel
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn exponent_power(&self) -> u32 {
        self.n
    }

    /// `g ↦ p^{n−1}·g`, read in `C_p^r` by dividing by `p^{n−1}`; this is
    /// coordinate-wise reduction mod `p`.
    pub fn project(&self, g: &Element) -> Result<Element> {
        self.source.validate(g)?;
        Ok(Element(g.0.iter().map(|&x| x % self.p).collect()))
    }

    pub fn in_kernel(&self, g: &Element) -> bool {
        g.0.iter().all(|&x| x % self.p == 0)
    }

    pub fn kernel_iso(&self, g: &Element) -> Result<Element> {
        self.source.validate(g)?;
        if !self.in_kernel(g) {
            return Err(Error::NotInKernel(g.to_string()));
        }
        Ok(Element(g.0.iter().map(|&x| x / self.p).collect()))
    }

    pub fn kernel_iso_inverse(&self, k: &Element) -> Result<Element> {
        self.kernel.validate(k)?;
        Ok(Element(k.0.iter().map(|&x| x * self.p).collect()))
    }
}

/// Element arithmetic on mixed-radix indices, for the inner loops of the DP
/// and the search.
#[derive(Clone, Debug)]
pub(crate) struct Indexer {
    factors: Vec<u32>,
    order: usize,
}

impl Indexer {
    pub(crate) fn new(group: &GroupSpec) -> Self {
        Indexer {
            factors: group.factors().to_vec(),
            order: group.order() as usize,
        }
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    fn combine(&self, a: usize, b: usize, ca: u64, cb: u64) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0usize;
        let mut place = 1usize;
        for &n in self.factors.iter().rev() {
            let n = n as usize;
            let v = ((a % n) as u64 * ca + (b % n) as u64 * cb) % n as u64;
            out += v as usize * place;
            a /= n;
            b /= n;
            place *= n;
        }
        out
    }

    pub(crate) fn add(&self, a: usize, b: usize) -> usize {
        self.combine(a, b, 1, 1)
    }

    /// `c·a` for `c ≥ 0`.
    pub(crate) fn scale(&self, c: u64, a: usize) -> usize {
        self.combine(a, 0, c % self.max_factor(), 0)
    }

    pub(crate) fn neg(&self, a: usize) -> usize {
        self.scale(self.max_factor() - 1, a)
    }

    fn max_factor(&self) -> u64 {
        *self.factors.last().unwrap() as u64
    }

    /// `x ↦ x + g` as an index permutation.
    pub(crate) fn translation(&self, g: usize) -> Vec<u32> {
        (0..self.order).map(|x| self.add(x, g) as u32).collect()
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && smallest_prime_factor(n) == n
}

fn smallest_prime_factor(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 1;
    }
    n
}

fn is_power_of(mut n: u64, p: u64) -> bool {
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> GroupSpec {
        s.parse().unwrap()
    }

    fn e(grp: &GroupSpec, v: &[i64]) -> Element {
        grp.element(v).unwrap()
    }

    #[test]
    fn parses_both_spec_forms() {
        assert_eq!(g("3^2^3").factors(), &[9, 9, 9]);
        assert_eq!(g("9,9,9"), g("3^2^3"));
        assert_eq!(g("2, 6").factors(), &[2, 6]);
        assert_eq!(g("3^2^3").to_string(), "3^2^3");
        assert_eq!(g("2,6").to_string(), "2,6");
        assert!("3,4".parse::<GroupSpec>().is_err());
        assert!("1,3".parse::<GroupSpec>().is_err());
        assert!("4^1^3".parse::<GroupSpec>().is_err());
        assert!("3^3".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn structural_invariants() {
        let c = g("3^2^3");
        assert_eq!(c.rank(), 3);
        assert_eq!(c.exponent(), 9);
        assert_eq!(c.order(), 729);
        assert_eq!(c.davenport_star(), 25);
        assert_eq!(g("3^1^3").davenport_star(), 7);
        assert_eq!(g("5^1^3").davenport_star(), 13);
        assert_eq!(g("2,6").p_group_prime(), None);
        assert_eq!(g("3,9").p_group_prime(), Some(3));
        assert_eq!(g("3,9").elementary_prime(), None);
        assert_eq!(g("3,9").homocyclic_prime_power(), None);
        assert_eq!(c.homocyclic_prime_power(), Some((3, 2)));
    }

    #[test]
    fn davenport_star_closed_forms() {
        for p in [2u32, 3, 5, 7] {
            for r in 1..5usize {
                let grp = GroupSpec::elementary(p, r).unwrap();
                assert_eq!(grp.davenport_star(), r as u64 * (p as u64 - 1) + 1);
            }
            for n in 1..4u32 {
                let grp = GroupSpec::homocyclic(p, n, 3).unwrap();
                assert_eq!(grp.davenport_star(), 3 * (p as u64).pow(n) - 2);
            }
        }
    }

    #[test]
    fn add_examples() {
        let c3 = g("3^1^3");
        let c9 = g("3^2^3");
        assert_eq!(c3.add(&e(&c3, &[1, 0, 0]), &e(&c3, &[2, 0, 0])).unwrap(), c3.zero());
        assert_eq!(c3.add(&e(&c3, &[1, 1, 1]), &c3.zero()).unwrap(), e(&c3, &[1, 1, 1]));
        assert_eq!(c9.add(&e(&c9, &[5, 5, 5]), &e(&c9, &[4, 4, 4])).unwrap(), c9.zero());
        let wrong = Element(vec![1, 0]);
        assert!(matches!(c3.add(&wrong, &c3.zero()), Err(Error::InvalidElement(_))));
    }

    #[test]
    fn scalar_mul_examples() {
        let c3 = g("3^1^3");
        let c9 = g("3^2^3");
        assert_eq!(c3.scalar_mul(3, &e(&c3, &[1, 1, 1])).unwrap(), c3.zero());
        assert_eq!(c3.scalar_mul(-1, &e(&c3, &[1, 1, 0])).unwrap(), e(&c3, &[2, 2, 0]));
        assert_eq!(c9.scalar_mul(2, &e(&c9, &[4, 0, 1])).unwrap(), e(&c9, &[8, 0, 2]));
    }

    #[test]
    fn order_examples() {
        let c9 = g("3^2^3");
        assert_eq!(c9.order_of(&c9.zero()).unwrap(), 1);
        assert_eq!(c9.order_of(&e(&c9, &[1, 0, 0])).unwrap(), 9);
        assert_eq!(c9.order_of(&e(&c9, &[3, 0, 0])).unwrap(), 3);
        let mixed = g("2,6");
        assert_eq!(mixed.order_of(&e(&mixed, &[1, 3])).unwrap(), 2);
        assert_eq!(mixed.order_of(&e(&mixed, &[1, 2])).unwrap(), 6);
    }

    #[test]
    fn element_range_checks() {
        let c3 = g("3^1^3");
        assert!(c3.element(&[3, 0, 0]).is_err());
        assert!(c3.element(&[-1, 0, 0]).is_err());
        assert_eq!(c3.reduce(&[-1, 4, 3]).unwrap(), e(&c3, &[2, 1, 0]));
        assert_eq!(c3.parse_element("1, 0,2").unwrap(), e(&c3, &[1, 0, 2]));
    }

    #[test]
    fn index_round_trip_matches_lex_order() {
        let grp = g("2,4");
        let all: Vec<Element> = grp.elements().collect();
        assert_eq!(all.len(), 8);
        for (i, x) in all.iter().enumerate() {
            assert_eq!(grp.index_of(x), i);
        }
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn projection_examples() {
        let c9 = g("3^2^3");
        let pi = PowerProjection::new(&c9).unwrap();
        let c3 = pi.image().clone();
        assert_eq!(pi.project(&e(&c9, &[1, 0, 0])).unwrap(), e(&c3, &[1, 0, 0]));
        assert_eq!(pi.project(&e(&c9, &[3, 6, 0])).unwrap(), c3.zero());
        assert_eq!(pi.project(&e(&c9, &[8, 4, 2])).unwrap(), e(&c3, &[2, 1, 2]));
        assert!(matches!(
            PowerProjection::new(&c3),
            Err(Error::UnsupportedGroup(_))
        ));
    }

    #[test]
    fn projection_agrees_with_multiplication() {
        // p^{n-1}·x mod p^n, divided by p^{n-1}
        let c27 = g("3^3^3");
        let pi = PowerProjection::new(&c27).unwrap();
        for x in c27.elements().step_by(37) {
            let scaled = c27.scalar_mul(9, &x).unwrap();
            let read: Vec<u32> = scaled.residues().iter().map(|&v| v / 9).collect();
            assert_eq!(pi.project(&x).unwrap().residues(), &read[..]);
        }
    }

    #[test]
    fn kernel_iso_examples() {
        let c9 = g("3^2^3");
        let pi = PowerProjection::new(&c9).unwrap();
        let k = pi.kernel().clone();
        assert_eq!(pi.kernel_iso(&e(&c9, &[3, 6, 0])).unwrap(), e(&k, &[1, 2, 0]));
        assert_eq!(pi.kernel_iso(&c9.zero()).unwrap(), k.zero());
        assert!(matches!(
            pi.kernel_iso(&e(&c9, &[1, 0, 0])),
            Err(Error::NotInKernel(_))
        ));

        let c27 = g("3^3^3");
        let pi27 = PowerProjection::new(&c27).unwrap();
        let k9 = pi27.kernel().clone();
        assert_eq!(k9, c9);
        assert_eq!(pi27.kernel_iso(&e(&c27, &[6, 3, 3])).unwrap(), e(&k9, &[2, 1, 1]));
    }
}
