//! Zero-sum subsequences of lengths `2·3^n`, `3·3^n` and `5·3^n` in long
//! sequences over `C_{3^n}^3`.
//!
//! `find_2x` lifts through the projection `C_{3^n}^3 → C_3^3`: it peels off
//! `7·3^{n−1} − 8` disjoint blocks of length 3 whose projections sum to zero,
//! reads their sums in the kernel `C_{3^{n−1}}^3` and recurses on that
//! sequence of block sums.

use serde::Serialize;

use crate::dp::{Witness, ZeroSumDp};
use crate::error::{Error, Result};
use crate::group::{Element, GroupSpec, PowerProjection};
use crate::sequence::Sequence;

/// A verified witness and the number of projection steps taken to find it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lifted {
    pub witness: Witness,
    pub recursion_depth: u32,
}

/// The exponent power `n` of `C_{3^n}^3`.
fn three_power(group: &GroupSpec) -> Result<u32> {
    match group.homocyclic_prime_power() {
        Some((3, n)) if group.rank() == 3 => Ok(n),
        _ => Err(Error::UnsupportedGroup(format!("{group} is not C_{{3^n}}^3"))),
    }
}

fn require_length(s: &Sequence, need: u64, what: &str) -> Result<()> {
    if s.length() < need {
        return Err(Error::Precondition(format!(
            "{what} needs |S| ≥ {need}, got {}",
            s.length()
        )));
    }
    Ok(())
}

fn pow3(n: u32) -> u64 {
    3u64.pow(n)
}

fn checked(source: &Sequence, sub: Sequence, target_length: u64, recursion_depth: u32) -> Result<Lifted> {
    let witness = Witness { sub, target_length };
    witness.verify(source)?;
    Ok(Lifted {
        witness,
        recursion_depth,
    })
}

fn direct(dp: &ZeroSumDp, s: &Sequence, k: u64, what: &str) -> Result<Sequence> {
    dp.find_zero_sum_of_length(s, k)?
        .map(|w| w.sub)
        .ok_or_else(|| Error::InvariantViolation(format!("{what}: no zero-sum of length {k} in {s}")))
}

/// A zero-sum subsequence of length `2·3^n`, given `|S| ≥ 7·3^n − 8`.
pub fn find_2x(s: &Sequence) -> Result<Lifted> {
    find_2x_with(&ZeroSumDp::default(), s)
}

pub fn find_2x_with(dp: &ZeroSumDp, s: &Sequence) -> Result<Lifted> {
    let n = three_power(s.group())?;
    require_length(s, 7 * pow3(n) - 8, "find_2x")?;
    let target = 2 * pow3(n);
    if n == 1 {
        let sub = direct(dp, s, target, "find_2x")?;
        return checked(s, sub, target, 0);
    }

    let proj = PowerProjection::new(s.group())?;
    let t = 7 * pow3(n - 1) - 8;
    // residual elements paired with their projections, kept sorted
    let mut residual: Vec<(Element, Element)> = s
        .expanded()
        .into_iter()
        .map(|g| Ok((proj.project(&g)?, g)))
        .collect::<Result<_>>()?;
    residual.sort();
    let mut blocks: Vec<Sequence> = Vec::with_capacity(t as usize);
    for i in 0..t {
        let left = residual.len() as u64;
        if left != s.length() - 3 * i || left < 19 {
            return Err(Error::InvariantViolation(format!(
                "block {i}: residual length {left} out of step"
            )));
        }
        let projected = Sequence::from_elements(proj.image(), residual.iter().map(|(p, _)| p.clone()))?;
        let pick = direct(dp, &projected, 3, "find_2x block extraction")?;
        let mut block = Vec::with_capacity(3);
        for (class, m) in pick.entries() {
            // the m smallest residual elements over this class
            let start = residual.partition_point(|(p, _)| p < class);
            for (_, g) in residual.drain(start..start + *m as usize) {
                block.push(g);
            }
        }
        blocks.push(Sequence::from_elements(s.group(), block)?);
    }

    let sums = blocks
        .iter()
        .map(|b| proj.kernel_iso(&b.sigma()))
        .collect::<Result<Vec<_>>>()?;
    let lifted = Sequence::from_elements(proj.kernel(), sums.iter().cloned())?;
    let inner = find_2x_with(dp, &lifted)?;

    // take, for each chosen block sum, the first unused block with that sum
    let mut used = vec![false; blocks.len()];
    let mut chosen = Sequence::empty(s.group());
    for (h, m) in inner.witness.sub.entries() {
        for _ in 0..*m {
            let i = (0..blocks.len())
                .find(|&i| !used[i] && &sums[i] == h)
                .ok_or_else(|| Error::InvariantViolation(format!("no block left with sum {h}")))?;
            used[i] = true;
            chosen = chosen.concat(&blocks[i])?;
        }
    }
    checked(s, chosen, target, inner.recursion_depth + 1)
}

/// A zero-sum subsequence of length `3·3^n`, given `|S| ≥ 6·3^n − 3`.
pub fn find_3x(s: &Sequence) -> Result<Lifted> {
    find_3x_with(&ZeroSumDp::default(), s)
}

pub fn find_3x_with(dp: &ZeroSumDp, s: &Sequence) -> Result<Lifted> {
    let n = three_power(s.group())?;
    require_length(s, 6 * pow3(n) - 3, "find_3x")?;
    let target = 3 * pow3(n);
    let sub = direct(dp, s, target, "find_3x")?;
    checked(s, sub, target, 0)
}

/// A zero-sum subsequence of length `5·3^n`, given `|S| ≥ 8·3^n − 3`: a
/// `2·3^n` piece from `find_2x` joined with a `3·3^n` piece of the rest.
pub fn find_5x(s: &Sequence) -> Result<Lifted> {
    find_5x_with(&ZeroSumDp::default(), s)
}

pub fn find_5x_with(dp: &ZeroSumDp, s: &Sequence) -> Result<Lifted> {
    let n = three_power(s.group())?;
    require_length(s, 8 * pow3(n) - 3, "find_5x")?;
    let first = find_2x_with(dp, s)?;
    let rest = s.remove(&first.witness.sub)?;
    let second = find_3x_with(dp, &rest)?;
    let sub = first.witness.sub.concat(&second.witness.sub)?;
    checked(s, sub, 5 * pow3(n), first.recursion_depth)
}
