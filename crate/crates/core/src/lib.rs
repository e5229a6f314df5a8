//! Zero-sum invariants of finite abelian groups.
//!
//! Groups are given in invariant-factor form `C_{n_1} ⊕ … ⊕ C_{n_r}` with
//! `n_1 | … | n_r`; sequences are finite multisets over them.

pub mod congruence;
pub mod construct;
pub mod dp;
pub mod error;
pub mod group;
pub mod lengths;
pub mod lifting;
pub mod sequence;
pub mod search;
pub mod selftest;
pub mod symmetry;

pub use dp::{CountTable, Witness, ZeroSumDp};
pub use error::{Error, Result};
pub use group::{Element, GroupSpec, PowerProjection};
pub use lengths::LengthSet;
pub use sequence::Sequence;
