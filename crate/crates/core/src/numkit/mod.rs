//! Exact arithmetic substrate: rationals, fixed-precision p-adic integers and
//! finite fields.

pub mod fq;
pub mod padic;
pub mod rat;

pub use fq::{fq_pow, FqElt, FqField};
pub use padic::{big_pow, int_valuation, is_prime, teichmuller_digits, PadicInt};
pub use rat::{rat_cmp, Rat};
