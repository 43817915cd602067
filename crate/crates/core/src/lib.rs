//! Exact arithmetic for Tate-curve theta values, valuation scaling across
//! tuples of untilts, Teichmüller norms in the Fargues-Fontaine ring `B`, and
//! the formal-group log-link.
//!
//! Every quantity is exact: rationals, cyclotomic integers, p-adic integers
//! at a stated precision, or finite-field Hahn series with an explicit
//! truncation. Absolute values are carried as exponents `s = -log_p |x|`.

pub mod ansatz;
pub mod bring;
pub mod cyclo;
pub mod error;
pub mod loglink;
pub mod numkit;
pub mod pilot;
pub mod report;
pub mod tate;
pub mod tilt;
pub mod witt;

pub use error::{Error, Result};
pub use numkit::{FqElt, FqField, PadicInt, Rat};
