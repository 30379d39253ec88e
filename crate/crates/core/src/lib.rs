//! Exact higher-order Fourier analysis over F_p^n for p in {2, 3, 5}.

pub mod acceptance;
pub mod analysis;
pub mod cyclo;
pub mod error;
pub mod field;
pub mod fpspace;
pub mod integrate;
pub mod ledger;
pub mod mforms;
pub mod ncpoly;
pub mod par;
pub mod pipeline;
pub mod rank;
pub mod symmetrize;
pub mod torus;

pub use error::{Error, Result};
pub use field::Prime;
