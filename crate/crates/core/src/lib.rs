//! Higher-rank symmetric-space geometry for `SL(n,R)/SO(n)` and a
//! local-to-global certifier for Morse (Anosov) actions of free groups.
//!
//! The crate is `no_std` with `alloc`. All geometry is generic over a
//! [`Real`] scalar: `f64` for everyday use and [`Mp`] when long words push
//! orbit points beyond double precision.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cartan;
pub mod cones;
pub mod dynamics;
pub mod error;
pub mod flags;
pub mod linalg;
pub mod morse;
pub mod real;
pub mod sample;
pub mod schottky;
pub mod tolerance;
pub mod words;

pub use cartan::{
    cartan_vector, iota, midpoint, regularity_margin, riemannian_distance, theta_contains, CartanVector,
    FaceType, GroupElement, Point, ThetaSet,
};
pub use error::{Error, Result};
pub use flags::{Flag, ZetaType};
pub use linalg::Mat;
pub use real::{Mp, Real};
pub use tolerance::Tolerances;
