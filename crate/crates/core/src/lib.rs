//! Geographic routing on raw anchor-distance coordinates.
//!
//! Nodes are addressed by the vector of their distances to a handful of
//! anchors instead of by localized `(x, y)` positions. This crate holds the
//! numerical core: n-dimensional vector algebra, the anchor coordinate map
//! and its differential geometry, unit-disk scenario generation, the routing
//! engine and the integral-curve analysis. It is `no_std` and needs only
//! `alloc`; file formats, experiments and the command line live in the
//! `anchor-sim` crate.
//!
//! ```
//! use anchor_coords::anchor_space::{eval_f, AnchorSet, PhysPoint};
//!
//! let anchors = AnchorSet::new(vec![
//!     PhysPoint::new(0.0, 0.0),
//!     PhysPoint::new(0.0, 1.0),
//!     PhysPoint::new(1.0, 0.0),
//! ])
//! .unwrap();
//! let f = eval_f(PhysPoint::new(0.0, 0.0), &anchors);
//! assert_eq!(f.as_slice(), &[0.0, 1.0, 1.0]);
//! ```

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod anchor_space;
mod error;
pub mod mdvec;
pub mod network;
pub mod routing;

pub use error::{Error, Result};
pub use mdvec::{VecN, EPS_NORM};
