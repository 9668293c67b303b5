//! Symmetry analysis and numerical verification toolkit for the generalized
//! Korteweg–de Vries equation `u_t = f(u) u_x + u_xxx`.

// `!(x > 0.0)` deliberately rejects NaN together with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod expr;
pub mod fd;
pub mod ode;
pub mod pde;
pub mod quad;
pub mod reduce;
pub mod soliton;
pub mod travelwave;

pub use error::{Error, Result};
pub use expr::{parse, DomainInterval, Expr};
