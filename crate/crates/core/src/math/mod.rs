//! Dense linear algebra and the support-set operators shared by every algorithm.

pub mod lstsq;
pub mod matrix;
pub mod support;

pub use lstsq::{least_squares_on_support, pseudo_inverse, residual_projection, Qr};
pub use matrix::{dot, norm2, norm_off, norm_on, sub, DenseMatrix};
pub use support::{supp_select, supp_select_within, vote_accumulate, SupportSet, VoteVector};
