//! Quadrature, root finding and special functions shared by every law.

pub mod quad;
pub mod roots;
pub mod special;
