//! Independent oracles and the acceptance criteria for `gecgraph`.

pub mod criteria;
pub mod dsl;
pub mod naive;
pub mod oracles;
