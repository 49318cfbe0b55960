pub mod arith;
pub mod assisted;
pub mod cm;
pub mod error;
pub mod formulas;
pub mod mass;
pub mod qsqrtp;
pub mod quad;
pub mod selectivity;
