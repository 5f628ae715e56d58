pub mod logic;
pub mod generator;
pub mod verifier;
pub mod fol;
pub mod explain;
pub mod pipeline;
pub mod interface;
