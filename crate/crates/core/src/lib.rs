pub mod frames;
pub mod invert;
pub mod limits;
pub mod numverify;
pub mod opalgebra;
pub mod pipeline;
pub mod selftest;
pub mod specfun;
pub mod symexpr;
