//! Simulation toolkit for randomized benchmarking of analogue quantum
//! simulators: disordered XY-model unitary ensembles, noisy forward/backward
//! time evolution, survival-probability datasets, decay-curve fitting, and
//! unitary 2-design diagnostics.

pub mod analysis;
pub mod design;
pub mod hamiltonians;
pub mod noise;
pub mod qspace;
pub mod rng;
pub mod runner;
