pub mod burgers_mean;
pub mod chaos;
pub mod cli;
pub mod combinatorics;
pub mod config;
pub mod multiindex;
pub mod noise;
pub mod pde;
pub mod propagator;
pub mod validate;
