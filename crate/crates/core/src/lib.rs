//! p-adic SL(2) involutions, Bruhat-Tits trees and Chabauty-limit experiments.

pub mod archimedean;
pub mod bttree;
pub mod chabauty;
pub mod cli;
pub mod padic;
pub mod sl2;
