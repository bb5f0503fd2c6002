pub mod doubleslit;
pub mod evolve;
pub mod gaps;
pub mod schmidt;
