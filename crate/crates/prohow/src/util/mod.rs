pub mod par;
pub mod rng;
pub mod text;

pub use rng::SplitMix64;
