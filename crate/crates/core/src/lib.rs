//! Inference of 3-sort NFAs from labelled samples, and their use as
//! probabilistic word classifiers.
//!
//! Probabilistic types are generic over the [`Scalar`] used for weights and
//! probabilities; the aliases below fix it to `f64` or `f32`.

pub mod automaton;
pub mod classifier;
pub mod corpus;
pub mod decode;
pub mod encoding;
pub mod eval;
pub mod freqprob;
pub mod inference;
pub mod regexp;
pub mod scalar;
pub mod splitting;

pub use scalar::Scalar;

pub type WeightConfigF64 = freqprob::WeightConfig<f64>;
pub type WeightConfigF32 = freqprob::WeightConfig<f32>;
pub type WeightedFrequencyNfaF64 = freqprob::WeightedFrequencyNfa<f64>;
pub type WeightedFrequencyNfaF32 = freqprob::WeightedFrequencyNfa<f32>;
pub type ProbabilisticNfaF64 = freqprob::ProbabilisticNfa<f64>;
pub type ProbabilisticNfaF32 = freqprob::ProbabilisticNfa<f32>;
pub type ScorePairF64 = classifier::ScorePair<f64>;
pub type ScorePairF32 = classifier::ScorePair<f32>;
