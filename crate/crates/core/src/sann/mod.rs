//! Salience-affected multilayer perceptron.

mod network;
mod propagate;
mod salience;
mod train;

pub use network::{init_network, SannNetwork, INPUT_WEIGHT_RANGE, OUTPUT_WEIGHT_RANGE};
pub use propagate::{activation, ForwardTrace, Gradients};
pub use salience::{d_adj, ReverseSalience, SalienceMode, SalienceTag};
pub use train::{epochs_to_fraction, train_multi_trial, train_single_trial, Example, LabeledExample, TrainParams};
