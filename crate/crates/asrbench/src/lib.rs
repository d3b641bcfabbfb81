//! A desk-scale speech-to-text training benchmark harness.
//!
//! The crate covers the full pipeline on commodity CPUs: audio feature
//! extraction (Log Mel + MFCC), a CNN/LSTM/FFNN acoustic model trained
//! with CTC loss and AdaDelta, dictionary-constrained beam search
//! decoding, synchronous data-parallel training across worker threads,
//! and the measurement suite (WER/CER, time-to-accuracy, throughput,
//! utilization sampling) needed to benchmark training efficiency.

pub mod gradcheck;
pub mod nn;
pub mod tensor;
