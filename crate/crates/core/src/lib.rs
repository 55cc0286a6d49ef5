//! Forward-adaptive tabled ANS (FAM-tANS) for word-tokenized text.
//!
//! The encoder starts from full token counts and decrements them as it
//! goes; the decoder runs backward and rebuilds the same tables from zero,
//! so no frequency table is stored. Static tANS baselines with three
//! spread functions, a byte-exact archive format and a benchmark harness
//! live alongside.

pub mod bench;
pub mod bitio;
pub mod container;
pub mod error;
pub mod fam_codec;
pub mod fam_model;
pub mod pipeline;
pub mod selftest;
pub mod static_codec;
pub mod tokenizer;

pub use container::{Algorithm, Archive, DictFilter};
pub use error::{Error, Result};
pub use tokenizer::{Token, TokenSequence, TokenizerMode};
