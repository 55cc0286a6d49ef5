use thiserror::Error;

use crate::bitio::BitError;
use crate::container::ContainerError;
use crate::fam_codec::FamError;
use crate::static_codec::StaticError;
use crate::tokenizer::TokenizerError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Fam(#[from] FamError),
    #[error(transparent)]
    Static(#[from] StaticError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("archive dictionary is filtered; configure DICT_FILTER_CMD to read it")]
    FilterRequired,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("decoded output does not match: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
