//! Word-wise tokenization.
//!
//! `Lossless` splits input into alternating runs of word bytes (ASCII
//! letters and digits) and non-word bytes, so concatenating the tokens
//! gives back the input. `Paper` keeps only ASCII-alphabetic runs,
//! lowercased, and is meant for benchmark comparability only.

use std::fmt;
use std::ops::Deref;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TokenizerMode {
    #[default]
    Lossless,
    Paper,
}

impl TokenizerMode {
    pub fn name(self) -> &'static str {
        match self {
            TokenizerMode::Lossless => "lossless",
            TokenizerMode::Paper => "paper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenizerError {
    #[error("paper-mode token streams cannot be detokenized to the original bytes")]
    ModeError,
}

/// A nonempty byte string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(Vec<u8>);

impl Token {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Option<Self> {
        let bytes = bytes.into();
        (!bytes.is_empty()).then_some(Token(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for Token {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", String::from_utf8_lossy(&self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub tokens: Vec<Token>,
    pub mode: TokenizerMode,
}

impl TokenSequence {
    pub fn new(tokens: Vec<Token>, mode: TokenizerMode) -> Self {
        Self { tokens, mode }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[inline]
pub fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric()
}

pub fn tokenize(input: &[u8], mode: TokenizerMode) -> TokenSequence {
    let tokens = match mode {
        TokenizerMode::Lossless => input
            .chunk_by(|a, b| is_word_byte(*a) == is_word_byte(*b))
            .map(|run| Token(run.to_vec()))
            .collect(),
        TokenizerMode::Paper => input
            .split(|b| !b.is_ascii_alphabetic())
            .filter(|run| !run.is_empty())
            .map(|run| Token(run.to_ascii_lowercase()))
            .collect(),
    };
    TokenSequence { tokens, mode }
}

pub fn detokenize(seq: &TokenSequence) -> Result<Vec<u8>, TokenizerError> {
    if seq.mode == TokenizerMode::Paper {
        return Err(TokenizerError::ModeError);
    }
    Ok(seq.tokens.iter().flat_map(|t| t.iter().copied()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strs(seq: &TokenSequence) -> Vec<String> {
        seq.tokens
            .iter()
            .map(|t| String::from_utf8(t.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn lossless_runs() {
        let seq = tokenize(b"Hi, hi!", TokenizerMode::Lossless);
        assert_eq!(strs(&seq), ["Hi", ", ", "hi", "!"]);
        assert_eq!(detokenize(&seq).unwrap(), b"Hi, hi!");
    }

    #[test]
    fn paper_mode_drops_punctuation_and_case() {
        let seq = tokenize(b"Hi, hi!", TokenizerMode::Paper);
        assert_eq!(strs(&seq), ["hi", "hi"]);
        let seq = tokenize(b"R2D2 can't", TokenizerMode::Paper);
        assert_eq!(strs(&seq), ["r", "d", "can", "t"]);
    }

    #[test]
    fn empty_input() {
        for mode in [TokenizerMode::Lossless, TokenizerMode::Paper] {
            assert!(tokenize(b"", mode).is_empty());
        }
        assert_eq!(
            detokenize(&TokenSequence::default()).unwrap(),
            Vec::<u8>::new()
        );
    }

    #[test]
    fn paper_sequence_is_not_detokenizable() {
        let seq = tokenize(b"Hi, hi!", TokenizerMode::Paper);
        assert_eq!(detokenize(&seq), Err(TokenizerError::ModeError));
    }

    #[test]
    fn utf8_is_non_word() {
        let seq = tokenize("naïve".as_bytes(), TokenizerMode::Lossless);
        assert_eq!(seq.len(), 3);
    }

    #[test]
    fn token_rejects_empty() {
        assert!(Token::new(Vec::new()).is_none());
        assert_eq!(Token::new("a").unwrap().as_bytes(), b"a");
    }

    proptest! {
        #[test]
        fn lossless_roundtrip(input in proptest::collection::vec(any::<u8>(), 0..65536)) {
            let seq = tokenize(&input, TokenizerMode::Lossless);
            prop_assert_eq!(detokenize(&seq).unwrap(), input);
        }

        #[test]
        fn lossless_classes_alternate(input in proptest::collection::vec(
            prop_oneof![Just(b'a'), Just(b'7'), Just(b' '), Just(b','), any::<u8>()], 0..512)) {
            let seq = tokenize(&input, TokenizerMode::Lossless);
            for t in &seq.tokens {
                let class = is_word_byte(t[0]);
                prop_assert!(t.iter().all(|&b| is_word_byte(b) == class));
            }
            for pair in seq.tokens.windows(2) {
                prop_assert_ne!(is_word_byte(pair[0][0]), is_word_byte(pair[1][0]));
            }
        }

        #[test]
        fn paper_tokens_are_lowercase_letters(input in proptest::collection::vec(any::<u8>(), 0..2048)) {
            let seq = tokenize(&input, TokenizerMode::Paper);
            for t in &seq.tokens {
                prop_assert!(!t.is_empty() && t.iter().all(|b| b.is_ascii_lowercase()));
            }
        }
    }
}
