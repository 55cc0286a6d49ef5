//! File-level compression: tokenize, model, encode, archive, and back.

use crate::bitio::BitStack;
use crate::container::{
    decode_dict_blob, encode_dict_blob, Algorithm, Archive, DictFilter, DictSection,
    FilterDirection,
};
use crate::error::{Error, Result};
use crate::fam_codec;
use crate::fam_model::{index_text, IndexedText, Position, Symbol};
use crate::static_codec::{self, StaticError, StaticFrequencies};
use crate::tokenizer::{detokenize, tokenize, Token, TokenSequence, TokenizerMode};

/// Output of one codec run, before archiving.
#[derive(Debug, Clone)]
pub struct CodeOutput {
    pub code: BitStack,
    pub final_state: Option<usize>,
    pub freqs: Option<StaticFrequencies>,
}

/// Runs the codec for `algo` over dictionary ids. This is the part the
/// benchmark times.
pub fn encode_symbols(symbols: &[Symbol], dict_len: usize, algo: Algorithm) -> Result<CodeOutput> {
    check_size(symbols.len(), dict_len)?;
    let Some(strategy) = algo.spread() else {
        let enc = fam_codec::encode_symbols(symbols, dict_len);
        return Ok(CodeOutput {
            code: enc.code,
            final_state: None,
            freqs: None,
        });
    };
    let freqs = static_codec::count_frequencies(symbols, dict_len);
    if symbols.is_empty() {
        return Ok(CodeOutput {
            code: BitStack::new(),
            final_state: Some(0),
            freqs: Some(freqs),
        });
    }
    let table = static_codec::build_spread(strategy, &freqs, symbols)?;
    let (code, final_state) = static_codec::static_encode(symbols, &table, &freqs);
    Ok(CodeOutput {
        code,
        final_state: Some(final_state),
        freqs: Some(freqs),
    })
}

pub fn assemble_archive(
    dictionary: Vec<Token>,
    n: usize,
    mode: TokenizerMode,
    algo: Algorithm,
    output: &CodeOutput,
    filter: Option<&DictFilter>,
) -> Result<Archive> {
    let d = dictionary.len() as u64;
    let dictionary = match filter {
        Some(f) => DictSection::Filtered(f.apply(&encode_dict_blob(&dictionary), FilterDirection::Compress)?),
        None => DictSection::Entries(dictionary),
    };
    Ok(Archive {
        algo,
        mode,
        n: n as u64,
        d,
        final_state: output.final_state.map(|x| x as u64),
        dictionary,
        freqs: output
            .freqs
            .as_ref()
            .map(|f| f.counts.iter().map(|&c| c as u64).collect()),
        code: output.code.pack(),
    })
}

pub fn build_archive(seq: &TokenSequence, algo: Algorithm, filter: Option<&DictFilter>) -> Result<Archive> {
    let IndexedText {
        dictionary,
        symbols,
    } = index_text(&seq.tokens);
    let output = encode_symbols(&symbols, dictionary.len(), algo)?;
    assemble_archive(dictionary.into_entries(), symbols.len(), seq.mode, algo, &output, filter)
}

pub fn compress(input: &[u8], algo: Algorithm, mode: TokenizerMode, filter: Option<&DictFilter>) -> Result<Vec<u8>> {
    let seq = tokenize(input, mode);
    Ok(build_archive(&seq, algo, filter)?.to_bytes()?)
}

fn check_size(n: usize, d: usize) -> Result<()> {
    match n.checked_add(d) {
        Some(total) if total <= Position::MAX as usize => Ok(()),
        _ => Err(Error::Unsupported("text too long: more than 2^32 - 1 tokens plus entries")),
    }
}

fn to_usize(v: u64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Unsupported("count exceeds address space"))
}

pub fn archive_entries(archive: &Archive, filter: Option<&DictFilter>) -> Result<Vec<Token>> {
    match &archive.dictionary {
        DictSection::Entries(e) => Ok(e.clone()),
        DictSection::Filtered(blob) => {
            let filter = filter.ok_or(Error::FilterRequired)?;
            let raw = filter.apply(blob, FilterDirection::Decompress)?;
            Ok(decode_dict_blob(&raw, archive.d)?)
        }
    }
}

/// Decodes the dictionary ids stored in `archive`.
pub fn decode_archive_symbols(archive: &Archive) -> Result<Vec<Symbol>> {
    let n = to_usize(archive.n)?;
    let d = to_usize(archive.d)?;
    check_size(n, d)?;
    let code = archive.code.unpack()?;
    let Some(strategy) = archive.algo.spread() else {
        return Ok(fam_codec::decode_symbols(code, d, n)?);
    };
    if archive.algo == Algorithm::TextOrder {
        return Err(Error::Unsupported(
            "text-order spread tables depend on the text and cannot be rebuilt by a decoder",
        ));
    }
    let counts = archive
        .freqs
        .as_ref()
        .ok_or(Error::Unsupported("static archive without frequencies"))?
        .iter()
        .map(|&c| to_usize(c))
        .collect::<Result<Vec<_>>>()?;
    let freqs = StaticFrequencies::from_counts(counts);
    let final_state = to_usize(archive.final_state.unwrap_or(0))?;
    if n == 0 {
        if final_state != 0 || !code.is_empty() {
            return Err(StaticError::Corrupt("state or code present for empty text").into());
        }
        return Ok(Vec::new());
    }
    let table = static_codec::build_spread(strategy, &freqs, &[])?;
    Ok(static_codec::static_decode(code, final_state, &table, &freqs, n)?)
}

pub fn decode_archive(archive: &Archive, filter: Option<&DictFilter>) -> Result<TokenSequence> {
    let entries = archive_entries(archive, filter)?;
    let symbols = decode_archive_symbols(archive)?;
    let tokens = symbols
        .into_iter()
        .map(|id| entries[id as usize].clone())
        .collect();
    Ok(TokenSequence::new(tokens, archive.mode))
}

/// Paper-mode token streams are written one token per line.
pub fn render(seq: &TokenSequence) -> Vec<u8> {
    match seq.mode {
        TokenizerMode::Lossless => detokenize(seq).expect("lossless sequence"),
        TokenizerMode::Paper => {
            let mut out = Vec::with_capacity(seq.tokens.iter().map(|t| t.len() + 1).sum());
            for t in &seq.tokens {
                out.extend_from_slice(t);
                out.push(b'\n');
            }
            out
        }
    }
}

pub fn decompress(bytes: &[u8], filter: Option<&DictFilter>) -> Result<Vec<u8>> {
    let archive = Archive::from_bytes(bytes)?;
    Ok(render(&decode_archive(&archive, filter)?))
}

/// Decodes `bytes` and compares with `reference`: byte-for-byte for
/// lossless archives, token-for-token against the paper-mode tokenization
/// for paper archives.
pub fn verify(bytes: &[u8], reference: &[u8], filter: Option<&DictFilter>) -> Result<()> {
    let archive = Archive::from_bytes(bytes)?;
    let seq = decode_archive(&archive, filter)?;
    match seq.mode {
        TokenizerMode::Lossless => {
            let out = detokenize(&seq)?;
            if out != reference {
                let at = out.iter().zip(reference).position(|(a, b)| a != b).unwrap_or(out.len().min(reference.len()));
                return Err(Error::Mismatch(format!(
                    "first difference at byte {at}; decoded {} bytes, reference {} bytes",
                    out.len(),
                    reference.len()
                )));
            }
        }
        TokenizerMode::Paper => {
            let expected = tokenize(reference, TokenizerMode::Paper);
            if seq.tokens != expected.tokens {
                let at = seq
                    .tokens
                    .iter()
                    .zip(&expected.tokens)
                    .position(|(a, b)| a != b)
                    .unwrap_or(seq.len().min(expected.len()));
                return Err(Error::Mismatch(format!(
                    "first difference at token {at}; decoded {} tokens, reference {} tokens",
                    seq.len(),
                    expected.len()
                )));
            }
        }
    }
    Ok(())
}
