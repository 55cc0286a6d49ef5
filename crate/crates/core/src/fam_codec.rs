//! Forward-adaptive tANS.
//!
//! The encoder walks the text front to back with frequencies that start at
//! their full counts and fall to zero. Each symbol's table is the list of
//! its positions in the prepared text, restricted to the first `f[w]`
//! entries; the transition base `l` shrinks by one per prepared-text
//! position consumed, so every transition lands in `[l, 2l)`.
//!
//! The decoder runs back to front and rebuilds the prepared text as it
//! goes. Before each step it reads bits until `x >= L + 1`, where `L` is
//! the number of positions rebuilt so far; `p = x - (L + 1)` is then the
//! position the encoder targeted. `p == L` can only be the `lt` marker
//! referring to itself, and `lt` introduces the next dictionary entry from
//! the back. Frequencies grow from zero, so none are transmitted. The
//! encoder always finishes with `x = 1`, which is where decoding starts.

use std::hash::Hash;

use thiserror::Error;

use crate::bitio::BitStack;
use crate::fam_model::{
    build_indices, index_text, prepare, Dictionary, FrequencyTable, IndexLists, Position,
    Symbol,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamError {
    #[error("corrupt forward-adaptive code: {0}")]
    Corrupt(&'static str),
}

fn corrupt<T>(why: &'static str) -> Result<T, FamError> {
    Err(FamError::Corrupt(why))
}

/// One encoder transition, for instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodeStep {
    pub symbol: Symbol,
    /// `f[w]` used by the transition (before the decrement).
    pub freq: usize,
    /// State after renormalization, in `[freq, 2 * freq)`.
    pub renormalized: usize,
    /// Offset `l` used as the transition base.
    pub offset: usize,
    /// State after the transition, in `[offset, 2 * offset)`.
    pub state: usize,
    pub bits: usize,
}

#[derive(Debug, Clone)]
pub struct EncoderState {
    pub x: usize,
    pub offset: usize,
    pub freq: FrequencyTable,
    pub code: BitStack,
}

impl EncoderState {
    /// Starts with `x = l = n + d`, the prepared-text length.
    pub fn new(freq: FrequencyTable, prepared_len: usize) -> Self {
        Self {
            x: prepared_len,
            offset: prepared_len,
            freq,
            code: BitStack::new(),
        }
    }

    /// Picks the token itself while it still has frequency left, else `lt`
    /// (which also skips the token's own prepared-text slot).
    #[inline]
    pub fn select(&mut self, token: Symbol, lt: Symbol) -> Symbol {
        if self.freq.get(token) > 0 {
            token
        } else {
            self.offset -= 1;
            lt
        }
    }

    /// Renormalizes and transitions on `symbol`, whose ascending
    /// prepared-text positions are `positions`.
    ///
    /// Panics if `symbol` has no frequency left.
    #[inline]
    pub fn step(&mut self, symbol: Symbol, positions: &[Position]) -> EncodeStep {
        let f = self.freq.counts[symbol as usize];
        assert!(f > 0, "encoding symbol {symbol} with zero frequency");
        let (x, bits) = self.code.emit_until_below(self.x, 2 * f);
        let bits = bits as usize;
        let renormalized = x;
        let offset = self.offset;
        self.x = offset + positions[x - f] as usize;
        self.offset -= 1;
        self.freq.counts[symbol as usize] -= 1;
        EncodeStep {
            symbol,
            freq: f,
            renormalized,
            offset,
            state: self.x,
            bits,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FamEncoding {
    pub code: BitStack,
    pub final_state: usize,
    pub final_offset: usize,
}

/// Encodes dictionary ids (as produced by [`index_text`]).
pub fn encode_symbols(symbols: &[Symbol], dict_len: usize) -> FamEncoding {
    encode_symbols_traced(symbols, dict_len, |_| {})
}

pub fn encode_symbols_traced<F: FnMut(&EncodeStep)>(
    symbols: &[Symbol],
    dict_len: usize,
    mut trace: F,
) -> FamEncoding {
    if symbols.is_empty() {
        return FamEncoding {
            code: BitStack::new(),
            final_state: 0,
            final_offset: 0,
        };
    }
    let prepared = prepare(symbols, dict_len);
    let (indices, freq) = build_indices(&prepared);
    let lt = prepared.lt();
    let mut state = EncoderState::new(freq, prepared.len());
    for &token in symbols {
        let w = state.select(token, lt);
        let step = state.step(w, indices.list(w));
        trace(&step);
    }
    FamEncoding {
        code: state.code,
        final_state: state.x,
        final_offset: state.offset,
    }
}

/// Code bits plus the last-occurrence dictionary.
#[derive(Debug, Clone)]
pub struct FamEncoded<S> {
    pub code: BitStack,
    pub dictionary: Dictionary<S>,
    pub final_state: usize,
}

pub fn fam_encode<S: Eq + Hash + Clone>(text: &[S]) -> FamEncoded<S> {
    let indexed = index_text(text);
    let enc = encode_symbols(&indexed.symbols, indexed.dictionary.len());
    FamEncoded {
        code: enc.code,
        dictionary: indexed.dictionary,
        final_state: enc.final_state,
    }
}

/// One decoder transition, for instrumentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeStep {
    /// Decoded symbol (`lt` or a token id).
    pub symbol: Symbol,
    /// Token emitted by this step: `symbol` itself, or the dictionary entry
    /// an `lt` introduced.
    pub token: Symbol,
    /// Positions rebuilt before this step.
    pub len: usize,
    /// State after reading bits, in `[len + 1, 2 * (len + 1))`.
    pub renormalized: usize,
    pub position: usize,
    /// Frequency of `symbol` as seen by the decoder; equals the encoder's
    /// `f[w]` at the mirrored step.
    pub freq: usize,
    pub rank: usize,
    /// State after the step.
    pub state: usize,
    pub bits: usize,
}

/// Backward decoder.
///
/// The per-symbol position lists are kept implicitly: positions are
/// appended in increasing order, so the rank of a position within its
/// symbol's list is the list length at the time it was appended.
#[derive(Debug, Clone)]
pub struct DecoderState {
    pub x: usize,
    /// Rebuilt prepared-text positions `L`.
    pub len: usize,
    target: usize,
    lt: Symbol,
    recon: Vec<Symbol>,
    rank: Vec<usize>,
    counts: Vec<usize>,
    /// Dictionary entries not yet introduced; the next one is `cursor - 1`.
    pub cursor: usize,
    pub code: BitStack,
}

impl DecoderState {
    pub fn new(code: BitStack, dict_len: usize, n: usize) -> Result<Self, FamError> {
        if dict_len > n || (n > 0 && dict_len == 0) {
            return corrupt("dictionary size does not fit the token count");
        }
        if dict_len >= Symbol::MAX as usize {
            return corrupt("dictionary too large");
        }
        let Some(target) = n.checked_add(dict_len) else {
            return corrupt("token count overflow");
        };
        let cap = target.min(1 << 22);
        Ok(Self {
            x: 1,
            len: 0,
            target,
            lt: dict_len as Symbol,
            recon: Vec::with_capacity(cap),
            rank: Vec::with_capacity(cap),
            counts: vec![0; dict_len + 1],
            cursor: dict_len,
            code,
        })
    }

    pub fn is_done(&self) -> bool {
        self.len >= self.target
    }

    /// Rebuilt prepared text so far.
    pub fn recon(&self) -> &[Symbol] {
        &self.recon
    }

    #[inline]
    fn append(&mut self, symbol: Symbol) {
        let c = &mut self.counts[symbol as usize];
        self.rank.push(*c);
        *c += 1;
        self.recon.push(symbol);
    }

    pub fn step(&mut self) -> Result<DecodeStep, FamError> {
        let len = self.len;
        let threshold = len + 1;
        let Ok((x, bits)) = self.code.refill_until(self.x, threshold) else {
            return corrupt("bit stack exhausted");
        };
        let bits = bits as usize;
        let p = x - threshold;
        if p > len {
            return corrupt("target position beyond rebuilt text");
        }

        let (symbol, token, freq, rank);
        if p == len || self.recon[p] == self.lt {
            if self.cursor == 0 {
                return corrupt("more lt markers than dictionary entries");
            }
            if len + 2 > self.target {
                return corrupt("lt marker past the end of the text");
            }
            self.append(self.lt);
            rank = self.rank[p];
            freq = self.counts[self.lt as usize];
            self.cursor -= 1;
            let introduced = self.cursor as Symbol;
            self.append(introduced);
            symbol = self.lt;
            token = introduced;
            self.len += 2;
        } else {
            let w = self.recon[p];
            rank = self.rank[p];
            freq = self.counts[w as usize];
            self.append(w);
            symbol = w;
            token = w;
            self.len += 1;
        }
        self.x = freq + rank;
        Ok(DecodeStep {
            symbol,
            token,
            len,
            renormalized: x,
            position: p,
            freq,
            rank,
            state: self.x,
            bits,
        })
    }

    /// Reads the remaining bits back to the encoder's initial state
    /// `n + d` and checks nothing is left over.
    pub fn finish(mut self) -> Result<(), FamError> {
        if self.len != self.target {
            return corrupt("decoding stopped early");
        }
        if self.target == 0 {
            return if self.code.is_empty() {
                Ok(())
            } else {
                corrupt("code present for empty text")
            };
        }
        if self.cursor != 0 {
            return corrupt("dictionary entries left unused");
        }
        let Ok((x, _)) = self.code.refill_until(self.x, self.target) else {
            return corrupt("bit stack exhausted in final state");
        };
        if x != self.target {
            return corrupt("final state mismatch");
        }
        if !self.code.is_empty() {
            return corrupt("unread bits after final state");
        }
        Ok(())
    }
}

/// Decodes `n` token ids; `dict_len` is `d`.
pub fn decode_symbols(code: BitStack, dict_len: usize, n: usize) -> Result<Vec<Symbol>, FamError> {
    decode_symbols_traced(code, dict_len, n, |_| {})
}

pub fn decode_symbols_traced<F: FnMut(&DecodeStep)>(
    code: BitStack,
    dict_len: usize,
    n: usize,
    mut trace: F,
) -> Result<Vec<Symbol>, FamError> {
    let mut state = DecoderState::new(code, dict_len, n)?;
    let mut out = Vec::with_capacity(n.min(1 << 22));
    while !state.is_done() {
        let step = state.step()?;
        trace(&step);
        out.push(step.token);
    }
    state.finish()?;
    out.reverse();
    Ok(out)
}

pub fn fam_decode<S: Clone>(
    code: BitStack,
    dictionary: &Dictionary<S>,
    n: usize,
) -> Result<Vec<S>, FamError> {
    let ids = decode_symbols(code, dictionary.len(), n)?;
    Ok(ids
        .into_iter()
        .map(|id| dictionary.entries()[id as usize].clone())
        .collect())
}

/// Encodes with a pre-built model; used by callers that time model
/// construction separately.
pub fn encode_with_model(
    symbols: &[Symbol],
    indices: &IndexLists,
    freq: FrequencyTable,
    prepared_len: usize,
) -> FamEncoding {
    let lt = (indices.symbol_count() - 1) as Symbol;
    let mut state = EncoderState::new(freq, prepared_len);
    for &token in symbols {
        let w = state.select(token, lt);
        state.step(w, indices.list(w));
    }
    FamEncoding {
        code: state.code,
        final_state: state.x,
        final_offset: state.offset,
    }
}
