//! Static tANS baselines with table size `M = n`.
//!
//! Three spread functions decide which symbol owns each of the `M` slots:
//! contiguous ranges in dictionary order (behaves like rANS), an
//! almost-uniform priority-queue spread, and one that follows the reversed
//! text. The text-order table depends on the text, so a decoder cannot
//! rebuild it from the frequencies alone.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::bitio::{read_varint, write_varint, BitError, BitStack};
use crate::fam_model::{Position, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StaticError {
    #[error("cannot build a spread table for empty input")]
    EmptyInput,
    #[error("text does not match the frequency table")]
    Inconsistent,
    #[error("frequency section is truncated")]
    Truncated,
    #[error("malformed frequency section: {0}")]
    Malformed(&'static str),
    #[error("corrupt static code: {0}")]
    Corrupt(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpreadStrategy {
    Ranged,
    Uniform,
    TextOrder,
}

/// Occurrence counts per dictionary id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StaticFrequencies {
    pub counts: Vec<usize>,
    pub total: usize,
}

impl StaticFrequencies {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }
}

pub fn count_frequencies(symbols: &[Symbol], dict_len: usize) -> StaticFrequencies {
    let mut counts = vec![0usize; dict_len];
    for &s in symbols {
        counts[s as usize] += 1;
    }
    StaticFrequencies {
        counts,
        total: symbols.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadTable {
    spread: Vec<Symbol>,
    offsets: Vec<usize>,
    slots: Vec<Position>,
    /// Rank of each slot among its symbol's slots.
    slot_rank: Vec<Position>,
}

impl SpreadTable {
    fn from_spread(spread: Vec<Symbol>, dict_len: usize) -> Self {
        assert!(Position::try_from(spread.len()).is_ok(), "spread table too large");
        let mut offsets = vec![0usize; dict_len + 1];
        for &s in &spread {
            offsets[s as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut fill = offsets.clone();
        let mut slots = vec![0; spread.len()];
        let mut slot_rank = vec![0; spread.len()];
        for (j, &s) in spread.iter().enumerate() {
            let at = &mut fill[s as usize];
            slot_rank[j] = (*at - offsets[s as usize]) as Position;
            slots[*at] = j as Position;
            *at += 1;
        }
        Self {
            spread,
            offsets,
            slots,
            slot_rank,
        }
    }

    pub fn spread(&self) -> &[Symbol] {
        &self.spread
    }

    pub fn slots(&self, symbol: Symbol) -> &[Position] {
        let s = symbol as usize;
        &self.slots[self.offsets[s]..self.offsets[s + 1]]
    }

    pub fn size(&self) -> usize {
        self.spread.len()
    }
}

/// Priority-queue entry for the uniform spread: key `(2k + 1) / (2 c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SlotKey {
    num: u64,
    den: u64,
    symbol: Symbol,
}

impl Ord for SlotKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs).then(self.symbol.cmp(&other.symbol))
    }
}

impl PartialOrd for SlotKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn uniform_spread(freqs: &StaticFrequencies) -> Vec<Symbol> {
    let mut heap = BinaryHeap::with_capacity(freqs.counts.len());
    for (s, &c) in freqs.counts.iter().enumerate() {
        if c > 0 {
            heap.push(Reverse(SlotKey {
                num: 1,
                den: 2 * c as u64,
                symbol: s as Symbol,
            }));
        }
    }
    let mut spread = Vec::with_capacity(freqs.total);
    while let Some(Reverse(mut key)) = heap.pop() {
        spread.push(key.symbol);
        key.num += 2;
        if key.num < key.den {
            heap.push(Reverse(key));
        }
    }
    spread
}

/// `text` is only read by [`SpreadStrategy::TextOrder`].
pub fn build_spread(
    strategy: SpreadStrategy,
    freqs: &StaticFrequencies,
    text: &[Symbol],
) -> Result<SpreadTable, StaticError> {
    if freqs.total == 0 {
        return Err(StaticError::EmptyInput);
    }
    let d = freqs.counts.len();
    let spread = match strategy {
        SpreadStrategy::Ranged => {
            let mut spread = Vec::with_capacity(freqs.total);
            for (s, &c) in freqs.counts.iter().enumerate() {
                spread.extend(std::iter::repeat_n(s as Symbol, c));
            }
            spread
        }
        SpreadStrategy::Uniform => uniform_spread(freqs),
        SpreadStrategy::TextOrder => {
            if text.len() != freqs.total {
                return Err(StaticError::Inconsistent);
            }
            text.iter().rev().copied().collect()
        }
    };
    let table = SpreadTable::from_spread(spread, d);
    let consistent = (0..d).all(|s| table.slots(s as Symbol).len() == freqs.counts[s]);
    if !consistent {
        return Err(StaticError::Inconsistent);
    }
    Ok(table)
}

/// Returns the code and the final state, in `[M, 2M)`; `(empty, 0)` for
/// empty input.
pub fn static_encode(
    symbols: &[Symbol],
    table: &SpreadTable,
    freqs: &StaticFrequencies,
) -> (BitStack, usize) {
    let m = freqs.total;
    if symbols.is_empty() {
        return (BitStack::new(), 0);
    }
    let mut code = BitStack::new();
    let mut x = m;
    for &s in symbols {
        let c = freqs.counts[s as usize];
        x = code.emit_until_below(x, 2 * c).0;
        x = m + table.slots(s)[x - c] as usize;
    }
    (code, x)
}

pub fn static_decode(
    mut code: BitStack,
    final_state: usize,
    table: &SpreadTable,
    freqs: &StaticFrequencies,
    n: usize,
) -> Result<Vec<Symbol>, StaticError> {
    let m = freqs.total;
    if n != m || table.size() != m {
        return Err(StaticError::Corrupt("token count does not match the table"));
    }
    if n == 0 {
        return if final_state == 0 && code.is_empty() {
            Ok(Vec::new())
        } else {
            Err(StaticError::Corrupt("state or code present for empty text"))
        };
    }
    if final_state < m || final_state >= 2 * m {
        return Err(StaticError::Corrupt("final state out of range"));
    }
    let mut x = final_state;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let j = x - m;
        let s = table.spread[j];
        out.push(s);
        x = freqs.counts[s as usize] + table.slot_rank[j] as usize;
        x = code
            .refill_until(x, m)
            .map_err(|_| StaticError::Corrupt("bit stack exhausted"))?
            .0;
    }
    if x != m {
        return Err(StaticError::Corrupt("final state mismatch"));
    }
    if !code.is_empty() {
        return Err(StaticError::Corrupt("unread bits"));
    }
    out.reverse();
    Ok(out)
}

/// One varint per dictionary entry, in dictionary order.
pub fn serialize_frequencies(freqs: &StaticFrequencies) -> Vec<u8> {
    let mut out = Vec::new();
    for &c in &freqs.counts {
        write_varint(c as u64, &mut out);
    }
    out
}

/// Reads `dict_len` counts; returns them and the bytes consumed.
pub fn deserialize_frequencies(
    bytes: &[u8],
    dict_len: usize,
) -> Result<(StaticFrequencies, usize), StaticError> {
    let mut pos = 0;
    let mut counts = Vec::with_capacity(dict_len.min(bytes.len()));
    let mut total = 0usize;
    for _ in 0..dict_len {
        let (v, used) = read_varint(&bytes[pos..]).map_err(|e| match e {
            BitError::Truncated => StaticError::Truncated,
            _ => StaticError::Malformed("bad varint"),
        })?;
        pos += used;
        if v == 0 {
            return Err(StaticError::Malformed("zero count"));
        }
        let c = usize::try_from(v).map_err(|_| StaticError::Malformed("count too large"))?;
        total = total
            .checked_add(c)
            .ok_or(StaticError::Malformed("count overflow"))?;
        counts.push(c);
    }
    Ok((StaticFrequencies { counts, total }, pos))
}
