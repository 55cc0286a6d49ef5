//! Forward-adaptive model construction.
//!
//! Tokens are mapped to dense symbol ids `0..d` following the dictionary,
//! which is ordered by ascending index of each token's last occurrence.
//! The last-token marker `lt` is the out-of-band id `d`.
//!
//! The prepared text is the input with `lt` inserted after the last
//! occurrence of every token, then reversed. Index lists record where each
//! symbol sits in it; initial frequencies are one less than the list length
//! for tokens (the final occurrence is sent as `lt`) and `d` for `lt`.

use std::collections::HashMap;
use std::hash::Hash;

/// Dense symbol id. Token ids are `0..d`; `d` is the `lt` marker.
pub type Symbol = u32;

/// Index into the prepared text or a spread table. Texts are limited to
/// `u32::MAX` prepared items so the hot tables stay compact.
pub type Position = u32;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dictionary<S> {
    entries: Vec<S>,
}

impl<S> Dictionary<S> {
    /// Wraps entries that are already in last-occurrence order.
    pub fn from_entries(entries: Vec<S>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<S> {
        self.entries
    }

    pub fn get(&self, id: Symbol) -> Option<&S> {
        self.entries.get(id as usize)
    }

    /// The `lt` id for this dictionary.
    pub fn lt(&self) -> Symbol {
        self.entries.len() as Symbol
    }
}

/// A token sequence rewritten as dictionary ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexedText<S> {
    pub dictionary: Dictionary<S>,
    pub symbols: Vec<Symbol>,
}

/// Distinct tokens of `text`, ascending by last-occurrence index.
pub fn build_dictionary<S: Eq + Hash + Clone>(text: &[S]) -> Dictionary<S> {
    index_text(text).dictionary
}

/// Builds the dictionary and maps every token to its id.
pub fn index_text<S: Eq + Hash + Clone>(text: &[S]) -> IndexedText<S> {
    let mut last: HashMap<&S, usize> = HashMap::new();
    for (i, t) in text.iter().enumerate() {
        last.insert(t, i);
    }
    let mut order: Vec<(usize, &S)> = last.into_iter().map(|(t, i)| (i, t)).collect();
    order.sort_unstable_by_key(|&(i, _)| i);

    let ids: HashMap<&S, Symbol> = order
        .iter()
        .enumerate()
        .map(|(id, &(_, t))| (t, id as Symbol))
        .collect();
    let symbols = text.iter().map(|t| ids[t]).collect();
    let entries = order.into_iter().map(|(_, t)| t.clone()).collect();
    IndexedText {
        dictionary: Dictionary { entries },
        symbols,
    }
}

/// The reversed text with `lt` markers, over symbol ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PreparedText {
    pub items: Vec<Symbol>,
    pub dict_len: usize,
}

impl PreparedText {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn lt(&self) -> Symbol {
        self.dict_len as Symbol
    }
}

/// Inserts `lt` after each token's last occurrence and reverses.
///
/// `symbols` must use ids from [`index_text`] over the same text, so that
/// every id in `0..dict_len` occurs at least once.
pub fn prepare(symbols: &[Symbol], dict_len: usize) -> PreparedText {
    let lt = dict_len as Symbol;
    let mut seen = vec![false; dict_len];
    let mut items = Vec::with_capacity(symbols.len() + dict_len);
    for &s in symbols.iter().rev() {
        let first_from_end = !std::mem::replace(&mut seen[s as usize], true);
        if first_from_end {
            items.push(lt);
        }
        items.push(s);
    }
    debug_assert!(seen.iter().all(|&s| s));
    PreparedText { items, dict_len }
}

/// Ascending positions of every symbol in the prepared text, stored
/// contiguously per symbol.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexLists {
    offsets: Vec<usize>,
    positions: Vec<Position>,
}

impl IndexLists {
    pub fn list(&self, symbol: Symbol) -> &[Position] {
        let s = symbol as usize;
        &self.positions[self.offsets[s]..self.offsets[s + 1]]
    }

    /// Number of symbols, including `lt`.
    pub fn symbol_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }
}

/// Per-symbol counts; `lt` is the last entry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    pub counts: Vec<usize>,
}

impl FrequencyTable {
    #[inline]
    pub fn get(&self, symbol: Symbol) -> usize {
        self.counts[symbol as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Panics if the prepared text has more than `u32::MAX` items.
pub fn build_indices(prepared: &PreparedText) -> (IndexLists, FrequencyTable) {
    assert!(Position::try_from(prepared.len()).is_ok(), "prepared text too long");
    let d = prepared.dict_len;
    if prepared.is_empty() {
        return (
            IndexLists {
                offsets: vec![0; d + 2],
                positions: Vec::new(),
            },
            FrequencyTable {
                counts: vec![0; d + 1],
            },
        );
    }

    let mut offsets = vec![0usize; d + 2];
    for &s in &prepared.items {
        offsets[s as usize + 1] += 1;
    }
    for i in 1..offsets.len() {
        offsets[i] += offsets[i - 1];
    }
    let mut fill = offsets.clone();
    let mut positions = vec![0; prepared.len()];
    for (i, &s) in prepared.items.iter().enumerate() {
        let slot = &mut fill[s as usize];
        positions[*slot] = i as Position;
        *slot += 1;
    }

    let mut counts: Vec<usize> = offsets.windows(2).map(|w| w[1] - w[0] - 1).collect();
    counts[d] = d;
    (IndexLists { offsets, positions }, FrequencyTable { counts })
}
