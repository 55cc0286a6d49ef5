//! Independent reference implementations compared bit-for-bit with the
//! library: a literal FAM encoder over string tokens, and static tANS with
//! spreads built by sorting instead of a heap.

use std::cmp::Ordering;
use std::collections::HashMap;

use proptest::prelude::*;

use fans::bitio::BitStack;
use fans::fam_codec::fam_encode;
use fans::fam_model::index_text;
use fans::static_codec::{build_spread, count_frequencies, static_encode, SpreadStrategy};
use fans::tokenizer::{tokenize, TokenizerMode};

/// `None` is the metatoken.
type Item = Option<String>;

struct Reference {
    code: Vec<bool>,
    dictionary: Vec<String>,
    final_state: usize,
}

fn reference_fam(text: &[String]) -> Reference {
    let n = text.len();
    let mut last: HashMap<&String, usize> = HashMap::new();
    for (i, t) in text.iter().enumerate() {
        last.insert(t, i);
    }
    let mut dictionary: Vec<String> = last.keys().map(|t| (*t).clone()).collect();
    dictionary.sort_by_key(|t| last[t]);

    let mut modified: Vec<Item> = Vec::new();
    for (i, t) in text.iter().enumerate() {
        modified.push(Some(t.clone()));
        if last[t] == i {
            modified.push(None);
        }
    }
    modified.reverse();

    let mut lists: HashMap<Item, Vec<usize>> = HashMap::new();
    for (i, item) in modified.iter().enumerate() {
        lists.entry(item.clone()).or_default().push(i);
    }
    let mut f: HashMap<Item, usize> = HashMap::new();
    for t in &dictionary {
        f.insert(Some(t.clone()), lists[&Some(t.clone())].len() - 1);
    }
    f.insert(None, dictionary.len());

    let mut x = n + dictionary.len();
    let mut l = n + dictionary.len();
    let mut code = Vec::new();
    for t in text {
        let w: Item = if f[&Some(t.clone())] > 0 {
            Some(t.clone())
        } else {
            l -= 1;
            None
        };
        let fw = f[&w];
        while x >= 2 * fw {
            code.push(x % 2 == 1);
            x /= 2;
        }
        x = l + lists[&w][x - fw];
        l -= 1;
        *f.get_mut(&w).unwrap() -= 1;
    }
    Reference {
        code,
        dictionary,
        final_state: x,
    }
}

fn as_strings(tokens: &[u8]) -> Vec<String> {
    tokens.iter().map(|t| format!("w{t}")).collect()
}

fn assert_matches_reference(text: &[String]) {
    let reference = reference_fam(text);
    let enc = fam_encode(text);
    assert_eq!(enc.code, BitStack::from_bits(reference.code.iter().copied()));
    assert_eq!(enc.dictionary.entries(), reference.dictionary.as_slice());
    if !text.is_empty() {
        assert_eq!(enc.final_state, reference.final_state);
        assert_eq!(reference.final_state, 1);
    }
}

#[test]
fn fam_matches_reference_on_corpus_prefixes() {
    let data = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/corpus/asyoulik.txt")).unwrap();
    for len in [1, 2, 10, 100, 1000, 8000] {
        let seq = tokenize(&data, TokenizerMode::Paper);
        let words: Vec<String> = seq.tokens[..len]
            .iter()
            .map(|t| String::from_utf8(t.as_bytes().to_vec()).unwrap())
            .collect();
        assert_matches_reference(&words);
    }
}

#[test]
fn hand_traced_bits_from_reference() {
    let text: Vec<String> = ["a", "b", "a"].iter().map(|s| s.to_string()).collect();
    let r = reference_fam(&text);
    assert_eq!(r.code, [true, false, false, true, false]);
    assert_eq!(r.dictionary, ["b", "a"]);
}

/// Plain per-symbol table walk for any spread given as a slot sequence.
fn reference_static(symbols: &[u32], spread: &[u32], counts: &[usize]) -> (Vec<bool>, usize) {
    let m = spread.len();
    let mut code = Vec::new();
    let mut x = m;
    for &s in symbols {
        let c = counts[s as usize];
        while x >= 2 * c {
            code.push(x % 2 == 1);
            x /= 2;
        }
        let slots: Vec<usize> = (0..m).filter(|&j| spread[j] == s).collect();
        x = m + slots[x - c];
    }
    (code, x)
}

fn reference_ranged(counts: &[usize]) -> Vec<u32> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(s, &c)| std::iter::repeat_n(s as u32, c))
        .collect()
}

/// Every slot `(k, s)` sorted by key `(2k + 1) / (2 c_s)`, ties by symbol.
fn reference_uniform(counts: &[usize]) -> Vec<u32> {
    let mut keys: Vec<(usize, usize, u32)> = counts
        .iter()
        .enumerate()
        .flat_map(|(s, &c)| (0..c).map(move |k| (2 * k + 1, 2 * c, s as u32)))
        .collect();
    keys.sort_by(|a, b| match (a.0 * b.1).cmp(&(b.0 * a.1)) {
        Ordering::Equal => a.2.cmp(&b.2),
        o => o,
    });
    keys.into_iter().map(|k| k.2).collect()
}

fn compact(raw: &[u8]) -> Vec<u32> {
    index_text(raw).symbols
}

#[test]
fn uniform_reference_small() {
    // counts [1, 2]: keys 1/2 for s0, 1/4 and 3/4 for s1
    assert_eq!(reference_uniform(&[1, 2]), [1, 0, 1]);
    assert_eq!(reference_ranged(&[2, 1]), [0, 0, 1]);
}

proptest! {
    #[test]
    fn fam_matches_reference(raw in proptest::collection::vec(0u8..20, 0..400)) {
        assert_matches_reference(&as_strings(&raw));
    }

    #[test]
    fn static_spreads_match_reference(raw in proptest::collection::vec(0u8..16, 1..300)) {
        let symbols = compact(&raw);
        let d = index_text(&raw).dictionary.len();
        let freqs = count_frequencies(&symbols, d);
        let text_order: Vec<u32> = symbols.iter().rev().copied().collect();
        for (strategy, spread) in [
            (SpreadStrategy::Ranged, reference_ranged(&freqs.counts)),
            (SpreadStrategy::Uniform, reference_uniform(&freqs.counts)),
            (SpreadStrategy::TextOrder, text_order),
        ] {
            let table = build_spread(strategy, &freqs, &symbols).unwrap();
            prop_assert_eq!(table.spread(), spread.as_slice());
            let (code, state) = static_encode(&symbols, &table, &freqs);
            let (ref_code, ref_state) = reference_static(&symbols, &spread, &freqs.counts);
            prop_assert_eq!(code, BitStack::from_bits(ref_code));
            prop_assert_eq!(state, ref_state);
        }
    }
}
