//! Built-in checks: the hand-traced FAM vectors and an exhaustive
//! round trip over every sequence of a 3-token alphabet up to length 8.

use crate::bitio::BitStack;
use crate::fam_codec::{fam_decode, fam_encode};
use crate::static_codec::{build_spread, count_frequencies, static_decode, static_encode, SpreadStrategy};
use crate::fam_model::{index_text, Dictionary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub failure: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

const VECTORS: [(&str, &[u8], &[u8], &str); 3] = [
    ("aba", b"aba", &[1, 0, 0, 1, 0], "ba"),
    ("aa", b"aa", &[1, 0, 0], "a"),
    ("a", b"a", &[0], "a"),
];

fn check_vector(text: &[u8], bits: &[u8], dict: &str) -> Result<(), String> {
    let enc = fam_encode(text);
    let expected = BitStack::from_bits(bits.iter().map(|&b| b == 1));
    if enc.code != expected {
        return Err(format!("code {:?}, expected {:?}", enc.code, expected));
    }
    if enc.dictionary.entries() != dict.as_bytes() {
        return Err(format!("dictionary {:?}, expected {dict:?}", enc.dictionary.entries()));
    }
    if enc.final_state != 1 {
        return Err(format!("final state {}", enc.final_state));
    }
    let back = fam_decode(enc.code, &Dictionary::from_entries(dict.as_bytes().to_vec()), text.len())
        .map_err(|e| e.to_string())?;
    if back != text {
        return Err(format!("decoded {back:?}"));
    }
    Ok(())
}

/// All sequences over `{0, 1, 2}` with lengths `1..=max_len`.
pub fn ternary_sequences(max_len: usize) -> impl Iterator<Item = Vec<u8>> {
    (1..=max_len).flat_map(|len| {
        (0..3usize.pow(len as u32)).map(move |mut code| {
            (0..len)
                .map(|_| {
                    let digit = (code % 3) as u8;
                    code /= 3;
                    digit
                })
                .collect()
        })
    })
}

/// Round trips one sequence through FAM and the three static spreads.
pub fn roundtrip_all(text: &[u8]) -> Result<(), String> {
    let enc = fam_encode(text);
    if enc.final_state != 1 {
        return Err(format!("{text:?}: final state {}", enc.final_state));
    }
    let back = fam_decode(enc.code, &enc.dictionary, text.len()).map_err(|e| format!("{text:?}: {e}"))?;
    if back != text {
        return Err(format!("{text:?}: fam decoded {back:?}"));
    }
    let indexed = index_text(text);
    let d = indexed.dictionary.len();
    let freqs = count_frequencies(&indexed.symbols, d);
    for strategy in [SpreadStrategy::Ranged, SpreadStrategy::Uniform, SpreadStrategy::TextOrder] {
        let table = build_spread(strategy, &freqs, &indexed.symbols).map_err(|e| e.to_string())?;
        let (code, state) = static_encode(&indexed.symbols, &table, &freqs);
        let back = static_decode(code, state, &table, &freqs, text.len())
            .map_err(|e| format!("{text:?} {strategy:?}: {e}"))?;
        if back != indexed.symbols {
            return Err(format!("{text:?}: {strategy:?} decoded wrongly"));
        }
    }
    Ok(())
}

pub fn run_selftest() -> SelftestReport {
    let mut checks = Vec::new();
    for (name, text, bits, dict) in VECTORS {
        checks.push(Check {
            name: format!("hand trace [{name}]"),
            failure: check_vector(text, bits, dict).err(),
        });
    }
    let mut count = 0usize;
    let failure = ternary_sequences(8).find_map(|seq| {
        count += 1;
        roundtrip_all(&seq).err()
    });
    checks.push(Check {
        name: format!("exhaustive 3-token alphabet, lengths 1..8 ({count} sequences)"),
        failure,
    });
    SelftestReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        let report = run_selftest();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checks.len(), 4);
    }

    #[test]
    fn ternary_enumeration_size() {
        assert_eq!(ternary_sequences(8).count(), (1..=8).map(|l| 3usize.pow(l)).sum());
    }
}
