//! LIFO bit stack, LSB-first byte packing and LEB128 varints.
//!
//! The ANS encoders push renormalization bits onto a [`BitStack`]; the
//! decoders pop them back in reverse order. [`ByteImage`] is the packed
//! on-disk form: bit `i` (push order) lives at bit `i % 8` of byte `i / 8`,
//! and unused high bits of the final byte are zero.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("pop from an empty bit stack")]
    EmptyStack,
    #[error("nonzero padding bits in the final code byte")]
    BadPadding,
    #[error("byte image holds {bytes} bytes but bit length {bit_length} needs {expected}")]
    LengthMismatch {
        bytes: usize,
        bit_length: usize,
        expected: usize,
    },
    #[error("varint is truncated")]
    Truncated,
    #[error("varint is not in minimal form")]
    Overlong,
    #[error("varint does not fit in 64 bits")]
    Overflow,
}

/// Stack of bits backed by 64-bit words.
///
/// Bits above `len` are always zero, which keeps packing a plain
/// little-endian dump of the words.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BitStack {
    words: Vec<u64>,
    len: usize,
}

impl BitStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut stack = Self::new();
        for b in bits {
            stack.push(b);
        }
        stack
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let word = self.len / 64;
        if word == self.words.len() {
            self.words.push(0);
        }
        self.words[word] |= (bit as u64) << (self.len % 64);
        self.len += 1;
    }

    #[inline]
    pub fn pop(&mut self) -> Result<bool, BitError> {
        if self.len == 0 {
            return Err(BitError::EmptyStack);
        }
        self.len -= 1;
        let word = self.len / 64;
        let mask = 1u64 << (self.len % 64);
        let bit = self.words[word] & mask != 0;
        self.words[word] &= !mask;
        if self.len.is_multiple_of(64) {
            self.words.pop();
        }
        Ok(bit)
    }

    /// Pushes the low `count` bits of `value`, least significant first;
    /// the same as `count` single pushes of `value >> i & 1`.
    #[inline]
    pub fn push_bits(&mut self, value: u64, count: u32) {
        debug_assert!(count <= 64);
        if count == 0 {
            return;
        }
        let value = if count == 64 { value } else { value & ((1u64 << count) - 1) };
        let shift = (self.len % 64) as u32;
        if shift == 0 {
            self.words.push(value);
        } else {
            *self.words.last_mut().expect("partial word") |= value << shift;
            if shift + count > 64 {
                self.words.push(value >> (64 - shift));
            }
        }
        self.len += count as usize;
    }

    /// Pops `count` bits as one value: the most recently pushed bit is the
    /// most significant. Equivalent to `count` pops folded by `v = 2v + bit`.
    #[inline]
    pub fn pop_bits(&mut self, count: u32) -> Result<u64, BitError> {
        debug_assert!(count <= 64);
        if count as usize > self.len {
            return Err(BitError::EmptyStack);
        }
        if count == 0 {
            return Ok(0);
        }
        let start = self.len - count as usize;
        let word = start / 64;
        let shift = (start % 64) as u32;
        let mut value = self.words[word] >> shift;
        if shift + count > 64 {
            value |= self.words[word + 1] << (64 - shift);
        }
        if count < 64 {
            value &= (1u64 << count) - 1;
        }
        self.len = start;
        self.words.truncate(start.div_ceil(64));
        if shift != 0 {
            self.words[word] &= (1u64 << shift) - 1;
        }
        Ok(value)
    }

    /// Encoder renormalization: shifts `x` right until it is below `bound`,
    /// pushing the dropped bits low to high. Returns the new state and the
    /// number of bits pushed.
    #[inline]
    pub fn emit_until_below(&mut self, x: usize, bound: usize) -> (usize, u32) {
        debug_assert!(bound > 0);
        if x < bound {
            return (x, 0);
        }
        let mut k = bound.leading_zeros() - x.leading_zeros();
        if x >> k >= bound {
            k += 1;
        }
        self.push_bits(x as u64, k);
        (x >> k, k)
    }

    /// Decoder renormalization: appends popped bits to `x` (`x = 2x + bit`)
    /// until it reaches `bound`. Reads in chunks that can never overshoot
    /// the bit-at-a-time loop.
    #[inline]
    pub fn refill_until(&mut self, mut x: usize, bound: usize) -> Result<(usize, u32), BitError> {
        let mut total = 0;
        while x < bound {
            let mut k = (x + 1).leading_zeros() - bound.leading_zeros();
            if (x + 1) << k <= bound {
                k += 1;
            }
            x = x << k | self.pop_bits(k)? as usize;
            total += k;
        }
        Ok((x, total))
    }

    /// Bit at `index` in push order.
    pub fn get(&self, index: usize) -> Option<bool> {
        (index < self.len).then(|| self.words[index / 64] >> (index % 64) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.words[i / 64] >> (i % 64) & 1 == 1)
    }

    pub fn to_vec(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn pack(&self) -> ByteImage {
        let byte_len = self.len.div_ceil(8);
        let mut bytes = Vec::with_capacity(byte_len);
        for w in &self.words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        bytes.truncate(byte_len);
        ByteImage {
            bytes,
            bit_length: self.len,
        }
    }
}

impl std::fmt::Debug for BitStack {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitStack[")?;
        for b in self.iter() {
            write!(f, "{}", b as u8)?;
        }
        write!(f, "]")
    }
}

/// Packed form of a [`BitStack`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByteImage {
    pub bytes: Vec<u8>,
    pub bit_length: usize,
}

impl ByteImage {
    pub fn new(bytes: Vec<u8>, bit_length: usize) -> Self {
        Self { bytes, bit_length }
    }

    /// Checks the byte count and that padding bits are zero.
    pub fn validate(&self) -> Result<(), BitError> {
        let expected = self.bit_length.div_ceil(8);
        if self.bytes.len() != expected {
            return Err(BitError::LengthMismatch {
                bytes: self.bytes.len(),
                bit_length: self.bit_length,
                expected,
            });
        }
        let used = self.bit_length % 8;
        if used != 0 && self.bytes[expected - 1] >> used != 0 {
            return Err(BitError::BadPadding);
        }
        Ok(())
    }

    pub fn unpack(&self) -> Result<BitStack, BitError> {
        self.validate()?;
        let mut words = Vec::with_capacity(self.bytes.len().div_ceil(8));
        for chunk in self.bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words.push(u64::from_le_bytes(buf));
        }
        words.truncate(self.bit_length.div_ceil(64));
        Ok(BitStack {
            words,
            len: self.bit_length,
        })
    }
}

/// Appends `value` as unsigned LEB128.
pub fn write_varint(mut value: u64, out: &mut Vec<u8>) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Encoded size of `value` in bytes.
pub fn varint_len(value: u64) -> usize {
    let bits = 64 - value.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

/// Reads a minimal-form unsigned LEB128 varint; returns the value and the
/// number of bytes consumed.
pub fn read_varint(bytes: &[u8]) -> Result<(u64, usize), BitError> {
    let mut value = 0u64;
    for (i, &byte) in bytes.iter().enumerate() {
        let group = (byte & 0x7f) as u64;
        let shift = 7 * i as u32;
        if shift >= 64 || (shift == 63 && group > 1) {
            return Err(BitError::Overflow);
        }
        value |= group << shift;
        if byte & 0x80 == 0 {
            // A zero final group after the first byte means a shorter form exists.
            if i > 0 && byte == 0 {
                return Err(BitError::Overlong);
            }
            return Ok((value, i + 1));
        }
    }
    Err(BitError::Truncated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn push_appends_at_tail() {
        let mut s = BitStack::new();
        s.push(true);
        assert_eq!(s.to_vec(), bits(&[1]));
        let mut s = BitStack::from_bits(bits(&[1, 0]));
        s.push(false);
        assert_eq!(s.to_vec(), bits(&[1, 0, 0]));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn pop_is_lifo() {
        let mut s = BitStack::from_bits(bits(&[1, 0, 0, 1, 0]));
        assert_eq!(s.pop(), Ok(false));
        assert_eq!(s.to_vec(), bits(&[1, 0, 0, 1]));

        let mut s = BitStack::from_bits(bits(&[1]));
        assert_eq!(s.pop(), Ok(true));
        assert!(s.is_empty());
        assert_eq!(s.pop(), Err(BitError::EmptyStack));

        let pushed = bits(&[1, 1, 0, 1, 0]);
        let mut s = BitStack::from_bits(pushed.clone());
        let popped: Vec<bool> = (0..5).map(|_| s.pop().unwrap()).collect();
        let mut rev = pushed;
        rev.reverse();
        assert_eq!(popped, rev);
    }

    #[test]
    fn pop_across_word_boundary_keeps_padding_clear() {
        let mut s = BitStack::from_bits(std::iter::repeat_n(true, 65));
        s.pop().unwrap();
        s.pop().unwrap();
        s.push(false);
        let img = s.pack();
        assert_eq!(img.bytes.len(), 8);
        assert_eq!(img.bytes[7], 0x7f);
        img.validate().unwrap();
    }

    #[test]
    fn pack_examples() {
        let img = BitStack::from_bits(bits(&[1, 0, 0, 1, 0])).pack();
        assert_eq!(img, ByteImage::new(vec![0x09], 5));
        assert_eq!(BitStack::new().pack(), ByteImage::new(vec![], 0));
        let img = BitStack::from_bits(bits(&[1; 9])).pack();
        assert_eq!(img, ByteImage::new(vec![0xFF, 0x01], 9));
    }

    #[test]
    fn unpack_examples() {
        let s = ByteImage::new(vec![0x09], 5).unpack().unwrap();
        assert_eq!(s.to_vec(), bits(&[1, 0, 0, 1, 0]));
        assert!(ByteImage::new(vec![], 0).unpack().unwrap().is_empty());
        assert_eq!(
            ByteImage::new(vec![0x89], 5).unpack(),
            Err(BitError::BadPadding)
        );
        assert!(matches!(
            ByteImage::new(vec![0x01, 0x00], 1).unpack(),
            Err(BitError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn varint_examples() {
        let mut out = Vec::new();
        write_varint(5, &mut out);
        assert_eq!(out, [0x05]);
        out.clear();
        write_varint(300, &mut out);
        assert_eq!(out, [0xAC, 0x02]);
        assert_eq!(read_varint(&[0xAC, 0x02, 0x77]), Ok((300, 2)));
        assert_eq!(read_varint(&[0x80]), Err(BitError::Truncated));
        assert_eq!(read_varint(&[]), Err(BitError::Truncated));
        assert_eq!(read_varint(&[0x85, 0x00]), Err(BitError::Overlong));
        assert_eq!(read_varint(&[0x00]), Ok((0, 1)));
    }

    #[test]
    fn varint_extremes() {
        let mut out = Vec::new();
        write_varint(u64::MAX, &mut out);
        assert_eq!(out.len(), 10);
        assert_eq!(read_varint(&out), Ok((u64::MAX, 10)));
        let mut bad = out.clone();
        bad[9] = 0x02;
        assert_eq!(read_varint(&bad), Err(BitError::Overflow));
        let eleven = [0xffu8; 10].iter().copied().chain([0x01]).collect::<Vec<_>>();
        assert_eq!(read_varint(&eleven), Err(BitError::Overflow));
    }

    #[test]
    fn renormalization_helpers_match_bit_loops() {
        for x in 0..300usize {
            for bound in 1..70usize {
                let mut bulk = BitStack::from_bits([true, false]);
                let mut single = bulk.clone();
                let (y, k) = bulk.emit_until_below(x, bound);
                let mut z = x;
                let mut count = 0;
                while z >= bound {
                    single.push(z & 1 == 1);
                    z >>= 1;
                    count += 1;
                }
                assert_eq!((y, k), (z, count));
                assert_eq!(bulk, single);

                let mut src = BitStack::from_bits((0..20).map(|i| (x * 7 + i) % 3 == 0));
                let mut src2 = src.clone();
                let got = src.refill_until(x % 40, bound * 3);
                let mut z = x % 40;
                let mut count = 0;
                while z < bound * 3 {
                    z = 2 * z + src2.pop().unwrap() as usize;
                    count += 1;
                }
                assert_eq!(got, Ok((z, count)));
                assert_eq!(src, src2);
            }
        }
        assert_eq!(BitStack::new().refill_until(1, 4), Err(BitError::EmptyStack));
    }

    #[test]
    fn bulk_push_matches_single_pushes() {
        let mut a = BitStack::new();
        let mut b = BitStack::new();
        for (value, count) in [(0b1011u64, 4u32), (u64::MAX, 64), (5, 3), (0, 0), (0x1234_5678_9abc, 61)] {
            a.push_bits(value, count);
            for i in 0..count {
                b.push(value >> i & 1 == 1);
            }
        }
        assert_eq!(a, b);
        assert_eq!(a.pop_bits(61), Ok(0x1234_5678_9abc));
        assert_eq!(a.pop_bits(0), Ok(0));
        assert_eq!(a.pop_bits(3), Ok(5));
        assert_eq!(a.pop_bits(64), Ok(u64::MAX));
        assert_eq!(a.pop_bits(5), Err(BitError::EmptyStack));
        assert_eq!(a.pop_bits(4), Ok(0b1011));
        assert!(a.is_empty());
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(v in proptest::collection::vec(any::<bool>(), 0..4096)) {
            let s = BitStack::from_bits(v.iter().copied());
            let img = s.pack();
            prop_assert_eq!(img.bytes.len(), v.len().div_ceil(8));
            prop_assert_eq!(img.unpack().unwrap(), s);
        }

        #[test]
        fn varint_roundtrip(v in any::<u64>()) {
            let mut out = Vec::new();
            write_varint(v, &mut out);
            prop_assert_eq!(out.len(), varint_len(v));
            prop_assert_eq!(read_varint(&out), Ok((v, out.len())));
        }

        #[test]
        fn bulk_ops_match_bitwise(ops in proptest::collection::vec((any::<u64>(), 0u32..=64, any::<bool>()), 0..200)) {
            let mut bulk = BitStack::new();
            let mut single = BitStack::new();
            for (value, count, is_push) in ops {
                if is_push {
                    bulk.push_bits(value, count);
                    for i in 0..count { single.push(value >> i & 1 == 1); }
                } else {
                    let got = bulk.pop_bits(count);
                    if (count as usize) > single.len() {
                        prop_assert_eq!(got, Err(BitError::EmptyStack));
                        continue;
                    }
                    let mut v = 0u64;
                    for _ in 0..count { v = v.wrapping_shl(1) | single.pop().unwrap() as u64; }
                    prop_assert_eq!(got, Ok(v));
                }
                prop_assert_eq!(&bulk, &single);
                prop_assert!(bulk.pack().validate().is_ok());
            }
        }

        #[test]
        fn lifo_reverses(v in proptest::collection::vec(any::<bool>(), 0..300)) {
            let mut s = BitStack::new();
            for &b in &v { s.push(b); }
            let mut popped = Vec::new();
            while let Ok(b) = s.pop() { popped.push(b); }
            popped.reverse();
            prop_assert_eq!(popped, v);
        }
    }

    #[test]
    fn large_pack_roundtrip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let v: Vec<bool> = (0..1_000_000).map(|_| rng.random()).collect();
        let s = BitStack::from_bits(v.iter().copied());
        let back = s.pack().unpack().unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_vec(), v);
    }
}
