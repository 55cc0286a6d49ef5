//! `FANS` archive format.
//!
//! ```text
//! magic        4 bytes  "FANS"
//! version      1 byte   = 1
//! algo         1 byte   0 fam, 1 ranged, 2 uniform, 3 text-order
//! flags        1 byte   bit0 paper-mode tokens, bit1 filtered dictionary
//! n            varint   token count
//! d            varint   dictionary size
//! code_bit_len varint
//! final_state  varint   static algorithms only
//! dict_blob    varint byte length, then the blob; unfiltered blobs hold
//!              d entries of (varint length, token bytes)
//! freq_section d varints, static algorithms only
//! code         ceil(code_bit_len / 8) bytes, LSB-first, zero padding
//! ```
//!
//! Varints are minimal unsigned LEB128. Nothing may follow the code bytes.

use std::io::Write;
use std::path::Path;
use std::process::Command;

use thiserror::Error;

use crate::bitio::{read_varint, varint_len, write_varint, BitError, ByteImage};
use crate::static_codec::SpreadStrategy;
use crate::tokenizer::{Token, TokenizerMode};

pub const MAGIC: [u8; 4] = *b"FANS";
pub const VERSION: u8 = 1;

const FLAG_PAPER_MODE: u8 = 0b01;
const FLAG_FILTERED: u8 = 0b10;

pub const FILTER_ENV: &str = "DICT_FILTER_CMD";
pub const UNFILTER_ENV: &str = "DICT_UNFILTER_CMD";

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("not a FANS archive")]
    BadMagic,
    #[error("unsupported archive version {0}")]
    BadVersion(u8),
    #[error("archive is truncated")]
    Truncated,
    #[error("unexpected bytes after the code section")]
    TrailingBytes,
    #[error("nonzero padding bits in the final code byte")]
    BadPadding,
    #[error("malformed archive: {0}")]
    Malformed(&'static str),
    #[error("inconsistent archive fields: {0}")]
    InconsistentFields(&'static str),
    #[error("dictionary filter failed: {0}")]
    ExternalToolFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Algorithm {
    Fam = 0,
    Ranged = 1,
    Uniform = 2,
    TextOrder = 3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Fam,
        Algorithm::Ranged,
        Algorithm::Uniform,
        Algorithm::TextOrder,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.get(b as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fam => "fam",
            Algorithm::Ranged => "ranged",
            Algorithm::Uniform => "uniform",
            Algorithm::TextOrder => "textorder",
        }
    }

    pub fn spread(self) -> Option<SpreadStrategy> {
        match self {
            Algorithm::Fam => None,
            Algorithm::Ranged => Some(SpreadStrategy::Ranged),
            Algorithm::Uniform => Some(SpreadStrategy::Uniform),
            Algorithm::TextOrder => Some(SpreadStrategy::TextOrder),
        }
    }

    pub fn is_static(self) -> bool {
        self != Algorithm::Fam
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DictSection {
    Entries(Vec<Token>),
    /// Opaque output of the external dictionary filter.
    Filtered(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Archive {
    pub algo: Algorithm,
    pub mode: TokenizerMode,
    pub n: u64,
    pub d: u64,
    pub final_state: Option<u64>,
    pub dictionary: DictSection,
    pub freqs: Option<Vec<u64>>,
    pub code: ByteImage,
}

/// Byte sizes of the archive sections; they sum to the archive length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SectionSizes {
    /// Magic, version, algo, flags, n, d and code_bit_len.
    pub header: usize,
    pub final_state: usize,
    /// Blob length varint plus the blob.
    pub dictionary: usize,
    pub frequencies: usize,
    pub code: usize,
}

impl SectionSizes {
    pub fn total(&self) -> usize {
        self.header + self.final_state + self.dictionary + self.frequencies + self.code
    }
}

pub fn encode_dict_blob(entries: &[Token]) -> Vec<u8> {
    let mut out = Vec::with_capacity(entries.iter().map(|t| t.len() + 1).sum());
    for t in entries {
        write_varint(t.len() as u64, &mut out);
        out.extend_from_slice(t);
    }
    out
}

pub fn decode_dict_blob(blob: &[u8], d: u64) -> Result<Vec<Token>, ContainerError> {
    if d > blob.len() as u64 {
        return Err(ContainerError::Malformed("dictionary blob too short"));
    }
    let mut r = Reader::new(blob);
    let mut entries = Vec::with_capacity(d as usize);
    for _ in 0..d {
        let len = r.length()?;
        let bytes = r.take(len)?;
        let token = Token::new(bytes).ok_or(ContainerError::Malformed("empty dictionary token"))?;
        entries.push(token);
    }
    if !r.rest().is_empty() {
        return Err(ContainerError::Malformed("dictionary blob has trailing bytes"));
    }
    Ok(entries)
}

impl Archive {
    fn dict_blob(&self) -> std::borrow::Cow<'_, [u8]> {
        match &self.dictionary {
            DictSection::Entries(e) => encode_dict_blob(e).into(),
            DictSection::Filtered(b) => b.as_slice().into(),
        }
    }

    fn check(&self) -> Result<(), ContainerError> {
        use ContainerError::InconsistentFields as Bad;
        if self.d > self.n || (self.n > 0 && self.d == 0) {
            return Err(Bad("dictionary size does not fit the token count"));
        }
        if let DictSection::Entries(e) = &self.dictionary {
            if e.len() as u64 != self.d {
                return Err(Bad("dictionary entry count differs from d"));
            }
        }
        if self.algo.is_static() {
            let Some(freqs) = &self.freqs else {
                return Err(Bad("static algorithm without frequencies"));
            };
            if self.final_state.is_none() {
                return Err(Bad("static algorithm without final state"));
            }
            if freqs.len() as u64 != self.d {
                return Err(Bad("frequency count differs from d"));
            }
            if freqs.contains(&0) {
                return Err(Bad("zero frequency"));
            }
        } else if self.freqs.is_some() || self.final_state.is_some() {
            return Err(Bad("fam archives carry no frequencies or final state"));
        }
        if self.n == 0 && !self.code.bytes.is_empty() {
            return Err(Bad("code present for empty text"));
        }
        self.code.validate().map_err(|e| match e {
            BitError::BadPadding => ContainerError::BadPadding,
            _ => Bad("code byte count differs from bit length"),
        })
    }

    pub fn section_sizes(&self) -> SectionSizes {
        let blob_len = self.dict_blob().len();
        SectionSizes {
            header: MAGIC.len()
                + 3
                + varint_len(self.n)
                + varint_len(self.d)
                + varint_len(self.code.bit_length as u64),
            final_state: self.final_state.map_or(0, varint_len),
            dictionary: varint_len(blob_len as u64) + blob_len,
            frequencies: self
                .freqs
                .as_ref()
                .map_or(0, |f| f.iter().map(|&c| varint_len(c)).sum()),
            code: self.code.bytes.len(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ContainerError> {
        self.check()?;
        let blob = self.dict_blob();
        let mut out = Vec::with_capacity(self.section_sizes().total());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.algo as u8);
        let mut flags = 0;
        if self.mode == TokenizerMode::Paper {
            flags |= FLAG_PAPER_MODE;
        }
        if matches!(self.dictionary, DictSection::Filtered(_)) {
            flags |= FLAG_FILTERED;
        }
        out.push(flags);
        write_varint(self.n, &mut out);
        write_varint(self.d, &mut out);
        write_varint(self.code.bit_length as u64, &mut out);
        if let Some(x) = self.final_state {
            write_varint(x, &mut out);
        }
        write_varint(blob.len() as u64, &mut out);
        out.extend_from_slice(&blob);
        if let Some(freqs) = &self.freqs {
            for &c in freqs {
                write_varint(c, &mut out);
            }
        }
        out.extend_from_slice(&self.code.bytes);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ContainerError> {
        let mut r = Reader::new(bytes);
        if r.take(4).map_err(|_| ContainerError::BadMagic)? != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let version = r.byte()?;
        if version != VERSION {
            return Err(ContainerError::BadVersion(version));
        }
        let algo = Algorithm::from_byte(r.byte()?).ok_or(ContainerError::Malformed("unknown algorithm"))?;
        let flags = r.byte()?;
        if flags & !(FLAG_PAPER_MODE | FLAG_FILTERED) != 0 {
            return Err(ContainerError::Malformed("unknown flag bits"));
        }
        let mode = if flags & FLAG_PAPER_MODE != 0 {
            TokenizerMode::Paper
        } else {
            TokenizerMode::Lossless
        };
        let n = r.varint()?;
        let d = r.varint()?;
        if d > n || (n > 0 && d == 0) {
            return Err(ContainerError::Malformed("dictionary size does not fit the token count"));
        }
        let code_bit_len = r.varint()?;
        let final_state = if algo.is_static() {
            Some(r.varint()?)
        } else {
            None
        };
        let blob_len = r.length()?;
        let blob = r.take(blob_len)?;
        let dictionary = if flags & FLAG_FILTERED != 0 {
            DictSection::Filtered(blob.to_vec())
        } else {
            DictSection::Entries(decode_dict_blob(blob, d)?)
        };
        let freqs = if algo.is_static() {
            if d > r.rest().len() as u64 {
                return Err(ContainerError::Truncated);
            }
            let mut freqs = Vec::with_capacity(d as usize);
            let mut total = 0u64;
            for _ in 0..d {
                let c = r.varint()?;
                if c == 0 {
                    return Err(ContainerError::Malformed("zero frequency"));
                }
                total = total.saturating_add(c);
                freqs.push(c);
            }
            if total != n {
                return Err(ContainerError::Malformed("frequencies do not sum to n"));
            }
            Some(freqs)
        } else {
            None
        };
        let code_len = code_bit_len.div_ceil(8);
        let rest = r.rest();
        if (rest.len() as u64) < code_len {
            return Err(ContainerError::Truncated);
        }
        if rest.len() as u64 > code_len {
            return Err(ContainerError::TrailingBytes);
        }
        if n == 0 && code_bit_len != 0 {
            return Err(ContainerError::Malformed("code present for empty text"));
        }
        let code = ByteImage::new(rest.to_vec(), code_bit_len as usize);
        code.validate().map_err(|_| ContainerError::BadPadding)?;
        Ok(Archive {
            algo,
            mode,
            n,
            d,
            final_state,
            dictionary,
            freqs,
            code,
        })
    }
}

pub fn pack_archive(archive: &Archive) -> Result<Vec<u8>, ContainerError> {
    archive.to_bytes()
}

pub fn unpack_archive(bytes: &[u8]) -> Result<Archive, ContainerError> {
    Archive::from_bytes(bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }

    fn byte(&mut self) -> Result<u8, ContainerError> {
        let b = *self.bytes.get(self.pos).ok_or(ContainerError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8], ContainerError> {
        if self.rest().len() < len {
            return Err(ContainerError::Truncated);
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn varint(&mut self) -> Result<u64, ContainerError> {
        let (v, used) = read_varint(self.rest()).map_err(|e| match e {
            BitError::Truncated => ContainerError::Truncated,
            BitError::Overlong => ContainerError::Malformed("overlong varint"),
            _ => ContainerError::Malformed("varint overflow"),
        })?;
        self.pos += used;
        Ok(v)
    }

    /// A varint used as a byte length; must fit in the remaining input.
    fn length(&mut self) -> Result<usize, ContainerError> {
        let v = self.varint()?;
        if v > self.rest().len() as u64 {
            return Err(ContainerError::Truncated);
        }
        Ok(v as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDirection {
    Compress,
    Decompress,
}

impl FilterDirection {
    pub fn name(self) -> &'static str {
        match self {
            FilterDirection::Compress => "compress",
            FilterDirection::Decompress => "decompress",
        }
    }
}

/// External dictionary compressor configuration.
///
/// Templates are run with `sh -c` after substituting `{in}`, `{out}` and
/// `{dir}` (`compress` or `decompress`). The decompress direction uses its
/// own template when one is given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictFilter {
    pub compress: String,
    pub decompress: Option<String>,
}

impl DictFilter {
    pub fn new(template: impl Into<String>) -> Self {
        Self {
            compress: template.into(),
            decompress: None,
        }
    }

    /// Reads `DICT_FILTER_CMD` and, optionally, `DICT_UNFILTER_CMD`.
    pub fn from_env() -> Option<Self> {
        let compress = std::env::var(FILTER_ENV).ok().filter(|s| !s.trim().is_empty())?;
        let decompress = std::env::var(UNFILTER_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty());
        Some(Self {
            compress,
            decompress,
        })
    }

    pub fn template(&self, direction: FilterDirection) -> &str {
        match direction {
            FilterDirection::Compress => &self.compress,
            FilterDirection::Decompress => self.decompress.as_deref().unwrap_or(&self.compress),
        }
    }

    pub fn apply(&self, blob: &[u8], direction: FilterDirection) -> Result<Vec<u8>, ContainerError> {
        dict_filter(blob, self.template(direction), direction)
    }
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.to_string_lossy().replace('\'', r"'\''"))
}

/// Pipes `blob` through an external command template.
pub fn dict_filter(
    blob: &[u8],
    template: &str,
    direction: FilterDirection,
) -> Result<Vec<u8>, ContainerError> {
    let fail = |msg: String| ContainerError::ExternalToolFailure(msg);
    let dir = tempfile::tempdir().map_err(|e| fail(format!("temporary directory: {e}")))?;
    let input = dir.path().join("in");
    let output = dir.path().join("out");
    std::fs::File::create(&input)
        .and_then(|mut f| f.write_all(blob))
        .map_err(|e| fail(format!("writing filter input: {e}")))?;
    let command = template
        .replace("{in}", &shell_quote(&input))
        .replace("{out}", &shell_quote(&output))
        .replace("{dir}", direction.name());
    let result = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .output()
        .map_err(|e| fail(format!("spawning `{command}`: {e}")))?;
    if !result.status.success() {
        return Err(fail(format!(
            "`{command}` exited with {}: {}",
            result.status,
            String::from_utf8_lossy(&result.stderr).trim_end()
        )));
    }
    std::fs::read(&output).map_err(|e| fail(format!("reading filter output: {e}")))
}
