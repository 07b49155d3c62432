//! Prefix-free serialization of the counter array.
//!
//! Each counter is coded as one sign bit followed by the Elias-gamma code
//! of `|A[i]| + 1`, i.e. `2*floor(log2(|A[i]|+1)) + 2` bits. Summed over
//! the array and bounded through the concavity of `log`, the counter
//! section always fits in [`counter_bit_budget`] = `2P ceil(log2(n/P+2))
//! + 4P` bits, the `O(P log(n/P))` regime the sketch is built for.
//!
//! The at-rest format `F2SK` v1 is byte-exact:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "F2SK"
//! 4       1     version (1)
//! 5       8     epsilon as IEEE-754 bits, big-endian
//! 13      8     bucket count P, big-endian
//! 21      8     hash seed, big-endian
//! 29      8     items_seen n, big-endian
//! 37      ...   counter bitstream, MSB-first, zero-padded to a byte
//! end-4   4     CRC-32 (IEEE) of all preceding bytes, big-endian
//! ```
//!
//! The counter bitstream is self-delimiting given `P`; the decoder
//! consumes exactly the encoded bits and rejects trailing garbage,
//! truncation, non-canonical "-0" counters, and checksum mismatches with
//! the failing bit position.

use alloc::vec::Vec;

use crate::error::Error;
use crate::sketch::F2Sketch;

pub const MAGIC: [u8; 4] = *b"F2SK";
pub const FORMAT_VERSION: u8 = 1;

/// Fixed file overhead in bits: magic, version, four 64-bit header fields,
/// checksum, and up to one byte of bitstream padding.
pub const HEADER_BITS: u64 = 8 * (4 + 1 + 4 * 8 + 4) + 8;

const HEADER_BYTES: usize = 4 + 1 + 4 * 8;

/// Counter-section budget in bits for any length-`n` stream:
/// `2P * ceil(log2(n/P + 2)) + 4P`.
pub fn counter_bit_budget(bucket_count: u64, n: u64) -> u64 {
    let per = ceil_log2(n.div_ceil(bucket_count) + 2);
    2 * bucket_count * per + 4 * bucket_count
}

/// Whole-file budget: counter section plus the fixed header overhead.
pub fn bit_budget(bucket_count: u64, n: u64) -> u64 {
    counter_bit_budget(bucket_count, n) + HEADER_BITS
}

/// Smallest `b` with `2^b >= m`, for `m >= 1`.
fn ceil_log2(m: u64) -> u64 {
    if m <= 1 {
        0
    } else {
        64 - (m - 1).leading_zeros() as u64
    }
}

/// Bits taken by one encoded counter: sign bit plus gamma of `|a|+1`.
pub fn counter_code_bits(counter: i64) -> u64 {
    let m = counter.unsigned_abs() + 1;
    let width = 64 - m.leading_zeros() as u64;
    1 + 2 * width - 1
}

struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            bit_len: 0,
        }
    }

    fn push_bit(&mut self, bit: bool) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let byte = self.bit_len / 8;
            self.bytes[byte] |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    /// Elias gamma of `m >= 1`: `width-1` zeros, then `m` in `width` bits.
    fn push_gamma(&mut self, m: u64) {
        debug_assert!(m >= 1);
        let width = 64 - m.leading_zeros();
        for _ in 0..width - 1 {
            self.push_bit(false);
        }
        for i in (0..width).rev() {
            self.push_bit(m >> i & 1 == 1);
        }
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    bit_len: usize,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8], bit_len: usize) -> Self {
        BitReader {
            bytes,
            pos: 0,
            bit_len,
        }
    }

    fn read_bit(&mut self) -> Result<bool, Error> {
        if self.pos >= self.bit_len {
            return Err(Error::Decode {
                bit: self.pos,
                reason: "unexpected end of bitstream",
            });
        }
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    fn read_gamma(&mut self) -> Result<u64, Error> {
        let start = self.pos;
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(Error::Decode {
                    bit: start,
                    reason: "gamma length prefix too long",
                });
            }
        }
        let mut value = 1u64;
        for _ in 0..zeros {
            value = value << 1 | self.read_bit()? as u64;
        }
        Ok(value)
    }
}

fn crc32(data: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in data {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

/// A sketch serialized at rest: fixed-width header plus the prefix-free
/// counter bitstream.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSketch {
    epsilon: f64,
    bucket_count: u64,
    seed: u64,
    items_seen: u64,
    counter_bytes: Vec<u8>,
    counter_bit_len: usize,
}

impl EncodedSketch {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn bucket_count(&self) -> u64 {
        self.bucket_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    /// Exact bits of the counter section, before byte padding.
    pub fn counter_bit_len(&self) -> u64 {
        self.counter_bit_len as u64
    }

    /// Size of [`Self::to_bytes`] in bits.
    pub fn total_bits(&self) -> u64 {
        ((HEADER_BYTES + self.counter_bytes.len() + 4) * 8) as u64
    }

    /// Serializes to the `F2SK` v1 byte format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + self.counter_bytes.len() + 4);
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&self.epsilon.to_bits().to_be_bytes());
        out.extend_from_slice(&self.bucket_count.to_be_bytes());
        out.extend_from_slice(&self.seed.to_be_bytes());
        out.extend_from_slice(&self.items_seen.to_be_bytes());
        out.extend_from_slice(&self.counter_bytes);
        let crc = crc32(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    /// Parses the `F2SK` v1 byte format, verifying magic, version,
    /// checksum, counter structure, and padding.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, Error> {
        if bytes.len() < HEADER_BYTES + 4 {
            return Err(Error::Decode {
                bit: bytes.len() * 8,
                reason: "file shorter than header",
            });
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Decode {
                bit: 0,
                reason: "bad magic",
            });
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(Error::Decode {
                bit: 32,
                reason: "unsupported version",
            });
        }
        let body = &bytes[..bytes.len() - 4];
        let stored = u32::from_be_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
        if crc32(body) != stored {
            return Err(Error::Decode {
                bit: body.len() * 8,
                reason: "checksum mismatch",
            });
        }
        let field = |i: usize| {
            u64::from_be_bytes(bytes[5 + 8 * i..5 + 8 * (i + 1)].try_into().unwrap())
        };
        let epsilon = f64::from_bits(field(0));
        let bucket_count = field(1);
        let seed = field(2);
        let items_seen = field(3);
        let counter_bytes = bytes[HEADER_BYTES..bytes.len() - 4].to_vec();

        let enc = EncodedSketch {
            epsilon,
            bucket_count,
            seed,
            items_seen,
            counter_bit_len: counter_bytes.len() * 8,
            counter_bytes,
        };
        // Structural scan pins the exact bit length and validates padding.
        let consumed = enc.scan_counters()?;
        let padding = enc.counter_bytes.len() * 8 - consumed;
        if padding >= 8 {
            return Err(Error::Decode {
                bit: consumed,
                reason: "oversized counter padding",
            });
        }
        let mut reader = BitReader::new(&enc.counter_bytes, enc.counter_bytes.len() * 8);
        reader.pos = consumed;
        for _ in 0..padding {
            if reader.read_bit()? {
                return Err(Error::Decode {
                    bit: reader.pos - 1,
                    reason: "nonzero padding bit",
                });
            }
        }
        Ok(EncodedSketch {
            counter_bit_len: consumed,
            ..enc
        })
    }

    fn scan_counters(&self) -> Result<usize, Error> {
        let mut reader = BitReader::new(&self.counter_bytes, self.counter_bytes.len() * 8);
        for _ in 0..self.bucket_count {
            decode_counter(&mut reader)?;
        }
        Ok(reader.pos)
    }
}

fn decode_counter(reader: &mut BitReader<'_>) -> Result<i64, Error> {
    let start = reader.pos;
    let negative = reader.read_bit()?;
    let m = reader.read_gamma()?;
    let magnitude = m - 1;
    if magnitude > crate::sketch::MAX_ITEMS {
        return Err(Error::Decode {
            bit: start,
            reason: "counter magnitude exceeds the update guard",
        });
    }
    if negative && magnitude == 0 {
        return Err(Error::Decode {
            bit: start,
            reason: "negative zero counter",
        });
    }
    Ok(if negative {
        -(magnitude as i64)
    } else {
        magnitude as i64
    })
}

/// Encodes a sketch: header fields plus sign+gamma of every counter.
pub fn encode(state: &F2Sketch) -> EncodedSketch {
    let mut writer = BitWriter::new();
    for &c in state.counters() {
        writer.push_bit(c < 0);
        writer.push_gamma(c.unsigned_abs() + 1);
    }
    EncodedSketch {
        epsilon: state.epsilon(),
        bucket_count: state.bucket_count(),
        seed: state.seed(),
        items_seen: state.items_seen(),
        counter_bit_len: writer.bit_len,
        counter_bytes: writer.bytes,
    }
}

/// Exact inverse of [`encode`]: rebuilds the sketch, consuming exactly
/// `counter_bit_len` bits of the counter section.
pub fn decode(enc: &EncodedSketch) -> Result<F2Sketch, Error> {
    if enc.bucket_count == 0 || enc.bucket_count > crate::hashing::MAX_BUCKET_COUNT {
        return Err(Error::InvalidBucketCount(enc.bucket_count));
    }
    let mut reader = BitReader::new(&enc.counter_bytes, enc.counter_bit_len);
    let mut counters = Vec::with_capacity(enc.bucket_count as usize);
    for _ in 0..enc.bucket_count {
        counters.push(decode_counter(&mut reader)?);
    }
    if reader.pos != enc.counter_bit_len {
        return Err(Error::Decode {
            bit: reader.pos,
            reason: "trailing bits after counters",
        });
    }
    F2Sketch::from_parts(enc.epsilon, enc.seed, counters, enc.items_seen)
}
