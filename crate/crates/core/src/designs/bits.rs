use crate::error::{Error, Result};

/// Read-only bitstream, most significant bit of each byte first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedBits {
    bytes: Vec<u8>,
}

impl SeedBits {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self { bytes }
    }

    pub fn from_hex(hex: &str) -> Result<Self> {
        let s = hex.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        if !s.len().is_multiple_of(2) {
            return Err(Error::MalformedSeed(
                "hex seed must have an even number of digits".into(),
            ));
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::MalformedSeed(format!("bad hex seed: {e}")))?;
        Ok(Self { bytes })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub(crate) fn bytes_mut(&mut self) -> &mut Vec<u8> {
        &mut self.bytes
    }

    pub fn len_bits(&self) -> u64 {
        self.bytes.len() as u64 * 8
    }

    /// `width <= 128` bits starting at `offset`, as a big-endian integer.
    pub fn read(&self, offset: u64, width: u32) -> Result<u128> {
        if offset + width as u64 > self.len_bits() {
            return Err(Error::InsufficientSeedBits {
                needed: offset + width as u64,
                available: self.len_bits(),
            });
        }
        Ok(self.read_unchecked(offset, width))
    }

    #[inline]
    pub(crate) fn read_unchecked(&self, offset: u64, width: u32) -> u128 {
        debug_assert!(width <= 128);
        let mut out: u128 = 0;
        let mut pos = offset;
        let end = offset + width as u64;
        while pos < end {
            let byte = self.bytes[(pos / 8) as usize];
            let bit_in_byte = (pos % 8) as u32;
            let take = (8 - bit_in_byte).min((end - pos) as u32);
            let chunk = (byte >> (8 - bit_in_byte - take)) & ((1u16 << take) - 1) as u8;
            out = (out << take) | chunk as u128;
            pos += take as u64;
        }
        out
    }
}
