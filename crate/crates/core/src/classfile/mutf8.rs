// Copyright (c) The bcb Contributors
// SPDX-License-Identifier: Apache-2.0

//! Modified UTF-8 as used by `CONSTANT_Utf8` entries: NUL is encoded as two
//! bytes and supplementary characters as surrogate pairs of 3-byte sequences.

pub fn decode(bytes: &[u8]) -> Option<String> {
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b & 0x80 == 0 {
            if b == 0 {
                return None;
            }
            units.push(b as u16);
            i += 1;
        } else if b & 0xE0 == 0xC0 {
            let b2 = *bytes.get(i + 1)?;
            if b2 & 0xC0 != 0x80 {
                return None;
            }
            units.push(((b as u16 & 0x1F) << 6) | (b2 as u16 & 0x3F));
            i += 2;
        } else if b & 0xF0 == 0xE0 {
            let b2 = *bytes.get(i + 1)?;
            let b3 = *bytes.get(i + 2)?;
            if b2 & 0xC0 != 0x80 || b3 & 0xC0 != 0x80 {
                return None;
            }
            units.push(((b as u16 & 0x0F) << 12) | ((b2 as u16 & 0x3F) << 6) | (b3 as u16 & 0x3F));
            i += 3;
        } else {
            return None;
        }
    }
    String::from_utf16(&units).ok()
}

pub fn encode(text: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(text.len());
    for unit in text.encode_utf16() {
        match unit {
            0x0001..=0x007F => out.push(unit as u8),
            0x0000 | 0x0080..=0x07FF => {
                out.push(0xC0 | ((unit >> 6) as u8 & 0x1F));
                out.push(0x80 | (unit as u8 & 0x3F));
            }
            _ => {
                out.push(0xE0 | ((unit >> 12) as u8 & 0x0F));
                out.push(0x80 | ((unit >> 6) as u8 & 0x3F));
                out.push(0x80 | (unit as u8 & 0x3F));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nul_and_supplementary() {
        assert_eq!(encode("\0"), vec![0xC0, 0x80]);
        // U+1F600 becomes a surrogate pair, six bytes total
        let e = encode("\u{1F600}");
        assert_eq!(e.len(), 6);
        assert_eq!(decode(&e).unwrap(), "\u{1F600}");
        assert!(decode(&[0x00]).is_none());
        assert!(decode(&[0xC0]).is_none());
    }

    proptest! {
        #[test]
        fn round_trip(s in ".*") {
            prop_assert_eq!(decode(&encode(&s)).unwrap(), s);
        }
    }
}
