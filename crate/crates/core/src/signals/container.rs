//! The SSF1 container.
//!
//! ```text
//! "SSF1" | version: u32 LE | header_len: u32 LE | header (UTF-8 JSON) | payload | crc64: u64 LE
//! ```
//!
//! The payload is little-endian: `f64` for real samples, interleaved `re, im`
//! pairs for complex coefficients. The checksum is CRC-64/XZ over the payload.

use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_XZ};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gft::{S2Signal, S2Spectrum, SO3Signal, SO3Spectrum, Signal};
use crate::grids::Bandwidth;
use crate::harmonics::WignerTables;

pub const MAGIC: &[u8; 4] = b"SSF1";
pub const VERSION: u32 = 1;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

/// Anything the container can hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    S2(S2Signal),
    SO3(SO3Signal),
    S2Spectrum(S2Spectrum),
    SO3Spectrum(SO3Spectrum),
    Tables(WignerTables),
}

impl From<Signal> for Object {
    fn from(s: Signal) -> Self {
        match s {
            Signal::S2(s) => Object::S2(s),
            Signal::SO3(s) => Object::SO3(s),
        }
    }
}

impl Object {
    /// The signal inside, if this object is one.
    pub fn into_signal(self) -> Option<Signal> {
        match self {
            Object::S2(s) => Some(Signal::S2(s)),
            Object::SO3(s) => Some(Signal::SO3(s)),
            _ => None,
        }
    }

    pub fn header(&self) -> Header {
        let (object_type, bandwidth, channels) = match self {
            Object::S2(s) => (ObjectType::S2, s.bandwidth, s.channels),
            Object::SO3(s) => (ObjectType::SO3, s.bandwidth, s.channels),
            Object::S2Spectrum(s) => (ObjectType::S2Spec, s.bandwidth, s.channels),
            Object::SO3Spectrum(s) => (ObjectType::SO3Spec, s.bandwidth, s.channels),
            Object::Tables(t) => (ObjectType::WignerTables, t.bandwidth, 1),
        };
        Header {
            object_type,
            bandwidth: bandwidth.get(),
            channels,
            dtype: object_type.dtype().into(),
            layout: object_type.layout().into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectType {
    #[serde(rename = "s2")]
    S2,
    #[serde(rename = "so3")]
    SO3,
    #[serde(rename = "s2spec")]
    S2Spec,
    #[serde(rename = "so3spec")]
    SO3Spec,
    #[serde(rename = "wigner-tables")]
    WignerTables,
}

impl ObjectType {
    pub fn dtype(self) -> &'static str {
        match self {
            ObjectType::S2 | ObjectType::SO3 | ObjectType::WignerTables => "f64",
            ObjectType::S2Spec | ObjectType::SO3Spec => "c128",
        }
    }

    pub fn layout(self) -> &'static str {
        match self {
            ObjectType::S2 => "channel,beta,alpha",
            ObjectType::SO3 => "channel,beta,alpha,gamma",
            ObjectType::S2Spec => "channel,degree,m",
            ObjectType::SO3Spec => "channel,degree,m,n",
            ObjectType::WignerTables => "d[ring,degree,m,n];legendre[ring,degree,m];weights[ring]",
        }
    }

    /// Number of scalars (`f64` or complex) in the payload.
    fn scalars(self, b: Bandwidth, channels: usize) -> usize {
        let n = b.samples();
        match self {
            ObjectType::S2 => channels * n * n,
            ObjectType::SO3 => channels * n * n * n,
            ObjectType::S2Spec => channels * b.s2_coefficients(),
            ObjectType::SO3Spec => channels * b.so3_coefficients(),
            ObjectType::WignerTables => n * (b.so3_coefficients() + b.s2_coefficients() + 1),
        }
    }

    fn payload_bytes(self, b: Bandwidth, channels: usize) -> usize {
        let width = if self.dtype() == "c128" { 16 } else { 8 };
        width * self.scalars(b, channels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    #[serde(rename = "type")]
    pub object_type: ObjectType,
    pub bandwidth: usize,
    pub channels: usize,
    pub dtype: String,
    pub layout: String,
}

fn put_reals(out: &mut Vec<u8>, v: &[f64]) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn put_complex(out: &mut Vec<u8>, v: &[Complex64]) {
    for z in v {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

fn reals(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect()
}

fn complexes(bytes: &[u8]) -> Vec<Complex64> {
    reals(bytes).chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Serializes an object into SSF1 bytes.
pub fn encode(obj: &Object) -> Vec<u8> {
    let header = serde_json::to_vec(&obj.header()).expect("header serializes");
    let mut payload = Vec::new();
    match obj {
        Object::S2(s) => put_reals(&mut payload, &s.data),
        Object::SO3(s) => put_reals(&mut payload, &s.data),
        Object::S2Spectrum(s) => put_complex(&mut payload, &s.data),
        Object::SO3Spectrum(s) => put_complex(&mut payload, &s.data),
        Object::Tables(t) => {
            put_reals(&mut payload, &t.d_samples);
            put_reals(&mut payload, &t.legendre);
            put_reals(&mut payload, &t.weights);
        }
    }
    let mut out = Vec::with_capacity(12 + header.len() + payload.len() + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&CRC64.checksum(&payload).to_le_bytes());
    out
}

fn u32_at(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|s| u32::from_le_bytes(s.try_into().expect("4-byte slice")))
        .ok_or(Error::Truncated(what))
}

/// Parses the preamble and header, returning the header and the payload offset.
pub fn decode_header(bytes: &[u8]) -> Result<(Header, usize)> {
    match bytes.get(..4) {
        Some(m) if m == MAGIC => {}
        Some(_) => return Err(Error::BadMagic),
        None => return Err(Error::Truncated("magic")),
    }
    let version = u32_at(bytes, 4, "version")?;
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    let len = u32_at(bytes, 8, "header length")? as usize;
    let raw = bytes.get(12..12 + len).ok_or(Error::Truncated("header"))?;
    let header: Header = serde_json::from_slice(raw).map_err(|e| Error::Header(e.to_string()))?;
    if header.dtype != header.object_type.dtype() {
        return Err(Error::Header(format!(
            "dtype {} does not match type {:?}",
            header.dtype, header.object_type
        )));
    }
    if header.channels == 0 && header.object_type != ObjectType::WignerTables {
        return Err(Error::Header("zero channels".into()));
    }
    Ok((header, 12 + len))
}

/// Parses SSF1 bytes.
pub fn decode(bytes: &[u8]) -> Result<Object> {
    let (header, start) = decode_header(bytes)?;
    let b = Bandwidth::new(header.bandwidth).map_err(|e| Error::Header(e.to_string()))?;
    let kind = header.object_type;
    let size = kind.payload_bytes(b, header.channels);
    let end = start + size;
    if bytes.len() < end + 8 {
        return Err(Error::Truncated("payload"));
    }
    if bytes.len() > end + 8 {
        return Err(Error::Header(format!("{} unexpected trailing bytes", bytes.len() - end - 8)));
    }
    let payload = &bytes[start..end];
    let stored = u64::from_le_bytes(bytes[end..end + 8].try_into().expect("8-byte slice"));
    let computed = CRC64.checksum(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }
    let c = header.channels;
    Ok(match kind {
        ObjectType::S2 => Object::S2(S2Signal::new(b, c, reals(payload))?),
        ObjectType::SO3 => Object::SO3(SO3Signal::new(b, c, reals(payload))?),
        ObjectType::S2Spec => Object::S2Spectrum(S2Spectrum::new(b, c, complexes(payload))?),
        ObjectType::SO3Spec => Object::SO3Spectrum(SO3Spectrum::new(b, c, complexes(payload))?),
        ObjectType::WignerTables => {
            let rings = b.samples();
            let all = reals(payload);
            let (d, rest) = all.split_at(rings * b.so3_coefficients());
            let (leg, w) = rest.split_at(rings * b.s2_coefficients());
            Object::Tables(WignerTables::from_parts(b, d.to_vec(), leg.to_vec(), w.to_vec())?)
        }
    })
}

pub fn write_container(path: impl AsRef<Path>, obj: &Object) -> Result<()> {
    fs::write(path, encode(obj))?;
    Ok(())
}

pub fn read_container(path: impl AsRef<Path>) -> Result<Object> {
    decode(&fs::read(path)?)
}

/// Reads only as much as needed to validate and return the header.
pub fn read_header(path: impl AsRef<Path>) -> Result<Header> {
    Ok(decode_header(&fs::read(path)?)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bw(b: usize) -> Bandwidth {
        Bandwidth::new(b).unwrap()
    }

    fn sample() -> Object {
        Object::S2(S2Signal::from_fn(bw(3), 2, |c, a, b| c as f64 + a.sin() * b.cos()))
    }

    #[test]
    fn s2_round_trip_is_bitwise() {
        let obj = sample();
        assert_eq!(decode(&encode(&obj)).unwrap(), obj);
    }

    #[test]
    fn so3_spectrum_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obj = Object::SO3Spectrum(SO3Spectrum::random_real(bw(4), 2, &mut rng));
        assert_eq!(decode(&encode(&obj)).unwrap(), obj);
    }

    #[test]
    fn header_fields() {
        let bytes = encode(&sample());
        let (h, _) = decode_header(&bytes).unwrap();
        assert_eq!(h.object_type, ObjectType::S2);
        assert_eq!((h.bandwidth, h.channels, h.dtype.as_str()), (3, 2, "f64"));
        let json = std::str::from_utf8(&bytes[12..12 + u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize]).unwrap();
        assert!(json.contains("\"type\":\"s2\""));
    }

    #[test]
    fn corruption_is_classified() {
        let good = encode(&sample());

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::BadMagic)));

        let mut bad = good.clone();
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(Error::VersionMismatch(9))));

        assert!(matches!(decode(&good[..good.len() - 20]), Err(Error::Truncated(_))));
        assert!(matches!(decode(&good[..6]), Err(Error::Truncated(_))));

        let mut bad = good.clone();
        let mid = good.len() - 30;
        bad[mid] ^= 0x40;
        assert!(matches!(decode(&bad), Err(Error::ChecksumMismatch { .. })));

        let mut bad = good.clone();
        bad[13] = b'#';
        assert!(matches!(decode(&bad), Err(Error::Header(_))));
    }
}
