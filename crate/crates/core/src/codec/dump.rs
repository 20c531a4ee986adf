//! Binary encoded-state dump: `b"QSVE"`, version `u32`, `N` as `u64`, table
//! length `u32` (zero slot included), flags `u32` (bit 0: saturated), the
//! table as `f64`s, then the `2^(N+1)` code bytes. All little-endian.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{Codebook, EncodedState};

pub const ENCODED_DUMP_MAGIC: [u8; 4] = *b"QSVE";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EncodedDumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported dump version {0}")]
    Version(u32),
    #[error("{0} qubits is too large to load")]
    TooLarge(u64),
    #[error("invalid value table")]
    BadTable,
}

pub fn write_encoded_dump(e: &EncodedState, mut w: impl Write) -> io::Result<()> {
    let values = e.codebook().values();
    w.write_all(&ENCODED_DUMP_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(e.n_qubits() as u64).to_le_bytes())?;
    w.write_all(&(values.len() as u32).to_le_bytes())?;
    w.write_all(&(e.codebook().is_saturated() as u32).to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    for chunk in e.codes().chunks(1 << 15) {
        w.write_all(chunk.as_flattened())?;
    }
    Ok(())
}

/// Reads a dump back. Codes are not checked against the table.
pub fn read_encoded_dump(mut r: impl Read) -> Result<EncodedState, EncodedDumpError> {
    let mut header = [0u8; 24];
    r.read_exact(&mut header)?;
    let magic: [u8; 4] = header[0..4].try_into().expect("4 bytes");
    if magic != ENCODED_DUMP_MAGIC {
        return Err(EncodedDumpError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(EncodedDumpError::Version(version));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    if n >= 48 {
        return Err(EncodedDumpError::TooLarge(n));
    }
    let table_len = u32::from_le_bytes(header[16..20].try_into().expect("4 bytes")) as usize;
    let flags = u32::from_le_bytes(header[20..24].try_into().expect("4 bytes"));
    if table_len == 0 || table_len > super::TABLE_SIZE || flags > 1 {
        return Err(EncodedDumpError::BadTable);
    }
    let mut values = Vec::with_capacity(table_len);
    let mut cell = [0u8; 8];
    for _ in 0..table_len {
        r.read_exact(&mut cell)?;
        values.push(f64::from_le_bytes(cell));
    }
    let book = Codebook::from_values(&values, flags == 1).ok_or(EncodedDumpError::BadTable)?;
    let mut codes = vec![[0u8; 2]; 1usize << n];
    r.read_exact(codes.as_flattened_mut())?;
    Ok(EncodedState::from_parts(n as usize, codes, book).expect("length matches header"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gen_ghz_chain;
    use crate::codec::run_circuit_encoded;

    #[test]
    fn round_trip_and_layout() {
        let e = run_circuit_encoded(&gen_ghz_chain(3).unwrap()).unwrap();
        let mut bytes = Vec::new();
        write_encoded_dump(&e, &mut bytes).unwrap();
        let table = e.codebook().len();
        assert_eq!(bytes.len(), 24 + 8 * table + 16);
        assert_eq!(&bytes[0..4], b"QSVE");
        assert_eq!(
            u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize,
            table
        );
        let back = read_encoded_dump(bytes.as_slice()).unwrap();
        assert_eq!(back.codes(), e.codes());
        assert_eq!(back.codebook(), e.codebook());
    }

    #[test]
    fn rejects_bad_input() {
        let e = run_circuit_encoded(&gen_ghz_chain(2).unwrap()).unwrap();
        let mut bytes = Vec::new();
        write_encoded_dump(&e, &mut bytes).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_encoded_dump(bad.as_slice()),
            Err(EncodedDumpError::BadMagic(_))
        ));
        let mut bad = bytes.clone();
        bad[24..32].copy_from_slice(&1.0f64.to_le_bytes());
        assert!(matches!(
            read_encoded_dump(bad.as_slice()),
            Err(EncodedDumpError::BadTable)
        ));
        assert!(matches!(
            read_encoded_dump(&bytes[..bytes.len() - 1]),
            Err(EncodedDumpError::Io(_))
        ));
    }
}
