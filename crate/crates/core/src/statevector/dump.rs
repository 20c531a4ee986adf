//! Binary state dump: a 16-byte header (`b"QSVD"`, version `u32`, `N` as
//! `u64`) followed by `2^N` `(re, im)` pairs of `f64`, all little-endian.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use thiserror::Error;

use super::StateVector;

pub const STATE_DUMP_MAGIC: [u8; 4] = *b"QSVD";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported dump version {0}")]
    Version(u32),
    #[error("{0} qubits is too large to load")]
    TooLarge(u64),
}

pub fn write_state_dump(s: &StateVector, mut w: impl Write) -> io::Result<()> {
    w.write_all(&STATE_DUMP_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(s.n_qubits() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * 4096);
    for chunk in s.amplitudes().chunks(4096) {
        buf.clear();
        for a in chunk {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_state_dump(mut r: impl Read) -> Result<StateVector, DumpError> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    let magic: [u8; 4] = header[0..4].try_into().expect("4 bytes");
    if magic != STATE_DUMP_MAGIC {
        return Err(DumpError::BadMagic(magic));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(DumpError::Version(version));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes"));
    if n >= 48 {
        return Err(DumpError::TooLarge(n));
    }
    let len = 1usize << n;
    let mut amps = Vec::with_capacity(len);
    let mut cell = [0u8; 16];
    for _ in 0..len {
        r.read_exact(&mut cell)?;
        let re = f64::from_le_bytes(cell[0..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(cell[8..16].try_into().expect("8 bytes"));
        amps.push(Complex64::new(re, im));
    }
    Ok(StateVector::from_amplitudes(n as usize, amps).expect("length matches header"))
}
