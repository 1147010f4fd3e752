//! File formats for transmission maps.
//!
//! CSV: header `b_tesla,f_hz,s21_db`, one row per grid point, row-major in
//! `B` then `f`. Values are written in shortest round-trip form, so a
//! re-read reproduces every `f64` exactly.
//!
//! Binary (little endian throughout):
//!
//! | offset | type            | content                                  |
//! |--------|-----------------|------------------------------------------|
//! | 0      | `[u8; 8]`       | magic `S21GRID1`                         |
//! | 8      | `u32`           | kind: 0 = complex `S21`, 1 = dB          |
//! | 12     | `u64`           | `nb`, number of field points             |
//! | 20     | `u64`           | `nf`, number of frequency points         |
//! | 28     | `f64 x nb`      | field axis, tesla                        |
//! |        | `f64 x nf`      | frequency axis, Hz                       |
//! |        | values          | complex: `(re, im)` pairs; dB: one `f64` |
//!
//! Values are row-major in `B` then `f`.

use std::io::{self, BufRead, Read, Write};

use num_complex::Complex;

use crate::coupled::{MapData, TransmissionMap};
use crate::scalar::Real;

pub const CSV_HEADER: &str = "b_tesla,f_hz,s21_db";
pub const BINARY_MAGIC: &[u8; 8] = b"S21GRID1";

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn write_csv<T: Real, W: Write>(map: &TransmissionMap<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let (nb, nf) = map.shape();
    for i in 0..nb {
        let b = map.b_axis()[i].as_f64();
        for j in 0..nf {
            writeln!(w, "{:?},{:?},{:?}", b, map.f_axis()[j].as_f64(), map.db(i, j).as_f64())?;
        }
    }
    Ok(())
}

/// Reads a CSV map. The result holds dB magnitudes.
pub fn read_csv<R: BufRead>(r: R) -> io::Result<TransmissionMap<f64>> {
    let mut lines = r.lines().enumerate();
    let header = lines.next().ok_or_else(|| invalid("empty map file"))?.1?;
    if header.trim() != CSV_HEADER {
        return Err(invalid(format!("line 1: expected header `{CSV_HEADER}`, got `{}`", header.trim())));
    }
    let mut b_axis: Vec<f64> = Vec::new();
    let mut f_axis: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut row_in_column = 0usize;
    for (n, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = n + 1;
        let mut parts = line.split(',');
        let mut field = |name: &str| -> io::Result<f64> {
            parts
                .next()
                .ok_or_else(|| invalid(format!("line {lineno}: missing {name}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| invalid(format!("line {lineno}: bad {name}: {e}")))
        };
        let (b, f, v) = (field("b_tesla")?, field("f_hz")?, field("s21_db")?);
        if parts.next().is_some() {
            return Err(invalid(format!("line {lineno}: expected 3 columns")));
        }
        if b_axis.last() != Some(&b) {
            if !b_axis.is_empty() && row_in_column != f_axis.len() {
                return Err(invalid(format!("line {lineno}: incomplete column before B = {b}")));
            }
            b_axis.push(b);
            row_in_column = 0;
        }
        if b_axis.len() == 1 {
            f_axis.push(f);
        } else if f_axis.get(row_in_column) != Some(&f) {
            return Err(invalid(format!("line {lineno}: frequency {f} does not match the axis")));
        }
        row_in_column += 1;
        values.push(v);
    }
    if b_axis.len() > 1 && row_in_column != f_axis.len() {
        return Err(invalid("incomplete final column"));
    }
    TransmissionMap::new(b_axis, f_axis, MapData::Db(values)).map_err(|e| invalid(e.to_string()))
}

pub fn write_binary<T: Real, W: Write>(map: &TransmissionMap<T>, mut w: W) -> io::Result<()> {
    let (nb, nf) = map.shape();
    w.write_all(BINARY_MAGIC)?;
    let kind: u32 = match map.data() {
        MapData::Complex(_) => 0,
        MapData::Db(_) => 1,
    };
    w.write_all(&kind.to_le_bytes())?;
    w.write_all(&(nb as u64).to_le_bytes())?;
    w.write_all(&(nf as u64).to_le_bytes())?;
    for v in map.b_axis().iter().chain(map.f_axis()) {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    match map.data() {
        MapData::Complex(v) => {
            for z in v {
                w.write_all(&z.re.as_f64().to_le_bytes())?;
                w.write_all(&z.im.as_f64().to_le_bytes())?;
            }
        }
        MapData::Db(v) => {
            for x in v {
                w.write_all(&x.as_f64().to_le_bytes())?;
            }
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> io::Result<TransmissionMap<f64>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(invalid("not a transmission map: bad magic"));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let kind = u32::from_le_bytes(b4);
    let mut b8 = [0u8; 8];
    let mut read_u64 = |r: &mut R| -> io::Result<u64> {
        r.read_exact(&mut b8)?;
        Ok(u64::from_le_bytes(b8))
    };
    let nb = read_u64(&mut r)? as usize;
    let nf = read_u64(&mut r)? as usize;
    let mut read_f64s = |n: usize| -> io::Result<Vec<f64>> {
        let mut buf = vec![0u8; n.checked_mul(8).ok_or_else(|| invalid("size overflow"))?];
        r.read_exact(&mut buf)?;
        Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    };
    let b_axis = read_f64s(nb)?;
    let f_axis = read_f64s(nf)?;
    let data = match kind {
        0 => {
            let raw = read_f64s(2 * nb * nf)?;
            MapData::Complex(raw.chunks_exact(2).map(|c| Complex::new(c[0], c[1])).collect())
        }
        1 => MapData::Db(read_f64s(nb * nf)?),
        k => return Err(invalid(format!("unknown value kind {k}"))),
    };
    TransmissionMap::new(b_axis, f_axis, data).map_err(|e| invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupled::{linspace, transmission_map, CoupledSystem, Noise};
    use crate::model::{MagnonBranch, PhotonMode};
    use proptest::prelude::*;

    fn map() -> TransmissionMap<f64> {
        let sys = CoupledSystem::with_symmetric_ports(
            vec![PhotonMode::new("c", 15e9, 1e6).unwrap()],
            vec![MagnonBranch::new(28e9, 0.0, 1e6).unwrap()],
            vec![vec![0.4e9]],
            0.5,
        )
        .unwrap();
        transmission_map(&sys, &linspace(0.4, 0.7, 7), &linspace(14e9, 16e9, 33), Some(Noise { amplitude: 1e-3, seed: 1 }))
            .unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = map();
        let mut buf = Vec::new();
        write_csv(&m, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m.to_db_map());
        let mut again = Vec::new();
        write_csv(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let m = map();
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(read_binary(buf.as_slice()).unwrap(), m);
        let db = m.to_db_map();
        buf.clear();
        write_binary(&db, &mut buf).unwrap();
        assert_eq!(read_binary(buf.as_slice()).unwrap(), db);
    }

    #[test]
    fn csv_rejects_malformed() {
        assert!(read_csv("b,f,s\n".as_bytes()).is_err());
        let ragged = "b_tesla,f_hz,s21_db\n0.1,1,0\n0.1,2,0\n0.2,1,0\n0.3,1,0\n0.3,2,0\n";
        assert!(read_csv(ragged.as_bytes()).is_err());
        let bad = "b_tesla,f_hz,s21_db\n0.1,1,x\n";
        let err = read_csv(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(read_binary(&b"NOTAMAP!"[..]).is_err());
    }

    proptest! {
        #[test]
        fn binary_round_trip_arbitrary(
            nb in 1usize..5, nf in 1usize..5,
            vals in prop::collection::vec(-1e300f64..1e300, 50),
        ) {
            let b: Vec<f64> = (0..nb).map(|i| 0.1 * i as f64 + vals[0].abs().min(1.0)).collect();
            let f: Vec<f64> = (0..nf).map(|i| 1e9 + i as f64 * 3.3e7).collect();
            let data: Vec<Complex<f64>> = (0..nb * nf).map(|k| Complex::new(vals[k % 50], vals[(k + 7) % 50])).collect();
            let m = TransmissionMap::new(b, f, MapData::Complex(data)).unwrap();
            let mut buf = Vec::new();
            write_binary(&m, &mut buf).unwrap();
            prop_assert_eq!(read_binary(buf.as_slice()).unwrap(), m.clone());
            let mut csv = Vec::new();
            write_csv(&m, &mut csv).unwrap();
            prop_assert_eq!(read_csv(csv.as_slice()).unwrap(), m.to_db_map());
        }
    }
}
