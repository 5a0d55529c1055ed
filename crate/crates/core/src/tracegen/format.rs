//! `EMLK` trace files. All fields little-endian.
//!
//! | offset | type      | field                                    |
//! |-------:|-----------|------------------------------------------|
//! | 0      | `[u8; 4]` | magic `EMLK`                             |
//! | 4      | u16       | version (1)                              |
//! | 6      | u32       | n_traces                                 |
//! | 10     | u32       | n_samples                                |
//! | 14     | u32       | poi                                      |
//! | 18     | u64       | seed                                     |
//! | 26     | u8        | key                                      |
//! | 27     | 8 x f64   | alpha, beta, sigma, countermeasure_t_s (0 = none), t_ref_s, attenuation exponent (1 or 2), signal_gain, interference_gain |
//! | 91     | n_traces x u8  | plaintexts                          |
//! | 91 + n_traces | n_traces x n_samples x f32 | samples, trace-major |
//!
//! The pulse shape is not stored; a read set carries an empty pulse.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{LeakageParams, Trace, TraceSet};
use crate::energy::RadiationLaw;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"EMLK";
pub const VERSION: u16 = 1;

fn count_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("{what} {n} does not fit in u32")))
}

pub fn write_traceset<W: Write>(mut w: W, ts: &TraceSet) -> Result<()> {
    let m = ts.n_samples();
    if let Some(bad) = ts.traces.iter().position(|t| t.samples.len() != m) {
        return Err(Error::Format(format!("trace {bad} has a different sample count")));
    }
    let p = &ts.leakage;
    w.write_all(&MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    w.write_u32::<LittleEndian>(count_u32(ts.len(), "n_traces")?)?;
    w.write_u32::<LittleEndian>(count_u32(m, "n_samples")?)?;
    w.write_u32::<LittleEndian>(count_u32(p.poi, "poi")?)?;
    w.write_u64::<LittleEndian>(ts.seed)?;
    w.write_u8(ts.true_key)?;
    for v in [
        p.alpha,
        p.beta,
        p.sigma,
        p.countermeasure_t_s.unwrap_or(0.0),
        p.t_ref_s,
        p.attenuation_exponent() as f64,
        ts.signal_gain,
        ts.interference_gain,
    ] {
        w.write_f64::<LittleEndian>(v)?;
    }
    let pts: Vec<u8> = ts.traces.iter().map(|t| t.plaintext).collect();
    w.write_all(&pts)?;
    let mut buf = Vec::with_capacity(ts.len() * m * 4);
    for t in &ts.traces {
        for &s in &t.samples {
            buf.write_f32::<LittleEndian>(s as f32)?;
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_traceset<R: Read>(mut r: R) -> Result<TraceSet> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:02x?}")));
    }
    let version = r.read_u16::<LittleEndian>().map_err(truncated)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let m = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let poi = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let seed = r.read_u64::<LittleEndian>().map_err(truncated)?;
    let key = r.read_u8().map_err(truncated)?;
    let mut f = [0.0f64; 8];
    r.read_f64_into::<LittleEndian>(&mut f).map_err(truncated)?;
    let [alpha, beta, sigma, cm, t_ref_s, exponent, signal_gain, interference_gain] = f;
    let attenuation_law = match exponent {
        2.0 => RadiationLaw::Acceleration,
        1.0 => RadiationLaw::Resistance,
        e => return Err(Error::Format(format!("attenuation exponent {e} is neither 1 nor 2"))),
    };
    if poi >= m {
        return Err(Error::Format(format!("poi {poi} outside {m} samples")));
    }

    let mut pts = vec![0u8; n];
    r.read_exact(&mut pts).map_err(truncated)?;
    let total = n
        .checked_mul(m)
        .ok_or_else(|| Error::Format("sample count overflows".into()))?;
    let mut raw = vec![0.0f32; total];
    r.read_f32_into::<LittleEndian>(&mut raw).map_err(truncated)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }

    let traces = pts
        .into_iter()
        .zip(raw.chunks_exact(m.max(1)))
        .map(|(plaintext, row)| Trace {
            samples: row.iter().map(|&x| x as f64).collect(),
            plaintext,
        })
        .collect();
    Ok(TraceSet {
        traces,
        true_key: key,
        leakage: LeakageParams {
            alpha,
            beta,
            sigma,
            pulse: Vec::new(),
            n_samples: m,
            poi,
            countermeasure_t_s: (cm > 0.0).then_some(cm),
            t_ref_s,
            attenuation_law,
        },
        seed,
        signal_gain,
        interference_gain,
    })
}

/// CSV mirror of the binary layout: one `#` line with the header fields,
/// then `trace,plaintext,s0,...` rows with samples rounded through f32.
pub fn write_traces_csv<W: Write>(mut w: W, ts: &TraceSet) -> Result<()> {
    let p = &ts.leakage;
    writeln!(
        w,
        "# EMLK v{VERSION} n_traces={} n_samples={} poi={} seed={} key={} alpha={:e} beta={:e} sigma={:e} countermeasure_t_s={:e} t_ref_s={:e} attenuation_exponent={} signal_gain={:e} interference_gain={:e}",
        ts.len(),
        ts.n_samples(),
        p.poi,
        ts.seed,
        ts.true_key,
        p.alpha,
        p.beta,
        p.sigma,
        p.countermeasure_t_s.unwrap_or(0.0),
        p.t_ref_s,
        p.attenuation_exponent(),
        ts.signal_gain,
        ts.interference_gain,
    )?;
    let mut header = String::from("trace,plaintext");
    for j in 0..ts.n_samples() {
        header.push_str(&format!(",s{j}"));
    }
    writeln!(w, "{header}")?;
    for (i, t) in ts.traces.iter().enumerate() {
        let mut line = format!("{i},{}", t.plaintext);
        for &s in &t.samples {
            line.push_str(&format!(",{:e}", s as f32));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
