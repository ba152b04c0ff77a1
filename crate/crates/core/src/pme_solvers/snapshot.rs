//! Binary snapshots of a sampled field.
//!
//! Layout: one UTF-8 header line
//! `pme-lab-snapshot v1 le dim=.. nv=.. y_max=.. nt=.. box_len=.. ns=.. horizon=.. sigma=.. slope=a,b`
//! terminated by `\n`, followed by the nodal values as little-endian `f64`
//! in grid index order.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::field::{HalfSpaceGrid, SampledField};
use crate::weighted_measure::SigmaParam;

const MAGIC: &str = "pme-lab-snapshot";
const VERSION: &str = "v1";
const ENDIAN: &str = "le";

fn header(u: &SampledField, sigma: SigmaParam) -> String {
    let g = u.grid();
    let slope: Vec<String> = u.slope().iter().map(|a| format!("{a:e}")).collect();
    format!(
        "{MAGIC} {VERSION} {ENDIAN} dim={} nv={} y_max={:e} nt={} box_len={:e} ns={} horizon={:e} sigma={:e} slope={}\n",
        g.dim(),
        g.nv(),
        g.y_max(),
        g.nt(),
        g.box_len(),
        g.ns(),
        g.horizon(),
        sigma.sigma(),
        slope.join(",")
    )
}

pub fn write_snapshot<W: Write>(out: &mut W, u: &SampledField, sigma: SigmaParam) -> Result<()> {
    out.write_all(header(u, sigma).as_bytes())?;
    let mut buf = Vec::with_capacity(8 * u.values().len());
    for v in u.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn save_snapshot(path: &Path, u: &SampledField, sigma: SigmaParam) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(&mut f, u, sigma)?;
    f.flush()?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Config(format!("malformed snapshot: {}", msg.into()))
}

pub fn read_snapshot<R: Read>(input: R) -> Result<(SampledField, SigmaParam)> {
    let mut r = BufReader::new(input);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let mut parts = line.trim_end().split(' ');
    if parts.next() != Some(MAGIC) || parts.next() != Some(VERSION) {
        return Err(bad("unrecognised header"));
    }
    if parts.next() != Some(ENDIAN) {
        return Err(bad("unsupported byte order"));
    }
    let kv: std::collections::HashMap<&str, &str> = parts.filter_map(|p| p.split_once('=')).collect();
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| bad(format!("missing {k}")));
    let num = |k: &str| get(k)?.parse::<f64>().map_err(|_| bad(format!("bad {k}")));
    let int = |k: &str| get(k)?.parse::<usize>().map_err(|_| bad(format!("bad {k}")));
    let grid: Arc<HalfSpaceGrid> = HalfSpaceGrid::new(
        int("dim")?,
        int("nv")?,
        num("y_max")?,
        int("nt")?,
        num("box_len")?,
        int("ns")?,
        num("horizon")?,
    )?;
    let sigma = SigmaParam::new(num("sigma")?)?;
    let slope_s = get("slope")?;
    let slope: Vec<f64> = if slope_s.is_empty() {
        Vec::new()
    } else {
        slope_s.split(',').map(|v| v.parse::<f64>().map_err(|_| bad("bad slope"))).collect::<Result<_>>()?
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(bad(format!("expected {} values, found {} bytes", grid.len(), bytes.len())));
    }
    let vals = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((SampledField::from_values(&grid, vals, &slope)?, sigma))
}

pub fn load_snapshot(path: &Path) -> Result<(SampledField, SigmaParam)> {
    read_snapshot(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bitwise() {
        let g = HalfSpaceGrid::new(2, 8, 4.0, 4, 3.0, 4, 0.5).unwrap();
        let u = SampledField::from_fn_with_slope(&g, &[0.25], |s, y| (s + y.vertical()).sin() / 3.0);
        let s = SigmaParam::new(-0.25).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &u, s).unwrap();
        let (v, s2) = read_snapshot(&buf[..]).unwrap();
        assert_eq!(s2, s);
        assert_eq!(v.grid(), u.grid());
        assert_eq!(v.slope(), u.slope());
        assert!(v.values().iter().zip(u.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = HalfSpaceGrid::one_d(8, 2.0, 4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &SampledField::zeros(&g), SigmaParam::new(0.0).unwrap()).unwrap();
        buf.pop();
        assert!(read_snapshot(&buf[..]).is_err());
    }
}
