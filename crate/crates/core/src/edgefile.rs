//! Edge list file formats.
//!
//! Text: two header lines `# skg-edges v1` and `# k=<k> t=<t> n=<n> seed=<s>`
//! followed by one `u v` decimal pair per line, `u < v`, sorted.
//!
//! Binary: magic `SKG1`, five little-endian u64 fields
//! (k, t, n, seed, edge_count), then edge_count pairs of u64.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, SkgError};
use crate::sampler::{SampledGraph, SamplerId};

pub const TEXT_HEADER: &str = "# skg-edges v1";
pub const BINARY_MAGIC: &[u8; 4] = b"SKG1";

pub fn write_text(g: &SampledGraph, w: &mut impl Write) -> Result<()> {
    writeln!(w, "{TEXT_HEADER}")?;
    writeln!(w, "# k={} t={} n={} seed={}", g.k, g.t, g.n, g.seed)?;
    for &(u, v) in &g.edges {
        writeln!(w, "{u} {v}")?;
    }
    Ok(())
}

pub fn write_binary(g: &SampledGraph, w: &mut impl Write) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    for field in [g.k as u64, g.t as u64, g.n, g.seed, g.edges.len() as u64] {
        w.write_all(&field.to_le_bytes())?;
    }
    for &(u, v) in &g.edges {
        w.write_all(&u.to_le_bytes())?;
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Writes text or binary depending on the path extension (`.bin` or
/// `.skg` select binary).
pub fn write_path(g: &SampledGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let binary = matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("bin") | Some("skg")
    );
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    if binary {
        write_binary(g, &mut w)
    } else {
        write_text(g, &mut w)
    }
}

fn parse_edge_fields(g: &mut SampledGraph, line: &str) -> Result<()> {
    for part in line.trim_start_matches('#').split_whitespace() {
        let Some((key, value)) = part.split_once('=') else {
            continue;
        };
        let value: u64 = value
            .parse()
            .map_err(|_| SkgError::BadEdgeFile(format!("bad header field {part:?}")))?;
        match key {
            "k" => g.k = value as usize,
            "t" => g.t = value as u32,
            "n" => g.n = value,
            "seed" => g.seed = value,
            _ => {}
        }
    }
    Ok(())
}

fn read_text(first_line: &str, r: &mut impl BufRead) -> Result<SampledGraph> {
    if first_line.trim_end() != TEXT_HEADER {
        return Err(SkgError::BadEdgeFile(format!(
            "expected {TEXT_HEADER:?}, found {first_line:?}"
        )));
    }
    let mut g = SampledGraph {
        k: 0,
        t: 0,
        n: 0,
        edges: Vec::new(),
        seed: 0,
        sampler_id: SamplerId::Grasshop,
    };
    for line in r.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            parse_edge_fields(&mut g, trimmed)?;
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (Some(u), Some(v)) = (it.next(), it.next()) else {
            return Err(SkgError::BadEdgeFile(format!("bad edge line {trimmed:?}")));
        };
        let u: u64 = u
            .parse()
            .map_err(|_| SkgError::BadEdgeFile(format!("bad vertex id {u:?}")))?;
        let v: u64 = v
            .parse()
            .map_err(|_| SkgError::BadEdgeFile(format!("bad vertex id {v:?}")))?;
        g.edges.push((u, v));
    }
    validate(&g)?;
    Ok(g)
}

fn read_binary(r: &mut impl Read) -> Result<SampledGraph> {
    let mut buf8 = [0u8; 8];
    let mut fields = [0u64; 5];
    for f in fields.iter_mut() {
        r.read_exact(&mut buf8)?;
        *f = u64::from_le_bytes(buf8);
    }
    let [k, t, n, seed, edge_count] = fields;
    let mut edges = Vec::with_capacity(edge_count as usize);
    for _ in 0..edge_count {
        r.read_exact(&mut buf8)?;
        let u = u64::from_le_bytes(buf8);
        r.read_exact(&mut buf8)?;
        let v = u64::from_le_bytes(buf8);
        edges.push((u, v));
    }
    let g = SampledGraph {
        k: k as usize,
        t: t as u32,
        n,
        edges,
        seed,
        sampler_id: SamplerId::Grasshop,
    };
    validate(&g)?;
    Ok(g)
}

fn validate(g: &SampledGraph) -> Result<()> {
    for &(u, v) in &g.edges {
        if u >= v {
            return Err(SkgError::BadEdgeFile(format!("edge ({u},{v}) not u < v")));
        }
        if v >= g.n {
            return Err(SkgError::BadEdgeFile(format!(
                "vertex id {v} >= n = {}",
                g.n
            )));
        }
    }
    if g.edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SkgError::BadEdgeFile("edges not sorted/duplicate-free".into()));
    }
    Ok(())
}

/// Reads either format, sniffing the binary magic.
pub fn read_path(path: impl AsRef<Path>) -> Result<SampledGraph> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic == BINARY_MAGIC {
        return read_binary(&mut r);
    }
    let mut first = String::from_utf8(magic.to_vec())
        .map_err(|_| SkgError::BadEdgeFile("not an edge file".into()))?;
    let mut rest = String::new();
    // finish the first line
    let mut byte = [0u8; 1];
    loop {
        match r.read(&mut byte)? {
            0 => break,
            _ => {
                if byte[0] == b'\n' {
                    break;
                }
                rest.push(byte[0] as char);
            }
        }
    }
    first.push_str(&rest);
    read_text(&first, &mut r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmatrix::GeneratorMatrix;
    use crate::sampler::sample;

    fn sample_graph() -> SampledGraph {
        let p = GeneratorMatrix::new(vec![vec![0.9, 0.6], vec![0.6, 0.3]]).unwrap();
        sample(&p, 5, 12345, 1).unwrap()
    }

    #[test]
    fn text_roundtrip() {
        let g = sample_graph();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt");
        write_path(&g, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# skg-edges v1\n# k=2 t=5 n=32 seed=12345\n"));
        let back = read_path(&path).unwrap();
        assert_eq!(back.edges, g.edges);
        assert_eq!((back.k, back.t, back.n, back.seed), (g.k, g.t, g.n, g.seed));
    }

    #[test]
    fn binary_roundtrip() {
        let g = sample_graph();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.bin");
        write_path(&g, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"SKG1");
        assert_eq!(bytes.len(), 4 + 5 * 8 + g.edges.len() * 16);
        let back = read_path(&path).unwrap();
        assert_eq!(back.edges, g.edges);
        assert_eq!((back.k, back.t, back.n, back.seed), (g.k, g.t, g.n, g.seed));
    }

    #[test]
    fn rejects_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "# skg-edges v1\n# k=2 t=2 n=4 seed=0\n3 1\n").unwrap();
        assert!(read_path(&path).is_err());
        std::fs::write(&path, "not an edge file at all\n").unwrap();
        assert!(read_path(&path).is_err());
    }
}
