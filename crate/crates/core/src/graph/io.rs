use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use super::{BipartiteGraph, Labels};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 8] = b"LSFGRAPH";
pub const BINARY_VERSION: u32 = 1;

/// Reads `left<TAB>right` lines (any whitespace separates the two fields).
///
/// Blank lines and lines starting with `#` are skipped. Dense ids are given
/// in order of first appearance on each side and duplicate edges collapse.
pub fn load_edge_list(reader: impl BufRead) -> Result<BipartiteGraph> {
    let mut left_names: Vec<String> = Vec::new();
    let mut right_names: Vec<String> = Vec::new();
    let mut left_ids: HashMap<String, u32> = HashMap::new();
    let mut right_ids: HashMap<String, u32> = HashMap::new();
    let mut lists: Vec<Vec<u32>> = Vec::new();

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(l), Some(r), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse { line: lineno + 1, message: format!("expected two fields, got {:?}", trimmed) });
        };
        let u = *left_ids.entry(l.to_string()).or_insert_with(|| {
            left_names.push(l.to_string());
            (left_names.len() - 1) as u32
        });
        let v = *right_ids.entry(r.to_string()).or_insert_with(|| {
            right_names.push(r.to_string());
            lists.push(Vec::new());
            (right_names.len() - 1) as u32
        });
        lists[v as usize].push(u);
    }

    let m = left_names.len();
    BipartiteGraph::from_adjacency_labeled(
        m,
        lists,
        Labels::Named { names: left_names, index: left_ids },
        Labels::Named { names: right_names, index: right_ids },
    )
}

/// Writes one `left<TAB>right` line per edge, grouped by right node.
pub fn write_edge_list(g: &BipartiteGraph, mut w: impl Write) -> Result<()> {
    for v in 0..g.n() as u32 {
        let vname = g.right_labels().name(v);
        for &u in g.neighbors(v) {
            writeln!(w, "{}\t{}", g.left_labels().name(u), vname)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn put_u32(w: &mut impl Write, x: u32) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_u64(w: &mut impl Write, x: u64) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_labels(w: &mut impl Write, labels: &Labels) -> Result<()> {
    match labels {
        Labels::Synthetic { prefix, len } => {
            w.write_all(&[0])?;
            put_u32(w, prefix.len() as u32)?;
            w.write_all(prefix.as_bytes())?;
            put_u64(w, *len as u64)?;
        }
        Labels::Named { names, .. } => {
            w.write_all(&[1])?;
            put_u64(w, names.len() as u64)?;
            for n in names {
                put_u32(w, n.len() as u32)?;
                w.write_all(n.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Binary cache layout (little endian):
/// magic, version u32, M u64, N u64, |E| u64, offsets (N+1) × u64,
/// adjacency |E| × u32, left labels, right labels.
pub fn write_binary(g: &BipartiteGraph, mut w: impl Write) -> Result<()> {
    w.write_all(BINARY_MAGIC)?;
    put_u32(&mut w, BINARY_VERSION)?;
    put_u64(&mut w, g.m as u64)?;
    put_u64(&mut w, g.n() as u64)?;
    put_u64(&mut w, g.adj.len() as u64)?;
    for &o in &g.offsets {
        put_u64(&mut w, o as u64)?;
    }
    for &u in &g.adj {
        put_u32(&mut w, u)?;
    }
    put_labels(&mut w, &g.left)?;
    put_labels(&mut w, &g.right)?;
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes(&mut self, n: usize) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; n];
        self.inner.read_exact(&mut buf).map_err(|e| Error::Format(format!("truncated graph cache: {e}")))?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        String::from_utf8(self.bytes(len)?).map_err(|_| Error::Format("label is not UTF-8".into()))
    }

    fn labels(&mut self) -> Result<Labels> {
        match self.u8()? {
            0 => {
                let prefix = self.string()?;
                let len = self.u64()? as usize;
                Ok(Labels::Synthetic { prefix, len })
            }
            1 => {
                let n = self.u64()? as usize;
                let names = (0..n).map(|_| self.string()).collect::<Result<Vec<_>>>()?;
                Ok(Labels::named(names))
            }
            t => Err(Error::Format(format!("unknown label kind {t}"))),
        }
    }
}

pub fn read_binary(r: impl Read) -> Result<BipartiteGraph> {
    let mut r = Reader { inner: r };
    if r.bytes(8)? != BINARY_MAGIC {
        return Err(Error::Format("not a graph cache file".into()));
    }
    let version = r.u32()?;
    if version != BINARY_VERSION {
        return Err(Error::Format(format!("unsupported graph cache version {version}")));
    }
    let m = r.u64()? as usize;
    let n = r.u64()? as usize;
    let nnz = r.u64()? as usize;
    let offsets = (0..=n).map(|_| r.u64().map(|x| x as usize)).collect::<Result<Vec<_>>>()?;
    let adj = (0..nnz).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let left = r.labels()?;
    let right = r.labels()?;
    let g = BipartiteGraph { m, offsets, adj, left, right };
    g.check_invariants()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_small_edge_list() {
        let g = load_edge_list("a b\nc b\n".as_bytes()).unwrap();
        assert_eq!((g.m(), g.n()), (2, 1));
        let names: Vec<_> = g.neighbors(0).iter().map(|&u| g.left_labels().name(u).into_owned()).collect();
        assert_eq!(names, vec!["a", "c"]);
    }

    #[test]
    fn duplicate_edges_collapse_and_comments_skip() {
        let g = load_edge_list("# header\na\tb\na\tb\n\n".as_bytes()).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = load_edge_list("a b\na\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_edge_list("a b c\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_input_is_empty_graph() {
        let g = load_edge_list("".as_bytes()).unwrap();
        assert_eq!((g.m(), g.n(), g.edge_count()), (0, 0, 0));
    }

    #[test]
    fn binary_rejects_garbage() {
        assert!(matches!(read_binary(&b"NOTAGRAPH..."[..]), Err(Error::Format(_))));
        let mut buf = Vec::new();
        write_binary(&BipartiteGraph::empty(), &mut buf).unwrap();
        buf[8] = 99;
        assert!(matches!(read_binary(&buf[..]), Err(Error::Format(_))));
        buf[8] = 1;
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
    }

    fn edge_set(g: &BipartiteGraph) -> Vec<(String, String)> {
        let mut e: Vec<_> = (0..g.n() as u32)
            .flat_map(|v| {
                g.neighbors(v)
                    .iter()
                    .map(move |&u| (g.left_labels().name(u).into_owned(), g.right_labels().name(v).into_owned()))
            })
            .collect();
        e.sort();
        e
    }

    proptest! {
        #[test]
        fn edge_list_and_binary_round_trip(edges in prop::collection::vec((0u8..30, 0u8..20), 0..120)) {
            let text: String = edges.iter().map(|(l, r)| format!("L{l}\tR{r}\n")).collect();
            let g = load_edge_list(text.as_bytes()).unwrap();

            let mut tsv = Vec::new();
            write_edge_list(&g, &mut tsv).unwrap();
            let again = load_edge_list(&tsv[..]).unwrap();
            prop_assert_eq!(edge_set(&g), edge_set(&again));

            let mut bin = Vec::new();
            write_binary(&g, &mut bin).unwrap();
            let cached = read_binary(&bin[..]).unwrap();
            prop_assert_eq!(&cached, &g);
        }
    }
}
