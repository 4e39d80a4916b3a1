// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Binary graph snapshot, little-endian:
//!
//! ```text
//! magic "ATNG" | version u32 | n u64 | m u64
//! n x (len u32, utf-8 id bytes)
//! (n + 1) x offset u64
//! m x target u32
//! m x weight u32
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

use super::{NodeRegistry, RetweetGraph};

const MAGIC: &[u8; 4] = b"ATNG";
const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(registry: &NodeRegistry, g: &RetweetGraph, mut w: W) -> Result<()> {
    let (offsets, targets, weights) = g.raw_parts();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u64::<LittleEndian>(registry.len() as u64)?;
    w.write_u64::<LittleEndian>(targets.len() as u64)?;
    for id in registry.ids() {
        w.write_u32::<LittleEndian>(id.len() as u32)?;
        w.write_all(id.as_bytes())?;
    }
    for &o in offsets {
        w.write_u64::<LittleEndian>(o as u64)?;
    }
    for &t in targets {
        w.write_u32::<LittleEndian>(t)?;
    }
    for &x in weights {
        w.write_u32::<LittleEndian>(x)?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(NodeRegistry, RetweetGraph)> {
    let bad = |m: &str| Error::Snapshot(m.to_string());
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = r.read_u64::<LittleEndian>()? as usize;
    let m = r.read_u64::<LittleEndian>()? as usize;
    let mut ids = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let len = r.read_u32::<LittleEndian>()? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        ids.push(String::from_utf8(buf).map_err(|_| bad("node id is not utf-8"))?);
    }
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(r.read_u64::<LittleEndian>()? as usize);
    }
    let mut targets = vec![0u32; m];
    r.read_u32_into::<LittleEndian>(&mut targets)?;
    let mut weights = vec![0u32; m];
    r.read_u32_into::<LittleEndian>(&mut weights)?;

    if offsets[0] != 0 || offsets[n] != m || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(bad("inconsistent offsets"));
    }
    for v in 0..n {
        let row = &targets[offsets[v]..offsets[v + 1]];
        if row.iter().any(|&t| t as usize >= n || t as usize == v) || row.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Snapshot(format!("invalid adjacency row {v}")));
        }
    }
    if weights.contains(&0) {
        return Err(bad("zero edge weight"));
    }
    let registry = NodeRegistry::from_ids(ids).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok((registry, RetweetGraph::from_raw_parts(offsets, targets, weights)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let reg = NodeRegistry::from_ids(vec!["a".into(), "bé".into(), "c".into()]).unwrap();
        let g = RetweetGraph::from_weighted_edges(3, vec![(0, 1, 3), (2, 0, 1), (0, 2, 7)]).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&reg, &g, &mut buf).unwrap();
        let (r2, g2) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(r2, reg);
        assert_eq!(g2, g);
    }

    #[test]
    fn rejects_corruption() {
        let reg = NodeRegistry::from_ids(vec!["a".into(), "b".into()]).unwrap();
        let g = RetweetGraph::from_weighted_edges(2, vec![(0, 1, 3)]).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&reg, &g, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_snapshot(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        let len = bad.len();
        bad[len - 8..len - 4].copy_from_slice(&0u32.to_le_bytes()); // target -> self
        assert!(read_snapshot(bad.as_slice()).is_err());
        assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
    }
}
