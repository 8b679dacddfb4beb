//! Plain-text edge lists.
//!
//! ```text
//! square 3 9 18 periodic
//! 0 1
//! 0 2
//! ...
//! ```
//!
//! The header is `geometry L N M boundary`, followed by `M` lines of 0-indexed
//! `u v` pairs in canonical order. Site activity flags are not part of the
//! format; a parsed lattice has every site active.

use std::io::{BufRead, Write};

use super::{validate_size, Boundary, Geometry, Lattice};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(lattice: &Lattice, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {} {}",
        lattice.geometry(),
        lattice.size(),
        lattice.node_count(),
        lattice.edge_count(),
        lattice.boundary()
    )?;
    for &[a, b] in lattice.edges() {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

pub fn parse_edge_list<R: BufRead>(input: R) -> Result<Lattice> {
    let mut lines = input.lines().enumerate();
    let parse_err = |line: usize, message: String| Error::Parse {
        line: line + 1,
        message,
    };

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "empty input".into()))?;
    let header = header.map_err(|e| parse_err(0, e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(parse_err(
            0,
            format!("expected 5 header fields, found {}", fields.len()),
        ));
    }
    let geometry: Geometry = fields[0].parse()?;
    let size: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(0, "bad L".into()))?;
    let nodes: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(0, "bad N".into()))?;
    let edge_count: usize = fields[3]
        .parse()
        .map_err(|_| parse_err(0, "bad M".into()))?;
    let boundary: Boundary = fields[4].parse()?;
    validate_size(geometry, size, boundary)?;
    if nodes != size * size {
        return Err(parse_err(
            0,
            format!("N = {nodes} does not match L = {size}"),
        ));
    }

    let mut edges = Vec::with_capacity(edge_count);
    for (idx, line) in lines {
        let line = line.map_err(|e| parse_err(idx, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<u32>);
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => (a, b),
            _ => return Err(parse_err(idx, format!("malformed edge '{line}'"))),
        };
        if a as usize >= nodes || b as usize >= nodes {
            return Err(parse_err(
                idx,
                format!("node index out of range in '{line}'"),
            ));
        }
        if a >= b {
            return Err(parse_err(
                idx,
                format!("edge '{line}' is not in canonical form"),
            ));
        }
        if edges.last().is_some_and(|&last: &[u32; 2]| last >= [a, b]) {
            return Err(parse_err(
                idx,
                "edges out of canonical order or duplicated".into(),
            ));
        }
        edges.push([a, b]);
    }
    if edges.len() != edge_count {
        return Err(parse_err(
            0,
            format!("header says M = {edge_count}, found {}", edges.len()),
        ));
    }
    Ok(Lattice::from_parts(geometry, size, boundary, edges, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    const SQUARE_3: &str = "square 3 9 18 periodic
0 1
0 2
0 3
0 6
1 2
1 4
1 7
2 5
2 8
3 4
3 5
3 6
4 5
4 7
5 8
6 7
6 8
7 8
";

    #[test]
    fn golden_square_three() {
        let lat = build_lattice(Geometry::Square, 3, Boundary::Periodic).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&lat, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), SQUARE_3);
    }

    #[test]
    fn round_trip() {
        for g in Geometry::ALL {
            let lat = build_lattice(g, 6, Boundary::Open).unwrap();
            let mut buf = Vec::new();
            write_edge_list(&lat, &mut buf).unwrap();
            let back = parse_edge_list(buf.as_slice()).unwrap();
            assert_eq!(back, lat);
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_edge_list("".as_bytes()).is_err());
        assert!(parse_edge_list("square 3 9 1 periodic\n1 0\n".as_bytes()).is_err());
        assert!(parse_edge_list("square 3 9 1 periodic\n0 9\n".as_bytes()).is_err());
        assert!(parse_edge_list("square 3 9 2 periodic\n0 1\n".as_bytes()).is_err());
        assert!(parse_edge_list("square 3 8 0 periodic\n".as_bytes()).is_err());
        assert!(parse_edge_list("square 3 9 2 periodic\n0 2\n0 1\n".as_bytes()).is_err());
    }
}
