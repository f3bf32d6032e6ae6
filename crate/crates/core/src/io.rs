//! Plain-text graph and partition files.
//!
//! Graph: a header line `n <num_vertices>` followed by one `u v` edge per
//! line. Partition: one `vertex sign` pair per line with sign `1` or `-1`
//! (`+1` is accepted on input). Blank lines and `#` comments are ignored.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition, Side};

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let l = l.split('#').next().unwrap_or("").trim().to_string();
            (!l.is_empty()).then_some(Ok((i + 1, l)))
        }
    })
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn two_fields(line: usize, text: &str) -> Result<(String, String)> {
    let mut it = text.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a.to_string(), b.to_string())),
        _ => Err(parse_err(line, format!("expected two fields, got '{text}'"))),
    }
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| parse_err(line, format!("not a vertex index: '{s}'")))
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut lines = content_lines(reader);
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing header 'n <num_vertices>'"))??;
    let (key, value) = two_fields(line, &header)?;
    if key != "n" {
        return Err(parse_err(line, "header must be 'n <num_vertices>'"));
    }
    let n = parse_usize(line, &value)?;
    let mut edges = Vec::new();
    for entry in lines {
        let (line, text) = entry?;
        let (u, v) = two_fields(line, &text)?;
        edges.push((parse_usize(line, &u)?, parse_usize(line, &v)?));
    }
    Graph::from_edges(n, &edges)
}

pub fn write_graph<W: Write>(graph: &Graph, mut writer: W) -> Result<()> {
    writeln!(writer, "n {}", graph.num_vertices())?;
    for &(u, v) in graph.edges() {
        writeln!(writer, "{} {}", graph.vertex_id(u), graph.vertex_id(v))?;
    }
    Ok(())
}

pub fn read_partition<R: BufRead>(reader: R) -> Result<Partition> {
    let mut pairs = Vec::new();
    for entry in content_lines(reader) {
        let (line, text) = entry?;
        let (v, s) = two_fields(line, &text)?;
        let side = match s.as_str() {
            "1" | "+1" => Side::Plus,
            "-1" => Side::Minus,
            _ => return Err(parse_err(line, format!("sign must be 1 or -1, got '{s}'"))),
        };
        pairs.push((parse_usize(line, &v)?, side));
    }
    Partition::from_pairs(pairs)
}

pub fn write_partition<W: Write>(partition: &Partition, mut writer: W) -> Result<()> {
    for (id, side) in partition.iter() {
        writeln!(writer, "{} {}", id, side.as_i8())?;
    }
    Ok(())
}
