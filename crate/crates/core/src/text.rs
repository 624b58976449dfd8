//! Plain-text tree formats.
//!
//! Vertices are `0..n`. Blank lines and lines whose first non-space
//! character is `#` are ignored everywhere. Tokens are separated by
//! whitespace.
//!
//! Free tree:
//!
//! ```text
//! n
//! u v        (n - 1 edge lines)
//! ```
//!
//! Rooted tree:
//!
//! ```text
//! n root
//! p_0 p_1 ... p_{n-1}
//! ```
//!
//! where `p_v` is the parent of `v` and `p_root = root`. A stream is several
//! trees of one kind written back to back.

use std::fmt::Write as _;

use crate::error::{CensusError, Result};
use crate::tree::{FreeTree, RootedTree, Vertex};

/// Content lines with 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some((i + 1, trimmed));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_content().ok_or_else(|| CensusError::Parse {
            line: 0,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> CensusError {
    CensusError::Parse { line, msg: msg.into() }
}

fn numbers(line: usize, text: &str) -> Result<Vec<u64>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| parse_err(line, format!("expected a nonnegative integer, found {tok:?}")))
        })
        .collect()
}

fn vertex(line: usize, value: u64, n: usize) -> Result<Vertex> {
    if value >= n as u64 {
        return Err(parse_err(line, format!("vertex {value} out of range 0..{n}")));
    }
    Ok(value as Vertex)
}

fn order(line: usize, value: u64) -> Result<usize> {
    if value == 0 || value > u32::MAX as u64 {
        return Err(parse_err(line, format!("tree order must lie in 1..=2^32-1, got {value}")));
    }
    Ok(value as usize)
}

fn wrap(line: usize, e: CensusError) -> CensusError {
    match e {
        CensusError::InvalidTree(msg) => parse_err(line, msg),
        other => other,
    }
}

fn read_free(lines: &mut Lines<'_>) -> Result<Option<FreeTree>> {
    let Some((header_line, header)) = lines.next_content() else {
        return Ok(None);
    };
    let head = numbers(header_line, header)?;
    if head.len() != 1 {
        return Err(parse_err(header_line, "free tree header must be a single order n"));
    }
    let n = order(header_line, head[0])?;
    let mut edges = Vec::with_capacity(n - 1);
    let mut seen = std::collections::HashSet::with_capacity(n);
    for _ in 1..n {
        let (ln, text) = lines.expect("an edge line \"u v\"")?;
        let pair = numbers(ln, text)?;
        if pair.len() != 2 {
            return Err(parse_err(ln, "edge line must hold exactly two vertices"));
        }
        let (u, v) = (vertex(ln, pair[0], n)?, vertex(ln, pair[1], n)?);
        if u == v {
            return Err(parse_err(ln, format!("self-loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(parse_err(ln, format!("duplicate edge {u} {v}")));
        }
        edges.push((u, v));
    }
    FreeTree::new(n, edges).map(Some).map_err(|e| wrap(header_line, e))
}

fn read_rooted(lines: &mut Lines<'_>) -> Result<Option<RootedTree>> {
    let Some((header_line, header)) = lines.next_content() else {
        return Ok(None);
    };
    let head = numbers(header_line, header)?;
    if head.len() != 2 {
        return Err(parse_err(header_line, "rooted tree header must be \"n root\""));
    }
    let n = order(header_line, head[0])?;
    let root = vertex(header_line, head[1], n)?;
    let (ln, text) = lines.expect("a parent line")?;
    let parents = numbers(ln, text)?;
    if parents.len() != n {
        return Err(parse_err(ln, format!("expected {n} parent entries, found {}", parents.len())));
    }
    let parent = parents
        .into_iter()
        .map(|p| vertex(ln, p, n))
        .collect::<Result<Vec<_>>>()?;
    if parent[root as usize] != root {
        return Err(parse_err(ln, format!("the root entry must equal the root index {root}")));
    }
    RootedTree::new(parent, root).map(Some).map_err(|e| wrap(ln, e))
}

fn exactly_one<T>(mut lines: Lines<'_>, first: Option<T>) -> Result<T> {
    let tree = first.ok_or_else(|| parse_err(0, "no tree in input"))?;
    if let Some((ln, _)) = lines.next_content() {
        return Err(parse_err(ln, "trailing content after the tree"));
    }
    Ok(tree)
}

pub fn parse_free_tree(text: &str) -> Result<FreeTree> {
    let mut lines = Lines::new(text);
    let first = read_free(&mut lines)?;
    exactly_one(lines, first)
}

pub fn parse_rooted_tree(text: &str) -> Result<RootedTree> {
    let mut lines = Lines::new(text);
    let first = read_rooted(&mut lines)?;
    exactly_one(lines, first)
}

pub fn parse_free_stream(text: &str) -> Result<Vec<FreeTree>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some(t) = read_free(&mut lines)? {
        out.push(t);
    }
    Ok(out)
}

pub fn parse_rooted_stream(text: &str) -> Result<Vec<RootedTree>> {
    let mut lines = Lines::new(text);
    let mut out = Vec::new();
    while let Some(t) = read_rooted(&mut lines)? {
        out.push(t);
    }
    Ok(out)
}

pub fn format_free_tree(t: &FreeTree) -> String {
    let mut s = String::with_capacity(8 * t.n());
    writeln!(s, "{}", t.n()).unwrap();
    for &(u, v) in t.edges() {
        writeln!(s, "{u} {v}").unwrap();
    }
    s
}

pub fn format_rooted_tree(t: &RootedTree) -> String {
    let mut s = String::with_capacity(8 * t.n());
    writeln!(s, "{} {}", t.n(), t.root()).unwrap();
    let parents: Vec<String> = t.parent_array().iter().map(|p| p.to_string()).collect();
    writeln!(s, "{}", parents.join(" ")).unwrap();
    s
}
