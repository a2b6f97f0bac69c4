//! Plain-text simplex and edge lists: one simplex per line, whitespace
//! separated 0-based vertex indices, `#` starts a comment line.

use std::path::Path;

use crate::error::{Error, Result};

pub fn parse_simplex_list(text: &str, origin: &Path) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let simplex = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|e| Error::parse(origin, lineno + 1, format!("bad vertex '{t}': {e}"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(simplex);
    }
    Ok(out)
}

pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Vec<(usize, usize)>> {
    let simplices = parse_simplex_list(text, origin)?;
    let lines = text.lines().enumerate().filter(|(_, l)| {
        let l = l.trim();
        !l.is_empty() && !l.starts_with('#')
    });
    simplices
        .into_iter()
        .zip(lines)
        .map(|(s, (i, _))| match s.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Error::parse(origin, i + 1, "expected exactly two vertices")),
        })
        .collect()
}

pub fn read_simplex_list(path: &Path) -> Result<Vec<Vec<usize>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_simplex_list(&text, path)
}

pub fn read_edge_list(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}
