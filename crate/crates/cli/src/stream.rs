//! Text stream format: one header line, then one update per line.
//!
//! ```text
//! # comment
//! n 16          (or: n 16 w 255)
//! + 0 1         (insert edge)
//! + 2 3 17      (insert with weight, weighted streams only)
//! - 0 1         (delete; must match the inserted weight)
//! ```
//!
//! The reader is forward-only: it consumes a `BufRead` line by line and
//! never seeks, so every command makes exactly one pass over the input.

use std::fs::File;
use std::io::{self, BufRead, BufReader};

use anyhow::{bail, Context, Result};

/// Parsed header line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub n: u32,
    /// Declared maximum weight; `None` marks an unweighted stream.
    pub max_weight: Option<u64>,
}

/// One signed edge update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub line: usize,
    pub sign: i8,
    pub u: u32,
    pub v: u32,
    pub weight: u64,
}

/// Opens a stream path, with `-` meaning standard input.
pub fn open(path: &str) -> Result<Box<dyn BufRead>> {
    if path == "-" {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        let file = File::open(path).with_context(|| format!("cannot open {path}"))?;
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Forward-only reader over a stream file.
pub struct StreamReader<R: BufRead> {
    lines: io::Lines<R>,
    line_no: usize,
    header: Header,
}

impl<R: BufRead> StreamReader<R> {
    /// Reads lines up to and including the header.
    pub fn new(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut line_no = 0usize;
        let header = loop {
            let Some(line) = lines.next() else {
                bail!("stream ended before a header line");
            };
            line_no += 1;
            let line = line.with_context(|| format!("line {line_no}: read error"))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            break parse_header(trimmed).with_context(|| format!("line {line_no}"))?;
        };
        Ok(StreamReader {
            lines,
            line_no,
            header,
        })
    }

    pub fn header(&self) -> Header {
        self.header
    }
}

fn parse_header(line: &str) -> Result<Header> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    match tokens.as_slice() {
        ["n", n] => Ok(Header {
            n: parse_n(n)?,
            max_weight: None,
        }),
        ["n", n, "w", w] => {
            let max_weight: u64 = w.parse().with_context(|| format!("bad max weight {w:?}"))?;
            if max_weight == 0 || max_weight >= 1 << 63 {
                bail!("max weight {max_weight} outside 1..2^63");
            }
            Ok(Header {
                n: parse_n(n)?,
                max_weight: Some(max_weight),
            })
        }
        _ => bail!("expected header `n <N>` or `n <N> w <W>`, got {line:?}"),
    }
}

fn parse_n(token: &str) -> Result<u32> {
    let n: u32 = token.parse().with_context(|| format!("bad vertex count {token:?}"))?;
    if n == 0 {
        bail!("vertex count must be positive");
    }
    Ok(n)
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<Update>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => {
                    self.line_no += 1;
                    return Some(Err(e).with_context(|| format!("line {}: read error", self.line_no)));
                }
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Some(
                self.parse_update(trimmed)
                    .with_context(|| format!("line {}", self.line_no)),
            );
        }
    }
}

impl<R: BufRead> StreamReader<R> {
    fn parse_update(&self, line: &str) -> Result<Update> {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (sign, rest) = match tokens.split_first() {
            Some((&"+", rest)) => (1i8, rest),
            Some((&"-", rest)) => (-1i8, rest),
            _ => bail!("expected `+ u v [w]` or `- u v [w]`, got {line:?}"),
        };
        let (u, v, weight) = match rest {
            [u, v] => (u, v, 1u64),
            [u, v, w] => {
                let weight: u64 = w.parse().with_context(|| format!("bad weight {w:?}"))?;
                if self.header.max_weight.is_none() && weight != 1 {
                    bail!("weighted update in a stream whose header declares no `w`");
                }
                (u, v, weight)
            }
            _ => bail!("expected `+ u v [w]` or `- u v [w]`, got {line:?}"),
        };
        let u: u32 = u.parse().with_context(|| format!("bad vertex {u:?}"))?;
        let v: u32 = v.parse().with_context(|| format!("bad vertex {v:?}"))?;
        Ok(Update {
            line: self.line_no,
            sign,
            u,
            v,
            weight,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read_all(text: &str) -> Result<(Header, Vec<Update>)> {
        let reader = StreamReader::new(text.as_bytes())?;
        let header = reader.header();
        let updates: Result<Vec<Update>> = reader.collect();
        Ok((header, updates?))
    }

    #[test]
    fn parses_unweighted_stream() {
        let (header, updates) = read_all("# demo\nn 4\n+ 0 1\n\n- 0 1\n").unwrap();
        assert_eq!(header, Header { n: 4, max_weight: None });
        assert_eq!(updates.len(), 2);
        assert_eq!((updates[0].sign, updates[0].u, updates[0].v, updates[0].weight), (1, 0, 1, 1));
        assert_eq!(updates[1].sign, -1);
        assert_eq!(updates[1].line, 5);
    }

    #[test]
    fn parses_weighted_stream() {
        let (header, updates) = read_all("n 8 w 100\n+ 1 2 55\n").unwrap();
        assert_eq!(header.max_weight, Some(100));
        assert_eq!(updates[0].weight, 55);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(read_all("").is_err());
        assert!(read_all("n 0\n").is_err());
        assert!(read_all("n 4\n* 0 1\n").is_err());
        assert!(read_all("n 4\n+ 0\n").is_err());
        assert!(read_all("n 4\n+ 0 one\n").is_err());
        assert!(read_all("n 4\n+ 0 1 5\n").is_err(), "weight without header w");
        assert!(read_all("n 4 w 0\n").is_err());
    }

    #[test]
    fn weight_one_allowed_without_header_w() {
        let (_, updates) = read_all("n 4\n+ 0 1 1\n").unwrap();
        assert_eq!(updates[0].weight, 1);
    }
}
