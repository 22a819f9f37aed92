//! The PACE 2017 `.td` text format.
//!
//! ```text
//! c optional comment
//! s td <#bags> <max-bag-size> <#vertices>
//! b <id> <v1> <v2> ...
//! <id1> <id2>
//! ```
//!
//! Bag 1 becomes the root of the imported decomposition.

use std::fmt::Write as _;

use thiserror::Error;

use super::td::TreeDecomposition;
use crate::cnf::Var;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TdFormatError {
    #[error("missing `s td` header")]
    MissingHeader,
    #[error("line {line}: malformed line `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: bag id {id} is out of range 1..={max}")]
    BagOutOfRange { line: usize, id: usize, max: usize },
    #[error("line {line}: duplicate bag id {id}")]
    DuplicateBag { line: usize, id: usize },
    #[error("line {line}: vertex {vertex} is out of range 1..={max}")]
    VertexOutOfRange { line: usize, vertex: u64, max: u32 },
    #[error("bag {id} is declared but never listed")]
    MissingBag { id: usize },
    #[error("header says maximum bag size {declared} but the largest bag has {actual}")]
    BagSizeMismatch { declared: usize, actual: usize },
    #[error("decomposition has no bags")]
    NoBags,
    #[error("edges do not form a tree: {0}")]
    NotATree(String),
}

pub fn read_td(text: &str) -> Result<TreeDecomposition, TdFormatError> {
    let mut header: Option<(usize, usize, u32)> = None;
    let mut bags: Vec<Option<Vec<Var>>> = Vec::new();
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let malformed = || TdFormatError::Malformed {
            line: line_no,
            text: line.to_string(),
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "s" => {
                if header.is_some() {
                    return Err(TdFormatError::DuplicateHeader { line: line_no });
                }
                if tokens.len() != 5 || tokens[1] != "td" {
                    return Err(malformed());
                }
                let num_bags: usize = tokens[2].parse().map_err(|_| malformed())?;
                let max_bag: usize = tokens[3].parse().map_err(|_| malformed())?;
                let num_vertices: u32 = tokens[4].parse().map_err(|_| malformed())?;
                header = Some((num_bags, max_bag, num_vertices));
                bags = vec![None; num_bags];
            }
            "b" => {
                let (num_bags, _, num_vertices) = header.ok_or(TdFormatError::MissingHeader)?;
                if tokens.len() < 2 {
                    return Err(malformed());
                }
                let id: usize = tokens[1].parse().map_err(|_| malformed())?;
                if id == 0 || id > num_bags {
                    return Err(TdFormatError::BagOutOfRange {
                        line: line_no,
                        id,
                        max: num_bags,
                    });
                }
                let mut bag = Vec::with_capacity(tokens.len() - 2);
                for tok in &tokens[2..] {
                    let v: u64 = tok.parse().map_err(|_| malformed())?;
                    if v == 0 || v > u64::from(num_vertices) {
                        return Err(TdFormatError::VertexOutOfRange {
                            line: line_no,
                            vertex: v,
                            max: num_vertices,
                        });
                    }
                    bag.push(Var::new(v as u32));
                }
                if bags[id - 1].replace(bag).is_some() {
                    return Err(TdFormatError::DuplicateBag { line: line_no, id });
                }
            }
            _ => {
                let (num_bags, _, _) = header.ok_or(TdFormatError::MissingHeader)?;
                if tokens.len() != 2 {
                    return Err(malformed());
                }
                let a: usize = tokens[0].parse().map_err(|_| malformed())?;
                let b: usize = tokens[1].parse().map_err(|_| malformed())?;
                for id in [a, b] {
                    if id == 0 || id > num_bags {
                        return Err(TdFormatError::BagOutOfRange {
                            line: line_no,
                            id,
                            max: num_bags,
                        });
                    }
                }
                edges.push((a - 1, b - 1));
            }
        }
    }

    let (num_bags, max_bag, num_vertices) = header.ok_or(TdFormatError::MissingHeader)?;
    if num_bags == 0 {
        return Err(TdFormatError::NoBags);
    }
    let bags: Vec<Vec<Var>> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or(TdFormatError::MissingBag { id: i + 1 }))
        .collect::<Result<_, _>>()?;
    let td = TreeDecomposition::new(bags, edges, num_vertices);
    if td.max_bag_size() != max_bag {
        return Err(TdFormatError::BagSizeMismatch {
            declared: max_bag,
            actual: td.max_bag_size(),
        });
    }
    td.rooted_children()
        .map_err(|e| TdFormatError::NotATree(e.to_string()))?;
    Ok(td)
}

pub fn write_td(td: &TreeDecomposition) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "s td {} {} {}",
        td.len(),
        td.max_bag_size(),
        td.num_vertices()
    )
    .unwrap();
    for (i, bag) in td.bags().iter().enumerate() {
        write!(out, "b {}", i + 1).unwrap();
        for v in bag {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    for &(a, b) in td.edges() {
        writeln!(out, "{} {}", a + 1, b + 1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_BAGS: &str = "s td 3 3 4\nb 1 1\nb 2 1 2 3\nb 3 1 4\n1 2\n1 3\n";

    #[test]
    fn reads_three_bags() {
        let td = read_td(THREE_BAGS).unwrap();
        assert_eq!(td.len(), 3);
        assert_eq!(td.bags()[1], vec![Var::new(1), Var::new(2), Var::new(3)]);
        assert_eq!(
            td.rooted_children().unwrap(),
            vec![vec![1, 2], vec![], vec![]]
        );
    }

    #[test]
    fn round_trip() {
        assert_eq!(write_td(&read_td(THREE_BAGS).unwrap()), THREE_BAGS);
        let with_comment = "c hello\ns td 1 0 0\nb 1\n";
        assert_eq!(
            write_td(&read_td(with_comment).unwrap()),
            "s td 1 0 0\nb 1\n"
        );
    }

    #[test]
    fn format_errors() {
        assert_eq!(read_td("b 1 1\n"), Err(TdFormatError::MissingHeader));
        assert!(matches!(
            read_td("s td 2 1 1\nb 1 1\nb 1 1\n1 2\n"),
            Err(TdFormatError::DuplicateBag { id: 1, .. })
        ));
        assert!(matches!(
            read_td("s td 1 1 1\nb 2 1\n"),
            Err(TdFormatError::BagOutOfRange { id: 2, .. })
        ));
        assert!(matches!(
            read_td("s td 2 1 1\nb 1 1\nb 2 1\n"),
            Err(TdFormatError::NotATree(_))
        ));
        assert!(matches!(
            read_td("s td 2 1 2\nb 1 1\nb 2 2\n1 3\n"),
            Err(TdFormatError::BagOutOfRange { id: 3, .. })
        ));
        assert!(matches!(
            read_td("s td 3 3 4\nb 1 1\nb 2 1 2 3\n1 2\n"),
            Err(TdFormatError::MissingBag { id: 3 })
        ));
        assert!(matches!(
            read_td("s td 1 2 1\nb 1 1\n"),
            Err(TdFormatError::BagSizeMismatch {
                declared: 2,
                actual: 1
            })
        ));
        assert!(matches!(
            read_td("s td 1 1 1\nb 1 5\n"),
            Err(TdFormatError::VertexOutOfRange { vertex: 5, .. })
        ));
        assert_eq!(read_td("s td 0 0 0\n"), Err(TdFormatError::NoBags));
    }
}
