//! DIMACS CNF reading and writing.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, CnfError, CnfFormula, Lit};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header, expected `p cnf <vars> <clauses>`")]
    Header { line: usize },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds declared count {num_vars}")]
    VarOutOfRange { line: usize, var: u32, num_vars: u32 },
    #[error("line {line}: clause contains both polarities of variable {var}")]
    Tautology { line: usize, var: u32 },
    #[error("line {line}: data after the declared {expected} clauses")]
    TrailingGarbage { line: usize, expected: usize },
    #[error("expected {expected} clauses, found {found}")]
    MissingClauses { expected: usize, found: usize },
    #[error("last clause is not terminated by 0")]
    Unterminated,
}

/// Parses DIMACS CNF text.
///
/// Comment lines (`c ...`) may appear before the header and between clauses.
/// Clauses may span lines; each is terminated by `0`. Exactly the declared
/// number of clauses must follow the header.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut open_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let Some((num_vars, expected)) = header else {
            header = Some(parse_header(line, line_no)?);
            continue;
        };
        for token in line.split_whitespace() {
            if clauses.len() == expected {
                return Err(ParseError::TrailingGarbage {
                    line: line_no,
                    expected,
                });
            }
            let value: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if value == 0 {
                let clause = Clause::new(current.drain(..)).map_err(|e| match e {
                    CnfError::Tautology(var) => ParseError::Tautology {
                        line: open_line.max(line_no),
                        var,
                    },
                    _ => unreachable!("clause construction only fails on tautologies"),
                })?;
                clauses.push(clause);
                continue;
            }
            let lit = Lit::from_dimacs(value).ok_or_else(|| ParseError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if lit.var() > num_vars {
                return Err(ParseError::VarOutOfRange {
                    line: line_no,
                    var: lit.var(),
                    num_vars,
                });
            }
            if current.is_empty() {
                open_line = line_no;
            }
            current.push(lit);
        }
    }

    let (num_vars, expected) = header.ok_or(ParseError::MissingHeader)?;
    if !current.is_empty() {
        return Err(ParseError::Unterminated);
    }
    if clauses.len() != expected {
        return Err(ParseError::MissingClauses {
            expected,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula::new(num_vars, clauses).expect("variables were range-checked"))
}

fn parse_header(line: &str, line_no: usize) -> Result<(u32, usize), ParseError> {
    let err = || ParseError::Header { line: line_no };
    let mut parts = line.split_whitespace();
    if parts.next() != Some("p") || parts.next() != Some("cnf") {
        return Err(err());
    }
    let num_vars = parts.next().and_then(|s| s.parse().ok()).ok_or_else(err)?;
    let num_clauses = parts.next().and_then(|s| s.parse().ok()).ok_or_else(err)?;
    if parts.next().is_some() {
        return Err(err());
    }
    Ok((num_vars, num_clauses))
}

/// Writes a formula as DIMACS CNF, one clause per line.
pub fn write_dimacs(formula: &CnfFormula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.len());
    for clause in formula.clauses() {
        for lit in clause.lits() {
            let _ = write!(out, "{} ", lit.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
