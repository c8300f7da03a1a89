//! MatchMatrix CSV (`n,<N>` header then N rows of N counts), game history CSV
//! (`i,j,winner` header, winner given as an item index), and score export
//! (`item_index,pi,elo`).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{pi_to_elo, BTScores, EloConfig, Game, MatchMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn read_match_matrix(path: impl AsRef<Path>) -> Result<MatchMatrix> {
    read_match_matrix_from(std::fs::File::open(path)?)
}

pub fn read_match_matrix_from(reader: impl Read) -> Result<MatchMatrix> {
    let mut lines = BufReader::new(reader)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };

    let (lineno, header) = lines.next().ok_or_else(|| parse_err(0, "missing header".into()))?;
    let header = header?;
    let n = match header.trim().split(',').map(str::trim).collect::<Vec<_>>().as_slice() {
        ["n", count] => count
            .parse::<usize>()
            .map_err(|e| parse_err(lineno, format!("bad item count {count:?}: {e}")))?,
        _ => return Err(parse_err(lineno, format!("expected header `n,<N>`, got {header:?}"))),
    };

    let mut rows = Vec::with_capacity(n);
    for (lineno, line) in lines {
        let line = line?;
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<u64>()
                    .map_err(|e| parse_err(lineno, format!("bad count {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(parse_err(lineno, format!("expected {n} fields, got {}", row.len())));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::InvalidMatrix(format!("expected {n} rows, got {}", rows.len())));
    }
    MatchMatrix::from_rows(&rows)
}

pub fn write_match_matrix(m: &MatchMatrix, mut out: impl Write) -> Result<()> {
    writeln!(out, "n,{}", m.n())?;
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(u64::to_string).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_scores<T: Scalar>(scores: &BTScores<T>, cfg: &EloConfig<T>, mut out: impl Write) -> Result<()> {
    writeln!(out, "item_index,pi,elo")?;
    for (i, &p) in scores.as_slice().iter().enumerate() {
        writeln!(out, "{i},{p},{}", pi_to_elo(p, cfg)?)?;
    }
    Ok(())
}

pub fn read_history(path: impl AsRef<Path>) -> Result<Vec<Game>> {
    read_history_from(std::fs::File::open(path)?)
}

/// Games in file order. An empty input is an empty history.
pub fn read_history_from(reader: impl Read) -> Result<Vec<Game>> {
    let mut games = Vec::new();
    let mut seen_header = false;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let (line, no) = (line?, idx + 1);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_header {
            if fields != ["i", "j", "winner"] {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected header `i,j,winner`, got {line:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let parsed = fields
            .iter()
            .map(|f| f.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { line: no, msg: format!("bad item index: {e}") })?;
        let [i, j, winner] = parsed[..] else {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected 3 fields, got {}", parsed.len()),
            });
        };
        if i == j || (winner != i && winner != j) {
            return Err(Error::Parse {
                line: no,
                msg: format!("winner {winner} must be one of two distinct items {i}, {j}"),
            });
        }
        games.push(Game { i, j, winner });
    }
    Ok(games)
}

pub fn write_history(games: &[Game], mut out: impl Write) -> Result<()> {
    writeln!(out, "i,j,winner")?;
    for g in games {
        writeln!(out, "{},{},{}", g.i, g.j, g.winner)?;
    }
    Ok(())
}

/// Win counts of a history; `n` must exceed every item index.
pub fn history_matrix(n: usize, games: &[Game]) -> Result<MatchMatrix> {
    MatchMatrix::from_results(n, games.iter().map(|g| (g.winner, if g.winner == g.i { g.j } else { g.i })))
}
