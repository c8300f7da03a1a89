use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::nbtr::{ComparisonRecord, Dataset};
use crate::scalar::Scalar;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_field<V: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<V> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} {:?}", field.trim())))
}

fn parse_header(text: &str) -> Result<(usize, usize, usize)> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    let keys = ["arity", "feature_dim", "env_dim"];
    if fields.len() != 6 || (0..3).any(|k| fields[2 * k] != keys[k]) {
        return Err(parse_err(1, "expected header `arity,<M>,feature_dim,<D>,env_dim,<E>`"));
    }
    let value = |k: usize| parse_field::<usize>(fields[2 * k + 1], 1, keys[k]);
    Ok((value(0)?, value(1)?, value(2)?))
}

/// Reads a dataset CSV. An empty input yields an empty, unshaped dataset.
pub fn read_dataset_from<T: Scalar>(reader: impl Read) -> Result<Dataset<T>> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Ok(Dataset::default()),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
        }
    };
    let (arity, dim, env_dim) = parse_header(&header)?;
    let mut ds = Dataset::new(arity, dim, env_dim).map_err(|e| parse_err(1, e.to_string()))?;
    let expected = arity * dim + env_dim + 1;
    for (idx, line) in lines {
        let (line, no) = (line?, idx + 1);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected {
            return Err(parse_err(no, format!("expected {expected} fields, found {}", fields.len())));
        }
        let values = fields[..expected - 1]
            .iter()
            .map(|f| parse_field::<T>(f, no, "number"))
            .collect::<Result<Vec<T>>>()?;
        let winner: usize = parse_field(fields[expected - 1], no, "winner index")?;
        if winner >= arity {
            return Err(parse_err(no, format!("winner index {winner} not below arity {arity}")));
        }
        let items = values[..arity * dim].chunks(dim).map(<[T]>::to_vec).collect();
        let env = (env_dim > 0).then(|| values[arity * dim..].to_vec());
        let record = ComparisonRecord::new(items, winner, env).map_err(|e| parse_err(no, e.to_string()))?;
        ds.push(record)?;
    }
    Ok(ds)
}

pub fn read_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    read_dataset_from(File::open(path)?)
}

/// Writes every value in its shortest round-tripping decimal form.
pub fn write_dataset<T: Scalar>(ds: &Dataset<T>, mut out: impl Write) -> Result<()> {
    if ds.arity() == 0 {
        return Ok(());
    }
    writeln!(out, "arity,{},feature_dim,{},env_dim,{}", ds.arity(), ds.feature_dim(), ds.env_dim())?;
    let mut row = String::new();
    for r in ds.records() {
        row.clear();
        for v in r.items().iter().flatten().chain(r.env().unwrap_or(&[])) {
            row.push_str(&v.to_string());
            row.push(',');
        }
        row.push_str(&r.winner().to_string());
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// One item per row. A first row that is not numeric is taken as a header.
pub fn read_features_from<T: Scalar>(reader: impl Read) -> Result<Vec<Vec<T>>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let (line, no) = (line?, idx + 1);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if rows.is_empty() && no == 1 && fields[0].trim().parse::<f64>().is_err() {
            continue;
        }
        let row = fields
            .iter()
            .map(|f| parse_field::<T>(f, no, "number"))
            .collect::<Result<Vec<T>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(no, format!("expected {} fields, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_features<T: Scalar>(rows: &[Vec<T>], mut out: impl Write) -> Result<()> {
    for row in rows {
        let text: Vec<String> = row.iter().map(T::to_string).collect();
        writeln!(out, "{}", text.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n: usize, env_dim: usize, seed: u64) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ds = Dataset::new(3, 4, env_dim).unwrap();
        for _ in 0..n {
            let items = (0..3).map(|_| (0..4).map(|_| rng.random::<f64>() * 200.0 - 100.0).collect()).collect();
            let env = (env_dim > 0).then(|| (0..env_dim).map(|_| rng.random::<f64>()).collect());
            ds.push(ComparisonRecord::new(items, rng.random_range(0..3), env).unwrap()).unwrap();
        }
        ds
    }

    fn round_trip<T: Scalar>(ds: &Dataset<T>) -> Dataset<T> {
        let mut buf = Vec::new();
        write_dataset(ds, &mut buf).unwrap();
        read_dataset_from(buf.as_slice()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        for env_dim in [0, 2] {
            let ds = random_dataset(100, env_dim, env_dim as u64);
            assert_eq!(round_trip(&ds), ds);
        }
        let ds32 = Dataset::from_records(vec![ComparisonRecord::new(vec![vec![0.1f32], vec![1e-7]], 1, None).unwrap()]).unwrap();
        assert_eq!(round_trip(&ds32), ds32);
    }

    #[test]
    fn empty_input_is_an_empty_dataset() {
        let ds = read_dataset_from::<f64>(&b""[..]).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.arity(), 0);
        let ds = read_dataset_from::<f64>(&b"arity,2,feature_dim,1,env_dim,0\n"[..]).unwrap();
        assert_eq!((ds.len(), ds.arity()), (0, 2));
        let mut buf = Vec::new();
        write_dataset(&Dataset::<f64>::default(), &mut buf).unwrap();
        assert!(buf.is_empty());
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let text = "arity,2,feature_dim,1,env_dim,0\n0.5,0.25,1\n0.5,1\n";
        match read_dataset_from::<f64>(text.as_bytes()) {
            Err(Error::Parse { line: 3, msg }) => assert!(msg.contains("expected 3 fields"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_winner = "arity,2,feature_dim,1,env_dim,0\n0.5,0.25,2\n";
        assert!(matches!(read_dataset_from::<f64>(bad_winner.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let bad_num = "arity,2,feature_dim,1,env_dim,0\n0.5,x,0\n";
        assert!(matches!(read_dataset_from::<f64>(bad_num.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let bad_header = "arity,2,dim,1,env_dim,0\n";
        assert!(matches!(read_dataset_from::<f64>(bad_header.as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn feature_rows() {
        let rows = vec![vec![1.5, -2.0], vec![0.1, 3.0]];
        let mut buf = Vec::new();
        write_features(&rows, &mut buf).unwrap();
        assert_eq!(read_features_from::<f64>(buf.as_slice()).unwrap(), rows);
        let with_header = "f0,f1\n1.5,-2\n0.1,3\n";
        assert_eq!(read_features_from::<f64>(with_header.as_bytes()).unwrap(), rows);
        assert!(matches!(read_features_from::<f64>(&b"1,2\n3\n"[..]), Err(Error::Parse { line: 2, .. })));
    }
}
