use crate::error::{ensure_len, Error, Result};
use crate::scalar::Scalar;

/// Features of the `M` compared items, the index of the winner, and an
/// optional environment vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord<T> {
    items: Vec<Vec<T>>,
    winner: usize,
    env: Option<Vec<T>>,
}

impl<T: Scalar> ComparisonRecord<T> {
    pub fn new(items: Vec<Vec<T>>, winner: usize, env: Option<Vec<T>>) -> Result<Self> {
        if items.len() < 2 {
            return Err(Error::Config(format!("a comparison needs at least 2 items, got {}", items.len())));
        }
        let dim = items[0].len();
        for item in &items {
            ensure_len(dim, item.len(), "item feature length")?;
        }
        if winner >= items.len() {
            return Err(Error::IndexOutOfRange {
                index: winner,
                len: items.len(),
            });
        }
        Ok(Self { items, winner, env })
    }

    /// Builds a record from a one-hot outcome vector.
    pub fn from_one_hot(items: Vec<Vec<T>>, y: &[T], env: Option<Vec<T>>) -> Result<Self> {
        ensure_len(items.len(), y.len(), "outcome length")?;
        let hot: Vec<usize> = (0..y.len()).filter(|&i| y[i] == T::one()).collect();
        if hot.len() != 1 || y.iter().any(|v| *v != T::zero() && *v != T::one()) {
            return Err(Error::BadTarget(y.iter().map(|v| v.to_string()).collect()));
        }
        Self::new(items, hot[0], env)
    }

    pub fn arity(&self) -> usize {
        self.items.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.items[0].len()
    }

    pub fn env_dim(&self) -> usize {
        self.env.as_ref().map_or(0, Vec::len)
    }

    pub fn items(&self) -> &[Vec<T>] {
        &self.items
    }

    pub fn winner(&self) -> usize {
        self.winner
    }

    pub fn env(&self) -> Option<&[T]> {
        self.env.as_deref()
    }

    /// The outcome as a one-hot vector.
    pub fn y(&self) -> Vec<T> {
        (0..self.arity())
            .map(|i| if i == self.winner { T::one() } else { T::zero() })
            .collect()
    }

    /// Reorders items so that new position `k` holds old item `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::bt::check_permutation(perm, self.arity())?;
        let items = perm.iter().map(|&p| self.items[p].clone()).collect();
        let winner = perm.iter().position(|&p| p == self.winner).expect("valid permutation");
        Ok(Self {
            items,
            winner,
            env: self.env.clone(),
        })
    }
}

/// Records sharing one arity, feature length and environment length. A
/// default dataset has no shape yet and adopts the shape of its first record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset<T> {
    arity: usize,
    feature_dim: usize,
    env_dim: usize,
    records: Vec<ComparisonRecord<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(arity: usize, feature_dim: usize, env_dim: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::Config(format!("arity must be at least 2, got {arity}")));
        }
        if feature_dim == 0 {
            return Err(Error::Config("feature dimension must be positive".into()));
        }
        Ok(Self {
            arity,
            feature_dim,
            env_dim,
            records: Vec::new(),
        })
    }

    /// Infers the shape from the first record; every record must agree.
    pub fn from_records(records: Vec<ComparisonRecord<T>>) -> Result<Self> {
        let first = records.first().ok_or(Error::Empty("dataset"))?;
        let mut ds = Self::new(first.arity(), first.feature_dim(), first.env_dim())?;
        ds.records.reserve(records.len());
        for r in records {
            ds.push(r)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, record: ComparisonRecord<T>) -> Result<()> {
        if self.arity == 0 {
            self.arity = record.arity();
            self.feature_dim = record.feature_dim();
            self.env_dim = record.env_dim();
        }
        ensure_len(self.arity, record.arity(), "record arity")?;
        ensure_len(self.feature_dim, record.feature_dim(), "record feature length")?;
        ensure_len(self.env_dim, record.env_dim(), "record environment length")?;
        self.records.push(record);
        Ok(())
    }

    /// Zero for a dataset that has no shape yet.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn records(&self) -> &[ComparisonRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Copy holding the records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_validation() {
        assert!(ComparisonRecord::new(vec![vec![1.0]], 0, None).is_err());
        assert!(ComparisonRecord::new(vec![vec![1.0], vec![1.0, 2.0]], 0, None).is_err());
        assert!(ComparisonRecord::new(vec![vec![1.0], vec![2.0]], 2, None).is_err());
        let r = ComparisonRecord::from_one_hot(vec![vec![1.0], vec![2.0], vec![3.0]], &[0.0, 0.0, 1.0], None).unwrap();
        assert_eq!(r.winner(), 2);
        assert_eq!(r.y(), vec![0.0, 0.0, 1.0]);
        assert!(ComparisonRecord::from_one_hot(vec![vec![1.0], vec![2.0]], &[1.0, 1.0], None).is_err());
        assert!(ComparisonRecord::from_one_hot(vec![vec![1.0], vec![2.0]], &[0.5, 0.5], None).is_err());
    }

    #[test]
    fn permutation_moves_the_winner() {
        let r = ComparisonRecord::new(vec![vec![0.0], vec![1.0], vec![2.0]], 1, None).unwrap();
        let p = r.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.items(), &[vec![2.0], vec![0.0], vec![1.0]]);
        assert_eq!(p.winner(), 2);
    }

    #[test]
    fn dataset_rejects_mixed_shapes() {
        let a = ComparisonRecord::new(vec![vec![1.0], vec![2.0]], 0, None).unwrap();
        let b = ComparisonRecord::new(vec![vec![1.0], vec![2.0], vec![3.0]], 0, None).unwrap();
        let c = ComparisonRecord::new(vec![vec![1.0], vec![2.0]], 0, Some(vec![0.5])).unwrap();
        assert!(Dataset::from_records(vec![a.clone(), b]).is_err());
        assert!(Dataset::from_records(vec![a.clone(), c]).is_err());
        assert!(Dataset::<f64>::from_records(vec![]).is_err());
        let ds = Dataset::from_records(vec![a.clone(), a.clone()]).unwrap();
        let mut unshaped = Dataset::default();
        unshaped.push(a).unwrap();
        assert_eq!(unshaped.arity(), 2);
        assert_eq!((ds.arity(), ds.feature_dim(), ds.env_dim(), ds.len()), (2, 1, 0, 2));
    }
}
