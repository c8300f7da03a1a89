use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::derive_rng;
use crate::error::{Error, Result};
use crate::nbtr::{ComparisonRecord, Dataset};
use crate::scalar::Scalar;

/// Synthetic stand-in for handwritten digits: each item is a one-hot code of a
/// digit in the first ten features plus Gaussian noise on every feature, and
/// with probability `confusion_rate` the code shows a different digit than the
/// true one, chosen by `confusion`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitGenConfig {
    /// Items (and records) in the training split.
    pub n_records: usize,
    /// Items (and records) in the test split.
    pub n_test: usize,
    pub feature_dim: usize,
    pub noise_sigma: f64,
    pub confusion_rate: f64,
    pub confusion: Confusion,
    pub seed: u64,
    pub asymmetric: bool,
    pub left_factor: f64,
    pub left_offset: f64,
}

impl Default for DigitGenConfig {
    fn default() -> Self {
        Self {
            n_records: 60_000,
            n_test: 10_000,
            feature_dim: 16,
            noise_sigma: 0.1,
            confusion_rate: 0.03,
            confusion: Confusion::Adjacent,
            seed: 0,
            asymmetric: false,
            left_factor: 1.4,
            left_offset: 0.1,
        }
    }
}

impl DigitGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_records < 2 {
            return Err(Error::Config(format!("need at least 2 records, got {}", self.n_records)));
        }
        if self.n_test == 1 {
            return Err(Error::Config("a test split needs 0 or at least 2 records".into()));
        }
        if self.feature_dim < 10 {
            return Err(Error::Config(format!("feature_dim must be at least 10, got {}", self.feature_dim)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !(0.0..1.0).contains(&self.confusion_rate) {
            return Err(Error::Config(format!("confusion_rate must lie in [0, 1), got {}", self.confusion_rate)));
        }
        Ok(())
    }

    pub fn rule(&self) -> PairRule {
        if self.asymmetric {
            PairRule::Asymmetric {
                factor: self.left_factor,
                offset: self.left_offset,
            }
        } else {
            PairRule::Symmetric
        }
    }
}

/// Which wrong digit a confused item shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confusion {
    /// A neighbouring digit, either side with equal odds; 0 and 9 reflect to 1 and 8.
    Adjacent,
    /// Any of the other nine digits.
    Uniform,
}

impl Confusion {
    fn shown(self, digit: u8, rng: &mut impl Rng) -> u8 {
        match self {
            Confusion::Adjacent => match digit {
                0 => 1,
                9 => 8,
                d if rng.random_bool(0.5) => d - 1,
                d => d + 1,
            },
            Confusion::Uniform => (digit + rng.random_range(1..10)) % 10,
        }
    }
}

/// Decides who wins a left/right pair of digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairRule {
    /// Higher digit wins, ties by coin flip.
    Symmetric,
    /// Left wins iff `factor * left + offset > right`; exact ties by coin flip.
    Asymmetric { factor: f64, offset: f64 },
}

impl PairRule {
    /// `0` if the left item wins, `1` if the right one does.
    pub fn winner(&self, left: u8, right: u8, rng: &mut impl Rng) -> usize {
        let (l, r) = match *self {
            PairRule::Symmetric => (f64::from(left), f64::from(right)),
            PairRule::Asymmetric { factor, offset } => (factor * f64::from(left) + offset, f64::from(right)),
        };
        match l.partial_cmp(&r) {
            Some(std::cmp::Ordering::Greater) => 0,
            Some(std::cmp::Ordering::Less) => 1,
            _ => usize::from(rng.random_bool(0.5)),
        }
    }
}

/// Pairs item `i` with item `i + 1`, wrapping the last back to the first, so
/// every item appears in exactly two records. Returns the dataset and the
/// true `(left, right)` labels of each record.
pub fn pair_adjacent<T: Scalar>(
    items: &[Vec<T>],
    labels: &[u8],
    rule: PairRule,
    rng: &mut impl Rng,
) -> Result<(Dataset<T>, Vec<(u8, u8)>)> {
    if items.len() < 2 {
        return Err(Error::Config(format!("pairing needs at least 2 items, got {}", items.len())));
    }
    crate::error::ensure_len(items.len(), labels.len(), "labels per item")?;
    let n = items.len();
    let mut data = Dataset::new(2, items[0].len(), 0)?;
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let j = (i + 1) % n;
        let winner = rule.winner(labels[i], labels[j], rng);
        data.push(ComparisonRecord::new(vec![items[i].clone(), items[j].clone()], winner, None)?)?;
        pairs.push((labels[i], labels[j]));
    }
    Ok((data, pairs))
}

/// One half of a generated digit benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub data: Dataset<T>,
    /// True digits of each record's (left, right) items.
    pub pairs: Vec<(u8, u8)>,
    pub items: Vec<Vec<T>>,
    /// True digit of each item.
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DigitData<T> {
    pub train: Split<T>,
    pub test: Split<T>,
}

fn gen_items<T: Scalar>(cfg: &DigitGenConfig, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<T>>, Vec<u8>) {
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
    let mut items = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let digit: u8 = rng.random_range(0..10);
        let shown = if rng.random_bool(cfg.confusion_rate) {
            cfg.confusion.shown(digit, rng)
        } else {
            digit
        };
        let features = (0..cfg.feature_dim)
            .map(|k| {
                let base = if k == usize::from(shown) { 1.0 } else { 0.0 };
                T::of(base + noise.sample(rng))
            })
            .collect();
        items.push(features);
        labels.push(digit);
    }
    (items, labels)
}

/// Builds train and test digit-comparison datasets. Item generation and tie
/// breaking use separate streams, so the symmetric and asymmetric variants of
/// one seed share identical items.
pub fn gen_digit_records<T: Scalar>(cfg: &DigitGenConfig) -> Result<DigitData<T>> {
    cfg.validate()?;
    let rule = cfg.rule();
    let split = |n: usize, stream: u64| -> Result<Split<T>> {
        let (items, labels) = gen_items(cfg, n, &mut derive_rng(cfg.seed, stream));
        if n == 0 {
            return Ok(Split {
                data: Dataset::new(2, cfg.feature_dim, 0)?,
                pairs: Vec::new(),
                items,
                labels,
            });
        }
        let (data, pairs) = pair_adjacent(&items, &labels, rule, &mut derive_rng(cfg.seed, stream + 100))?;
        Ok(Split {
            data,
            pairs,
            items,
            labels,
        })
    };
    Ok(DigitData {
        train: split(cfg.n_records, 0)?,
        test: split(cfg.n_test, 1)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn small(asymmetric: bool) -> DigitGenConfig {
        DigitGenConfig {
            n_records: 500,
            n_test: 100,
            asymmetric,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn rule_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(PairRule::Symmetric.winner(3, 5, &mut rng), 1);
        assert_eq!(PairRule::Symmetric.winner(1, 2, &mut rng), 1);
        let asym = PairRule::Asymmetric { factor: 1.4, offset: 0.1 };
        assert_eq!(asym.winner(5, 7, &mut rng), 0);
        assert_eq!(asym.winner(9, 9, &mut rng), 0);
        assert_eq!(asym.winner(6, 9, &mut rng), 1);
    }

    #[test]
    fn ties_split_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 10_000;
        let left = (0..n).filter(|_| PairRule::Symmetric.winner(4, 4, &mut rng) == 0).count();
        let freq = left as f64 / n as f64;
        assert!((0.47..=0.53).contains(&freq), "{freq}");
    }

    #[test]
    fn clean_codes_compare_deterministically() {
        let cfg = DigitGenConfig {
            confusion_rate: 0.0,
            noise_sigma: 0.0,
            ..small(false)
        };
        let d = gen_digit_records::<f64>(&cfg).unwrap();
        for (r, &(l, rt)) in d.train.data.records().iter().zip(&d.train.pairs) {
            // noiseless one-hot codes reveal the digit
            let shown = |x: &Vec<f64>| x.iter().position(|v| *v == 1.0).unwrap() as u8;
            assert_eq!(shown(&r.items()[0]), l);
            assert_eq!(shown(&r.items()[1]), rt);
            if l != rt {
                assert_eq!(r.winner(), usize::from(rt > l));
            }
        }
    }

    #[test]
    fn adjacent_pairing_is_cyclic() {
        let items = vec![vec![0.0], vec![1.0], vec![2.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (data, pairs) = pair_adjacent(&items, &[1, 2, 0], PairRule::Symmetric, &mut rng).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(pairs, vec![(1, 2), (2, 0), (0, 1)]);
        let mut seen = [0; 3];
        for r in data.records() {
            for it in r.items() {
                seen[it[0] as usize] += 1;
            }
        }
        assert_eq!(seen, [2, 2, 2]);
        assert_eq!(data.records()[0].winner(), 1);
        assert!(pair_adjacent(&items[..1], &[0], PairRule::Symmetric, &mut rng).is_err());
    }

    #[test]
    fn generation_is_deterministic_and_shares_items() {
        let a = gen_digit_records::<f64>(&small(false)).unwrap();
        let b = gen_digit_records::<f64>(&small(false)).unwrap();
        assert_eq!(a, b);
        let asym = gen_digit_records::<f64>(&small(true)).unwrap();
        assert_eq!(a.train.items, asym.train.items);
        assert_eq!(a.test.labels, asym.test.labels);
        assert_eq!(a.train.data.len(), 500);
        assert_eq!(a.test.data.len(), 100);
    }

    #[test]
    fn confusion_rate_is_respected() {
        let cfg = DigitGenConfig {
            n_records: 20_000,
            n_test: 0,
            confusion_rate: 0.1,
            noise_sigma: 0.0,
            ..small(false)
        };
        let d = gen_digit_records::<f64>(&cfg).unwrap();
        let confused = d
            .train
            .items
            .iter()
            .zip(&d.train.labels)
            .filter(|(x, l)| x[usize::from(**l)] != 1.0)
            .count();
        let rate = confused as f64 / 20_000.0;
        assert!((0.09..0.11).contains(&rate), "{rate}");
    }

    #[test]
    fn confusion_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 0..10u8 {
            for _ in 0..50 {
                let a = Confusion::Adjacent.shown(d, &mut rng);
                assert!(a != d && a.abs_diff(d) == 1 && a <= 9);
                let u = Confusion::Uniform.shown(d, &mut rng);
                assert!(u != d && u <= 9);
            }
        }
        let ups = (0..10_000).filter(|_| Confusion::Adjacent.shown(5, &mut rng) == 6).count();
        assert!((4700..=5300).contains(&ups), "{ups}");
        let mut seen = [false; 10];
        (0..500).for_each(|_| seen[usize::from(Confusion::Uniform.shown(4, &mut rng))] = true);
        assert_eq!(seen.iter().filter(|s| **s).count(), 9);
    }

    #[test]
    fn invalid_configs() {
        assert!(gen_digit_records::<f64>(&DigitGenConfig { feature_dim: 9, ..small(false) }).is_err());
        assert!(gen_digit_records::<f64>(&DigitGenConfig { confusion_rate: 1.0, ..small(false) }).is_err());
        assert!(gen_digit_records::<f64>(&DigitGenConfig { n_records: 1, ..small(false) }).is_err());
        assert!(gen_digit_records::<f64>(&DigitGenConfig { noise_sigma: -1.0, ..small(false) }).is_err());
    }
}
