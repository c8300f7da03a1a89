use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::derive_rng;
use crate::bt::Game;
use crate::error::{ensure_len, Error, Result};
use crate::nbtr::{ComparisonRecord, Dataset};
use crate::scalar::Scalar;

/// Affine map from item features to the true (natural-log) rating.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMap {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl RatingMap {
    /// Alternating-sign weights scaled so that standard-normal features give
    /// ratings with standard deviation `spread`.
    pub fn alternating(feature_dim: usize, spread: f64) -> Self {
        let w = spread / (feature_dim as f64).sqrt();
        Self {
            weights: (0..feature_dim).map(|k| if k % 2 == 0 { w } else { -w }).collect(),
            bias: 0.0,
        }
    }

    pub fn rate(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub n_items: usize,
    pub feature_dim: usize,
    pub n_matches: usize,
    pub rating_map: RatingMap,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl PlantedConfig {
    pub fn new(n_items: usize, feature_dim: usize, n_matches: usize, seed: u64) -> Self {
        Self {
            n_items,
            feature_dim,
            n_matches,
            rating_map: RatingMap::alternating(feature_dim, 1.0),
            holdout_fraction: 0.25,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_items < 4 {
            return Err(Error::Config(format!("need at least 4 items, got {}", self.n_items)));
        }
        if self.feature_dim == 0 {
            return Err(Error::Config("feature_dim must be positive".into()));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::Config(format!(
                "holdout_fraction must lie in (0, 1), got {}",
                self.holdout_fraction
            )));
        }
        ensure_len(self.feature_dim, self.rating_map.weights.len(), "rating map weights")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedData<T> {
    pub features: Vec<Vec<T>>,
    pub true_ratings: Vec<f64>,
    /// Items that appear in no training record, ascending.
    pub holdout: Vec<usize>,
    /// Every sampled match, in order.
    pub matches: Vec<Game>,
    /// Matches between non-holdout items.
    pub train: Dataset<T>,
    /// Matches involving at least one holdout item.
    pub test: Dataset<T>,
}

/// Items with standard-normal features and ratings given by the rating map;
/// matches between uniformly random distinct pairs, won with probability
/// `exp(r_i) / (exp(r_i) + exp(r_j))`.
pub fn gen_planted_dataset<T: Scalar>(cfg: &PlantedConfig) -> Result<PlantedData<T>> {
    cfg.validate()?;
    let mut rng = derive_rng(cfg.seed, 0);
    let raw: Vec<Vec<f64>> = (0..cfg.n_items)
        .map(|_| (0..cfg.feature_dim).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let true_ratings: Vec<f64> = raw.iter().map(|x| cfg.rating_map.rate(x)).collect();
    let features: Vec<Vec<T>> = raw.iter().map(|x| x.iter().map(|v| T::of(*v)).collect()).collect();

    let mut order: Vec<usize> = (0..cfg.n_items).collect();
    order.shuffle(&mut derive_rng(cfg.seed, 1));
    let n_hold = ((cfg.holdout_fraction * cfg.n_items as f64).round() as usize).clamp(1, cfg.n_items - 2);
    let mut holdout = order[..n_hold].to_vec();
    holdout.sort_unstable();
    let mut is_held = vec![false; cfg.n_items];
    holdout.iter().for_each(|&i| is_held[i] = true);

    let mut rng = derive_rng(cfg.seed, 2);
    let mut matches = Vec::with_capacity(cfg.n_matches);
    let mut train = Dataset::new(2, cfg.feature_dim, 0)?;
    let mut test = Dataset::new(2, cfg.feature_dim, 0)?;
    for _ in 0..cfg.n_matches {
        let i = rng.random_range(0..cfg.n_items);
        let j = (i + rng.random_range(1..cfg.n_items)) % cfg.n_items;
        let i_wins = first_wins(true_ratings[i], true_ratings[j], &mut rng);
        matches.push(Game {
            i,
            j,
            winner: if i_wins { i } else { j },
        });
        let record = ComparisonRecord::new(
            vec![features[i].clone(), features[j].clone()],
            usize::from(!i_wins),
            None,
        )?;
        if is_held[i] || is_held[j] {
            test.push(record)?;
        } else {
            train.push(record)?;
        }
    }
    Ok(PlantedData {
        features,
        true_ratings,
        holdout,
        matches,
        train,
        test,
    })
}

/// Samples a two-player game between ratings `r_i` and `r_j` on the natural-log scale.
pub(crate) fn first_wins(r_i: f64, r_j: f64, rng: &mut impl Rng) -> bool {
    rng.random_bool(1.0 / (1.0 + (r_j - r_i).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_item_rate(ratings: [f64; 2], samples: usize, seed: u64) -> f64 {
        let mut rng = derive_rng(seed, 9);
        let second = (0..samples).filter(|_| !first_wins(ratings[0], ratings[1], &mut rng)).count();
        second as f64 / samples as f64
    }

    #[test]
    fn equal_ratings_are_a_fair_coin() {
        let f = two_item_rate([0.7, 0.7], 10_000, 1);
        assert!((0.47..=0.53).contains(&f), "{f}");
    }

    #[test]
    fn ratio_three_wins_three_quarters() {
        let f = two_item_rate([0.0, 3f64.ln()], 10_000, 2);
        assert!((f - 0.75).abs() <= 0.02, "{f}");
    }

    #[test]
    fn holdout_items_never_train() {
        let cfg = PlantedConfig::new(40, 5, 3000, 7);
        let d = gen_planted_dataset::<f64>(&cfg).unwrap();
        assert_eq!(d.holdout.len(), 10);
        let held: Vec<&Vec<f64>> = d.holdout.iter().map(|&i| &d.features[i]).collect();
        for r in d.train.records() {
            for it in r.items() {
                assert!(!held.contains(&it));
            }
        }
        assert_eq!(d.train.len() + d.test.len(), 3000);
        assert_eq!(d.matches.len(), 3000);
        for (g, r) in d.matches.iter().zip(d.true_ratings.iter()) {
            assert!(g.i != g.j && (g.winner == g.i || g.winner == g.j));
            assert!(r.is_finite());
        }
    }

    #[test]
    fn dataset_matches_history() {
        let cfg = PlantedConfig::new(8, 3, 200, 3);
        let d = gen_planted_dataset::<f64>(&cfg).unwrap();
        let (mut tr, mut te) = (d.train.records().iter(), d.test.records().iter());
        for g in &d.matches {
            let held = d.holdout.contains(&g.i) || d.holdout.contains(&g.j);
            let r = if held { te.next() } else { tr.next() }.unwrap();
            assert_eq!(r.items()[0], d.features[g.i]);
            assert_eq!(r.items()[1], d.features[g.j]);
            assert_eq!(r.winner(), usize::from(g.winner == g.j));
        }
    }

    #[test]
    fn empirical_win_rates_fit_the_model() {
        // chi-square goodness of fit on the four most-played pairs of a small pool
        let mut cfg = PlantedConfig::new(4, 2, 60_000, 11);
        cfg.rating_map = RatingMap {
            weights: vec![1.0, -0.5],
            bias: 0.0,
        };
        let d = gen_planted_dataset::<f64>(&cfg).unwrap();
        let mut played = [[0u32; 4]; 4];
        let mut won = [[0u32; 4]; 4];
        for g in &d.matches {
            let (a, b) = (g.i.min(g.j), g.i.max(g.j));
            played[a][b] += 1;
            if g.winner == a {
                won[a][b] += 1;
            }
        }
        let mut chi2 = 0.0;
        let mut dof = 0;
        for a in 0..4 {
            for b in a + 1..4 {
                let n = f64::from(played[a][b]);
                let p = 1.0 / (1.0 + (d.true_ratings[b] - d.true_ratings[a]).exp());
                let (o, e) = (f64::from(won[a][b]), n * p);
                chi2 += (o - e).powi(2) / e + (o - e).powi(2) / (n - e);
                dof += 1;
            }
        }
        // chi-square 0.99 quantile with 6 degrees of freedom
        assert_eq!(dof, 6);
        assert!(chi2 < 16.812, "chi2 = {chi2}");
    }

    #[test]
    fn deterministic_and_validated() {
        let cfg = PlantedConfig::new(10, 2, 100, 5);
        assert_eq!(gen_planted_dataset::<f64>(&cfg).unwrap(), gen_planted_dataset::<f64>(&cfg).unwrap());
        assert!(gen_planted_dataset::<f64>(&PlantedConfig::new(3, 2, 10, 0)).is_err());
        let mut bad = cfg.clone();
        bad.holdout_fraction = 1.0;
        assert!(gen_planted_dataset::<f64>(&bad).is_err());
        let mut bad = cfg;
        bad.rating_map.weights.pop();
        assert!(gen_planted_dataset::<f64>(&bad).is_err());
    }
}
