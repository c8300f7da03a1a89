//! Classical Bradley-Terry machinery: win probabilities, the MLE existence
//! check, MM solvers for the plain and home-advantage models, and Elo.

mod elo;
mod ford;
mod io;
mod mm;

pub use elo::{elo_rate_history, elo_to_pi, elo_update, elo_win_prob, pi_to_elo, EloConfig, Game};
pub use ford::{check_ford_condition, FordCheck};
pub use io::{
    history_matrix, read_history, read_history_from, read_match_matrix, read_match_matrix_from, write_history,
    write_match_matrix, write_scores,
};
pub use mm::{log_likelihood, log_likelihood_home, mm_mle, mm_mle_home, HomeFit, MmFit, MmOptions};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square table of win counts; `get(i, j)` is the number of times item `i` beat item `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl MatchMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("need at least 2 items, got {n}")));
        }
        Ok(Self {
            n,
            counts: vec![0; n * n],
        })
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let mut m = Self::zeros(rows.len())?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m.n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    m.n
                )));
            }
            if row[i] != 0 {
                return Err(Error::InvalidMatrix(format!("diagonal entry ({i},{i}) is nonzero")));
            }
            m.counts[i * m.n..(i + 1) * m.n].copy_from_slice(row);
        }
        Ok(m)
    }

    /// Tallies `(winner, loser)` pairs into a fresh matrix of `n` items.
    pub fn from_results(n: usize, results: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for (w, l) in results {
            m.record(w, l)?;
        }
        Ok(m)
    }

    pub fn record(&mut self, winner: usize, loser: usize) -> Result<()> {
        for idx in [winner, loser] {
            if idx >= self.n {
                return Err(Error::IndexOutOfRange { index: idx, len: self.n });
            }
        }
        if winner == loser {
            return Err(Error::InvalidMatrix(format!("item {winner} cannot play itself")));
        }
        self.counts[winner * self.n + loser] += 1;
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.counts[i * self.n..(i + 1) * self.n]
    }

    /// Total wins of item `i`.
    pub fn wins(&self, i: usize) -> u64 {
        self.row(i).iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Element-wise sum; both matrices must have the same size.
    pub fn combined(&self, other: &MatchMatrix) -> Result<MatchMatrix> {
        if self.n != other.n {
            return Err(Error::InvalidMatrix(format!(
                "size mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(MatchMatrix {
            n: self.n,
            counts: self.counts.iter().zip(&other.counts).map(|(a, b)| a + b).collect(),
        })
    }

    /// Relabels items so that new item `k` is old item `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<MatchMatrix> {
        check_permutation(perm, self.n)?;
        let mut out = MatchMatrix::zeros(self.n)?;
        for a in 0..self.n {
            for b in 0..self.n {
                out.counts[a * self.n + b] = self.get(perm[a], perm[b]);
            }
        }
        Ok(out)
    }
}

/// Bradley-Terry scores, normalized so their arithmetic mean is one.
#[derive(Debug, Clone, PartialEq)]
pub struct BTScores<T> {
    pi: Vec<T>,
}

impl<T: Scalar> BTScores<T> {
    /// Rescales `pi` to mean one. Every entry must be positive and finite.
    pub fn normalized(pi: Vec<T>) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::Empty("score vector"));
        }
        if let Some(bad) = pi.iter().find(|p| !(p.is_finite() && **p > T::zero())) {
            return Err(Error::Domain(format!("score must be positive and finite, got {bad}")));
        }
        let mut pi = pi;
        normalize_mean_one(&mut pi);
        Ok(Self { pi })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.pi
    }

    pub fn to_elo(&self, cfg: &EloConfig<T>) -> Vec<T> {
        self.pi
            .iter()
            .map(|&p| pi_to_elo(p, cfg).expect("normalized scores are positive"))
            .collect()
    }
}

impl<T> std::ops::Index<usize> for BTScores<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.pi[i]
    }
}

/// Multiplicative advantage of the home (first-listed) side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomeAdvantage<T> {
    eta: T,
}

impl<T: Scalar> HomeAdvantage<T> {
    pub fn new(eta: T) -> Result<Self> {
        if !(eta.is_finite() && eta > T::zero()) {
            return Err(Error::Domain(format!("home advantage must be positive, got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> T {
        self.eta
    }
}

pub(crate) fn normalize_mean_one<T: Scalar>(pi: &mut [T]) {
    let mean = pi.iter().copied().sum::<T>() / T::of_usize(pi.len());
    for p in pi.iter_mut() {
        *p /= mean;
    }
}

fn positive<T: Scalar>(x: T, what: &str) -> Result<T> {
    if x > T::zero() && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{what} must be positive and finite, got {x}")))
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Probability that an item with score `pi_i` beats one with score `pi_j`.
pub fn pairwise_win_prob<T: Scalar>(pi_i: T, pi_j: T) -> Result<T> {
    let a = positive(pi_i, "score")?;
    let b = positive(pi_j, "score")?;
    Ok(a / (a + b))
}

/// Probability that entrant `i` wins a single contest among all of `pi`.
pub fn multiplayer_win_prob<T: Scalar>(pi: &[T], i: usize) -> Result<T> {
    if i >= pi.len() {
        return Err(Error::IndexOutOfRange { index: i, len: pi.len() });
    }
    let mut total = T::zero();
    for &p in pi {
        total += positive(p, "score")?;
    }
    Ok(pi[i] / total)
}

/// Likelihood of a full finishing order: each place is won among the entrants
/// not yet placed. `ranking[0]` is the winner.
pub fn rank_likelihood<T: Scalar>(pi: &[T], ranking: &[usize]) -> Result<T> {
    check_permutation(ranking, pi.len())?;
    let mut remaining = T::zero();
    for &p in pi {
        remaining += positive(p, "score")?;
    }
    let mut likelihood = T::one();
    for &idx in ranking {
        likelihood *= pi[idx] / remaining;
        remaining -= pi[idx];
    }
    Ok(likelihood)
}

/// Win probability of the home side under a multiplicative home advantage.
pub fn home_win_prob<T: Scalar>(pi_home: T, pi_away: T, adv: HomeAdvantage<T>) -> Result<T> {
    let h = positive(pi_home, "home score")? * adv.eta;
    let a = positive(pi_away, "away score")?;
    Ok(h / (h + a))
}
