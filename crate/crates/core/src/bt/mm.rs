use super::{check_ford_condition, normalize_mean_one, BTScores, FordCheck, HomeAdvantage, MatchMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmOptions {
    /// Stop once the largest absolute score change in a sweep falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MmOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
        }
    }
}

impl MmOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MmFit<T> {
    pub scores: BTScores<T>,
    pub iterations: usize,
    /// `false` when `max_iter` sweeps ran without meeting `tol`.
    pub converged: bool,
    /// Log-likelihood at the starting point followed by one entry per sweep.
    pub log_likelihood: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct HomeFit<T> {
    pub scores: BTScores<T>,
    pub advantage: HomeAdvantage<T>,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: Vec<T>,
}

/// `sum_ij n_ij * ln(pi_i / (pi_i + pi_j))`
pub fn log_likelihood<T: Scalar>(m: &MatchMatrix, pi: &[T]) -> T {
    let n = m.n();
    let mut ll = T::zero();
    for i in 0..n {
        for j in 0..n {
            let c = m.get(i, j);
            if c > 0 {
                ll += T::of(c as f64) * (pi[i] / (pi[i] + pi[j])).ln();
            }
        }
    }
    ll
}

/// Log-likelihood of home/away records under the home-advantage model.
/// `home_wins[i][j]`: `i` at home beat `j`; `away_wins[i][j]`: `i` away beat `j` at home.
pub fn log_likelihood_home<T: Scalar>(home_wins: &MatchMatrix, away_wins: &MatchMatrix, pi: &[T], eta: T) -> T {
    let n = home_wins.n();
    let mut ll = T::zero();
    for i in 0..n {
        for j in 0..n {
            // i hosts j
            let denom = eta * pi[i] + pi[j];
            let hw = home_wins.get(i, j);
            let aw = away_wins.get(j, i);
            if hw > 0 {
                ll += T::of(hw as f64) * (eta * pi[i] / denom).ln();
            }
            if aw > 0 {
                ll += T::of(aw as f64) * (pi[j] / denom).ln();
            }
        }
    }
    ll
}

fn require_ford(m: &MatchMatrix) -> Result<()> {
    match check_ford_condition(m) {
        FordCheck::Satisfied => Ok(()),
        FordCheck::Violated { winners, losers } => Err(Error::FordViolation { winners, losers }),
    }
}

fn max_abs_change<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).abs())
        .fold(T::zero(), T::max)
}

/// Maximum-likelihood Bradley-Terry scores by the minorization-maximization
/// fixed point `pi_i <- W_i / sum_j (n_ij + n_ji) / (pi_i + pi_j)`, applied to
/// all items at once and renormalized to mean one after each sweep.
pub fn mm_mle<T: Scalar>(m: &MatchMatrix, opts: &MmOptions) -> Result<MmFit<T>> {
    opts.validate()?;
    require_ford(m)?;
    let n = m.n();
    let tol = T::of(opts.tol);
    let wins: Vec<T> = (0..n).map(|i| T::of(m.wins(i) as f64)).collect();
    let games: Vec<(usize, usize, T)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i < j)
        .filter_map(|(i, j)| {
            let g = m.get(i, j) + m.get(j, i);
            (g > 0).then(|| (i, j, T::of(g as f64)))
        })
        .collect();

    let mut pi = vec![T::one(); n];
    let mut trace = vec![log_likelihood(m, &pi)];
    let mut denom = vec![T::zero(); n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        denom.iter_mut().for_each(|d| *d = T::zero());
        for &(i, j, g) in &games {
            let share = g / (pi[i] + pi[j]);
            denom[i] += share;
            denom[j] += share;
        }
        let mut next: Vec<T> = wins.iter().zip(&denom).map(|(w, d)| *w / *d).collect();
        normalize_mean_one(&mut next);
        let delta = max_abs_change(&pi, &next);
        pi = next;
        trace.push(log_likelihood(m, &pi));
        if delta < tol {
            converged = true;
            break;
        }
    }
    Ok(MmFit {
        scores: BTScores::normalized(pi)?,
        iterations,
        converged,
        log_likelihood: trace,
    })
}

/// Joint fit of scores and a multiplicative home advantage. Each iteration is
/// one MM sweep over the scores with the advantage held fixed, then one MM
/// update of the advantage with the scores held fixed; both steps are
/// minorize-maximize steps, so the likelihood never decreases.
pub fn mm_mle_home<T: Scalar>(home_wins: &MatchMatrix, away_wins: &MatchMatrix, opts: &MmOptions) -> Result<HomeFit<T>> {
    opts.validate()?;
    let combined = home_wins.combined(away_wins)?;
    require_ford(&combined)?;
    let n = home_wins.n();
    let tol = T::of(opts.tol);
    let wins: Vec<T> = (0..n).map(|i| T::of(combined.wins(i) as f64)).collect();
    let home_total = T::of(home_wins.total() as f64);
    // hosted[i][j]: games with i at home against j
    let hosted: Vec<(usize, usize, T)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let g = home_wins.get(i, j) + away_wins.get(j, i);
            (g > 0).then(|| (i, j, T::of(g as f64)))
        })
        .collect();

    let mut pi = vec![T::one(); n];
    let mut eta = T::one();
    let mut trace = vec![log_likelihood_home(home_wins, away_wins, &pi, eta)];
    let mut denom = vec![T::zero(); n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        denom.iter_mut().for_each(|d| *d = T::zero());
        for &(h, a, g) in &hosted {
            let share = g / (eta * pi[h] + pi[a]);
            denom[h] += eta * share;
            denom[a] += share;
        }
        let mut next: Vec<T> = wins.iter().zip(&denom).map(|(w, d)| *w / *d).collect();
        normalize_mean_one(&mut next);

        let next_eta = if home_total > T::zero() {
            let d: T = hosted
                .iter()
                .map(|&(h, a, g)| g * next[h] / (eta * next[h] + next[a]))
                .sum();
            home_total / d
        } else {
            // no home wins at all: the likelihood is maximized as eta -> 0
            eta * T::of(0.5)
        };

        let delta = max_abs_change(&pi, &next).max((next_eta - eta).abs());
        pi = next;
        eta = next_eta;
        trace.push(log_likelihood_home(home_wins, away_wins, &pi, eta));
        if delta < tol {
            converged = true;
            break;
        }
    }
    Ok(HomeFit {
        scores: BTScores::normalized(pi)?,
        advantage: HomeAdvantage::new(eta)?,
        iterations,
        converged,
        log_likelihood: trace,
    })
}
