use super::pairwise_win_prob;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rating scale (`alpha`), offset (`beta`) and update step (`k`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EloConfig<T> {
    pub alpha: T,
    pub beta: T,
    pub k: T,
}

impl<T: Scalar> Default for EloConfig<T> {
    fn default() -> Self {
        Self {
            alpha: T::of(400.0),
            beta: T::of(1500.0),
            k: T::of(32.0),
        }
    }
}

impl<T: Scalar> EloConfig<T> {
    pub fn new(alpha: T, beta: T, k: T) -> Result<Self> {
        let cfg = Self { alpha, beta, k };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero()) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.k > T::zero()) {
            return Err(Error::Config(format!("k must be positive, got {}", self.k)));
        }
        Ok(())
    }
}

/// One game between `i` and `j`; `winner` is the index of whichever of the two won.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Game {
    pub i: usize,
    pub j: usize,
    pub winner: usize,
}

/// `alpha * log10(pi) + beta`
pub fn pi_to_elo<T: Scalar>(pi: T, cfg: &EloConfig<T>) -> Result<T> {
    if !(pi > T::zero()) {
        return Err(Error::Domain(format!("score must be positive, got {pi}")));
    }
    Ok(cfg.alpha * pi.log10() + cfg.beta)
}

pub fn elo_to_pi<T: Scalar>(rating: T, cfg: &EloConfig<T>) -> T {
    T::of(10.0).powf((rating - cfg.beta) / cfg.alpha)
}

pub fn elo_win_prob<T: Scalar>(r_i: T, r_j: T, cfg: &EloConfig<T>) -> Result<T> {
    pairwise_win_prob(elo_to_pi(r_i, cfg), elo_to_pi(r_j, cfg))
}

/// `R_i + k (w - g W_ij)` after `wins` wins out of `games` against `j`.
pub fn elo_update<T: Scalar>(r_i: T, r_j: T, wins: u64, games: u64, cfg: &EloConfig<T>) -> Result<T> {
    if games == 0 {
        return Err(Error::Config("games must be at least 1".into()));
    }
    if wins > games {
        return Err(Error::Config(format!("{wins} wins out of {games} games")));
    }
    let expected = T::of(games as f64) * elo_win_prob(r_i, r_j, cfg)?;
    Ok(r_i + cfg.k * (T::of(wins as f64) - expected))
}

/// Replays `history` in order from an all-`beta` start. Both players of a
/// game are updated from their pre-game ratings.
pub fn elo_rate_history<T: Scalar>(n: usize, history: &[Game], cfg: &EloConfig<T>) -> Result<Vec<T>> {
    cfg.validate()?;
    let mut ratings = vec![cfg.beta; n];
    for (idx, g) in history.iter().enumerate() {
        for p in [g.i, g.j] {
            if p >= n {
                return Err(Error::IndexOutOfRange { index: p, len: n });
            }
        }
        if g.i == g.j || (g.winner != g.i && g.winner != g.j) {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("invalid game {g:?}"),
            });
        }
        let (ri, rj) = (ratings[g.i], ratings[g.j]);
        let i_won = u64::from(g.winner == g.i);
        ratings[g.i] = elo_update(ri, rj, i_won, 1, cfg)?;
        ratings[g.j] = elo_update(rj, ri, 1 - i_won, 1, cfg)?;
    }
    Ok(ratings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(k: f64) -> EloConfig<f64> {
        EloConfig::new(400.0, 1500.0, k).unwrap()
    }

    #[test]
    fn decade_anchors() {
        let c = cfg(32.0);
        assert_abs_diff_eq!(pi_to_elo(1.0, &c).unwrap(), 1500.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi_to_elo(10.0, &c).unwrap(), 1900.0, epsilon = 1e-9);
        assert_abs_diff_eq!(pi_to_elo(0.1, &c).unwrap(), 1100.0, epsilon = 1e-9);
        assert!(pi_to_elo(0.0, &c).is_err());
        assert!(pi_to_elo(-3.0, &c).is_err());
    }

    #[test]
    fn update_examples() {
        for k in [1.0, 16.0, 32.0] {
            assert_abs_diff_eq!(elo_update(1612.0, 1612.0, 1, 2, &cfg(k)).unwrap(), 1612.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(elo_update(1500.0, 1500.0, 1, 1, &cfg(32.0)).unwrap(), 1516.0, epsilon = 1e-12);
        assert!(elo_update(1500.0, 1500.0, 2, 1, &cfg(32.0)).is_err());
        assert!(elo_update(1500.0, 1500.0, 0, 0, &cfg(32.0)).is_err());
    }

    #[test]
    fn expected_score_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = cfg(16.0);
        let games = 1_000_000u64;
        for _ in 0..100 {
            let ri = rng.random_range(800.0..2400.0);
            let rj = rng.random_range(800.0..2400.0);
            let w = (games as f64 * elo_win_prob(ri, rj, &c).unwrap()).round() as u64;
            let updated = elo_update(ri, rj, w, games, &c).unwrap();
            assert!((updated - ri).abs() <= 0.5 * c.k + 1e-6);
        }
    }

    #[test]
    fn history_examples() {
        let c = cfg(24.0);
        assert_eq!(elo_rate_history(3, &[], &c).unwrap(), vec![1500.0; 3]);
        let r = elo_rate_history(2, &[Game { i: 0, j: 1, winner: 0 }], &c).unwrap();
        assert_abs_diff_eq!(r[0], 1512.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 1488.0, epsilon = 1e-12);
        assert!(elo_rate_history(2, &[Game { i: 0, j: 2, winner: 0 }], &c).is_err());
        assert!(elo_rate_history(2, &[Game { i: 0, j: 1, winner: 5 }], &c).is_err());
    }

    proptest::proptest! {
        #[test]
        fn elo_round_trip(r in -5000.0f64..5000.0, alpha in 1.0f64..1000.0, beta in -3000.0f64..3000.0) {
            // keep 10^((r - beta) / alpha) inside the normal f64 range
            proptest::prop_assume!(((r - beta) / alpha).abs() < 300.0);
            let c = EloConfig::new(alpha, beta, 10.0).unwrap();
            let back = pi_to_elo(elo_to_pi(r, &c), &c).unwrap();
            proptest::prop_assert!((back - r).abs() <= 1e-9 * r.abs().max(beta.abs()).max(1.0));
        }
    }
}
