//! Stagewise assignment over precomputed cost tables.
//!
//! Stage `i` has `k_i` candidates, ordered so that index order equals the
//! desired tie-break order. The objective of an assignment `a` is
//! `lambda_t * sum_i T_i[a_i][a_{i+1}] + sum_i P_i[a_i]`, evaluated left to
//! right. Among equal-cost assignments the lexicographically smallest index
//! sequence is returned by both solvers.

use crate::error::{Error, Result};

/// Largest search space the exhaustive solver accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PathProblem {
    /// `phrase_costs[i][a]`, already weighted.
    pub phrase_costs: Vec<Vec<f64>>,
    /// `transition_costs[i][a][b]` from candidate `a` of stage `i` to
    /// candidate `b` of stage `i + 1`, unweighted.
    pub transition_costs: Vec<Vec<Vec<f64>>>,
    pub lambda_t: f64,
}

impl PathProblem {
    pub fn stages(&self) -> usize {
        self.phrase_costs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.stages();
        if n == 0 {
            return Err(Error::Value("no stages".into()));
        }
        if let Some(i) = self.phrase_costs.iter().position(Vec::is_empty) {
            return Err(Error::EmptyCandidate(i));
        }
        if self.transition_costs.len() != n - 1 {
            return Err(Error::LengthMismatch(format!(
                "{} transition tables for {n} stages",
                self.transition_costs.len()
            )));
        }
        for (i, t) in self.transition_costs.iter().enumerate() {
            let (ka, kb) = (self.phrase_costs[i].len(), self.phrase_costs[i + 1].len());
            if t.len() != ka || t.iter().any(|row| row.len() != kb) {
                return Err(Error::LengthMismatch(format!("transition table {i} is not {ka}x{kb}")));
            }
        }
        Ok(())
    }

    /// Objective of one assignment, as a sum in stage order.
    pub fn total(&self, assignment: &[usize]) -> f64 {
        self.lambda_t * self.transition_sum(assignment) + self.phrase_sum(assignment)
    }

    pub fn transition_sum(&self, assignment: &[usize]) -> f64 {
        assignment
            .windows(2)
            .enumerate()
            .map(|(i, w)| self.transition_costs[i][w[0]][w[1]])
            .sum()
    }

    pub fn phrase_sum(&self, assignment: &[usize]) -> f64 {
        assignment
            .iter()
            .enumerate()
            .map(|(i, &a)| self.phrase_costs[i][a])
            .sum()
    }

    /// Viterbi: a backward pass of best suffix costs, then a forward walk
    /// taking the smallest index among the minimizers at each stage.
    pub fn solve(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let n = self.stages();
        let mut suffix: Vec<Vec<f64>> = vec![Vec::new(); n];
        suffix[n - 1] = self.phrase_costs[n - 1].clone();
        for i in (0..n - 1).rev() {
            let next = &suffix[i + 1];
            suffix[i] = self.phrase_costs[i]
                .iter()
                .enumerate()
                .map(|(a, p)| {
                    let best = self.transition_costs[i][a]
                        .iter()
                        .zip(next)
                        .map(|(t, s)| self.lambda_t * t + s)
                        .fold(f64::INFINITY, f64::min);
                    p + best
                })
                .collect();
        }

        let mut path = Vec::with_capacity(n);
        path.push(argmin(&suffix[0]));
        for i in 0..n - 1 {
            let a = path[i];
            let scores: Vec<f64> = self.transition_costs[i][a]
                .iter()
                .zip(&suffix[i + 1])
                .map(|(t, s)| self.lambda_t * t + s)
                .collect();
            path.push(argmin(&scores));
        }
        Ok(path)
    }

    /// Exhaustive enumeration in lexicographic order, keeping the first
    /// strictly better assignment.
    pub fn solve_brute_force(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let size = self
            .phrase_costs
            .iter()
            .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
            .unwrap_or(u128::MAX);
        if size > BRUTE_FORCE_LIMIT {
            return Err(Error::TooLarge(size));
        }
        let n = self.stages();
        let mut current = vec![0usize; n];
        let mut best = current.clone();
        let mut best_cost = self.total(&current);
        loop {
            let mut i = n;
            loop {
                if i == 0 {
                    return Ok(best);
                }
                i -= 1;
                current[i] += 1;
                if current[i] < self.phrase_costs[i].len() {
                    break;
                }
                current[i] = 0;
            }
            let c = self.total(&current);
            if c < best_cost {
                best_cost = c;
                best.clone_from(&current);
            }
        }
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn two_by_two() -> PathProblem {
        PathProblem {
            phrase_costs: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            transition_costs: vec![vec![vec![5.0, 0.1], vec![0.1, 5.0]]],
            lambda_t: 1.0,
        }
    }

    #[test]
    fn hand_enumerated_instance() {
        let p = two_by_two();
        assert_eq!(p.solve().unwrap(), vec![0, 1]);
        assert_eq!(p.solve_brute_force().unwrap(), vec![0, 1]);
        assert_eq!(p.total(&[0, 1]), 0.1);
        let all = [[0, 0], [0, 1], [1, 0], [1, 1]].map(|a| p.total(&a));
        assert_eq!(all, [6.0, 0.1, 2.1, 6.0]);
    }

    #[test]
    fn single_stage_takes_cheapest_then_smallest() {
        let p = PathProblem {
            phrase_costs: vec![vec![0.5, 0.25, 0.25]],
            transition_costs: vec![],
            lambda_t: 1.0,
        };
        assert_eq!(p.solve().unwrap(), vec![1]);
        assert_eq!(p.solve_brute_force().unwrap(), vec![1]);
    }

    #[test]
    fn ties_prefer_lexicographically_smaller() {
        let p = PathProblem {
            phrase_costs: vec![vec![0.0; 3]; 4],
            transition_costs: vec![vec![vec![1.0; 3]; 3]; 3],
            lambda_t: 1.0,
        };
        assert_eq!(p.solve().unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(p.solve_brute_force().unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn rejects_large_and_empty() {
        let big = PathProblem {
            phrase_costs: vec![vec![0.0; 10]; 7],
            transition_costs: vec![vec![vec![0.0; 10]; 10]; 6],
            lambda_t: 1.0,
        };
        assert!(matches!(big.solve_brute_force(), Err(Error::TooLarge(10_000_000))));
        assert!(big.solve().is_ok());
        let empty = PathProblem {
            phrase_costs: vec![vec![0.0], vec![]],
            transition_costs: vec![vec![vec![]]],
            lambda_t: 1.0,
        };
        assert!(matches!(empty.solve(), Err(Error::EmptyCandidate(1))));
    }

    fn problem() -> impl Strategy<Value = PathProblem> {
        (prop::collection::vec(1usize..5, 1..5), 0u32..4).prop_flat_map(|(sizes, lt)| {
            let n = sizes.len();
            let phrase = sizes
                .iter()
                .map(|&k| prop::collection::vec((0u32..8).prop_map(|q| q as f64 / 4.0), k))
                .collect::<Vec<_>>();
            let trans = (0..n.saturating_sub(1))
                .map(|i| {
                    prop::collection::vec(
                        prop::collection::vec((0u32..8).prop_map(|q| q as f64 / 4.0), sizes[i + 1]),
                        sizes[i],
                    )
                })
                .collect::<Vec<_>>();
            (phrase, trans).prop_map(move |(phrase_costs, transition_costs)| PathProblem {
                phrase_costs,
                transition_costs,
                lambda_t: lt as f64 * 0.5,
            })
        })
    }

    proptest! {
        #[test]
        fn dp_matches_exhaustive_search(p in problem()) {
            let dp = p.solve().unwrap();
            let bf = p.solve_brute_force().unwrap();
            prop_assert_eq!(&dp, &bf);
            prop_assert_eq!(p.total(&dp), p.total(&bf));
        }
    }
}
