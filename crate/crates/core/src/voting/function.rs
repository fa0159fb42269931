//! Voting functions that depend on a word only through its vote counts.

use serde::{Deserialize, Serialize};

use super::embedding::StatisticEmbedding;
use super::measure::Counts;
use super::rectangles::RectangleSet;
use super::words::{counts, plurality_counts};
use crate::error::{domain, Result};

/// What a rectangle function returns outside its rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    /// A fixed candidate.
    Label(usize),
    /// The plurality winner.
    Plurality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VotingFunction {
    /// Most votes wins; ties go to the lowest index.
    Plurality,
    /// The label of the rectangle containing the whitened count statistic.
    Rectangle { rectangles: RectangleSet, fallback: Fallback },
}

/// Rectangle function from a rectangle partition of the statistic plane.
pub fn build_competitor(rectangles: RectangleSet, fallback: Fallback) -> Result<VotingFunction> {
    let max = rectangles.rects().iter().map(|r| r.label).max();
    if let Some(l) = max.filter(|&l| l >= 3) {
        return Err(domain(format!("rectangle label {l} is not a candidate")));
    }
    if let Fallback::Label(l) = fallback {
        if l >= 3 {
            return Err(domain(format!("fallback label {l} is not a candidate")));
        }
    }
    Ok(VotingFunction::Rectangle { rectangles, fallback })
}

impl VotingFunction {
    /// Binds the function to a number of voters for repeated evaluation.
    pub fn evaluator(&self, n: u64) -> Result<Evaluator<'_>> {
        Ok(Evaluator { f: self, embedding: StatisticEmbedding::new(n)? })
    }

    /// Winner for a count vector, 0-based.
    pub fn eval_counts(&self, c: &Counts) -> Result<usize> {
        Ok(self.evaluator(c.iter().sum())?.eval(c))
    }

    /// Winner of a word, as a symbol in `{1, 2, 3}`.
    pub fn eval_word(&self, word: &[u8]) -> Result<u8> {
        if word.is_empty() {
            return Err(domain("a word needs at least one vote"));
        }
        Ok(self.eval_counts(&counts(word)?)? as u8 + 1)
    }

    /// Rectangles the function consults, if any.
    pub fn rectangles(&self) -> Option<&RectangleSet> {
        match self {
            VotingFunction::Plurality => None,
            VotingFunction::Rectangle { rectangles, .. } => Some(rectangles),
        }
    }
}

/// A voting function with its statistic embedding precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    f: &'a VotingFunction,
    embedding: StatisticEmbedding,
}

impl Evaluator<'_> {
    pub fn n(&self) -> u64 {
        self.embedding.n()
    }

    pub fn embedding(&self) -> &StatisticEmbedding {
        &self.embedding
    }

    #[inline]
    pub fn eval(&self, c: &Counts) -> usize {
        debug_assert_eq!(c.iter().sum::<u64>(), self.embedding.n());
        match self.f {
            VotingFunction::Plurality => plurality_counts(c),
            VotingFunction::Rectangle { rectangles, fallback } => {
                match rectangles.lookup(self.embedding.embed(c)) {
                    Some(l) => l,
                    None => match fallback {
                        Fallback::Label(l) => *l,
                        Fallback::Plurality => plurality_counts(c),
                    },
                }
            }
        }
    }
}
