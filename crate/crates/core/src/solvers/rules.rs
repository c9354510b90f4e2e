use std::fmt;
use std::str::FromStr;

use crate::numerics::Smoothness;
use crate::rng::ShiftRng;

/// How the two coordinates of an accelerated iteration are picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// One greedy coordinate drives both updates (AGCD).
    Greedy,
    /// One uniform coordinate drives both updates (ARCD).
    Random,
    /// Greedy coordinate for `x`, independent uniform coordinate for `z` (ASCD).
    SemiGreedy,
}

impl Rule {
    pub fn needs_full_gradient(&self) -> bool {
        matches!(self, Rule::Greedy | Rule::SemiGreedy)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Greedy => "agcd",
            Rule::Random => "arcd",
            Rule::SemiGreedy => "ascd",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "agcd" | "greedy" => Ok(Rule::Greedy),
            "arcd" | "random" => Ok(Rule::Random),
            "ascd" | "semi-greedy" => Ok(Rule::SemiGreedy),
            other => Err(format!("unknown rule {other:?}")),
        }
    }
}

/// Smallest index maximising `|g_i| / sqrt(L_i)`.
pub fn select_greedy(gradient: &[f64], l: &Smoothness) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (g, w)) in gradient.iter().zip(l.inv_sqrt()).enumerate() {
        let score = g.abs() * w;
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

/// Uniform coordinate in `0..dim`.
#[inline]
pub fn select_random(rng: &mut ShiftRng, dim: usize) -> usize {
    rng.uniform_index(dim)
}
