//! Sorting inputs and their naturalistic twin, ranking objects by weight.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::names::{ordinal, OBJECTS};
use super::TaskGenError;
use crate::algolib::{oracle_run, AlgorithmEntry, OracleInput, OracleOutput};

pub const MAX_ELEMENT: i64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Heaviest,
    Lightest,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedObject {
    pub name: String,
    pub weight: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingPlan {
    pub objects: Vec<RankedObject>,
    /// 1-based rank asked for.
    pub k: usize,
    pub order: Order,
}

impl RankingPlan {
    /// Name of the requested object, by direct comparison of weights.
    pub fn evaluate(&self) -> String {
        let mut by_weight: Vec<&RankedObject> = self.objects.iter().collect();
        match self.order {
            Order::Heaviest => by_weight.sort_by_key(|o| std::cmp::Reverse(o.weight)),
            Order::Lightest => by_weight.sort_by_key(|o| o.weight),
        }
        by_weight[self.k - 1].name.clone()
    }

    pub fn weights(&self) -> Vec<i64> {
        self.objects.iter().map(|o| o.weight).collect()
    }

    /// Answers the question by running a sorting oracle on the weights and
    /// mapping the selected weight back to its object.
    pub fn evaluate_with(&self, entry: &AlgorithmEntry) -> Option<String> {
        let Ok(OracleOutput::Vector(sorted)) = oracle_run(entry, &OracleInput::Vector(self.weights())) else {
            return None;
        };
        let w = match self.order {
            Order::Heaviest => sorted.get(sorted.len().checked_sub(self.k)?)?,
            Order::Lightest => sorted.get(self.k - 1)?,
        };
        self.objects.iter().find(|o| o.weight == *w).map(|o| o.name.clone())
    }

    pub fn sentences(&self) -> Vec<String> {
        let mut out = vec![format!("There are {} objects in a room.", self.objects.len())];
        out.extend(
            self.objects
                .iter()
                .map(|o| format!("The {} weighs {} kilograms.", o.name, o.weight)),
        );
        out
    }

    pub fn question(&self) -> String {
        let which = match self.order {
            Order::Heaviest => "heaviest",
            Order::Lightest => "lightest",
        };
        if self.k == 1 {
            format!("Which object is the {which}? Reply with its name.")
        } else {
            format!("Which object is the {} {which}? Reply with its name.", ordinal(self.k))
        }
    }

    pub fn narrative(&self) -> String {
        self.sentences().join(" ")
    }
}

/// `len` elements drawn uniformly from `[0, MAX_ELEMENT]`, repeats allowed.
pub fn sorting_input(rng: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    (0..len).map(|_| rng.random_range(0..=MAX_ELEMENT)).collect()
}

/// `len` objects with pairwise distinct weights in `[1, MAX_ELEMENT]`.
pub fn ranking_plan(rng: &mut ChaCha8Rng, len: usize) -> Result<RankingPlan, TaskGenError> {
    if len == 0 || len > OBJECTS.len() {
        return Err(TaskGenError::InfeasibleParams(format!(
            "ranking needs between 1 and {} objects, got {len}",
            OBJECTS.len()
        )));
    }
    let mut names = OBJECTS.to_vec();
    names.shuffle(rng);
    let weights = rand::seq::index::sample(rng, MAX_ELEMENT as usize, len);
    let objects = names[..len]
        .iter()
        .zip(weights.iter())
        .map(|(n, w)| RankedObject { name: n.to_string(), weight: w as i64 + 1 })
        .collect();
    let order = if rng.random_bool(0.5) { Order::Heaviest } else { Order::Lightest };
    let k = rng.random_range(1..=len);
    Ok(RankingPlan { objects, k, order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algolib::corpus;
    use rand::SeedableRng;

    fn plan(order: Order, k: usize) -> RankingPlan {
        let objects = [("lamp", 12), ("book", 40), ("kettle", 7)]
            .iter()
            .map(|&(n, w)| RankedObject { name: n.into(), weight: w })
            .collect();
        RankingPlan { objects, k, order }
    }

    #[test]
    fn kth_heaviest_and_lightest() {
        assert_eq!(plan(Order::Heaviest, 1).evaluate(), "book");
        assert_eq!(plan(Order::Heaviest, 2).evaluate(), "lamp");
        assert_eq!(plan(Order::Lightest, 1).evaluate(), "kettle");
        assert_eq!(plan(Order::Heaviest, 2).question(), "Which object is the 2nd heaviest? Reply with its name.");
        assert_eq!(plan(Order::Lightest, 1).question(), "Which object is the lightest? Reply with its name.");
    }

    #[test]
    fn every_sorting_oracle_ranks_like_direct_comparison() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = ranking_plan(&mut rng, 30).unwrap();
            for e in corpus() {
                assert_eq!(p.evaluate_with(e), Some(p.evaluate()), "{} {}", e.name, e.style);
            }
        }
    }

    #[test]
    fn weights_are_distinct() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = ranking_plan(&mut rng, 40).unwrap();
        let mut w = p.weights();
        w.sort_unstable();
        w.dedup();
        assert_eq!(w.len(), 40);
        assert!(w.iter().all(|&x| (1..=MAX_ELEMENT).contains(&x)));
    }
}
