use rand::Rng;

use crate::cnf::Var;
use crate::seed::{rng_from_seed, SolverRng};

/// Independent uniform places in `[0, 1)`, one per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// `(variable, place)`, ascending by variable.
    places: Vec<(Var, f64)>,
}

impl Placement {
    pub fn from_pairs(mut places: Vec<(Var, f64)>) -> Placement {
        places.sort_by_key(|&(v, _)| v);
        Placement { places }
    }

    pub(crate) fn sample(vars: &[Var], rng: &mut SolverRng) -> Placement {
        Placement::from_pairs(vars.iter().map(|&v| (v, rng.random::<f64>())).collect())
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.places
            .binary_search_by_key(&var, |&(v, _)| v)
            .ok()
            .map(|i| self.places[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, f64)> + '_ {
        self.places.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    /// Variables by ascending place; ties go to the smaller index.
    pub fn order(&self) -> Vec<Var> {
        let mut pairs = self.places.clone();
        pairs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        pairs.into_iter().map(|(v, _)| v).collect()
    }
}

/// Draws a placement of `vars`; deterministic in `seed`.
pub fn sample_placement(vars: &[Var], seed: u64) -> Placement {
    Placement::sample(vars, &mut rng_from_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_placement() {
        let vars = [1, 2, 3, 7];
        assert_eq!(sample_placement(&vars, 11), sample_placement(&vars, 11));
        assert_ne!(sample_placement(&vars, 11), sample_placement(&vars, 12));
    }

    #[test]
    fn ties_break_by_index() {
        let p = Placement::from_pairs(vec![(3, 0.5), (1, 0.5), (2, 0.1)]);
        assert_eq!(p.order(), vec![2, 1, 3]);
        assert_eq!(p.get(3), Some(0.5));
        assert_eq!(p.get(4), None);
    }
}
