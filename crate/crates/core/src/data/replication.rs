use super::DgpSpec;
use crate::rng::{self, stream};

/// A reproducible family of DGP specs derived from one base spec.
///
/// Replication 0 is the base spec itself. Replication `i > 0` gets a seed that
/// is a pure function of `(base seed, i)` and, when `redraw_coefficients` is
/// set, outcome-surface coefficients jittered by up to +-25% from a stream
/// derived the same way.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSet {
    pub base: DgpSpec,
    pub count: usize,
    pub redraw_coefficients: bool,
}

const JITTER: f64 = 0.25;

impl ReplicationSet {
    pub fn new(base: DgpSpec, count: usize) -> Self {
        Self {
            base,
            count: count.max(1),
            redraw_coefficients: false,
        }
    }

    pub fn with_redraw(mut self, redraw: bool) -> Self {
        self.redraw_coefficients = redraw;
        self
    }

    pub fn seed(&self, index: usize) -> u64 {
        if index == 0 {
            self.base.seed
        } else {
            rng::derive(self.base.seed, stream::REPLICATION, index as u64)
        }
    }

    pub fn spec(&self, index: usize) -> DgpSpec {
        let mut spec = self.base.clone();
        spec.seed = self.seed(index);
        if index > 0 && self.redraw_coefficients {
            let mut r = rng::seeded(rng::derive(spec.seed, stream::REPLICATION, 0));
            spec.outcome.jitter(JITTER, &mut r);
        }
        spec
    }

    pub fn specs(&self) -> impl Iterator<Item = DgpSpec> + '_ {
        (0..self.count).map(|i| self.spec(i))
    }
}

/// `ReplicationSet::new` under the operation's name.
pub fn make_replications(base: DgpSpec, count: usize) -> ReplicationSet {
    ReplicationSet::new(base, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, DgpFamily};

    #[test]
    fn single_replication_is_base() {
        let base = DgpFamily::ConfoundLinear.spec(99);
        let set = make_replications(base.clone(), 1);
        assert_eq!(set.specs().collect::<Vec<_>>(), vec![base]);
    }

    #[test]
    fn index_pure_derivation() {
        let set = ReplicationSet::new(DgpFamily::ConfoundHetero.spec(5), 10).with_redraw(true);
        let in_order: Vec<_> = set.specs().collect();
        assert_eq!(set.spec(7), in_order[7]);
        assert_eq!(set.spec(3), in_order[3]);
        assert_ne!(in_order[1].outcome, in_order[2].outcome);
    }

    #[test]
    fn replications_differ() {
        let set = ReplicationSet::new(DgpFamily::NullEffect.spec(5), 10);
        let data: Vec<_> = set.specs().map(|s| generate(&s, 20).unwrap()).collect();
        for i in 0..data.len() {
            for j in i + 1..data.len() {
                assert!(!data[i].same_values(&data[j]), "{i} == {j}");
            }
        }
    }
}
