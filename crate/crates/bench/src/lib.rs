//! Fixtures shared by the criterion benches.

use paretotopo::pointset::{pairwise_distances, DistanceMatrix};
use paretotopo::problems::{sample_pareto, ProblemKind, ProblemSpec};
use paretotopo::PointCloud;

/// A seeded Pareto sample and its decision-space distances.
pub fn fixture(kind: ProblemKind, n: usize, seed: u64) -> (PointCloud, DistanceMatrix) {
    let pc = sample_pareto(&ProblemSpec::new(kind), n, seed).expect("benchmark sample");
    let dm = pairwise_distances(&pc);
    (pc, dm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_seeded() {
        let (a, da) = fixture(ProblemKind::Dtlz5, 40, 3);
        let (b, db) = fixture(ProblemKind::Dtlz5, 40, 3);
        assert_eq!(a.points(), b.points());
        assert_eq!(da.max_distance(), db.max_distance());
        assert_eq!(a.len(), 40);
    }
}
