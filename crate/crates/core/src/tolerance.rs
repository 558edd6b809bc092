//! Tolerance of colorful partitions under removal of whole color classes.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ColorfulPartition, Configuration};
use crate::error::{Error, Result};
use crate::geometry::{convex_hulls_intersect, separating_family, HalfSpace, HalfSpaceFamily};
use crate::perm::{all_permutations, factorial};
use crate::splits::max_pairs_split_by_hyperplane;

fn removal_mask(n: usize, removed: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; n];
    for &c in removed {
        if c >= n {
            return Err(Error::IndexOutOfRange { index: c, len: n });
        }
        mask[c] = true;
    }
    Ok(mask)
}

/// Do the hulls of the parts, restricted to classes outside `removed`, meet?
/// A part left empty counts as not meeting.
pub fn is_tverberg(config: &Configuration, partition: &ColorfulPartition, removed: &[usize]) -> Result<bool> {
    partition.check_against(config)?;
    let mask = removal_mask(config.n_classes(), removed)?;
    Ok(convex_hulls_intersect(&partition.parts(config, &mask))?.intersects())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToleranceReport {
    /// `-1` when the partition is not Tverberg to begin with.
    pub tolerance: i64,
    /// Least (lexicographic) minimum-size removal set that breaks the partition.
    pub break_set: Vec<usize>,
    /// Half-spaces with empty intersection, the `k`-th containing what is left of part `k`.
    pub witness: HalfSpaceFamily,
    pub subsets_checked: u64,
}

impl ToleranceReport {
    pub const CSV_HEADER: &'static str = "tolerance,break_set,subsets_checked";

    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.tolerance, self.break_set.iter().join(";"), self.subsets_checked)
    }
}

/// Smallest removal set that breaks the partition, searched level by level.
///
/// Breaking is monotone under supersets, so the first level with a breaking
/// set gives the tolerance and nothing above it needs to be looked at.
/// `budget` caps the number of removal sets evaluated.
pub fn partition_tolerance(
    config: &Configuration,
    partition: &ColorfulPartition,
    budget: Option<u64>,
) -> Result<ToleranceReport> {
    partition.check_against(config)?;
    let n = config.n_classes();
    let mut checked = 0u64;
    for k in 0..=n {
        let level = num::integer::binomial(n as u128, k as u128);
        if let Some(b) = budget {
            if u128::from(checked) + level > u128::from(b) {
                return Err(Error::ToleranceBudget {
                    budget: b,
                    lower_bound: k as i64 - 1,
                });
            }
        }
        let sets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
        let breaks: Vec<Result<bool>> = sets
            .par_iter()
            .map(|s| is_tverberg(config, partition, s).map(|t| !t))
            .collect();
        let mut hit = None;
        for (i, b) in breaks.into_iter().enumerate() {
            checked += 1;
            if b? {
                hit = Some(i);
                break;
            }
        }
        if let Some(i) = hit {
            let break_set = sets[i].clone();
            let mask = removal_mask(n, &break_set)?;
            let witness = separating_family(config.d(), &partition.parts(config, &mask))?
                .ok_or_else(|| Error::InternalInconsistency("breaking set has no separating family".into()))?;
            return Ok(ToleranceReport {
                tolerance: k as i64 - 1,
                break_set,
                witness,
                subsets_checked: checked,
            });
        }
    }
    Err(Error::InternalInconsistency("removing every class must break the partition".into()))
}

/// Every colorful partition, class by class in lexicographic permutation order,
/// which is also the `Ord` order of [`ColorfulPartition`].
pub fn all_partitions(n_classes: usize, r: usize) -> impl Iterator<Item = ColorfulPartition> {
    let perms = all_permutations(r);
    (0..n_classes)
        .map(|_| perms.clone())
        .multi_cartesian_product()
        .map(|p| ColorfulPartition::new(p).expect("permutations"))
}

/// Exhaustive maximum of [`partition_tolerance`]; ties go to the least partition.
pub fn best_partition_tolerance(
    config: &Configuration,
    partition_budget: u64,
    subset_budget: Option<u64>,
) -> Result<(ColorfulPartition, ToleranceReport)> {
    let count = factorial(config.r()).checked_pow(config.n_classes() as u32);
    if count.is_none_or(|c| c > u128::from(partition_budget)) {
        return Err(Error::BudgetExceeded {
            what: "colorful partitions",
            needed: count.unwrap_or(u128::MAX),
            budget: u128::from(partition_budget),
        });
    }
    let partitions: Vec<ColorfulPartition> = all_partitions(config.n_classes(), config.r()).collect();
    let reports: Vec<ToleranceReport> = partitions
        .par_iter()
        .map(|p| partition_tolerance(config, p, subset_budget))
        .collect::<Result<_>>()?;
    let best = (0..partitions.len())
        .max_by(|&a, &b| reports[a].tolerance.cmp(&reports[b].tolerance).then(b.cmp(&a)))
        .ok_or(Error::EmptyInput("partitions"))?;
    Ok((partitions[best].clone(), reports[best].clone()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperplaneBreak {
    /// Pairs split by the hyperplane.
    pub n_prime: usize,
    /// Open side the lower-indexed part is sent to after orientation.
    pub halfspace: HalfSpace,
    pub removed: Vec<usize>,
}

/// Break an `r = 2` partition with the hyperplane that splits the most pairs.
///
/// Unsplit pairs go first. Of the split pairs, those disagreeing with the
/// better orientation go next; what is left of the two parts then lies on
/// opposite open sides.
pub fn hyperplane_break_bound(config: &Configuration, partition: &ColorfulPartition) -> Result<HyperplaneBreak> {
    partition.check_against(config)?;
    let (n_prime, h) = max_pairs_split_by_hyperplane(config)?;
    hyperplane_break_with(config, partition, n_prime, h)
}

/// [`hyperplane_break_bound`] with the hyperplane from
/// [`max_pairs_split_by_hyperplane`] already in hand, for sweeps over partitions.
pub fn hyperplane_break_with(
    config: &Configuration,
    partition: &ColorfulPartition,
    n_prime: usize,
    h: HalfSpace,
) -> Result<HyperplaneBreak> {
    partition.check_against(config)?;
    let mut unsplit = Vec::new();
    // per orientation, the split pairs that disagree with it
    let mut disagree = [Vec::new(), Vec::new()];
    for (c, class) in config.classes().iter().enumerate() {
        let side0 = h.contains(&class[0]);
        if side0 == h.contains(&class[1]) {
            unsplit.push(c);
            continue;
        }
        let inside = if side0 { 0 } else { 1 };
        // orientation 0: part 0 goes inside h
        let o = usize::from(partition.part_of(c, inside) != 0);
        disagree[1 - o].push(c);
    }
    let (o, extra) = if disagree[0].len() <= disagree[1].len() {
        (0, &disagree[0])
    } else {
        (1, &disagree[1])
    };
    let mut removed: Vec<usize> = unsplit.iter().chain(extra).copied().collect();
    removed.sort_unstable();
    let halfspace = if o == 0 { h } else { h.complement().interior() };
    if is_tverberg(config, partition, &removed)? {
        return Err(Error::InternalInconsistency("hyperplane removal left a Tverberg partition".into()));
    }
    debug_assert!(removed.len() <= config.n_classes() - n_prime.div_ceil(2));
    Ok(HyperplaneBreak {
        n_prime,
        halfspace,
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{open_intersection_empty, Point};
    use crate::splits::generate_perfect_split;

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    fn nested(n: i64) -> Configuration {
        Configuration::new(1, 2, (1..=n).map(|i| vec![p(&[-i]), p(&[i])]).collect()).unwrap()
    }

    fn anti_aligned(n: usize) -> ColorfulPartition {
        ColorfulPartition::new((0..n).map(|c| if c % 2 == 0 { vec![0, 1] } else { vec![1, 0] }).collect()).unwrap()
    }

    #[test]
    fn is_tverberg_examples() {
        let cfg = nested(2);
        let part = anti_aligned(2);
        assert!(is_tverberg(&cfg, &part, &[]).unwrap());
        assert!(!is_tverberg(&cfg, &part, &[0, 1]).unwrap());
        assert!(!is_tverberg(&cfg, &ColorfulPartition::identity(2, 2), &[]).unwrap());
        assert!(is_tverberg(&cfg, &part, &[5]).is_err());
    }

    /// Two remaining classes with the same orientation already break, so the
    /// smaller orientation group is the cheapest break.
    #[test]
    fn nested_pairs_tolerance() {
        for n in 1..=6usize {
            let cfg = nested(n as i64);
            let rep = partition_tolerance(&cfg, &anti_aligned(n), None).unwrap();
            assert_eq!(rep.tolerance, (n / 2) as i64 - 1, "n={n}");
            let start = if n % 2 == 0 { 0 } else { 1 };
            assert_eq!(rep.break_set, (start..n).step_by(2).collect::<Vec<_>>());
            assert!(open_intersection_empty(&rep.witness).unwrap());
        }
    }

    #[test]
    fn single_radon_pair() {
        let cfg = Configuration::new(1, 2, vec![vec![p(&[0]), p(&[0])]]).unwrap();
        let rep = partition_tolerance(&cfg, &ColorfulPartition::identity(1, 2), None).unwrap();
        assert_eq!(rep.tolerance, 0);
        let apart = Configuration::new(1, 2, vec![vec![p(&[0]), p(&[1])]]).unwrap();
        let rep = partition_tolerance(&apart, &ColorfulPartition::identity(1, 2), None).unwrap();
        assert_eq!(rep.tolerance, -1);
        assert!(rep.break_set.is_empty());
    }

    #[test]
    fn break_set_is_minimal_and_witnessed() {
        let (cfg, _) = generate_perfect_split(4, 2, 2, 1).unwrap();
        for part in all_partitions(4, 2) {
            let rep = partition_tolerance(&cfg, &part, None).unwrap();
            assert_eq!(rep.break_set.len() as i64, rep.tolerance + 1);
            assert!(!is_tverberg(&cfg, &part, &rep.break_set).unwrap());
            for s in (0..4).combinations(rep.break_set.len().saturating_sub(1)) {
                if rep.tolerance >= 0 {
                    assert!(is_tverberg(&cfg, &part, &s).unwrap());
                }
            }
            let mask = removal_mask(4, &rep.break_set).unwrap();
            for (h, pts) in rep.witness.iter().zip(part.parts(&cfg, &mask)) {
                assert!(pts.iter().all(|x| h.contains(x)));
            }
        }
    }

    #[test]
    fn budget_reports_lower_bound() {
        let cfg = nested(4);
        match partition_tolerance(&cfg, &anti_aligned(4), Some(6)) {
            Err(Error::ToleranceBudget { lower_bound, .. }) => assert_eq!(lower_bound, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn best_partition_examples() {
        let cfg = nested(4);
        let (part, rep) = best_partition_tolerance(&cfg, 1 << 20, None).unwrap();
        assert_eq!(rep.tolerance, 1);
        assert_eq!(partition_tolerance(&cfg, &part, None).unwrap(), rep);
        // single class: Tverberg into singletons only if the points coincide
        let same = Configuration::new(2, 3, vec![vec![p(&[1, 1]); 3]]).unwrap();
        assert_eq!(best_partition_tolerance(&same, 100, None).unwrap().1.tolerance, 0);
        let distinct = Configuration::new(2, 3, vec![vec![p(&[1, 1]), p(&[1, 1]), p(&[0, 1])]]).unwrap();
        assert_eq!(best_partition_tolerance(&distinct, 100, None).unwrap().1.tolerance, -1);
        assert!(matches!(
            best_partition_tolerance(&nested(4), 15, None),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn tie_break_is_least_partition() {
        // every partition of two coincident pairs has tolerance 1
        let cfg = Configuration::new(1, 2, vec![vec![p(&[0]), p(&[0])]; 2]).unwrap();
        let (part, rep) = best_partition_tolerance(&cfg, 100, None).unwrap();
        assert_eq!(rep.tolerance, 1);
        assert_eq!(part, ColorfulPartition::identity(2, 2));
    }

    #[test]
    fn hyperplane_breaks_perfect_split_pairs() {
        for n in [2usize, 4] {
            let (cfg, _) = generate_perfect_split(n, 2, 2, 3).unwrap();
            for part in all_partitions(n, 2) {
                let b = hyperplane_break_bound(&cfg, &part).unwrap();
                assert_eq!(b.n_prime, n);
                assert!(b.removed.len() <= n / 2);
                let t = partition_tolerance(&cfg, &part, None).unwrap().tolerance;
                assert!(b.removed.len() as i64 > t);
            }
        }
        let disjoint = Configuration::new(1, 2, (0..4).map(|i| vec![p(&[2 * i]), p(&[2 * i + 1])]).collect()).unwrap();
        let b = hyperplane_break_bound(&disjoint, &ColorfulPartition::identity(4, 2)).unwrap();
        assert_eq!(b.n_prime, 1);
        assert!(b.removed.len() <= 3);
    }

    #[test]
    fn partition_enumeration_order() {
        let all: Vec<_> = all_partitions(2, 2).collect();
        assert_eq!(all.len(), 4);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all_partitions(1, 3).count(), 6);
    }

    #[test]
    fn csv_row() {
        let cfg = nested(2);
        let rep = partition_tolerance(&cfg, &anti_aligned(2), None).unwrap();
        assert_eq!(rep.csv_row(), "0,0,2");
    }
}
