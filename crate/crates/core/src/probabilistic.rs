//! Random colorful choices, the tolerant-partition search, and the labeling
//! attack that breaks a partition using a split certificate.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ColorfulPartition, Configuration};
use crate::error::{Error, Result};
use crate::formulas::{hit_probability, HitMatrix, HitMode};
use crate::geometry::{HalfSpace, Point};
use crate::lift::{choice_to_partition, make_simplex_vectors, pushdown_halfspace, ColorfulChoice};
use crate::perm::{all_permutations, factorial};
use crate::rational::{ratio, Rational};
use crate::rng::{derive_seed, stream};
use crate::splits::{can_split, perfect_matching, Membership, SplitCertificate};
use crate::tolerance::{is_tverberg, partition_tolerance, ToleranceReport};

/// One uniform permutation per class, class `c` drawn from stream `c`.
pub fn random_colorful_choice(config: &Configuration, seed: u64) -> ColorfulChoice {
    let perms = (0..config.n_classes())
        .map(|c| {
            let mut p: Vec<usize> = (0..config.r()).collect();
            p.shuffle(&mut stream(seed, c as u64));
            p
        })
        .collect();
    ColorfulChoice::new(perms).expect("shuffles are permutations")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub seed: u64,
    pub target: i64,
    pub trials_attempted: u64,
    pub per_trial_tolerance: Vec<i64>,
    pub found: bool,
    /// Trial with the largest tolerance, earliest on ties.
    pub best_trial: u64,
    pub best_partition: ColorfulPartition,
    pub best_report: ToleranceReport,
}

impl SearchReport {
    pub const CSV_HEADER: &'static str = "seed,target,trials_attempted,found,best_trial,best_tolerance";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.seed, self.target, self.trials_attempted, self.found, self.best_trial, self.best_report.tolerance
        )
    }
}

/// Random colorful partitions until one has tolerance `>= target`.
///
/// Trial `k` uses the seed `derive_seed(seed, k)`; trials run in parallel
/// batches and the scan stops at the first success, so the report matches a
/// serial run.
pub fn search_tolerant_partition(
    config: &Configuration,
    target: i64,
    trials: u64,
    seed: u64,
    subset_budget: Option<u64>,
) -> Result<SearchReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let batch = (rayon::current_num_threads() as u64 * 2).max(1);
    let mut per_trial = Vec::new();
    let mut best: Option<(u64, ColorfulPartition, ToleranceReport)> = None;
    let mut start = 0;
    'outer: while start < trials {
        let end = (start + batch).min(trials);
        let results: Vec<(ColorfulPartition, ToleranceReport)> = (start..end)
            .into_par_iter()
            .map(|k| {
                let choice = random_colorful_choice(config, derive_seed(seed, k));
                let part = choice_to_partition(&choice, config)?;
                let rep = partition_tolerance(config, &part, subset_budget)?;
                Ok((part, rep))
            })
            .collect::<Result<_>>()?;
        for (k, (part, rep)) in (start..end).zip(results) {
            per_trial.push(rep.tolerance);
            if best.as_ref().is_none_or(|b| rep.tolerance > b.2.tolerance) {
                best = Some((k, part, rep));
            }
            if per_trial.last().copied() >= Some(target) {
                break 'outer;
            }
        }
        start = end;
    }
    let (best_trial, best_partition, best_report) = best.expect("at least one trial");
    Ok(SearchReport {
        seed,
        target,
        trials_attempted: per_trial.len() as u64,
        found: best_report.tolerance >= target,
        per_trial_tolerance: per_trial,
        best_trial,
        best_partition,
        best_report,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    /// `labeling[h]`: the part half-space `h` is made responsible for.
    pub labeling: Vec<usize>,
    pub removed_classes: Vec<usize>,
    pub removed_unsplittable: Vec<usize>,
    pub broken_verified: bool,
    pub split_count: usize,
    /// Removals under every labeling, in lexicographic labeling order.
    pub removals_per_labeling: Vec<usize>,
    #[serde(with = "crate::rational::as_string")]
    pub average_removals: Rational,
}

impl AttackReport {
    pub const CSV_HEADER: &'static str = "split_count,removed,removed_unsplittable,average_removals,broken_verified";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.split_count,
            self.removed_classes.len(),
            self.removed_unsplittable.len(),
            crate::rational::format_rational(&self.average_removals),
            self.broken_verified
        )
    }
}

/// Best labeling of the certificate's half-spaces against `partition`.
///
/// Under labeling `pi` a split class survives only if every point sits in the
/// part its matched half-space is labeled with; exactly one of the `r!`
/// labelings does that for each split class.
pub fn adversary_attack(
    config: &Configuration,
    partition: &ColorfulPartition,
    certificate: &SplitCertificate,
) -> Result<AttackReport> {
    partition.check_against(config)?;
    certificate.verify(config)?;
    let n = config.n_classes();
    let r = config.r();
    let mut matching: Vec<Option<&Vec<usize>>> = vec![None; n];
    for (&c, m) in certificate.split_classes.iter().zip(&certificate.matchings) {
        matching[c] = Some(m);
    }
    let unsplittable: Vec<usize> = (0..n).filter(|&c| matching[c].is_none()).collect();

    let labelings = all_permutations(r);
    let removals_for = |pi: &[usize]| -> Vec<usize> {
        (0..n)
            .filter(|&c| match matching[c] {
                None => true,
                Some(m) => (0..r).any(|i| pi[m[i]] != partition.part_of(c, i)),
            })
            .collect()
    };
    let per_labeling: Vec<Vec<usize>> = labelings.iter().map(|pi| removals_for(pi)).collect();
    let counts: Vec<usize> = per_labeling.iter().map(Vec::len).collect();
    let best = (0..labelings.len()).min_by_key(|&k| (counts[k], k)).expect("r >= 1");
    let removed = per_labeling[best].clone();
    let labeling = labelings[best].clone();

    // what is left of part pi(h) must sit inside H_h
    let mut keep = vec![true; n];
    for &c in &removed {
        keep[c] = false;
    }
    for c in (0..n).filter(|&c| keep[c]) {
        for (i, x) in config.class(c).iter().enumerate() {
            let h = labeling.iter().position(|&l| l == partition.part_of(c, i)).expect("permutation");
            if !certificate.family.halfspaces()[h].contains(x) {
                return Err(Error::InternalInconsistency(format!(
                    "survivor {i} of class {c} is outside its labeled half-space"
                )));
            }
        }
    }
    let broken_verified = !is_tverberg(config, partition, &removed)?;
    if !broken_verified {
        return Err(Error::InternalInconsistency("attack left a Tverberg partition".into()));
    }
    let total: usize = counts.iter().sum();
    Ok(AttackReport {
        labeling,
        removed_classes: removed,
        removed_unsplittable: unsplittable,
        broken_verified,
        split_count: certificate.count(),
        removals_per_labeling: counts,
        average_removals: ratio(total as i64, factorial(r) as i64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitEstimate {
    /// Exact probability, or the sample frequency.
    #[serde(with = "crate::rational::as_string")]
    pub value: Rational,
    pub exact: bool,
    /// `T(j, i) = 1` iff `lift(x_i, j)` lies in `H`.
    pub matrix: HitMatrix,
    /// Whether the pushdown of the complement of `H` can split the class.
    pub complement_splits: bool,
}

/// Probability that a uniform colorful choice of the class's `r`-block meets `H`.
pub fn estimate_hit_expectation(class: &[Point], h: &HalfSpace, mode: EstimateMode) -> Result<HitEstimate> {
    let r = class.len();
    let d = class.first().ok_or(Error::EmptyInput("class"))?.dim();
    let sv = make_simplex_vectors(r)?;
    if h.dim() != sv.lifted_dim(d) {
        return Err(Error::DimensionMismatch {
            expected: sv.lifted_dim(d),
            found: h.dim(),
        });
    }
    if !num::Zero::is_zero(h.offset()) {
        return Err(Error::NonzeroOffset(crate::rational::format_rational(h.offset())));
    }
    let mut rows = vec![0u32; r];
    for (i, x) in class.iter().enumerate() {
        for (j, row) in rows.iter_mut().enumerate() {
            if h.contains(&sv.lift(x, j)?) {
                *row |= 1 << i;
            }
        }
    }
    let matrix = HitMatrix::from_rows(r, rows)?;
    let complement_splits = match pushdown_halfspace(&h.complement(), r, d) {
        Ok(fam) => can_split(&fam, class)?.is_yes(),
        // some f_j(H^c ∩ U_j) is all of Q^d or empty; match on memberships directly
        Err(Error::DegenerateHalfSpace { .. }) => {
            let outside: Membership = (0..r)
                .map(|i| (0..r).map(|j| !matrix.get(j, i)).collect())
                .collect();
            perfect_matching(&outside).is_some()
        }
        Err(e) => return Err(e),
    };
    let (value, exact) = match mode {
        EstimateMode::Exact => (hit_probability(&matrix, HitMode::Enumerate)?, true),
        EstimateMode::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be positive".into()));
            }
            let mut rng = stream(seed, 0);
            let mut sigma: Vec<usize> = (0..r).collect();
            let mut hits = 0i64;
            for _ in 0..trials {
                sigma.shuffle(&mut rng);
                // point i goes to part sigma(i)
                if (0..r).any(|i| matrix.get(sigma[i], i)) {
                    hits += 1;
                }
            }
            (ratio(hits, trials as i64), false)
        }
    };
    Ok(HitEstimate {
        value,
        exact,
        matrix,
        complement_splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::p_r;
    use crate::rational::int;
    use crate::splits::{generate_perfect_split, split_capacity, CapacityMode};
    use crate::tolerance::best_partition_tolerance;

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    fn nested(n: i64) -> Configuration {
        Configuration::new(1, 2, (1..=n).map(|i| vec![p(&[-i]), p(&[i])]).collect()).unwrap()
    }

    #[test]
    fn choice_distribution_r2() {
        let cfg = nested(1);
        let swaps = (0..6000u64)
            .filter(|&s| random_colorful_choice(&cfg, s).perms()[0] == vec![1, 0])
            .count() as f64;
        // 3 sigma of Binomial(6000, 1/2)
        assert!((swaps - 3000.0).abs() < 3.0 * (1500f64).sqrt(), "{swaps}");
    }

    #[test]
    fn choice_support_r3_and_determinism() {
        let cfg = Configuration::new(1, 3, vec![vec![p(&[0]), p(&[1]), p(&[2])]]).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for s in 0..200 {
            seen.insert(random_colorful_choice(&cfg, s).perms()[0].clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(random_colorful_choice(&cfg, 9), random_colorful_choice(&cfg, 9));
    }

    #[test]
    fn search_nested_pairs() {
        let cfg = nested(6);
        let rep = search_tolerant_partition(&cfg, 2, 200, 5, None).unwrap();
        assert!(rep.found);
        assert_eq!(rep, search_tolerant_partition(&cfg, 2, 200, 5, None).unwrap());
        assert_eq!(rep.trials_attempted as usize, rep.per_trial_tolerance.len());
        // best possible for six nested pairs is 2
        let miss = search_tolerant_partition(&cfg, 3, 40, 5, None).unwrap();
        assert!(!miss.found);
        assert_eq!(miss.trials_attempted, 40);
        assert_eq!(miss.best_report.tolerance, *miss.per_trial_tolerance.iter().max().unwrap());
    }

    #[test]
    fn search_perfect_split_never_exceeds_cap() {
        let (cfg, _) = generate_perfect_split(4, 2, 2, 7).unwrap();
        let rep = search_tolerant_partition(&cfg, 2, 30, 1, None).unwrap();
        assert!(!rep.found);
        let (_, best) = best_partition_tolerance(&cfg, 1 << 10, None).unwrap();
        let target0 = search_tolerant_partition(&cfg, 0, 60, 2, None).unwrap();
        assert_eq!(target0.found, best.tolerance >= 0);
    }

    #[test]
    fn attack_perfect_split() {
        let (cfg, fam) = generate_perfect_split(4, 2, 2, 4).unwrap();
        let cert = SplitCertificate::for_family(fam, &cfg).unwrap();
        assert_eq!(cert.count(), 4);
        for part in crate::tolerance::all_partitions(4, 2) {
            let rep = adversary_attack(&cfg, &part, &cert).unwrap();
            assert!(rep.broken_verified);
            assert!(rep.removed_classes.len() <= 2);
            assert_eq!(rep.average_removals, int(2));
        }
    }

    #[test]
    fn attack_average_identity() {
        let cfg = Configuration::new(
            1,
            2,
            vec![vec![p(&[-1]), p(&[1])], vec![p(&[3]), p(&[4])], vec![p(&[2]), p(&[-2])]],
        )
        .unwrap();
        let cap = split_capacity(&cfg, CapacityMode::Exact { budget: 1 << 20 }).unwrap();
        let f = cap.f as i64;
        for part in crate::tolerance::all_partitions(3, 2) {
            let rep = adversary_attack(&cfg, &part, &cap.certificate).unwrap();
            assert_eq!(rep.average_removals, int(3 - f) + Rational::from_integer(f.into()) * ratio(1, 2));
            assert_eq!(rep.removed_unsplittable.len() as i64, 3 - f);
        }
    }

    #[test]
    fn hit_expectation_examples() {
        // r = 2, d = 1: lifted dimension 2
        let class = [p(&[-1]), p(&[1])];
        let h = HalfSpace::closed(vec![int(1), int(0)], int(0)).unwrap();
        let e = estimate_hit_expectation(&class, &h, EstimateMode::Exact).unwrap();
        assert!(e.value >= p_r(2).unwrap() && e.value <= int(1));
        if !e.complement_splits {
            assert_eq!(e.value, int(1));
        }
        let mc = estimate_hit_expectation(&class, &h, EstimateMode::MonteCarlo { trials: 400, seed: 1 }).unwrap();
        assert!(!mc.exact);
        let bad = HalfSpace::closed(vec![int(1)], int(0)).unwrap();
        assert!(estimate_hit_expectation(&class, &bad, EstimateMode::Exact).is_err());
    }
}
