//! Which color classes a family of `r` open half-spaces can split, and the
//! configurations where that number is extremal.
//!
//! A family *can split* a class when its common intersection is empty and
//! the class's points can be matched to the half-spaces with `x_i ∈ H_i`;
//! by Hall's theorem that is the same as every `k` of the half-spaces
//! covering at least `k` of the points.

use itertools::Itertools;
use num::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{
    disjoint_family_containing, open_intersection_empty, realizable_signatures, HalfSpace,
    HalfSpaceFamily, Point, Signature,
};
use crate::lift::pushdown_halfspace;
use crate::rational::{int, ratio, Rational};
use crate::rng::{random_rational, stream};

/// `membership[point][halfspace]`.
pub type Membership = Vec<Vec<bool>>;

pub fn membership(family: &HalfSpaceFamily, class: &[Point]) -> Membership {
    class
        .iter()
        .map(|x| family.iter().map(|h| h.contains(x)).collect())
        .collect()
}

/// Perfect matching point -> half-space (augmenting paths), as `m[point] = halfspace`.
pub fn perfect_matching(membership: &Membership) -> Option<Vec<usize>> {
    let n = membership.len();
    let k = membership.first().map_or(0, Vec::len);
    if n != k {
        return None;
    }
    let mut owner: Vec<Option<usize>> = vec![None; k];
    fn augment(
        p: usize,
        m: &Membership,
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for h in 0..owner.len() {
            if m[p][h] && !seen[h] {
                seen[h] = true;
                if owner[h].is_none_or(|q| augment(q, m, owner, seen)) {
                    owner[h] = Some(p);
                    return true;
                }
            }
        }
        false
    }
    for p in 0..n {
        let mut seen = vec![false; k];
        if !augment(p, membership, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut matching = vec![0; n];
    for (h, p) in owner.iter().enumerate() {
        matching[p.expect("perfect matching covers all half-spaces")] = h;
    }
    Some(matching)
}

/// Smallest set of half-spaces whose union holds fewer points than its size
/// (least in lexicographic order among those of minimum size).
pub fn hall_violator(membership: &Membership) -> Option<Vec<usize>> {
    let k = membership.first().map_or(0, Vec::len);
    (1..=k).find_map(|size| {
        (0..k).combinations(size).find(|hs| {
            let covered = membership
                .iter()
                .filter(|row| hs.iter().any(|&h| row[h]))
                .count();
            covered < hs.len()
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitOutcome {
    /// `matching[i]` is the half-space holding point `i`.
    Yes { matching: Vec<usize> },
    NonemptyIntersection,
    /// Half-spaces whose union contains fewer points than their number.
    HallViolator { halfspaces: Vec<usize> },
}

impl SplitOutcome {
    pub fn is_yes(&self) -> bool {
        matches!(self, SplitOutcome::Yes { .. })
    }
}

/// Membership-only half of `can_split`, for families already known to have
/// empty intersection.
pub fn split_by_membership(m: &Membership) -> SplitOutcome {
    match perfect_matching(m) {
        Some(matching) => SplitOutcome::Yes { matching },
        None => SplitOutcome::HallViolator {
            halfspaces: hall_violator(m).expect("no perfect matching implies a Hall violator"),
        },
    }
}

pub fn can_split(family: &HalfSpaceFamily, class: &[Point]) -> Result<SplitOutcome> {
    if class.len() != family.len() {
        return Err(Error::SizeMismatch {
            expected: family.len(),
            found: class.len(),
        });
    }
    if !open_intersection_empty(family)? {
        return Ok(SplitOutcome::NonemptyIntersection);
    }
    Ok(split_by_membership(&membership(family, class)))
}

pub fn is_perfect_split(family: &HalfSpaceFamily, config: &Configuration) -> Result<bool> {
    if family.len() != config.r() {
        return Err(Error::SizeMismatch {
            expected: config.r(),
            found: family.len(),
        });
    }
    if !open_intersection_empty(family)? {
        return Ok(false);
    }
    let r = config.r();
    Ok(config
        .classes()
        .iter()
        .all(|class| family.iter().all(|h| class.iter().filter(|x| h.contains(x)).count() == r - 1)))
}

/// Family plus, for each split class, its matching.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCertificate {
    pub family: HalfSpaceFamily,
    pub split_classes: Vec<usize>,
    /// `matchings[k][i]`: half-space of point `i` of class `split_classes[k]`.
    pub matchings: Vec<Vec<usize>>,
}

impl SplitCertificate {
    /// Certificate for every class the family can split.
    pub fn for_family(family: HalfSpaceFamily, config: &Configuration) -> Result<Self> {
        if !open_intersection_empty(&family)? {
            return Err(Error::InvalidCertificate("family has nonempty intersection".into()));
        }
        let mut split_classes = Vec::new();
        let mut matchings = Vec::new();
        for (c, class) in config.classes().iter().enumerate() {
            if let Some(m) = perfect_matching(&membership(&family, class)) {
                split_classes.push(c);
                matchings.push(m);
            }
        }
        Ok(Self {
            family,
            split_classes,
            matchings,
        })
    }

    pub fn count(&self) -> usize {
        self.split_classes.len()
    }

    pub fn verify(&self, config: &Configuration) -> Result<()> {
        let r = config.r();
        if self.family.len() != r || self.family.dim() != config.d() {
            return Err(Error::InvalidCertificate("family shape does not match configuration".into()));
        }
        if self.split_classes.len() != self.matchings.len() {
            return Err(Error::InvalidCertificate("one matching per split class required".into()));
        }
        if !open_intersection_empty(&self.family)? {
            return Err(Error::InvalidCertificate("family has nonempty intersection".into()));
        }
        for (&c, m) in self.split_classes.iter().zip(&self.matchings) {
            if c >= config.n_classes() {
                return Err(Error::InvalidCertificate(format!("class {c} out of range")));
            }
            if m.len() != r || !crate::perm::is_permutation(m) {
                return Err(Error::InvalidCertificate(format!("class {c}: matching is not a bijection")));
            }
            for (i, &h) in m.iter().enumerate() {
                if !self.family.halfspaces()[h].contains(&config.class(c)[i]) {
                    return Err(Error::InvalidCertificate(format!(
                        "class {c}: point {i} is not inside half-space {h}"
                    )));
                }
            }
        }
        if !self.split_classes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidCertificate("split classes must be strictly increasing".into()));
        }
        Ok(())
    }
}

fn check_perfect_split_params(r: usize, d: usize) -> Result<()> {
    if r < 2 || d < 1 {
        return Err(Error::InvalidParameter(format!("need r >= 2 and d >= 1, got r={r}, d={d}")));
    }
    if r > d + 1 {
        return Err(Error::InvalidParameter(format!(
            "no perfect split exists for r > d + 1 (r={r}, d={d}): Helly forces d+1 of the half-spaces to share a point of every class"
        )));
    }
    Ok(())
}

/// Perfect split from barycentric functionals of the simplex `0, e_1, .., e_{r-1}`.
///
/// `lambda_0 = 1 - x_1 - .. - x_{r-1}` and `lambda_j = x_j`, so `sum lambda = 1`
/// and `H_j = {lambda_j < 1/r}` can have no common point. Class `k` puts its
/// `j`-th point within an `L∞` jitter of `1/(2 r^2)` around vertex `j`,
/// which keeps it outside `H_j` and inside every other `H_i`.
pub fn generate_perfect_split(n: usize, r: usize, d: usize, seed: u64) -> Result<(Configuration, HalfSpaceFamily)> {
    check_perfect_split_params(r, d)?;
    let inv_r = ratio(1, r as i64);
    let family = (0..r)
        .map(|j| {
            let mut normal = vec![Rational::zero(); d];
            if j == 0 {
                // 1 - sum x < 1/r  <=>  sum x > 1 - 1/r
                for c in normal.iter_mut().take(r - 1) {
                    *c = int(1);
                }
                HalfSpace::open(normal, int(1) - &inv_r)
            } else {
                // x_j < 1/r  <=>  -x_j > -1/r
                normal[j - 1] = int(-1);
                HalfSpace::open(normal, -inv_r.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let family = HalfSpaceFamily::new(family)?;

    const STEPS: i64 = 8;
    let den = STEPS * 2 * (r * r) as i64;
    let mut rng = stream(seed, 0);
    let classes = (0..n)
        .map(|_| {
            (0..r)
                .map(|j| {
                    Point::new(
                        (0..d)
                            .map(|c| {
                                let base = int(i64::from(j > 0 && c == j - 1));
                                base + ratio(rng.gen_range(-STEPS..=STEPS), den)
                            })
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    let config = Configuration::new(d, r, classes)?;
    if !is_perfect_split(&family, &config)? {
        return Err(Error::InternalInconsistency("generated configuration is not a perfect split".into()));
    }
    Ok((config, family))
}

/// `(t, t^2, .., t^d)` for `t = 1..=n`.
pub fn moment_curve_points(n: usize, d: usize) -> Vec<Point> {
    (1..=n as i64)
        .map(|t| Point::new((1..=d as u32).map(|e| int(t.pow(e))).collect()))
        .collect()
}

/// Exact inverse of a square rational matrix, `None` when singular.
fn invert(mut m: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| int(i64::from(i == j))).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&i| !m[i][col].is_zero())?;
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col].clone();
        for j in 0..n {
            m[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let f = m[i][col].clone();
            for j in 0..n {
                let a = &f * &m[col][j];
                m[i][j] -= a;
                let b = &f * &inv[col][j];
                inv[i][j] -= b;
            }
        }
    }
    Some(inv)
}

/// Jitter radius `1/K` such that no hyperplane meets the `L∞` balls of
/// radius `1/K` around `d + 1` of the base points.
///
/// If a hyperplane `a.x = b` meets such balls around `y_0..y_d`, then
/// `e_k = a.y_k - b` has `|e_k| <= |a|_1 / K`, and `(a, -b) = M^{-1} e` for
/// `M` with rows `(y_k, 1)`, giving `|a|_1 <= |M^{-1}|_1 (d+1) |a|_1 / K`.
/// Any `K > (d + 1) max |M^{-1}|_1` is therefore a contradiction.
pub fn cluster_radius_denominator(base: &[Point], d: usize) -> Result<i64> {
    if base.len() < d + 1 {
        return Err(Error::DegenerateBasePoints(format!(
            "need at least d + 1 = {} base points, got {}",
            d + 1,
            base.len()
        )));
    }
    let mut worst = Rational::zero();
    for subset in (0..base.len()).combinations(d + 1) {
        let m: Vec<Vec<Rational>> = subset
            .iter()
            .map(|&k| {
                let mut row = base[k].coords().to_vec();
                row.push(int(1));
                row
            })
            .collect();
        let inv = invert(m).ok_or_else(|| {
            Error::DegenerateBasePoints(format!("points {subset:?} lie on a common hyperplane"))
        })?;
        for j in 0..=d {
            let col: Rational = (0..=d).fold(Rational::zero(), |s, i| s + inv[i][j].abs());
            if col > worst {
                worst = col;
            }
        }
    }
    let bound = (worst * int(d as i64 + 1)).floor().to_integer() + 1;
    i64::try_from(bound).map_err(|_| Error::InvalidParameter("cluster radius denominator overflow".into()))
}

/// Each class is `r` points within `L∞` distance `1/K` of its base point,
/// with `K` from [`cluster_radius_denominator`], so every hyperplane meets
/// the hulls of at most `d` classes.
pub fn generate_clustered_config(r: usize, d: usize, base: &[Point], seed: u64) -> Result<Configuration> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if let Some(p) = base.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.dim(),
        });
    }
    let k = cluster_radius_denominator(base, d)?;
    const STEPS: i64 = 16;
    let mut rng = stream(seed, 1);
    let classes = base
        .iter()
        .map(|y| {
            (0..r)
                .map(|_| {
                    Point::new(
                        y.iter()
                            .map(|c| c + ratio(rng.gen_range(-STEPS..=STEPS), STEPS * k))
                            .collect(),
                    )
                })
                .collect()
        })
        .collect();
    Configuration::new(d, r, classes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMode {
    /// Exhaustive over candidate families; aborts when more than `budget`
    /// families would need to be examined.
    Exact { budget: u64 },
    /// Pushdowns of `trials` random origin half-spaces of `Q^n`; a lower bound.
    MonteCarlo { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capacity {
    pub f: usize,
    pub certificate: SplitCertificate,
    pub exhaustive: bool,
    pub families_examined: u64,
}

/// Any family with empty intersection and no split classes.
fn trivial_family(r: usize, d: usize) -> Result<HalfSpaceFamily> {
    let mut e1 = vec![Rational::zero(); d];
    e1[0] = int(1);
    let neg: Vec<Rational> = e1.iter().map(|c| -c).collect();
    let hs = (0..r)
        .map(|i| HalfSpace::open(if i % 2 == 0 { e1.clone() } else { neg.clone() }, int(0)))
        .collect::<Result<Vec<_>>>()?;
    HalfSpaceFamily::new(hs)
}

/// Can `r` slots with point-sets `slots[j]` (bitmasks over `r` points) be
/// matched perfectly?
fn slots_match(slots: &[u32], r: usize) -> bool {
    let full = (1u32 << r) - 1;
    let mut reach = vec![false; 1 << r];
    reach[0] = true;
    for mask in 0..=full {
        if !reach[mask as usize] {
            continue;
        }
        let j = mask.count_ones() as usize;
        if j == r {
            continue;
        }
        let mut free = slots[j] & !mask;
        while free != 0 {
            let bit = free & free.wrapping_neg();
            reach[(mask | bit) as usize] = true;
            free &= free - 1;
        }
    }
    reach[full as usize]
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// `f(N)`: most classes an `r`-family with empty intersection can split.
///
/// Exact mode is complete: membership in each `H_i` is a realizable signature
/// of the configuration's points, splitting only needs the required points
/// inside each `H_i`, and empty intersection of open half-spaces is certified
/// by weights `sum a_i = 0, sum b_i >= 0` over some subfamily of at most
/// `d + 1` members (Helly plus Motzkin). So the maximum is found by ranking
/// signature multisets by how many classes they would split and realizing
/// the best ones jointly by LP, first in lexicographic order among ties.
pub fn split_capacity(config: &Configuration, mode: CapacityMode) -> Result<Capacity> {
    let (r, d) = (config.r(), config.d());
    if r < 2 {
        return Err(Error::InvalidParameter("split capacity needs r >= 2".into()));
    }
    match mode {
        CapacityMode::Exact { budget } => exact_capacity(config, budget),
        CapacityMode::MonteCarlo { trials, seed } => {
            let n = (r - 1) * (d + 1);
            let mut best = SplitCertificate::for_family(trivial_family(r, d)?, config)?;
            let mut rng = stream(seed, 2);
            for _ in 0..trials {
                let z: Vec<Rational> = (0..n).map(|_| random_rational(&mut rng, 4, 3)).collect();
                let Ok(h) = HalfSpace::open(z, int(0)) else { continue };
                let family = match pushdown_halfspace(&h, r, d) {
                    Ok(f) => f,
                    Err(Error::DegenerateHalfSpace { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let split = config
                    .classes()
                    .iter()
                    .filter(|class| perfect_matching(&membership(&family, class)).is_some())
                    .count();
                if split > best.count() {
                    best = SplitCertificate::for_family(family, config)?;
                }
            }
            Ok(Capacity {
                f: best.count(),
                certificate: best,
                exhaustive: false,
                families_examined: trials,
            })
        }
    }
}

fn exact_capacity(config: &Configuration, budget: u64) -> Result<Capacity> {
    let (r, d) = (config.r(), config.d());
    let points = config.points();
    let cands = realizable_signatures(&points)?;
    let m = cands.len();
    let families = binomial((m + r - 1) as u128, r as u128);
    if families > u128::from(budget) {
        return Err(Error::BudgetExceeded {
            what: "exact split capacity",
            needed: families,
            budget: u128::from(budget),
        });
    }
    let class_mask = (1u128 << r) - 1;
    // per candidate, per class: which of the class's points it holds
    let local: Vec<Vec<u32>> = cands
        .iter()
        .map(|(s, _)| {
            (0..config.n_classes())
                .map(|c| ((s.0 >> (c * r)) & class_mask) as u32)
                .collect()
        })
        .collect();

    let tuples: Vec<Vec<usize>> = (0..m).combinations_with_replacement(r).collect();
    let mut ranked: Vec<(usize, usize)> = tuples
        .par_iter()
        .enumerate()
        .filter_map(|(idx, t)| {
            let common = t.iter().fold(!0u128, |acc, &k| acc & cands[k].0 .0);
            if common != 0 {
                return None;
            }
            let claimed = (0..config.n_classes())
                .filter(|&c| {
                    let slots: Vec<u32> = t.iter().map(|&k| local[k][c]).collect();
                    slots_match(&slots, r)
                })
                .count();
            (claimed > 0).then_some((claimed, idx))
        })
        .collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let supports: Vec<Vec<usize>> = (2..=r.min(d + 1))
        .flat_map(|k| (0..r).combinations(k))
        .collect();
    for &(claimed, idx) in &ranked {
        let t = &tuples[idx];
        for support in &supports {
            let required: Vec<Vec<&Point>> = support
                .iter()
                .map(|&i| {
                    let sig: Signature = cands[t[i]].0;
                    sig.indices().map(|p| &points[p]).collect()
                })
                .collect();
            let Some(realized) = disjoint_family_containing(d, &required)? else {
                continue;
            };
            let mut hs: Vec<HalfSpace> = t.iter().map(|&k| cands[k].1.clone()).collect();
            for (&i, h) in support.iter().zip(realized) {
                hs[i] = h;
            }
            let cert = SplitCertificate::for_family(HalfSpaceFamily::new(hs)?, config)?;
            if cert.count() < claimed {
                return Err(Error::InternalInconsistency(format!(
                    "realized family splits {} classes, expected at least {claimed}",
                    cert.count()
                )));
            }
            return Ok(Capacity {
                f: cert.count(),
                certificate: cert,
                exhaustive: true,
                families_examined: tuples.len() as u64,
            });
        }
    }
    Ok(Capacity {
        f: 0,
        certificate: SplitCertificate::for_family(trivial_family(r, d)?, config)?,
        exhaustive: true,
        families_examined: tuples.len() as u64,
    })
}

/// `N'`: most pairs one hyperplane strictly separates, with an open side
/// of such a hyperplane (no input point on its boundary).
pub fn max_pairs_split_by_hyperplane(config: &Configuration) -> Result<(usize, HalfSpace)> {
    if config.r() != 2 {
        return Err(Error::InvalidParameter(format!("N' is defined for r = 2, got r = {}", config.r())));
    }
    let points = config.points();
    let cands = realizable_signatures(&points)?;
    let mut best: Option<(usize, &HalfSpace)> = None;
    for (sig, h) in &cands {
        let split = (0..config.n_classes())
            .filter(|&c| sig.contains(2 * c) != sig.contains(2 * c + 1))
            .count();
        if best.is_none_or(|(b, _)| split > b) {
            best = Some((split, h));
        }
    }
    let (n, h) = best.ok_or(Error::EmptyInput("configuration"))?;
    debug_assert!(points.iter().all(|p| !h.evaluate(p).is_zero()));
    Ok((n, h.clone()))
}

/// Some subfamily of at most `d + 1` members with empty intersection.
pub fn helly_subfamily(family: &HalfSpaceFamily) -> Result<Option<Vec<usize>>> {
    let k = family.dim() + 1;
    if family.len() <= k {
        return Ok(open_intersection_empty(family)?.then(|| (0..family.len()).collect()));
    }
    for sub in (0..family.len()).combinations(k) {
        if open_intersection_empty(&family.subfamily(&sub))? {
            return Ok(Some(sub));
        }
    }
    Ok(None)
}
