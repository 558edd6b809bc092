//! Permutation hit probabilities and the closed-form tolerance bound.
//!
//! `p_r` is the probability that a uniform permutation of `[r]` has a fixed
//! point. `q(r, d)` is the least probability that a uniform permutation hits a
//! one of an `r x r` 0/1 matrix whose columns are all nonempty and covered by
//! some `d + 1` rows; the minimizer spreads single-one columns evenly over
//! `d + 1` rows.

use itertools::Itertools;
use num::{BigInt, BigUint, One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, to_decimal, Rational};
use crate::rng::stream;

fn big_factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `D_r` by `D_n = (n - 1)(D_{n-1} + D_{n-2})`.
pub fn derangements(r: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::one(), BigInt::zero()); // D_0, D_1
    if r == 0 {
        return a;
    }
    for n in 2..=r {
        let next = BigInt::from(n - 1) * (&a + &b);
        a = b;
        b = next;
    }
    b
}

fn check_r(r: usize) -> Result<()> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    Ok(())
}

pub fn p_r(r: usize) -> Result<Rational> {
    check_r(r)?;
    Ok(int(1) - Rational::new(derangements(r), big_factorial(r)))
}

/// `1 - sum_{k=0}^{r} (-1)^k / k!`.
pub fn p_r_inclusion_exclusion(r: usize) -> Result<Rational> {
    check_r(r)?;
    let sum = (0..=r).fold(Rational::zero(), |s, k| {
        let term = Rational::new(BigInt::one(), big_factorial(k));
        if k % 2 == 0 {
            s + term
        } else {
            s - term
        }
    });
    Ok(int(1) - sum)
}

/// `r x r` 0/1 matrix, row `i` stored as a bitmask over columns.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HitMatrix {
    r: usize,
    rows: Vec<u32>,
}

impl HitMatrix {
    pub const MAX_R: usize = 31;

    pub fn from_rows(r: usize, rows: Vec<u32>) -> Result<Self> {
        if r == 0 || r > Self::MAX_R {
            return Err(Error::InvalidParameter(format!("matrix size must be in 1..={}", Self::MAX_R)));
        }
        if rows.len() != r {
            return Err(Error::SizeMismatch {
                expected: r,
                found: rows.len(),
            });
        }
        let full = (1u32 << r) - 1;
        if rows.iter().any(|&row| row & !full != 0) {
            return Err(Error::InvalidParameter("row has entries beyond column r".into()));
        }
        Ok(Self { r, rows })
    }

    pub fn from_entries(entries: &[Vec<bool>]) -> Result<Self> {
        let r = entries.len();
        if let Some(row) = entries.iter().find(|row| row.len() != r) {
            return Err(Error::SizeMismatch {
                expected: r,
                found: row.len(),
            });
        }
        let rows = entries
            .iter()
            .map(|row| row.iter().enumerate().fold(0, |m, (j, &b)| m | (u32::from(b) << j)))
            .collect();
        Self::from_rows(r, rows)
    }

    pub fn identity(r: usize) -> Result<Self> {
        Self::from_rows(r, (0..r).map(|i| 1 << i).collect())
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn entries(&self) -> Vec<Vec<bool>> {
        (0..self.r).map(|i| (0..self.r).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn row_counts(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.count_ones() as usize).collect()
    }

    fn full(&self) -> u32 {
        (1u32 << self.r) - 1
    }

    /// Every column has a one.
    pub fn columns_nonempty(&self) -> bool {
        self.rows.iter().fold(0, |m, &r| m | r) == self.full()
    }

    /// Least (lexicographic) set of at most `k` rows covering every column.
    pub fn covering_rows(&self, k: usize) -> Option<Vec<usize>> {
        let k = k.min(self.r);
        (0..self.r)
            .combinations(k)
            .find(|rows| rows.iter().fold(0, |m, &i| m | self.rows[i]) == self.full())
    }

    pub fn is_valid(&self, d: usize) -> bool {
        self.columns_nonempty() && self.covering_rows(d + 1).is_some()
    }

    pub fn single_one_per_column(&self) -> bool {
        self.columns_nonempty() && self.rows.iter().map(|r| r.count_ones()).sum::<u32>() as usize == self.r
    }

    /// Single one per column, ones in exactly `d + 1` rows, each holding
    /// `floor(r/(d+1))` or `ceil(r/(d+1))` of them.
    pub fn is_extremal_form(&self, d: usize) -> bool {
        if !self.single_one_per_column() {
            return false;
        }
        let used: Vec<usize> = self.row_counts().into_iter().filter(|&c| c > 0).collect();
        let (lo, hi) = (self.r / (d + 1), self.r.div_ceil(d + 1));
        used.len() == d + 1 && used.iter().all(|&c| c == lo || c == hi)
    }

    /// Row-major entries, the order "lexicographically least" refers to.
    fn key(&self) -> Vec<bool> {
        self.entries().concat()
    }
}

/// Balanced single-one-per-column matrix: the first `r mod (d+1)` rows get
/// `ceil(r/(d+1))` contiguous columns, the rest of rows `0..=d` get the floor.
pub fn extremal_matrix(r: usize, d: usize) -> Result<HitMatrix> {
    if r <= d + 1 {
        return Err(Error::InvalidParameter(format!("extremal matrix needs r > d + 1, got r={r}, d={d}")));
    }
    let rows_used = d + 1;
    let (base, extra) = (r / rows_used, r % rows_used);
    let mut rows = vec![0u32; r];
    let mut col = 0;
    for (i, row) in rows.iter_mut().enumerate().take(rows_used) {
        let count = base + usize::from(i < extra);
        *row = ((1u32 << count) - 1) << col;
        col += count;
    }
    HitMatrix::from_rows(r, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitMode {
    Enumerate,
    Rook,
}

/// Permutations with no `(i, sigma(i))` on a one.
fn count_avoiders(t: &HitMatrix) -> u128 {
    fn go(t: &HitMatrix, i: usize, used: u32) -> u128 {
        if i == t.r {
            return 1;
        }
        (0..t.r)
            .filter(|&j| used >> j & 1 == 0 && !t.get(i, j))
            .map(|j| go(t, i + 1, used | 1 << j))
            .sum()
    }
    go(t, 0, 0)
}

fn elementary_symmetric(values: &[usize]) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); values.len() + 1];
    e[0] = BigInt::one();
    for (n, &v) in values.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            let add = &e[k - 1] * BigInt::from(v);
            e[k] += add;
        }
    }
    e
}

pub fn hit_probability(t: &HitMatrix, mode: HitMode) -> Result<Rational> {
    let r = t.r;
    let total = big_factorial(r);
    let avoid = match mode {
        HitMode::Enumerate => {
            if r > 10 {
                return Err(Error::InvalidParameter(format!("enumerate mode supports r <= 10, got {r}")));
            }
            BigInt::from(count_avoiders(t))
        }
        HitMode::Rook => {
            if (0..r).any(|j| t.rows.iter().filter(|&&row| row >> j & 1 == 1).count() > 1) {
                return Err(Error::InvalidParameter("rook mode needs at most one 1 per column".into()));
            }
            // k non-attacking rooks on the ones: e_k of the row counts.
            let e = elementary_symmetric(&t.row_counts());
            e.iter().enumerate().fold(BigInt::zero(), |s, (k, ek)| {
                let term = ek * big_factorial(r - k);
                if k % 2 == 0 {
                    s + term
                } else {
                    s - term
                }
            })
        }
    };
    Ok(int(1) - Rational::new(avoid, total))
}

pub fn q(r: usize, d: usize) -> Result<Rational> {
    let t = extremal_matrix(r, d)?;
    let mode = if r <= 10 { HitMode::Enumerate } else { HitMode::Rook };
    hit_probability(&t, mode)
}

/// Probability that a uniform permutation misses every one of the extremal matrix.
pub fn avoidance(r: usize, d: usize) -> Result<Rational> {
    Ok(int(1) - q(r, d)?)
}

/// `sum_{k=0}^{d+1} (-1)^k C(d+1, k) (r/(d+1))^k (r-k)!/r!` for `(d+1) | r`.
///
/// This counts permutations avoiding the extremal matrix, so it equals
/// [`avoidance`], not `q`.
pub fn displayed_sum(r: usize, d: usize) -> Result<Rational> {
    if r <= d + 1 || !r.is_multiple_of(d + 1) {
        return Err(Error::InvalidParameter(format!("need r > d + 1 and (d + 1) | r, got r={r}, d={d}")));
    }
    let m = BigInt::from(r / (d + 1));
    let total = big_factorial(r);
    let sum = (0..=d + 1).fold(BigInt::zero(), |s, k| {
        let binom = BigInt::from(num::integer::binomial(d + 1, k));
        let term = binom * num::pow(m.clone(), k) * big_factorial(r - k);
        if k % 2 == 0 {
            s + term
        } else {
            s - term
        }
    });
    Ok(Rational::new(sum, total))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinHitReport {
    #[serde(with = "crate::rational::as_string")]
    pub value: Rational,
    /// Lexicographically least minimizer found.
    pub matrix: HitMatrix,
    pub exhaustive: bool,
    pub matrices_examined: u64,
    /// Some minimizer has the balanced single-one-per-column form.
    pub extremal_minimizer: bool,
}

/// Minimum hit probability over matrices satisfying both conditions.
///
/// Exhaustive over all `2^(r^2)` matrices for `r <= 4`; otherwise a seeded
/// random search over `samples` valid matrices seeded with the extremal one.
pub fn min_hit_over_valid_matrices(r: usize, d: usize, samples: u64, seed: u64) -> Result<MinHitReport> {
    if r <= d + 1 {
        return Err(Error::InvalidParameter(format!("need r > d + 1, got r={r}, d={d}")));
    }
    let better = |a: &(Rational, HitMatrix), b: &(Rational, HitMatrix)| {
        a.0 < b.0 || (a.0 == b.0 && a.1.key() < b.1.key())
    };
    if r <= 4 {
        let total = 1u64 << (r * r);
        let mask = (1u32 << r) - 1;
        let decode = |bits: u64| {
            let rows = (0..r).map(|i| (bits >> (i * r)) as u32 & mask).collect();
            HitMatrix::from_rows(r, rows).expect("in range")
        };
        let evaluated: Vec<(Rational, HitMatrix, bool)> = (0..total)
            .into_par_iter()
            .filter_map(|bits| {
                let t = decode(bits);
                if !t.is_valid(d) {
                    return None;
                }
                let p = hit_probability(&t, HitMode::Enumerate).expect("r <= 4");
                let ext = t.is_extremal_form(d);
                Some((p, t, ext))
            })
            .collect();
        let mut best: Option<(Rational, HitMatrix)> = None;
        for (p, t, _) in &evaluated {
            let cand = (p.clone(), t.clone());
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
        let (value, matrix) = best.ok_or_else(|| Error::InternalInconsistency("no valid matrix".into()))?;
        let extremal_minimizer = evaluated.iter().any(|(p, _, ext)| *ext && *p == value);
        return Ok(MinHitReport {
            value,
            matrix,
            exhaustive: true,
            matrices_examined: total,
            extremal_minimizer,
        });
    }

    let ext = extremal_matrix(r, d)?;
    let mut best = (hit_probability(&ext, HitMode::Rook)?, ext);
    let mut extremal_minimizer = true;
    let mut rng = stream(seed, 3);
    let mut examined = 1;
    let mode = if r <= 10 { HitMode::Enumerate } else { HitMode::Rook };
    for _ in 0..samples {
        // Random valid matrix: each column gets one random row among d + 1
        // chosen rows, plus sparse extra ones (rook mode cannot score those).
        let chosen: Vec<usize> = rand::seq::index::sample(&mut rng, r, d + 1).into_vec();
        let mut rows = vec![0u32; r];
        for j in 0..r {
            rows[chosen[rng.gen_range(0..d + 1)]] |= 1 << j;
        }
        if mode == HitMode::Enumerate {
            for row in rows.iter_mut() {
                if rng.gen_bool(0.1) {
                    *row |= 1 << rng.gen_range(0..r);
                }
            }
        }
        let t = HitMatrix::from_rows(r, rows)?;
        let p = hit_probability(&t, mode)?;
        examined += 1;
        let cand = (p, t);
        if better(&cand, &best) {
            extremal_minimizer = cand.1.is_extremal_form(d);
            best = cand;
        } else if cand.0 == best.0 && cand.1.is_extremal_form(d) {
            extremal_minimizer = true;
        }
    }
    Ok(MinHitReport {
        value: best.0,
        matrix: best.1,
        exhaustive: false,
        matrices_examined: examined,
        extremal_minimizer,
    })
}

/// The constant the tolerance bound uses: `p_r` for `r <= d + 1`, else `q(r, d)`.
pub fn bound_constant(r: usize, d: usize) -> Result<Rational> {
    if r <= d + 1 {
        p_r(r)
    } else {
        q(r, d)
    }
}

/// Most removals the labeling attack needs: `N - ceil(f / r!)`.
pub fn attack_removal_bound(n: usize, r: usize, f: usize) -> i64 {
    let fact = crate::perm::factorial(r);
    n as i64 - (f as u128).div_ceil(fact) as i64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: u64,
    pub r: usize,
    pub d: usize,
    pub f: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToleranceBound {
    pub t: i64,
    #[serde(with = "crate::rational::as_string")]
    pub constant: Rational,
    /// Certified enclosure of the real-valued bound.
    #[serde(with = "crate::rational::as_string")]
    pub lower: Rational,
    #[serde(with = "crate::rational::as_string")]
    pub upper: Rational,
}

const FRAC_BITS: u32 = 64;

fn scale() -> BigInt {
    BigInt::one() << FRAC_BITS
}

fn round_down(q: &Rational) -> Rational {
    let s = scale();
    Rational::new((q * Rational::from(s.clone())).floor().to_integer(), s)
}

fn round_up(q: &Rational) -> Rational {
    let s = scale();
    Rational::new((q * Rational::from(s.clone())).ceil().to_integer(), s)
}

/// Enclosure of `2 atanh(z)` for `0 <= z <= 1/3` with width below `2^-80`.
fn two_atanh(z: &Rational) -> (Rational, Rational) {
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    let eps = Rational::new(BigInt::one(), BigInt::one() << 80);
    let mut k = 1i64;
    loop {
        sum += &power / int(k);
        power *= &z2;
        // remaining terms are bounded by a geometric series
        let tail = &power / (int(k + 2) * (int(1) - &z2));
        if tail < eps {
            return (&sum * int(2), (sum + tail) * int(2));
        }
        k += 2;
    }
}

/// Outward-rounded enclosure of `ln(y)` for an integer `y >= 1`.
pub fn ln_interval(y: &BigUint) -> Result<(Rational, Rational)> {
    if y.is_zero() {
        return Err(Error::InvalidParameter("ln of zero".into()));
    }
    let k = y.bits() - 1; // y = 2^k m, 1 <= m < 2
    let m = Rational::new(BigInt::from(y.clone()), BigInt::one() << k);
    let (l2_lo, l2_hi) = two_atanh(&Rational::new(BigInt::one(), BigInt::from(3)));
    let z = (&m - int(1)) / (&m + int(1));
    let (lm_lo, lm_hi) = two_atanh(&z);
    let kk = Rational::from(BigInt::from(k));
    Ok((round_down(&(&kk * l2_lo + lm_lo)), round_up(&(kk * l2_hi + lm_hi))))
}

/// Enclosure of `sqrt(x)` for `x >= 0` on the `2^-64` grid.
fn sqrt_interval(lo: &Rational, hi: &Rational) -> (Rational, Rational) {
    let s2 = Rational::from(BigInt::one() << (2 * FRAC_BITS));
    let lo_scaled = (lo * &s2).floor().to_integer().max(BigInt::zero());
    let hi_scaled = (hi * &s2).ceil().to_integer();
    let lo_root = lo_scaled.sqrt();
    let mut hi_root = hi_scaled.sqrt();
    if &hi_root * &hi_root < hi_scaled {
        hi_root += 1;
    }
    (Rational::new(lo_root, scale()), Rational::new(hi_root, scale()))
}

/// `floor` of a certified lower bound on
/// `N - (1 - c) f - sqrt((d+1)(r-1) f ln(N r^2) / 2) - 1`.
pub fn tolerance_bound(inputs: &BoundInputs) -> Result<ToleranceBound> {
    let BoundInputs { n, r, d, f } = *inputs;
    if n < 1 || f > n || r < 1 || d < 1 {
        return Err(Error::InvalidParameter(format!(
            "need N >= 1, r >= 1, d >= 1 and 0 <= f <= N, got N={n}, r={r}, d={d}, f={f}"
        )));
    }
    let c = bound_constant(r, d)?;
    let (ln_lo, ln_hi) = ln_interval(&(BigUint::from(n) * BigUint::from(r * r)))?;
    let coef = Rational::new(BigInt::from((d + 1) * (r - 1)) * BigInt::from(f), BigInt::from(2));
    let (root_lo, root_hi) = sqrt_interval(&(&coef * ln_lo), &(&coef * ln_hi));
    let linear = Rational::from(BigInt::from(n)) - (int(1) - &c) * Rational::from(BigInt::from(f)) - int(1);
    let lower = &linear - root_hi;
    let upper = linear - root_lo;
    let t = lower.floor().to_integer().to_i64().ok_or_else(|| Error::InvalidParameter("bound overflows i64".into()))?;
    Ok(ToleranceBound {
        t,
        constant: c,
        lower,
        upper,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub r: usize,
    pub d: usize,
    #[serde(with = "crate::rational::as_string")]
    pub p_r: Rational,
    /// `None` when `r <= d + 1`.
    pub q: Option<String>,
    pub avoidance: Option<String>,
    pub extremal_row_counts: Option<Vec<usize>>,
}

impl ConstantsRow {
    pub const CSV_HEADER: &'static str = "r,d,p_r,p_r_decimal,q,q_decimal,avoidance,avoidance_decimal,extremal_row_counts";

    pub fn csv_row(&self) -> String {
        let dec = |s: &Option<String>| {
            s.as_deref()
                .map(|v| to_decimal(&crate::rational::parse_rational(v).expect("own output"), 12))
                .unwrap_or_default()
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.r,
            self.d,
            crate::rational::format_rational(&self.p_r),
            to_decimal(&self.p_r, 12),
            self.q.clone().unwrap_or_default(),
            dec(&self.q),
            self.avoidance.clone().unwrap_or_default(),
            dec(&self.avoidance),
            self.extremal_row_counts
                .as_ref()
                .map(|c| c.iter().filter(|&&x| x > 0).join(";"))
                .unwrap_or_default(),
        )
    }
}

pub fn constants_table(max_r: usize, max_d: usize) -> Result<Vec<ConstantsRow>> {
    let mut rows = Vec::new();
    for r in 2..=max_r {
        for d in 1..=max_d {
            let p = p_r(r)?;
            let (q_s, a_s, counts) = if r > d + 1 {
                let qv = q(r, d)?;
                (
                    Some(crate::rational::format_rational(&qv)),
                    Some(crate::rational::format_rational(&(int(1) - qv))),
                    Some(extremal_matrix(r, d)?.row_counts()),
                )
            } else {
                (None, None, None)
            };
            rows.push(ConstantsRow {
                r,
                d,
                p_r: p,
                q: q_s,
                avoidance: a_s,
                extremal_row_counts: counts,
            });
        }
    }
    Ok(rows)
}
