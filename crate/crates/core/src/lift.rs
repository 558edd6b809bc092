//! The tensor lift `g_i(x) = v_i ⊗ (x, 1)` into `Q^n`, `n = (r-1)(d+1)`.
//!
//! Simplex vectors are `v_i = e_i` for `i < r-1` and `v_{r-1} = -(e_0 + .. + e_{r-2})`
//! (0-based). An `(r-1) x (d+1)` matrix is flattened row-major, so entry
//! `(a, b)` lives at index `a * (d + 1) + b`.

use num::Zero;

use crate::config::{ColorfulPartition, Configuration};
use crate::error::{Error, Result};
use crate::geometry::{captures_origin, convex_hulls_intersect, HalfSpace, HalfSpaceFamily, Point};
use crate::rational::{int, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexVectors {
    vectors: Vec<Vec<Rational>>,
    norms_sq: Vec<Rational>,
}

pub fn make_simplex_vectors(r: usize) -> Result<SimplexVectors> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!("need r >= 2, got {r}")));
    }
    let mut vectors: Vec<Vec<Rational>> = (0..r - 1)
        .map(|i| (0..r - 1).map(|a| int(i64::from(a == i))).collect())
        .collect();
    vectors.push(vec![int(-1); r - 1]);
    let norms_sq = vectors
        .iter()
        .map(|v| v.iter().fold(Rational::zero(), |s, c| s + c * c))
        .collect();
    Ok(SimplexVectors { vectors, norms_sq })
}

impl SimplexVectors {
    pub fn r(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, i: usize) -> &[Rational] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<Rational>] {
        &self.vectors
    }

    pub fn lifted_dim(&self, d: usize) -> usize {
        (self.r() - 1) * (d + 1)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.r() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.r(),
            });
        }
        Ok(())
    }

    /// `v_i ⊗ (x, 1)`, flattened row-major.
    pub fn lift(&self, x: &Point, i: usize) -> Result<Point> {
        self.check_index(i)?;
        let d = x.dim();
        let mut out = Vec::with_capacity(self.lifted_dim(d));
        for va in &self.vectors[i] {
            out.extend(x.iter().map(|xb| va * xb));
            out.push(va.clone());
        }
        Ok(Point::new(out))
    }

    /// `f_i(y)`: `Y^T v_i / |v_i|^2` with the last coordinate dropped.
    pub fn project(&self, y: &Point, i: usize, d: usize) -> Result<Point> {
        self.check_index(i)?;
        if y.dim() != self.lifted_dim(d) {
            return Err(Error::DimensionMismatch {
                expected: self.lifted_dim(d),
                found: y.dim(),
            });
        }
        let v = &self.vectors[i];
        let out = (0..d)
            .map(|b| {
                let s = v
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |s, (a, va)| s + va * &y[a * (d + 1) + b]);
                s / &self.norms_sq[i]
            })
            .collect();
        Ok(Point::new(out))
    }

    /// Is `y` in the affine space `U_i = g_i(Q^d)`?
    pub fn in_affine_space(&self, y: &Point, i: usize, d: usize) -> Result<bool> {
        let x = self.project(y, i, d)?;
        Ok(&self.lift(&x, i)? == y)
    }
}

/// The `r x r` grid of one class: entry `(i, j) = lift(x^i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RBlock {
    pub class_index: usize,
    grid: Vec<Vec<Point>>,
}

impl RBlock {
    pub fn get(&self, row: usize, col: usize) -> &Point {
        &self.grid[row][col]
    }

    pub fn row(&self, row: usize) -> &[Point] {
        &self.grid[row]
    }

    pub fn column(&self, col: usize) -> Vec<Point> {
        self.grid.iter().map(|row| row[col].clone()).collect()
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    /// The points `(i, sigma(i))`.
    pub fn choose(&self, sigma: &[usize]) -> Vec<Point> {
        sigma.iter().enumerate().map(|(i, &j)| self.grid[i][j].clone()).collect()
    }
}

pub fn build_r_block(sv: &SimplexVectors, class_index: usize, class: &[Point]) -> Result<RBlock> {
    if class.len() != sv.r() {
        return Err(Error::SizeMismatch {
            expected: sv.r(),
            found: class.len(),
        });
    }
    let grid = class
        .iter()
        .map(|x| (0..sv.r()).map(|j| sv.lift(x, j)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    // Rows sum to zero exactly, so the uniform weights capture the origin.
    for row in &grid {
        let dim = row[0].dim();
        let zero_sum = (0..dim).all(|k| row.iter().fold(Rational::zero(), |s, p| s + &p[k]).is_zero());
        if !zero_sum {
            return Err(Error::InternalInconsistency("r-block row does not sum to zero".into()));
        }
    }
    Ok(RBlock { class_index, grid })
}

/// One permutation per class: row `i` of block `c` picks column `perms[c][i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColorfulChoice {
    perms: Vec<Vec<usize>>,
}

impl ColorfulChoice {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        // Same invariant as a colorful partition: one entry per row and column.
        ColorfulPartition::new(perms.clone())?;
        Ok(Self { perms })
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }
}

/// Point `i` of class `c` goes to part `sigma_c(i)`.
pub fn choice_to_partition(choice: &ColorfulChoice, config: &Configuration) -> Result<ColorfulPartition> {
    let p = ColorfulPartition::new(choice.perms.clone())?;
    p.check_against(config)?;
    Ok(p)
}

pub fn partition_to_choice(partition: &ColorfulPartition) -> ColorfulChoice {
    ColorfulChoice {
        perms: partition.perms().to_vec(),
    }
}

/// The lifted points `lift(x^{c,i}, part(c, i))` of the kept classes.
pub fn lifted_choice(
    sv: &SimplexVectors,
    config: &Configuration,
    partition: &ColorfulPartition,
    removed: &[bool],
) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (c, class) in config.classes().iter().enumerate() {
        if removed.get(c).copied().unwrap_or(false) {
            continue;
        }
        for (i, x) in class.iter().enumerate() {
            out.push(sv.lift(x, partition.part_of(c, i))?);
        }
    }
    Ok(out)
}

/// Decide Tverberg-ness both downstairs (hull intersection in `Q^d`) and
/// upstairs (origin capture in `Q^n`); the two must agree.
pub fn capture_equivalence_check(config: &Configuration, partition: &ColorfulPartition) -> Result<bool> {
    partition.check_against(config)?;
    if config.n_classes() == 0 {
        return Ok(false);
    }
    let sv = make_simplex_vectors(config.r())?;
    let upstairs = captures_origin(&lifted_choice(&sv, config, partition, &[])?)?;
    let parts = partition.parts(config, &[]);
    let downstairs = convex_hulls_intersect(&parts)?.intersects();
    if upstairs != downstairs {
        return Err(Error::InternalInconsistency(format!(
            "lifted capture ({upstairs}) disagrees with hull intersection ({downstairs})"
        )));
    }
    Ok(upstairs)
}

/// Push an origin half-space `<Z, y> > 0` of `Q^n` down to the `r` half-spaces
/// `f_i(H ∩ U_i)` of `Q^d`: `sum_j x_j <v_i, Z_j> > -<v_i, Z_{d+1}>`.
pub fn pushdown_halfspace(h: &HalfSpace, r: usize, d: usize) -> Result<HalfSpaceFamily> {
    let sv = make_simplex_vectors(r)?;
    let n = sv.lifted_dim(d);
    if h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.dim(),
        });
    }
    if !h.offset().is_zero() {
        return Err(Error::NonzeroOffset(crate::rational::format_rational(h.offset())));
    }
    let z = h.normal();
    let column_dot = |i: usize, b: usize| {
        sv.vector(i)
            .iter()
            .enumerate()
            .fold(Rational::zero(), |s, (a, va)| s + va * &z[a * (d + 1) + b])
    };
    let family = (0..r)
        .map(|i| {
            let normal: Vec<Rational> = (0..d).map(|b| column_dot(i, b)).collect();
            HalfSpace::new(normal, -column_dot(i, d), h.is_open())
                .map_err(|_| Error::DegenerateHalfSpace { index: i })
        })
        .collect::<Result<Vec<_>>>()?;
    HalfSpaceFamily::new(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{closed_union_covers_space, open_intersection_empty};
    use crate::rational::ratio;

    fn p(c: &[i64]) -> Point {
        Point::from_ints(c)
    }

    #[test]
    fn simplex_vectors() {
        let sv = make_simplex_vectors(2).unwrap();
        assert_eq!(sv.vectors(), &[vec![int(1)], vec![int(-1)]]);
        let sv = make_simplex_vectors(3).unwrap();
        assert_eq!(
            sv.vectors(),
            &[vec![int(1), int(0)], vec![int(0), int(1)], vec![int(-1), int(-1)]]
        );
        for r in 2..7 {
            let sv = make_simplex_vectors(r).unwrap();
            for a in 0..r - 1 {
                assert!(sv.vectors().iter().fold(Rational::zero(), |s, v| s + &v[a]).is_zero());
            }
        }
        assert!(make_simplex_vectors(1).is_err());
    }

    #[test]
    fn lift_examples() {
        let sv = make_simplex_vectors(2).unwrap();
        assert_eq!(sv.lift(&p(&[3]), 0).unwrap(), p(&[3, 1]));
        assert_eq!(sv.lift(&p(&[3]), 1).unwrap(), p(&[-3, -1]));
        let sv = make_simplex_vectors(3).unwrap();
        assert_eq!(sv.lift(&p(&[1, 2]), 0).unwrap(), p(&[1, 2, 1, 0, 0, 0]));
        assert!(matches!(sv.lift(&p(&[1, 2]), 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn project_examples() {
        let sv = make_simplex_vectors(2).unwrap();
        assert_eq!(sv.project(&p(&[3, 1]), 0, 1).unwrap(), p(&[3]));
        assert_eq!(sv.project(&p(&[3, 1]), 1, 1).unwrap(), p(&[-3]));
        let sv = make_simplex_vectors(4).unwrap();
        let x = Point::new(vec![ratio(-5, 7), ratio(2, 3)]);
        for i in 0..4 {
            let y = sv.lift(&x, i).unwrap();
            assert_eq!(sv.project(&y, i, 2).unwrap(), x);
            assert!(sv.in_affine_space(&y, i, 2).unwrap());
        }
        assert!(!sv.in_affine_space(&sv.lift(&x, 0).unwrap(), 1, 2).unwrap());
    }

    #[test]
    fn r_block_example() {
        let sv = make_simplex_vectors(2).unwrap();
        let b = build_r_block(&sv, 0, &[p(&[0]), p(&[1])]).unwrap();
        assert_eq!(b.row(0), &[p(&[0, 1]), p(&[0, -1])]);
        assert_eq!(b.row(1), &[p(&[1, 1]), p(&[-1, -1])]);
        for i in 0..2 {
            assert!(captures_origin(b.row(i)).unwrap());
        }
        for j in 0..2 {
            assert!(b.column(j).iter().all(|y| sv.in_affine_space(y, j, 1).unwrap()));
        }
        assert!(build_r_block(&sv, 0, &[p(&[0])]).is_err());
    }

    #[test]
    fn choices_and_partitions() {
        let cfg = Configuration::new(1, 2, vec![vec![p(&[0]), p(&[1])], vec![p(&[2]), p(&[3])]]).unwrap();
        let id = ColorfulChoice::new(vec![vec![0, 1], vec![0, 1]]).unwrap();
        let part = choice_to_partition(&id, &cfg).unwrap();
        assert_eq!(part.parts(&cfg, &[])[0], vec![p(&[0]), p(&[2])]);
        let swapped = ColorfulChoice::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let parts = choice_to_partition(&swapped, &cfg).unwrap().parts(&cfg, &[]);
        assert_eq!(parts[0], vec![p(&[0]), p(&[3])]);
        assert_eq!(parts[1], vec![p(&[1]), p(&[2])]);
        assert_eq!(partition_to_choice(&part), id);
        assert!(ColorfulChoice::new(vec![vec![1, 1]]).is_err());
    }

    #[test]
    fn singleton_parts_fail_on_both_sides() {
        let cfg = Configuration::new(1, 2, vec![vec![p(&[0]), p(&[1])]]).unwrap();
        assert!(!capture_equivalence_check(&cfg, &ColorfulPartition::identity(1, 2)).unwrap());
    }

    #[test]
    fn pushdown_example() {
        let h = HalfSpace::open(vec![int(1), int(0)], int(0)).unwrap();
        let f = pushdown_halfspace(&h, 2, 1).unwrap();
        assert_eq!(f.halfspaces()[0], HalfSpace::open(vec![int(1)], int(0)).unwrap());
        assert_eq!(f.halfspaces()[1], HalfSpace::open(vec![int(-1)], int(0)).unwrap());
        assert!(open_intersection_empty(&f).unwrap());
        assert!(closed_union_covers_space(&f).unwrap());
    }

    #[test]
    fn pushdown_errors() {
        let h = HalfSpace::open(vec![int(1), int(0)], int(1)).unwrap();
        assert!(matches!(pushdown_halfspace(&h, 2, 1), Err(Error::NonzeroOffset(_))));
        let h = HalfSpace::open(vec![int(0), int(1)], int(0)).unwrap();
        assert!(matches!(
            pushdown_halfspace(&h, 2, 1),
            Err(Error::DegenerateHalfSpace { index: 0 })
        ));
        let h = HalfSpace::open(vec![int(1), int(0), int(0)], int(0)).unwrap();
        assert!(matches!(pushdown_halfspace(&h, 2, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn pushdown_membership_commutes() {
        let sv = make_simplex_vectors(3).unwrap();
        let z: Vec<Rational> = [2, -1, 3, 0, 1, -2].iter().map(|&v| int(v)).collect();
        let h = HalfSpace::closed(z, int(0)).unwrap();
        let fam = pushdown_halfspace(&h, 3, 2).unwrap();
        for x in [p(&[0, 0]), p(&[1, -1]), p(&[-3, 2]), p(&[1, 1]), p(&[2, 5])] {
            for i in 0..3 {
                assert_eq!(h.contains(&sv.lift(&x, i).unwrap()), fam.halfspaces()[i].contains(&x));
            }
        }
    }
}
