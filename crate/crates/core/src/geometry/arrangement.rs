//! Every subset of a finite point set that an open half-space can cut out.
//!
//! A half-space `<a, x> > b` acts on the lifted points `(x, 1)` as the linear
//! functional `w = (a, -b)`, so the cut-out subsets are exactly the sign
//! vectors of the open cells of the central arrangement `{w : <w, (x, 1)> = 0}`.
//! Cells are grown one point at a time: each existing cell either keeps a
//! single side of the new hyperplane or is split in two, and every side is
//! decided by an exact strict LP. The cell witness never lies on any of the
//! hyperplanes, so the materialized half-space has no input point on its
//! boundary.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{check_dims, HalfSpace, Point};
use crate::lp::{dot, lp_feasible, Constraint, Feasibility};
use crate::rational::{int, Rational};

/// Subset of input point indices (at most 128 points).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(pub u128);

impl Signature {
    pub const MAX_POINTS: usize = 128;

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        Signature(self.0 | 1 << i)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn of(points: &[Point], h: &HalfSpace) -> Self {
        points
            .iter()
            .enumerate()
            .filter(|(_, p)| h.contains(p))
            .fold(Signature(0), |s, (i, _)| s.with(i))
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..128).filter(move |&i| self.contains(i))
    }
}

fn lifted(p: &Point) -> Vec<Rational> {
    let mut v = p.coords().to_vec();
    v.push(int(1));
    v
}

/// Cells of the lifted arrangement as `(signature, interior witness)`.
fn cells(points: &[Point]) -> Result<Vec<(Signature, Vec<Rational>)>> {
    let d = check_dims(points)?.ok_or(Error::EmptyInput("point list"))?;
    if points.len() > Signature::MAX_POINTS {
        return Err(Error::InvalidParameter(format!(
            "half-space enumeration supports at most {} points, got {}",
            Signature::MAX_POINTS,
            points.len()
        )));
    }
    let lift: Vec<Vec<Rational>> = points.iter().map(lifted).collect();
    let mut w0 = vec![Rational::zero(); d + 1];
    w0[d] = int(1);
    let mut cells = vec![(Signature(0), w0)];

    for t in 0..lift.len() {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for (sig, w) in cells {
            let val = dot(&w, &lift[t]);
            let (plus, minus) = if val.is_positive() {
                (Some(w.clone()), side(&lift, t, sig, false)?)
            } else if val.is_negative() {
                (side(&lift, t, sig, true)?, Some(w.clone()))
            } else {
                (side(&lift, t, sig, true)?, side(&lift, t, sig, false)?)
            };
            if let Some(w) = plus {
                next.push((sig.with(t), w));
            }
            if let Some(w) = minus {
                next.push((sig, w));
            }
        }
        cells = next;
    }
    cells.sort_by_key(|a| a.0);
    cells.dedup_by(|a, b| a.0 == b.0);
    Ok(cells)
}

/// Witness for the cell `sig` (over points `< t`) restricted to one side of point `t`.
fn side(lift: &[Vec<Rational>], t: usize, sig: Signature, positive: bool) -> Result<Option<Vec<Rational>>> {
    let zero = Rational::zero();
    let rows: Vec<Constraint> = (0..=t)
        .map(|s| {
            let inside = if s == t { positive } else { sig.contains(s) };
            if inside {
                Constraint::gt(lift[s].clone(), zero.clone())
            } else {
                Constraint::lt(lift[s].clone(), zero.clone())
            }
        })
        .collect();
    Ok(match lp_feasible(&rows)? {
        Feasibility::Feasible(w) => Some(w.into_coords()),
        Feasibility::Infeasible => None,
    })
}

fn materialize(points: &[Point], sig: Signature, w: Vec<Rational>) -> Result<HalfSpace> {
    let d = w.len() - 1;
    let normal = w[..d].to_vec();
    if normal.iter().any(|c| !c.is_zero()) {
        return HalfSpace::open(normal, -w[d].clone());
    }
    // Constant functional: the cell is "everything" or "nothing".
    let mut e1 = vec![Rational::zero(); d];
    e1[0] = int(1);
    let xs = points.iter().map(|p| p[0].clone());
    let offset = if sig.is_empty() {
        xs.max().unwrap() + int(1)
    } else {
        xs.min().unwrap() - int(1)
    };
    HalfSpace::open(e1, offset)
}

/// One open half-space per realizable subset, sorted by signature.
pub fn realizable_signatures(points: &[Point]) -> Result<Vec<(Signature, HalfSpace)>> {
    cells(points)?
        .into_iter()
        .map(|(sig, w)| {
            let h = materialize(points, sig, w)?;
            debug_assert_eq!(Signature::of(points, &h), sig);
            Ok((sig, h))
        })
        .collect()
}

/// A finite list of open half-spaces realizing every subset of `points`
/// that any open half-space can cut out, one representative per subset.
pub fn enumerate_combinatorial_halfspaces(points: &[Point]) -> Result<Vec<HalfSpace>> {
    Ok(realizable_signatures(points)?
        .into_iter()
        .map(|(_, h)| h)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn sigs(points: &[Point]) -> BTreeSet<u128> {
        realizable_signatures(points)
            .unwrap()
            .into_iter()
            .map(|(s, h)| {
                assert_eq!(Signature::of(points, &h), s);
                assert!(points.iter().all(|p| !h.evaluate(p).is_zero()));
                s.0
            })
            .collect()
    }

    #[test]
    fn two_points_on_a_line() {
        let p = vec![Point::from_ints(&[0]), Point::from_ints(&[1])];
        assert_eq!(sigs(&p), BTreeSet::from([0b00, 0b01, 0b10, 0b11]));
    }

    #[test]
    fn line_gives_prefixes_and_suffixes() {
        let xs = [5, -3, 8, 0, 2, 11];
        let p: Vec<Point> = xs.iter().map(|&x| Point::from_ints(&[x])).collect();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by_key(|&i| xs[i]);
        let mut expect = BTreeSet::new();
        for k in 0..=xs.len() {
            let pre = order[..k].iter().fold(0u128, |m, &i| m | 1 << i);
            let suf = order[k..].iter().fold(0u128, |m, &i| m | 1 << i);
            expect.insert(pre);
            expect.insert(suf);
        }
        assert_eq!(sigs(&p), expect);
    }

    #[test]
    fn generic_triangle_realizes_everything() {
        let p = vec![Point::from_ints(&[0, 0]), Point::from_ints(&[3, 1]), Point::from_ints(&[1, 4])];
        assert_eq!(sigs(&p).len(), 8);
    }

    #[test]
    fn square_misses_diagonals() {
        let p = vec![
            Point::from_ints(&[0, 0]),
            Point::from_ints(&[1, 0]),
            Point::from_ints(&[1, 1]),
            Point::from_ints(&[0, 1]),
        ];
        let s = sigs(&p);
        assert_eq!(s.len(), 14);
        assert!(!s.contains(&0b0101) && !s.contains(&0b1010));
    }

    #[test]
    fn duplicates_and_collinear_points() {
        let p = vec![
            Point::from_ints(&[1, 1]),
            Point::from_ints(&[1, 1]),
            Point::from_ints(&[2, 2]),
            Point::from_ints(&[3, 3]),
        ];
        let s = sigs(&p);
        // duplicates never separate
        assert!(s.iter().all(|m| (m & 1) == (m >> 1 & 1)));
        // the middle point can't be isolated
        assert!(!s.contains(&0b0100));
        assert_eq!(s.len(), 6);
    }
}
