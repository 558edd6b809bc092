//! Colored point configurations, colorful partitions and the configuration JSON schema.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::perm::is_permutation;

/// `N` color classes of `r` points each in `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration", into = "RawConfiguration")]
pub struct Configuration {
    d: usize,
    r: usize,
    classes: Vec<Vec<Point>>,
}

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    d: usize,
    r: usize,
    classes: Vec<Vec<Point>>,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = Error;
    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Configuration::new(raw.d, raw.r, raw.classes)
    }
}

impl From<Configuration> for RawConfiguration {
    fn from(c: Configuration) -> Self {
        RawConfiguration {
            d: c.d,
            r: c.r,
            classes: c.classes,
        }
    }
}

impl Configuration {
    pub fn new(d: usize, r: usize, classes: Vec<Vec<Point>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("d must be at least 1".into()));
        }
        if r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        for (c, class) in classes.iter().enumerate() {
            if class.len() != r {
                return Err(Error::Parse(format!(
                    "classes[{c}]: expected {r} points, found {}",
                    class.len()
                )));
            }
            for (i, p) in class.iter().enumerate() {
                if p.dim() != d {
                    return Err(Error::Parse(format!(
                        "classes[{c}][{i}]: expected {d} coordinates, found {}",
                        p.dim()
                    )));
                }
            }
        }
        Ok(Self { d, r, classes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Number of color classes `N`.
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<Point>] {
        &self.classes
    }

    pub fn class(&self, c: usize) -> &[Point] {
        &self.classes[c]
    }

    /// All `N r` points, class-major.
    pub fn points(&self) -> Vec<Point> {
        self.classes.iter().flatten().cloned().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| {
            Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }
}

/// Per class, a permutation sending point `i` of the class to part `perm[i]`.
///
/// Ordering is lexicographic on the list of permutations; this is the
/// tie-break order used everywhere a "least" partition is reported.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorfulPartition {
    perms: Vec<Vec<usize>>,
}

impl ColorfulPartition {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        if let Some(c) = perms.iter().position(|p| !is_permutation(p)) {
            return Err(Error::InvalidParameter(format!(
                "class {c}: assignment is not a permutation"
            )));
        }
        Ok(Self { perms })
    }

    pub fn identity(n_classes: usize, r: usize) -> Self {
        Self {
            perms: vec![(0..r).collect(); n_classes],
        }
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn part_of(&self, class: usize, point: usize) -> usize {
        self.perms[class][point]
    }

    pub fn n_classes(&self) -> usize {
        self.perms.len()
    }

    pub fn check_against(&self, config: &Configuration) -> Result<()> {
        if self.perms.len() != config.n_classes() {
            return Err(Error::SizeMismatch {
                expected: config.n_classes(),
                found: self.perms.len(),
            });
        }
        if let Some(p) = self.perms.iter().find(|p| p.len() != config.r()) {
            return Err(Error::SizeMismatch {
                expected: config.r(),
                found: p.len(),
            });
        }
        Ok(())
    }

    /// Parts `A_1..A_r` over the classes with `removed[c] == false`.
    pub fn parts(&self, config: &Configuration, removed: &[bool]) -> Vec<Vec<Point>> {
        let mut parts = vec![Vec::new(); config.r()];
        for (c, class) in config.classes().iter().enumerate() {
            if removed.get(c).copied().unwrap_or(false) {
                continue;
            }
            for (i, p) in class.iter().enumerate() {
                parts[self.perms[c][i]].push(p.clone());
            }
        }
        parts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Configuration {
        Configuration::new(
            1,
            2,
            vec![
                vec![Point::from_ints(&[-1]), Point::from_ints(&[1])],
                vec![Point::from_ints(&[-2]), Point::from_ints(&[2])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn json_schema_roundtrip() {
        let c = sample();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"d":1,"r":2,"classes":[[["-1/1"],["1/1"]],[["-2/1"],["2/1"]]]}"#);
        assert_eq!(Configuration::from_json(&s).unwrap(), c);
    }

    #[test]
    fn parse_diagnostics_name_the_field() {
        let e = Configuration::from_json(r#"{"d":2,"r":2,"classes":[[["1/1","0/1"],["1/1"]]]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("classes[0][1]"), "{e}");
        let e = Configuration::from_json("{\n\"d\": 1,\n\"r\": 2,\n\"classes\": [[[\"1/2\"], [\"2/4\"]]]}")
            .unwrap_err();
        assert!(e.to_string().contains("lowest terms"), "{e}");
        assert!(e.to_string().contains("line 4"), "{e}");
    }

    #[test]
    fn partitions() {
        let c = sample();
        let p = ColorfulPartition::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let parts = p.parts(&c, &[false, false]);
        assert_eq!(parts[0], vec![Point::from_ints(&[-1]), Point::from_ints(&[2])]);
        assert_eq!(p.parts(&c, &[true, false])[1], vec![Point::from_ints(&[-2])]);
        assert!(ColorfulPartition::new(vec![vec![0, 0]]).is_err());
        assert!(ColorfulPartition::identity(3, 2).check_against(&c).is_err());
    }
}
