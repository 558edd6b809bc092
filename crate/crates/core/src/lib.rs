//! Exact-arithmetic toolkit for colorful Tverberg partitions with tolerance.
//!
//! Everything is decided in exact rationals: LP feasibility, convex hull
//! intersection, half-space splits, the tensor lift into `Q^((r-1)(d+1))`,
//! tolerance of colorful partitions under color-class removal, and the
//! permutation hit probabilities `p_r` and `q(r, d)`.

pub mod error;
pub mod geometry;
pub mod lp;
pub mod rational;
pub mod perm;
pub mod config;
pub mod lift;
pub mod rng;
pub mod splits;
pub mod formulas;
pub mod tolerance;
pub mod probabilistic;

pub use error::{Error, Result};
pub use geometry::{
    captures_origin, closed_union_covers_space, convex_hulls_intersect,
    enumerate_combinatorial_halfspaces, open_intersection_empty, HalfSpace, HalfSpaceFamily,
    HullIntersection, Point,
};
pub use config::{ColorfulPartition, Configuration};
pub use formulas::{
    extremal_matrix, hit_probability, p_r, q, tolerance_bound, BoundInputs, HitMatrix, HitMode,
};
pub use lift::{
    capture_equivalence_check, choice_to_partition, pushdown_halfspace, ColorfulChoice,
};
pub use lp::{lp_feasible, Constraint, Feasibility, Relation};
pub use probabilistic::{
    adversary_attack, estimate_hit_expectation, random_colorful_choice, search_tolerant_partition,
    AttackReport, EstimateMode, SearchReport,
};
pub use rational::Rational;
pub use splits::{
    can_split, generate_clustered_config, generate_perfect_split, is_perfect_split,
    max_pairs_split_by_hyperplane, split_capacity, CapacityMode, SplitCertificate, SplitOutcome,
};
pub use tolerance::{
    best_partition_tolerance, hyperplane_break_bound, is_tverberg, partition_tolerance,
    ToleranceReport,
};
