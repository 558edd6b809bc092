use std::time::Instant;

use serde::{Deserialize, Serialize};
use tverberg_core::formulas::{
    attack_removal_bound, bound_constant, constants_table, p_r, tolerance_bound, BoundInputs,
    ConstantsRow, ToleranceBound,
};
use tverberg_core::geometry::HalfSpaceFamily;
use tverberg_core::lift::make_simplex_vectors;
use tverberg_core::probabilistic::{estimate_hit_expectation, EstimateMode};
use tverberg_core::rational::{int, Rational};
use tverberg_core::rng::{derive_seed, random_point, random_rational, stream};
use tverberg_core::splits::{moment_curve_points, Capacity};
use tverberg_core::tolerance::{all_partitions, HyperplaneBreak};
use tverberg_core::{
    adversary_attack, best_partition_tolerance, capture_equivalence_check, choice_to_partition,
    closed_union_covers_space, generate_clustered_config, generate_perfect_split,
    hyperplane_break_bound, is_perfect_split, max_pairs_split_by_hyperplane,
    open_intersection_empty, partition_tolerance, pushdown_halfspace, random_colorful_choice,
    search_tolerant_partition, split_capacity, AttackReport, CapacityMode, ColorfulPartition,
    Configuration, Error, HalfSpace, Point, SearchReport, SplitCertificate, ToleranceReport,
};

use crate::spec::{CapacityModeKind, CommandKind, ExperimentSpec, GeneratorKind};
use crate::{CliError, RunReport, VERSION};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checked: u64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAttack {
    pub partition: ColorfulPartition,
    pub report: AttackReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Results {
    Generate {
        config: Configuration,
        /// Present for perfect splits.
        family: Option<HalfSpaceFamily>,
    },
    Check {
        suites: Vec<SuiteResult>,
    },
    Tolerance {
        partition: ColorfulPartition,
        /// `true` when `partition` is the best over all colorful partitions.
        exhaustive: bool,
        report: ToleranceReport,
        hyperplane_break: Option<HyperplaneBreak>,
    },
    Search {
        report: SearchReport,
    },
    Attack {
        certificate: SplitCertificate,
        removal_bound: i64,
        max_removed: usize,
        attacks: Vec<PartitionAttack>,
    },
    Capacity {
        capacity: Capacity,
        n_prime: Option<usize>,
        bound: ToleranceBound,
    },
    Constants {
        rows: Vec<ConstantsRow>,
    },
}

/// Build or read the configuration a spec describes, with the perfect-split
/// family when there is one.
pub fn load_configuration(spec: &ExperimentSpec) -> Result<(Configuration, Option<HalfSpaceFamily>), CliError> {
    let g = spec
        .generator
        .ok_or_else(|| CliError::Input("a generator is required (--generator)".into()))?;
    let n = spec.n.unwrap_or(0);
    let (r, d) = (spec.r.unwrap_or(2), spec.d.unwrap_or(1));
    Ok(match g {
        GeneratorKind::PerfectSplit => {
            let (c, f) = generate_perfect_split(n, r, d, spec.seed_required("perfect_split")?)?;
            (c, Some(f))
        }
        GeneratorKind::Clustered => (
            generate_clustered_config(r, d, &moment_curve_points(n, d), spec.seed_required("clustered")?)?,
            None,
        ),
        GeneratorKind::NestedPairs => {
            let classes = (1..=n as i64)
                .map(|i| vec![Point::from_ints(&[-i]), Point::from_ints(&[i])])
                .collect();
            (Configuration::new(1, 2, classes)?, None)
        }
        GeneratorKind::Random => {
            let mut rng = stream(spec.seed_required("random")?, 0);
            let classes = (0..n)
                .map(|_| (0..r).map(|_| random_point(&mut rng, d, 8, 4)).collect())
                .collect();
            (Configuration::new(d, r, classes)?, None)
        }
        GeneratorKind::FromFile => {
            let path = spec.config_path.as_ref().expect("validated");
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let c = Configuration::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            (c, None)
        }
    })
}

pub fn run(spec: &ExperimentSpec) -> Result<RunReport, CliError> {
    spec.validate()?;
    let start = Instant::now();
    let mut violations = Vec::new();
    let results = match spec.command()? {
        CommandKind::Generate => generate(spec, &mut violations)?,
        CommandKind::Check => check(spec, &mut violations)?,
        CommandKind::Tolerance => tolerance(spec, &mut violations)?,
        CommandKind::Search => search(spec)?,
        CommandKind::Attack => attack(spec, &mut violations)?,
        CommandKind::Capacity => capacity(spec, &mut violations)?,
        CommandKind::Constants => Results::Constants {
            rows: constants_table(spec.max_r.unwrap_or(6), spec.max_d.unwrap_or(3))?,
        },
    };
    let mut echo = spec.clone();
    echo.out = None;
    Ok(RunReport {
        version: VERSION.to_string(),
        seed: spec.seed,
        spec: echo,
        results,
        violations,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

fn generate(spec: &ExperimentSpec, violations: &mut Vec<String>) -> Result<Results, CliError> {
    let (config, family) = load_configuration(spec)?;
    if let Some(f) = &family {
        if !is_perfect_split(f, &config)? {
            violations.push("generated family is not a perfect split".into());
        }
    }
    if Configuration::from_json(&config.to_json())? != config {
        violations.push("configuration does not survive a JSON round trip".into());
    }
    Ok(Results::Generate { config, family })
}

fn suite(name: &str) -> SuiteResult {
    SuiteResult {
        name: name.into(),
        checked: 0,
        failures: Vec::new(),
    }
}

fn random_origin_halfspace(rng: &mut tverberg_core::rng::StreamRng, n: usize, open: bool) -> HalfSpace {
    loop {
        let z: Vec<Rational> = (0..n).map(|_| random_rational(rng, 5, 4)).collect();
        if let Ok(h) = HalfSpace::new(z, int(0), open) {
            return h;
        }
    }
}

fn check(spec: &ExperimentSpec, violations: &mut Vec<String>) -> Result<Results, CliError> {
    let (config, family) = load_configuration(spec)?;
    let seed = spec.seed_required("check")?;
    let trials = spec.trials.unwrap_or(50);
    let (r, d) = (config.r(), config.d());
    let mut suites = Vec::new();

    let mut roundtrip = suite("json_roundtrip");
    roundtrip.checked = 1;
    if Configuration::from_json(&config.to_json())? != config {
        roundtrip.failures.push("parse(emit(config)) differs".into());
    }
    suites.push(roundtrip);

    // lifted capture vs. hull intersection, exhaustive when affordable
    let mut lift = suite("capture_equivalence");
    let count = tverberg_core::perm::factorial(r).checked_pow(config.n_classes() as u32);
    let partitions: Vec<ColorfulPartition> = if count.is_some_and(|c| c <= u128::from(spec.budget_partitions())) {
        all_partitions(config.n_classes(), r).collect()
    } else {
        (0..trials)
            .map(|k| choice_to_partition(&random_colorful_choice(&config, derive_seed(seed, k)), &config))
            .collect::<Result<_, Error>>()?
    };
    for p in &partitions {
        lift.checked += 1;
        if let Err(e) = capture_equivalence_check(&config, p) {
            lift.failures.push(format!("{:?}: {e}", p.perms()));
        }
    }
    suites.push(lift);

    // pushdowns of random origin half-spaces, plus the hit matrices they induce
    let n = make_simplex_vectors(r)?.lifted_dim(d);
    let mut pushdown = suite("pushdown_empty_and_covering");
    let mut matrices = suite("hit_matrix_conditions");
    let mut rng = stream(seed, 1);
    let floor = bound_constant(r, d)?;
    for k in 0..trials {
        let h = random_origin_halfspace(&mut rng, n, true);
        pushdown.checked += 1;
        match pushdown_halfspace(&h, r, d) {
            Ok(fam) => {
                let closed = pushdown_halfspace(&h.closure(), r, d)?;
                if !open_intersection_empty(&fam)? {
                    pushdown.failures.push(format!("trial {k}: open pushdown family has a common point"));
                }
                if !closed_union_covers_space(&closed)? {
                    pushdown.failures.push(format!("trial {k}: closed pushdown family misses a point"));
                }
            }
            Err(Error::DegenerateHalfSpace { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        if r <= 8 {
            for (c, class) in config.classes().iter().enumerate() {
                matrices.checked += 1;
                let e = estimate_hit_expectation(class, &h.closure(), EstimateMode::Exact)?;
                if !e.matrix.is_valid(d) {
                    matrices.failures.push(format!("trial {k}, class {c}: matrix violates the column conditions"));
                }
                if e.value < floor || e.value > int(1) {
                    matrices.failures.push(format!("trial {k}, class {c}: hit probability out of range"));
                }
                if !e.complement_splits && e.value != int(1) {
                    matrices.failures.push(format!("trial {k}, class {c}: unsplittable class with hit < 1"));
                }
            }
        }
    }
    suites.push(pushdown);
    suites.push(matrices);

    if let Some(f) = &family {
        let mut perfect = suite("perfect_split");
        perfect.checked = 1;
        if !is_perfect_split(f, &config)? {
            perfect.failures.push("family is not a perfect split".into());
        }
        suites.push(perfect);
    }

    for s in &suites {
        violations.extend(s.failures.iter().map(|f| format!("{}: {f}", s.name)));
    }
    Ok(Results::Check { suites })
}

fn tolerance(spec: &ExperimentSpec, violations: &mut Vec<String>) -> Result<Results, CliError> {
    let (config, family) = load_configuration(spec)?;
    let (partition, report, exhaustive) = match &spec.partition {
        Some(p) => {
            p.check_against(&config)?;
            (p.clone(), partition_tolerance(&config, p, spec.budget_subsets)?, false)
        }
        None => {
            let (p, rep) = best_partition_tolerance(&config, spec.budget_partitions(), spec.budget_subsets)?;
            (p, rep, true)
        }
    };
    let hyperplane_break = if config.r() == 2 {
        let b = hyperplane_break_bound(&config, &partition)?;
        if (b.removed.len() as i64) < report.tolerance + 1 {
            violations.push("hyperplane break is smaller than the minimum breaking set".into());
        }
        Some(b)
    } else {
        None
    };
    if exhaustive && family.is_some() {
        // perfect split: some p_r N colors always break
        let cap = (p_r(config.r())? * int(config.n_classes() as i64)).ceil();
        if int(report.tolerance + 1) > cap {
            violations.push(format!("best tolerance {} exceeds ceil(p_r N) - 1", report.tolerance));
        }
    }
    Ok(Results::Tolerance {
        partition,
        exhaustive,
        report,
        hyperplane_break,
    })
}

fn search(spec: &ExperimentSpec) -> Result<Results, CliError> {
    let (config, _) = load_configuration(spec)?;
    let seed = spec.seed_required("search")?;
    let target = spec
        .target
        .ok_or_else(|| CliError::Input("search needs --target".into()))?;
    let report = search_tolerant_partition(&config, target, spec.trials.unwrap_or(100), seed, spec.budget_subsets)?;
    Ok(Results::Search { report })
}

fn capacity_of(spec: &ExperimentSpec, config: &Configuration) -> Result<Capacity, CliError> {
    let mode = match spec.capacity_mode.unwrap_or(CapacityModeKind::Exact) {
        CapacityModeKind::Exact => CapacityMode::Exact {
            budget: spec.budget_families(),
        },
        CapacityModeKind::MonteCarlo => CapacityMode::MonteCarlo {
            trials: spec.trials.unwrap_or(1000),
            seed: spec.seed_required("monte_carlo capacity")?,
        },
    };
    Ok(split_capacity(config, mode)?)
}

fn attack(spec: &ExperimentSpec, violations: &mut Vec<String>) -> Result<Results, CliError> {
    let (config, family) = load_configuration(spec)?;
    let certificate = match family {
        Some(f) => SplitCertificate::for_family(f, &config)?,
        None => capacity_of(spec, &config)?.certificate,
    };
    let partitions: Vec<ColorfulPartition> = match &spec.partition {
        Some(p) => vec![p.clone()],
        None => {
            let count = tverberg_core::perm::factorial(config.r()).checked_pow(config.n_classes() as u32);
            if count.is_none_or(|c| c > u128::from(spec.budget_partitions())) {
                return Err(CliError::Budget(format!(
                    "attacking every colorful partition needs {} runs, budget {}; pass --partition",
                    count.map_or("more than 2^128".to_string(), |c| c.to_string()),
                    spec.budget_partitions()
                )));
            }
            all_partitions(config.n_classes(), config.r()).collect()
        }
    };
    let removal_bound = attack_removal_bound(config.n_classes(), config.r(), certificate.count());
    let mut attacks = Vec::with_capacity(partitions.len());
    for partition in partitions {
        let report = adversary_attack(&config, &partition, &certificate)?;
        if report.removed_classes.len() as i64 > removal_bound {
            violations.push(format!("{:?}: removed more than N - ceil(f/r!)", partition.perms()));
        }
        attacks.push(PartitionAttack { partition, report });
    }
    let max_removed = attacks.iter().map(|a| a.report.removed_classes.len()).max().unwrap_or(0);
    Ok(Results::Attack {
        certificate,
        removal_bound,
        max_removed,
        attacks,
    })
}

fn capacity(spec: &ExperimentSpec, violations: &mut Vec<String>) -> Result<Results, CliError> {
    let (config, _) = load_configuration(spec)?;
    let capacity = capacity_of(spec, &config)?;
    capacity.certificate.verify(&config)?;
    let n_prime = if config.r() == 2 {
        let np = max_pairs_split_by_hyperplane(&config)?.0;
        if capacity.exhaustive && np != capacity.f {
            violations.push(format!("r = 2 but f = {} differs from N' = {np}", capacity.f));
        }
        Some(np)
    } else {
        None
    };
    if spec.generator == Some(GeneratorKind::Clustered) && capacity.f > config.r() * config.d() {
        violations.push(format!("clustered configuration split {} > rd classes", capacity.f));
    }
    let bound = tolerance_bound(&BoundInputs {
        n: config.n_classes() as u64,
        r: config.r(),
        d: config.d(),
        f: capacity.f as u64,
    })?;
    Ok(Results::Capacity {
        capacity,
        n_prime,
        bound,
    })
}
