//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use num::{BigInt, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tverberg_core::formulas::{derangements, min_hit_over_valid_matrices, p_r_inclusion_exclusion};
use tverberg_core::lift::make_simplex_vectors;
use tverberg_core::splits::moment_curve_points;
use tverberg_core::tolerance::{all_partitions, hyperplane_break_with};
use tverberg_core::{
    adversary_attack, best_partition_tolerance, capture_equivalence_check, closed_union_covers_space,
    estimate_hit_expectation, extremal_matrix, generate_clustered_config, generate_perfect_split,
    hit_probability, is_tverberg, max_pairs_split_by_hyperplane, open_intersection_empty, p_r,
    pushdown_halfspace, q, split_capacity, CapacityMode, ColorfulPartition, Configuration, EstimateMode,
    HalfSpace, HitMatrix, HitMode, Point, Rational, SplitCertificate,
};

type Outcome = Result<String, String>;

fn rat(rng: &mut ChaCha8Rng, span: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(rng.gen_range(-span..=span)), BigInt::from(rng.gen_range(1..=den)))
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Point {
    Point::new((0..d).map(|_| rat(rng, 6, 4)).collect())
}

fn random_config(rng: &mut ChaCha8Rng, n: usize, r: usize, d: usize) -> Configuration {
    let classes = (0..n).map(|_| (0..r).map(|_| random_point(rng, d)).collect()).collect();
    Configuration::new(d, r, classes).unwrap()
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize, r: usize) -> ColorfulPartition {
    let perms = (0..n)
        .map(|_| {
            let mut p: Vec<usize> = (0..r).collect();
            for i in (1..r).rev() {
                p.swap(i, rng.gen_range(0..=i));
            }
            p
        })
        .collect();
    ColorfulPartition::new(perms).unwrap()
}

/// Closed origin half-space with a nonzero random normal.
fn random_origin_halfspace(rng: &mut ChaCha8Rng, dim: usize) -> HalfSpace {
    loop {
        let normal: Vec<Rational> = (0..dim).map(|_| rat(rng, 5, 3)).collect();
        if normal.iter().any(|c| !c.is_zero()) {
            return HalfSpace::closed(normal, Rational::zero()).unwrap();
        }
    }
}

fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// All permutations of `0..r`, by plain recursion.
fn permutations(r: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, r: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == r {
            out.push(prefix.clone());
            return;
        }
        for j in 0..r {
            if !prefix.contains(&j) {
                prefix.push(j);
                go(prefix, r, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), r, &mut out);
    out
}

/// Fraction of permutations meeting a one of `entries`.
fn brute_hit(entries: &[Vec<bool>]) -> Rational {
    let r = entries.len();
    let perms = permutations(r);
    let hits = perms.iter().filter(|s| (0..r).any(|i| entries[i][s[i]])).count();
    ratio(hits as i64, perms.len() as i64)
}

/// Balanced matrix built from scratch: row `i < d + 1` owns a contiguous run
/// of columns, sizes differing by at most one, larger runs first.
fn balanced_entries(r: usize, d: usize) -> Vec<Vec<bool>> {
    let mut e = vec![vec![false; r]; r];
    let mut col = 0;
    for (i, row) in e.iter_mut().enumerate().take(d + 1) {
        let len = r / (d + 1) + usize::from(i < r % (d + 1));
        for cell in row.iter_mut().skip(col).take(len) {
            *cell = true;
        }
        col += len;
    }
    e
}

fn crit1_capture_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let mut partitions_checked = 0usize;
    let mut positives = 0usize;
    for (r, d, max_n) in [(2, 1, 3), (2, 2, 3), (3, 2, 2)] {
        for n in 1..=max_n {
            for _ in 0..100 {
                let config = random_config(&mut rng, n, r, d);
                for p in all_partitions(n, r) {
                    match capture_equivalence_check(&config, &p) {
                        Ok(t) => positives += usize::from(t),
                        Err(e) => return Err(format!("(r,d,N)=({r},{d},{n}): {e}")),
                    }
                    partitions_checked += 1;
                }
            }
        }
    }
    Ok(format!("{partitions_checked} partitions agree ({positives} Tverberg)"))
}

fn crit2_pushdown() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    let mut details = Vec::new();
    for (r, d) in [(2, 2), (3, 2), (3, 3)] {
        let n = make_simplex_vectors(r).unwrap().lifted_dim(d);
        let mut checked = 0;
        let mut skipped = 0;
        while checked < 200 {
            let h = random_origin_halfspace(&mut rng, n);
            // a normal whose pushdown has a zero normal is not a half-space family
            let family = match pushdown_halfspace(&h.interior(), r, d) {
                Ok(f) => f,
                Err(_) => {
                    skipped += 1;
                    continue;
                }
            };
            if !open_intersection_empty(&family).unwrap() {
                return Err(format!("({r},{d}): open pushdown intersects"));
            }
            if !closed_union_covers_space(&family.closures()).unwrap() {
                return Err(format!("({r},{d}): closed pushdown does not cover"));
            }
            checked += 1;
        }
        details.push(format!("({r},{d}) 200 ok, {skipped} degenerate redrawn"));
    }
    Ok(details.join("; "))
}

fn crit3_perfect_split_tolerance() -> Outcome {
    let mut details = Vec::new();
    for (n, r, d) in [(4, 2, 2), (6, 2, 2), (3, 3, 2)] {
        let (config, family) = generate_perfect_split(n, r, d, 7).map_err(|e| e.to_string())?;
        // perfect: empty open intersection, r - 1 points of every class in each half-space
        if !open_intersection_empty(&family).unwrap() {
            return Err(format!("({n},{r},{d}): family intersects"));
        }
        for h in family.iter() {
            for class in config.classes() {
                if class.iter().filter(|x| h.contains(x.coords())).count() != r - 1 {
                    return Err(format!("({n},{r},{d}): not a perfect split"));
                }
            }
        }
        let (best, report) = best_partition_tolerance(&config, 1 << 20, None).map_err(|e| e.to_string())?;
        let pn = p_r(r).unwrap() * Rational::from_integer(BigInt::from(n));
        let ceil_bound = pn.ceil().to_integer() - BigInt::one();
        let floor_bound = pn.floor().to_integer();
        if BigInt::from(report.tolerance) > ceil_bound {
            return Err(format!("({n},{r},{d}): tolerance {} > {ceil_bound}", report.tolerance));
        }
        // the removal set must really break the best partition
        if report.tolerance >= 0 && is_tverberg(&config, &best, &report.break_set).unwrap() {
            return Err(format!("({n},{r},{d}): reported break set does not break"));
        }
        details.push(format!(
            "({n},{r},{d}) t={} <= ceil(p_r N)-1={ceil_bound} (floor(p_r N)={floor_bound})",
            report.tolerance
        ));
    }
    Ok(details.join("; "))
}

fn crit4_hyperplane_break() -> Outcome {
    let mut details = Vec::new();
    for n in [4, 6] {
        for d in [1, 2] {
            let (config, _) = generate_perfect_split(n, 2, d, 11).map_err(|e| e.to_string())?;
            let mut worst = 0;
            let (n_prime, h) = max_pairs_split_by_hyperplane(&config).map_err(|e| e.to_string())?;
            for p in all_partitions(n, 2) {
                let b = hyperplane_break_with(&config, &p, n_prime, h.clone()).map_err(|e| e.to_string())?;
                if b.n_prime != n {
                    return Err(format!("N={n}, d={d}: hyperplane splits {} pairs", b.n_prime));
                }
                if b.removed.len() > n - n / 2 {
                    return Err(format!("N={n}, d={d}: removed {}", b.removed.len()));
                }
                if is_tverberg(&config, &p, &b.removed).unwrap() {
                    return Err(format!("N={n}, d={d}: break set does not break"));
                }
                worst = worst.max(b.removed.len());
            }
            details.push(format!("N={n} d={d}: max removed {worst} <= {}", n - n / 2));
        }
    }
    Ok(details.join("; "))
}

fn crit5_clustered() -> Outcome {
    let mut details = Vec::new();
    for (n, r, d) in [(7, 2, 2), (5, 2, 1)] {
        let config = generate_clustered_config(r, d, &moment_curve_points(n, d), 3).map_err(|e| e.to_string())?;
        let cap = split_capacity(&config, CapacityMode::Exact { budget: 50_000_000 }).map_err(|e| e.to_string())?;
        if !cap.exhaustive {
            return Err(format!("({n},{r},{d}): enumeration not exhaustive"));
        }
        cap.certificate.verify(&config).map_err(|e| e.to_string())?;
        if cap.f > r * d {
            return Err(format!("({n},{r},{d}): f={} > rd={}", cap.f, r * d));
        }
        details.push(format!("({n},{r},{d}) f={} <= {}", cap.f, r * d));
    }
    Ok(details.join("; "))
}

fn crit6_constants() -> Outcome {
    for (r, want) in [(2, ratio(1, 2)), (3, ratio(2, 3)), (4, ratio(5, 8))] {
        let got = p_r(r).unwrap();
        if got != want {
            return Err(format!("p_{r} = {got}"));
        }
        let perms = permutations(r);
        let fixed = perms.iter().filter(|s| s.iter().enumerate().any(|(i, &j)| i == j)).count();
        if ratio(fixed as i64, perms.len() as i64) != want {
            return Err(format!("p_{r} disagrees with enumeration"));
        }
    }
    for r in 1..=12 {
        // inclusion-exclusion: D_r = sum (-1)^k r!/k!
        let ie: i64 = (0..=r).map(|k| (if k % 2 == 0 { 1 } else { -1 }) * factorial(r) / factorial(k)).sum();
        if derangements(r) != BigInt::from(ie) {
            return Err(format!("D_{r} = {} != {ie}", derangements(r)));
        }
        if r >= 2 && p_r(r).unwrap() != p_r_inclusion_exclusion(r).unwrap() {
            return Err(format!("p_{r}: recurrence and inclusion-exclusion differ"));
        }
    }
    for (r, d) in [(4, 1), (3, 1)] {
        let brute = brute_hit(&balanced_entries(r, d));
        let got = q(r, d).unwrap();
        if brute != ratio(2, 3) || got != brute {
            return Err(format!("q({r},{d}) = {got}, enumeration {brute}"));
        }
    }

    // single one per column == a row per column
    let mut matrices = 0u64;
    for r in 2..=6 {
        let total = (r as u64).pow(r as u32);
        for code in 0..total {
            let mut rows = vec![0u32; r];
            let mut c = code;
            for j in 0..r {
                rows[(c % r as u64) as usize] |= 1 << j;
                c /= r as u64;
            }
            let t = HitMatrix::from_rows(r, rows).unwrap();
            if hit_probability(&t, HitMode::Rook).unwrap() != hit_probability(&t, HitMode::Enumerate).unwrap() {
                return Err(format!("rook != enumerate at r={r}, code {code}"));
            }
            matrices += 1;
        }
    }
    // r = 7, 8: permuting columns permutes sigma, so each matrix scores like
    // the contiguous one with the same row counts; cover every row-count
    // vector and spot-check the invariance with shuffled columns
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut classes = 0u64;
    for r in 7..=8 {
        let mut counts = vec![0usize; r];
        loop {
            if counts.iter().sum::<usize>() == r {
                let mut rows = vec![0u32; r];
                let mut col = 0;
                for (i, &k) in counts.iter().enumerate() {
                    rows[i] = ((1u32 << k) - 1) << col;
                    col += k;
                }
                let t = HitMatrix::from_rows(r, rows.clone()).unwrap();
                let rook = hit_probability(&t, HitMode::Rook).unwrap();
                if rook != hit_probability(&t, HitMode::Enumerate).unwrap() {
                    return Err(format!("rook != enumerate at r={r}, counts {counts:?}"));
                }
                if classes.is_multiple_of(16) {
                    let mut cols: Vec<usize> = (0..r).collect();
                    for i in (1..r).rev() {
                        cols.swap(i, rng.gen_range(0..=i));
                    }
                    let shuffled: Vec<u32> = rows
                        .iter()
                        .map(|&row| (0..r).filter(|&j| row >> j & 1 == 1).map(|j| 1u32 << cols[j]).sum())
                        .collect();
                    let s = HitMatrix::from_rows(r, shuffled).unwrap();
                    if hit_probability(&s, HitMode::Enumerate).unwrap() != rook {
                        return Err(format!("column shuffle changed the hit probability at r={r}"));
                    }
                }
                classes += 1;
            }
            // next vector in 0..=r per coordinate, odometer order
            let mut i = 0;
            while i < r && counts[i] == r {
                counts[i] = 0;
                i += 1;
            }
            if i == r {
                break;
            }
            counts[i] += 1;
        }
    }
    Ok(format!(
        "p_2..p_4, D_r for r<=12, q(4,1)=q(3,1)=2/3; rook=enumerate on {matrices} matrices (r<=6) and {classes} row-count vectors (r=7,8)"
    ))
}

fn crit7_min_hit() -> Outcome {
    let mut details = Vec::new();
    for (r, d) in [(3, 1), (4, 1), (4, 2)] {
        let report = min_hit_over_valid_matrices(r, d, 0, 0).map_err(|e| e.to_string())?;
        let want = brute_hit(&balanced_entries(r, d));
        if !report.exhaustive {
            return Err(format!("({r},{d}): not exhaustive"));
        }
        if report.value != want || q(r, d).unwrap() != want {
            return Err(format!("({r},{d}): min {} != q {want}", report.value));
        }
        if !report.extremal_minimizer {
            return Err(format!("({r},{d}): no extremal minimizer"));
        }
        if brute_hit(&report.matrix.entries()) != report.value || !report.matrix.is_valid(d) {
            return Err(format!("({r},{d}): reported minimizer does not check out"));
        }
        let balanced = HitMatrix::from_entries(&balanced_entries(r, d)).unwrap();
        if !balanced.is_valid(d) || !balanced.is_extremal_form(d) || extremal_matrix(r, d).unwrap() != balanced {
            return Err(format!("({r},{d}): extremal matrix shape"));
        }
        details.push(format!("({r},{d}) min={} over {} matrices", report.value, report.matrices_examined));
    }
    Ok(details.join("; "))
}

fn crit8_attack() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD00D);
    let shapes = [(2, 1), (2, 2), (3, 2)];
    let mut split_total = 0;
    for k in 0..50 {
        let (r, d) = shapes[k % shapes.len()];
        let n = rng.gen_range(2..=4);
        let config = random_config(&mut rng, n, r, d);
        let cap = split_capacity(&config, CapacityMode::Exact { budget: 50_000_000 }).map_err(|e| e.to_string())?;
        let cert: SplitCertificate = cap.certificate;
        cert.verify(&config).map_err(|e| format!("config {k}: {e}"))?;
        let f = cert.count();
        split_total += f;
        let partition = random_partition(&mut rng, n, r);
        let report = adversary_attack(&config, &partition, &cert).map_err(|e| format!("config {k}: {e}"))?;
        if !report.broken_verified || is_tverberg(&config, &partition, &report.removed_classes).unwrap() {
            return Err(format!("config {k}: attack did not break"));
        }
        let rf = factorial(r);
        let expected = Rational::from_integer(BigInt::from(n - f))
            + Rational::from_integer(BigInt::from(f)) * (Rational::one() - ratio(1, rf));
        if report.average_removals != expected {
            return Err(format!("config {k}: average {} != {expected}", report.average_removals));
        }
        let min = *report.removals_per_labeling.iter().min().unwrap();
        if report.removed_classes.len() != min || report.removals_per_labeling.len() != rf as usize {
            return Err(format!("config {k}: labeling bookkeeping"));
        }
    }
    Ok(format!("50 configs broken, averages exact ({split_total} split classes in total)"))
}

fn crit9_hit_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE1E1);
    let mut details = Vec::new();
    // (r, d) shapes per regime
    let regimes: [(&str, &[(usize, usize)]); 2] = [("r<=d+1", &[(2, 1), (2, 2), (3, 2)]), ("r>d+1", &[(3, 1), (4, 1), (4, 2)])];
    for (name, shapes) in regimes {
        let mut ones = 0;
        for k in 0..100 {
            let (r, d) = shapes[k % shapes.len()];
            let class: Vec<Point> = (0..r).map(|_| random_point(&mut rng, d)).collect();
            let n = make_simplex_vectors(r).unwrap().lifted_dim(d);
            let h = random_origin_halfspace(&mut rng, n);
            let est = estimate_hit_expectation(&class, &h, EstimateMode::Exact).map_err(|e| e.to_string())?;
            let lo = if r <= d + 1 { p_r(r).unwrap() } else { q(r, d).unwrap() };
            if est.value < lo || est.value > Rational::one() {
                return Err(format!("{name} ({r},{d}): hit {} outside [{lo}, 1]", est.value));
            }
            if brute_hit(&est.matrix.entries()) != est.value {
                return Err(format!("{name} ({r},{d}): value disagrees with its matrix"));
            }
            // the complement pushes the class apart only through a perfect matching
            // of points to the complement's pushdown; without one the hit is certain
            let sv = make_simplex_vectors(r).unwrap();
            let lifted_rows: Vec<Vec<bool>> = (0..r)
                .map(|j| (0..r).map(|i| h.contains(sv.lift(&class[i], j).unwrap().coords())).collect())
                .collect();
            if lifted_rows != est.matrix.entries() {
                return Err(format!("{name} ({r},{d}): hit matrix disagrees with the lift"));
            }
            let complement_matchable = permutations(r).iter().any(|s| (0..r).all(|i| !lifted_rows[s[i]][i]));
            if complement_matchable != est.complement_splits {
                return Err(format!("{name} ({r},{d}): complement split flag"));
            }
            if !est.complement_splits {
                if est.value != Rational::one() {
                    return Err(format!("{name} ({r},{d}): unsplittable but hit {}", est.value));
                }
                ones += 1;
            }
        }
        details.push(format!("{name}: 100 in range, {ones} unsplittable all at 1"));
    }
    Ok(details.join("; "))
}

fn run_cli(args: &[&str], out: &std::path::Path) -> Result<serde_json::Value, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_tverberg"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!("{args:?} exited with {}", output.status));
    }
    let name = args[0];
    let text = std::fs::read_to_string(out.join(format!("{name}.json"))).map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(report["results"].clone())
}

fn crit10_reproducibility() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["generate", "--generator", "random", "-n", "4", "-r", "3", "-d", "2", "--seed", "5"],
        &["generate", "--generator", "perfect_split", "-n", "4", "-r", "2", "-d", "2", "--seed", "5"],
        &["search", "--generator", "random", "-n", "4", "-r", "2", "-d", "2", "--seed", "9", "--trials", "12", "--target", "1"],
        &["capacity", "--generator", "random", "-n", "4", "-r", "2", "-d", "2", "--seed", "2", "--mode", "monte_carlo", "--trials", "40"],
        &["check", "--generator", "random", "-n", "2", "-r", "2", "-d", "1", "--seed", "4", "--trials", "10"],
    ];
    for args in runs {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = serde_json::to_string(&run_cli(args, a.path())?).unwrap();
        let second = serde_json::to_string(&run_cli(args, b.path())?).unwrap();
        if first != second {
            return Err(format!("{} results differ between runs", args[0]));
        }
    }
    Ok(format!("{} randomized runs repeated byte-identically", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("lift/hull equivalence", crit1_capture_equivalence),
        ("pushdown empty and covering", crit2_pushdown),
        ("perfect split tolerance bound", crit3_perfect_split_tolerance),
        ("hyperplane breaking set", crit4_hyperplane_break),
        ("clustered split capacity", crit5_clustered),
        ("constants", crit6_constants),
        ("extremal matrix minimizes hit", crit7_min_hit),
        ("attack arithmetic", crit8_attack),
        ("hit expectation bounds", crit9_hit_bounds),
        ("reproducibility", crit10_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
