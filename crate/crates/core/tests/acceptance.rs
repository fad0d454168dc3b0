//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with its
//! tolerance; float comparisons use `|a - b| / (1 + max(|a|, |b|)) ≤ 1e-9`.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use fqdist::distance::{
    check_full_distance_set, distance_set, quotient_set, subfield_construction, PointSet, Regime,
};
use fqdist::fourier::GridFunction;
use fqdist::harness::{
    run_sharpness, run_theorem, run_verify, CheckRecord, ExperimentConfig, Mode, RunReport,
};
use fqdist::numeric::{rel_dev, EPS};
use fqdist::rng::{sample_indices, seeded};
use fqdist::{CharacterCtx, FieldElement, GridDomain, SphereHats, SphereTable};

const FIELDS: [(u32, u32); 9] = [
    (3, 1),
    (5, 1),
    (7, 1),
    (3, 2),
    (11, 1),
    (13, 1),
    (5, 2),
    (3, 3),
    (7, 2),
];
const GRID_CAP: u64 = 1 << 24;
const DENSE_CAP: u64 = 1 << 16;

/// Written straight to the process stdout so the line survives test capture.
fn verdict(criterion: &str, pass: bool, detail: &str) {
    let line = format!(
        "{} {criterion}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "{criterion}: {detail}");
}

fn matrix(cap: u64) -> Vec<(u32, u32, usize)> {
    let mut out = Vec::new();
    for &(p, ell) in &FIELDS {
        let q = (p as u64).pow(ell);
        for d in 2..=4usize {
            if q.pow(d as u32) <= cap {
                out.push((p, ell, d));
            }
        }
    }
    out
}

fn label(p: u32, ell: u32, d: usize) -> String {
    format!("q={} d={d}", p.pow(ell))
}

/// Verify reports for every matrix entry with dense sphere transforms, shared
/// by the identity criteria.
type Entry = ((u32, u32, usize), RunReport);

fn verify_reports() -> &'static Vec<Entry> {
    static REPORTS: OnceLock<Vec<Entry>> = OnceLock::new();
    REPORTS.get_or_init(|| {
        matrix(DENSE_CAP)
            .into_iter()
            .map(|(p, ell, d)| {
                let mut cfg = ExperimentConfig::new(Mode::Verify, p, ell, d);
                cfg.seed = 2024;
                ((p, ell, d), run_verify(&cfg).expect("verify runs"))
            })
            .collect()
    })
}

fn check<'a>(report: &'a RunReport, name: &str) -> &'a CheckRecord {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("missing check {name}"))
}

#[test]
fn criterion_01_sphere_sizes() {
    let mut failures = Vec::new();
    let entries = matrix(GRID_CAP);
    for &(p, ell, d) in &entries {
        let dm = GridDomain::build(p, ell, d).unwrap();
        let f = dm.field();
        // Brute force from coordinates, independent of the sphere table.
        let squares: Vec<FieldElement> = f.elements().map(|x| f.square(x)).collect();
        let mut hist = vec![0i64; dm.q()];
        let mut coords = vec![0usize; d];
        for _ in 0..dm.size() {
            let n = coords
                .iter()
                .fold(FieldElement::ZERO, |acc, &c| f.add(acc, squares[c]));
            hist[n.index()] += 1;
            for c in coords.iter_mut() {
                *c += 1;
                if *c < dm.q() {
                    break;
                }
                *c = 0;
            }
        }
        for t in f.elements() {
            if hist[t.index()] != dm.sphere_size_closed(t) {
                failures.push(format!("{} t={t}", label(p, ell, d)));
            }
        }
    }
    verdict(
        "criterion 1 (sphere sizes)",
        failures.is_empty(),
        &format!(
            "exact, {} (q, d) entries, mismatches {:?}",
            entries.len(),
            failures
        ),
    );
}

#[test]
fn criterion_02_gauss_sum() {
    let mut worst = 0.0f64;
    let mut fields = Vec::new();
    let mut seen_mod4 = [false; 4];
    for p in [3u32, 5, 7, 11, 13] {
        for ell in 1..=3u32 {
            let q = p.pow(ell);
            if q > 49 && ell > 1 {
                continue;
            }
            let chars = CharacterCtx::for_field(p, ell).unwrap();
            let f = chars.field();
            let direct: Complex64 = f
                .nonzero_elements()
                .map(|s| chars.chi(s) * chars.eta(s) as f64)
                .sum();
            worst = worst.max(rel_dev(direct, chars.gauss_closed_form()));
            seen_mod4[(p % 4) as usize] = true;
            fields.push(q);
        }
    }
    let pass = worst <= EPS && seen_mod4[1] && seen_mod4[3];
    verdict(
        "criterion 2 (Gauss sum closed form)",
        pass,
        &format!("tol {EPS:e}, max rel dev {worst:.3e}, q in {fields:?}"),
    );
}

#[test]
fn criterion_03_sphere_transform_closed_form() {
    let mut worst = 0.0f64;
    let mut values = 0u64;
    let entries = matrix(DENSE_CAP);
    for &(p, ell, d) in &entries {
        let dm = GridDomain::build(p, ell, d).unwrap();
        let spheres = Arc::new(SphereTable::build(dm.clone()));
        let dft = SphereHats::from_transforms(spheres.clone());
        let closed = SphereHats::from_closed_form(spheres);
        for j in dm.field().elements() {
            for m in 0..dm.size() {
                worst = worst.max(rel_dev(dft.value(j, m), closed.value(j, m)));
                values += 1;
            }
        }
    }
    verdict(
        "criterion 3 (sphere transform closed form)",
        worst <= EPS,
        &format!(
            "tol {EPS:e}, max rel dev {worst:.3e} over {values} (j, m) pairs in {} entries",
            entries.len()
        ),
    );
}

#[test]
fn criterion_04_character_sum_identities() {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for ((_, _, d), report) in verify_reports() {
        let q = report.config.q as usize;
        let exhaustive = q <= 7 && *d <= 3;
        for name in ["sphere_hat_sum_vanishes", "sphere_hat_weighted_sum"] {
            let c = check(report, name);
            worst = worst.max(c.max_deviation);
            let coverage = if exhaustive {
                c.exhaustive && c.samples == ((q - 1) * (q.pow(*d as u32) - 1)) as u64
            } else {
                c.samples >= 10_000
            };
            if !(c.pass && coverage) {
                pass = false;
                notes.push(format!("q={q} d={d} {name}"));
            }
        }
    }
    verdict(
        "criterion 4 (sum over t of S_rt hat vanishes; lambda-weighted sum)",
        pass,
        &format!("tol {EPS:e}, max dev {worst:.3e}, failing {notes:?}"),
    );
}

#[test]
fn criterion_05_orthogonality_and_omega() {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    let mut branch_totals = (0u64, 0u64);
    for ((_, _, d), report) in verify_reports() {
        let q = report.config.q as usize;
        let exhaustive = q <= 5 && *d <= 3;
        let mut names = vec!["orthogonality_general", "orthogonality_specialized"];
        if d % 2 == 1 {
            names.push("omega");
        }
        for name in names {
            let c = check(report, name);
            worst = worst.max(c.max_deviation);
            let coverage = if exhaustive {
                c.exhaustive
            } else {
                c.samples >= 10_000
            };
            let branches_ok = match c.branches {
                Some(b) => {
                    if name == "orthogonality_general" {
                        branch_totals.0 += b.matched;
                        branch_totals.1 += b.unmatched;
                    }
                    b.matched > 0 && b.unmatched > 0
                }
                None => name == "omega",
            };
            if !(c.pass && coverage && branches_ok) {
                pass = false;
                notes.push(format!("q={q} d={d} {name}"));
            }
        }
    }
    verdict(
        "criterion 5 (orthogonality sums and Omega)",
        pass,
        &format!(
            "tol {EPS:e}, max dev {worst:.3e}, branches matched/unmatched {}/{}, failing {notes:?}",
            branch_totals.0, branch_totals.1
        ),
    );
}

#[test]
fn criterion_06_nu_oracle_equivalence() {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for ((_, _, d), report) in verify_reports() {
        let q = report.config.q as u64;
        for name in [
            "nu_fourier",
            "nu_counting",
            "decomposition_total",
            "ii_equals_iii",
        ] {
            let c = check(report, name);
            worst = worst.max(c.max_deviation);
            let enough = match name {
                "nu_fourier" => c.samples >= 100 * q,
                "nu_counting" => c.samples >= 100,
                _ => c.samples > 0,
            };
            if !(c.pass && enough) {
                pass = false;
                notes.push(format!("q={q} d={d} {name}"));
            }
        }
    }
    verdict(
        "criterion 6 (nu via Fourier vs exact counts; decomposition; II = III)",
        pass,
        &format!("tol {EPS:e}, 100 sets per domain, max dev {worst:.3e}, failing {notes:?}"),
    );
}

#[test]
fn criterion_07_even_quotient_theorem() {
    let mut cfg = ExperimentConfig::new(Mode::Theorem, 13, 1, 2);
    cfg.size = Some(117);
    cfg.trials = 20;
    cfg.seed = 42;
    let report = run_theorem(&cfg).unwrap();
    let full = report
        .trials
        .iter()
        .filter(|t| t.theorem.quotient_set.len() == 13 && t.theorem.regime == Regime::Asserted)
        .count();
    let keys = report
        .trials
        .iter()
        .filter(|t| t.theorem.key_inequalities.len() == 12 && t.theorem.key_inequalities_hold())
        .count();
    verdict(
        "criterion 7 (q=13 d=2 |E|=117: quotient = F_13, key inequality for all 12 r)",
        report.trials.len() == 20 && full == 20 && keys == 20 && report.overall_pass,
        &format!("exact, quotient full {full}/20, key inequalities {keys}/20"),
    );
}

#[test]
fn criterion_08_odd_quotient_theorem() {
    let mut cfg = ExperimentConfig::new(Mode::Theorem, 5, 1, 3);
    cfg.size = Some(68);
    cfg.trials = 20;
    cfg.seed = 7;
    let report = run_theorem(&cfg).unwrap();
    let required = [
        FieldElement::ZERO,
        FieldElement::ONE,
        fqdist::FieldCtx::build(5, 1).unwrap().from_int(4),
    ];
    let contained = report
        .trials
        .iter()
        .filter(|t| required.iter().all(|r| t.theorem.quotient_set.contains(r)))
        .count();
    let keys = report
        .trials
        .iter()
        .filter(|t| {
            let rs: Vec<u32> = t
                .theorem
                .key_inequalities
                .iter()
                .map(|k| k.r.raw())
                .collect();
            rs == [1, 4] && t.theorem.key_inequalities_hold()
        })
        .count();
    verdict(
        "criterion 8 (q=5 d=3 |E|=68: {0,1,4} in quotient, key inequality for r in {1,4})",
        report.trials.len() == 20 && contained == 20 && keys == 20 && report.overall_pass,
        &format!("exact, containment {contained}/20, key inequalities {keys}/20"),
    );
}

#[test]
fn criterion_09_sharpness() {
    let mut rows = Vec::new();
    let mut pass = true;
    for (p, d) in [(3u32, 2usize), (5, 2), (3, 4), (3, 3)] {
        let dm = GridDomain::build(p, 2, d).unwrap();
        let spheres = SphereTable::build(dm.clone());
        let set = subfield_construction(dm.clone()).unwrap();
        let q = dm.q();
        let quotient = quotient_set(dm.field(), &distance_set(&set, &spheres).unwrap());
        let prime: Vec<FieldElement> = dm.field().prime_subfield().collect();
        // |E|² = q^d is the integer form of |E| = q^{d/2}.
        let ok = (set.cardinality() as u64).pow(2) == (q as u64).pow(d as u32)
            && quotient == prime
            && quotient.len() < q;
        pass &= ok;
        let mut cfg = ExperimentConfig::new(Mode::Sharpness, p, 2, d);
        cfg.seed = 1;
        pass &= run_sharpness(&cfg).unwrap().sharpness.unwrap().sharp;
        rows.push(format!(
            "p={p} d={d} |E|={} quotient={}",
            set.cardinality(),
            quotient.len()
        ));
    }
    verdict(
        "criterion 9 (subfield construction is sharp)",
        pass,
        &format!("exact, {rows:?}"),
    );
}

#[test]
fn criterion_10_zero_sphere_transform_bound() {
    let mut worst_ratio = 0.0f64;
    let mut pass = true;
    let entries = matrix(GRID_CAP);
    for &(p, ell, d) in &entries {
        let dm = GridDomain::build(p, ell, d).unwrap();
        let spheres = SphereTable::build(dm.clone());
        let hat = GridFunction::from_indicator(dm.clone(), &spheres.indicator(FieldElement::ZERO))
            .unwrap()
            .forward();
        let max = hat
            .values()
            .iter()
            .skip(1)
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let q = dm.q() as f64;
        let bound = if d % 2 == 0 {
            q.powf(-(d as f64) / 2.0)
        } else {
            q.powf(-(d as f64 + 1.0) / 2.0)
        };
        pass &= max <= bound + EPS;
        worst_ratio = worst_ratio.max(max / bound);
    }
    verdict(
        "criterion 10 (max over m != 0 of |S_0 hat(m)|)",
        pass,
        &format!(
            "slack {EPS:e}, {} entries, worst max/bound {worst_ratio:.12}",
            entries.len()
        ),
    );
}

/// 20 seeded random sets of the smallest size above `2q^{(d+1)/2}`.
fn full_distance_trials(d: usize) -> Result<usize, String> {
    let dm = GridDomain::build(3, 1, d).unwrap();
    let spheres = SphereTable::build(dm.clone());
    let q = dm.q() as u128;
    let mut size = 1usize;
    while (size as u128).pow(2) <= 4 * q.pow(d as u32 + 1) {
        size += 1;
    }
    let mut rng = seeded(11);
    let mut full = 0;
    for _ in 0..20 {
        let pts =
            sample_indices(&mut rng, dm.size(), size).map_err(|e| format!("|E| = {size}: {e}"))?;
        let set = PointSet::from_indices(dm.clone(), pts).unwrap();
        let rep = check_full_distance_set(&set, &spheres).map_err(|e| e.to_string())?;
        if rep.pass && rep.distance_set.len() == dm.q() {
            full += 1;
        }
    }
    Ok(full)
}

#[test]
fn criterion_11_full_distance_set_d3() {
    let res = full_distance_trials(3);
    verdict(
        "criterion 11 (q=3 d=3 |E|=19 > 18: distance set = F_3)",
        res == Ok(20),
        &format!("exact, {res:?} of 20 trials"),
    );
}

// The threshold 2·3^{3/2} ≈ 10.39 exceeds the 9 points of F_3², so no set
// qualifies and the criterion cannot be met as stated.
#[test]
#[ignore = "unattainable: |E| > 10.39 is impossible in the 9-point space F_3^2"]
fn criterion_11_full_distance_set_d2() {
    let res = full_distance_trials(2);
    verdict(
        "criterion 11 (q=3 d=2 |E| > 10.39: distance set = F_3)",
        res == Ok(20),
        &format!("exact, {res:?}"),
    );
}

#[test]
fn criterion_12_determinism() {
    let mut configs = Vec::new();
    let mut t = ExperimentConfig::new(Mode::Theorem, 13, 1, 2);
    t.trials = 5;
    t.seed = 42;
    configs.push(t);
    let mut v = ExperimentConfig::new(Mode::Verify, 7, 1, 3);
    v.seed = 9;
    configs.push(v);
    let mut v2 = ExperimentConfig::new(Mode::Verify, 3, 2, 3);
    v2.seed = 9;
    configs.push(v2);
    configs.push(ExperimentConfig::new(Mode::Sharpness, 5, 2, 2));
    let mut identical = BTreeMap::new();
    for cfg in &configs {
        let run = |c: &ExperimentConfig| fqdist::harness::run(c).unwrap().deterministic_json();
        identical.insert(
            format!("{:?} q={}^{} d={}", cfg.mode, cfg.p, cfg.ell, cfg.d),
            run(cfg) == run(cfg),
        );
    }
    let mut other = configs[0].clone();
    other.seed = 43;
    let seed_matters = fqdist::harness::run(&other).unwrap().deterministic_json()
        != fqdist::harness::run(&configs[0])
            .unwrap()
            .deterministic_json();
    verdict(
        "criterion 12 (identical config and seed give identical JSON)",
        identical.values().all(|&b| b) && seed_matters,
        &format!("byte comparison without timings, {identical:?}, different seed differs: {seed_matters}"),
    );
}
