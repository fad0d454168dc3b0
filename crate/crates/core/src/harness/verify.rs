//! The identity suite behind `fqdist verify`.

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use super::{BranchCounts, CheckRecord, ExperimentConfig, RunReport, DENSE_HAT_LIMIT};
use crate::characters::CharacterCtx;
use crate::distance::{
    decomposition, distance_set, nu_direct, nu_via_fourier, nu_zero_fourier_form, quotient_set,
    PointSet,
};
use crate::error::Result;
use crate::field::{FieldCtx, FieldElement};
use crate::fourier::{
    omega_sum, orthogonality_sum, sum_sphere_hat_over_t, weighted_sum_sphere_hat, GridFunction,
    SphereHats, DIRECT_TRANSFORM_CAP,
};
use crate::geometry::{GridDomain, SphereTable};
use crate::numeric::DevTracker;
use crate::rng::{sample_indices, seeded, ExperimentRng};

/// Random samples drawn when a sweep is not exhaustive.
pub const SAMPLE_BUDGET: usize = 10_000;
/// `(q, d)` bounds under which the character-sum identities are swept
/// exhaustively over `(r, m)`.
pub const EXHAUSTIVE_SUMS: (usize, usize) = (7, 3);
/// Same for the orthogonality and Ω sums over `(r, m, m')`.
pub const EXHAUSTIVE_ORTHOGONALITY: (usize, usize) = (5, 3);

/// Each check draws from its own stream so restricting one sweep leaves the
/// others unchanged.
fn stream(seed: u64, tag: u64) -> ExperimentRng {
    seeded(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn within(dm: &GridDomain, bound: (usize, usize)) -> bool {
    dm.q() <= bound.0 && dm.d() <= bound.1
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunReport> {
    let started = Instant::now();
    let dm = cfg.domain()?;
    let f = dm.field();
    let ratios = cfg
        .ratio_elements(f)?
        .unwrap_or_else(|| f.nonzero_elements().collect());
    let mut report = RunReport::new(cfg, &dm);
    let spheres = Arc::new(SphereTable::build(dm.clone()));
    let dense = dm.size() <= DENSE_HAT_LIMIT;
    let hats = if dense {
        SphereHats::from_transforms(spheres.clone())
    } else {
        SphereHats::from_closed_form(spheres.clone())
    };

    report.timed("field", || {
        Ok(vec![trace_check(f), gauss_check(dm.chars())])
    })?;
    report.timed("sphere_sizes", || Ok(vec![sphere_size_check(&spheres)]))?;
    report.timed("transform", || Ok(transform_checks(&dm, cfg.seed)))?;
    let mut zero_hat = None;
    report.timed("sphere_hat", || {
        let (rec, s0) = sphere_hat_check(&hats, cfg.seed);
        zero_hat = s0;
        Ok(vec![rec])
    })?;
    report.timed("sphere_zero_hat_bound", || {
        Ok(vec![zero_hat_bound_check(&hats, zero_hat.as_ref())])
    })?;
    report.timed("character_sums", || {
        character_sum_checks(&hats, &ratios, cfg.seed)
    })?;
    report.timed("orthogonality", || {
        orthogonality_checks(&hats, &ratios, cfg.seed)
    })?;
    if dm.d() % 2 == 1 {
        report.timed("omega", || Ok(vec![omega_check(&hats, &ratios, cfg.seed)?]))?;
    }
    report.timed("nu", || nu_checks(&hats, &ratios, cfg.seed))?;
    report.finish(started);
    Ok(report)
}

fn trace_check(f: &FieldCtx) -> CheckRecord {
    let mismatches = f
        .elements()
        .filter(|&a| f.trace(a) != f.trace_by_frobenius(a))
        .count();
    CheckRecord::exact(
        "trace",
        "tabulated Tr(x) equals x + x^p + ... + x^(p^(l-1))",
        f.q() as u64,
        mismatches as u64,
        true,
    )
}

fn gauss_check(chars: &CharacterCtx) -> CheckRecord {
    let mut dev = DevTracker::default();
    let g = chars.gauss_sum();
    dev.observe(g, chars.gauss_closed_form());
    dev.observe(
        Complex64::new(g.norm_sqr(), 0.0),
        Complex64::new(chars.q() as f64, 0.0),
    );
    CheckRecord::from_tracker(
        "gauss_sum",
        "sum_{s!=0} eta(s)chi(s) = (-1)^(l-1) sqrt(q) for p = 1 mod 4, (-1)^(l-1) i^l sqrt(q) for p = 3 mod 4; |G|^2 = q",
        dev,
        true,
    )
    .with_value("re", g.re)
    .with_value("im", g.im)
}

fn sphere_size_check(spheres: &SphereTable) -> CheckRecord {
    let dm = spheres.domain();
    let f = dm.field();
    let mut mismatches = f
        .elements()
        .filter(|&t| spheres.size_of(t) as i64 != dm.sphere_size_closed(t))
        .count() as u64;
    if spheres.sizes().iter().sum::<u64>() != dm.size() as u64 {
        mismatches += 1;
    }
    CheckRecord::exact(
        "sphere_sizes",
        "|S_t| = q^(d-1) + lambda(t) q^((d-2)/2) eta((-1)^(d/2)) for even d, q^(d-1) + q^((d-1)/2) eta((-1)^((d-1)/2) t) for odd d",
        f.q() as u64,
        mismatches,
        true,
    )
}

fn random_function(dm: &Arc<GridDomain>, rng: &mut ExperimentRng) -> GridFunction {
    let values = (0..dm.size())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    GridFunction::from_values(dm.clone(), values).expect("grid length")
}

fn transform_checks(dm: &Arc<GridDomain>, seed: u64) -> Vec<CheckRecord> {
    let mut rng = stream(seed, 1);
    let count = if dm.size() <= DENSE_HAT_LIMIT { 3 } else { 1 };
    let mut inversion = DevTracker::default();
    let mut plancherel = DevTracker::default();
    let mut direct = DevTracker::default();
    for _ in 0..count {
        let g = random_function(dm, &mut rng);
        let hat = g.forward();
        for (a, b) in hat.inverse().values().iter().zip(g.values()) {
            inversion.observe(*a, *b);
        }
        let (lhs, rhs) = g.plancherel_check();
        plancherel.observe(Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0));
        if let Ok(slow) = g.forward_direct() {
            for (a, b) in hat.values().iter().zip(slow.values()) {
                direct.observe(*a, *b);
            }
        }
    }
    let mut out = vec![
        CheckRecord::from_tracker(
            "fourier_inversion",
            "f(x) = sum_m chi(x.m) fhat(m) with fhat(m) = q^(-d) sum_x chi(-x.m) f(x)",
            inversion,
            false,
        ),
        CheckRecord::from_tracker(
            "plancherel",
            "sum_m |fhat(m)|^2 = q^(-d) sum_x |f(x)|^2",
            plancherel,
            false,
        ),
    ];
    if dm.size() <= DIRECT_TRANSFORM_CAP {
        out.push(CheckRecord::from_tracker(
            "transform_direct",
            "axis-by-axis transform equals the direct double sum",
            direct,
            false,
        ));
    }
    out
}

/// Compares DFT sphere transforms with the closed form. Dense grids compare
/// every `(j, m)`; larger grids transform `S_0` and one seeded nonzero radius.
/// Returns the `S_0` transform when it had to be computed here.
fn sphere_hat_check(hats: &SphereHats, seed: u64) -> (CheckRecord, Option<GridFunction>) {
    let spheres = hats.spheres();
    let dm = hats.domain();
    let closed = SphereHats::from_closed_form(spheres.clone());
    let mut dev = DevTracker::default();
    let identity = "S_j hat(m) = q^(-1) delta_0(m) + q^(-d-1) eta^d(-1) G^d sum_{s!=0} eta^d(s) chi(js + ||m||/(4s))";
    if hats.is_dense() {
        for j in dm.field().elements() {
            for m in 0..dm.size() {
                dev.observe(hats.value(j, m), closed.value(j, m));
            }
        }
        return (
            CheckRecord::from_tracker("sphere_hat_closed_form", identity, dev, true),
            None,
        );
    }
    let mut rng = stream(seed, 2);
    let j = FieldElement(rng.random_range(1..dm.q() as u32));
    let mut s0 = None;
    for radius in [FieldElement::ZERO, j] {
        let hat = GridFunction::from_indicator(dm.clone(), &spheres.indicator(radius))
            .expect("grid length")
            .forward();
        for (m, v) in hat.values().iter().enumerate() {
            dev.observe(*v, closed.value(radius, m));
        }
        if radius.is_zero() {
            s0 = Some(hat);
        }
    }
    let rec = CheckRecord::from_tracker("sphere_hat_closed_form", identity, dev, false)
        .with_value("sampled_radius", j.raw() as f64);
    (rec, s0)
}

fn zero_hat_bound_check(hats: &SphereHats, computed: Option<&GridFunction>) -> CheckRecord {
    let dm = hats.domain();
    let s0 = computed.or_else(|| hats.hat(FieldElement::ZERO));
    let max = match s0 {
        Some(h) => h
            .values()
            .iter()
            .skip(1)
            .map(|v| v.norm())
            .fold(0.0, f64::max),
        None => (1..dm.size())
            .map(|m| hats.value(FieldElement::ZERO, m).norm())
            .fold(0.0, f64::max),
    };
    let q = dm.q() as f64;
    let d = dm.d() as f64;
    let bound = if dm.d().is_multiple_of(2) {
        q.powf(-d / 2.0)
    } else {
        q.powf(-(d + 1.0) / 2.0)
    };
    let mut dev = DevTracker::default();
    dev.observe_dev((max - bound).max(0.0) / (1.0 + bound));
    let mut rec = CheckRecord::from_tracker(
        "sphere_zero_hat_bound",
        "max_{m!=0} |S_0 hat(m)| <= q^(-d/2) for even d, q^(-(d+1)/2) for odd d",
        dev,
        true,
    );
    rec.samples = dm.size() as u64 - 1;
    rec.with_value("max", max).with_value("bound", bound)
}

/// `(r, m)` pairs with `m ≠ 0`, exhaustive or sampled.
fn ratio_frequency_pairs(
    dm: &GridDomain,
    ratios: &[FieldElement],
    exhaustive: bool,
    rng: &mut ExperimentRng,
) -> Vec<(FieldElement, usize)> {
    if exhaustive {
        ratios
            .iter()
            .flat_map(|&r| (1..dm.size()).map(move |m| (r, m)))
            .collect()
    } else {
        (0..SAMPLE_BUDGET)
            .map(|_| {
                (
                    ratios[rng.random_range(0..ratios.len())],
                    rng.random_range(1..dm.size()),
                )
            })
            .collect()
    }
}

fn character_sum_checks(
    hats: &SphereHats,
    ratios: &[FieldElement],
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    let dm = hats.domain();
    let exhaustive = within(dm, EXHAUSTIVE_SUMS);
    let pairs = ratio_frequency_pairs(dm, ratios, exhaustive, &mut stream(seed, 3));
    let mut vanish = DevTracker::default();
    let mut weighted = DevTracker::default();
    for &(r, m) in &pairs {
        vanish.observe(sum_sphere_hat_over_t(hats, r, m)?, Complex64::new(0.0, 0.0));
        let (lhs, rhs) = weighted_sum_sphere_hat(hats, r, m)?;
        weighted.observe(lhs, rhs);
    }
    Ok(vec![
        CheckRecord::from_tracker(
            "sphere_hat_sum_vanishes",
            "sum_t S_{rt} hat(m) = 0 for r != 0, m != 0",
            vanish,
            exhaustive,
        ),
        CheckRecord::from_tracker(
            "sphere_hat_weighted_sum",
            "sum_t lambda(t) S_{rt} hat(m) = q S_0 hat(m) for r != 0, m != 0",
            weighted,
            exhaustive,
        ),
    ])
}

fn orthogonality_checks(
    hats: &SphereHats,
    ratios: &[FieldElement],
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    let dm = hats.domain();
    let spheres = hats.spheres();
    let f = dm.field();
    let exhaustive = within(dm, EXHAUSTIVE_ORTHOGONALITY);
    let mut general = DevTracker::default();
    let mut specialized = DevTracker::default();
    let mut branches = BranchCounts {
        matched: 0,
        unmatched: 0,
    };
    let mut visit = |r: FieldElement, m: usize, mp: usize| -> Result<()> {
        let o = orthogonality_sum(hats, r, m, mp)?;
        general.observe(o.direct, o.general);
        specialized.observe(o.direct, o.specialized);
        if o.norms_match {
            branches.matched += 1;
        } else {
            branches.unmatched += 1;
        }
        Ok(())
    };
    if exhaustive {
        for &r in ratios {
            for m in 0..dm.size() {
                for mp in 0..dm.size() {
                    visit(r, m, mp)?;
                }
            }
        }
    } else {
        // Every other sample is steered onto ||m|| = r||m'||, which a uniform
        // draw hits only about once in q.
        let mut rng = stream(seed, 4);
        for i in 0..SAMPLE_BUDGET {
            let r = ratios[rng.random_range(0..ratios.len())];
            let mp = rng.random_range(0..dm.size());
            let m = if i % 2 == 0 {
                let shell = spheres.members(f.mul(r, spheres.norm_at(mp)));
                shell[rng.random_range(0..shell.len())] as usize
            } else {
                rng.random_range(0..dm.size())
            };
            visit(r, m, mp)?;
        }
    }
    let both = branches.matched > 0 && branches.unmatched > 0;
    let mut a = CheckRecord::from_tracker(
        "orthogonality_general",
        "sum_t S_t hat(m) S_{rt} hat(m') = q^(-1) delta_0(m) delta_0(m') + q^(-2d) G^(2d) eta^d(-r) (1 - q^(-1)) if ||m|| = r||m'||, else -q^(-2d-1) G^(2d) eta^d(-r)",
        general,
        exhaustive,
    );
    let mut b = CheckRecord::from_tracker(
        "orthogonality_specialized",
        "the same sum equals q^(-1) delta delta' + (q^(-d) - q^(-d-1)) on the matched branch and -q^(-d-1) otherwise, times eta(r) for odd d",
        specialized,
        exhaustive,
    );
    for rec in [&mut a, &mut b] {
        rec.branches = Some(branches);
        rec.pass &= both;
    }
    Ok(vec![a, b])
}

fn omega_check(hats: &SphereHats, ratios: &[FieldElement], seed: u64) -> Result<CheckRecord> {
    let dm = hats.domain();
    let exhaustive = within(dm, EXHAUSTIVE_ORTHOGONALITY);
    let pairs = ratio_frequency_pairs(dm, ratios, exhaustive, &mut stream(seed, 5));
    let mut dev = DevTracker::default();
    for &(r, m) in &pairs {
        let (direct, closed) = omega_sum(hats, r, m)?;
        dev.observe(direct, closed);
    }
    Ok(CheckRecord::from_tracker(
        "omega",
        "sum_t |S_t| S_{rt} hat(m) = q^((-d-3)/2) G^(d+1) eta(r (-1)^((d+1)/2)) (-1 + sum_s chi(s ||m||)) for odd d",
        dev,
        exhaustive,
    ))
}

fn nu_checks(hats: &SphereHats, ratios: &[FieldElement], seed: u64) -> Result<Vec<CheckRecord>> {
    let dm = hats.domain();
    let spheres = hats.spheres();
    let f = dm.field();
    let dense = dm.size() <= DENSE_HAT_LIMIT;
    let (n_sets, n_decomp) = if dense { (100, 20) } else { (3, 2) };
    let half = (dm.q() as f64).powf(dm.d() as f64 / 2.0).ceil() as usize;
    let max_size = dm.size().min(4 * half + 2).min(1500);
    let mut rng = stream(seed, 6);

    let mut counting_bad = 0u64;
    let mut fourier = DevTracker::default();
    let mut zero_form = DevTracker::default();
    let mut key_bad = 0u64;
    let mut key_samples = 0u64;
    let mut total = DevTracker::default();
    let mut ii_iii = DevTracker::default();
    let mut i_even = DevTracker::default();
    let mut i_odd = DevTracker::default();

    for k in 0..n_sets {
        let size = rng.random_range(1..=max_size);
        let set = PointSet::from_indices(dm.clone(), sample_indices(&mut rng, dm.size(), size)?)?;
        let nu = nu_direct(&set, spheres)?;
        let delta = distance_set(&set, spheres)?;
        let e = size as u128;
        if nu.total() != e * e || (nu.values[0] as u128) < e || nu.support() != delta {
            counting_bad += 1;
        }
        for (t, v) in nu_via_fourier(&set, hats)?.into_iter().enumerate() {
            fourier.observe(v, Complex64::new(nu.values[t] as f64, 0.0));
        }
        zero_form.observe(
            nu_zero_fourier_form(&set, hats)?,
            Complex64::new(nu.values[0] as f64, 0.0),
        );
        let quotient = quotient_set(f, &delta);
        for &r in ratios {
            key_samples += 1;
            if nu.key_inequality(f, r)? != quotient.binary_search(&r).is_ok() {
                key_bad += 1;
            }
        }
        if k < n_decomp {
            let r = ratios[rng.random_range(0..ratios.len())];
            let rep = decomposition(&set, hats, r)?;
            total.observe(rep.total, Complex64::new(rep.direct_total as f64, 0.0));
            ii_iii.observe(rep.ii, rep.iii);
            let e4 = (size as f64).powi(4);
            if let Some(closed) = rep.i_closed_even {
                i_even.observe(rep.i, Complex64::new(closed, 0.0));
            } else if dm.chars().eta(r) == 1 {
                let floor = e4 / dm.q() as f64;
                i_odd.observe_dev((floor - rep.i.re).max(0.0) / (1.0 + floor));
            }
        }
    }

    let mut out = vec![
        CheckRecord::exact(
            "nu_counting",
            "sum_t nu(t) = |E|^2, nu(0) >= |E|, and the support of nu is the distance set",
            n_sets as u64,
            counting_bad,
            false,
        ),
        CheckRecord::from_tracker(
            "nu_fourier",
            "nu(t) = q^(2d) sum_m S_t hat(m) |E hat(m)|^2",
            fourier,
            false,
        ),
        CheckRecord::from_tracker(
            "nu_zero_fourier",
            "nu(0) through its split into the zero frequency and the isotropic frequencies",
            zero_form,
            false,
        ),
        CheckRecord::exact(
            "key_inequality_iff_ratio",
            "nu(0)^2 < sum_t nu(t) nu(rt) exactly when r is a ratio of distances",
            key_samples,
            key_bad,
            false,
        ),
        CheckRecord::from_tracker(
            "decomposition_total",
            "I + II + III + IV = sum_t nu(t) nu(rt)",
            total,
            false,
        ),
        CheckRecord::from_tracker("ii_equals_iii", "II = III", ii_iii, false),
    ];
    if dm.d().is_multiple_of(2) {
        out.push(CheckRecord::from_tracker(
            "i_closed_form",
            "I = q^(-1)|E|^4 + q^(-d)|E|^4 - q^(-d-1)|E|^4 for even d",
            i_even,
            false,
        ));
    } else if i_odd.samples > 0 {
        out.push(CheckRecord::from_tracker(
            "i_lower_bound",
            "I >= q^(-1)|E|^4 for odd d when eta(r) = 1",
            i_odd,
            false,
        ));
    }
    Ok(out)
}
