//! Point sets, the pair-count profile ν, distance and quotient sets, the
//! four-term expansion of `Σ_t ν(t)ν(rt)`, and the theorem checkers.
//!
//! ν is always computed exactly by pair enumeration; the Fourier route is a
//! cross-check and never feeds a theorem verdict.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::fourier::{orthogonality_general, GridFunction, SphereHats};
use crate::geometry::{GridDomain, SphereTable};
use crate::numeric::{csum, Accum};

/// A subset of F_q^d.
#[derive(Clone, Debug)]
pub struct PointSet {
    domain: Arc<GridDomain>,
    indicator: Vec<bool>,
    points: Vec<usize>,
}

impl PointSet {
    /// Builds a set from point indices; duplicates collapse.
    pub fn from_indices(
        domain: Arc<GridDomain>,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut indicator = vec![false; domain.size()];
        for i in indices {
            if i >= domain.size() {
                return Err(Error::OutOfRange {
                    index: i as u64,
                    limit: domain.size() as u64,
                });
            }
            indicator[i] = true;
        }
        Ok(Self::from_indicator_unchecked(domain, indicator))
    }

    pub fn from_vectors(domain: Arc<GridDomain>, vectors: &[Vec<FieldElement>]) -> Result<Self> {
        let idx = vectors
            .iter()
            .map(|v| domain.point_index(v))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(domain, idx)
    }

    fn from_indicator_unchecked(domain: Arc<GridDomain>, indicator: Vec<bool>) -> Self {
        let points = indicator
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        PointSet {
            domain,
            indicator,
            points,
        }
    }

    /// All of F_q^d.
    pub fn full(domain: Arc<GridDomain>) -> Self {
        let n = domain.size();
        Self::from_indicator_unchecked(domain, vec![true; n])
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn indicator(&self) -> &[bool] {
        &self.indicator
    }

    /// Point indices in increasing order.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.indicator.get(idx).copied().unwrap_or(false)
    }

    /// `Ê` as a grid function.
    pub fn transform(&self) -> GridFunction {
        GridFunction::from_indicator(self.domain.clone(), &self.indicator)
            .expect("indicator has grid length")
            .forward()
    }
}

fn check_domain(set: &PointSet, spheres: &SphereTable) -> Result<()> {
    let a = set.domain();
    let b = spheres.domain();
    if Arc::ptr_eq(a, b)
        || (a.q() == b.q() && a.d() == b.d() && a.field().modulus() == b.field().modulus())
    {
        Ok(())
    } else {
        Err(Error::Precondition(
            "point set and sphere table live on different grids".into(),
        ))
    }
}

/// `ν(t)`: the number of ordered pairs `(x, y) ∈ E × E` with `||x − y|| = t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NuProfile {
    pub values: Vec<u64>,
}

impl NuProfile {
    pub fn at(&self, t: FieldElement) -> u64 {
        self.values[t.index()]
    }

    pub fn total(&self) -> u128 {
        self.values.iter().map(|&v| v as u128).sum()
    }

    /// `Σ_t ν(t) ν(rt)` in exact integers.
    pub fn cross_sum(&self, field: &FieldCtx, r: FieldElement) -> Result<u128> {
        if r.is_zero() {
            return Err(Error::Precondition("r must be nonzero".into()));
        }
        Ok(field
            .elements()
            .map(|t| self.at(t) as u128 * self.at(field.mul(r, t)) as u128)
            .sum())
    }

    /// `ν(0)² < Σ_t ν(t) ν(rt)`.
    pub fn key_inequality(&self, field: &FieldCtx, r: FieldElement) -> Result<bool> {
        let nu0 = self.values[0] as u128;
        Ok(nu0 * nu0 < self.cross_sum(field, r)?)
    }

    /// The distances with `ν(t) > 0`.
    pub fn support(&self) -> Vec<FieldElement> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, _)| FieldElement(i as u32))
            .collect()
    }
}

/// Δ(E) in increasing index order.
pub fn distance_set(set: &PointSet, spheres: &SphereTable) -> Result<Vec<FieldElement>> {
    check_domain(set, spheres)?;
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let dm = set.domain();
    let q = dm.q();
    let mut seen = vec![false; q];
    seen[0] = true;
    let mut found = 1;
    let pts = set.points();
    'outer: for (a, &x) in pts.iter().enumerate() {
        for &y in &pts[a + 1..] {
            let n = spheres.norm_at(dm.sub_index(x, y)).index();
            if !seen[n] {
                seen[n] = true;
                found += 1;
                if found == q {
                    break 'outer;
                }
            }
        }
    }
    Ok((0..q)
        .filter(|&i| seen[i])
        .map(|i| FieldElement(i as u32))
        .collect())
}

/// `{a/b : a ∈ Δ, b ∈ Δ ∖ {0}}` in increasing index order.
pub fn quotient_set(field: &FieldCtx, delta: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = BTreeSet::new();
    for &b in delta.iter().filter(|b| !b.is_zero()) {
        let inv = field.inv(b).expect("nonzero");
        for &a in delta {
            out.insert(field.mul(a, inv));
        }
    }
    out.into_iter().collect()
}

/// Exact ν by enumerating unordered pairs against the norm table.
pub fn nu_direct(set: &PointSet, spheres: &SphereTable) -> Result<NuProfile> {
    check_domain(set, spheres)?;
    let dm = set.domain();
    let mut values = vec![0u64; dm.q()];
    let pts = set.points();
    values[0] = pts.len() as u64;
    for (a, &x) in pts.iter().enumerate() {
        for &y in &pts[a + 1..] {
            values[spheres.norm_at(dm.sub_index(x, y)).index()] += 2;
        }
    }
    Ok(NuProfile { values })
}

/// `ν(t) = q^{2d} Σ_m Ŝ_t(m) |Ê(m)|²` for every t.
pub fn nu_via_fourier(set: &PointSet, hats: &SphereHats) -> Result<Vec<Complex64>> {
    check_domain(set, hats.spheres())?;
    let dm = set.domain();
    let classes = energy_classes(&energy(set), hats);
    let scale = (dm.q() as f64).powi(2 * dm.d() as i32);
    Ok(dm
        .field()
        .elements()
        .map(|t| {
            let s = csum(classes.iter().map(|&(m, wm)| hats.value(t, m) * wm));
            s * scale
        })
        .collect())
}

/// `|Ê(m)|²` over the grid.
fn energy(set: &PointSet) -> Vec<f64> {
    set.transform()
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .collect()
}

/// `|Ê|²` grouped into frequencies on which every sphere transform agrees,
/// as `(representative m, summed weight)`. Dense transforms keep each m;
/// closed-form transforms depend on `m ≠ 0` only through `||m||`, so one
/// representative per norm class suffices. The first entry is always `m = 0`.
fn energy_classes(w: &[f64], hats: &SphereHats) -> Vec<(usize, f64)> {
    if hats.is_dense() {
        return w.iter().copied().enumerate().collect();
    }
    let spheres = hats.spheres();
    let q = hats.domain().q();
    let mut hist = vec![0.0f64; q];
    let mut rep = vec![None; q];
    for (m, &wm) in w.iter().enumerate().skip(1) {
        let n = spheres.norm_at(m).index();
        hist[n] += wm;
        rep[n].get_or_insert(m);
    }
    let mut out = vec![(0, w[0])];
    out.extend(
        rep.into_iter()
            .zip(hist)
            .filter_map(|(r, h)| r.map(|m| (m, h))),
    );
    out
}

/// `Σ_t ν(t) ν(rt)` from exact pair counts.
pub fn cross_sum(set: &PointSet, spheres: &SphereTable, r: FieldElement) -> Result<u128> {
    nu_direct(set, spheres)?.cross_sum(spheres.domain().field(), r)
}

/// `ν(0)² < Σ_t ν(t) ν(rt)`, exact.
pub fn key_inequality_check(
    set: &PointSet,
    spheres: &SphereTable,
    r: FieldElement,
) -> Result<bool> {
    nu_direct(set, spheres)?.key_inequality(spheres.domain().field(), r)
}

/// The four spectral terms of `Σ_t ν(t)ν(rt)` next to the exact value.
#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    #[serde(serialize_with = "ser_complex")]
    pub i: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub ii: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub iii: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub iv: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub total: Complex64,
    pub direct_total: u128,
    /// `q^{-1}|E|⁴ + q^{-d}|E|⁴ − q^{-d-1}|E|⁴` for even d.
    pub i_closed_even: Option<f64>,
}

pub(crate) fn ser_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Expands `Σ_t ν(t)ν(rt) = I + II + III + IV` through ν's Fourier form.
///
/// The inner t-sum of IV is replaced by its closed form, so IV reduces to
/// norm histograms of `|Ê|²`: with `W(n) = Σ_{m≠0, ||m||=n} |Ê(m)|²`,
/// the matched pairs contribute `Σ_u W(ru) W(u)` and the rest
/// `(Σ W)² − Σ_u W(ru) W(u)`.
pub fn decomposition(
    set: &PointSet,
    hats: &SphereHats,
    r: FieldElement,
) -> Result<DecompositionReport> {
    if r.is_zero() {
        return Err(Error::Precondition("r must be nonzero".into()));
    }
    let spheres = hats.spheres();
    check_domain(set, spheres)?;
    let dm = set.domain();
    let f = dm.field();
    let q = dm.q() as f64;
    let d = dm.d() as i32;
    let e = set.cardinality() as f64;
    let e2 = e * e;
    let e4 = e2 * e2;
    let w = energy(set);
    let size = |t: FieldElement| spheres.size_of(t) as f64;

    let i_sum: f64 = f.elements().map(|t| size(t) * size(f.mul(r, t))).sum();
    let i = Complex64::new(q.powi(-2 * d) * e4 * i_sum, 0.0);

    let mut ii = Accum::new();
    let mut iii = Accum::new();
    for &(m, wm) in energy_classes(&w, hats).iter().skip(1) {
        let s_ii = csum(f.elements().map(|t| hats.value(f.mul(r, t), m) * size(t)));
        let s_iii = csum(f.elements().map(|t| hats.value(t, m) * size(f.mul(r, t))));
        ii.add(s_ii * wm);
        iii.add(s_iii * wm);
    }
    let pre = q.powi(d) * e2;
    let ii = ii.value() * pre;
    let iii = iii.value() * pre;

    let mut hist = vec![0.0f64; dm.q()];
    for (m, &wm) in w.iter().enumerate().skip(1) {
        hist[spheres.norm_at(m).index()] += wm;
    }
    let total_w: f64 = hist.iter().sum();
    let matched: f64 = f
        .elements()
        .map(|u| hist[f.mul(r, u).index()] * hist[u.index()])
        .sum();
    let k_eq = orthogonality_general(dm, r, false, true);
    let k_neq = orthogonality_general(dm, r, false, false);
    let iv = (k_eq * matched + k_neq * (total_w * total_w - matched)) * q.powi(4 * d);

    let direct_total = cross_sum(set, spheres, r)?;
    let i_closed_even = (d % 2 == 0).then(|| e4 / q + e4 * q.powi(-d) - e4 * q.powi(-d - 1));
    Ok(DecompositionReport {
        i,
        ii,
        iii,
        iv,
        total: i + ii + iii + iv,
        direct_total,
        i_closed_even,
    })
}

/// ν(0) through its Fourier expansion: for even d
/// `q^{-1}|E|² − q^{-1}G^d|E| + q^{-d}G^d|E|² + q^d G^d Σ_{||m||=0, m≠0} |Ê(m)|²`;
/// for odd d the split `M + R` with `M = q^{2d} Ŝ_0(0)|Ê(0)|²` and `R` the
/// remaining frequencies.
pub fn nu_zero_fourier_form(set: &PointSet, hats: &SphereHats) -> Result<Complex64> {
    let spheres = hats.spheres();
    check_domain(set, spheres)?;
    let dm = set.domain();
    let q = dm.q() as f64;
    let d = dm.d() as i32;
    let e = set.cardinality() as f64;
    let w = energy(set);
    if d % 2 == 0 {
        let gd = dm.chars().gauss_sum().powu(d as u32);
        let isotropic: f64 = w
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(m, _)| spheres.norm_at(*m).is_zero())
            .map(|(_, &wm)| wm)
            .sum();
        Ok(Complex64::new(e * e / q, 0.0) - gd * (e / q)
            + gd * (q.powi(-d) * e * e)
            + gd * (q.powi(d) * isotropic))
    } else {
        let scale = q.powi(2 * d);
        let main = hats.value(FieldElement::ZERO, 0) * w[0] * scale;
        let rest = csum(
            energy_classes(&w, hats)
                .iter()
                .skip(1)
                .map(|&(m, wm)| hats.value(FieldElement::ZERO, m) * wm),
        ) * scale;
        Ok(main + rest)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    /// Even d, `|E| ≥ 9q^{d/2}` ⇒ Δ(E)/Δ(E) = F_q.
    EvenQuotient,
    /// Odd d, `|E| ≥ 6q^{d/2}` ⇒ {0} ∪ F_q^+ ⊆ Δ(E)/Δ(E).
    OddQuotient,
    /// `|E| > 2q^{(d+1)/2}` ⇒ Δ(E) = F_q.
    FullDistanceSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// At or above the threshold: the conclusion is mandatory.
    Asserted,
    /// Below the threshold: informational only.
    BelowThreshold,
    /// The threshold exceeds q^d, so no set qualifies.
    Vacuous,
    /// Δ(E) = {0}; the quotient set is empty.
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct KeyInequality {
    pub r: FieldElement,
    pub nu0_squared: u128,
    pub cross_sum: u128,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub q: u32,
    pub d: usize,
    pub size: usize,
    pub threshold: f64,
    pub regime: Regime,
    pub distance_set: Vec<FieldElement>,
    pub quotient_set: Vec<FieldElement>,
    pub required: Vec<FieldElement>,
    /// Required elements absent from the found set.
    pub missing: Vec<FieldElement>,
    /// `required ⊆ found`.
    pub pass: bool,
    pub key_inequalities: Vec<KeyInequality>,
}

impl TheoremReport {
    pub fn is_mandatory(&self) -> bool {
        self.regime == Regime::Asserted
    }

    pub fn key_inequalities_hold(&self) -> bool {
        self.key_inequalities.iter().all(|k| k.holds)
    }
}

/// `|E| ≥ c·q^{d/2}` compared exactly as `|E|² ≥ c²q^d` for integer `c`.
fn meets_half_power(size: usize, c: u128, q: usize, d: usize) -> bool {
    let s = size as u128;
    s * s >= c * c * (q as u128).pow(d as u32)
}

fn half_power_threshold(c: f64, q: usize, d: usize) -> f64 {
    c * (q as f64).powf(d as f64 / 2.0)
}

fn theorem_regime(set_size: usize, delta: &[FieldElement], c: u128, dm: &GridDomain) -> Regime {
    if delta.len() <= 1 {
        Regime::Degenerate
    } else if meets_half_power(set_size, c, dm.q(), dm.d()) {
        Regime::Asserted
    } else if !meets_half_power(dm.size(), c, dm.q(), dm.d()) {
        Regime::Vacuous
    } else {
        Regime::BelowThreshold
    }
}

fn missing(required: &[FieldElement], found: &[FieldElement]) -> Vec<FieldElement> {
    required
        .iter()
        .filter(|x| found.binary_search(x).is_err())
        .copied()
        .collect()
}

fn key_inequalities(
    nu: &NuProfile,
    field: &FieldCtx,
    ratios: &[FieldElement],
) -> Result<Vec<KeyInequality>> {
    let nu0 = nu.values[0] as u128;
    ratios
        .iter()
        .map(|&r| {
            let cross = nu.cross_sum(field, r)?;
            Ok(KeyInequality {
                r,
                nu0_squared: nu0 * nu0,
                cross_sum: cross,
                holds: nu0 * nu0 < cross,
            })
        })
        .collect()
}

/// Checker for the even-dimensional quotient theorem. `ratios` restricts the
/// key-inequality sweep (default: every nonzero r).
pub fn check_theorem_even_with(
    set: &PointSet,
    spheres: &SphereTable,
    ratios: Option<&[FieldElement]>,
) -> Result<TheoremReport> {
    let dm = set.domain().clone();
    if dm.d() % 2 == 1 {
        return Err(Error::OddDimension(dm.d()));
    }
    let f = dm.field();
    let delta = distance_set(set, spheres)?;
    let quotient = quotient_set(f, &delta);
    let required: Vec<FieldElement> = f.elements().collect();
    let all_r: Vec<FieldElement> = f.nonzero_elements().collect();
    let nu = nu_direct(set, spheres)?;
    let keys = key_inequalities(&nu, f, ratios.unwrap_or(&all_r))?;
    let miss = missing(&required, &quotient);
    Ok(TheoremReport {
        theorem: TheoremId::EvenQuotient,
        q: f.q(),
        d: dm.d(),
        size: set.cardinality(),
        threshold: half_power_threshold(9.0, dm.q(), dm.d()),
        regime: theorem_regime(set.cardinality(), &delta, 9, &dm),
        distance_set: delta,
        quotient_set: quotient,
        pass: miss.is_empty(),
        missing: miss,
        required,
        key_inequalities: keys,
    })
}

pub fn check_theorem_even(set: &PointSet, spheres: &SphereTable) -> Result<TheoremReport> {
    check_theorem_even_with(set, spheres, None)
}

/// Checker for the odd-dimensional theorem; the key-inequality sweep
/// defaults to the nonzero squares.
pub fn check_theorem_odd_with(
    set: &PointSet,
    spheres: &SphereTable,
    ratios: Option<&[FieldElement]>,
) -> Result<TheoremReport> {
    let dm = set.domain().clone();
    if dm.d().is_multiple_of(2) {
        return Err(Error::EvenDimension(dm.d()));
    }
    let f = dm.field();
    let chars = dm.chars();
    let delta = distance_set(set, spheres)?;
    let quotient = quotient_set(f, &delta);
    let squares = chars.quadratic_residues();
    let mut required = vec![FieldElement::ZERO];
    required.extend(squares.iter().copied());
    let nu = nu_direct(set, spheres)?;
    let keys = key_inequalities(&nu, f, ratios.unwrap_or(&squares))?;
    let miss = missing(&required, &quotient);
    Ok(TheoremReport {
        theorem: TheoremId::OddQuotient,
        q: f.q(),
        d: dm.d(),
        size: set.cardinality(),
        threshold: half_power_threshold(6.0, dm.q(), dm.d()),
        regime: theorem_regime(set.cardinality(), &delta, 6, &dm),
        distance_set: delta,
        quotient_set: quotient,
        pass: miss.is_empty(),
        missing: miss,
        required,
        key_inequalities: keys,
    })
}

pub fn check_theorem_odd(set: &PointSet, spheres: &SphereTable) -> Result<TheoremReport> {
    check_theorem_odd_with(set, spheres, None)
}

/// Checker for the full-distance-set corollary `|E| > 2q^{(d+1)/2}`.
pub fn check_full_distance_set(set: &PointSet, spheres: &SphereTable) -> Result<TheoremReport> {
    let dm = set.domain().clone();
    let (q, d) = (dm.q() as u128, dm.d() as u32);
    let threshold = 2.0 * (dm.q() as f64).powf((d as f64 + 1.0) / 2.0);
    let s = set.cardinality() as u128;
    if s * s <= 4 * q.pow(d + 1) {
        return Err(Error::BelowThreshold {
            size: set.cardinality(),
            threshold,
        });
    }
    let f = dm.field();
    let delta = distance_set(set, spheres)?;
    let required: Vec<FieldElement> = f.elements().collect();
    let miss = missing(&required, &delta);
    Ok(TheoremReport {
        theorem: TheoremId::FullDistanceSet,
        q: f.q(),
        d: dm.d(),
        size: set.cardinality(),
        threshold,
        regime: Regime::Asserted,
        quotient_set: quotient_set(f, &delta),
        distance_set: delta,
        pass: miss.is_empty(),
        missing: miss,
        required,
        key_inequalities: Vec::new(),
    })
}

/// `E = F_p^d` inside `F_{p²}^d`: the vectors whose coordinates all lie in
/// the prime subfield.
pub fn subfield_construction(domain: Arc<GridDomain>) -> Result<PointSet> {
    let f = domain.field();
    if f.ell() != 2 {
        return Err(Error::Precondition(format!(
            "subfield construction needs the ambient field F_(p^2), got degree {}",
            f.ell()
        )));
    }
    let p = f.p() as usize;
    let q = domain.q();
    let d = domain.d();
    let indices: Vec<usize> = (0..p.pow(d as u32))
        .map(|code| {
            let mut rest = code;
            let mut idx = 0;
            for axis in 0..d {
                idx += (rest % p) * q.pow(axis as u32);
                rest /= p;
            }
            idx
        })
        .collect();
    PointSet::from_indices(domain, indices)
}
