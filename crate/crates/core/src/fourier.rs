//! The normalized Fourier transform on F_q^d and the sphere identities built
//! on it.
//!
//! Normalization: `f̂(m) = q^{-d} Σ_x χ(-x·m) f(x)` and `f(x) = Σ_m χ(x·m) f̂(m)`.
//! The default transform factorizes over axes, d passes of length-q kernels,
//! `O(d q^{d+1})` work. [`GridFunction::forward_direct`] evaluates the
//! defining double sum and is kept as an oracle for small grids.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::geometry::{GridDomain, SphereTable};
use crate::numeric::{csum, Accum};

/// Largest grid the `O(q^{2d})` direct transform accepts.
pub const DIRECT_TRANSFORM_CAP: usize = 1 << 12;

/// Kernels up to this field size are tabulated as `q × q` arrays.
const KERNEL_TABLE_LIMIT: usize = 1024;

/// A complex-valued function on F_q^d stored densely in point-index order.
#[derive(Clone, Debug)]
pub struct GridFunction {
    domain: Arc<GridDomain>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(domain: Arc<GridDomain>) -> Self {
        let n = domain.size();
        GridFunction {
            domain,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_values(domain: Arc<GridDomain>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.size() {
            return Err(Error::Precondition(format!(
                "{} values for a grid of {} points",
                values.len(),
                domain.size()
            )));
        }
        Ok(GridFunction { domain, values })
    }

    pub fn from_indicator(domain: Arc<GridDomain>, indicator: &[bool]) -> Result<Self> {
        let values = indicator
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
            .collect();
        Self::from_values(domain, values)
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    /// `f̂(m) = q^{-d} Σ_x χ(-x·m) f(x)`, axis by axis.
    pub fn forward(&self) -> GridFunction {
        let mut out = self.clone();
        out.axis_passes(-1);
        let scale = (self.domain.q() as f64).powi(-(self.domain.d() as i32));
        for v in &mut out.values {
            *v *= scale;
        }
        out
    }

    /// `f(x) = Σ_m χ(x·m) f̂(m)`.
    pub fn inverse(&self) -> GridFunction {
        let mut out = self.clone();
        out.axis_passes(1);
        out
    }

    /// The defining double sum; refuses grids above [`DIRECT_TRANSFORM_CAP`].
    pub fn forward_direct(&self) -> Result<GridFunction> {
        let dm = &self.domain;
        if dm.size() > DIRECT_TRANSFORM_CAP {
            return Err(Error::CapExceeded {
                what: "q^d for direct transform",
                size: dm.size() as u128,
                cap: DIRECT_TRANSFORM_CAP as u64,
            });
        }
        let f = dm.field();
        let chars = dm.chars();
        let scale = (dm.q() as f64).powi(-(dm.d() as i32));
        let values = (0..dm.size())
            .map(|m| {
                let s =
                    csum((0..dm.size()).map(|x| chars.chi(f.neg(dm.dot(x, m))) * self.values[x]));
                s * scale
            })
            .collect();
        Ok(GridFunction {
            domain: dm.clone(),
            values,
        })
    }

    fn axis_passes(&mut self, sign: i32) {
        let dm = self.domain.clone();
        let q = dm.q();
        let f = dm.field();
        let chars = dm.chars();
        let kernel_at = |x: usize, k: usize| -> Complex64 {
            let prod = f.mul(FieldElement(x as u32), FieldElement(k as u32));
            chars.chi(if sign < 0 { f.neg(prod) } else { prod })
        };
        let table: Option<Vec<Complex64>> = (q <= KERNEL_TABLE_LIMIT).then(|| {
            let mut t = Vec::with_capacity(q * q);
            for x in 0..q {
                for k in 0..q {
                    t.push(kernel_at(x, k));
                }
            }
            t
        });
        let mut line = vec![Complex64::new(0.0, 0.0); q];
        for axis in 0..dm.d() {
            let s = dm.stride(axis);
            let block = s * q;
            for outer in (0..dm.size()).step_by(block) {
                for inner in 0..s {
                    let base = outer + inner;
                    for (x, slot) in line.iter_mut().enumerate() {
                        *slot = self.values[base + x * s];
                    }
                    for k in 0..q {
                        let acc = match &table {
                            // The kernel is symmetric in (x, k), so row k is contiguous.
                            Some(t) => t[k * q..(k + 1) * q]
                                .iter()
                                .zip(&line)
                                .fold(Complex64::new(0.0, 0.0), |a, (w, v)| a + w * v),
                            None => (0..q).fold(Complex64::new(0.0, 0.0), |a, x| {
                                a + kernel_at(x, k) * line[x]
                            }),
                        };
                        self.values[base + k * s] = acc;
                    }
                }
            }
        }
    }

    /// `(Σ_m |f̂(m)|², q^{-d} Σ_x |f(x)|²)`.
    pub fn plancherel_check(&self) -> (f64, f64) {
        let hat = self.forward();
        let lhs = csum(hat.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0))).re;
        let rhs = csum(
            self.values
                .iter()
                .map(|v| Complex64::new(v.norm_sqr(), 0.0)),
        )
        .re * (self.domain.q() as f64).powi(-(self.domain.d() as i32));
        (lhs, rhs)
    }
}

/// Closed form of the sphere transform:
/// `Ŝ_j(m) = q^{-1}δ_0(m) + q^{-d-1} η^d(-1) G^d Σ_{s≠0} η^d(s) χ(js + ||m||/(4s))`.
///
/// The value depends on m only through `||m||` and whether `m = 0`.
pub fn sphere_hat_closed_by_norm(
    domain: &GridDomain,
    j: FieldElement,
    norm_m: FieldElement,
    m_is_zero: bool,
) -> Complex64 {
    let f = domain.field();
    let chars = domain.chars();
    let q = domain.q() as f64;
    let d = domain.d();
    let inv4 = f
        .inv(f.from_int(4))
        .expect("4 is invertible in odd characteristic");
    let mut acc = Accum::new();
    for s in f.nonzero_elements() {
        let inv_4s = f.mul(inv4, f.inv(s).unwrap());
        let arg = f.add(f.mul(j, s), f.mul(norm_m, inv_4s));
        acc.add(chars.chi(arg) * chars.eta_pow(s, d) as f64);
    }
    let lead = chars.eta_pow(f.from_int(-1), d) as f64 * q.powi(-(d as i32) - 1);
    let delta = if m_is_zero { 1.0 / q } else { 0.0 };
    Complex64::new(delta, 0.0) + chars.gauss_sum().powu(d as u32) * acc.value() * lead
}

pub fn sphere_hat_closed(domain: &GridDomain, j: FieldElement, m: &[FieldElement]) -> Complex64 {
    let is_zero = m.iter().all(|c| c.is_zero());
    sphere_hat_closed_by_norm(domain, j, domain.norm(m), is_zero)
}

#[derive(Clone, Debug)]
enum HatStore {
    /// One transformed indicator per radius.
    Dense(Vec<GridFunction>),
    /// `at_zero[j]` and `by_norm[j * q + ||m||]` for `m ≠ 0`.
    ByNorm {
        at_zero: Vec<Complex64>,
        by_norm: Vec<Complex64>,
    },
}

/// Ŝ_j(m) for every radius j and frequency m.
#[derive(Clone, Debug)]
pub struct SphereHats {
    spheres: Arc<SphereTable>,
    store: HatStore,
}

impl SphereHats {
    /// Transforms every sphere indicator.
    pub fn from_transforms(spheres: Arc<SphereTable>) -> Self {
        let dm = spheres.domain().clone();
        let values = dm
            .field()
            .elements()
            .map(|j| {
                GridFunction::from_indicator(dm.clone(), &spheres.indicator(j))
                    .expect("indicator has grid length")
                    .forward()
            })
            .collect();
        SphereHats {
            spheres,
            store: HatStore::Dense(values),
        }
    }

    /// Tabulates the closed form per (radius, norm), `O(q^3)` work in total.
    pub fn from_closed_form(spheres: Arc<SphereTable>) -> Self {
        let dm = spheres.domain().clone();
        let f = dm.field();
        let q = dm.q();
        let at_zero = f
            .elements()
            .map(|j| sphere_hat_closed_by_norm(&dm, j, FieldElement::ZERO, true))
            .collect();
        let mut by_norm = Vec::with_capacity(q * q);
        for j in f.elements() {
            for n in f.elements() {
                by_norm.push(sphere_hat_closed_by_norm(&dm, j, n, false));
            }
        }
        SphereHats {
            spheres,
            store: HatStore::ByNorm { at_zero, by_norm },
        }
    }

    pub fn spheres(&self) -> &Arc<SphereTable> {
        &self.spheres
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        self.spheres.domain()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.store, HatStore::Dense(_))
    }

    /// Ŝ_j at the point with index `m`.
    #[inline]
    pub fn value(&self, j: FieldElement, m: usize) -> Complex64 {
        match &self.store {
            HatStore::Dense(v) => v[j.index()].values[m],
            HatStore::ByNorm { at_zero, by_norm } => {
                if m == 0 {
                    at_zero[j.index()]
                } else {
                    let q = self.domain().q();
                    by_norm[j.index() * q + self.spheres.norm_at(m).index()]
                }
            }
        }
    }

    pub fn hat(&self, j: FieldElement) -> Option<&GridFunction> {
        match &self.store {
            HatStore::Dense(v) => Some(&v[j.index()]),
            HatStore::ByNorm { .. } => None,
        }
    }
}

fn require_nonzero_r(r: FieldElement) -> Result<()> {
    if r.is_zero() {
        return Err(Error::Precondition("r must be nonzero".into()));
    }
    Ok(())
}

fn require_nonzero_m(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Precondition("m must be nonzero".into()));
    }
    Ok(())
}

/// `Σ_t Ŝ_{rt}(m)`, which vanishes for `r ≠ 0`, `m ≠ 0`.
pub fn sum_sphere_hat_over_t(hats: &SphereHats, r: FieldElement, m: usize) -> Result<Complex64> {
    require_nonzero_r(r)?;
    require_nonzero_m(m)?;
    let f = hats.domain().field();
    Ok(csum(f.elements().map(|t| hats.value(f.mul(r, t), m))))
}

/// `(Σ_t λ(t) Ŝ_{rt}(m), q Ŝ_0(m))`; the two agree for `r ≠ 0`, `m ≠ 0`.
pub fn weighted_sum_sphere_hat(
    hats: &SphereHats,
    r: FieldElement,
    m: usize,
) -> Result<(Complex64, Complex64)> {
    require_nonzero_r(r)?;
    require_nonzero_m(m)?;
    let dm = hats.domain();
    let f = dm.field();
    let chars = dm.chars();
    let lhs = csum(
        f.elements()
            .map(|t| hats.value(f.mul(r, t), m) * chars.lambda(t) as f64),
    );
    let rhs = hats.value(FieldElement::ZERO, m) * dm.q() as f64;
    Ok((lhs, rhs))
}

/// The direct sum `Σ_t Ŝ_t(m) Ŝ_{rt}(m')` next to both closed forms.
#[derive(Clone, Copy, Debug)]
pub struct Orthogonality {
    pub direct: Complex64,
    /// General form with `G^{2d} η^d(-r)`.
    pub general: Complex64,
    /// Form specialized by the parity of d.
    pub specialized: Complex64,
    /// Whether `||m|| = r ||m'||`.
    pub norms_match: bool,
}

/// The general closed form of `Σ_t Ŝ_t(m) Ŝ_{rt}(m')` given only the branch
/// data; shared with the fourth term of the ν decomposition.
pub fn orthogonality_general(
    domain: &GridDomain,
    r: FieldElement,
    both_zero: bool,
    norms_match: bool,
) -> Complex64 {
    let f = domain.field();
    let chars = domain.chars();
    let q = domain.q() as f64;
    let d = domain.d() as i32;
    let g2d = chars.gauss_sum().powu(2 * d as u32) * chars.eta_pow(f.neg(r), d as usize) as f64;
    let delta = if both_zero { 1.0 / q } else { 0.0 };
    if norms_match {
        Complex64::new(delta, 0.0) + g2d * (q.powi(-2 * d) * (1.0 - 1.0 / q))
    } else {
        -g2d * q.powi(-2 * d - 1)
    }
}

pub fn orthogonality_specialized(
    domain: &GridDomain,
    r: FieldElement,
    both_zero: bool,
    norms_match: bool,
) -> f64 {
    let q = domain.q() as f64;
    let d = domain.d() as i32;
    let twist = if d % 2 == 0 {
        1.0
    } else {
        domain.chars().eta(r) as f64
    };
    let delta = if both_zero { 1.0 / q } else { 0.0 };
    if norms_match {
        delta + (q.powi(-d) - q.powi(-d - 1)) * twist
    } else {
        -q.powi(-d - 1) * twist
    }
}

pub fn orthogonality_sum(
    hats: &SphereHats,
    r: FieldElement,
    m: usize,
    m_prime: usize,
) -> Result<Orthogonality> {
    require_nonzero_r(r)?;
    let dm = hats.domain();
    let f = dm.field();
    let spheres = hats.spheres();
    let direct = csum(
        f.elements()
            .map(|t| hats.value(t, m) * hats.value(f.mul(r, t), m_prime)),
    );
    let norms_match = spheres.norm_at(m) == f.mul(r, spheres.norm_at(m_prime));
    let both_zero = m == 0 && m_prime == 0;
    Ok(Orthogonality {
        direct,
        general: orthogonality_general(dm, r, both_zero, norms_match),
        specialized: Complex64::new(
            orthogonality_specialized(dm, r, both_zero, norms_match),
            0.0,
        ),
        norms_match,
    })
}

/// `(Ω direct, Ω closed)` for odd d, where `Ω = Σ_t |S_t| Ŝ_{rt}(m)` and the
/// closed form is `q^{(-d-3)/2} G^{d+1} η(r(-1)^{(d+1)/2}) (-1 + Σ_s χ(s||m||))`.
pub fn omega_sum(hats: &SphereHats, r: FieldElement, m: usize) -> Result<(Complex64, Complex64)> {
    let dm = hats.domain();
    let d = dm.d();
    if d.is_multiple_of(2) {
        return Err(Error::EvenDimension(d));
    }
    require_nonzero_r(r)?;
    require_nonzero_m(m)?;
    let f = dm.field();
    let chars = dm.chars();
    let spheres = hats.spheres();
    let direct = csum(
        f.elements()
            .map(|t| hats.value(f.mul(r, t), m) * spheres.size_of(t) as f64),
    );
    let q = dm.q() as f64;
    let norm_m = spheres.norm_at(m);
    let char_sum = csum(f.elements().map(|s| chars.chi(f.mul(s, norm_m))));
    let sign_arg = f.mul(r, f.pow(f.from_int(-1), d.div_ceil(2) as u64));
    let closed = chars.gauss_sum().powu(d as u32 + 1)
        * (chars.eta(sign_arg) as f64 * q.powf((-(d as f64) - 3.0) / 2.0))
        * (char_sum - 1.0);
    Ok((direct, closed))
}

/// `max_{m≠0} |Ŝ_0(m)|` together with its bound: `q^{-d/2}` for even d,
/// `q^{-(d+1)/2}` for odd d.
pub fn sphere_zero_hat_max(hats: &SphereHats) -> (f64, f64) {
    let dm = hats.domain();
    let max = (1..dm.size())
        .map(|m| hats.value(FieldElement::ZERO, m).norm())
        .fold(0.0, f64::max);
    let q = dm.q() as f64;
    let d = dm.d() as f64;
    let bound = if dm.d().is_multiple_of(2) {
        q.powf(-d / 2.0)
    } else {
        q.powf(-(d + 1.0) / 2.0)
    };
    (max, bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{close, DevTracker, EPS};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(p: u32, ell: u32, d: usize) -> (Arc<GridDomain>, Arc<SphereTable>) {
        let dm = GridDomain::build(p, ell, d).unwrap();
        let st = Arc::new(SphereTable::build(dm.clone()));
        (dm, st)
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn fe(i: u32) -> FieldElement {
        FieldElement(i)
    }

    fn random_function(dm: &Arc<GridDomain>, rng: &mut ChaCha8Rng) -> GridFunction {
        let vals = (0..dm.size())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        GridFunction::from_values(dm.clone(), vals).unwrap()
    }

    #[test]
    fn delta_and_constant_transforms() {
        let (dm, _) = setup(5, 1, 2);
        let mut ind = vec![false; dm.size()];
        ind[0] = true;
        let hat = GridFunction::from_indicator(dm.clone(), &ind)
            .unwrap()
            .forward();
        assert!(hat.values().iter().all(|&v| close(v, c(1.0 / 25.0))));
        let ones = GridFunction::from_values(dm.clone(), vec![c(1.0); 25])
            .unwrap()
            .forward();
        assert!(close(ones.at(0), c(1.0)));
        assert!(ones.values()[1..].iter().all(|v| v.norm() < EPS));
        // Inverse of constant q^{-d} mass is the delta at zero.
        let back = GridFunction::from_values(dm.clone(), vec![c(1.0 / 25.0); 25])
            .unwrap()
            .inverse();
        assert!(close(back.at(0), c(1.0)));
        assert!(back.values()[1..].iter().all(|v| v.norm() < EPS));
    }

    #[test]
    fn zero_sphere_in_f3_squared() {
        let (dm, st) = setup(3, 1, 2);
        let hat = GridFunction::from_indicator(dm, &st.indicator(FieldElement::ZERO))
            .unwrap()
            .forward();
        assert!(close(hat.at(0), c(1.0 / 9.0)));
    }

    #[test]
    fn axis_transform_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, l, d) in [
            (3, 1, 2),
            (5, 1, 2),
            (3, 2, 2),
            (3, 1, 3),
            (5, 1, 3),
            (7, 1, 2),
            (3, 1, 4),
        ] {
            let (dm, _) = setup(p, l, d);
            let f = random_function(&dm, &mut rng);
            let fast = f.forward();
            let slow = f.forward_direct().unwrap();
            let mut dev = DevTracker::default();
            for i in 0..dm.size() {
                dev.observe(fast.at(i), slow.at(i));
            }
            assert!(dev.pass(), "q={} d={d}: {}", dm.q(), dev.max_dev);
        }
        let (big, _) = setup(5, 1, 6);
        assert!(GridFunction::zeros(big).forward_direct().is_err());
    }

    #[test]
    fn inversion_and_plancherel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (p, l, d) in [(3, 1, 2), (5, 1, 2), (3, 1, 3), (3, 2, 2)] {
            let (dm, _) = setup(p, l, d);
            for _ in 0..100 {
                let f = random_function(&dm, &mut rng);
                let back = f.forward().inverse();
                for i in 0..dm.size() {
                    assert!(close(back.at(i), f.at(i)));
                }
                let (lhs, rhs) = f.plancherel_check();
                assert!(close(c(lhs), c(rhs)));
            }
        }
    }

    #[test]
    fn plancherel_examples() {
        let (dm, _) = setup(5, 1, 2);
        let mut ind = vec![false; 25];
        for i in [0, 3, 7, 11, 12, 19, 24] {
            ind[i] = true;
        }
        let (lhs, rhs) = GridFunction::from_indicator(dm.clone(), &ind)
            .unwrap()
            .plancherel_check();
        assert!(close(c(lhs), c(7.0 / 25.0)) && close(c(rhs), c(7.0 / 25.0)));
        assert_eq!(GridFunction::zeros(dm).plancherel_check(), (0.0, 0.0));
        let (d3, _) = setup(3, 1, 2);
        let (lhs, rhs) = GridFunction::from_indicator(d3, &[true; 9])
            .unwrap()
            .plancherel_check();
        assert!(close(c(lhs), c(1.0)) && close(c(rhs), c(1.0)));
    }

    #[test]
    fn sphere_round_trip() {
        let (dm, st) = setup(3, 1, 3);
        let s1 = GridFunction::from_indicator(dm, &st.indicator(fe(1))).unwrap();
        let back = s1.forward().inverse();
        for i in 0..27 {
            assert!(close(back.at(i), s1.at(i)));
        }
    }

    #[test]
    fn sphere_hat_closed_form_examples() {
        let (dm, st) = setup(3, 1, 2);
        let hats = SphereHats::from_transforms(st.clone());
        let m = dm.point_index(&[fe(1), fe(0)]).unwrap();
        let closed = sphere_hat_closed(&dm, fe(0), &[fe(1), fe(0)]);
        assert!(close(closed, c(1.0 / 9.0)));
        assert!(close(hats.value(fe(0), m), closed));
        for j in dm.field().elements() {
            let zero = sphere_hat_closed(&dm, j, &[fe(0), fe(0)]);
            assert!(close(zero, c(st.size_of(j) as f64 / 9.0)));
        }
        let (d5, st5) = setup(5, 1, 2);
        let hats5 = SphereHats::from_transforms(st5);
        let (max, bound) = sphere_zero_hat_max(&hats5);
        assert!(close(c(bound), c(0.2)));
        assert!(max <= bound + EPS);
        let _ = d5;
    }

    #[test]
    fn closed_form_hats_match_transforms() {
        for (p, l, d) in [
            (3, 1, 2),
            (5, 1, 2),
            (3, 1, 3),
            (3, 2, 2),
            (5, 1, 3),
            (7, 1, 2),
        ] {
            let (dm, st) = setup(p, l, d);
            let dense = SphereHats::from_transforms(st.clone());
            let closed = SphereHats::from_closed_form(st);
            let mut dev = DevTracker::default();
            for j in dm.field().elements() {
                for m in 0..dm.size() {
                    dev.observe(dense.value(j, m), closed.value(j, m));
                }
            }
            assert!(dev.pass(), "q={} d={d}: {}", dm.q(), dev.max_dev);
        }
    }

    #[test]
    fn sphere_sum_identities() {
        let (dm, st) = setup(5, 1, 2);
        let hats = SphereHats::from_transforms(st);
        let m = dm.point_index(&[fe(1), fe(0)]).unwrap();
        assert!(sum_sphere_hat_over_t(&hats, fe(2), m).unwrap().norm() <= EPS);
        let (lhs, rhs) = weighted_sum_sphere_hat(&hats, fe(1), m).unwrap();
        assert!(close(lhs, rhs));
        assert!(sum_sphere_hat_over_t(&hats, fe(2), 0).is_err());
        assert!(weighted_sum_sphere_hat(&hats, fe(0), m).is_err());

        let (d3, st3) = setup(3, 1, 3);
        let h3 = SphereHats::from_transforms(st3);
        let m = d3.point_index(&[fe(1), fe(1), fe(0)]).unwrap();
        assert!(sum_sphere_hat_over_t(&h3, fe(1), m).unwrap().norm() <= EPS);
        let m = d3.point_index(&[fe(1), fe(0), fe(0)]).unwrap();
        let (lhs, rhs) = weighted_sum_sphere_hat(&h3, fe(2), m).unwrap();
        assert!(close(lhs, rhs));

        let (d32, st32) = setup(3, 1, 2);
        let h32 = SphereHats::from_transforms(st32);
        let m = d32.point_index(&[fe(0), fe(1)]).unwrap();
        let (lhs, rhs) = weighted_sum_sphere_hat(&h32, fe(2), m).unwrap();
        assert!(close(lhs, rhs));
    }

    #[test]
    fn orthogonality_examples() {
        let (dm, st) = setup(5, 1, 2);
        let hats = SphereHats::from_transforms(st);
        let o = orthogonality_sum(&hats, fe(1), 0, 0).unwrap();
        let want = c(1.0 / 5.0 + 1.0 / 25.0 - 1.0 / 125.0);
        assert!(o.norms_match);
        assert!(close(o.direct, want) && close(o.general, want) && close(o.specialized, want));
        let m = dm.point_index(&[fe(1), fe(0)]).unwrap();
        let mp = dm.point_index(&[fe(0), fe(2)]).unwrap();
        let o = orthogonality_sum(&hats, fe(1), m, mp).unwrap();
        assert!(!o.norms_match);
        assert!(close(o.direct, c(-1.0 / 125.0)) && close(o.general, c(-1.0 / 125.0)));
        assert!(orthogonality_sum(&hats, fe(0), m, mp).is_err());

        let (d3, st3) = setup(5, 1, 3);
        let h3 = SphereHats::from_transforms(st3);
        let m = d3.point_index(&[fe(1), fe(0), fe(0)]).unwrap();
        // ||m'|| = 1 differs from 2^{-1} = 3.
        let mp = d3.point_index(&[fe(1), fe(0), fe(0)]).unwrap();
        let o = orthogonality_sum(&h3, fe(2), m, mp).unwrap();
        assert!(!o.norms_match);
        let want = c(1.0 / 625.0);
        assert!(close(o.direct, want) && close(o.general, want) && close(o.specialized, want));
    }

    #[test]
    fn orthogonality_exhaustive_small() {
        for (p, d) in [(3, 2), (3, 3), (5, 2)] {
            let (dm, st) = setup(p, 1, d);
            let hats = SphereHats::from_transforms(st);
            let mut dev = DevTracker::default();
            let mut branch = [0u64; 2];
            for r in dm.field().nonzero_elements() {
                for m in 0..dm.size() {
                    for mp in 0..dm.size() {
                        let o = orthogonality_sum(&hats, r, m, mp).unwrap();
                        dev.observe(o.direct, o.general);
                        dev.observe(o.direct, o.specialized);
                        branch[o.norms_match as usize] += 1;
                    }
                }
            }
            assert!(dev.pass(), "q={p} d={d}: {}", dev.max_dev);
            assert!(branch[0] > 0 && branch[1] > 0);
        }
    }

    #[test]
    fn omega_examples() {
        let (dm, st) = setup(5, 1, 3);
        let hats = SphereHats::from_transforms(st.clone());
        let m = dm.point_index(&[fe(1), fe(2), fe(0)]).unwrap();
        assert_eq!(st.norm_at(m), FieldElement::ZERO);
        let (direct, closed) = omega_sum(&hats, fe(1), m).unwrap();
        assert!(close(direct, closed));
        // Zero-norm branch carries the factor q - 1.
        let g = dm.chars().gauss_sum();
        let sign = dm.chars().eta(dm.field().from_int(1)) as f64;
        let expect = g.powu(4) * (sign * 5f64.powi(-3) * 4.0);
        assert!(close(closed, expect));

        let (d3, st3) = setup(3, 1, 3);
        let h3 = SphereHats::from_transforms(st3);
        let m = d3.point_index(&[fe(1), fe(0), fe(0)]).unwrap();
        let (direct, closed) = omega_sum(&h3, fe(2), m).unwrap();
        assert!(close(direct, closed));

        let (_, st2) = setup(3, 1, 2);
        let h2 = SphereHats::from_transforms(st2);
        assert_eq!(
            omega_sum(&h2, fe(1), 1).unwrap_err(),
            Error::EvenDimension(2)
        );
    }

    #[test]
    fn gauss_power_reductions() {
        for (p, l) in [(3, 1), (5, 1), (7, 1), (3, 2), (13, 1)] {
            for d in 2..=5usize {
                let (dm, _) = setup(p, l, 2);
                let chars = dm.chars();
                let q = dm.q() as f64;
                let g2d = chars.gauss_sum().powu(2 * d as u32);
                let target = c(q.powi(d as i32));
                if d % 2 == 0 {
                    assert!(close(g2d, target));
                } else {
                    let e = chars.eta(dm.field().from_int(-1)) as f64;
                    assert!(close(g2d * e, target));
                }
            }
        }
    }
}
