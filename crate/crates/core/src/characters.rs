//! The canonical additive character, the quadratic character, the sphere-size
//! weight λ, and the Gauss sum.
//!
//! χ is fixed to `χ(x) = exp(2πi·Tr(x)/p)`. Every counting quantity in the
//! crate (sphere sizes, ν, distance sets) is the same for any nontrivial
//! additive character, so nothing depends on this choice. η is computed
//! exactly from the parity of the discrete logarithm, with `η(0) = 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::numeric::{close, csum};

#[derive(Clone, Debug)]
pub struct CharacterCtx {
    field: Arc<FieldCtx>,
    chi: Vec<Complex64>,
    eta: Vec<i8>,
    gauss: Complex64,
}

impl CharacterCtx {
    /// Tabulates χ and η and computes the Gauss sum, failing with
    /// `ClosedFormMismatch` if the direct sum disagrees with the closed form.
    pub fn new(field: Arc<FieldCtx>) -> Result<Self> {
        let p = field.p();
        let roots: Vec<Complex64> = (0..p)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64))
            .collect();
        let chi = field
            .elements()
            .map(|x| roots[field.trace(x) as usize])
            .collect();
        let half = (field.q() as u64 - 1) / 2;
        let eta = field
            .elements()
            .map(|x| {
                if x.is_zero() {
                    0
                } else if field.has_log_tables() {
                    if field.log(x).unwrap().is_multiple_of(2) {
                        1
                    } else {
                        -1
                    }
                } else if field.pow(x, half) == FieldElement::ONE {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let mut ctx = CharacterCtx {
            field,
            chi,
            eta,
            gauss: Complex64::new(0.0, 0.0),
        };
        ctx.gauss = ctx.gauss_sum_direct();
        let closed = ctx.gauss_closed_form();
        if !close(ctx.gauss, closed) {
            return Err(Error::ClosedFormMismatch {
                what: "Gauss sum",
                direct: format!("{}", ctx.gauss),
                closed: format!("{closed}"),
            });
        }
        Ok(ctx)
    }

    pub fn for_field(p: u32, ell: u32) -> Result<Self> {
        Self::new(Arc::new(FieldCtx::build(p, ell)?))
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldCtx> {
        &self.field
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.field.q()
    }

    #[inline]
    pub fn chi(&self, x: FieldElement) -> Complex64 {
        self.chi[x.index()]
    }

    pub fn chi_table(&self) -> &[Complex64] {
        &self.chi
    }

    #[inline]
    pub fn eta(&self, x: FieldElement) -> i8 {
        self.eta[x.index()]
    }

    /// `η^k(x)` with the convention `η(0) = 0` and `η^0 ≡ 1` on nonzero
    /// elements. Only the parity of `k` matters.
    pub fn eta_pow(&self, x: FieldElement, k: usize) -> i8 {
        let e = self.eta(x);
        if e == 0 {
            0
        } else if k.is_multiple_of(2) {
            1
        } else {
            e
        }
    }

    /// λ(t): `q - 1` at zero, `-1` elsewhere.
    pub fn lambda(&self, t: FieldElement) -> i64 {
        if t.is_zero() {
            self.q() as i64 - 1
        } else {
            -1
        }
    }

    /// G = Σ_{s≠0} η(s)χ(s), computed when the context was built.
    pub fn gauss_sum(&self) -> Complex64 {
        self.gauss
    }

    fn gauss_sum_direct(&self) -> Complex64 {
        csum(
            self.field
                .nonzero_elements()
                .map(|s| self.chi(s) * self.eta(s) as f64),
        )
    }

    /// `(-1)^{ℓ-1}√q` for `p ≡ 1 (mod 4)`, `(-1)^{ℓ-1} i^ℓ √q` for `p ≡ 3 (mod 4)`.
    pub fn gauss_closed_form(&self) -> Complex64 {
        let ell = self.field.ell();
        let sign = if ell % 2 == 1 { 1.0 } else { -1.0 };
        let root_q = (self.q() as f64).sqrt();
        if self.field.p() % 4 == 1 {
            Complex64::new(sign * root_q, 0.0)
        } else {
            Complex64::i().powu(ell) * (sign * root_q)
        }
    }

    /// The nonzero squares F_q^+, in index order.
    pub fn quadratic_residues(&self) -> Vec<FieldElement> {
        self.field
            .nonzero_elements()
            .filter(|&x| self.eta(x) == 1)
            .collect()
    }

    pub fn is_square(&self, x: FieldElement) -> bool {
        self.eta(x) == 1
    }
}
