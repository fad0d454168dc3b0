//! Arithmetic in F_q, q = p^ℓ with p an odd prime.
//!
//! Elements are encoded as integers in `[0, q)` by packing the polynomial
//! coefficients `(c_0, …, c_{ℓ-1})` as base-p digits, `index = Σ c_i p^i`.
//! Index 0 is zero, index 1 is one, and indices below `p` form the prime
//! subfield. The modulus is the lexicographically smallest monic irreducible
//! polynomial of degree ℓ, comparing `(c_{ℓ-1}, …, c_0)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{self, Poly};

/// Default cap on the number of field elements.
pub const DEFAULT_ELEMENT_CAP: u64 = 1 << 16;

/// Discrete-log tables are built up to this size; larger fields multiply by
/// polynomial reduction.
pub const LOG_TABLE_LIMIT: u32 = 1 << 16;

/// Fields this small get a full addition table.
const ADD_TABLE_LIMIT: u32 = 256;

/// An element of F_q, identified by its base-p index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FieldElement(pub(crate) u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parameters of a constructed field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldSpec {
    pub p: u32,
    pub ell: u32,
    pub q: u32,
    /// Monic modulus, constant term first (length `ell + 1`).
    pub modulus: Vec<u32>,
}

#[derive(Clone, Debug)]
struct LogTables {
    /// `exp[k] = g^k`, stored for `k < 2(q-1)` so sums of logs need no reduction.
    exp: Vec<u32>,
    /// `log[x]` for nonzero x; `log[0]` is unused.
    log: Vec<u32>,
}

/// An immutable, fully tabulated finite field.
#[derive(Clone, Debug)]
pub struct FieldCtx {
    spec: FieldSpec,
    generator: FieldElement,
    logs: Option<LogTables>,
    trace: Vec<u32>,
    neg: Vec<u32>,
    add_table: Option<Vec<u32>>,
    /// `p^i` for `i < ell`.
    radix: Vec<u32>,
}

impl FieldCtx {
    /// Builds F_{p^ℓ} under the default element cap.
    pub fn build(p: u32, ell: u32) -> Result<Self> {
        Self::build_with_cap(p, ell, DEFAULT_ELEMENT_CAP)
    }

    pub fn build_with_cap(p: u32, ell: u32, cap: u64) -> Result<Self> {
        if p == 2 || !poly::is_prime(p as u64) {
            return Err(Error::NotOddPrime(p as u64));
        }
        if ell == 0 {
            return Err(Error::InvalidDegree(ell));
        }
        let q128 = (p as u128).pow(ell);
        if q128 > cap as u128 || q128 > u32::MAX as u128 {
            return Err(Error::CapExceeded {
                what: "q",
                size: q128,
                cap,
            });
        }
        let q = q128 as u32;
        let modulus = smallest_irreducible(p as u64, ell);
        let radix: Vec<u32> = (0..ell).map(|i| p.pow(i)).collect();
        let spec = FieldSpec {
            p,
            ell,
            q,
            modulus: modulus.iter().map(|&c| c as u32).collect(),
        };
        let neg = (0..q)
            .map(|x| {
                let mut out = 0;
                let mut rest = x;
                for &r in &radix {
                    let c = rest % p;
                    rest /= p;
                    out += ((p - c) % p) * r;
                }
                out
            })
            .collect();
        let mut ctx = FieldCtx {
            spec,
            generator: FieldElement::ONE,
            logs: None,
            trace: Vec::new(),
            neg,
            add_table: None,
            radix,
        };
        if q <= ADD_TABLE_LIMIT {
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = ctx.add_digits(a, b);
                }
            }
            ctx.add_table = Some(table);
        }
        ctx.generator = ctx.find_generator();
        if q <= LOG_TABLE_LIMIT {
            ctx.logs = Some(ctx.build_logs());
        }
        ctx.trace = ctx.build_trace();
        Ok(ctx)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.spec.p
    }

    #[inline]
    pub fn ell(&self) -> u32 {
        self.spec.ell
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.spec.q
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn modulus(&self) -> &[u32] {
        &self.spec.modulus
    }

    /// The primitive element with the smallest index.
    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    pub fn has_log_tables(&self) -> bool {
        self.logs.is_some()
    }

    /// Checked constructor from an index.
    pub fn element(&self, index: u64) -> Result<FieldElement> {
        if index >= self.q() as u64 {
            return Err(Error::OutOfRange {
                index,
                limit: self.q() as u64,
            });
        }
        Ok(FieldElement(index as u32))
    }

    /// The image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        FieldElement(n.rem_euclid(self.p() as i64) as u32)
    }

    /// Base-p coefficients `(c_0, …, c_{ℓ-1})`.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let p = self.p();
        let mut rest = a.0;
        (0..self.ell())
            .map(|_| {
                let c = rest % p;
                rest /= p;
                c
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() > self.ell() as usize {
            return Err(Error::Precondition(format!(
                "{} coefficients for a degree-{} extension",
                coeffs.len(),
                self.ell()
            )));
        }
        let mut idx = 0u64;
        for (i, &c) in coeffs.iter().enumerate() {
            if c >= self.p() {
                return Err(Error::OutOfRange {
                    index: c as u64,
                    limit: self.p() as u64,
                });
            }
            idx += c as u64 * self.radix[i] as u64;
        }
        Ok(FieldElement(idx as u32))
    }

    /// All q elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.q()).map(FieldElement)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (1..self.q()).map(FieldElement)
    }

    /// The prime subfield F_p, which is exactly the indices below p.
    pub fn prime_subfield(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.p()).map(FieldElement)
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let p = self.p();
        if self.ell() == 1 {
            return (a + b) % p;
        }
        let (mut x, mut y) = (a, b);
        let mut out = 0;
        for &r in &self.radix {
            out += ((x % p + y % p) % p) * r;
            x /= p;
            y /= p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.add_table {
            Some(t) => FieldElement(t[a.index() * self.q() as usize + b.index()]),
            None => FieldElement(self.add_digits(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.logs {
            Some(t) => {
                if a.0 == 0 || b.0 == 0 {
                    FieldElement::ZERO
                } else {
                    FieldElement(t.exp[(t.log[a.index()] + t.log[b.index()]) as usize])
                }
            }
            None => self.mul_poly(a, b),
        }
    }

    /// Multiplication by polynomial product and reduction, independent of the
    /// log tables.
    pub fn mul_poly(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let p = self.p() as u64;
        let pa: Poly = self.coeffs(a).iter().map(|&c| c as u64).collect();
        let pb: Poly = self.coeffs(b).iter().map(|&c| c as u64).collect();
        let m: Poly = self.spec.modulus.iter().map(|&c| c as u64).collect();
        let r = poly::mul_mod(&pa, &pb, &m, p);
        let mut idx = 0u32;
        for (i, &c) in r.iter().enumerate() {
            idx += c as u32 * self.radix[i];
        }
        FieldElement(idx)
    }

    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElement, mut exp: u64) -> FieldElement {
        if let Some(t) = &self.logs {
            if a.0 == 0 {
                return if exp == 0 {
                    FieldElement::ONE
                } else {
                    FieldElement::ZERO
                };
            }
            let order = (self.q() - 1) as u64;
            let k = (t.log[a.index()] as u64 * (exp % order)) % order;
            return FieldElement(t.exp[k as usize]);
        }
        let mut acc = FieldElement::ONE;
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_poly(acc, base);
            }
            base = self.mul_poly(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        match &self.logs {
            Some(t) => {
                let order = self.q() - 1;
                let k = (order - t.log[a.index()]) % order;
                Ok(FieldElement(t.exp[k as usize]))
            }
            None => Ok(self.pow(a, self.q() as u64 - 2)),
        }
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Discrete logarithm to the base of [`generator`](Self::generator).
    pub fn log(&self, a: FieldElement) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        match &self.logs {
            Some(t) => Some(t.log[a.index()]),
            None => {
                let mut x = FieldElement::ONE;
                for k in 0..self.q() - 1 {
                    if x == a {
                        return Some(k);
                    }
                    x = self.mul_poly(x, self.generator);
                }
                None
            }
        }
    }

    /// Absolute trace to F_p, as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        self.trace[a.index()]
    }

    /// Trace by its defining sum `a + a^p + … + a^{p^{ℓ-1}}`.
    pub fn trace_by_frobenius(&self, a: FieldElement) -> u32 {
        let mut acc = FieldElement::ZERO;
        let mut x = a;
        for _ in 0..self.ell() {
            acc = self.add(acc, x);
            x = self.pow(x, self.p() as u64);
        }
        debug_assert!(acc.0 < self.p(), "trace left the prime subfield");
        acc.0
    }

    fn find_generator(&self) -> FieldElement {
        let order = (self.q() - 1) as u64;
        let factors = poly::prime_factors(order);
        (1..self.q())
            .map(FieldElement)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&f| self.pow(g, order / f) != FieldElement::ONE)
            })
            .expect("multiplicative group of a finite field is cyclic")
    }

    fn build_logs(&self) -> LogTables {
        let q = self.q() as usize;
        let order = q - 1;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; q];
        let mut x = FieldElement::ONE;
        for k in 0..order {
            exp[k] = x.0;
            exp[k + order] = x.0;
            log[x.index()] = k as u32;
            x = self.mul_poly(x, self.generator);
        }
        LogTables { exp, log }
    }

    fn build_trace(&self) -> Vec<u32> {
        // Trace is F_p-linear, so the basis traces determine the table.
        let p = self.p();
        let basis: Vec<u32> = self
            .radix
            .iter()
            .map(|&r| self.trace_by_frobenius(FieldElement(r)))
            .collect();
        (0..self.q())
            .map(|x| {
                let mut rest = x;
                let mut t = 0u64;
                for &b in &basis {
                    t += (rest % p) as u64 * b as u64;
                    rest /= p;
                }
                (t % p as u64) as u32
            })
            .collect()
    }
}

fn smallest_irreducible(p: u64, ell: u32) -> Poly {
    let count = p.pow(ell);
    (0..count)
        .map(|code| {
            let mut f: Poly = (0..ell).map(|i| (code / p.pow(i)) % p).collect();
            f.push(1);
            f
        })
        .find(|f| poly::is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}
