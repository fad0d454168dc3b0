//! Vectors in F_q^d, the quadratic norm `||x|| = Σ x_i²`, and spheres.
//!
//! A point is stored as a single index, the base-q digits of which are its
//! coordinates: `index = Σ x_i q^i`.

use std::sync::{Arc, OnceLock};

use crate::characters::CharacterCtx;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElement};

/// Default cap on `q^d`.
pub const DEFAULT_GRID_CAP: u64 = 1 << 24;

#[derive(Clone, Debug)]
pub struct GridDomain {
    chars: Arc<CharacterCtx>,
    d: usize,
    size: usize,
    /// `q^i` for `i <= d`.
    strides: Vec<usize>,
}

impl GridDomain {
    pub fn new(chars: Arc<CharacterCtx>, d: usize) -> Result<Self> {
        Self::with_cap(chars, d, DEFAULT_GRID_CAP)
    }

    pub fn with_cap(chars: Arc<CharacterCtx>, d: usize, cap: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        let q = chars.q() as u128;
        let size = q.checked_pow(d as u32).unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(Error::CapExceeded {
                what: "q^d",
                size,
                cap,
            });
        }
        let strides = (0..=d).map(|i| (q as usize).pow(i as u32)).collect();
        Ok(GridDomain {
            chars,
            d,
            size: size as usize,
            strides,
        })
    }

    /// Builds field, characters and domain in one go.
    pub fn build(p: u32, ell: u32, d: usize) -> Result<Arc<Self>> {
        let chars = Arc::new(CharacterCtx::for_field(p, ell)?);
        Ok(Arc::new(Self::new(chars, d)?))
    }

    pub fn chars(&self) -> &CharacterCtx {
        &self.chars
    }

    pub fn chars_arc(&self) -> &Arc<CharacterCtx> {
        &self.chars
    }

    pub fn field(&self) -> &FieldCtx {
        self.chars.field()
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.chars.q() as usize
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// `q^d`.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn point_index(&self, x: &[FieldElement]) -> Result<usize> {
        if x.len() != self.d {
            return Err(Error::Precondition(format!(
                "vector of length {} in dimension {}",
                x.len(),
                self.d
            )));
        }
        let q = self.q();
        let mut idx = 0usize;
        for (i, c) in x.iter().enumerate() {
            if c.index() >= q {
                return Err(Error::OutOfRange {
                    index: c.index() as u64,
                    limit: q as u64,
                });
            }
            idx += c.index() * self.strides[i];
        }
        Ok(idx)
    }

    pub fn index_point(&self, idx: usize) -> Result<Vec<FieldElement>> {
        if idx >= self.size {
            return Err(Error::OutOfRange {
                index: idx as u64,
                limit: self.size as u64,
            });
        }
        Ok(self.coords(idx))
    }

    pub(crate) fn coords(&self, idx: usize) -> Vec<FieldElement> {
        let q = self.q();
        let mut rest = idx;
        (0..self.d)
            .map(|_| {
                let c = rest % q;
                rest /= q;
                FieldElement(c as u32)
            })
            .collect()
    }

    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> FieldElement {
        FieldElement(((idx / self.strides[axis]) % self.q()) as u32)
    }

    /// Index of `x - y`.
    pub fn sub_index(&self, x: usize, y: usize) -> usize {
        let f = self.field();
        let q = self.q();
        let (mut a, mut b) = (x, y);
        let mut out = 0;
        for i in 0..self.d {
            let c = f.sub(FieldElement((a % q) as u32), FieldElement((b % q) as u32));
            out += c.index() * self.strides[i];
            a /= q;
            b /= q;
        }
        out
    }

    /// `||x|| = x_1² + … + x_d²`.
    pub fn norm(&self, x: &[FieldElement]) -> FieldElement {
        let f = self.field();
        x.iter()
            .fold(FieldElement::ZERO, |acc, &c| f.add(acc, f.square(c)))
    }

    pub fn dot(&self, x: usize, m: usize) -> FieldElement {
        let f = self.field();
        (0..self.d).fold(FieldElement::ZERO, |acc, i| {
            f.add(acc, f.mul(self.coord(x, i), self.coord(m, i)))
        })
    }

    /// `|S_t|` from the closed forms: for even d
    /// `q^{d-1} + λ(t) q^{(d-2)/2} η((-1)^{d/2})`, for odd d
    /// `q^{d-1} + q^{(d-1)/2} η((-1)^{(d-1)/2} t)`.
    pub fn sphere_size_closed(&self, t: FieldElement) -> i64 {
        let chars = self.chars();
        let f = self.field();
        let q = self.q() as i64;
        let d = self.d as u32;
        let minus_one = f.from_int(-1);
        if d.is_multiple_of(2) {
            let sign = chars.eta(f.pow(minus_one, (d / 2) as u64)) as i64;
            q.pow(d - 1) + chars.lambda(t) * q.pow((d - 2) / 2) * sign
        } else {
            let arg = f.mul(f.pow(minus_one, ((d - 1) / 2) as u64), t);
            q.pow(d - 1) + q.pow((d - 1) / 2) * chars.eta(arg) as i64
        }
    }
}

/// Per-point norms and per-radius sphere sizes for a domain.
#[derive(Debug)]
pub struct SphereTable {
    domain: Arc<GridDomain>,
    norm_of: Vec<FieldElement>,
    size_of: Vec<u64>,
    members: OnceLock<(Vec<usize>, Vec<u32>)>,
}

impl SphereTable {
    pub fn build(domain: Arc<GridDomain>) -> Self {
        let f = domain.field();
        let q = domain.q();
        let squares: Vec<FieldElement> = f.elements().map(|x| f.square(x)).collect();
        let mut norm_of = vec![FieldElement::ZERO; domain.size()];
        // norm(i) = x_0² + norm(i / q), and i / q < i.
        for i in 1..domain.size() {
            norm_of[i] = f.add(squares[i % q], norm_of[i / q]);
        }
        let mut size_of = vec![0u64; q];
        for n in &norm_of {
            size_of[n.index()] += 1;
        }
        SphereTable {
            domain,
            norm_of,
            size_of,
            members: OnceLock::new(),
        }
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    #[inline]
    pub fn norm_at(&self, idx: usize) -> FieldElement {
        self.norm_of[idx]
    }

    pub fn norms(&self) -> &[FieldElement] {
        &self.norm_of
    }

    #[inline]
    pub fn size_of(&self, t: FieldElement) -> u64 {
        self.size_of[t.index()]
    }

    pub fn sizes(&self) -> &[u64] {
        &self.size_of
    }

    /// Point indices of S_t in increasing order.
    pub fn members(&self, t: FieldElement) -> &[u32] {
        let (offsets, points) = self.members.get_or_init(|| {
            let q = self.domain.q();
            let mut offsets = vec![0usize; q + 1];
            for n in &self.norm_of {
                offsets[n.index() + 1] += 1;
            }
            for i in 0..q {
                offsets[i + 1] += offsets[i];
            }
            let mut cursor = offsets.clone();
            let mut points = vec![0u32; self.norm_of.len()];
            for (i, n) in self.norm_of.iter().enumerate() {
                points[cursor[n.index()]] = i as u32;
                cursor[n.index()] += 1;
            }
            (offsets, points)
        });
        &points[offsets[t.index()]..offsets[t.index() + 1]]
    }

    /// Indicator of S_t as a boolean vector over the grid.
    pub fn indicator(&self, t: FieldElement) -> Vec<bool> {
        self.norm_of.iter().map(|&n| n == t).collect()
    }
}
