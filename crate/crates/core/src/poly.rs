//! Dense polynomials over a prime field F_p, coefficients stored constant term
//! first. Only what modulus selection and the slow multiplication path need.

pub(crate) type Poly = Vec<u64>;

pub(crate) fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p is prime, so a^(p-2) is the inverse.
    pow_mod_int(a % p, p - 2, p)
}

pub(crate) fn pow_mod_int(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub(crate) fn sub(a: &Poly, b: &Poly, p: u64) -> Poly {
    let n = a.len().max(b.len());
    let mut out: Poly = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo a nonzero `m`.
pub(crate) fn rem(a: &Poly, m: &Poly, p: u64) -> Poly {
    let mut r = a.clone();
    trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let coef = r[dr] * lead_inv % p;
        let shift = dr - dm;
        for (i, &c) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - coef * c % p) % p;
        }
        trim(&mut r);
    }
    r
}

pub(crate) fn gcd(a: &Poly, b: &Poly, p: u64) -> Poly {
    let mut x = a.clone();
    let mut y = b.clone();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

pub(crate) fn mul_mod(a: &Poly, b: &Poly, m: &Poly, p: u64) -> Poly {
    rem(&mul(a, b, p), m, p)
}

pub(crate) fn pow_mod(base: &Poly, mut exp: u64, m: &Poly, p: u64) -> Poly {
    let mut acc: Poly = vec![1];
    let mut b = rem(base, m, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(&acc, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        exp >>= 1;
    }
    acc
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return false;
        }
        f += 1;
    }
    true
}

/// Rabin's irreducibility test for a monic polynomial of degree >= 1.
pub(crate) fn is_irreducible(f: &Poly, p: u64) -> bool {
    let n = (f.len() - 1) as u64;
    if n == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    // x^(p^k) mod f for k = 0..=n by repeated Frobenius.
    let mut frob = vec![rem(&x, f, p)];
    for _ in 0..n {
        let next = pow_mod(frob.last().unwrap(), p, f, p);
        frob.push(next);
    }
    if !sub(&frob[n as usize], &frob[0], p).is_empty() {
        return false;
    }
    prime_factors(n).into_iter().all(|k| {
        let h = sub(&frob[(n / k) as usize], &x, p);
        let g = gcd(f, &h, p);
        g.len() == 1
    })
}

#[cfg(test)]
/// True when `f` has a root in F_p.
pub(crate) fn has_root(f: &Poly, p: u64) -> bool {
    (0..p).any(|x| {
        let mut acc = 0u64;
        for &c in f.iter().rev() {
            acc = (acc * x + c) % p;
        }
        acc == 0
    })
}
