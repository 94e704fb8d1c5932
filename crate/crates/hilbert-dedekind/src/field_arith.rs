//! Exact arithmetic in a real quadratic field F = Q(sqrt D) of class number
//! one, plus the degenerate rational mode (n = 1).
//!
//! Elements live on the integral basis {1, w} with w = sqrt D when
//! D = 2, 3 mod 4 and w = (1 + sqrt D)/2 when D = 1 mod 4. Coordinates are
//! unbounded integers; embeddings are evaluated in binary64 on demand.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HdError, Result};

/// Fields we accept. All are norm-Euclidean (one-step Euclidean chains).
pub const WHITELIST: [i64; 9] = [1, 2, 3, 5, 6, 7, 11, 13, 17];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Rational,
    Sqrt,
    Half,
}

/// Lightweight handle carried by every element: enough to multiply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    pub d: i64,
    pub basis: Basis,
}

impl Ring {
    fn half_m(&self) -> i64 {
        (self.d - 1) / 4
    }

    /// Images of the basis element w under the embeddings.
    pub fn omega_emb(&self) -> [f64; 2] {
        let s = (self.d as f64).sqrt();
        match self.basis {
            Basis::Rational => [0.0, 0.0],
            Basis::Sqrt => [s, -s],
            Basis::Half => [(1.0 + s) / 2.0, (1.0 - s) / 2.0],
        }
    }

    pub fn degree(&self) -> usize {
        if self.basis == Basis::Rational {
            1
        } else {
            2
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OFElem {
    pub a: BigInt,
    pub b: BigInt,
    pub ring: Ring,
}

impl fmt::Debug for OFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

impl fmt::Display for OFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ring.basis {
            Basis::Rational => write!(f, "{}", self.a),
            _ => {
                let w = if self.ring.basis == Basis::Sqrt {
                    format!("sqrt{}", self.ring.d)
                } else {
                    "w".to_string()
                };
                write!(f, "{}{:+}*{}", self.a, self.b, w)
            }
        }
    }
}

fn sign_big(x: &BigInt) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Exact sign of p + q*sqrt(d) for d > 0 not a square.
fn sign_surd(p: &BigInt, q: &BigInt, d: i64) -> i32 {
    let sp = sign_big(p);
    let sq = sign_big(q);
    if sp >= 0 && sq >= 0 {
        return if sp > 0 || sq > 0 { 1 } else { 0 };
    }
    if sp <= 0 && sq <= 0 {
        return -1;
    }
    let lhs = p * p;
    let rhs = q * q * BigInt::from(d);
    let c = sign_big(&(&lhs - &rhs));
    if sp > 0 {
        c
    } else {
        -c
    }
}

impl OFElem {
    pub fn new(ring: Ring, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        let b = b.into();
        debug_assert!(ring.basis != Basis::Rational || b.is_zero());
        OFElem { a: a.into(), b, ring }
    }

    pub fn from_int(ring: Ring, a: i64) -> Self {
        OFElem::new(ring, a, 0)
    }

    pub fn zero(ring: Ring) -> Self {
        OFElem::from_int(ring, 0)
    }

    pub fn one(ring: Ring) -> Self {
        OFElem::from_int(ring, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn coords_i64(&self) -> Option<(i64, i64)> {
        Some((self.a.to_i64()?, self.b.to_i64()?))
    }

    pub fn norm(&self) -> BigInt {
        match self.ring.basis {
            Basis::Rational => self.a.clone(),
            Basis::Sqrt => &self.a * &self.a - BigInt::from(self.ring.d) * &self.b * &self.b,
            Basis::Half => {
                &self.a * &self.a + &self.a * &self.b
                    - BigInt::from(self.ring.half_m()) * &self.b * &self.b
            }
        }
    }

    pub fn trace(&self) -> BigInt {
        match self.ring.basis {
            Basis::Rational => self.a.clone(),
            Basis::Sqrt => BigInt::from(2) * &self.a,
            Basis::Half => BigInt::from(2) * &self.a + &self.b,
        }
    }

    /// Galois conjugate (identity in rational mode).
    pub fn conj(&self) -> Self {
        match self.ring.basis {
            Basis::Rational => self.clone(),
            Basis::Sqrt => OFElem::new(self.ring, self.a.clone(), -&self.b),
            Basis::Half => OFElem::new(self.ring, &self.a + &self.b, -&self.b),
        }
    }

    /// y with x y = N(x): the conjugate, or 1 over Z.
    pub fn norm_cofactor(&self) -> Self {
        match self.ring.basis {
            Basis::Rational => OFElem::one(self.ring),
            _ => self.conj(),
        }
    }

    pub fn emb(&self, k: usize) -> f64 {
        let w = self.ring.omega_emb();
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * w[k]
    }

    pub fn embs(&self) -> [f64; 2] {
        [self.emb(0), self.emb(1)]
    }

    /// Exact sign of the k-th embedding.
    pub fn sign_at(&self, k: usize) -> i32 {
        let s: i64 = if k == 0 { 1 } else { -1 };
        match self.ring.basis {
            Basis::Rational => sign_big(&self.a),
            Basis::Sqrt => sign_surd(&self.a, &(&self.b * s), self.ring.d),
            Basis::Half => {
                let p = BigInt::from(2) * &self.a + &self.b;
                sign_surd(&p, &(&self.b * s), self.ring.d)
            }
        }
    }

    pub fn is_totally_positive(&self) -> bool {
        (0..self.ring.degree()).all(|k| self.sign_at(k) > 0)
    }

    pub fn is_unit(&self) -> bool {
        self.norm().abs().is_one()
    }

    /// Exact quotient, if it lies in O_F.
    pub fn div_exact(&self, other: &OFElem) -> Option<OFElem> {
        if other.is_zero() {
            return None;
        }
        let n = other.norm();
        let num = self * &other.norm_cofactor();
        let (qa, ra) = num.a.div_rem(&n);
        let (qb, rb) = num.b.div_rem(&n);
        if ra.is_zero() && rb.is_zero() {
            Some(OFElem::new(self.ring, qa, qb))
        } else {
            None
        }
    }

    pub fn divides(&self, other: &OFElem) -> bool {
        other.div_exact(self).is_some()
    }

    pub fn pow(&self, e: u32) -> OFElem {
        let mut r = OFElem::one(self.ring);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// Inverse of a unit.
    pub fn unit_inverse(&self) -> Option<OFElem> {
        let n = self.norm();
        if n.is_one() {
            Some(self.norm_cofactor())
        } else if n == -BigInt::one() {
            Some(-self.norm_cofactor())
        } else {
            None
        }
    }
}

impl<'a> Add<&'a OFElem> for &'a OFElem {
    type Output = OFElem;
    fn add(self, o: &OFElem) -> OFElem {
        OFElem::new(self.ring, &self.a + &o.a, &self.b + &o.b)
    }
}

impl<'a> Sub<&'a OFElem> for &'a OFElem {
    type Output = OFElem;
    fn sub(self, o: &OFElem) -> OFElem {
        OFElem::new(self.ring, &self.a - &o.a, &self.b - &o.b)
    }
}

impl<'a> Mul<&'a OFElem> for &'a OFElem {
    type Output = OFElem;
    fn mul(self, o: &OFElem) -> OFElem {
        let r = self.ring;
        match r.basis {
            Basis::Rational => OFElem::new(r, &self.a * &o.a, 0),
            Basis::Sqrt => OFElem::new(
                r,
                &self.a * &o.a + BigInt::from(r.d) * &self.b * &o.b,
                &self.a * &o.b + &self.b * &o.a,
            ),
            Basis::Half => {
                let bb = &self.b * &o.b;
                OFElem::new(
                    r,
                    &self.a * &o.a + BigInt::from(r.half_m()) * &bb,
                    &self.a * &o.b + &self.b * &o.a + bb,
                )
            }
        }
    }
}

impl Add for OFElem {
    type Output = OFElem;
    fn add(self, o: OFElem) -> OFElem {
        &self + &o
    }
}

impl Sub for OFElem {
    type Output = OFElem;
    fn sub(self, o: OFElem) -> OFElem {
        &self - &o
    }
}

impl Mul for OFElem {
    type Output = OFElem;
    fn mul(self, o: OFElem) -> OFElem {
        &self * &o
    }
}

impl Neg for OFElem {
    type Output = OFElem;
    fn neg(self) -> OFElem {
        OFElem::new(self.ring, -self.a, -self.b)
    }
}

impl Neg for &OFElem {
    type Output = OFElem;
    fn neg(self) -> OFElem {
        OFElem::new(self.ring, -&self.a, -&self.b)
    }
}

impl Serialize for OFElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let enc = |x: &BigInt| match x.to_i64() {
            Some(v) => serde_json::Value::from(v),
            None => serde_json::Value::from(x.to_string()),
        };
        serde_json::Value::Array(vec![enc(&self.a), enc(&self.b)]).serialize(s)
    }
}

/// All constants attached to one field.
#[derive(Clone, Debug)]
pub struct Field {
    pub d: i64,
    pub n: usize,
    pub ring: Ring,
    pub disc: i64,
    pub delta: OFElem,
    pub eps: OFElem,
    pub eps_norm: i64,
    /// Generator of the totally positive units.
    pub eta: OFElem,
    pub regulator: f64,
    pub unit_index: u32,
    pub zeta2: f64,
    pub zeta2_tail: f64,
    pub kappa: f64,
    pub euclid_k: u32,
    pub omega_emb: [f64; 2],
    pub delta_emb: [f64; 2],
    pub eta_emb: [f64; 2],
}

fn is_squarefree(d: i64) -> bool {
    let mut p = 2;
    while p * p <= d {
        if d % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn isqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    Some(r)
}

/// Smallest unit > 1 by direct search on the second coordinate.
fn fundamental_unit(ring: Ring) -> (OFElem, i64) {
    let d = ring.d;
    for y in 1i64.. {
        match ring.basis {
            Basis::Sqrt => {
                for t in [-1i64, 1] {
                    if let Some(x) = isqrt(d * y * y + t) {
                        if x * x == d * y * y + t {
                            return (OFElem::new(ring, x, y), t);
                        }
                    }
                }
            }
            Basis::Half => {
                for t in [-4i64, 4] {
                    if let Some(x) = isqrt(d * y * y + t) {
                        if x * x == d * y * y + t && (x - y) % 2 == 0 {
                            return (OFElem::new(ring, (x - y) / 2, y), t / 4);
                        }
                    }
                }
            }
            Basis::Rational => unreachable!(),
        }
    }
    unreachable!()
}

/// Kronecker symbol (a/n) for n > 0.
pub fn kronecker(a: i64, mut n: i64) -> i32 {
    let mut res = 1;
    while n % 2 == 0 {
        n /= 2;
        if a % 2 == 0 {
            return 0;
        }
        if matches!(a.rem_euclid(8), 3 | 5) {
            res = -res;
        }
    }
    let mut a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        a %= n;
    }
    if n == 1 {
        res
    } else {
        0
    }
}

/// L(2, chi_disc) by the character sum truncated at a whole number of
/// periods, with the Abel-summation tail bound max|S|/(N+1)^2.
pub fn l2_character(disc: i64) -> (f64, f64) {
    static CACHE: OnceLock<Mutex<HashMap<i64, (f64, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&disc) {
        return *v;
    }
    let chi: Vec<i32> = (0..disc).map(|r| kronecker(disc, if r == 0 { disc } else { r })).collect();
    let mut smax = 0i64;
    let mut s = 0i64;
    for r in 1..=disc {
        s += chi[(r % disc) as usize] as i64;
        smax = smax.max(s.abs());
    }
    let periods = 10_000_000 / disc + 1;
    let nmax = periods * disc;
    let mut acc = crate::numerics::Neumaier::default();
    // summed from the small end backwards for accuracy
    for m in (1..=nmax).rev() {
        let c = chi[(m % disc) as usize];
        if c != 0 {
            let mf = m as f64;
            acc.add(c as f64 / (mf * mf));
        }
    }
    let tail = smax as f64 / ((nmax + 1) as f64).powi(2);
    let out = (acc.sum(), tail);
    cache.lock().unwrap().insert(disc, out);
    out
}

impl Field {
    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn elem(&self, a: i64, b: i64) -> OFElem {
        OFElem::new(self.ring, a, b)
    }

    pub fn int(&self, a: i64) -> OFElem {
        OFElem::from_int(self.ring, a)
    }

    pub fn zero(&self) -> OFElem {
        OFElem::zero(self.ring)
    }

    pub fn one(&self) -> OFElem {
        OFElem::one(self.ring)
    }

    /// kappa recomputed from the stored components.
    pub fn kappa_from_parts(&self) -> f64 {
        let pi = std::f64::consts::PI;
        self.disc as f64 * self.zeta2
            / (2f64.powi(self.n as i32) * self.regulator * pi.powi(self.n as i32 + 1))
    }

    /// Coefficient of Omega in Lambda: sqrt(d_F) / (2^{n-1} R_F).
    pub fn omega_coeff(&self) -> f64 {
        (self.disc as f64).sqrt() / (2f64.powi(self.n as i32 - 1) * self.regulator)
    }
}

/// Build the field Q(sqrt D); D = 1 selects the rational mode.
pub fn make_field(d: i64) -> Result<Field> {
    if d < 1 || !is_squarefree(d) {
        return Err(HdError::NotSquarefree(d));
    }
    if !WHITELIST.contains(&d) {
        return Err(HdError::UnsupportedField(d));
    }
    let pi = std::f64::consts::PI;
    if d == 1 {
        let ring = Ring { d: 1, basis: Basis::Rational };
        let one = OFElem::one(ring);
        let zeta2 = pi * pi / 6.0;
        let mut f = Field {
            d,
            n: 1,
            ring,
            disc: 1,
            delta: one.clone(),
            eps: one.clone(),
            eps_norm: 1,
            eta: one,
            regulator: 1.0,
            unit_index: 2,
            zeta2,
            zeta2_tail: 0.0,
            kappa: 0.0,
            euclid_k: 1,
            omega_emb: [0.0; 2],
            delta_emb: [1.0, 1.0],
            eta_emb: [1.0, 1.0],
        };
        f.kappa = f.kappa_from_parts();
        return Ok(f);
    }
    let (basis, disc) = if d % 4 == 1 { (Basis::Half, d) } else { (Basis::Sqrt, 4 * d) };
    let ring = Ring { d, basis };
    let delta = match basis {
        Basis::Sqrt => OFElem::new(ring, 0, 2),
        _ => OFElem::new(ring, -1, 2),
    };
    let (eps, eps_norm) = fundamental_unit(ring);
    let eta = if eps_norm == 1 { eps.clone() } else { &eps * &eps };
    let unit_index = if eps_norm == 1 { 2 } else { 4 };
    let regulator = eps.emb(0).ln();
    let (l2, l2_tail) = l2_character(disc);
    let zeta2 = pi * pi / 6.0 * l2;
    let mut f = Field {
        d,
        n: 2,
        ring,
        disc,
        omega_emb: ring.omega_emb(),
        delta_emb: delta.embs(),
        eta_emb: eta.embs(),
        delta,
        eps,
        eps_norm,
        eta,
        regulator,
        unit_index,
        zeta2,
        zeta2_tail: pi * pi / 6.0 * l2_tail,
        kappa: 0.0,
        euclid_k: 1,
    };
    f.kappa = f.kappa_from_parts();
    Ok(f)
}

/// Floor of a rational num/den with den > 0.
fn floor_div(num: &BigInt, den: &BigInt) -> BigInt {
    num.div_floor(den)
}

/// d = c q + r with q near d/c minimising |N(r)|, ties broken by the
/// lexicographic order of q's coordinates.
pub fn divmod_near(d: &OFElem, c: &OFElem) -> Result<(OFElem, OFElem)> {
    if c.is_zero() {
        return Err(HdError::DivisionByZero);
    }
    let ring = d.ring;
    let mut n = c.norm();
    let mut num = d * &c.norm_cofactor();
    if n.is_negative() {
        n = -n;
        num = -num;
    }
    let fa = floor_div(&num.a, &n);
    let fb = floor_div(&num.b, &n);
    // minimal |N(r)|, then smallest embeddings, then lexicographic q
    let mut best: Option<(BigInt, f64, (BigInt, BigInt), OFElem)> = None;
    let span: Vec<i64> = if ring.basis == Basis::Rational { vec![0] } else { (-2..=3).collect() };
    for da in -2i64..=3 {
        for &db in &span {
            let q = OFElem::new(ring, &fa + da, if ring.basis == Basis::Rational { BigInt::zero() } else { &fb + db });
            let r = d - &(c * &q);
            let nr = r.norm().abs();
            let size: f64 = r.embs().iter().map(|x| x * x).sum();
            let key = (q.a.clone(), q.b.clone());
            let better = match &best {
                None => true,
                Some((bn, bs, bk, _)) => {
                    nr < *bn || (nr == *bn && (size < bs - 1e-9 || ((size - bs).abs() <= 1e-9 && key < *bk)))
                }
            };
            if better {
                best = Some((nr, size, key, r));
            }
        }
    }
    let (_, _, (qa, qb), r) = best.unwrap();
    Ok((OFElem::new(ring, qa, qb), r))
}

/// Bezout witness (a, b) with a d - b c = 1 via the Euclidean chain.
pub fn ext_gcd(c: &OFElem, d: &OFElem) -> Result<(OFElem, OFElem)> {
    let ring = c.ring;
    if c.is_zero() {
        return match d.unit_inverse() {
            Some(inv) => Ok((inv, OFElem::zero(ring))),
            None => Err(HdError::NotCoprime),
        };
    }
    // r_i = s_i d + t_i c
    let (mut r0, mut r1) = (d.clone(), c.clone());
    let (mut s0, mut s1) = (OFElem::one(ring), OFElem::zero(ring));
    let (mut t0, mut t1) = (OFElem::zero(ring), OFElem::one(ring));
    let cap = 4 * (c.norm().abs().to_f64().unwrap_or(1e18).log2() as usize + 8);
    let mut steps = 0;
    while !r1.is_zero() {
        let (q, r) = divmod_near(&r0, &r1)?;
        if r.norm().abs() >= r1.norm().abs() {
            return Err(HdError::NonTermination(steps));
        }
        let s2 = &s0 - &(&q * &s1);
        let t2 = &t0 - &(&q * &t1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
        t0 = std::mem::replace(&mut t1, t2);
        steps += 1;
        if steps > cap {
            return Err(HdError::NonTermination(steps));
        }
    }
    let ginv = r0.unit_inverse().ok_or(HdError::NotCoprime)?;
    // s0 d + t0 c = g, so a = s0/g and b = -t0/g
    let a = &s0 * &ginv;
    let b = -(&t0 * &ginv);
    debug_assert!((&(&a * d) - &(&b * c)) == OFElem::one(ring));
    Ok((a, b))
}

/// Small-coordinate arithmetic for hot loops (no allocation).
pub mod small {
    use super::{Basis, Ring};

    #[inline]
    pub fn mul(r: Ring, x: (i128, i128), y: (i128, i128)) -> (i128, i128) {
        match r.basis {
            Basis::Rational => (x.0 * y.0, 0),
            Basis::Sqrt => (x.0 * y.0 + r.d as i128 * x.1 * y.1, x.0 * y.1 + x.1 * y.0),
            Basis::Half => {
                let bb = x.1 * y.1;
                (x.0 * y.0 + ((r.d - 1) / 4) as i128 * bb, x.0 * y.1 + x.1 * y.0 + bb)
            }
        }
    }

    #[inline]
    pub fn norm(r: Ring, x: (i128, i128)) -> i128 {
        match r.basis {
            Basis::Rational => x.0,
            Basis::Sqrt => x.0 * x.0 - r.d as i128 * x.1 * x.1,
            Basis::Half => x.0 * x.0 + x.0 * x.1 - ((r.d - 1) / 4) as i128 * x.1 * x.1,
        }
    }

    /// Exact sign of the k-th embedding.
    #[inline]
    pub fn sign_at(r: Ring, x: (i128, i128), k: usize) -> i32 {
        let (p, q) = match r.basis {
            Basis::Rational => return x.0.signum() as i32,
            Basis::Sqrt => (x.0, x.1),
            Basis::Half => (2 * x.0 + x.1, x.1),
        };
        let q = if k == 0 { q } else { -q };
        if p >= 0 && q >= 0 {
            return if p > 0 || q > 0 { 1 } else { 0 };
        }
        if p <= 0 && q <= 0 {
            return -1;
        }
        let c = (p * p - r.d as i128 * q * q).signum() as i32;
        if p > 0 {
            c
        } else {
            -c
        }
    }

    /// Visit every lattice point of O_F whose embedding j lies in
    /// [lo_j, hi_j] and whose other embedding lies in [lo_k, hi_k].
    pub fn rect_points<F: FnMut(i64, i64)>(
        w: [f64; 2],
        j: usize,
        (lo_j, hi_j): (f64, f64),
        (lo_k, hi_k): (f64, f64),
        mut visit: F,
    ) {
        let k = 1 - j;
        if lo_j > hi_j || lo_k > hi_k {
            return;
        }
        let dw = w[j] - w[k];
        // b = (x_j - x_k) / (w_j - w_k)
        let (b1, b2) = ((lo_j - hi_k) / dw, (hi_j - lo_k) / dw);
        let (blo, bhi) = (b1.min(b2).ceil() as i64, b1.max(b2).floor() as i64);
        for b in blo..=bhi {
            let bf = b as f64;
            let alo = (lo_j - bf * w[j]).max(lo_k - bf * w[k]).ceil() as i64;
            let ahi = (hi_j - bf * w[j]).min(hi_k - bf * w[k]).floor() as i64;
            for a in alo..=ahi {
                visit(a, b);
            }
        }
    }
}

/// 2x2 matrix over O_F with determinant one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    pub a: OFElem,
    pub b: OFElem,
    pub c: OFElem,
    pub d: OFElem,
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{:?}, {:?}], [{:?}, {:?}]]", self.a, self.b, self.c, self.d)
    }
}

impl Serialize for ModMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[&self.a, &self.b], [&self.c, &self.d]].serialize(s)
    }
}

impl ModMatrix {
    pub fn new(a: OFElem, b: OFElem, c: OFElem, d: OFElem) -> Result<Self> {
        let m = ModMatrix { a, b, c, d };
        if m.det() != OFElem::one(m.a.ring) {
            return Err(HdError::BadDeterminant);
        }
        Ok(m)
    }

    pub fn det(&self) -> OFElem {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn ring(&self) -> Ring {
        self.a.ring
    }

    pub fn identity(ring: Ring) -> Self {
        let (z, o) = (OFElem::zero(ring), OFElem::one(ring));
        ModMatrix { a: o.clone(), b: z.clone(), c: z, d: o }
    }

    pub fn s(ring: Ring) -> Self {
        let (z, o) = (OFElem::zero(ring), OFElem::one(ring));
        ModMatrix { a: z.clone(), b: -&o, c: o, d: z }
    }

    pub fn translation(q: &OFElem) -> Self {
        let ring = q.ring;
        let (z, o) = (OFElem::zero(ring), OFElem::one(ring));
        ModMatrix { a: o.clone(), b: q.clone(), c: z, d: o }
    }

    /// diag(u, u^{-1}) for a unit u.
    pub fn unit_diag(u: &OFElem) -> Option<Self> {
        let inv = u.unit_inverse()?;
        let z = OFElem::zero(u.ring);
        Some(ModMatrix { a: u.clone(), b: z.clone(), c: z, d: inv })
    }

    pub fn mul(&self, o: &ModMatrix) -> ModMatrix {
        ModMatrix {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    pub fn inverse(&self) -> ModMatrix {
        ModMatrix { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn neg(&self) -> ModMatrix {
        ModMatrix { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn pow(&self, k: i64) -> ModMatrix {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut r = ModMatrix::identity(self.ring());
        for _ in 0..k.unsigned_abs() {
            r = r.mul(&base);
        }
        r
    }

    pub fn trace(&self) -> OFElem {
        &self.a + &self.d
    }

    pub fn is_identity(&self) -> bool {
        *self == ModMatrix::identity(self.ring())
    }

    /// Real image at embedding k as (a, b, c, d).
    pub fn emb(&self, k: usize) -> [f64; 4] {
        [self.a.emb(k), self.b.emb(k), self.c.emb(k), self.d.emb(k)]
    }
}

/// Parse "[a,b]" into an element.
pub fn parse_elem(field: &Field, s: &str) -> Result<OFElem> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| HdError::Parse(format!("{s}: {e}")))?;
    elem_from_json(field, &v)
}

fn big_from_json(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| HdError::Parse(format!("not an integer: {n}"))),
        serde_json::Value::String(s) => s.parse().map_err(|_| HdError::Parse(s.clone())),
        other => Err(HdError::Parse(format!("expected integer, got {other}"))),
    }
}

pub fn elem_from_json(field: &Field, v: &serde_json::Value) -> Result<OFElem> {
    match v {
        serde_json::Value::Array(xs) if xs.len() == 2 => {
            let b = big_from_json(&xs[1])?;
            if field.n == 1 && !b.is_zero() {
                return Err(HdError::Parse("rational mode needs b = 0".into()));
            }
            Ok(OFElem::new(field.ring, big_from_json(&xs[0])?, b))
        }
        serde_json::Value::Number(_) => Ok(OFElem::new(field.ring, big_from_json(v)?, 0)),
        other => Err(HdError::Parse(format!("expected [a,b], got {other}"))),
    }
}

/// Parse "[[a,b],[c,d]]" where each entry is an element "[x,y]" or an integer.
pub fn parse_matrix(field: &Field, s: &str) -> Result<ModMatrix> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| HdError::Parse(format!("{s}: {e}")))?;
    let rows = v.as_array().filter(|r| r.len() == 2).ok_or_else(|| HdError::Parse(s.into()))?;
    let mut ent = Vec::new();
    for r in rows {
        let r = r.as_array().filter(|r| r.len() == 2).ok_or_else(|| HdError::Parse(s.into()))?;
        for e in r {
            ent.push(elem_from_json(field, e)?);
        }
    }
    let mut it = ent.into_iter();
    let (a, b, c, d) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    ModMatrix::new(a, b, c, d)
}
