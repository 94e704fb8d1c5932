//! Seeded random inputs for the verifiers.
//!
//! Series cost grows like 1/(y_1 y_2) at every point where Lambda is
//! evaluated, so samplers reject inputs that would send any of those points
//! deep into the cusp.

use crate::dedekind_sums::gcd;
use crate::eta_engine::{aux_point, mobius};
use crate::field_arith::{ext_gcd, Field, ModMatrix, OFElem};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Smallest admissible y-product; about 10 ms per Lambda at this level.
pub const Y_FLOOR: f64 = 0.05;

const ATTEMPTS: usize = 100_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn point(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::new(r.gen_range(-0.5..0.5), r.gen_range(lo..hi))
}

pub fn elem(f: &Field, r: &mut ChaCha8Rng, m: i64, mb: i64) -> OFElem {
    if f.n == 1 {
        f.int(r.gen_range(-m..=m))
    } else {
        f.elem(r.gen_range(-m..=m), r.gen_range(-mb..=mb))
    }
}

/// Coprime (c, d), both nonzero, with |N(c)|, |N(d)| <= nmax.
pub fn coprime_pair(f: &Field, r: &mut ChaCha8Rng, nmax: u32) -> (OFElem, OFElem) {
    loop {
        let c = elem(f, r, 7, 2);
        let d = elem(f, r, 7, 2);
        if c.is_zero() || d.is_zero() {
            continue;
        }
        let small = |x: &OFElem| x.norm().magnitude() <= &nmax.into();
        if small(&c) && small(&d) && gcd(&c, &d).map(|g| g.is_unit()).unwrap_or(false) {
            return (c, d);
        }
    }
}

/// Matrix with bottom row (c, d) and a random translate on top.
pub fn matrix_with_row(f: &Field, r: &mut ChaCha8Rng, c: &OFElem, d: &OFElem) -> ModMatrix {
    let (a, b) = ext_gcd(c, d).expect("coprime row");
    let t = elem(f, r, 2, 1);
    ModMatrix::new(a + t.clone() * c.clone(), b + t * d.clone(), c.clone(), d.clone()).expect("det 1")
}

/// Product of imaginary parts; the sole driver of series cost.
pub fn y_product(z: &[Complex64]) -> f64 {
    z.iter().map(|w| w.im).product()
}

/// Whether Phi_j(m, zhat) touches only points with y-product >= floor.
pub fn phi_affordable(f: &Field, m: &ModMatrix, zhat: &[Complex64], j: usize, floor: f64) -> bool {
    if m.c.is_zero() {
        return true;
    }
    let mut z = zhat.to_vec();
    z.insert(j, aux_point(f, m, zhat, j));
    let az: Vec<Complex64> = z.iter().enumerate().map(|(k, &w)| mobius(m.emb(k), w)).collect();
    y_product(&z) >= floor && y_product(&az) >= floor
}

/// Random (A, zhat) whose Phi is affordable, c(A) != 0.
pub fn matrix_and_point(f: &Field, r: &mut ChaCha8Rng, nmax: u32, j: usize) -> (ModMatrix, Vec<Complex64>) {
    for _ in 0..ATTEMPTS {
        let (c, d) = coprime_pair(f, r, nmax);
        let m = matrix_with_row(f, r, &c, &d);
        let zhat: Vec<Complex64> = (1..f.n).map(|_| point(r, 0.5, 2.0)).collect();
        if phi_affordable(f, &m, &zhat, j, Y_FLOOR) {
            return (m, zhat);
        }
    }
    panic!("sampler exhausted");
}

/// Random pair (A, B) and zhat such that Phi(AB, zhat), Phi(A, B zhat) and
/// Phi(B, zhat) are all affordable.
pub fn cocycle_triple(f: &Field, r: &mut ChaCha8Rng, nmax: u32, j: usize) -> (ModMatrix, ModMatrix, Vec<Complex64>) {
    for _ in 0..ATTEMPTS {
        let (c, d) = coprime_pair(f, r, nmax);
        let a = matrix_with_row(f, r, &c, &d);
        let (c, d) = coprime_pair(f, r, nmax);
        let b = matrix_with_row(f, r, &c, &d);
        let zhat: Vec<Complex64> = (1..f.n).map(|_| point(r, 0.5, 2.0)).collect();
        let k = 1 - j;
        let bz: Vec<Complex64> = zhat.iter().map(|&w| mobius(b.emb(k), w)).collect();
        let ab = a.mul(&b);
        if phi_affordable(f, &ab, &zhat, j, Y_FLOOR) && phi_affordable(f, &a, &bz, j, Y_FLOOR) && phi_affordable(f, &b, &zhat, j, Y_FLOOR) {
            return (a, b, zhat);
        }
    }
    panic!("sampler exhausted");
}

/// Coprime (c, d) and zhat for which s_j(d, c; zhat) is affordable.
pub fn pair_and_point(f: &Field, r: &mut ChaCha8Rng, nmax: u32, j: usize) -> (OFElem, OFElem, Vec<Complex64>) {
    for _ in 0..ATTEMPTS {
        let (c, d) = coprime_pair(f, r, nmax);
        let (a, b) = ext_gcd(&c, &d).expect("coprime");
        let m = ModMatrix::new(a, b, c.clone(), d.clone()).expect("det 1");
        let zhat: Vec<Complex64> = (1..f.n).map(|_| point(r, 0.5, 2.0)).collect();
        if phi_affordable(f, &m, &zhat, j, Y_FLOOR) {
            return (c, d, zhat);
        }
    }
    panic!("sampler exhausted");
}
