//! Omega, Lambda, h, Phi, the area cocycle, and the classical eta functions.

use crate::dedekind_sums::classical_s;
use crate::error::{HdError, Result};
use crate::field_arith::{kronecker, small, Field, ModMatrix, OFElem};
use crate::numerics::{CNeumaier, Neumaier};
use crate::par;
use crate::unit_domain::{nu_reps, resolve_bound, tail_bound, visit_mu, x_bound, TruncationParams};
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;

/// A truncated series value with a rigorous bound on what was dropped.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_error: f64,
    pub terms: usize,
    pub weight_bound: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhiValue {
    pub value: f64,
    pub tail_error: f64,
}

fn check_point(field: &Field, z: &[Complex64]) -> Result<[f64; 2]> {
    if z.len() != field.n {
        return Err(HdError::Parse(format!("expected {} coordinates, got {}", field.n, z.len())));
    }
    if z.iter().any(|w| !(w.im > 0.0) || !w.re.is_finite()) {
        return Err(HdError::Parse("point is not in the upper half plane".into()));
    }
    Ok(if field.n == 1 { [z[0].im, z[0].im] } else { [z[0].im, z[1].im] })
}

/// A point with the same Omega and theta-type sums: y balanced by a power of
/// the totally positive unit, then x shifted by the nearest vector of O.
/// Both moves leave the series unchanged and keep the phases well conditioned.
pub fn normal_point(field: &Field, z: &[Complex64]) -> Vec<Complex64> {
    if field.n == 1 {
        return vec![Complex64::new(z[0].re - z[0].re.round(), z[0].im)];
    }
    let e = field.eta_emb;
    let k = (-(z[0].im / z[1].im).ln() / (2.0 * e[0].ln())).round() as i32;
    let mut w = [z[0] * e[0].powi(k), z[1] * e[1].powi(k)];
    let om = field.omega_emb;
    let q = ((w[0].re - w[1].re) / (om[0] - om[1])).round();
    let p = (w[0].re - q * om[0]).round();
    for (k, wk) in w.iter_mut().enumerate() {
        wk.re -= p + q * om[k];
    }
    w.to_vec()
}

/// Omega_j(z) for z in H^n.
pub fn omega(field: &Field, z: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<SeriesValue> {
    let y = check_point(field, z)?;
    let zn = normal_point(field, z);
    let x = [zn[0].re, zn.get(1).map_or(0.0, |w| w.re)];
    let y = if field.n == 1 { y } else { [zn[0].im, zn[1].im] };
    let b = resolve_bound(field, y, trunc)?;
    let reps = nu_reps(field, x_bound(field, y, b));
    let idx = field.unit_index as f64;
    let parts = par::map_slice(&reps, |nu| {
        let mut acc = CNeumaier::default();
        let mut count = 0usize;
        visit_mu(field, nu, y, b, j, |_, xi, w| {
            let ph = 2.0 * PI * (xi[0] * x[0] + xi[1] * x[1]);
            let (s, c) = ph.sin_cos();
            acc.add(Complex64::new(c, s) * (-w).exp());
            count += 1;
        });
        (acc.sum() / (idx * nu.norm as f64), count)
    });
    let terms: usize = parts.iter().map(|p| p.1).sum();
    if terms > trunc.max_terms {
        return Err(HdError::CapExceeded(trunc.max_terms));
    }
    let mut acc = CNeumaier::default();
    for p in &parts {
        acc.add(p.0);
    }
    Ok(SeriesValue { value: acc.sum(), tail_error: tail_bound(field, y, b), terms, weight_bound: b })
}

fn prod_other_y(field: &Field, z: &[Complex64], j: usize) -> f64 {
    (0..field.n).filter(|&k| k != j).map(|k| z[k].im).product()
}

/// Lambda_j(z) = i pi kappa z_j prod_{k != j} y_k - c_F Omega_j(z).
pub fn lambda(field: &Field, z: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<SeriesValue> {
    let om = omega(field, z, j, trunc)?;
    let c = field.omega_coeff();
    let lead = Complex64::new(0.0, PI * field.kappa) * z[j] * prod_other_y(field, z, j);
    Ok(SeriesValue { value: lead - om.value * c, tail_error: om.tail_error * c, ..om })
}

/// h(z) = -4 Re Lambda_j(z).
pub fn h(field: &Field, z: &[Complex64], trunc: &TruncationParams) -> Result<(f64, f64)> {
    let l = lambda(field, z, 0, trunc)?;
    Ok((-4.0 * l.value.re, 4.0 * l.tail_error))
}

fn factor(mut n: u128) -> Vec<(u128, u32)> {
    let mut out = Vec::new();
    let mut p = 2u128;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// A generator of a prime ideal above a split or ramified rational prime.
fn prime_generator(field: &Field, p: u128) -> (i128, i128) {
    let ring = field.ring;
    let w = field.omega_emb;
    let r = (p as f64).sqrt() * field.eps.emb(0).abs() + 2.0;
    let mut found = None;
    small::rect_points(w, 0, (-r, r), (-r, r), |a, b| {
        if found.is_none() && small::norm(ring, (a as i128, b as i128)).unsigned_abs() == p {
            found = Some((a as i128, b as i128));
        }
    });
    found.expect("split prime has a generator in a class-number-one field")
}

fn conj_small(field: &Field, x: (i128, i128)) -> (i128, i128) {
    match field.ring.basis {
        crate::field_arith::Basis::Half => (x.0 + x.1, -x.1),
        _ => (x.0, -x.1),
    }
}

/// x / pi if it lies in O_F.
fn div_small(field: &Field, x: (i128, i128), pi: (i128, i128)) -> Option<(i128, i128)> {
    let n = small::norm(field.ring, pi);
    let t = small::mul(field.ring, x, conj_small(field, pi));
    if t.0 % n == 0 && t.1 % n == 0 {
        Some((t.0 / n, t.1 / n))
    } else {
        None
    }
}

/// sigma_{-1} of the principal ideal (m): sum over ideal divisors of 1/N.
pub fn ideal_sigma_minus1(field: &Field, m: (i128, i128), cache: &mut HashMap<u128, (i128, i128)>) -> f64 {
    let nm = small::norm(field.ring, m).unsigned_abs();
    let geo = |q: f64, v: u32| (0..=v).map(|i| q.powi(-(i as i32))).sum::<f64>();
    let mut s = 1.0;
    for (p, e) in factor(nm) {
        let pf = p as f64;
        match kronecker(field.disc, p as i64) {
            -1 => s *= geo(pf * pf, e / 2),
            0 => s *= geo(pf, e),
            _ => {
                let pi = *cache.entry(p).or_insert_with(|| prime_generator(field, p));
                let mut v = 0;
                let mut x = m;
                while let Some(y) = div_small(field, x, pi) {
                    x = y;
                    v += 1;
                }
                s *= geo(pf, v) * geo(pf, e - v);
            }
        }
    }
    s
}

/// h(z) from an independent regrouping: sum over m in O_F of
/// sigma_{-1}((m)) cos(2 pi Tr(m x / delta)) e^{-2 pi sum |(m/delta)_k| y_k}.
pub fn h_independent(field: &Field, z: &[Complex64], trunc: &TruncationParams) -> Result<(f64, f64)> {
    let y = check_point(field, z)?;
    let b = resolve_bound(field, y, trunc)?;
    let c = field.omega_coeff();
    let lead = 4.0 * PI * field.kappa * y[0] * if field.n == 2 { y[1] } else { 1.0 };
    let zn = normal_point(field, z);
    let x = [zn[0].re, zn.get(1).map_or(0.0, |w| w.re)];
    let y = if field.n == 1 { y } else { [zn[0].im, zn[1].im] };
    let mut acc = Neumaier::default();
    if field.n == 1 {
        let mmax = (b / (2.0 * PI * y[0])).floor() as i64;
        for m in 1..=mmax {
            let sig: f64 = (1..=m).filter(|d| m % d == 0).map(|d| 1.0 / d as f64).sum();
            acc.add(2.0 * sig * (2.0 * PI * m as f64 * x[0]).cos() * (-2.0 * PI * m as f64 * y[0]).exp());
        }
    } else {
        let a = [2.0 * PI * y[0] / field.delta_emb[0].abs(), 2.0 * PI * y[1] / field.delta_emb[1].abs()];
        let lim = [b / a[0], b / a[1]];
        let mut pts = Vec::new();
        small::rect_points(field.omega_emb, 0, (-lim[0], lim[0]), (-lim[1], lim[1]), |p, q| {
            if (p, q) != (0, 0) {
                pts.push((p, q));
            }
        });
        let mut cache = HashMap::new();
        let w = field.omega_emb;
        for (p, q) in pts {
            let e = [p as f64 + q as f64 * w[0], p as f64 + q as f64 * w[1]];
            let wt = a[0] * e[0].abs() + a[1] * e[1].abs();
            if wt > b {
                continue;
            }
            let ph = 2.0 * PI * (e[0] / field.delta_emb[0] * x[0] + e[1] / field.delta_emb[1] * x[1]);
            let sig = ideal_sigma_minus1(field, (p as i128, q as i128), &mut cache);
            acc.add(sig * ph.cos() * (-wt).exp());
        }
    }
    Ok((lead + 2.0 * c * acc.sum(), 2.0 * c * tail_bound(field, y, b)))
}

#[inline]
pub fn mobius(m: [f64; 4], z: Complex64) -> Complex64 {
    (z * m[0] + m[1]) / (z * m[2] + m[3])
}

/// Componentwise action of A on H^n.
pub fn act(a: &ModMatrix, z: &[Complex64]) -> Vec<Complex64> {
    z.iter().enumerate().map(|(k, &w)| mobius(a.emb(k), w)).collect()
}

fn full_point(field: &Field, zhat: &[Complex64], j: usize, zj: Complex64) -> Vec<Complex64> {
    let mut z = Vec::with_capacity(field.n);
    let mut it = zhat.iter();
    for k in 0..field.n {
        z.push(if k == j { zj } else { *it.next().expect("zhat has n-1 entries") });
    }
    z
}

/// Phi_j(A, zhat) with the auxiliary j-th coordinate from `aux_point`.
pub fn phi(field: &Field, a: &ModMatrix, zhat: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<PhiValue> {
    if a.c.is_zero() {
        return phi_at(field, a, zhat, j, Complex64::new(0.0, 1.0), trunc);
    }
    phi_at(field, a, zhat, j, aux_point(field, a, zhat, j), trunc)
}

/// Auxiliary point for Phi: real part -d_j/c_j, height chosen so that z and
/// Az have equal y-products (the cost of both Lambda evaluations balances).
pub fn aux_point(field: &Field, a: &ModMatrix, zhat: &[Complex64], j: usize) -> Complex64 {
    let e = a.emb(j);
    let others: f64 = (0..field.n)
        .filter(|&k| k != j)
        .zip(zhat)
        .map(|(k, &w)| {
            let ek = a.emb(k);
            (w * ek[2] + ek[3]).norm()
        })
        .product();
    Complex64::new(-e[3] / e[2], 1.0 / (e[2].abs() * others))
}

/// Phi_j(A, zhat) with an explicit auxiliary point z_j = zs.
pub fn phi_at(
    field: &Field,
    a: &ModMatrix,
    zhat: &[Complex64],
    j: usize,
    zs: Complex64,
    trunc: &TruncationParams,
) -> Result<PhiValue> {
    if zhat.len() + 1 != field.n {
        return Err(HdError::Parse(format!("expected {} coordinates in zhat", field.n - 1)));
    }
    if a.c.is_zero() {
        let e = a.emb(j);
        let py: f64 = zhat.iter().map(|w| w.im).product();
        return Ok(PhiValue { value: field.kappa * e[1] * e[3] * py, tail_error: 0.0 });
    }
    let z = full_point(field, zhat, j, zs);
    let az = act(a, &z);
    let l0 = lambda(field, &z, j, trunc)?;
    let l1 = lambda(field, &az, j, trunc)?;
    let e = a.emb(j);
    let czd = zs * e[2] + e[3];
    let lg = (-(czd * czd)).ln();
    let v = (l1.value - l0.value - lg * 0.25).im / PI;
    Ok(PhiValue { value: v, tail_error: (l0.tail_error + l1.tail_error) / PI })
}

/// Area cocycle -sign(c_j c'_j c''_j) with c'' the lower-left entry of AB.
pub fn delta_cocycle(a: &ModMatrix, b: &ModMatrix, j: usize) -> i32 {
    let ab = a.mul(b);
    -(a.c.sign_at(j) * b.c.sign_at(j) * ab.c.sign_at(j))
}

/// Classical ln eta(z) = i pi z / 12 + sum_n ln(1 - q^n).
pub fn classical_ln_eta(z: Complex64, tol: f64) -> Result<SeriesValue> {
    if !(z.im > 0.0) {
        return Err(HdError::Parse("point is not in the upper half plane".into()));
    }
    let q = (Complex64::new(0.0, 2.0 * PI) * z).exp();
    let r = q.norm();
    let mut acc = CNeumaier::default();
    let mut qn = q;
    let mut n = 0usize;
    loop {
        n += 1;
        acc.add((Complex64::new(1.0, 0.0) - qn).ln());
        let tail = r.powi(n as i32 + 1) / (1.0 - r).powi(2);
        if tail < tol || n > 10_000_000 {
            let lead = Complex64::new(0.0, PI / 12.0) * z;
            return Ok(SeriesValue { value: lead + acc.sum(), tail_error: tail, terms: n, weight_bound: 0.0 });
        }
        qn *= q;
    }
}

/// Classical Rademacher function of an integer matrix.
pub fn classical_phi_r(m: [i64; 4]) -> Result<i64> {
    let [a, b, c, d] = m;
    if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
        return Err(HdError::BadDeterminant);
    }
    if c == 0 {
        return Ok(b * d);
    }
    let v = Ratio::new((a + d) as i128, c as i128) - classical_s(d, c) * Ratio::from_integer(12 * c.signum() as i128);
    if !v.is_integer() {
        return Err(HdError::Parse("non-integral Rademacher value".into()));
    }
    v.to_integer().to_i64().ok_or(HdError::Parse("overflow".into()))
}

/// Rational-mode matrix from integer entries.
pub fn int_matrix(field: &Field, m: [i64; 4]) -> Result<ModMatrix> {
    let e = |x: i64| OFElem::from_int(field.ring, x);
    ModMatrix::new(e(m[0]), e(m[1]), e(m[2]), e(m[3]))
}
