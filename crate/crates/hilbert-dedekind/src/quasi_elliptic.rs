//! Elliptic and quasi-elliptic elements: classification, fixed-point and
//! relative-unit data, the matrix of a unit on the module O_F + w O_F, and
//! the invariant Psi.

use crate::error::{HdError, Result};
use crate::eta_engine::{phi, PhiValue};
use crate::field_arith::{Field, ModMatrix, OFElem};
use crate::unit_domain::{ModuleData, TruncationParams};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

/// Per-embedding type from the exact sign of tr^2 - 4.
pub fn classify(a: &ModMatrix) -> Vec<Kind> {
    let t = a.trace();
    let disc = &(&t * &t) - &OFElem::from_int(t.ring, 4);
    (0..a.ring().degree())
        .map(|k| match disc.sign_at(k) {
            1 => Kind::Hyperbolic,
            -1 => Kind::Elliptic,
            _ => Kind::Parabolic,
        })
        .collect()
}

pub fn is_elliptic(a: &ModMatrix) -> bool {
    classify(a).iter().all(|&k| k == Kind::Elliptic)
}

/// Index of the unique hyperbolic component, if A is quasi-elliptic.
pub fn hyperbolic_index(a: &ModMatrix) -> Option<usize> {
    let kinds = classify(a);
    let hyp: Vec<usize> = (0..kinds.len()).filter(|&k| kinds[k] == Kind::Hyperbolic).collect();
    let ell = kinds.iter().filter(|&&k| k == Kind::Elliptic).count();
    (hyp.len() == 1 && ell + 1 == kinds.len() && kinds.len() > 1).then(|| hyp[0])
}

/// Fixed point in H of an elliptic real matrix [a, b, c, d].
pub fn elliptic_fixed_point(e: [f64; 4]) -> Complex64 {
    let [a, b, c, d] = e;
    let _ = b;
    let t = a + d;
    let root = (4.0 - t * t).max(0.0).sqrt();
    Complex64::new((a - d) / (2.0 * c), root / (2.0 * c.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiEllipticData {
    /// hyperbolic embedding
    pub j: usize,
    /// w solves c X^2 + (d - a) X - b = 0; coefficients (c, d - a, -b)
    pub quadratic: [OFElem; 3],
    pub w_r1: f64,
    pub w_r2: f64,
    /// fixed point of the elliptic component(s)
    pub w_c: Complex64,
    /// eps = c w + d at the real places above j and at the complex place
    pub eps_r1: f64,
    pub eps_r2: f64,
    pub eps_c: Complex64,
    pub sign_c_tr: i32,
}

pub fn quasi_data(field: &Field, a: &ModMatrix) -> Result<QuasiEllipticData> {
    let j = hyperbolic_index(a).ok_or(HdError::NotQuasiElliptic)?;
    let k = 1 - j;
    let [aj, _, cj, dj] = a.emb(j);
    let tj = aj + dj;
    let root = (tj * tj - 4.0).sqrt();
    // roots of c X^2 + (d - a) X - b at embedding j
    let x1 = ((aj - dj) + root) / (2.0 * cj);
    let x2 = ((aj - dj) - root) / (2.0 * cj);
    let (w_r1, w_r2) = if x1 > x2 { (x1, x2) } else { (x2, x1) };
    let ek = a.emb(k);
    let w_c = elliptic_fixed_point(ek);
    let _ = field;
    Ok(QuasiEllipticData {
        j,
        quadratic: [a.c.clone(), &a.d - &a.a, -&a.b],
        w_r1,
        w_r2,
        w_c,
        eps_r1: cj * w_r1 + dj,
        eps_r2: cj * w_r2 + dj,
        eps_c: w_c * ek[2] + ek[3],
        sign_c_tr: a.c.sign_at(j) * a.trace().sign_at(j),
    })
}

impl QuasiEllipticData {
    /// Vol(M_w) = d_F (w_r1 - w_r2) Im w_c.
    pub fn volume(&self, field: &Field) -> f64 {
        field.disc as f64 * (self.w_r1 - self.w_r2) * self.w_c.im
    }

    /// Data for the module-orbit enumerator.
    pub fn module(&self, a: &ModMatrix) -> Result<ModuleData> {
        let co = |x: &OFElem| x.coords_i64().ok_or(HdError::CapExceeded(usize::MAX));
        Ok(ModuleData {
            j: self.j,
            abcd: [co(&a.a)?, co(&a.b)?, co(&a.c)?, co(&a.d)?],
            w_r1: self.w_r1,
            w_r2: self.w_r2,
            w_c: self.w_c,
            lambda: self.eps_r1.abs().ln(),
        })
    }
}

/// The matrix of multiplication by eps = c w + d on the basis (w, 1) of
/// O_F + w O_F, where w^2 = p w + q:  eps w = (d + c p) w + c q.
pub fn matrix_from_unit(p: &OFElem, q: &OFElem, c: &OFElem, d: &OFElem) -> Result<ModMatrix> {
    let a = d + &(c * p);
    let b = c * q;
    ModMatrix::new(a, b, c.clone(), d.clone()).map_err(|_| HdError::NotStable)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PsiValue {
    pub value: f64,
    pub tail_error: f64,
    pub j: usize,
    pub phi: f64,
    pub sign_c_tr: i32,
}

fn psi_from_phi(field: &Field, ph: PhiValue, sign: i32, j: usize) -> PsiValue {
    let n = field.n as i32;
    let r = field.regulator;
    PsiValue {
        value: 2f64.powi(n) * r * ph.value - 2f64.powi(n - 2) * r * sign as f64,
        tail_error: 2f64.powi(n) * r * ph.tail_error,
        j,
        phi: ph.value,
        sign_c_tr: sign,
    }
}

/// Psi_j(A) for A elliptic (any j) or quasi-elliptic (j = hyperbolic index).
pub fn psi_j(field: &Field, a: &ModMatrix, j: usize, trunc: &TruncationParams) -> Result<PsiValue> {
    let kinds = classify(a);
    if kinds.contains(&Kind::Parabolic) {
        return Err(HdError::NotClassifiable);
    }
    if (0..kinds.len()).any(|k| k != j && kinds[k] != Kind::Elliptic) {
        return Err(HdError::NotClassifiable);
    }
    let wc: Vec<Complex64> = (0..field.n).filter(|&k| k != j).map(|k| elliptic_fixed_point(a.emb(k))).collect();
    let sign = a.c.sign_at(j) * a.trace().sign_at(j);
    let ph = phi(field, a, &wc, j, trunc)?;
    Ok(psi_from_phi(field, ph, sign, j))
}

/// Psi(A) of a quasi-elliptic A.
pub fn psi(field: &Field, a: &ModMatrix, trunc: &TruncationParams) -> Result<PsiValue> {
    let j = hyperbolic_index(a).ok_or(HdError::NotClassifiable)?;
    psi_j(field, a, j, trunc)
}

/// Smallest m <= 12 with A^m = 1.
pub fn finite_order(a: &ModMatrix) -> Option<u32> {
    let mut p = a.clone();
    for m in 1..=12 {
        if p.is_identity() {
            return Some(m);
        }
        p = p.mul(a);
    }
    None
}

/// Which sign in front of sign(c_j tr A_j) the closed form uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedForm {
    /// -2^{n-2} R [ln(-(c w + d)^2)/(i pi) - sign], as typeset
    Printed,
    /// -2^{n-2} R [ln(-(c w + d)^2)/(i pi) + sign], what the transformation law gives
    Derived,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EllipticClosed {
    pub value: f64,
    pub order: u32,
    /// 2 Psi_j / R_F = num / den with den | order
    pub num: i64,
    pub den: i64,
    /// distance of 2 Psi_j / R_F from num / den
    pub residual: f64,
}

pub fn psi_elliptic_closed(field: &Field, a: &ModMatrix, j: usize, form: ClosedForm) -> Result<EllipticClosed> {
    if !is_elliptic(a) {
        return Err(HdError::NotElliptic);
    }
    let m = finite_order(a).ok_or(HdError::NotElliptic)?;
    let e = a.emb(j);
    let w = elliptic_fixed_point(e);
    let lam = w * e[2] + e[3];
    let lg = (-(lam * lam)).ln();
    let ratio = lg.im / PI;
    let sign = (a.c.sign_at(j) * a.trace().sign_at(j)) as f64;
    let s = match form {
        ClosedForm::Printed => -sign,
        ClosedForm::Derived => sign,
    };
    let scale = 2f64.powi(field.n as i32 - 2);
    let value = -scale * field.regulator * (ratio + s);
    let x = 2.0 * value / field.regulator;
    let num = (x * m as f64).round() as i64;
    let g = num_integer::gcd(num, m as i64).max(1);
    Ok(EllipticClosed { value, order: m, num: num / g, den: m as i64 / g, residual: (x - num as f64 / m as f64).abs() })
}

/// Candidate values for Psi of a quasi-elliptic matrix built from a unit:
/// plus or minus ln|eps| at each real place. Returned as (label, value).
pub fn log_unit_candidates(q: &QuasiEllipticData) -> Vec<(&'static str, f64)> {
    let l1 = q.eps_r1.abs().ln();
    let l2 = q.eps_r2.abs().ln();
    vec![("+ln|eps_r1|", l1), ("-ln|eps_r1|", -l1), ("+ln|eps_r2|", l2), ("-ln|eps_r2|", -l2)]
}
