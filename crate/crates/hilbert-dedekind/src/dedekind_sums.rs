//! Generalized Dedekind sums s_j(d, c; zhat), their identities, the
//! Euclidean reduction to s(0, 1; .), and Hecke operators.

use crate::error::{HdError, Result};
use crate::eta_engine::{omega, phi, PhiValue};
use crate::field_arith::{divmod_near, ext_gcd, Field, ModMatrix, OFElem};
use crate::unit_domain::TruncationParams;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SumValue {
    pub value: f64,
    pub tail_error: f64,
}

/// A checked identity: |defect| should not exceed budget.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Defect {
    pub defect: f64,
    pub budget: f64,
}

impl Defect {
    pub fn pass(&self) -> bool {
        self.defect.abs() <= self.budget
    }
}

/// Rounding allowance added to every tail budget.
pub const ROUNDING: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Classical sums.

fn sawtooth(num: i128, den: i128) -> Ratio<i128> {
    // ((num/den)) with den > 0
    let r = num.mod_floor(&den);
    if r == 0 {
        Ratio::zero()
    } else {
        Ratio::new(2 * r - den, 2 * den)
    }
}

/// s(d, c) = sum_{k mod c} ((k/c)) ((kd/c)), exact. Depends on |c| only.
pub fn classical_s(d: i64, c: i64) -> Ratio<i128> {
    assert!(c != 0, "classical_s needs c != 0");
    let c = (c as i128).abs();
    let d = d as i128;
    let mut acc = Ratio::zero();
    for k in 1..c {
        acc += sawtooth(k, c) * sawtooth(k * d, c);
    }
    acc
}

/// Classical reciprocity defect s(d,c) + s(c,d) - (-1/4 + (d/c + c/d + 1/(cd))/12).
pub fn classical_reciprocity_defect(d: i64, c: i64) -> Ratio<i128> {
    let (di, ci) = (d as i128, c as i128);
    let rhs = Ratio::new(-1, 4) + (Ratio::new(di, ci) + Ratio::new(ci, di) + Ratio::new(1, ci * di)) / 12;
    classical_s(d, c) + classical_s(c, d) - rhs
}

/// Classical Hecke defect s(dp, c) + sum_{r mod p} s(d + cr, cp) - (p + 1) s(d, c).
pub fn classical_hecke_defect(d: i64, c: i64, p: i64) -> Ratio<i128> {
    let mut acc = classical_s(d * p, c);
    for r in 0..p {
        acc += classical_s(d + c * r, c * p);
    }
    acc - classical_s(d, c) * (p as i128 + 1)
}

// ---------------------------------------------------------------------------
// Points of H^{n-1} and the maps acting on them.

/// Embedding index of the single coordinate of zhat when n = 2.
fn other(j: usize) -> usize {
    1 - j
}

/// Elementary maps used by the reduction; each acts on every coordinate of zhat.
#[derive(Clone, Debug, Serialize)]
pub enum WordOp {
    /// z -> z + q_k
    Translate(OFElem),
    /// z -> -conj(z)
    NegConj,
    /// z -> 1 / conj(z)
    InvConj,
    /// z -> e_k x + i |e_k| y
    UnitScale(OFElem),
}

impl WordOp {
    pub fn apply(&self, k: usize, z: Complex64) -> Complex64 {
        match self {
            WordOp::Translate(q) => z + q.emb(k),
            WordOp::NegConj => -z.conj(),
            WordOp::InvConj => Complex64::new(1.0, 0.0) / z.conj(),
            WordOp::UnitScale(e) => {
                let ek = e.emb(k);
                Complex64::new(ek * z.re, ek.abs() * z.im)
            }
        }
    }
}

pub fn apply_word(word: &[WordOp], field: &Field, j: usize, zhat: &[Complex64]) -> Vec<Complex64> {
    if field.n == 1 {
        return Vec::new();
    }
    let k = other(j);
    let mut w = zhat[0];
    for op in word {
        w = op.apply(k, w);
    }
    vec![w]
}

fn check_zhat(field: &Field, zhat: &[Complex64]) -> Result<()> {
    if zhat.len() + 1 != field.n {
        return Err(HdError::Parse(format!("expected {} coordinates in zhat", field.n - 1)));
    }
    if zhat.iter().any(|w| !(w.im > 0.0)) {
        return Err(HdError::Parse("point is not in the upper half plane".into()));
    }
    Ok(())
}

/// f_j(d, c; zhat) = prod_{k != j} y_k / |c_k z_k + d_k|^2.
pub fn f_elem(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], j: usize) -> f64 {
    if field.n == 1 {
        return 1.0;
    }
    let k = other(j);
    let z = zhat[0];
    z.im / (z * c.emb(k) + d.emb(k)).norm_sqr()
}

// ---------------------------------------------------------------------------
// The sums.

/// s_j(d, c; zhat) with an explicit Bezout witness a d - b c = 1.
pub fn sum_s_with_witness(
    field: &Field,
    a: &OFElem,
    b: &OFElem,
    c: &OFElem,
    d: &OFElem,
    zhat: &[Complex64],
    j: usize,
    trunc: &TruncationParams,
) -> Result<SumValue> {
    check_zhat(field, zhat)?;
    let m = ModMatrix::new(a.clone(), b.clone(), c.clone(), d.clone())?;
    let PhiValue { value, tail_error } = phi(field, &m, zhat, j, trunc)?;
    let cj = c.emb(j);
    let elem = field.kappa / cj.abs()
        * (a.emb(j) * f_elem(field, d, c, zhat, j) + d.emb(j) * f_elem(field, &field.one(), &field.zero(), zhat, j));
    Ok(SumValue { value: -(c.sign_at(j) as f64) * value + elem, tail_error })
}

/// s_j(d, c; zhat) for coprime (c, d), c != 0.
pub fn sum_s(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<SumValue> {
    if c.is_zero() {
        return Err(HdError::DivisionByZero);
    }
    let (a, b) = ext_gcd(c, d)?;
    sum_s_with_witness(field, &a, &b, c, d, zhat, j, trunc)
}

/// A generator of the ideal (c, d).
pub fn gcd(c: &OFElem, d: &OFElem) -> Result<OFElem> {
    let (mut x, mut y) = (c.clone(), d.clone());
    let mut guard = 0;
    while !y.is_zero() {
        let (_, r) = divmod_near(&x, &y)?;
        x = y;
        y = r;
        guard += 1;
        if guard > 10_000 {
            return Err(HdError::NonTermination(guard));
        }
    }
    Ok(x)
}

/// s_j extended to non-coprime pairs by s(g d', g c') = sign(g_j) s(d', c').
pub fn sum_s_general(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<SumValue> {
    let g = gcd(c, d)?;
    if g.is_unit() {
        return sum_s(field, d, c, zhat, j, trunc);
    }
    let d2 = d.div_exact(&g).ok_or(HdError::NotCoprime)?;
    let c2 = c.div_exact(&g).ok_or(HdError::NotCoprime)?;
    let v = sum_s(field, &d2, &c2, zhat, j, trunc)?;
    Ok(SumValue { value: g.sign_at(j) as f64 * v.value, ..v })
}

fn add_tails(xs: &[SumValue]) -> f64 {
    xs.iter().map(|v| v.tail_error).sum::<f64>() + ROUNDING
}

/// The reciprocity law's elementary bracket times prod y:
/// kappa [d_1/c_1 + (c_1/d_1) prod|z|^-2 + prod|c z + d|^-2 / (c_1 d_1)] prod y.
pub fn reciprocity_elementary(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], j: usize) -> f64 {
    let (cj, dj) = (c.emb(j), d.emb(j));
    let (pz, pcz, py) = if field.n == 1 {
        (1.0, 1.0, 1.0)
    } else {
        let k = other(j);
        let z = zhat[0];
        (1.0 / z.norm_sqr(), 1.0 / (z * c.emb(k) + d.emb(k)).norm_sqr(), z.im)
    };
    field.kappa * (dj / cj + cj / dj * pz + pcz / (cj * dj)) * py
}

/// LHS - RHS of the reciprocity law at embedding j, for c_j > 0, d_j > 0.
pub fn reciprocity_defect(field: &Field, c: &OFElem, d: &OFElem, zhat: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<Defect> {
    check_zhat(field, zhat)?;
    if c.sign_at(j) <= 0 || d.sign_at(j) <= 0 {
        return Err(HdError::SignCondition("need c_j > 0 and d_j > 0"));
    }
    let inv = apply_word(&[WordOp::InvConj], field, j, zhat);
    let s1 = sum_s(field, d, c, zhat, j, trunc)?;
    let s2 = sum_s(field, c, d, &inv, j, trunc)?;
    let s0 = sum_s(field, &field.zero(), &field.one(), zhat, j, trunc)?;
    let rhs = s0.value - 0.25 + reciprocity_elementary(field, d, c, zhat, j);
    Ok(Defect { defect: s1.value + s2.value - rhs, budget: add_tails(&[s1, s2, s0]) })
}

/// Defects of the four elementary identities.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Prop2Report {
    /// s(d, -c; zhat) vs s(d, c; -conj zhat)
    pub neg_c: Defect,
    /// s(-d, c; zhat) vs -s(d, c; -conj zhat)
    pub neg_d: Defect,
    /// s(d, eps c; zhat) vs s(d, c; |eps|.zhat)
    pub unit: Defect,
    /// s(d + qc, c; zhat + q) vs s(d, c; zhat), as typeset
    pub translate_printed: Defect,
    /// s(d + qc, c; zhat - q) vs s(d, c; zhat), the form the engine satisfies
    pub translate: Defect,
}

pub fn prop2_defects(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], q: &OFElem, j: usize, trunc: &TruncationParams) -> Result<Prop2Report> {
    check_zhat(field, zhat)?;
    let s = |dd: &OFElem, cc: &OFElem, z: &[Complex64]| sum_s(field, dd, cc, z, j, trunc);
    let negz = apply_word(&[WordOp::NegConj], field, j, zhat);
    let base = s(d, c, zhat)?;
    let at_neg = s(d, c, &negz)?;
    let a = s(d, &-c, zhat)?;
    let neg_c = Defect { defect: a.value - at_neg.value, budget: add_tails(&[a, at_neg]) };
    let b = s(&-d, c, zhat)?;
    let neg_d = Defect { defect: b.value + at_neg.value, budget: add_tails(&[b, at_neg]) };
    let eps = &field.eps;
    let scaled = apply_word(&[WordOp::UnitScale(eps.clone())], field, j, zhat);
    let u1 = s(d, &(eps * c), zhat)?;
    let u2 = s(d, c, &scaled)?;
    let unit = Defect { defect: u1.value - u2.value, budget: add_tails(&[u1, u2]) };
    let dq = d + &(q * c);
    let plus = apply_word(&[WordOp::Translate(q.clone())], field, j, zhat);
    let minus = apply_word(&[WordOp::Translate(-q)], field, j, zhat);
    let t1 = s(&dq, c, &plus)?;
    let t2 = s(&dq, c, &minus)?;
    Ok(Prop2Report {
        neg_c,
        neg_d,
        unit,
        translate_printed: Defect { defect: t1.value - base.value, budget: add_tails(&[t1, base]) },
        translate: Defect { defect: t2.value - base.value, budget: add_tails(&[t2, base]) },
    })
}

// ---------------------------------------------------------------------------
// Euclidean reduction.

/// sign * s(0, 1; word(zhat))
#[derive(Clone, Debug, Serialize)]
pub struct ScriptTerm {
    pub sign: i32,
    pub word: Vec<WordOp>,
}

/// Elementary pieces of a reduction script.
#[derive(Clone, Debug, Serialize)]
pub enum Elementary {
    /// sign * 1/4
    Quarter(i32),
    /// sign * reciprocity_elementary(r, c; word(zhat)), r_j, c_j > 0
    Recip { sign: i32, r: OFElem, c: OFElem, word: Vec<WordOp> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionScript {
    pub terms: Vec<ScriptTerm>,
    pub elementary: Vec<Elementary>,
    /// number of divisions performed
    pub steps: usize,
}

impl ReductionScript {
    pub fn elementary_value(&self, field: &Field, zhat: &[Complex64], j: usize) -> f64 {
        self.elementary
            .iter()
            .map(|e| match e {
                Elementary::Quarter(s) => 0.25 * *s as f64,
                Elementary::Recip { sign, r, c, word } => {
                    let w = apply_word(word, field, j, zhat);
                    *sign as f64 * reciprocity_elementary(field, r, c, &w, j)
                }
            })
            .sum()
    }

    pub fn evaluate(&self, field: &Field, zhat: &[Complex64], j: usize, trunc: &TruncationParams) -> Result<SumValue> {
        let mut v = self.elementary_value(field, zhat, j);
        let mut tail = 0.0;
        for t in &self.terms {
            let w = apply_word(&t.word, field, j, zhat);
            let s = sum_s(field, &field.zero(), &field.one(), &w, j, trunc)?;
            v += t.sign as f64 * s.value;
            tail += s.tail_error;
        }
        Ok(SumValue { value: v, tail_error: tail })
    }
}

/// Express s_j(d, c; .) through s(0, 1; .) and elementary terms.
pub fn reduce_to_fundamental(field: &Field, d: &OFElem, c: &OFElem, j: usize) -> Result<ReductionScript> {
    if c.is_zero() {
        return Err(HdError::DivisionByZero);
    }
    let cap = (field.euclid_k as usize) * c.norm().magnitude().to_usize().unwrap_or(usize::MAX).max(1) + 2;
    let (mut d, mut c) = (d.clone(), c.clone());
    let mut word: Vec<WordOp> = Vec::new();
    let mut sigma = 1i32;
    let mut script = ReductionScript { terms: Vec::new(), elementary: Vec::new(), steps: 0 };
    loop {
        if script.steps >= cap {
            return Err(HdError::NonTermination(cap));
        }
        let (q, r) = divmod_near(&d, &c)?;
        script.steps += 1;
        // s(qc + r, c; w) = s(r, c; w + q)
        if !q.is_zero() {
            word.push(WordOp::Translate(q));
        }
        if r.is_zero() {
            if !c.is_unit() {
                return Err(HdError::NotCoprime);
            }
            if c.sign_at(j) < 0 {
                word.push(WordOp::NegConj);
                c = -c;
            }
            if !c.is_zero() && c != field.one() {
                word.push(WordOp::UnitScale(c.clone()));
            }
            script.terms.push(ScriptTerm { sign: sigma, word });
            return Ok(script);
        }
        let mut r = r;
        if c.sign_at(j) < 0 {
            word.push(WordOp::NegConj);
            c = -c;
        }
        if r.sign_at(j) < 0 {
            word.push(WordOp::NegConj);
            r = -r;
            sigma = -sigma;
        }
        script.terms.push(ScriptTerm { sign: sigma, word: word.clone() });
        script.elementary.push(Elementary::Quarter(-sigma));
        script.elementary.push(Elementary::Recip { sign: sigma, r: r.clone(), c: c.clone(), word: word.clone() });
        sigma = -sigma;
        word.push(WordOp::InvConj);
        d = c;
        c = r;
    }
}

/// The worked two-term script for (d, c) = (-2-sqrt7, 3+sqrt7) exactly as
/// typeset: s(0,1;z+1) - s(0,1;1/(conj z + 1) - 1) - 1/4 + kappa T(z).
pub fn worked_example_printed(field: &Field, z: Complex64, trunc: &TruncationParams) -> Result<SumValue> {
    let s7 = 7f64.sqrt();
    let one = Complex64::new(1.0, 0.0);
    let s1 = sum_s(field, &field.zero(), &field.one(), &[z + 1.0], 0, trunc)?;
    let w2 = one / (z.conj() + 1.0) - 1.0;
    let s2 = sum_s(field, &field.zero(), &field.one(), &[w2], 0, trunc)?;
    let c1 = 3.0 + s7;
    let t = (1.0 / c1 + c1 / (z + 1.0).norm_sqr() + 1.0 / (c1 * (z * (3.0 - s7) + 4.0 - s7).norm_sqr())) * z.im;
    Ok(SumValue { value: s1.value - s2.value - 0.25 + field.kappa * t, tail_error: s1.tail_error + s2.tail_error })
}

// ---------------------------------------------------------------------------
// Hecke operators.

/// Residues of O_F / (p): {a + b w : 0 <= a < A, 0 <= b < C} from the
/// Hermite normal form of the lattice p O_F.
pub fn residue_transversal(field: &Field, p: &OFElem) -> Vec<OFElem> {
    use num_bigint::BigInt;
    if field.n == 1 {
        let m = p.a.abs().to_i64().unwrap();
        return (0..m).map(|a| field.int(a)).collect();
    }
    let w = field.elem(0, 1);
    let v1 = p.clone();
    let v2 = p * &w;
    let (b1, b2) = (v1.b.clone(), v2.b.clone());
    let eg = b1.extended_gcd(&b2);
    let cc = eg.gcd.abs();
    let n = p.norm().abs();
    let aa: BigInt = &n / &cc;
    let (am, cm) = (aa.to_i64().unwrap(), cc.to_i64().unwrap());
    let mut out = Vec::new();
    for b in 0..cm {
        for a in 0..am {
            out.push(field.elem(a, b));
        }
    }
    out
}

fn is_prime_elem(field: &Field, p: &OFElem) -> bool {
    let n = p.norm().abs().to_u64().unwrap_or(0);
    let isp = |m: u64| m >= 2 && (2..).take_while(|k| k * k <= m).all(|k| m % k != 0);
    if field.n == 1 {
        return isp(n);
    }
    if isp(n) {
        return true;
    }
    // inert prime: p = unit * rational prime q with N = q^2
    let q = (n as f64).sqrt().round() as u64;
    q * q == n && isp(q) && crate::field_arith::kronecker(field.disc, q as i64) == -1
}

/// Which sign of r enters the (zhat -/+ r)/p argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HeckeConvention {
    /// (zhat + r) / p, as typeset
    Printed,
    /// (zhat - r) / p, matching the translation law the engine satisfies
    Consistent,
}

fn hecke_args(field: &Field, p: &OFElem, r: &OFElem, zhat: &[Complex64], j: usize, conv: HeckeConvention) -> Vec<Complex64> {
    if field.n == 1 {
        return Vec::new();
    }
    let k = other(j);
    let rk = if conv == HeckeConvention::Printed { r.emb(k) } else { -r.emb(k) };
    vec![(zhat[0] + rk) / p.emb(k)]
}

/// (s|T_p)(d, c; zhat) evaluated from its definition.
pub fn hecke_apply(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], p: &OFElem, j: usize, conv: HeckeConvention, trunc: &TruncationParams) -> Result<SumValue> {
    if !p.is_totally_positive() {
        return Err(HdError::NotTotallyPositive);
    }
    if !is_prime_elem(field, p) {
        return Err(HdError::NotPrime);
    }
    let pz: Vec<Complex64> = if field.n == 1 { Vec::new() } else { vec![zhat[0] * p.emb(other(j))] };
    let first = sum_s_general(field, &(d * p), c, &pz, j, trunc)?;
    let mut v = first.value;
    let mut tail = first.tail_error;
    let cp = c * p;
    for r in residue_transversal(field, p) {
        let arg = hecke_args(field, p, &r, zhat, j, conv);
        let s = sum_s_general(field, &(d + &(c * &r)), &cp, &arg, j, trunc)?;
        v += s.value;
        tail += s.tail_error;
    }
    Ok(SumValue { value: v, tail_error: tail })
}

/// s|T_p - (N(p) + 1) s at (d, c; zhat).
pub fn hecke_defect(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], p: &OFElem, j: usize, conv: HeckeConvention, trunc: &TruncationParams) -> Result<Defect> {
    check_zhat(field, zhat)?;
    let t = hecke_apply(field, d, c, zhat, p, j, conv, trunc)?;
    let s = sum_s(field, d, c, zhat, j, trunc)?;
    let np = p.norm().abs().to_f64().unwrap();
    Ok(Defect { defect: t.value - (np + 1.0) * s.value, budget: t.tail_error + (np + 1.0) * s.tail_error + ROUNDING })
}

/// Omega_j(pz) + sum_r Omega_j((z + r)/p) - (N(p) + 1) Omega_j(z).
pub fn hecke_omega_defect(field: &Field, z: &[Complex64], p: &OFElem, j: usize, trunc: &TruncationParams) -> Result<(Complex64, f64)> {
    if !p.is_totally_positive() {
        return Err(HdError::NotTotallyPositive);
    }
    let pe: Vec<f64> = (0..field.n).map(|k| p.emb(k)).collect();
    let pz: Vec<Complex64> = z.iter().zip(&pe).map(|(w, pk)| w * pk).collect();
    let a = omega(field, &pz, j, trunc)?;
    let mut v = a.value;
    let mut tail = a.tail_error;
    for r in residue_transversal(field, p) {
        let zr: Vec<Complex64> = z.iter().enumerate().map(|(k, w)| (w + r.emb(k)) / pe[k]).collect();
        let o = omega(field, &zr, j, trunc)?;
        v += o.value;
        tail += o.tail_error;
    }
    let base = omega(field, z, j, trunc)?;
    let np = p.norm().abs().to_f64().unwrap();
    Ok((v - base.value * (np + 1.0), tail + (np + 1.0) * base.tail_error))
}

/// (s|T_p)|T_q - (s|T_q)|T_p at (d, c; zhat), both sides from the definitions.
pub fn hecke_commutator(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], p: &OFElem, q: &OFElem, j: usize, trunc: &TruncationParams) -> Result<Defect> {
    let conv = HeckeConvention::Consistent;
    let nested = |p: &OFElem, q: &OFElem| -> Result<SumValue> {
        // (f|T_p)|T_q (d, c; z) = (f|T_p)(dq, c; qz) + sum_r (f|T_p)(d + cr, cq; (z - r)/q)
        let qz: Vec<Complex64> = if field.n == 1 { Vec::new() } else { vec![zhat[0] * q.emb(other(j))] };
        let mut parts = vec![hecke_apply_general(field, &(d * q), c, &qz, p, j, conv, trunc)?];
        let cq = c * q;
        for r in residue_transversal(field, q) {
            let arg = hecke_args(field, q, &r, zhat, j, conv);
            parts.push(hecke_apply_general(field, &(d + &(c * &r)), &cq, &arg, p, j, conv, trunc)?);
        }
        Ok(SumValue { value: parts.iter().map(|s| s.value).sum(), tail_error: parts.iter().map(|s| s.tail_error).sum() })
    };
    let a = nested(p, q)?;
    let b = nested(q, p)?;
    Ok(Defect { defect: a.value - b.value, budget: a.tail_error + b.tail_error + ROUNDING })
}

/// hecke_apply for possibly non-coprime (d, c), via the gcd scaling law.
fn hecke_apply_general(field: &Field, d: &OFElem, c: &OFElem, zhat: &[Complex64], p: &OFElem, j: usize, conv: HeckeConvention, trunc: &TruncationParams) -> Result<SumValue> {
    let g = gcd(c, d)?;
    if g.is_unit() {
        return hecke_apply(field, d, c, zhat, p, j, conv, trunc);
    }
    // T_p is linear and commutes with scaling (d, c) by g
    let d2 = d.div_exact(&g).ok_or(HdError::NotCoprime)?;
    let c2 = c.div_exact(&g).ok_or(HdError::NotCoprime)?;
    let v = hecke_apply(field, &d2, &c2, zhat, p, j, conv, trunc)?;
    Ok(SumValue { value: g.sign_at(j) as f64 * v.value, ..v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_arith::make_field;

    #[test]
    fn classical_values() {
        assert_eq!(classical_s(1, 3), Ratio::new(1, 18));
        assert_eq!(classical_s(1, 2), Ratio::zero());
        assert_eq!(classical_s(5, 1), Ratio::zero());
        assert_eq!(classical_reciprocity_defect(1, 3), Ratio::zero());
        assert_eq!(classical_hecke_defect(1, 3, 2), Ratio::zero());
    }

    #[test]
    fn transversal_sizes() {
        let f = make_field(7).unwrap();
        assert_eq!(residue_transversal(&f, &f.elem(3, 1)).len(), 2);
        assert_eq!(residue_transversal(&f, &f.elem(6, 1)).len(), 29);
        assert_eq!(residue_transversal(&f, &f.int(5)).len(), 25);
    }

    #[test]
    fn trivial_script() {
        let f = make_field(7).unwrap();
        let s = reduce_to_fundamental(&f, &f.zero(), &f.one(), 0).unwrap();
        assert_eq!(s.terms.len(), 1);
        assert!(s.terms[0].word.is_empty());
        assert!(s.elementary.is_empty());
    }
}
