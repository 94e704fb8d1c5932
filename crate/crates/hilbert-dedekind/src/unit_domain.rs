//! Fundamental domains for unit actions and bounded-weight lattice enumeration.
//!
//! Representatives of nu mod U_F+ live in the half-open window
//! `ln|nu_1/nu_2| / (2 ln eta_1) in [-TAU, 1 - TAU)`. The tiny shift keeps
//! elements sitting exactly on `ln|nu_1/nu_2| = 0` (rational integers) away
//! from the floating-point boundary.

use crate::error::{HdError, Result};
use crate::field_arith::{small, Field, OFElem};
use crate::par;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

pub const TAU: f64 = 1e-9;

/// Truncation controls shared by every series.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TruncationParams {
    /// Weight bound B; `None` picks the smallest B whose tail bound meets `target_tol`.
    pub weight_bound: Option<f64>,
    pub target_tol: f64,
    pub max_terms: usize,
}

impl Default for TruncationParams {
    fn default() -> Self {
        TruncationParams { weight_bound: None, target_tol: 1e-11, max_terms: 20_000_000 }
    }
}

impl TruncationParams {
    pub fn with_tol(tol: f64) -> Self {
        TruncationParams { target_tol: tol, ..Default::default() }
    }

    pub fn with_bound(b: f64) -> Self {
        TruncationParams { weight_bound: Some(b), ..Default::default() }
    }
}

/// Which unit group a representative was reduced by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UnitGroup {
    TotallyPositive,
    Full,
    Relative,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitOrbitRep {
    pub element: OFElem,
    pub group: UnitGroup,
}

fn window_index(field: &Field, e: [f64; 2]) -> i64 {
    let t = (e[0] / e[1]).abs().ln() / (2.0 * field.eta_emb[0].ln());
    (t + TAU).floor() as i64
}

/// True when a nonzero nu (given by its embeddings) lies in the window.
pub fn in_nu_window(field: &Field, e: [f64; 2]) -> bool {
    if field.n == 1 {
        return e[0] != 0.0;
    }
    window_index(field, e) == 0
}

/// Reduce x != 0 modulo U_F+ into the log window.
pub fn reduce_mod_totally_positive_units(field: &Field, x: &OFElem) -> Result<UnitOrbitRep> {
    if x.is_zero() {
        return Err(HdError::DivisionByZero);
    }
    let mut y = x.clone();
    if field.n == 2 {
        let eta_inv = field.eta.conj();
        for _ in 0..8 {
            let k = window_index(field, y.embs());
            if k == 0 {
                break;
            }
            let u = if k > 0 { eta_inv.pow(k as u32) } else { field.eta.pow((-k) as u32) };
            y = &y * &u;
        }
    }
    Ok(UnitOrbitRep { element: y, group: UnitGroup::TotallyPositive })
}

/// Reduce x != 0 modulo the full unit group: the U_F+ window, then the
/// sign (and for N(eps) = -1 the odd power of eps) made canonical by
/// requiring a positive first embedding and, when N(eps) = -1, a log index
/// in the first half of the window.
pub fn reduce_mod_units(field: &Field, x: &OFElem) -> Result<UnitOrbitRep> {
    if x.is_zero() {
        return Err(HdError::DivisionByZero);
    }
    let mut y = x.clone();
    if field.n == 2 {
        let eps_inv = field.eps.unit_inverse().expect("unit");
        for _ in 0..8 {
            let t = (y.emb(0) / y.emb(1)).abs().ln() / (2.0 * field.regulator);
            let k = (t + TAU).floor() as i64;
            if k == 0 {
                break;
            }
            let u = if k > 0 { eps_inv.pow(k as u32) } else { field.eps.pow((-k) as u32) };
            y = &y * &u;
        }
    }
    if y.sign_at(0) < 0 {
        y = -y;
    }
    Ok(UnitOrbitRep { element: y, group: UnitGroup::Full })
}

/// A nu representative with cached embeddings.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NuRep {
    pub nu: (i64, i64),
    pub e: [f64; 2],
    pub norm: u64,
}

/// Largest |N(nu)| whose block can contain a term of weight <= B.
pub fn x_bound(field: &Field, y: [f64; 2], b: f64) -> f64 {
    if field.n == 1 {
        b / (2.0 * PI * y[0])
    } else {
        field.disc as f64 * (b / (4.0 * PI)).powi(2) / (y[0] * y[1])
    }
}

/// Upper estimate of the number of window representatives with |N| <= xmax.
pub fn nu_count_estimate(field: &Field, xmax: f64) -> f64 {
    if field.n == 1 {
        return 2.0 * xmax;
    }
    let e = field.eta_emb[0];
    (2.0 * e * xmax.sqrt() + 1.0) * (2.0 * xmax.sqrt() + 1.0)
}

/// Upper estimate of the number of (nu, mu) pairs of weight <= B.
pub fn term_count_estimate(field: &Field, y: [f64; 2], b: f64) -> f64 {
    let x = x_bound(field, y, b);
    if field.n == 1 {
        return x * (x.ln() + 1.0);
    }
    // each block holds about 2B^2 / (alpha beta) points; alpha beta grows with |N(nu)|
    let per_unit_norm = 2.0 * b * b * field.disc as f64 / (4.0 * PI * PI * y[0] * y[1]);
    let density = 2.0 * field.eta_emb[0].ln() / (field.disc as f64).sqrt() * 2.0;
    per_unit_norm * density * (x.ln() + 1.0) + nu_count_estimate(field, x)
}

fn check_cost(field: &Field, y: [f64; 2], b: f64, cap: usize) -> Result<()> {
    if term_count_estimate(field, y, b) > cap as f64 {
        return Err(HdError::CapExceeded(cap));
    }
    Ok(())
}

/// All window representatives with 1 <= |N(nu)| <= xmax, sorted by norm.
pub fn nu_reps(field: &Field, xmax: f64) -> Vec<NuRep> {
    let mut out = Vec::new();
    if xmax < 1.0 {
        return out;
    }
    if field.n == 1 {
        // U+ is trivial: both signs are separate representatives
        for a in 1..=(xmax.floor() as i64) {
            for s in [a, -a] {
                out.push(NuRep { nu: (s, 0), e: [s as f64, s as f64], norm: a as u64 });
            }
        }
        return out;
    }
    let ring = field.ring;
    let w = field.omega_emb;
    let slack = 1.0 + 1e-8;
    let r1 = field.eta_emb[0] * xmax.sqrt() * slack;
    let r2 = field.eta_emb[0].powf(2.0 * TAU) * xmax.sqrt() * slack;
    small::rect_points(w, 0, (-r1, r1), (-r2, r2), |a, b| {
        let nrm = small::norm(ring, (a as i128, b as i128)).unsigned_abs();
        if nrm == 0 || nrm as f64 > xmax {
            return;
        }
        let e = [a as f64 + b as f64 * w[0], a as f64 + b as f64 * w[1]];
        if in_nu_window(field, e) {
            out.push(NuRep { nu: (a, b), e, norm: nrm as u64 });
        }
    });
    out.sort_by_key(|r| (r.norm, r.nu));
    out
}

/// Per-block data: |(nu/delta)_k| scaled weights and the sign needed at j.
#[derive(Clone, Copy, Debug)]
struct Block {
    r: [f64; 2],
    a: [f64; 2],
}

fn block(field: &Field, nu: &NuRep, y: [f64; 2]) -> Block {
    let r = [nu.e[0] / field.delta_emb[0], nu.e[1] / field.delta_emb[1]];
    Block { r, a: [2.0 * PI * r[0].abs() * y[0], 2.0 * PI * r[1].abs() * y[1]] }
}

/// Visit every mu != 0 with (mu nu/delta)_j > 0 and weight <= B, passing
/// (mu coordinates, xi = mu nu/delta embeddings, weight).
pub fn visit_mu<F: FnMut((i64, i64), [f64; 2], f64)>(
    field: &Field,
    nu: &NuRep,
    y: [f64; 2],
    b: f64,
    j: usize,
    mut f: F,
) {
    let blk = block(field, nu, y);
    if field.n == 1 {
        // xi = mu nu > 0 forces sign(mu) = sign(nu)
        let mmax = (b / blk.a[0]).floor() as i64;
        let sg = blk.r[0].signum() as i64;
        for m in 1..=mmax {
            let xi = m as f64 * blk.r[0].abs();
            f((sg * m, 0), [xi, xi], blk.a[0] * m as f64);
        }
        return;
    }
    let w = field.omega_emb;
    let m = [b / blk.a[0], b / blk.a[1]];
    let sj = blk.r[j].signum();
    small::rect_points(w, 0, (-m[0], m[0]), (-m[1], m[1]), |p, q| {
        if p == 0 && q == 0 {
            return;
        }
        let mu = [p as f64 + q as f64 * w[0], p as f64 + q as f64 * w[1]];
        if mu[j] * sj <= 0.0 {
            return;
        }
        let wt = blk.a[0] * mu[0].abs() + blk.a[1] * mu[1].abs();
        if wt <= b {
            f((p, q), [mu[0] * blk.r[0], mu[1] * blk.r[1]], wt);
        }
    });
}

/// One enumerated pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NuMuTerm {
    pub nu: (i64, i64),
    pub mu: (i64, i64),
    pub xi: [f64; 2],
    pub weight: f64,
    /// 1 / ([U_F : U_F+] |N(nu)|)
    pub coeff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Enumeration {
    pub terms: Vec<NuMuTerm>,
    pub weight_bound: f64,
    pub tail_bound: f64,
}

/// Materialize the stream of (nu, mu, weight) with weight <= B.
pub fn enumerate_nu_mu(field: &Field, y: [f64; 2], j: usize, trunc: &TruncationParams) -> Result<Enumeration> {
    let b = resolve_bound(field, y, trunc)?;
    let reps = nu_reps(field, x_bound(field, y, b));
    let idx = field.unit_index as f64;
    let chunks = par::map_slice(&reps, |nu| {
        let mut v = Vec::new();
        let coeff = 1.0 / (idx * nu.norm as f64);
        visit_mu(field, nu, y, b, j, |mu, xi, weight| {
            v.push(NuMuTerm { nu: nu.nu, mu, xi, weight, coeff });
        });
        v
    });
    let total: usize = chunks.iter().map(Vec::len).sum();
    if total > trunc.max_terms {
        return Err(HdError::CapExceeded(trunc.max_terms));
    }
    let terms = chunks.into_iter().flatten().collect();
    Ok(Enumeration { terms, weight_bound: b, tail_bound: tail_bound(field, y, b) })
}

/// Sum over mu != 0 of e^{-weight} for the discarded weights > T, where the
/// block has scaled axes alpha, beta with rho = sqrt(alpha beta).
///
/// Lattice points of O_F have |N(mu - mu')| >= 1, so boxes of side
/// u = lambda*rho (lambda <= 1) around the points, measured in the weight
/// coordinates, are disjoint. Integrating e^{-|u|-|v|} over the shifted
/// region gives the bound below for every admissible u; the optimum sits
/// near u = 1, so a few candidates suffice.
fn block_tail(rho: f64, t: f64) -> f64 {
    let t = t.max(2.0 * rho);
    let f = |u: f64| {
        let s = t - u;
        u.exp() / (u * u) * 4.0 * (s + 1.0) * (-s).exp()
    };
    [rho.min(1.0), rho.min(1.2), rho].into_iter().map(f).fold(f64::INFINITY, f64::min)
}

/// Number of window representatives of each norm 1..=X, cached per field.
fn norm_counts(field: &Field, x: f64) -> Arc<Vec<u32>> {
    static CACHE: OnceLock<Mutex<HashMap<(i64, u64), Arc<Vec<u32>>>>> = OnceLock::new();
    let cap = (x.max(1.0).ceil() as u64).next_power_of_two();
    let key = (field.d, cap);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return v.clone();
    }
    let mut counts = vec![0u32; cap as usize + 1];
    for r in nu_reps(field, cap as f64) {
        counts[r.norm as usize] += 1;
    }
    let v = Arc::new(counts);
    cache.lock().unwrap().insert(key, v.clone());
    v
}

/// Rigorous bound on the absolute sum of every term of weight > B.
pub fn tail_bound(field: &Field, y: [f64; 2], b: f64) -> f64 {
    if field.n == 1 {
        return tail_bound_rational(y[0], b);
    }
    let x = x_bound(field, y, b);
    let idx = field.unit_index as f64;
    let rho_of = |n: f64| 2.0 * PI * (n / field.disc as f64).sqrt() * (y[0] * y[1]).sqrt();
    let counts = norm_counts(field, x);
    let mut acc = 0.0;
    for (nrm, &k) in counts.iter().enumerate().take(x.floor() as usize + 1).skip(1) {
        if k > 0 {
            acc += k as f64 * block_tail(rho_of(nrm as f64), b) / (idx * nrm as f64);
        }
    }
    // blocks with |N(nu)| > X: every term exceeds B; dyadic shells
    let eta1 = field.eta_emb[0];
    let cnt = |m: f64| (2.0 * eta1 * m.sqrt() * (1.0 + 1e-6) + 1.0) * (2.0 * m.sqrt() * (1.0 + 1e-6) + 1.0);
    let base = x.max(1.0);
    for k in 0..400 {
        let lo = base * 2f64.powi(k);
        let term = cnt(2.0 * lo) / (idx * lo) * block_tail(rho_of(lo), 0.0);
        acc += term;
        if term < 1e-300 || (k > 8 && term < acc * 1e-18) {
            break;
        }
    }
    acc
}

/// n = 1: sum over nu >= 1 of (1/nu) sum_{mu nu > M} e^{-2 pi mu nu y}, halved
/// and doubled for the sign pairs (index 2 with both signs counted).
fn tail_bound_rational(y: f64, b: f64) -> f64 {
    let a = 2.0 * PI * y;
    let m = b / a;
    let mut acc = 0.0;
    let vmax = m.floor().max(0.0) as i64;
    for nu in 1..=vmax {
        let an = a * nu as f64;
        let mu0 = (m / nu as f64).floor() + 1.0;
        acc += (-an * mu0).exp() / (1.0 - (-an).exp()) / nu as f64;
    }
    let v0 = (vmax + 1) as f64;
    acc += (-a * v0).exp() / ((1.0 - (-a).exp()).powi(2) * v0);
    acc
}

/// Smallest B on a unit grid whose tail bound is below the target; fails
/// early when the enumeration would exceed the term cap.
pub fn resolve_bound(field: &Field, y: [f64; 2], trunc: &TruncationParams) -> Result<f64> {
    if let Some(b) = trunc.weight_bound {
        check_cost(field, y, b, trunc.max_terms)?;
        return Ok(b);
    }
    // tails decay like e^{-B} times a polynomial: jump by the log gap, then creep
    let mut b = (1.0 / trunc.target_tol).ln().max(4.0);
    while b < 400.0 {
        check_cost(field, y, b, trunc.max_terms)?;
        let t = tail_bound(field, y, b);
        if t <= trunc.target_tol {
            return Ok(b);
        }
        b += (t / trunc.target_tol).ln().max(0.5);
    }
    Ok(b)
}

// ---------------------------------------------------------------------------
// Module orbits for the partial L-function.

/// Numeric and exact data describing M_w = O_F + w O_F with its unit action.
#[derive(Clone, Debug)]
pub struct ModuleData {
    /// hyperbolic embedding
    pub j: usize,
    /// matrix entries (a, b, c, d) as integer coordinates
    pub abcd: [(i64, i64); 4],
    pub w_r1: f64,
    pub w_r2: f64,
    pub w_c: num_complex::Complex64,
    /// ln|eps_{r1}| of the relative unit
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModuleOrbit {
    pub m: (i64, i64),
    pub n: (i64, i64),
    /// |N_{K/Q}(beta)| as an exact rational numerator / |N(c)|
    pub norm_num: u128,
    pub sign: i32,
}

impl ModuleOrbit {
    pub fn norm(&self, norm_c: u128) -> f64 {
        self.norm_num as f64 / norm_c as f64
    }
}

fn module_embeddings(field: &Field, md: &ModuleData, m: (i64, i64), n: (i64, i64)) -> (f64, f64, num_complex::Complex64) {
    let w = field.omega_emb;
    let k = 1 - md.j;
    let mj = m.0 as f64 + m.1 as f64 * w[md.j];
    let nj = n.0 as f64 + n.1 as f64 * w[md.j];
    let mk = m.0 as f64 + m.1 as f64 * w[k];
    let nk = n.0 as f64 + n.1 as f64 * w[k];
    (mj + nj * md.w_r1, mj + nj * md.w_r2, mk + md.w_c * nk)
}

/// Log-lattice coordinates (t_F, t_eps) of beta; the domain is |t| < 1/2.
fn module_log_coords(field: &Field, md: &ModuleData, m: (i64, i64), n: (i64, i64)) -> (f64, f64, f64) {
    let (b1, b2, bc) = module_embeddings(field, md, m, n);
    let (l1, l2, l3) = (b1.abs().ln(), b2.abs().ln(), 2.0 * bc.norm().ln());
    let big_l = field.eps.emb(md.j).abs().ln();
    let r1 = l1 - (l1 + l2 + l3) / 4.0;
    let r2 = l2 - (l1 + l2 + l3) / 4.0;
    ((r1 + r2) / (2.0 * big_l), (r1 - r2) / (2.0 * md.lambda), b1)
}

fn centered_index(t: f64) -> i64 {
    (t + 0.5 + TAU).floor() as i64
}

/// Q = c m^2 + (a - d) m n - b n^2, so that N_{K/F}(beta) = Q / c.
fn module_q(field: &Field, md: &ModuleData, m: (i64, i64), n: (i64, i64)) -> (i128, i128) {
    let r = field.ring;
    let c = |x: (i64, i64)| (x.0 as i128, x.1 as i128);
    let [a, b, cc, d] = md.abcd;
    let (m, n) = (c(m), c(n));
    let mm = small::mul(r, m, m);
    let mn = small::mul(r, m, n);
    let nn = small::mul(r, n, n);
    let t1 = small::mul(r, c(cc), mm);
    let amd = (a.0 as i128 - d.0 as i128, a.1 as i128 - d.1 as i128);
    let t2 = small::mul(r, amd, mn);
    let t3 = small::mul(r, c(b), nn);
    (t1.0 + t2.0 - t3.0, t1.1 + t2.1 - t3.1)
}

/// Apply eps (relative unit) to beta = m + n w: (m, n) -> (d m + b n, c m + a n).
fn apply_eps(field: &Field, md: &ModuleData, m: (i64, i64), n: (i64, i64), inverse: bool) -> ((i64, i64), (i64, i64)) {
    let r = field.ring;
    let c = |x: (i64, i64)| (x.0 as i128, x.1 as i128);
    let [a, b, cc, d] = md.abcd;
    // inverse of (d b; c a) with det 1 is (a -b; -c d)
    let (p, q, s, t) = if inverse {
        (c(a), (-(b.0 as i128), -(b.1 as i128)), (-(cc.0 as i128), -(cc.1 as i128)), c(d))
    } else {
        (c(d), c(b), c(cc), c(a))
    };
    let add = |x: (i128, i128), y: (i128, i128)| ((x.0 + y.0) as i64, (x.1 + y.1) as i64);
    let m2 = add(small::mul(r, p, c(m)), small::mul(r, q, c(n)));
    let n2 = add(small::mul(r, s, c(m)), small::mul(r, t, c(n)));
    (m2, n2)
}

fn scale(field: &Field, u: &OFElem, x: (i64, i64)) -> (i64, i64) {
    let (ua, ub) = u.coords_i64().expect("small unit");
    let v = small::mul(field.ring, (ua as i128, ub as i128), (x.0 as i128, x.1 as i128));
    (v.0 as i64, v.1 as i64)
}

/// Canonical representative of the U_F x <eps> orbit of beta = m + n w.
pub fn reduce_module(field: &Field, md: &ModuleData, m: (i64, i64), n: (i64, i64)) -> ((i64, i64), (i64, i64)) {
    let (mut m, mut n) = (m, n);
    let eps_inv = field.eps.unit_inverse().expect("unit");
    for _ in 0..64 {
        let (tf, te, _) = module_log_coords(field, md, m, n);
        let (kf, ke) = (centered_index(tf), centered_index(te));
        if kf == 0 && ke == 0 {
            break;
        }
        if kf != 0 {
            let u = if kf > 0 { &eps_inv } else { &field.eps };
            m = scale(field, u, m);
            n = scale(field, u, n);
        }
        if ke != 0 {
            (m, n) = apply_eps(field, md, m, n, ke > 0);
        }
    }
    let (b1, _, _) = module_embeddings(field, md, m, n);
    if b1 < 0.0 {
        m = (-m.0, -m.1);
        n = (-n.0, -n.1);
    }
    (m, n)
}

/// One representative per orbit of nonzero beta in M_w with |N_{K/Q}(beta)| <= X.
pub fn enumerate_module_orbits(field: &Field, md: &ModuleData, x: f64, cap: usize) -> Result<Vec<ModuleOrbit>> {
    let ring = field.ring;
    let j = md.j;
    let k = 1 - j;
    let w = field.omega_emb;
    let norm_c = small::norm(ring, (md.abcd[2].0 as i128, md.abcd[2].1 as i128)).unsigned_abs();
    let big_l = field.eps.emb(j).abs().ln().abs();
    let lam = md.lambda.abs();
    let slack = 1e-6;
    let r12 = x.powf(0.25) * ((big_l + lam) / 2.0 + slack).exp();
    let r3 = x.powf(0.25) * (big_l / 2.0 + slack).exp();
    let bnj = 2.0 * r12 / (md.w_r1 - md.w_r2).abs();
    let bnk = r3 / md.w_c.im;
    let mut ns = Vec::new();
    small::rect_points(w, j, (-bnj, bnj), (-bnk, bnk), |a, b| ns.push((a, b)));
    let limit = x * norm_c as f64;
    let chunks = par::map_slice(&ns, |&n| {
        let mut out = Vec::new();
        let nj = n.0 as f64 + n.1 as f64 * w[j];
        let nk = n.0 as f64 + n.1 as f64 * w[k];
        let lo_j = (-r12 - nj * md.w_r1).max(-r12 - nj * md.w_r2);
        let hi_j = (r12 - nj * md.w_r1).min(r12 - nj * md.w_r2);
        let im = nk * md.w_c.im;
        let h2 = r3 * r3 - im * im;
        if h2 < 0.0 {
            return out;
        }
        let h = h2.sqrt();
        let re = nk * md.w_c.re;
        small::rect_points(w, j, (lo_j, hi_j), (-h - re, h - re), |a, b| {
            let m = (a, b);
            if m == (0, 0) && n == (0, 0) {
                return;
            }
            let (tf, te, b1) = module_log_coords(field, md, m, n);
            if centered_index(tf) != 0 || centered_index(te) != 0 || b1 <= 0.0 {
                return;
            }
            let q = module_q(field, md, m, n);
            let nq = small::norm(ring, q);
            if nq == 0 || nq.unsigned_abs() > limit.floor() as u128 {
                return;
            }
            // sign(beta_r1 beta_r2) = sign(Q_j) sign(c_j)
            let sq = small::sign_at(ring, q, j);
            let sc = small::sign_at(ring, (md.abcd[2].0 as i128, md.abcd[2].1 as i128), j);
            out.push(ModuleOrbit { m, n, norm_num: nq.unsigned_abs(), sign: sq * sc });
        });
        out
    });
    let total: usize = chunks.iter().map(Vec::len).sum();
    if total > cap {
        return Err(HdError::CapExceeded(cap));
    }
    let mut all: Vec<ModuleOrbit> = chunks.into_iter().flatten().collect();
    all.sort_by_key(|o| (o.norm_num, o.m, o.n));
    Ok(all)
}
