//! The partial L-function L_A(s), the Eisenstein series E_F(z, s) and its
//! z_j-derivative for Re s > 1, and the geodesic period identity.
//!
//! Tails here are heuristic: orbit counts up to X grow linearly, the slope
//! is measured at X and the remainder estimated as 2 C X^{1-s}/(s-1).

use crate::error::{HdError, Result};
use crate::field_arith::{small, Field, ModMatrix};
use crate::numerics::{gamma, gauss_legendre, CNeumaier};
use crate::par;
use crate::quasi_elliptic::{psi, quasi_data, QuasiEllipticData};
use crate::unit_domain::{enumerate_module_orbits, TruncationParams, TAU};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LASeriesValue {
    pub s: Complex64,
    pub value: Complex64,
    pub tail_error: f64,
    pub norm_bound: f64,
    pub orbits: usize,
    pub heuristic_tail: bool,
}

fn heuristic_tail(count: f64, x: f64, sigma: f64) -> f64 {
    2.0 * (count / x) * x.powf(1.0 - sigma) / (sigma - 1.0)
}

fn check_s(s: Complex64) -> Result<()> {
    if s.re <= 1.0 {
        return Err(HdError::Parse("need Re(s) > 1".into()));
    }
    Ok(())
}

/// L_A(s) over module orbits with |N_{K/Q}(beta)| <= x.
pub fn l_a(field: &Field, a: &ModMatrix, s: Complex64, x: f64, cap: usize) -> Result<LASeriesValue> {
    check_s(s)?;
    let q = quasi_data(field, a)?;
    l_a_with(field, a, &q, s, x, cap)
}

fn l_a_with(field: &Field, a: &ModMatrix, q: &QuasiEllipticData, s: Complex64, x: f64, cap: usize) -> Result<LASeriesValue> {
    let md = q.module(a)?;
    let orbits = enumerate_module_orbits(field, &md, x, cap)?;
    let norm_c = small::norm(field.ring, (md.abcd[2].0 as i128, md.abcd[2].1 as i128)).unsigned_abs();
    let mut acc = CNeumaier::default();
    // ascending norms: sum small terms last is not needed here, the terms decay
    for o in orbits.iter().rev() {
        let nrm = o.norm(norm_c);
        acc.add((-s * nrm.ln()).exp() * o.sign as f64);
    }
    let value = acc.sum() * q.sign_c_tr as f64;
    Ok(LASeriesValue {
        s,
        value,
        tail_error: heuristic_tail(orbits.len() as f64, x, s.re),
        norm_bound: x,
        orbits: orbits.len(),
        heuristic_tail: true,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EisValue {
    pub value: Complex64,
    pub tail_error: f64,
    pub terms: usize,
}

const WINDOWS: usize = 6;

/// Visit (mu, nu) in O_F^2 \ 0 modulo U_F with Q_1 Q_2 <= x, where
/// Q_k = |mu_k z_k + nu_k|^2 / y_k. Each +-pair is visited twice, so the
/// callback result is weighted 1/2. The callback gets the embedded mu, nu and Q.
fn eis_sum<F>(field: &Field, z: &[Complex64], x: f64, term: F) -> (Complex64, usize)
where
    F: Fn([f64; 2], [f64; 2], [f64; 2]) -> Complex64 + Sync + Send,
{
    if field.n == 1 {
        let (x0, y) = (z[0].re, z[0].im);
        let mmax = (x / y).sqrt().floor() as i64;
        let rows: Vec<i64> = (-mmax..=mmax).collect();
        let parts = par::map_slice(&rows, |&m| {
            let mut acc = CNeumaier::default();
            let mut cnt = 0;
            let h = (x * y - (m * m) as f64 * y * y).max(0.0).sqrt();
            let c = -(m as f64) * x0;
            for n in (c - h).ceil() as i64..=(c + h).floor() as i64 {
                if m == 0 && n == 0 {
                    continue;
                }
                let (mf, nf) = (m as f64, n as f64);
                let q = ((mf * x0 + nf).powi(2) + mf * mf * y * y) / y;
                if q <= x {
                    acc.add(term([mf, 0.0], [nf, 0.0], [q, 1.0]));
                    cnt += 1;
                }
            }
            (acc.sum(), cnt)
        });
        let mut acc = CNeumaier::default();
        let mut cnt = 0;
        for p in parts {
            acc.add(p.0);
            cnt += p.1;
        }
        return (acc.sum() * 0.5, cnt / 2);
    }
    let w = field.omega_emb;
    let r = field.regulator;
    let (xs, ys) = ([z[0].re, z[1].re], [z[0].im, z[1].im]);
    let mut total = CNeumaier::default();
    let mut cnt = 0;
    for win in 0..WINDOWS {
        let ta = -0.5 + win as f64 / WINDOWS as f64;
        let tb = ta + 1.0 / WINDOWS as f64;
        let (ra, rb) = ((4.0 * r * ta).exp(), (4.0 * r * tb).exp());
        let big = [(x * rb).sqrt() * (1.0 + 1e-7), (x / ra).sqrt() * (1.0 + 1e-7)];
        let mut mus = Vec::new();
        let lim = [(big[0] / ys[0]).sqrt(), (big[1] / ys[1]).sqrt()];
        small::rect_points(w, 0, (-lim[0], lim[0]), (-lim[1], lim[1]), |a, b| mus.push((a, b)));
        let parts = par::map_slice(&mus, |&(ma, mb)| {
            let mu = [ma as f64 + mb as f64 * w[0], ma as f64 + mb as f64 * w[1]];
            let mut acc = CNeumaier::default();
            let mut c = 0usize;
            let mut lo = [0.0; 2];
            let mut hi = [0.0; 2];
            for k in 0..2 {
                let h2 = big[k] * ys[k] - mu[k] * mu[k] * ys[k] * ys[k];
                if h2 < 0.0 {
                    return (acc.sum(), 0);
                }
                let h = h2.sqrt();
                lo[k] = -mu[k] * xs[k] - h;
                hi[k] = -mu[k] * xs[k] + h;
            }
            small::rect_points(w, 0, (lo[0], hi[0]), (lo[1], hi[1]), |na, nb| {
                if (ma, mb, na, nb) == (0, 0, 0, 0) {
                    return;
                }
                let nu = [na as f64 + nb as f64 * w[0], na as f64 + nb as f64 * w[1]];
                let q = [
                    ((mu[0] * xs[0] + nu[0]).powi(2) + mu[0] * mu[0] * ys[0] * ys[0]) / ys[0],
                    ((mu[1] * xs[1] + nu[1]).powi(2) + mu[1] * mu[1] * ys[1] * ys[1]) / ys[1],
                ];
                if q[0] * q[1] > x {
                    return;
                }
                let t = (q[0] / q[1]).ln() / (4.0 * r) + TAU;
                if !(-0.5..0.5).contains(&t) {
                    return;
                }
                let idx = (((t + 0.5) * WINDOWS as f64).floor() as usize).min(WINDOWS - 1);
                if idx != win {
                    return;
                }
                acc.add(term(mu, nu, q));
                c += 1;
            });
            (acc.sum(), c)
        });
        for p in parts {
            total.add(p.0);
            cnt += p.1;
        }
    }
    (total.sum() * 0.5, cnt / 2)
}

fn qpow(q: f64, s: Complex64) -> Complex64 {
    (-s * q.ln()).exp()
}

/// E_F(z, s) = sum over (mu, nu) mod U_F of prod_k y_k^s / |mu_k z_k + nu_k|^{2s}.
pub fn eis(field: &Field, z: &[Complex64], s: Complex64, x: f64) -> Result<EisValue> {
    check_s(s)?;
    let n = field.n;
    let (v, cnt) = eis_sum(field, z, x, |_, _, q| (0..n).map(|k| qpow(q[k], s)).product());
    Ok(EisValue { value: v, tail_error: heuristic_tail(cnt as f64, x, s.re), terms: cnt })
}

/// Wirtinger derivative (1/2)(d/dx_j - i d/dy_j) of E_F, i.e.
/// (s/2i) sum y_j^{s-1} (mu_j conj(z_j) + nu_j)^2 / |mu_j z_j + nu_j|^{2s+2} prod_{k != j} ...
pub fn eis_dz(field: &Field, z: &[Complex64], j: usize, s: Complex64, x: f64) -> Result<EisValue> {
    check_s(s)?;
    let n = field.n;
    let zj = z[j];
    let (v, cnt) = eis_sum(field, z, x, |mu, nu, q| {
        let lin = zj.conj() * mu[j] + nu[j];
        let mut t = qpow(q[j], s) * lin * lin / (zj.im * q[j] * zj.im);
        for k in (0..n).filter(|&k| k != j) {
            t *= qpow(q[k], s);
        }
        t
    });
    let pref = s / Complex64::new(0.0, 2.0);
    Ok(EisValue {
        value: pref * v,
        tail_error: pref.norm() / zj.im * heuristic_tail(cnt as f64, x, s.re),
        terms: cnt,
    })
}

/// The arc of the A_j-invariant semicircle, parametrised by
/// g(t) = (t w_r1 - i w_r2) / (t - i), the inverse of f(z) = i (z - w_r2)/(z - w_r1).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GeodesicArc {
    pub w_r1: f64,
    pub w_r2: f64,
    pub eps_r1: f64,
    /// f(tau) for the base point tau
    pub t0: f64,
}

impl GeodesicArc {
    pub fn g(&self, t: f64) -> Complex64 {
        let i = Complex64::i();
        (Complex64::from(t * self.w_r1) - i * self.w_r2) / (Complex64::from(t) - i)
    }

    pub fn f(&self, z: Complex64) -> Complex64 {
        Complex64::i() * (z - self.w_r2) / (z - self.w_r1)
    }

    /// dg/dt
    pub fn dg(&self, t: f64) -> Complex64 {
        let d = Complex64::from(t) - Complex64::i();
        Complex64::new(0.0, -(self.w_r1 - self.w_r2)) / (d * d)
    }

    pub fn tau(&self) -> Complex64 {
        self.g(self.t0)
    }
}

pub fn geodesic_arc(q: &QuasiEllipticData, t0: Option<f64>) -> GeodesicArc {
    // default base point makes the arc symmetric about the top of the circle
    let t0 = t0.unwrap_or(1.0 / q.eps_r1.abs());
    GeodesicArc { w_r1: q.w_r1, w_r2: q.w_r2, eps_r1: q.eps_r1, t0 }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PeriodValue {
    pub value: Complex64,
    /// |I_m - I_2m| at the accepted order
    pub quad_error: f64,
    pub tail_error: f64,
    pub order: usize,
}

fn period_at_order(field: &Field, q: &QuasiEllipticData, arc: &GeodesicArc, s: Complex64, x: f64, m: usize) -> Result<(Complex64, f64)> {
    // t = t0 e^u, u from 0 to 2 ln|eps_r1|; dz = g'(t) t du
    let (nodes, weights) = gauss_legendre(m);
    let ub = 2.0 * q.eps_r1.abs().ln();
    let half = ub / 2.0;
    let j = q.j;
    let vals: Vec<Result<(Complex64, f64)>> = par::map_indexed(m, |i| {
        let u = half * (nodes[i] + 1.0);
        let t = arc.t0 * u.exp();
        let z1 = arc.g(t);
        let mut z = vec![q.w_c];
        z.insert(j, z1);
        let d = eis_dz(field, &z, j, s, x)?;
        let jac = arc.dg(t) * t;
        Ok((d.value * jac * weights[i] * half, d.tail_error * jac.norm() * weights[i] * half.abs()))
    });
    let mut acc = CNeumaier::default();
    let mut tail = 0.0;
    for v in vals {
        let (a, b) = v?;
        acc.add(a);
        tail += b;
    }
    Ok((acc.sum(), tail))
}

/// Integral of dE_F/dz_j (z_j, w_c, s) dz_j along the arc from tau to A_j tau.
pub fn geodesic_period(field: &Field, a: &ModMatrix, s: Complex64, m: usize, x: f64, t0: Option<f64>, tol: f64) -> Result<PeriodValue> {
    check_s(s)?;
    if field.n != 2 {
        return Err(HdError::UnsupportedField(field.d));
    }
    let q = quasi_data(field, a)?;
    let arc = geodesic_arc(&q, t0);
    let mut order = m.max(4);
    let (mut prev, _) = period_at_order(field, &q, &arc, s, x, order)?;
    loop {
        let (next, tail) = period_at_order(field, &q, &arc, s, x, 2 * order)?;
        let err = (next - prev).norm();
        if err < tol / 10.0 || order >= 128 {
            return Ok(PeriodValue { value: next, quad_error: err, tail_error: tail, order: 2 * order });
        }
        prev = next;
        order *= 2;
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Theorem5Report {
    pub s: Complex64,
    pub period: PeriodValue,
    pub l_a: LASeriesValue,
    /// Gamma((s+1)/2)^2 Vol^s / (Gamma(s) 2i d_F^s) L_A(s)
    pub rhs: Complex64,
    pub defect: f64,
    pub rel_defect: f64,
    pub budget: f64,
}

pub fn theorem5_factor(field: &Field, q: &QuasiEllipticData, s: Complex64) -> Complex64 {
    let g = gamma((s + 1.0) / 2.0);
    let vol = Complex64::from(q.volume(field));
    let df = Complex64::from(field.disc as f64);
    g * g * vol.powc(s) / (gamma(s) * Complex64::new(0.0, 2.0) * df.powc(s))
}

pub fn theorem5(field: &Field, a: &ModMatrix, s: Complex64, x_eis: f64, x_la: f64, m: usize, tol: f64) -> Result<Theorem5Report> {
    let q = quasi_data(field, a)?;
    let period = geodesic_period(field, a, s, m, x_eis, None, tol)?;
    let la = l_a_with(field, a, &q, s, x_la, 50_000_000)?;
    let fac = theorem5_factor(field, &q, s);
    let rhs = fac * la.value;
    let defect = (period.value - rhs).norm();
    let budget = period.tail_error + period.quad_error + fac.norm() * la.tail_error;
    Ok(Theorem5Report { s, period, l_a: la, rhs, defect, rel_defect: defect / rhs.norm(), budget })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DerivReport {
    /// (n-1)! Psi(A), which the central theorem identifies with L_A^{(n-1)}(0)
    pub value: f64,
    pub tail_error: f64,
    pub order: u32,
    pub note: &'static str,
}

pub fn l_a_deriv_report(field: &Field, a: &ModMatrix, trunc: &TruncationParams) -> Result<DerivReport> {
    let p = psi(field, a, trunc)?;
    let order = field.n as u32 - 1;
    let fact: f64 = (1..=order).map(|k| k as f64).product();
    Ok(DerivReport {
        value: fact * p.value,
        tail_error: fact * p.tail_error,
        order,
        note: "value of L_A^(n-1)(0) obtained as (n-1)! Psi(A); no analytic continuation is computed",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_arith::make_field;

    #[test]
    fn arc_maps_to_scaled_parameter() {
        let f = make_field(7).unwrap();
        let a = ModMatrix::new(f.elem(-2, -1), f.elem(1, 1), f.elem(3, 1), f.elem(-2, -1)).unwrap();
        let q = quasi_data(&f, &a).unwrap();
        let arc = geodesic_arc(&q, Some(1.3));
        let tau = arc.tau();
        let ft = arc.f(tau);
        assert!((ft - Complex64::from(1.3)).norm() < 1e-12);
        let e = a.emb(0);
        let at = (tau * e[0] + e[1]) / (tau * e[2] + e[3]);
        let ratio = arc.f(at) / ft;
        assert!((ratio - Complex64::from(q.eps_r1 * q.eps_r1)).norm() < 1e-10, "{ratio}");
    }

    #[test]
    fn eis_rational_matches_direct_sum() {
        let f = make_field(1).unwrap();
        let z = Complex64::new(0.2, 1.1);
        let s = Complex64::from(3.0);
        let v = eis(&f, &[z], s, 1e5).unwrap();
        let mut direct = 0.0;
        for m in -400i64..=400 {
            for n in -400i64..=400 {
                if (m, n) != (0, 0) {
                    let w = z * m as f64 + n as f64;
                    direct += (z.im / w.norm_sqr()).powi(3);
                }
            }
        }
        direct /= 2.0;
        assert!((v.value.re - direct).abs() < 1e-6, "{} vs {}", v.value.re, direct);
    }
}
