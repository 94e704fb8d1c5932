//! Batch front-end. Every run prints one JSON report on stdout.
//!
//! Exit codes: 0 when every case passes, 1 when a case fails or a
//! computation errors, 2 on usage errors.

use crate::dedekind_sums::{self as ds, HeckeConvention};
use crate::eta_engine as eta;
use crate::field_arith::{make_field, parse_elem, parse_matrix, Field, ModMatrix};
use crate::lfunctions as lf;
use crate::quasi_elliptic as qe;
use crate::sample;
use crate::unit_domain::TruncationParams;
use crate::HdError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "hdsum", version, about = "Dedekind sums for Hilbert modular groups")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Squarefree D selecting Q(sqrt D); 1 is the rational field.
    #[arg(long = "d", default_value_t = 7)]
    pub field: i64,
    #[arg(long, env = "HDSUM_TOL", default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long)]
    pub weight_bound: Option<f64>,
    #[arg(long, default_value_t = 20_000_000)]
    pub max_terms: usize,
    /// Embedding index carrying the sum.
    #[arg(long, default_value_t = 0)]
    pub j: usize,
}

impl Common {
    pub fn trunc(&self) -> TruncationParams {
        TruncationParams { weight_bound: self.weight_bound, target_tol: self.tol, max_terms: self.max_terms }
    }
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// s_j(d, c; zhat)
    Sum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        num: String,
        #[arg(long)]
        den: String,
        #[arg(long, default_value = "0+1i")]
        z2: String,
    },
    /// Phi_j(A, zhat)
    Phi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value = "0+1i")]
        z2: String,
    },
    /// Lambda_j(z)
    Lambda {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        z: String,
        #[arg(long)]
        z2: Option<String>,
    },
    /// Area cocycle of (A, B) at j
    Delta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        matrix2: String,
    },
    /// Psi(A) of a quasi-elliptic or elliptic matrix
    Psi {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: String,
        /// Also evaluate the elliptic closed form.
        #[arg(long, value_enum)]
        closed: Option<Form>,
    },
    /// Kind of each embedding
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: String,
    },
    /// Truncated L_A(s)
    La {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: String,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 5000.0)]
        norm_bound: f64,
    },
    /// Geodesic period against L_A(s)
    Theorem5 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "[[[-2,-1],[1,1]],[[3,1],[-2,-1]]]")]
        matrix: String,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
        #[arg(long, default_value_t = 1e4)]
        norm_bound: f64,
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
    },
    /// Randomized identity campaigns
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        identity: Identity,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Norm bound for sampled entries.
        #[arg(long, default_value_t = 50)]
        nmax: u32,
        /// Hecke prime as "[a,b]"; defaults to 3+sqrt7 (or 3 over Q).
        #[arg(long)]
        p: Option<String>,
        /// Use the argument convention as typeset for T_p.
        #[arg(long)]
        printed: bool,
    },
    /// Exact rational checks over Z
    Classical {
        #[arg(long)]
        recip: bool,
        #[arg(long)]
        hecke: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        c: i64,
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Form {
    Printed,
    Derived,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Identity {
    Reciprocity,
    Hecke,
    Prop2,
    Cocycle,
}

#[derive(Serialize, Debug)]
pub struct RunReport {
    pub command: Vec<String>,
    pub cases: Vec<Value>,
    pub max_defect: Option<f64>,
    pub pass: bool,
    pub wall_time: f64,
}

/// Report under construction.
struct Cases {
    cases: Vec<Value>,
    max_defect: Option<f64>,
    pass: bool,
}

impl Cases {
    fn new() -> Self {
        Cases { cases: Vec::new(), max_defect: None, pass: true }
    }

    fn value(&mut self, v: Value) {
        self.cases.push(v);
    }

    fn checked(&mut self, mut v: Value, defect: f64, budget: f64) {
        let ok = defect.abs() <= budget;
        v["defect"] = json!(defect);
        v["budget"] = json!(budget);
        v["pass"] = json!(ok);
        self.max_defect = Some(self.max_defect.map_or(defect.abs(), |m: f64| m.max(defect.abs())));
        self.pass &= ok;
        self.cases.push(v);
    }
}

fn usage(e: impl std::fmt::Display) -> HdError {
    HdError::Parse(e.to_string())
}

pub fn parse_point(s: &str) -> crate::Result<Complex64> {
    let z: Complex64 = s.trim().replace(' ', "").parse().map_err(|_| usage(format!("bad complex literal {s:?}")))?;
    if !(z.im > 0.0) {
        return Err(usage(format!("{s:?} is not in the upper half plane")));
    }
    Ok(z)
}

fn zhat(field: &Field, z2: &str) -> crate::Result<Vec<Complex64>> {
    if field.n == 1 {
        Ok(Vec::new())
    } else {
        Ok(vec![parse_point(z2)?])
    }
}

fn mat_json(m: &ModMatrix) -> Value {
    json!([[m.a, m.b], [m.c, m.d]])
}

fn cpx(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn check_j(field: &Field, j: usize) -> crate::Result<()> {
    if j >= field.n {
        return Err(usage(format!("j = {j} but the field has {} embeddings", field.n)));
    }
    Ok(())
}

fn verify(field: &Field, c: &Common, identity: Identity, trials: usize, seed: u64, nmax: u32, p: &Option<String>, printed: bool) -> crate::Result<Cases> {
    let j = c.j;
    let tr = c.trunc();
    let mut r = sample::rng(seed);
    let mut out = Cases::new();
    match identity {
        Identity::Cocycle => {
            for _ in 0..trials {
                let (a, b, zh) = sample::cocycle_triple(field, &mut r, nmax, j);
                let bz: Vec<Complex64> = if field.n == 1 { Vec::new() } else { vec![eta::mobius(b.emb(1 - j), zh[0])] };
                let pab = eta::phi(field, &a.mul(&b), &zh, j, &tr)?;
                let pa = eta::phi(field, &a, &bz, j, &tr)?;
                let pb = eta::phi(field, &b, &zh, j, &tr)?;
                let d = pab.value - pa.value - pb.value - 0.25 * eta::delta_cocycle(&a, &b, j) as f64;
                let budget = (1e-6f64).max(pab.tail_error + pa.tail_error + pb.tail_error);
                out.checked(json!({"a": mat_json(&a), "b": mat_json(&b), "zhat": zh.iter().map(|&z| cpx(z)).collect::<Vec<_>>()}), d, budget);
            }
        }
        Identity::Reciprocity => {
            let mut done = 0;
            while done < trials {
                let (cc, dd, zh) = sample::pair_and_point(field, &mut r, nmax, j);
                if cc.sign_at(j) <= 0 || dd.sign_at(j) <= 0 {
                    continue;
                }
                let df = ds::reciprocity_defect(field, &cc, &dd, &zh, j, &tr)?;
                out.checked(json!({"c": cc, "d": dd, "zhat": zh.iter().map(|&z| cpx(z)).collect::<Vec<_>>()}), df.defect, df.budget.max(1e-6));
                done += 1;
            }
        }
        Identity::Prop2 => {
            // unit scaling can push a point toward the cusp: skip capped draws
            let capped = TruncationParams { max_terms: tr.max_terms.min(3_000_000), ..tr };
            let mut done = 0;
            let mut tries = 0;
            while done < trials && tries < 20 * trials.max(1) {
                tries += 1;
                let (cc, dd, zh) = sample::pair_and_point(field, &mut r, nmax, j);
                let rep = match ds::prop2_defects(field, &dd, &cc, &zh, &field.one(), j, &capped) {
                    Err(HdError::CapExceeded(_)) => continue,
                    other => other?,
                };
                let base = json!({"c": cc, "d": dd, "zhat": zh.iter().map(|&z| cpx(z)).collect::<Vec<_>>()});
                for (name, df) in [("neg_c", rep.neg_c), ("neg_d", rep.neg_d), ("unit", rep.unit), ("translate", rep.translate)] {
                    let mut v = base.clone();
                    v["identity"] = json!(name);
                    out.checked(v, df.defect, df.budget);
                }
                let mut v = base;
                v["identity"] = json!("translate_as_typeset");
                v["defect"] = json!(rep.translate_printed.defect);
                v["informational"] = json!(true);
                out.value(v);
                done += 1;
            }
            if done < trials {
                return Err(HdError::CapExceeded(capped.max_terms));
            }
        }
        Identity::Hecke => {
            let p = match p {
                Some(p) => parse_elem(field, p)?,
                None if field.n == 1 => field.int(3),
                None => field.elem(3, 1),
            };
            let p = &p;
            let conv = if printed { HeckeConvention::Printed } else { HeckeConvention::Consistent };
            for _ in 0..trials {
                let (cc, dd, zh) = sample::pair_and_point(field, &mut r, nmax.min(20), j);
                let df = ds::hecke_defect(field, &dd, &cc, &zh, p, j, conv, &tr)?;
                out.checked(
                    json!({"c": cc, "d": dd, "p": p, "convention": conv, "zhat": zh.iter().map(|&z| cpx(z)).collect::<Vec<_>>()}),
                    df.defect,
                    df.budget.max(1e-5),
                );
            }
        }
    }
    Ok(out)
}

impl Cmd {
    fn common(&self) -> Option<&Common> {
        match self {
            Cmd::Sum { common, .. }
            | Cmd::Phi { common, .. }
            | Cmd::Lambda { common, .. }
            | Cmd::Delta { common, .. }
            | Cmd::Psi { common, .. }
            | Cmd::Classify { common, .. }
            | Cmd::La { common, .. }
            | Cmd::Theorem5 { common, .. }
            | Cmd::Verify { common, .. } => Some(common),
            Cmd::Classical { .. } => None,
        }
    }
}

fn dispatch(cli: &Cli) -> crate::Result<Cases> {
    if let Cmd::Classical { recip, hecke, c: cc, d } = &cli.cmd {
        let mut out = Cases::new();
        if *recip {
            if *cc <= 0 || *d <= 0 || num_integer::gcd(*cc, *d) != 1 {
                return Err(usage("--recip needs coprime positive c, d"));
            }
            let df = ds::classical_reciprocity_defect(*d, *cc);
            out.checked(json!({"identity": "reciprocity", "c": cc, "d": d, "exact_defect": df.to_string()}), if df == 0.into() { 0.0 } else { 1.0 }, 0.0);
        }
        if let Some(p) = hecke {
            if *cc <= 0 || num_integer::gcd(*cc, *d) != 1 || num_integer::gcd(*cc, *p) != 1 {
                return Err(usage("--hecke needs c > 0 coprime to d and p"));
            }
            let df = ds::classical_hecke_defect(*d, *cc, *p);
            out.checked(json!({"identity": "hecke", "c": cc, "d": d, "p": p, "exact_defect": df.to_string()}), if df == 0.into() { 0.0 } else { 1.0 }, 0.0);
        }
        if !*recip && hecke.is_none() {
            if *cc == 0 {
                return Err(usage("c must be nonzero"));
            }
            let s = ds::classical_s(*d, *cc);
            out.value(json!({"c": cc, "d": d, "s": s.to_string(), "value": *s.numer() as f64 / *s.denom() as f64}));
        }
        return Ok(out);
    }
    let c = cli.cmd.common().expect("every other command carries field options");
    let field = make_field(c.field)?;
    check_j(&field, c.j)?;
    let tr = c.trunc();
    let j = c.j;
    let mut out = Cases::new();
    match &cli.cmd {
        Cmd::Sum { num, den, z2, .. } => {
            let (d, cc) = (parse_elem(&field, num)?, parse_elem(&field, den)?);
            let zh = zhat(&field, z2)?;
            let v = ds::sum_s_general(&field, &d, &cc, &zh, j, &tr)?;
            out.value(json!({"d": d, "c": cc, "value": v.value, "tail_error": v.tail_error}));
        }
        Cmd::Phi { matrix, z2, .. } => {
            let m = parse_matrix(&field, matrix)?;
            let v = eta::phi(&field, &m, &zhat(&field, z2)?, j, &tr)?;
            out.value(json!({"matrix": mat_json(&m), "value": v.value, "tail_error": v.tail_error}));
        }
        Cmd::Lambda { z, z2, .. } => {
            let mut pt = vec![parse_point(z)?];
            if field.n == 2 {
                pt.push(parse_point(z2.as_deref().ok_or_else(|| usage("--z2 is required for real quadratic fields"))?)?);
            }
            let v = eta::lambda(&field, &pt, j, &tr)?;
            out.value(json!({"value": cpx(v.value), "tail_error": v.tail_error, "terms": v.terms}));
        }
        Cmd::Delta { matrix, matrix2, .. } => {
            let (a, b) = (parse_matrix(&field, matrix)?, parse_matrix(&field, matrix2)?);
            out.value(json!({"value": eta::delta_cocycle(&a, &b, j), "tail_error": 0.0}));
        }
        Cmd::Psi { matrix, closed, .. } => {
            let m = parse_matrix(&field, matrix)?;
            let kinds = qe::classify(&m);
            let p = if qe::is_elliptic(&m) { qe::psi_j(&field, &m, j, &tr)? } else { qe::psi(&field, &m, &tr)? };
            let mut v = json!({"matrix": mat_json(&m), "kinds": kinds, "value": p.value, "tail_error": p.tail_error, "j": p.j, "phi": p.phi, "sign_c_tr": p.sign_c_tr});
            if let Some(form) = closed {
                let form = match form {
                    Form::Printed => qe::ClosedForm::Printed,
                    Form::Derived => qe::ClosedForm::Derived,
                };
                let cf = qe::psi_elliptic_closed(&field, &m, j, form)?;
                v["closed"] = json!(cf);
                out.checked(v, p.value - cf.value, p.tail_error + 1e-8);
            } else {
                out.value(v);
            }
        }
        Cmd::Classify { matrix, .. } => {
            let m = parse_matrix(&field, matrix)?;
            out.value(json!({
                "matrix": mat_json(&m),
                "kinds": qe::classify(&m),
                "elliptic": qe::is_elliptic(&m),
                "hyperbolic_index": qe::hyperbolic_index(&m),
                "order": qe::finite_order(&m),
            }));
        }
        Cmd::La { matrix, s, norm_bound, .. } => {
            let m = parse_matrix(&field, matrix)?;
            let v = lf::l_a(&field, &m, Complex64::from(*s), *norm_bound, tr.max_terms)?;
            out.value(json!({"value_re": v.value.re, "value_im": v.value.im, "tail_error": v.tail_error, "heuristic_tail": v.heuristic_tail, "orbits": v.orbits}));
        }
        Cmd::Theorem5 { matrix, s, norm_bound, rel_tol, .. } => {
            let m = parse_matrix(&field, matrix)?;
            let r = lf::theorem5(&field, &m, Complex64::from(*s), *norm_bound, *norm_bound, 32, 1e-6)?;
            out.checked(
                json!({"s": s, "value_re": r.period.value.re, "value_im": r.period.value.im, "rhs_re": r.rhs.re, "rhs_im": r.rhs.im, "rel_defect": r.rel_defect, "tail_budget": r.budget}),
                r.rel_defect,
                *rel_tol,
            );
        }
        Cmd::Verify { identity, trials, seed, nmax, p, printed, .. } => {
            out = verify(&field, c, *identity, *trials, *seed, *nmax, p, *printed)?;
        }
        Cmd::Classical { .. } => unreachable!(),
    }
    Ok(out)
}

/// Run a parsed command line. Errors carry the exit code they map to.
pub fn execute(cli: &Cli, argv: Vec<String>) -> std::result::Result<RunReport, (i32, String)> {
    let t0 = Instant::now();
    let cases = dispatch(cli).map_err(|e| {
        let code = match e {
            HdError::Parse(_) | HdError::NotSquarefree(_) | HdError::UnsupportedField(_) | HdError::BadDeterminant => 2,
            _ => 1,
        };
        (code, e.to_string())
    })?;
    Ok(RunReport { command: argv, cases: cases.cases, max_defect: cases.max_defect, pass: cases.pass, wall_time: t0.elapsed().as_secs_f64() })
}

/// Parse argv, run, print, and return the process exit code.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    let argv: Vec<String> = argv.into_iter().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, argv.into_iter().skip(1).collect()) {
        Ok(rep) => {
            println!("{}", serde_json::to_string(&rep).expect("report serializes"));
            if rep.pass {
                0
            } else {
                1
            }
        }
        Err((code, msg)) => {
            eprintln!("hdsum: {msg}");
            code
        }
    }
}
