//! Named verification checks and the sweeps behind them.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::fmt17;
use crate::gram::build_gram;
use crate::interp::{
    closed_form_coeff, conjugation_consistent_coeff, extract_second_order, phi_table,
    ExtractOptions,
};
use crate::jw::{algebra_residual, build_rep, green_relation_residual, jw_map, JwParams, Relation};
use crate::oracle::{Letter, Oracle, Word};
use crate::params::{make_preset, DeformationSpec, Family, FamilyArgs, Order, PresetArgs, Sign};
use crate::perm::multiset_permutations;

/// Hermitian matrix with off-diagonal moduli and diagonal magnitudes in `[0, bound]`.
pub fn random_hermitian_q<R: Rng>(sites: usize, bound: f64, rng: &mut R) -> DMatrix<Complex64> {
    let mut q = DMatrix::from_element(sites, sites, Complex64::new(0.0, 0.0));
    for i in 0..sites {
        q[(i, i)] = Complex64::new(rng.gen_range(-bound..=bound), 0.0);
        for j in (i + 1)..sites {
            let z = Complex64::from_polar(rng.gen_range(0.0..=bound), rng.gen_range(-PI..PI));
            q[(i, j)] = z;
            q[(j, i)] = z.conj();
        }
    }
    q
}

pub fn multiparam_spec(order: Order, q: DMatrix<Complex64>) -> Result<DeformationSpec> {
    DeformationSpec::new(order, q, Family::Multiparam, FamilyArgs::None)
}

pub fn scalar_spec(order: Order, q: f64, sites: usize) -> Result<DeformationSpec> {
    make_preset(
        Family::GreenQuon,
        &PresetArgs {
            q: Some(q),
            order: Some(order),
            sites: Some(sites),
            ..Default::default()
        },
    )
}

/// Max `|closed form − oracle|` over all entries of `A^(n)`.
pub fn oracle_gram_mismatch(spec: &DeformationSpec, base: &[usize]) -> Result<f64> {
    let g = build_gram(spec, base)?;
    let oracle = Oracle::new(spec);
    let el = g.basis.elements();
    let pairs: Vec<(usize, usize)> = (0..el.len())
        .flat_map(|r| (0..el.len()).map(move |c| (r, c)))
        .collect();
    let worst = pairs
        .par_iter()
        .map(|&(r, c)| {
            Ok((oracle.vev_a_word(&Word::gram(&el[r], &el[c]))?.value - g.entry(r, c)).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

fn tuples(sites: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..sites).map(move |s| {
                    let mut t = t.clone();
                    t.push(s);
                    t
                })
            })
            .collect();
    }
    out
}

/// Max `|⟨bra| [A_k,[A†_l,A_m]_±] − (2/p)δ_kl A_m |ket⟩|` over sites `< sites`
/// and kets of 1..=`max_particles` composite creators.
pub fn trilinear_sweep(
    spec: &DeformationSpec,
    sign: Sign,
    sites: usize,
    max_particles: usize,
) -> Result<f64> {
    let oracle = Oracle::new(spec);
    let mut jobs = Vec::new();
    for len in 1..=max_particles {
        for ket in tuples(sites, len) {
            for bra in tuples(sites, len - 1) {
                for klm in tuples(sites, 3) {
                    jobs.push((bra.clone(), ket.clone(), klm));
                }
            }
        }
    }
    let vals = jobs
        .par_iter()
        .map(|(bra, ket, klm)| {
            let d = oracle.trilinear_defect(
                sign,
                klm[0],
                klm[1],
                klm[2],
                &Word::a_bra(bra),
                &Word::a_ket(ket),
            )?;
            Ok(d.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// True if the Green indices of `greens` appear in first-occurrence order.
fn green_canonical(greens: &[usize]) -> bool {
    let mut next = 0;
    for &g in greens {
        if g > next {
            return false;
        }
        if g == next {
            next += 1;
        }
    }
    true
}

/// Max non-closure defect over b-letter bra (annihilators) and ket
/// (creators) words of equal length ≤ `max_len` on sites `< sites`.
/// Pairs differing by a relabeling of Green indices are evaluated once.
pub fn nonclosure_sweep(spec: &DeformationSpec, sites: usize, max_len: usize) -> Result<f64> {
    let p = spec.order();
    let letters: Vec<(usize, usize)> = (0..sites)
        .flat_map(|s| (0..p).map(move |g| (s, g)))
        .collect();
    let mut jobs = Vec::new();
    for len in 0..=max_len {
        let idx = tuples(letters.len(), len);
        for bra in &idx {
            for ket in &idx {
                let greens: Vec<usize> = bra.iter().chain(ket).map(|&k| letters[k].1).collect();
                if !green_canonical(&greens) {
                    continue;
                }
                for i in 0..sites {
                    for j in 0..sites {
                        jobs.push((bra.clone(), ket.clone(), i, j));
                    }
                }
            }
        }
    }
    let oracle = Oracle::new(spec);
    let vals = jobs
        .par_iter()
        .map(|(bra, ket, i, j)| {
            let b = Word::new(
                bra.iter()
                    .map(|&k| Letter::b(letters[k].0, letters[k].1))
                    .collect(),
            );
            let k = Word::new(
                ket.iter()
                    .map(|&k| Letter::b_dag(letters[k].0, letters[k].1))
                    .collect(),
            );
            Ok(oracle.nonclosure_defect(*i, *j, &b, &k)?.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Max Φ reconstruction error over base tuples of length ≤ `max_n` drawn
/// from the spec's sites (one ordering per multiset) and every removed site.
pub fn phi_sweep(spec: &DeformationSpec, max_n: usize) -> Result<f64> {
    let sites = spec.site_count();
    let mut worst: f64 = 0.0;
    for n in 1..=max_n {
        for t in tuples(sites, n) {
            if t.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            // a non-sorted ordering exercises the permutation bookkeeping
            let base = multiset_permutations(&t).pop().expect("non-empty");
            for i in 0..sites {
                let table = phi_table(spec, &base, i, true)?;
                worst = worst.max(table.reconstruction_error(spec)?);
            }
        }
    }
    Ok(worst)
}

/// Max entrywise gap between the infinite-order Gram matrix and the order-1
/// matrix with `q ↦ −q`, built from independent specs.
pub fn infinite_limit_mismatch(
    q: &DMatrix<Complex64>,
    family: Family,
    base: &[usize],
) -> Result<f64> {
    let inf = DeformationSpec::new(Order::Infinite, q.clone(), family, FamilyArgs::None)?;
    let neg = DeformationSpec::new(Order::Finite(1), q.map(|z| -z), family, FamilyArgs::None)?;
    let a = build_gram(&inf, base)?;
    let b = build_gram(&neg, base)?;
    Ok((a.entries - b.entries)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Parameters a check may read; unset values fall back to per-check defaults.
#[derive(Debug, Clone, Default)]
pub struct CheckContext {
    pub order: Option<Order>,
    pub q: Option<f64>,
    pub epsilon: Option<Sign>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub phi: Option<DMatrix<f64>>,
    pub q_matrix: Option<DMatrix<Complex64>>,
    pub sites: Option<usize>,
    pub tol: Option<f64>,
    pub seed: u64,
}

impl CheckContext {
    fn finite_order(&self, default: usize) -> Result<usize> {
        match self.order {
            None => Ok(default),
            Some(Order::Finite(p)) => Ok(p),
            Some(Order::Infinite) => Err(Error::InvalidOrder(
                "this check needs a finite order".into(),
            )),
        }
    }

    fn q_or(&self, default: f64) -> f64 {
        self.q
            .or_else(|| self.epsilon.map(Sign::value))
            .unwrap_or(default)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub max_residual: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, max_residual: f64, threshold: f64, detail: String) -> Self {
        CheckOutcome {
            name,
            passed: max_residual <= threshold,
            max_residual,
            threshold,
            detail,
        }
    }

    /// `name STATUS max_residual=… detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {} max_residual={} threshold={} {}",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            fmt17(self.max_residual),
            fmt17(self.threshold),
            self.detail
        )
        .trim_end()
        .to_string()
    }
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome>;
}

struct Expansion;

impl Check for Expansion {
    fn name(&self) -> &'static str {
        "expansion"
    }
    fn summary(&self) -> &'static str {
        "second-order coefficient of a_i a+_j for scalar q (default p=2, q=0.5)"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let q = ctx.q_or(0.5);
        let tol = ctx.tol.unwrap_or(1e-8);
        let spec = scalar_spec(Order::Finite(p), q, 2)?;
        let opts = ExtractOptions {
            seed: ctx.seed,
            threshold: f64::INFINITY,
            ..Default::default()
        };
        let r = extract_second_order(&spec, 0, 1, &[0, 1], opts)?;
        let t = &r.terms[0];
        let worst = r.residual_norm.max(r.max_mismatch());
        Ok(CheckOutcome::new(
            self.name(),
            worst,
            tol,
            format!(
                "coefficient={} closed_form={} fit_residual={}",
                fmt17(t.extracted_re),
                fmt17(t.closed_form_re),
                fmt17(r.residual_norm)
            ),
        ))
    }
}

struct Multiparam;

impl Check for Multiparam {
    fn name(&self) -> &'static str {
        "multiparam"
    }
    fn summary(&self) -> &'static str {
        "per-k coefficients against the reference multiparameter closed form"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let tol = ctx.tol.unwrap_or(1e-8);
        let q = match &ctx.q_matrix {
            Some(q) => q.clone(),
            None => random_hermitian_q(
                ctx.sites.unwrap_or(3),
                0.8,
                &mut ChaCha8Rng::seed_from_u64(ctx.seed),
            ),
        };
        let spec = multiparam_spec(Order::Finite(p), q)?;
        let (reference, consistent, residual) = multiparam_mismatch(&spec, ctx.seed)?;
        Ok(CheckOutcome::new(
            self.name(),
            reference.max(residual),
            tol,
            format!(
                "reference_mismatch={} conjugation_consistent_mismatch={} fit_residual={}",
                fmt17(reference),
                fmt17(consistent),
                fmt17(residual)
            ),
        ))
    }
}

/// Per-k extraction over all ordered site pairs: max mismatch against the
/// reference and the conjugation-consistent closed forms, and the max fit residual.
pub fn multiparam_mismatch(spec: &DeformationSpec, seed: u64) -> Result<(f64, f64, f64)> {
    let sites: Vec<usize> = (0..spec.site_count()).collect();
    let opts = ExtractOptions {
        per_k: true,
        seed,
        threshold: f64::INFINITY,
        ..Default::default()
    };
    let (mut reference, mut consistent, mut residual) = (0.0f64, 0.0f64, 0.0f64);
    for &i in &sites {
        for &j in &sites {
            let r = extract_second_order(spec, i, j, &sites, opts)?;
            residual = residual.max(r.residual_norm);
            for t in &r.terms {
                let k = t.k.expect("per-k term") - 1;
                reference =
                    reference.max((t.extracted() - closed_form_coeff(spec, i, j, k)?).norm());
                consistent = consistent
                    .max((t.extracted() - conjugation_consistent_coeff(spec, i, j, k)?).norm());
            }
        }
    }
    Ok((reference, consistent, residual))
}

struct Trilinear;

impl Check for Trilinear {
    fn name(&self) -> &'static str {
        "trilinear"
    }
    fn summary(&self) -> &'static str {
        "trilinear para relations at q = epsilon (default epsilon=+1, p=2)"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let q = ctx.q_or(1.0);
        let sign = ctx.epsilon.unwrap_or(crate::oracle::para_sign(q));
        let tol = ctx.tol.unwrap_or(1e-10);
        let spec = scalar_spec(Order::Finite(p), q, 2)?;
        let worst = trilinear_sweep(&spec, sign, ctx.sites.unwrap_or(2), 3)?;
        Ok(CheckOutcome::new(
            self.name(),
            worst,
            tol,
            format!("p={p} q={}", fmt17(q)),
        ))
    }
}

struct Nonclosure;

impl Check for Nonclosure {
    fn name(&self) -> &'static str {
        "nonclosure"
    }
    fn summary(&self) -> &'static str {
        "A_i A+_j + q A+_j A_i = delta_ij + q K_ij on b-words up to length 3"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let q = ctx.q_or(0.5);
        let tol = ctx.tol.unwrap_or(1e-12);
        let spec = scalar_spec(Order::Finite(p), q, 2)?;
        let worst = nonclosure_sweep(&spec, ctx.sites.unwrap_or(2), 3)?;
        Ok(CheckOutcome::new(
            self.name(),
            worst,
            tol,
            format!("p={p} q={}", fmt17(q)),
        ))
    }
}

struct Jw;

impl Check for Jw {
    fn name(&self) -> &'static str {
        "jw"
    }
    fn summary(&self) -> &'static str {
        "Jordan-Wigner relation residuals on 2 sites, p=2, cutoff 3 (default lambda=0, mu=1)"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let lambda = ctx.lambda.unwrap_or(0.0);
        let mu = ctx.mu.unwrap_or(1.0);
        let tol = ctx.tol.unwrap_or(1e-10);
        let phi = ctx
            .phi
            .clone()
            .unwrap_or_else(|| crate::spectral::default_phi(2));
        let rep = build_rep(phi.nrows(), p, 3)?;
        let params = JwParams::lower_triangular(lambda, mu, &phi)?;
        let bs = jw_map(&rep, &params)?;
        let r = algebra_residual(&rep, &params, &bs)?;
        let worst = [Relation::R1, Relation::R2, Relation::R3]
            .iter()
            .map(|&rel| r.max(rel))
            .fold(0.0, f64::max);
        let mut detail = format!(
            "R1={} R2={} R3={} R3_literal={}",
            fmt17(r.max(Relation::R1)),
            fmt17(r.max(Relation::R2)),
            fmt17(r.max(Relation::R3)),
            fmt17(r.max(Relation::R3Literal))
        );
        if mu == 1.0 {
            let g = green_relation_residual(&rep, &params, &bs)?;
            detail.push_str(&format!(" green_relation={}", fmt17(g.max())));
        }
        Ok(CheckOutcome::new(self.name(), worst, tol, detail))
    }
}

struct Phi;

impl Check for Phi {
    fn name(&self) -> &'static str {
        "phi"
    }
    fn summary(&self) -> &'static str {
        "annihilator coefficients reproduce oracle inner products (n <= 4)"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let tol = ctx.tol.unwrap_or(1e-10);
        let q = match &ctx.q_matrix {
            Some(q) => q.clone(),
            None => random_hermitian_q(
                ctx.sites.unwrap_or(3),
                1.0,
                &mut ChaCha8Rng::seed_from_u64(ctx.seed),
            ),
        };
        let spec = multiparam_spec(Order::Finite(p), q)?;
        let worst = phi_sweep(&spec, 4)?;
        Ok(CheckOutcome::new(self.name(), worst, tol, format!("p={p}")))
    }
}

struct OracleCheck;

impl Check for OracleCheck {
    fn name(&self) -> &'static str {
        "oracle"
    }
    fn summary(&self) -> &'static str {
        "closed-form Gram entries against the normal-ordering oracle (n <= 4)"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let p = ctx.finite_order(2)?;
        let tol = ctx.tol.unwrap_or(1e-10);
        let q = match &ctx.q_matrix {
            Some(q) => q.clone(),
            None => random_hermitian_q(4, 1.0, &mut ChaCha8Rng::seed_from_u64(ctx.seed)),
        };
        let spec = multiparam_spec(Order::Finite(p), q)?;
        let mut worst: f64 = 0.0;
        for n in 1..=spec.site_count().min(4) {
            worst = worst.max(oracle_gram_mismatch(&spec, &(0..n).collect::<Vec<_>>())?);
        }
        Ok(CheckOutcome::new(self.name(), worst, tol, format!("p={p}")))
    }
}

struct Limit;

impl Check for Limit {
    fn name(&self) -> &'static str {
        "limit"
    }
    fn summary(&self) -> &'static str {
        "infinite order equals order 1 with q -> -q (n <= 4)"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckOutcome> {
        let tol = ctx.tol.unwrap_or(1e-12);
        let q = match &ctx.q_matrix {
            Some(q) => q.clone(),
            None => random_hermitian_q(4, 1.0, &mut ChaCha8Rng::seed_from_u64(ctx.seed)),
        };
        let mut worst: f64 = 0.0;
        for n in 1..=q.nrows().min(4) {
            worst = worst.max(infinite_limit_mismatch(
                &q,
                Family::Multiparam,
                &(0..n).collect::<Vec<_>>(),
            )?);
        }
        Ok(CheckOutcome::new(self.name(), worst, tol, String::new()))
    }
}

pub struct CheckRegistry {
    checks: BTreeMap<&'static str, Box<dyn Check>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry {
            checks: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.insert(check.name(), check);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Check> {
        self.checks
            .get(name)
            .map(|c| c.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "check",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Check> + '_ {
        self.checks.values().map(|c| c.as_ref())
    }
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = CheckRegistry::empty();
        r.register(Box::new(Expansion));
        r.register(Box::new(Multiparam));
        r.register(Box::new(Trilinear));
        r.register(Box::new(Nonclosure));
        r.register(Box::new(Jw));
        r.register(Box::new(Phi));
        r.register(Box::new(OracleCheck));
        r.register(Box::new(Limit));
        r
    }
}
