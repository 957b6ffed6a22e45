//! Annihilator action on multiparticle states (Φ coefficients) and
//! extraction of the second-order normally ordered expansion of `a_i a†_j`.
//!
//! All matrix elements go through inner products of composite states
//! `A†_{t_1}…A†_{t_n}|0⟩`: the closed form when the indices are pairwise
//! distinct, the oracle otherwise. A few elements per run are recomputed
//! from scratch with the oracle as a cross-check.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{distinct_tuple_entry, GreenSumCache};
use crate::oracle::{Letter, Oracle, Word};
use crate::params::{DeformationSpec, Family, Order};
use crate::perm::{multiset_permutations, Permutation};
use crate::spectral::{hermitian_eigen, hermitian_pinv};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn sorted(t: &[usize]) -> Vec<usize> {
    let mut v = t.to_vec();
    v.sort_unstable();
    v
}

type InnerMemo = Mutex<HashMap<(Vec<usize>, Vec<usize>), Complex64>>;

/// Cached inner products `⟨row|col⟩` between composite states of any tuples.
pub struct FockInner<'a> {
    spec: &'a DeformationSpec,
    oracle: Oracle<'a>,
    green: GreenSumCache,
    memo: InnerMemo,
}

impl<'a> FockInner<'a> {
    pub fn new(spec: &'a DeformationSpec) -> Self {
        FockInner {
            spec,
            oracle: Oracle::new(spec),
            green: GreenSumCache::new(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn spec(&self) -> &DeformationSpec {
        self.spec
    }

    pub fn inner(&self, row: &[usize], col: &[usize]) -> Result<Complex64> {
        if row.len() != col.len() {
            return Ok(ZERO);
        }
        let s = sorted(row);
        if s != sorted(col) {
            // site content is conserved by every exchange
            return Ok(ZERO);
        }
        if s.windows(2).all(|w| w[0] != w[1]) {
            return distinct_tuple_entry(self.spec, row, col, Some(&self.green));
        }
        let key = (row.to_vec(), col.to_vec());
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = self.oracle.vev_a_word(&Word::gram(row, col))?.value;
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }

    /// Gram matrix over explicit tuples.
    pub fn matrix(&self, basis: &[Vec<usize>]) -> Result<DMatrix<Complex64>> {
        let n = basis.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for r in 0..n {
            for c in r..n {
                let v = self.inner(&basis[r], &basis[c])?;
                m[(r, c)] = v;
                m[(c, r)] = v.conj();
            }
        }
        Ok(m)
    }
}

fn with_front(i: usize, t: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(t.len() + 1);
    v.push(i);
    v.extend_from_slice(t);
    v
}

/// Removes one occurrence of `site` (the first); `None` if absent.
fn remove_site(t: &[usize], site: usize) -> Option<(usize, Vec<usize>)> {
    let k = t.iter().position(|&s| s == site)?;
    let mut v = t.to_vec();
    v.remove(k);
    Some((k, v))
}

/// `P (a_i |ket⟩)` expressed in the basis of orderings of the residual
/// multiset: the basis and the pseudo-inverse of its Gram matrix.
struct Projection {
    basis: Vec<Vec<usize>>,
    ginv: DMatrix<Complex64>,
    singular: bool,
}

fn projection(fock: &FockInner, residual: &[usize]) -> Result<Projection> {
    let basis = multiset_permutations(residual);
    let gram = fock.matrix(&basis)?;
    let (values, _) = hermitian_eigen(&gram)?;
    let max = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let singular = values
        .iter()
        .any(|&x| x.abs() <= crate::spectral::default_rank_tol(basis.len(), max));
    let ginv = hermitian_pinv(&gram, None)?;
    Ok(Projection {
        basis,
        ginv,
        singular,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiEntry {
    /// Position of the removed creator in the base tuple (first occurrence).
    pub removed: usize,
    /// Residual ordering `π(omitted tuple)`.
    pub perm: Permutation,
    pub tuple: Vec<usize>,
    pub value: Complex64,
}

/// Coefficients of `a_i A†_{i_1}…A†_{i_n}|0⟩` on the `(n-1)`-particle states.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    pub n: usize,
    pub base_tuple: Vec<usize>,
    pub site: usize,
    pub entries: Vec<PhiEntry>,
    /// The residual Gram matrix was singular and its pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

impl PhiTable {
    /// Max over residual bra states `u` of `|⟨u|a_i|base⟩ − Σ_w Φ_w ⟨u|w⟩|`,
    /// the left side evaluated by the oracle.
    pub fn reconstruction_error(&self, spec: &DeformationSpec) -> Result<f64> {
        let fock = FockInner::new(spec);
        let oracle = Oracle::new(spec);
        let mut worst: f64 = 0.0;
        for u in self.entries.iter().map(|e| &e.tuple) {
            let w = Word::a_bra(u)
                .concat(&Word::new(vec![Letter::a(self.site)]))
                .concat(&Word::a_ket(&self.base_tuple));
            let truth = oracle.vev_a_word(&w)?.value;
            let mut rebuilt = ZERO;
            for e in &self.entries {
                rebuilt += e.value * fock.inner(u, &e.tuple)?;
            }
            worst = worst.max((truth - rebuilt).norm());
        }
        Ok(worst)
    }
}

/// `Φ = [A^(n-1)]^{-1} β` with `β_w = ⟨w|a_i|base⟩`. A singular residual
/// Gram matrix is handled with its pseudo-inverse unless `allow_pinv` is off.
pub fn phi_table(
    spec: &DeformationSpec,
    base_tuple: &[usize],
    i: usize,
    allow_pinv: bool,
) -> Result<PhiTable> {
    if base_tuple.is_empty() {
        return Err(Error::Precondition("base tuple must be non-empty".into()));
    }
    for &s in base_tuple.iter().chain(std::iter::once(&i)) {
        if s >= spec.site_count() {
            return Err(Error::SiteOutOfRange {
                site: s,
                site_count: spec.site_count(),
            });
        }
    }
    let mut table = PhiTable {
        n: base_tuple.len(),
        base_tuple: base_tuple.to_vec(),
        site: i,
        entries: Vec::new(),
        pseudo_inverse: false,
    };
    let Some((removed, omitted)) = remove_site(base_tuple, i) else {
        return Ok(table);
    };
    let fock = FockInner::new(spec);
    let proj = projection(&fock, &omitted)?;
    if proj.singular && !allow_pinv {
        return Err(Error::Singular(format!(
            "residual Gram matrix over {omitted:?} is singular"
        )));
    }
    let beta = DVector::from_iterator(
        proj.basis.len(),
        proj.basis
            .iter()
            .map(|w| fock.inner(&with_front(i, w), base_tuple))
            .collect::<Result<Vec<_>>>()?,
    );
    let phi = &proj.ginv * beta;
    table.pseudo_inverse = proj.singular;
    for (w, value) in proj.basis.iter().zip(phi.iter()) {
        let perm = residual_permutation(&omitted, w);
        table.entries.push(PhiEntry {
            removed,
            perm,
            tuple: w.clone(),
            value: *value,
        });
    }
    Ok(table)
}

/// The permutation with `target = π(source)`, matching repeated entries in order.
fn residual_permutation(source: &[usize], target: &[usize]) -> Permutation {
    let mut used = vec![false; source.len()];
    let images = target
        .iter()
        .map(|t| {
            let k = (0..source.len())
                .find(|&k| !used[k] && source[k] == *t)
                .expect("same multiset");
            used[k] = true;
            k
        })
        .collect();
    Permutation::new(images).expect("bijection")
}

fn denominator(p: f64, q: Complex64) -> f64 {
    p * p - (p - 2.0).powi(2) * q.norm_sqr()
}

fn finite_order(spec: &DeformationSpec) -> Result<usize> {
    match spec.declared_order() {
        Order::Finite(p) => Ok(p),
        Order::Infinite => Err(Error::InvalidOrder(
            "closed-form coefficients need a finite order".into(),
        )),
    }
}

/// `8p(p−1)q³ / [p² − (p−2)²q²]²`.
pub fn scalar_coeff(p: usize, q: f64) -> Result<f64> {
    let pf = p as f64;
    let d = denominator(pf, Complex64::new(q, 0.0));
    if d.abs() < 1e-300 {
        return Err(Error::VanishingDenominator {
            p,
            modulus: q.abs(),
        });
    }
    Ok(8.0 * pf * (pf - 1.0) * q.powi(3) / (d * d))
}

/// `εp / (2(p−1))`, the coefficient at the para points.
pub fn para_coeff(p: usize, epsilon: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::Precondition("para coefficient needs p >= 2".into()));
    }
    Ok(epsilon * p as f64 / (2.0 * (p as f64 - 1.0)))
}

fn coeff_with(
    spec: &DeformationSpec,
    k: usize,
    j: usize,
    i: usize,
    numerator: Complex64,
) -> Result<Complex64> {
    if spec.family() == Family::Speicher {
        return Err(Error::Precondition(
            "no closed form is given for the Speicher preset".into(),
        ));
    }
    let p = finite_order(spec)?;
    let pf = p as f64;
    let d1 = denominator(pf, spec.q(k, j));
    let d2 = denominator(pf, spec.q(k, i));
    if d1.abs() < 1e-300 || d2.abs() < 1e-300 {
        let modulus = spec.q(k, j).norm().max(spec.q(k, i).norm());
        return Err(Error::VanishingDenominator { p, modulus });
    }
    Ok(numerator * (8.0 * pf * (pf - 1.0) / (d1 * d2)))
}

/// Coefficient of `[Y_jk]† [Y_ik]` in `a_i a†_j`, reference form:
/// `8p(p−1) q_ji q_jk q_ik / ([p²−(p−2)²|q_kj|²][p²−(p−2)²|q_ki|²])`.
/// For a uniform real q this is [`scalar_coeff`].
pub fn closed_form_coeff(
    spec: &DeformationSpec,
    i: usize,
    j: usize,
    k: usize,
) -> Result<Complex64> {
    check_sites(spec, &[i, j, k])?;
    coeff_with(spec, k, j, i, spec.q(j, i) * spec.q(j, k) * spec.q(i, k))
}

/// Same denominators with numerator `q_ij q_ik q_kj`. This is the form the
/// extraction reproduces for complex q; it satisfies `c_k(j,i) = conj(c_k(i,j))`
/// as Hermiticity of the expansion requires, which the reference form does not.
pub fn conjugation_consistent_coeff(
    spec: &DeformationSpec,
    i: usize,
    j: usize,
    k: usize,
) -> Result<Complex64> {
    check_sites(spec, &[i, j, k])?;
    coeff_with(spec, k, j, i, spec.q(i, j) * spec.q(i, k) * spec.q(k, j))
}

fn check_sites(spec: &DeformationSpec, sites: &[usize]) -> Result<()> {
    for &s in sites {
        if s >= spec.site_count() {
            return Err(Error::SiteOutOfRange {
                site: s,
                site_count: spec.site_count(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct ExtractOptions {
    /// One unknown per k instead of a single shared coefficient.
    pub per_k: bool,
    /// Fit residual above which extraction fails.
    pub threshold: f64,
    pub spot_checks: usize,
    pub seed: u64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            per_k: false,
            threshold: 1e-8,
            spot_checks: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffTerm {
    /// 1-based site of the k-sum; absent for the shared coefficient.
    pub k: Option<usize>,
    pub extracted_re: f64,
    pub extracted_im: f64,
    pub closed_form_re: f64,
    pub closed_form_im: f64,
}

impl CoeffTerm {
    pub fn extracted(&self) -> Complex64 {
        Complex64::new(self.extracted_re, self.extracted_im)
    }

    pub fn closed_form(&self) -> Complex64 {
        Complex64::new(self.closed_form_re, self.closed_form_im)
    }
}

/// Extracted vs closed-form second-order coefficients of `a_i a†_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffReport {
    pub p: String,
    /// Scalar q when uniform and real.
    pub q: Option<f64>,
    pub spec_hash: String,
    /// 1-based.
    pub i: usize,
    pub j: usize,
    pub first_order_re: f64,
    pub first_order_im: f64,
    pub first_order_residual: f64,
    pub terms: Vec<CoeffTerm>,
    pub residual_norm: f64,
    pub spot_check_max: f64,
    pub elements: usize,
}

impl CoeffReport {
    pub fn first_order(&self) -> Complex64 {
        Complex64::new(self.first_order_re, self.first_order_im)
    }

    /// Largest `|extracted − closed_form|` over the terms.
    pub fn max_mismatch(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.extracted() - t.closed_form()).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Matrix-element pieces of one `(u, v)` pair.
#[derive(Debug, Clone)]
struct Element {
    u: Vec<usize>,
    v: Vec<usize>,
    /// `⟨u|a_i a†_j|v⟩ − δ_ij ⟨u|v⟩`
    lhs: Complex64,
    /// `⟨u|a†_j a_i|v⟩`
    hop: Complex64,
    /// `⟨u|[Y_jk]†[Y_ik]|v⟩` per probe site k
    y: Vec<Complex64>,
}

/// `⟨0|Y_ik|v⟩` for a 2-particle `v`.
fn y_amp(fock: &FockInner, i: usize, k: usize, v: &[usize], shift: f64) -> Result<Complex64> {
    let spec = fock.spec();
    Ok(fock.inner(&[k, i], v)? - spec.q(k, i) * shift * fock.inner(&[i, k], v)?)
}

fn element(
    fock: &FockInner,
    i: usize,
    j: usize,
    probe: &[usize],
    shift: f64,
    u: &[usize],
    v: &[usize],
) -> Result<Element> {
    let mut lhs = fock.inner(&with_front(i, u), &with_front(j, v))?;
    if i == j {
        lhs -= fock.inner(u, v)?;
    }
    let hop = match (remove_site(u, j), remove_site(v, i)) {
        (Some((_, mu)), Some((_, mv))) if sorted(&mu) == sorted(&mv) => {
            let proj = projection(fock, &mv)?;
            let bu = DVector::from_iterator(
                proj.basis.len(),
                proj.basis
                    .iter()
                    .map(|w| fock.inner(&with_front(j, w), u))
                    .collect::<Result<Vec<_>>>()?,
            );
            let bv = DVector::from_iterator(
                proj.basis.len(),
                proj.basis
                    .iter()
                    .map(|w| fock.inner(&with_front(i, w), v))
                    .collect::<Result<Vec<_>>>()?,
            );
            (bu.adjoint() * &proj.ginv * bv)[(0, 0)]
        }
        _ => ZERO,
    };
    let y = if u.len() == 2 && v.len() == 2 {
        probe
            .iter()
            .map(|&k| Ok(y_amp(fock, j, k, u, shift)?.conj() * y_amp(fock, i, k, v, shift)?))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![ZERO; probe.len()]
    };
    Ok(Element {
        u: u.to_vec(),
        v: v.to_vec(),
        lhs,
        hop,
        y,
    })
}

/// The same pieces straight from the oracle.
fn element_by_oracle(
    oracle: &Oracle,
    i: usize,
    j: usize,
    probe: &[usize],
    shift: f64,
    u: &[usize],
    v: &[usize],
) -> Result<Element> {
    let spec = oracle.spec();
    let bra = Word::a_bra(u);
    let ket = Word::a_ket(v);
    let vev = |ops: Vec<Word>| -> Result<Complex64> {
        let words: Vec<Word> = ops.iter().map(|o| bra.concat(o).concat(&ket)).collect();
        oracle.vev_sum(&words)
    };
    let mut lhs_ops = vec![Word::new(vec![Letter::a(i), Letter::a_dag(j)])];
    if i == j {
        lhs_ops.push(Word::new(vec![]).scaled(-ONE));
    }
    let lhs = vev(lhs_ops)?;
    let hop = vev(vec![Word::new(vec![Letter::a_dag(j), Letter::a(i)])])?;
    let mut y = Vec::with_capacity(probe.len());
    for &k in probe {
        // [Y_jk]† = a†_k a†_j − conj(q_kj) s a†_j a†_k,  Y_ik = a_i a_k − q_ki s a_k a_i
        let left = [
            (Word::new(vec![Letter::a_dag(k), Letter::a_dag(j)]), ONE),
            (
                Word::new(vec![Letter::a_dag(j), Letter::a_dag(k)]),
                -spec.q(k, j).conj() * shift,
            ),
        ];
        let right = [
            (Word::new(vec![Letter::a(i), Letter::a(k)]), ONE),
            (
                Word::new(vec![Letter::a(k), Letter::a(i)]),
                -spec.q(k, i) * shift,
            ),
        ];
        let mut ops = Vec::new();
        for (l, cl) in &left {
            for (r, cr) in &right {
                ops.push(l.concat(r).scaled(cl * cr));
            }
        }
        y.push(vev(ops)?);
    }
    Ok(Element {
        u: u.to_vec(),
        v: v.to_vec(),
        lhs,
        hop,
        y,
    })
}

fn states(probe: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let one: Vec<Vec<usize>> = probe.iter().map(|&s| vec![s]).collect();
    let two: Vec<Vec<usize>> = probe
        .iter()
        .flat_map(|&a| probe.iter().map(move |&b| vec![a, b]))
        .collect();
    vec![vec![vec![]], one, two]
}

/// Least squares `min ‖b − A x‖` by normal equations; all-zero columns are
/// pinned to 0. Returns `x` and the residual norm.
fn least_squares(cols: &[Vec<Complex64>], b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let live: Vec<usize> = (0..cols.len())
        .filter(|&c| cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() > 1e-13)
        .collect();
    let mut x = vec![ZERO; cols.len()];
    if !live.is_empty() {
        let m = live.len();
        let normal = DMatrix::from_fn(m, m, |r, c| {
            cols[live[r]]
                .iter()
                .zip(&cols[live[c]])
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
        });
        let rhs = DVector::from_fn(m, |r, _| {
            cols[live[r]]
                .iter()
                .zip(b)
                .map(|(a, y)| a.conj() * y)
                .sum::<Complex64>()
        });
        let (values, _) = hermitian_eigen(&normal)?;
        let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if values[0] <= max * 1e-12 {
            return Err(Error::Singular(
                "normal equations of the coefficient fit".into(),
            ));
        }
        let sol = normal
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("normal equations of the coefficient fit".into()))?;
        for (r, &c) in live.iter().enumerate() {
            x[c] = sol[r];
        }
    }
    let res = b
        .iter()
        .enumerate()
        .map(|(e, y)| {
            let fit: Complex64 = cols.iter().zip(&x).map(|(col, xc)| col[e] * xc).sum();
            (y - fit).norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    Ok((x, res))
}

/// Fits the second-order expansion
/// `a_i a†_j = δ_ij + q_ij(2/p−1) a†_j a_i + Σ_k c_k [Y_jk]†[Y_ik] + …`
/// over all 0-, 1- and 2-particle matrix elements on `probe_sites`
/// (0-based, must contain i and j). On these sectors the omitted terms vanish.
pub fn extract_second_order(
    spec: &DeformationSpec,
    i: usize,
    j: usize,
    probe_sites: &[usize],
    opts: ExtractOptions,
) -> Result<CoeffReport> {
    if spec.family() == Family::Speicher {
        return Err(Error::Precondition(
            "coefficient extraction is defined for q_ij Δ families".into(),
        ));
    }
    check_sites(spec, &[i, j])?;
    check_sites(spec, probe_sites)?;
    let mut probe = probe_sites.to_vec();
    probe.sort_unstable();
    probe.dedup();
    if !probe.contains(&i) || !probe.contains(&j) {
        return Err(Error::Precondition(
            "probe sites must contain i and j".into(),
        ));
    }
    let p = spec.order() as f64;
    let shift = 2.0 / p - 1.0;
    let fock = FockInner::new(spec);
    let pairs: Vec<(Vec<usize>, Vec<usize>)> = states(&probe)
        .into_iter()
        .flat_map(|sector| {
            let s2 = sector.clone();
            sector
                .into_iter()
                .flat_map(move |u| s2.clone().into_iter().map(move |v| (u.clone(), v)))
        })
        .collect();
    let elements: Vec<Element> = pairs
        .par_iter()
        .map(|(u, v)| element(&fock, i, j, &probe, shift, u, v))
        .collect::<Result<Vec<_>>>()?;

    // first order on the 0/1-particle sectors, where no Y term acts
    let low: Vec<&Element> = elements.iter().filter(|e| e.u.len() < 2).collect();
    let (f, first_res) = least_squares(
        &[low.iter().map(|e| e.hop).collect()],
        &low.iter().map(|e| e.lhs).collect::<Vec<_>>(),
    )?;
    let fixed_first = spec.q(i, j) * shift;

    let b: Vec<Complex64> = elements
        .iter()
        .map(|e| e.lhs - fixed_first * e.hop)
        .collect();
    let cols: Vec<Vec<Complex64>> = if opts.per_k {
        (0..probe.len())
            .map(|k| elements.iter().map(|e| e.y[k]).collect())
            .collect()
    } else {
        vec![elements.iter().map(|e| e.y.iter().sum()).collect()]
    };
    let (x, residual) = least_squares(&cols, &b)?;
    // NaN residuals fail too
    if residual.is_nan() || residual > opts.threshold {
        return Err(Error::ResidualTooLarge {
            residual,
            threshold: opts.threshold,
        });
    }

    let terms = if opts.per_k {
        probe
            .iter()
            .zip(&x)
            .map(|(&k, c)| {
                let cf = if spec.order() == 1 {
                    Ok(ZERO)
                } else {
                    closed_form_coeff(spec, i, j, k)
                }?;
                Ok(term(Some(k + 1), *c, cf))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let cf = match spec.uniform_real_q() {
            Some(q) if spec.order() > 1 => {
                Complex64::new(scalar_coeff(finite_order(spec)?, q)?, 0.0)
            }
            Some(_) => ZERO,
            None => {
                return Err(Error::Precondition(
                    "a shared coefficient needs a uniform real q; use per-k".into(),
                ))
            }
        };
        vec![term(None, x[0], cf)]
    };

    let oracle = Oracle::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let picks = sample(
        &mut rng,
        elements.len(),
        opts.spot_checks.min(elements.len()),
    );
    let mut spot: f64 = 0.0;
    for idx in picks.iter() {
        let fast = &elements[idx];
        let slow = element_by_oracle(&oracle, i, j, &probe, shift, &fast.u, &fast.v)?;
        spot = spot
            .max((fast.lhs - slow.lhs).norm())
            .max((fast.hop - slow.hop).norm());
        for (a, b) in fast.y.iter().zip(&slow.y) {
            spot = spot.max((a - b).norm());
        }
    }
    if spot > 1e-9 {
        return Err(Error::ResidualTooLarge {
            residual: spot,
            threshold: 1e-9,
        });
    }

    Ok(CoeffReport {
        p: spec.declared_order().to_string(),
        q: spec.uniform_real_q().map(|q| {
            if spec.declared_order() == Order::Infinite {
                -q
            } else {
                q
            }
        }),
        spec_hash: spec.digest(),
        i: i + 1,
        j: j + 1,
        first_order_re: f[0].re,
        first_order_im: f[0].im,
        first_order_residual: first_res,
        terms,
        residual_norm: residual,
        spot_check_max: spot,
        elements: elements.len(),
    })
}

fn term(k: Option<usize>, c: Complex64, cf: Complex64) -> CoeffTerm {
    CoeffTerm {
        k,
        extracted_re: c.re,
        extracted_im: c.im,
        closed_form_re: cf.re,
        closed_form_im: cf.im,
    }
}
