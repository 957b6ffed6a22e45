//! Gram matrices `A^(n)` of multiparticle inner products
//! `⟨0|A_{r_n}…A_{r_1} A†_{c_1}…A†_{c_n}|0⟩`.
//!
//! For pairwise distinct base indices an entry has the closed form
//!
//! ```text
//! A_{π(i);σ(i)} = Π_{(a,b)} s(r_a, r_b) · p^{-n} Σ_{α ∈ [p]^n} Π_{(a,b)} w(α_a = α_b)
//! ```
//!
//! over the inversion pairs `(a,b)` of `σ⁻¹π`, where `r = π(i)` is the row
//! tuple and `q_{iα,jβ} = s(i,j)·w(α = β)` is the Green factor of the deformation spec
//! (`s = q_ij`, `w = Δ` for every family but the Speicher preset).
//! Entries with repeated indices are delegated to the [`crate::oracle`].

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::{Oracle, OracleLimits, Word};
use crate::params::DeformationSpec;
use crate::perm::{multiset_permutations, Permutation};

/// Default bound on the particle number of a Gram matrix.
pub const DEFAULT_MAX_N: usize = 7;

/// Tolerance for the Hermiticity invariant of a built matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Inversion pairs `(a, b)`, `a < b`, 0-based positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InversionSet {
    pairs: Vec<(usize, usize)>,
}

impl InversionSet {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Pairs `a < b` with `(σ⁻¹π)(a) > (σ⁻¹π)(b)`.
pub fn inversion_pairs(pi: &Permutation, sigma: &Permutation) -> Result<InversionSet> {
    let tau = sigma.inverse().compose(pi)?;
    Ok(InversionSet {
        pairs: tau.inversions(),
    })
}

/// Index tuples spanning an n-particle sector.
#[derive(Debug, Clone, PartialEq)]
pub struct GramBasis {
    base_tuple: Vec<usize>,
    elements: Vec<Vec<usize>>,
    distinct: bool,
}

impl GramBasis {
    /// All distinct orderings of `base_tuple`, lexicographic.
    pub fn new(base_tuple: &[usize]) -> Result<Self> {
        if base_tuple.is_empty() {
            return Err(Error::Precondition("base tuple must be non-empty".into()));
        }
        let mut sorted = base_tuple.to_vec();
        sorted.sort_unstable();
        let distinct = sorted.windows(2).all(|w| w[0] != w[1]);
        Ok(GramBasis {
            base_tuple: base_tuple.to_vec(),
            elements: multiset_permutations(base_tuple),
            distinct,
        })
    }

    pub fn base_tuple(&self) -> &[usize] {
        &self.base_tuple
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn n(&self) -> usize {
        self.base_tuple.len()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.elements
            .binary_search_by(|e| e.as_slice().cmp(tuple))
            .ok()
    }

    /// The permutation π with `element = π(base)`, i.e. `element[a] = base[π(a)]`.
    /// Only defined for distinct base indices.
    pub fn permutation(&self, element: usize) -> Option<Permutation> {
        if !self.distinct {
            return None;
        }
        let images = self.elements[element]
            .iter()
            .map(|s| {
                self.base_tuple
                    .iter()
                    .position(|b| b == s)
                    .expect("element of basis")
            })
            .collect();
        Permutation::new(images).ok()
    }

    /// Row tuple `π(base)`.
    pub fn tuple_of(&self, perm: &Permutation) -> Result<Vec<usize>> {
        if perm.degree() != self.n() {
            return Err(Error::DegreeMismatch(perm.degree(), self.n()));
        }
        Ok(perm.act_on(&self.base_tuple))
    }
}

/// Hermitian matrix of inner products over a [`GramBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub basis: GramBasis,
    pub entries: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    /// `max |A_rc − conj(A_cr)|`.
    pub fn hermiticity_gap(&self) -> f64 {
        hermiticity_gap(&self.entries)
    }
}

pub fn hermiticity_gap(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut gap: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            gap = gap.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    gap
}

/// `p^{-n} Σ_α Π_{(a,b)∈E} w(α_a = α_b)`, memoized by inversion set.
/// Only the positions touched by `E` are enumerated; the others factor out.
#[derive(Debug, Default)]
pub struct GreenSumCache {
    memo: Mutex<HashMap<InversionSet, f64>>,
}

impl GreenSumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, spec: &DeformationSpec, inv: &InversionSet) -> f64 {
        if let Some(v) = self.memo.lock().expect("cache lock").get(inv) {
            return *v;
        }
        let v = green_sum(spec, inv);
        self.memo.lock().expect("cache lock").insert(inv.clone(), v);
        v
    }
}

fn green_sum(spec: &DeformationSpec, inv: &InversionSet) -> f64 {
    if inv.is_empty() {
        return 1.0;
    }
    let p = spec.order();
    let mut vertices: Vec<usize> = inv.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let edges: Vec<(usize, usize)> = inv
        .pairs
        .iter()
        .map(|&(a, b)| {
            (
                vertices.binary_search(&a).expect("vertex"),
                vertices.binary_search(&b).expect("vertex"),
            )
        })
        .collect();
    let same = spec.green_weight(true);
    let diff = spec.green_weight(false);
    let v = vertices.len();
    let mut alpha = vec![0usize; v];
    let mut total = 0.0;
    loop {
        let mut prod = 1.0;
        for &(a, b) in &edges {
            prod *= if alpha[a] == alpha[b] { same } else { diff };
            if prod == 0.0 {
                break;
            }
        }
        total += prod;
        // odometer
        let mut k = 0;
        loop {
            if k == v {
                return total / (p as f64).powi(v as i32);
            }
            alpha[k] += 1;
            if alpha[k] < p {
                break;
            }
            alpha[k] = 0;
            k += 1;
        }
    }
}

fn closed_form_entry(
    spec: &DeformationSpec,
    row_tuple: &[usize],
    inv: &InversionSet,
    cache: Option<&GreenSumCache>,
) -> Complex64 {
    let mut site = Complex64::new(1.0, 0.0);
    for &(a, b) in inv.pairs() {
        site *= spec.site_factor(row_tuple[a], row_tuple[b]);
    }
    let g = match cache {
        Some(c) => c.get(spec, inv),
        None => green_sum(spec, inv),
    };
    site * g
}

fn check_sites(spec: &DeformationSpec, tuple: &[usize]) -> Result<()> {
    for &s in tuple {
        if s >= spec.site_count() {
            return Err(Error::SiteOutOfRange {
                site: s,
                site_count: spec.site_count(),
            });
        }
    }
    Ok(())
}

/// Closed-form entry between the rows `π(base)` and `σ(base)`.
pub fn gram_entry(
    spec: &DeformationSpec,
    basis: &GramBasis,
    row: &Permutation,
    col: &Permutation,
) -> Result<Complex64> {
    if !basis.is_distinct() {
        return Err(Error::RepeatedIndices);
    }
    check_sites(spec, basis.base_tuple())?;
    let row_tuple = basis.tuple_of(row)?;
    basis.tuple_of(col)?;
    let inv = inversion_pairs(row, col)?;
    Ok(closed_form_entry(spec, &row_tuple, &inv, None))
}

/// Closed-form entry between two index tuples that are orderings of the same
/// set of pairwise distinct indices (0 if they are not).
pub fn distinct_tuple_entry(
    spec: &DeformationSpec,
    row: &[usize],
    col: &[usize],
    cache: Option<&GreenSumCache>,
) -> Result<Complex64> {
    if row.len() != col.len() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut pos = Vec::with_capacity(row.len());
    for s in row {
        match col.iter().position(|c| c == s) {
            Some(k) => pos.push(k),
            None => return Ok(Complex64::new(0.0, 0.0)),
        }
    }
    let tau = Permutation::new(pos).map_err(|_| Error::RepeatedIndices)?;
    let inv = InversionSet {
        pairs: tau.inversions(),
    };
    Ok(closed_form_entry(spec, row, &inv, cache))
}

/// Options for [`build_gram_with`].
#[derive(Debug, Clone, Copy)]
pub struct GramOptions {
    pub max_n: usize,
    pub oracle: OracleLimits,
}

impl Default for GramOptions {
    fn default() -> Self {
        GramOptions {
            max_n: DEFAULT_MAX_N,
            oracle: OracleLimits::default(),
        }
    }
}

pub fn build_gram(spec: &DeformationSpec, base_tuple: &[usize]) -> Result<GramMatrix> {
    build_gram_with(spec, base_tuple, GramOptions::default())
}

/// Builds `A^(n)` over all distinct orderings of `base_tuple`. The upper
/// triangle is computed (in parallel, deterministically assembled) and the
/// lower triangle filled by conjugation.
pub fn build_gram_with(
    spec: &DeformationSpec,
    base_tuple: &[usize],
    opts: GramOptions,
) -> Result<GramMatrix> {
    let n = base_tuple.len();
    if n > opts.max_n {
        return Err(Error::ResourceLimit(format!(
            "n = {n} exceeds the configured limit {}",
            opts.max_n
        )));
    }
    check_sites(spec, base_tuple)?;
    let basis = GramBasis::new(base_tuple)?;
    let dim = basis.len();
    let cache = GreenSumCache::new();
    let oracle = Oracle::with_limits(spec, opts.oracle);
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|r| {
            (r..dim)
                .map(|c| {
                    let row = &basis.elements[r];
                    let col = &basis.elements[c];
                    if basis.distinct {
                        if r == c {
                            Ok(Complex64::new(1.0, 0.0))
                        } else {
                            distinct_tuple_entry(spec, row, col, Some(&cache))
                        }
                    } else {
                        oracle.vev_a_word(&Word::gram(row, col)).map(|v| v.value)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut entries = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (r, row) in rows.into_iter().enumerate() {
        for (k, z) in row.into_iter().enumerate() {
            let c = r + k;
            if r == c {
                entries[(r, r)] = Complex64::new(z.re, 0.0);
            } else {
                entries[(r, c)] = z;
                entries[(c, r)] = z.conj();
            }
        }
    }
    Ok(GramMatrix { basis, entries })
}

/// Ways of reading the `q` product of the closed form: indexed by the row or
/// the column tuple, forward `(a,b)` or backward `(b,a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexConvention {
    RowForward,
    RowBackward,
    ColForward,
    ColBackward,
}

impl IndexConvention {
    pub const ALL: [IndexConvention; 4] = [
        IndexConvention::RowForward,
        IndexConvention::RowBackward,
        IndexConvention::ColForward,
        IndexConvention::ColBackward,
    ];
}

/// Checks every [`IndexConvention`] against the oracle for a fixed complex
/// multiparameter spec and returns those that reproduce every entry of
/// `A^(3)`. `RowForward` is the convention used by [`build_gram`].
pub fn index_convention_self_test() -> Result<Vec<IndexConvention>> {
    use crate::params::{Family, FamilyArgs, Order};
    let z = Complex64::new;
    let q = DMatrix::from_row_slice(
        3,
        3,
        &[
            z(0.3, 0.0),
            z(0.2, 0.5),
            z(-0.4, 0.1),
            z(0.2, -0.5),
            z(-0.1, 0.0),
            z(0.6, -0.3),
            z(-0.4, -0.1),
            z(0.6, 0.3),
            z(0.5, 0.0),
        ],
    );
    let spec = DeformationSpec::new(Order::Finite(2), q, Family::Multiparam, FamilyArgs::None)?;
    let basis = GramBasis::new(&[0, 1, 2])?;
    let oracle = Oracle::new(&spec);
    let cache = GreenSumCache::new();
    let mut ok = Vec::new();
    for conv in IndexConvention::ALL {
        let mut all = true;
        for r in 0..basis.len() {
            for c in 0..basis.len() {
                let row = &basis.elements()[r];
                let col = &basis.elements()[c];
                let pi = basis.permutation(r).expect("distinct");
                let sigma = basis.permutation(c).expect("distinct");
                let inv = inversion_pairs(&pi, &sigma)?;
                let mut site = Complex64::new(1.0, 0.0);
                for &(a, b) in inv.pairs() {
                    site *= match conv {
                        IndexConvention::RowForward => spec.q(row[a], row[b]),
                        IndexConvention::RowBackward => spec.q(row[b], row[a]),
                        IndexConvention::ColForward => spec.q(col[a], col[b]),
                        IndexConvention::ColBackward => spec.q(col[b], col[a]),
                    };
                }
                let candidate = site * cache.get(&spec, &inv);
                let truth = oracle.vev_a_word(&Word::gram(row, col))?.value;
                if (candidate - truth).norm() > 1e-12 {
                    all = false;
                }
            }
        }
        if all {
            ok.push(conv);
        }
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{make_preset, Family, Order, PresetArgs};
    use approx::assert_abs_diff_eq;

    fn quon(q: f64, p: usize, sites: usize) -> DeformationSpec {
        make_preset(
            Family::GreenQuon,
            &PresetArgs {
                q: Some(q),
                order: Some(Order::Finite(p)),
                sites: Some(sites),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn inversion_examples() {
        let id2 = Permutation::identity(2);
        assert!(inversion_pairs(&id2, &id2).unwrap().is_empty());
        let swap = Permutation::reversal(2);
        assert_eq!(inversion_pairs(&swap, &id2).unwrap().pairs(), &[(0, 1)]);
        let rev3 = Permutation::reversal(3);
        assert_eq!(
            inversion_pairs(&rev3, &Permutation::identity(3))
                .unwrap()
                .pairs(),
            &[(0, 1), (0, 2), (1, 2)]
        );
        assert!(matches!(
            inversion_pairs(&rev3, &id2),
            Err(Error::DegreeMismatch(..))
        ));
    }

    #[test]
    fn small_matrices() {
        let spec = quon(0.5, 1, 2);
        let g = build_gram(&spec, &[0]).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.entry(0, 0), Complex64::new(1.0, 0.0));

        let g = build_gram(&spec, &[0, 1]).unwrap();
        assert_abs_diff_eq!(g.entry(0, 1).re, 0.5, epsilon = 1e-15);

        let para = quon(1.0, 2, 2);
        let g = build_gram(&para, &[0, 1]).unwrap();
        assert_abs_diff_eq!(g.entry(0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.entry(1, 1).re, 1.0);
    }

    #[test]
    fn single_exchange_formula() {
        for p in 1..=4 {
            let spec = quon(0.7, p, 2);
            let basis = GramBasis::new(&[0, 1]).unwrap();
            let e = gram_entry(
                &spec,
                &basis,
                &Permutation::identity(2),
                &Permutation::reversal(2),
            )
            .unwrap();
            assert_abs_diff_eq!(e.re, 0.7 * (2.0 / p as f64 - 1.0), epsilon = 1e-15);
            let d = gram_entry(
                &spec,
                &basis,
                &Permutation::reversal(2),
                &Permutation::reversal(2),
            )
            .unwrap();
            assert_eq!(d, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn p1_entries_are_q_power_of_inversions() {
        let spec = quon(0.3, 1, 3);
        let g = build_gram(&spec, &[0, 1, 2]).unwrap();
        let oracle = Oracle::new(&spec);
        for r in 0..6 {
            for c in 0..6 {
                let pi = g.basis.permutation(r).unwrap();
                let sigma = g.basis.permutation(c).unwrap();
                let k = inversion_pairs(&pi, &sigma).unwrap().len();
                assert_abs_diff_eq!(g.entry(r, c).re, 0.3f64.powi(k as i32), epsilon = 1e-15);
                let w = Word::gram(&g.basis.elements()[r], &g.basis.elements()[c]);
                let v = oracle.vev_a_word(&w).unwrap().value;
                assert_abs_diff_eq!((v - g.entry(r, c)).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn repeated_indices_use_oracle() {
        let spec = quon(0.4, 2, 2);
        let basis = GramBasis::new(&[0, 0, 1]).unwrap();
        assert_eq!(basis.len(), 3);
        assert_eq!(
            gram_entry(
                &spec,
                &basis,
                &Permutation::identity(3),
                &Permutation::identity(3)
            ),
            Err(Error::RepeatedIndices)
        );
        let g = build_gram(&spec, &[0, 0, 1]).unwrap();
        assert!(g.hermiticity_gap() < HERMITIAN_TOL);
        // ⟨0|A_1 A_1 A†_1 A†_1|0⟩ = 1 + q(2/p-1)... at p=2 the cross term vanishes
        let g2 = build_gram(&spec, &[0, 0]).unwrap();
        assert_abs_diff_eq!(g2.entry(0, 0).re, 1.0, epsilon = 1e-14);
        let g3 = build_gram(&quon(0.4, 1, 1), &[0, 0]).unwrap();
        assert_abs_diff_eq!(g3.entry(0, 0).re, 1.4, epsilon = 1e-14);
    }

    #[test]
    fn resource_limit() {
        let spec = quon(0.1, 1, 8);
        let base: Vec<usize> = (0..8).collect();
        assert!(matches!(
            build_gram(&spec, &base),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn self_test_accepts_row_forward() {
        let ok = index_convention_self_test().unwrap();
        assert!(ok.contains(&IndexConvention::RowForward));
        assert!(!ok.contains(&IndexConvention::RowBackward));
        assert!(!ok.contains(&IndexConvention::ColForward));
    }

    #[test]
    fn speicher_endpoints() {
        use crate::params::Sign;
        // ε=+1, q=+1: p Bose oscillators, every entry 1.
        let bose = make_preset(
            Family::Speicher,
            &PresetArgs {
                epsilon: Some(Sign::Plus),
                q: Some(1.0),
                order: Some(Order::Finite(3)),
                sites: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        let g = build_gram(&bose, &[0, 1, 2]).unwrap();
        assert!(g
            .entries
            .iter()
            .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-14));
        // q=-1 recovers the para oscillators of the same ε.
        for eps in [Sign::Plus, Sign::Minus] {
            let sp = make_preset(
                Family::Speicher,
                &PresetArgs {
                    epsilon: Some(eps),
                    q: Some(-1.0),
                    order: Some(Order::Finite(2)),
                    sites: Some(3),
                    ..Default::default()
                },
            )
            .unwrap();
            let para = quon(eps.value(), 2, 3);
            let a = build_gram(&sp, &[0, 1, 2]).unwrap();
            let b = build_gram(&para, &[0, 1, 2]).unwrap();
            assert!((a.entries - b.entries).camax() < 1e-14);
        }
    }
}
