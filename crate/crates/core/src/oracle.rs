//! Vacuum expectation values of words in deformed Green oscillators
//! `b_i^α` and composite operators `A_i = p^{-1/2} Σ_α b_i^α`.
//!
//! Evaluation only ever uses the exchange rule
//! `b_{iα} b†_{jβ} = δ_ij δ_αβ + q_{iα,jβ} b†_{jβ} b_{iα}` together with the
//! vacuum conditions: words are applied letter by letter, right to left, to a
//! ket in the free Fock space spanned by ordered strings of creators, and an
//! annihilator is moved right through the string one creator at a time.
//! No annihilator–annihilator relation is assumed, so the singular points
//! `|q| = 1` need no special handling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DeformationSpec, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Annihilate,
    Create,
}

/// One operator letter. Sites and Green indices are 0-based here; the text
/// grammar uses 1-based labels (`i1`, `g1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    B {
        kind: OpKind,
        site: usize,
        green: usize,
    },
    A {
        kind: OpKind,
        site: usize,
    },
}

impl Letter {
    pub fn a(site: usize) -> Letter {
        Letter::A {
            kind: OpKind::Annihilate,
            site,
        }
    }

    pub fn a_dag(site: usize) -> Letter {
        Letter::A {
            kind: OpKind::Create,
            site,
        }
    }

    pub fn b(site: usize, green: usize) -> Letter {
        Letter::B {
            kind: OpKind::Annihilate,
            site,
            green,
        }
    }

    pub fn b_dag(site: usize, green: usize) -> Letter {
        Letter::B {
            kind: OpKind::Create,
            site,
            green,
        }
    }

    pub fn kind(&self) -> OpKind {
        match *self {
            Letter::A { kind, .. } | Letter::B { kind, .. } => kind,
        }
    }

    pub fn site(&self) -> usize {
        match *self {
            Letter::A { site, .. } | Letter::B { site, .. } => site,
        }
    }

    pub fn is_b(&self) -> bool {
        matches!(self, Letter::B { .. })
    }

    pub fn dagger(&self) -> Letter {
        let flip = |k| match k {
            OpKind::Annihilate => OpKind::Create,
            OpKind::Create => OpKind::Annihilate,
        };
        match *self {
            Letter::A { kind, site } => Letter::A {
                kind: flip(kind),
                site,
            },
            Letter::B { kind, site, green } => Letter::B {
                kind: flip(kind),
                site,
                green,
            },
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let plus = |k: OpKind| if k == OpKind::Create { "+" } else { "" };
        match *self {
            Letter::A { kind, site } => write!(f, "a{}(i{})", plus(kind), site + 1),
            Letter::B { kind, site, green } => {
                write!(f, "b{}(i{},g{})", plus(kind), site + 1, green + 1)
            }
        }
    }
}

/// An operator string with a scalar prefactor. The leftmost letter acts last
/// on the ket.
#[derive(Debug, Clone, PartialEq)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub coefficient: Complex64,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word {
            letters,
            coefficient: Complex64::new(1.0, 0.0),
        }
    }

    pub fn scaled(mut self, c: Complex64) -> Self {
        self.coefficient *= c;
        self
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `⟨0| A_{r_n} … A_{r_1} A†_{c_1} … A†_{c_n} |0⟩`, the Gram entry between
    /// the states `A†_{r_1}…A†_{r_n}|0⟩` and `A†_{c_1}…A†_{c_n}|0⟩`.
    pub fn gram(row: &[usize], col: &[usize]) -> Word {
        let mut letters: Vec<Letter> = row.iter().rev().map(|&s| Letter::a(s)).collect();
        letters.extend(col.iter().map(|&s| Letter::a_dag(s)));
        Word::new(letters)
    }

    /// Creators `A†_{t_1} … A†_{t_n}` (a ket word).
    pub fn a_ket(tuple: &[usize]) -> Word {
        Word::new(tuple.iter().map(|&s| Letter::a_dag(s)).collect())
    }

    /// Annihilators `A_{t_n} … A_{t_1}` (the bra of [`Word::a_ket`]).
    pub fn a_bra(tuple: &[usize]) -> Word {
        Word::new(tuple.iter().rev().map(|&s| Letter::a(s)).collect())
    }

    /// Product `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word {
            letters,
            coefficient: self.coefficient * other.coefficient,
        }
    }

    /// Hermitian adjoint: reversed, every letter daggered, coefficient conjugated.
    pub fn dagger(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(Letter::dagger).collect(),
            coefficient: self.coefficient.conj(),
        }
    }

    fn kind_counts(&self) -> (usize, usize) {
        let creators = self
            .letters
            .iter()
            .filter(|l| l.kind() == OpKind::Create)
            .count();
        (creators, self.letters.len() - creators)
    }

    /// Rewrites every `A` letter as `p^{-1/2} Σ_α b^α`.
    pub fn expand_a(&self, order: usize) -> Vec<Word> {
        let mut out = vec![Word {
            letters: Vec::with_capacity(self.letters.len()),
            coefficient: self.coefficient,
        }];
        let norm = Complex64::new(1.0 / (order as f64).sqrt(), 0.0);
        for letter in &self.letters {
            match *letter {
                Letter::B { .. } => out.iter_mut().for_each(|w| w.letters.push(*letter)),
                Letter::A { kind, site } => {
                    out = out
                        .into_iter()
                        .flat_map(|w| {
                            (0..order).map(move |green| {
                                let mut w = w.clone();
                                w.letters.push(Letter::B { kind, site, green });
                                w.coefficient *= norm;
                                w
                            })
                        })
                        .collect();
                }
            }
        }
        out
    }

    /// Parses the whitespace-separated letter grammar:
    /// `a(iK)`, `a+(iK)`, `b(iK,gM)`, `b+(iK,gM)` with 1-based `K`, `M`.
    pub fn parse(text: &str) -> Result<Word> {
        let letters = text
            .split_whitespace()
            .map(parse_letter)
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::new(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

fn parse_letter(tok: &str) -> Result<Letter> {
    let err = || Error::Parse(format!("bad letter `{tok}`"));
    let open = tok.find('(').ok_or_else(err)?;
    if !tok.ends_with(')') {
        return Err(err());
    }
    let head = &tok[..open];
    let inner = &tok[open + 1..tok.len() - 1];
    let (op, kind) = match head {
        "a" => ('a', OpKind::Annihilate),
        "a+" => ('a', OpKind::Create),
        "b" => ('b', OpKind::Annihilate),
        "b+" => ('b', OpKind::Create),
        _ => return Err(err()),
    };
    let label = |s: &str, prefix: char| -> Result<usize> {
        let rest = s.trim().strip_prefix(prefix).ok_or_else(err)?;
        let v: usize = rest.parse().map_err(|_| err())?;
        if v == 0 {
            return Err(Error::Parse(format!("labels are 1-based in `{tok}`")));
        }
        Ok(v - 1)
    };
    let parts: Vec<&str> = inner.split(',').collect();
    match (op, parts.as_slice()) {
        ('a', [s]) => Ok(Letter::A {
            kind,
            site: label(s, 'i')?,
        }),
        ('b', [s, g]) => Ok(Letter::B {
            kind,
            site: label(s, 'i')?,
            green: label(g, 'g')?,
        }),
        _ => Err(err()),
    }
}

/// Evaluation budgets.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_word_len: usize,
    /// Bound on generated terms (ket terms or expanded b-words) per vev.
    pub max_terms: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_word_len: 12,
            max_terms: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VevResult {
    pub value: Complex64,
    /// Number of contraction / exchange terms generated.
    pub rewrite_count: u64,
}

/// Creator strings `b†_{y_1} … b†_{y_m}|0⟩`, keyed by packed (site, green).
type Ket = BTreeMap<Vec<u32>, Complex64>;

fn pack(site: usize, green: usize) -> u32 {
    ((site as u32) << 8) | green as u32
}

fn unpack(x: u32) -> (usize, usize) {
    ((x >> 8) as usize, (x & 0xff) as usize)
}

/// Evaluator bound to one spec and budget.
#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    spec: &'a DeformationSpec,
    limits: OracleLimits,
}

impl<'a> Oracle<'a> {
    pub fn new(spec: &'a DeformationSpec) -> Self {
        Oracle {
            spec,
            limits: OracleLimits::default(),
        }
    }

    pub fn with_limits(spec: &'a DeformationSpec, limits: OracleLimits) -> Self {
        Oracle { spec, limits }
    }

    pub fn spec(&self) -> &DeformationSpec {
        self.spec
    }

    fn check_word(&self, word: &Word) -> Result<()> {
        if word.len() > self.limits.max_word_len {
            return Err(Error::ResourceLimit(format!(
                "word length {} exceeds limit {}",
                word.len(),
                self.limits.max_word_len
            )));
        }
        // ket keys pack (site, green) into 24 + 8 bits
        if self.spec.order() > 256 || self.spec.site_count() > 1 << 24 {
            return Err(Error::ResourceLimit(
                "order above 256 or too many sites for the oracle".into(),
            ));
        }
        for l in &word.letters {
            if l.site() >= self.spec.site_count() {
                return Err(Error::SiteOutOfRange {
                    site: l.site(),
                    site_count: self.spec.site_count(),
                });
            }
            if let Letter::B { green, .. } = *l {
                if green >= self.spec.order() {
                    return Err(Error::GreenOutOfRange {
                        green: green + 1,
                        order: self.spec.order(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `⟨0| word |0⟩` for a word of `b` letters only.
    pub fn vev_b_word(&self, word: &Word) -> Result<VevResult> {
        if word.letters.iter().any(|l| !l.is_b()) {
            return Err(Error::MixedWord);
        }
        self.check_word(word)?;
        self.propagate(word)
    }

    /// `⟨0| word |0⟩` for a word of `A` letters only. The sum over Green
    /// assignments is carried by linearity through the propagated ket.
    pub fn vev_a_word(&self, word: &Word) -> Result<VevResult> {
        if word.letters.iter().any(|l| l.is_b()) {
            return Err(Error::MixedWord);
        }
        self.check_word(word)?;
        self.propagate(word)
    }

    /// `⟨0| word |0⟩` for an `A` word by explicit enumeration of all
    /// `p^len` Green assignments, each evaluated with [`Oracle::vev_b_word`].
    /// With `memo`, b-word values are cached under Green-index renaming
    /// (Green factors depend only on index coincidences).
    pub fn vev_a_word_expanded(&self, word: &Word, memo: bool) -> Result<VevResult> {
        if word.letters.iter().any(|l| l.is_b()) {
            return Err(Error::MixedWord);
        }
        self.check_word(word)?;
        let p = self.spec.order();
        let expansions = (p as f64).powi(word.len() as i32);
        if expansions > self.limits.max_terms as f64 {
            return Err(Error::ResourceLimit(format!(
                "{expansions} expanded b-words exceed budget"
            )));
        }
        let mut cache: HashMap<Vec<Letter>, VevResult> = HashMap::new();
        let mut total = Complex64::new(0.0, 0.0);
        let mut count = 0u64;
        for b_word in word.expand_a(p) {
            let value = if memo {
                let key = canonical_greens(&b_word.letters);
                match cache.get(&key) {
                    Some(v) => *v,
                    None => {
                        let v = self.propagate(&Word::new(b_word.letters.clone()))?;
                        cache.insert(key, v);
                        v
                    }
                }
            } else {
                self.propagate(&Word::new(b_word.letters.clone()))?
            };
            count += value.rewrite_count;
            total += b_word.coefficient * value.value;
        }
        Ok(VevResult {
            value: total,
            rewrite_count: count,
        })
    }

    /// `⟨0| w |0⟩` for any linear combination of words (letters may mix
    /// within the sum but not within one word).
    pub fn vev_sum(&self, words: &[Word]) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        for w in words {
            let r = if w.letters.iter().all(Letter::is_b) {
                self.vev_b_word(w)?
            } else {
                self.vev_a_word(w)?
            };
            total += r.value;
        }
        Ok(total)
    }

    fn propagate(&self, word: &Word) -> Result<VevResult> {
        let (creators, annihilators) = word.kind_counts();
        if creators != annihilators {
            return Ok(VevResult {
                value: Complex64::new(0.0, 0.0),
                rewrite_count: 0,
            });
        }
        let p = self.spec.order();
        let norm = 1.0 / (p as f64).sqrt();
        let mut ket: Ket = BTreeMap::new();
        ket.insert(Vec::new(), word.coefficient);
        let mut count: u64 = 0;
        for letter in word.letters.iter().rev() {
            let greens: Vec<(usize, f64)> = match *letter {
                Letter::B { green, .. } => vec![(green, 1.0)],
                Letter::A { .. } => (0..p).map(|g| (g, norm)).collect(),
            };
            let site = letter.site();
            let mut next: Ket = BTreeMap::new();
            match letter.kind() {
                OpKind::Create => {
                    for (key, &c) in &ket {
                        for &(green, w) in &greens {
                            let mut k = Vec::with_capacity(key.len() + 1);
                            k.push(pack(site, green));
                            k.extend_from_slice(key);
                            *next.entry(k).or_default() += c * w;
                            count += 1;
                        }
                    }
                }
                OpKind::Annihilate => {
                    for (key, &c) in &ket {
                        for &(green, w) in &greens {
                            let mut prefactor = Complex64::new(w, 0.0) * c;
                            for (pos, &y) in key.iter().enumerate() {
                                let (ys, yg) = unpack(y);
                                if ys == site && yg == green {
                                    let mut k = Vec::with_capacity(key.len() - 1);
                                    k.extend_from_slice(&key[..pos]);
                                    k.extend_from_slice(&key[pos + 1..]);
                                    *next.entry(k).or_default() += prefactor;
                                    count += 1;
                                }
                                prefactor *= self.spec.green_q_raw(site, green, ys, yg);
                                if prefactor == Complex64::new(0.0, 0.0) {
                                    break;
                                }
                            }
                        }
                    }
                }
            }
            next.retain(|_, c| *c != Complex64::new(0.0, 0.0));
            if count > self.limits.max_terms as u64 {
                return Err(Error::ResourceLimit(format!(
                    "more than {} terms generated",
                    self.limits.max_terms
                )));
            }
            ket = next;
            if ket.is_empty() {
                break;
            }
        }
        Ok(VevResult {
            value: ket.get(&Vec::new()).copied().unwrap_or_default(),
            rewrite_count: count,
        })
    }

    /// `⟨bra| ( [A_k, [A†_l, A_m]_± ] − (2/p) δ_kl A_m ) |ket⟩` with
    /// `[x, y]_± = xy ± yx`. `bra` and `ket` are A-words of at most 3 letters;
    /// `bra` is written as the operator string to the left (e.g. `A_{t_n}…A_{t_1}`).
    pub fn trilinear_defect(
        &self,
        sign: Sign,
        k: usize,
        l: usize,
        m: usize,
        bra: &Word,
        ket: &Word,
    ) -> Result<Complex64> {
        if self.spec.uniform_real_q().is_none() {
            return Err(Error::Precondition(
                "trilinear relations need a uniform real q (ordinary Green ansatz)".into(),
            ));
        }
        if bra.len() > 3 || ket.len() > 3 {
            return Err(Error::Precondition(
                "bra/ket words are limited to 3 letters".into(),
            ));
        }
        let s = Complex64::new(sign.value(), 0.0);
        let one = Complex64::new(1.0, 0.0);
        let a = Letter::a;
        let ad = Letter::a_dag;
        // A_k A†_l A_m ± A_k A_m A†_l − A†_l A_m A_k ∓ A_m A†_l A_k
        let mut terms = vec![
            Word::new(vec![a(k), ad(l), a(m)]).scaled(one),
            Word::new(vec![a(k), a(m), ad(l)]).scaled(s),
            Word::new(vec![ad(l), a(m), a(k)]).scaled(-one),
            Word::new(vec![a(m), ad(l), a(k)]).scaled(-s),
        ];
        if k == l {
            let p = self.spec.order() as f64;
            terms.push(Word::new(vec![a(m)]).scaled(Complex64::new(-2.0 / p, 0.0)));
        }
        let words: Vec<Word> = terms.iter().map(|t| bra.concat(t).concat(ket)).collect();
        self.vev_sum(&words)
    }

    /// `⟨bra| (A_i A†_j + q A†_j A_i − δ_ij − q K_ij) |ket⟩` with
    /// `K_ij = (2/p) Σ_α b†_{jα} b_{iα}`; bra and ket are b-words.
    pub fn nonclosure_defect(
        &self,
        i: usize,
        j: usize,
        bra: &Word,
        ket: &Word,
    ) -> Result<Complex64> {
        let q = self.spec.uniform_real_q().ok_or_else(|| {
            Error::Precondition("non-closure identity is stated for a uniform scalar q".into())
        })?;
        if !bra.letters.iter().chain(&ket.letters).all(Letter::is_b) {
            return Err(Error::MixedWord);
        }
        let p = self.spec.order();
        let qc = Complex64::new(q, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let mut ops = Vec::new();
        ops.extend(Word::new(vec![Letter::a(i), Letter::a_dag(j)]).expand_a(p));
        ops.extend(
            Word::new(vec![Letter::a_dag(j), Letter::a(i)])
                .scaled(qc)
                .expand_a(p),
        );
        if i == j {
            ops.push(Word::new(Vec::new()).scaled(-one));
        }
        for alpha in 0..p {
            ops.push(
                Word::new(vec![Letter::b_dag(j, alpha), Letter::b(i, alpha)])
                    .scaled(Complex64::new(-2.0 * q / p as f64, 0.0)),
            );
        }
        let words: Vec<Word> = ops.iter().map(|t| bra.concat(t).concat(ket)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for w in &words {
            total += self.vev_b_word(w)?.value;
        }
        Ok(total)
    }
}

/// Renames Green indices to first-occurrence order.
fn canonical_greens(letters: &[Letter]) -> Vec<Letter> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    letters
        .iter()
        .map(|l| match *l {
            Letter::B { kind, site, green } => {
                let g = match map.iter().find(|(from, _)| *from == green) {
                    Some(&(_, to)) => to,
                    None => {
                        let to = map.len();
                        map.push((green, to));
                        to
                    }
                };
                Letter::B {
                    kind,
                    site,
                    green: g,
                }
            }
            other => other,
        })
        .collect()
}

/// The bracket sign of the ordinary Green ansatz at q = ±1.
pub fn para_sign(q: f64) -> Sign {
    if q >= 0.0 {
        Sign::Plus
    } else {
        Sign::Minus
    }
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
    fn parse_and_display() {
        let w = Word::parse("a(i2) a(i1) a+(i1) a+(i2)").unwrap();
        assert_eq!(
            w.letters,
            vec![
                Letter::a(1),
                Letter::a(0),
                Letter::a_dag(0),
                Letter::a_dag(1)
            ]
        );
        assert_eq!(w.to_string(), "a(i2) a(i1) a+(i1) a+(i2)");
        let b = Word::parse("b(i1,g2) b+(i1,g2)").unwrap();
        assert_eq!(b.letters, vec![Letter::b(0, 1), Letter::b_dag(0, 1)]);
        for bad in [
            "a(i0)",
            "c(i1)",
            "a(1)",
            "b(i1)",
            "a(i1,g1)",
            "a+i1",
            "b+(i1,gx)",
        ] {
            assert!(matches!(Word::parse(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn b_word_examples() {
        let spec = quon(0.37, 2, 2);
        let o = Oracle::new(&spec);
        let v = |s: &str| o.vev_b_word(&Word::parse(s).unwrap()).unwrap().value;
        assert_abs_diff_eq!(v("b(i1,g1) b+(i1,g1)").re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v("b(i1,g1) b+(i1,g2)").norm(), 0.0);
        // (i,α) ≠ (j,β): nested order contracts directly.
        assert_abs_diff_eq!(
            (v("b(i1,g1) b(i2,g2) b+(i2,g2) b+(i1,g1)") - 1.0).norm(),
            0.0,
            epsilon = 1e-15
        );
        // one exchange, then two contractions: q_ij Δ_αβ.
        assert_abs_diff_eq!(
            (v("b(i2,g2) b(i1,g1) b+(i2,g2) b+(i1,g1)") + 0.37).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (v("b(i2,g1) b(i1,g1) b+(i2,g1) b+(i1,g1)") - 0.37).norm(),
            0.0,
            epsilon = 1e-15
        );
        // unbalanced
        assert_eq!(v("b(i1,g1) b+(i1,g1) b+(i1,g1)").norm(), 0.0);
    }

    #[test]
    fn a_word_examples() {
        for p in 1..=3 {
            let spec = quon(-0.6, p, 2);
            let o = Oracle::new(&spec);
            let v = |s: &str| o.vev_a_word(&Word::parse(s).unwrap()).unwrap().value;
            assert_abs_diff_eq!((v("a(i1) a+(i1)") - 1.0).norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v("a(i1) a+(i2)").norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(
                (v("a(i2) a(i1) a+(i1) a+(i2)") - 1.0).norm(),
                0.0,
                epsilon = 1e-14
            );
            let expected = -0.6 * (2.0 / p as f64 - 1.0);
            assert_abs_diff_eq!(
                (v("a(i2) a(i1) a+(i2) a+(i1)") - expected).norm(),
                0.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn mixed_and_limits() {
        let spec = quon(0.1, 2, 2);
        let o = Oracle::new(&spec);
        let mixed = Word::parse("a(i1) b+(i1,g1)").unwrap();
        assert_eq!(o.vev_a_word(&mixed), Err(Error::MixedWord));
        assert_eq!(o.vev_b_word(&mixed), Err(Error::MixedWord));
        let long = Word::new(vec![Letter::a(0); 14]);
        assert!(matches!(o.vev_a_word(&long), Err(Error::ResourceLimit(_))));
        let tight = Oracle::with_limits(
            &spec,
            OracleLimits {
                max_word_len: 12,
                max_terms: 10,
            },
        );
        let w = Word::gram(&[0, 1, 0], &[1, 0, 0]);
        assert!(matches!(tight.vev_a_word(&w), Err(Error::ResourceLimit(_))));
        assert!(matches!(
            o.vev_b_word(&Word::parse("b(i1,g3) b+(i1,g3)").unwrap()),
            Err(Error::GreenOutOfRange { .. })
        ));
        assert!(matches!(
            o.vev_a_word(&Word::parse("a(i3) a+(i3)").unwrap()),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn expanded_matches_propagated_and_memo_is_transparent() {
        let spec = quon(0.45, 3, 3);
        let o = Oracle::new(&spec);
        for (row, col) in [
            (vec![0, 1, 2], vec![2, 0, 1]),
            (vec![0, 0, 1], vec![0, 1, 0]),
            (vec![2, 1, 1], vec![1, 2, 1]),
        ] {
            let w = Word::gram(&row, &col);
            let a = o.vev_a_word(&w).unwrap().value;
            let b = o.vev_a_word_expanded(&w, false).unwrap().value;
            let c = o.vev_a_word_expanded(&w, true).unwrap().value;
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!((b - c).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn trilinear_para_points_vanish() {
        for (q, p) in [(1.0, 2), (-1.0, 2), (-1.0, 1)] {
            let spec = quon(q, p, 2);
            let o = Oracle::new(&spec);
            let sign = para_sign(q);
            let bra = Word::a_bra(&[1]);
            let ket = Word::a_ket(&[0, 1]);
            for (k, l, m) in [(0, 0, 0), (0, 1, 1), (1, 0, 0), (1, 1, 0)] {
                let d = o.trilinear_defect(sign, k, l, m, &bra, &ket).unwrap();
                assert!(d.norm() < 1e-12, "q={q} p={p} ({k},{l},{m}) {d}");
            }
        }
    }

    #[test]
    fn trilinear_rejects_nonuniform() {
        let mut q = nalgebra::DMatrix::from_element(2, 2, Complex64::new(0.5, 0.0));
        q[(0, 1)] = Complex64::new(0.2, 0.0);
        q[(1, 0)] = Complex64::new(0.2, 0.0);
        let spec = DeformationSpec::new(
            Order::Finite(2),
            q,
            Family::Multiparam,
            crate::params::FamilyArgs::None,
        )
        .unwrap();
        let o = Oracle::new(&spec);
        assert!(o
            .trilinear_defect(Sign::Plus, 0, 0, 0, &Word::new(vec![]), &Word::a_ket(&[0]))
            .is_err());
    }

    #[test]
    fn nonclosure_free_case() {
        let spec = quon(0.0, 1, 2);
        let o = Oracle::new(&spec);
        let d = o
            .nonclosure_defect(0, 0, &Word::new(vec![]), &Word::new(vec![]))
            .unwrap();
        assert_abs_diff_eq!(d.norm(), 0.0);
    }

    #[test]
    fn dagger_conjugates_vev() {
        let mut q = nalgebra::DMatrix::from_element(3, 3, Complex64::new(0.2, 0.0));
        q[(0, 1)] = Complex64::new(0.3, 0.4);
        q[(1, 0)] = Complex64::new(0.3, -0.4);
        q[(1, 2)] = Complex64::new(-0.1, 0.7);
        q[(2, 1)] = Complex64::new(-0.1, -0.7);
        let spec = DeformationSpec::new(
            Order::Finite(2),
            q,
            Family::Multiparam,
            crate::params::FamilyArgs::None,
        )
        .unwrap();
        let o = Oracle::new(&spec);
        let w = Word::parse("a(i2) a(i1) a+(i1) a(i3) a+(i3) a+(i2)").unwrap();
        let v = o.vev_a_word(&w).unwrap().value;
        let vd = o.vev_a_word(&w.dagger()).unwrap().value;
        assert_abs_diff_eq!((v.conj() - vd).norm(), 0.0, epsilon = 1e-14);
        assert!(v.norm() > 1e-3);
    }
}
