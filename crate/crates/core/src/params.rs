//! Deformation parameters for the Green-ansatz algebra families and the
//! pairwise q-factors `q_{iα,jβ}` derived from them.
//!
//! Every family is produced by a [`Preset`] registered by name in a
//! [`PresetRegistry`]; the command-line front end selects one at runtime.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Absolute tolerance for Hermiticity and |q| ≤ 1 validation.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Order of parastatistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(usize),
    Infinite,
}

impl Order {
    pub fn parse(text: &str) -> Result<Order> {
        let t = text.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinite" | "infinity" | "∞" => Ok(Order::Infinite),
            _ => {
                let p: usize = t.parse().map_err(|_| {
                    Error::InvalidOrder(format!("`{t}` is not a positive integer or `inf`"))
                })?;
                if p == 0 {
                    return Err(Error::InvalidOrder("order must be >= 1".into()));
                }
                Ok(Order::Finite(p))
            }
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(p) => write!(f, "{p}"),
            Order::Infinite => f.write_str("infinite"),
        }
    }
}

/// ±1, used for ε (para-Bose / para-Fermi) and bracket signs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_int(v: i64) -> Result<Sign> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidArgs(format!(
                "sign must be +1 or -1, got {v}"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    GreenQuon,
    Multiparam,
    Anyon,
    Speicher,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::GreenQuon => "green_quon",
            Family::Multiparam => "multiparam",
            Family::Anyon => "anyon",
            Family::Speicher => "speicher",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Family> {
        match tag {
            "green_quon" => Ok(Family::GreenQuon),
            "multiparam" => Ok(Family::Multiparam),
            "anyon" => Ok(Family::Anyon),
            "speicher" => Ok(Family::Speicher),
            other => Err(Error::Unknown {
                kind: "family",
                name: other.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyArgs {
    None,
    Speicher {
        epsilon: Sign,
        q: f64,
    },
    /// `phi` is a real antisymmetric `site_count × site_count` matrix.
    Anyon {
        lambda: f64,
        phi: DMatrix<f64>,
    },
}

/// Pairwise deformation factor between two oscillator letters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenFactor(pub Complex64);

impl GreenFactor {
    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// Immutable deformation parameters.
///
/// An infinite order is stored as declared but evaluated as order 1 with
/// `q ↦ -q`: with infinitely many Green indices every pair of particles
/// carries distinct indices, so every Δ factor is -1.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSpec {
    declared_order: Order,
    order: usize,
    site_count: usize,
    /// q as declared (serialized form).
    declared_q: DMatrix<Complex64>,
    /// q after infinite-order normalization.
    q: DMatrix<Complex64>,
    family: Family,
    args: FamilyArgs,
}

impl DeformationSpec {
    /// Validates and builds a spec. `q` must be square, Hermitian and bounded
    /// by 1 in modulus (absolute tolerance [`VALIDATION_TOL`]).
    pub fn new(
        order: Order,
        q: DMatrix<Complex64>,
        family: Family,
        args: FamilyArgs,
    ) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(Error::InvalidArgs(format!(
                "q must be a non-empty square matrix, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        let n = q.nrows();
        for i in 0..n {
            for j in 0..n {
                let gap = (q[(i, j)] - q[(j, i)].conj()).norm();
                if gap > VALIDATION_TOL {
                    return Err(Error::NonHermitian { i, j, gap });
                }
                let modulus = q[(i, j)].norm();
                if modulus > 1.0 + VALIDATION_TOL {
                    return Err(Error::QOutOfBounds { i, j, modulus });
                }
            }
        }
        match (&args, family) {
            (FamilyArgs::Speicher { q, .. }, Family::Speicher) => {
                if q.abs() > 1.0 + VALIDATION_TOL {
                    return Err(Error::QOutOfBounds {
                        i: 0,
                        j: 0,
                        modulus: q.abs(),
                    });
                }
            }
            (FamilyArgs::Anyon { lambda, phi }, Family::Anyon) => {
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::InvalidArgs(format!(
                        "lambda must lie in [0,1], got {lambda}"
                    )));
                }
                if phi.nrows() != n || phi.ncols() != n {
                    return Err(Error::InvalidArgs(
                        "phi must be site_count x site_count".into(),
                    ));
                }
                for i in 0..n {
                    let diag = q[(i, i)] - Complex64::new((lambda * PI).cos(), 0.0);
                    if diag.norm() > VALIDATION_TOL {
                        return Err(Error::InvalidArgs(format!(
                            "anyon q[{i}][{i}] must equal cos(lambda*pi)"
                        )));
                    }
                    for j in 0..n {
                        if i != j && (q[(i, j)].norm() - 1.0).abs() > VALIDATION_TOL {
                            return Err(Error::InvalidArgs(format!(
                                "anyon |q[{i}][{j}]| must equal 1"
                            )));
                        }
                    }
                }
            }
            (FamilyArgs::None, Family::GreenQuon | Family::Multiparam) => {}
            _ => {
                return Err(Error::InvalidArgs(format!(
                    "family arguments do not match family `{}`",
                    family.tag()
                )))
            }
        }
        let (effective_order, effective_q) = match order {
            Order::Finite(0) => return Err(Error::InvalidOrder("order must be >= 1".into())),
            Order::Finite(p) => (p, q.clone()),
            Order::Infinite => {
                if family == Family::Speicher {
                    return Err(Error::InvalidOrder(
                        "the speicher preset needs a finite order".into(),
                    ));
                }
                (1, q.map(|z| -z))
            }
        };
        Ok(DeformationSpec {
            declared_order: order,
            order: effective_order,
            site_count: n,
            declared_q: q,
            q: effective_q,
            family,
            args,
        })
    }

    /// Effective (finite) order used in every computation.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn declared_order(&self) -> Order {
        self.declared_order
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn args(&self) -> &FamilyArgs {
        &self.args
    }

    /// Effective q_ij (after infinite-order normalization).
    pub fn q(&self, i: usize, j: usize) -> Complex64 {
        self.q[(i, j)]
    }

    pub fn q_matrix(&self) -> &DMatrix<Complex64> {
        &self.q
    }

    pub fn declared_q_matrix(&self) -> &DMatrix<Complex64> {
        &self.declared_q
    }

    /// Site part of the Green factor.
    pub fn site_factor(&self, i: usize, j: usize) -> Complex64 {
        match self.family {
            Family::Speicher => Complex64::new(1.0, 0.0),
            _ => self.q[(i, j)],
        }
    }

    /// Green-index part of the factor: Δ_αβ = 2δ_αβ - 1 for the q_ij Δ_αβ
    /// families, ε[(1-q)δ_αβ + q] for the Speicher preset.
    pub fn green_weight(&self, same_green: bool) -> f64 {
        match &self.args {
            FamilyArgs::Speicher { epsilon, q } => {
                let eps = epsilon.value();
                if same_green {
                    eps
                } else {
                    eps * q
                }
            }
            _ => {
                if same_green {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// `q_{iα,jβ}` with 0-based sites and greens; no range checks.
    pub(crate) fn green_q_raw(&self, i: usize, alpha: usize, j: usize, beta: usize) -> Complex64 {
        self.site_factor(i, j) * self.green_weight(alpha == beta)
    }

    /// `q_{iα,jβ}` with 0-based sites and 1-based Green indices.
    pub fn green_q(&self, i: usize, alpha: usize, j: usize, beta: usize) -> Result<GreenFactor> {
        for site in [i, j] {
            if site >= self.site_count {
                return Err(Error::SiteOutOfRange {
                    site,
                    site_count: self.site_count,
                });
            }
        }
        for green in [alpha, beta] {
            if green == 0 || green > self.order {
                return Err(Error::GreenOutOfRange {
                    green,
                    order: self.order,
                });
            }
        }
        Ok(GreenFactor(self.green_q_raw(i, alpha - 1, j, beta - 1)))
    }

    /// The common value if every effective q_ij is the same real number.
    pub fn uniform_real_q(&self) -> Option<f64> {
        if self.family == Family::Speicher {
            return None;
        }
        let first = self.q[(0, 0)];
        if first.im.abs() > VALIDATION_TOL {
            return None;
        }
        self.q
            .iter()
            .all(|z| (z - first).norm() <= VALIDATION_TOL)
            .then_some(first.re)
    }

    /// Same spec with a different order (q and family kept).
    pub fn with_order(&self, order: Order) -> Result<Self> {
        DeformationSpec::new(
            order,
            self.declared_q.clone(),
            self.family,
            self.args.clone(),
        )
    }

    pub fn to_config(&self) -> SpecConfig {
        let n = self.site_count;
        let mut q = Vec::new();
        for i in 0..n {
            for j in i..n {
                let z = self.declared_q[(i, j)];
                q.push([(i + 1) as f64, (j + 1) as f64, z.re, z.im]);
            }
        }
        let args = match &self.args {
            FamilyArgs::None => None,
            FamilyArgs::Speicher { epsilon, q } => Some(ArgsConfig {
                epsilon: Some(epsilon.value() as i64),
                q: Some(*q),
                ..Default::default()
            }),
            FamilyArgs::Anyon { lambda, phi } => {
                let mut entries = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        entries.push([(i + 1) as f64, (j + 1) as f64, phi[(i, j)]]);
                    }
                }
                Some(ArgsConfig {
                    lambda: Some(*lambda),
                    phi: Some(entries),
                    ..Default::default()
                })
            }
        };
        SpecConfig {
            family: self.family.tag().to_string(),
            order: match self.declared_order {
                Order::Finite(p) => OrderRepr::Int(p as i64),
                Order::Infinite => OrderRepr::Text("infinite".into()),
            },
            sites: n,
            q,
            args,
        }
    }

    pub fn from_config(cfg: &SpecConfig) -> Result<Self> {
        let family = Family::from_tag(&cfg.family)?;
        let order = match &cfg.order {
            OrderRepr::Int(p) if *p >= 1 => Order::Finite(*p as usize),
            OrderRepr::Int(p) => return Err(Error::InvalidOrder(format!("{p}"))),
            OrderRepr::Text(t) => Order::parse(t)?,
        };
        let n = cfg.sites;
        let q = q_matrix_from_entries(n, &cfg.q)?;
        let args = match family {
            Family::GreenQuon | Family::Multiparam => FamilyArgs::None,
            Family::Speicher => {
                let a = cfg.args.clone().unwrap_or_default();
                FamilyArgs::Speicher {
                    epsilon: Sign::from_int(a.epsilon.ok_or_else(|| missing("epsilon"))?)?,
                    q: a.q.ok_or_else(|| missing("q"))?,
                }
            }
            Family::Anyon => {
                let a = cfg.args.clone().unwrap_or_default();
                let lambda = a.lambda.ok_or_else(|| missing("lambda"))?;
                let phi = phi_from_entries(n, a.phi.as_deref().unwrap_or(&[]))?;
                FamilyArgs::Anyon { lambda, phi }
            }
        };
        DeformationSpec::new(order, q, family, args)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_config()).expect("spec config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SpecConfig = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_config(&cfg)
    }

    /// Short content hash of the serialized spec.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&hash[..8])
    }
}

fn missing(name: &str) -> Error {
    Error::InvalidArgs(format!("missing argument `{name}`"))
}

/// Builds a Hermitian q matrix from `[i, j, re, im]` entries (1-based sites).
/// Entries not given default to 0; a given `(i, j)` also fills `(j, i)` with
/// the conjugate unless `(j, i)` is given explicitly.
pub fn q_matrix_from_entries(sites: usize, entries: &[[f64; 4]]) -> Result<DMatrix<Complex64>> {
    if sites == 0 {
        return Err(Error::InvalidArgs("sites must be >= 1".into()));
    }
    let mut explicit: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    for e in entries {
        let i = site_label(e[0], sites)?;
        let j = site_label(e[1], sites)?;
        explicit.insert((i, j), Complex64::new(e[2], e[3]));
    }
    let mut q = DMatrix::from_element(sites, sites, Complex64::new(0.0, 0.0));
    for (&(i, j), &z) in &explicit {
        q[(i, j)] = z;
        if !explicit.contains_key(&(j, i)) {
            q[(j, i)] = z.conj();
        }
    }
    Ok(q)
}

fn phi_from_entries(sites: usize, entries: &[[f64; 3]]) -> Result<DMatrix<f64>> {
    let mut phi = DMatrix::zeros(sites, sites);
    for e in entries {
        let i = site_label(e[0], sites)?;
        let j = site_label(e[1], sites)?;
        if i == j {
            return Err(Error::InvalidArgs("phi has no diagonal entries".into()));
        }
        phi[(i, j)] = e[2];
        phi[(j, i)] = -e[2];
    }
    Ok(phi)
}

fn site_label(v: f64, sites: usize) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 || v as usize > sites {
        return Err(Error::InvalidArgs(format!(
            "site label {v} not in 1..={sites}"
        )));
    }
    Ok(v as usize - 1)
}

/// Serialized form of a [`DeformationSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecConfig {
    pub family: String,
    pub order: OrderRepr,
    pub sites: usize,
    /// `[i, j, re, im]`, 1-based sites, upper triangle.
    #[serde(default)]
    pub q: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub args: Option<ArgsConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderRepr {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ArgsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// `[i, j, phi_ij]` for i < j, 1-based sites.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<[f64; 3]>>,
}

/// Loose argument bag handed to a [`Preset`].
#[derive(Debug, Clone, Default)]
pub struct PresetArgs {
    pub sites: Option<usize>,
    pub order: Option<Order>,
    pub q: Option<f64>,
    pub epsilon: Option<Sign>,
    pub lambda: Option<f64>,
    /// Real antisymmetric phase matrix for the anyon preset.
    pub phi: Option<DMatrix<f64>>,
    pub q_matrix: Option<DMatrix<Complex64>>,
}

impl PresetArgs {
    fn sites_or(&self, default: usize) -> usize {
        self.sites
            .or_else(|| self.q_matrix.as_ref().map(|m| m.nrows()))
            .or_else(|| self.phi.as_ref().map(|m| m.nrows()))
            .unwrap_or(default)
    }

    fn require_q(&self) -> Result<f64> {
        self.q.ok_or_else(|| missing("q"))
    }
}

/// A named way of producing a [`DeformationSpec`].
pub trait Preset: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn family(&self) -> Family;
    fn build(&self, args: &PresetArgs) -> Result<DeformationSpec>;
}

fn uniform(sites: usize, q: f64) -> DMatrix<Complex64> {
    DMatrix::from_element(sites, sites, Complex64::new(q, 0.0))
}

/// Scalar q for every pair; order 1 by default (the plain quon algebra),
/// any order gives the q-deformed Green ansatz.
struct QuonPreset;

impl Preset for QuonPreset {
    fn name(&self) -> &'static str {
        "quon"
    }
    fn summary(&self) -> &'static str {
        "scalar q, q-deformed Green oscillators (order 1 unless --p is given)"
    }
    fn family(&self) -> Family {
        Family::GreenQuon
    }
    fn build(&self, args: &PresetArgs) -> Result<DeformationSpec> {
        let q = args.require_q()?;
        if !(-1.0 - VALIDATION_TOL..=1.0 + VALIDATION_TOL).contains(&q) {
            return Err(Error::QOutOfBounds {
                i: 0,
                j: 0,
                modulus: q.abs(),
            });
        }
        let order = args.order.unwrap_or(Order::Finite(1));
        DeformationSpec::new(
            order,
            uniform(args.sites_or(1), q),
            Family::GreenQuon,
            FamilyArgs::None,
        )
    }
}

/// Ordinary Green oscillators: q ≡ ε.
struct ParaPreset;

impl Preset for ParaPreset {
    fn name(&self) -> &'static str {
        "para"
    }
    fn summary(&self) -> &'static str {
        "para-Bose (epsilon=+1) or para-Fermi (epsilon=-1) of order p"
    }
    fn family(&self) -> Family {
        Family::GreenQuon
    }
    fn build(&self, args: &PresetArgs) -> Result<DeformationSpec> {
        let eps = args.epsilon.ok_or_else(|| missing("epsilon"))?;
        let order = args.order.ok_or_else(|| missing("p"))?;
        DeformationSpec::new(
            order,
            uniform(args.sites_or(1), eps.value()),
            Family::GreenQuon,
            FamilyArgs::None,
        )
    }
}

struct MultiparamPreset;

impl Preset for MultiparamPreset {
    fn name(&self) -> &'static str {
        "multiparam"
    }
    fn summary(&self) -> &'static str {
        "Hermitian q_ij matrix (from --qfile), order p"
    }
    fn family(&self) -> Family {
        Family::Multiparam
    }
    fn build(&self, args: &PresetArgs) -> Result<DeformationSpec> {
        let q = match (&args.q_matrix, args.q) {
            (Some(m), _) => m.clone(),
            (None, Some(q)) => uniform(args.sites_or(1), q),
            (None, None) => return Err(missing("q matrix")),
        };
        let order = args.order.unwrap_or(Order::Finite(1));
        DeformationSpec::new(order, q, Family::Multiparam, FamilyArgs::None)
    }
}

/// q_ij = e^{iφ_ij} off the diagonal, cos(λπ) on it.
struct AnyonPreset;

impl Preset for AnyonPreset {
    fn name(&self) -> &'static str {
        "anyon"
    }
    fn summary(&self) -> &'static str {
        "anyonic q_ij = exp(i phi_ij), q_ii = cos(lambda pi)"
    }
    fn family(&self) -> Family {
        Family::Anyon
    }
    fn build(&self, args: &PresetArgs) -> Result<DeformationSpec> {
        let lambda = args.lambda.ok_or_else(|| missing("lambda"))?;
        let sites = args.sites_or(2);
        let phi = match &args.phi {
            Some(phi) => {
                if phi.nrows() != sites || phi.ncols() != sites {
                    return Err(Error::InvalidArgs("phi must be sites x sites".into()));
                }
                for i in 0..sites {
                    for j in 0..sites {
                        if (phi[(i, j)] + phi[(j, i)]).abs() > VALIDATION_TOL {
                            return Err(Error::InvalidArgs("phi must be antisymmetric".into()));
                        }
                    }
                }
                phi.clone()
            }
            None => DMatrix::zeros(sites, sites),
        };
        let q = anyon_q(lambda, &phi);
        let order = args.order.unwrap_or(Order::Finite(1));
        DeformationSpec::new(order, q, Family::Anyon, FamilyArgs::Anyon { lambda, phi })
    }
}

/// Anyonic parameter matrix from λ and the phase matrix φ.
pub fn anyon_q(lambda: f64, phi: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = phi.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new((lambda * PI).cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, phi[(i, j)])
        }
    })
}

/// b^α b^{†α} - ε b^{†α} b^α = 1, b^α b^{†β} = εq b^{†β} b^α for α ≠ β.
struct SpeicherPreset;

impl Preset for SpeicherPreset {
    fn name(&self) -> &'static str {
        "speicher"
    }
    fn summary(&self) -> &'static str {
        "q-para oscillators: factor epsilon*[(1-q) delta_ab + q]"
    }
    fn family(&self) -> Family {
        Family::Speicher
    }
    fn build(&self, args: &PresetArgs) -> Result<DeformationSpec> {
        let epsilon = args.epsilon.ok_or_else(|| missing("epsilon"))?;
        let q = args.require_q()?;
        let order = args.order.ok_or_else(|| missing("p"))?;
        DeformationSpec::new(
            order,
            uniform(args.sites_or(1), epsilon.value()),
            Family::Speicher,
            FamilyArgs::Speicher { epsilon, q },
        )
    }
}

/// Name → preset lookup.
pub struct PresetRegistry {
    presets: BTreeMap<&'static str, Box<dyn Preset>>,
}

impl PresetRegistry {
    pub fn empty() -> Self {
        PresetRegistry {
            presets: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, preset: Box<dyn Preset>) {
        self.presets.insert(preset.name(), preset);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Preset> {
        self.presets
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "preset",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.presets.keys().copied()
    }

    pub fn build(&self, name: &str, args: &PresetArgs) -> Result<DeformationSpec> {
        self.get(name)?.build(args)
    }
}

impl Default for PresetRegistry {
    fn default() -> Self {
        let mut reg = PresetRegistry::empty();
        reg.register(Box::new(QuonPreset));
        reg.register(Box::new(ParaPreset));
        reg.register(Box::new(MultiparamPreset));
        reg.register(Box::new(AnyonPreset));
        reg.register(Box::new(SpeicherPreset));
        reg
    }
}

/// Builds the preset for a family tag.
pub fn make_preset(family: Family, args: &PresetArgs) -> Result<DeformationSpec> {
    let name = match family {
        Family::GreenQuon if args.epsilon.is_some() && args.q.is_none() => "para",
        Family::GreenQuon => "quon",
        Family::Multiparam => "multiparam",
        Family::Anyon => "anyon",
        Family::Speicher => "speicher",
    };
    PresetRegistry::default().build(name, args)
}
