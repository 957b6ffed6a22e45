use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use paraquon::checks::{multiparam_spec, random_hermitian_q, scalar_spec};
use paraquon::gram::hermiticity_gap;
use paraquon::interp::{phi_table, FockInner};
use paraquon::jw::{algebra_residual, build_rep, jw_map, q_int, JwParams, Relation};
use paraquon::params::DeformationSpec;
use paraquon::report::GramReport;
use paraquon::spectral::{default_phi, spectrum};
use paraquon::{build_gram, Oracle, Order, Word};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec_from_seed(seed: u64, sites: usize, p: usize) -> DeformationSpec {
    let q = random_hermitian_q(sites, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
    multiparam_spec(Order::Finite(p), q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gram_is_hermitian_with_unit_diagonal(seed in any::<u64>(), p in 1usize..=4, n in 1usize..=4) {
        let spec = spec_from_seed(seed, 4, p);
        let g = build_gram(&spec, &(0..n).collect::<Vec<_>>()).unwrap();
        prop_assert!(hermiticity_gap(&g.entries) < 1e-12);
        for k in 0..g.dim() {
            prop_assert!((g.entry(k, k) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn repeated_index_gram_matches_oracle(seed in any::<u64>(), p in 1usize..=3, tuple in prop::collection::vec(0usize..2, 1..=4)) {
        let spec = spec_from_seed(seed, 2, p);
        let g = build_gram(&spec, &tuple).unwrap();
        let oracle = Oracle::new(&spec);
        let el = g.basis.elements();
        for r in 0..el.len() {
            for c in 0..el.len() {
                let v = oracle.vev_a_word(&Word::gram(&el[r], &el[c])).unwrap().value;
                prop_assert!((v - g.entry(r, c)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_gram_is_positive_inside_the_unit_interval(q in -0.98f64..0.98, p in 1usize..=3, n in 1usize..=4) {
        let g = build_gram(&scalar_spec(Order::Finite(p), q, n).unwrap(), &(0..n).collect::<Vec<_>>()).unwrap();
        let s = spectrum(&g, None).unwrap();
        prop_assert!(s.min_eig > 0.0);
        prop_assert_eq!(s.rank, g.dim());
    }

    #[test]
    fn dagger_conjugates_vev(seed in any::<u64>(), p in 1usize..=3, row in prop::collection::vec(0usize..3, 2), col in prop::collection::vec(0usize..3, 2)) {
        let spec = spec_from_seed(seed, 3, p);
        let oracle = Oracle::new(&spec);
        let w = Word::gram(&row, &col);
        let a = oracle.vev_a_word(&w).unwrap().value;
        let b = oracle.vev_a_word(&w.dagger()).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn word_display_round_trips(letters in prop::collection::vec((any::<bool>(), any::<bool>(), 1usize..9, 1usize..4), 0..8)) {
        let text: Vec<String> = letters
            .iter()
            .map(|&(b, dag, s, g)| match (b, dag) {
                (false, false) => format!("a(i{s})"),
                (false, true) => format!("a+(i{s})"),
                (true, false) => format!("b(i{s},g{g})"),
                (true, true) => format!("b+(i{s},g{g})"),
            })
            .collect();
        let text = text.join(" ");
        prop_assert_eq!(Word::parse(&text).unwrap().to_string(), text);
    }

    #[test]
    fn report_toml_round_trip(seed in any::<u64>(), p in 1usize..=3) {
        let spec = spec_from_seed(seed, 3, p);
        let r = GramReport::new(&spec, &build_gram(&spec, &[0, 1, 2]).unwrap());
        let back = GramReport::from_toml(&r.to_toml()).unwrap();
        prop_assert_eq!(back.to_toml(), r.to_toml());
        prop_assert!((back.entries - r.entries).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn spec_toml_round_trip(seed in any::<u64>(), p in 1usize..=5) {
        let spec = spec_from_seed(seed, 3, p);
        let back = DeformationSpec::from_toml(&spec.to_toml()).unwrap();
        prop_assert_eq!(back.digest(), spec.digest());
    }

    #[test]
    fn phi_reconstructs_inner_products(seed in any::<u64>(), p in 1usize..=3, base in prop::collection::vec(0usize..3, 1..=3), i in 0usize..3) {
        let spec = spec_from_seed(seed, 3, p);
        let table = phi_table(&spec, &base, i, true).unwrap();
        prop_assert!(table.reconstruction_error(&spec).unwrap() < 1e-10);
    }

    #[test]
    fn jw_relations_hold_on_the_safe_subspace(lambda in 0.0f64..=1.0, mu in 0.0f64..=1.0) {
        let rep = build_rep(2, 2, 3).unwrap();
        let params = JwParams::lower_triangular(lambda, mu, &default_phi(2)).unwrap();
        let bs = jw_map(&rep, &params).unwrap();
        let r = algebra_residual(&rep, &params, &bs).unwrap();
        for rel in [Relation::R1, Relation::R2, Relation::R3] {
            prop_assert!(r.max(rel) < 1e-10);
        }
    }
}

#[test]
fn fock_inner_vanishes_between_different_site_content() {
    let spec = spec_from_seed(5, 3, 2);
    let inner = FockInner::new(&spec);
    assert_eq!(
        inner.inner(&[0, 1], &[0, 2]).unwrap(),
        Complex64::new(0.0, 0.0)
    );
    assert_abs_diff_eq!(
        inner.inner(&[0, 1], &[0, 1]).unwrap().re,
        1.0,
        epsilon = 1e-12
    );
}

#[test]
fn q_numbers() {
    assert_eq!(q_int(0, 0.3), 0.0);
    assert_abs_diff_eq!(q_int(3, 0.5), 1.75, epsilon = 1e-15);
    assert_abs_diff_eq!(q_int(4, -1.0), 0.0, epsilon = 1e-15);
}
