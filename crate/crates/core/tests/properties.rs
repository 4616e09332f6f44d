use conductor_core::arith::{factor, p_part, valuation};
use conductor_core::congruence::ResidueSet;
use conductor_core::empirics::{power_law_fit, ConductorRecord, Survey};
use conductor_core::family::{discriminant, is_member, is_minimal_pair};
use conductor_core::local::{conductor, oracle_mismatches};
use conductor_core::theory::{f_delta, main_term, mass, rho};
use conductor_core::{CurveParams, FamilySpec};
use proptest::prelude::*;

fn member() -> impl Strategy<Value = CurveParams> {
    (0usize..12, -400i64..400, -20_000i64..20_000).prop_filter_map("not a member", |(i, ka, kb)| {
        let (r, t) = FamilySpec::all_residue_pairs().nth(i).unwrap();
        let (a, b) = (r as i64 + 6 * ka, t as i64 + 6 * kb);
        let spec = FamilySpec::new(1e12, r as i64, t as i64).unwrap();
        (is_member(&spec, a, b) && discriminant(a, b) != 0).then_some(CurveParams { a, b, spec })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn conductor_divides_discriminant(c in member()) {
        let inv = conductor(&c).unwrap();
        let rec = ConductorRecord::from_params(&c).unwrap();
        prop_assert_eq!(rec.ratio * rec.conductor, rec.delta.unsigned_abs());
        prop_assert_eq!(inv.conductor, rec.conductor);
        // never divisible by 9 or 3 at all: reduction at 3 is good
        prop_assert!(rec.conductor % 3 != 0 && rec.ratio % 3 != 0);
        // v₂(Δ/N) ≤ 2
        prop_assert!(rec.ratio % 8 != 0);
    }

    #[test]
    fn fast_path_agrees_with_tate(c in member()) {
        prop_assert!(oracle_mismatches(&c).unwrap().is_empty());
    }

    #[test]
    fn valuations_consistent(n in (-(1i128 << 62))..(1i128 << 62), p in prop::sample::select(vec![2u64, 3, 5, 7, 31, 101])) {
        prop_assume!(n != 0);
        let v = valuation(n, p).unwrap();
        let part = p_part(n, p).unwrap();
        prop_assert_eq!(part, (p as u128).pow(v));
        prop_assert_eq!(n.unsigned_abs() % part, 0);
        prop_assert_eq!(factor(n).unwrap().recompose(), n);
        prop_assert_eq!(factor(n).unwrap().exponent_of(p as u128), v);
    }

    #[test]
    fn minimality_is_local(a in -10_000i64..10_000, b in -10_000i64..10_000, d in prop::sample::select(vec![5i64, 7])) {
        prop_assume!((a, b) != (0, 0));
        // scaling by d⁴, d⁶ always breaks minimality
        prop_assert!(!is_minimal_pair(a * d.pow(4), b * d.pow(6)));
    }

    #[test]
    fn f_delta_monotone(x in -600.0f64..100.0, dx in 0.0f64..50.0) {
        let (lo, hi) = (f_delta(x), f_delta(x + dx));
        prop_assert!(lo <= hi + 1e-10);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn rho_depends_only_on_p_part(m in 1u64..1_000_000, k in 1u64..1000) {
        for p in [2u64, 3, 5, 7, 11] {
            let coprime = if k % p == 0 { k + 1 } else { k };
            prop_assume!(coprime % p != 0);
            let pp = p.pow(valuation(m as i128, p).unwrap());
            prop_assert_eq!(rho(p, m), rho(p, pp * coprime));
        }
    }

    #[test]
    fn mass_nonnegative(m in 1u64..100_000) {
        let w = mass(m, 1e-14).unwrap();
        prop_assert!((0.0..=0.46).contains(&w));
        if m % 3 == 0 || m % 8 == 0 {
            prop_assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn power_law_recovers_exponent(e in 0.1f64..3.0, c in 0.01f64..100.0) {
        let pts: Vec<(f64, f64)> = [0.5, 1.0, 3.0, 10.0, 40.0].iter().map(|&x: &f64| (x, c * x.powf(e))).collect();
        prop_assert!((power_law_fit(&pts).unwrap() - e).abs() < 1e-9);
    }

    #[test]
    fn residue_product_matches_members(
        s4 in prop::collection::hash_set((0u64..4, 0u64..4), 0..8),
        s9 in prop::collection::hash_set((0u64..9, 0u64..9), 0..10),
    ) {
        let prod = ResidueSet::product(vec![
            ResidueSet::from_pairs(4, s4.iter().copied()),
            ResidueSet::from_pairs(9, s9.iter().copied()),
        ]).unwrap();
        let members = prod.members();
        prop_assert_eq!(members.len() as u128, prod.cardinality());
        for a in 0..36u64 {
            for b in 0..36u64 {
                let inside = s4.contains(&(a % 4, b % 4)) && s9.contains(&(a % 9, b % 9));
                prop_assert_eq!(prod.contains(a, b), inside);
                prop_assert_eq!(members.binary_search(&(a, b)).is_ok(), inside);
            }
        }
    }

    #[test]
    fn survey_split_anywhere(split in 0usize..400, th in prop::collection::vec(1.0f64..1e7, 0..5)) {
        let spec = FamilySpec::new(3e4, 1, 1).unwrap();
        let recs = conductor_core::empirics::collect_records(&spec).unwrap();
        let split = split.min(recs.len());
        let mut x = Survey::new(&th);
        let mut y = Survey::new(&th);
        recs[..split].iter().for_each(|r| x.add(r));
        recs[split..].iter().for_each(|r| y.add(r));
        let mut whole = Survey::new(&th);
        recs.iter().for_each(|r| whole.add(r));
        prop_assert_eq!(x.clone().merge(y.clone()), whole.clone());
        prop_assert_eq!(y.merge(x), whole);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn main_term_telescopes(a in 0.5f64..50.0, b in 0.5f64..100.0, c in 0.5f64..200.0) {
        let mut v = [a, a + b, a + b + c];
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let tol = 1e-10;
        let lhs = main_term(v[0], v[1], tol).unwrap() + main_term(v[1], v[2], tol).unwrap();
        prop_assert!((lhs - main_term(v[0], v[2], tol).unwrap()).abs() < 2e-8);
        prop_assert!(main_term(0.0, v[0], tol).unwrap() <= main_term(0.0, v[1], tol).unwrap() + 1e-12);
    }
}

#[test]
fn discriminant_sign_range() {
    // −496H ≤ Δ ≤ 64H on the box
    let h: f64 = 1e6;
    for (a, b) in [(100i64, 1000i64), (-100, 0), (-100, 1000), (100, 0)] {
        let d = discriminant(a, b) as f64;
        assert!((-496.0 * h..=64.0 * h).contains(&d));
    }
    // the cusp y² = x³ − 3x + 2
    assert_eq!(discriminant(-3, 2), 0);
}
