use conductor_core::empirics::{collect_records, count_conductor_below, empirical_cdf, mass_histogram};
use conductor_core::family::family_size;
use conductor_core::theory::linear_grid;
use conductor_core::FamilySpec;

#[test]
fn cdf_endpoints_and_monotonicity() {
    let spec = FamilySpec::new(1e5, 1, 1).unwrap();
    let mut lambdas = vec![0.5e-5, 1e-3, 0.01, 0.1];
    lambdas.extend(linear_grid(1.0, 496.0, 5.0).unwrap());
    lambdas.push(496.0 * 1.01);
    let g = empirical_cdf(&spec, &lambdas).unwrap();
    assert!(g.is_monotone());
    assert_eq!(g.cdf[0], 0.0);
    assert_eq!(*g.cdf.last().unwrap(), 1.0);
}

#[test]
fn counts_below_examples() {
    let spec = FamilySpec::new(1e5, 2, 5).unwrap();
    let n = family_size(&spec);
    assert_eq!(count_conductor_below(&spec, 496.0 * 1e5 + 1.0).unwrap(), n);
    assert_eq!(count_conductor_below(&spec, 1.0).unwrap(), 0);
    assert!(count_conductor_below(&spec, 0.5).is_err());
    let mut prev = 0;
    for x in [10.0, 1e3, 1e5, 1e6, 1e7] {
        let c = count_conductor_below(&spec, x).unwrap();
        assert!(c >= prev);
        prev = c;
    }
    // nested boxes
    let bigger = spec.with_height(3e5).unwrap();
    assert!(count_conductor_below(&bigger, 1e6).unwrap() >= count_conductor_below(&spec, 1e6).unwrap());
}

#[test]
fn histogram_blank_entries() {
    for (r, t) in FamilySpec::all_residue_pairs() {
        let spec = FamilySpec::new(1e5, r as i64, t as i64).unwrap();
        let h = mass_histogram(&spec, 1000).unwrap();
        assert_eq!(h.multiples_of_3, 0);
        assert!(h.counts.keys().all(|m| m % 8 != 0 && m % 3 != 0));
        let total: u64 = h.counts.values().sum::<u64>() + h.overflow;
        assert_eq!(total, h.total);
        let freq: f64 = h.counts.keys().map(|&m| h.frequency(m)).sum::<f64>() + h.overflow_frequency();
        assert!((freq - 1.0).abs() < 1e-12);
    }
}

#[test]
fn records_respect_bounds() {
    let spec = FamilySpec::new(2e5, 4, 3).unwrap();
    for r in collect_records(&spec).unwrap() {
        assert!(r.ratio >= 1 && r.ratio as f64 <= 496.0 * 2e5);
        assert!(r.conductor as f64 <= 496.0 * 2e5);
        assert_eq!(r.ratio * r.conductor, r.delta.unsigned_abs());
    }
}
