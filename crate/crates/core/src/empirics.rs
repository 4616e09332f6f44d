//! Empirical conductor statistics from exact enumeration, and their
//! comparison with the limiting distribution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::family::{fold_family, CurveParams, FamilySpec, ShardPlan};
use crate::local::conductor;
use crate::theory::{mass, theory_grid, DistributionGrid, GridMeta, GridSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConductorRecord {
    pub a: i64,
    pub b: i64,
    pub delta: i128,
    pub conductor: u128,
    pub ratio: u128,
}

impl ConductorRecord {
    pub fn from_params(params: &CurveParams) -> Result<Self> {
        let inv = conductor(params)?;
        let rec = Self {
            a: params.a,
            b: params.b,
            delta: inv.delta.value(),
            conductor: inv.conductor,
            ratio: inv.ratio(),
        };
        if rec.ratio * rec.conductor != rec.delta.unsigned_abs() {
            return Err(Error::Consistency(format!("N = {} does not divide Δ = {}", rec.conductor, rec.delta)));
        }
        Ok(rec)
    }
}

/// Every member's record, in `(b, a)` order.
pub fn collect_records(spec: &FamilySpec) -> Result<Vec<ConductorRecord>> {
    let mut all = fold_family(
        spec,
        &ShardPlan::default_for(spec),
        || Ok(Vec::new()),
        |acc: &mut Result<Vec<ConductorRecord>>, c| {
            if let Ok(v) = acc {
                match ConductorRecord::from_params(&c) {
                    Ok(r) => v.push(r),
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |x, y| {
            let (mut x, y) = (x?, y?);
            x.extend(y);
            Ok(x)
        },
    )?;
    all.sort_unstable_by_key(|r| (r.b, r.a));
    Ok(all)
}

/// Mergeable per-shard counters: conductors below each threshold and the
/// distribution of `|Δ|/N`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Survey {
    pub total: u64,
    /// Thresholds on `N`, increasing.
    thresholds: Vec<f64>,
    /// `bucket[i]`: conductors in `[thresholds[i−1], thresholds[i])`.
    buckets: Vec<u64>,
    pub ratios: BTreeMap<u128, u64>,
}

impl Survey {
    pub fn new(thresholds: &[f64]) -> Self {
        let mut t = thresholds.to_vec();
        t.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Self { total: 0, buckets: vec![0; t.len() + 1], thresholds: t, ratios: BTreeMap::new() }
    }

    pub fn add(&mut self, rec: &ConductorRecord) {
        self.total += 1;
        let n = rec.conductor as f64;
        let i = self.thresholds.partition_point(|&x| x <= n);
        self.buckets[i] += 1;
        *self.ratios.entry(rec.ratio).or_insert(0) += 1;
    }

    pub fn merge(mut self, other: Survey) -> Survey {
        self.total += other.total;
        for (x, y) in self.buckets.iter_mut().zip(other.buckets) {
            *x += y;
        }
        for (k, v) in other.ratios {
            *self.ratios.entry(k).or_insert(0) += v;
        }
        self
    }

    /// `#{N < threshold}` for each threshold, in increasing threshold order.
    pub fn counts_below(&self) -> Vec<u64> {
        self.buckets[..self.thresholds.len()]
            .iter()
            .scan(0u64, |acc, &b| {
                *acc += b;
                Some(*acc)
            })
            .collect()
    }
}

/// One pass over the family, feeding [`Survey`] shards.
pub fn survey(spec: &FamilySpec, thresholds: &[f64]) -> Result<Survey> {
    let empty = Survey::new(thresholds);
    fold_family(
        spec,
        &ShardPlan::default_for(spec),
        || Ok(empty.clone()),
        |acc: &mut Result<Survey>, c| {
            if let Ok(s) = acc {
                match ConductorRecord::from_params(&c) {
                    Ok(r) => s.add(&r),
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |x, y| Ok(x?.merge(y?)),
    )
}

/// Fraction of the family with `N/H < λ` for each `λ`.
pub fn empirical_cdf(spec: &FamilySpec, lambdas: &[f64]) -> Result<DistributionGrid> {
    let h = spec.height();
    let s = survey(spec, &lambdas.iter().map(|l| l * h).collect::<Vec<_>>())?;
    empirical_grid(spec, lambdas, &s)
}

/// CDF grid from a survey whose thresholds are `λ·H`.
pub fn empirical_grid(spec: &FamilySpec, lambdas: &[f64], s: &Survey) -> Result<DistributionGrid> {
    let h = spec.height();
    let counts = s.counts_below();
    let by_threshold: BTreeMap<u64, u64> = s
        .thresholds
        .iter()
        .zip(counts)
        .map(|(t, c)| (t.to_bits(), c))
        .collect();
    let total = s.total.max(1) as f64;
    let cdf = lambdas
        .iter()
        .map(|l| {
            by_threshold
                .get(&(l * h).to_bits())
                .map(|&c| c as f64 / total)
                .ok_or_else(|| Error::Domain(format!("λ = {l} was not surveyed")))
        })
        .collect::<Result<Vec<_>>>()?;
    DistributionGrid::new(
        lambdas.to_vec(),
        cdf,
        GridSource::Empirical,
        GridMeta::Empirical { height: h, family_size: s.total },
    )
}

/// `#{E ∈ F(H) : N_E < X}`.
pub fn count_conductor_below(spec: &FamilySpec, x: f64) -> Result<u64> {
    if !(x >= 1.0) {
        return domain(format!("X must be at least 1, got {x}"));
    }
    Ok(survey(spec, &[x])?.counts_below()[0])
}

/// Empirical distribution of `|Δ|/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassHistogram {
    pub max_m: u64,
    pub total: u64,
    /// Counts for `m ≤ max_m` (zero counts omitted).
    pub counts: BTreeMap<u64, u64>,
    pub overflow: u64,
    /// Members with `3 | |Δ|/N`, over all `m`.
    pub multiples_of_3: u64,
}

impl MassHistogram {
    pub fn from_ratios(ratios: &BTreeMap<u128, u64>, max_m: u64) -> Self {
        let mut h = Self { max_m, total: 0, counts: BTreeMap::new(), overflow: 0, multiples_of_3: 0 };
        for (&m, &c) in ratios {
            h.total += c;
            if m % 3 == 0 {
                h.multiples_of_3 += c;
            }
            if m <= max_m as u128 {
                h.counts.insert(m as u64, c);
            } else {
                h.overflow += c;
            }
        }
        h
    }

    pub fn frequency(&self, m: u64) -> f64 {
        self.counts.get(&m).copied().unwrap_or(0) as f64 / self.total.max(1) as f64
    }

    pub fn overflow_frequency(&self) -> f64 {
        self.overflow as f64 / self.total.max(1) as f64
    }
}

pub fn mass_histogram(spec: &FamilySpec, max_m: u64) -> Result<MassHistogram> {
    if max_m == 0 {
        return domain("Mmax must be positive");
    }
    Ok(MassHistogram::from_ratios(&survey(spec, &[])?.ratios, max_m))
}

/// Least-squares slope of `log y` against `log x`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return domain("need at least three points");
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return domain("power-law fit needs positive coordinates");
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("x values must not all coincide");
    }
    Ok(sxy / sxx)
}

pub fn sup_distance(a: &DistributionGrid, b: &DistributionGrid) -> Result<f64> {
    if a.lambdas != b.lambdas {
        return domain("grids differ");
    }
    Ok(a.cdf.iter().zip(&b.cdf).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub height: f64,
    pub spec: FamilySpec,
    pub lambdas: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theory: Vec<f64>,
    pub sup_distance: f64,
    pub mass_hist: MassHistogram,
    /// `(X, #{N < X})`.
    pub counts: Vec<(f64, u64)>,
}

/// One enumeration pass feeding the CDF on `lambdas`, the `|Δ|/N` histogram
/// up to `max_m`, and the counts below each `X` in `xs`.
pub fn compare(spec: &FamilySpec, lambdas: &[f64], max_m: u64, xs: &[f64], tol: f64) -> Result<ComparisonReport> {
    let h = spec.height();
    let mut thresholds: Vec<f64> = lambdas.iter().map(|l| l * h).collect();
    thresholds.extend_from_slice(xs);
    let s = survey(spec, &thresholds)?;
    let emp = empirical_grid(spec, lambdas, &s)?;
    let theory = theory_grid(lambdas, tol)?;
    let sup = sup_distance(&emp, &theory)?;
    let below: BTreeMap<u64, u64> = s.thresholds.iter().zip(s.counts_below()).map(|(t, c)| (t.to_bits(), c)).collect();
    let counts = xs.iter().map(|&x| (x, below[&x.to_bits()])).collect();
    Ok(ComparisonReport {
        height: h,
        spec: *spec,
        lambdas: lambdas.to_vec(),
        empirical: emp.cdf,
        theory: theory.cdf,
        sup_distance: sup,
        mass_hist: MassHistogram::from_ratios(&s.ratios, max_m),
        counts,
    })
}

/// `w(m)` for the mass CSV.
pub fn theory_mass(m: u64) -> Result<f64> {
    mass(m, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(cdf: Vec<f64>) -> DistributionGrid {
        let lambdas = (0..cdf.len()).map(|i| i as f64 + 1.0).collect();
        DistributionGrid::new(lambdas, cdf, GridSource::Empirical, GridMeta::Empirical { height: 1.0, family_size: 1 })
            .unwrap()
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 11.0].iter().map(|&x: &f64| (x, x.powf(5.0 / 6.0))).collect();
        assert!((power_law_fit(&pts).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, 7.0 * y)).collect();
        assert!((power_law_fit(&scaled).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert!(power_law_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(power_law_fit(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn sup_distance_examples() {
        let a = grid(vec![0.1, 0.5, 0.9]);
        assert_eq!(sup_distance(&a, &a).unwrap(), 0.0);
        let b = grid(vec![0.2, 0.6, 1.0]);
        assert!((sup_distance(&a, &b).unwrap() - 0.1).abs() < 1e-15);
        assert!(sup_distance(&a, &grid(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn survey_merge_is_associative() {
        let spec = FamilySpec::new(1e5, 1, 1).unwrap();
        let recs = collect_records(&spec).unwrap();
        let th = [100.0, 1e4, 1e6];
        let mut whole = Survey::new(&th);
        recs.iter().for_each(|r| whole.add(r));
        let mut parts: Vec<Survey> = recs
            .chunks(97)
            .map(|c| {
                let mut s = Survey::new(&th);
                c.iter().for_each(|r| s.add(r));
                s
            })
            .collect();
        let last = parts.pop().unwrap();
        let merged = parts.into_iter().fold(Survey::new(&th), Survey::merge).merge(last);
        assert_eq!(merged, whole);
        assert_eq!(survey(&spec, &th).unwrap(), whole);
    }

    #[test]
    fn records_satisfy_invariants() {
        let spec = FamilySpec::new(1e5, 2, 3).unwrap();
        for r in collect_records(&spec).unwrap() {
            assert_eq!(r.ratio * r.conductor, r.delta.unsigned_abs());
            assert!(r.conductor as f64 <= 496.0 * 1e5);
            assert!(r.ratio >= 1);
        }
    }
}
