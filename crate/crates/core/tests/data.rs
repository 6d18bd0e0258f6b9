use cdnn_core::data::{
    format_f64, generate, load_csv, make_replications, oracle_of, partition, split, split_sizes,
    write_csv, Dataset, DgpFamily, PotentialOutcomes, Provenance, Sample, SplitSpec,
};
use cdnn_core::theory::NuisanceOracle;
use proptest::prelude::*;

#[test]
fn csv_round_trip_of_generated_data() {
    let data = generate(&DgpFamily::ConfoundHetero.spec(8), 100).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    write_csv(&data, &path).unwrap();
    let back = load_csv(&path).unwrap();
    assert!(back.same_values(&data));
    assert_eq!(back.true_ite(), data.true_ite());
    let header = std::fs::read_to_string(&path).unwrap();
    assert!(header.starts_with("t,y,y1,y0,x0,x1,x2,x3,x4\n"));
}

#[test]
fn csv_with_ground_truth_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gt.csv");
    std::fs::write(&path, "t,y,y1,y0,x0\n1,3.5,3.5,1.0,0.2\n0,0.5,2.0,0.5,-1\n").unwrap();
    let data = load_csv(&path).unwrap();
    assert_eq!(data.true_ite().unwrap(), vec![2.5, 1.5]);
    assert_eq!(data.provenance, Provenance::File(path.clone()));
}

#[test]
fn treated_fraction_follows_the_propensity() {
    let spec = DgpFamily::ConfoundLinear.spec(77);
    let oracle = oracle_of(&spec).unwrap();
    let data = generate(&spec, 100_000).unwrap();
    let in_band: Vec<&Sample> = data
        .samples()
        .iter()
        .filter(|s| (0.6..=0.7).contains(&oracle.e0(&s.x)))
        .collect();
    let n = in_band.len() as f64;
    let frac = in_band.iter().filter(|s| s.treated).count() as f64 / n;
    let se = (0.7 * 0.3 / n).sqrt();
    assert!(frac >= 0.6 - 3.0 * se && frac <= 0.7 + 3.0 * se, "{frac} over {n}");
}

#[test]
fn binned_outcome_means_match_the_oracle() {
    let spec = DgpFamily::ConfoundHetero.spec(78);
    let oracle = oracle_of(&spec).unwrap();
    let data = generate(&spec, 100_000).unwrap();
    for lo in [-1.0, -0.25, 0.5] {
        let bin: Vec<&Sample> = data
            .samples()
            .iter()
            .filter(|s| s.x[0] >= lo && s.x[0] < lo + 0.25)
            .collect();
        let n = bin.len() as f64;
        let y_mean = bin.iter().map(|s| s.y).sum::<f64>() / n;
        let g_mean = bin.iter().map(|s| oracle.g0(&s.x)).sum::<f64>() / n;
        let var = bin.iter().map(|s| (s.y - y_mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((y_mean - g_mean).abs() <= 3.0 * (var / n).sqrt(), "bin {lo}");
    }
}

#[test]
fn naive_difference_of_means_is_confounded() {
    let data = generate(&DgpFamily::ConfoundLinear.spec(79), 20_000).unwrap();
    let arm = |t: bool| -> (f64, f64, f64) {
        let ys: Vec<f64> = data.samples().iter().filter(|s| s.treated == t).map(|s| s.y).collect();
        let n = ys.len() as f64;
        let m = ys.iter().sum::<f64>() / n;
        let v = ys.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v, n)
    };
    let (m1, v1, n1) = arm(true);
    let (m0, v0, n0) = arm(false);
    let se = (v1 / n1 + v0 / n0).sqrt();
    let true_ate = data.true_ite().unwrap().iter().sum::<f64>() / data.len() as f64;
    assert!(((m1 - m0) - true_ate).abs() > 5.0 * se);
}

#[test]
fn replications_regenerate_in_isolation() {
    let set = make_replications(DgpFamily::ConfoundHetero.spec(3), 10).with_redraw(true);
    let a = generate(&set.spec(7), 50).unwrap();
    let all: Vec<Dataset> = set.specs().map(|s| generate(&s, 50).unwrap()).collect();
    assert!(a.same_values(&all[7]));
}

#[test]
fn split_parts_are_disjoint_and_exhaustive() {
    let data = generate(&DgpFamily::NullEffect.spec(1), 747).unwrap();
    let (a, b, c) = split(&data, &SplitSpec::Ihdp, 4).unwrap();
    assert_eq!((a.len(), b.len(), c.len()), (471, 201, 75));
    let mut ys: Vec<u64> = [a, b, c]
        .iter()
        .flat_map(|d| d.samples().iter().map(|s| s.y.to_bits()).collect::<Vec<_>>())
        .collect();
    let mut orig: Vec<u64> = data.samples().iter().map(|s| s.y.to_bits()).collect();
    ys.sort_unstable();
    orig.sort_unstable();
    assert_eq!(ys, orig);
}

proptest! {
    #[test]
    fn csv_round_trip_is_value_exact(
        rows in proptest::collection::vec(
            (any::<bool>(), proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
             proptest::collection::vec(proptest::num::f64::NORMAL, 3)),
            1..20,
        ),
    ) {
        let samples: Vec<Sample> = rows
            .iter()
            .map(|(t, y, x)| Sample { x: x.clone(), treated: *t, y: *y })
            .collect();
        let truth: Vec<PotentialOutcomes> = rows
            .iter()
            .map(|(_, y, x)| PotentialOutcomes { y1: *y, y0: x[0] })
            .collect();
        let data = Dataset::new(3, samples, Some(truth), Provenance::Subset).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        write_csv(&data, &path).unwrap();
        prop_assert!(load_csv(&path).unwrap().same_values(&data));
    }

    #[test]
    fn formatted_doubles_parse_back(v in proptest::num::f64::ANY.prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn split_sizes_follow_the_remainder_rule(n in 10usize..5000, twins in any::<bool>()) {
        let spec = if twins { SplitSpec::TwinsNews } else { SplitSpec::Ihdp };
        let (ft, fv, _) = spec.fractions();
        let (a, b, c) = split_sizes(&spec, n).unwrap();
        prop_assert_eq!(a + b + c, n);
        prop_assert_eq!(b, (fv * n as f64 + 1e-9).floor() as usize);
        prop_assert_eq!(a + b, ((ft + fv) * n as f64 + 1e-9).floor() as usize);
        let parts = partition(n, &[a, b, c], n as u64);
        let mut seen = vec![false; n];
        for p in &parts {
            for &i in p {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn generated_data_is_factually_consistent(seed in any::<u64>()) {
        let data = generate(&DgpFamily::ConfoundHetero.spec(seed), 40).unwrap();
        for (s, p) in data.samples().iter().zip(data.ground_truth().unwrap()) {
            prop_assert_eq!(s.y, if s.treated { p.y1 } else { p.y0 });
        }
    }
}
