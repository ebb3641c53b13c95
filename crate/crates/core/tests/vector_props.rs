mod common;

use adatriplet::vector::{cosine_sim, normalize, normalize_vjp, squared_l2, RawVector};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn raw_vec() -> impl Strategy<Value = Vec<f64>> {
    (2usize..12)
        .prop_flat_map(|d| prop::collection::vec(-10.0f64..10.0, d))
        .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>().sqrt() > 1e-3)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..12)
        .prop_flat_map(|d| {
            (
                prop::collection::vec(-10.0f64..10.0, d),
                prop::collection::vec(-10.0f64..10.0, d),
            )
        })
        .prop_filter("non-degenerate", |(a, b)| {
            a.iter().map(|x| x * x).sum::<f64>() > 1e-6 && b.iter().map(|x| x * x).sum::<f64>() > 1e-6
        })
}

proptest! {
    #[test]
    fn normalize_is_unit_and_idempotent(v in raw_vec()) {
        let u = normalize(&RawVector::new(v).unwrap()).unwrap();
        let n: f64 = u.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((n - 1.0).abs() <= 1e-9);
        let again = normalize(&RawVector::new(u.as_slice().to_vec()).unwrap()).unwrap();
        for (a, b) in again.as_slice().iter().zip(u.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn distance_similarity_identity((a, b) in pair()) {
        let u = normalize(&raw(&a)).unwrap();
        let v = normalize(&raw(&b)).unwrap();
        let cos = cosine_sim(&u, &v).unwrap();
        prop_assert!((-1.0..=1.0).contains(&cos));
        prop_assert_eq!(cos, cosine_sim(&v, &u).unwrap());
        prop_assert!((squared_l2(&u, &v).unwrap() - (2.0 - 2.0 * cos)).abs() <= 1e-12);
    }

    #[test]
    fn vjp_is_orthogonal_to_output((v, up) in pair()) {
        let g = normalize(&raw(&v)).unwrap();
        let out = normalize_vjp(&raw(&v), &up).unwrap();
        let along: f64 = out.iter().zip(g.as_slice()).map(|(a, b)| a * b).sum();
        prop_assert!(along.abs() <= 1e-9);
    }
}

#[test]
fn vjp_matches_finite_differences() {
    let mut r = rng(42);
    let h = 1e-6;
    for _ in 0..50 {
        let d = 2 + (r.random_range(0..10usize));
        let v = gaussian(&mut r, d);
        let upstream = gaussian(&mut r, d);
        let analytic = normalize_vjp(&raw(&v), &upstream).unwrap();
        // scalar f(v) = upstream . normalize(v) has gradient J^T upstream
        let f = |x: &[f64]| -> f64 {
            let n = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            x.iter().zip(&upstream).map(|(a, u)| a / n * u).sum()
        };
        for (i, &a) in analytic.iter().enumerate() {
            let numeric = central_diff(f, &v, i, h);
            let err = rel_err(a, numeric);
            assert!(
                err < 1e-6 || (a - numeric).abs() < 1e-9,
                "component {i}: analytic {a} numeric {numeric} rel {err}"
            );
        }
    }
}
