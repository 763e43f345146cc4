use std::path::Path;

use mandelroots::{load_rootset, save_rootset, Format, NumericContext, RootSet};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn csv_fixture_with_header() {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/p2_with_header.csv");
    let rs = load_rootset(&p).unwrap();
    assert_eq!(rs.degree(), 3);
    assert_eq!(rs.points()[0], Complex64::new(-1.7548776662466927, 0.0));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
        -2.0f64..2.0,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bitwise_round_trip(pts in proptest::collection::vec((finite(), finite()), 1023)) {
        let pts: Vec<Complex64> = pts.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let rs = RootSet::new(pts.clone(), NumericContext::double());
        let dir = tempfile::tempdir().unwrap();
        for (name, fmt) in [("r.mroot", Format::Binary), ("r.csv", Format::Csv)] {
            let p = dir.path().join(name);
            save_rootset(&rs, &p, fmt).unwrap();
            let back = load_rootset(&p).unwrap();
            prop_assert_eq!(back.degree(), pts.len());
            for (x, y) in back.points().iter().zip(&pts) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
            // save ∘ load reproduces the file byte for byte
            let bytes = std::fs::read(&p).unwrap();
            let p2 = dir.path().join(format!("again-{name}"));
            save_rootset(&back, &p2, fmt).unwrap();
            prop_assert_eq!(std::fs::read(&p2).unwrap(), bytes);
        }
    }
}
