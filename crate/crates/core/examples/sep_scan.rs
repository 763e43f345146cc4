use mandelroots::aberth::solve_ladder_with;
use mandelroots::analysis::sep_report;
use mandelroots::{PolynomialFamily, SolverConfig};
use num_complex::Complex64;

// usage: sep_scan <re> <im> <k_max>
fn main() {
    let a: Vec<String> = std::env::args().collect();
    let c = Complex64::new(a[1].parse().unwrap(), a[2].parse().unwrap());
    let top: u32 = a[3].parse().unwrap();
    let fam = PolynomialFamily::QuadraticComposition(c);
    let mut seps = std::collections::BTreeMap::new();
    for t in [top, top - 1] {
        solve_ladder_with(&fam, t, &SolverConfig::default(), |k, r| {
            let s = sep_report(&r.roots, k).unwrap();
            let (i, j) = s.pair;
            seps.insert(k, (s.sep, r.roots.points()[i], r.roots.points()[j], r.record.sweeps_total()));
        })
        .unwrap();
    }
    let mut prev = None;
    for (k, (s, x, y, sw)) in seps {
        let ratio = prev.map(|p: f64| p / s).unwrap_or(f64::NAN);
        println!("k={k} sweeps={sw} sep={s:.5e} ratio={ratio:.4} pair {x:.6} {y:.6}");
        prev = Some(s);
    }
}
