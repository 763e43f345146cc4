use mandelroots::aberth::solve_ladder_with;
use mandelroots::analysis::real_root_table;
use mandelroots::{refine, NumericContext, PolynomialFamily, SolverConfig};

fn main() {
    let fam = PolynomialFamily::Mandelbrot;
    let cfg = SolverConfig::default();
    for top in [16, 15] {
        solve_ladder_with(&fam, top, &cfg, |k, r| {
            if k < 6 {
                return;
            }
            let hp = refine(&r.roots, &fam, k, NumericContext::high(31).unwrap(), &cfg).unwrap();
            let t = real_root_table(&hp.roots, k, None).unwrap();
            let (j, g) = t.gamma_hat.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
            let over: Vec<usize> = t.gamma_hat.iter().enumerate().filter(|g| g.1.abs() >= 1.0).map(|g| g.0 + 1).collect();
            println!("k={k} n_r={} psi={:.4} at j={} gamma={g:.4} over={:?}", t.n_r, t.psi, j + 1, over);
            if k <= 7 {
                println!("  {:?}", t.gamma_hat);
            }
        })
        .unwrap();
    }
}
