use mandelroots::aberth::solve_ladder_with;
use mandelroots::{PolynomialFamily, SolverConfig};

// usage: probe_ladder <k> <seed_offset> <base_rotation> [verbose]
fn main() {
    let args: Vec<String> = std::env::args().collect();
    let k: u32 = args[1].parse().unwrap();
    let cfg = SolverConfig {
        seed_offset: args[2].parse().unwrap(),
        base_rotation: args[3].parse().unwrap(),
        ..Default::default()
    };
    let verbose = args.len() > 4;
    let t = std::time::Instant::now();
    let mut line = String::new();
    let r = solve_ladder_with(&PolynomialFamily::Mandelbrot, k, &cfg, |k, r| {
        if verbose {
            println!("k={k} sweeps={} active={:?} t={:.2}", r.record.sweeps_total(), r.record.per_sweep_active(), t.elapsed().as_secs_f64());
        }
        line += &format!(" {k}:{}", r.record.sweeps_total());
    });
    println!("off={} rot={} {}{}", args[2], args[3], line, if r.is_err() { " ERR" } else { "" });
}
