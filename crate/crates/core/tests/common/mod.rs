//! Independent oracles shared by the integration tests.

#![allow(dead_code, clippy::excessive_precision)]

use nalgebra::DMatrix;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const CUBIC: [Complex64; 3] = [
    Complex64::new(-1.75487766624669276, 0.0),
    Complex64::new(-0.12256116687665361998, 0.74486176661974423659),
    Complex64::new(-0.12256116687665361998, -0.74486176661974423659),
];


/// Integer coefficients of p_k, constant term first.
pub fn mandelbrot_coeffs(k: u32) -> Vec<f64> {
    let mut p: Vec<i64> = vec![1];
    for _ in 0..k {
        let mut sq = vec![0i64; 2 * p.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in p.iter().enumerate() {
                sq[i + j] += a * b;
            }
        }
        let mut next = vec![0i64; sq.len() + 1];
        next[0] = 1;
        for (i, s) in sq.iter().enumerate() {
            next[i + 1] += s;
        }
        p = next;
    }
    p.into_iter().map(|x| x as f64).collect()
}

pub fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = c(0.0, 0.0);
    let mut d = c(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        d = d * z + p;
        p = p * z + a;
    }
    (p, d)
}

pub fn companion_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| {
            // two Newton polishing steps on the monomial form
            let mut z = Complex64::new(z.re, z.im);
            for _ in 0..2 {
                let (p, d) = horner(coeffs, z);
                z -= p / d;
            }
            z
        })
        .collect()
}

pub fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, &y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}
