use gradflow::assembly::{assemble_load, assemble_mass, Assembler};
use gradflow::coeff::{sigma, DiffusionParams};
use gradflow::felib::{build_space, quadrature_rule, FeField, FeSpace};
use gradflow::mesh::build_mesh;
use gradflow::mms::forcing_g;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(m: usize, r: usize) -> FeSpace {
    build_space(build_mesh(m).unwrap(), r).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn project_off_constants(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

#[test]
fn mass_is_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in 1..=3 {
        let s = space(4, r);
        let m = assemble_mass(&s, &quadrature_rule(2 * r + 2).unwrap());
        for _ in 0..100 {
            let x = random_vec(&mut rng, s.ndof());
            assert!(m.quadratic_form(&x) > 0.0);
        }
    }
}

#[test]
fn stiffness_kernel_is_constants_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p = DiffusionParams::new(0.5).unwrap();
    for r in 1..=3 {
        let s = space(4, r);
        let asm = Assembler::new(&s, &quadrature_rule(2 * r + 2).unwrap());
        let frozen = FeField::new(s.clone(), random_vec(&mut rng, s.ndof())).unwrap();
        let k = asm.stiffness(&frozen, &p);
        for _ in 0..20 {
            let mut x = random_vec(&mut rng, s.ndof());
            project_off_constants(&mut x);
            assert!(k.quadratic_form(&x) > 0.0);
        }
    }
}

#[test]
fn frozen_coefficient_bounds_transfer() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (lambda, r, amp) in [(1.0, 1, 1.0), (0.2, 2, 3.0), (2.0, 3, 0.5), (0.5, 2, 10.0)] {
        let p = DiffusionParams::new(lambda).unwrap();
        let s = space(5, r);
        let rule = quadrature_rule(2 * r + 2).unwrap();
        let asm = Assembler::new(&s, &rule);
        let coeffs: Vec<f64> = random_vec(&mut rng, s.ndof())
            .iter()
            .map(|v| amp * v)
            .collect();
        let frozen = FeField::new(s.clone(), coeffs).unwrap();

        let mut sigma_min = f64::INFINITY;
        for t in 0..s.num_cells() {
            for g in frozen.eval_at_quad(t, &rule).unwrap().gradients {
                sigma_min = sigma_min.min(sigma(&p, g[0] * g[0] + g[1] * g[1]).unwrap());
            }
        }
        let lower = lambda * lambda * sigma_min.powi(3);
        let k = asm.stiffness(&frozen, &p);
        let k0 = asm.laplacian();
        for _ in 0..50 {
            let mut x = random_vec(&mut rng, s.ndof());
            project_off_constants(&mut x);
            let (q, q0) = (k.quadratic_form(&x), k0.quadratic_form(&x));
            assert!(
                lower * q0 <= q * (1.0 + 1e-12),
                "lambda={lambda}: {q} vs lower {}",
                lower * q0
            );
            assert!(
                q <= q0 / lambda * (1.0 + 1e-12),
                "lambda={lambda}: {q} vs upper {}",
                q0 / lambda
            );
        }
    }
}

/// Trapezoidal rule on the unit square; spectrally accurate for the
/// manufactured forcing, which extends to a smooth 1-periodic function.
fn periodic_trapezoid<F: Fn(f64, f64) -> f64>(f: F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += f(i as f64 * h, j as f64 * h);
        }
    }
    total * h * h
}

#[test]
fn manufactured_load_total_matches_refined_integral() {
    let p = DiffusionParams::new(1.0).unwrap();
    let t1 = 0.1;
    let g = |x: f64, y: f64| forcing_g(&p, x, y, t1);
    let reference = periodic_trapezoid(g, 400);
    assert!((reference - periodic_trapezoid(g, 200)).abs() < 1e-13);
    let s = space(32, 2);
    let b = assemble_load(&s, &quadrature_rule(6).unwrap(), g);
    let total: f64 = b.iter().sum();
    assert!((total - reference).abs() < 1e-8, "{total} vs {reference}");
}
