//! Quadrature on the reference triangle `(0,0), (1,0), (0,1)`.
//!
//! Degrees 1 through 8 use fully symmetric Gauss rules with positive weights
//! and interior points. Degrees 9 and 10 fall back to a collapsed
//! (Duffy-mapped) tensor product of Gauss-Legendre rules.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 10;

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    exactness_degree: usize,
}

impl QuadratureRule {
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Weights sum to the reference area `1/2`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Approximates the reference-triangle integral of `f`.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// Symmetry orbits in barycentric coordinates; weights normalized to sum 1.
enum Orbit {
    Centroid(f64),
    /// `(a, a, 1 - 2a)` and its rotations.
    Three(f64, f64),
    /// All six permutations of `(a, b, 1 - a - b)`.
    Six(f64, f64, f64),
}

use Orbit::*;

// Refined to full double precision by Newton iteration on the moment equations.
const DEG4: &[Orbit] = &[
    Three(0.445_948_490_915_964_886, 0.223_381_589_678_011_466),
    Three(0.091_576_213_509_770_743, 0.109_951_743_655_321_868),
];
const DEG5: &[Orbit] = &[
    Centroid(0.225),
    Three(0.470_142_064_105_115_090, 0.132_394_152_788_506_181),
    Three(0.101_286_507_323_456_339, 0.125_939_180_544_827_153),
];
const DEG6: &[Orbit] = &[
    Three(0.249_286_745_170_910_421, 0.116_786_275_726_379_366),
    Three(0.063_089_014_491_502_228, 0.050_844_906_370_206_817),
    Six(
        0.310_352_451_033_784_405,
        0.053_145_049_844_816_947,
        0.082_851_075_618_373_575,
    ),
];
const DEG8: &[Orbit] = &[
    Centroid(0.144_315_607_677_787_168),
    Three(0.459_292_588_292_723_156, 0.095_091_634_267_284_625),
    Three(0.170_569_307_751_760_207, 0.103_217_370_534_718_250),
    Three(0.050_547_228_317_030_975, 0.032_458_497_623_198_080),
    Six(
        0.263_112_829_634_638_113,
        0.008_394_777_409_957_605,
        0.027_230_314_174_434_994,
    ),
];

fn expand(orbits: &[Orbit], degree: usize) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    // barycentric (l0, l1, l2) -> reference point (l1, l2)
    let mut push = |l: [f64; 3], w: f64| {
        points.push([l[1], l[2]]);
        weights.push(0.5 * w);
    };
    for orbit in orbits {
        match *orbit {
            Centroid(w) => push([1.0 / 3.0; 3], w),
            Three(a, w) => {
                let c = 1.0 - 2.0 * a;
                push([a, a, c], w);
                push([a, c, a], w);
                push([c, a, a], w);
            }
            Six(a, b, w) => {
                let c = 1.0 - a - b;
                for l in [
                    [a, b, c],
                    [b, a, c],
                    [a, c, b],
                    [c, a, b],
                    [b, c, a],
                    [c, b, a],
                ] {
                    push(l, w);
                }
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness_degree: degree,
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn collapsed(degree: usize) -> QuadratureRule {
    // x = u, y = v (1 - u), dx dy = (1 - u) du dv
    let n = (degree + 2).div_ceil(2);
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (&u, &wu) in x.iter().zip(&w) {
        for (&v, &wv) in x.iter().zip(&w) {
            points.push([u, v * (1.0 - u)]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness_degree: 2 * n - 2,
    }
}

/// Cheapest tabulated rule exact for polynomials of degree `min_degree`.
pub fn quadrature_rule(min_degree: usize) -> Result<QuadratureRule> {
    let rule = match min_degree {
        0 | 1 => expand(&[Centroid(1.0)], 1),
        // the 3-point degree-2 rule is not used: its saving is negligible and
        // the 6-point rule keeps cubic integrands exact
        2..=4 => expand(DEG4, 4),
        5 => expand(DEG5, 5),
        6 => expand(DEG6, 6),
        7 | 8 => expand(DEG8, 8),
        9 | 10 => collapsed(min_degree),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "no quadrature rule of degree {min_degree} (max {MAX_DEGREE})"
            )))
        }
    };
    Ok(rule)
}
