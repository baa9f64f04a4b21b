//! Floating-point dynamics: escape-rate estimates of the Green functions,
//! bounded-orbit classification and slice rasterization.

use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::automorphism::PolyMap;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("dimension mismatch: map acts on C^{expected}, point has {got} coordinates")]
    Dimension { expected: usize, got: usize },
    #[error("degree {0} is below 2")]
    Degree(u32),
    #[error("orbit overflowed at iteration {0} before reaching the escape radius")]
    Overflow(u32),
    #[error("invalid slice: {0}")]
    Slice(String),
}

/// A polynomial map compiled to complex-double term lists.
#[derive(Debug, Clone)]
pub struct FloatMap {
    dim: usize,
    degree: u32,
    max_exp: Vec<u32>,
    components: Vec<Vec<(Vec<u32>, Complex64)>>,
}

impl FloatMap {
    pub fn new(dim: usize, components: Vec<Vec<(Vec<u32>, Complex64)>>) -> Self {
        let mut max_exp = vec![0; dim];
        let mut degree = 0;
        for (e, _) in components.iter().flatten() {
            assert_eq!(e.len(), dim, "exponent vector length");
            for (m, &x) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(x);
            }
            degree = degree.max(e.iter().sum());
        }
        Self {
            dim,
            degree,
            max_exp,
            components,
        }
    }

    pub fn from_polymap(f: &PolyMap) -> Self {
        let comps = f
            .components()
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(m, c)| (m.exponents().to_vec(), c.to_complex64()))
                    .collect()
            })
            .collect();
        Self::new(f.dim(), comps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .zip(&self.max_exp)
            .map(|(&x, &m)| {
                let mut p = Vec::with_capacity(m as usize + 1);
                p.push(Complex64::new(1.0, 0.0));
                for i in 0..m as usize {
                    p.push(p[i] * x);
                }
                p
            })
            .collect();
        self.components
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|(e, c)| {
                        e.iter()
                            .enumerate()
                            .fold(*c, |acc, (i, &k)| acc * powers[i][k as usize])
                    })
                    .sum()
            })
            .collect()
    }
}

/// `x ↦ L x + t` over complex doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatAffine {
    pub linear: Vec<Vec<Complex64>>,
    pub translation: Vec<Complex64>,
}

impl FloatAffine {
    pub fn diagonal(d: &[Complex64]) -> Self {
        let k = d.len();
        let mut linear = vec![vec![Complex64::new(0.0, 0.0); k]; k];
        for i in 0..k {
            linear[i][i] = d[i];
        }
        Self {
            linear,
            translation: vec![Complex64::new(0.0, 0.0); k],
        }
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.linear
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| row.iter().zip(z).map(|(a, x)| a * x).sum::<Complex64>() + t)
            .collect()
    }
}

/// Euclidean norm, scaled so that large coordinates do not overflow.
pub fn norm(z: &[Complex64]) -> f64 {
    let m = z.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * z.iter().map(|c| (c.norm() / m).powi(2)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenEstimate {
    pub value: f64,
    pub iterations_used: u32,
    pub escaped: bool,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenOptions {
    pub radius: f64,
    pub max_iter: u32,
}

/// Orbits are stopped here even if the requested radius is larger.
pub const OVERFLOW_GUARD: f64 = 1e100;

/// `log 2 + d log(1 + 1/R)`.
pub fn distortion_constant(d: u32, radius: f64) -> f64 {
    std::f64::consts::LN_2 + d as f64 * (1.0 / radius).ln_1p()
}

/// Smallest power of ten `R` with `‖F(w)‖ ≥ 2‖w‖` on 10^4 random directions
/// at `‖w‖ = R`; `10^4` if none up to `10^12` works.
pub fn escape_radius(f: &FloatMap) -> f64 {
    const DIRECTIONS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0067_7265_656e);
    let dirs: Vec<Vec<Complex64>> = (0..DIRECTIONS)
        .map(|_| random_direction(&mut rng, f.dim()))
        .collect();
    for p in 0..=12 {
        let r = 10f64.powi(p);
        let ok = dirs.iter().all(|u| {
            let w: Vec<Complex64> = u.iter().map(|c| c * r).collect();
            norm(&f.eval(&w)) >= 2.0 * r
        });
        if ok {
            return r;
        }
    }
    1e4
}

fn random_direction(rng: &mut impl Rng, k: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..k)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let n = norm(&v);
    v.into_iter().map(|c| c / n).collect()
}

/// `count` points uniform in the ball `‖z‖ ≤ radius` of `C^k`.
pub fn sample_ball(k: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = random_direction(&mut rng, k);
            let s: f64 = rng.gen();
            let r = radius * s.powf(1.0 / (2 * k) as f64);
            u.into_iter().map(|c| c * r).collect()
        })
        .collect()
}

fn check_dim(f: &FloatMap, z: &[Complex64]) -> Result<(), GreenError> {
    if f.dim() != z.len() {
        return Err(GreenError::Dimension {
            expected: f.dim(),
            got: z.len(),
        });
    }
    Ok(())
}

/// First `n ≤ N` with `‖F^n(z)‖ > R`, and that iterate.
fn escape(
    f: &FloatMap,
    z: &[Complex64],
    opts: &GreenOptions,
) -> Result<(u32, Option<f64>), GreenError> {
    check_dim(f, z)?;
    let threshold = opts.radius.min(OVERFLOW_GUARD);
    let mut w = z.to_vec();
    let mut n = 0;
    loop {
        let r = norm(&w);
        if !r.is_finite() {
            return Err(GreenError::Overflow(n));
        }
        if r > threshold {
            return Ok((n, Some(r)));
        }
        if n == opts.max_iter {
            return Ok((n, None));
        }
        w = f.eval(&w);
        n += 1;
    }
}

/// `d^{-n} log‖F^n(z)‖` at the first iterate beyond the escape radius.
pub fn green_plus(
    f: &FloatMap,
    d: u32,
    z: &[Complex64],
    opts: &GreenOptions,
) -> Result<GreenEstimate, GreenError> {
    if d < 2 {
        return Err(GreenError::Degree(d));
    }
    let (n, r) = escape(f, z, opts)?;
    let scale = (d as f64).powi(-(n as i32));
    Ok(match r {
        Some(r) => GreenEstimate {
            value: scale * r.ln(),
            iterations_used: n,
            escaped: true,
            error_bound: distortion_constant(d, opts.radius) * scale,
        },
        None => GreenEstimate {
            value: 0.0,
            iterations_used: n,
            escaped: false,
            error_bound: scale * opts.radius.ln(),
        },
    })
}

/// The same estimate for the inverse map and its degree.
pub fn green_minus(
    f_inv: &FloatMap,
    delta: u32,
    z: &[Complex64],
    opts: &GreenOptions,
) -> Result<GreenEstimate, GreenError> {
    green_plus(f_inv, delta, z, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    Bounded(u32),
    Escaped(u32),
}

pub fn k_membership(
    f: &FloatMap,
    opts: &GreenOptions,
    z: &[Complex64],
) -> Result<Membership, GreenError> {
    let (n, r) = escape(f, z, opts)?;
    Ok(match r {
        Some(_) => Membership::Escaped(n),
        None => Membership::Bounded(n),
    })
}

/// Per-sample `|G(F(z)) − d·G(z)|` minus both error bounds, floored at 0.
///
/// Both estimates use the map's own degree, and `F(z)` gets one iteration
/// fewer so the two orbits stop at the same point; `d` is only the factor
/// being tested.
pub fn invariance_residuals(
    f: &FloatMap,
    d: u32,
    samples: &[Vec<Complex64>],
    opts: &GreenOptions,
) -> Result<Vec<f64>, GreenError> {
    let deg = f.degree();
    let shifted = GreenOptions {
        max_iter: opts.max_iter.saturating_sub(1),
        ..*opts
    };
    samples
        .iter()
        .map(|z| {
            let g = green_plus(f, deg, z, opts)?;
            let gf = green_plus(f, deg, &f.eval(z), &shifted)?;
            let r = (gf.value - d as f64 * g.value).abs() - g.error_bound - gf.error_bound;
            Ok(r.max(0.0))
        })
        .collect()
}

pub fn invariance_residual(
    f: &FloatMap,
    d: u32,
    samples: &[Vec<Complex64>],
    opts: &GreenOptions,
) -> Result<f64, GreenError> {
    Ok(invariance_residuals(f, d, samples, opts)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Affine 2-D slice `base + u·dir_u + v·dir_v` sampled at pixel centres;
/// row 0 is the top (`v` near `v_max`).
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec {
    pub base: Vec<Complex64>,
    pub dir_u: Vec<Complex64>,
    pub dir_v: Vec<Complex64>,
    /// `(u_min, u_max, v_min, v_max)`.
    pub window: (f64, f64, f64, f64),
    pub width: usize,
    pub height: usize,
}

impl SliceSpec {
    pub fn validate(&self, k: usize) -> Result<(), GreenError> {
        let bad = |m: &str| Err(GreenError::Slice(m.to_string()));
        if self.base.len() != k || self.dir_u.len() != k || self.dir_v.len() != k {
            return bad("vectors must have one entry per coordinate");
        }
        if self.width == 0 || self.height == 0 {
            return bad("resolution must be positive");
        }
        let (u0, u1, v0, v1) = self.window;
        if !(u0 < u1 && v0 < v1) {
            return bad("window must satisfy u_min < u_max and v_min < v_max");
        }
        let nu = norm(&self.dir_u);
        let nv = norm(&self.dir_v);
        let inner: Complex64 = self
            .dir_u
            .iter()
            .zip(&self.dir_v)
            .map(|(a, b)| a.conj() * b)
            .sum();
        if nu == 0.0 || nv == 0.0 || inner.norm() >= nu * nv * (1.0 - 1e-12) {
            return bad("directions must be linearly independent");
        }
        Ok(())
    }

    pub fn point(&self, row: usize, col: usize) -> Vec<Complex64> {
        let (u0, u1, v0, v1) = self.window;
        let u = u0 + (col as f64 + 0.5) * (u1 - u0) / self.width as f64;
        let v = v1 - (row as f64 + 0.5) * (v1 - v0) / self.height as f64;
        (0..self.base.len())
            .map(|i| self.base[i] + self.dir_u[i] * u + self.dir_v[i] * v)
            .collect()
    }
}

/// Row-major grid of estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<GreenEstimate>,
}

impl Grid {
    pub fn get(&self, row: usize, col: usize) -> &GreenEstimate {
        &self.cells[row * self.width + col]
    }

    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "row,col,value,iterations,escaped")?;
        for (idx, c) in self.cells.iter().enumerate() {
            writeln!(
                out,
                "{},{},{:e},{},{}",
                idx / self.width,
                idx % self.width,
                c.value,
                c.iterations_used,
                c.escaped
            )?;
        }
        Ok(())
    }

    /// Binary greymap with `g = round(255·min(value/v_cap, 1))`.
    pub fn write_pgm(&self, v_cap: f64, mut out: impl Write) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self
            .cells
            .iter()
            .map(|c| (255.0 * (c.value / v_cap).min(1.0)).round() as u8)
            .collect();
        out.write_all(&bytes)
    }
}

pub fn raster_slice(
    f: &FloatMap,
    d: u32,
    spec: &SliceSpec,
    opts: &GreenOptions,
) -> Result<Grid, GreenError> {
    spec.validate(f.dim())?;
    let cells = (0..spec.width * spec.height)
        .into_par_iter()
        .map(|idx| green_plus(f, d, &spec.point(idx / spec.width, idx % spec.width), opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Grid {
        width: spec.width,
        height: spec.height,
        cells,
    })
}
