#![allow(dead_code)]

use hsmaps_core::dsl;
use hsmaps_core::{GaussianRational, PolyMap, Polynomial};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn gr(re: (i64, i64), im: (i64, i64)) -> GaussianRational {
    &GaussianRational::from_ratio(re.0, re.1)
        + &(&GaussianRational::from_ratio(im.0, im.1) * &GaussianRational::i())
}

/// Small Gaussian rationals, half of them real.
pub fn coeff() -> impl Strategy<Value = GaussianRational> {
    let part = || (-9i64..=9, 1i64..=4);
    prop_oneof![
        part().prop_map(|r| gr(r, (0, 1))),
        (part(), part()).prop_map(|(r, i)| gr(r, i)),
    ]
}

pub fn exponents(nvars: usize, max_deg: u32) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0..=max_deg, nvars)
        .prop_filter("total degree", move |e| e.iter().sum::<u32>() <= max_deg)
}

pub fn poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((exponents(nvars, max_deg), coeff()), 0..5)
        .prop_map(move |terms| Polynomial::from_terms(nvars, (), terms))
}

pub fn point(nvars: usize) -> impl Strategy<Value = Vec<GaussianRational>> {
    proptest::collection::vec(coeff(), nvars)
}

/// Generalized Hénon map `(y, p(y) - x)` with its inverse `(p(x) - y, x)`.
pub fn henon_family(deg: u32) -> impl Strategy<Value = PolyMap> {
    (proptest::collection::vec(coeff(), deg as usize), 1i64..=3).prop_map(move |(low, lead)| {
        let mut terms: Vec<(Vec<u32>, GaussianRational)> = low
            .into_iter()
            .enumerate()
            .map(|(j, c)| (vec![j as u32], c))
            .collect();
        terms.push((vec![deg], GaussianRational::from_int(lead)));
        let p = Polynomial::from_terms(1, (), terms);
        henon_from(&p)
    })
}

pub fn henon_from(p: &Polynomial) -> PolyMap {
    let b = hsmaps_core::Budget::default();
    let x = Polynomial::x(2, 0);
    let y = Polynomial::x(2, 1);
    let py = p.substitute(std::slice::from_ref(&y), &b).unwrap();
    let px = p.substitute(std::slice::from_ref(&x), &b).unwrap();
    let f = PolyMap::new(vec![y.clone(), &py - &x]).unwrap();
    let g = PolyMap::new(vec![&px - &y, x]).unwrap();
    f.with_inverse(g).unwrap()
}

pub fn load(text: &str) -> PolyMap {
    dsl::parse(text).unwrap().to_polymap().unwrap()
}

pub fn cubic() -> PolyMap {
    load("map F(x, y, z) = (y + x^2, z + y^2, x) inverse = (z, x - z^2, y - (x - z^2)^2)")
}

pub fn henon() -> PolyMap {
    load("map h(x, y) = (y, y^2 + 1 - x) inverse = (x^2 + 1 - y, x)")
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
