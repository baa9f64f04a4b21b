//! Sparse multivariate polynomials over a [`Ring`] of coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by graded-lex monomials with no
//! zero coefficients stored, so two polynomials are equal exactly when
//! their maps are equal. The coefficient ring is either
//! [`GaussianRational`] or, for parametric work, a [`Polynomial`] in a
//! separate block of parameter variables (one level of nesting only).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::scalar::{GaussianRational, Ring};

/// Exact polynomial with Gaussian-rational coefficients.
pub type Polynomial = Poly<GaussianRational>;

/// Polynomial in the map variables whose coefficients are polynomials in
/// solver parameters.
pub type ParamPoly = Poly<Polynomial>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },
    #[error("arity mismatch: expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}

/// Limits on symbolic growth. Exact composition is exponential in the
/// number of iterations, so every composing operation checks these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_degree: u32,
    pub max_terms: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_degree: 256,
            max_terms: 1_000_000,
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self {
            max_degree: u32::MAX,
            max_terms: usize::MAX,
        }
    }

    fn check_terms(&self, n: usize) -> Result<(), PolyError> {
        if n > self.max_terms {
            return Err(PolyError::BudgetExceeded(format!(
                "{n} terms exceeds the term budget of {}",
                self.max_terms
            )));
        }
        Ok(())
    }

    fn check_degree(&self, d: u64) -> Result<(), PolyError> {
        if d > self.max_degree as u64 {
            return Err(PolyError::BudgetExceeded(format!(
                "degree bound {d} exceeds the degree budget of {}",
                self.max_degree
            )));
        }
        Ok(())
    }
}

/// Exponent vector, ordered graded-lexicographically with `x1 > x2 > ...`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Self) -> Self {
        Self(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.min(b))
                .collect(),
        )
    }

    /// Indices of variables with nonzero exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }

    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    names[i].clone()
                } else {
                    format!("{}^{}", names[i], e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Default variable names `x1, ..., xn`.
pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

#[derive(Clone, Debug)]
pub struct Poly<C: Ring> {
    nvars: usize,
    ctx: C::Ctx,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Ring> PartialEq for Poly<C> {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms
    }
}

impl<C: Ring> Eq for Poly<C> {}

impl<C: Ring> Ord for Poly<C> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.nvars
            .cmp(&other.nvars)
            .then_with(|| self.terms.iter().rev().cmp(other.terms.iter().rev()))
    }
}

impl<C: Ring> PartialOrd for Poly<C> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<C: Ring> Poly<C> {
    pub fn zero(nvars: usize, ctx: C::Ctx) -> Self {
        Self {
            nvars,
            ctx,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars, c.ctx());
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize, ctx: C::Ctx) -> Self {
        let c = C::one(&ctx);
        Self::constant(nvars, c)
    }

    pub fn var(nvars: usize, i: usize, ctx: C::Ctx) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let one = C::one(&ctx);
        let mut p = Self::zero(nvars, ctx);
        p.terms.insert(Monomial::var(nvars, i), one);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(nvars: usize, ctx: C::Ctx, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
    {
        let mut p = Self::zero(nvars, ctx);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = existing.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn coeff_ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    /// Terms from the leading (graded-lex largest) monomial down.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter().rev()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant term, or zero.
    pub fn constant_term(&self) -> C {
        self.terms
            .get(&Monomial::one(self.nvars))
            .cloned()
            .unwrap_or_else(|| C::zero(&self.ctx))
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .next_back()
            .map_or(-1, |m| m.degree() as i64)
    }

    /// Degree in a single variable; `-1` for zero.
    pub fn degree_in(&self, var: usize) -> i64 {
        self.terms
            .keys()
            .map(|m| m.0[var] as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Sum of the terms of the given total degree.
    pub fn homogeneous_part(&self, deg: u32) -> Self {
        let mut p = Self::zero(self.nvars, self.ctx.clone());
        for (m, c) in &self.terms {
            if m.degree() == deg {
                p.terms.insert(m.clone(), c.clone());
            }
        }
        p
    }

    /// Top-degree homogeneous component.
    pub fn homogeneous_top(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Err(PolyError::ZeroPolynomial);
        }
        Ok(self.homogeneous_part(self.degree() as u32))
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            Some(d) => degs.all(|e| e == d),
            None => true,
        }
    }

    /// Indices of variables that actually occur.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    fn check_same(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars != other.nvars {
            return Err(PolyError::VarCountMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.neg());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.mul_within(other, &Budget::unlimited())
    }

    /// Product, failing once the result would exceed `budget.max_terms`.
    pub fn mul_within(&self, other: &Self, budget: &Budget) -> Result<Self, PolyError> {
        self.check_same(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.nvars, self.ctx.clone()));
        }
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if m.is_one() {
                return Ok(other.scale(c));
            }
        }
        if other.terms.len() == 1 {
            let (m, c) = other.terms.iter().next().unwrap();
            if m.is_one() {
                return Ok(self.scale(c));
            }
        }
        let mut acc: HashMap<Monomial, C> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca.mul(cb);
                match acc.get_mut(&m) {
                    Some(e) => *e = e.add(&c),
                    None => {
                        acc.insert(m, c);
                        budget.check_terms(acc.len())?;
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Self {
            nvars: self.nvars,
            ctx: self.ctx.clone(),
            terms,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            nvars: self.nvars,
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.ctx.clone());
        }
        if c.is_one() {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), a.mul(c)))
            .filter(|(_, a)| !a.is_zero())
            .collect();
        Self {
            nvars: self.nvars,
            ctx: self.ctx.clone(),
            terms,
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            nvars: self.nvars,
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    /// Exact division by `m`; `None` unless `m` divides every term.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Self> {
        if !self.terms.keys().all(|k| m.divides(k)) {
            return None;
        }
        Some(Self {
            nvars: self.nvars,
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (m.quotient_of(k), c.clone()))
                .collect(),
        })
    }

    /// Greatest common monomial divisor of the terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.nvars),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    pub fn pow(&self, e: u32, budget: &Budget) -> Result<Self, PolyError> {
        if self.degree() > 0 {
            budget.check_degree(self.degree() as u64 * e as u64)?;
        }
        let mut acc = Self::one(self.nvars, self.ctx.clone());
        for _ in 0..e {
            acc = acc.mul_within(self, budget)?;
        }
        Ok(acc)
    }

    /// Replaces variable `i` by `maps[i]` for every `i`.
    ///
    /// Powers of each substituted polynomial are computed once and reused.
    /// The a-priori degree of the result (exponent-weighted sum of the
    /// substituted degrees) is checked against the budget before any work.
    pub fn substitute(&self, maps: &[Self], budget: &Budget) -> Result<Self, PolyError> {
        if maps.len() != self.nvars {
            return Err(PolyError::Arity {
                expected: self.nvars,
                got: maps.len(),
            });
        }
        let Some(first) = maps.first() else {
            // no variables: the polynomial is a constant in zero variables
            return Ok(self.clone());
        };
        let target = first.nvars;
        if let Some(bad) = maps.iter().find(|m| m.nvars != target) {
            return Err(PolyError::VarCountMismatch {
                left: target,
                right: bad.nvars,
            });
        }
        let map_degs: Vec<u64> = maps.iter().map(|m| m.degree().max(0) as u64).collect();
        let bound = self
            .terms
            .keys()
            .map(|m| m.0.iter().zip(&map_degs).map(|(&e, &d)| e as u64 * d).sum::<u64>())
            .max()
            .unwrap_or(0);
        budget.check_degree(bound)?;

        let mut powers: Vec<Vec<Self>> = maps
            .iter()
            .map(|m| vec![Self::one(target, m.ctx.clone())])
            .collect();
        let mut out = Self::zero(target, self.ctx.clone());
        for (mono, c) in self.terms.iter().rev() {
            let mut term = Self::constant(target, c.clone());
            for (i, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_within(&maps[i], budget)?;
                    powers[i].push(next);
                }
                term = term.mul_within(&powers[i][e as usize], budget)?;
            }
            for (m, c) in term.terms {
                out.add_term(m, c);
            }
            budget.check_terms(out.terms.len())?;
        }
        Ok(out)
    }

    /// Exact evaluation at a point of the coefficient ring.
    pub fn eval(&self, point: &[C]) -> Result<C, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::Arity {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = C::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (z, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t.mul(z);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Applies `f` to every coefficient, dropping results that vanish.
    pub fn map_coeffs<D: Ring>(&self, ctx: D::Ctx, mut f: impl FnMut(&C) -> D) -> Poly<D> {
        let mut p = Poly::<D>::zero(self.nvars, ctx);
        for (m, c) in &self.terms {
            let d = f(c);
            if !d.is_zero() {
                p.terms.insert(m.clone(), d);
            }
        }
        p
    }

    /// Like [`Self::map_coeffs`] with a fallible closure.
    pub fn try_map_coeffs<D: Ring, E>(
        &self,
        ctx: D::Ctx,
        mut f: impl FnMut(&C) -> Result<D, E>,
    ) -> Result<Poly<D>, E> {
        let mut p = Poly::<D>::zero(self.nvars, ctx);
        for (m, c) in &self.terms {
            let d = f(c)?;
            if !d.is_zero() {
                p.terms.insert(m.clone(), d);
            }
        }
        Ok(p)
    }

    /// Sum of the terms whose monomial satisfies `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&Monomial) -> bool) -> Self {
        Self {
            nvars: self.nvars,
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Canonical text with the given variable names (and parameter names
    /// for parametric coefficients).
    pub fn render(&self, names: &[String], param_names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let t = render_term(m, c, names, param_names);
            if idx == 0 {
                out.push_str(&t);
            } else if let Some(rest) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&t);
            }
        }
        out
    }
}

fn render_term<C: Ring>(m: &Monomial, c: &C, names: &[String], params: &[String]) -> String {
    if m.is_one() {
        let s = c.render(params);
        return if c.needs_parens() { format!("({s})") } else { s };
    }
    let mono = m.render(names);
    if c.is_one() {
        return mono;
    }
    if c.neg().is_one() {
        return format!("-{mono}");
    }
    let s = c.render(params);
    if c.needs_parens() {
        format!("({s})*{mono}")
    } else {
        format!("{s}*{mono}")
    }
}

impl<C: Ring> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&default_names(self.nvars), &[]))
    }
}

impl Polynomial {
    pub fn from_scalar(nvars: usize, c: GaussianRational) -> Self {
        Self::constant(nvars, c)
    }

    pub fn from_int(nvars: usize, n: i64) -> Self {
        Self::constant(nvars, GaussianRational::from_int(n))
    }

    pub fn x(nvars: usize, i: usize) -> Self {
        Self::var(nvars, i, ())
    }

    /// Double-precision evaluation: each variable's powers are built by
    /// repeated multiplication, then terms are summed from the leading
    /// monomial down.
    pub fn eval_float(&self, point: &[Complex64]) -> Result<Complex64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::Arity {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in self.terms.iter().rev() {
            let mut t = c.to_complex64();
            for (z, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= z;
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Divides by the leading coefficient so the leading term is monic.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some((_, c)) if !c.is_one() => self.scale(&c.inv().expect("nonzero leading")),
            _ => self.clone(),
        }
    }

    /// Lifts to a parametric polynomial with constant coefficients in
    /// `nparams` parameters.
    pub fn lift(&self, nparams: usize) -> ParamPoly {
        self.map_coeffs(nparams, |c| Polynomial::constant(nparams, c.clone()))
    }

    /// Reduces exponents of `var` modulo `var^n = c`.
    pub fn reduce_power(&self, var: usize, n: u32, c: &GaussianRational) -> Self {
        let mut out = Self::zero(self.nvars, ());
        for (m, coef) in &self.terms {
            let e = m.0[var];
            if e < n {
                out.add_term(m.clone(), coef.clone());
            } else {
                let mut mm = m.clone();
                mm.0[var] = e % n;
                out.add_term(mm, coef * &c.pow(e / n));
            }
        }
        out
    }
}

impl Ring for Polynomial {
    type Ctx = usize;

    fn zero(n: &usize) -> Self {
        Poly::zero(*n, ())
    }
    fn one(n: &usize) -> Self {
        Poly::one(*n, ())
    }
    fn ctx(&self) -> usize {
        self.nvars
    }
    fn from_scalar(c: &GaussianRational, n: &usize) -> Self {
        Poly::constant(*n, c.clone())
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .is_some_and(|(m, c)| m.is_one() && c.is_one())
    }
    fn add(&self, other: &Self) -> Self {
        self.checked_add(other).expect("parameter count mismatch")
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        self.checked_mul(other).expect("parameter count mismatch")
    }
    fn as_scalar(&self) -> Option<GaussianRational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }
    fn needs_parens(&self) -> bool {
        match self.terms.len() {
            0 => false,
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one() && c.needs_parens()
            }
            _ => true,
        }
    }
    fn render(&self, param_names: &[String]) -> String {
        let names = if param_names.len() == self.nvars {
            param_names.to_vec()
        } else {
            (1..=self.nvars).map(|i| format!("p{i}")).collect()
        };
        Poly::render(self, &names, &[])
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<C: Ring> std::ops::$tr<&Poly<C>> for &Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: &Poly<C>) -> Poly<C> {
                self.$checked(rhs).expect("variable count mismatch")
            }
        }
        impl<C: Ring> std::ops::$tr for Poly<C> {
            type Output = Poly<C>;
            fn $method(self, rhs: Poly<C>) -> Poly<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl<C: Ring> std::ops::Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly::neg(self)
    }
}

impl<C: Ring> std::ops::Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Polynomial {
        Polynomial::x(3, i)
    }

    fn c(n: i64) -> Polynomial {
        Polynomial::from_int(3, n)
    }

    fn gi() -> Polynomial {
        Polynomial::from_scalar(3, GaussianRational::i())
    }

    #[test]
    fn add_cancels_to_canonical_form() {
        let p = &(&x(0) * &x(0)) + &x(1);
        let q = -(&x(0) * &x(0));
        assert_eq!(&p + &q, x(1));
        assert_eq!(&p + &Polynomial::zero(3, ()), p);
    }

    #[test]
    fn add_by_hand_expansion() {
        let p = &x(1) + &(&x(0) * &x(0));
        let q = &x(2) + &(&x(1) * &x(1));
        assert_eq!((&p + &q).to_string(), "x1^2 + x2^2 + x2 + x3");
    }

    #[test]
    fn mul_square_and_gaussian_conjugates() {
        let z2 = &x(2) * &x(2);
        let a = &x(0) - &z2;
        let sq = &a * &a;
        assert_eq!(sq.to_string(), "x3^4 - 2*x1*x3^2 + x1^2");
        assert_eq!(&a * &c(1), a);

        let p = &x(0) + &(&gi() * &x(1));
        let q = &x(0) - &(&gi() * &x(1));
        assert_eq!(&p * &q, &(&x(0) * &x(0)) + &(&x(1) * &x(1)));
    }

    #[test]
    fn mismatch_is_an_error() {
        let p = Polynomial::x(2, 0);
        let q = Polynomial::x(3, 0);
        assert_eq!(
            p.checked_add(&q),
            Err(PolyError::VarCountMismatch { left: 2, right: 3 })
        );
        assert!(p.checked_mul(&q).is_err());
    }

    #[test]
    fn degree_and_top() {
        let p = &x(1) + &(&x(0) * &x(0));
        assert_eq!(p.degree(), 2);
        assert_eq!(c(5).degree(), 0);
        assert_eq!(Polynomial::zero(3, ()).degree(), -1);
        assert_eq!(p.homogeneous_top().unwrap(), &x(0) * &x(0));
        let q = &x(0) - &(&x(2) * &x(2));
        assert_eq!(q.homogeneous_top().unwrap(), -(&x(2) * &x(2)));
        let h = &x(0) * &x(1);
        assert_eq!(h.homogeneous_top().unwrap(), h);
        assert_eq!(
            Polynomial::zero(3, ()).homogeneous_top(),
            Err(PolyError::ZeroPolynomial)
        );
    }

    #[test]
    fn substitute_one_variable() {
        // x^2 with x -> y + x^2 in two variables
        let p = Polynomial::x(1, 0).pow(2, &Budget::default()).unwrap();
        let x2 = Polynomial::x(2, 0);
        let y2 = Polynomial::x(2, 1);
        let m = &y2 + &(&x2 * &x2);
        let r = p.substitute(&[m.clone()], &Budget::default()).unwrap();
        assert_eq!(r, &m * &m);
        assert_eq!(r.to_string(), "x1^4 + 2*x1^2*x2 + x2^2");
    }

    #[test]
    fn substitute_identity_and_inverse_middle_coordinate() {
        let p = &(&x(0) * &x(1)) + &x(2);
        let id = vec![x(0), x(1), x(2)];
        assert_eq!(p.substitute(&id, &Budget::default()).unwrap(), p);

        // middle coordinate of F^{-1} composed after F = (y + x^2, z + y^2, x)
        let f = vec![&x(1) + &(&x(0) * &x(0)), &x(2) + &(&x(1) * &x(1)), x(0)];
        let mid = &x(0) - &(&x(2) * &x(2));
        assert_eq!(mid.substitute(&f, &Budget::default()).unwrap(), x(1));
    }

    #[test]
    fn substitute_arity_error() {
        let p = x(0);
        assert_eq!(
            p.substitute(&[x(0)], &Budget::default()),
            Err(PolyError::Arity { expected: 3, got: 1 })
        );
    }

    #[test]
    fn budget_is_enforced() {
        let p = &x(0) * &x(0);
        let tight = Budget {
            max_degree: 3,
            max_terms: 1_000,
        };
        let m = vec![&x(0) * &x(0), x(1), x(2)];
        assert!(matches!(
            p.substitute(&m, &tight),
            Err(PolyError::BudgetExceeded(_))
        ));
    }

    #[test]
    fn exact_evaluation() {
        let g = |n: i64| GaussianRational::from_int(n);
        let p = &x(1) + &(&x(0) * &x(0));
        assert!(p.eval(&[g(0), g(0), g(0)]).unwrap().is_zero());
        let q = &x(0) - &(&x(2) * &x(2));
        assert_eq!(q.eval(&[g(2), g(0), g(1)]).unwrap(), g(1));
        assert!(q.eval(&[g(2)]).is_err());
    }

    #[test]
    fn rendering_with_complex_and_rational_coefficients() {
        let half = Polynomial::from_scalar(3, GaussianRational::from_ratio(1, 2));
        let z = GaussianRational::new(
            num_rational::BigRational::new(1.into(), 2.into()),
            num_rational::BigRational::new(3.into(), 1.into()),
        );
        let p = &(&half * &x(0)) + &Polynomial::from_scalar(3, z.clone());
        assert_eq!(p.to_string(), "1/2*x1 + (1/2+3*i)");
        let q = &(&Polynomial::from_scalar(3, -z) * &x(1)) - &(&gi() * &x(2));
        assert_eq!(q.to_string(), "(-1/2-3*i)*x2 - i*x3");
        assert_eq!(Polynomial::zero(2, ()).to_string(), "0");
    }

    #[test]
    fn reduce_power_modulo_root_of_unity() {
        let a = Polynomial::x(1, 0);
        let p = &a.pow(8, &Budget::default()).unwrap() - &a;
        assert!(p.reduce_power(0, 7, &GaussianRational::one()).is_zero());
    }

    #[test]
    fn float_eval_matches_exact() {
        let p = &(&x(0) * &x(0)) - &(&gi() * &x(1));
        let pt = [
            GaussianRational::from_ratio(7, 3),
            GaussianRational::from_ratio(-5, 2),
            GaussianRational::from_int(1),
        ];
        let exact = p.eval(&pt).unwrap().to_complex64();
        let fl: Vec<Complex64> = pt.iter().map(|g| g.to_complex64()).collect();
        let approx = p.eval_float(&fl).unwrap();
        assert!((exact - approx).norm() <= 1e-12 * exact.norm());
    }
}
