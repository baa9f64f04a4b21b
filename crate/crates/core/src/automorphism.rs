//! Polynomial self-maps of C^k: composition, iteration, inverse checks,
//! indeterminacy data at infinity and the regularity report.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg;
use crate::poly::{default_names, Budget, Monomial, Poly, PolyError, Polynomial};
use crate::scalar::{GaussianRational, Ring};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("a map of C^{k} needs {k} components in {k} variables")]
    Malformed { k: usize },
    #[error("constant map has no indeterminacy data")]
    ConstantMap,
    #[error("degree {0}, not Hénon–Sibony")]
    NotRegular(i64),
    #[error("no inverse supplied")]
    MissingInverse,
    #[error("claimed inverse does not compose to the identity")]
    InverseNotVerified,
}

/// A polynomial map `C^k -> C^k`, optionally paired with a claimed inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMap<C: Ring = GaussianRational> {
    components: Vec<Poly<C>>,
    claimed_inverse: Option<Box<PolyMap<C>>>,
}

impl<C: Ring> PolyMap<C> {
    pub fn new(components: Vec<Poly<C>>) -> Result<Self, MapError> {
        let k = components.len();
        if components.iter().any(|p| p.nvars() != k) {
            return Err(MapError::Malformed { k });
        }
        Ok(Self {
            components,
            claimed_inverse: None,
        })
    }

    pub fn with_inverse(mut self, inverse: PolyMap<C>) -> Result<Self, MapError> {
        if inverse.dim() != self.dim() {
            return Err(MapError::DimensionMismatch {
                left: self.dim(),
                right: inverse.dim(),
            });
        }
        self.claimed_inverse = Some(Box::new(inverse));
        Ok(self)
    }

    pub fn identity(k: usize, ctx: C::Ctx) -> Self {
        Self {
            components: (0..k).map(|i| Poly::var(k, i, ctx.clone())).collect(),
            claimed_inverse: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Poly<C>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Poly<C>> {
        self.components
    }

    pub fn claimed_inverse(&self) -> Option<&PolyMap<C>> {
        self.claimed_inverse.as_deref()
    }

    /// The same map without its claimed inverse.
    pub fn forget_inverse(&self) -> Self {
        Self {
            components: self.components.clone(),
            claimed_inverse: None,
        }
    }

    /// Algebraic degree: the maximum component degree.
    pub fn degree(&self) -> i64 {
        self.components.iter().map(Poly::degree).max().unwrap_or(-1)
    }

    pub fn is_identity(&self) -> bool {
        self.components.iter().enumerate().all(|(i, p)| {
            p.num_terms() == 1
                && p.leading()
                    .is_some_and(|(m, c)| c.is_one() && *m == Monomial::var(self.dim(), i))
        })
    }

    /// True when every component has degree at most one.
    pub fn is_affine(&self) -> bool {
        self.components.iter().all(|p| p.degree() <= 1)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self, budget: &Budget) -> Result<Self, MapError> {
        if self.dim() != other.dim() {
            return Err(MapError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let components = self
            .components
            .iter()
            .map(|p| p.substitute(&other.components, budget))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            components,
            claimed_inverse: None,
        })
    }

    /// `self^n`, with `self^0` the identity.
    pub fn iterate(&self, n: u32, budget: &Budget) -> Result<Self, MapError> {
        let ctx = self
            .components
            .first()
            .map(|p| p.coeff_ctx().clone())
            .ok_or(MapError::Malformed { k: 0 })?;
        let mut acc = Self::identity(self.dim(), ctx);
        for _ in 0..n {
            acc = self.compose(&acc, budget)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, point: &[C]) -> Result<Vec<C>, MapError> {
        self.components
            .iter()
            .map(|p| p.eval(point).map_err(MapError::from))
            .collect()
    }

    pub fn render(&self, names: &[String], param_names: &[String]) -> String {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|p| p.render(names, param_names))
            .collect();
        format!("({})", parts.join(", "))
    }
}

impl PolyMap {
    pub fn eval_float(&self, point: &[Complex64]) -> Result<Vec<Complex64>, MapError> {
        self.components
            .iter()
            .map(|p| p.eval_float(point).map_err(MapError::from))
            .collect()
    }

    /// The claimed inverse, after checking it composes to the identity in
    /// both orders.
    pub fn verified_inverse(&self, budget: &Budget) -> Result<&PolyMap, MapError> {
        let inv = self.claimed_inverse().ok_or(MapError::MissingInverse)?;
        if verify_inverse(self, inv, budget)? {
            Ok(inv)
        } else {
            Err(MapError::InverseNotVerified)
        }
    }

    /// The claimed inverse as the forward map, with `self` as its inverse.
    pub fn inverted(&self) -> Result<PolyMap, MapError> {
        let inv = self.claimed_inverse().ok_or(MapError::MissingInverse)?;
        inv.forget_inverse().with_inverse(self.forget_inverse())
    }
}

impl std::fmt::Display for PolyMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render(&default_names(self.dim()), &[]))
    }
}

/// True iff `f ∘ g` and `g ∘ f` are both exactly the identity.
pub fn verify_inverse(f: &PolyMap, g: &PolyMap, budget: &Budget) -> Result<bool, MapError> {
    if f.dim() != g.dim() {
        return Err(MapError::DimensionMismatch {
            left: f.dim(),
            right: g.dim(),
        });
    }
    // cheap rejection: compositions of the identity keep degree one
    if (f.degree() > 1) != (g.degree() > 1) {
        return Ok(false);
    }
    Ok(f.compose(g, budget)?.is_identity() && g.compose(f, budget)?.is_identity())
}

/// Homogeneous forms whose common zeros on the hyperplane at infinity make
/// up an indeterminacy set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousSystem {
    pub nvars: usize,
    /// Algebraic degree of the map the forms came from.
    pub map_degree: i64,
    pub forms: Vec<Polynomial>,
}

impl HomogeneousSystem {
    /// Degree-one maps extend to automorphisms of projective space.
    pub fn is_linear(&self) -> bool {
        self.map_degree <= 1
    }

    /// When every form is a pure power of one variable, the zero set is
    /// the coordinate subspace where those variables vanish; returns their
    /// indices. `None` if the zero set is not syntactically of that shape.
    pub fn coordinate_zero_set(&self) -> Option<Vec<usize>> {
        if self.forms.is_empty() {
            return None;
        }
        let mut vars = Vec::new();
        for f in &self.forms {
            if f.num_terms() != 1 {
                return None;
            }
            let (m, _) = f.leading().unwrap();
            let support: Vec<usize> = m.support().collect();
            if support.len() != 1 {
                return None;
            }
            vars.push(support[0]);
        }
        vars.sort_unstable();
        vars.dedup();
        Some(vars)
    }

    pub fn render(&self, names: &[String]) -> Vec<String> {
        self.forms.iter().map(|f| f.render(names, &[])).collect()
    }
}

/// Top-degree parts of the components that attain the map's degree.
///
/// Lower-degree components are dominated on the hyperplane at infinity and
/// impose no condition there.
pub fn indeterminacy_forms(f: &PolyMap) -> Result<HomogeneousSystem, MapError> {
    let d = f.degree();
    if d <= 0 {
        return Err(MapError::ConstantMap);
    }
    let forms = if d == 1 {
        Vec::new()
    } else {
        f.components()
            .iter()
            .filter(|p| p.degree() == d)
            .map(|p| p.homogeneous_part(d as u32))
            .collect()
    };
    Ok(HomogeneousSystem {
        nvars: f.dim(),
        map_degree: d,
        forms,
    })
}

/// All exponent vectors of total degree `deg` in `nvars` variables.
pub fn monomials_of_degree(nvars: usize, deg: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            rec(nvars, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, deg, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Whether the forms of `a` and `b` together have only the trivial common
/// zero in C^k.
///
/// For each degree `D` from the largest form degree up to the Macaulay
/// bound `sum(deg) - #forms + 1`, the degree-`D` piece of the generated
/// ideal is spanned by monomial multiples of the forms; if it ever has
/// full dimension `C(D+k-1, k-1)` the only common zero is the origin.
pub fn projective_disjointness(a: &HomogeneousSystem, b: &HomogeneousSystem) -> bool {
    let k = a.nvars.max(b.nvars);
    let forms: Vec<&Polynomial> = a
        .forms
        .iter()
        .chain(&b.forms)
        .filter(|f| !f.is_zero())
        .collect();
    if forms.iter().any(|f| f.is_constant()) {
        return true;
    }
    // fewer than k forms always cut out a positive-dimensional cone
    if forms.len() < k || k == 0 {
        return false;
    }
    let degs: Vec<u32> = forms.iter().map(|f| f.degree() as u32).collect();
    let max_deg = *degs.iter().max().unwrap();
    let bound = degs.iter().sum::<u32>() + 1 - forms.len() as u32;
    (max_deg..=bound.max(max_deg)).any(|deg| graded_piece_is_full(&forms, &degs, k, deg))
}

fn graded_piece_is_full(forms: &[&Polynomial], degs: &[u32], k: usize, deg: u32) -> bool {
    let basis = monomials_of_degree(k, deg);
    let target = binomial(deg as u64 + k as u64 - 1, k as u64 - 1) as usize;
    debug_assert_eq!(basis.len(), target);
    let index: HashMap<&[u32], usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_slice(), i))
        .collect();
    let mut rows = Vec::new();
    for (f, &fd) in forms.iter().zip(degs) {
        for mult in monomials_of_degree(k, deg - fd) {
            let shifted = f.mul_monomial(&Monomial::new(mult));
            let mut row = vec![GaussianRational::zero(); target];
            for (m, c) in shifted.terms() {
                row[index[m.exponents()]] = c.clone();
            }
            rows.push(row);
        }
    }
    if rows.len() < target {
        return false;
    }
    linalg::rank(rows, target) == target
}

/// Regularity data of a polynomial automorphism with verified inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityReport {
    pub k: usize,
    pub d: i64,
    pub delta: i64,
    /// The integer `1 <= s <= k-1` with `d^s = delta^(k-s)`, if any.
    pub s: Option<u32>,
    pub degree_identity_holds: bool,
    pub indeterminacy_disjoint: bool,
    pub iplus_forms: HomogeneousSystem,
    pub iminus_forms: HomogeneousSystem,
}

#[derive(Serialize)]
struct ReportJson {
    k: usize,
    d: i64,
    delta: i64,
    s: Option<u32>,
    degree_identity_holds: bool,
    indeterminacy_disjoint: bool,
    regular: bool,
    predicted_dim_iplus: Option<i64>,
    predicted_dim_iminus: Option<i64>,
    iplus_forms: Vec<String>,
    iminus_forms: Vec<String>,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.degree_identity_holds && self.indeterminacy_disjoint
    }

    /// Predicted dimensions of `I^+` and `I^-`: `k-s-1` and `s-1`.
    /// These follow from `s` and are not computed independently.
    pub fn predicted_dims(&self) -> Option<(i64, i64)> {
        self.s
            .map(|s| (self.k as i64 - s as i64 - 1, s as i64 - 1))
    }

    fn json_view(&self, names: &[String]) -> ReportJson {
        let dims = self.predicted_dims();
        ReportJson {
            k: self.k,
            d: self.d,
            delta: self.delta,
            s: self.s,
            degree_identity_holds: self.degree_identity_holds,
            indeterminacy_disjoint: self.indeterminacy_disjoint,
            regular: self.is_regular(),
            predicted_dim_iplus: dims.map(|d| d.0),
            predicted_dim_iminus: dims.map(|d| d.1),
            iplus_forms: self.iplus_forms.render(names),
            iminus_forms: self.iminus_forms.render(names),
        }
    }

    pub fn to_json(&self, names: &[String]) -> serde_json::Value {
        serde_json::to_value(self.json_view(names)).expect("report serializes")
    }

    /// Stable `key: value` text block.
    pub fn to_text(&self, names: &[String]) -> String {
        let v = self.json_view(names);
        let opt = |o: Option<i64>| o.map_or("none".to_string(), |x| x.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "k: {}", v.k);
        let _ = writeln!(out, "d: {}", v.d);
        let _ = writeln!(out, "delta: {}", v.delta);
        let _ = writeln!(out, "s: {}", opt(v.s.map(i64::from)));
        let _ = writeln!(out, "degree_identity_holds: {}", v.degree_identity_holds);
        let _ = writeln!(out, "indeterminacy_disjoint: {}", v.indeterminacy_disjoint);
        let _ = writeln!(out, "regular: {}", v.regular);
        let _ = writeln!(out, "predicted_dim_iplus: {}", opt(v.predicted_dim_iplus));
        let _ = writeln!(out, "predicted_dim_iminus: {}", opt(v.predicted_dim_iminus));
        let _ = writeln!(out, "iplus_forms: [{}]", v.iplus_forms.join(", "));
        let _ = writeln!(out, "iminus_forms: [{}]", v.iminus_forms.join(", "));
        out
    }
}

/// The unique `1 <= s <= k-1` with `d^s = delta^(k-s)`.
pub fn degree_identity_exponent(k: usize, d: i64, delta: i64) -> Option<u32> {
    if d < 2 || delta < 2 || k < 2 {
        return None;
    }
    let d = BigUint::from(d as u64);
    let delta = BigUint::from(delta as u64);
    (1..k as u32).find(|&s| d.pow(s) == delta.pow(k as u32 - s))
}

pub fn regularity_report(f: &PolyMap, budget: &Budget) -> Result<RegularityReport, MapError> {
    let inv = f.verified_inverse(budget)?;
    let d = f.degree();
    let delta = inv.degree();
    if d <= 1 || delta <= 1 {
        return Err(MapError::NotRegular(d.min(delta)));
    }
    let iplus = indeterminacy_forms(f)?;
    let iminus = indeterminacy_forms(inv)?;
    let s = degree_identity_exponent(f.dim(), d, delta);
    Ok(RegularityReport {
        k: f.dim(),
        d,
        delta,
        s,
        degree_identity_holds: s.is_some(),
        indeterminacy_disjoint: projective_disjointness(&iplus, &iminus),
        iplus_forms: iplus,
        iminus_forms: iminus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: usize, i: usize) -> Polynomial {
        Polynomial::x(k, i)
    }

    fn sq(p: &Polynomial) -> Polynomial {
        p * p
    }

    /// (y + x^2, z + y^2, x) and its inverse.
    fn cubic_example() -> PolyMap {
        let f = PolyMap::new(vec![
            &x(3, 1) + &sq(&x(3, 0)),
            &x(3, 2) + &sq(&x(3, 1)),
            x(3, 0),
        ])
        .unwrap();
        let u = &x(3, 0) - &sq(&x(3, 2));
        let inv = PolyMap::new(vec![x(3, 2), u.clone(), &x(3, 1) - &sq(&u)]).unwrap();
        f.with_inverse(inv).unwrap()
    }

    fn henon(c: i64) -> PolyMap {
        let cc = Polynomial::from_int(2, c);
        let h = PolyMap::new(vec![x(2, 1), &(&sq(&x(2, 1)) + &cc) - &x(2, 0)]).unwrap();
        let inv = PolyMap::new(vec![&(&sq(&x(2, 0)) + &cc) - &x(2, 1), x(2, 0)]).unwrap();
        h.with_inverse(inv).unwrap()
    }

    #[test]
    fn compose_with_inverse_and_identity() {
        let f = cubic_example();
        let b = Budget::default();
        let inv = f.claimed_inverse().unwrap();
        assert!(f.compose(inv, &b).unwrap().is_identity());
        let id = PolyMap::identity(3, ());
        assert_eq!(f.forget_inverse().compose(&id, &b).unwrap(), f.forget_inverse());
        assert_eq!(f.compose(&f, &b).unwrap().degree(), 4);
    }

    #[test]
    fn iterate_basics() {
        let f = cubic_example().forget_inverse();
        let b = Budget::default();
        assert!(f.iterate(0, &b).unwrap().is_identity());
        assert_eq!(f.iterate(2, &b).unwrap(), f.compose(&f, &b).unwrap());
        for n in 1..=4 {
            assert_eq!(f.iterate(n, &b).unwrap().degree(), 1 << n);
        }
    }

    #[test]
    fn iterate_respects_budget() {
        let f = cubic_example();
        let inv = f.claimed_inverse().unwrap();
        let b = Budget {
            max_degree: 64,
            max_terms: 1_000_000,
        };
        // (F^{-1})^4 would have degree 256
        assert!(inv.iterate(3, &b).is_ok());
        assert!(matches!(
            inv.iterate(4, &b),
            Err(MapError::Poly(PolyError::BudgetExceeded(_)))
        ));
    }

    #[test]
    fn verify_inverse_cases() {
        let f = cubic_example();
        let b = Budget::default();
        assert!(verify_inverse(&f, f.claimed_inverse().unwrap(), &b).unwrap());
        assert!(!verify_inverse(&f, &f, &b).unwrap());
        let id = PolyMap::identity(3, ());
        assert!(verify_inverse(&id, &id, &b).unwrap());
    }

    #[test]
    fn indeterminacy_of_cubic_example() {
        let f = cubic_example();
        let plus = indeterminacy_forms(&f).unwrap();
        assert_eq!(plus.forms, vec![sq(&x(3, 0)), sq(&x(3, 1))]);
        assert_eq!(plus.coordinate_zero_set(), Some(vec![0, 1]));
        let minus = indeterminacy_forms(f.claimed_inverse().unwrap()).unwrap();
        assert_eq!(minus.forms, vec![-sq(&sq(&x(3, 2)))]);
        assert_eq!(minus.coordinate_zero_set(), Some(vec![2]));

        let lin = indeterminacy_forms(&PolyMap::identity(3, ())).unwrap();
        assert!(lin.is_linear() && lin.forms.is_empty());
    }

    #[test]
    fn constant_map_has_no_forms() {
        let c = PolyMap::new(vec![Polynomial::from_int(1, 3)]).unwrap();
        assert_eq!(indeterminacy_forms(&c), Err(MapError::ConstantMap));
    }

    #[test]
    fn disjointness_examples() {
        let sys = |k: usize, forms: Vec<Polynomial>| HomogeneousSystem {
            nvars: k,
            map_degree: 2,
            forms,
        };
        let a = sys(3, vec![sq(&x(3, 0)), sq(&x(3, 1))]);
        let b = sys(3, vec![-sq(&sq(&x(3, 2)))]);
        assert!(projective_disjointness(&a, &b));
        assert!(!projective_disjointness(
            &sys(3, vec![x(3, 0)]),
            &sys(3, vec![sq(&x(3, 0))])
        ));
        let all = sys(3, vec![x(3, 0), x(3, 1), x(3, 2)]);
        assert!(projective_disjointness(&all, &sys(3, vec![])));
        // x^2 - y^2, x*y in two variables: only the origin
        let c = sys(2, vec![&sq(&x(2, 0)) - &sq(&x(2, 1)), &x(2, 0) * &x(2, 1)]);
        assert!(projective_disjointness(&c, &sys(2, vec![])));
        // x^2 - y^2, (x - y)^2 share the line x = y
        let d = sys(2, vec![
            &sq(&x(2, 0)) - &sq(&x(2, 1)),
            sq(&(&x(2, 0) - &x(2, 1))),
        ]);
        assert!(!projective_disjointness(&d, &sys(2, vec![])));
    }

    #[test]
    fn report_for_cubic_example() {
        let r = regularity_report(&cubic_example(), &Budget::default()).unwrap();
        assert_eq!((r.k, r.d, r.delta, r.s), (3, 2, 4, Some(2)));
        assert!(r.degree_identity_holds && r.indeterminacy_disjoint && r.is_regular());
        assert_eq!(r.predicted_dims(), Some((0, 1)));
    }

    #[test]
    fn report_for_henon() {
        let r = regularity_report(&henon(1), &Budget::default()).unwrap();
        assert_eq!((r.k, r.d, r.delta, r.s), (2, 2, 2, Some(1)));
        assert!(r.indeterminacy_disjoint);
    }

    #[test]
    fn report_swaps_under_inversion() {
        let f = cubic_example();
        let b = Budget::default();
        let r = regularity_report(&f, &b).unwrap();
        let ri = regularity_report(&f.inverted().unwrap(), &b).unwrap();
        assert_eq!((ri.d, ri.delta), (r.delta, r.d));
        assert_eq!(ri.s, r.s.map(|s| r.k as u32 - s));
        assert_eq!(ri.indeterminacy_disjoint, r.indeterminacy_disjoint);
    }

    #[test]
    fn report_rejects_linear_and_missing_inverse() {
        let id = PolyMap::identity(3, ());
        let b = Budget::default();
        assert_eq!(regularity_report(&id, &b), Err(MapError::MissingInverse));
        let id = id.clone().with_inverse(id).unwrap();
        assert_eq!(regularity_report(&id, &b), Err(MapError::NotRegular(1)));
        let f = cubic_example().forget_inverse();
        let bad = f.clone().with_inverse(f).unwrap();
        assert_eq!(regularity_report(&bad, &b), Err(MapError::InverseNotVerified));
    }

    #[test]
    fn degree_identity_without_integer_solution() {
        assert_eq!(degree_identity_exponent(3, 2, 3), None);
        assert_eq!(degree_identity_exponent(4, 2, 2), Some(2));
    }

    #[test]
    fn monomial_enumeration_counts() {
        assert_eq!(monomials_of_degree(3, 2).len(), 6);
        assert_eq!(monomials_of_degree(4, 5).len(), binomial(8, 3) as usize);
        assert_eq!(monomials_of_degree(1, 7), vec![vec![7]]);
    }
}
