use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde_json::json;

use crate::poly::{Budget, Monomial, Polynomial};
use crate::scalar::GaussianRational;

/// Equations `p = 0` and disequalities `q ≠ 0` over a fixed parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    nparams: usize,
    equations: BTreeSet<Polynomial>,
    disequalities: BTreeSet<Polynomial>,
}

impl ConstraintSet {
    pub fn new(nparams: usize) -> Self {
        Self {
            nparams,
            equations: BTreeSet::new(),
            disequalities: BTreeSet::new(),
        }
    }

    pub fn nparams(&self) -> usize {
        self.nparams
    }

    /// Adds `p = 0`, made monic; zero is dropped.
    pub fn add_equation(&mut self, p: Polynomial) {
        if !p.is_zero() {
            self.equations.insert(p.monic());
        }
    }

    /// Adds `p ≠ 0`, made monic.
    pub fn add_disequality(&mut self, p: Polynomial) {
        self.disequalities.insert(p.monic());
    }

    pub fn equations(&self) -> impl Iterator<Item = &Polynomial> {
        self.equations.iter()
    }

    pub fn disequalities(&self) -> impl Iterator<Item = &Polynomial> {
        self.disequalities.iter()
    }

    /// No equations (disequalities do not count).
    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn extend(&mut self, other: &ConstraintSet) {
        self.equations.extend(other.equations.iter().cloned());
        self.disequalities.extend(other.disequalities.iter().cloned());
    }

    pub fn render_equations(&self, params: &[String]) -> Vec<String> {
        self.equations.iter().map(|e| e.render(params, &[])).collect()
    }

    pub fn render_disequalities(&self, params: &[String]) -> Vec<String> {
        self.disequalities
            .iter()
            .map(|e| e.render(params, &[]))
            .collect()
    }
}

/// `params[var]^n = c` with `c ≠ 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub var: usize,
    pub n: u32,
    pub c: GaussianRational,
}

impl Relation {
    pub fn reduce(&self, p: &Polynomial) -> Polynomial {
        p.reduce_power(self.var, self.n, &self.c)
    }

    pub fn reduce_all(p: &Polynomial, relations: &[Relation]) -> Polynomial {
        relations.iter().fold(p.clone(), |acc, r| r.reduce(&acc))
    }

    /// `var^n - c`.
    pub fn as_polynomial(&self, nparams: usize) -> Polynomial {
        let mut e = vec![0; nparams];
        e[self.var] = self.n;
        Polynomial::from_terms(
            nparams,
            (),
            [(e, GaussianRational::one()), (vec![0; nparams], -&self.c)],
        )
    }

    pub fn render(&self, params: &[String]) -> String {
        format!("{}^{} = {}", params[self.var], self.n, self.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Solved,
    Unsolved,
    /// The equations force a recorded disequality to fail, or `1 = 0`.
    Inconsistent,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Solved => "solved",
            Status::Unsolved => "unsolved",
            Status::Inconsistent => "inconsistent",
        }
    }
}

/// Parameter assignments, root-of-unity style relations and whatever could
/// not be solved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionFamily {
    pub params: Vec<String>,
    /// `values[i]` expresses parameter `i` in the free parameters; a free
    /// parameter maps to itself.
    pub values: Vec<Polynomial>,
    pub relations: Vec<Relation>,
    pub residual: ConstraintSet,
    pub status: Status,
    pub trace: Vec<String>,
}

impl SolutionFamily {
    /// Every parameter free, nothing known.
    pub fn new(params: Vec<String>) -> Self {
        let np = params.len();
        Self {
            values: (0..np).map(|i| Polynomial::x(np, i)).collect(),
            params,
            relations: Vec::new(),
            residual: ConstraintSet::new(np),
            status: Status::Solved,
            trace: Vec::new(),
        }
    }

    pub fn nparams(&self) -> usize {
        self.params.len()
    }

    fn is_assigned(&self, i: usize) -> bool {
        self.values[i] != Polynomial::x(self.nparams(), i)
    }

    pub fn free_params(&self) -> Vec<usize> {
        (0..self.nparams()).filter(|&i| !self.is_assigned(i)).collect()
    }

    pub fn assignments(&self) -> Vec<(usize, &Polynomial)> {
        (0..self.nparams())
            .filter(|&i| self.is_assigned(i))
            .map(|i| (i, &self.values[i]))
            .collect()
    }

    pub fn relation_for(&self, var: usize) -> Option<&Relation> {
        self.relations.iter().find(|r| r.var == var)
    }

    /// Applies the assignments and reduces modulo the relations.
    pub fn normalize(&self, p: &Polynomial) -> Polynomial {
        let s = p
            .substitute(&self.values, &Budget::unlimited())
            .expect("parameter arity");
        Relation::reduce_all(&s, &self.relations)
    }

    /// Number of parameter values when the family is finite: every free
    /// parameter is pinned by a relation `p^n = c`.
    pub fn element_count(&self) -> Option<u64> {
        if self.status != Status::Solved {
            return None;
        }
        self.free_params()
            .into_iter()
            .map(|p| self.relation_for(p).map(|r| r.n as u64))
            .product()
    }

    /// Parameters known to be nonzero: monomial factors of disequalities and
    /// variables carrying a relation.
    fn units(&self) -> BTreeSet<usize> {
        let mut u: BTreeSet<usize> = self.relations.iter().map(|r| r.var).collect();
        for d in self.residual.disequalities() {
            u.extend(d.monomial_content().support());
        }
        u
    }

    fn assign(&mut self, var: usize, expr: Polynomial, pending: &mut Vec<Polynomial>) {
        let np = self.nparams();
        self.trace
            .push(format!("{} = {}", self.params[var], expr.render(&self.params, &[])));
        if let Some(pos) = self.relations.iter().position(|r| r.var == var) {
            let r = self.relations.remove(pos);
            pending.push(r.as_polynomial(np));
        }
        let mut sub: Vec<Polynomial> = (0..np).map(|i| Polynomial::x(np, i)).collect();
        sub[var] = expr;
        let b = Budget::unlimited();
        for v in &mut self.values {
            *v = v.substitute(&sub, &b).expect("parameter arity");
        }
        self.reduce_values();
    }

    fn reduce_values(&mut self) {
        for i in 0..self.values.len() {
            self.values[i] = Relation::reduce_all(&self.values[i], &self.relations);
        }
    }

    fn add_relation(&mut self, rel: Relation, pending: &mut Vec<Polynomial>) {
        if let Some(pos) = self.relations.iter().position(|r| r.var == rel.var) {
            let old = self.relations[pos].clone();
            let one = GaussianRational::one();
            debug_assert!(old.c == one && rel.c == one, "caller checks compatibility");
            let g = old.n.gcd(&rel.n);
            self.relations.remove(pos);
            if g == 1 {
                self.assign(rel.var, Polynomial::one(self.nparams(), ()), pending);
                return;
            }
            self.relations.push(Relation { n: g, ..rel });
        } else {
            self.relations.push(rel);
        }
        let r = self.relations.last().unwrap();
        self.trace.push(r.render(&self.params));
        self.relations.sort_by_key(|r| r.var);
        self.reduce_values();
    }

    /// Closing summary lines: every assignment and relation in terms of the
    /// free parameters.
    pub fn summary(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .assignments()
            .into_iter()
            .map(|(i, v)| format!("{} = {}", self.params[i], v.render(&self.params, &[])))
            .collect();
        out.extend(self.relations.iter().map(|r| r.render(&self.params)));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let assignments: BTreeMap<&str, String> = self
            .assignments()
            .into_iter()
            .map(|(i, v)| (self.params[i].as_str(), v.render(&self.params, &[])))
            .collect();
        let np = self.nparams();
        let mut residual: Vec<String> = self
            .relations
            .iter()
            .map(|r| r.as_polynomial(np).render(&self.params, &[]))
            .collect();
        residual.extend(self.residual.render_equations(&self.params));
        json!({
            "params": self.params,
            "free": self.free_params().iter().map(|&i| &self.params[i]).collect::<Vec<_>>(),
            "assignments": assignments,
            "relations": self.relations.iter().map(|r| r.render(&self.params)).collect::<Vec<_>>(),
            "residual": residual,
            "disequalities": self.residual.render_disequalities(&self.params),
            "status": self.status.as_str(),
            "element_count": self.element_count(),
            "trace": self.trace,
        })
    }
}

fn var_mono(np: usize, v: usize) -> Monomial {
    Monomial::var(np, v)
}

/// Divides out the largest monomial built from unit parameters.
fn strip_units(p: &Polynomial, units: &BTreeSet<usize>) -> Polynomial {
    let content = p.monomial_content();
    let e: Vec<u32> = content
        .exponents()
        .iter()
        .enumerate()
        .map(|(i, &x)| if units.contains(&i) { x } else { 0 })
        .collect();
    p.div_monomial(&Monomial::new(e)).expect("content divides")
}

/// Rule (i): `α p + r` with `α` a nonzero constant and `p` absent from `r`.
fn solve_linear(eq: &Polynomial) -> Option<(usize, Polynomial)> {
    let np = eq.nvars();
    eq.variables().into_iter().rev().find_map(|p| {
        if eq.degree_in(p) != 1 {
            return None;
        }
        let pm = var_mono(np, p);
        let alpha = eq.coeff(&pm)?;
        let with_p = eq.filter_terms(|m| m.exponents()[p] > 0);
        if with_p.num_terms() != 1 {
            return None;
        }
        let rest = eq.filter_terms(|m| m.exponents()[p] == 0);
        let inv = alpha.inv()?;
        Some((p, rest.scale(&-inv)))
    })
}

/// Rule (ii): `α p u + β m` with `u` a unit monomial dividing `m`, and `p`
/// in neither `u` nor `m`.
fn solve_binomial(eq: &Polynomial, units: &BTreeSet<usize>) -> Option<(usize, Polynomial)> {
    if eq.num_terms() != 2 {
        return None;
    }
    let np = eq.nvars();
    let terms: Vec<(Monomial, GaussianRational)> =
        eq.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let mut best: Option<(usize, Polynomial)> = None;
    for (i, j) in [(0, 1), (1, 0)] {
        let (pu, alpha) = &terms[i];
        let (m, beta) = &terms[j];
        for p in pu.support() {
            if pu.exponents()[p] != 1 || m.exponents()[p] != 0 {
                continue;
            }
            let u = var_mono(np, p).quotient_of(pu);
            if !u.support().all(|v| units.contains(&v)) || !u.divides(m) {
                continue;
            }
            let coef = -&(beta * &alpha.inv().expect("nonzero"));
            let expr = Polynomial::from_terms(np, (), [(u.quotient_of(m).exponents().to_vec(), coef)]);
            if best.as_ref().is_none_or(|(q, _)| p > *q) {
                best = Some((p, expr));
            }
        }
    }
    best
}

/// Rule (iii) leftover: a single term in one variable forces it to vanish.
fn solve_single_term(eq: &Polynomial) -> Option<usize> {
    if eq.num_terms() != 1 {
        return None;
    }
    let vars = eq.variables();
    (vars.len() == 1).then(|| vars[0])
}

/// Rule (iv): `p^n - c`, `n ≥ 2`, `c ≠ 0`.
fn univariate_binomial(eq: &Polynomial) -> Option<Relation> {
    let vars = eq.variables();
    if vars.len() != 1 || eq.num_terms() != 2 {
        return None;
    }
    let p = vars[0];
    let (lead, lc) = eq.leading()?;
    let n = lead.exponents()[p];
    let c = eq.constant_term();
    if n < 2 || c.is_zero() || !lc.is_one() {
        return None;
    }
    Some(Relation { var: p, n, c: -c })
}

/// Eliminates parameters with rules (i)–(iv) until nothing applies. The
/// leftover equations become the residual; unsolved leftovers are kept
/// verbatim.
pub fn solve_constraints(c: &ConstraintSet, family: SolutionFamily) -> SolutionFamily {
    let mut fam = family;
    if fam.status == Status::Inconsistent {
        return fam;
    }
    let mut pending: Vec<Polynomial> = fam.residual.equations().cloned().collect();
    pending.extend(c.equations().cloned());
    let mut diseq: Vec<Polynomial> = fam.residual.disequalities().cloned().collect();
    diseq.extend(c.disequalities().cloned());
    let np = fam.nparams();
    loop {
        let mut fresh = ConstraintSet::new(np);
        for d in &diseq {
            let d = fam.normalize(d);
            if d.is_zero() {
                fam.trace.push(format!(
                    "inconsistent: disequality violated ({})",
                    d.render(&fam.params, &[])
                ));
                fam.status = Status::Inconsistent;
                return fam;
            }
            fresh.add_disequality(d);
        }
        fam.residual = fresh;
        let units = fam.units();
        let mut raw = BTreeSet::new();
        let mut eqs = BTreeSet::new();
        for e in pending.drain(..) {
            let e = fam.normalize(&e);
            let stripped = strip_units(&e, &units);
            if stripped.is_zero() {
                continue;
            }
            if stripped.is_constant() {
                fam.trace.push("inconsistent: 1 = 0".into());
                fam.status = Status::Inconsistent;
                return fam;
            }
            raw.insert(e.monic());
            eqs.insert(stripped.monic());
        }
        // rules in priority order, simplest equations first; unit
        // cancellation only once the plain equations are exhausted
        let by_size = |set: &BTreeSet<Polynomial>| {
            let mut v: Vec<Polynomial> = set.iter().cloned().collect();
            v.sort_by_key(|e| (e.num_terms(), e.degree()));
            v
        };
        let raw = by_size(&raw);
        let ordered = by_size(&eqs);
        let direct = |list: &[Polynomial]| {
            list.iter()
                .find_map(solve_linear)
                .or_else(|| list.iter().find_map(|e| solve_binomial(e, &units)))
        };
        let step = direct(&raw).or_else(|| direct(&ordered)).or_else(|| {
            ordered
                .iter()
                .find_map(solve_single_term)
                .map(|v| (v, Polynomial::zero(np, ())))
        });
        if let Some((var, expr)) = step {
            pending.extend(raw);
            fam.assign(var, expr, &mut pending);
            continue;
        }
        if let Some(rel) = ordered.iter().find_map(|e| {
            univariate_binomial(e).filter(|r| {
                fam.relation_for(r.var)
                    .is_none_or(|o| o.c.is_one() && r.c.is_one())
            })
        }) {
            // the source equation reduces to zero modulo the new relation
            pending.extend(raw);
            fam.add_relation(rel, &mut pending);
            continue;
        }
        for e in eqs {
            fam.residual.add_equation(e);
        }
        break;
    }
    fam.status = if fam.residual.is_empty() {
        Status::Solved
    } else {
        Status::Unsolved
    };
    fam
}

/// The `n`-th cyclotomic polynomial in parameter `var`.
pub fn cyclotomic(n: u32, var: usize, nparams: usize) -> Polynomial {
    let mut e = vec![0; nparams];
    e[var] = n;
    let mut p = Polynomial::from_terms(
        nparams,
        (),
        [
            (e, GaussianRational::one()),
            (vec![0; nparams], GaussianRational::from_int(-1)),
        ],
    );
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        p = divide_univariate(&p, &cyclotomic(d, var, nparams), var).0;
    }
    p
}

/// Quotient and remainder of division by a polynomial monic in `var`.
pub fn divide_univariate(
    p: &Polynomial,
    m: &Polynomial,
    var: usize,
) -> (Polynomial, Polynomial) {
    let np = p.nvars();
    let dm = m.degree_in(var);
    assert!(dm >= 0, "division by zero");
    let lead = m.filter_terms(|t| t.exponents()[var] as i64 == dm);
    assert!(
        lead.num_terms() == 1 && lead.terms().next().unwrap().1.is_one(),
        "divisor must be monic in the variable"
    );
    let mut q = Polynomial::zero(np, ());
    let mut r = p.clone();
    while r.degree_in(var) >= dm {
        let e = r.degree_in(var);
        let top = r.filter_terms(|t| t.exponents()[var] as i64 == e);
        let mut shift = vec![0; np];
        shift[var] = (e - dm) as u32;
        let mut qt = Polynomial::zero(np, ());
        for (mono, c) in top.terms() {
            let mut ex = mono.exponents().to_vec();
            ex[var] = 0;
            let t = Polynomial::from_terms(np, (), [(ex, c.clone())]);
            qt = &qt + &t;
        }
        let qt = qt.mul_monomial(&Monomial::new(shift));
        r = &r - &(&qt * m);
        q = &q + &qt;
    }
    (q, r)
}
