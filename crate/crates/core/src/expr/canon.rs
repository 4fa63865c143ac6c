//! Canonical rational form.
//!
//! An expression is read into a [`Frac`]: a numerator [`Poly`] over a product
//! of primitive denominator bases. Monomials are Laurent in the unit atoms
//! (variables, parameters, radicals, exponentials) and polynomial in the
//! non-unit ones (trigonometric and hyperbolic kernels, integrals, opaque
//! nodes). `sin^2` and `sinh^2` are always rewritten through `cos` and `cosh`,
//! so every monomial has degree at most one in each `sin`/`sinh` atom.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Func, Symbol};

type Q = BigRational;

const DIV_ITER_CAP: usize = 50_000;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub(crate) enum Atom {
    Var(Symbol),
    Param(Symbol),
    Prime(BigInt),
    Radical(Poly),
    ExpOpaque(Expr),
    Opaque(Expr),
    Integral(Expr, Symbol),
    Cos(Expr),
    Cosh(Expr),
    Sin(Expr),
    Sinh(Expr),
}

impl Atom {
    fn is_unit(&self) -> bool {
        matches!(
            self,
            Atom::Var(_) | Atom::Param(_) | Atom::Prime(_) | Atom::Radical(_) | Atom::ExpOpaque(_)
        )
    }

    fn is_odd_kernel(&self) -> bool {
        matches!(self, Atom::Sin(_) | Atom::Sinh(_))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub(crate) struct Monomial {
    exp: Poly,
    atoms: BTreeMap<Atom, Q>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

fn cmp_sparse<K: Ord>(a: &BTreeMap<K, Q>, b: &BTreeMap<K, Q>) -> Ordering {
    let mut ia = a.iter().rev().peekable();
    let mut ib = b.iter().rev().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some((_, va)), None) => return (*va).cmp(&Q::zero()),
            (None, Some((_, vb))) => return Q::zero().cmp(*vb),
            (Some((ka, va)), Some((kb, vb))) => match ka.cmp(kb) {
                Ordering::Greater => return (*va).cmp(&Q::zero()),
                Ordering::Less => return Q::zero().cmp(*vb),
                Ordering::Equal => {
                    let c = va.cmp(vb);
                    if c != Ordering::Equal {
                        return c;
                    }
                    ia.next();
                    ib.next();
                }
            },
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_sparse(&self.atoms, &other.atoms).then_with(|| cmp_sparse(&self.exp.terms, &other.exp.terms))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn add_exp<K: Ord + Clone>(map: &mut BTreeMap<K, Q>, k: &K, v: &Q) {
    if v.is_zero() {
        return;
    }
    match map.get_mut(k) {
        Some(e) => {
            *e += v;
            if e.is_zero() {
                map.remove(k);
            }
        }
        None => {
            map.insert(k.clone(), v.clone());
        }
    }
}

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

impl Monomial {
    fn one() -> Self {
        Monomial::default()
    }

    fn is_one(&self) -> bool {
        self.atoms.is_empty() && self.exp.is_zero()
    }

    fn atom(a: Atom, e: Q) -> Self {
        let mut m = Monomial::one();
        m.atoms.insert(a, e);
        m
    }

    /// Quotient without reduction; `None` if a non-unit exponent would go negative.
    fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut atoms = self.atoms.clone();
        for (k, v) in &other.atoms {
            add_exp(&mut atoms, k, &-v);
        }
        for (k, v) in &atoms {
            match k {
                Atom::Prime(_) => {}
                Atom::Radical(_) if v.is_negative() => return None,
                a if !a.is_unit() && v.is_negative() => return None,
                _ => {}
            }
        }
        Some(Monomial { exp: self.exp.sub(&other.exp), atoms })
    }
}

fn needs_reduction(a: &Atom, e: &Q) -> bool {
    match a {
        Atom::Prime(_) => e.is_negative() || *e >= Q::one(),
        Atom::Radical(_) => *e >= Q::one(),
        Atom::Sin(_) | Atom::Sinh(_) => *e >= q(2),
        _ => false,
    }
}

/// Apply the monomial rewrite rules, producing an equivalent polynomial.
fn reduce_monomial(m: Monomial) -> Poly {
    if !m.atoms.iter().any(|(a, e)| needs_reduction(a, e)) {
        return Poly::from_monomial(m, Q::one());
    }
    let mut coef = Q::one();
    let mut extra: Vec<Poly> = Vec::new();
    let mut atoms = BTreeMap::new();
    for (a, e) in m.atoms {
        if !needs_reduction(&a, &e) {
            atoms.insert(a, e);
            continue;
        }
        match &a {
            Atom::Prime(p) => {
                let fl = e.floor();
                let k = fl.to_integer().to_i32().expect("small prime exponent");
                coef *= Q::from_integer(p.clone()).pow(k);
                let rest = e - fl;
                if !rest.is_zero() {
                    atoms.insert(a, rest);
                }
            }
            Atom::Radical(b) => {
                let fl = e.floor();
                let k = fl.to_integer().to_u32().expect("small radical exponent");
                extra.push(b.powi(k));
                let rest = e - fl;
                if !rest.is_zero() {
                    atoms.insert(a, rest);
                }
            }
            Atom::Sin(u) | Atom::Sinh(u) => {
                let n = e.to_integer().to_u32().expect("integer kernel exponent");
                let (half, odd) = (n / 2, n % 2);
                let c2 = if matches!(a, Atom::Sin(_)) {
                    Poly::from_atom(Atom::Cos(u.clone()), q(2))
                } else {
                    Poly::from_atom(Atom::Cosh(u.clone()), q(2))
                };
                let sq = if matches!(a, Atom::Sin(_)) {
                    Poly::constant(Q::one()).sub(&c2)
                } else {
                    c2.sub(&Poly::constant(Q::one()))
                };
                extra.push(sq.powi(half));
                if odd == 1 {
                    atoms.insert(a, Q::one());
                }
            }
            _ => unreachable!(),
        }
    }
    let mut p = Poly::from_monomial(Monomial { exp: m.exp, atoms }, coef);
    for x in extra {
        p = p.mul(&x);
    }
    p
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Poly {
    let mut atoms = a.atoms.clone();
    for (k, v) in &b.atoms {
        add_exp(&mut atoms, k, v);
    }
    reduce_monomial(Monomial { exp: a.exp.add(&b.exp), atoms })
}

pub(crate) struct Factored {
    coef: Q,
    unit: Monomial,
    nonunit: Vec<(Atom, u32)>,
    rest: Poly,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Atom(Atom),
    Exp(Monomial),
}

fn exponent_entries(m: &Monomial) -> impl Iterator<Item = (Key, &Q)> + '_ {
    m.atoms
        .iter()
        .map(|(a, e)| (Key::Atom(a.clone()), e))
        .chain(m.exp.terms.iter().map(|(k, c)| (Key::Exp(k.clone()), c)))
}

fn exponent_ranges(p: &Poly) -> BTreeMap<Key, (Q, Q)> {
    let mut out: BTreeMap<Key, (Q, Q)> = BTreeMap::new();
    for m in p.terms.keys() {
        for (k, e) in exponent_entries(m) {
            let r = out.entry(k).or_insert_with(|| (Q::zero(), Q::zero()));
            if *e < r.0 {
                r.0 = e.clone();
            }
            if *e > r.1 {
                r.1 = e.clone();
            }
        }
    }
    // Keys missing from some term have exponent zero there, already covered
    // by the (0, 0) seed.
    out
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly::default()
    }

    pub(crate) fn constant(c: Q) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    fn from_monomial(m: Monomial, c: Q) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    fn from_atom(a: Atom, e: Q) -> Self {
        Poly::from_monomial(Monomial::atom(a, e), Q::one())
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }


    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(e) => {
                *e += c;
                if e.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn add_poly_scaled(&mut self, other: &Poly, s: &Q) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * s);
        }
    }

    pub(crate) fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_poly_scaled(other, &Q::one());
        out
    }

    pub(crate) fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_poly_scaled(other, &-Q::one());
        out
    }

    pub(crate) fn neg(&self) -> Poly {
        self.scale(&-Q::one())
    }

    fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = ca * cb;
                let p = mul_monomials(ma, mb);
                out.add_poly_scaled(&p, &c);
            }
        }
        out
    }

    fn mul_term(&self, m: &Monomial, c: &Q) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            let p = mul_monomials(ma, m);
            out.add_poly_scaled(&p, &(ca * c));
        }
        out
    }

    pub(crate) fn powi(&self, k: u32) -> Poly {
        let mut result = Poly::constant(Q::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn lead(&self) -> Option<(&Monomial, &Q)> {
        self.terms.iter().next_back()
    }


    /// Split into content, unit monomial, common non-unit atoms and a primitive rest.
    pub(crate) fn factor_out(&self) -> Factored {
        assert!(!self.is_zero(), "factor_out of zero polynomial");
        let mut den_lcm = BigInt::one();
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            den_lcm = den_lcm.lcm(c.denom());
            num_gcd = num_gcd.gcd(c.numer());
        }
        let mut coef = Q::new(num_gcd, den_lcm);
        if self.lead().expect("nonzero").1.is_negative() {
            coef = -coef;
        }

        let mut unit = Monomial::one();
        let mut nonunit_min: BTreeMap<Atom, Q> = BTreeMap::new();
        let mut first = true;
        for m in self.terms.keys() {
            if first {
                for (a, e) in &m.atoms {
                    if a.is_unit() {
                        unit.atoms.insert(a.clone(), e.clone());
                    } else {
                        nonunit_min.insert(a.clone(), e.clone());
                    }
                }
                unit.exp = m.exp.clone();
                first = false;
                continue;
            }
            let keys: Vec<Atom> = unit.atoms.keys().cloned().chain(m.atoms.keys().filter(|a| a.is_unit()).cloned()).collect();
            for a in keys {
                let cur = unit.atoms.get(&a).cloned().unwrap_or_else(Q::zero);
                let here = m.atoms.get(&a).cloned().unwrap_or_else(Q::zero);
                let v = if here < cur { here } else { cur };
                if v.is_zero() {
                    unit.atoms.remove(&a);
                } else {
                    unit.atoms.insert(a, v);
                }
            }
            nonunit_min.retain(|a, e| match m.atoms.get(a) {
                Some(here) => {
                    if here < e {
                        *e = here.clone();
                    }
                    true
                }
                None => false,
            });
            let ekeys: Vec<Monomial> = unit.exp.terms.keys().cloned().chain(m.exp.terms.keys().cloned()).collect();
            let mut exp = Poly::zero();
            for k in ekeys {
                if exp.terms.contains_key(&k) {
                    continue;
                }
                let cur = unit.exp.terms.get(&k).cloned().unwrap_or_else(Q::zero);
                let here = m.exp.terms.get(&k).cloned().unwrap_or_else(Q::zero);
                let v = if here < cur { here } else { cur };
                if !v.is_zero() {
                    exp.terms.insert(k, v);
                }
            }
            unit.exp = exp;
        }

        let mut divisor = unit.clone();
        for (a, e) in &nonunit_min {
            divisor.atoms.insert(a.clone(), e.clone());
        }
        let mut rest = Poly::zero();
        for (m, c) in &self.terms {
            let qm = m.div(&divisor).expect("common factor divides every term");
            rest.add_term(qm, c / &coef);
        }
        let nonunit = nonunit_min
            .into_iter()
            .map(|(a, e)| (a, e.to_integer().to_u32().expect("non-unit exponent")))
            .collect();
        Factored { coef, unit, nonunit, rest }
    }

    fn odd_kernel_atom(&self) -> Option<Atom> {
        self.terms
            .keys()
            .flat_map(|m| m.atoms.keys())
            .find(|a| a.is_odd_kernel())
            .cloned()
    }

    /// Exact quotient `self / d`, if one exists in the monomial ring.
    pub(crate) fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&(Q::one() / c)));
        }
        let mut n = self.clone();
        let mut d = d.clone();
        for _ in 0..16 {
            let Some(atom) = d.odd_kernel_atom() else { break };
            let mut conj = Poly::zero();
            for (m, c) in &d.terms {
                if m.atoms.contains_key(&atom) {
                    conj.add_term(m.clone(), -c);
                } else {
                    conj.add_term(m.clone(), c.clone());
                }
            }
            n = n.mul(&conj);
            d = d.mul(&conj);
        }
        if d.odd_kernel_atom().is_some() {
            return None;
        }
        if d.terms.len() == 1 {
            let (dm, dc) = d.lead().expect("nonzero");
            let inv = Q::one() / dc;
            let mut out = Poly::zero();
            for (m, c) in &n.terms {
                let qm = m.div(dm)?;
                out.add_poly_scaled(&reduce_monomial(qm), &(c * &inv));
            }
            return Some(out);
        }

        let nr = exponent_ranges(&n);
        let dr = exponent_ranges(&d);
        let zero_range = (Q::zero(), Q::zero());
        let in_bounds = |m: &Monomial| -> bool {
            exponent_entries(m).all(|(k, e)| {
                if matches!(k, Key::Atom(Atom::Prime(_))) {
                    return true;
                }
                let (nlo, nhi) = nr.get(&k).unwrap_or(&zero_range);
                let (dlo, dhi) = dr.get(&k).unwrap_or(&zero_range);
                *e >= nlo - dlo && *e <= nhi - dhi
            })
        };

        let (dm, dc) = {
            let (m, c) = d.lead().expect("nonzero");
            (m.clone(), c.clone())
        };
        let mut quot = Poly::zero();
        let mut r = n;
        for _ in 0..DIV_ITER_CAP {
            let Some((lm, lc)) = r.lead() else {
                return Some(quot);
            };
            let qm = lm.div(&dm)?;
            if !in_bounds(&qm) {
                return None;
            }
            let qc = lc / &dc;
            let step = reduce_monomial(qm);
            let sub = d.mul(&step);
            r.add_poly_scaled(&sub, &-&qc);
            quot.add_poly_scaled(&step, &qc);
        }
        None
    }
}

/// `num / prod(base^k)`; bases are primitive, non-constant and pairwise
/// non-dividing.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct Frac {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

impl Frac {
    fn poly(p: Poly) -> Self {
        Frac { num: p, den: BTreeMap::new() }
    }

    fn constant(c: Q) -> Self {
        Frac::poly(Poly::constant(c))
    }

    fn atom(a: Atom) -> Self {
        Frac::poly(Poly::from_atom(a, Q::one()))
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub(crate) fn as_constant(&self) -> Option<Q> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    fn den_poly_except(&self, skip: &BTreeMap<Poly, u32>) -> Poly {
        let mut p = Poly::constant(Q::one());
        for (b, k) in &self.den {
            let s = skip.get(b).copied().unwrap_or(0);
            if *k > s {
                p = p.mul(&b.powi(k - s));
            }
        }
        p
    }

    fn add(&self, other: &Frac) -> Frac {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let mut r = Frac { num: self.num.add(&other.num), den: self.den.clone() };
            r.cancel();
            return r;
        }
        let mut shared: BTreeMap<Poly, u32> = BTreeMap::new();
        for (b, k) in &self.den {
            if let Some(k2) = other.den.get(b) {
                shared.insert(b.clone(), (*k).min(*k2));
            }
        }
        let a_extra = self.den_poly_except(&shared);
        let b_extra = other.den_poly_except(&shared);
        let mut r = Frac {
            num: self.num.mul(&b_extra).add(&other.num.mul(&a_extra)),
            den: self.den.clone(),
        };
        for (b, k) in &other.den {
            let s = shared.get(b).copied().unwrap_or(0);
            if *k > s {
                r.divide_by(b, k - s);
            }
        }
        r.cancel();
        r
    }

    fn neg(&self) -> Frac {
        Frac { num: self.num.neg(), den: self.den.clone() }
    }

    fn mul(&self, other: &Frac) -> Frac {
        if self.is_zero() || other.is_zero() {
            return Frac::constant(Q::zero());
        }
        let mut r = Frac { num: self.num.mul(&other.num), den: self.den.clone() };
        for (b, k) in &other.den {
            r.divide_by(b, *k);
        }
        r.cancel();
        r
    }

    fn inv(&self) -> Option<Frac> {
        if self.is_zero() {
            return None;
        }
        let mut r = Frac::poly(self.den_poly_except(&BTreeMap::new()));
        r.divide_by(&self.num, 1);
        r.cancel();
        Some(r)
    }

    fn powi(&self, k: i64) -> Option<Frac> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut n = k.unsigned_abs();
        let mut result = Frac::constant(Q::one());
        let mut b = base;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&b);
            }
            n >>= 1;
            if n > 0 {
                b = b.mul(&b);
            }
        }
        Some(result)
    }

    /// `self := self / p^k`.
    fn divide_by(&mut self, p: &Poly, k: u32) {
        if k == 0 {
            return;
        }
        let f = p.factor_out();
        let mut atoms = BTreeMap::new();
        let mut radical_dens: Vec<(Poly, u32)> = Vec::new();
        let kq = q(k as i64);
        for (a, e) in &f.unit.atoms {
            let ne = -(e * &kq);
            if let Atom::Radical(b) = a {
                let fl = ne.floor();
                let fr = &ne - &fl;
                if !fr.is_zero() {
                    atoms.insert(a.clone(), fr);
                }
                let j = (-fl).to_integer().to_u32().expect("small radical exponent");
                if j > 0 {
                    radical_dens.push((b.clone(), j));
                }
            } else {
                atoms.insert(a.clone(), ne);
            }
        }
        let inv_unit = Monomial { exp: f.unit.exp.scale(&-kq.clone()), atoms };
        let coef = (Q::one() / &f.coef).pow(k as i32);
        self.num = self.num.mul_term(&inv_unit, &coef);
        for (b, j) in radical_dens {
            self.divide_by(&b, j);
        }
        for (a, e) in f.nonunit {
            self.insert_base(Poly::from_atom(a, Q::one()), e * k);
        }
        if f.rest.as_constant().is_none() {
            self.insert_base(f.rest, k);
        }
    }

    fn insert_base(&mut self, p: Poly, k: u32) {
        if let Some(e) = self.den.get_mut(&p) {
            *e += k;
            return;
        }
        // cos(u)^2 - 1 = -sin(u)^2 and cosh(u)^2 - 1 = sinh(u)^2
        if let Some((odd, sign)) = pythagorean_square(&p) {
            if sign < 0 && k % 2 == 1 {
                self.num = self.num.neg();
            }
            self.insert_base(Poly::from_atom(odd, Q::one()), 2 * k);
            return;
        }
        let bases: Vec<Poly> = self.den.keys().cloned().collect();
        for b in bases {
            if let Some(quot) = p.div_exact(&b) {
                *self.den.get_mut(&b).expect("present") += k;
                self.divide_by(&quot, k);
                return;
            }
            if let Some(quot) = b.div_exact(&p) {
                let kb = self.den.remove(&b).expect("present");
                self.insert_base(p, k + kb);
                self.divide_by(&quot, kb);
                return;
            }
        }
        self.den.insert(p, k);
    }

    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let bases: Vec<Poly> = self.den.keys().cloned().collect();
        for b in bases {
            let mut k = self.den[&b];
            while k > 0 {
                match self.num.div_exact(&b) {
                    Some(quot) => {
                        self.num = quot;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k == 0 {
                self.den.remove(&b);
            } else {
                self.den.insert(b, k);
            }
        }
    }

    /// Non-integer rational power.
    fn rational_power(&self, e: &Q) -> Option<Frac> {
        let mut r = poly_rpow(&self.num, e)?;
        for (b, k) in &self.den {
            let f = poly_rpow(b, &-(e * q(*k as i64)))?;
            r = r.mul(&f);
        }
        Some(r)
    }

    fn leading_negative(&self) -> bool {
        self.num.lead().is_some_and(|(_, c)| c.is_negative())
    }

    pub(crate) fn from_expr(e: &Expr) -> Frac {
        match e {
            Expr::Int(i) => Frac::constant(Q::from_integer(i.clone())),
            Expr::Rational(r) => Frac::constant(r.clone()),
            Expr::Param(s) => Frac::atom(Atom::Param(s.clone())),
            Expr::Var(s) => Frac::atom(Atom::Var(s.clone())),
            Expr::Sum(xs) => {
                let mut acc = Frac::constant(Q::zero());
                for x in xs.iter() {
                    acc = acc.add(&Frac::from_expr(x));
                }
                acc
            }
            Expr::Product(xs) => {
                let mut acc = Frac::constant(Q::one());
                for x in xs.iter() {
                    acc = acc.mul(&Frac::from_expr(x));
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
            Expr::Power(b, ex) => {
                let fb = Frac::from_expr(b);
                let fe = Frac::from_expr(ex);
                let opaque = || Frac::atom(Atom::Opaque(Expr::Power(fb.to_expr().into(), fe.to_expr().into())));
                match fe.as_constant() {
                    Some(c) if c.is_zero() => Frac::constant(Q::one()),
                    Some(c) if c.is_integer() => match c.to_integer().to_i64() {
                        Some(k) if k.abs() <= 4096 => fb.powi(k).unwrap_or_else(opaque),
                        _ => opaque(),
                    },
                    Some(c) => {
                        if fb.is_zero() {
                            if c.is_positive() {
                                Frac::constant(Q::zero())
                            } else {
                                opaque()
                            }
                        } else {
                            fb.rational_power(&c).unwrap_or_else(opaque)
                        }
                    }
                    None => opaque(),
                }
            }
            Expr::Sqrt(a) => Frac::from_expr(&Expr::Power(a.clone(), Expr::frac(1, 2).into())),
            Expr::Func(Func::Exp, a) => {
                let fa = Frac::from_expr(a);
                if fa.den.is_empty() {
                    Frac::poly(Poly::from_monomial(Monomial { exp: fa.num, atoms: BTreeMap::new() }, Q::one()))
                } else {
                    Frac::atom(Atom::ExpOpaque(fa.to_expr()))
                }
            }
            Expr::Func(f, a) => {
                let fa = Frac::from_expr(a);
                if fa.is_zero() {
                    return match f {
                        Func::Cos | Func::Cosh => Frac::constant(Q::one()),
                        _ => Frac::constant(Q::zero()),
                    };
                }
                let negate = fa.leading_negative();
                let key = if negate { fa.neg().to_expr() } else { fa.to_expr() };
                let (atom, odd) = match f {
                    Func::Sin => (Atom::Sin(key), true),
                    Func::Cos => (Atom::Cos(key), false),
                    Func::Sinh => (Atom::Sinh(key), true),
                    Func::Cosh => (Atom::Cosh(key), false),
                    Func::Exp => unreachable!(),
                };
                let r = Frac::atom(atom);
                if negate && odd {
                    r.neg()
                } else {
                    r
                }
            }
            Expr::Integral(f, v) => {
                let ff = Frac::from_expr(f);
                if ff.is_zero() {
                    Frac::constant(Q::zero())
                } else {
                    Frac::atom(Atom::Integral(ff.to_expr(), v.clone()))
                }
            }
        }
    }

    pub(crate) fn to_expr(&self) -> Expr {
        if self.den.is_empty() {
            return poly_to_expr(&self.num);
        }
        let mut factors: Vec<Expr> = Vec::new();
        if self.num.terms.len() == 1 {
            let (m, c) = self.num.terms.iter().next().expect("one term");
            if !c.is_one() {
                factors.push(Expr::rational(c.clone()));
            }
            factors.extend(monomial_factors(m));
        } else {
            factors.push(poly_to_expr(&self.num));
        }
        for (b, k) in &self.den {
            factors.push(poly_to_expr(b).powi(-(*k as i64)));
        }
        Expr::product(factors)
    }

    /// Denominator bases and unit atoms with negative exponents, as expressions.
    pub(crate) fn pole_factors(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = self.den.keys().map(poly_to_expr).collect();
        let mut units: BTreeMap<Atom, ()> = BTreeMap::new();
        for m in self.num.terms.keys() {
            for (a, e) in &m.atoms {
                if e.is_negative() && matches!(a, Atom::Var(_) | Atom::Param(_) | Atom::Radical(_)) {
                    units.insert(a.clone(), ());
                }
            }
        }
        for a in units.into_keys() {
            out.push(match a {
                Atom::Radical(b) => poly_to_expr(&b),
                other => atom_expr(&other, &Q::one()),
            });
        }
        out
    }
}

fn pythagorean_square(p: &Poly) -> Option<(Atom, i32)> {
    if p.terms.len() != 2 {
        return None;
    }
    let mut it = p.terms.iter();
    let (m0, c0) = it.next()?;
    let (m1, c1) = it.next()?;
    if !m0.is_one() || *c0 != -Q::one() || !c1.is_one() || !m1.exp.is_zero() || m1.atoms.len() != 1 {
        return None;
    }
    let (a, e) = m1.atoms.iter().next()?;
    if *e != q(2) {
        return None;
    }
    match a {
        Atom::Cos(u) => Some((Atom::Sin(u.clone()), -1)),
        Atom::Cosh(u) => Some((Atom::Sinh(u.clone()), 1)),
        _ => None,
    }
}

fn factor_small(n: &BigInt) -> Option<Vec<(BigInt, u32)>> {
    let mut v = n.to_u64()?;
    if v > 1_000_000_000_000 || v == 0 {
        return None;
    }
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= v {
        let mut k = 0;
        while v % p == 0 {
            v /= p;
            k += 1;
        }
        if k > 0 {
            out.push((BigInt::from(p), k));
        }
        p += 1;
    }
    if v > 1 {
        out.push((BigInt::from(v), 1));
    }
    Some(out)
}

/// `p^e` for non-integer `e`.
fn poly_rpow(p: &Poly, e: &Q) -> Option<Frac> {
    if e.is_integer() {
        return Frac::poly(p.clone()).powi(e.to_integer().to_i64()?);
    }
    if p.is_zero() {
        return if e.is_positive() { Some(Frac::constant(Q::zero())) } else { None };
    }
    let f = p.factor_out();
    let fl = e.floor();
    let fr = e - &fl;
    let k = fl.to_integer().to_i64()?;
    if f.coef.is_negative() {
        let r = Frac::poly(p.clone()).powi(k)?;
        return Some(r.mul(&Frac::poly(Poly::from_atom(Atom::Radical(p.clone()), fr))));
    }

    // Positive content and unit part distribute over the power.
    let mut result = Frac::constant(Q::one());
    let mut atoms: BTreeMap<Atom, Q> = BTreeMap::new();
    let mut radical_parts: Vec<(Poly, Q)> = Vec::new();
    for (a, x) in &f.unit.atoms {
        let ne = x * e;
        match a {
            Atom::Radical(b) => radical_parts.push((b.clone(), ne)),
            _ => {
                atoms.insert(a.clone(), ne);
            }
        }
    }
    for (num, sign) in [(f.coef.numer(), 1i64), (f.coef.denom(), -1i64)] {
        if num.is_one() {
            continue;
        }
        match factor_small(num) {
            Some(fs) => {
                for (pr, k) in fs {
                    add_exp(&mut atoms, &Atom::Prime(pr), &(e * q(sign * k as i64)));
                }
            }
            None => {
                let base = Poly::constant(Q::from_integer(num.clone()));
                radical_parts.push((base, e * q(sign)));
            }
        }
    }
    let unit = Monomial { exp: f.unit.exp.scale(e), atoms };
    result = result.mul(&Frac::poly(reduce_monomial(unit)));
    for (b, x) in radical_parts {
        let xf = x.floor();
        let xr = &x - &xf;
        let mut part = Frac::poly(b.clone()).powi(xf.to_integer().to_i64()?)?;
        if !xr.is_zero() {
            part = part.mul(&Frac::poly(Poly::from_atom(Atom::Radical(b), xr)));
        }
        result = result.mul(&part);
    }
    let mut body = Poly::constant(Q::one());
    for (a, x) in &f.nonunit {
        body = body.mul(&Poly::from_atom(a.clone(), q(*x as i64)));
    }
    body = body.mul(&f.rest);
    if body.as_constant().is_none() {
        let mut part = Frac::poly(body.clone()).powi(k)?;
        part = part.mul(&Frac::poly(Poly::from_atom(Atom::Radical(body), fr)));
        result = result.mul(&part);
    }
    Some(result)
}

fn atom_expr(a: &Atom, e: &Q) -> Expr {
    let base = match a {
        Atom::Var(s) => Expr::Var(s.clone()),
        Atom::Param(s) => Expr::Param(s.clone()),
        Atom::Prime(p) => Expr::Int(p.clone()),
        Atom::Radical(b) => poly_to_expr(b),
        Atom::ExpOpaque(u) => Expr::exp(u.clone()),
        Atom::Opaque(x) => x.clone(),
        Atom::Integral(f, v) => Expr::integral(f.clone(), v),
        Atom::Cos(u) => Expr::cos(u.clone()),
        Atom::Cosh(u) => Expr::cosh(u.clone()),
        Atom::Sin(u) => Expr::sin(u.clone()),
        Atom::Sinh(u) => Expr::sinh(u.clone()),
    };
    if e.is_one() {
        base
    } else {
        base.pow(Expr::rational(e.clone()))
    }
}

fn monomial_factors(m: &Monomial) -> Vec<Expr> {
    let mut out = Vec::with_capacity(m.atoms.len() + 1);
    if !m.exp.is_zero() {
        out.push(Expr::exp(poly_to_expr(&m.exp)));
    }
    for (a, e) in &m.atoms {
        out.push(atom_expr(a, e));
    }
    out
}

fn term_expr(m: &Monomial, c: &Q) -> Expr {
    let mut factors = monomial_factors(m);
    if factors.is_empty() {
        return Expr::rational(c.clone());
    }
    if !c.is_one() {
        factors.insert(0, Expr::rational(c.clone()));
    }
    Expr::product(factors)
}

fn poly_to_expr(p: &Poly) -> Expr {
    Expr::sum(p.terms.iter().rev().map(|(m, c)| term_expr(m, c)))
}

/// Canonical form of `e`. Idempotent; equal values with equal structure map
/// to identical trees.
pub fn normalize(e: &Expr) -> Expr {
    Frac::from_expr(e).to_expr()
}

/// True when `e` normalizes to the literal zero.
pub fn is_zero(e: &Expr) -> bool {
    Frac::from_expr(e).is_zero()
}

pub fn normalized_eq(a: &Expr, b: &Expr) -> bool {
    is_zero(&(a - b))
}

/// Factors whose zeros are poles of `e`: denominator bases and negative powers
/// of symbols and radicals.
pub fn denominator_factors(e: &Expr) -> Vec<Expr> {
    Frac::from_expr(e).pole_factors()
}
