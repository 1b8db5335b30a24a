//! Finite Grassmann algebra over [`Scalar`] with Berezin integration.
//!
//! Monomials are bitmasks over the generators of a [`GeneratorRegistry`];
//! a set bit means the generator is present, and the canonical product
//! order is ascending generator index.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalars::Scalar;

/// Index of a generator within its registry.
pub type Gen = usize;

/// Set of generators, bit `g` standing for generator `g`.
pub type Monomial = u64;

pub const MAX_GENERATORS: usize = 64;

/// Ordered, duplicate-free list of generator names.
#[derive(Debug, PartialEq, Eq)]
pub struct GeneratorRegistry {
    names: Vec<String>,
    index: HashMap<String, Gen>,
}

impl GeneratorRegistry {
    pub fn new<I, S>(names: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_GENERATORS {
            return Err(Error::RegistryTooLarge {
                max: MAX_GENERATORS,
                requested: names.len(),
            });
        }
        let mut index = HashMap::with_capacity(names.len());
        for (g, n) in names.iter().enumerate() {
            if index.insert(n.clone(), g).is_some() {
                return Err(Error::DuplicateGenerator(n.clone()));
            }
        }
        Ok(Arc::new(Self { names, index }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index(&self, name: &str) -> Result<Gen> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Monomial holding the named generators (order ignored).
    pub fn monomial(&self, names: &[&str]) -> Result<Monomial> {
        let mut m = 0;
        for n in names {
            m |= 1u64 << self.index(n)?;
        }
        Ok(m)
    }

    pub fn monomial_names(&self, m: Monomial) -> Vec<&str> {
        bits(m).map(|g| self.name(g)).collect()
    }
}

/// Generator indices present in `m`, ascending.
pub fn bits(mut m: Monomial) -> impl Iterator<Item = Gen> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let g = m.trailing_zeros() as Gen;
            m &= m - 1;
            Some(g)
        }
    })
}

pub fn degree(m: Monomial) -> u32 {
    m.count_ones()
}

/// Sign of `m1 * m2` relative to the canonical monomial `m1 | m2`, or
/// `None` when they share a generator.
pub fn product_sign(m1: Monomial, m2: Monomial) -> Option<bool> {
    if m1 & m2 != 0 {
        return None;
    }
    let mut odd = 0u32;
    for j in bits(m2) {
        odd ^= if j + 1 >= 64 { 0 } else { (m1 >> (j + 1)).count_ones() & 1 };
    }
    Some(odd == 1)
}

fn below(g: Gen) -> Monomial {
    (1u64 << g) - 1
}

fn above(g: Gen) -> Monomial {
    if g >= 63 {
        0
    } else {
        !((1u64 << (g + 1)) - 1)
    }
}

/// Element of the Grassmann algebra: a sparse sum of signed monomials.
#[derive(Clone, PartialEq, Eq)]
pub struct GrassmannElement {
    registry: Arc<GeneratorRegistry>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl GrassmannElement {
    pub fn zero(registry: &Arc<GeneratorRegistry>) -> Self {
        Self {
            registry: registry.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(registry: &Arc<GeneratorRegistry>) -> Self {
        Self::scalar(registry, Scalar::one())
    }

    pub fn scalar(registry: &Arc<GeneratorRegistry>, c: Scalar) -> Self {
        Self::term(registry, 0, c)
    }

    pub fn term(registry: &Arc<GeneratorRegistry>, m: Monomial, c: Scalar) -> Self {
        let mut x = Self::zero(registry);
        x.add_term(m, c);
        x
    }

    pub fn generator(registry: &Arc<GeneratorRegistry>, g: Gen) -> Self {
        Self::term(registry, 1u64 << g, Scalar::one())
    }

    pub fn named(registry: &Arc<GeneratorRegistry>, name: &str) -> Result<Self> {
        Ok(Self::generator(registry, registry.index(name)?))
    }

    /// Ordered product of the listed generators times `c`.
    pub fn product_of(registry: &Arc<GeneratorRegistry>, gens: &[Gen], c: Scalar) -> Self {
        let mut x = Self::scalar(registry, c);
        for &g in gens {
            x = x.mul_unchecked(&Self::generator(registry, g));
        }
        x
    }

    pub fn registry(&self) -> &Arc<GeneratorRegistry> {
        &self.registry
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &Scalar)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coefficient(&self, m: Monomial) -> Scalar {
        self.terms.get(&m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn scalar_part(&self) -> Scalar {
        self.coefficient(0)
    }

    /// Projection onto degree `k`.
    pub fn grade(&self, k: u32) -> Self {
        self.filter(|m| degree(m) == k)
    }

    pub fn filter(&self, keep: impl Fn(Monomial) -> bool) -> Self {
        Self {
            registry: self.registry.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(**m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| degree(*m) % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| degree(*m) % 2 == 1)
    }

    /// Union of all generators occurring in some term.
    pub fn support(&self) -> Monomial {
        self.terms.keys().fold(0, |a, m| a | m)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(&self.registry);
        }
        Self {
            registry: self.registry.clone(),
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    fn check_registry(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry {
            Ok(())
        } else {
            Err(Error::RegistryMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_registry(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_registry(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// Product keeping only result monomials accepted by `keep`.
    pub fn try_mul_filtered(&self, other: &Self, keep: impl Fn(Monomial) -> bool) -> Result<Self> {
        self.check_registry(other)?;
        let mut out = Self::zero(&self.registry);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some(neg) = product_sign(*m1, *m2) {
                    let m = m1 | m2;
                    if keep(m) {
                        let c = c1 * c2;
                        out.add_term(m, if neg { -c } else { c });
                    }
                }
            }
        }
        Ok(out)
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(&self.registry);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some(neg) = product_sign(*m1, *m2) {
                    let c = c1 * c2;
                    out.add_term(m1 | m2, if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// Taylor series of the exponential; `self` must be even with no
    /// scalar part.
    pub fn exp(&self) -> Result<Self> {
        if !self.is_even() || !self.scalar_part().is_zero() {
            return Err(Error::ExpDomain);
        }
        let mut result = Self::one(&self.registry);
        let mut term = Self::one(&self.registry);
        let mut k: i64 = 1;
        loop {
            term = term
                .mul_unchecked(self)
                .scale(&Scalar::new(1.into(), k.into()));
            if term.is_zero() {
                return Ok(result);
            }
            result += &term;
            k += 1;
        }
    }

    /// `∂/∂g` acting from the left.
    pub fn left_derivative(&self, g: Gen) -> Self {
        self.derive(g, below(g))
    }

    /// `∂/∂g` acting from the right; equal to the one-variable Berezin
    /// integral `∫ x dg`.
    pub fn right_derivative(&self, g: Gen) -> Self {
        self.derive(g, above(g))
    }

    fn derive(&self, g: Gen, sign_mask: Monomial) -> Self {
        let bit = 1u64 << g;
        let mut out = Self::zero(&self.registry);
        for (m, c) in &self.terms {
            if m & bit != 0 {
                let neg = (m & sign_mask).count_ones() % 2 == 1;
                out.add_term(m ^ bit, if neg { -c.clone() } else { c.clone() });
            }
        }
        out
    }

    /// Renames every generator that occurs in a term into `target` by name.
    pub fn embed(&self, target: &Arc<GeneratorRegistry>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for g in bits(self.support()) {
            map.insert(g, target.index(self.registry.name(g))?);
        }
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let gens: Vec<Gen> = bits(*m).map(|g| map[&g]).collect();
            let y = Self::product_of(target, &gens, c.clone());
            out += &y;
        }
        Ok(out)
    }

    /// Terms as (generator names, coefficient) pairs, for reports.
    pub fn named_terms(&self) -> Vec<(Vec<String>, String)> {
        self.terms
            .iter()
            .map(|(m, c)| {
                (
                    bits(*m).map(|g| self.registry.name(g).to_string()).collect(),
                    c.to_string(),
                )
            })
            .collect()
    }
}

impl fmt::Debug for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GrassmannElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for g in bits(*m) {
                write!(f, "*{}", self.registry.name(g))?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&GrassmannElement> for GrassmannElement {
    /// Panics if the registries differ.
    fn add_assign(&mut self, rhs: &GrassmannElement) {
        self.check_registry(rhs).expect("registry mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(*m, c.clone());
        }
    }
}

impl Add for &GrassmannElement {
    type Output = GrassmannElement;
    fn add(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_add(rhs).expect("registry mismatch")
    }
}

impl Sub for &GrassmannElement {
    type Output = GrassmannElement;
    fn sub(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_add(&-rhs).expect("registry mismatch")
    }
}

impl Neg for &GrassmannElement {
    type Output = GrassmannElement;
    fn neg(self) -> GrassmannElement {
        GrassmannElement {
            registry: self.registry.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Mul for &GrassmannElement {
    type Output = GrassmannElement;
    fn mul(self, rhs: &GrassmannElement) -> GrassmannElement {
        self.try_mul(rhs).expect("registry mismatch")
    }
}

/// Iterated Berezin integral `∫…∫ x d gens[0] … d gens[n-1]` in the nested
/// convention where the last listed generator is integrated first.
pub fn berezin_integrate(x: &GrassmannElement, gens: &[Gen]) -> Result<GrassmannElement> {
    let mut seen = 0u64;
    for &g in gens {
        if g >= x.registry.len() {
            return Err(Error::UnknownGenerator(format!("#{g}")));
        }
        if seen & (1 << g) != 0 {
            return Err(Error::DuplicateGenerator(x.registry.name(g).to_string()));
        }
        seen |= 1 << g;
    }
    let mut y = x.clone();
    for &g in gens.iter().rev() {
        y = y.right_derivative(g);
    }
    Ok(y)
}

/// Integral against a measure written `dg_1 dg_2 … dg_n` after the
/// integrand, so `g_1` is innermost.
pub fn integrate_measure(x: &GrassmannElement, written: &[Gen]) -> Result<GrassmannElement> {
    let rev: Vec<Gen> = written.iter().rev().copied().collect();
    berezin_integrate(x, &rev)
}

/// `∫ x_1 x_2 … x_n dg_1 … dg_m` with `g_1` innermost, integrating each
/// generator as soon as no later factor contains it.
///
/// Factors of definite parity are reordered (single terms first) and
/// integrated early with the matching signs; otherwise the full product is
/// formed first.
pub fn integrate_product(factors: &[GrassmannElement], written: &[Gen]) -> Result<GrassmannElement> {
    let Some(first) = factors.first() else {
        return Err(Error::Precondition("empty product".into()));
    };
    let registry = first.registry().clone();
    if factors.iter().any(|f| f.is_zero()) {
        return Ok(GrassmannElement::zero(&registry));
    }
    let parity: Option<Vec<bool>> = factors
        .iter()
        .map(|f| {
            if f.is_even() {
                Some(false)
            } else if f.is_odd() {
                Some(true)
            } else {
                None
            }
        })
        .collect();
    let Some(parity) = parity else {
        let mut acc = GrassmannElement::one(&registry);
        for f in factors {
            acc = acc.try_mul(f)?;
        }
        return integrate_measure(&acc, written);
    };

    let mut order: Vec<usize> = (0..factors.len()).filter(|&i| factors[i].len() == 1).collect();
    order.extend((0..factors.len()).filter(|&i| factors[i].len() != 1));
    let mut negate = false;
    for (p, &i) in order.iter().enumerate() {
        for &j in &order[p + 1..] {
            if j < i && parity[i] && parity[j] {
                negate = !negate;
            }
        }
    }

    let mut last = Vec::with_capacity(written.len());
    for &g in written {
        match order.iter().rposition(|&i| factors[i].support() & (1 << g) != 0) {
            Some(p) => last.push(p),
            None => return Ok(GrassmannElement::zero(&registry)),
        }
    }
    let mut applied: Vec<usize> = Vec::with_capacity(written.len());
    let mut acc = GrassmannElement::one(&registry);
    for (p, &i) in order.iter().enumerate() {
        let due = written
            .iter()
            .zip(&last)
            .filter(|(_, &l)| l == p)
            .fold(0, |m, (&g, _)| m | 1 << g);
        acc = acc.try_mul_filtered(&factors[i], |m| m & due == due)?;
        let rest_odd = order[p + 1..].iter().filter(|&&j| parity[j]).count() % 2 == 1;
        for (q, &g) in written.iter().enumerate() {
            if last[q] == p {
                acc = acc.right_derivative(g);
                applied.push(q);
                negate ^= rest_odd;
            }
        }
        if acc.is_zero() {
            return Ok(acc);
        }
    }
    for a in 0..applied.len() {
        for b in a + 1..applied.len() {
            if applied[a] > applied[b] {
                negate = !negate;
            }
        }
    }
    Ok(if negate { -&acc } else { acc })
}

pub fn left_derivative(x: &GrassmannElement, g: Gen) -> GrassmannElement {
    x.left_derivative(g)
}

/// `Σ c_g ∂/∂g` with left derivatives.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FirstOrderOperator {
    terms: BTreeMap<Gen, Scalar>,
}

impl FirstOrderOperator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, g: Gen, c: Scalar) {
        let e = self.terms.entry(g).or_insert_with(Scalar::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&g);
        }
    }

    pub fn with(mut self, g: Gen, c: Scalar) -> Self {
        self.add(g, c);
        self
    }

    pub fn coefficient(&self, g: Gen) -> Scalar {
        self.terms.get(&g).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Gen, &Scalar)> {
        self.terms.iter().map(|(g, c)| (*g, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn apply(&self, x: &GrassmannElement) -> GrassmannElement {
        let mut out = GrassmannElement::zero(x.registry());
        for (g, c) in &self.terms {
            out += &x.left_derivative(*g).scale(c);
        }
        out
    }
}

pub fn apply_operator(d: &FirstOrderOperator, x: &GrassmannElement) -> GrassmannElement {
    d.apply(x)
}

/// Applies `d_1 d_2 … d_k`, the rightmost factor first.
pub fn apply_product(factors: &[FirstOrderOperator], x: &GrassmannElement) -> GrassmannElement {
    factors.iter().rev().fold(x.clone(), |y, d| d.apply(&y))
}

/// A homogeneous monomial `f` with `d_1 d_2 … d_k f = 1`.
///
/// Each factor gets the first generator (in registry order) with a nonzero
/// coefficient that no earlier factor took; if the resulting product of
/// derivatives vanishes, later choices are tried in the same order.
pub fn invert_operator_on_one(
    registry: &Arc<GeneratorRegistry>,
    factors: &[FirstOrderOperator],
) -> Result<GrassmannElement> {
    let one = GrassmannElement::one(registry);
    let mut chosen = Vec::with_capacity(factors.len());
    let mut attempts = 0usize;
    let found = search(registry, factors, &mut chosen, 0, &mut attempts)?;
    let f = found.ok_or_else(|| {
        Error::OperatorInversion(format!("no monomial preimage among {} factors", factors.len()))
    })?;
    if apply_product(factors, &f) != one {
        return Err(Error::OperatorInversion("postcondition d f = 1 failed".into()));
    }
    Ok(f)
}

const MAX_INVERSION_ATTEMPTS: usize = 100_000;

fn search(
    registry: &Arc<GeneratorRegistry>,
    factors: &[FirstOrderOperator],
    chosen: &mut Vec<Gen>,
    used: Monomial,
    attempts: &mut usize,
) -> Result<Option<GrassmannElement>> {
    if chosen.len() == factors.len() {
        *attempts += 1;
        if *attempts > MAX_INVERSION_ATTEMPTS {
            return Err(Error::OperatorInversion("search limit exceeded".into()));
        }
        let f = GrassmannElement::product_of(registry, chosen, Scalar::one());
        let v = apply_product(factors, &f).scalar_part();
        if v.is_zero() {
            return Ok(None);
        }
        return Ok(Some(f.scale(&v.recip())));
    }
    let d = &factors[chosen.len()];
    if d.is_empty() {
        return Err(Error::OperatorInversion("zero operator factor".into()));
    }
    for (g, _) in d.terms() {
        if used & (1 << g) != 0 {
            continue;
        }
        chosen.push(g);
        let r = search(registry, factors, chosen, used | (1 << g), attempts)?;
        chosen.pop();
        if r.is_some() {
            return Ok(r);
        }
    }
    Ok(None)
}
