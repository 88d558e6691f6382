//! Canonical monomials and sums over exact Gaussian-rational coefficients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact coefficient `a + b i` with rational `a`, `b`.
pub type Coeff = Complex<BigRational>;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn real(num: i64) -> Coeff {
    Coeff::new(rat(num, 1), BigRational::zero())
}

pub fn imag(num: i64) -> Coeff {
    Coeff::new(BigRational::zero(), rat(num, 1))
}

/// One argument of a bracket or a factor of a two-slot kernel: the constant function 1
/// or the `a`-th t-derivative of the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Unit,
    D(u32),
}

impl Slot {
    pub fn weight(self) -> u32 {
        match self {
            Slot::Unit => 0,
            Slot::D(a) => a + 1,
        }
    }

    pub fn diff(self) -> Option<Slot> {
        match self {
            Slot::Unit => None,
            Slot::D(a) => Some(Slot::D(a + 1)),
        }
    }
}

/// `⟨u^{(i)}, u^{(j)}⟩` with `i ≤ j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BracketFactor {
    pub i: u32,
    pub j: u32,
}

impl BracketFactor {
    pub fn new(i: u32, j: u32) -> Self {
        Self { i: i.min(j), j: i.max(j) }
    }

    pub fn weight(self) -> u32 {
        self.i + self.j + 2
    }
}

/// A t-dependent scalar: a product of brackets and first moments `m_a = ⟨1, u^{(a)}⟩`.
/// Both lists are kept sorted; the empty product is 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar {
    pub brackets: Vec<BracketFactor>,
    pub moments: Vec<u32>,
}

impl Scalar {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_one(&self) -> bool {
        self.brackets.is_empty() && self.moments.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.brackets.iter().map(|b| b.weight()).sum::<u32>() + self.moments.iter().map(|a| a + 1).sum::<u32>()
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        let mut brackets: Vec<_> = self.brackets.iter().chain(&other.brackets).cloned().collect();
        let mut moments: Vec<_> = self.moments.iter().chain(&other.moments).cloned().collect();
        brackets.sort();
        moments.sort();
        Scalar { brackets, moments }
    }

    /// Multiply by the pairing `⟨a, b⟩` (`⟨1,1⟩ = 1` since dσ is a probability measure).
    pub fn with_pair(&self, a: Slot, b: Slot) -> Scalar {
        let mut s = self.clone();
        match (a, b) {
            (Slot::Unit, Slot::Unit) => {}
            (Slot::Unit, Slot::D(k)) | (Slot::D(k), Slot::Unit) => {
                s.moments.push(k);
                s.moments.sort();
            }
            (Slot::D(i), Slot::D(j)) => {
                s.brackets.push(BracketFactor::new(i, j));
                s.brackets.sort();
            }
        }
        s
    }

    /// Leibniz rule; the returned scalars are to be summed with coefficient 1 each.
    pub fn diff(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        for k in 0..self.brackets.len() {
            let b = self.brackets[k];
            for nb in [BracketFactor::new(b.i + 1, b.j), BracketFactor::new(b.i, b.j + 1)] {
                let mut s = self.clone();
                s.brackets[k] = nb;
                s.brackets.sort();
                out.push(s);
            }
        }
        for k in 0..self.moments.len() {
            let mut s = self.clone();
            s.moments[k] += 1;
            s.moments.sort();
            out.push(s);
        }
        out
    }
}

/// `(t+x)^p u^{(a)}(t|x) · scalar`, or a pure scalar when the slot is [`Slot::Unit`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiagKey {
    pub slot: Slot,
    pub tx: u32,
    pub scalar: Scalar,
}

impl DiagKey {
    pub fn field(a: u32) -> Self {
        Self { slot: Slot::D(a), tx: 0, scalar: Scalar::one() }
    }

    pub fn weight(&self) -> u32 {
        self.slot.weight() + self.scalar.weight()
    }
}

/// `L(x) R(y) · scalar`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoKey {
    pub left: Slot,
    pub right: Slot,
    pub scalar: Scalar,
}

impl TwoKey {
    pub fn weight(&self) -> u32 {
        self.left.weight() + self.right.weight() + self.scalar.weight()
    }
}

/// A finite sum `Σ c_k · key_k` with nonzero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sum<K: Ord> {
    terms: BTreeMap<K, Coeff>,
}

impl<K: Ord> Default for Sum<K> {
    fn default() -> Self {
        Self { terms: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> Sum<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(key: K, c: Coeff) -> Self {
        let mut s = Self::zero();
        s.add_term(key, c);
        s
    }

    pub fn add_term(&mut self, key: K, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = o.get().clone() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &K) -> Coeff {
        self.terms.get(key).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.iter() {
            out.add_term(k.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&real(-1)))
    }

    pub fn map_keys<L: Ord + Clone, F: Fn(&K) -> L>(&self, f: F) -> Sum<L> {
        let mut out = Sum::zero();
        for (k, v) in self.iter() {
            out.add_term(f(k), v.clone());
        }
        out
    }

    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }
}

impl<K: Ord + Clone> FromIterator<(K, Coeff)> for Sum<K> {
    fn from_iter<I: IntoIterator<Item = (K, Coeff)>>(iter: I) -> Self {
        let mut s = Self::zero();
        for (k, c) in iter {
            s.add_term(k, c);
        }
        s
    }
}

pub type DiagExpr = Sum<DiagKey>;
pub type TwoExpr = Sum<TwoKey>;
pub type ScalarExpr = Sum<Scalar>;

/// The field `u` itself.
pub fn field() -> DiagExpr {
    DiagExpr::single(DiagKey::field(0), Coeff::one())
}
