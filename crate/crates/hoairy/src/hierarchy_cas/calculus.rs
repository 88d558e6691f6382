//! t-derivatives, products, contractions and exact antiderivatives.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::expr::*;
use crate::error::{Error, Result};

pub fn diff_scalar(e: &ScalarExpr) -> ScalarExpr {
    let mut out = ScalarExpr::zero();
    for (s, c) in e.iter() {
        for d in s.diff() {
            out.add_term(d, c.clone());
        }
    }
    out
}

fn diff_diag_key(k: &DiagKey) -> Vec<(DiagKey, i64)> {
    let mut out = Vec::new();
    if let Some(s) = k.slot.diff() {
        out.push((DiagKey { slot: s, ..k.clone() }, 1));
    }
    for d in k.scalar.diff() {
        out.push((DiagKey { scalar: d, ..k.clone() }, 1));
    }
    if k.tx > 0 {
        out.push((DiagKey { tx: k.tx - 1, ..k.clone() }, k.tx as i64));
    }
    out
}

pub fn diff_diag(e: &DiagExpr) -> DiagExpr {
    let mut out = DiagExpr::zero();
    for (k, c) in e.iter() {
        for (d, m) in diff_diag_key(k) {
            out.add_term(d, c.clone() * real(m));
        }
    }
    out
}

fn diff_two_key(k: &TwoKey) -> Vec<TwoKey> {
    let mut out = Vec::new();
    if let Some(s) = k.left.diff() {
        out.push(TwoKey { left: s, ..k.clone() });
    }
    if let Some(s) = k.right.diff() {
        out.push(TwoKey { right: s, ..k.clone() });
    }
    for d in k.scalar.diff() {
        out.push(TwoKey { scalar: d, ..k.clone() });
    }
    out
}

pub fn diff_two(e: &TwoExpr) -> TwoExpr {
    let mut out = TwoExpr::zero();
    for (k, c) in e.iter() {
        for d in diff_two_key(k) {
            out.add_term(d, c.clone());
        }
    }
    out
}

fn no_tx(e: &DiagExpr, what: &str) -> Result<()> {
    if e.iter().any(|(k, _)| k.tx > 0) {
        return Err(Error::Algebra(format!("{what}: (t+x) factors cannot enter a bracket or kernel")));
    }
    Ok(())
}

/// `f(x) g(y)`.
pub fn outer(f: &DiagExpr, g: &DiagExpr) -> Result<TwoExpr> {
    no_tx(f, "outer")?;
    no_tx(g, "outer")?;
    let mut out = TwoExpr::zero();
    for (a, ca) in f.iter() {
        for (b, cb) in g.iter() {
            let key = TwoKey { left: a.slot, right: b.slot, scalar: a.scalar.mul(&b.scalar) };
            out.add_term(key, ca.clone() * cb.clone());
        }
    }
    Ok(out)
}

/// `⟨f, g⟩`.
pub fn pairing(f: &DiagExpr, g: &DiagExpr) -> Result<ScalarExpr> {
    no_tx(f, "pairing")?;
    no_tx(g, "pairing")?;
    let mut out = ScalarExpr::zero();
    for (a, ca) in f.iter() {
        for (b, cb) in g.iter() {
            out.add_term(a.scalar.mul(&b.scalar).with_pair(a.slot, b.slot), ca.clone() * cb.clone());
        }
    }
    Ok(out)
}

/// `s · f`.
pub fn scalar_times(s: &ScalarExpr, f: &DiagExpr) -> DiagExpr {
    let mut out = DiagExpr::zero();
    for (a, ca) in s.iter() {
        for (k, cb) in f.iter() {
            out.add_term(DiagKey { scalar: k.scalar.mul(a), ..k.clone() }, ca.clone() * cb.clone());
        }
    }
    out
}

/// `∫ K(x, y) g(y) dσ(y)` for a single slot `g`.
pub fn contract_right(k: &TwoExpr, g: Slot) -> DiagExpr {
    let mut out = DiagExpr::zero();
    for (key, c) in k.iter() {
        out.add_term(
            DiagKey { slot: key.left, tx: 0, scalar: key.scalar.with_pair(key.right, g) },
            c.clone(),
        );
    }
    out
}

/// Operator product `(AB)(x, y) = ∫ A(x, z) B(z, y) dσ(z)`.
pub fn compose(a: &TwoExpr, b: &TwoExpr) -> TwoExpr {
    let mut out = TwoExpr::zero();
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let key = TwoKey {
                left: ka.left,
                right: kb.right,
                scalar: ka.scalar.mul(&kb.scalar).with_pair(ka.right, kb.left),
            };
            out.add_term(key, ca.clone() * cb.clone());
        }
    }
    out
}

/// Restriction `K(x, x)` of a kernel that does not depend on its second argument.
pub fn diagonal_of_column(k: &TwoExpr) -> Result<DiagExpr> {
    let mut out = DiagExpr::zero();
    for (key, c) in k.iter() {
        if key.right != Slot::Unit {
            return Err(Error::Algebra("kernel depends on its second argument".into()));
        }
        out.add_term(DiagKey { slot: key.left, tx: 0, scalar: key.scalar.clone() }, c.clone());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// antiderivatives

/// Multisets of brackets with `count` entries, total weight `w`, entries `≥ min`.
fn bracket_lists(count: usize, w: u32, min: BracketFactor) -> Vec<Vec<BracketFactor>> {
    if count == 0 {
        return if w == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    // entries are ordered lexicographically, so the only weight bound is 2 per entry
    if w < 2 * count as u32 {
        return out;
    }
    let max_first = w - 2 * (count as u32 - 1);
    for i in min.i..=max_first {
        let j_start = if i == min.i { min.j.max(i) } else { i };
        for j in j_start.. {
            let b = BracketFactor::new(i, j);
            if b.weight() > max_first {
                break;
            }
            for mut rest in bracket_lists(count - 1, w - b.weight(), b) {
                rest.insert(0, b);
                out.push(rest);
            }
        }
    }
    out
}

fn moment_lists(count: usize, w: u32, min: u32) -> Vec<Vec<u32>> {
    if count == 0 {
        return if w == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    if w < count as u32 {
        return out;
    }
    for a in min..=(w - count as u32) {
        for mut rest in moment_lists(count - 1, w - (a + 1), a) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

fn scalars(nb: usize, nm: usize, w: u32) -> Vec<Scalar> {
    let mut out = Vec::new();
    for wb in 0..=w {
        let bl = bracket_lists(nb, wb, BracketFactor::new(0, 0));
        if bl.is_empty() {
            continue;
        }
        let ml = moment_lists(nm, w - wb, 0);
        for b in &bl {
            for m in &ml {
                out.push(Scalar { brackets: b.clone(), moments: m.clone() });
            }
        }
    }
    out
}

trait Graded: Ord + Clone + std::hash::Hash + std::fmt::Debug {
    type Shape: Ord + Clone;
    fn shape(&self) -> Self::Shape;
    fn weight(&self) -> u32;
    fn derivative(&self) -> Vec<Self>;
    fn candidates(shape: &Self::Shape, w: u32) -> Vec<Self>;
}

impl Graded for Scalar {
    type Shape = (usize, usize);
    fn shape(&self) -> Self::Shape {
        (self.brackets.len(), self.moments.len())
    }
    fn weight(&self) -> u32 {
        Scalar::weight(self)
    }
    fn derivative(&self) -> Vec<Self> {
        self.diff()
    }
    fn candidates(shape: &Self::Shape, w: u32) -> Vec<Self> {
        if shape.0 == 0 && shape.1 == 0 {
            // constants are not admissible antiderivatives
            return vec![];
        }
        scalars(shape.0, shape.1, w)
    }
}

impl Graded for TwoKey {
    type Shape = (bool, bool, usize, usize);
    fn shape(&self) -> Self::Shape {
        (self.left == Slot::Unit, self.right == Slot::Unit, self.scalar.brackets.len(), self.scalar.moments.len())
    }
    fn weight(&self) -> u32 {
        TwoKey::weight(self)
    }
    fn derivative(&self) -> Vec<Self> {
        diff_two_key(self)
    }
    fn candidates(shape: &Self::Shape, w: u32) -> Vec<Self> {
        let (lu, ru, nb, nm) = *shape;
        if lu && ru && nb == 0 && nm == 0 {
            return vec![];
        }
        let slots = |unit: bool, max: u32| -> Vec<Slot> {
            if unit {
                vec![Slot::Unit]
            } else {
                (0..max).map(Slot::D).collect()
            }
        };
        let mut out = Vec::new();
        for l in slots(lu, w) {
            for r in slots(ru, w) {
                let used = l.weight() + r.weight();
                if used > w {
                    continue;
                }
                for s in scalars(nb, nm, w - used) {
                    out.push(TwoKey { left: l, right: r, scalar: s });
                }
            }
        }
        out
    }
}

/// Solve `Σ_c x_c D(c) = target` for one shape/weight group by exact elimination.
fn solve_group<K: Graded>(target: &[(K, Coeff)], shape: &K::Shape, w: u32) -> Result<Sum<K>> {
    let cands = if w == 0 { vec![] } else { K::candidates(shape, w - 1) };
    let mut rows: HashMap<K, usize> = HashMap::new();
    let mut row_keys: Vec<K> = Vec::new();
    let mut cols: Vec<Vec<(usize, i64)>> = Vec::with_capacity(cands.len());
    fn row_of<K: Graded>(k: K, rows: &mut HashMap<K, usize>, row_keys: &mut Vec<K>) -> usize {
        *rows.entry(k.clone()).or_insert_with(|| {
            row_keys.push(k);
            row_keys.len() - 1
        })
    }
    for c in &cands {
        let mut col: BTreeMap<usize, i64> = BTreeMap::new();
        for d in c.derivative() {
            let r = row_of(d, &mut rows, &mut row_keys);
            *col.entry(r).or_insert(0) += 1;
        }
        cols.push(col.into_iter().filter(|&(_, v)| v != 0).collect());
    }
    let mut rhs_rows = Vec::new();
    for (k, c) in target {
        let r = row_of(k.clone(), &mut rows, &mut row_keys);
        rhs_rows.push((r, c.clone()));
    }
    let m = row_keys.len();
    let nc = cands.len();
    // augmented matrix [A | re | im]
    let mut a = vec![vec![BigRational::zero(); nc + 2]; m];
    for (j, col) in cols.iter().enumerate() {
        for &(r, v) in col {
            a[r][j] = rat(v, 1);
        }
    }
    for (r, c) in rhs_rows {
        a[r][nc] = c.re.clone();
        a[r][nc + 1] = c.im.clone();
    }
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..nc {
        let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = BigRational::one() / a[row][col].clone();
        for v in a[row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..nc + 2 {
                    let sub = f.clone() * a[row][c].clone();
                    a[r][c] = a[r][c].clone() - sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    for r in row..m {
        if !a[r][nc].is_zero() || !a[r][nc + 1].is_zero() {
            return Err(Error::Algebra(format!(
                "no local antiderivative exists (weight {w}); the inconsistent component is {:?}",
                row_keys[r]
            )));
        }
    }
    let mut out = Sum::zero();
    for (r, &col) in pivots.iter().enumerate() {
        out.add_term(cands[col].clone(), Coeff::new(a[r][nc].clone(), a[r][nc + 1].clone()));
    }
    Ok(out)
}

fn antiderivative<K: Graded>(e: &Sum<K>) -> Result<Sum<K>> {
    let mut groups: BTreeMap<(K::Shape, u32), Vec<(K, Coeff)>> = BTreeMap::new();
    for (k, c) in e.iter() {
        groups.entry((k.shape(), k.weight())).or_default().push((k.clone(), c.clone()));
    }
    let mut out = Sum::zero();
    for ((shape, w), target) in groups {
        out = out.add(&solve_group(&target, &shape, w)?);
    }
    Ok(out)
}

/// Local t-antiderivative of a kernel; errors when none exists.
pub fn antiderivative_two(e: &TwoExpr) -> Result<TwoExpr> {
    let g = antiderivative(e)?;
    debug_assert_eq!(diff_two(&g), *e);
    Ok(g)
}

/// Local t-antiderivative of a scalar; errors when none exists.
pub fn antiderivative_scalar(e: &ScalarExpr) -> Result<ScalarExpr> {
    let g = antiderivative(e)?;
    debug_assert_eq!(diff_scalar(&g), *e);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerations_cover_weights() {
        for s in scalars(2, 0, 7) {
            assert_eq!(s.weight(), 7);
        }
        // weight 6 with two brackets: (0,0)+(0,2), (0,0)+(1,1), (0,1)+(0,1)
        assert_eq!(scalars(2, 0, 6).len(), 3);
        assert_eq!(moment_lists(2, 4, 0), vec![vec![0, 2], vec![1, 1]]);
    }

    #[test]
    fn antiderivative_of_product_rule() {
        // D(u ⊗ u) = u' ⊗ u + u ⊗ u'
        let uu = TwoKey { left: Slot::D(0), right: Slot::D(0), scalar: Scalar::one() };
        let target = diff_two(&TwoExpr::single(uu.clone(), real(3)));
        let g = antiderivative_two(&target).unwrap();
        assert_eq!(g, TwoExpr::single(uu, real(3)));
    }

    #[test]
    fn non_exact_is_rejected() {
        // u ⊗ u' alone is not a total derivative
        let e = TwoExpr::single(TwoKey { left: Slot::D(0), right: Slot::D(1), scalar: Scalar::one() }, real(1));
        assert!(antiderivative_two(&e).is_err());
        let s = ScalarExpr::single(Scalar::one().with_pair(Slot::D(1), Slot::D(1)), real(1));
        assert!(antiderivative_scalar(&s).is_err());
    }
}
