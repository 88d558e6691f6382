//! Canonical text and JSON forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::expr::*;
use super::members::{display_order, HierarchyMember, MemberKind};
use crate::error::{Error, Result};

/// `u`, `u'`, …, `u''''`, then `u^(5)`, `u^(6)`, ….
pub fn field_name(var: char, order: u32) -> String {
    if order <= 4 {
        format!("{var}{}", "'".repeat(order as usize))
    } else {
        format!("{var}^({order})")
    }
}

fn slot_name(var: char, s: Slot) -> String {
    match s {
        Slot::Unit => "1".into(),
        Slot::D(a) => field_name(var, a),
    }
}

/// Sign and magnitude text of a coefficient; the magnitude is `None` for 1.
fn coeff_parts(c: &Coeff) -> (bool, Option<String>) {
    let (re, im) = (&c.re, &c.im);
    if im.is_zero() {
        let mag = re.abs();
        return (re.is_negative(), (!mag.is_one()).then(|| mag.to_string()));
    }
    if re.is_zero() {
        let mag = im.abs();
        let text = if mag.is_one() { "i".to_string() } else { format!("{mag}i") };
        return (im.is_negative(), Some(text));
    }
    let sep = if im.is_negative() { "-" } else { "+" };
    let mag = im.abs();
    let imt = if mag.is_one() { "i".to_string() } else { format!("{mag}i") };
    (false, Some(format!("({re}{sep}{imt})")))
}

fn key_factors(k: &DiagKey, var: char) -> Vec<String> {
    let mut f = Vec::new();
    match k.tx {
        0 => {}
        1 => f.push("(t+x)".to_string()),
        p => f.push(format!("(t+x)^{p}")),
    }
    if let Slot::D(a) = k.slot {
        f.push(field_name(var, a));
    }
    let mut pairs: Vec<(String, usize)> = Vec::new();
    let items = k
        .scalar
        .moments
        .iter()
        .map(|&a| format!("<1,{}>", field_name(var, a)))
        .chain(k.scalar.brackets.iter().map(|b| {
            format!("<{},{}>", slot_name(var, Slot::D(b.i)), slot_name(var, Slot::D(b.j)))
        }));
    for s in items {
        match pairs.last_mut() {
            Some((p, cnt)) if *p == s => *cnt += 1,
            _ => pairs.push((s, 1)),
        }
    }
    for (s, cnt) in pairs {
        f.push(if cnt > 1 { format!("{s}^{cnt}") } else { s });
    }
    f
}

/// Deterministic text of a sum of diagonal terms; `"0"` for the empty sum.
pub fn render_expr(e: &DiagExpr, var: char) -> String {
    let mut keys: Vec<(&DiagKey, &Coeff)> = e.iter().collect();
    keys.sort_by(|a, b| display_order(a.0, b.0));
    let mut out = String::new();
    for (idx, (k, c)) in keys.into_iter().enumerate() {
        let (neg, mag) = coeff_parts(c);
        let mut parts = Vec::new();
        if let Some(m) = mag {
            parts.push(m);
        }
        parts.extend(key_factors(k, var));
        let body = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
        if idx == 0 {
            out.push_str(if neg { "-" } else { "" });
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn lhs_text(m: &HierarchyMember) -> String {
    let sign = if m.lhs_sign < 0 { "-" } else { "" };
    match m.kind {
        MemberKind::Painleve2 => format!("{sign}(t+x)*u"),
        MemberKind::Mkdv => format!("{sign}v_t{}", 2 * m.n + 1),
    }
}

/// `(t+x)*u = u'' - 2*u*<u,u>` and the like.
pub fn render(m: &HierarchyMember) -> String {
    format!("{} = {}", lhs_text(m), render_expr(&m.rhs, m.kind.var()))
}

// ---------------------------------------------------------------------------
// parsing

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    var: char,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str, var: char) -> Self {
        Self { s: s.as_bytes(), pos: 0, var }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at column {}", self.pos + 1)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        Ok(text.parse().unwrap())
    }

    fn small(&mut self) -> Result<u32> {
        self.integer()?
            .to_u32()
            .map_or_else(|| self.err("integer too large"), Ok)
    }

    fn rational(&mut self) -> Result<BigRational> {
        let num = self.integer()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let den = self.integer()?;
            if den.is_zero() {
                return self.err("zero denominator");
            }
            return Ok(BigRational::new(num, den));
        }
        Ok(BigRational::from_integer(num))
    }

    fn is_imag_unit(&self) -> bool {
        self.s.get(self.pos) == Some(&b'i') && !self.s.get(self.pos + 1).is_some_and(|c| c.is_ascii_alphanumeric())
    }

    /// `u`, `u'''`, `u^(5)`; also `1` when `allow_unit`.
    fn slot(&mut self, allow_unit: bool) -> Result<Slot> {
        match self.peek() {
            Some(b'1') if allow_unit => {
                self.pos += 1;
                Ok(Slot::Unit)
            }
            Some(c) if c as char == self.var => {
                self.pos += 1;
                if self.s.get(self.pos) == Some(&b'^') && self.s.get(self.pos + 1) == Some(&b'(') {
                    self.pos += 2;
                    let k = self.small()?;
                    self.expect(b')')?;
                    return Ok(Slot::D(k));
                }
                let mut k = 0;
                while self.s.get(self.pos) == Some(&b'\'') {
                    k += 1;
                    self.pos += 1;
                }
                Ok(Slot::D(k))
            }
            _ => self.err(&format!("expected '{}'", self.var)),
        }
    }

    fn power(&mut self) -> Result<u32> {
        if self.eat(b'^') {
            self.small()
        } else {
            Ok(1)
        }
    }

    /// One `*`-separated factor, folded into `(coeff, key)`.
    fn factor(&mut self, coeff: &mut Coeff, key: &mut DiagKey, have_field: &mut bool) -> Result<()> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let r = self.rational()?;
                if self.is_imag_unit() {
                    self.pos += 1;
                    *coeff = coeff.clone() * Coeff::new(BigRational::zero(), r);
                } else {
                    *coeff = coeff.clone() * Coeff::new(r, BigRational::zero());
                }
            }
            Some(b'i') if self.is_imag_unit() => {
                self.pos += 1;
                *coeff = coeff.clone() * imag(1);
            }
            Some(b'(') => {
                self.pos += 1;
                if self.eat(b't') {
                    self.expect(b'+')?;
                    self.expect(b'x')?;
                    self.expect(b')')?;
                    key.tx += self.power()?;
                } else {
                    let neg_re = self.eat(b'-');
                    let mut re = self.rational()?;
                    if neg_re {
                        re = -re;
                    }
                    let neg_im = if self.eat(b'-') {
                        true
                    } else {
                        self.expect(b'+')?;
                        false
                    };
                    let mut im = if self.is_imag_unit() { BigRational::one() } else { self.rational()? };
                    if !self.is_imag_unit() {
                        return self.err("expected 'i'");
                    }
                    self.pos += 1;
                    if neg_im {
                        im = -im;
                    }
                    self.expect(b')')?;
                    *coeff = coeff.clone() * Coeff::new(re, im);
                }
            }
            Some(b'<') => {
                self.pos += 1;
                let a = self.slot(true)?;
                self.expect(b',')?;
                let b = self.slot(true)?;
                self.expect(b'>')?;
                let p = self.power()?;
                for _ in 0..p {
                    key.scalar = key.scalar.with_pair(a, b);
                }
            }
            Some(c) if c as char == self.var => {
                if *have_field {
                    return self.err("a term may hold only one field factor outside brackets");
                }
                key.slot = self.slot(false)?;
                *have_field = true;
            }
            _ => return self.err("unexpected character"),
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<DiagExpr> {
        let mut out = DiagExpr::zero();
        let mut first = true;
        loop {
            let negative = if self.eat(b'-') {
                true
            } else if !first && self.eat(b'+') {
                false
            } else if first {
                false
            } else {
                break;
            };
            first = false;
            let mut coeff = Coeff::one();
            let mut key = DiagKey { slot: Slot::Unit, tx: 0, scalar: Scalar::one() };
            let mut have_field = false;
            self.factor(&mut coeff, &mut key, &mut have_field)?;
            while self.eat(b'*') {
                self.factor(&mut coeff, &mut key, &mut have_field)?;
            }
            if negative {
                coeff = -coeff;
            }
            out.add_term(key, coeff);
            match self.peek() {
                Some(b'+') | Some(b'-') => continue,
                _ => break,
            }
        }
        Ok(out)
    }
}

/// Parse a sum such as `i*u'' - 2i*u*<u,u>` in the field variable `var`.
pub fn parse_expr(s: &str, var: char) -> Result<DiagExpr> {
    let mut p = Parser::new(s, var);
    let e = p.sum()?;
    if !p.at_end() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Inverse of [`render`].
pub fn parse_member(s: &str) -> Result<HierarchyMember> {
    let (lhs, rhs) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse("expected an equation 'lhs = rhs'".into()))?;
    let lhs: String = lhs.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, body) = match lhs.strip_prefix('-') {
        Some(rest) => (-1, rest.to_string()),
        None => (1, lhs.clone()),
    };
    if body == "(t+x)*u" {
        let e = parse_expr(rhs, 'u')?;
        let top = e
            .iter()
            .filter_map(|(k, _)| match k.slot {
                Slot::D(a) => Some(a),
                Slot::Unit => None,
            })
            .max()
            .ok_or_else(|| Error::Parse("empty right-hand side".into()))?;
        if top == 0 || top % 2 == 1 {
            return Err(Error::Parse(format!("highest derivative {top} is not of the form 2n")));
        }
        return HierarchyMember::new(top / 2, MemberKind::Painleve2, sign, e);
    }
    if let Some(order) = body.strip_prefix("v_t") {
        let k: u32 = order.parse().map_err(|_| Error::Parse(format!("bad time variable '{body}'")))?;
        if k < 3 || k.is_multiple_of(2) {
            return Err(Error::Parse(format!("time variable t_{k} is not of the form t_(2n+1)")));
        }
        let e = parse_expr(rhs, 'v')?;
        return HierarchyMember::new((k - 1) / 2, MemberKind::Mkdv, sign, e);
    }
    Err(Error::Parse(format!("unrecognised left-hand side '{lhs}'")))
}

fn int(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(v) => json!(v),
        None => json!(b.to_string()),
    }
}

/// JSON object `{kind, n, lhs, terms: [{coeff_num, coeff_den, derivative_order, brackets, t_plus_x_power}]}`.
pub fn to_json(m: &HierarchyMember) -> Value {
    let terms: Vec<Value> = m
        .terms()
        .iter()
        .map(|t| {
            json!({
                "coeff_num": int(t.coeff.numer()),
                "coeff_den": int(t.coeff.denom()),
                "derivative_order": t.derivative_order,
                "brackets": t.brackets.iter().map(|b| vec![b.i, b.j]).collect::<Vec<_>>(),
                "t_plus_x_power": t.t_plus_x_power,
            })
        })
        .collect();
    json!({
        "kind": match m.kind { MemberKind::Painleve2 => "pii", MemberKind::Mkdv => "mkdv" },
        "n": m.n,
        "lhs": lhs_text(m),
        "terms": terms,
    })
}

/// Inverse of [`to_json`].
pub fn from_json(v: &Value) -> Result<HierarchyMember> {
    let bad = |what: &str| Error::Parse(format!("member JSON: {what}"));
    let kind = match v["kind"].as_str() {
        Some("pii") => MemberKind::Painleve2,
        Some("mkdv") => MemberKind::Mkdv,
        _ => return Err(bad("kind must be 'pii' or 'mkdv'")),
    };
    let n = v["n"].as_u64().ok_or_else(|| bad("n"))? as u32;
    let sign = if v["lhs"].as_str().ok_or_else(|| bad("lhs"))?.starts_with('-') { -1 } else { 1 };
    let num = |x: &Value| -> Result<BigInt> {
        if let Some(i) = x.as_i64() {
            Ok(BigInt::from(i))
        } else {
            x.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad("coefficient"))
        }
    };
    let mut rhs = DiagExpr::zero();
    for t in v["terms"].as_array().ok_or_else(|| bad("terms"))? {
        let c = BigRational::new(num(&t["coeff_num"])?, num(&t["coeff_den"])?);
        let mut scalar = Scalar::one();
        for b in t["brackets"].as_array().ok_or_else(|| bad("brackets"))? {
            let i = b[0].as_u64().ok_or_else(|| bad("bracket"))? as u32;
            let j = b[1].as_u64().ok_or_else(|| bad("bracket"))? as u32;
            scalar = scalar.with_pair(Slot::D(i), Slot::D(j));
        }
        let key = DiagKey {
            slot: Slot::D(t["derivative_order"].as_u64().ok_or_else(|| bad("derivative_order"))? as u32),
            tx: t["t_plus_x_power"].as_u64().unwrap_or(0) as u32,
            scalar,
        };
        rhs.add_term(key, Coeff::new(c, BigRational::zero()));
    }
    HierarchyMember::new(n, kind, sign, rhs)
}
