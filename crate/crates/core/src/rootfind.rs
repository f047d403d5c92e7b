//! Roots in `F_p` of polynomials expected to split into distinct linear
//! factors, plus the small amount of polynomial arithmetic needed for it.
//!
//! Two routes: Horner evaluation at every nonzero residue, and randomized
//! equal-degree splitting of `gcd(f, t^p - t)` with
//! `gcd((t + c)^((p-1)/2) - 1, g)`. Both report nonzero roots only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::field::{Field, FieldElement, FieldModulus};
use crate::metrics::RootPath;

/// Moduli up to this size use exhaustive evaluation under [`RootStrategy::Auto`].
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: u64 = 1 << 16;

/// Dense polynomial over `F_p`, lowest degree first, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<FieldElement>,
}

impl Poly {
    pub fn from_coeffs(mut coeffs: Vec<FieldElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_u64(p: FieldModulus, coeffs: &[u64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| p.elem(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: FieldElement) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `t + c`
    pub fn linear(p: FieldModulus, c: FieldElement) -> Self {
        Self::from_coeffs(vec![c, p.one()])
    }

    /// `prod (t - r)`, computed without counting.
    pub fn from_roots<I: IntoIterator<Item = FieldElement>>(p: FieldModulus, roots: I) -> Self {
        let mut acc = vec![p.one()];
        for r in roots {
            let mut next = vec![p.zero(); acc.len() + 1];
            for (i, &a) in acc.iter().enumerate() {
                next[i + 1] = next[i + 1] + a;
                next[i] = next[i] - a * r;
            }
            acc = next;
        }
        Self::from_coeffs(acc)
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<FieldElement> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.value() == 1)
    }

    pub fn eval(&self, x: FieldElement, field: &Field) -> FieldElement {
        let mut acc = field.zero();
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, x), c);
        }
        acc
    }

    pub fn add(&self, other: &Poly, field: &Field) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = field.zero();
        let out = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(z);
                let b = other.coeffs.get(i).copied().unwrap_or(z);
                field.add(a, b)
            })
            .collect();
        Poly::from_coeffs(out)
    }

    pub fn sub(&self, other: &Poly, field: &Field) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = field.zero();
        let out = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(z);
                let b = other.coeffs.get(i).copied().unwrap_or(z);
                field.sub(a, b)
            })
            .collect();
        Poly::from_coeffs(out)
    }

    pub fn mul(&self, other: &Poly, field: &Field) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        Poly::from_coeffs(out)
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly, field: &Field) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = field.inv(divisor.coeffs[dd]).expect("leading coefficient is nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![field.zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd];
            if c.is_zero() {
                continue;
            }
            let q = field.mul(c, lead_inv);
            quot[i] = q;
            for (k, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + k] = field.sub(rem[i + k], field.mul(q, dc));
            }
        }
        rem.truncate(dd);
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    pub fn rem(&self, divisor: &Poly, field: &Field) -> Poly {
        self.div_rem(divisor, field).1
    }

    pub fn monic(&self, field: &Field) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) if l.value() == 1 => self.clone(),
            Some(l) => {
                let inv = field.inv(l).expect("nonzero leading coefficient");
                Poly::from_coeffs(self.coeffs.iter().map(|&c| field.mul(c, inv)).collect())
            }
        }
    }

    /// Monic gcd; zero only if both inputs are zero.
    pub fn gcd(&self, other: &Poly, field: &Field) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b, field);
            a = b;
            b = r;
        }
        a.monic(field)
    }

    /// `self^e mod modulus` by square-and-multiply.
    pub fn pow_mod(&self, mut e: u64, modulus: &Poly, field: &Field) -> Poly {
        let mut base = self.rem(modulus, field);
        let mut acc = Poly::constant(field.one()).rem(modulus, field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, field).rem(modulus, field);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, field).rem(modulus, field);
            }
        }
        acc
    }

    /// Divides out every factor of `t`.
    fn strip_zero_roots(&self) -> Poly {
        let k = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        Poly::from_coeffs(self.coeffs[k..].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RootStrategy {
    /// Exhaustive for `p <= threshold`, randomized splitting above.
    Auto {
        threshold: u64,
        seed: u64,
    },
    Exhaustive,
    Split {
        seed: u64,
    },
}

impl Default for RootStrategy {
    fn default() -> Self {
        RootStrategy::Auto { threshold: DEFAULT_EXHAUSTIVE_THRESHOLD, seed: 0 }
    }
}

impl RootStrategy {
    pub fn path_for(&self, p: u64) -> RootPath {
        match *self {
            RootStrategy::Auto { threshold, .. } if p <= threshold => RootPath::Exhaustive,
            RootStrategy::Auto { .. } | RootStrategy::Split { .. } => RootPath::Split,
            RootStrategy::Exhaustive => RootPath::Exhaustive,
        }
    }

    fn seed(&self) -> u64 {
        match *self {
            RootStrategy::Auto { seed, .. } | RootStrategy::Split { seed } => seed,
            RootStrategy::Exhaustive => 0,
        }
    }
}

/// Every `a` in `1..p` with `poly(a) = 0`, in increasing order.
pub fn roots_exhaustive(poly: &Poly, field: &Field) -> Vec<FieldElement> {
    assert!(poly.degree().is_some_and(|d| d >= 1), "root finding needs degree >= 1");
    (1..field.p()).map(|a| field.elem(a)).filter(|&a| poly.eval(a, field).is_zero()).collect()
}

/// Nonzero roots via `gcd(poly, t^p - t)` and seeded random splitting.
/// Deterministic for a fixed seed; agrees with [`roots_exhaustive`].
pub fn roots_split(poly: &Poly, seed: u64, field: &Field) -> Vec<FieldElement> {
    assert!(poly.degree().is_some_and(|d| d >= 1), "root finding needs degree >= 1");
    let f = poly.monic(field).strip_zero_roots();
    if f.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let p = field.modulus();
    let t = Poly::linear(p, p.zero());
    let t_p = t.pow_mod(p.value(), &f, field);
    let g = f.gcd(&t_p.sub(&t, field), field);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots = Vec::new();
    split_into(g, field, &mut rng, &mut roots);
    roots.sort();
    roots
}

/// `g` is monic, squarefree, a product of distinct linear factors, and has
/// no root at zero.
fn split_into(g: Poly, field: &Field, rng: &mut ChaCha8Rng, out: &mut Vec<FieldElement>) {
    match g.degree() {
        None | Some(0) => {}
        Some(1) => out.push(field.neg(g.coeffs[0])),
        Some(_) => {
            let p = field.modulus();
            let half = (p.value() - 1) / 2;
            loop {
                let c = p.elem(rng.gen_range(0..p.value()));
                let w = Poly::linear(p, c).pow_mod(half, &g, field);
                let d = g.gcd(&w.sub(&Poly::constant(p.one()), field), field);
                let dd = d.degree().unwrap_or(0);
                if dd > 0 && Some(dd) < g.degree() {
                    let (other, _) = g.div_rem(&d, field);
                    split_into(d, field, rng, out);
                    split_into(other.monic(field), field, rng, out);
                    return;
                }
            }
        }
    }
}

/// Picks the route for `strategy`, returning the roots and the route taken.
pub fn find_roots(poly: &Poly, strategy: &RootStrategy, field: &Field) -> (Vec<FieldElement>, RootPath) {
    let path = strategy.path_for(field.p());
    let roots = match path {
        RootPath::Exhaustive => roots_exhaustive(poly, field),
        RootPath::Split => roots_split(poly, strategy.seed(), field),
    };
    (roots, path)
}

/// True iff `roots` has exactly `deg(poly)` distinct elements.
pub fn splits_completely(poly: &Poly, roots: &[FieldElement]) -> bool {
    let mut r = roots.to_vec();
    r.sort();
    r.dedup();
    r.len() == roots.len() && Some(r.len()) == poly.degree()
}
