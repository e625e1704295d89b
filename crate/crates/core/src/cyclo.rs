//! Exact arithmetic in the cyclotomic field Q(ω), ω = e^{2πi/d}.
//!
//! Elements are stored in the power basis 1, ω, …, ω^{φ(d)−1} with rational
//! coefficients, reduced modulo the d-th cyclotomic polynomial Φ_d. For d = 3
//! this is the familiar a + bω with ω² = −1 − ω; for d = 2 and d = 4 it
//! degenerates to rationals and Gaussian rationals respectively.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Reduction data for one d.
#[derive(Debug)]
struct Field {
    degree: usize,
    /// `powers[k]` is ω^k written in the reduced power basis, k in 0..d.
    powers: Vec<Vec<BigRational>>,
}

fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic; coefficients are little-endian.
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    if rem.len() <= dn {
        return vec![BigInt::zero()];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    quot
}

/// Integer coefficients of Φ_d, little-endian.
pub fn cyclotomic_polynomial(d: u32) -> Vec<BigInt> {
    // x^d - 1 = prod_{k | d} Φ_k
    let mut p = vec![BigInt::zero(); d as usize + 1];
    p[0] = -BigInt::one();
    p[d as usize] = BigInt::one();
    for k in 1..d {
        if d % k == 0 {
            p = poly_div_exact(&p, &cyclotomic_polynomial(k));
        }
    }
    p
}

fn build_field(d: u32) -> Field {
    let phi = cyclotomic_polynomial(d);
    let degree = phi.len() - 1;
    let mut powers = Vec::with_capacity(d as usize);
    let mut cur = vec![BigRational::zero(); degree];
    cur[0] = BigRational::one();
    for _ in 0..d {
        powers.push(cur.clone());
        // multiply by ω and reduce the overflow coefficient with Φ_d
        let top = cur[degree - 1].clone();
        let mut next = vec![BigRational::zero(); degree];
        for i in (1..degree).rev() {
            next[i] = cur[i - 1].clone();
        }
        if !top.is_zero() {
            for (i, n) in next.iter_mut().enumerate() {
                *n -= &top * BigRational::from_integer(phi[i].clone());
            }
        }
        cur = next;
    }
    Field { degree, powers }
}

fn field(d: u32) -> Arc<Field> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("cyclotomic cache poisoned");
    guard
        .entry(d)
        .or_insert_with(|| Arc::new(build_field(d)))
        .clone()
}

/// An exact element of Q(e^{2πi/d}).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cyclo {
    d: u32,
    coeffs: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero(d: u32) -> Self {
        let degree = field(d).degree;
        Cyclo {
            d,
            coeffs: vec![BigRational::zero(); degree],
        }
    }

    pub fn one(d: u32) -> Self {
        Self::from_rational(d, BigRational::one())
    }

    pub fn from_rational(d: u32, r: BigRational) -> Self {
        let mut z = Self::zero(d);
        z.coeffs[0] = r;
        z
    }

    pub fn from_integer(d: u32, n: i64) -> Self {
        Self::from_rational(d, BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(d: u32, num: i64, den: i64) -> Self {
        Self::from_rational(d, BigRational::new(num.into(), den.into()))
    }

    /// Exact value of an `f64` (every finite double is a dyadic rational).
    pub fn from_f64(d: u32, v: f64) -> Self {
        let r = BigRational::from_float(v).expect("finite coupling");
        Self::from_rational(d, r)
    }

    /// ω^k, with k taken modulo d.
    pub fn omega_pow(d: u32, k: i64) -> Self {
        let f = field(d);
        let k = k.rem_euclid(d as i64) as usize;
        Cyclo {
            d,
            coeffs: f.powers[k].clone(),
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Coefficients in the basis 1, ω, …, ω^{φ(d)−1}.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// Complex conjugate, ω ↦ ω^{−1}.
    pub fn conj(&self) -> Self {
        let f = field(self.d);
        let mut out = vec![BigRational::zero(); f.degree];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let idx = (self.d as usize - k) % self.d as usize;
            for (o, p) in out.iter_mut().zip(&f.powers[idx]) {
                if !p.is_zero() {
                    *o += c * p;
                }
            }
        }
        Cyclo {
            d: self.d,
            coeffs: out,
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Cyclo {
            d: self.d,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.d);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = 2.0 * std::f64::consts::PI * k as f64 / self.d as f64;
            z += Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), angle);
        }
        z
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.d, other.d, "mixing cyclotomic fields of different d");
    }
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, "{}", if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}ω")?,
                _ => write!(f, "{a}ω^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        self.check(rhs);
        Cyclo {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Add for Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: Cyclo) -> Cyclo {
        &self + &rhs
    }
}

impl AddAssign<&Cyclo> for Cyclo {
    fn add_assign(&mut self, rhs: &Cyclo) {
        self.check(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Sub for &Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self.check(rhs);
        Cyclo {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Sub for Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: Cyclo) -> Cyclo {
        &self - &rhs
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        Cyclo {
            d: self.d,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        -&self
    }
}

impl Mul for &Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        self.check(rhs);
        let f = field(self.d);
        let d = self.d as usize;
        // accumulate in Q[x]/(x^d - 1), then reduce
        let mut raw = vec![BigRational::zero(); d];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                raw[(i + j) % d] += a * b;
            }
        }
        let mut out = vec![BigRational::zero(); f.degree];
        for (k, c) in raw.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < f.degree {
                out[k] += c;
            } else {
                for (o, p) in out.iter_mut().zip(&f.powers[k]) {
                    if !p.is_zero() {
                        *o += c * p;
                    }
                }
            }
        }
        Cyclo {
            d: self.d,
            coeffs: out,
        }
    }
}

impl Mul for Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: Cyclo) -> Cyclo {
        &self * &rhs
    }
}
