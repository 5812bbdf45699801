//! Arithmetic in the prime field Z_d for odd primes d.

use std::fmt;

use crate::error::{Error, Result};

/// Largest modulus accepted. Keeps every product of two residues inside a `u64`
/// and dense phase tables small.
pub const MAX_MODULUS: u32 = 1 << 16;

/// A validated odd prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u32);

impl Modulus {
    /// Accepts odd primes up to [`MAX_MODULUS`]. `d = 2` is rejected because the
    /// half-integer phase convention needs 2 to be invertible.
    pub fn new(d: u32) -> Result<Self> {
        if d < 3 || d > MAX_MODULUS || !is_prime(d) {
            return Err(Error::InvalidModulus(d));
        }
        Ok(Modulus(d))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        base %= self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: u32) -> Option<u32> {
        let a = a % self.0;
        if a == 0 {
            None
        } else {
            Some(self.pow(a, (self.0 - 2) as u64))
        }
    }

    /// 2^{-1} mod d, i.e. (d + 1) / 2.
    #[inline]
    pub fn half(self) -> u32 {
        (self.0 + 1) / 2
    }

    /// Dot product of two coordinate slices.
    pub fn dot(self, a: &[u32], b: &[u32]) -> u32 {
        let mut acc: u64 = 0;
        for (x, y) in a.iter().zip(b) {
            acc += *x as u64 * *y as u64;
            if acc >= 1 << 62 {
                acc %= self.0 as u64;
            }
        }
        (acc % self.0 as u64) as u32
    }

    /// `target += c * src` in place.
    pub fn axpy(self, target: &mut [u32], c: u32, src: &[u32]) {
        if c == 0 {
            return;
        }
        for (t, s) in target.iter_mut().zip(src) {
            *t = self.add(*t, self.mul(c, *s));
        }
    }

    pub fn scale(self, v: &mut [u32], c: u32) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2u32;
    while k * k <= d {
        if d % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// An element of Z_d carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: Modulus,
}

impl FieldElement {
    pub fn new(value: i64, modulus: Modulus) -> Self {
        FieldElement {
            value: modulus.reduce(value),
            modulus,
        }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    fn check(self, other: FieldElement) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        Ok(())
    }

    pub fn try_add(self, other: FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement {
            value: self.modulus.add(self.value, other.value),
            modulus: self.modulus,
        })
    }

    pub fn try_mul(self, other: FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement {
            value: self.modulus.mul(self.value, other.value),
            modulus: self.modulus,
        })
    }

    pub fn try_sub(self, other: FieldElement) -> Result<FieldElement> {
        self.check(other)?;
        Ok(FieldElement {
            value: self.modulus.sub(self.value, other.value),
            modulus: self.modulus,
        })
    }

    pub fn neg(self) -> FieldElement {
        FieldElement {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }

    pub fn inverse(self) -> Option<FieldElement> {
        self.modulus.inv(self.value).map(|value| FieldElement {
            value,
            modulus: self.modulus,
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_odd_primes() {
        for d in [0, 1, 2, 4, 9, 15, 21] {
            assert!(Modulus::new(d).is_err(), "d = {d}");
        }
        for d in [3, 5, 7, 11, 13, 101] {
            assert!(Modulus::new(d).is_ok(), "d = {d}");
        }
    }

    #[test]
    fn inverses_and_half() {
        for d in [3u32, 5, 7, 11] {
            let m = Modulus::new(d).unwrap();
            assert_eq!(m.inv(0), None);
            for a in 1..d {
                assert_eq!(m.mul(a, m.inv(a).unwrap()), 1);
            }
            assert_eq!(m.mul(2, m.half()), 1);
        }
    }

    #[test]
    fn mixed_moduli_are_reported() {
        let a = FieldElement::new(1, Modulus::new(3).unwrap());
        let b = FieldElement::new(1, Modulus::new(5).unwrap());
        assert!(matches!(a.try_add(b), Err(Error::ModulusMismatch { .. })));
        assert_eq!(FieldElement::new(-1, a.modulus()).value(), 2);
    }
}
