//! Elements, characters, pairing, and the endomorphism ring of X = R x Z(2).
//!
//! The character group of X is again isomorphic to R x Z(2); the pairing of
//! x = (t, k) with y = (s, l) is exp(i s t) * (-1)^(k l). Every continuous
//! endomorphism acts coordinatewise as (t, k) -> (a' t, a'' k) with a' real
//! and a'' in {0, 1}, and is its own adjoint under the pairing.

use num_complex::Complex64;
use std::ops::{Add, BitXor, Neg};

/// An element of Z(2), the cyclic group of order 2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bit(u8);

impl Bit {
    pub const ZERO: Bit = Bit(0);
    pub const ONE: Bit = Bit(1);

    /// Reduces any integer representative mod 2.
    pub fn new(v: u8) -> Self {
        Bit(v & 1)
    }

    pub fn as_u8(self) -> u8 {
        self.0
    }

    pub fn is_one(self) -> bool {
        self.0 == 1
    }

    /// (-1)^bit as a real sign.
    pub fn sign(self) -> f64 {
        if self.0 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    /// Product in Z(2) viewed as a ring (logical AND).
    pub fn and(self, other: Bit) -> Bit {
        Bit(self.0 & other.0)
    }
}

impl BitXor for Bit {
    type Output = Bit;
    fn bitxor(self, rhs: Bit) -> Bit {
        Bit(self.0 ^ rhs.0)
    }
}

impl std::fmt::Display for Bit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A point x = (t, k) of X = R x Z(2).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GroupElement {
    pub t: f64,
    pub k: Bit,
}

impl GroupElement {
    pub fn new(t: f64, k: Bit) -> Self {
        GroupElement { t, k }
    }

    pub fn zero() -> Self {
        GroupElement { t: 0.0, k: Bit::ZERO }
    }
}

impl Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        GroupElement { t: self.t + rhs.t, k: self.k ^ rhs.k }
    }
}

/// A character y = (s, l) of X, identified with a point of R x Z(2).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Character {
    pub s: f64,
    pub l: Bit,
}

impl Character {
    pub fn new(s: f64, l: Bit) -> Self {
        Character { s, l }
    }

    pub fn zero() -> Self {
        Character { s: 0.0, l: Bit::ZERO }
    }
}

impl Add for Character {
    type Output = Character;
    fn add(self, rhs: Character) -> Character {
        Character { s: self.s + rhs.s, l: self.l ^ rhs.l }
    }
}

impl Neg for Character {
    type Output = Character;
    // -(s, l) = (-s, l): the Z(2) part is its own inverse.
    fn neg(self) -> Character {
        Character { s: -self.s, l: self.l }
    }
}

/// The value of the character y at the element x:
/// (x, y) = exp(i s t) * (-1)^(k l). Always of modulus 1.
pub fn pair(x: GroupElement, y: Character) -> Complex64 {
    Complex64::from_polar(1.0, x.t * y.s) * x.k.and(y.l).sign()
}

/// A continuous endomorphism of X, acting as (t, k) -> (re * t, disc * k).
///
/// Endomorphisms are self-adjoint: the same pair acts on characters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Endomorphism {
    pub re: f64,
    pub disc: Bit,
}

impl Endomorphism {
    pub fn new(re: f64, disc: Bit) -> Self {
        Endomorphism { re, disc }
    }

    pub fn zero() -> Self {
        Endomorphism { re: 0.0, disc: Bit::ZERO }
    }

    pub fn identity() -> Self {
        Endomorphism { re: 1.0, disc: Bit::ONE }
    }

    pub fn apply(&self, x: GroupElement) -> GroupElement {
        GroupElement { t: self.re * x.t, k: self.disc.and(x.k) }
    }

    /// Adjoint action on characters; identical data since a = a~.
    pub fn apply_char(&self, y: Character) -> Character {
        Character { s: self.re * y.s, l: self.disc.and(y.l) }
    }

    /// True iff the endomorphism is a topological automorphism of X,
    /// i.e. re != 0 and disc = 1.
    pub fn is_automorphism(&self) -> bool {
        self.re != 0.0 && self.disc.is_one()
    }
}

impl Neg for Endomorphism {
    type Output = Endomorphism;
    // -a acts as x -> -(a x); on the Z(2) coordinate negation is the identity.
    fn neg(self) -> Endomorphism {
        Endomorphism { re: -self.re, disc: self.disc }
    }
}

/// a*d - b*c computed in End(X). On the discrete part subtraction agrees with
/// addition mod 2, so the disc coordinate is a''d'' XOR b''c''.
pub fn endo_combine(
    a: Endomorphism,
    d: Endomorphism,
    b: Endomorphism,
    c: Endomorphism,
) -> Endomorphism {
    Endomorphism {
        re: a.re * d.re - b.re * c.re,
        disc: a.disc.and(d.disc) ^ b.disc.and(c.disc),
    }
}
