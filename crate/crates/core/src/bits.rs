//! Classical strings: bit strings, basis strings and BB84 keys.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A string of classical bits. Index 0 is the leftmost character and the
/// most significant bit of the integer view.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    /// `n`-bit big-endian representation of `index`.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|i| (index >> (n - 1 - i)) & 1 == 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| rng.random::<bool>()).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidArgument(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Conjugate coding bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Computational basis {|0⟩, |1⟩}, written `+`.
    Rectilinear,
    /// Hadamard basis {|+⟩, |−⟩}, written `x`.
    Diagonal,
}

impl Basis {
    pub fn symbol(self) -> char {
        match self {
            Basis::Rectilinear => '+',
            Basis::Diagonal => 'x',
        }
    }

    /// The choice bit whose token check covers positions in this basis.
    pub fn choice_bit(self) -> bool {
        self == Basis::Diagonal
    }
}

/// A string over {rectilinear, diagonal}, serialized with `+` and `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BasisString(Vec<Basis>);

impl BasisString {
    pub fn new(bases: Vec<Basis>) -> Self {
        Self(bases)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { Basis::Diagonal } else { Basis::Rectilinear }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Basis {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = Basis> + '_ {
        self.0.iter().copied()
    }

    pub fn count(&self, basis: Basis) -> usize {
        self.0.iter().filter(|&&b| b == basis).count()
    }
}

impl fmt::Display for BasisString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{}", b.symbol()))
    }
}

impl FromStr for BasisString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(Basis::Rectilinear),
                'x' | 'X' | '×' => Ok(Basis::Diagonal),
                other => Err(Error::InvalidArgument(format!("`{other}` is not a basis symbol"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Serialize for BasisString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BasisString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A conjugate-coding key: bit `x[i]` encoded in basis `theta[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BB84Key {
    x: BitString,
    theta: BasisString,
}

impl BB84Key {
    pub fn new(x: BitString, theta: BasisString) -> Result<Self> {
        if x.len() != theta.len() {
            return Err(Error::InvalidArgument(format!("key has {} bits but {} bases", x.len(), theta.len())));
        }
        Ok(Self { x, theta })
    }

    /// Parse from the textual form, e.g. `("01", "+x")`.
    pub fn parse(x: &str, theta: &str) -> Result<Self> {
        Self::new(x.parse()?, theta.parse()?)
    }

    /// Uniform independent `x` and `theta`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let x = BitString::random(n, rng);
        let theta = BasisString::random(n, rng);
        Self { x, theta }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &BitString {
        &self.x
    }

    pub fn theta(&self) -> &BasisString {
        &self.theta
    }
}

impl<'de> Deserialize<'de> for BB84Key {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x: BitString,
            theta: BasisString,
        }
        let raw = Raw::deserialize(deserializer)?;
        BB84Key::new(raw.x, raw.theta).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing a `bool` as the integer 0 or 1.
pub mod bit_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bit: &bool, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(*bit as u8)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<bool, D::Error> {
        match u8::deserialize(deserializer)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!("{other} is not a bit"))),
        }
    }
}
