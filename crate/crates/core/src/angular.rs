//! Angular-momentum coupling coefficients and dipole matrix elements between
//! Zeeman sublevels.
//!
//! Conventions: Condon–Shortley phases throughout, reduced dipole matrix
//! element set to one. A dipole element for the ground→excited transition
//! `|F_g m_g⟩ → |F_e m_e⟩` is the Clebsch–Gordan coefficient
//! `⟨F_g m_g; 1 q | F_e m_e⟩` with `q = m_e − m_g`. Only relative phases of
//! these numbers are observable.
//!
//! The 3-j symbol is evaluated with the Racah sum in exact big-rational
//! arithmetic and converted to `f64` once, at the end.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DamsError, Result};

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i32) -> Self {
        HalfInt(2 * v)
    }

    /// Accepts only exact multiples of one half.
    pub fn from_f64(v: f64) -> Result<Self> {
        let twice = 2.0 * v;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.abs() > 1e6 {
            return Err(DamsError::Domain(format!("{v} is not an integer or half-integer")));
        }
        Ok(HalfInt(twice.round() as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// Iterates `−j, −j+1, …, j`.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.0;
        (0..=j.max(-1)).map(move |k| HalfInt(-j + 2 * k))
    }

    /// Number of projections, `2j + 1`.
    pub fn multiplicity(self) -> usize {
        (self.0 + 1).max(0) as usize
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl From<i32> for HalfInt {
    fn from(v: i32) -> Self {
        HalfInt::from_int(v)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = DamsError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num
                .trim()
                .parse()
                .map_err(|_| DamsError::Domain(format!("cannot parse '{s}' as a half-integer")))?;
            match den.trim() {
                "2" => Ok(HalfInt(num)),
                "1" => Ok(HalfInt(2 * num)),
                _ => Err(DamsError::Domain(format!("'{s}' is not a half-integer"))),
            }
        } else {
            let v: f64 = s
                .parse()
                .map_err(|_| DamsError::Domain(format!("cannot parse '{s}' as a half-integer")))?;
            HalfInt::from_f64(v)
        }
    }
}

impl Serialize for HalfInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_integer() {
            serializer.serialize_i64((self.0 / 2) as i64)
        } else {
            serializer.serialize_f64(self.as_f64())
        }
    }
}

impl<'de> Deserialize<'de> for HalfInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Int(v) => HalfInt::from_f64(v as f64),
            Raw::Float(v) => HalfInt::from_f64(v),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Ground,
    Excited,
}

/// A Zeeman sublevel `|m⟩` (ground) or `|m′⟩` (excited).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SublevelRef {
    pub level: Level,
    pub m: HalfInt,
}

impl SublevelRef {
    pub const fn ground(m: HalfInt) -> Self {
        SublevelRef { level: Level::Ground, m }
    }

    pub const fn excited(m: HalfInt) -> Self {
        SublevelRef { level: Level::Excited, m }
    }
}

impl fmt::Display for SublevelRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            Level::Ground => write!(f, "|{}⟩", self.m),
            Level::Excited => write!(f, "|{}′⟩", self.m),
        }
    }
}

/// Relative dipole matrix element for one ground→excited sublevel pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleElement {
    pub from: SublevelRef,
    pub to: SublevelRef,
    /// `m_e − m_g`; the element is zero whenever `|q| > 1`.
    pub q: i32,
    pub value: f64,
}

fn check_projection(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return Err(DamsError::Domain(format!("negative angular momentum {j}")));
    }
    if (j.twice() - m.twice()) % 2 != 0 {
        return Err(DamsError::Domain(format!("projection {m} incompatible with j = {j}")));
    }
    if m.abs() > j {
        return Err(DamsError::Domain(format!("|m| = {} exceeds j = {j}", m.abs())));
    }
    Ok(())
}

fn factorial(n: i32) -> BigUint {
    debug_assert!(n >= 0);
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `(a + b)` for two half-integers that must sum to a non-negative integer.
fn int_sum(parts: &[(i32, HalfInt)]) -> i32 {
    let twice: i32 = parts.iter().map(|(s, h)| s * h.twice()).sum();
    debug_assert!(twice % 2 == 0);
    twice / 2
}

/// Wigner 3-j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Returns exactly zero when the triangle rule or `m1 + m2 + m3 = 0` fails.
pub fn wigner3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64> {
    check_projection(j1, m1)?;
    check_projection(j2, m2)?;
    check_projection(j3, m3)?;

    if (m1 + m2 + m3) != HalfInt::ZERO {
        return Ok(0.0);
    }
    if (j1.twice() + j2.twice() + j3.twice()) % 2 != 0 {
        return Err(DamsError::Domain(format!(
            "j1 + j2 + j3 = ({j1}) + ({j2}) + ({j3}) is not an integer"
        )));
    }
    let a = int_sum(&[(1, j1), (1, j2), (-1, j3)]);
    let b = int_sum(&[(1, j1), (-1, j2), (1, j3)]);
    let c = int_sum(&[(-1, j1), (1, j2), (1, j3)]);
    if a < 0 || b < 0 || c < 0 {
        return Ok(0.0);
    }
    let total = int_sum(&[(1, j1), (1, j2), (1, j3)]);

    let j1pm1 = int_sum(&[(1, j1), (1, m1)]);
    let j1mm1 = int_sum(&[(1, j1), (-1, m1)]);
    let j2pm2 = int_sum(&[(1, j2), (1, m2)]);
    let j2mm2 = int_sum(&[(1, j2), (-1, m2)]);
    let j3pm3 = int_sum(&[(1, j3), (1, m3)]);
    let j3mm3 = int_sum(&[(1, j3), (-1, m3)]);

    // Arguments of the factorials in the Racah denominator, as offsets in k.
    let t1 = int_sum(&[(1, j3), (-1, j2), (1, m1)]); // j3 - j2 + m1 + k
    let t2 = int_sum(&[(1, j3), (-1, j1), (-1, m2)]); // j3 - j1 - m2 + k
    let t3 = a; // j1 + j2 - j3 - k
    let t4 = j1mm1; // j1 - m1 - k
    let t5 = j2pm2; // j2 + m2 - k

    let k_min = 0.max(-t1).max(-t2);
    let k_max = t3.min(t4).min(t5);
    if k_min > k_max {
        return Ok(0.0);
    }

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(t1 + k)
            * factorial(t2 + k)
            * factorial(t3 - k)
            * factorial(t4 - k)
            * factorial(t5 - k);
        let term = BigRational::new(BigInt::one(), BigInt::from(den));
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    // Everything under the square root.
    let radicand_num = factorial(a)
        * factorial(b)
        * factorial(c)
        * factorial(j1pm1)
        * factorial(j1mm1)
        * factorial(j2pm2)
        * factorial(j2mm2)
        * factorial(j3pm3)
        * factorial(j3mm3);
    let radicand = BigRational::new(BigInt::from(radicand_num), BigInt::from(factorial(total + 1)));

    let squared = &sum * &sum * radicand;
    let magnitude = squared
        .to_f64()
        .ok_or_else(|| DamsError::Domain("3-j magnitude not representable".into()))?
        .sqrt();

    let phase_exp = int_sum(&[(1, j1), (-1, j2), (-1, m3)]);
    let mut sign = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    if sum.is_negative() {
        sign = -sign;
    }
    Ok(sign * magnitude)
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | J M⟩`.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    let w = wigner3j(j1, j2, j, m1, m2, -m)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    let phase_exp = int_sum(&[(1, j1), (-1, j2), (1, m)]);
    let phase = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(phase * ((j.twice() + 1) as f64).sqrt() * w)
}

fn check_pair(f_g: HalfInt, f_e: HalfInt) -> Result<()> {
    if f_g.twice() < 0 || f_e.twice() < 0 {
        return Err(DamsError::Domain(format!("negative angular momentum (F_g={f_g}, F_e={f_e})")));
    }
    if (f_e.twice() - f_g.twice()).abs() > 2 {
        return Err(DamsError::Domain(format!(
            "|F_e - F_g| > 1 (F_g={f_g}, F_e={f_e}) is not dipole-allowed"
        )));
    }
    if (f_e.twice() - f_g.twice()) % 2 != 0 {
        return Err(DamsError::Domain(format!(
            "F_g={f_g} and F_e={f_e} differ by a half-integer"
        )));
    }
    Ok(())
}

/// Relative dipole element `⟨F_g m_g; 1 q | F_e m_e⟩`, `q = m_e − m_g`.
///
/// Projections outside their level, or `|q| > 1`, give the zero element.
pub fn dipole_element(f_g: HalfInt, m_g: HalfInt, f_e: HalfInt, m_e: HalfInt) -> Result<DipoleElement> {
    check_pair(f_g, f_e)?;
    if (f_g.twice() - m_g.twice()) % 2 != 0 || (f_e.twice() - m_e.twice()) % 2 != 0 {
        return Err(DamsError::Domain(format!(
            "projections m_g={m_g}, m_e={m_e} incompatible with F_g={f_g}, F_e={f_e}"
        )));
    }
    let q2 = m_e.twice() - m_g.twice();
    let q = q2 / 2;
    let from = SublevelRef::ground(m_g);
    let to = SublevelRef::excited(m_e);
    let zero = DipoleElement { from, to, q, value: 0.0 };
    if q.abs() > 1 || m_g.abs() > f_g || m_e.abs() > f_e {
        return Ok(zero);
    }
    let value = clebsch_gordan(f_g, m_g, HalfInt::from_int(1), HalfInt::from_int(q), f_e, m_e)?;
    Ok(DipoleElement { from, to, q, value })
}

/// Spontaneous-decay branching from `|F_e m_e⟩` into the ground level.
///
/// Weights are `|⟨F_g m_g; 1 q | F_e m_e⟩|²` normalized to one; every ground
/// projection within `m_e ± 1` that exists in `F_g` is listed.
pub fn decay_branching(f_e: HalfInt, m_e: HalfInt, f_g: HalfInt) -> Result<Vec<(HalfInt, f64)>> {
    check_pair(f_g, f_e)?;
    check_projection(f_e, m_e)?;
    let mut out = Vec::with_capacity(3);
    for q in [1, 0, -1] {
        let m_g = m_e - HalfInt::from_int(q);
        if m_g.abs() > f_g {
            continue;
        }
        let d = dipole_element(f_g, m_g, f_e, m_e)?;
        out.push((m_g, d.value * d.value));
    }
    let total: f64 = out.iter().map(|(_, w)| w).sum();
    if total > 0.0 {
        for (_, w) in &mut out {
            *w /= total;
        }
    }
    Ok(out)
}
