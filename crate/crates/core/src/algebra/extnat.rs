use std::fmt;
use std::ops::{Add, Mul};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A natural number or `Infinity`, with saturating semiring operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

impl ExtNat {
    pub const ZERO: ExtNat = ExtNat::Fin(0);
    pub const ONE: ExtNat = ExtNat::Fin(1);

    pub fn is_zero(self) -> bool {
        self == ExtNat::ZERO
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, o: ExtNat) -> ExtNat {
        match (self, o) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_add(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }
}

impl Mul for ExtNat {
    type Output = ExtNat;
    fn mul(self, o: ExtNat) -> ExtNat {
        if self.is_zero() || o.is_zero() {
            return ExtNat::ZERO;
        }
        match (self, o) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => a.checked_mul(b).map_or(ExtNat::Inf, ExtNat::Fin),
            _ => ExtNat::Inf,
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(n) => write!(f, "{n}"),
            ExtNat::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Fin(n) => s.serialize_u64(*n),
            ExtNat::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtNat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtNat, E> {
                Ok(ExtNat::Fin(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtNat, E> {
                u64::try_from(v).map(ExtNat::Fin).map_err(|_| E::custom("negative coefficient"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtNat, E> {
                if v == "inf" {
                    Ok(ExtNat::Inf)
                } else {
                    Err(E::custom(format!("bad coefficient {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}
