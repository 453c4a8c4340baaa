use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::{DktError, Result};

/// Element of `u^k (R/Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaValue {
    /// Power `k` of `u`.
    pub u_power: i32,
    /// Representative in `[0, 1)`.
    pub value: f64,
}

/// Reduces a real number into `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance in `R/Z`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

impl EtaValue {
    pub fn new(u_power: i32, value: f64) -> Self {
        Self { u_power, value: frac(value) }
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        if self.u_power != other.u_power {
            return Err(DktError::Degree(format!(
                "cannot add eta values in u^{} and u^{}",
                self.u_power, other.u_power
            )));
        }
        Ok(Self::new(self.u_power, self.value + other.value))
    }

    pub fn neg(self) -> Self {
        Self::new(self.u_power, -self.value)
    }

    /// Distance mod 1; infinite when the u-powers differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.u_power != other.u_power {
            return f64::INFINITY;
        }
        circle_distance(self.value, other.value)
    }
}

impl Add for EtaValue {
    type Output = EtaValue;
    fn add(self, rhs: EtaValue) -> EtaValue {
        self.checked_add(rhs).expect("u-power mismatch")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduction_edges() {
        assert_eq!(frac(1.0), 0.0);
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(-1e-18), 0.0);
        assert!(EtaValue::new(0, 0.5).checked_add(EtaValue::new(-1, 0.5)).is_err());
        assert_eq!((EtaValue::new(-1, 0.75) + EtaValue::new(-1, 0.5)).value, 0.25);
    }

    proptest! {
        #[test]
        fn always_in_unit_interval(x in -1e6f64..1e6, y in -1e6f64..1e6) {
            let s = EtaValue::new(-1, x) + EtaValue::new(-1, y);
            prop_assert!(s.value >= 0.0 && s.value < 1.0);
            prop_assert!(s.distance(&EtaValue::new(-1, x + y)) < 1e-9);
        }
    }
}
