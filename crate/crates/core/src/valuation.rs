//! Truth valuations. A two-valued valuation is a history; a three-valued
//! valuation is the valuation derived from a non-empty set of histories.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::histories::Event;

/// The three truth values. `Half` is the intermediate, indefinite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Truth {
    #[serde(rename = "0")]
    False,
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "1")]
    True,
}

impl Truth {
    pub const ALL: [Truth; 3] = [Truth::False, Truth::Half, Truth::True];

    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn is_definite(self) -> bool {
        self != Truth::Half
    }

    /// Cyclical negation: 1 → ½ → 0 → 1.
    pub fn cyclic_not(self) -> Self {
        cyclical_negation(self)
    }

    /// The `?` operator: 1 when definite, 0 when indefinite.
    pub fn is_definite_value(self) -> Self {
        Truth::from_bool(self.is_definite())
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Truth::False => 0.0,
            Truth::Half => 0.5,
            Truth::True => 1.0,
        }
    }
}

/// Diametrical negation: 1 and 0 swap, ½ is fixed.
impl std::ops::Not for Truth {
    type Output = Truth;

    fn not(self) -> Truth {
        match self {
            Truth::False => Truth::True,
            Truth::Half => Truth::Half,
            Truth::True => Truth::False,
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truth::False => "0",
            Truth::Half => "1/2",
            Truth::True => "1",
        })
    }
}

impl FromStr for Truth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "0" => Ok(Truth::False),
            "1/2" | "½" | "0.5" => Ok(Truth::Half),
            "1" => Ok(Truth::True),
            other => Err(format!("`{other}` is not a truth value (expected 0, 1/2 or 1)")),
        }
    }
}

pub fn cyclical_negation(v: Truth) -> Truth {
    match v {
        Truth::True => Truth::Half,
        Truth::Half => Truth::False,
        Truth::False => Truth::True,
    }
}

/// Value of event `e` under the valuation derived from `x`.
pub fn evaluate(x: Event, e: Event) -> Truth {
    if x & !e == 0 {
        Truth::True
    } else if x & e == 0 {
        Truth::False
    } else {
        Truth::Half
    }
}

/// Two-valued valuation given by a single history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoValuation {
    pub history: usize,
}

impl TwoValuation {
    pub fn value(&self, e: Event) -> bool {
        e >> self.history & 1 == 1
    }
}

/// A three-valued valuation, identified with its derivation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThreeValuation {
    derivation: Event,
}

impl ThreeValuation {
    /// `None` when the derivation set is empty.
    pub fn new(derivation: Event) -> Option<Self> {
        (derivation != 0).then_some(ThreeValuation { derivation })
    }

    pub fn singleton(history: usize) -> Self {
        ThreeValuation { derivation: 1 << history }
    }

    pub fn derivation(&self) -> Event {
        self.derivation
    }

    pub fn value(&self, e: Event) -> Truth {
        evaluate(self.derivation, e)
    }

    pub fn is_definite_on(&self, e: Event) -> bool {
        self.value(e).is_definite()
    }

    pub fn is_two_valued(&self) -> bool {
        self.derivation.count_ones() == 1
    }

    pub fn histories(&self) -> impl Iterator<Item = usize> {
        bits::ones(self.derivation)
    }
}

/// Coarse-graining: the valuation derived from the union of derivation sets.
pub fn coarse_grain(vs: &[ThreeValuation]) -> Option<ThreeValuation> {
    ThreeValuation::new(vs.iter().fold(0, |acc, v| acc | v.derivation))
}

/// Whether some derivation set realizes the values (a, b, a∩b). Decided by
/// search over every event pair and derivation set on four histories, which
/// realizes every Venn-cell occupancy pattern.
pub fn check_conjunction_table(a: Truth, b: Truth, meet: Truth) -> bool {
    const OMEGA: Event = 0b1111;
    // A = {0, 1}, B = {0, 2}: the four Venn cells are single histories.
    let (ea, eb) = (0b0011, 0b0101);
    bits::subsets(OMEGA).filter(|&x| x != 0).any(|x| {
        evaluate(x, ea) == a && evaluate(x, eb) == b && evaluate(x, ea & eb) == meet
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_basic_cases() {
        assert_eq!(evaluate(0b01, 0b11), Truth::True);
        assert_eq!(evaluate(0b11, 0b11), Truth::True);
        assert_eq!(evaluate(0b11, 0), Truth::False);
        assert_eq!(evaluate(0b11, 0b01), Truth::Half);
        assert!(ThreeValuation::new(0).is_none());
    }

    #[test]
    fn cyclical_negation_cycle() {
        assert_eq!(cyclical_negation(Truth::True), Truth::Half);
        assert_eq!(cyclical_negation(Truth::Half), Truth::False);
        assert_eq!(cyclical_negation(Truth::False), Truth::True);
        for t in Truth::ALL {
            assert_eq!(t.cyclic_not().cyclic_not().cyclic_not(), t);
        }
    }

    #[test]
    fn definite_operator() {
        assert_eq!(Truth::Half.is_definite_value(), Truth::False);
        assert_eq!(Truth::True.is_definite_value(), Truth::True);
        assert_eq!(Truth::False.is_definite_value(), Truth::True);
    }

    #[test]
    fn conjunction_table_cases() {
        use Truth::*;
        assert!(check_conjunction_table(True, True, True));
        assert!(!check_conjunction_table(True, True, False));
        assert!(!check_conjunction_table(Half, Half, True));
        assert!(check_conjunction_table(Half, Half, False));
        assert!(check_conjunction_table(Half, Half, Half));
        assert!(check_conjunction_table(False, Half, False));
        assert!(!check_conjunction_table(False, Half, Half));
        assert!(check_conjunction_table(True, Half, Half));
        assert!(!check_conjunction_table(True, Half, False));
    }

    #[test]
    fn conjunction_table_definite_rows_are_classical() {
        for a in [Truth::False, Truth::True] {
            for b in [Truth::False, Truth::True] {
                let classical = Truth::from_bool(a == Truth::True && b == Truth::True);
                for m in Truth::ALL {
                    assert_eq!(check_conjunction_table(a, b, m), m == classical, "{a} {b} {m}");
                }
            }
        }
    }

    #[test]
    fn truth_parse_and_display() {
        for t in Truth::ALL {
            assert_eq!(t.to_string().parse::<Truth>().unwrap(), t);
        }
        assert!("2".parse::<Truth>().is_err());
    }

    #[test]
    fn coarse_grain_single_and_union() {
        let v = ThreeValuation::new(0b0101).unwrap();
        assert_eq!(coarse_grain(&[v]), Some(v));
        let u = coarse_grain(&[ThreeValuation::singleton(0), ThreeValuation::singleton(3)]).unwrap();
        assert_eq!(u.derivation(), 0b1001);
        assert_eq!(coarse_grain(&[]), None);
    }
}
