//! Multisets over symbol objects.
//!
//! Every compartment content and every rule left-hand side is a multiset.
//! The canonical representation is a sorted symbol -> count map with no
//! zero entries, so equality, hashing and serialization are structural.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An object symbol drawn from a system alphabet.
///
/// Names are non-empty and contain no whitespace.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Symbol(String);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MultisetError {
    #[error("invalid symbol name {0:?}: must be non-empty and contain no whitespace")]
    InvalidSymbol(String),
    #[error("not a sub-multiset: cannot remove {count} x {symbol} ({available} available)")]
    NotSubMultiset {
        symbol: Symbol,
        count: u64,
        available: u64,
    },
}

impl Symbol {
    pub fn new(name: impl Into<String>) -> Result<Self, MultisetError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(MultisetError::InvalidSymbol(name));
        }
        Ok(Symbol(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let name = String::deserialize(deserializer)?;
        Symbol::new(name).map_err(serde::de::Error::custom)
    }
}

/// A finite multiset of symbols: a map from symbol to positive count.
///
/// Counts are 64-bit; overflow is treated as a hard error (panic), which
/// desk-scale systems never approach.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multiset {
    entries: BTreeMap<Symbol, u64>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a multiset from (symbol, count) pairs, summing duplicates and
    /// dropping zero counts.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Symbol, u64)>,
    {
        let mut ms = Multiset::new();
        for (sym, count) in pairs {
            ms.insert(sym, count);
        }
        ms
    }

    pub fn count(&self, sym: &Symbol) -> u64 {
        self.entries.get(sym).copied().unwrap_or(0)
    }

    /// Adds `count` copies of `sym`.
    pub fn insert(&mut self, sym: Symbol, count: u64) {
        if count == 0 {
            return;
        }
        let slot = self.entries.entry(sym).or_insert(0);
        *slot = slot.checked_add(count).expect("multiset count overflow");
    }

    /// Removes `count` copies of `sym`; fails without modifying anything if
    /// fewer are present.
    pub fn remove(&mut self, sym: &Symbol, count: u64) -> Result<(), MultisetError> {
        if count == 0 {
            return Ok(());
        }
        let available = self.count(sym);
        if available < count {
            return Err(MultisetError::NotSubMultiset {
                symbol: sym.clone(),
                count,
                available,
            });
        }
        if available == count {
            self.entries.remove(sym);
        } else {
            self.entries.insert(sym.clone(), available - count);
        }
        Ok(())
    }

    pub fn cardinality(&self) -> u64 {
        self.entries
            .values()
            .try_fold(0u64, |acc, &c| acc.checked_add(c))
            .expect("multiset cardinality overflow")
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, u64)> {
        self.entries.iter().map(|(s, &c)| (s, c))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.keys()
    }

    /// Pointwise sum of two multisets.
    pub fn union(&self, other: &Multiset) -> Multiset {
        let mut result = self.clone();
        for (sym, count) in other.iter() {
            result.insert(sym.clone(), count);
        }
        result
    }

    /// Pointwise difference; requires `other` to be a sub-multiset of `self`.
    pub fn subtract(&self, other: &Multiset) -> Result<Multiset, MultisetError> {
        if !self.contains(other) {
            let (sym, count) = other
                .iter()
                .find(|(s, c)| self.count(s) < *c)
                .map(|(s, c)| (s.clone(), c))
                .expect("containment failure implies a deficient entry");
            return Err(MultisetError::NotSubMultiset {
                available: self.count(&sym),
                symbol: sym,
                count,
            });
        }
        let mut result = self.clone();
        for (sym, count) in other.iter() {
            result.remove(sym, count).expect("checked above");
        }
        Ok(result)
    }

    /// True iff `other` is a sub-multiset of `self`.
    pub fn contains(&self, other: &Multiset) -> bool {
        other.iter().all(|(sym, count)| self.count(sym) >= count)
    }
}

impl FromIterator<(Symbol, u64)> for Multiset {
    fn from_iter<I: IntoIterator<Item = (Symbol, u64)>>(iter: I) -> Self {
        Multiset::from_pairs(iter)
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (sym, count)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{sym}:{count}")?;
        }
        write!(f, "}}")
    }
}
