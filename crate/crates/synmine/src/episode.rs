//! Parallel episodes: the patterns being mined.
//!
//! An episode is a set of distinct event types that must all occur, in any
//! order, within the expiry span to form one occurrence. Episodes are kept in
//! canonical form (type ids strictly increasing), so two episodes are equal
//! exactly when their type lists are equal.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::events::EventTypeId;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Episode {
    types: Vec<EventTypeId>,
}

impl Episode {
    /// Builds a canonical episode from distinct event types. Repeated types
    /// are rejected: a synchronous pattern is a set of distinct sources.
    pub fn new(types: impl IntoIterator<Item = EventTypeId>) -> Result<Episode> {
        let mut types: Vec<EventTypeId> = types.into_iter().collect();
        types.sort_unstable();
        if types.is_empty() {
            return Err(Error::InvalidConfig("episode must contain at least one type".into()));
        }
        if types.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!(
                "episode contains a repeated type: {}",
                types[0].label()
            )));
        }
        Ok(Episode { types })
    }

    pub fn from_ids(ids: &[u32]) -> Result<Episode> {
        Episode::new(ids.iter().copied().map(EventTypeId))
    }

    pub fn types(&self) -> &[EventTypeId] {
        &self.types
    }

    /// Episode size `n` (number of constituent types).
    pub fn size(&self) -> usize {
        self.types.len()
    }

    pub fn contains(&self, etype: EventTypeId) -> bool {
        self.types.binary_search(&etype).is_ok()
    }

    pub fn is_subset_of(&self, other: &Episode) -> bool {
        self.types.iter().all(|t| other.contains(*t))
    }

    /// All sub-episodes one size smaller, in canonical order.
    pub fn sub_episodes(&self) -> Vec<Episode> {
        if self.types.len() <= 1 {
            return Vec::new();
        }
        (0..self.types.len())
            .map(|skip| {
                let types = self
                    .types
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, t)| *t)
                    .collect();
                Episode { types }
            })
            .collect()
    }
}

impl fmt::Display for Episode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.types.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for Episode {
    type Err = Error;

    /// Parses a comma-separated list of type labels or integer ids,
    /// e.g. `"A,B,C"` or `"0,1,2"`.
    fn from_str(s: &str) -> Result<Episode> {
        let types = s
            .split(',')
            .map(|part| {
                EventTypeId::parse_label(part)
                    .ok_or_else(|| Error::InvalidConfig(format!("bad event type {part:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Episode::new(types)
    }
}
