use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Prefix reserved for pass-through nodes inserted by structure normalization.
pub const RESERVED_PREFIX: &str = "__dummy/";

/// Identifier of an event (node) in a causal model.
///
/// Ids are non-empty tokens free of whitespace and of `,{}`. Subsets are
/// written as comma-separated lists with `{}` for the empty set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(String);

impl EventId {
    pub fn new(id: impl Into<String>) -> Self {
        EventId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_well_formed(&self) -> bool {
        !self.0.is_empty()
            && !self
                .0
                .chars()
                .any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}'))
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with(RESERVED_PREFIX)
    }
}

impl fmt::Debug for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId(s.to_string())
    }
}

impl From<String> for EventId {
    fn from(s: String) -> Self {
        EventId(s)
    }
}

impl Borrow<str> for EventId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Renders a subset as `a,b,c`, or `{}` when empty.
pub fn format_subset<'a, I>(ids: I) -> String
where
    I: IntoIterator<Item = &'a EventId>,
{
    let parts: Vec<&str> = ids.into_iter().map(|e| e.as_str()).collect();
    if parts.is_empty() {
        "{}".to_string()
    } else {
        parts.join(",")
    }
}

/// Parses a comma-separated id list; `{}` and the empty string are the empty set.
pub fn parse_subset(text: &str) -> Vec<EventId> {
    let t = text.trim();
    if t.is_empty() || t == "{}" {
        return Vec::new();
    }
    t.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(EventId::from)
        .collect()
}

/// Iterates the members of `mask` as indices into `items`.
pub(crate) fn mask_members<T>(items: &[T], mask: u64) -> impl Iterator<Item = &T> {
    items
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask >> i & 1 == 1)
        .map(|(_, t)| t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_rules() {
        assert!(EventId::from("takeoff-landings").is_well_formed());
        assert!(EventId::from("s[a->b]").is_well_formed());
        assert!(!EventId::from("").is_well_formed());
        assert!(!EventId::from("a b").is_well_formed());
        assert!(!EventId::from("a,b").is_well_formed());
        assert!(!EventId::from("{a}").is_well_formed());
    }

    #[test]
    fn subset_text() {
        let ids = parse_subset("a, b,c");
        assert_eq!(format_subset(&ids), "a,b,c");
        assert!(parse_subset("{}").is_empty());
        assert_eq!(format_subset(&[]), "{}");
    }
}
