use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::token::fold_terms;

/// A profile keyword: one or more folded terms matched as a contiguous
/// phrase. Serialized as its terms joined by single spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Keyword(Vec<String>);

impl Keyword {
    /// Folds and tokenizes a raw keyword. `None` when it has no terms.
    pub fn parse(raw: &str) -> Option<Self> {
        let terms = fold_terms(raw);
        (!terms.is_empty()).then_some(Keyword(terms))
    }

    pub fn terms(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl Serialize for Keyword {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Keyword {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        Keyword::parse(&raw).ok_or_else(|| serde::de::Error::custom("empty keyword entry"))
    }
}

/// A user's interest keywords. Entries are folded, non-empty and unique;
/// first-seen order is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(rename = "user")]
    pub user_id: String,
    #[serde(deserialize_with = "dedup_keywords")]
    keywords: Vec<Keyword>,
}

impl Profile {
    pub fn new<I, S>(user_id: impl Into<String>, raw_keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let parsed = raw_keywords.into_iter().filter_map(|k| Keyword::parse(k.as_ref()));
        Profile { user_id: user_id.into(), keywords: dedup(parsed) }
    }

    pub fn empty(user_id: impl Into<String>) -> Self {
        Profile { user_id: user_id.into(), keywords: Vec::new() }
    }

    pub fn keywords(&self) -> &[Keyword] {
        &self.keywords
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

fn dedup(keywords: impl Iterator<Item = Keyword>) -> Vec<Keyword> {
    let mut seen = HashSet::new();
    keywords.filter(|k| seen.insert(k.clone())).collect()
}

fn dedup_keywords<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Keyword>, D::Error> {
    Ok(dedup(Vec::<Keyword>::deserialize(d)?.into_iter()))
}
