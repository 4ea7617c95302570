use std::collections::{BTreeMap, HashMap};

pub const CLS: usize = 0;
pub const SEP: usize = 1;
pub const PAD: usize = 2;
pub const UNK: usize = 3;
pub const SOS: usize = 4;
pub const EOS: usize = 5;

pub const SPECIALS: [&str; 6] = ["[CLS]", "[SEP]", "[PAD]", "[UNK]", "[SOS]", "[EOS]"];

/// Word-level vocabulary. Ids 0-5 are the special tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Specials followed by `words` in the given order; duplicates and
    /// special names are skipped.
    pub fn from_tokens<I: IntoIterator<Item = String>>(words: I) -> Self {
        let mut v = Self { tokens: Vec::new(), index: HashMap::new() };
        for s in SPECIALS {
            v.push(s.to_string());
        }
        for w in words {
            if !v.index.contains_key(&w) {
                v.push(w);
            }
        }
        v
    }

    /// Keeps tokens seen at least `min_freq` times, most frequent first,
    /// ties in lexicographic order.
    pub fn build<'a, I>(streams: I, min_freq: usize) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in streams {
            for t in s {
                *counts.entry(t.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|(_, c)| *c >= min_freq).collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Self::from_tokens(kept.into_iter().map(|(t, _)| t.to_string()))
    }

    fn push(&mut self, t: String) {
        self.index.insert(t.clone(), self.tokens.len());
        self.tokens.push(t);
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Token texts for `ids`, stopping at the first [EOS] and skipping [SOS].
    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().take_while(|&&i| i != EOS).filter(|&&i| i != SOS).map(|&i| self.tokens[i].clone()).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
