use std::collections::HashMap;

pub const UNK: &str = "_UNK_";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Symbol table with `_UNK_`, `<s>` and `</s>` at indices 0, 1, 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub const UNK: usize = 0;
    pub const BOS: usize = 1;
    pub const EOS: usize = 2;

    /// Keeps the most frequent symbols (ties alphabetical) so the total size,
    /// reserved entries included, is at most `cap`.
    pub fn build<'a, I, S>(seqs: I, cap: usize) -> Vocab
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for s in seqs {
            for t in s {
                *counts.entry(t.as_ref()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(s, _)| ![UNK, BOS, EOS].contains(s))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let keep = cap.max(3) - 3;
        Vocab::from_symbols(
            [UNK, BOS, EOS]
                .into_iter()
                .chain(ranked.into_iter().take(keep).map(|(s, _)| s))
                .map(String::from)
                .collect(),
        )
    }

    fn from_symbols(symbols: Vec<String>) -> Vocab {
        let index = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Vocab { symbols, index }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, sym: &str) -> usize {
        self.index.get(sym).copied().unwrap_or(Vocab::UNK)
    }

    pub fn contains(&self, sym: &str) -> bool {
        self.index.contains_key(sym)
    }

    pub fn symbol(&self, i: usize) -> &str {
        self.symbols.get(i).map(String::as_str).unwrap_or(UNK)
    }

    pub fn encode<S: AsRef<str>>(&self, seq: &[S]) -> Vec<usize> {
        seq.iter().map(|s| self.get(s.as_ref())).collect()
    }

    /// One symbol per line, in index order.
    pub fn to_text(&self) -> String {
        let mut s = self.symbols.join("\n");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Option<Vocab> {
        let symbols: Vec<String> = text.lines().map(String::from).collect();
        if symbols.len() < 3 || symbols[0] != UNK || symbols[1] != BOS || symbols[2] != EOS {
            return None;
        }
        Some(Vocab::from_symbols(symbols))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_by_frequency() {
        let data = [vec!["a", "b", "b", "c"], vec!["c", "b"]];
        let v = Vocab::build(data.iter().map(|s| s.as_slice()), 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v.symbol(3), "b");
        assert_eq!(v.symbol(4), "c");
        assert_eq!(v.get("a"), Vocab::UNK);
        assert_eq!(Vocab::from_text(&v.to_text()).unwrap(), v);
        let tiny = Vocab::build(data.iter().map(|s| s.as_slice()), 1);
        assert_eq!(tiny.len(), 3);
    }
}
