use std::collections::BTreeMap;
use std::fmt;

use super::{CountsError, Lexicon};
use crate::corpus::Corpus;

/// Which words feed the suffix trie, and how deep it goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RareWordPolicy {
    /// Words seen fewer than this many times in training are rare.
    pub frequency_threshold: u64,
    /// Maximum number of trie edges followed from the root.
    pub max_suffix_length: usize,
}

impl Default for RareWordPolicy {
    fn default() -> Self {
        RareWordPolicy { frequency_threshold: 10, max_suffix_length: 10 }
    }
}

impl RareWordPolicy {
    pub fn new(frequency_threshold: u64, max_suffix_length: usize) -> Result<Self, CountsError> {
        if frequency_threshold == 0 || max_suffix_length == 0 {
            return Err(CountsError::InvalidPolicy(
                "frequency threshold and maximum suffix length must be positive".into(),
            ));
        }
        Ok(RareWordPolicy { frequency_threshold, max_suffix_length })
    }
}

/// An edge label: a letter of the word, or the begin-of-word marker that
/// follows the first letter once the word is read backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuffixLetter {
    Char(char),
    WordStart,
}

impl fmt::Display for SuffixLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuffixLetter::Char(c) => write!(f, "{c}"),
            SuffixLetter::WordStart => write!(f, "⊳"),
        }
    }
}

/// Letters of `word` from last to first, then [`SuffixLetter::WordStart`].
pub fn reversed_letters(word: &str) -> impl Iterator<Item = SuffixLetter> + '_ {
    word.chars().rev().map(SuffixLetter::Char).chain(std::iter::once(SuffixLetter::WordStart))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrieNode {
    letter: Option<SuffixLetter>,
    parent: Option<usize>,
    depth: usize,
    children: BTreeMap<SuffixLetter, usize>,
    counts: Vec<u64>,
    total: u64,
}

impl TrieNode {
    fn new(letter: Option<SuffixLetter>, parent: Option<usize>, depth: usize, num_tags: usize) -> Self {
        TrieNode { letter, parent, depth, children: BTreeMap::new(), counts: vec![0; num_tags], total: 0 }
    }

    /// Incoming edge label; `None` for the root.
    pub fn letter(&self) -> Option<SuffixLetter> {
        self.letter
    }

    pub fn parent(&self) -> Option<usize> {
        self.parent
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn children(&self) -> impl Iterator<Item = (SuffixLetter, usize)> + '_ {
        self.children.iter().map(|(&l, &i)| (l, i))
    }
}

/// Tree over reversed word suffixes of rare training tokens.
///
/// Node 0 is the root (the empty suffix). A node at depth `j` holds the
/// tag counts of every rare token whose last `j` letters spell the path
/// to it, read backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixTrie {
    nodes: Vec<TrieNode>,
    num_tags: usize,
    max_suffix_length: usize,
}

impl SuffixTrie {
    pub const ROOT: usize = 0;

    pub fn empty(num_tags: usize, max_suffix_length: usize) -> Self {
        SuffixTrie { nodes: vec![TrieNode::new(None, None, 0, num_tags)], num_tags, max_suffix_length }
    }

    /// Collects every token whose word occurs fewer than
    /// `policy.frequency_threshold` times according to `lexicon`.
    pub fn build(corpus: &Corpus, lexicon: &Lexicon, policy: &RareWordPolicy) -> Self {
        let mut trie = SuffixTrie::empty(corpus.tag_set().len(), policy.max_suffix_length);
        for token in corpus.tokens() {
            let freq = lexicon.get(&token.word).map_or(0, |e| e.total());
            if freq < policy.frequency_threshold {
                trie.insert(&token.word, token.tag.index(), 1);
            }
        }
        trie
    }

    /// Adds `n` occurrences of `word` tagged `tag` along its reversed path.
    pub fn insert(&mut self, word: &str, tag: usize, n: u64) {
        let mut node = Self::ROOT;
        self.bump(node, tag, n);
        for letter in reversed_letters(word).take(self.max_suffix_length) {
            node = match self.nodes[node].children.get(&letter) {
                Some(&child) => child,
                None => {
                    let id = self.nodes.len();
                    let depth = self.nodes[node].depth + 1;
                    self.nodes.push(TrieNode::new(Some(letter), Some(node), depth, self.num_tags));
                    self.nodes[node].children.insert(letter, id);
                    id
                }
            };
            self.bump(node, tag, n);
        }
    }

    fn bump(&mut self, node: usize, tag: usize, n: u64) {
        let node = &mut self.nodes[node];
        node.counts[tag] += n;
        node.total += n;
    }

    /// Rebuilds a trie from `(parent, letter, counts)` rows listed so that
    /// every parent precedes its children. Row 0 is the root.
    pub fn from_rows(
        num_tags: usize,
        max_suffix_length: usize,
        rows: Vec<(Option<usize>, Option<SuffixLetter>, Vec<u64>)>,
    ) -> Result<Self, CountsError> {
        let bad = |m: String| Err(CountsError::Inconsistent(m));
        let mut nodes: Vec<TrieNode> = Vec::with_capacity(rows.len());
        for (id, (parent, letter, counts)) in rows.into_iter().enumerate() {
            if counts.len() != num_tags {
                return bad(format!("trie node {id} has the wrong number of tags"));
            }
            let depth = match (id, parent, letter) {
                (0, None, None) => 0,
                (_, Some(p), Some(l)) if p < id => {
                    if nodes[p].children.insert(l, id).is_some() {
                        return bad(format!("trie node {p} has two `{l}` children"));
                    }
                    nodes[p].depth + 1
                }
                _ => return bad(format!("trie node {id} has an invalid parent or letter")),
            };
            let total = counts.iter().sum();
            nodes.push(TrieNode { letter, parent, depth, children: BTreeMap::new(), counts, total });
        }
        if nodes.is_empty() {
            return bad("trie has no root".into());
        }
        let trie = SuffixTrie { nodes, num_tags, max_suffix_length };
        trie.check_invariants().map_err(CountsError::Inconsistent)?;
        Ok(trie)
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    pub fn max_suffix_length(&self) -> usize {
        self.max_suffix_length
    }

    pub fn root(&self) -> &TrieNode {
        &self.nodes[Self::ROOT]
    }

    pub fn node(&self, id: usize) -> &TrieNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TrieNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn child(&self, node: usize, letter: SuffixLetter) -> Option<usize> {
        self.nodes[node].children.get(&letter).copied()
    }

    /// Looks up the node reached by following `letters` from the root.
    pub fn find(&self, letters: &[SuffixLetter]) -> Option<usize> {
        letters.iter().try_fold(Self::ROOT, |node, &l| self.child(node, l))
    }

    /// Nodes matched by the reversed letters of `word`, root excluded,
    /// shallowest first. Stops at the first unmatched letter or at the
    /// maximum suffix length.
    pub fn matched_path(&self, word: &str) -> Vec<usize> {
        let mut path = Vec::new();
        let mut node = Self::ROOT;
        for letter in reversed_letters(word).take(self.max_suffix_length) {
            match self.child(node, letter) {
                Some(next) => {
                    path.push(next);
                    node = next;
                }
                None => break,
            }
        }
        path
    }

    /// Checks the aggregation invariant at every node: a node's counts are
    /// its children's counts plus the tokens whose path ends there, and a
    /// path may only end at a begin-of-word node or at the depth limit.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            if node.total != node.counts.iter().sum::<u64>() {
                return Err(format!("node {id}: total does not match its counts"));
            }
            let mut ending = node.counts.clone();
            for &child in node.children.values() {
                for (e, &c) in ending.iter_mut().zip(&self.nodes[child].counts) {
                    *e = e
                        .checked_sub(c)
                        .ok_or_else(|| format!("node {id}: children hold more counts than the node"))?;
                }
            }
            let terminal = node.letter == Some(SuffixLetter::WordStart) || node.depth == self.max_suffix_length;
            if !terminal && ending.iter().any(|&e| e > 0) {
                return Err(format!("node {id}: counts end at a non-terminal node"));
            }
            if node.letter == Some(SuffixLetter::WordStart) && !node.children.is_empty() {
                return Err(format!("node {id}: begin-of-word node has children"));
            }
            if node.depth > self.max_suffix_length {
                return Err(format!("node {id}: deeper than the suffix limit"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TagSet;
    use crate::counts::build_lexicon;
    use SuffixLetter::{Char, WordStart};

    fn corpus(pairs: Vec<(&str, &str)>) -> Corpus {
        let tags = TagSet::new(["AT", "IN", "NN"]).unwrap();
        Corpus::from_pairs(tags, vec![pairs]).unwrap()
    }

    fn build(c: &Corpus, policy: RareWordPolicy) -> SuffixTrie {
        SuffixTrie::build(c, &build_lexicon(c), &policy)
    }

    #[test]
    fn cat_bat_at() {
        let c = corpus(vec![("cat", "NN"), ("bat", "NN"), ("at", "IN")]);
        let trie = build(&c, RareWordPolicy::default());
        let ta = trie.find(&[Char('t'), Char('a')]).unwrap();
        assert_eq!(trie.node(ta).counts(), [0, 1, 2]);
        let tac = trie.find(&[Char('t'), Char('a'), Char('c')]).unwrap();
        assert_eq!(trie.node(tac).counts(), [0, 0, 1]);
        let ta_start = trie.find(&[Char('t'), Char('a'), WordStart]).unwrap();
        assert_eq!(trie.node(ta_start).counts(), [0, 1, 0]);
        assert_eq!(trie.root().total(), 3);
        trie.check_invariants().unwrap();
    }

    #[test]
    fn no_rare_words_gives_bare_root() {
        let c = corpus(vec![("the", "AT"); 3]);
        let trie = build(&c, RareWordPolicy::new(2, 10).unwrap());
        assert!(trie.is_empty());
        assert_eq!(trie.root().total(), 0);
    }

    #[test]
    fn single_letter_word_reaches_word_start() {
        let c = corpus(vec![("a", "AT")]);
        let trie = build(&c, RareWordPolicy::default());
        let a = trie.find(&[Char('a')]).unwrap();
        let a_start = trie.find(&[Char('a'), WordStart]).unwrap();
        assert_eq!(trie.node(a).counts(), [1, 0, 0]);
        assert_eq!(trie.node(a_start).counts(), [1, 0, 0]);
        assert_eq!(trie.len(), 3);
    }

    #[test]
    fn paths_truncate_at_max_suffix_length() {
        let c = corpus(vec![("walking", "NN")]);
        let trie = build(&c, RareWordPolicy::new(10, 3).unwrap());
        assert_eq!(trie.len(), 4);
        assert_eq!(trie.matched_path("talking").len(), 3);
        trie.check_invariants().unwrap();
    }

    #[test]
    fn frequent_words_are_excluded_and_tokens_counted() {
        let mut pairs = vec![("the", "AT"); 10];
        pairs.push(("dog", "NN"));
        pairs.push(("dog", "NN"));
        let trie = build(&corpus(pairs), RareWordPolicy::default());
        assert_eq!(trie.root().counts(), [0, 0, 2]);
    }

    #[test]
    fn matched_path_stops_at_first_mismatch() {
        let c = corpus(vec![("cat", "NN")]);
        let trie = build(&c, RareWordPolicy::default());
        assert_eq!(trie.matched_path("mat").len(), 2);
        assert_eq!(trie.matched_path("cat").len(), 4);
        assert!(trie.matched_path("dog").is_empty());
    }

    #[test]
    fn rows_round_trip_and_reject_bad_counts() {
        let c = corpus(vec![("cat", "NN"), ("bat", "NN"), ("at", "IN")]);
        let trie = build(&c, RareWordPolicy::default());
        let rows: Vec<_> = trie.nodes().iter().map(|n| (n.parent(), n.letter(), n.counts().to_vec())).collect();
        assert_eq!(SuffixTrie::from_rows(3, 10, rows.clone()).unwrap(), trie);

        let mut broken = rows;
        broken[0].2[2] -= 1;
        assert!(SuffixTrie::from_rows(3, 10, broken).is_err());
    }
}
