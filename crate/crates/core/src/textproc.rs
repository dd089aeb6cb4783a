//! Tokenization and linguistic-cue annotation of short messages.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface of the single token a URL collapses to.
pub const URL_TOKEN: &str = "<url>";

/// Default number of negated words following a cue.
pub const NEGATION_SCOPE: usize = 3;

const FIRST_PERSON: &str = include_str!("../data/first_person.txt");
const SECOND_PERSON: &str = include_str!("../data/second_person.txt");
const THIRD_PERSON: &str = include_str!("../data/third_person.txt");
const NEGATION_CUES: &str = include_str!("../data/negation_cues.txt");
const VERBS: &str = include_str!("../data/verbs.txt");
const POSITIVE: &str = include_str!("../data/positive.txt");
const NEGATIVE: &str = include_str!("../data/negative.txt");

const ADJECTIVES: &[&str] = &[
    "good", "great", "new", "best", "better", "big", "small", "high", "low", "green", "clean", "healthy", "organic",
    "natural", "fresh", "local", "free", "safe", "proud", "happy", "bad", "old", "young", "important", "vegan",
];

const OTHER_PRONOUNS: &[&str] = &["it", "its", "itself", "myself", "yourself", "himself", "herself", "ourselves", "themselves"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMessage {
    pub entity_id: String,
    pub message_id: String,
    pub text: String,
}

impl RawMessage {
    pub fn new(entity_id: impl Into<String>, message_id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let msg = Self { entity_id: entity_id.into(), message_id: message_id.into(), text: text.into() };
        if msg.entity_id.is_empty() || msg.message_id.is_empty() {
            return Err(Error::InvalidArgument("entity and message ids must be nonempty".into()));
        }
        Ok(msg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Hashtag,
    Mention,
    Url,
    Punct,
    RetweetMark,
    /// Synthetic token added by annotation, never produced from raw text.
    Marker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Pos {
    Pron,
    Verb,
    Noun,
    Adj,
    Adv,
    #[default]
    Other,
}

impl Pos {
    pub const ALL: [Pos; 6] = [Pos::Pron, Pos::Verb, Pos::Noun, Pos::Adj, Pos::Adv, Pos::Other];

    pub fn name(self) -> &'static str {
        match self {
            Pos::Pron => "PRON",
            Pos::Verb => "VERB",
            Pos::Noun => "NOUN",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Other => "OTHER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Case-folded surface form.
    pub surface: String,
    pub kind: TokenKind,
    pub pos: Pos,
    pub negated: bool,
    /// First character was uppercase before folding.
    pub capitalized: bool,
}

impl Token {
    fn new(surface: String, kind: TokenKind, capitalized: bool) -> Self {
        Self { surface, kind, pos: Pos::Other, negated: false, capitalized }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_url(chunk: &str) -> bool {
    let lower = chunk.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Splits a message into tokens.
///
/// Hashtags and mentions keep their sigil, URLs collapse to `<url>`, a
/// leading uppercase `RT` becomes a retweet mark, and every other
/// non-word character is its own punctuation token. Words may contain
/// internal apostrophes (`it's`, `don't`).
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let mut rest = chunk;
        if tokens.is_empty() && rest.starts_with("RT") && !rest[2..].starts_with(is_word_char) {
            tokens.push(Token::new("rt".into(), TokenKind::RetweetMark, true));
            rest = &rest[2..];
        }
        if is_url(rest) {
            tokens.push(Token::new(URL_TOKEN.into(), TokenKind::Url, false));
            continue;
        }
        scan_chunk(rest, &mut tokens);
    }
    tokens
}

fn scan_chunk(chunk: &str, out: &mut Vec<Token>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if (c == '#' || c == '@') && chars.get(i + 1).is_some_and(|&n| is_word_char(n)) {
            let start = i;
            i += 1;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            let raw: String = chars[start..i].iter().collect();
            let kind = if c == '#' { TokenKind::Hashtag } else { TokenKind::Mention };
            let capitalized = chars[start + 1].is_uppercase();
            out.push(Token::new(raw.to_lowercase(), kind, capitalized));
        } else if is_word_char(c) {
            let start = i;
            let mut word = String::new();
            while i < chars.len() {
                if is_word_char(chars[i]) {
                    word.push(chars[i]);
                    i += 1;
                } else if is_apostrophe(chars[i]) && chars.get(i + 1).is_some_and(|&n| n.is_alphanumeric()) {
                    word.push('\'');
                    i += 1;
                } else {
                    break;
                }
            }
            out.push(Token::new(word.to_lowercase(), TokenKind::Word, chars[start].is_uppercase()));
        } else {
            out.push(Token::new(c.to_string(), TokenKind::Punct, false));
            i += 1;
        }
    }
}

/// A case-folded word set read from a list file: one word per line, `#`
/// starts a comment line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList(HashSet<String>);

impl WordList {
    pub fn parse(text: &str) -> Self {
        WordList(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut set = HashSet::new();
        for line in reader.lines() {
            let line = line?;
            let w = line.trim();
            if !w.is_empty() && !w.starts_with('#') {
                set.insert(w.to_lowercase());
            }
        }
        Ok(WordList(set))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for WordList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        WordList(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

fn is_negation_cue(word: &str, cues: &WordList) -> bool {
    cues.contains(word) || word.ends_with("n't")
}

/// Marks the words following each negation cue.
///
/// The scope covers up to `NEGATION_SCOPE` following word tokens and ends
/// early at punctuation. A new cue restarts the scope; cues themselves are
/// never marked.
pub fn mark_negation(tokens: &mut [Token], cues: &WordList) {
    let mut remaining = 0;
    for tok in tokens.iter_mut() {
        match tok.kind {
            TokenKind::Punct => remaining = 0,
            TokenKind::Word => {
                if is_negation_cue(&tok.surface, cues) {
                    remaining = NEGATION_SCOPE;
                } else if remaining > 0 {
                    tok.negated = true;
                    remaining -= 1;
                }
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Person {
    First,
    Second,
    Third,
}

impl Person {
    pub const ALL: [Person; 3] = [Person::First, Person::Second, Person::Third];

    pub fn marker(self) -> &'static str {
        match self {
            Person::First => "<first_person>",
            Person::Second => "<second_person>",
            Person::Third => "<third_person>",
        }
    }
}

/// Closed pronoun lists for the three grammatical persons.
#[derive(Debug, Clone)]
pub struct PronounLists {
    pub first: WordList,
    pub second: WordList,
    pub third: WordList,
}

impl Default for PronounLists {
    fn default() -> Self {
        Self {
            first: WordList::parse(FIRST_PERSON),
            second: WordList::parse(SECOND_PERSON),
            third: WordList::parse(THIRD_PERSON),
        }
    }
}

impl PronounLists {
    pub fn person_of(&self, word: &str) -> Option<Person> {
        if self.first.contains(word) {
            Some(Person::First)
        } else if self.second.contains(word) {
            Some(Person::Second)
        } else if self.third.contains(word) {
            Some(Person::Third)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonCounts {
    pub first: usize,
    pub second: usize,
    pub third: usize,
}

impl PersonCounts {
    pub fn get(&self, person: Person) -> usize {
        match person {
            Person::First => self.first,
            Person::Second => self.second,
            Person::Third => self.third,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.first + self.second + self.third == 0
    }

    fn bump(&mut self, person: Person) {
        match person {
            Person::First => self.first += 1,
            Person::Second => self.second += 1,
            Person::Third => self.third += 1,
        }
    }
}

/// Counts pronoun matches among word tokens.
pub fn count_persons(tokens: &[Token], lists: &PronounLists) -> PersonCounts {
    let mut counts = PersonCounts::default();
    for p in tokens.iter().filter(|t| t.is_word()).filter_map(|t| lists.person_of(&t.surface)) {
        counts.bump(p);
    }
    counts
}

/// Counts pronoun matches and appends one marker token per match.
pub fn mark_persons(tokens: &mut Vec<Token>, lists: &PronounLists) -> PersonCounts {
    let mut counts = PersonCounts::default();
    let mut markers = Vec::new();
    for p in tokens.iter().filter(|t| t.is_word()).filter_map(|t| lists.person_of(&t.surface)) {
        counts.bump(p);
        markers.push(Token::new(p.marker().to_string(), TokenKind::Marker, false));
    }
    tokens.extend(markers);
    counts
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfInteractions {
    pub mentions_self: bool,
    pub is_retweet: bool,
    pub retweet_of_self: bool,
}

/// Detects self-mentions and retweets. The handle is compared
/// case-insensitively, with or without a leading `@`.
pub fn detect_self_interactions(tokens: &[Token], entity_handle: &str) -> SelfInteractions {
    let handle = entity_handle.trim().trim_start_matches('@').to_lowercase();
    let mentions_self = !handle.is_empty()
        && tokens
            .iter()
            .any(|t| t.kind == TokenKind::Mention && t.surface.strip_prefix('@') == Some(handle.as_str()));
    let is_retweet = tokens.first().is_some_and(|t| t.kind == TokenKind::RetweetMark);
    SelfInteractions { mentions_self, is_retweet, retweet_of_self: mentions_self && is_retweet }
}

/// Lexicon-and-suffix part-of-speech tagger with a coarse tag set.
#[derive(Debug, Clone)]
pub struct PosTagger {
    pronouns: HashSet<String>,
    verbs: WordList,
    adjectives: HashSet<&'static str>,
}

impl PosTagger {
    pub fn new(pronouns: &PronounLists, verbs: WordList) -> Self {
        let pronouns = pronouns
            .first
            .iter()
            .chain(pronouns.second.iter())
            .chain(pronouns.third.iter())
            .chain(OTHER_PRONOUNS.iter().copied())
            .map(str::to_string)
            .collect();
        Self { pronouns, verbs, adjectives: ADJECTIVES.iter().copied().collect() }
    }

    pub fn tag_word(&self, word: &str, capitalized: bool) -> Pos {
        let n = word.chars().count();
        if self.pronouns.contains(word) {
            Pos::Pron
        } else if self.verbs.contains(word) {
            Pos::Verb
        } else if self.adjectives.contains(word) {
            Pos::Adj
        } else if n > 3 && word.ends_with("ly") {
            Pos::Adv
        } else if n > 4 && ["ous", "ful", "ive", "able"].iter().any(|s| word.ends_with(s)) {
            Pos::Adj
        } else if (n > 3 && (word.ends_with("ed") || word.ends_with("ing")))
            || (n > 2 && word.ends_with('s') && self.verbs.contains(&word[..word.len() - 1]))
        {
            Pos::Verb
        } else if capitalized {
            Pos::Noun
        } else {
            Pos::Other
        }
    }

    /// Tags word tokens in place; other tokens are tagged `Other`.
    pub fn tag(&self, tokens: &mut [Token]) {
        for t in tokens {
            t.pos = if t.is_word() { self.tag_word(&t.surface, t.capitalized) } else { Pos::Other };
        }
    }
}

impl Default for PosTagger {
    fn default() -> Self {
        Self::new(&PronounLists::default(), WordList::parse(VERBS))
    }
}

/// Tags word tokens with the default tagger.
pub fn pos_tag(tokens: &mut [Token]) {
    PosTagger::default().tag(tokens);
}

/// Left and right neighbours of every keyword occurrence.
///
/// Only word tokens are collected; punctuation and other keywords are
/// skipped. Output order is per occurrence, left context (text order) then
/// right context.
pub fn keyword_contexts(tokens: &[Token], keywords: &HashSet<String>, window: usize) -> Vec<String> {
    let candidate = |t: &Token| t.is_word() && !keywords.contains(&t.surface);
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if !(tok.is_word() && keywords.contains(&tok.surface)) {
            continue;
        }
        let mut left: Vec<&str> =
            tokens[..i].iter().rev().filter(|t| candidate(t)).take(window).map(|t| t.surface.as_str()).collect();
        left.reverse();
        out.extend(left.into_iter().map(str::to_string));
        out.extend(tokens[i + 1..].iter().filter(|t| candidate(t)).take(window).map(|t| t.surface.clone()));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Pos,
    Neg,
    Neu,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Pos, Polarity::Neg, Polarity::Neu];

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Pos => "POS",
            Polarity::Neg => "NEG",
            Polarity::Neu => "NEU",
        }
    }
}

/// Positive and negative word sets.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub positive: WordList,
    pub negative: WordList,
}

impl Default for Lexicon {
    fn default() -> Self {
        Self { positive: WordList::parse(POSITIVE), negative: WordList::parse(NEGATIVE) }
    }
}

/// Lexicon polarity: positive hits minus negative hits, with negated words
/// counted for the opposite side.
pub fn sentiment_polarity(tokens: &[Token], lexicon: &Lexicon) -> Polarity {
    let mut score: i64 = 0;
    for t in tokens.iter().filter(|t| t.is_word()) {
        let sign = if t.negated { -1 } else { 1 };
        if lexicon.positive.contains(&t.surface) {
            score += sign;
        }
        if lexicon.negative.contains(&t.surface) {
            score -= sign;
        }
    }
    match score.cmp(&0) {
        std::cmp::Ordering::Greater => Polarity::Pos,
        std::cmp::Ordering::Less => Polarity::Neg,
        std::cmp::Ordering::Equal => Polarity::Neu,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedMessage {
    pub raw: RawMessage,
    pub tokens: Vec<Token>,
    pub is_retweet: bool,
    pub mentions_self: bool,
    pub retweet_of_self: bool,
    pub person_markers: PersonCounts,
    pub polarity: Polarity,
}

impl AnnotatedMessage {
    /// Terms looked up in an embedding table: words, and hashtags without
    /// their `#`.
    pub fn embedding_terms(&self) -> Vec<&str> {
        self.tokens
            .iter()
            .filter_map(|t| match t.kind {
                TokenKind::Word => Some(t.surface.as_str()),
                TokenKind::Hashtag => Some(&t.surface[1..]),
                _ => None,
            })
            .collect()
    }

    pub fn pos_counts(&self) -> BTreeMap<Pos, usize> {
        let mut counts = BTreeMap::new();
        for t in self.tokens.iter().filter(|t| t.is_word()) {
            *counts.entry(t.pos).or_insert(0) += 1;
        }
        counts
    }
}

/// Bundles the word lists needed to annotate messages. Immutable once built.
#[derive(Debug, Clone)]
pub struct Annotator {
    pub pronouns: PronounLists,
    pub negation_cues: WordList,
    pub lexicon: Lexicon,
    pub tagger: PosTagger,
}

impl Default for Annotator {
    fn default() -> Self {
        let pronouns = PronounLists::default();
        let tagger = PosTagger::new(&pronouns, WordList::parse(VERBS));
        Self { pronouns, negation_cues: WordList::parse(NEGATION_CUES), lexicon: Lexicon::default(), tagger }
    }
}

impl Annotator {
    pub fn with_lexicon(mut self, lexicon: Lexicon) -> Self {
        self.lexicon = lexicon;
        self
    }

    /// Annotates a message; self-interactions are checked against
    /// `entity_handle`, defaulting to the message's entity id.
    pub fn annotate(&self, raw: &RawMessage, entity_handle: Option<&str>) -> AnnotatedMessage {
        let mut tokens = tokenize(&raw.text);
        mark_negation(&mut tokens, &self.negation_cues);
        self.tagger.tag(&mut tokens);
        let person_markers = mark_persons(&mut tokens, &self.pronouns);
        let si = detect_self_interactions(&tokens, entity_handle.unwrap_or(&raw.entity_id));
        let polarity = sentiment_polarity(&tokens, &self.lexicon);
        AnnotatedMessage {
            raw: raw.clone(),
            tokens,
            is_retweet: si.is_retweet,
            mentions_self: si.mentions_self,
            retweet_of_self: si.retweet_of_self,
            person_markers,
            polarity,
        }
    }
}
