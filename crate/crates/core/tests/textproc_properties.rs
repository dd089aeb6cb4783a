use std::collections::HashSet;

use causecommit::textproc::{
    count_persons, detect_self_interactions, mark_negation, sentiment_polarity, tokenize, Annotator, Lexicon, Polarity,
    PronounLists, RawMessage, TokenKind, WordList,
};
use proptest::prelude::*;

fn list(text: &str) -> HashSet<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_lowercase).collect()
}

const VOCAB: &[&str] = &[
    "RT", "rt", "@acme", "@Acme", "@other", "#eco", "we", "I", "you", "They", "her", "not", "never", "don't", "can't",
    "love", "hate", "planting", "trees", "today", "!", ",", "...", "http://x.co/a", "www.site.org", "it's", "our",
    "mine", "THEM", "great", "bad", "no",
];

fn message() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(VOCAB), 0..15).prop_map(|w| w.join(" "))
}

fn free_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9_'’#@!?,.:;()\\- éü]{0,60}"
}

proptest! {
    #[test]
    fn tokenize_is_deterministic_and_idempotent_on_words(text in free_text()) {
        let a = tokenize(&text);
        prop_assert_eq!(&a, &tokenize(&text));
        let words: Vec<String> = a.iter().filter(|t| t.kind == TokenKind::Word).map(|t| t.surface.clone()).collect();
        let again: Vec<String> =
            tokenize(&words.join(" ")).into_iter().filter(|t| t.kind == TokenKind::Word).map(|t| t.surface).collect();
        prop_assert_eq!(words, again);
    }

    #[test]
    fn retweet_of_self_implies_both_flags(text in message(), handle in prop::sample::select(&["acme", "@ACME", "other", ""][..])) {
        let si = detect_self_interactions(&tokenize(&text), handle);
        prop_assert!(!si.retweet_of_self || (si.mentions_self && si.is_retweet));
    }

    #[test]
    fn negation_never_reaches_backwards(text in message()) {
        let cues = WordList::parse("not\nno\nnever\ncannot\n");
        let mut tokens = tokenize(&text);
        mark_negation(&mut tokens, &cues);
        let is_cue = |s: &str| cues.contains(s) || s.ends_with("n't");
        let first_cue = tokens.iter().position(|t| t.is_word() && is_cue(&t.surface)).unwrap_or(tokens.len());
        prop_assert!(tokens[..first_cue].iter().all(|t| !t.negated));
        // Every negated token has a cue within three words to its left.
        for (i, _) in tokens.iter().enumerate().filter(|(_, t)| t.negated) {
            let words_back: Vec<_> = tokens[..i].iter().rev().filter(|t| t.is_word()).take(3).collect();
            prop_assert!(words_back.iter().any(|w| is_cue(&w.surface)));
        }
    }

    #[test]
    fn no_lexicon_hits_is_neutral(words in prop::collection::vec("[a-z]{3,8}", 0..10)) {
        let lexicon = Lexicon::default();
        let text: Vec<String> =
            words.into_iter().filter(|w| !lexicon.positive.contains(w) && !lexicon.negative.contains(w)).collect();
        prop_assert_eq!(sentiment_polarity(&tokenize(&text.join(" ")), &lexicon), Polarity::Neu);
    }

    #[test]
    fn person_counts_match_list_membership(text in message()) {
        let first = list(include_str!("../data/first_person.txt"));
        let second = list(include_str!("../data/second_person.txt"));
        let third = list(include_str!("../data/third_person.txt"));
        let tokens = tokenize(&text);
        let words: Vec<&str> = tokens.iter().filter(|t| t.kind == TokenKind::Word).map(|t| t.surface.as_str()).collect();
        let count = |set: &HashSet<String>| words.iter().filter(|w| set.contains(**w)).count();
        let c = count_persons(&tokens, &PronounLists::default());
        prop_assert_eq!((c.first, c.second, c.third), (count(&first), count(&second), count(&third)));
    }

    #[test]
    fn annotation_is_deterministic(text in message()) {
        let raw = RawMessage::new("acme", "1", text).unwrap();
        let a = Annotator::default();
        prop_assert_eq!(a.annotate(&raw, None), a.annotate(&raw, None));
    }
}
