use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// Byte span `[start, end)` into the source text.
pub type Span = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lowercase: String,
    pub sentence_index: usize,
    pub token_index: usize,
    pub span: Span,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.surface.chars().next().is_some_and(char::is_alphanumeric)
    }

    pub fn is_capitalized(&self) -> bool {
        self.surface.chars().next().is_some_and(char::is_uppercase)
    }
}

/// Abbreviations whose trailing period never ends a sentence.
#[derive(Debug, Clone, Default)]
pub struct Abbreviations(HashSet<String>);

impl Abbreviations {
    pub fn parse(text: &str) -> Self {
        Abbreviations(
            text.lines()
                .map(|l| l.trim().trim_end_matches('.').to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into raw `(start, end)` pieces: word runs and single
/// punctuation characters. Whitespace is never part of a piece.
///
/// Word runs may contain inner apostrophes and hyphens (`don't`, `well-known`);
/// a trailing possessive `'s` is split into its own piece.
fn raw_pieces(text: &str) -> Vec<Span> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            out.push((start, end_of(i + 1)));
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if (is_apostrophe(c) || c == '-')
                && chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphanumeric())
            {
                j += 2;
            } else {
                break;
            }
        }
        // possessive split: "John's" -> "John", "'s"
        let word_end = end_of(j);
        let word = &text[start..word_end];
        let lower = word.to_lowercase();
        if j - i > 2
            && (lower.ends_with("'s") || lower.ends_with("\u{2019}s"))
        {
            let cut = word_end - 1 - word[..word.len() - 1].chars().last().map_or(1, char::len_utf8);
            out.push((start, cut));
            out.push((cut, word_end));
        } else {
            out.push((start, word_end));
        }
        i = j;
    }
    out
}

fn is_terminal(piece: &str) -> bool {
    matches!(piece, "." | "!" | "?")
}

fn is_closer(piece: &str) -> bool {
    matches!(piece, "\"" | "'" | ")" | "]" | "\u{201d}" | "\u{2019}")
}

/// Tokenizes `text` into sentences.
///
/// A sentence ends after a terminal mark (`.`, `!`, `?`, plus any closing
/// quotes or brackets) when it is followed by whitespace and then a capital
/// letter or the end of text. A period directly attached to a known
/// abbreviation never ends a sentence.
pub fn tokenize(text: &str, abbreviations: &Abbreviations) -> Vec<Vec<Token>> {
    let pieces = raw_pieces(text);
    let mut sentences: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();

    let mut k = 0;
    while k < pieces.len() {
        let (s, e) = pieces[k];
        push_token(&mut current, text, (s, e), sentences.len());
        let piece = &text[s..e];

        let mut boundary = false;
        if is_terminal(piece) {
            let abbreviated = piece == "."
                && k > 0
                && pieces[k - 1].1 == s
                && abbreviations.contains(&text[pieces[k - 1].0..pieces[k - 1].1]);
            if !abbreviated {
                // absorb trailing terminals and closers
                while k + 1 < pieces.len() {
                    let (ns, ne) = pieces[k + 1];
                    let next = &text[ns..ne];
                    if ns == pieces[k].1 && (is_terminal(next) || is_closer(next)) {
                        k += 1;
                        push_token(&mut current, text, (ns, ne), sentences.len());
                    } else {
                        break;
                    }
                }
                boundary = match pieces.get(k + 1) {
                    None => true,
                    Some(&(ns, _)) => {
                        let gap_is_space = ns > pieces[k].1
                            && text[pieces[k].1..ns].chars().all(char::is_whitespace);
                        let next_upper = text[ns..].chars().next().is_some_and(|c| {
                            c.is_uppercase() || c.is_numeric() || c == '"' || c == '\u{201c}'
                        });
                        gap_is_space && next_upper
                    }
                };
            }
        }
        if boundary {
            sentences.push(std::mem::take(&mut current));
        }
        k += 1;
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

fn push_token(sentence: &mut Vec<Token>, text: &str, span: Span, sentence_index: usize) {
    let surface = &text[span.0..span.1];
    sentence.push(Token {
        surface: surface.to_string(),
        lowercase: surface.to_lowercase(),
        sentence_index,
        token_index: sentence.len(),
        span,
    });
}
