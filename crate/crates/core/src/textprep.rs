//! Text preprocessing: normalization, sentence splitting, lexicon-driven
//! segmentation, and POS tagging.
//!
//! All protocols consume the token stream produced here, so everything is
//! a pure function of `(text, lexicon)`: same input, same tokens,
//! byte-for-byte. The segmenter is deliberately a self-contained forward
//! maximum-matching pass over an immutable lexicon rather than a wrapper
//! around an external tool — determinism and offline testability matter
//! more here than segmentation accuracy, and the [`Segmenter`] trait
//! leaves room to plug in something heavier.
//!
//! Offsets are character indices (not bytes) throughout; Chinese text
//! makes byte offsets useless for annotation alignment.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use unicode_normalization::UnicodeNormalization;

/// Half-open character interval `[start, end)` into a sentence text.
/// Character indices, never bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> CharSpan {
        CharSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the spans share at least one character.
    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// First occurrence of `needle` in `text` at or after character index
/// `from`, as a character span.
pub fn find_char_span(text: &str, needle: &str, from: usize) -> Option<CharSpan> {
    if needle.is_empty() {
        return None;
    }
    let chars: Vec<char> = text.chars().collect();
    let target: Vec<char> = needle.chars().collect();
    if target.len() > chars.len() {
        return None;
    }
    for start in from..=chars.len().saturating_sub(target.len()) {
        if chars[start..start + target.len()] == target[..] {
            return Some(CharSpan::new(start, start + target.len()));
        }
    }
    None
}

/// First occurrence of `needle` whose span overlaps none of `avoid`.
pub fn find_char_span_avoiding(
    text: &str,
    needle: &str,
    from: usize,
    avoid: &[CharSpan],
) -> Option<CharSpan> {
    let mut at = from;
    loop {
        let span = find_char_span(text, needle, at)?;
        if avoid.iter().all(|a| !a.overlaps(&span)) {
            return Some(span);
        }
        at = span.start + 1;
    }
}

/// Closed part-of-speech tag set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Pron,
    Num,
    Part,
    Prep,
    Conj,
    Punct,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 11] = [
        Pos::Noun,
        Pos::Verb,
        Pos::Adj,
        Pos::Adv,
        Pos::Pron,
        Pos::Num,
        Pos::Part,
        Pos::Prep,
        Pos::Conj,
        Pos::Punct,
        Pos::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Pron => "PRON",
            Pos::Num => "NUM",
            Pos::Part => "PART",
            Pos::Prep => "PREP",
            Pos::Conj => "CONJ",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<Pos> {
        Pos::ALL.iter().copied().find(|p| p.as_str() == s)
    }

    /// Content words are the protocol A candidate set.
    pub fn is_content(self) -> bool {
        matches!(self, Pos::Noun | Pos::Verb | Pos::Adj | Pos::Adv)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One segmented token. `char_start`/`char_end` index characters of the
/// owning sentence; `surface` always equals that slice.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Token {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    pub pos: Pos,
}

/// A sentence with its token cover. Tokens are contiguous,
/// non-overlapping, and concatenate back to `text` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sentence {
    pub source_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn untokenized(source_id: impl Into<String>, text: impl Into<String>) -> Sentence {
        Sentence {
            source_id: source_id.into(),
            text: text.into(),
            tokens: Vec::new(),
        }
    }

    /// Segments and POS-tags `text` with the given lexicon.
    pub fn tokenized(
        source_id: impl Into<String>,
        text: impl Into<String>,
        lexicon: &Lexicon,
    ) -> Sentence {
        let text = text.into();
        let tokens = pos_tag(segment(&text, lexicon), lexicon);
        Sentence {
            source_id: source_id.into(),
            text,
            tokens,
        }
    }

    /// Character slice of the sentence text.
    pub fn char_slice(&self, start: usize, end: usize) -> String {
        self.text.chars().skip(start).take(end.saturating_sub(start)).collect()
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// Lexicon entry: corpus frequency plus a default POS tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexEntry {
    pub frequency: u64,
    pub pos: Pos,
}

/// Immutable segmentation lexicon (word -> frequency, default POS).
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: BTreeMap<String, LexEntry>,
    max_chars: usize,
}

/// Parse failure for the one-entry-per-line lexicon format
/// `word<TAB>frequency<TAB>POS`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconParseError {
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for LexiconParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lexicon line {}: {}", self.line, self.reason)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LexiconParseError {}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    pub fn insert(&mut self, word: impl Into<String>, frequency: u64, pos: Pos) {
        let word = word.into();
        let chars = word.chars().count();
        if chars > self.max_chars {
            self.max_chars = chars;
        }
        self.entries.insert(word, LexEntry { frequency, pos });
    }

    pub fn from_entries<I, S>(entries: I) -> Lexicon
    where
        I: IntoIterator<Item = (S, u64, Pos)>,
        S: Into<String>,
    {
        let mut lex = Lexicon::new();
        for (w, f, p) in entries {
            lex.insert(w, f, p);
        }
        lex
    }

    /// Parses `word<TAB>frequency<TAB>POS` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Lexicon, LexiconParseError> {
        let mut lex = Lexicon::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let word = parts.next().unwrap_or("");
            let freq = parts.next().ok_or_else(|| LexiconParseError {
                line: line_no,
                reason: "missing frequency field".to_string(),
            })?;
            let pos = parts.next().ok_or_else(|| LexiconParseError {
                line: line_no,
                reason: "missing POS field".to_string(),
            })?;
            if word.is_empty() {
                return Err(LexiconParseError {
                    line: line_no,
                    reason: "empty word".to_string(),
                });
            }
            let frequency: u64 = freq.parse().map_err(|_| LexiconParseError {
                line: line_no,
                reason: alloc::format!("bad frequency {freq:?}"),
            })?;
            let pos = Pos::parse(pos.trim()).ok_or_else(|| LexiconParseError {
                line: line_no,
                reason: alloc::format!("unknown POS tag {pos:?}"),
            })?;
            lex.insert(word, frequency, pos);
        }
        Ok(lex)
    }

    pub fn get(&self, word: &str) -> Option<LexEntry> {
        self.entries.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    /// Longest entry length in characters; bounds the matching window.
    pub fn max_word_chars(&self) -> usize {
        self.max_chars
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Pluggable segmentation interface. The bundled implementation is
/// [`segment`]; anything substituted here must keep the coverage
/// invariant (token surfaces concatenate to the sentence text).
pub trait Segmenter {
    fn segment(&self, sentence_text: &str) -> Vec<Token>;
}

/// Forward-maximum-matching segmenter over a lexicon.
pub struct MaxMatchSegmenter<'a> {
    pub lexicon: &'a Lexicon,
}

impl Segmenter for MaxMatchSegmenter<'_> {
    fn segment(&self, sentence_text: &str) -> Vec<Token> {
        segment(sentence_text, self.lexicon)
    }
}

/// Normalizes raw text: Unicode NFC, full-width ASCII variants folded to
/// half-width (U+FF01..=U+FF5E and the ideographic space U+3000), runs of
/// whitespace collapsed to a single space, ends trimmed. Total function;
/// idempotent.
pub fn normalize(raw: &str) -> String {
    let folded = raw.nfc().map(fold_width);
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in folded {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

fn fold_width(c: char) -> char {
    match c {
        '\u{3000}' => ' ',
        '\u{FF01}'..='\u{FF5E}' => {
            // Fullwidth forms are a contiguous copy of ASCII 0x21..0x7E.
            char::from_u32(c as u32 - 0xFEE0).unwrap_or(c)
        }
        c => c,
    }
}

/// Sentence terminators for the fixed splitting rule.
const TERMINATORS: [char; 4] = ['。', '！', '？', '…'];

/// Closing quotes/brackets that stay attached to the preceding sentence.
const TRAILING_CLOSERS: [char; 12] = [
    '」', '』', '”', '’', '）', ')', '】', '〕', '》', '〉', '"', '\'',
];

/// Splits normalized text into sentence texts. Boundaries are the
/// terminators 。！？… ; each terminator run plus any trailing closing
/// quotes/brackets stays with the preceding sentence. Concatenating the
/// returned texts reproduces the input exactly.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if TERMINATORS.contains(&c) {
            // Absorb any further terminators and trailing closers.
            while let Some(&next) = chars.peek() {
                if TERMINATORS.contains(&next) || TRAILING_CLOSERS.contains(&next) {
                    current.push(next);
                    chars.next();
                } else {
                    break;
                }
            }
            sentences.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}

/// Deterministic forward maximum matching: at each position take the
/// longest lexicon word matching the remaining text; characters matching
/// nothing become single-character tokens. POS is left as `Other` for
/// [`pos_tag`] to fill.
pub fn segment(sentence_text: &str, lexicon: &Lexicon) -> Vec<Token> {
    let chars: Vec<char> = sentence_text.chars().collect();
    let mut tokens = Vec::new();
    let mut pos = 0;
    let window = lexicon.max_word_chars().max(1);
    while pos < chars.len() {
        let max_len = window.min(chars.len() - pos);
        let mut matched_len = 1;
        let mut candidate: String = chars[pos..pos + max_len].iter().collect();
        let mut len = max_len;
        loop {
            if len > 1 && lexicon.contains(&candidate) {
                matched_len = len;
                break;
            }
            if len == 1 {
                break;
            }
            // Drop the last char and retry one shorter.
            candidate.pop();
            len -= 1;
        }
        tokens.push(Token {
            surface: chars[pos..pos + matched_len].iter().collect(),
            char_start: pos,
            char_end: pos + matched_len,
            pos: Pos::Other,
        });
        pos += matched_len;
    }
    tokens
}

/// Fills POS tags: lexicon default when the surface is an entry, PUNCT
/// when every character is punctuation, OTHER otherwise.
pub fn pos_tag(tokens: Vec<Token>, lexicon: &Lexicon) -> Vec<Token> {
    tokens
        .into_iter()
        .map(|mut t| {
            t.pos = match lexicon.get(&t.surface) {
                Some(entry) => entry.pos,
                None if !t.surface.is_empty() && t.surface.chars().all(is_punct_char) => {
                    Pos::Punct
                }
                None => Pos::Other,
            };
            t
        })
        .collect()
}

/// Punctuation test over the ranges this pipeline meets after width
/// folding: ASCII punctuation, General Punctuation (U+2000..=U+206F),
/// CJK Symbols and Punctuation (U+3001..=U+303F), and the fullwidth
/// punctuation that width folding leaves in place.
pub fn is_punct_char(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c as u32,
            0x2000..=0x206F   // general punctuation, includes … and em dash
            | 0x3001..=0x303F // 、。〈〉《》「」『』【】 etc.
            | 0xFF01..=0xFF0F
            | 0xFF1A..=0xFF20
            | 0xFF3B..=0xFF40
            | 0xFF5B..=0xFF65)
}
