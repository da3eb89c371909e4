use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::Deserialize;

use super::{LexedSpan, SyntaxError, TokenCategory};

/// Language id accepted by every registry; emits only whitespace and default runs.
pub const PLAIN_TEXT: &str = "plain-text";

const BUILTIN_TABLES: &[(&str, &str)] = &[
    ("python", include_str!("../../assets/lexers/python.json")),
    ("java", include_str!("../../assets/lexers/java.json")),
    ("javascript", include_str!("../../assets/lexers/javascript.json")),
    ("typescript", include_str!("../../assets/lexers/typescript.json")),
    ("c", include_str!("../../assets/lexers/c.json")),
    ("cpp", include_str!("../../assets/lexers/cpp.json")),
    ("go", include_str!("../../assets/lexers/go.json")),
];

const OPERATOR_CHARS: &str = "+-*/%=<>!&|^~?@";
const PUNCTUATION_CHARS: &str = "()[]{},;:.";

/// Scanner rules for one language, loaded from a JSON keyword table.
#[derive(Debug, Clone, Deserialize)]
pub struct LanguageRules {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub extensions: Vec<String>,
    pub keywords: HashSet<String>,
    #[serde(default)]
    pub line_comments: Vec<String>,
    #[serde(default)]
    pub block_comments: Vec<(String, String)>,
    #[serde(default)]
    pub string_delimiters: Vec<char>,
    #[serde(default)]
    pub triple_quoted: bool,
}

impl LanguageRules {
    pub fn from_json(text: &str) -> Result<Self, SyntaxError> {
        let rules: LanguageRules =
            serde_json::from_str(text).map_err(|e| SyntaxError::InvalidTable {
                name: "<json>".into(),
                reason: e.to_string(),
            })?;
        if rules.name.trim().is_empty() {
            return Err(SyntaxError::InvalidTable {
                name: rules.name,
                reason: "empty language name".into(),
            });
        }
        if rules
            .line_comments
            .iter()
            .chain(rules.block_comments.iter().flat_map(|(o, c)| [o, c]))
            .any(|s| s.is_empty())
        {
            return Err(SyntaxError::InvalidTable {
                name: rules.name,
                reason: "empty comment delimiter".into(),
            });
        }
        Ok(rules)
    }
}

/// Immutable set of language rules keyed by lowercase name, alias and extension.
#[derive(Debug, Clone, Default)]
pub struct LexerRegistry {
    languages: BTreeMap<String, LanguageRules>,
    names: BTreeMap<String, String>,
    extensions: BTreeMap<String, String>,
}

impl LexerRegistry {
    pub fn builtin() -> &'static LexerRegistry {
        static REGISTRY: OnceLock<LexerRegistry> = OnceLock::new();
        REGISTRY.get_or_init(|| {
            let mut registry = LexerRegistry::default();
            for (name, table) in BUILTIN_TABLES {
                let rules = LanguageRules::from_json(table)
                    .unwrap_or_else(|e| panic!("bundled lexer table {name} is invalid: {e}"));
                registry.register(rules);
            }
            registry
        })
    }

    pub fn register(&mut self, rules: LanguageRules) {
        let key = rules.name.to_lowercase();
        self.names.insert(key.clone(), key.clone());
        for alias in &rules.aliases {
            self.names.insert(alias.to_lowercase(), key.clone());
        }
        for ext in &rules.extensions {
            self.extensions.insert(ext.to_lowercase(), key.clone());
        }
        self.languages.insert(key, rules);
    }

    /// Canonical language id for a name or alias. `plain-text` always resolves.
    pub fn resolve(&self, language: &str) -> Option<&str> {
        let key = language.to_lowercase();
        if key == PLAIN_TEXT {
            return Some(PLAIN_TEXT);
        }
        self.names.get(&key).map(String::as_str)
    }

    pub fn language_for_extension(&self, ext: &str) -> Option<&str> {
        self.extensions
            .get(&ext.to_lowercase())
            .map(String::as_str)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.languages.keys().map(String::as_str)
    }

    pub fn rules(&self, language: &str) -> Option<&LanguageRules> {
        let key = self.resolve(language)?;
        self.languages.get(key)
    }

    pub fn lex(&self, source: &str, language: &str) -> Result<Vec<LexedSpan>, SyntaxError> {
        let chars: Vec<char> = source.chars().collect();
        match self.resolve(language) {
            Some(PLAIN_TEXT) => Ok(lex_plain(&chars)),
            Some(key) => Ok(Scanner::new(&self.languages[key], &chars).run()),
            None => Err(SyntaxError::UnknownLanguage(language.to_string())),
        }
    }
}

/// Lex with the bundled registry.
pub fn lex(source: &str, language: &str) -> Result<Vec<LexedSpan>, SyntaxError> {
    LexerRegistry::builtin().lex(source, language)
}

fn lex_plain(chars: &[char]) -> Vec<LexedSpan> {
    let mut spans: Vec<LexedSpan> = Vec::new();
    for (i, c) in chars.iter().enumerate() {
        let category = if c.is_whitespace() {
            TokenCategory::Whitespace
        } else {
            TokenCategory::Default
        };
        push_merged(&mut spans, i..i + 1, category);
    }
    spans
}

fn is_run_category(category: TokenCategory) -> bool {
    matches!(
        category,
        TokenCategory::Whitespace
            | TokenCategory::Operator
            | TokenCategory::Punctuation
            | TokenCategory::Default
    )
}

fn push_merged(spans: &mut Vec<LexedSpan>, range: std::ops::Range<usize>, category: TokenCategory) {
    if range.is_empty() {
        return;
    }
    if let Some(last) = spans.last_mut() {
        if last.category == category && last.range.end == range.start && is_run_category(category)
        {
            last.range.end = range.end;
            return;
        }
    }
    spans.push(LexedSpan { range, category });
}

struct Scanner<'a> {
    rules: &'a LanguageRules,
    chars: &'a [char],
    pos: usize,
    spans: Vec<LexedSpan>,
}

impl<'a> Scanner<'a> {
    fn new(rules: &'a LanguageRules, chars: &'a [char]) -> Self {
        Self {
            rules,
            chars,
            pos: 0,
            spans: Vec::new(),
        }
    }

    fn starts_with(&self, at: usize, pat: &str) -> bool {
        (at..).zip(pat.chars()).all(|(i, p)| self.chars.get(i) == Some(&p))
    }

    fn comment_end(&self, at: usize) -> Option<usize> {
        for prefix in &self.rules.line_comments {
            if self.starts_with(at, prefix) {
                let mut end = at + prefix.chars().count();
                while end < self.chars.len() && self.chars[end] != '\n' {
                    end += 1;
                }
                return Some(end);
            }
        }
        for (open, close) in &self.rules.block_comments {
            if self.starts_with(at, open) {
                let mut end = at + open.chars().count();
                let close_len = close.chars().count();
                while end < self.chars.len() {
                    if self.starts_with(end, close) {
                        return Some(end + close_len);
                    }
                    end += 1;
                }
                return Some(self.chars.len());
            }
        }
        None
    }

    fn string_end(&self, at: usize) -> Option<usize> {
        let quote = self.chars[at];
        if !self.rules.string_delimiters.contains(&quote) {
            return None;
        }
        let n = self.chars.len();
        if self.rules.triple_quoted
            && self.chars.get(at + 1) == Some(&quote)
            && self.chars.get(at + 2) == Some(&quote)
        {
            let mut end = at + 3;
            while end < n {
                if self.chars[end] == '\\' {
                    end += 2;
                    continue;
                }
                if self.chars[end] == quote
                    && self.chars.get(end + 1) == Some(&quote)
                    && self.chars.get(end + 2) == Some(&quote)
                {
                    return Some(end + 3);
                }
                end += 1;
            }
            return Some(n);
        }
        // Backtick strings may span lines; other quotes stop at end of line.
        let multiline = quote == '`';
        let mut end = at + 1;
        while end < n {
            let c = self.chars[end];
            if c == '\\' {
                if self.chars.get(end + 1) == Some(&'\n') && !multiline {
                    return Some(end + 1);
                }
                end += 2;
                continue;
            }
            if c == quote {
                return Some(end + 1);
            }
            if c == '\n' && !multiline {
                return Some(end);
            }
            end += 1;
        }
        Some(n.min(end))
    }

    fn run(mut self) -> Vec<LexedSpan> {
        let n = self.chars.len();
        while self.pos < n {
            let start = self.pos;
            let c = self.chars[start];
            let (end, category) = if c.is_whitespace() {
                let mut end = start + 1;
                while end < n && self.chars[end].is_whitespace() {
                    end += 1;
                }
                (end, TokenCategory::Whitespace)
            } else if let Some(end) = self.comment_end(start) {
                (end, TokenCategory::Comment)
            } else if let Some(end) = self.string_end(start) {
                (end, TokenCategory::String)
            } else if c.is_ascii_digit() {
                let mut end = start + 1;
                while end < n
                    && (self.chars[end].is_alphanumeric()
                        || self.chars[end] == '_'
                        || (self.chars[end] == '.'
                            && self.chars.get(end + 1).is_some_and(|d| d.is_ascii_digit())))
                {
                    end += 1;
                }
                (end, TokenCategory::Number)
            } else if c.is_alphabetic() || c == '_' || c == '$' {
                let mut end = start + 1;
                while end < n
                    && (self.chars[end].is_alphanumeric()
                        || self.chars[end] == '_'
                        || self.chars[end] == '$')
                {
                    end += 1;
                }
                let word: String = self.chars[start..end].iter().collect();
                let category = if self.rules.keywords.contains(&word) {
                    TokenCategory::Keyword
                } else {
                    TokenCategory::Identifier
                };
                (end, category)
            } else if OPERATOR_CHARS.contains(c) {
                (start + 1, TokenCategory::Operator)
            } else if PUNCTUATION_CHARS.contains(c) {
                (start + 1, TokenCategory::Punctuation)
            } else {
                (start + 1, TokenCategory::Default)
            };
            push_merged(&mut self.spans, start..end, category);
            self.pos = end;
        }
        self.spans
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(source: &str, spans: &[LexedSpan]) -> Vec<(String, TokenCategory)> {
        let chars: Vec<char> = source.chars().collect();
        spans
            .iter()
            .map(|s| (chars[s.range.clone()].iter().collect(), s.category))
            .collect()
    }

    #[test]
    fn python_def_line_golden() {
        use TokenCategory::*;
        let src = "def f(): # hi";
        let spans = lex(src, "python").unwrap();
        let got = texts(src, &spans);
        let want = vec![
            ("def".to_string(), Keyword),
            (" ".to_string(), Whitespace),
            ("f".to_string(), Identifier),
            ("():".to_string(), Punctuation),
            (" ".to_string(), Whitespace),
            ("# hi".to_string(), Comment),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn empty_source_has_no_spans() {
        assert!(lex("", "python").unwrap().is_empty());
        assert!(lex("", PLAIN_TEXT).unwrap().is_empty());
    }

    #[test]
    fn java_number_span_is_exact() {
        let src = "int x = 42;";
        let spans = lex(src, "java").unwrap();
        let numbers: Vec<_> = texts(src, &spans)
            .into_iter()
            .filter(|(_, c)| *c == TokenCategory::Number)
            .collect();
        assert_eq!(numbers, vec![("42".to_string(), TokenCategory::Number)]);
        assert_eq!(spans[0].category, TokenCategory::Keyword);
    }

    #[test]
    fn unknown_language_is_an_error() {
        let err = lex("+++", "brainfuck").unwrap_err();
        assert!(matches!(err, SyntaxError::UnknownLanguage(_)));
        assert!(err.to_string().contains("plain-text"));
    }

    #[test]
    fn strings_and_block_comments() {
        let src = "s = \"a // b\" /* c\nd */ 'x'";
        let spans = lex(src, "java").unwrap();
        let got = texts(src, &spans);
        assert!(got.contains(&("\"a // b\"".to_string(), TokenCategory::String)));
        assert!(got.contains(&("/* c\nd */".to_string(), TokenCategory::Comment)));
        assert!(got.contains(&("'x'".to_string(), TokenCategory::String)));
    }

    #[test]
    fn python_triple_quoted_string_spans_lines() {
        let src = "x = \"\"\"doc\nmore\"\"\"\ny";
        let got = texts(src, &lex(src, "py").unwrap());
        assert!(got.contains(&("\"\"\"doc\nmore\"\"\"".to_string(), TokenCategory::String)));
    }

    #[test]
    fn unterminated_string_stops_at_newline() {
        let src = "a = 'oops\nb";
        let got = texts(src, &lex(src, "python").unwrap());
        assert!(got.contains(&("'oops".to_string(), TokenCategory::String)));
        assert_eq!(got.last().unwrap(), &("b".to_string(), TokenCategory::Identifier));
    }

    #[test]
    fn registry_knows_six_language_families() {
        let reg = LexerRegistry::builtin();
        for lang in ["python", "java", "javascript", "typescript", "c", "cpp", "go"] {
            assert!(reg.resolve(lang).is_some(), "{lang}");
        }
        assert_eq!(reg.language_for_extension("PY"), Some("python"));
        assert_eq!(reg.language_for_extension("hpp"), Some("cpp"));
        assert_eq!(reg.resolve("TS"), Some("typescript"));
    }

    #[test]
    fn plain_text_only_whitespace_and_default() {
        let spans = lex("def  x", PLAIN_TEXT).unwrap();
        assert_eq!(spans.len(), 3);
        assert!(spans
            .iter()
            .all(|s| matches!(s.category, TokenCategory::Whitespace | TokenCategory::Default)));
    }

    #[test]
    fn rejects_empty_comment_delimiter() {
        let table = r#"{"name":"x","keywords":[],"line_comments":[""]}"#;
        assert!(LanguageRules::from_json(table).is_err());
    }
}
