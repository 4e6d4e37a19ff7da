//! Lossless C/C++ tokenizer.
//!
//! Every byte of the input survives in exactly one token, including
//! whitespace, newlines, and comments, so layout statistics can be computed
//! from the token stream alone. The lexer never fails: bytes it cannot
//! classify become [`TokenKind::Unknown`] tokens.

/// Classification of a source token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Number,
    Str,
    CharLit,
    Operator,
    Punct,
    CommentLine,
    CommentBlock,
    Whitespace,
    Newline,
    Preprocessor,
    Unknown,
}

impl TokenKind {
    /// Whitespace, newlines, and comments; everything the parser skips.
    pub fn is_trivia(self) -> bool {
        matches!(
            self,
            TokenKind::Whitespace
                | TokenKind::Newline
                | TokenKind::CommentLine
                | TokenKind::CommentBlock
        )
    }

    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::CommentLine | TokenKind::CommentBlock)
    }
}

/// One source token with its exact text and 1-based start position.
///
/// Columns count characters, not display width; a tab advances one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
}

impl Token {
    /// Last source line this token touches (block comments and raw strings
    /// may span several).
    pub fn end_line(&self) -> u32 {
        self.line + self.text.chars().filter(|&c| c == '\n').count() as u32
    }
}

/// Ordered token sequence for one source file.
#[derive(Debug, Clone)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    /// 1 + number of newline tokens.
    pub line_count: u32,
}

impl TokenStream {
    /// Tokens the parser consumes (trivia skipped).
    pub fn non_trivia(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| !t.kind.is_trivia())
    }

    /// The fixed set of operator spellings this lexer recognizes.
    pub fn operator_catalogue(&self) -> &'static [&'static str] {
        OPERATORS
    }

    /// Number of source lines carrying at least one non-comment code token.
    pub fn non_comment_line_count(&self) -> u64 {
        let mut lines = std::collections::BTreeSet::new();
        for t in &self.tokens {
            if t.kind.is_trivia() {
                continue;
            }
            for line in t.line..=t.end_line() {
                lines.insert(line);
            }
        }
        lines.len() as u64
    }

    /// Number of source lines touched by at least one comment token.
    pub fn comment_line_count(&self) -> u64 {
        let mut lines = std::collections::BTreeSet::new();
        for t in &self.tokens {
            if t.kind.is_comment() {
                for line in t.line..=t.end_line() {
                    lines.insert(line);
                }
            }
        }
        lines.len() as u64
    }
}

/// Recognized C++ operators, longest first so maximal munch falls out of a
/// linear scan.
pub const OPERATORS: &[&str] = &[
    "<<=", ">>=", "->*", "::", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ".*", "+", "-", "*", "/", "%", "<", ">", "=",
    "!", "&", "|", "^", "~", "?", ":", ".",
];

const PUNCTUATION: &[&str] = &["...", "(", ")", "{", "}", "[", "]", ";", ","];

/// C++17 keyword set.
pub const KEYWORDS: &[&str] = &[
    "alignas", "alignof", "and", "and_eq", "asm", "auto", "bitand", "bitor", "bool", "break",
    "case", "catch", "char", "char16_t", "char32_t", "class", "compl", "const", "const_cast",
    "constexpr", "continue", "decltype", "default", "delete", "do", "double", "dynamic_cast",
    "else", "enum", "explicit", "export", "extern", "false", "float", "for", "friend", "goto",
    "if", "inline", "int", "long", "mutable", "namespace", "new", "noexcept", "not", "not_eq",
    "nullptr", "operator", "or", "or_eq", "private", "protected", "public", "register",
    "reinterpret_cast", "return", "short", "signed", "sizeof", "static", "static_assert",
    "static_cast", "struct", "switch", "template", "this", "thread_local", "throw", "true", "try",
    "typedef", "typeid", "typename", "union", "unsigned", "using", "virtual", "void", "volatile",
    "wchar_t", "while", "xor", "xor_eq",
];

pub fn is_keyword(text: &str) -> bool {
    KEYWORDS.binary_search(&text).is_ok()
}

struct Lexer<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: u32,
    column: u32,
    /// True until a non-whitespace token is produced on the current line;
    /// `#` starts a preprocessor directive only here.
    at_line_start: bool,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            at_line_start: true,
            tokens: Vec::new(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn rest_starts_with(&self, pat: &str) -> bool {
        let mut i = self.pos;
        for pc in pat.chars() {
            if self.chars.get(i) != Some(&pc) {
                return false;
            }
            i += 1;
        }
        true
    }

    /// Emit chars [start, self.pos) as one token.
    fn emit(&mut self, kind: TokenKind, start: usize, start_line: u32, start_col: u32) {
        let text: String = self.chars[start..self.pos].iter().collect();
        if !matches!(kind, TokenKind::Whitespace | TokenKind::Newline) {
            self.at_line_start = false;
        }
        self.tokens.push(Token {
            kind,
            text,
            line: start_line,
            column: start_col,
        });
    }

    /// Consume one char, maintaining line/column.
    fn bump(&mut self) {
        if let Some(c) = self.peek(0) {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn run(mut self) -> TokenStream {
        while let Some(c) = self.peek(0) {
            let (start, line, col) = (self.pos, self.line, self.column);
            match c {
                '\r' => {
                    // \r\n stays one newline token; a lone \r also counts.
                    self.bump();
                    if self.peek(0) == Some('\n') {
                        self.bump();
                    }
                    self.emit(TokenKind::Newline, start, line, col);
                    self.at_line_start = true;
                }
                '\n' => {
                    self.bump();
                    self.emit(TokenKind::Newline, start, line, col);
                    self.at_line_start = true;
                }
                ' ' | '\t' | '\x0b' | '\x0c' => {
                    while matches!(self.peek(0), Some(' ' | '\t' | '\x0b' | '\x0c')) {
                        self.bump();
                    }
                    self.emit(TokenKind::Whitespace, start, line, col);
                }
                '#' if self.at_line_start => {
                    self.lex_preprocessor(start, line, col);
                }
                '/' if self.peek(1) == Some('/') => {
                    while self.peek(0).is_some_and(|c| c != '\n' && c != '\r') {
                        self.bump();
                    }
                    self.emit(TokenKind::CommentLine, start, line, col);
                }
                '/' if self.peek(1) == Some('*') => {
                    self.bump_n(2);
                    loop {
                        if self.rest_starts_with("*/") {
                            self.bump_n(2);
                            break;
                        }
                        if self.peek(0).is_none() {
                            break; // unterminated: token runs to EOF
                        }
                        self.bump();
                    }
                    self.emit(TokenKind::CommentBlock, start, line, col);
                }
                '"' => {
                    self.lex_string(start, line, col);
                }
                '\'' => {
                    self.lex_char(start, line, col);
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                    self.lex_number(start, line, col);
                }
                c if c.is_alphabetic() || c == '_' => {
                    if let Some((prefix_len, raw)) = self.string_prefix() {
                        self.bump_n(prefix_len);
                        if self.peek(0) == Some('\'') {
                            self.lex_char(start, line, col);
                        } else if raw {
                            self.lex_raw_string(start, line, col);
                        } else {
                            self.lex_string(start, line, col);
                        }
                    } else {
                        while self
                            .peek(0)
                            .is_some_and(|c| c.is_alphanumeric() || c == '_')
                        {
                            self.bump();
                        }
                        let text: String = self.chars[start..self.pos].iter().collect();
                        let kind = if is_keyword(&text) {
                            TokenKind::Keyword
                        } else {
                            TokenKind::Identifier
                        };
                        self.emit(kind, start, line, col);
                    }
                }
                _ => {
                    if let Some(p) = PUNCTUATION.iter().find(|p| self.rest_starts_with(p)) {
                        self.bump_n(p.chars().count());
                        self.emit(TokenKind::Punct, start, line, col);
                    } else if let Some(op) = OPERATORS.iter().find(|op| self.rest_starts_with(op)) {
                        self.bump_n(op.chars().count());
                        self.emit(TokenKind::Operator, start, line, col);
                    } else {
                        self.bump();
                        self.emit(TokenKind::Unknown, start, line, col);
                    }
                }
            }
        }
        let line_count =
            1 + self.tokens.iter().filter(|t| t.kind == TokenKind::Newline).count() as u32;
        debug_assert_eq!(
            self.tokens.iter().map(|t| t.text.as_str()).collect::<String>(),
            self.src
        );
        TokenStream {
            tokens: self.tokens,
            line_count,
        }
    }

    /// `u8 u U L` optionally followed by `R` before a quote; returns
    /// (prefix length in chars, is_raw).
    fn string_prefix(&self) -> Option<(usize, bool)> {
        for (p, raw) in [
            ("u8R\"", true),
            ("uR\"", true),
            ("UR\"", true),
            ("LR\"", true),
            ("R\"", true),
            ("u8\"", false),
            ("u\"", false),
            ("U\"", false),
            ("L\"", false),
            ("u8'", false),
            ("u'", false),
            ("U'", false),
            ("L'", false),
        ] {
            if self.rest_starts_with(p) {
                return Some((p.len() - 1, raw));
            }
        }
        None
    }

    fn lex_preprocessor(&mut self, start: usize, line: u32, col: u32) {
        while let Some(c) = self.peek(0) {
            if c == '\\' {
                // Line continuation keeps the directive as one token.
                match (self.peek(1), self.peek(2)) {
                    (Some('\n'), _) => {
                        self.bump_n(2);
                        continue;
                    }
                    (Some('\r'), Some('\n')) => {
                        self.bump_n(3);
                        continue;
                    }
                    _ => {}
                }
            }
            if c == '\n' || c == '\r' {
                break;
            }
            self.bump();
        }
        self.emit(TokenKind::Preprocessor, start, line, col);
    }

    fn lex_string(&mut self, start: usize, line: u32, col: u32) {
        self.bump(); // opening quote
        while let Some(c) = self.peek(0) {
            if c == '\\' && self.peek(1).is_some() {
                self.bump_n(2);
            } else if c == '"' {
                self.bump();
                break;
            } else if c == '\n' {
                break; // unterminated on this line
            } else {
                self.bump();
            }
        }
        self.emit(TokenKind::Str, start, line, col);
    }

    fn lex_raw_string(&mut self, start: usize, line: u32, col: u32) {
        self.bump(); // opening quote
        let mut delim = String::new();
        while let Some(c) = self.peek(0) {
            if c == '(' {
                break;
            }
            if c == '"' || c == '\\' || c.is_whitespace() || delim.len() >= 16 {
                break; // malformed delimiter; fall back to plain scan below
            }
            delim.push(c);
            self.bump();
        }
        if self.peek(0) == Some('(') {
            self.bump();
            let close: String = format!("){delim}\"");
            while self.peek(0).is_some() {
                if self.rest_starts_with(&close) {
                    self.bump_n(close.chars().count());
                    break;
                }
                self.bump();
            }
        } else {
            // Not a well-formed raw string; consume to end of line or quote.
            while self.peek(0).is_some_and(|c| c != '\n' && c != '"') {
                self.bump();
            }
            if self.peek(0) == Some('"') {
                self.bump();
            }
        }
        self.emit(TokenKind::Str, start, line, col);
    }

    fn lex_char(&mut self, start: usize, line: u32, col: u32) {
        self.bump(); // opening quote
        while let Some(c) = self.peek(0) {
            if c == '\\' && self.peek(1).is_some() {
                self.bump_n(2);
            } else if c == '\'' {
                self.bump();
                break;
            } else if c == '\n' {
                break;
            } else {
                self.bump();
            }
        }
        self.emit(TokenKind::CharLit, start, line, col);
    }

    /// pp-number: digits, letters, underscores, digit separators, dots, and
    /// signed exponents. Deliberately permissive; it never misfires on
    /// operators because it only starts at a digit (or dot-digit).
    fn lex_number(&mut self, start: usize, line: u32, col: u32) {
        while let Some(c) = self.peek(0) {
            if c.is_alphanumeric() || c == '_' || c == '.' || c == '\'' {
                let exp = matches!(c, 'e' | 'E' | 'p' | 'P')
                    && matches!(self.peek(1), Some('+' | '-'));
                self.bump();
                if exp {
                    self.bump();
                }
            } else {
                break;
            }
        }
        self.emit(TokenKind::Number, start, line, col);
    }
}

/// Tokenize `body` losslessly. Never fails.
pub fn tokenize(body: &str) -> TokenStream {
    Lexer::new(body).run()
}

/// Drop comment tokens; remaining tokens keep their original positions.
pub fn strip_comments(ts: &TokenStream) -> TokenStream {
    TokenStream {
        tokens: ts
            .tokens
            .iter()
            .filter(|t| !t.kind.is_comment())
            .cloned()
            .collect(),
        line_count: ts.line_count,
    }
}
