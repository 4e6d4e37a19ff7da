//! Error-tolerant recursive descent over the non-trivia token sequence.
//!
//! Invariant maintained throughout: every token the cursor consumes becomes
//! exactly one leaf, so the leaf multiset always equals the non-trivia token
//! multiset. All parse paths either consume at least one token or return to
//! a caller that does, which makes the parser total.

use crate::ast::{AstNode, NodeType};
use crate::lexer::{Token, TokenKind, TokenStream};

/// Hard bound on recursion; past it the parser drains into error regions
/// instead of growing the stack.
const MAX_DEPTH: usize = 240;

/// Lookahead bound for the declaration scanner.
const SCAN_LIMIT: usize = 512;

const DECL_SPECIFIERS: &[&str] = &[
    "const", "constexpr", "extern", "explicit", "friend", "inline", "mutable", "register",
    "static", "thread_local", "typename", "virtual", "volatile",
];

const TYPE_KEYWORDS: &[&str] = &[
    "auto", "bool", "char", "char16_t", "char32_t", "decltype", "double", "float", "int", "long",
    "short", "signed", "unsigned", "void", "wchar_t",
];

const CAST_KEYWORDS: &[&str] = &["const_cast", "dynamic_cast", "reinterpret_cast", "static_cast"];

const STREAM_HEADS: &[&str] = &["cerr", "cin", "clog", "cout"];

pub(crate) fn is_identifier_text(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_') && !crate::lexer::is_keyword(s)
}

fn is_decl_specifier(s: &str) -> bool {
    DECL_SPECIFIERS.contains(&s)
}

fn is_type_keyword(s: &str) -> bool {
    TYPE_KEYWORDS.contains(&s)
}

pub(super) fn parse_translation_unit(ts: &TokenStream) -> AstNode {
    let toks: Vec<&Token> = ts.non_trivia().collect();
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let mut children = Vec::new();
    while !p.at_end() {
        let before = p.pos;
        children.push(p.parse_item());
        debug_assert!(p.pos > before, "item parse must make progress");
        if p.pos == before {
            children.push(p.error_region_min_one());
        }
    }
    AstNode::Inner {
        ty: NodeType::TranslationUnit,
        children,
        line: 1,
        column: 1,
    }
}

struct DeclScan {
    /// Index of the stopping token.
    stop: usize,
    /// Number of name-ish chains seen (a qualified chain counts once).
    names: usize,
    /// A type or declaration-specifier keyword appeared.
    saw_type: bool,
    /// Start of the trailing `[*&]* name-chain` run, when any name was seen.
    decl_start: usize,
}

struct Parser<'a> {
    toks: Vec<&'a Token>,
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn tok(&self, ahead: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + ahead).copied()
    }

    fn text(&self, ahead: usize) -> &'a str {
        self.tok(ahead).map_or("", |t| t.text.as_str())
    }

    fn kind(&self, ahead: usize) -> Option<TokenKind> {
        self.tok(ahead).map(|t| t.kind)
    }

    fn at(&self, text: &str) -> bool {
        self.text(0) == text
    }

    fn position(&self) -> (u32, u32) {
        self.tok(0).map_or((1, 1), |t| (t.line, t.column))
    }

    /// Consume the current token as a leaf. Caller guarantees not at end.
    fn bump(&mut self) -> AstNode {
        let t = self.toks[self.pos];
        self.pos += 1;
        AstNode::Leaf {
            text: t.text.clone(),
            line: t.line,
            column: t.column,
        }
    }

    fn bump_into(&mut self, children: &mut Vec<AstNode>) {
        let leaf = self.bump();
        children.push(leaf);
    }

    fn make(&self, ty: NodeType, children: Vec<AstNode>) -> AstNode {
        let (line, column) = children
            .first()
            .map(|c| c.position())
            .unwrap_or_else(|| self.position());
        AstNode::Inner {
            ty,
            children,
            line,
            column,
        }
    }

    fn over_depth(&self) -> bool {
        self.depth >= MAX_DEPTH
    }

    // ------------------------------------------------------------------
    // lookahead helpers
    // ------------------------------------------------------------------

    /// Skip a balanced `(` ... `)` starting at `i` (which must be `(`).
    /// Returns the index just past the matching close, or None at EOF.
    fn skip_parens(&self, mut i: usize) -> Option<usize> {
        let mut depth = 0usize;
        while let Some(t) = self.toks.get(i) {
            match t.text.as_str() {
                "(" => depth += 1,
                ")" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
                _ => {}
            }
            i += 1;
        }
        None
    }

    /// Try to skip template arguments starting at `i` (which must be `<`).
    /// Accepts only type-like contents; `>>` closes two levels. Returns the
    /// index past the closing `>`.
    fn skip_template_args(&self, mut i: usize) -> Option<usize> {
        let mut depth = 0i32;
        let limit = i + 256;
        while let Some(t) = self.toks.get(i) {
            if i > limit {
                return None;
            }
            match t.text.as_str() {
                "<" => depth += 1,
                ">" => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
                ">>" => {
                    depth -= 2;
                    if depth <= 0 {
                        return if depth == 0 { Some(i + 1) } else { None };
                    }
                }
                "::" | "," | "*" | "&" => {}
                "..." => {}
                _ => match t.kind {
                    TokenKind::Identifier | TokenKind::Keyword | TokenKind::Number => {}
                    _ => return None,
                },
            }
            i += 1;
        }
        None
    }

    /// Heuristic scan classifying what begins at the cursor. Does not
    /// consume anything.
    fn scan_decl(&self) -> DeclScan {
        let mut i = self.pos;
        let mut names = 0usize;
        let mut saw_type = false;
        let mut decl_start = self.pos;
        let mut ptr_run_start: Option<usize> = None;
        let limit = self.pos + SCAN_LIMIT;
        while let Some(t) = self.toks.get(i) {
            if i > limit {
                break;
            }
            let text = t.text.as_str();
            match t.kind {
                TokenKind::Keyword if is_decl_specifier(text) || is_type_keyword(text) => {
                    saw_type = true;
                    ptr_run_start = None;
                    i += 1;
                }
                TokenKind::Keyword if text == "struct" || text == "class" || text == "enum" || text == "union" => {
                    // elaborated type: `struct Foo x;`
                    saw_type = true;
                    ptr_run_start = None;
                    i += 1;
                }
                TokenKind::Keyword if text == "operator" => {
                    // operator function name
                    decl_start = ptr_run_start.take().unwrap_or(i);
                    names += 1;
                    i += 1;
                    if self.toks.get(i).is_some_and(|t| t.text == "(")
                        && self.toks.get(i + 1).is_some_and(|t| t.text == ")")
                    {
                        i += 2;
                    } else if self.toks.get(i).is_some_and(|t| t.text == "[") {
                        i += 1;
                        if self.toks.get(i).is_some_and(|t| t.text == "]") {
                            i += 1;
                        }
                    } else if self
                        .toks
                        .get(i)
                        .is_some_and(|t| t.kind == TokenKind::Operator)
                    {
                        i += 1;
                    }
                    break; // `(` should follow; stop scanning
                }
                TokenKind::Identifier => {
                    decl_start = ptr_run_start.take().unwrap_or(i);
                    names += 1;
                    i += 1;
                    if self.toks.get(i).is_some_and(|t| t.text == "<") {
                        if let Some(after) = self.skip_template_args(i) {
                            saw_type = true;
                            i = after;
                        }
                    }
                    while self.toks.get(i).is_some_and(|t| t.text == "::")
                        && self
                            .toks
                            .get(i + 1)
                            .is_some_and(|t| t.kind == TokenKind::Identifier)
                    {
                        i += 2;
                        if self.toks.get(i).is_some_and(|t| t.text == "<") {
                            if let Some(after) = self.skip_template_args(i) {
                                saw_type = true;
                                i = after;
                            }
                        }
                    }
                }
                _ if text == "*" || text == "&" || text == "&&" => {
                    if ptr_run_start.is_none() {
                        ptr_run_start = Some(i);
                    }
                    i += 1;
                }
                _ if text == "::" => {
                    i += 1;
                }
                _ => break,
            }
        }
        DeclScan {
            stop: i,
            names,
            saw_type,
            decl_start,
        }
    }

    /// After a parameter list, skip qualifiers and a trailing return type to
    /// see whether a `{` body follows.
    fn body_follows_params(&self, after_parens: usize) -> bool {
        let mut i = after_parens;
        let limit = i + 64;
        while let Some(t) = self.toks.get(i) {
            if i > limit {
                return false;
            }
            match t.text.as_str() {
                "{" => return true,
                ":" => return true, // constructor initializer list
                "const" | "noexcept" | "override" | "final" | "&" | "&&" | "->" | "::" => i += 1,
                "(" => match self.skip_parens(i) {
                    Some(n) => i = n,
                    None => return false,
                },
                "<" => match self.skip_template_args(i) {
                    Some(n) => i = n,
                    None => return false,
                },
                _ if t.kind == TokenKind::Identifier || t.kind == TokenKind::Keyword => i += 1,
                _ => return false,
            }
        }
        false
    }

    // ------------------------------------------------------------------
    // recovery
    // ------------------------------------------------------------------

    fn is_statement_keyword(text: &str) -> bool {
        matches!(
            text,
            "if" | "for"
                | "while"
                | "do"
                | "switch"
                | "return"
                | "break"
                | "continue"
                | "goto"
                | "try"
                | "struct"
                | "class"
                | "enum"
                | "union"
                | "namespace"
                | "using"
                | "typedef"
                | "template"
        )
    }

    /// Panic-mode recovery: consume at least one token, then keep going
    /// until a plausible construct boundary.
    fn error_region_min_one(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children);
        loop {
            if self.at_end() {
                break;
            }
            let text = self.text(0);
            if text == ";" {
                self.bump_into(&mut children);
                break;
            }
            if text == "}" {
                break;
            }
            if text == "{" {
                self.consume_balanced_braces(&mut children);
                break;
            }
            if self.kind(0) == Some(TokenKind::Preprocessor) {
                break;
            }
            if Self::is_statement_keyword(text) {
                break;
            }
            let scan = self.scan_decl();
            if scan.names + usize::from(scan.saw_type) >= 2 {
                match self.toks.get(scan.stop).map(|t| t.text.as_str()) {
                    Some("(" | "=" | ";" | ",") => break,
                    _ => {}
                }
            }
            self.bump_into(&mut children);
        }
        self.make(NodeType::ErrorRegion, children)
    }

    fn consume_balanced_braces(&mut self, children: &mut Vec<AstNode>) {
        let mut depth = 0usize;
        while !self.at_end() {
            let text = self.text(0);
            if text == "{" {
                depth += 1;
            } else if text == "}" {
                depth -= 1;
                self.bump_into(children);
                if depth == 0 {
                    return;
                }
                continue;
            }
            self.bump_into(children);
        }
    }

    /// Consume raw leaves until one of `stops` (left unconsumed) or EOF;
    /// nested parens/braces/brackets are skipped whole.
    fn leaves_until(&mut self, children: &mut Vec<AstNode>, stops: &[&str]) {
        while !self.at_end() {
            let text = self.text(0);
            if stops.contains(&text) {
                return;
            }
            match text {
                "(" => self.consume_balanced(children, "(", ")"),
                "[" => self.consume_balanced(children, "[", "]"),
                "{" => self.consume_balanced_braces(children),
                _ => self.bump_into(children),
            }
        }
    }

    fn consume_balanced(&mut self, children: &mut Vec<AstNode>, open: &str, close: &str) {
        let mut depth = 0usize;
        while !self.at_end() {
            let text = self.text(0);
            if text == open {
                depth += 1;
            } else if text == close {
                depth -= 1;
                self.bump_into(children);
                if depth == 0 {
                    return;
                }
                continue;
            } else if text == "}" && open != "{" {
                // do not run past an enclosing block
                return;
            }
            self.bump_into(children);
        }
    }

    // ------------------------------------------------------------------
    // items
    // ------------------------------------------------------------------

    fn parse_item(&mut self) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        if self.kind(0) == Some(TokenKind::Preprocessor) {
            let mut children = Vec::new();
            self.bump_into(&mut children);
            return self.make(NodeType::PreprocDirective, children);
        }
        match self.text(0) {
            "template" => return self.parse_template(),
            "namespace" => return self.parse_namespace(),
            "using" => return self.parse_simple_through_semi(NodeType::UsingDecl),
            "typedef" => return self.parse_simple_through_semi(NodeType::TypedefDecl),
            "struct" | "class" | "enum" | "union" if self.looks_like_type_def() => {
                return self.parse_record_def()
            }
            "extern" if self.kind(1) == Some(TokenKind::Str) => {
                return self.parse_linkage_block();
            }
            ";" => {
                // stray empty declaration
                let mut children = Vec::new();
                self.bump_into(&mut children);
                return self.make(NodeType::DeclStmt, children);
            }
            _ => {}
        }
        self.parse_statement()
    }

    /// `struct X {...}` or `struct X : base {...}` introduces a definition;
    /// `struct X v;` is an elaborated type in a variable declaration.
    fn looks_like_type_def(&self) -> bool {
        let mut i = self.pos + 1;
        let limit = i + 32;
        while let Some(t) = self.toks.get(i) {
            if i > limit {
                return false;
            }
            match t.text.as_str() {
                "{" => return true,
                ";" => return true, // forward declaration
                ":" => return true, // base clause
                "::" => i += 1,
                "<" => match self.skip_template_args(i) {
                    Some(n) => i = n,
                    None => return false,
                },
                _ if t.kind == TokenKind::Identifier || t.kind == TokenKind::Keyword => i += 1,
                _ => return false,
            }
        }
        false
    }

    fn parse_template(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // template
        if self.at("<") {
            let mut depth = 0i32;
            while !self.at_end() {
                let text = self.text(0);
                if text == "<" {
                    depth += 1;
                } else if text == ">" {
                    depth -= 1;
                    self.bump_into(&mut children);
                    if depth == 0 {
                        break;
                    }
                    continue;
                } else if text == ">>" {
                    depth -= 2;
                    self.bump_into(&mut children);
                    if depth <= 0 {
                        break;
                    }
                    continue;
                } else if text == "{" || text == ";" {
                    break;
                }
                self.bump_into(&mut children);
            }
        }
        if !self.at_end() {
            self.depth += 1;
            let inner = self.parse_item();
            self.depth -= 1;
            children.push(inner);
        }
        self.make(NodeType::TemplateDecl, children)
    }

    fn parse_namespace(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // namespace
        while !self.at_end() && !self.at("{") && !self.at(";") {
            let k = self.kind(0);
            if k == Some(TokenKind::Identifier) || self.at("::") {
                self.bump_into(&mut children);
            } else {
                break;
            }
        }
        if self.at(";") {
            self.bump_into(&mut children);
            return self.make(NodeType::NamespaceDef, children);
        }
        if self.at("{") {
            self.bump_into(&mut children);
            while !self.at_end() && !self.at("}") {
                let before = self.pos;
                self.depth += 1;
                let item = self.parse_item();
                self.depth -= 1;
                children.push(item);
                if self.pos == before {
                    children.push(self.error_region_min_one());
                }
            }
            if self.at("}") {
                self.bump_into(&mut children);
            }
        }
        self.make(NodeType::NamespaceDef, children)
    }

    /// `extern "C" { ... }` or `extern "C" declaration` — modelled as a
    /// scope wrapper.
    fn parse_linkage_block(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // extern
        self.bump_into(&mut children); // "C"
        if self.at("{") {
            self.bump_into(&mut children);
            while !self.at_end() && !self.at("}") {
                let before = self.pos;
                self.depth += 1;
                let item = self.parse_item();
                self.depth -= 1;
                children.push(item);
                if self.pos == before {
                    children.push(self.error_region_min_one());
                }
            }
            if self.at("}") {
                self.bump_into(&mut children);
            }
        } else if !self.at_end() {
            self.depth += 1;
            let item = self.parse_item();
            self.depth -= 1;
            children.push(item);
        }
        self.make(NodeType::NamespaceDef, children)
    }

    fn parse_simple_through_semi(&mut self, ty: NodeType) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children);
        self.leaves_until(&mut children, &[";", "}"]);
        if self.at(";") {
            self.bump_into(&mut children);
        }
        self.make(ty, children)
    }

    fn parse_record_def(&mut self) -> AstNode {
        let ty = match self.text(0) {
            "struct" => NodeType::StructDef,
            "class" => NodeType::ClassDef,
            "enum" => NodeType::EnumDef,
            _ => NodeType::UnionDef,
        };
        let mut children = Vec::new();
        self.bump_into(&mut children); // keyword
        self.leaves_until(&mut children, &["{", ";", "}"]);
        if self.at(";") {
            self.bump_into(&mut children);
            return self.make(ty, children);
        }
        if self.at("{") {
            self.bump_into(&mut children);
            while !self.at_end() && !self.at("}") {
                let before = self.pos;
                self.depth += 1;
                let member = self.parse_member();
                self.depth -= 1;
                children.push(member);
                if self.pos == before {
                    children.push(self.error_region_min_one());
                }
            }
            if self.at("}") {
                self.bump_into(&mut children);
            }
            // trailing declarator list: `} x, *y;`
            self.leaves_until(&mut children, &[";", "}", "{"]);
            if self.at(";") {
                self.bump_into(&mut children);
            }
        }
        self.make(ty, children)
    }

    fn parse_member(&mut self) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        if self.kind(0) == Some(TokenKind::Preprocessor) {
            let mut children = Vec::new();
            self.bump_into(&mut children);
            return self.make(NodeType::PreprocDirective, children);
        }
        match self.text(0) {
            "public" | "private" | "protected" if self.text(1) == ":" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                self.bump_into(&mut children);
                return self.make(NodeType::AccessSpec, children);
            }
            "template" => return self.parse_template(),
            "using" => return self.parse_simple_through_semi(NodeType::UsingDecl),
            "typedef" => return self.parse_simple_through_semi(NodeType::TypedefDecl),
            "struct" | "class" | "enum" | "union" if self.looks_like_type_def() => {
                return self.parse_record_def()
            }
            "~" if self.kind(1) == Some(TokenKind::Identifier) && self.text(2) == "(" => {
                return self.parse_function_like(2, NodeType::MemberDecl);
            }
            ";" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                return self.make(NodeType::MemberDecl, children);
            }
            _ => {}
        }
        let scan = self.scan_decl();
        let stop_text = self.toks.get(scan.stop).map(|t| t.text.as_str());
        if stop_text == Some("(") && scan.names >= 1 {
            // method, constructor, or operator
            return self.parse_function_like(scan.stop - self.pos, NodeType::MemberDecl);
        }
        if matches!(stop_text, Some("=" | ";" | "," | "[" | "{" | ":"))
            && (scan.names >= 2 || scan.saw_type)
            && scan.names >= 1
        {
            return self.parse_var_declaration(scan, NodeType::MemberDecl);
        }
        // fallback: shallow member (enumerators and anything else)
        let mut children = Vec::new();
        self.leaves_until(&mut children, &[";", "}"]);
        if self.at(";") {
            self.bump_into(&mut children);
        }
        if children.is_empty() {
            return self.error_region_min_one();
        }
        self.make(NodeType::MemberDecl, children)
    }

    // ------------------------------------------------------------------
    // statements
    // ------------------------------------------------------------------

    fn parse_statement(&mut self) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        if self.kind(0) == Some(TokenKind::Preprocessor) {
            let mut children = Vec::new();
            self.bump_into(&mut children);
            return self.make(NodeType::PreprocDirective, children);
        }
        match self.text(0) {
            "{" => return self.parse_compound(),
            "if" => return self.parse_if(),
            "for" => return self.parse_for(),
            "while" => return self.parse_while(),
            "do" => return self.parse_do(),
            "switch" => return self.parse_switch(),
            "return" => return self.parse_return(),
            "break" | "continue" => {
                let ty = if self.at("break") {
                    NodeType::BreakStmt
                } else {
                    NodeType::ContinueStmt
                };
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if self.at(";") {
                    self.bump_into(&mut children);
                }
                return self.make(ty, children);
            }
            "goto" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if self.kind(0) == Some(TokenKind::Identifier) {
                    self.bump_into(&mut children);
                }
                if self.at(";") {
                    self.bump_into(&mut children);
                }
                return self.make(NodeType::GotoStmt, children);
            }
            "try" => return self.parse_try(),
            "template" => return self.parse_template(),
            "namespace" => return self.parse_namespace(),
            "using" => return self.parse_simple_through_semi(NodeType::UsingDecl),
            "typedef" => return self.parse_simple_through_semi(NodeType::TypedefDecl),
            "struct" | "class" | "enum" | "union" if self.looks_like_type_def() => {
                return self.parse_record_def()
            }
            ";" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                return self.make(NodeType::ExprStmt, children);
            }
            _ => {}
        }
        // label: `name:` not followed by `::`
        if self.kind(0) == Some(TokenKind::Identifier) && self.text(1) == ":" {
            let mut children = Vec::new();
            self.bump_into(&mut children);
            self.bump_into(&mut children);
            return self.make(NodeType::LabelStmt, children);
        }
        let scan = self.scan_decl();
        let stop_text = self.toks.get(scan.stop).map(|t| t.text.as_str());
        match stop_text {
            Some("(") => {
                let declish = scan.names >= 2 || (scan.saw_type && scan.names >= 1);
                if declish || (scan.names >= 1 && {
                    let after = self.skip_parens(scan.stop);
                    after.is_some_and(|a| self.body_follows_params(a))
                }) {
                    return self.parse_function_like(scan.stop - self.pos, NodeType::DeclStmt);
                }
            }
            Some("=" | ";" | "," | "[" | "{") => {
                if (scan.names >= 2 || scan.saw_type) && scan.names >= 1 {
                    return self.parse_var_declaration(scan, NodeType::DeclStmt);
                }
                if scan.saw_type && scan.names == 0 && stop_text == Some(";") {
                    // e.g. `int;` — degenerate but declaration-shaped
                    let mut children = Vec::new();
                    self.leaves_until(&mut children, &[";", "}"]);
                    if self.at(";") {
                        self.bump_into(&mut children);
                    }
                    return self.make(NodeType::DeclStmt, children);
                }
            }
            _ => {}
        }
        if self.can_start_expression() {
            return self.parse_expr_statement();
        }
        self.error_region_min_one()
    }

    fn can_start_expression(&self) -> bool {
        match self.kind(0) {
            Some(
                TokenKind::Identifier
                | TokenKind::Number
                | TokenKind::Str
                | TokenKind::CharLit,
            ) => true,
            Some(TokenKind::Keyword) => matches!(
                self.text(0),
                "this" | "true" | "false" | "nullptr" | "new" | "delete" | "throw" | "sizeof"
                    | "operator" | "not" | "compl"
            ) || CAST_KEYWORDS.contains(&self.text(0))
                || is_type_keyword(self.text(0)),
            Some(TokenKind::Operator | TokenKind::Punct) => matches!(
                self.text(0),
                "(" | "[" | "{" | "!" | "~" | "+" | "-" | "*" | "&" | "++" | "--" | "::"
            ),
            _ => false,
        }
    }

    fn parse_compound(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // {
        while !self.at_end() && !self.at("}") {
            let before = self.pos;
            self.depth += 1;
            let stmt = self.parse_statement();
            self.depth -= 1;
            children.push(stmt);
            if self.pos == before {
                children.push(self.error_region_min_one());
            }
        }
        if self.at("}") {
            self.bump_into(&mut children);
        }
        self.make(NodeType::CompoundStmt, children)
    }

    fn parse_paren_condition(&mut self, children: &mut Vec<AstNode>) {
        if self.at("(") {
            self.bump_into(children);
            if !self.at(")") && !self.at_end() {
                self.depth += 1;
                let cond = self.parse_expr();
                self.depth -= 1;
                children.push(cond);
            }
            // tolerate junk between the condition and `)`
            self.leaves_until(children, &[")", "{", ";", "}"]);
            if self.at(")") {
                self.bump_into(children);
            }
        }
    }

    fn parse_if(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // if
        self.parse_paren_condition(&mut children);
        if !self.at_end() && !self.at("}") {
            self.depth += 1;
            let then = self.parse_statement();
            self.depth -= 1;
            children.push(then);
        }
        if self.at("else") {
            let mut ec = Vec::new();
            self.bump_into(&mut ec);
            if !self.at_end() && !self.at("}") {
                self.depth += 1;
                let alt = self.parse_statement();
                self.depth -= 1;
                ec.push(alt);
            }
            children.push(self.make(NodeType::ElseClause, ec));
        }
        self.make(NodeType::IfStmt, children)
    }

    /// Detect `for (decl : range)` by looking for a top-level `:` before any
    /// `;` inside the header.
    fn is_range_for(&self) -> bool {
        let mut i = self.pos + 1; // at `(`
        if self.toks.get(i).map(|t| t.text.as_str()) != Some("(") {
            return false;
        }
        let mut depth = 0usize;
        while let Some(t) = self.toks.get(i) {
            match t.text.as_str() {
                "(" | "[" | "{" => depth += 1,
                ")" | "]" | "}" => {
                    if depth == 1 && t.text == ")" {
                        return false;
                    }
                    depth = depth.saturating_sub(1);
                }
                ";" if depth == 1 => return false,
                ":" if depth == 1 => return true,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn parse_for(&mut self) -> AstNode {
        if self.is_range_for() {
            return self.parse_range_for();
        }
        let mut children = Vec::new();
        self.bump_into(&mut children); // for
        if self.at("(") {
            self.bump_into(&mut children);
            // init
            if self.at(";") {
                self.bump_into(&mut children);
            } else if !self.at_end() && !self.at(")") {
                let scan = self.scan_decl();
                let stop_text = self.toks.get(scan.stop).map(|t| t.text.as_str());
                self.depth += 1;
                if matches!(stop_text, Some("=" | ";" | "," | "["))
                    && (scan.names >= 2 || scan.saw_type)
                    && scan.names >= 1
                {
                    let d = self.parse_var_declaration(scan, NodeType::DeclStmt);
                    children.push(d);
                } else {
                    let e = self.parse_expr_statement();
                    children.push(e);
                }
                self.depth -= 1;
            }
            // condition
            if !self.at(";") && !self.at(")") && !self.at_end() {
                self.depth += 1;
                let cond = self.parse_expr();
                self.depth -= 1;
                children.push(cond);
            }
            if self.at(";") {
                self.bump_into(&mut children);
            }
            // increment
            if !self.at(")") && !self.at_end() {
                self.depth += 1;
                let inc = self.parse_expr();
                self.depth -= 1;
                children.push(inc);
            }
            self.leaves_until(&mut children, &[")", "{", ";", "}"]);
            if self.at(")") {
                self.bump_into(&mut children);
            }
        }
        if !self.at_end() && !self.at("}") {
            self.depth += 1;
            let body = self.parse_statement();
            self.depth -= 1;
            children.push(body);
        }
        self.make(NodeType::ForStmt, children)
    }

    fn parse_range_for(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // for
        self.bump_into(&mut children); // (
        self.leaves_until(&mut children, &[":", ")", ";", "}"]);
        if self.at(":") {
            self.bump_into(&mut children);
            if !self.at(")") && !self.at_end() {
                self.depth += 1;
                let range = self.parse_expr();
                self.depth -= 1;
                children.push(range);
            }
        }
        self.leaves_until(&mut children, &[")", "{", ";", "}"]);
        if self.at(")") {
            self.bump_into(&mut children);
        }
        if !self.at_end() && !self.at("}") {
            self.depth += 1;
            let body = self.parse_statement();
            self.depth -= 1;
            children.push(body);
        }
        self.make(NodeType::RangeForStmt, children)
    }

    fn parse_while(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // while
        self.parse_paren_condition(&mut children);
        if !self.at_end() && !self.at("}") {
            self.depth += 1;
            let body = self.parse_statement();
            self.depth -= 1;
            children.push(body);
        }
        self.make(NodeType::WhileStmt, children)
    }

    fn parse_do(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // do
        if !self.at_end() && !self.at("}") {
            self.depth += 1;
            let body = self.parse_statement();
            self.depth -= 1;
            children.push(body);
        }
        if self.at("while") {
            self.bump_into(&mut children);
            self.parse_paren_condition(&mut children);
        }
        if self.at(";") {
            self.bump_into(&mut children);
        }
        self.make(NodeType::DoStmt, children)
    }

    fn parse_switch(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // switch
        self.parse_paren_condition(&mut children);
        if self.at("{") {
            let mut body = Vec::new();
            self.bump_into(&mut body); // {
            while !self.at_end() && !self.at("}") {
                let before = self.pos;
                if self.at("case") || self.at("default") {
                    body.push(self.parse_case_clause());
                } else {
                    self.depth += 1;
                    let stmt = self.parse_statement();
                    self.depth -= 1;
                    body.push(stmt);
                }
                if self.pos == before {
                    body.push(self.error_region_min_one());
                }
            }
            if self.at("}") {
                self.bump_into(&mut body);
            }
            children.push(self.make(NodeType::CompoundStmt, body));
        } else if !self.at_end() && !self.at("}") {
            self.depth += 1;
            let body = self.parse_statement();
            self.depth -= 1;
            children.push(body);
        }
        self.make(NodeType::SwitchStmt, children)
    }

    fn parse_case_clause(&mut self) -> AstNode {
        let mut children = Vec::new();
        let is_case = self.at("case");
        self.bump_into(&mut children); // case | default
        if is_case && !self.at(":") && !self.at_end() {
            self.depth += 1;
            let value = self.parse_conditional();
            self.depth -= 1;
            children.push(value);
        }
        if self.at(":") {
            self.bump_into(&mut children);
        }
        while !self.at_end() && !self.at("}") && !self.at("case") && !self.at("default") {
            let before = self.pos;
            self.depth += 1;
            let stmt = self.parse_statement();
            self.depth -= 1;
            children.push(stmt);
            if self.pos == before {
                children.push(self.error_region_min_one());
            }
        }
        self.make(NodeType::CaseClause, children)
    }

    fn parse_return(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // return
        if !self.at(";") && !self.at("}") && !self.at_end() {
            self.depth += 1;
            let value = self.parse_expr();
            self.depth -= 1;
            children.push(value);
        }
        if self.at(";") {
            self.bump_into(&mut children);
        }
        self.make(NodeType::ReturnStmt, children)
    }

    fn parse_try(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // try
        if self.at("{") {
            self.depth += 1;
            let block = self.parse_compound();
            self.depth -= 1;
            children.push(block);
        }
        while self.at("catch") {
            let mut cc = Vec::new();
            self.bump_into(&mut cc);
            if self.at("(") {
                self.consume_balanced(&mut cc, "(", ")");
            }
            if self.at("{") {
                self.depth += 1;
                let block = self.parse_compound();
                self.depth -= 1;
                cc.push(block);
            }
            children.push(self.make(NodeType::CatchClause, cc));
        }
        self.make(NodeType::TryBlock, children)
    }

    fn parse_expr_statement(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.depth += 1;
        let expr = self.parse_expr();
        self.depth -= 1;
        children.push(expr);
        if self.at(";") {
            self.bump_into(&mut children);
        }
        self.make(NodeType::ExprStmt, children)
    }

    // ------------------------------------------------------------------
    // declarations
    // ------------------------------------------------------------------

    /// Parse `type declarator (= init | {init} )? (, declarator ...)* ;`
    /// using scan info to find where the type ends.
    fn parse_var_declaration(&mut self, scan: DeclScan, ty: NodeType) -> AstNode {
        let mut children = Vec::new();
        let mut ts = Vec::new();
        while self.pos < scan.decl_start && !self.at_end() {
            self.bump_into(&mut ts);
        }
        children.push(self.make(NodeType::TypeSpecifier, ts));
        loop {
            if self.at_end() || self.at(";") || self.at("}") {
                break;
            }
            let d = self.parse_declarator();
            children.push(d);
            if self.at("=") {
                let mut ic = Vec::new();
                self.bump_into(&mut ic);
                if !self.at_end() && !self.at(";") {
                    self.depth += 1;
                    let init = self.parse_assign();
                    self.depth -= 1;
                    ic.push(init);
                }
                children.push(self.make(NodeType::InitClause, ic));
            } else if self.at("{") {
                let mut ic = Vec::new();
                self.depth += 1;
                let il = self.parse_initializer_list();
                self.depth -= 1;
                ic.push(il);
                children.push(self.make(NodeType::InitClause, ic));
            } else if self.at("(") {
                // constructor-style initializer
                let mut ic = Vec::new();
                self.consume_balanced(&mut ic, "(", ")");
                children.push(self.make(NodeType::InitClause, ic));
            }
            if self.at(",") {
                self.bump_into(&mut children);
                continue;
            }
            break;
        }
        // tolerate junk before the terminator
        self.leaves_until(&mut children, &[";", "}"]);
        if self.at(";") {
            self.bump_into(&mut children);
        }
        self.make(ty, children)
    }

    fn parse_declarator(&mut self) -> AstNode {
        match self.text(0) {
            "*" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                self.depth += 1;
                let inner = self.parse_declarator();
                self.depth -= 1;
                children.push(inner);
                return self.make(NodeType::PointerDeclarator, children);
            }
            "&" | "&&" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                self.depth += 1;
                let inner = self.parse_declarator();
                self.depth -= 1;
                children.push(inner);
                return self.make(NodeType::ReferenceDeclarator, children);
            }
            _ => {}
        }
        let mut core = Vec::new();
        if self.kind(0) == Some(TokenKind::Identifier) {
            self.bump_into(&mut core);
            while self.at("::") && self.kind(1) == Some(TokenKind::Identifier) {
                self.bump_into(&mut core);
                self.bump_into(&mut core);
            }
        }
        let mut node = self.make(NodeType::VarDeclarator, core);
        while self.at("[") {
            let mut ac = vec![node];
            self.consume_balanced(&mut ac, "[", "]");
            node = self.make(NodeType::ArrayDeclarator, ac);
        }
        node
    }

    /// Function definition or prototype. `name_offset` is the distance from
    /// the cursor to where the declarator name chain starts; everything
    /// before it is the return type. Prototypes become `proto_ty` nodes
    /// (decl-stmt or member-decl); bodies make a function-def.
    fn parse_function_like(&mut self, name_offset: usize, proto_ty: NodeType) -> AstNode {
        let mut children = Vec::new();
        let mut ts = Vec::new();
        for _ in 0..name_offset {
            if self.at_end() {
                break;
            }
            self.bump_into(&mut ts);
        }
        if !ts.is_empty() {
            children.push(self.make(NodeType::TypeSpecifier, ts));
        }
        // name chain: identifiers, ~, ::, template args, operator tokens
        while !self.at_end() && !self.at("(") {
            self.bump_into(&mut children);
        }
        let mut params = Vec::new();
        if self.at("(") {
            self.consume_balanced(&mut params, "(", ")");
        }
        children.push(self.make(NodeType::ParameterList, params));
        // trailing qualifiers / trailing return / ctor initializers
        while !self.at_end() {
            match self.text(0) {
                "{" | ";" | "}" => break,
                "const" | "noexcept" | "override" | "final" | "&" | "&&" | "->" | "::" | ","
                | ":" | "=" | "0" | "default" | "delete" => {
                    self.bump_into(&mut children);
                }
                "(" => self.consume_balanced(&mut children, "(", ")"),
                "<" => {
                    // rare: template args in a qualified trailing type
                    self.bump_into(&mut children);
                }
                _ => {
                    if matches!(
                        self.kind(0),
                        Some(TokenKind::Identifier | TokenKind::Keyword | TokenKind::Number)
                    ) {
                        self.bump_into(&mut children);
                    } else {
                        break;
                    }
                }
            }
        }
        if self.at("{") {
            self.depth += 1;
            let body = self.parse_compound();
            self.depth -= 1;
            children.push(body);
            return self.make(NodeType::FunctionDef, children);
        }
        if self.at(";") {
            self.bump_into(&mut children);
        }
        self.make(proto_ty, children)
    }

    // ------------------------------------------------------------------
    // expressions
    // ------------------------------------------------------------------

    fn parse_expr(&mut self) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        let first = self.parse_assign();
        if !self.at(",") {
            return first;
        }
        let mut children = vec![first];
        while self.at(",") {
            self.bump_into(&mut children);
            if self.at_end() || self.at(")") || self.at(";") || self.at("}") {
                break;
            }
            self.depth += 1;
            let next = self.parse_assign();
            self.depth -= 1;
            children.push(next);
        }
        self.make(NodeType::CommaExpr, children)
    }

    fn parse_assign(&mut self) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        self.depth += 1;
        let lhs = self.parse_conditional();
        let node = if matches!(
            self.text(0),
            "=" | "+=" | "-=" | "*=" | "/=" | "%=" | "<<=" | ">>=" | "&=" | "|=" | "^="
        ) {
            let mut children = vec![lhs];
            self.bump_into(&mut children);
            let rhs = self.parse_assign();
            children.push(rhs);
            self.make(NodeType::AssignmentExpr, children)
        } else {
            lhs
        };
        self.depth -= 1;
        node
    }

    fn parse_conditional(&mut self) -> AstNode {
        let cond = self.parse_binary(1);
        if !self.at("?") {
            return cond;
        }
        let mut children = vec![cond];
        self.bump_into(&mut children);
        self.depth += 1;
        let then = self.parse_expr_no_comma_guard();
        children.push(then);
        if self.at(":") {
            self.bump_into(&mut children);
            let alt = self.parse_assign();
            children.push(alt);
        }
        self.depth -= 1;
        self.make(NodeType::ConditionalExpr, children)
    }

    /// Middle of `?:` allows a full expression but must stop at `:`.
    fn parse_expr_no_comma_guard(&mut self) -> AstNode {
        self.parse_assign()
    }

    fn binary_precedence(text: &str) -> Option<u8> {
        Some(match text {
            "||" | "or" => 1,
            "&&" | "and" => 2,
            "|" | "bitor" => 3,
            "^" | "xor" => 4,
            "&" | "bitand" => 5,
            "==" | "!=" | "not_eq" => 6,
            "<" | ">" | "<=" | ">=" => 7,
            "<<" | ">>" => 8,
            "+" | "-" => 9,
            "*" | "/" | "%" => 10,
            ".*" | "->*" => 11,
            _ => return None,
        })
    }

    fn contains_stream_head(node: &AstNode) -> bool {
        if node.node_type() == Some(NodeType::StreamExpr) {
            return true;
        }
        let mut found = false;
        node.walk(&mut |n| {
            if let Some(text) = n.leaf_text() {
                if STREAM_HEADS.contains(&text) {
                    found = true;
                }
            }
        });
        found
    }

    fn parse_binary(&mut self, min_prec: u8) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        self.depth += 1;
        let mut left = self.parse_unary();
        while let Some(prec) = Self::binary_precedence(self.text(0)) {
            if prec < min_prec {
                break;
            }
            let op_text = self.text(0).to_string();
            let op = self.bump();
            if self.at_end() || self.at(")") || self.at(";") || self.at("}") || self.at(",") {
                // trailing operator with no right operand: keep the leaf
                left = self.make(NodeType::BinaryExpr, vec![left, op]);
                break;
            }
            let right = self.parse_binary(prec + 1);
            let ty = if (op_text == "<<" || op_text == ">>") && Self::contains_stream_head(&left) {
                NodeType::StreamExpr
            } else {
                NodeType::BinaryExpr
            };
            left = self.make(ty, vec![left, op, right]);
        }
        self.depth -= 1;
        left
    }

    fn parse_unary(&mut self) -> AstNode {
        if self.over_depth() {
            return self.error_region_min_one();
        }
        match self.text(0) {
            "!" | "~" | "+" | "-" | "*" | "&" | "++" | "--" | "not" | "compl" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                self.depth += 1;
                let operand = self.parse_unary();
                self.depth -= 1;
                children.push(operand);
                return self.make(NodeType::UnaryExpr, children);
            }
            "new" => return self.parse_new(),
            "delete" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if self.at("[") {
                    self.consume_balanced(&mut children, "[", "]");
                }
                if !self.at_end() && !self.at(";") && !self.at(")") && !self.at("}") {
                    self.depth += 1;
                    let operand = self.parse_unary();
                    self.depth -= 1;
                    children.push(operand);
                }
                return self.make(NodeType::DeleteExpr, children);
            }
            "throw" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if !self.at(";") && !self.at(")") && !self.at("}") && !self.at_end() {
                    self.depth += 1;
                    let value = self.parse_assign();
                    self.depth -= 1;
                    children.push(value);
                }
                return self.make(NodeType::ThrowExpr, children);
            }
            "sizeof" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if self.at("...") {
                    self.bump_into(&mut children);
                }
                if self.at("(") {
                    self.consume_balanced(&mut children, "(", ")");
                } else if !self.at_end() && !self.at(";") && !self.at(")") {
                    self.depth += 1;
                    let operand = self.parse_unary();
                    self.depth -= 1;
                    children.push(operand);
                }
                return self.make(NodeType::SizeofExpr, children);
            }
            t if CAST_KEYWORDS.contains(&t) => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if self.at("<") {
                    let mut depth = 0i32;
                    while !self.at_end() {
                        match self.text(0) {
                            "<" => depth += 1,
                            ">" => {
                                depth -= 1;
                                self.bump_into(&mut children);
                                if depth == 0 {
                                    break;
                                }
                                continue;
                            }
                            ">>" => {
                                depth -= 2;
                                self.bump_into(&mut children);
                                if depth <= 0 {
                                    break;
                                }
                                continue;
                            }
                            "(" | ";" | "{" => break,
                            _ => {}
                        }
                        self.bump_into(&mut children);
                    }
                }
                if self.at("(") {
                    self.bump_into(&mut children);
                    if !self.at(")") && !self.at_end() {
                        self.depth += 1;
                        let inner = self.parse_expr();
                        self.depth -= 1;
                        children.push(inner);
                    }
                    if self.at(")") {
                        self.bump_into(&mut children);
                    }
                }
                let node = self.make(NodeType::CastExpr, children);
                return self.parse_postfix_tail(node);
            }
            "(" if self.c_style_cast_ahead() => {
                let mut children = Vec::new();
                self.bump_into(&mut children); // (
                while !self.at_end() && !self.at(")") {
                    self.bump_into(&mut children);
                }
                if self.at(")") {
                    self.bump_into(&mut children);
                }
                self.depth += 1;
                let operand = self.parse_unary();
                self.depth -= 1;
                children.push(operand);
                return self.make(NodeType::CastExpr, children);
            }
            _ => {}
        }
        self.parse_postfix()
    }

    /// `(` TYPE-KEYWORD ... `)` followed by something that can start an
    /// operand. Only keyword-led casts qualify; `(expr)` stays a paren.
    fn c_style_cast_ahead(&self) -> bool {
        if !self.at("(") {
            return false;
        }
        let Some(first) = self.tok(1) else {
            return false;
        };
        if !(is_type_keyword(&first.text) || is_decl_specifier(&first.text)) {
            return false;
        }
        let Some(after) = self.skip_parens(self.pos) else {
            return false;
        };
        // everything inside must be type-ish
        for t in &self.toks[self.pos + 1..after - 1] {
            match t.text.as_str() {
                "*" | "&" | "::" | "<" | ">" | ">>" | "," | "[" | "]" => continue,
                _ => match t.kind {
                    TokenKind::Identifier | TokenKind::Keyword => continue,
                    _ => return false,
                },
            }
        }
        match self.toks.get(after) {
            Some(t) => matches!(
                t.kind,
                TokenKind::Identifier | TokenKind::Number | TokenKind::Str | TokenKind::CharLit
            ) || matches!(t.text.as_str(), "(" | "!" | "~" | "-" | "+" | "*" | "&" | "++" | "--"),
            None => false,
        }
    }

    fn parse_new(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // new
        while !self.at_end() {
            match self.kind(0) {
                Some(TokenKind::Identifier | TokenKind::Keyword) => {
                    self.bump_into(&mut children);
                }
                _ => match self.text(0) {
                    "::" | "*" => self.bump_into(&mut children),
                    "<" => {
                        if let Some(after) = self.skip_template_args(self.pos) {
                            while self.pos < after {
                                self.bump_into(&mut children);
                            }
                        } else {
                            break;
                        }
                    }
                    _ => break,
                },
            }
        }
        match self.text(0) {
            "(" => {
                let mut args = Vec::new();
                self.parse_argument_list_into(&mut args);
                children.push(self.make(NodeType::ArgumentList, args));
            }
            "[" => {
                self.consume_balanced(&mut children, "[", "]");
            }
            "{" => {
                self.depth += 1;
                let il = self.parse_initializer_list();
                self.depth -= 1;
                children.push(il);
            }
            _ => {}
        }
        self.make(NodeType::NewExpr, children)
    }

    fn parse_postfix(&mut self) -> AstNode {
        let primary = self.parse_primary();
        self.parse_postfix_tail(primary)
    }

    fn parse_postfix_tail(&mut self, mut node: AstNode) -> AstNode {
        loop {
            match self.text(0) {
                "(" => {
                    let mut args = Vec::new();
                    self.parse_argument_list_into(&mut args);
                    let arglist = self.make(NodeType::ArgumentList, args);
                    node = self.make(NodeType::CallExpr, vec![node, arglist]);
                }
                "[" => {
                    let mut children = vec![node];
                    self.bump_into(&mut children); // [
                    if !self.at("]") && !self.at_end() {
                        self.depth += 1;
                        let index = self.parse_expr();
                        self.depth -= 1;
                        children.push(index);
                    }
                    if self.at("]") {
                        self.bump_into(&mut children);
                    }
                    node = self.make(NodeType::SubscriptExpr, children);
                }
                "." | "->" | "::" => {
                    let mut children = vec![node];
                    self.bump_into(&mut children);
                    if matches!(
                        self.kind(0),
                        Some(TokenKind::Identifier | TokenKind::Keyword | TokenKind::Number)
                    ) || self.at("~")
                    {
                        if self.at("~") {
                            self.bump_into(&mut children);
                        }
                        if matches!(
                            self.kind(0),
                            Some(TokenKind::Identifier | TokenKind::Keyword | TokenKind::Number)
                        ) {
                            self.bump_into(&mut children);
                            // member template: `v.emplace<T>(...)`
                            if self.at("<") {
                                if let Some(after) = self.skip_template_args(self.pos) {
                                    if self.toks.get(after).is_some_and(|t| t.text == "(") {
                                        while self.pos < after {
                                            self.bump_into(&mut children);
                                        }
                                    }
                                }
                            }
                        }
                    }
                    node = self.make(NodeType::MemberExpr, children);
                }
                "++" | "--" => {
                    let mut children = vec![node];
                    self.bump_into(&mut children);
                    node = self.make(NodeType::UnaryExpr, children);
                }
                _ => break,
            }
        }
        node
    }

    fn parse_argument_list_into(&mut self, children: &mut Vec<AstNode>) {
        self.bump_into(children); // (
        while !self.at_end() && !self.at(")") {
            if self.at("}") {
                return; // unbalanced; bail without eating the block close
            }
            let before = self.pos;
            self.depth += 1;
            let arg = self.parse_assign();
            self.depth -= 1;
            children.push(arg);
            if self.at(",") {
                self.bump_into(children);
            }
            if self.pos == before {
                if self.at(")") || self.at_end() {
                    break;
                }
                self.bump_into(children); // guarantee progress on junk
            }
        }
        if self.at(")") {
            self.bump_into(children);
        }
    }

    fn parse_initializer_list(&mut self) -> AstNode {
        let mut children = Vec::new();
        self.bump_into(&mut children); // {
        while !self.at_end() && !self.at("}") {
            let before = self.pos;
            self.depth += 1;
            let item = self.parse_assign();
            self.depth -= 1;
            children.push(item);
            if self.at(",") {
                self.bump_into(&mut children);
            }
            if self.pos == before {
                if self.at("}") || self.at_end() {
                    break;
                }
                self.bump_into(&mut children);
            }
        }
        if self.at("}") {
            self.bump_into(&mut children);
        }
        self.make(NodeType::InitializerList, children)
    }

    fn parse_lambda(&mut self) -> AstNode {
        let mut children = Vec::new();
        let mut captures = Vec::new();
        self.consume_balanced(&mut captures, "[", "]");
        children.push(self.make(NodeType::CaptureList, captures));
        if self.at("(") {
            let mut params = Vec::new();
            self.consume_balanced(&mut params, "(", ")");
            children.push(self.make(NodeType::ParameterList, params));
        }
        while !self.at_end() {
            match self.text(0) {
                "mutable" | "noexcept" | "->" | "const" => self.bump_into(&mut children),
                "{" => break,
                _ => {
                    if matches!(self.kind(0), Some(TokenKind::Identifier | TokenKind::Keyword)) {
                        self.bump_into(&mut children);
                    } else {
                        break;
                    }
                }
            }
        }
        if self.at("{") {
            self.depth += 1;
            let body = self.parse_compound();
            self.depth -= 1;
            children.push(body);
        }
        self.make(NodeType::LambdaExpr, children)
    }

    fn parse_primary(&mut self) -> AstNode {
        if self.at_end() {
            return self.make(NodeType::ErrorRegion, Vec::new());
        }
        if self.over_depth() {
            return self.error_region_min_one();
        }
        if self.kind(0) == Some(TokenKind::Preprocessor) {
            let mut children = Vec::new();
            self.bump_into(&mut children);
            return self.make(NodeType::PreprocDirective, children);
        }
        match self.text(0) {
            "(" => {
                let mut children = Vec::new();
                self.bump_into(&mut children);
                if !self.at(")") && !self.at_end() {
                    self.depth += 1;
                    let inner = self.parse_expr();
                    self.depth -= 1;
                    children.push(inner);
                }
                // tolerate junk before the close
                self.leaves_until(&mut children, &[")", ";", "}"]);
                if self.at(")") {
                    self.bump_into(&mut children);
                }
                return self.make(NodeType::ParenExpr, children);
            }
            "[" => return self.parse_lambda(),
            "{" => return self.parse_initializer_list(),
            "::" => {
                // leading qualified name
                let leaf = self.bump();
                return self.parse_postfix_tail(leaf);
            }
            _ => {}
        }
        match self.kind(0) {
            Some(
                TokenKind::Identifier
                | TokenKind::Number
                | TokenKind::Str
                | TokenKind::CharLit,
            ) => {
                let is_ident = self.kind(0) == Some(TokenKind::Identifier);
                let leaf = self.bump();
                // template instantiation in expression position:
                // `name<args>(` or `name<args>{` or `name<args>::`
                if is_ident && self.at("<") {
                    if let Some(after) = self.skip_template_args(self.pos) {
                        if self
                            .toks
                            .get(after)
                            .is_some_and(|t| matches!(t.text.as_str(), "(" | "{" | "::"))
                        {
                            let mut children = vec![leaf];
                            while self.pos < after {
                                self.bump_into(&mut children);
                            }
                            // wrap as a member chain head; postfix continues
                            let node = self.make(NodeType::MemberExpr, children);
                            return node;
                        }
                    }
                }
                leaf
            }
            Some(TokenKind::Keyword) => match self.text(0) {
                "this" | "true" | "false" | "nullptr" => self.bump(),
                "operator" => {
                    // address of an operator function: rare, keep shallow
                    let mut children = Vec::new();
                    self.bump_into(&mut children);
                    if !self.at_end()
                        && matches!(self.kind(0), Some(TokenKind::Operator | TokenKind::Punct))
                    {
                        self.bump_into(&mut children);
                    }
                    self.make(NodeType::MemberExpr, children)
                }
                t if is_type_keyword(t) => {
                    // functional cast `int(x)` or a stray type keyword
                    let leaf = self.bump();
                    leaf
                }
                _ => self.error_region_min_one(),
            },
            _ => self.error_region_min_one(),
        }
    }
}
