//! Fuzzy C++ syntax tree.
//!
//! [`parse`] turns a token stream into a best-effort tree over a fixed
//! 58-type node catalogue. It is total: regions that do not parse become
//! `error-region` nodes holding the raw tokens, and every non-trivia token
//! ends up in exactly one leaf. The tree exists to support structural
//! statistics, not compilation; there is no name resolution or type
//! checking.

mod parser;

pub(crate) use parser::is_identifier_text;

use std::collections::BTreeMap;

use crate::lexer::TokenStream;

/// Non-leaf node catalogue. Exactly 58 entries; the set is part of the
/// external schema and changes only with a schema version bump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeType {
    TranslationUnit,
    FunctionDef,
    ParameterList,
    CompoundStmt,
    IfStmt,
    ElseClause,
    ForStmt,
    WhileStmt,
    DoStmt,
    SwitchStmt,
    CaseClause,
    ReturnStmt,
    BreakStmt,
    ContinueStmt,
    GotoStmt,
    LabelStmt,
    DeclStmt,
    VarDeclarator,
    InitClause,
    TypeSpecifier,
    StructDef,
    ClassDef,
    EnumDef,
    UnionDef,
    AccessSpec,
    MemberDecl,
    TemplateDecl,
    NamespaceDef,
    UsingDecl,
    TypedefDecl,
    ExprStmt,
    CallExpr,
    ArgumentList,
    BinaryExpr,
    UnaryExpr,
    AssignmentExpr,
    ConditionalExpr,
    SubscriptExpr,
    MemberExpr,
    CastExpr,
    ParenExpr,
    LambdaExpr,
    CaptureList,
    InitializerList,
    NewExpr,
    DeleteExpr,
    ThrowExpr,
    TryBlock,
    CatchClause,
    SizeofExpr,
    CommaExpr,
    RangeForStmt,
    StreamExpr,
    PreprocDirective,
    ArrayDeclarator,
    PointerDeclarator,
    ReferenceDeclarator,
    ErrorRegion,
}

impl NodeType {
    pub const COUNT: usize = 58;

    pub const ALL: [NodeType; NodeType::COUNT] = [
        NodeType::TranslationUnit,
        NodeType::FunctionDef,
        NodeType::ParameterList,
        NodeType::CompoundStmt,
        NodeType::IfStmt,
        NodeType::ElseClause,
        NodeType::ForStmt,
        NodeType::WhileStmt,
        NodeType::DoStmt,
        NodeType::SwitchStmt,
        NodeType::CaseClause,
        NodeType::ReturnStmt,
        NodeType::BreakStmt,
        NodeType::ContinueStmt,
        NodeType::GotoStmt,
        NodeType::LabelStmt,
        NodeType::DeclStmt,
        NodeType::VarDeclarator,
        NodeType::InitClause,
        NodeType::TypeSpecifier,
        NodeType::StructDef,
        NodeType::ClassDef,
        NodeType::EnumDef,
        NodeType::UnionDef,
        NodeType::AccessSpec,
        NodeType::MemberDecl,
        NodeType::TemplateDecl,
        NodeType::NamespaceDef,
        NodeType::UsingDecl,
        NodeType::TypedefDecl,
        NodeType::ExprStmt,
        NodeType::CallExpr,
        NodeType::ArgumentList,
        NodeType::BinaryExpr,
        NodeType::UnaryExpr,
        NodeType::AssignmentExpr,
        NodeType::ConditionalExpr,
        NodeType::SubscriptExpr,
        NodeType::MemberExpr,
        NodeType::CastExpr,
        NodeType::ParenExpr,
        NodeType::LambdaExpr,
        NodeType::CaptureList,
        NodeType::InitializerList,
        NodeType::NewExpr,
        NodeType::DeleteExpr,
        NodeType::ThrowExpr,
        NodeType::TryBlock,
        NodeType::CatchClause,
        NodeType::SizeofExpr,
        NodeType::CommaExpr,
        NodeType::RangeForStmt,
        NodeType::StreamExpr,
        NodeType::PreprocDirective,
        NodeType::ArrayDeclarator,
        NodeType::PointerDeclarator,
        NodeType::ReferenceDeclarator,
        NodeType::ErrorRegion,
    ];

    /// Stable kebab-case identifier used by the debug dump and schema docs.
    pub fn id(self) -> &'static str {
        match self {
            NodeType::TranslationUnit => "translation-unit",
            NodeType::FunctionDef => "function-def",
            NodeType::ParameterList => "parameter-list",
            NodeType::CompoundStmt => "compound-stmt",
            NodeType::IfStmt => "if-stmt",
            NodeType::ElseClause => "else-clause",
            NodeType::ForStmt => "for-stmt",
            NodeType::WhileStmt => "while-stmt",
            NodeType::DoStmt => "do-stmt",
            NodeType::SwitchStmt => "switch-stmt",
            NodeType::CaseClause => "case-clause",
            NodeType::ReturnStmt => "return-stmt",
            NodeType::BreakStmt => "break-stmt",
            NodeType::ContinueStmt => "continue-stmt",
            NodeType::GotoStmt => "goto-stmt",
            NodeType::LabelStmt => "label-stmt",
            NodeType::DeclStmt => "decl-stmt",
            NodeType::VarDeclarator => "var-declarator",
            NodeType::InitClause => "init-clause",
            NodeType::TypeSpecifier => "type-specifier",
            NodeType::StructDef => "struct-def",
            NodeType::ClassDef => "class-def",
            NodeType::EnumDef => "enum-def",
            NodeType::UnionDef => "union-def",
            NodeType::AccessSpec => "access-spec",
            NodeType::MemberDecl => "member-decl",
            NodeType::TemplateDecl => "template-decl",
            NodeType::NamespaceDef => "namespace-def",
            NodeType::UsingDecl => "using-decl",
            NodeType::TypedefDecl => "typedef-decl",
            NodeType::ExprStmt => "expr-stmt",
            NodeType::CallExpr => "call-expr",
            NodeType::ArgumentList => "argument-list",
            NodeType::BinaryExpr => "binary-expr",
            NodeType::UnaryExpr => "unary-expr",
            NodeType::AssignmentExpr => "assignment-expr",
            NodeType::ConditionalExpr => "conditional-expr",
            NodeType::SubscriptExpr => "subscript-expr",
            NodeType::MemberExpr => "member-expr",
            NodeType::CastExpr => "cast-expr",
            NodeType::ParenExpr => "paren-expr",
            NodeType::LambdaExpr => "lambda-expr",
            NodeType::CaptureList => "capture-list",
            NodeType::InitializerList => "initializer-list",
            NodeType::NewExpr => "new-expr",
            NodeType::DeleteExpr => "delete-expr",
            NodeType::ThrowExpr => "throw-expr",
            NodeType::TryBlock => "try-block",
            NodeType::CatchClause => "catch-clause",
            NodeType::SizeofExpr => "sizeof-expr",
            NodeType::CommaExpr => "comma-expr",
            NodeType::RangeForStmt => "range-for-stmt",
            NodeType::StreamExpr => "stream-expr",
            NodeType::PreprocDirective => "preproc-directive",
            NodeType::ArrayDeclarator => "array-declarator",
            NodeType::PointerDeclarator => "pointer-declarator",
            NodeType::ReferenceDeclarator => "reference-declarator",
            NodeType::ErrorRegion => "error-region",
        }
    }
}

/// One tree node. Leaves carry the exact source text of a non-trivia token;
/// inner nodes carry one of the 58 catalogue types.
#[derive(Debug, Clone, PartialEq)]
pub enum AstNode {
    Inner {
        ty: NodeType,
        children: Vec<AstNode>,
        line: u32,
        column: u32,
    },
    Leaf {
        text: String,
        line: u32,
        column: u32,
    },
}

impl AstNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self, AstNode::Leaf { .. })
    }

    pub fn node_type(&self) -> Option<NodeType> {
        match self {
            AstNode::Inner { ty, .. } => Some(*ty),
            AstNode::Leaf { .. } => None,
        }
    }

    pub fn children(&self) -> &[AstNode] {
        match self {
            AstNode::Inner { children, .. } => children,
            AstNode::Leaf { .. } => &[],
        }
    }

    pub fn leaf_text(&self) -> Option<&str> {
        match self {
            AstNode::Leaf { text, .. } => Some(text),
            AstNode::Inner { .. } => None,
        }
    }

    pub fn position(&self) -> (u32, u32) {
        match self {
            AstNode::Inner { line, column, .. } | AstNode::Leaf { line, column, .. } => {
                (*line, *column)
            }
        }
    }

    /// Depth-first pre-order visit.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a AstNode)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// All leaf texts beneath (and including) this node, in source order.
    pub fn leaf_texts(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if let AstNode::Leaf { text, .. } = n {
                out.push(text.as_str());
            }
        });
        out
    }
}

/// Parse result: a total tree plus the number of recovery regions.
#[derive(Debug, Clone)]
pub struct PseudoAst {
    pub root: AstNode,
    pub error_region_count: u64,
}

/// Parse a token stream. Total: never fails, for any input.
pub fn parse(ts: &TokenStream) -> PseudoAst {
    let root = parser::parse_translation_unit(ts);
    let mut error_region_count = 0;
    root.walk(&mut |n| {
        if n.node_type() == Some(NodeType::ErrorRegion) {
            error_region_count += 1;
        }
    });
    PseudoAst {
        root,
        error_region_count,
    }
}

/// Term frequency of non-leaf node types. Absent types are implicitly zero.
pub fn node_type_histogram(ast: &PseudoAst) -> BTreeMap<NodeType, u64> {
    let mut hist = BTreeMap::new();
    ast.root.walk(&mut |n| {
        if let Some(ty) = n.node_type() {
            *hist.entry(ty).or_insert(0) += 1;
        }
    });
    hist
}

/// (parent, child) type pairs over non-leaf edges; leaves excluded.
pub fn node_bigrams(ast: &PseudoAst) -> BTreeMap<(NodeType, NodeType), u64> {
    let mut map = BTreeMap::new();
    ast.root.walk(&mut |n| {
        if let Some(parent) = n.node_type() {
            for c in n.children() {
                if let Some(child) = c.node_type() {
                    *map.entry((parent, child)).or_insert(0) += 1;
                }
            }
        }
    });
    map
}

/// Maximum node depth, root at depth 1, leaves included.
pub fn max_depth(ast: &PseudoAst) -> u32 {
    fn depth(n: &AstNode) -> u32 {
        1 + n.children().iter().map(depth).max().unwrap_or(0)
    }
    depth(&ast.root)
}

/// Indented one-node-per-line rendering: `type @ line:col`.
pub fn dump(ast: &PseudoAst) -> String {
    fn rec(n: &AstNode, indent: usize, out: &mut String) {
        let (line, col) = n.position();
        for _ in 0..indent {
            out.push_str("  ");
        }
        match n {
            AstNode::Inner { ty, .. } => {
                out.push_str(&format!("{} @ {}:{}\n", ty.id(), line, col));
            }
            AstNode::Leaf { text, .. } => {
                out.push_str(&format!("leaf {:?} @ {}:{}\n", text, line, col));
            }
        }
        for c in n.children() {
            rec(c, indent + 1, out);
        }
    }
    let mut out = String::new();
    rec(&ast.root, 0, &mut out);
    out
}
