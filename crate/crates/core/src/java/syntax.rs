//! Java grammar vocabulary and small syntactic helpers.

use crate::model::{ReceiverKind, SiteKind};
use crate::parse::SyntaxNode;

pub const TYPE_DECLARATIONS: &[&str] = &[
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
];

pub const CALLABLE_DECLARATIONS: &[&str] = &[
    "method_declaration",
    "constructor_declaration",
    "compact_constructor_declaration",
];

pub const CALL_KINDS: &[&str] = &["method_invocation", "object_creation_expression"];

pub fn is_type_declaration(node: &SyntaxNode<'_>) -> bool {
    TYPE_DECLARATIONS.contains(&node.kind())
}

/// Class body of an anonymous class or an enum constant with a body.
pub fn is_anonymous_body(node: &SyntaxNode<'_>) -> bool {
    node.kind() == "class_body"
        && node
            .parent()
            .is_some_and(|p| matches!(p.kind(), "object_creation_expression" | "enum_constant"))
}

pub fn site_kind(node: &SyntaxNode<'_>) -> Option<SiteKind> {
    match node.kind() {
        "method_invocation" => Some(SiteKind::MethodInvocation),
        "object_creation_expression" => Some(SiteKind::ObjectCreation),
        _ => None,
    }
}

/// Strips type arguments, annotations and whitespace: `java.util.List<String> []`
/// becomes `java.util.List[]`.
pub fn normalize_type(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut depth = 0usize;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '<' => depth += 1,
            '>' => depth = depth.saturating_sub(1),
            '@' if depth == 0 => {
                // skip the annotation name and an optional argument list
                while chars
                    .peek()
                    .is_some_and(|c| c.is_alphanumeric() || matches!(c, '_' | '$' | '.'))
                {
                    chars.next();
                }
                if chars.peek() == Some(&'(') {
                    let mut parens = 0;
                    for c in chars.by_ref() {
                        match c {
                            '(' => parens += 1,
                            ')' => {
                                parens -= 1;
                                if parens == 0 {
                                    break;
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
            c if c.is_whitespace() => {}
            c if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Rightmost dotted segment without array dimensions: `a.b.C[]` -> `C`.
pub fn simple_alias(type_text: &str) -> &str {
    let base = type_text.trim_end_matches("[]").trim_end_matches("...");
    base.rsplit('.').next().unwrap_or(base)
}

pub fn type_text(node: SyntaxNode<'_>) -> String {
    normalize_type(node.text())
}

/// Supertype names written in `extends`/`implements` clauses.
pub fn supertypes(decl: SyntaxNode<'_>) -> Vec<String> {
    let mut out = Vec::new();
    let mut push_list = |list: SyntaxNode<'_>| {
        for t in list.named_children() {
            if t.kind() == "type_list" {
                out.extend(t.named_children().into_iter().map(type_text));
            } else {
                out.push(type_text(t));
            }
        }
    };
    if let Some(sup) = decl.child_by_field("superclass") {
        push_list(sup);
    }
    if let Some(ifaces) = decl.child_by_field("interfaces") {
        push_list(ifaces);
    }
    for child in decl.named_children() {
        if child.kind() == "extends_interfaces" {
            push_list(child);
        }
    }
    out
}

pub fn has_modifier(decl: SyntaxNode<'_>, modifier: &str) -> bool {
    decl.named_children()
        .into_iter()
        .filter(|c| c.kind() == "modifiers")
        .any(|m| m.children().iter().any(|t| t.kind() == modifier))
}

/// Formal parameter types (normalized) and whether the last is varargs.
pub fn formal_parameters(params: SyntaxNode<'_>) -> (Vec<String>, bool) {
    let mut types = Vec::new();
    let mut varargs = false;
    for p in params.named_children() {
        match p.kind() {
            "formal_parameter" => {
                let mut t = p.child_by_field("type").map(type_text).unwrap_or_default();
                if let Some(dims) = p.child_by_field("dimensions") {
                    t.push_str(&normalize_type(dims.text()));
                }
                types.push(t);
            }
            "spread_parameter" => {
                let t = p
                    .named_children()
                    .into_iter()
                    .find(|c| !matches!(c.kind(), "modifiers" | "variable_declarator"))
                    .map(type_text)
                    .unwrap_or_default();
                types.push(format!("{t}..."));
                varargs = true;
            }
            _ => {}
        }
    }
    (types, varargs)
}

/// Name of the single parameter declared by a `formal_parameter` or
/// `spread_parameter` node.
pub fn parameter_name<'a>(p: SyntaxNode<'a>) -> Option<SyntaxNode<'a>> {
    match p.kind() {
        "formal_parameter" | "catch_formal_parameter" => p.child_by_field("name"),
        "spread_parameter" => p
            .named_children()
            .into_iter()
            .find(|c| c.kind() == "variable_declarator")
            .and_then(|d| d.child_by_field("name")),
        _ => None,
    }
}

/// Arguments of a call, excluding comments.
pub fn argument_count(call: SyntaxNode<'_>) -> usize {
    call.child_by_field("arguments")
        .map(|args| args.named_children().len())
        .unwrap_or(0)
}

/// Method name, or the created type's simple name for object creations.
pub fn callee_name(call: SyntaxNode<'_>) -> Option<String> {
    match call.kind() {
        "method_invocation" => call.child_by_field("name").map(|n| n.text().to_string()),
        "object_creation_expression" => call
            .child_by_field("type")
            .map(|t| simple_alias(&type_text(t)).to_string()),
        _ => None,
    }
}

/// Byte offset identifying a call site: the method name, or `new`.
pub fn site_anchor<'a>(call: SyntaxNode<'a>) -> SyntaxNode<'a> {
    match call.kind() {
        "method_invocation" => call.child_by_field("name").unwrap_or(call),
        _ => call,
    }
}

pub fn classify_receiver(call: SyntaxNode<'_>) -> ReceiverKind {
    if call.kind() != "method_invocation" {
        return ReceiverKind::Other("none".into());
    }
    match call.child_by_field("object") {
        None => ReceiverKind::Implicit,
        Some(obj) => match obj.kind() {
            "this" => ReceiverKind::ExplicitThis,
            "identifier" => ReceiverKind::Identifier(obj.text().to_string()),
            "field_access" => ReceiverKind::FieldAccess,
            "method_invocation" => ReceiverKind::MethodInvocation,
            other => ReceiverKind::Other(other.to_string()),
        },
    }
}

/// Dotted name of a package or import path with whitespace removed.
pub fn dotted(node: SyntaxNode<'_>) -> String {
    node.text().chars().filter(|c| !c.is_whitespace()).collect()
}
