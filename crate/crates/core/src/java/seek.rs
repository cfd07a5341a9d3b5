//! Call-site discovery inside Java call containers.

use crate::model::{CallSite, ClassName, ClassRegion, ContainerKey, MethodKey, SiteId};
use crate::parse::{Forest, SyntaxNode};

use super::preprocess::{class_path, package_of, PreprocessResult};
use super::syntax::{self, is_anonymous_body, is_type_declaration};

/// Builds the call site record for an invocation or object creation node.
pub fn call_site(call: SyntaxNode<'_>, container: ContainerKey) -> Option<CallSite> {
    let kind = syntax::site_kind(&call)?;
    let anchor = syntax::site_anchor(call);
    let at = anchor.start();
    Some(CallSite {
        id: SiteId {
            file: call.file_path().to_string(),
            offset: anchor.start_byte(),
            row: at.row,
            col: at.col,
        },
        kind,
        callee_name: syntax::callee_name(call)?,
        arg_count: syntax::argument_count(call),
        receiver: syntax::classify_receiver(call),
        container,
    })
}

/// Walks `node`, collecting call sites in document order. Nested named types
/// are skipped; anonymous class bodies contribute sites under their own
/// synthetic containers.
pub fn seek_in(
    node: SyntaxNode<'_>,
    container: &ContainerKey,
    products: &PreprocessResult,
    out: &mut Vec<CallSite>,
) {
    let mut anonymous = Vec::new();
    node.walk_preorder(|n| {
        if n != node && is_type_declaration(&n) {
            return false;
        }
        if is_anonymous_body(&n) {
            anonymous.push(n);
            return false;
        }
        if let Some(site) = call_site(n, container.clone()) {
            out.push(site);
        }
        true
    });
    for body in anonymous {
        if let Some(class) = anonymous_class(body, products) {
            seek_class_body(body, &class, products, out);
        }
    }
    // document order of the anchors; preorder would put `c` before `b` in `a.b().c()`
    out.sort_by_key(|s| s.id.offset);
}

fn anonymous_class(body: SyntaxNode<'_>, products: &PreprocessResult) -> Option<ClassName> {
    let file = body.file_id();
    let bodies = products.anonymous.get(file)?;
    let root = body.ancestors().last()?;
    let path = class_path(body, bodies)?;
    let package = products
        .import_table(file)
        .map(|t| t.own_package.clone())
        .unwrap_or_else(|| package_of(root));
    Some(ClassName::new(package, path))
}

/// Members of a class-like body, flattening enum body declarations.
fn members<'a>(body: SyntaxNode<'a>) -> Vec<SyntaxNode<'a>> {
    let mut out = Vec::new();
    for m in body.named_children() {
        if m.kind() == "enum_body_declarations" {
            out.extend(m.named_children());
        } else {
            out.push(m);
        }
    }
    out
}

/// Class-level region a member belongs to, if any.
fn region_of(member: SyntaxNode<'_>) -> Option<ClassRegion> {
    match member.kind() {
        "field_declaration" | "constant_declaration" | "enum_constant" => Some(ClassRegion::Fields),
        "static_initializer" => Some(ClassRegion::StaticInit),
        "block" => Some(ClassRegion::InstanceInit),
        _ => None,
    }
}

/// Every container of an anonymous body: its methods and class-level regions.
fn seek_class_body(
    body: SyntaxNode<'_>,
    class: &ClassName,
    products: &PreprocessResult,
    out: &mut Vec<CallSite>,
) {
    for member in members(body) {
        if let Some(region) = region_of(member) {
            let container = ContainerKey::ClassLevel {
                class: class.clone(),
                region,
            };
            seek_in(member, &container, products, out);
        } else if member.kind() == "method_declaration" {
            let (Some(name), Some(block)) =
                (member.child_by_field("name"), member.child_by_field("body"))
            else {
                continue;
            };
            let arity = member
                .child_by_field("parameters")
                .map(|p| syntax::formal_parameters(p).0.len())
                .unwrap_or(0);
            let container = ContainerKey::Method(MethodKey::new(class.clone(), name.text(), arity));
            seek_in(block, &container, products, out);
        }
    }
}

/// Sites in one class-level region of a named class declaration.
pub fn seek_class_level_sites(
    decl: SyntaxNode<'_>,
    class: &ClassName,
    region: ClassRegion,
    products: &PreprocessResult,
) -> Vec<CallSite> {
    let mut out = Vec::new();
    let Some(body) = decl.child_by_field("body") else {
        return out;
    };
    let container = ContainerKey::ClassLevel {
        class: class.clone(),
        region,
    };
    for member in members(body) {
        if region_of(member) == Some(region) {
            seek_in(member, &container, products, &mut out);
        }
    }
    out
}

/// Sites of any container known to the preprocessor.
pub fn seek_container(
    forest: &Forest,
    products: &PreprocessResult,
    container: &ContainerKey,
) -> Vec<CallSite> {
    let mut out = Vec::new();
    match container {
        ContainerKey::Method(key) => {
            if let Some(body) = products
                .method_dict
                .get(key)
                .and_then(|e| forest.resolve(&e.body))
            {
                seek_in(body, container, products, &mut out);
            }
        }
        ContainerKey::ClassLevel { class, region } => {
            if let Some(decl) = products
                .class_cache
                .get(class)
                .and_then(|r| forest.resolve(&r.declaration))
            {
                out = seek_class_level_sites(decl, class, *region, products);
            }
        }
    }
    out
}
