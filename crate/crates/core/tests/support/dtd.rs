//! Validation against the element and attribute declarations of the UPPAAL
//! flat DTD (flat-1_2.dtd). Content models are transcribed as sequences of
//! `(child, occurrence)`; every model in that DTD is a plain sequence, so a
//! greedy left-to-right match decides membership.

use std::collections::{BTreeSet, HashMap};

use roxmltree::{Document, Node, NodeType};

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Occ {
    One,
    Opt,
    Many,
    Some_,
}

enum Content {
    Empty,
    Text,
    Seq(&'static [(&'static str, Occ)]),
}

enum AttrKind {
    Cdata,
    Id,
    IdRef,
}

struct Element {
    content: Content,
    /// `(name, kind, required)`
    attrs: &'static [(&'static str, AttrKind, bool)],
}

const XY: [(&str, AttrKind, bool); 2] = [("x", AttrKind::Cdata, false), ("y", AttrKind::Cdata, false)];

fn declarations() -> HashMap<&'static str, Element> {
    use AttrKind::*;
    use Occ::*;
    let text = |attrs| Element { content: Content::Text, attrs };
    HashMap::from([
        (
            "nta",
            Element {
                content: Content::Seq(&[
                    ("imports", Opt),
                    ("declaration", Opt),
                    ("template", Some_),
                    ("instantiation", Opt),
                    ("system", One),
                    ("queries", Opt),
                ]),
                attrs: &[],
            },
        ),
        ("imports", text(&[])),
        ("declaration", text(&[])),
        (
            "template",
            Element {
                content: Content::Seq(&[
                    ("name", One),
                    ("parameter", Opt),
                    ("declaration", Opt),
                    ("location", Many),
                    ("branchpoint", Many),
                    ("init", Opt),
                    ("transition", Many),
                ]),
                attrs: &[],
            },
        ),
        ("name", text(&XY)),
        ("parameter", text(&XY)),
        (
            "location",
            Element {
                content: Content::Seq(&[("name", Opt), ("label", Many), ("urgent", Opt), ("committed", Opt)]),
                attrs: &[
                    ("id", Id, true),
                    ("x", Cdata, false),
                    ("y", Cdata, false),
                    ("color", Cdata, false),
                ],
            },
        ),
        ("branchpoint", Element { content: Content::Empty, attrs: &[("id", Id, true), ("x", Cdata, false), ("y", Cdata, false)] }),
        ("init", Element { content: Content::Empty, attrs: &[("ref", IdRef, true)] }),
        ("urgent", Element { content: Content::Empty, attrs: &[] }),
        ("committed", Element { content: Content::Empty, attrs: &[] }),
        (
            "transition",
            Element {
                content: Content::Seq(&[("source", One), ("target", One), ("label", Many), ("nail", Many)]),
                attrs: &[("id", Id, false), ("x", Cdata, false), ("y", Cdata, false), ("color", Cdata, false)],
            },
        ),
        ("source", Element { content: Content::Empty, attrs: &[("ref", IdRef, true)] }),
        ("target", Element { content: Content::Empty, attrs: &[("ref", IdRef, true)] }),
        (
            "label",
            Element {
                content: Content::Text,
                attrs: &[("kind", Cdata, true), ("x", Cdata, false), ("y", Cdata, false)],
            },
        ),
        ("nail", Element { content: Content::Empty, attrs: &[("x", Cdata, true), ("y", Cdata, true)] }),
        ("instantiation", text(&[])),
        ("system", text(&[])),
        ("queries", Element { content: Content::Seq(&[("query", Many)]), attrs: &[] }),
        ("query", Element { content: Content::Seq(&[("formula", One), ("comment", Opt)]), attrs: &[] }),
        ("formula", text(&[])),
        ("comment", text(&[])),
    ])
}

const LABEL_KINDS: [&str; 8] = [
    "invariant", "guard", "synchronisation", "assignment", "select", "comments", "exponentialrate", "testcode",
];

pub fn match_seq(children: &[&str], model: &[(&str, Occ)]) -> bool {
    let mut i = 0;
    for &(name, occ) in model {
        let mut n = 0;
        while i < children.len() && children[i] == name {
            i += 1;
            n += 1;
            if matches!(occ, Occ::One | Occ::Opt) {
                break;
            }
        }
        let ok = match occ {
            Occ::One => n == 1,
            Occ::Opt | Occ::Many => true,
            Occ::Some_ => n >= 1,
        };
        if !ok {
            return false;
        }
    }
    i == children.len()
}

fn check_node(node: Node, decls: &HashMap<&str, Element>, ids: &mut BTreeSet<String>, refs: &mut Vec<String>) -> Result<(), String> {
    let tag = node.tag_name().name();
    let decl = decls.get(tag).ok_or(format!("undeclared element <{tag}>"))?;
    for a in node.attributes() {
        let (_, kind, _) = decl
            .attrs
            .iter()
            .find(|(n, _, _)| *n == a.name())
            .ok_or(format!("undeclared attribute {} on <{tag}>", a.name()))?;
        match kind {
            AttrKind::Id => {
                if !ids.insert(a.value().to_string()) {
                    return Err(format!("duplicate id {}", a.value()));
                }
            }
            AttrKind::IdRef => refs.push(a.value().to_string()),
            AttrKind::Cdata => {}
        }
    }
    for (name, _, required) in decl.attrs {
        if *required && node.attribute(*name).is_none() {
            return Err(format!("<{tag}> missing required attribute {name}"));
        }
    }
    let elements: Vec<Node> = node.children().filter(|c| c.is_element()).collect();
    let has_text = node
        .children()
        .any(|c| c.node_type() == NodeType::Text && !c.text().unwrap_or("").trim().is_empty());
    match decl.content {
        Content::Empty => {
            if !elements.is_empty() || has_text {
                return Err(format!("<{tag}> must be empty"));
            }
        }
        Content::Text => {
            if !elements.is_empty() {
                return Err(format!("<{tag}> allows text only"));
            }
        }
        Content::Seq(model) => {
            if has_text {
                return Err(format!("<{tag}> has stray text"));
            }
            let names: Vec<&str> = elements.iter().map(|e| e.tag_name().name()).collect();
            if !match_seq(&names, model) {
                return Err(format!("<{tag}> children {names:?} do not match its content model"));
            }
        }
    }
    if tag == "label" {
        let kind = node.attribute("kind").unwrap_or("");
        if !LABEL_KINDS.contains(&kind) {
            return Err(format!("unknown label kind {kind}"));
        }
    }
    for e in elements {
        check_node(e, decls, ids, refs)?;
    }
    Ok(())
}

pub const DOCTYPE_PUBLIC: &str = "-//Uppaal Team//DTD Flat System 1.1//EN";
pub const DOCTYPE_SYSTEM: &str = "http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd";

/// Checks well-formedness, the DOCTYPE line, and every declaration above.
pub fn validate(xml: &str) -> Result<(), String> {
    let doctype_ok = xml.lines().take(3).any(|l| {
        l.starts_with("<!DOCTYPE nta PUBLIC") && l.contains(DOCTYPE_PUBLIC) && l.contains(DOCTYPE_SYSTEM)
    });
    if !doctype_ok {
        return Err("missing UPPAAL flat DTD doctype".into());
    }
    let opts = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    let doc = Document::parse_with_options(xml, opts).map_err(|e| e.to_string())?;
    let root = doc.root_element();
    if root.tag_name().name() != "nta" {
        return Err("root element must be <nta>".into());
    }
    let decls = declarations();
    let mut ids = BTreeSet::new();
    let mut refs = Vec::new();
    check_node(root, &decls, &mut ids, &mut refs)?;
    for r in refs {
        if !ids.contains(&r) {
            return Err(format!("dangling reference {r}"));
        }
    }
    Ok(())
}
