//! UPPAAL model (`.xml`, flat DTD) and query (`.q`) serialization.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ClockId, TaModel, TaNetwork};
use crate::spec_compiler::CompiledQuery;

pub const DOCTYPE: &str = "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' \
'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>";

/// Words the UPPAAL parser reserves; none may name an automaton, location,
/// channel or clock.
const RESERVED: &[&str] = &[
    "and", "assign", "bool", "break", "broadcast", "case", "chan", "clock",
    "commit", "committed", "const", "continue", "deadlock", "default", "do", "double", "else",
    "exists", "false", "for", "forall", "guard", "if", "imply", "init", "int", "meta", "not",
    "or", "priority", "process", "return", "scalar", "select", "state", "string", "struct",
    "sum", "switch", "sync", "system", "trans", "true", "typedef", "urgent", "void", "while",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("`{name}` is not a valid UPPAAL identifier ({role})")]
    InvalidIdentifier { name: String, role: &'static str },
    #[error("system order must list every automaton exactly once")]
    BadSystemOrder,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitConfig {
    /// Process order in the `system` line; `None` keeps network order.
    pub system_order: Option<Vec<String>>,
    pub indent: usize,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            system_order: None,
            indent: 2,
        }
    }
}

pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let head_ok = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name)
}

fn check(name: &str, role: &'static str) -> Result<(), EmitError> {
    if is_valid_identifier(name) {
        Ok(())
    } else {
        Err(EmitError::InvalidIdentifier {
            name: name.to_string(),
            role,
        })
    }
}

fn validate(network: &TaNetwork) -> Result<(), EmitError> {
    for ch in &network.channels {
        check(ch, "channel")?;
    }
    for m in &network.automata {
        check(&m.name, "automaton")?;
        for l in &m.locations {
            check(l, "location")?;
        }
        for c in &m.clocks {
            check(c.id.as_str(), "clock")?;
        }
    }
    Ok(())
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Grid position of the `i`-th location of a template.
fn coordinates(i: usize) -> (i64, i64) {
    ((i % 4) as i64 * 200, (i / 4) as i64 * 150)
}

fn system_order<'a>(network: &'a TaNetwork, config: &'a EmitConfig) -> Result<Vec<&'a str>, EmitError> {
    let names: Vec<&str> = network.automata.iter().map(|m| m.name.as_str()).collect();
    let Some(order) = &config.system_order else {
        return Ok(names);
    };
    let mut sorted_order: Vec<&str> = order.iter().map(String::as_str).collect();
    let mut sorted_names = names.clone();
    sorted_order.sort_unstable();
    sorted_names.sort_unstable();
    if sorted_order != sorted_names {
        return Err(EmitError::BadSystemOrder);
    }
    Ok(order.iter().map(String::as_str).collect())
}

fn ordered_resets<'a>(model: &TaModel, resets: impl Iterator<Item = &'a ClockId>) -> Vec<&'a ClockId> {
    let pos = |id: &ClockId| model.clocks.iter().position(|c| &c.id == id).unwrap_or(usize::MAX);
    let mut v: Vec<&ClockId> = resets.collect();
    v.sort_by_key(|id| (pos(id), (*id).clone()));
    v
}

/// Serializes the network as an UPPAAL XML document. Location ids are
/// numbered across the whole document so they stay unique.
pub fn emit_xml(network: &TaNetwork, config: &EmitConfig) -> Result<String, EmitError> {
    validate(network)?;
    let order = system_order(network, config)?;
    let pad = |level: usize| " ".repeat(level * config.indent);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    out.push_str(DOCTYPE);
    out.push('\n');
    out.push_str("<nta>\n");
    let chans: Vec<String> = network.channels.iter().map(|c| format!("chan {c};")).collect();
    let _ = writeln!(out, "{}<declaration>{}</declaration>", pad(1), chans.join("\n"));

    let mut next_id = 0usize;
    for m in &network.automata {
        let _ = writeln!(out, "{}<template>", pad(1));
        let _ = writeln!(out, "{}<name>{}</name>", pad(2), m.name);
        if !m.clocks.is_empty() {
            let clocks: Vec<&str> = m.clocks.iter().map(|c| c.id.as_str()).collect();
            let _ = writeln!(out, "{}<declaration>clock {};</declaration>", pad(2), clocks.join(", "));
        }
        let ids: Vec<String> = (0..m.locations.len()).map(|i| format!("id{}", next_id + i)).collect();
        next_id += m.locations.len();
        for (i, loc) in m.locations.iter().enumerate() {
            let (x, y) = coordinates(i);
            let _ = writeln!(out, "{}<location id=\"{}\" x=\"{x}\" y=\"{y}\">", pad(2), ids[i]);
            let _ = writeln!(out, "{}<name x=\"{}\" y=\"{}\">{loc}</name>", pad(3), x - 10, y - 30);
            if let Some(inv) = m.invariant(loc) {
                let _ = writeln!(
                    out,
                    "{}<label kind=\"invariant\" x=\"{}\" y=\"{}\">{}</label>",
                    pad(3),
                    x - 10,
                    y + 15,
                    escape(&inv.to_string())
                );
            }
            let _ = writeln!(out, "{}</location>", pad(2));
        }
        let init = m.location_index(&m.initial).expect("initial is a location");
        let _ = writeln!(out, "{}<init ref=\"{}\"/>", pad(2), ids[init]);
        for t in &m.transitions {
            let src = m.location_index(&t.source).expect("source is a location");
            let dst = m.location_index(&t.target).expect("target is a location");
            let _ = writeln!(out, "{}<transition>", pad(2));
            let _ = writeln!(out, "{}<source ref=\"{}\"/>", pad(3), ids[src]);
            let _ = writeln!(out, "{}<target ref=\"{}\"/>", pad(3), ids[dst]);
            if !t.guard.is_empty() {
                let _ = writeln!(
                    out,
                    "{}<label kind=\"guard\">{}</label>",
                    pad(3),
                    escape(&t.guard.to_string())
                );
            }
            if let Some(sync) = &t.sync {
                let _ = writeln!(out, "{}<label kind=\"synchronisation\">{sync}</label>", pad(3));
            }
            if !t.resets.is_empty() {
                let assigns: Vec<String> = ordered_resets(m, t.resets.iter())
                    .into_iter()
                    .map(|c| format!("{c} = 0"))
                    .collect();
                let _ = writeln!(
                    out,
                    "{}<label kind=\"assignment\">{}</label>",
                    pad(3),
                    assigns.join(", ")
                );
            }
            let _ = writeln!(out, "{}</transition>", pad(2));
        }
        let _ = writeln!(out, "{}</template>", pad(1));
    }
    let _ = writeln!(out, "{}<system>system {};</system>", pad(1), order.join(", "));
    out.push_str("</nta>\n");
    Ok(out)
}

/// One query per record, each preceded by a comment echoing its sentence.
pub fn emit_queries(queries: &[CompiledQuery]) -> String {
    let mut out = String::new();
    for q in queries {
        let comment = q.sentence.replace("*/", "* /");
        let _ = writeln!(out, "/* {comment} */");
        let _ = writeln!(out, "{}", q.query);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build_network;
    use crate::frontend::parse_descriptions;
    use crate::spec_compiler::Query;

    fn network(text: &str) -> TaNetwork {
        let (p, d) = parse_descriptions(text);
        assert!(d.is_empty());
        build_network(&p).0
    }

    const GATE: &str = "Gate can be Free Occ and it is initially Free.
Gate can send Go and go from Free to Occ.
If Appr is received, then Gate can go from Free to Occ.
If Leave is received, then Gate can go from Occ to Free.";

    #[test]
    fn gate_template() {
        let xml = emit_xml(&network(GATE), &EmitConfig::default()).unwrap();
        assert!(xml.starts_with("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n<!DOCTYPE nta PUBLIC"));
        assert!(xml.contains("<declaration>chan Appr;\nchan Go;\nchan Leave;</declaration>"));
        assert!(xml.contains("<name>Gate</name>"));
        assert_eq!(xml.matches("<location ").count(), 2);
        assert_eq!(xml.matches("<transition>").count(), 3);
        assert!(xml.contains("<label kind=\"synchronisation\">Go!</label>"));
        assert!(xml.contains("<init ref=\"id0\"/>"));
        assert!(xml.contains("<system>system Gate;</system>"));
        assert!(!xml.contains("clock"));
    }

    #[test]
    fn minimal_template() {
        let xml = emit_xml(&network("A can only be L."), &EmitConfig::default()).unwrap();
        assert_eq!(xml.matches("<location ").count(), 1);
        assert!(xml.contains("<init ref=\"id0\"/>"));
        assert!(!xml.contains("<transition>"));
    }

    #[test]
    fn labels_are_escaped() {
        let xml = emit_xml(
            &network(
                "A can be X Y and it is initially X.\n\
                 if the time spent after entering X is more than 2 and less than 5 then A can go from X to Y.\n\
                 for A the time spent in Y cannot be more than 4.",
            ),
            &EmitConfig::default(),
        )
        .unwrap();
        assert!(xml.contains("<label kind=\"guard\">c0 &lt; 5 &amp;&amp; c0 &gt; 2</label>"));
        assert!(xml.contains("c1 &lt;= 4</label>"));
        // Nothing enters X, so only the invariant clock is ever reset.
        assert!(xml.contains("<label kind=\"assignment\">c1 = 0</label>"));
        assert!(xml.contains("<declaration>clock c0, c1;</declaration>"));
    }

    #[test]
    fn reserved_names_rejected() {
        let err = emit_xml(&network("A can be int X and it is initially X."), &EmitConfig::default()).unwrap_err();
        assert_eq!(err, EmitError::InvalidIdentifier { name: "int".into(), role: "location" });
    }

    #[test]
    fn system_order_override() {
        let net = network("A can only be L.\nB can only be M.");
        let cfg = EmitConfig { system_order: Some(vec!["B".into(), "A".into()]), indent: 4 };
        let xml = emit_xml(&net, &cfg).unwrap();
        assert!(xml.contains("system B, A;"));
        assert!(xml.contains("\n    <template>"));
        let bad = EmitConfig { system_order: Some(vec!["B".into()]), indent: 2 };
        assert_eq!(emit_xml(&net, &bad), Err(EmitError::BadSystemOrder));
    }

    #[test]
    fn ids_unique_across_templates() {
        let xml = emit_xml(&network("A can be X Y and it is initially X.\nB can only be M."), &EmitConfig::default())
            .unwrap();
        for id in ["id0", "id1", "id2"] {
            assert_eq!(xml.matches(&format!("id=\"{id}\"")).count(), 1);
        }
    }

    #[test]
    fn queries_file() {
        assert_eq!(emit_queries(&[]), "");
        let q = CompiledQuery { query: Query::DeadlockFree, sentence: "Deadlock never occurs.".into() };
        let out = emit_queries(&[q.clone(), q]);
        assert_eq!(
            out,
            "/* Deadlock never occurs. */\nA[] not deadlock\n/* Deadlock never occurs. */\nA[] not deadlock\n"
        );
    }
}
