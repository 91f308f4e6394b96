//! End-to-end compilation: parse, build, reduce, compile queries, emit.

use crate::builder::build_network;
use crate::diagnostics::{has_errors, Code, Diagnostic, Span};
use crate::emitter::{emit_queries, emit_xml, EmitConfig};
use crate::frontend::{parse_descriptions, parse_specifications};
use crate::model::{structural_check, TaNetwork};
use crate::reduction::reduce_network;
use crate::spec_compiler::{compile_specs, CompiledQuery};
use crate::validate::{reachability_warnings, runs_equivalent, SampleConfig};

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub reduce: bool,
    /// When set, reduction is cross-checked by sampling runs with this seed.
    pub seed: Option<u64>,
    pub emit: EmitConfig,
}

impl Options {
    pub fn new() -> Self {
        Options { reduce: true, ..Default::default() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Output {
    /// Network as built, before reduction and instrumentation.
    pub built: TaNetwork,
    /// Network that was emitted.
    pub network: TaNetwork,
    pub queries: Vec<CompiledQuery>,
    /// `None` when an error stopped emission.
    pub xml: Option<String>,
    pub query_file: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Output {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

const SELF_CHECK_RUNS: usize = 200;
const SELF_CHECK_HORIZON: usize = 20;

pub fn compile(descriptions: &str, specifications: Option<&str>, options: &Options) -> Output {
    let mut out = Output::default();
    let (parsed, diags) = parse_descriptions(descriptions);
    out.diagnostics.extend(diags);
    let (built, diags) = build_network(&parsed);
    out.diagnostics.extend(diags);
    if !out.has_errors() {
        out.diagnostics.extend(structural_check(&built));
    }
    out.built = built.clone();

    let mut network = built;
    if options.reduce && !out.has_errors() {
        let reduced = reduce_network(&network);
        if let Some(seed) = options.seed {
            let cfg = SampleConfig { count: SELF_CHECK_RUNS, horizon: SELF_CHECK_HORIZON, seed, scale: 1 };
            if runs_equivalent(&network, &reduced, &cfg) != Ok(true) {
                out.diagnostics.push(Diagnostic::error(
                    Code::ReductionUnsound,
                    format!("clock reduction changed sampled behaviour (seed {seed})"),
                    "",
                    Span::default(),
                ));
            }
        }
        network = reduced;
    }

    if let Some(text) = specifications {
        let (specs, diags) = parse_specifications(text);
        out.diagnostics.extend(diags);
        if !out.has_errors() {
            let (queries, instrumented, diags) = compile_specs(&specs, &network);
            out.diagnostics.extend(diags);
            out.queries = queries;
            network = instrumented;
        }
    }

    if !out.has_errors() {
        out.diagnostics.extend(reachability_warnings(&network));
        match emit_xml(&network, &options.emit) {
            Ok(xml) => {
                out.xml = Some(xml);
                out.query_file = Some(emit_queries(&out.queries));
            }
            Err(e) => out.diagnostics.push(Diagnostic::error(
                Code::InvalidIdentifier,
                e.to_string(),
                "",
                Span::default(),
            )),
        }
    }
    out.network = network;
    out
}
