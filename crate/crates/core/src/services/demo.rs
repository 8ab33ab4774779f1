//! Demonstration extensions for the MSC example: the `symtab` and `check`
//! workflows, trace generation and vertical composition of charts.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::actions::{ActionError, ActionResult, EditorAction, EditorContext, NavigatorAction, NavigatorContext};
use super::workflow::{WorkflowPass, Workspace};
use crate::engine::{NodeItem, SyntaxNode};
use crate::report::ProblemReport;

pub const TRACE_ACTION: &str = "mc.examples.msc.msc.action.GenerateTraceAction";
pub const COMPOSE_ACTION: &str = "mc.examples.msc.msc.compose.ComposeAction";

fn charts(root: &SyntaxNode) -> Vec<&SyntaxNode> {
    let mut out = Vec::new();
    root.walk(&mut |n| {
        if n.local_name() == "MSC" {
            out.push(n);
        }
    });
    out
}

fn instances(chart: &SyntaxNode) -> Vec<&SyntaxNode> {
    chart.children.iter().filter(|c| c.local_name() == "Instance").collect()
}

/// Position of the last own token of `node` spelled `text`, else the node start.
fn position_of(node: &SyntaxNode, text: &str) -> (u32, u32) {
    node.items
        .iter()
        .rev()
        .find_map(|i| match i {
            NodeItem::Token(t) if t.text == text => Some((t.span.start_line, t.span.start_col)),
            _ => None,
        })
        .unwrap_or((node.span.start_line, node.span.start_col))
}

/// Collects instance names per chart; reports duplicates.
pub struct SymtabPass;

impl WorkflowPass for SymtabPass {
    fn name(&self) -> &str {
        "symtab"
    }

    fn run(&self, root: &SyntaxNode, file: &Path, _: &dyn Workspace) -> Vec<ProblemReport> {
        let mut out = Vec::new();
        for chart in charts(root) {
            let mut seen = BTreeSet::new();
            for inst in instances(chart) {
                let name = inst.text("name").unwrap_or_default();
                if !seen.insert(name) {
                    let (line, col) = position_of(inst, name);
                    out.push(ProblemReport::error(format!("duplicate instance {name}"), file, line, col, "symtab"));
                }
            }
        }
        out
    }
}

/// Reports send and receive events whose peer is not a declared instance.
pub struct CheckPass;

impl WorkflowPass for CheckPass {
    fn name(&self) -> &str {
        "check"
    }

    fn run(&self, root: &SyntaxNode, file: &Path, _: &dyn Workspace) -> Vec<ProblemReport> {
        let mut out = Vec::new();
        for chart in charts(root) {
            let declared: BTreeSet<&str> = instances(chart).iter().filter_map(|i| i.text("name")).collect();
            chart.walk(&mut |n| {
                let peer = match n.local_name() {
                    "SendEvent" => n.text("receiver"),
                    "ReceiveEvent" => n.text("sender"),
                    _ => None,
                };
                if let Some(peer) = peer.filter(|p| !declared.contains(p)) {
                    let (line, col) = position_of(n, peer);
                    out.push(ProblemReport::error(format!("unknown instance {peer}"), file, line, col, "check"));
                }
            });
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Step {
    Send { message: String, to: String },
    Receive { message: String, from: String },
}

/// Orders the events of a chart causally: repeatedly fires the next event
/// of the first instance (in declaration order) that can proceed. Sends
/// always can; a receive waits for its message. Conditions are skipped.
/// Returns the steps and whether every event fired.
pub fn causal_trace(chart: &SyntaxNode) -> (Vec<String>, bool) {
    let insts = instances(chart);
    let names: Vec<&str> = insts.iter().map(|i| i.text("name").unwrap_or_default()).collect();
    let queues: Vec<Vec<Step>> = insts
        .iter()
        .map(|i| {
            i.children
                .iter()
                .filter_map(|e| {
                    let text = |l: &str| e.text(l).unwrap_or_default().to_string();
                    match e.local_name() {
                        "SendEvent" => Some(Step::Send { message: text("message"), to: text("receiver") }),
                        "ReceiveEvent" => Some(Step::Receive { message: text("message"), from: text("sender") }),
                        _ => None,
                    }
                })
                .collect()
        })
        .collect();
    let mut next = vec![0usize; queues.len()];
    // Messages in flight: (from, to, message) -> count.
    let mut in_flight: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    let mut steps = Vec::new();
    'outer: loop {
        for (i, q) in queues.iter().enumerate() {
            let Some(step) = q.get(next[i]) else { continue };
            match step {
                Step::Send { message, to } => {
                    *in_flight.entry((names[i].to_string(), to.clone(), message.clone())).or_default() += 1;
                    steps.push(format!("{}.out {message}", names[i]));
                }
                Step::Receive { message, from } => {
                    let key = (from.clone(), names[i].to_string(), message.clone());
                    match in_flight.get_mut(&key) {
                        Some(n) if *n > 0 => *n -= 1,
                        // Messages from outside the chart are always available.
                        _ if !names.contains(&from.as_str()) => {}
                        _ => continue,
                    }
                    steps.push(format!("{}.in {message}", names[i]));
                }
            }
            next[i] += 1;
            continue 'outer;
        }
        break;
    }
    let complete = next.iter().zip(&queues).all(|(n, q)| *n == q.len());
    (steps, complete)
}

/// Writes `<document stem>.trace` next to the document.
pub struct TraceAction;

impl EditorAction for TraceAction {
    fn run(&self, ctx: &EditorContext<'_>) -> Result<ActionResult, ActionError> {
        let outcome = ctx.service.parse(ctx.text, ctx.path);
        let Some(root) = outcome.root else {
            return Ok(ActionResult::Reports { reports: outcome.problems });
        };
        let mut out = String::new();
        let mut reports = Vec::new();
        for chart in charts(&root) {
            let name = chart.text("name").unwrap_or_default();
            let (steps, complete) = causal_trace(chart);
            out.push_str(&format!("// trace of msc {name}\n"));
            for s in steps {
                out.push_str(&s);
                out.push('\n');
            }
            if !complete {
                reports.push(ProblemReport::warning(
                    format!("trace of {name} stops early: remaining receives never get their message"),
                    ctx.path,
                    chart.span.start_line,
                    chart.span.start_col,
                    "trace",
                ));
            }
        }
        if !reports.is_empty() {
            return Ok(ActionResult::Reports { reports });
        }
        let target = ctx.path.with_extension("trace");
        Ok(ActionResult::NewFiles { files: [(target, out)].into() })
    }
}

enum Part {
    Instance { name: String, events: Vec<String> },
    Other(String),
}

/// Vertical composition: instances with equal names are merged, events
/// appended in file order; everything else is kept in order of first
/// appearance. Writes `composed.msc` next to the first file.
pub struct ComposeAction;

impl NavigatorAction for ComposeAction {
    fn run(&self, ctx: &NavigatorContext<'_>) -> Result<ActionResult, ActionError> {
        if ctx.files.len() < 2 {
            return Err(ActionError::InvalidArguments {
                action: COMPOSE_ACTION.into(),
                message: "compose requires at least 2 files".into(),
            });
        }
        let mut name = None;
        let mut parts: Vec<Part> = Vec::new();
        let mut reports = Vec::new();
        for (path, _project) in ctx.files {
            let Some(text) = ctx.workspace.read(path) else {
                reports.push(ProblemReport::error("cannot read file", path, 1, 1, "compose"));
                continue;
            };
            let outcome = ctx.service.parse(&text, path);
            let Some(root) = outcome.root else {
                reports.extend(outcome.problems);
                continue;
            };
            for chart in charts(&root) {
                name.get_or_insert_with(|| chart.text("name").unwrap_or_default().to_string());
                for item in &chart.children {
                    if item.local_name() != "Instance" {
                        parts.push(Part::Other(item.source(&text).to_string()));
                        continue;
                    }
                    let iname = item.text("name").unwrap_or_default();
                    let events = item.children.iter().map(|e| e.source(&text).to_string());
                    let existing = parts.iter_mut().find_map(|p| match p {
                        Part::Instance { name, events } if name == iname => Some(events),
                        _ => None,
                    });
                    match existing {
                        Some(evs) => evs.extend(events),
                        None => parts.push(Part::Instance { name: iname.to_string(), events: events.collect() }),
                    }
                }
            }
        }
        if !reports.is_empty() {
            return Ok(ActionResult::Reports { reports });
        }
        let mut doc = format!("msc {} {{\n", name.unwrap_or_default());
        for p in &parts {
            match p {
                Part::Instance { name, events } => {
                    doc.push_str(&format!("instance {name} {{\n"));
                    for e in events {
                        doc.push_str(e);
                        doc.push('\n');
                    }
                    doc.push_str("}\n");
                }
                Part::Other(src) => {
                    doc.push_str(src);
                    doc.push('\n');
                }
            }
        }
        doc.push_str("}\n");
        let target = ctx.files[0].0.parent().unwrap_or(Path::new("")).join("composed.msc");
        match ctx.service.format_or_default(&doc, &target) {
            Ok(text) => Ok(ActionResult::NewFiles { files: [(target, text)].into() }),
            Err(reports) => Ok(ActionResult::Reports { reports }),
        }
    }
}
