//! The `freeplane` command line.
//!
//! Exit codes: 0 success or the property holds, 1 negative verdict,
//! 2 resource or budget limit reached, 3 input error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::axioms::{exceptional_points, is_projective, trivial_lines, validate};
use crate::confinement::{confined_core, is_confined_finite};
use crate::dot::{hasse_dot, trace_dot};
use crate::extension::{extend, ExtensionMode, StopReason};
use crate::fixtures;
use crate::group::{automorphism_group, DEFAULT_GROUP_CAP};
use crate::harness::{
    check_restriction, encoder_by_name, extend_embedding, spb_check, HarnessError, HarnessOptions, Status,
};
use crate::io::{parse_structure, structure_to_value, trace_to_string, FormatError, ParseOptions};
use crate::lattice::{check_geometric_length3, complete_subplane_report, to_lattice};
use crate::morphism::{embeddings, find_embedding, MorphismKind, NamedMorphism, SearchError, SearchLimits, DEFAULT_NODE_CAP};
use crate::sample::{sample, SampleParams};
use crate::structure::{ElementRef, IncidenceStructure};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_RESOURCE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "freeplane", version, about = "Finite incidence geometry toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Worker threads for harness checks.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: u32,
    /// Element budget (points plus lines) for free extensions.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Node cap for morphism searches.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_CAP, value_parser = clap::value_parser!(u64).range(1..))]
    pub node_cap: u64,
    /// Reject unknown JSON fields and require stages on generated elements.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Seed for generated test data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// A structure file, given positionally or with `--in`. `fixture:<name>`
/// loads a built-in fixture.
#[derive(Debug, Args)]
pub struct Input {
    #[arg(value_name = "INPUT", required_unless_present = "input")]
    pub path: Option<String>,
    #[arg(long = "in", value_name = "INPUT", conflicts_with = "path")]
    pub input: Option<String>,
}

impl Input {
    fn get(&self) -> &str {
        self.path.as_deref().or(self.input.as_deref()).expect("clap enforces one input")
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Lattice,
    Incidence,
    Iso,
}

impl From<KindArg> for MorphismKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lattice => MorphismKind::LatticeEmbedding,
            KindArg::Incidence => MorphismKind::IncidenceEmbedding,
            KindArg::Iso => MorphismKind::Isomorphism,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Full,
    Meets,
}

impl From<ModeArg> for ExtensionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => ExtensionMode::Full,
            ModeArg::Meets => ExtensionMode::MeetsOnly,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the plane axioms.
    Validate(Input),
    /// Compute the stages of the free extension.
    Extend {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        stages: usize,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Also write the per-stage incidence graphs in DOT to this file.
        #[arg(long, value_name = "FILE")]
        emit_dot: Option<PathBuf>,
    },
    /// Compute the confined core.
    Core {
        #[command(flatten)]
        input: Input,
        /// Also check the plane axioms on the core; exit 1 if they fail.
        #[arg(long)]
        require_plane_core: bool,
        /// Write the deletion list to this file as well.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
    },
    /// Build the lattice view and check it.
    Lattice {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Exit 1 unless the lattice is geometric of length 3.
        #[arg(long)]
        check: bool,
        /// Also write the Hasse diagram in DOT to this file.
        #[arg(long, value_name = "FILE")]
        emit_hasse: Option<PathBuf>,
    },
    /// Decide whether a structure is a complete subplane of another.
    Subplane {
        sub: String,
        ambient: String,
    },
    /// Search for embeddings or isomorphisms.
    Embed {
        #[arg(value_name = "FROM", required_unless_present = "from")]
        from_pos: Option<String>,
        #[arg(value_name = "TO", required_unless_present = "to")]
        to_pos: Option<String>,
        #[arg(long, conflicts_with = "from_pos")]
        from: Option<String>,
        #[arg(long, conflicts_with = "to_pos")]
        to: Option<String>,
        #[arg(long, value_enum, default_value = "lattice")]
        kind: KindArg,
        /// List every map.
        #[arg(long, conflicts_with = "limit")]
        all: bool,
        /// List at most this many maps (default 1).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        limit: Option<u64>,
    },
    /// Compute the automorphism group.
    Aut {
        #[command(flatten)]
        input: Input,
        /// Also list every automorphism.
        #[arg(long)]
        list: bool,
        /// Store at most this many automorphisms.
        #[arg(long, default_value_t = DEFAULT_GROUP_CAP as u64, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
    },
    /// Decide mutual embeddability.
    Biembed {
        #[arg(value_name = "A", required_unless_present = "a")]
        a_pos: Option<String>,
        #[arg(value_name = "B", required_unless_present = "b")]
        b_pos: Option<String>,
        #[arg(long, conflicts_with = "a_pos")]
        a: Option<String>,
        #[arg(long, conflicts_with = "b_pos")]
        b: Option<String>,
        #[arg(long, value_enum, default_value = "lattice")]
        kind: KindArg,
    },
    /// Transfer-property checks.
    #[command(subcommand)]
    Harness(HarnessCommand),
    /// Print seeded random structures (uses --seed).
    Sample {
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 10)]
        max_points: usize,
        #[arg(long, default_value_t = 10)]
        max_lines: usize,
        #[arg(long, default_value_t = 0.35)]
        density: f64,
        /// Only produce structures where two points share at most one line.
        #[arg(long)]
        linear: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum HarnessCommand {
    /// Isomorphism, embedding and automorphism transfer for an encoder.
    Spb {
        /// identity, naive, broken or plugin:<path>
        #[arg(long)]
        encoder: String,
        /// Directory of structure files; without it the built-in fixtures are used.
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "lattice")]
        kind: KindArg,
    },
    /// Embeddings of free extensions restrict to the bases.
    Restriction {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, value_enum, default_value = "lattice")]
        kind: KindArg,
    },
    /// Extend a morphism of bases to stage n of their free extensions.
    Extend {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Morphism JSON as written by `embed`; identity if omitted.
        #[arg(long)]
        morphism: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
    },
}

/// A failure carrying its exit code and message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn resource(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_RESOURCE,
            message: message.into(),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::ResourceExhausted { .. } => Failure::resource(e.to_string()),
            SearchError::NotLinear { .. } => Failure::input(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Search(s) => s.into(),
            HarnessError::Budget(_) | HarnessError::Extension(crate::extension::ExtensionError::Budget { .. }) => {
                Failure::resource(e.to_string())
            }
            HarnessError::Internal(_) => Failure {
                code: EXIT_NEGATIVE,
                message: e.to_string(),
            },
            other => Failure::input(other.to_string()),
        }
    }
}

fn format_error(path: &str, e: &FormatError) -> Failure {
    match e {
        FormatError::Json { line, column, message } => {
            Failure::input(format!("{path}:{line}:{column}: {message}"))
        }
        other => Failure::input(format!("{path}: {other}")),
    }
}

fn read_text(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{path}: {e}")))
}

fn load(path: &str, opts: ParseOptions) -> Result<IncidenceStructure, Failure> {
    if let Some(name) = path.strip_prefix("fixture:") {
        return fixtures::by_name(name).ok_or_else(|| {
            Failure::input(format!(
                "unknown fixture {name:?} (available: {})",
                fixtures::names().collect::<Vec<_>>().join(", ")
            ))
        });
    }
    parse_structure(&read_text(path)?, opts).map_err(|e| format_error(path, &e))
}

fn load_instances(dir: &Path, opts: ParseOptions) -> Result<Vec<(String, IncidenceStructure)>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, load(&p.to_string_lossy(), opts)?))
        })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn names_of(s: &IncidenceStructure, idx: impl IntoIterator<Item = usize>, lines: bool) -> Vec<String> {
    idx.into_iter()
        .map(|i| if lines { s.line(i) } else { s.point(i) }.to_string())
        .collect()
}

/// What a subcommand produced: text to write and an exit code.
fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

struct Output {
    text: String,
    code: i32,
}

fn emit(value: Value, code: i32) -> Output {
    Output {
        text: to_json(&value),
        code,
    }
}

fn run_command(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    let opts = ParseOptions { strict: g.strict };
    let budget = g.budget as usize;
    let cap = g.node_cap;
    match &cli.command {
        Command::Validate(input) => {
            let s = load(input.get(), opts)?;
            let report = validate(&s);
            let plane = report.is_plane();
            let projective = if plane { is_projective(&s).ok() } else { None };
            let value = json!({
                "axioms": report.axioms,
                "plane": plane,
                "projective": projective,
                "trivial_lines": names_of(&s, trivial_lines(&s), true),
                "exceptional_points": names_of(&s, exceptional_points(&s), false),
            });
            Ok(emit(value, if plane { EXIT_OK } else { EXIT_NEGATIVE }))
        }
        Command::Extend {
            input,
            stages,
            mode,
            format,
            emit_dot,
        } => {
            let s = load(input.get(), opts)?;
            let trace = extend(&s, *stages, (*mode).into(), budget).map_err(|e| Failure::input(e.to_string()))?;
            if let Some(path) = emit_dot {
                write_file(path, &trace_dot(&trace))?;
            }
            let code = if matches!(trace.stop, StopReason::Budget { .. }) {
                EXIT_RESOURCE
            } else {
                EXIT_OK
            };
            let text = match format {
                Format::Json => trace_to_string(&trace),
                Format::Dot => trace_dot(&trace),
            };
            Ok(Output { text, code })
        }
        Command::Core {
            input,
            require_plane_core,
            log,
        } => {
            let s = load(input.get(), opts)?;
            let r = confined_core(&s);
            let deleted: Vec<Value> = r
                .deleted
                .iter()
                .map(|d| {
                    let (kind, name) = match d.element {
                        ElementRef::Point(p) => ("point", s.point(p).to_string()),
                        ElementRef::Line(l) => ("line", s.line(l).to_string()),
                    };
                    json!({"element": name, "kind": kind, "reason": d.reason, "round": d.round})
                })
                .collect();
            if let Some(path) = log {
                write_file(path, &to_json(&Value::from(deleted.clone())))?;
            }
            let mut report = json!({
                "confined": is_confined_finite(&s),
                "core": structure_to_value(&r.core),
                "deleted": deleted,
                "rounds": r.rounds,
            });
            let mut code = EXIT_OK;
            if *require_plane_core {
                let is_plane = validate(&r.core).is_plane();
                report["core_is_plane"] = Value::Bool(is_plane);
                if !is_plane {
                    code = EXIT_NEGATIVE;
                }
            }
            Ok(emit(report, code))
        }
        Command::Lattice {
            input,
            format,
            check,
            emit_hasse,
        } => {
            let s = load(input.get(), opts)?;
            let l = to_lattice(&s);
            let report = check_geometric_length3(&l);
            if let Some(path) = emit_hasse {
                write_file(path, &hasse_dot(&l, "lattice"))?;
            }
            let code = if *check && !report.all_passed() { EXIT_NEGATIVE } else { EXIT_OK };
            let text = match format {
                Format::Dot => hasse_dot(&l, "lattice"),
                Format::Json => to_json(&json!({
                    "elements": l.names(),
                    "ranks": (0..l.len()).map(|i| l.rank(i)).collect::<Vec<_>>(),
                    "join": l.join_table(),
                    "meet": l.meet_table(),
                    "checks": report,
                })),
            };
            Ok(Output { text, code })
        }
        Command::Subplane { sub, ambient } => {
            let (s, a) = (load(sub, opts)?, load(ambient, opts)?);
            let report = complete_subplane_report(&s, &a).map_err(|e| Failure::input(e.to_string()))?;
            let complete = report.is_complete_subplane();
            Ok(emit(
                json!({
                    "complete_subplane": complete,
                    "is_plane": report.is_plane,
                    "closed": report.closed,
                    "unclosed": report.unclosed,
                }),
                if complete { EXIT_OK } else { EXIT_NEGATIVE },
            ))
        }
        Command::Embed {
            from_pos,
            to_pos,
            from,
            to,
            kind,
            all,
            limit,
        } => {
            let from = from_pos.as_deref().or(from.as_deref()).expect("clap enforces a source");
            let to = to_pos.as_deref().or(to.as_deref()).expect("clap enforces a target");
            let (a, b) = (load(from, opts)?, load(to, opts)?);
            let limits = SearchLimits {
                max_results: if *all { None } else { Some(limit.unwrap_or(1) as usize) },
                node_cap: cap,
            };
            let kind: MorphismKind = (*kind).into();
            let (found, complete) = match embeddings(&a, &b, kind, limits) {
                Ok(found) => (found, true),
                Err(SearchError::ResourceExhausted { partial, .. }) => (partial, false),
                Err(e) => return Err(e.into()),
            };
            let named: Vec<NamedMorphism> = found.iter().map(|m| m.to_named(&a, &b)).collect();
            let code = if !complete {
                EXIT_RESOURCE
            } else if named.is_empty() {
                EXIT_NEGATIVE
            } else {
                EXIT_OK
            };
            Ok(emit(
                json!({"kind": kind, "count": named.len(), "complete": complete, "morphisms": named}),
                code,
            ))
        }
        Command::Aut { input, list, cap: group_cap } => {
            let s = load(input.get(), opts)?;
            let group = automorphism_group(&s, *group_cap as usize, cap)?;
            let as_named = |p: &crate::group::Permutation| {
                let np = s.point_count();
                crate::morphism::Morphism {
                    kind: MorphismKind::Isomorphism,
                    points: p.0[..np].iter().map(|&x| x as usize).collect(),
                    lines: p.0[np..].iter().map(|&x| x as usize - np).collect(),
                }
                .to_named(&s, &s)
            };
            let mut value = json!({
                "order": group.order,
                "complete": group.complete,
                "generators": group.generator_perms().into_iter().map(as_named).collect::<Vec<_>>(),
            });
            if *list {
                value["elements"] = json!(group.elements.iter().map(as_named).collect::<Vec<_>>());
            }
            Ok(emit(value, if group.complete { EXIT_OK } else { EXIT_RESOURCE }))
        }
        Command::Biembed {
            a_pos,
            b_pos,
            a,
            b,
            kind,
        } => {
            let pa = a_pos.as_deref().or(a.as_deref()).expect("clap enforces A");
            let pb = b_pos.as_deref().or(b.as_deref()).expect("clap enforces B");
            let (sa, sb) = (load(pa, opts)?, load(pb, opts)?);
            let kind: MorphismKind = (*kind).into();
            let forward = find_embedding(&sa, &sb, kind, cap)?;
            let backward = find_embedding(&sb, &sa, kind, cap)?;
            let holds = forward.is_some() && backward.is_some();
            Ok(emit(
                json!({
                    "kind": kind,
                    "bi_embeddable": holds,
                    "forward": forward.map(|m| m.to_named(&sa, &sb)),
                    "backward": backward.map(|m| m.to_named(&sb, &sa)),
                }),
                if holds { EXIT_OK } else { EXIT_NEGATIVE },
            ))
        }
        Command::Harness(h) => run_harness(h, g, opts),
        Command::Sample {
            count,
            max_points,
            max_lines,
            density,
            linear,
        } => {
            if !(0.0..=1.0).contains(density) {
                return Err(Failure::input("--density must lie in [0, 1]"));
            }
            let params = SampleParams {
                max_points: *max_points,
                max_lines: *max_lines,
                density: *density,
                linear: *linear,
            };
            let structures = sample(g.seed, *count, params);
            let value = if *count == 1 {
                structure_to_value(&structures[0])
            } else {
                Value::Array(structures.iter().map(structure_to_value).collect())
            };
            Ok(emit(value, EXIT_OK))
        }
    }
}

fn run_harness(h: &HarnessCommand, g: &GlobalArgs, opts: ParseOptions) -> Result<Output, Failure> {
    let budget = g.budget as usize;
    match h {
        HarnessCommand::Spb {
            encoder,
            instances,
            kind,
        } => {
            let enc = encoder_by_name(encoder)?;
            let inst = match instances {
                Some(dir) => load_instances(dir, opts)?,
                None => fixtures::all().into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
            };
            let report = spb_check(
                enc.as_ref(),
                &inst,
                HarnessOptions {
                    kind: (*kind).into(),
                    node_cap: g.node_cap,
                    jobs: g.jobs as usize,
                    ..Default::default()
                },
            )?;
            let code = if report.checks.iter().any(|v| v.status == Status::Fail) {
                EXIT_NEGATIVE
            } else if !report.passed {
                EXIT_RESOURCE
            } else {
                EXIT_OK
            };
            Ok(Output {
                text: to_json(&report),
                code,
            })
        }
        HarnessCommand::Restriction { a, b, n, m, kind } => {
            let (sa, sb) = (load(a, opts)?, load(b, opts)?);
            let limits = SearchLimits::default().with_cap(g.node_cap);
            let report = check_restriction(&sa, &sb, *n, *m, (*kind).into(), budget, limits)?;
            let code = if report.passed { EXIT_OK } else { EXIT_NEGATIVE };
            Ok(Output {
                text: to_json(&report),
                code,
            })
        }
        HarnessCommand::Extend {
            a,
            b,
            morphism,
            n,
            mode,
        } => {
            let (sa, sb) = (load(a, opts)?, load(b, opts)?);
            let f = match morphism {
                Some(path) => {
                    let p = path.to_string_lossy();
                    let text = read_text(&p)?;
                    let named: NamedMorphism = serde_json::from_str(&text).map_err(|e| {
                        format_error(&p, &FormatError::from(e))
                    })?;
                    named
                        .resolve(&sa, &sb)
                        .ok_or_else(|| Failure::input(format!("{p}: morphism names do not match the structures")))?
                }
                None => crate::morphism::Morphism::identity(&sa, MorphismKind::LatticeEmbedding),
            };
            let mode: ExtensionMode = (*mode).into();
            let ta = extend(&sa, *n, mode, budget).map_err(|e| Failure::input(e.to_string()))?;
            let tb = extend(&sb, *n, mode, budget).map_err(|e| Failure::input(e.to_string()))?;
            if ta.is_truncated() || tb.is_truncated() {
                return Err(Failure::resource(format!("stage {n} exceeds the element budget {budget}")));
            }
            let ext = extend_embedding(&f, &ta, &tb, *n)?;
            let (s1, s2) = (ta.last(), tb.last());
            Ok(emit(
                json!({
                    "morphism": ext.morphism.to_named(s1, s2),
                    "certificate": ext.certificate,
                }),
                EXIT_OK,
            ))
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit code. Results go to `--out` or standard output, diagnostics to
/// standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli) {
        Ok(out) => {
            let written = match &cli.global.out {
                Some(path) => fs::write(path, &out.text).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout()
                        .write_all(out.text.as_bytes())
                        .map_err(|e| format!("stdout: {e}"))
                }
            };
            match written {
                Ok(()) => out.code,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    EXIT_INPUT
                }
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_are_input_errors() {
        assert_eq!(run(["freeplane", "validate", "fixture:fano", "--bogus"]), EXIT_INPUT);
        assert_eq!(run(["freeplane", "extend", "fixture:fano", "--budget", "0"]), EXIT_INPUT);
    }
}
