use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use loose3::absorbing::{complete_embedding_with_budget, minimal_instance, PairingPolicy, ADAPTIVE_BUDGET};
use loose3::assignment::{assign_clusters, verify_assignment, AssignmentProblem, Mode, RootedTree};
use loose3::constructions::{
    ap_host, ap_hypertree, collapse as collapse_complex, low_codegree_host, parity_codegree_host, pm_free_host,
    verify_trace, Complex2, Construction,
};
use loose3::embedder::{exact_embed, pipeline, EmbedQuery, PipelineParams};
use loose3::loose_tree::{
    binary_loose_tree, find_valid_ordering, has_berge_cycle, is_loose_tree, is_valid_layering, layering, loose_path,
    random_loose_tree,
};
use loose3::regularity::{synthetic_regular_host, DensityMap, Partition, PlantedSpec};
use loose3::{verify_embedding, Hypergraph3, LooseTree, Rational, Scalar};

use crate::output::SCHEMA;
use crate::Cli;

fn header(cli: &Cli, command: &str) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("seed".into(), json!(cli.seed));
    m
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_host(path: &Path) -> Result<Hypergraph3> {
    Hypergraph3::from_h3(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_tree(path: &Path) -> Result<LooseTree> {
    LooseTree::from_lt(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Path,
    Binary,
    RandomTree,
    PmFree,
    Parity,
    LowCodeg,
    ApTree,
    ApHost,
    Planted,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Output file; the metadata goes to `<out>.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    /// Size of the special side for `low-codeg`.
    #[arg(long)]
    pub a: Option<usize>,
    /// Forbidden prefix length for `ap-host`.
    #[arg(long)]
    pub f: Option<usize>,
    /// Planted host: clusters, cluster size, exceptional vertices.
    #[arg(long, default_value_t = 7)]
    pub t: usize,
    #[arg(long, default_value_t = 40)]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub exceptional: usize,
    /// Planted host: density on consecutive cluster triples.
    #[arg(long, default_value_t = 0.7)]
    pub dense: f64,
    /// Planted host: density on the other cluster triples.
    #[arg(long, default_value_t = 0.5)]
    pub sparse: f64,
    /// Planted host: density on triples not spread over three clusters.
    #[arg(long, default_value_t = 0.7)]
    pub noise: f64,
}

fn need(v: Option<usize>, flag: &str, kind: GenKind) -> Result<usize> {
    v.with_context(|| format!("{kind:?} needs --{flag}"))
}

fn construction_meta(c: &Construction) -> Value {
    json!({
        "construction": c.meta.construction,
        "params": c.meta.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "a_size": c.meta.a_side.len(),
        "b_size": c.meta.b_side.len(),
        "a_side": c.meta.a_side,
    })
}

pub fn gen(cli: &Cli, a: &GenArgs) -> Result<Value> {
    let kind = a.kind;
    let (text, format, n, edges, extra) = match kind {
        GenKind::Path | GenKind::Binary | GenKind::RandomTree => {
            let t = match kind {
                GenKind::Path => loose_path(need(a.n, "n", kind)?)?,
                GenKind::Binary => binary_loose_tree(need(a.levels, "levels", kind)?)?,
                _ => random_loose_tree(need(a.n, "n", kind)?, a.max_degree, cli.seed)?,
            };
            let extra = json!({"root": t.root(), "max_degree": t.max_degree()});
            (t.to_lt(), "LT v1", t.n(), t.edge_count(), extra)
        }
        GenKind::PmFree | GenKind::Parity | GenKind::LowCodeg | GenKind::ApHost => {
            let n = need(a.n, "n", kind)?;
            let c = match kind {
                GenKind::PmFree => pm_free_host(n)?,
                GenKind::Parity => parity_codegree_host(n)?,
                GenKind::LowCodeg => low_codegree_host(n, need(a.a, "a", kind)?)?,
                _ => ap_host(n, need(a.f, "f", kind)?)?,
            };
            (c.graph.to_h3(), "H3 v1", n, c.graph.edge_count(), construction_meta(&c))
        }
        GenKind::ApTree => {
            let c = ap_hypertree(need(a.n, "n", kind)?);
            let h = c.to_hypergraph();
            (h.to_h3(), "H3 v1", c.n, h.edge_count(), json!({"faces": c.faces.len()}))
        }
        GenKind::Planted => {
            let spec = PlantedSpec {
                t: a.t,
                m: a.m,
                exceptional: a.exceptional,
                densities: DensityMap::Consecutive { dense: a.dense, sparse: a.sparse },
                noise: a.noise,
            };
            let (h, part) = synthetic_regular_host(&spec, cli.seed)?;
            (h.to_h3(), "H3 v1", h.n(), h.edge_count(), json!({"spec": spec, "partition": part}))
        }
    };
    fs::write(&a.out, &text).with_context(|| format!("writing {}", a.out.display()))?;
    let mut meta = header(cli, "gen");
    meta.insert("kind".into(), json!(kind.to_possible_value().expect("no skipped variants").get_name()));
    meta.insert("format".into(), json!(format));
    meta.insert("n".into(), json!(n));
    meta.insert("edges".into(), json!(edges));
    if let Value::Object(x) = extra {
        meta.extend(x);
    }
    let mp = meta_path(&a.out);
    fs::write(&mp, serde_json::to_string_pretty(&Value::Object(meta.clone()))? + "\n")
        .with_context(|| format!("writing {}", mp.display()))?;
    meta.remove("partition");
    meta.remove("a_side");
    meta.insert("files".into(), json!([a.out.display().to_string(), mp.display().to_string()]));
    Ok(Value::Object(meta))
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub file: PathBuf,
}

fn table(rows: Vec<(&str, Value)>) -> Value {
    json!({
        "columns": ["check", "value"],
        "rows": rows.into_iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
    })
}

fn yes_no(b: bool) -> Value {
    json!(if b { "yes" } else { "no" })
}

pub fn check(cli: &Cli, a: &CheckArgs) -> Result<Value> {
    let text = read(&a.file)?;
    let header_len = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .map_or(0, |l| l.split_whitespace().count());
    let mut out = header(cli, "check");
    out.insert("file".into(), json!(a.file.display().to_string()));
    let rows = if header_len == 3 {
        out.insert("format".into(), json!("LT v1"));
        let t = LooseTree::from_lt(&text).with_context(|| format!("parsing {}", a.file.display()))?;
        let g = t.graph();
        vec![
            ("vertices", json!(t.n())),
            ("edges", json!(t.edge_count())),
            ("root", json!(t.root())),
            ("valid-ordering", json!("pass")),
            ("loose-tree", yes_no(is_loose_tree(g))),
            ("berge-cycle", yes_no(has_berge_cycle(g))),
            ("connected", yes_no(g.incidence_graph().vertices_connected())),
            ("max-degree", json!(t.max_degree())),
            ("layering", json!(if is_valid_layering(&t, &layering(&t)) { "pass" } else { "fail" })),
        ]
    } else {
        out.insert("format".into(), json!("H3 v1"));
        let h = Hypergraph3::from_h3(&text).with_context(|| format!("parsing {}", a.file.display()))?;
        let complex = Complex2 { n: h.n(), faces: h.edges().to_vec() };
        let collapsed = collapse_complex(&complex);
        let mut rows = vec![
            ("vertices", json!(h.n())),
            ("edges", json!(h.edge_count())),
            ("faces", json!(h.edge_count())),
            ("connected", yes_no(h.incidence_graph().vertices_connected())),
            ("berge-cycle", yes_no(has_berge_cycle(&h))),
            ("loose-tree", yes_no(is_loose_tree(&h))),
            ("valid-ordering", json!(if find_valid_ordering(&h).is_some() { "found" } else { "none" })),
            ("min-degree", json!(h.min_vertex_degree().ok())),
            ("max-degree", json!(h.max_vertex_degree())),
            ("min-codegree", json!(h.min_codegree().ok())),
        ];
        rows.push((
            "collapse",
            json!(match &collapsed {
                Some(tr) if tr.fallback_from.is_none() => "success",
                Some(_) => "success (fallback)",
                None => "failure",
            }),
        ));
        rows
    };
    out.insert("table".into(), table(rows));
    Ok(Value::Object(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbedMethod {
    Exact,
    Pipeline,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub host: PathBuf,
    #[arg(long, value_enum, default_value_t = EmbedMethod::Exact)]
    pub method: EmbedMethod,
    /// Metadata file of a planted host, for its cluster partition.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Without `--partition`: split the host into this many equal clusters.
    #[arg(long, default_value_t = 7)]
    pub clusters: usize,
}

pub fn embed(cli: &Cli, a: &EmbedArgs) -> Result<Value> {
    let tree = load_tree(&a.tree)?;
    let host = load_host(&a.host)?;
    let mut out = header(cli, "embed");
    out.insert("method".into(), serde_json::to_value(format!("{:?}", a.method).to_lowercase())?);
    match a.method {
        EmbedMethod::Exact => {
            let q = EmbedQuery { budget: cli.budget, ..EmbedQuery::new(&tree, &host) };
            let r = exact_embed(&q)?;
            let verified = r.embedding.as_ref().map(|e| verify_embedding(e, tree.graph(), &host));
            out.insert("status".into(), serde_json::to_value(r.status)?);
            out.insert("verified".into(), json!(verified));
            out.insert("embedding".into(), json!(r.embedding));
            out.insert("stats".into(), serde_json::to_value(&r.stats)?);
        }
        EmbedMethod::Pipeline => {
            let part = match &a.partition {
                Some(p) => {
                    let meta: Value = serde_json::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
                    serde_json::from_value::<Partition>(meta.get("partition").cloned().context("metadata has no partition")?)?
                }
                None => Partition::equal_split(host.n(), a.clusters),
            };
            let mut params = PipelineParams::<Rational>::desk(host.n(), cli.seed);
            if let Some(b) = cli.budget {
                params.absorb_budget = b;
            }
            match pipeline(&tree, &host, &part, &params) {
                Ok(o) => {
                    let verified = o.result.embedding.as_ref().map(|e| verify_embedding(e, tree.graph(), &host));
                    out.insert("status".into(), serde_json::to_value(o.result.status)?);
                    out.insert("verified".into(), json!(verified));
                    out.insert("embedding".into(), json!(o.result.embedding));
                    out.insert("stats".into(), serde_json::to_value(&o.result.stats)?);
                    out.insert("report".into(), serde_json::to_value(&o.report)?);
                }
                Err(e) => {
                    out.insert("status".into(), json!("failed"));
                    out.insert("stage".into(), serde_json::to_value(e.stage)?);
                    out.insert("detail".into(), json!(e.detail));
                    out.insert("report".into(), serde_json::to_value(&*e.report)?);
                }
            }
        }
    }
    Ok(Value::Object(out))
}

#[derive(Args, Debug)]
pub struct AssignArgs {
    /// A JSON assignment problem; overrides the flags below.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub tree: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub t: usize,
    /// Capacity of every cluster; defaults to the smallest that fits with room to spare.
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub root_cluster: usize,
    #[arg(long, default_value_t = 10)]
    pub piece_target: usize,
    #[arg(long, default_value_t = 0.05)]
    pub zeta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub nu: f64,
    #[arg(long)]
    pub best_effort: bool,
}

pub fn assign(cli: &Cli, a: &AssignArgs) -> Result<Value> {
    let p: AssignmentProblem<Rational> = match (&a.problem, &a.tree) {
        (Some(path), _) => serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?,
        (None, Some(path)) => {
            let tree = load_tree(path)?;
            let matched = 3 * (a.t / 3);
            let capacity = a.capacity.unwrap_or_else(|| (tree.n() * 3).div_ceil(2 * matched.max(1)) + 1);
            AssignmentProblem {
                t: a.t,
                capacities: vec![capacity; a.t],
                zeta: Rational::from_f64(a.zeta),
                nu: Rational::from_f64(a.nu),
                max_degree: tree.max_degree(),
                trees: vec![RootedTree { tree, root_cluster: a.root_cluster }],
                piece_target: a.piece_target,
                mode: if a.best_effort { Mode::BestEffort } else { Mode::Strict },
            }
        }
        (None, None) => bail!("assign needs --problem or --tree"),
    };
    let asg = assign_clusters(&p)?;
    let report = verify_assignment(&p, &asg);
    let mut out = header(cli, "assign");
    out.insert("t".into(), json!(p.t));
    out.insert("capacities".into(), json!(p.capacities));
    out.insert("loads".into(), json!(asg.loads));
    out.insert("pieces".into(), json!(asg.trace.len()));
    out.insert("max_spread".into(), json!(asg.ledger.max_spread()));
    out.insert("leftovers".into(), json!(asg.ledger.leftovers));
    out.insert("verified".into(), json!(report.is_ok()));
    out.insert("report".into(), serde_json::to_value(&report)?);
    out.insert("lost".into(), json!(asg.lost));
    out.insert("assignment".into(), json!(asg.a));
    Ok(Value::Object(out))
}

#[derive(Args, Debug)]
pub struct AbsorbDemoArgs {
    #[arg(long, value_enum, default_value_t = PolicyArg::Adaptive)]
    pub policy: PolicyArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Fixed,
    Adaptive,
}

pub fn absorb_demo(cli: &Cli, a: &AbsorbDemoArgs) -> Result<Value> {
    let inst = minimal_instance(cli.seed);
    let policy = match a.policy {
        PolicyArg::Fixed => PairingPolicy::Fixed,
        PolicyArg::Adaptive => PairingPolicy::Adaptive,
    };
    let done = complete_embedding_with_budget(
        &inst.host,
        &inst.phi0,
        &inst.tree,
        &inst.family,
        policy,
        cli.budget.unwrap_or(ADAPTIVE_BUDGET),
    )?;
    let mut out = header(cli, "absorb-demo");
    out.insert("policy".into(), serde_json::to_value(policy)?);
    out.insert("n".into(), json!(inst.host.n()));
    out.insert("host_edges".into(), json!(inst.host.edge_count()));
    out.insert("initially_embedded".into(), json!(inst.phi0.len()));
    out.insert("tuples".into(), json!(inst.family.tuples.len()));
    out.insert("verified".into(), json!(verify_embedding(&done.embedding, inst.tree.graph(), &inst.host)));
    out.insert("consumed".into(), json!(done.consumed));
    out.insert("nodes".into(), json!(done.nodes));
    out.insert("steps".into(), serde_json::to_value(&done.steps)?);
    out.insert("embedding".into(), json!(done.embedding));
    Ok(Value::Object(out))
}

#[derive(Args, Debug)]
pub struct CollapseArgs {
    /// Collapse the progression hypertree on this many vertices.
    #[arg(long, conflicts_with = "file")]
    pub n: Option<usize>,
    /// Collapse the faces of this `H3 v1` file instead.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

pub fn collapse(cli: &Cli, a: &CollapseArgs) -> Result<Value> {
    let c = match (a.n, &a.file) {
        (Some(n), _) => ap_hypertree(n),
        (None, Some(p)) => {
            let h = load_host(p)?;
            Complex2 { n: h.n(), faces: h.edges().to_vec() }
        }
        (None, None) => bail!("collapse needs --n or --file"),
    };
    let trace = collapse_complex(&c);
    let mut out = header(cli, "collapse");
    out.insert("n".into(), json!(c.n));
    out.insert("faces".into(), json!(c.faces.len()));
    out.insert("collapse".into(), json!(if trace.is_some() { "success" } else { "failure" }));
    if let Some(tr) = trace {
        out.insert("verified".into(), json!(verify_trace(&c, &tr)));
        out.insert("fallback_from".into(), json!(tr.fallback_from));
        out.insert("steps".into(), serde_json::to_value(&tr.steps)?);
    }
    Ok(Value::Object(out))
}
