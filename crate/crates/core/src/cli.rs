//! The `mhsn` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::complex::{io as cio, LaplacianVariant, SimplicialComplex};
use crate::dictionary::{DictionaryKind, MultiscaleDictionary, ScaleStack};
use crate::error::{Error, Result};
use crate::featurize::{self, io as fio, PointCloud, TopologicalConfig};
use crate::graph::Graph;
use crate::learn::{self, ModelSpec, Target, TrainedModel};
use crate::partition::BipartitionTree;
use crate::scattering::{self, Pooling, ScatterConfig};
use crate::synth;
use crate::verify::{self, Outcome, SuiteConfig};

#[derive(Debug, Parser)]
#[command(name = "mhsn", version, about = "Multiscale Hodge scattering on simplicial complexes")]
pub struct Cli {
    /// Seed for every random choice (fold shuffles, synthetic data, checks).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a complex bundle from simplices, edges, a TU corpus or points.
    Build(BuildArgs),
    /// Write the hierarchical bipartition tree as JSON.
    Tree(TreeArgs),
    /// Write a multiscale dictionary as CSV.
    Dict(DictArgs),
    /// Scattering features of signals on a bundle.
    Scatter(ScatterArgs),
    /// Generate features or signals.
    #[command(subcommand)]
    Features(FeaturesCommand),
    /// Fit a model on all rows and save it.
    Train(TrainArgs),
    /// Cross-validate a model spec, or score a saved model.
    Eval(EvalArgs),
    /// Run the property checks on a bundle.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
pub struct BuildArgs {
    /// Simplex list: one simplex per line, vertex ids separated by spaces or commas.
    #[arg(long, group = "source")]
    pub simplices: Option<PathBuf>,
    /// Edge list; the clique complex is built up to --max-dim.
    #[arg(long, group = "source")]
    pub edges: Option<PathBuf>,
    /// Point cloud CSV (x,y,z); the kNN clique complex is built.
    #[arg(long, group = "source")]
    pub points: Option<PathBuf>,
    /// TU corpus directory (requires --name).
    #[arg(long, group = "source", requires = "name")]
    pub tu: Option<PathBuf>,
    /// TU dataset name.
    #[arg(long)]
    pub name: Option<String>,
    /// Graph index within the TU corpus (0-based).
    #[arg(long, default_value_t = 0)]
    pub graph: usize,
    #[arg(long, default_value_t = 5)]
    pub knn: usize,
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ComplexArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub kappa: usize,
    #[arg(long, default_value = "combinatorial")]
    pub laplacian: LaplacianVariant,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[command(flatten)]
    pub complex: ComplexArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DictArgs {
    #[command(flatten)]
    pub complex: ComplexArgs,
    #[arg(long, default_value = "ghwt")]
    pub dict: DictionaryKind,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ScatterOpts {
    /// Largest scale J (uses the J+1 finest levels).
    #[arg(short = 'J', long = "max-scale", default_value_t = 4)]
    pub j_max: usize,
    /// Largest order M.
    #[arg(short = 'M', long = "max-order", default_value_t = 2)]
    pub max_order: usize,
    /// Largest moment Q.
    #[arg(short = 'Q', long = "max-moment", default_value_t = 4)]
    pub max_moment: usize,
    /// global, none, local (pool each path at its last scale) or local:<j>.
    #[arg(long, default_value = "global")]
    pub pooling: Pooling,
    #[arg(long, default_value = "ghwt")]
    pub dict: DictionaryKind,
}

impl ScatterOpts {
    fn config(&self) -> ScatterConfig {
        ScatterConfig::new(self.j_max, self.max_order, self.max_moment, self.pooling)
    }
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    #[command(flatten)]
    pub complex: ComplexArgs,
    #[command(flatten)]
    pub opts: ScatterOpts,
    /// Signals CSV, one signal per row.
    #[arg(long)]
    pub signals: PathBuf,
    /// Rows are vertex signals, averaged onto the κ-simplices first.
    #[arg(long)]
    pub lift: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum FeaturesCommand {
    /// Global scattering of node and edge descriptors for each graph of a TU corpus.
    Topological(TopologicalArgs),
    /// Scattering of distance, length, area and volume channels per snapshot.
    Geometric(GeometricArgs),
    /// Two-class localized signals on a bundle, with labels.
    Localized(LocalizedArgs),
}

#[derive(Debug, Args)]
pub struct TopologicalArgs {
    #[arg(long)]
    pub tu: PathBuf,
    #[arg(long)]
    pub name: String,
    #[command(flatten)]
    pub opts: ScatterOpts,
    #[arg(long, default_value = "combinatorial")]
    pub laplacian: LaplacianVariant,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Where to write the `id,label` file.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeometricArgs {
    /// Snapshot point clouds (x,y,z per line, same point order in each).
    #[arg(long, num_args = 1.., required = true)]
    pub points: Vec<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub knn: usize,
    /// Dimensions to use, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub kappa: Vec<usize>,
    #[command(flatten)]
    pub opts: ScatterOpts,
    #[arg(long, default_value = "combinatorial")]
    pub laplacian: LaplacianVariant,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LocalizedArgs {
    #[command(flatten)]
    pub complex: ComplexArgs,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Tree level of the supporting regions.
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub labels_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Logistic,
    KernelRidge,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub features: PathBuf,
    /// `id,label` file aligned with the feature rows.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_enum, default_value = "classification")]
    pub task: Task,
    /// Defaults to logistic for classification and kernel-ridge for regression.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    /// RBF width; defaults to 1 / number of features.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Choose λ (and γ) by cross-validated grid search.
    #[arg(long)]
    pub grid: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        let kind = self.model.unwrap_or(match self.task {
            Task::Classification => ModelKind::Logistic,
            Task::Regression => ModelKind::KernelRidge,
        });
        match (kind, self.task) {
            (ModelKind::Logistic, Task::Classification) => Ok(ModelSpec::Logistic { lambda: self.lambda, max_iter: self.max_iter, tol: self.tol }),
            (ModelKind::KernelRidge, Task::Regression) => Ok(ModelSpec::KernelRidge { lambda: self.lambda, gamma: self.gamma }),
            (ModelKind::Logistic, Task::Regression) => Err(Error::InvalidConfig("logistic regression is a classifier; use --task classification".into())),
            (ModelKind::KernelRidge, Task::Classification) => Err(Error::InvalidConfig("kernel ridge is a regressor; use --task regression".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Model JSON.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Per-fold metrics CSV of the cross-validation run.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Score this saved model on all rows instead of cross-validating.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub complex: ComplexArgs,
    /// Dictionaries to check; both by default.
    #[arg(long, value_delimiter = ',', default_value = "hglet,ghwt")]
    pub dict: Vec<DictionaryKind>,
    #[arg(short = 'J', long = "max-scale", default_value_t = 4)]
    pub j_max: usize,
    /// Random signals per check.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
}

/// Saved model with the class names its ids refer to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub spec: ModelSpec,
    pub classes: Option<Vec<String>>,
    pub features: usize,
    pub model: TrainedModel,
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn load_complex(args: &ComplexArgs) -> Result<SimplicialComplex> {
    let c = Bundle::load(&args.bundle)?.complex()?;
    if args.kappa as isize > c.kappa_max() {
        return Err(Error::DimensionOutOfRange { kappa: args.kappa, max_dim: c.kappa_max() });
    }
    Ok(c)
}

fn build_stack(c: &SimplicialComplex, args: &ComplexArgs, opts: &ScatterOpts) -> Result<(BipartitionTree, ScaleStack)> {
    let tree = BipartitionTree::build(c, args.kappa, args.laplacian)?;
    let d = MultiscaleDictionary::build(opts.dict, c, &tree, args.laplacian)?;
    let stack = d.scale_stack(opts.j_max)?;
    Ok((tree, stack))
}

fn fmt_row(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&v.to_string());
    }
    s.push('\n');
    s
}

fn table_text(meta: &[(String, String)], names: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(&names.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&fmt_row(r));
    }
    out
}

fn scatter_meta(command: &str, seed: u64, opts: &ScatterOpts, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let mut meta = vec![
        ("command".to_string(), command.to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("J".to_string(), opts.j_max.to_string()),
        ("M".to_string(), opts.max_order.to_string()),
        ("Q".to_string(), opts.max_moment.to_string()),
        ("pooling".to_string(), opts.pooling.to_string()),
        ("dictionary".to_string(), opts.dict.to_string()),
    ];
    meta.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    meta.push(("seed".to_string(), seed.to_string()));
    meta
}

fn labels_text(labels: &[String]) -> String {
    let mut s = String::from("id,label\n");
    for (i, l) in labels.iter().enumerate() {
        s.push_str(&format!("{i},{l}\n"));
    }
    s
}

fn cmd_build(a: &BuildArgs) -> Result<()> {
    let mut prov = BTreeMap::new();
    prov.insert("max_dim".to_string(), a.max_dim.to_string());
    let c = if let Some(p) = &a.simplices {
        prov.insert("source".into(), "simplices".into());
        prov.insert("path".into(), p.display().to_string());
        let list = cio::read_simplex_list(p)?;
        if list.is_empty() {
            return Err(Error::EmptyComplex);
        }
        SimplicialComplex::from_simplices(a.max_dim, &list)?
    } else if let Some(p) = &a.edges {
        prov.insert("source".into(), "edges".into());
        prov.insert("path".into(), p.display().to_string());
        let edges = cio::read_edge_list(p)?;
        SimplicialComplex::clique_complex(&Graph::from_edges(0, &edges), a.max_dim)
    } else if let Some(p) = &a.points {
        prov.insert("source".into(), "points".into());
        prov.insert("path".into(), p.display().to_string());
        prov.insert("knn".into(), a.knn.to_string());
        featurize::knn_complex(&fio::read_point_cloud(p)?, a.knn, a.max_dim)?
    } else {
        let dir = a.tu.as_ref().expect("source group is required");
        let name = a.name.as_deref().unwrap_or_default();
        prov.insert("source".into(), "tu".into());
        prov.insert("path".into(), dir.display().to_string());
        prov.insert("name".into(), name.to_string());
        prov.insert("graph".into(), a.graph.to_string());
        let ds = fio::read_tu(dir, name)?;
        let g = ds.graphs.get(a.graph).ok_or_else(|| Error::InvalidConfig(format!("graph {} not in corpus of {}", a.graph, ds.graphs.len())))?;
        prov.insert("label".into(), ds.labels[a.graph].to_string());
        SimplicialComplex::clique_complex(g, a.max_dim)
    };
    if c.is_empty() {
        return Err(Error::EmptyComplex);
    }
    let b = Bundle::new(&c, prov);
    let names = ["nodes", "edges", "triangles", "tetrahedra"];
    let summary: Vec<String> = c
        .counts()
        .iter()
        .enumerate()
        .map(|(k, n)| match names.get(k) {
            Some(name) => format!("{n} {name}"),
            None => format!("{n} {k}-simplices"),
        })
        .collect();
    eprintln!("{}", summary.join(", "));
    emit(a.output.as_deref(), &b.to_json()?)
}

fn cmd_tree(a: &TreeArgs) -> Result<()> {
    let c = load_complex(&a.complex)?;
    let t = BipartitionTree::build(&c, a.complex.kappa, a.complex.laplacian)?;
    emit(a.output.as_deref(), &(t.to_json()? + "\n"))
}

fn cmd_dict(a: &DictArgs) -> Result<()> {
    let c = load_complex(&a.complex)?;
    let t = BipartitionTree::build(&c, a.complex.kappa, a.complex.laplacian)?;
    let d = MultiscaleDictionary::build(a.dict, &c, &t, a.complex.laplacian)?;
    emit(a.output.as_deref(), &d.to_csv())
}

fn cmd_scatter(a: &ScatterArgs, seed: u64) -> Result<()> {
    let c = load_complex(&a.complex)?;
    let cfg = a.opts.config();
    cfg.validate()?;
    let (_, stack) = build_stack(&c, &a.complex, &a.opts)?;
    let table = fio::read_table(&a.signals)?;
    let signals: Vec<Vec<f64>> = if a.lift {
        table.rows.iter().map(|r| featurize::lift_signal(&c, r).map(|mut l| l.swap_remove(a.complex.kappa))).collect::<Result<_>>()?
    } else {
        table.rows
    };
    let rows = scattering::scatter_batch(&stack, &signals, &cfg)?;
    let meta = scatter_meta(
        "scatter",
        seed,
        &a.opts,
        &[
            ("kappa", a.complex.kappa.to_string()),
            ("laplacian", a.complex.laplacian.to_string()),
            ("bundle", a.complex.bundle.display().to_string()),
            ("signals", a.signals.display().to_string()),
            ("lift", a.lift.to_string()),
        ],
    );
    emit(a.output.as_deref(), &table_text(&meta, &scattering::feature_names(&stack, &cfg), &rows))
}

fn cmd_topological(a: &TopologicalArgs, seed: u64) -> Result<()> {
    let ds = fio::read_tu(&a.tu, &a.name)?;
    let cfg = TopologicalConfig { kind: a.opts.dict, variant: a.laplacian, scatter: a.opts.config() };
    cfg.scatter.validate()?;
    let rows: Vec<Vec<f64>> = ds.graphs.par_iter().map(|g| featurize::topological_features(g, &cfg)).collect::<Result<_>>()?;
    let base: Vec<String> = scattering::feature_layout(&cfg.scatter, 1, &vec![1; cfg.scatter.j_max + 1]).iter().map(|k| k.name()).collect();
    let mut names = Vec::new();
    for ch in ["node_ecc", "node_clust", "edge_ecc", "edge_adj"] {
        names.extend(base.iter().map(|b| format!("{ch}_{b}")));
    }
    let meta = scatter_meta(
        "features topological",
        seed,
        &a.opts,
        &[("laplacian", a.laplacian.to_string()), ("tu", a.tu.display().to_string()), ("name", a.name.clone())],
    );
    emit(a.output.as_deref(), &table_text(&meta, &names, &rows))?;
    if let Some(p) = &a.labels_out {
        let labels: Vec<String> = ds.labels.iter().map(i64::to_string).collect();
        emit(Some(p), &labels_text(&labels))?;
    }
    Ok(())
}

fn cmd_geometric(a: &GeometricArgs, seed: u64) -> Result<()> {
    let snaps = a.points.iter().map(|p| fio::read_point_cloud(p)).collect::<Result<Vec<_>>>()?;
    let template = PointCloud::mean(&snaps)?;
    let max_dim = a.kappa.iter().copied().max().unwrap_or(0);
    let c = featurize::knn_complex(&template, a.knn, max_dim)?;
    let cfg = a.opts.config();
    cfg.validate()?;
    let mut stacks = Vec::new();
    for &k in &a.kappa {
        if k as isize > c.kappa_max() || k > 3 {
            return Err(Error::DimensionOutOfRange { kappa: k, max_dim: c.kappa_max().min(3) });
        }
        let args = ComplexArgs { bundle: PathBuf::new(), kappa: k, laplacian: a.laplacian };
        stacks.push((k, build_stack(&c, &args, &a.opts)?.1));
    }
    let mut names = Vec::new();
    for (k, stack) in &stacks {
        let base = scattering::feature_names(stack, &cfg);
        for ch in 0..stack.n {
            names.extend(base.iter().map(|b| format!("k{k}_c{ch}_{b}")));
        }
    }
    let rows: Vec<Vec<f64>> = snaps
        .par_iter()
        .map(|pc| {
            let sets = featurize::geometric_signals(&c, pc)?;
            let mut row = Vec::new();
            for (k, stack) in &stacks {
                for f in &sets[*k].signals {
                    row.extend(scattering::scatter(stack, f, &cfg)?.values);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let kappas: Vec<String> = a.kappa.iter().map(usize::to_string).collect();
    let meta = scatter_meta(
        "features geometric",
        seed,
        &a.opts,
        &[("kappa", kappas.join(",")), ("knn", a.knn.to_string()), ("laplacian", a.laplacian.to_string()), ("snapshots", a.points.len().to_string())],
    );
    emit(a.output.as_deref(), &table_text(&meta, &names, &rows))
}

fn cmd_localized(a: &LocalizedArgs, seed: u64) -> Result<()> {
    let c = load_complex(&a.complex)?;
    let t = BipartitionTree::build(&c, a.complex.kappa, a.complex.laplacian)?;
    if t.p_max() == 0 {
        return Err(Error::InvalidConfig("the complex has a single κ-simplex; nothing to localize".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, y) = synth::localized_signals(&t, a.level, a.samples, a.noise, &mut rng);
    let names: Vec<String> = (0..t.n).map(|i| format!("s{i}")).collect();
    let meta = vec![
        ("command".to_string(), "features localized".to_string()),
        ("kappa".to_string(), a.complex.kappa.to_string()),
        ("level".to_string(), a.level.to_string()),
        ("noise".to_string(), a.noise.to_string()),
        ("seed".to_string(), seed.to_string()),
    ];
    emit(a.output.as_deref(), &table_text(&meta, &names, &x))?;
    emit(Some(&a.labels_out), &labels_text(&y.iter().map(usize::to_string).collect::<Vec<_>>()))
}

struct Dataset {
    x: Vec<Vec<f64>>,
    y: Target,
    classes: Option<Vec<String>>,
}

fn load_dataset(m: &ModelArgs) -> Result<Dataset> {
    let table = fio::read_table(&m.features)?;
    let labels: Vec<String> = fio::read_labels(&m.labels)?.into_iter().map(|(_, l)| l).collect();
    if labels.len() != table.rows.len() {
        return Err(Error::InvalidConfig(format!(
            "{} has {} rows but {} has {} labels",
            m.features.display(),
            table.rows.len(),
            m.labels.display(),
            labels.len()
        )));
    }
    let (y, classes) = match m.task {
        Task::Classification => {
            let (t, names) = Target::classes_from_labels(&labels);
            (t, Some(names))
        }
        Task::Regression => (Target::values_from_labels(&labels)?, None),
    };
    Ok(Dataset { x: table.rows, y, classes })
}

fn cross_validate(m: &ModelArgs, data: &Dataset, seed: u64) -> Result<(ModelSpec, learn::CvReport)> {
    let spec = m.spec()?;
    if m.grid {
        learn::grid_search(&data.x, &data.y, &spec, m.folds, seed)
    } else {
        Ok((spec, learn::kfold_evaluate(&data.x, &data.y, &spec, m.folds, seed)?))
    }
}

fn print_summary(rep: &learn::CvReport) {
    for (name, mean, std) in rep.summary() {
        println!("{name}: {mean:.6} ± {std:.6} ({} folds)", rep.folds.len());
    }
    if !rep.skipped.is_empty() {
        println!("skipped folds: {:?}", rep.skipped);
    }
}

fn cmd_train(a: &TrainArgs, seed: u64) -> Result<()> {
    let data = load_dataset(&a.model)?;
    let (spec, rep) = cross_validate(&a.model, &data, seed)?;
    println!("model: {}", serde_json::to_string(&spec)?);
    print_summary(&rep);
    if let Some(p) = &a.report {
        emit(Some(p), &rep.to_csv())?;
    }
    let model = learn::train(&data.x, &data.y, &spec)?;
    let file = ModelFile { format: "mhsn-model".into(), spec, classes: data.classes, features: data.x.first().map_or(0, Vec::len), model };
    emit(Some(&a.output), &(serde_json::to_string_pretty(&file)? + "\n"))
}

fn cmd_eval(a: &EvalArgs, seed: u64) -> Result<()> {
    let data = load_dataset(&a.model)?;
    if let Some(p) = &a.model_file {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let file: ModelFile = serde_json::from_str(&text)?;
        if data.x.first().is_some_and(|r| r.len() != file.features) {
            return Err(Error::LengthMismatch { expected: file.features, got: data.x[0].len() });
        }
        // map labels through the saved class names
        let y = match (&data.y, &file.classes, &data.classes) {
            (Target::Classes(ids), Some(saved), Some(names)) => Target::Classes(
                ids.iter()
                    .map(|&i| saved.iter().position(|s| *s == names[i]).unwrap_or(usize::MAX))
                    .collect(),
            ),
            (y, _, _) => y.clone(),
        };
        let metric = learn::evaluate(&file.model, &data.x, &y);
        let text = match metric {
            learn::Metric::Accuracy(acc) => format!("accuracy: {acc:.6}\n"),
            learn::Metric::Regression { mae, rmse } => format!("mae: {mae:.6}\nrmse: {rmse:.6}\n"),
        };
        print!("{text}");
        if let Some(r) = &a.report {
            emit(Some(r), &text)?;
        }
        return Ok(());
    }
    let (spec, rep) = cross_validate(&a.model, &data, seed)?;
    println!("model: {}", serde_json::to_string(&spec)?);
    print_summary(&rep);
    if let Some(p) = &a.report {
        emit(Some(p), &rep.to_csv())?;
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> Result<bool> {
    let c = load_complex(&a.complex)?;
    let cfg = SuiteConfig { kappa: a.complex.kappa, variant: a.complex.laplacian, j_max: a.j_max, samples: a.samples };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = verify::run_suite(&c, &a.dict, &cfg, &mut rng)?;
    for ch in &checks {
        println!("{ch}");
    }
    Ok(checks.iter().all(|c| c.outcome != Outcome::Fail))
}

/// Runs a parsed command; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Build(a) => cmd_build(a)?,
        Command::Tree(a) => cmd_tree(a)?,
        Command::Dict(a) => cmd_dict(a)?,
        Command::Scatter(a) => cmd_scatter(a, cli.seed)?,
        Command::Features(FeaturesCommand::Topological(a)) => cmd_topological(a, cli.seed)?,
        Command::Features(FeaturesCommand::Geometric(a)) => cmd_geometric(a, cli.seed)?,
        Command::Features(FeaturesCommand::Localized(a)) => cmd_localized(a, cli.seed)?,
        Command::Train(a) => cmd_train(a, cli.seed)?,
        Command::Eval(a) => cmd_eval(a, cli.seed)?,
        Command::Verify(a) => return cmd_verify(a, cli.seed),
    }
    Ok(true)
}

/// Entry point for the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
