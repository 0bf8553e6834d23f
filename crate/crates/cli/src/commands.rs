use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use opfactor::analysis::{
    collapse_certificate, distortion_search, factorization_report, factorization_report_with,
    lower_bound_solve, ReportOptions,
};
use opfactor::bitgraphs::{build_binary_tree_capped, build_diamond_capped, build_laakso_capped};
use opfactor::embeddings::{
    baudier_glued_embedding, bourgain_tree_embedding, js_vertex_embedding, l1_unit_node_vectors,
    random_sign_node_vectors, GluedEmbeddingPlan,
};
use opfactor::io::{sig17, to_json_string, with_provenance, Provenance};
use opfactor::spaces::{
    modulus_of_convexity, AnalyticL2Delta, ConstantDelta, DeltaProvider, LpExponent, NumericalDelta,
    SeparatedBasisWitness,
};
use opfactor::{BitString, Embedding, Error, Family, MetricGraph, NormedOperator, NormedSpace, Result, SearchBudget};
use serde::de::DeserializeOwned;

use crate::{Budget, Cli, Command, Construction, GraphSource};

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Argument(format!("{}: {e}", path.display()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Argument(format!("{}: malformed JSON: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| io_error(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Argument(format!("stdout: {e}"))),
    }
}

fn emit_json(cli: &Cli, value: serde_json::Value) -> Result<()> {
    let caps = serde_json::to_value(cli.caps())?;
    let stamped = with_provenance(value, &Provenance::new(cli.seed, caps))?;
    emit(&cli.out, &to_json_string(&stamped)?)
}

fn space(name: &str, dim: usize) -> Result<NormedSpace> {
    let LpExponent(p) = name.parse()?;
    NormedSpace::lp(dim, p)
}

fn budget(b: &Budget) -> SearchBudget {
    SearchBudget {
        restarts: b.restarts,
        steps: b.steps,
    }
}

fn generate(cli: &Cli, family: Family, n: usize) -> Result<MetricGraph> {
    match family {
        Family::Tree => build_binary_tree_capped(n, cli.tree_cap),
        Family::Diamond => build_diamond_capped(n, cli.diamond_cap),
        Family::Laakso => build_laakso_capped(n, cli.laakso_cap),
        Family::Custom => Err(Error::Argument("custom graphs are read with --graph".into())),
    }
}

fn load_graph(cli: &Cli, source: &GraphSource) -> Result<MetricGraph> {
    match (&source.graph, source.family, source.n) {
        (Some(path), _, _) => read_json(path),
        (None, Some(family), Some(n)) => generate(cli, family, n),
        _ => Err(Error::Argument("give either --graph or both --family and --n".into())),
    }
}

fn load_operator(path: &Option<PathBuf>, domain: &NormedSpace) -> Result<NormedOperator> {
    match path {
        Some(p) => read_json(p),
        None => Ok(NormedOperator::identity(domain)),
    }
}

fn delta_provider(name: &str, op: &NormedOperator, b: &Budget, seed: u64) -> Result<Box<dyn DeltaProvider>> {
    if name == "l2-analytic" {
        return Ok(Box::new(AnalyticL2Delta));
    }
    if name == "numerical" {
        return Ok(Box::new(NumericalDelta::new(op.clone(), budget(b), seed)));
    }
    if let Some(v) = name.strip_prefix("constant:") {
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Argument(format!("bad constant modulus {name:?}")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Argument(format!("constant modulus {v} outside [0, 1]")));
        }
        return Ok(Box::new(ConstantDelta(v)));
    }
    Err(Error::Argument(format!(
        "unknown modulus {name:?} (use l2-analytic, constant:<v> or numerical)"
    )))
}

/// Scales `f` so that its Lipschitz constant is at most 1.
fn normalized(f: &Embedding) -> Result<(Embedding, f64)> {
    let id = NormedOperator::identity(f.space());
    let lip = factorization_report(f.graph(), f, &id)?.lip;
    if lip <= 1.0 {
        return Ok((f.clone(), 1.0));
    }
    let mut factor = 1.0 / lip;
    loop {
        let g = f.scaled(factor);
        if factorization_report(g.graph(), &g, &id)?.lip <= 1.0 {
            return Ok((g, factor));
        }
        factor *= 1.0 - f64::EPSILON;
    }
}

fn embed(cli: &Cli, cmd: &Command) -> Result<Embedding> {
    let Command::Embed {
        construction,
        source,
        space: space_name,
        dim,
        basis,
        node_vectors,
        random_signs,
        level,
    } = cmd
    else {
        unreachable!()
    };
    match construction {
        Construction::Js => {
            let g = Arc::new(load_graph(cli, source)?);
            let len = g.vertex(0).len();
            let basis: Vec<Vec<f64>> = match basis {
                Some(p) => read_json(p)?,
                None => (0..len)
                    .map(|i| (0..len).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect(),
            };
            let dim = basis.first().map_or(len, Vec::len);
            js_vertex_embedding(g, &basis, &space(space_name, dim.max(1))?)
        }
        Construction::Bourgain => {
            let n = source
                .n
                .ok_or_else(|| Error::Argument("bourgain needs --n".into()))?;
            opfactor::error::check_cap("tree depth", n, cli.tree_cap, "--tree-cap")?;
            if let Some(p) = node_vectors {
                let raw: BTreeMap<String, Vec<f64>> = read_json(p)?;
                let ys = raw
                    .into_iter()
                    .map(|(k, v)| Ok((k.parse::<BitString>()?, v)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                let dim = ys.values().next().map_or(1, Vec::len);
                bourgain_tree_embedding(n, &ys, &space(space_name, dim)?)
            } else if *random_signs {
                let dim = dim.ok_or_else(|| Error::Argument("--random-signs needs --dim".into()))?;
                let s = space(space_name, dim)?;
                bourgain_tree_embedding(n, &random_sign_node_vectors(n, &s, cli.seed), &s)
            } else {
                let (s, ys) = l1_unit_node_vectors(n);
                bourgain_tree_embedding(n, &ys, &s)
            }
        }
        Construction::Baudier => {
            let level = level.ok_or_else(|| Error::Argument("baudier needs --level".into()))?;
            let plan = GluedEmbeddingPlan::bourgain_l1_capped(level, cli.level_cap)?;
            baudier_glued_embedding(&plan).materialize()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen { family, n } => {
            let g = generate(cli, *family, *n)?;
            emit_json(cli, g.to_json()?)
        }
        Command::Dist { source } => {
            let g = load_graph(cli, source)?;
            let mut out = Vec::new();
            g.distances()?
                .write_csv(g.vertices(), &mut out)
                .map_err(|e| Error::Argument(e.to_string()))?;
            emit(&cli.out, &String::from_utf8(out).expect("ASCII CSV"))
        }
        cmd @ Command::Embed { .. } => {
            let f = embed(cli, cmd)?;
            emit_json(cli, f.to_json()?)
        }
        Command::Report {
            embedding,
            operator,
            sample_threshold,
            sample_size,
        } => {
            let f: Embedding = read_json(embedding)?;
            let op = load_operator(operator, f.space())?;
            let opts = ReportOptions {
                sample_threshold: *sample_threshold,
                sample_size: *sample_size,
                seed: cli.seed,
            };
            let r = factorization_report_with(f.graph(), &f, &op, opts)?;
            emit_json(cli, serde_json::to_value(r)?)
        }
        Command::Certify {
            embedding,
            operator,
            d,
            modulus,
            budget: b,
        } => {
            let f: Embedding = read_json(embedding)?;
            let op = load_operator(operator, f.space())?;
            let (g, scale) = normalized(&f)?;
            let d = match d {
                Some(d) => *d,
                None => factorization_report(g.graph(), &g, &op)?
                    .distortion
                    .ok_or_else(|| Error::Precondition("A∘f collapses a pair; no finite D".into()))?,
            };
            let delta = delta_provider(modulus, &op, b, cli.seed)?;
            let c = collapse_certificate(&g, &op, d, delta.as_ref())?;
            let mut v = serde_json::to_value(c)?;
            v["scale"] = serde_json::json!(scale);
            emit_json(cli, v)
        }
        Command::Modulus {
            operator,
            space: space_name,
            dim,
            eps,
            budget: b,
        } => {
            let op = match operator {
                Some(p) => read_json(p)?,
                None => {
                    let s = space(
                        space_name.as_deref().unwrap_or("l2"),
                        dim.unwrap_or(2),
                    )?;
                    NormedOperator::identity(&s)
                }
            };
            let grid = eps
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Argument(format!("bad ε value {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut csv = String::from("eps,delta,sup_midpoint\n");
            for e in grid {
                let m = modulus_of_convexity(&op, e, budget(b), cli.seed)?;
                csv.push_str(&format!("{},{},{}\n", sig17(e), sig17(m.delta), sig17(m.sup_midpoint)));
            }
            emit(&cli.out, &csv)
        }
        Command::Witness {
            vectors,
            space: space_name,
            budget: b,
        } => {
            let vs: Vec<Vec<f64>> = read_json(vectors)?;
            let dim = vs.first().map_or(1, Vec::len);
            let w = SeparatedBasisWitness::compute(vs, &space(space_name, dim)?, budget(b), cli.seed)?;
            emit_json(cli, serde_json::to_value(w)?)
        }
        Command::Search {
            source,
            space: space_name,
            dim,
            budget: b,
        } => {
            let g = load_graph(cli, source)?;
            let r = distortion_search(&g, &space(space_name, *dim)?, budget(b), cli.seed)?;
            emit_json(
                cli,
                serde_json::json!({
                    "embedding": r.embedding.to_json()?,
                    "report": serde_json::to_value(&r.report)?,
                    "restart": r.restart,
                }),
            )
        }
        Command::Bound {
            family,
            n,
            modulus,
            operator,
            budget: b,
        } => {
            let op = match operator {
                Some(p) => read_json(p)?,
                None => NormedOperator::identity(&NormedSpace::l2(2)),
            };
            if modulus == "numerical" && operator.is_none() {
                return Err(Error::Argument("the numerical modulus needs --operator".into()));
            }
            let delta = delta_provider(modulus, &op, b, cli.seed)?;
            let d = lower_bound_solve(*family, *n, delta.as_ref())?;
            emit(&cli.out, &format!("{}\n", sig17(d)))
        }
    }
}
