use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use confmodel::conditions::{self, AlphaRule, G1Budget, SandwichInputs, Thresholds};
use confmodel::harness::{self, CltThresholds, DegreeMode, GraphSource};
use confmodel::martingale::{self, Budget, DeltaEstimator, McLeishConfig};
use confmodel::rng::{self, tag};
use confmodel::summary;
use confmodel::switchings;
use confmodel::{DegreeLaw, DegreeSequence, Explorer, MultiGraph, StatisticKind, StatisticSpec};

use crate::config::{Command, Config, ConfigError};

pub type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

/// Output directory; with none, results go to stdout only.
pub struct Out {
    dir: Option<PathBuf>,
}

impl Out {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    fn file(&self, name: &str, body: impl FnOnce(&mut dyn Write) -> confmodel::Result<()>) -> Result<()> {
        if let Some(d) = &self.dir {
            let mut w = BufWriter::new(File::create(d.join(name))?);
            body(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    fn json(&self, name: &str, v: &impl Serialize) -> Result<()> {
        self.file(name, |w| {
            serde_json::to_writer_pretty(&mut *w, v)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

fn fail(msg: impl Into<String>) -> Box<dyn std::error::Error> {
    Box::new(ConfigError(msg.into()))
}

fn stat(cfg: &Config) -> Result<StatisticSpec> {
    Ok(cfg.require_text("stat")?.parse()?)
}

fn law(cfg: &Config) -> Result<Option<DegreeLaw>> {
    cfg.text("law").map(str::parse).transpose().map_err(Into::into)
}

fn ladder(cfg: &Config) -> Result<Vec<usize>> {
    let l: Vec<usize> = cfg
        .require_text("ladder")?
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| fail(format!("bad ladder entry `{t}`"))))
        .collect::<Result<_>>()?;
    if l.windows(2).any(|w| w[1] <= w[0]) || l.first() == Some(&0) {
        return Err(fail("ladder must be strictly increasing positive integers"));
    }
    Ok(l)
}

fn mode(cfg: &mut Config) -> Result<DegreeMode> {
    match cfg.default_text("mode", "annealed").as_str() {
        "annealed" => Ok(DegreeMode::Annealed),
        "quenched" => Ok(DegreeMode::Quenched),
        other => Err(fail(format!("unknown mode `{other}`"))),
    }
}

fn estimator(cfg: &mut Config) -> Result<DeltaEstimator> {
    Ok(cfg.default_text("estimator", "independent").parse()?)
}

fn positive(cfg: &mut Config, name: &'static str, default: u64) -> Result<usize> {
    let v = cfg.default_int(name, default);
    if v == 0 {
        return Err(fail(format!("`{name}` must be at least 1")));
    }
    Ok(v as usize)
}

/// Exactly one of `degrees`, `degrees_file`, or `law` with `n`.
fn fixed_degrees(cfg: &Config, seed: u64) -> Result<DegreeSequence> {
    let given = ["degrees", "degrees_file", "law"].iter().filter(|k| cfg.has(k)).count();
    if given != 1 {
        return Err(fail("give exactly one of --degrees, --degrees-file, --law"));
    }
    if let Some(d) = cfg.text("degrees") {
        if cfg.has("n") {
            return Err(fail("--n conflicts with --degrees"));
        }
        return Ok(DegreeSequence::parse_list(d)?);
    }
    if let Some(p) = cfg.text("degrees_file") {
        if cfg.has("n") {
            return Err(fail("--n conflicts with --degrees-file"));
        }
        return Ok(DegreeSequence::read_text(BufReader::new(File::open(p)?))?);
    }
    let law = law(cfg)?.expect("law given");
    let n = cfg.require_int("n")? as usize;
    Ok(law.generate(n, rng::derive2(seed, tag::DEGREES, 0))?)
}

fn source(cfg: &mut Config, seed: u64) -> Result<GraphSource> {
    let mode = mode(cfg)?;
    match law(cfg)? {
        Some(law) if !cfg.has("degrees") && !cfg.has("degrees_file") => {
            let n = cfg.require_int("n")? as usize;
            Ok(GraphSource::Law { law, n, mode })
        }
        _ => Ok(GraphSource::Fixed(fixed_degrees(cfg, seed)?)),
    }
}

fn edge_list(g: &MultiGraph) -> Result<String> {
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    Ok(String::from_utf8(buf)?)
}

fn degree_json(ds: &DegreeSequence) -> Value {
    let report = confmodel::validate(ds);
    json!({
        "n": ds.n(),
        "two_m": ds.two_m(),
        "d_max": ds.d_max(),
        "subcriticality_ratio": ds.subcriticality_ratio::<f64>().ok(),
        "validation": report,
    })
}

fn graph_json(g: &MultiGraph) -> Value {
    json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "self_loops": g.self_loop_count(),
        "multi_edges": g.multi_edge_count(),
        "simple": g.is_simple(),
        "components": g.components().len(),
        "max_component_size": g.max_component_size(),
    })
}

/// Run `cfg`; `Ok(true)` for a passing or verdict-free run.
pub fn run(mut cfg: Config, out: &Out) -> Result<bool> {
    let seed = cfg.default_int("seed", 0);
    let passed = match cfg.command {
        Command::Sample => sample(&mut cfg, seed, out)?,
        Command::Explore => explore(&mut cfg, seed, out)?,
        Command::Stats => stats(&mut cfg, seed, out)?,
        Command::Replicate => replicate(&mut cfg, seed, out)?,
        Command::Clt => clt(&mut cfg, seed, out)?,
        Command::Conditions => conditions(&mut cfg, seed, out)?,
        Command::Martingale => martingale(&mut cfg, seed, out)?,
        Command::SwitchTest => switch_test(&mut cfg, seed, out)?,
        Command::Simple => simple(&mut cfg, seed, out)?,
    };
    out.json("manifest.json", &cfg.manifest())?;
    Ok(passed)
}

fn sample(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let ds = fixed_degrees(cfg, seed)?;
    let g = Explorer::new(&ds)?.sample_graph(seed);
    out.file("graph.txt", |w| g.write_edge_list(w))?;
    out.json("summary.json", &json!({ "seed": seed, "degrees": degree_json(&ds), "graph": graph_json(&g) }))?;
    print!("{}", edge_list(&g)?);
    Ok(true)
}

fn explore(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let ds = fixed_degrees(cfg, seed)?;
    let trace = confmodel::explore(&ds, seed)?;
    let g = confmodel::build_graph(&trace, &ds)?;
    out.file("trace.csv", |w| trace.write_csv(w))?;
    out.file("graph.txt", |w| g.write_edge_list(w))?;
    out.json(
        "summary.json",
        &json!({
            "seed": seed,
            "steps": trace.len(),
            "empty_active_steps": trace.empty_active_steps,
            "degrees": degree_json(&ds),
            "graph": graph_json(&g),
        }),
    )?;
    print!("{}", edge_list(&g)?);
    Ok(true)
}

fn stats(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let spec = stat(cfg)?;
    let g = if let Some(p) = cfg.text("edges_file") {
        if ["degrees", "degrees_file", "law"].iter().any(|k| cfg.has(k)) {
            return Err(fail("--edges-file conflicts with a degree source"));
        }
        let n = cfg.require_int("n")? as usize;
        MultiGraph::read_edge_list(BufReader::new(File::open(p)?), n)?
    } else {
        let ds = fixed_degrees(cfg, seed)?;
        Explorer::new(&ds)?.sample_graph(seed)
    };
    let value: f64 = spec.evaluate(&g)?;
    out.json(
        "summary.json",
        &json!({
            "statistic": spec.name(),
            "value": value,
            "seed": seed,
            "lipschitz_edge_addition": spec.lipschitz_edge_addition(),
            "lipschitz_switching": spec.lipschitz_switching(),
            "graph": graph_json(&g),
        }),
    )?;
    println!("{value}");
    Ok(true)
}

fn replicate(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let spec = stat(cfg)?;
    let r = positive(cfg, "R", 1000)?;
    let src = source(cfg, seed)?;
    let res = harness::replicate(&spec, &src, r, seed)?;
    out.file("replications.csv", |w| res.write_csv(w))?;
    if !res.degenerate {
        out.file("plotdata.csv", |w| res.write_plotdata(w))?;
    }
    let passed = res.drop_rate_ok();
    out.json("summary.json", &json!({ "result": res, "passed": passed }))?;
    println!(
        "{} n={} R={} kept={} mean={} variance={} ks={}",
        res.statistic,
        res.n,
        res.r,
        res.kept,
        res.mean,
        res.variance,
        res.ks_distance.map_or("-".into(), |k| k.to_string())
    );
    Ok(passed)
}

fn clt(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let spec = stat(cfg)?;
    let law = law(cfg)?.ok_or_else(|| fail("`clt` needs --law"))?;
    let ladder = ladder(cfg)?;
    let r = positive(cfg, "R", 1000)?;
    let thresholds = CltThresholds {
        ks_final: cfg.default_float("ks_threshold", 0.06),
        skew_final: cfg.default_float("skew_threshold", 0.2),
        mode: mode(cfg)?,
    };
    let report = harness::clt_trend(&spec, &law, &ladder, r, seed, thresholds)?;
    for res in &report.results {
        out.file(&format!("replications_{}.csv", res.n), |w| res.write_csv(w))?;
        out.file(&format!("plotdata_{}.csv", res.n), |w| res.write_plotdata(w))?;
    }
    if let Some(last) = report.results.last() {
        out.file("replications.csv", |w| last.write_csv(w))?;
        out.file("plotdata.csv", |w| last.write_plotdata(w))?;
    }
    out.json("summary.json", &report)?;
    for p in &report.points {
        println!("n={} ks={:.4} skew={:.4} kurt={:.4}", p.n, p.ks, p.skewness, p.excess_kurtosis);
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(report.passed)
}

fn conditions(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let spec = stat(cfg)?;
    let law = law(cfg)?.ok_or_else(|| fail("`conditions` needs --law"))?;
    let ladder = ladder(cfg)?;
    let kappa = cfg.default_float("kappa", 0.5);
    let gamma = cfg.float("gamma");
    let alpha = if let Some(list) = cfg.text("alpha") {
        if cfg.has("A") || cfg.has("alpha_exponent") {
            return Err(fail("--alpha conflicts with --A and --alpha-exponent"));
        }
        let values = list
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| fail(format!("bad α entry `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        AlphaRule::Explicit { values }
    } else {
        let a = cfg.default_float("A", 5.0);
        let exponent = match (cfg.float("alpha_exponent"), gamma) {
            (Some(e), _) => e,
            (None, Some(g)) => match AlphaRule::from_gamma(a, g)? {
                AlphaRule::Power { exponent, .. } => cfg.default_float("alpha_exponent", exponent),
                AlphaRule::Explicit { .. } => unreachable!(),
            },
            (None, None) => cfg.default_float("alpha_exponent", 1.0 / 3.0),
        };
        AlphaRule::Power { a, exponent }
    };
    let thresholds = Thresholds {
        o_slope: cfg.default_float("o_slope", Thresholds::default().o_slope),
        omega_slack: cfg.default_float("omega_slack", Thresholds::default().omega_slack),
    };
    let budget = G1Budget {
        replications: positive(cfg, "R", 500)?,
        cn: Budget {
            prefixes: positive(cfg, "P", 200)?,
            completions: positive(cfg, "S", 100)?,
            estimator: estimator(cfg)?,
        },
        grid_points: positive(cfg, "grid_points", 32)?,
    };
    let sandwich = match (cfg.float("epsilon"), cfg.float("sandwich_m")) {
        (Some(e), Some(m)) => Some((e, m)),
        (None, None) => None,
        _ => return Err(fail("the sandwich needs both --epsilon and --sandwich-m")),
    };
    let suscept = match cfg.float("susceptibility_a") {
        None => None,
        Some(a) => {
            let StatisticKind::Susceptibility { p } = spec.kind() else {
                return Err(fail("--susceptibility-a needs a susceptibility statistic"));
            };
            let g = gamma.ok_or_else(|| fail("--susceptibility-a needs --gamma"))?;
            Some(conditions::check_susceptibility_conditions(g, a, *p, kappa)?)
        }
    };

    let g1 = conditions::g1_ladder(&spec, &law, &ladder, kappa, &alpha, budget, thresholds, seed)?;
    let variances: Vec<f64> = g1.rows.iter().map(|r| r.input.var_est).collect();
    let f1 = if ladder.len() >= 3 && variances.iter().all(|v| *v > 0.0) {
        Some(conditions::check_f1(&ladder, &variances, kappa, thresholds)?)
    } else {
        None
    };
    let sandwiches: Option<Vec<_>> = sandwich.map(|(epsilon, m_const)| {
        g1.rows
            .iter()
            .map(|r| {
                conditions::sandwich_check(SandwichInputs {
                    n: r.input.n,
                    m_n: r.input.m_n,
                    c_n: r.input.cn_est,
                    alpha_n: r.input.alpha_n,
                    d_max: r.input.d_max,
                    variance: r.input.var_est,
                    kappa,
                    epsilon,
                    m_const,
                })
            })
            .collect()
    });
    let kappa_bounds = gamma.and_then(|g| conditions::kappa_bounds(g).ok());
    let passed = g1.passed()
        && f1.as_ref().is_none_or(|f| f.passed)
        && sandwiches.as_ref().is_none_or(|s| s.iter().all(|x| x.all_hold))
        && suscept.as_ref().is_none_or(|s| s.passed);
    out.json(
        "summary.json",
        &json!({
            "g1": g1,
            "alpha_rule": alpha,
            "f1": f1,
            "sandwich": sandwiches,
            "kappa_bounds": kappa_bounds,
            "susceptibility": suscept,
            "passed": passed,
        }),
    )?;
    for r in &g1.rows {
        println!(
            "n={} Cn={:.4e} alpha={:.3} tail={:.4} var={:.4} G1a={:.4e} G1b={:.4e}",
            r.input.n, r.input.cn_est, r.input.alpha_n, r.input.tail_prob_est, r.input.var_est, r.ratio_g1a, r.ratio_g1b
        );
    }
    println!("{}", if passed { "PASS" } else { "FAIL" });
    Ok(passed)
}

fn martingale(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let spec = stat(cfg)?;
    let ds = fixed_degrees(cfg, seed)?;
    let task = cfg.default_text("task", "cn");
    let estimator = estimator(cfg)?;
    let completions = positive(cfg, "S", 100)?;
    match task.as_str() {
        "cn" => {
            let budget = Budget {
                prefixes: positive(cfg, "P", 200)?,
                completions,
                estimator,
            };
            let points = positive(cfg, "grid_points", 32)?;
            let bound = cfg.float("bound");
            let cn = martingale::estimate_cn(&spec, &ds, Some(&martingale::grid(ds.m(), points)), budget, seed)?;
            let passed = bound.is_none_or(|m| cn.c_n <= m.powi(4) + 3.0 * cn.c_n_std_err);
            out.file("delta_table.csv", |w| martingale::write_delta_table(&cn.table, w))?;
            out.json("summary.json", &json!({ "cn": cn, "bound": bound, "passed": passed }))?;
            println!("C_n={} (s.e. {}) at k={}", cn.c_n, cn.c_n_std_err, cn.argmax_k);
            Ok(passed)
        }
        "variance-identity" => {
            let budget = Budget {
                prefixes: positive(cfg, "P", 200)?,
                completions,
                estimator,
            };
            let r = positive(cfg, "R", 5000)?;
            let rep = martingale::variance_identity_check(&spec, &ds, r, budget, seed)?;
            out.file("delta_table.csv", |w| martingale::write_delta_table(&rep.table, w))?;
            out.json("summary.json", &rep)?;
            println!(
                "sum E D^2={} variance={} combined s.e.={} {}",
                rep.sum_delta_sq,
                rep.variance,
                rep.combined_std_err,
                if rep.passed { "PASS" } else { "FAIL" }
            );
            Ok(rep.passed)
        }
        "mcleish" => {
            let mc = McLeishConfig {
                replications: positive(cfg, "R", 200)?,
                variance_samples: positive(cfg, "variance_samples", 2000)?,
                completions,
                estimator,
                alpha: cfg.float("window_alpha"),
            };
            let d = martingale::mcleish_diagnostics(&spec, &ds, mc, seed)?;
            out.file("diagnostics.csv", |w| {
                writeln!(w, "rep_id,seed,max_abs_d,sum_d_sq,sum_d_sq_corrected,telescoped,f_value")?;
                for (i, r) in d.replications.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{}",
                        i,
                        r.seed,
                        r.max_abs_d,
                        r.sum_d_sq,
                        r.sum_d_sq_corrected.map_or(String::new(), |v| v.to_string()),
                        r.telescoped,
                        r.f_value
                    )?;
                }
                Ok(())
            })?;
            out.json("summary.json", &d)?;
            println!(
                "median max|D|={} mean sum D^2={} corrected={}",
                d.median_max_abs_d,
                d.mean_sum_d_sq,
                d.mean_sum_d_sq_corrected.map_or("-".into(), |v| v.to_string())
            );
            Ok(true)
        }
        other => Err(fail(format!("unknown martingale task `{other}`"))),
    }
}

fn switch_test(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let spec = stat(cfg)?;
    let ds = fixed_degrees(cfg, seed)?;
    let test = cfg.default_text("test", "switching");
    let trials = cfg.default_int("trials", 10_000) as usize;
    let declared = match test.as_str() {
        "switching" => spec.lipschitz_switching(),
        "edge-addition" => spec.lipschitz_edge_addition(),
        other => return Err(fail(format!("unknown Lipschitz test `{other}`"))),
    };
    let bound = match cfg.float("bound") {
        Some(b) => b,
        None => {
            let b = declared.ok_or_else(|| fail(format!("`{}` declares no constant; give --bound", spec.name())))?;
            cfg.default_float("bound", b)
        }
    };
    let max_len = cfg.int("construct_max_len").map(|l| l as usize);
    let (report, passed) = if test == "switching" {
        let r = switchings::test_switching_lipschitz(&spec, &ds, bound, trials, seed)?;
        let ok = r.passed();
        (serde_json::to_value(r)?, ok)
    } else {
        let r = switchings::test_edge_addition_lipschitz(&spec, &ds, bound, trials, seed)?;
        let ok = r.violation_count == 0;
        (serde_json::to_value(r)?, ok)
    };
    let constructed = max_len
        .map(|l| switchings::constructed_violation(&spec, bound, l))
        .transpose()?
        .flatten();
    let passed = passed && constructed.is_none();
    out.json(
        "summary.json",
        &json!({
            "test": test,
            "report": report,
            "constructed_violation": constructed,
            "passed": passed,
        }),
    )?;
    println!(
        "{} {} bound={} max_increment={} violations={}{}",
        spec.name(),
        test,
        bound,
        report["max_increment"],
        report["violation_count"],
        constructed
            .as_ref()
            .map_or(String::new(), |w| format!(" constructed increment={}", w.increment()))
    );
    Ok(passed)
}

fn simple(cfg: &mut Config, seed: u64, out: &Out) -> Result<bool> {
    let max_attempts = positive(cfg, "max_attempts", 1000)?;
    let r = positive(cfg, "R", 1000)?;
    if cfg.has("stat") {
        let spec = stat(cfg)?;
        let src = source(cfg, seed)?;
        let res = harness::replicate_simple(&spec, &src, r, max_attempts, seed)?;
        out.file("replications.csv", |w| res.conditioned.write_csv(w))?;
        if !res.conditioned.degenerate {
            out.file("plotdata.csv", |w| res.conditioned.write_plotdata(w))?;
        }
        out.json("summary.json", &res)?;
        println!(
            "acceptance={} mean={} variance={} ks(conditioned)={} ks(unconditioned)={}",
            res.acceptance_rate,
            res.conditioned.mean,
            res.conditioned.variance,
            res.conditioned.ks_distance.map_or("-".into(), |k| k.to_string()),
            res.ks_unconditioned.map_or("-".into(), |k| k.to_string())
        );
        return Ok(res.conditioned.drop_rate_ok());
    }
    if cfg.has("mode") {
        return Err(fail("--mode needs --stat"));
    }
    let ds = fixed_degrees(cfg, seed)?;
    let run = harness::rejection_run(&ds, r, rng::derive(seed, 1))?;
    let accepted = run.accepted.len();
    let ci = summary::wilson_interval(accepted, r, 1.959_963_984_540_054);
    let sample = harness::condition_on_simple(&ds, seed, max_attempts)?;
    out.file("graph.txt", |w| sample.graph.write_edge_list(w))?;
    out.json(
        "summary.json",
        &json!({
            "attempts": r,
            "accepted": accepted,
            "acceptance_rate": run.acceptance_rate(),
            "acceptance_ci95": ci,
            "sample_attempts": sample.attempts,
            "graph": graph_json(&sample.graph),
        }),
    )?;
    println!("acceptance={} ({accepted}/{r})", run.acceptance_rate());
    print!("{}", edge_list(&sample.graph)?);
    Ok(true)
}
