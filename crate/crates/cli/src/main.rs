use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use latinlab::absorber::{
    build_rmbg, embed_t_absorber, expected_inventory, EmbedOptions, GadgetSupply, TemplateMode,
    CERTIFY_FLEX_LIMIT,
};
use latinlab::census::{conjecture_report, CensusLimits};
use latinlab::gadgets::{
    count_distinguishable_bridges, find_absorbing_gadgets, find_bridging_gadgets,
    find_twist_systems, twist, ColourPartition,
};
use latinlab::pipeline::{planted_instance, run_pipeline, PipelineConfig, PlantSpec, PlantedInstance};
use latinlab::stats::{run_experiment, ExperimentKind};
use latinlab::{
    latin_to_digraph, restrict_to_colours, sample_latin_rectangle, sample_latin_square, task_rng,
    LatinError, LatinSquare, SamplerConfig,
};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "latinlab", version, about = "Latin squares as coloured digraphs")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone, Serialize)]
struct SeedArg {
    #[arg(long, env = "LATINLAB_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
enum Command {
    /// Sample squares, rectangles (with --k) or planted instances (with --planted).
    Generate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Emit planted pipeline instances with this many vertices outside the absorber.
        #[arg(long, conflicts_with_all = ["n", "k"])]
        planted: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact transversal census of each square in the input.
    Census {
        #[arg(long = "in")]
        input: PathBuf,
        /// Caps every census engine at this order.
        #[arg(long)]
        limit_n: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Gadget search, bridge census or a twist walk.
    Gadgets {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: GadgetMode,
        /// `v,c` for absorbing gadgets, `y,z` otherwise.
        #[arg(long)]
        roots: String,
        #[arg(long, default_value_t = 64)]
        cap: usize,
        /// Colours kept for twist walks (colours 1..=K).
        #[arg(long, default_value_t = 12)]
        colours: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Embed a T-absorber built on a certified template.
    Absorber {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "complete")]
        template: String,
        /// JSON with `vertices`, `colours`, `flexible_vertices`, `flexible_colours`;
        /// random roots are drawn from the seed when absent.
        #[arg(long)]
        roots_file: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        path_len: usize,
        #[arg(long, default_value_t = 3)]
        link_len: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the absorption pipeline on a square or a planted instance.
    Pipeline {
        #[arg(long = "in")]
        input: PathBuf,
        /// PipelineConfig JSON; the preset is used when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Preset::Default)]
        preset: Preset,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo experiments.
    Stats {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-bin rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check that the input is a Latin square.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GadgetMode {
    Absorbing,
    Bridging,
    Bridges,
    TwistWalk,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Preset {
    Default,
    Paper,
    Planted,
}

enum Failure {
    /// Malformed input or arguments: exit 2.
    Usage(anyhow::Error),
    /// The computation ran and reported a negative result: exit 1.
    Domain(anyhow::Error),
}

type Outcome = Result<(), Failure>;

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn domain<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Domain(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)
}

#[derive(Deserialize)]
struct RawSquare {
    grid: Vec<Vec<usize>>,
}

/// Structural problems are usage errors; Latin violations are domain failures.
fn classify(e: LatinError) -> Failure {
    match e {
        LatinError::RowRepeat { .. } | LatinError::ColumnRepeat { .. } | LatinError::SymbolRange { .. } => {
            domain(e)
        }
        _ => usage(e),
    }
}

fn parse_square(text: &str) -> Result<LatinSquare, Failure> {
    if text.trim_start().starts_with('{') {
        let raw: RawSquare = serde_json::from_str(text).map_err(usage)?;
        LatinSquare::from_rows(raw.grid).map_err(classify)
    } else {
        LatinSquare::parse_text(text).map_err(classify)
    }
}

/// A single square in text or JSON form, or JSONL with one square per line.
fn read_squares(path: &Path) -> Result<Vec<LatinSquare>, Failure> {
    let text = read(path)?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() > 1 && lines.iter().all(|l| l.trim_start().starts_with('{')) {
        lines.iter().map(|l| parse_square(l)).collect()
    } else {
        Ok(vec![parse_square(&text)?])
    }
}

fn read_square(path: &Path) -> Result<LatinSquare, Failure> {
    let mut v = read_squares(path)?;
    if v.len() != 1 {
        return Err(usage(anyhow!("{} holds {} squares; expected one", path.display(), v.len())));
    }
    Ok(v.remove(0))
}

fn emit(out: Option<&Path>, body: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, body)
            .with_context(|| format!("writing {}", p.display()))
            .map_err(usage),
        None => std::io::stdout().write_all(body.as_bytes()).map_err(usage),
    }
}

/// Wraps a result with the tool version and the full invocation.
fn artifact<T: Serialize>(cmd: &Command, result: &T) -> String {
    let doc = json!({
        "tool": "latinlab",
        "version": VERSION,
        "run_config": cmd,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("artifacts serialize");
    s.push('\n');
    s
}

fn parse_pair(s: &str) -> Result<(usize, usize), Failure> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.parse().map_err(|e| usage(anyhow!("roots {s:?}: {e}")))?,
            b.parse().map_err(|e| usage(anyhow!("roots {s:?}: {e}")))?,
        )),
        _ => Err(usage(anyhow!("roots must be two comma-separated integers, got {s:?}"))),
    }
}

fn generate(cmd: &Command) -> Outcome {
    let Command::Generate { n, k, planted, seed, count, out } = cmd else { unreachable!() };
    let seed = seed.seed;
    let mut lines = String::new();
    for i in 0..*count {
        let line = if let Some(extra) = planted {
            let inst = planted_instance(&PlantSpec::desk(*extra), seed.wrapping_add(i as u64)).map_err(domain)?;
            serde_json::to_string(&inst)
        } else {
            let n = n.ok_or_else(|| usage(anyhow!("--n is required unless --planted is given")))?;
            if n == 0 {
                return Err(usage(anyhow!("--n must be positive")));
            }
            match k {
                Some(k) if *k == 0 || *k > n => return Err(usage(anyhow!("--k must lie in 1..={n}"))),
                Some(k) => {
                    let g = sample_latin_rectangle(&SamplerConfig::rectangle(n, *k, seed).with_task(i as u64));
                    // Row c lists the head of each vertex's colour-c arc.
                    let rows: Vec<Vec<usize>> =
                        (1..=*k).map(|c| (1..=n).map(|u| g.out_nb(c, u)).collect()).collect();
                    serde_json::to_string(&json!({"n": n, "k": k, "rows": rows}))
                }
                None => serde_json::to_string(&sample_latin_square(
                    &SamplerConfig::square(n, seed).with_task(i as u64),
                )),
            }
        }
        .map_err(usage)?;
        lines.push_str(&line);
        lines.push('\n');
    }
    emit(out.as_deref(), &lines)
}

fn census(cmd: &Command) -> Outcome {
    let Command::Census { input, limit_n, report } = cmd else { unreachable!() };
    let squares = read_squares(input)?;
    let mut limits = CensusLimits::default();
    if let Some(l) = limit_n {
        limits = CensusLimits {
            full: limits.full.min(*l),
            hamilton: limits.hamilton.min(*l),
            maxima: limits.maxima.min(*l),
        };
    }
    let reports = squares
        .iter()
        .map(|sq| conjecture_report(sq, limits))
        .collect::<Result<Vec<_>, _>>()
        .map_err(domain)?;
    let result: Value = if reports.len() == 1 {
        serde_json::to_value(&reports[0])
    } else {
        serde_json::to_value(&reports)
    }
    .map_err(usage)?;
    emit(report.as_deref(), &artifact(cmd, &result))
}

fn gadgets(cmd: &Command) -> Outcome {
    let Command::Gadgets { input, mode, roots, cap, colours, steps, seed, report } = cmd else {
        unreachable!()
    };
    let sq = read_square(input)?;
    let g = latin_to_digraph(&sq);
    let n = g.n();
    let (a, b) = parse_pair(roots)?;
    let all: Vec<usize> = (1..=n).collect();
    let result = match mode {
        GadgetMode::Absorbing => {
            let found = find_absorbing_gadgets(&g, a, b, *cap).map_err(usage)?;
            json!({"count": found.len(), "cap": cap, "gadgets": found})
        }
        GadgetMode::Bridging => {
            let found = find_bridging_gadgets(&g, a, b, *cap).map_err(usage)?;
            json!({"count": found.len(), "cap": cap, "gadgets": found})
        }
        GadgetMode::Bridges => {
            if n < 6 {
                return Err(usage(anyhow!("bridges need at least 6 colours")));
            }
            let p = ColourPartition::round_robin(&all);
            let census = count_distinguishable_bridges(&g, a, b, &p).map_err(usage)?;
            json!({"partition": p, "census": census})
        }
        GadgetMode::TwistWalk => {
            if *colours < 6 || *colours > n {
                return Err(usage(anyhow!("--colours must lie in 6..={n}")));
            }
            let d: Vec<usize> = (1..=*colours).collect();
            let p = ColourPartition::round_robin(&d);
            let mut h = restrict_to_colours(&g, &d).map_err(usage)?;
            let mut rng = task_rng(seed.seed, 0);
            let r0 = count_distinguishable_bridges(&h, a, b, &p).map_err(usage)?.r;
            let mut trajectory = vec![json!({"step": 0, "r": r0, "deleted": [], "added": []})];
            for step in 1..=*steps {
                let systems = find_twist_systems(&h, a, b, &p, *cap, true).map_err(usage)?;
                let Some(t) = systems.choose(&mut rng) else {
                    eprintln!("twist walk stopped at step {step}: no twist system on ({a},{b})");
                    break;
                };
                h = twist(&h, t, &p).map_err(domain)?;
                let r = count_distinguishable_bridges(&h, a, b, &p).map_err(usage)?.r;
                trajectory.push(json!({"step": step, "r": r, "deleted": t.deleted(), "added": t.added()}));
            }
            let jsonl: String = trajectory.iter().map(|v| format!("{v}\n")).collect();
            return emit(report.as_deref(), &jsonl);
        }
    };
    emit(report.as_deref(), &artifact(cmd, &result))
}

#[derive(Deserialize)]
struct RootsFile {
    vertices: Vec<usize>,
    colours: Vec<usize>,
    flexible_vertices: Vec<usize>,
    flexible_colours: Vec<usize>,
}

fn absorber(cmd: &Command) -> Outcome {
    let Command::Absorber { input, m, template, roots_file, path_len, link_len, seed, out } = cmd else {
        unreachable!()
    };
    let sq = read_square(input)?;
    let g = latin_to_digraph(&sq);
    let n = g.n();
    let mode: TemplateMode = template.parse().map_err(|e: String| usage(anyhow!(e)))?;
    let mut rng = task_rng(seed.seed, 0);
    let t = build_rmbg(*m, mode, CERTIFY_FLEX_LIMIT, 200, &mut rng).map_err(domain)?;
    let roots = match roots_file {
        Some(p) => serde_json::from_str::<RootsFile>(&read(p)?).map_err(usage)?,
        None => {
            if t.size > n {
                return Err(usage(anyhow!("template needs {} roots but n = {n}", t.size)));
            }
            let mut pick = || {
                let mut v: Vec<usize> = (1..=n).collect();
                v.shuffle(&mut rng);
                v.truncate(t.size);
                v
            };
            let (vs, cs) = (pick(), pick());
            RootsFile {
                flexible_vertices: vs[..t.flex_a.len()].to_vec(),
                flexible_colours: cs[..t.flex_b.len()].to_vec(),
                vertices: vs,
                colours: cs,
            }
        }
    };
    let opts = EmbedOptions {
        path_len: *path_len,
        link_len: *link_len,
        ..EmbedOptions::default()
    };
    let h = embed_t_absorber(
        &g,
        &t,
        &roots.vertices,
        &roots.colours,
        &roots.flexible_vertices,
        &roots.flexible_colours,
        &GadgetSupply::Search,
        &opts,
    )
    .map_err(domain)?;
    let (ev, ec) = expected_inventory(t.edges.len(), t.size, *path_len, *link_len);
    let result = json!({
        "inventory": {
            "vertices": h.vertices().len(),
            "colours": h.colours().len(),
            "expected_vertices": ev,
            "expected_colours": ec,
        },
        "t_absorber": h,
    });
    emit(out.as_deref(), &artifact(cmd, &result))
}

fn pipeline(cmd: &Command) -> Outcome {
    let Command::Pipeline { input, config, preset, seed, out } = cmd else { unreachable!() };
    let text = read(input)?;
    let planted: Option<PlantedInstance> = if text.contains("\"resources\"") {
        Some(serde_json::from_str(text.trim()).map_err(usage)?)
    } else {
        None
    };
    let sq = match &planted {
        Some(p) => p.square.clone(),
        None => read_square(input)?,
    };
    let mut cfg = match config {
        Some(p) => serde_json::from_str::<PipelineConfig>(&read(p)?).map_err(usage)?,
        None => match preset {
            Preset::Default => PipelineConfig::default(),
            Preset::Paper => PipelineConfig::paper(),
            Preset::Planted => PipelineConfig::planted(),
        },
    };
    cfg.seed = seed.seed;
    cfg.validate().map_err(usage)?;
    let g = latin_to_digraph(&sq);
    let rep = run_pipeline(&g, &cfg, planted.as_ref().map(|p| &p.resources));
    emit(out.as_deref(), &artifact(cmd, &rep))?;
    match &rep.failure {
        None => Ok(()),
        Some(f) => Err(domain(anyhow!("pipeline failed at stage {}: {}", f.stage, f.error))),
    }
}

fn stats(cmd: &Command) -> Outcome {
    let Command::Stats { kind, n, samples, seed, out, csv } = cmd else { unreachable!() };
    let kind: ExperimentKind = kind.parse().map_err(usage)?;
    let rep = run_experiment(kind, *n, *samples, seed.seed).map_err(usage)?;
    if let Some(p) = csv {
        fs::write(p, rep.to_csv())
            .with_context(|| format!("writing {}", p.display()))
            .map_err(usage)?;
    }
    emit(out.as_deref(), &artifact(cmd, &rep))?;
    if rep.passed() {
        Ok(())
    } else {
        Err(domain(anyhow!("experiment {} failed a verdict", rep.id)))
    }
}

fn verify(cmd: &Command) -> Outcome {
    let Command::Verify { input } = cmd else { unreachable!() };
    let sq = read_square(input)?;
    println!("ok: Latin square of order {}", sq.n());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    let cmd = &cli.command;
    let outcome = match cmd {
        Command::Generate { .. } => generate(cmd),
        Command::Census { .. } => census(cmd),
        Command::Gadgets { .. } => gadgets(cmd),
        Command::Absorber { .. } => absorber(cmd),
        Command::Pipeline { .. } => pipeline(cmd),
        Command::Stats { .. } => stats(cmd),
        Command::Verify { .. } => verify(cmd),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
