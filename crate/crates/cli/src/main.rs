//! `indep`: batch front end for the independence-atom toolkit.

mod demo;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use indep_core::atoms::{parse_atom_file, parse_atom_list};
use indep_core::calculus::{ConditionalClosure, MarginalClosure};
use indep_core::pregeom::{
    axiom_suite, federation_index_lower_bound, first_projection, hyttinen_chain,
    random_independent_sequence, relation_axiom_suite, sum_combiner, AsymmetricIndependence,
    CardinalityIndependence, ClosureModel, ElementwiseIndependence, Vector,
};
use indep_core::teams::{search_counterexample_team, SearchOutcome, MAX_SEARCH_VALUES};
use indep_core::{
    derives_conditional, derives_marginal, parse_atom, synthesize_counterexample, Atom, AtomSet,
    Error, SearchBounds, VarSet, Verdict,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SEED_ENV: &str = "INDEP_SEED";

#[derive(Parser)]
#[command(
    name = "indep",
    version,
    about = "Derivations, countermodels and closure models for independence atoms"
)]
struct Cli {
    /// Print structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized subcommands. INDEP_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the goal is derivable from the hypotheses.
    Derive {
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Goal atom, e.g. `x _|_ y,z` or `x _|_{w} y`
        #[arg(long)]
        goal: String,
        /// Use the conditional calculus even for marginal atoms.
        #[arg(long)]
        conditional: bool,
        /// Round bound for the conditional calculus.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Print only the verdict.
        #[arg(long)]
        no_proof: bool,
    },
    /// Print every atom derivable from the hypotheses.
    Closure {
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long)]
        conditional: bool,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Search for a finite team satisfying the hypotheses and refuting the goal.
    Countermodel {
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Goal atom, e.g. `x _|_ y,z` or `x _|_{w} y`
        #[arg(long)]
        goal: String,
        /// Largest number of distinct values per column.
        #[arg(long, default_value_t = 4)]
        values: usize,
        /// Largest number of rows.
        #[arg(long, default_value_t = 16)]
        rows: usize,
        /// Stop after examining this many candidate teams.
        #[arg(long)]
        max_teams: Option<u64>,
    },
    /// Build a vector-space assignment satisfying the hypotheses and refuting the goal.
    Synth {
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Goal atom, e.g. `x _|_ y,z` or `x _|_{w} y`
        #[arg(long)]
        goal: String,
    },
    /// Check the independence axioms on random instances of a model.
    Axioms {
        /// `vspace:Q:<dim>` or `lattice:Z:<dim>`.
        #[arg(long, default_value = "vspace:Q:3")]
        model: ClosureModel,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = RelationArg::Rank)]
        relation: RelationArg,
    },
    /// Exhibit a federated sequence of length n with verified witnesses.
    Federation {
        #[arg(long, default_value = "vspace:Q:4")]
        model: ClosureModel,
        #[arg(long)]
        n: usize,
    },
    /// Run and verify the chain construction on independent elements.
    Hyttinen {
        #[arg(long, default_value = "vspace:Q:3")]
        model: ClosureModel,
        /// Elements as `;`-separated vectors, e.g. "[1, 0]; [0, 1]".
        #[arg(long, conflicts_with = "random")]
        elements: Option<String>,
        /// Draw this many random independent elements instead.
        #[arg(long)]
        random: Option<usize>,
        /// Base elements, `;`-separated.
        #[arg(long)]
        base: Option<String>,
        #[arg(long, value_enum, default_value_t = CombinerArg::Sum)]
        combiner: CombinerArg,
    },
    /// Replay the built-in fixtures and report pass/fail.
    Demo,
}

#[derive(Args)]
struct SigmaArgs {
    /// Hypotheses inline, separated by `;`.
    #[arg(long, conflicts_with = "sigma_file")]
    sigma: Option<String>,
    /// Hypotheses file: one atom per line, `#` comments, optional `vars:` line.
    #[arg(long)]
    sigma_file: Option<PathBuf>,
}

impl SigmaArgs {
    fn load(&self) -> Result<AtomSet> {
        match (&self.sigma, &self.sigma_file) {
            (Some(text), _) => Ok(AtomSet::new(parse_atom_list(text)?)),
            (None, Some(path)) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                parse_atom_file(&text).with_context(|| format!("in {}", path.display()))
            }
            (None, None) => Ok(AtomSet::default()),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    Rank,
    Elementwise,
    Cardinality,
    Asymmetric,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombinerArg {
    Sum,
    First,
}

macro_rules! outln {
    ($out:expr, $($arg:tt)*) => {{
        use std::fmt::Write as _;
        writeln!($out, $($arg)*).expect("writing to a String succeeds");
    }};
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    };
    let mut stdout = io::stdout().lock();
    match stdout
        .write_all(out.as_bytes())
        .and_then(|()| stdout.flush())
    {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        _ => code,
    }
}

fn seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got `{s}`")),
        Err(_) => Ok(flag),
    }
}

fn print_json(out: &mut String, v: &Value) {
    out.push_str(&serde_json::to_string_pretty(v).expect("JSON values serialize"));
    out.push('\n');
}

fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|x| x.to_string()).collect()
}

fn parse_vectors(text: &str) -> Result<Vec<Vector>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Vector>().map_err(Into::into))
        .collect()
}

fn run(cli: Cli, out: &mut String) -> Result<ExitCode> {
    let json = cli.json;
    match cli.command {
        Command::Derive {
            sigma,
            goal,
            conditional,
            depth,
            no_proof,
        } => {
            let sigma = sigma.load()?;
            let goal = parse_atom(&goal)?;
            let conditional = conditional || !goal.is_marginal() || !sigma.all_marginal();
            if conditional && depth == 0 {
                bail!("--depth must be positive");
            }
            let verdict = if conditional {
                derives_conditional(&sigma, &goal, depth)?
            } else {
                derives_marginal(&sigma, &goal)?
            };
            if json {
                let mut doc = json!({
                    "goal": goal.to_string(),
                    "calculus": if conditional { "conditional" } else { "marginal" },
                    "verdict": verdict.label(),
                    "proof": verdict.proof().filter(|_| !no_proof).map(|p| p.to_json()["steps"].clone()),
                });
                if conditional {
                    doc["depth"] = json!(depth);
                }
                print_json(out, &doc);
            } else {
                match &verdict {
                    Verdict::Unknown { depth } => {
                        outln!(out, "UNKNOWN (no derivation within {depth} rounds)")
                    }
                    v => outln!(out, "{}", v.label()),
                }
                if let (Some(p), false) = (verdict.proof(), no_proof) {
                    out.push_str(&p.to_string());
                }
            }
        }
        Command::Closure {
            sigma,
            conditional,
            depth,
        } => {
            let sigma = sigma.load()?;
            let conditional = conditional || !sigma.all_marginal();
            let (atoms, summary): (Vec<Atom>, Value) = if conditional {
                if depth == 0 {
                    bail!("--depth must be positive");
                }
                let c = ConditionalClosure::new(&sigma, &VarSet::new(), depth, None)?;
                let summary = json!({"rounds": c.rounds(), "saturated": c.is_saturated()});
                (c.atom_set().into_iter().collect(), summary)
            } else {
                let c = MarginalClosure::new(&sigma, &VarSet::new())?;
                (
                    c.atom_set().into_iter().collect(),
                    json!({"saturated": true}),
                )
            };
            if json {
                let mut doc = summary;
                doc["calculus"] = json!(if conditional {
                    "conditional"
                } else {
                    "marginal"
                });
                doc["atoms"] = json!(strings(&atoms));
                print_json(out, &doc);
            } else {
                for a in &atoms {
                    outln!(out, "{a}");
                }
                if conditional {
                    if summary["saturated"] == json!(true) {
                        outln!(out, "# saturated after {} rounds", summary["rounds"]);
                    } else {
                        outln!(out, "# depth bound {depth} reached before saturation");
                    }
                }
            }
        }
        Command::Countermodel {
            sigma,
            goal,
            values,
            rows,
            max_teams,
        } => {
            let sigma = sigma.load()?;
            let goal = parse_atom(&goal)?;
            if values == 0 || values > MAX_SEARCH_VALUES {
                bail!("--values must lie in 1..={MAX_SEARCH_VALUES}");
            }
            if rows == 0 {
                bail!("--rows must be positive");
            }
            let bounds = SearchBounds {
                max_values: values,
                max_rows: rows,
                max_teams,
            };
            let outcome = search_counterexample_team(&sigma, &goal, bounds);
            if json {
                let (label, team) = match &outcome {
                    SearchOutcome::Found(t) => {
                        ("found", json!({"vars": strings(t.dom()), "rows": t.rows()}))
                    }
                    SearchOutcome::Exhausted => ("exhausted", Value::Null),
                    SearchOutcome::BudgetExceeded => ("budget_exceeded", Value::Null),
                };
                print_json(
                    out,
                    &json!({
                        "goal": goal.to_string(),
                        "bounds": bounds,
                        "outcome": label,
                        "team": team,
                    }),
                );
            } else {
                match outcome {
                    SearchOutcome::Found(t) => out.push_str(&t.to_csv()),
                    SearchOutcome::Exhausted => outln!(out, "none within bounds"),
                    SearchOutcome::BudgetExceeded => outln!(out, "search budget exceeded"),
                }
            }
        }
        Command::Synth { sigma, goal } => {
            let sigma = sigma.load()?;
            let goal = parse_atom(&goal)?;
            match synthesize_counterexample(&sigma, &goal) {
                Ok(c) => print_json(out, &c.to_json()),
                Err(Error::GoalDerivable(_)) => {
                    if json {
                        print_json(out, &json!({"goal": goal.to_string(), "derivable": true}));
                    } else {
                        outln!(out, "goal derivable: no counterexample exists");
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Axioms {
            model,
            trials,
            relation,
        } => {
            if trials == 0 {
                bail!("--trials must be positive");
            }
            let seed = seed(cli.seed)?;
            let report = match relation {
                RelationArg::Rank => axiom_suite(&model, seed, trials),
                RelationArg::Elementwise => {
                    relation_axiom_suite(&ElementwiseIndependence(model), seed, trials)
                }
                RelationArg::Cardinality => {
                    relation_axiom_suite(&CardinalityIndependence(model), seed, trials)
                }
                RelationArg::Asymmetric => {
                    relation_axiom_suite(&AsymmetricIndependence(model), seed, trials)
                }
            };
            if json {
                print_json(out, &serde_json::to_value(&report)?);
            } else {
                out.push_str(&report.to_string());
            }
        }
        Command::Federation { model, n } => {
            let bound = federation_index_lower_bound(&model, n)?;
            if json {
                print_json(out, &serde_json::to_value(&bound)?);
            } else {
                outln!(out, "model {}", bound.model);
                outln!(out, "sequence {}", strings(&bound.seq).join(" "));
                for (m, d) in bound.witnesses.iter().enumerate() {
                    outln!(out, "prefix {} witness {d}", m + 1);
                }
            }
        }
        Command::Hyttinen {
            model,
            elements,
            random,
            base,
            combiner,
        } => {
            let ds = match (elements, random) {
                (Some(text), _) => parse_vectors(&text)?,
                (None, r) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed(cli.seed)?);
                    random_independent_sequence(&model, r.unwrap_or(model.dim()), &mut rng)?
                }
            };
            let base = base
                .as_deref()
                .map(parse_vectors)
                .transpose()?
                .unwrap_or_default();
            let result = match combiner {
                CombinerArg::Sum => hyttinen_chain(&model, &ds, &base, sum_combiner),
                CombinerArg::First => hyttinen_chain(&model, &ds, &base, first_projection),
            };
            match result {
                Ok(report) => {
                    if json {
                        print_json(
                            out,
                            &json!({
                                "elements": strings(&ds),
                                "accepted": true,
                                "report": report,
                            }),
                        );
                    } else {
                        outln!(out, "model {}", report.model);
                        for (i, (d, star)) in ds.iter().zip(&report.chain).enumerate() {
                            let props = &report.steps[i].properties;
                            outln!(
                                out,
                                "d{i} = {d}  d*{i} = {star}  verified [{}]",
                                props.join(" ")
                            );
                        }
                        outln!(out, "ACCEPTED: last element is a federation witness");
                    }
                }
                Err(Error::ChainStep {
                    step,
                    property,
                    detail,
                }) => {
                    if json {
                        print_json(
                            out,
                            &json!({
                                "elements": strings(&ds),
                                "accepted": false,
                                "step": step,
                                "property": property,
                                "detail": detail,
                            }),
                        );
                    } else {
                        outln!(
                            out,
                            "REJECTED at step {step}, property {property}: {detail}"
                        );
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Demo => {
            let results = demo::run();
            let failed = results.iter().filter(|r| r.error.is_some()).count();
            if json {
                print_json(
                    out,
                    &json!({
                        "fixtures": results.iter().map(|r| json!({
                            "name": r.name,
                            "passed": r.error.is_none(),
                            "detail": r.error,
                        })).collect::<Vec<_>>(),
                        "passed": results.len() - failed,
                        "failed": failed,
                    }),
                );
            } else {
                for r in &results {
                    match &r.error {
                        None => outln!(out, "PASS {}", r.name),
                        Some(e) => outln!(out, "FAIL {}: {e}", r.name),
                    }
                }
                outln!(
                    out,
                    "{}/{} fixtures passed",
                    results.len() - failed,
                    results.len()
                );
            }
            if failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
