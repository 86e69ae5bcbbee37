mod render;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use koalg::catalog::{self, matrix, CatalogOptions};
use koalg::equilibrium::{nash_check, subgame_perfect_check, CandidateSet, Verdict};
use koalg::game::{fix_strategies, rollout, ClosedGame, NDetPolicy, StrategyProfile};
use koalg::json::to_canonical_string;
use koalg::outcome::{evaluate, evaluate_ndet, evaluate_to_tolerance, monte_carlo, trace_outcome};
use koalg::tree::{tree_stats, unfold};
use koalg::{ChoiceKind, Game, Parallelism, Strategy};
use serde_json::{json, Value as Json};

#[derive(Parser)]
#[command(name = "koalg", version, about = "Unfold, evaluate and check games built from coalgebraic processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play the game forward and print the trace.
    Run(RunArgs),
    /// Unfold the game tree to a fixed depth.
    Tree(TreeArgs),
    /// Evaluate the outcome of a strategy profile.
    Outcome(OutcomeArgs),
    /// Check a profile for Nash equilibrium against candidate deviations.
    Nash(CheckArgs),
    /// Check a profile for subgame perfection up to a modification horizon.
    Spc(SpcArgs),
    /// List catalog games, or the strategies available in one game.
    List(ListArgs),
}

#[derive(Args)]
struct GameArgs {
    /// Catalog game name (see `koalg list`).
    #[arg(required_unless_present = "spec")]
    game: Option<String>,
    /// Matrix game description in JSON instead of a catalog name.
    #[arg(long, value_name = "FILE", conflicts_with = "game")]
    spec: Option<PathBuf>,
    /// Strategy for a player, by player id or 1-based position.
    #[arg(long = "strategy", value_name = "P=NAME")]
    strategies: Vec<String>,
    /// Discount factor, overriding the game's own.
    #[arg(long)]
    lambda: Option<f64>,
    /// Monitoring game: P(good signal) when both cooperate.
    #[arg(long)]
    k: Option<f64>,
    /// Monitoring game: P(good signal) when one cooperates.
    #[arg(long)]
    m: Option<f64>,
    /// Monitoring game: P(good signal) when neither cooperates.
    #[arg(long)]
    n: Option<f64>,
    /// Network game: number of players.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to FILE instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum NDetFlag {
    Error,
    First,
    Random,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 10)]
    turns: usize,
    #[arg(long, env = "KOALG_SEED", default_value_t = 0)]
    seed: u64,
    /// How to resolve choices of players without a strategy.
    #[arg(long, value_enum, default_value_t = NDetFlag::Error)]
    ndet: NDetFlag,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutcomeArgs {
    #[command(flatten)]
    game: GameArgs,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Fold the tree unfolded to this depth instead of choosing one from --eps.
    #[arg(long)]
    depth: Option<usize>,
    /// Estimate by sampling this many plays of --turns turns.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 100)]
    turns: usize,
    #[arg(long, env = "KOALG_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Candidate deviations for a player, comma separated.
    #[arg(long = "candidates", value_name = "P=NAME,NAME")]
    candidates: Vec<String>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SpcArgs {
    #[command(flatten)]
    check: CheckArgs,
    /// Largest modification horizon checked.
    #[arg(long, default_value_t = 1)]
    nmax: usize,
}

#[derive(Args)]
struct ListArgs {
    game: Option<String>,
    #[arg(long, value_name = "FILE", conflicts_with = "game")]
    spec: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

enum CliError {
    Usage(String),
    Domain(koalg::Error),
    Io(String),
}

impl From<koalg::Error> for CliError {
    fn from(e: koalg::Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// A loaded game together with the strategy names attached to it.
struct Loaded {
    name: String,
    game: Game,
    slots: Vec<Option<Strategy>>,
}

impl Loaded {
    fn names_json(&self) -> Json {
        Json::Array(
            self.slots
                .iter()
                .map(|s| s.as_ref().map_or(Json::Null, |s| json!(s.name())))
                .collect(),
        )
    }

    fn profile(&self) -> StrategyProfile {
        let mut p = StrategyProfile::empty(self.slots.len());
        for (i, s) in self.slots.iter().enumerate() {
            if let Some(s) = s {
                p.set(i, s.clone());
            }
        }
        p
    }

    fn full_profile(&self, what: &str) -> CliResult<Vec<Strategy>> {
        let missing: Vec<String> = self
            .slots
            .iter()
            .zip(&self.game.players)
            .filter(|(s, _)| s.is_none())
            .map(|(_, p)| p.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Domain(koalg::Error::Validation(format!(
                "{what} needs a strategy for every player; missing {}",
                missing.join(", ")
            ))));
        }
        Ok(self.slots.iter().flatten().cloned().collect())
    }

    fn closed(&self) -> CliResult<ClosedGame> {
        Ok(fix_strategies(&self.game, &self.profile())?)
    }
}

fn split_assignment<'a>(flag: &str, raw: &'a str) -> CliResult<(&'a str, &'a str)> {
    raw.split_once('=')
        .filter(|(p, v)| !p.is_empty() && !v.is_empty())
        .ok_or_else(|| CliError::Usage(format!("{flag} expects P=NAME, got '{raw}'")))
}

fn load_game(args: &GameArgs) -> CliResult<Game> {
    let opts = CatalogOptions {
        lambda: args.lambda,
        k: args.k,
        m: args.m,
        n: args.n,
        nodes: args.nodes,
    };
    let name = args.game.as_deref();
    if (opts.k.is_some() || opts.m.is_some() || opts.n.is_some()) && name != Some("monitoring") {
        return Err(CliError::Usage("--k, --m and --n apply to the monitoring game only".into()));
    }
    if opts.nodes.is_some() && name != Some("network") {
        return Err(CliError::Usage("--nodes applies to the network game only".into()));
    }
    match (&args.spec, name) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let game = matrix::build_matrix_game(&matrix::parse_matrix_spec(&text)?)?;
            Ok(catalog::with_lambda(game, opts.lambda)?)
        }
        (None, Some(name)) => Ok(catalog::build(name, &opts)?),
        (None, None) => Err(CliError::Usage("name a catalog game or pass --spec FILE".into())),
    }
}

fn load(args: &GameArgs) -> CliResult<Loaded> {
    let game = load_game(args)?;
    let mut slots: Vec<Option<Strategy>> = vec![None; game.player_count()];
    for raw in &args.strategies {
        let (key, name) = split_assignment("--strategy", raw)?;
        let p = game.player_index(key)?;
        if slots[p].is_some() {
            return Err(CliError::Usage(format!("player {key} is assigned twice")));
        }
        slots[p] = Some(catalog::builtin_strategy(&game, p, name)?);
    }
    Ok(Loaded {
        name: game.name.clone(),
        game,
        slots,
    })
}

fn candidates(loaded: &Loaded, raw: &[String]) -> CliResult<CandidateSet> {
    let game = &loaded.game;
    let mut names: Vec<Vec<String>> = (0..game.player_count())
        .map(|p| catalog::default_candidate_names(game, p))
        .collect();
    let mut seen = vec![false; game.player_count()];
    for r in raw {
        let (key, list) = split_assignment("--candidates", r)?;
        let p = game.player_index(key)?;
        if std::mem::replace(&mut seen[p], true) {
            return Err(CliError::Usage(format!("candidates for player {key} given twice")));
        }
        names[p] = list.split(',').map(|s| s.trim().to_string()).collect();
    }
    let per_player = names
        .iter()
        .enumerate()
        .map(|(p, ns)| catalog::strategies_by_name(game, p, ns))
        .collect::<koalg::Result<Vec<_>>>()?;
    Ok(CandidateSet::new(per_player)?)
}

fn only_formats(output: &OutputArgs, allowed: &[Format], command: &str) -> CliResult<()> {
    if allowed.contains(&output.format) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--format {} is not available for {command}",
            output.format.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
        )))
    }
}

/// The rendered document and where it goes.
struct Rendered {
    body: String,
    out: Option<PathBuf>,
}

fn emit(doc: Json, text: impl FnOnce() -> String, output: &OutputArgs) -> Rendered {
    let body = match output.format {
        Format::Text => text(),
        _ => to_canonical_string(&doc),
    };
    Rendered {
        body,
        out: output.out.clone(),
    }
}

fn cmd_run(args: &RunArgs) -> CliResult<Rendered> {
    only_formats(&args.output, &[Format::Json, Format::Text], "run")?;
    let loaded = load(&args.game)?;
    let closed = loaded.closed()?;
    let policy = match args.ndet {
        NDetFlag::Error => NDetPolicy::Error,
        NDetFlag::First => NDetPolicy::First,
        NDetFlag::Random => NDetPolicy::SeededRandom,
    };
    let trace = rollout(&closed.process, &closed.initial, args.turns, args.seed, policy)?;
    let value = trace_outcome(&trace, &loaded.game.outcome)?;
    let doc = json!({
        "command": "run",
        "game": loaded.name,
        "strategies": loaded.names_json(),
        "seed": args.seed,
        "trace": trace.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
        "outcome": value.iter().map(|&x| koalg::json::number(x)).collect::<Vec<_>>(),
    });
    Ok(emit(doc, || render::trace(&trace, &value), &args.output))
}

fn cmd_tree(args: &TreeArgs) -> CliResult<Rendered> {
    let loaded = load(&args.game)?;
    let tree = if loaded.slots.iter().all(Option::is_none) {
        unfold(&loaded.game.core, &loaded.game.initial_state, args.depth)?
    } else {
        let closed = loaded.closed()?;
        unfold(&closed.process, &closed.initial, args.depth)?
    };
    if args.output.format == Format::Dot {
        return Ok(Rendered {
            body: tree.to_dot(),
            out: args.output.out.clone(),
        });
    }
    let doc = json!({
        "command": "tree",
        "game": loaded.name,
        "strategies": loaded.names_json(),
        "tree": tree.to_json(),
        "stats": tree_stats(&tree).to_json(),
    });
    Ok(emit(doc, || render::tree(&tree), &args.output))
}

fn cmd_outcome(args: &OutcomeArgs) -> CliResult<Rendered> {
    only_formats(&args.output, &[Format::Json, Format::Text], "outcome")?;
    let loaded = load(&args.game)?;
    let closed = loaded.closed()?;
    let spec = &loaded.game.outcome;
    let mut doc = json!({
        "command": "outcome",
        "game": loaded.name,
        "strategies": loaded.names_json(),
    });
    let text;
    if let Some(samples) = args.samples {
        let mc = monte_carlo(&closed.process, &closed.initial, spec, args.turns, samples, args.seed, Parallelism::default())?;
        doc["monte_carlo"] = json!({
            "mean": mc.mean.iter().map(|&x| koalg::json::number(x)).collect::<Vec<_>>(),
            "std_error": mc.std_error.iter().map(|&x| koalg::json::number(x)).collect::<Vec<_>>(),
            "samples": mc.samples,
            "turns": args.turns,
            "seed": args.seed,
        });
        text = render::monte_carlo(&mc);
    } else if closed.process.kind() == ChoiceKind::NDet {
        let depth = args.depth.ok_or_else(|| {
            CliError::Usage("players without a strategy make the outcome a set; pass --depth to enumerate it".into())
        })?;
        let all = evaluate_ndet(&unfold(&closed.process, &closed.initial, depth)?, spec)?;
        doc["outcomes"] = Json::Array(all.iter().map(|r| r.to_json()).collect());
        text = all.iter().map(render::outcome).collect();
    } else {
        let r = match args.depth {
            Some(d) => evaluate(&unfold(&closed.process, &closed.initial, d)?, spec)?,
            None => evaluate_to_tolerance(&closed.process, &closed.initial, spec, args.eps)?,
        };
        doc["outcome"] = r.to_json();
        text = render::outcome(&r);
    }
    Ok(emit(doc, || text, &args.output))
}

fn check_doc(command: &str, loaded: &Loaded, cands: &CandidateSet, verdict: &Verdict) -> Json {
    let per_player: serde_json::Map<String, Json> = loaded
        .game
        .players
        .iter()
        .zip(&cands.per_player)
        .map(|(p, cs)| (p.id.clone(), json!(cs.iter().map(|c| c.name()).collect::<Vec<_>>())))
        .collect();
    json!({
        "command": command,
        "game": loaded.name,
        "strategies": loaded.names_json(),
        "candidates": per_player,
        "verdict": verdict.to_json(),
    })
}

fn cmd_nash(args: &CheckArgs) -> CliResult<Rendered> {
    only_formats(&args.output, &[Format::Json, Format::Text], "nash")?;
    let loaded = load(&args.game)?;
    let profile = loaded.full_profile("nash")?;
    let cands = candidates(&loaded, &args.candidates)?;
    let verdict = nash_check(&loaded.game, &profile, &cands, args.eps, Parallelism::default())?;
    let doc = check_doc("nash", &loaded, &cands, &verdict);
    Ok(emit(doc, || render::verdict(&verdict), &args.output))
}

fn cmd_spc(args: &SpcArgs) -> CliResult<Rendered> {
    let check = &args.check;
    only_formats(&check.output, &[Format::Json, Format::Text], "spc")?;
    let loaded = load(&check.game)?;
    let profile = loaded.full_profile("spc")?;
    let cands = candidates(&loaded, &check.candidates)?;
    let verdict = subgame_perfect_check(&loaded.game, &profile, &cands, args.nmax, check.eps, Parallelism::default())?;
    let doc = check_doc("spc", &loaded, &cands, &verdict);
    Ok(emit(doc, || render::verdict(&verdict), &check.output))
}

fn cmd_list(args: &ListArgs) -> CliResult<Rendered> {
    only_formats(&args.output, &[Format::Json, Format::Text], "list")?;
    if args.game.is_none() && args.spec.is_none() {
        let doc = json!({
            "command": "list",
            "games": catalog::GAMES.iter().map(|(n, d)| json!({"name": n, "description": d})).collect::<Vec<_>>(),
        });
        return Ok(emit(doc, render::games, &args.output));
    }
    let game = load_game(&GameArgs {
        game: args.game.clone(),
        spec: args.spec.clone(),
        strategies: Vec::new(),
        lambda: None,
        k: None,
        m: None,
        n: None,
        nodes: args.nodes,
    })?;
    let players: Vec<(String, Vec<String>)> = (0..game.player_count())
        .map(|p| (game.players[p].id.clone(), catalog::strategy_names(&game, p)))
        .collect();
    let doc = json!({
        "command": "list",
        "game": game.name,
        "strategies": players.iter().map(|(id, names)| json!({"player": id, "names": names})).collect::<Vec<_>>(),
    });
    Ok(emit(doc, || render::strategy_lists(&players), &args.output))
}

fn dispatch(cli: &Cli) -> CliResult<Rendered> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Tree(a) => cmd_tree(a),
        Command::Outcome(a) => cmd_outcome(a),
        Command::Nash(a) => cmd_nash(a),
        Command::Spc(a) => cmd_spc(a),
        Command::List(a) => cmd_list(a),
    }
}

fn write_out(r: &Rendered) -> Result<(), String> {
    match &r.out {
        Some(path) => fs::write(path, &r.body).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(r.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| e.to_string())
        }
    }
}

fn fail(code: u8, message: &str) -> ExitCode {
    eprintln!("error: {}", message.replace('\n', " "));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(&cli) {
        Ok(r) => match write_out(&r) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(1, &e),
        },
        Err(CliError::Usage(m)) => fail(2, &m),
        Err(CliError::Domain(e)) => fail(1, &e.to_string()),
        Err(CliError::Io(m)) => fail(1, &m),
    }
}
