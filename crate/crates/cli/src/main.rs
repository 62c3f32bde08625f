use std::fs;
use std::io::{self, BufRead, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use persona_dialog::dialogue::{DialogueConfig, DialogueEngine, Phase, TemplateStore};
use persona_dialog::evaluation::{
    recommendation_effect, BatchRunner, ImpressionResponse, MetricsAccumulator, Persona,
    SimulationConfig,
};
use persona_dialog::personality::{
    aggregate, Level, NoiseModel, RemoteEstimator, Trait, TraitAccuracies, TraitEstimator,
    TraitLabels, DEFAULT_THRESHOLD,
};
use persona_dialog::service::{ServiceConfig, SessionRegistry, SystemClock};
use persona_dialog::spots::{load_catalog, SpotCatalog, SpotId};
use persona_dialog::SystemAction;
use persona_dialog_server::ServerOptions;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "persona-dialog", version, about = "Personality-adaptive recommendation dialogue")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run simulated personas through the engine and print the metrics report.
    Simulate(SimulateArgs),
    /// Score questionnaire responses read from a file or stdin.
    Score(ScoreArgs),
    /// Talk to the engine on the terminal, with a simulated estimator.
    Chat(ChatArgs),
    /// Serve the HTTP and WebSocket API.
    Serve(ServeArgs),
    /// Print or validate a spot catalog.
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct EngineArgs {
    /// Spot catalog file; the bundled catalog when omitted.
    #[arg(long, env = "PERSONA_DIALOG_CATALOG")]
    catalog: Option<PathBuf>,
    /// Utterance template file; the bundled templates when omitted.
    #[arg(long, env = "PERSONA_DIALOG_TEMPLATES")]
    templates: Option<PathBuf>,
    /// Session time by which the personality estimate must be ready.
    #[arg(long, default_value_t = 5_000, env = "PERSONA_DIALOG_DEADLINE_MS")]
    deadline_ms: u64,
}

impl EngineArgs {
    fn engine(&self) -> Result<DialogueEngine> {
        let catalog = match &self.catalog {
            Some(path) => load_catalog(&read(path)?)
                .with_context(|| format!("loading catalog {}", path.display()))?,
            None => SpotCatalog::builtin(),
        };
        let templates = match &self.templates {
            Some(path) => TemplateStore::parse(&read(path)?)
                .with_context(|| format!("loading templates {}", path.display()))?,
            None => TemplateStore::builtin(),
        };
        let config = DialogueConfig {
            estimation_deadline_ms: self.deadline_ms,
            ..DialogueConfig::default()
        };
        Ok(DialogueEngine::new(Arc::new(catalog), Arc::new(templates), config)?)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 26)]
    personas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the extraversion capture accuracy.
    #[arg(long)]
    accuracy: Option<f64>,
    /// Use an estimator that never errs.
    #[arg(long, conflicts_with = "accuracy")]
    perfect: bool,
    /// Session time at which the estimate arrives.
    #[arg(long, default_value_t = 1_500)]
    estimator_delay_ms: u64,
    /// Print the comma-separated report instead of `name: value` lines.
    #[arg(long)]
    csv: bool,
    /// Write all transcripts to this file.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// One response per line: nine ratings, optionally followed by pre and
    /// post visit intent. Commas or whitespace separate values; `#` starts a
    /// comment. Reads stdin when omitted.
    file: Option<PathBuf>,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ChatArgs {
    #[command(flatten)]
    engine: EngineArgs,
    /// The two preselected spot ids, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = [String::from("s1"), String::from("s4")])]
    spots: Vec<String>,
    /// True labels as five H/L letters in E A C N O order.
    #[arg(long, default_value = "HHHHH")]
    truth: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_500)]
    estimator_delay_ms: u64,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value = "127.0.0.1:8080", env = "PERSONA_DIALOG_ADDR")]
    addr: SocketAddr,
    /// Remote trait estimator (`host:port`) for live captures.
    #[arg(long, env = "PERSONA_DIALOG_ESTIMATOR")]
    estimator: Option<String>,
    #[arg(long, default_value_t = 3_000)]
    estimator_timeout_ms: u64,
    /// Seed for persona-mode simulated estimators.
    #[arg(long, default_value_t = 0, env = "PERSONA_DIALOG_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 120)]
    idle_secs: u64,
    /// Per-capture delay of persona-mode estimators.
    #[arg(long, default_value_t = 0)]
    persona_latency_ms: u64,
    /// Append closed-session transcripts to this file.
    #[arg(long, env = "PERSONA_DIALOG_TRANSCRIPTS")]
    transcripts: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Catalog file to validate and print; the bundled catalog when omitted.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Print the catalog in its file format instead of a table.
    #[arg(long)]
    raw: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Score(args) => score(args),
        Command::Chat(args) => chat(args),
        Command::Serve(args) => serve(args),
        Command::Catalog(args) => catalog(args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    if args.personas == 0 {
        bail!("need at least one persona");
    }
    let engine = args.engine.engine()?;
    let mut noise = if args.perfect {
        NoiseModel::perfect(args.seed)
    } else {
        NoiseModel::reference(args.seed)
    };
    if let Some(acc) = args.accuracy {
        noise.accuracies = noise.accuracies.with(Trait::Extraversion, acc)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let personas: Vec<Persona> = (0..args.personas)
        .map(|i| Persona::random(&mut rng, engine.catalog(), format!("p{:02}", i + 1)))
        .collect();
    let runner = BatchRunner::new(
        engine,
        SimulationConfig {
            estimator_delay_ms: args.estimator_delay_ms,
            threshold: DEFAULT_THRESHOLD,
        },
    );
    let outcome = runner.run(&personas, &noise, args.seed)?;
    if let Some(path) = &args.transcripts {
        fs::write(path, outcome.transcript_log())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if args.csv {
        print!("{}", outcome.report.to_csv());
    } else {
        print!("{}", outcome.report.to_text());
        let mismatches = outcome.sessions.iter().filter(|s| !s.branch_matches_truth()).count();
        let defaulted = outcome.sessions.iter().filter(|s| s.profile.defaulted).count();
        println!("branch_mismatches: {mismatches}");
        println!("defaulted_profiles: {defaulted}");
    }
    Ok(())
}

fn score(args: ScoreArgs) -> Result<()> {
    let input = match &args.file {
        Some(path) => read(path)?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    let mut acc = MetricsAccumulator::default();
    for (i, line) in input.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|v| !v.is_empty())
            .map(str::parse::<u8>)
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("line {}: ratings must be integers", i + 1))?;
        let (items, intents) = match values.len() {
            9 => (&values[..], None),
            11 => (&values[..9], Some((values[9], values[10]))),
            n => bail!("line {}: expected 9 or 11 values, found {n}", i + 1),
        };
        let items: [u8; 9] = items.try_into().expect("length checked");
        let response =
            ImpressionResponse::new(items).with_context(|| format!("line {}", i + 1))?;
        acc.add_impression(&response);
        if let Some((pre, post)) = intents {
            acc.add_effect(recommendation_effect(pre, post).with_context(|| format!("line {}", i + 1))?);
        }
        acc.add_session();
    }
    let report = acc.report()?;
    if args.csv {
        print!("{}", report.to_csv());
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn parse_truth(s: &str) -> Result<TraitLabels> {
    let letters: Vec<char> = s.chars().collect();
    if letters.len() != 5 {
        bail!("truth needs five H/L letters, got {s:?}");
    }
    let mut labels = [Level::Low; 5];
    for (l, c) in labels.iter_mut().zip(letters) {
        *l = match c.to_ascii_uppercase() {
            'H' => Level::High,
            'L' => Level::Low,
            other => bail!("truth letter {other:?} is not H or L"),
        };
    }
    Ok(TraitLabels::new(labels))
}

fn print_action(out: &mut impl Write, a: &SystemAction) -> io::Result<()> {
    writeln!(out, "system [{}] {}", a.phase, a.utterance)?;
    writeln!(out, "    <{}>", a.directive_string())
}

fn chat(args: ChatArgs) -> Result<()> {
    let engine = args.engine.engine()?;
    let truth = parse_truth(&args.truth)?;
    if args.spots.len() != 2 {
        bail!("--spots takes exactly two ids, got {}", args.spots.len());
    }
    let mut captures = NoiseModel::reference(args.seed).simulator()?;
    let estimate = aggregate(&captures.simulate_triple(&truth), DEFAULT_THRESHOLD)?;
    let pair = (SpotId::new(&args.spots[0]), SpotId::new(&args.spots[1]));

    let started = Instant::now();
    let clock = || started.elapsed().as_millis() as u64;
    let ready_at = args.estimator_delay_ms;
    let deadline = engine.config().estimation_deadline_ms;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let (mut state, greeting) = engine.start_session("chat", pair)?;
    print_action(&mut out, &greeting)?;
    let mut lines = io::stdin().lock().lines();
    while !state.is_closed() {
        write!(out, "you> ")?;
        out.flush()?;
        let Some(line) = lines.next().transpose()? else {
            writeln!(out)?;
            return Ok(());
        };
        if clock() >= ready_at {
            state.deliver_estimate(estimate);
        }
        let (next, actions) = engine.advance(&state, line.trim(), clock())?;
        state = next;
        for a in &actions {
            print_action(&mut out, a)?;
        }
        while state.phase == Phase::AwaitProfile {
            let wake = ready_at.min(deadline);
            std::thread::sleep(Duration::from_millis(wake.saturating_sub(clock())));
            if clock() >= ready_at {
                state.deliver_estimate(estimate);
            }
            let (next, actions) = engine.tick(&state, clock())?;
            state = next;
            for a in &actions {
                print_action(&mut out, a)?;
            }
        }
    }
    if let Some(spot) = &state.recommended {
        writeln!(out, "recommended: {spot}")?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();
    let engine = args.engine.engine()?;
    let estimator: Option<Arc<dyn TraitEstimator>> = args.estimator.as_ref().map(|endpoint| {
        Arc::new(RemoteEstimator::new(
            endpoint.clone(),
            Duration::from_millis(args.estimator_timeout_ms),
        )) as Arc<dyn TraitEstimator>
    });
    let config = ServiceConfig {
        idle_timeout_ms: args.idle_secs * 1_000,
        seed: args.seed,
        noise: NoiseModel::new(TraitAccuracies::REFERENCE, args.seed),
        persona_capture_latency_ms: args.persona_latency_ms,
        transcript_log: args.transcripts.clone(),
        ..ServiceConfig::default()
    };
    let registry = Arc::new(SessionRegistry::new(
        engine,
        estimator,
        config,
        Arc::new(SystemClock::new()),
    ));
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(args.addr)
            .await
            .with_context(|| format!("binding {}", args.addr))?;
        tracing::info!(addr = %listener.local_addr()?, "listening");
        persona_dialog_server::serve(listener, registry, ServerOptions::default()).await?;
        Ok(())
    })
}

fn catalog(args: CatalogArgs) -> Result<()> {
    let catalog = match &args.file {
        Some(path) => load_catalog(&read(path)?)
            .with_context(|| format!("loading catalog {}", path.display()))?,
        None => SpotCatalog::builtin(),
    };
    if args.raw {
        print!("{}", catalog.serialize());
        return Ok(());
    }
    for spot in catalog.spots() {
        let tags: Vec<&str> = spot.attributes.iter().map(|t| t.as_str()).collect();
        println!(
            "{}\t{}\t{}\t{}",
            spot.id,
            spot.category_group.code(),
            spot.name,
            tags.join(",")
        );
    }
    Ok(())
}
