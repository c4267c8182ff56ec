use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use aurcap_core::matchmaker::match_capability;
use aurcap_core::mission::{parse_mission, parse_required_capability};
use aurcap_core::planner::{plan, PlannerConfig};
use aurcap_core::KnowledgeBase;
use aurcap_fleet::config::{load_model, parse_level, ConfigError};
use aurcap_fleet::registry::{kb_error_json, serve, submit_error_json, SubmitError};
use aurcap_fleet::sim::describe_fleet_offline;
use aurcap_fleet::views::{MatchView, PlanView};
use aurcap_fleet::{default_fleet, BehaviorRegistry, FleetMode, Node, RegistryConfig};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "aurcap", version, about = "Capability and skill models for heterogeneous robot teams")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// broker URI, `inproc://name` or `mqtt://host:port`
    #[arg(long, global = true)]
    broker: Option<String>,
    /// registry address
    #[arg(long, global = true)]
    listen: Option<String>,
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Parse Turtle files on top of the seed model and run the reasoner.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Ask the reasoner a question.
    Query {
        #[command(subcommand)]
        query: Query,
    },
    /// Rank robots for a required capability against the configured fleet.
    Match { required: PathBuf },
    /// Plan a mission against the configured fleet.
    Plan { mission: PathBuf },
    /// Submit a mission to a registry, execute it and print the report.
    Run {
        mission: PathBuf,
        /// Boot a registry with the default fleet in this process first.
        #[arg(long)]
        embedded: bool,
        /// Give up waiting for the report after this many seconds.
        #[arg(long, default_value_t = 120)]
        timeout: u64,
    },
    /// Start the registry and, unless configured otherwise, the default simulated fleet.
    Serve,
}

#[derive(Subcommand)]
enum Query {
    /// Prints whether <sub> is subsumed by <sup>.
    Subclass { sub: String, sup: String },
}

/// Exit with a diagnostic on stderr.
struct Failure(Value);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model { path, source } => {
                let mut v = kb_error_json(&source);
                v["file"] = json!(path);
                Failure(v)
            }
            other => Failure(json!({"error": "Config", "message": other.to_string()})),
        }
    }
}

fn fail(kind: &str, message: impl ToString) -> Failure {
    Failure(json!({"error": kind, "message": message.to_string()}))
}

fn config(cli: &Cli) -> Result<RegistryConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RegistryConfig::load(p)?,
        None => RegistryConfig::default(),
    };
    if let Some(b) = &cli.broker {
        cfg.broker_uri = b.clone();
    }
    if let Some(l) = &cli.listen {
        cfg.listen = l.parse().map_err(|e| fail("Config", format!("--listen: {e}")))?;
    }
    if let Some(l) = &cli.log_level {
        parse_level(l).ok_or_else(|| fail("Config", format!("unknown log level `{l}`")))?;
        cfg.log_level = l.clone();
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| {
        let mut f = fail("Read", e);
        f.0["file"] = json!(path);
        f
    })
}

/// Configured models plus the default fleet's description, skills and interfaces.
fn offline_kb(cfg: &RegistryConfig) -> Result<KnowledgeBase, Failure> {
    let mut kb = cfg.boot_kb()?;
    if cfg.fleet == FleetMode::Default {
        let http = format!("http://{}", cfg.fleet_listen);
        let rt = describe_fleet_offline(&mut kb, &default_fleet(), &BehaviorRegistry::standard(), &cfg.broker_uri, &http)
            .map_err(|e| fail("Fleet", e))?;
        rt.shutdown();
    }
    Ok(kb)
}

fn print(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("views serialize"));
}

async fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = config(&cli)?;
    let level = parse_level(&cfg.log_level).unwrap_or(tracing::Level::INFO);
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();

    match &cli.verb {
        Verb::Validate { files } => {
            let mut kb = cfg.boot_kb()?;
            for f in files {
                load_model(&mut kb, f)?;
            }
            let classes = kb.classes().count();
            for c in kb.classes() {
                kb.superclasses_of(c).map_err(|e| fail("Reasoner", e))?;
            }
            print(&json!({"valid": true, "files": files.len(), "classes": classes, "assertions": kb.assertion_count(), "axioms": kb.axiom_count()}));
        }
        Verb::Query {
            query: Query::Subclass { sub, sup },
        } => {
            let kb = cfg.boot_kb()?;
            let a = kb.expand(sub).map_err(|e| fail("Term", e))?;
            let b = kb.expand(sup).map_err(|e| fail("Term", e))?;
            let answer = kb.is_subclass_of(&a, &b).map_err(|e| fail("Term", e))?;
            println!("{answer}");
        }
        Verb::Match { required } => {
            let req = parse_required_capability(&read(required)?).map_err(|e| fail("RequiredCapability", e))?;
            let kb = offline_kb(&cfg)?;
            let matches = match_capability(&kb, &req).map_err(|e| fail("Match", e))?;
            print(&MatchView::ranked(&matches));
        }
        Verb::Plan { mission } => {
            let m = parse_mission(&read(mission)?).map_err(|e| Failure(submit_error_json(&SubmitError::Mission(e)).1))?;
            let kb = offline_kb(&cfg)?;
            let p = plan(&kb, &m, PlannerConfig::default()).map_err(|e| Failure(submit_error_json(&SubmitError::Plan(e)).1))?;
            print(&PlanView::from(&p));
        }
        Verb::Run {
            mission,
            embedded,
            timeout,
        } => {
            let text = read(mission)?;
            let mut node = None;
            let mut base = format!("http://{}", cfg.listen);
            if *embedded {
                let n = Node::boot(&cfg, &default_fleet(), &BehaviorRegistry::standard())
                    .await
                    .map_err(|e| fail("Boot", e))?;
                let (addr, _) = serve(n.registry.clone(), cfg.listen).await.map_err(|e| fail("Listen", e))?;
                base = format!("http://{addr}");
                node = Some(n);
            }
            let outcome = run_remote(&base, text, Duration::from_secs(*timeout)).await;
            if let Some(n) = node {
                n.shutdown().await;
            }
            let report = outcome?;
            print(&report);
            if report["report"]["status"] != "Succeeded" {
                return Err(fail("MissionFailed", report["report"]["reason"].as_str().unwrap_or("mission did not succeed")));
            }
        }
        Verb::Serve => {
            let node = Node::boot(&cfg, &default_fleet(), &BehaviorRegistry::standard())
                .await
                .map_err(|e| fail("Boot", e))?;
            let (addr, _) = serve(node.registry.clone(), cfg.listen).await.map_err(|e| fail("Listen", e))?;
            tracing::info!(registry = %addr, broker = %cfg.broker_uri, "serving");
            if let Some(f) = &node.fleet {
                tracing::info!(skills = f.skills().len(), http = f.http.base_url(), "simulated fleet up");
            }
            tokio::signal::ctrl_c().await.map_err(|e| fail("Signal", e))?;
            node.shutdown().await;
        }
    }
    Ok(())
}

/// Submits, executes and waits for a mission on the registry at `base`.
async fn run_remote(base: &str, mission: String, timeout: Duration) -> Result<Value, Failure> {
    let client = reqwest::Client::new();
    let http = |e: reqwest::Error| fail("Registry", e);
    let resp = client.post(format!("{base}/missions")).body(mission).send().await.map_err(http)?;
    let status = resp.status();
    let body: Value = resp.json().await.map_err(http)?;
    if status != reqwest::StatusCode::CREATED {
        return Err(Failure(body));
    }
    let id = body["id"].as_str().unwrap_or_default().to_string();
    let resp = client.post(format!("{base}/missions/{id}/execute")).send().await.map_err(http)?;
    if resp.status() != reqwest::StatusCode::ACCEPTED {
        return Err(Failure(resp.json().await.map_err(http)?));
    }
    let deadline = tokio::time::Instant::now() + timeout;
    loop {
        let view: Value = client.get(format!("{base}/missions/{id}")).send().await.map_err(http)?.json().await.map_err(http)?;
        if !view["error"].is_null() {
            return Err(Failure(json!({"error": "Execution", "message": view["error"], "mission": view})));
        }
        if view["report"]["status"] != "Running" && !view["report"].is_null() {
            return Ok(view);
        }
        if tokio::time::Instant::now() > deadline {
            return Err(fail("Timeout", format!("mission {id} still running after {timeout:?}")));
        }
        tokio::time::sleep(Duration::from_millis(100)).await;
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    match rt.block_on(run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(v)) => {
            eprintln!("{v}");
            ExitCode::FAILURE
        }
    }
}
