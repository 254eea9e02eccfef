use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use fleetline_core::geo::Polyline;
use fleetline_core::tracking::{simulate_transmitter, TelemetryMsg, TransmitterConfig};
use fleetline::clock::SystemClock;
use fleetline::client::Client;
use fleetline::config::Config;
use fleetline::demo::{run_demo, DemoError, DemoOptions, DEMO_PASSPHRASE};
use fleetline::http::router;
use fleetline::scenario::{self, ScenarioError};
use fleetline::service::ADMIN_LOGIN;
use fleetline::{report, simulate, Service, ServiceOptions};

#[derive(Parser)]
#[command(name = "fleetline", version, about = "Fleet booking, dispatch and tracking service")]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "FLEETLINE_DATA_DIR")]
        data_dir: Option<PathBuf>,
        #[arg(long, env = "FLEETLINE_PORT")]
        port: Option<u16>,
        /// Directory holding the console bundle, served at /console.
        #[arg(long)]
        console_dir: Option<PathBuf>,
    },
    /// Load a scenario file (or a built-in: figure4, doubled) into a data directory.
    Seed {
        #[arg(long)]
        scenario: String,
        #[arg(long, env = "FLEETLINE_DATA_DIR")]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        url: Option<String>,
    },
    /// Generate transmitter fixes along a path and print or post them.
    Simulate {
        #[arg(long)]
        vehicle: String,
        /// `lat,lon;lat,lon;...`; a seeded path is used when absent.
        #[arg(long)]
        path: Option<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 25.0)]
        km: f64,
        #[arg(long, default_value_t = 40.0)]
        speed: f64,
        #[arg(long, default_value_t = 5_000)]
        interval_ms: u64,
        #[arg(long, default_value_t = 0)]
        start_ms: u64,
        /// JSON-lines output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Post each fix to a running service instead of printing it.
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        login: Option<String>,
        #[arg(long, env = "FLEETLINE_PASSWORD")]
        password: Option<String>,
    },
    /// Run the scripted end-to-end flow against a fresh data directory.
    Demo {
        #[arg(long, default_value = "fleetline-demo")]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Write review sentiment counts as CSV.
    Report {
        #[arg(long, conflicts_with = "url")]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        url: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = ADMIN_LOGIN)]
        login: String,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn runtime(e: impl ToString) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Verb::Serve {
            data_dir,
            port,
            console_dir,
        } => serve(data_dir, port, console_dir),
        Verb::Seed { scenario, data_dir, url } => seed(&scenario, data_dir, url),
        Verb::Simulate {
            vehicle,
            path,
            seed,
            km,
            speed,
            interval_ms,
            start_ms,
            out,
            url,
            login,
            password,
        } => {
            let target = match url {
                Some(url) => match (login, password) {
                    (Some(l), Some(p)) => Target::Service(url, l, p),
                    _ => {
                        return finish(Err(Failure::Validation(
                            "--url needs --login and --password (or FLEETLINE_PASSWORD)".into(),
                        )))
                    }
                },
                None => Target::Output(out),
            };
            simulate_cmd(&vehicle, path.as_deref(), seed, km, TransmitterConfig::new(speed, interval_ms, start_ms), target)
        }
        Verb::Demo { data_dir, seed } => demo(data_dir, seed),
        Verb::Report {
            data_dir,
            url,
            out,
            login,
        } => report_cmd(data_dir, url, out, &login),
    };
    finish(result)
}

fn finish(result: Outcome) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn config() -> Result<Config, Failure> {
    Config::from_env().map_err(Failure::Validation)
}

fn open(data_dir: &Path, config: &Config) -> Result<Service, Failure> {
    let opts = ServiceOptions {
        qr_passphrase: config.qr_passphrase.clone(),
        admin_password: config.admin_password.clone(),
        snapshot_every: None,
    };
    let svc = Service::open(data_dir, opts, Arc::new(SystemClock)).map_err(Failure::runtime)?;
    if let Some(pw) = svc.generated_admin_password() {
        eprintln!("created admin account `{ADMIN_LOGIN}` with password {pw}");
    }
    Ok(svc)
}

fn serve(data_dir: Option<PathBuf>, port: Option<u16>, console_dir: Option<PathBuf>) -> Outcome {
    let config = config()?;
    let data_dir = data_dir.unwrap_or(config.data_dir.clone());
    let port = port.unwrap_or(config.port);
    if let Some(dir) = &console_dir {
        if !dir.is_dir() {
            return Err(Failure::Validation(format!("console dir {} does not exist", dir.display())));
        }
    }
    let svc = Arc::new(open(&data_dir, &config)?);
    if !svc.qr_configured() {
        eprintln!("FLEETLINE_QR_PASSPHRASE is not set; trip QR codes are unavailable");
    }
    let app = router(svc, console_dir);
    let rt = tokio::runtime::Runtime::new().map_err(Failure::runtime)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port))
            .await
            .map_err(Failure::runtime)?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(Failure::runtime)?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(Failure::runtime)
    })
}

fn seed(name: &str, data_dir: Option<PathBuf>, url: Option<String>) -> Outcome {
    if url.is_some() {
        return Err(Failure::Validation(
            "seeding writes the event log directly; stop the service and pass --data-dir".into(),
        ));
    }
    let text = match scenario::builtin(name) {
        Some(t) => t.to_owned(),
        None => std::fs::read_to_string(name)
            .map_err(|e| Failure::Validation(format!("{name}: {e}")))?,
    };
    let config = config()?;
    let data_dir = data_dir.unwrap_or(config.data_dir.clone());
    let svc = open(&data_dir, &config)?;
    match scenario::seed(&svc, &text) {
        Ok(s) => {
            let label = s.name.as_deref().unwrap_or("(empty)");
            if s.already_seeded {
                println!("scenario {label}: already seeded");
            } else {
                println!(
                    "scenario {label}: {} providers, {} customers, {} drivers, {} vehicles, {} ratings, {} reviews, {} fixes",
                    s.providers, s.customers, s.drivers, s.vehicles, s.ratings, s.reviews, s.fixes
                );
            }
            Ok(())
        }
        Err(e @ ScenarioError::Validation { .. }) => Err(Failure::Validation(format!("{name}: {e}"))),
        Err(e) => Err(Failure::runtime(e)),
    }
}

enum Target {
    Output(Option<PathBuf>),
    Service(String, String, String),
}

fn simulate_cmd(
    vehicle: &str,
    path: Option<&str>,
    seed: u64,
    km: f64,
    cfg: TransmitterConfig,
    target: Target,
) -> Outcome {
    let route: Polyline = match path {
        Some(p) => simulate::parse_path(p).map_err(Failure::Validation)?,
        None => simulate::seeded_path(seed, km, 25).map_err(|e| Failure::Validation(e.to_string()))?,
    };
    let fixes: Vec<TelemetryMsg> =
        simulate_transmitter(&vehicle.into(), &route, cfg).map_err(|e| Failure::Validation(e.to_string()))?;
    match target {
        Target::Output(out) => {
            let mut text = String::new();
            for f in &fixes {
                text.push_str(&serde_json::to_string(f).map_err(Failure::runtime)?);
                text.push('\n');
            }
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?,
                None => std::io::stdout().write_all(text.as_bytes()).map_err(Failure::runtime)?,
            }
            eprintln!("{} fixes over {:.3} km", fixes.len(), route.length_km());
        }
        Target::Service(url, login, password) => {
            let mut client = Client::new(&url);
            client.login(&login, &password).map_err(Failure::runtime)?;
            let mut accepted = 0;
            for f in &fixes {
                let r: serde_json::Value = client.post("/api/telemetry", f).map_err(Failure::runtime)?;
                if r["eventSeq"].is_u64() {
                    accepted += 1;
                }
            }
            eprintln!("posted {} fixes, {accepted} accepted", fixes.len());
        }
    }
    Ok(())
}

fn demo(data_dir: PathBuf, seed: u64) -> Outcome {
    let decode_passphrase = std::env::var("FLEETLINE_QR_PASSPHRASE")
        .ok()
        .filter(|p| !p.is_empty())
        .unwrap_or_else(|| DEMO_PASSPHRASE.to_owned());
    let opts = DemoOptions {
        data_dir,
        seed,
        decode_passphrase,
    };
    let mut stdout = std::io::stdout();
    match run_demo(&opts, &mut stdout) {
        Ok(r) => {
            println!("demo complete: trip {}", r.trip_id);
            Ok(())
        }
        Err(e @ DemoError::DataDirNotEmpty { .. }) => Err(Failure::Validation(e.to_string())),
        Err(e) => Err(Failure::Runtime(format!("demo failed at {e}"))),
    }
}

fn report_cmd(data_dir: Option<PathBuf>, url: Option<String>, out: Option<PathBuf>, login: &str) -> Outcome {
    let counts = match url {
        Some(url) => {
            let password = std::env::var("FLEETLINE_ADMIN_PASSWORD")
                .map_err(|_| Failure::Validation("set FLEETLINE_ADMIN_PASSWORD to report from a service".into()))?;
            report::from_service(&url, login, &password).map_err(Failure::runtime)?
        }
        None => {
            let dir = match data_dir {
                Some(d) => d,
                None => config()?.data_dir,
            };
            report::from_data_dir(&dir).map_err(Failure::runtime)?
        }
    };
    let csv = report::to_csv(&counts);
    match out {
        Some(p) => std::fs::write(&p, csv).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?,
        None => print!("{csv}"),
    }
    Ok(())
}
