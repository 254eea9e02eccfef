use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fleetline"));
    c.env_remove("FLEETLINE_QR_PASSPHRASE")
        .env_remove("FLEETLINE_DATA_DIR")
        .env_remove("FLEETLINE_ADMIN_PASSWORD")
        .env_remove("FLEETLINE_PORT");
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn demo(dir: &Path, seed: u64) -> Output {
    run(bin().args(["demo", "--seed", &seed.to_string(), "--data-dir"]).arg(dir))
}

#[test]
fn demo_succeeds_with_the_expected_cost() {
    let dir = tempfile::tempdir().unwrap();
    let o = demo(&dir.path().join("d"), 42);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = stdout(&o);
    assert!(t.contains("final_cost = 50.00"), "{t}");
    assert!(t.contains("recovered summary equals served trip"), "{t}");
    assert!(t.contains("[replay-check]"), "{t}");
}

#[test]
fn demo_transcripts_depend_only_on_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = demo(&dir.path().join("a"), 7);
    let b = demo(&dir.path().join("b"), 7);
    let c = demo(&dir.path().join("c"), 8);
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn demo_refuses_a_used_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    assert!(demo(dir.path(), 1).status.success());
    let o = demo(dir.path(), 1);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("DataDirNotEmpty"), "{}", stderr(&o));
}

#[test]
fn demo_with_the_wrong_passphrase_fails_at_qr_open() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin()
        .env("FLEETLINE_QR_PASSPHRASE", "not the right one")
        .args(["demo", "--data-dir"])
        .arg(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("qr-open") && err.contains("AuthFailure"), "{err}");
}

#[test]
fn seed_then_report_reproduces_the_review_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (scenario, want) in [
        ("figure4", "positive,50\nnegative,30\nneutral,0\n"),
        ("doubled", "positive,100\nnegative,60\nneutral,0\n"),
    ] {
        let data = dir.path().join(scenario);
        let o = run(bin().args(["seed", "--scenario", scenario, "--data-dir"]).arg(&data));
        assert!(o.status.success(), "{}", stderr(&o));
        let again = run(bin().args(["seed", "--scenario", scenario, "--data-dir"]).arg(&data));
        assert!(stdout(&again).contains("already seeded"));
        let csv = dir.path().join(format!("{scenario}.csv"));
        let o = run(bin().args(["report", "--data-dir"]).arg(&data).arg("--out").arg(&csv));
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(std::fs::read_to_string(&csv).unwrap(), want);
    }
}

#[test]
fn report_on_an_empty_system_is_all_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin().args(["report", "--data-dir"]).arg(dir.path()));
    assert!(o.status.success());
    assert_eq!(stdout(&o), "positive,0\nnegative,0\nneutral,0\n");
}

#[test]
fn seed_validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.jsonl");
    std::fs::write(
        &file,
        "{\"kind\":\"scenario\",\"payload\":{\"name\":\"bad\"}}\n{\"kind\":\"rating\",\"payload\":{\"customer\":\"c1\",\"vehicle\":\"v1\",\"stars\":3}}\n",
    )
    .unwrap();
    let o = run(bin().args(["seed", "--scenario"]).arg(&file).arg("--data-dir").arg(dir.path().join("d")));
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
    let o = run(bin().args(["seed", "--scenario", "figure4", "--url", "http://127.0.0.1:9"]));
    assert_eq!(o.status.code(), Some(1));
    let o = run(bin().args(["seed", "--scenario"]).arg(dir.path().join("missing.jsonl")));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fixes.jsonl");
    let o = run(bin()
        .args(["simulate", "--vehicle", "V000001", "--km", "3", "--interval-ms", "10000", "--out"])
        .arg(&out));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let fixes: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(fixes.len() > 20);
    assert!(fixes.windows(2).all(|w| w[0]["ts"].as_u64() < w[1]["ts"].as_u64()));
    let o = run(bin().args(["simulate", "--vehicle", "V1", "--path", "95,0;1,1"]));
    assert_eq!(o.status.code(), Some(1));
}

struct Server(Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_answers_clients_and_the_console() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let console = dir.path().join("console");
    std::fs::create_dir(&console).unwrap();
    std::fs::write(console.join("index.html"), "<h1>console</h1>").unwrap();
    let o = run(bin()
        .env("FLEETLINE_ADMIN_PASSWORD", "admin-pass")
        .args(["seed", "--scenario", "figure4", "--data-dir"])
        .arg(&data));
    assert!(o.status.success(), "{}", stderr(&o));

    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let _server = Server(
        bin()
            .args(["serve", "--port", &port.to_string(), "--data-dir"])
            .arg(&data)
            .arg("--console-dir")
            .arg(&console)
            .stderr(Stdio::null())
            .spawn()
            .unwrap(),
    );
    let deadline = Instant::now() + Duration::from_secs(20);
    while TcpStream::connect(("127.0.0.1", port)).is_err() {
        assert!(Instant::now() < deadline, "server did not start");
        std::thread::sleep(Duration::from_millis(50));
    }
    let url = format!("http://127.0.0.1:{port}");

    let o = run(bin().env("FLEETLINE_ADMIN_PASSWORD", "admin-pass").args(["report", "--url", &url]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "positive,50\nnegative,30\nneutral,0\n");

    let o = run(bin().env("FLEETLINE_ADMIN_PASSWORD", "wrong").args(["report", "--url", &url]));
    assert_eq!(o.status.code(), Some(2));

    let o = run(bin()
        .env("FLEETLINE_PASSWORD", "provider-pass-1")
        .args(["simulate", "--vehicle", "V000001", "--km", "1", "--start-ms", "1900000000000"])
        .args(["--url", &url, "--login", "provider1"]));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("accepted"), "{}", stderr(&o));

    let page = ureq::get(&format!("{url}/console/")).call().unwrap().into_body().read_to_string().unwrap();
    assert!(page.contains("console"));
}
