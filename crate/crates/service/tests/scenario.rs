mod common;

use common::{options, World};
use fleetline::report;
use fleetline::scenario::{builtin, parse, seed, ScenarioError, FIGURE4};
use fleetline_core::reviews::sentiment_counts;

fn world() -> World {
    World::new()
}

/// Reviews whose words include a positive keyword and no negative one, and
/// the reverse, counted directly from the keyword table.
fn keyword_tally(texts: &[String]) -> (usize, usize, usize) {
    const POS: [&str; 6] = ["good", "great", "happy", "active", "nice", "believe"];
    const NEG: [&str; 6] = ["sad", "bad", "poor", "useless", "cold", "cry"];
    let (mut p, mut n, mut z) = (0, 0, 0);
    for t in texts {
        let words: Vec<String> = t
            .split(|c: char| !c.is_alphabetic())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        let hp = words.iter().filter(|w| POS.contains(&w.as_str())).count();
        let hn = words.iter().filter(|w| NEG.contains(&w.as_str())).count();
        match hp.cmp(&hn) {
            std::cmp::Ordering::Greater => p += 1,
            std::cmp::Ordering::Less => n += 1,
            std::cmp::Ordering::Equal => z += 1,
        }
    }
    (p, n, z)
}

#[test]
fn empty_scenario_creates_nothing() {
    let w = world();
    let before = w.svc.seq();
    let s = seed(&w.svc, "").unwrap();
    assert_eq!(s.entities(), 0);
    assert!(s.name.is_none());
    assert_eq!(w.svc.seq(), before);
    let s = seed(&w.svc, "# only a comment\n\n").unwrap();
    assert_eq!(s.entities(), 0);
}

#[test]
fn figure4_seeds_fifty_positive_and_thirty_negative_reviews() {
    let w = world();
    let s = seed(&w.svc, FIGURE4).unwrap();
    assert_eq!(s.reviews, 80);
    let texts: Vec<String> = w.svc.read(|st| st.reviews.values().map(|r| r.text.clone()).collect());
    assert_eq!(keyword_tally(&texts), (50, 30, 0));
    let counts = w.svc.read(|st| {
        let (lex, stop) = w.svc.lexicon();
        sentiment_counts(st.reviews.values(), lex, stop)
    });
    assert_eq!((counts.positive, counts.negative, counts.neutral), (50, 30, 0));
}

#[test]
fn doubled_scenario_seeds_twice_as_many() {
    let w = world();
    seed(&w.svc, builtin("doubled").unwrap()).unwrap();
    let texts: Vec<String> = w.svc.read(|st| st.reviews.values().map(|r| r.text.clone()).collect());
    assert_eq!(keyword_tally(&texts), (100, 60, 0));
}

#[test]
fn reseeding_is_a_no_op() {
    let w = world();
    let first = seed(&w.svc, FIGURE4).unwrap();
    assert!(!first.already_seeded);
    let seq = w.svc.seq();
    let again = seed(&w.svc, FIGURE4).unwrap();
    assert!(again.already_seeded);
    assert_eq!(again.entities(), 0);
    assert_eq!(w.svc.seq(), seq);
}

#[test]
fn report_from_disk_matches_the_review_store() {
    let dir = tempfile::tempdir().unwrap();
    let w = World::on_disk(dir.path(), options());
    assert_eq!(report::to_csv(&report::from_data_dir(dir.path()).unwrap()), "positive,0\nnegative,0\nneutral,0\n");
    seed(&w.svc, FIGURE4).unwrap();
    let direct = w.svc.read(|st| {
        let (lex, stop) = w.svc.lexicon();
        sentiment_counts(st.reviews.values(), lex, stop)
    });
    assert_eq!(report::from_data_dir(dir.path()).unwrap(), direct);
    assert_eq!(report::to_csv(&direct), "positive,50\nnegative,30\nneutral,0\n");
}

fn validation(text: &str) -> (usize, String) {
    let w = world();
    let before = w.svc.seq();
    match seed(&w.svc, text) {
        Err(ScenarioError::Validation { line, field, .. }) => {
            assert_eq!(w.svc.seq(), before, "validation failed after mutating");
            (line, field)
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

const HEAD: &str = r#"{"kind":"scenario","payload":{"name":"t"}}
{"kind":"provider","payload":{"ref":"p1","name":"P","login":"prov1","password":"pw"}}
"#;

#[test]
fn validation_names_line_and_field_before_any_mutation() {
    let bad_ref = format!(
        "{HEAD}{}\n",
        r#"{"kind":"vehicle","payload":{"ref":"v1","provider":"p9","type":"van","costPerKm":100,"lat":18.5,"lon":73.8}}"#
    );
    assert_eq!(validation(&bad_ref), (3, "provider".into()));

    let bad_lat = format!(
        "{HEAD}{}\n",
        r#"{"kind":"vehicle","payload":{"ref":"v1","provider":"p1","type":"van","costPerKm":100,"lat":95,"lon":73.8}}"#
    );
    assert_eq!(validation(&bad_lat), (3, "lat".into()));

    let dup_login = format!(
        "{HEAD}{}\n",
        r#"{"kind":"customer","payload":{"ref":"c1","name":"C","login":"prov1","password":"pw"}}"#
    );
    assert_eq!(validation(&dup_login), (3, "login".into()));

    let taken = format!(
        "{HEAD}{}\n",
        r#"{"kind":"customer","payload":{"ref":"c1","name":"C","login":"admin","password":"pw"}}"#
    );
    assert_eq!(validation(&taken), (3, "login".into()));

    let unknown_kind = format!("{HEAD}{}\n", r#"{"kind":"spaceship","payload":{}}"#);
    assert_eq!(validation(&unknown_kind).0, 3);

    let headless = r#"{"kind":"provider","payload":{"ref":"p1","name":"P","login":"prov1","password":"pw"}}"#;
    assert_eq!(validation(headless).0, 1);
}

#[test]
fn builtin_scenarios_parse() {
    for name in ["figure4", "doubled"] {
        let s = parse(builtin(name).unwrap()).unwrap();
        assert_eq!(s.name.as_deref(), Some(name));
    }
    assert!(builtin("nope").is_none());
}
