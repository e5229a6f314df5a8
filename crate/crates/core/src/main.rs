//! `zerosum`: command-line access to counting, finding, constructions,
//! congruence checks, extremal search and the self-test.
//!
//! Exit codes: 0 success, 1 verification failure or nothing found, 2 usage
//! or input error, 3 budget exhausted.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use zerosum::congruence::{
    binomial, corollary_pn, lemma6_matrix_det, lucas_binomial, olson_alternating, theorem3_rank_argument,
    window_identity_check,
};
use zerosum::construct::{
    construct_cor5_lower, construct_egz_lower, construct_thm2_lower, construct_thm3_lower, construct_thm6_lower,
    Construction,
};
use zerosum::lifting::{find_2x, find_3x, find_5x, Lifted};
use zerosum::search::{compute_s_l, verify_upper_bound, SearchConfig, Status, Verdict};
use zerosum::selftest::{self, Tier};
use zerosum::{Error, GroupSpec, LengthSet, Sequence, ZeroSumDp};

#[derive(Parser)]
#[command(name = "zerosum", version, about = "Zero-sum subsequences over finite abelian groups")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Budget {
    #[arg(long)]
    budget_nodes: Option<u64>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl Budget {
    fn config(&self) -> SearchConfig {
        let mut cfg = SearchConfig::default().with_workers(self.workers);
        if let Some(n) = self.budget_nodes {
            cfg = cfg.with_nodes(n);
        }
        if let Some(s) = self.budget_seconds {
            cfg = cfg.with_time(Duration::from_secs_f64(s));
        }
        cfg
    }
}

#[derive(Subcommand)]
enum Command {
    /// s_L(G) by exhaustive search; `--avoid all` gives D(G).
    Invariant {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long, default_value = "all")]
        avoid: LengthSet,
        #[command(flatten)]
        budget: Budget,
    },
    /// Zero-sum subsequence counts N^k(S) for every k.
    Count {
        #[arg(long)]
        input: PathBuf,
    },
    /// A zero-sum subsequence of a prescribed length.
    Find {
        #[arg(long)]
        input: PathBuf,
        /// `2x`, `3x`, `5x`, `length K` or `in L`.
        #[arg(long, num_args = 1..=2, required = true)]
        target: Vec<String>,
    },
    /// An extremal sequence, certified by its zero-sum length spectrum.
    Construct {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        k: Option<u32>,
        /// Group for `egz`.
        #[arg(long)]
        group: Option<GroupSpec>,
        /// Write the sequence here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Randomized or exhaustive checks of the counting congruences.
    VerifyCongruence {
        #[arg(long, value_enum)]
        statement: Statement,
        #[arg(long)]
        group: Option<GroupSpec>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Power of p for `corollary`; drawn at random when absent.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        k: Option<u64>,
        /// Largest `a` for `lucas` (default 200) and `lemma6` (default 12).
        #[arg(long)]
        max_a: Option<u64>,
    },
    /// Longest sequence avoiding zero-sums with lengths in L.
    Search {
        #[arg(long)]
        group: GroupSpec,
        #[arg(long)]
        avoid: LengthSet,
        #[command(flatten)]
        budget: Budget,
        /// Resumable frontier file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Only decide whether s_L(G) ≤ LEN.
        #[arg(long, value_name = "LEN")]
        upper_bound: Option<u64>,
    },
    /// The acceptance checks.
    Selftest {
        #[arg(long, value_enum, default_value_t = TierArg::Fast)]
        tier: TierArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Thm2,
    Thm3,
    Thm6,
    Cor5,
    Egz,
}

#[derive(Clone, Copy, ValueEnum)]
enum Statement {
    Olson,
    Corollary,
    Window,
    Lucas,
    Lemma6,
    #[value(name = "thm3-rank")]
    Thm3Rank,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Fast,
    Full,
}

/// A finished command: its output and whether every check it made held.
struct Report {
    json: Value,
    text: String,
    code: u8,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { json, text, code: 0 }
    }

    fn with_code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command, cli.json) {
        Ok(mut report) => {
            if cli.json {
                if let Value::Object(map) = &mut report.json {
                    map.insert("schema".into(), json!("zerosum/1"));
                }
                emit(&format!("{}\n", serde_json::to_string_pretty(&report.json).expect("serializable")));
            } else {
                emit(&report.text);
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("zerosum: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => 3,
        Error::InvariantViolation(_) => 1,
        _ => 2,
    }
}

fn dispatch(command: Command, json: bool) -> zerosum::Result<Report> {
    match command {
        Command::Invariant { group, avoid, budget } => invariant(&group, &avoid, &budget),
        Command::Count { input } => count(&read_sequence(&input)?),
        Command::Find { input, target } => find(&read_sequence(&input)?, &target),
        Command::Construct {
            which,
            p,
            n,
            r,
            k,
            group,
            output,
        } => construct(which, Params { p, n, r, k }, group, output),
        Command::VerifyCongruence {
            statement,
            group,
            trials,
            seed,
            q,
            p,
            n,
            r,
            k,
            max_a,
        } => verify_congruence(statement, group, trials, seed, q, Params { p, n, r, k: k.map(|k| k as u32) }, max_a),
        Command::Search {
            group,
            avoid,
            budget,
            checkpoint,
            upper_bound,
        } => {
            let mut cfg = budget.config();
            cfg.checkpoint = checkpoint;
            search(&group, &avoid, upper_bound, &cfg)
        }
        Command::Selftest {
            tier,
            seed,
            workers,
            checkpoint_dir,
        } => {
            let tier = match tier {
                TierArg::Fast => Tier::Fast,
                TierArg::Full => Tier::Full,
            };
            let opts = selftest::Options {
                tier,
                seed,
                workers,
                checkpoint_dir,
            };
            Ok(run_selftest(&opts, !json))
        }
    }
}

fn read_sequence(path: &PathBuf) -> zerosum::Result<Sequence> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Sequence::parse(&text)
}

fn invariant(group: &GroupSpec, avoid: &LengthSet, budget: &Budget) -> zerosum::Result<Report> {
    let lengths = avoid.normalized_for(group);
    let v = compute_s_l(group, &lengths, &budget.config())?;
    let c = &v.certificate;
    let json = json!({
        "group": group.to_string(),
        "avoid": avoid.to_string(),
        "value": v.value,
        "lower_bound": v.lower_bound,
        "exact": v.exact,
        "witness": c.witness.to_inline(),
        "witness_length": c.witness_length,
        "nodes_explored": c.nodes_explored,
        "elapsed_seconds": c.elapsed.as_secs_f64(),
    });
    let text = match v.value {
        Some(value) => format!(
            "{value}\nwitness of length {} avoiding {avoid}: {}\n{} nodes, exhaustive\n",
            c.witness_length,
            c.witness.to_inline(),
            c.nodes_explored
        ),
        None => format!(
            "≥ {} (budget exhausted after {} nodes)\nwitness: {}\n",
            v.lower_bound,
            c.nodes_explored,
            c.witness.to_inline()
        ),
    };
    Ok(Report::ok(json, text).with_code(if v.exact { 0 } else { 3 }))
}

fn count(s: &Sequence) -> zerosum::Result<Report> {
    let table = ZeroSumDp::default().count_table(s)?;
    let spectrum = table.spectrum();
    let mut json = table.to_json();
    json["spectrum"] = json!(spectrum);
    let mut text = format!("group {}, length {}\n", s.group(), s.length());
    for (k, c) in table.counts().iter().enumerate() {
        text.push_str(&format!("N^{k} = {c}\n"));
    }
    text.push_str(&format!("zero-sum lengths: {spectrum:?}\n"));
    Ok(Report::ok(json, text))
}

fn find(s: &Sequence, target: &[String]) -> zerosum::Result<Report> {
    let dp = ZeroSumDp::default();
    let usage = || Error::Precondition(format!("unknown target {:?}", target.join(" ")));
    let (sub, depth) = match target {
        [t] if t == "2x" => lifted(find_2x(s)?),
        [t] if t == "3x" => lifted(find_3x(s)?),
        [t] if t == "5x" => lifted(find_5x(s)?),
        [t, k] if t == "length" => {
            let k: u64 = k.parse().map_err(|_| usage())?;
            (dp.find_zero_sum_of_length(s, k)?, None)
        }
        [t, l] if t == "in" => (dp.find_zero_sum_length_in(s, &l.parse()?)?, None),
        _ => return Err(usage()),
    };
    let Some(w) = sub else {
        let msg = format!("no zero-sum subsequence for target {}", target.join(" "));
        return Ok(Report::ok(json!({ "found": false, "target": target.join(" ") }), format!("{msg}\n")).with_code(1));
    };
    w.verify(s)?;
    let json = json!({
        "found": true,
        "target": target.join(" "),
        "witness": w.sub.to_inline(),
        "length": w.target_length,
        "recursion_depth": depth,
        "verified": true,
    });
    let text = format!(
        "{}# verified: length {}, sum 0, contained in the input\n",
        w.sub.to_text(),
        w.target_length
    );
    Ok(Report::ok(json, text))
}

fn lifted(l: Lifted) -> (Option<zerosum::Witness>, Option<u32>) {
    (Some(l.witness), Some(l.recursion_depth))
}

struct Params {
    p: Option<u32>,
    n: Option<u32>,
    r: Option<u32>,
    k: Option<u32>,
}

fn need<T>(v: Option<T>, name: &str) -> zerosum::Result<T> {
    v.ok_or_else(|| Error::Precondition(format!("--{name} is required")))
}

fn construct(which: Which, a: Params, group: Option<GroupSpec>, output: Option<PathBuf>) -> zerosum::Result<Report> {
    let c: Construction = match which {
        Which::Thm2 => construct_thm2_lower(need(a.p, "p")?, need(a.r, "r")? as usize)?,
        Which::Thm3 => construct_thm3_lower(need(a.p, "p")?, a.n.unwrap_or(1), need(a.r, "r")?, need(a.k, "k")?)?,
        Which::Thm6 => construct_thm6_lower(need(a.p, "p")?, a.n.unwrap_or(1))?,
        Which::Cor5 => construct_cor5_lower(need(a.p, "p")?, a.n.unwrap_or(1))?,
        Which::Egz => construct_egz_lower(&need(group, "group")?, a.k.unwrap_or(1), &SearchConfig::default())?,
    };
    let file = format!("# {} construction: {}\n{}", c.which, c.claim, c.sequence.to_text());
    let mut text = String::new();
    match &output {
        Some(path) => {
            fs::write(path, &file).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            text.push_str(&format!("wrote {}\n", path.display()));
        }
        None => text.push_str(&file),
    }
    text.push_str(&format!(
        "# certified: length {}, zero-sum lengths {:?} ({})\n",
        c.length, c.spectrum, c.claim
    ));
    Ok(Report::ok(serde_json::to_value(&c).expect("serializable"), text))
}

fn verify_congruence(
    statement: Statement,
    group: Option<GroupSpec>,
    trials: usize,
    seed: u64,
    q: Option<u64>,
    a: Params,
    max_a: Option<u64>,
) -> zerosum::Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();
    let mut failures = 0usize;
    match statement {
        Statement::Olson | Statement::Corollary | Statement::Window => {
            let g = need(group, "group")?;
            let p = g
                .p_group_prime()
                .ok_or_else(|| Error::UnsupportedGroup(format!("{g} is not a p-group")))?;
            for _ in 0..trials {
                let report = match statement {
                    Statement::Olson => {
                        let len = g.davenport_star() as usize + rng.gen_range(0..=8);
                        serde_json::to_value(olson_alternating(&Sequence::random(&g, len, &mut rng), p)?)
                    }
                    Statement::Corollary => {
                        let q = match q {
                            Some(q) => q,
                            None => random_power(p as u64, g.exponent() as u64, &mut rng),
                        };
                        let len = (g.davenport_star() + q) as usize - 1 + rng.gen_range(0..=8);
                        serde_json::to_value(corollary_pn(&Sequence::random(&g, len, &mut rng), p, q)?)
                    }
                    _ => {
                        let len = rng.gen_range(1..=10);
                        let m = rng.gen_range(0..=len as u64);
                        let j = rng.gen_range(0..=m);
                        serde_json::to_value(window_identity_check(&Sequence::random(&g, len, &mut rng), j, m)?)
                    }
                }
                .expect("serializable");
                failures += usize::from(!report["holds"].as_bool().unwrap_or(false));
                reports.push(report);
            }
        }
        Statement::Lucas => {
            let primes = match (a.p, &group) {
                (Some(p), _) => vec![p],
                (None, Some(g)) => vec![g.p_group_prime().ok_or_else(|| {
                    Error::UnsupportedGroup(format!("{g} is not a p-group"))
                })?],
                (None, None) => vec![2, 3, 5, 7],
            };
            let max_a = max_a.unwrap_or(200);
            for p in primes {
                let mut bad = 0usize;
                for x in 0..=max_a {
                    for y in 0..=x {
                        let exact = binomial(x, y) % BigUint::from(p);
                        bad += usize::from(exact != BigUint::from(lucas_binomial(x, y, p)?));
                    }
                }
                failures += bad;
                reports.push(json!({ "p": p, "max_a": max_a, "mismatches": bad, "holds": bad == 0 }));
            }
        }
        Statement::Lemma6 => {
            let ks: Vec<u64> = match a.k {
                Some(k) => vec![k as u64],
                None => (1..=8).collect(),
            };
            for k in ks {
                for x in 1..=max_a.unwrap_or(12) {
                    let r = lemma6_matrix_det(x, k)?;
                    let sign = if (k * (k + 1) / 2) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    let holds = r.holds && r.det == sign * BigInt::from(binomial(x, k));
                    failures += usize::from(!holds);
                    reports.push(serde_json::to_value(&r).expect("serializable"));
                }
            }
        }
        Statement::Thm3Rank => {
            let p = need(a.p, "p")?;
            let r = a.r.unwrap_or(3);
            let ks: Vec<u64> = match a.k {
                Some(k) => vec![k as u64],
                None => (2..=(p.saturating_sub(r) + 1) as u64).collect(),
            };
            for k in ks {
                let report = theorem3_rank_argument(p, a.n.unwrap_or(1), r, k)?;
                failures += usize::from(!report.certified);
                reports.push(serde_json::to_value(&report).expect("serializable"));
            }
        }
    }
    let total = reports.len();
    let text = format!("{total} checks, {failures} failures\n");
    let json = json!({ "checks": total, "failures": failures, "reports": reports });
    Ok(Report::ok(json, text).with_code(if failures == 0 { 0 } else { 1 }))
}

fn random_power(p: u64, exponent: u64, rng: &mut ChaCha8Rng) -> u64 {
    let mut powers = vec![p];
    while *powers.last().unwrap() < exponent {
        powers.push(powers.last().unwrap() * p);
    }
    powers[rng.gen_range(0..powers.len())]
}

fn search(group: &GroupSpec, avoid: &LengthSet, upper_bound: Option<u64>, cfg: &SearchConfig) -> zerosum::Result<Report> {
    let lengths = avoid.normalized_for(group);
    if let Some(len) = upper_bound {
        let c = verify_upper_bound(group, &lengths, len, cfg)?;
        let code = match c.verdict {
            Verdict::Confirmed => 0,
            Verdict::Refuted => 1,
            Verdict::Inconclusive => 3,
        };
        let mut text = format!(
            "s_L(G) ≤ {len} for L = {avoid}: {:?} ({} nodes)\n",
            c.verdict, c.nodes_explored
        );
        if let Some(s) = &c.counterexample {
            text.push_str(&format!("counterexample: {}\n", s.to_inline()));
        }
        return Ok(Report::ok(serde_json::to_value(&c).expect("serializable"), text).with_code(code));
    }
    let v = compute_s_l(group, &lengths, cfg)?;
    let c = &v.certificate;
    let status = match c.status {
        Status::Exhaustive => "exhaustive",
        Status::LowerBoundOnly => "lower bound only",
    };
    let text = format!(
        "{}longest sequence avoiding {avoid}: length {} ({status}, {} nodes)\ns_L(G) {} {}\n",
        c.witness.to_text(),
        c.witness_length,
        c.nodes_explored,
        if v.exact { "=" } else { "≥" },
        v.lower_bound
    );
    let mut json = serde_json::to_value(&v).expect("serializable");
    json["avoid"] = json!(avoid.to_string());
    Ok(Report::ok(json, text).with_code(if v.exact { 0 } else { 3 }))
}

fn run_selftest(opts: &selftest::Options, stream: bool) -> Report {
    let mut outcomes = Vec::new();
    let mut failed = false;
    for id in selftest::IDS.filter(|&id| id != 12 || opts.tier == Tier::Full) {
        let out = selftest::run(id, opts);
        if stream {
            emit(&format!("{out}\n"));
        }
        failed |= !out.passed && out.gating;
        outcomes.push(out);
    }
    let text = format!("selftest {}\n", if failed { "failed" } else { "passed" });
    let json = json!({ "tier": opts.tier, "seed": opts.seed, "criteria": outcomes, "passed": !failed });
    Report::ok(json, text).with_code(u8::from(failed))
}
