use clap::{Args, Parser, Subcommand, ValueEnum};
use dilationlab::dilation::{atomic_star_dilate, fbp_dilate, solel_dilate, star_dilate_defect_free};
use dilationlab::fock::{norm_lower_seq, MAX_BASIS_ENV};
use dilationlab::io::{
    self, AtomicDilationJson, AtomicRepJson, DilationJson, FiniteRepJson, LevelChainJson, RelJson, TermJson, ThetaJson,
};
use dilationlab::numkernel::{fmt_complex, fmt_num, CMatrix};
use dilationlab::paperlab::{self, LabOptions};
use dilationlab::reps::{tail_rep, validate, AtomicRep, Tail};
use dilationlab::semigroup::{classify, parse_letters, Letter, PermRelation};
use dilationlab::stara::{parse_star, reduce};
use dilationlab::urelations::{normalize_linear, UnitaryRelation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "dilationlab", version, about = "Rank-2 graph semigroups: normal forms, norms, representations and dilations")]
struct Cli {
    /// JSON file with tolerances and limits.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Normal form of a word, or of a *-monomial with --star.
    Normalize {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long)]
        star: bool,
    },
    /// Isomorphism classes of all relations on m x n generators.
    Classify {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Residual report for a finite representation.
    ValidateRep {
        #[arg(long)]
        rep: PathBuf,
    },
    /// Dilates a representation.
    Dilate(DilateArgs),
    /// Fock-space lower bounds for the norm of a polynomial, as CSV.
    Norm {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_cutoff: usize,
    },
    /// Runs the worked examples.
    Paperlab {
        #[arg(long)]
        only: Option<String>,
        #[arg(long, conflicts_with = "text")]
        json: bool,
        #[arg(long)]
        text: bool,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        fock_depth: Option<usize>,
    },
    /// Truncated tail representation as a representation JSON.
    TailRep {
        #[arg(long)]
        theta: PathBuf,
        /// Repeating blocks, e.g. "e1 f1 e2 f1".
        #[arg(long)]
        cycle: String,
        #[arg(long, default_value = "")]
        prefix: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        cutoff: usize,
    },
    /// Atomic representations: DOT output, dilation, random defect-free examples.
    Atomic(AtomicArgs),
}

#[derive(Args)]
struct DilateArgs {
    /// Representation JSON (atomic graph JSON for --mode atomic).
    #[arg(long)]
    rep: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Row contraction dilated by --mode fbp.
    #[arg(long, value_enum, default_value_t = Family::Products)]
    family: Family,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fbp,
    Solel,
    Star,
    Atomic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    /// `σ(e_i)`
    E,
    /// `σ(f_j)`
    F,
    /// `σ(e_i f_j)` in lexicographic order of `(i, j)`
    Products,
}

#[derive(Args)]
struct AtomicArgs {
    /// Atomic graph JSON.
    #[arg(long, conflicts_with = "random")]
    graph: Option<PathBuf>,
    /// Generate a random defect-free graph on at most this many vertices (needs --theta).
    #[arg(long, requires = "theta")]
    random: Option<usize>,
    #[arg(long)]
    theta: Option<PathBuf>,
    /// Replace the graph by its minimal *-dilation truncated at this depth.
    #[arg(long)]
    dilate: Option<usize>,
    /// Emit JSON instead of DOT.
    #[arg(long)]
    json: bool,
}

/// Tolerances and limits, read from `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    tau_rel: f64,
    tau_unitary: f64,
    tau_int: f64,
    max_depth: usize,
    max_basis: usize,
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tau_rel: 1e-9,
            tau_unitary: 1e-10,
            tau_int: 1e-8,
            max_depth: 8,
            max_basis: dilationlab::fock::DEFAULT_MAX_BASIS,
            format: Format::Text,
        }
    }
}

impl Config {
    fn check(&self) -> Result<(), Failure> {
        for (name, v) in [("tau_rel", self.tau_rel), ("tau_unitary", self.tau_unitary), ("tau_int", self.tau_int)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("config: {name} must be positive")));
            }
        }
        if self.max_depth == 0 || self.max_basis == 0 {
            return Err(Failure::Usage("config: limits must be positive".into()));
        }
        Ok(())
    }
}

enum Failure {
    /// Bad flags or unreadable input; exit code 2.
    Usage(String),
    /// The input was read but fails a mathematical precondition or check; exit code 1.
    Invalid(String),
}

impl From<dilationlab::Error> for Failure {
    fn from(e: dilationlab::Error) -> Self {
        match e {
            dilationlab::Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

const THETA_HELP: &str = r#"relation JSON: {"m":2,"n":2,"theta":[[[1,1],[1,1]],[[1,2],[2,1]],...]} (1-based (i,j) -> (i',j'))
  or {"m":2,"n":2,"u":[[[re,im],...],...]} (rows (i,j), columns (i',j'), lexicographic)"#;
const REP_HELP: &str = r#"representation JSON: {"rel": <relation>, "d": 2, "E": [matrix, ...], "F": [matrix, ...]}
  matrix = list of rows of [re,im] pairs"#;
const POLY_HELP: &str = r#"polynomial JSON: [{"coeff": [[[re,im],...]], "word": "e1 f2"}, ...]"#;
const ATOMIC_HELP: &str = r#"atomic graph JSON: {"rel": <theta relation>, "vertices": ["x", ...],
  "e": [[[src, dst, [re,im]], ...] per e_i], "f": [[...] per f_j]} (0-based vertices)"#;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, help: &str) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    io::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}\nexpected {help}", path.display())))
}

fn read_relation(path: &Path) -> Result<UnitaryRelation, Failure> {
    read_json::<RelJson>(path, THETA_HELP)?.to_relation().map_err(Failure::from)
}

fn read_perm(path: &Path) -> Result<PermRelation, Failure> {
    read_relation(path)?
        .perm()
        .cloned()
        .ok_or_else(|| Failure::Invalid("this command needs a permutation relation".into()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn format_linear(terms: &[(dilationlab::semigroup::NormalWord, dilationlab::numkernel::C64)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms.iter().map(|(w, c)| format!("({})·{w}", fmt_complex(*c))).collect::<Vec<_>>().join(" + ")
}

fn theta_line(rel: &PermRelation) -> String {
    ThetaJson::from(rel)
        .theta
        .iter()
        .map(|[[i, j], [a, b]]| format!("({i},{j})->({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_blocks(s: &str) -> Result<Vec<(usize, usize)>, Failure> {
    let ls = parse_letters(s)?;
    if ls.len() % 2 != 0 {
        return Err(Failure::Usage(format!("tail blocks must be e_i f_j pairs: `{s}`")));
    }
    ls.chunks(2)
        .map(|p| match (p[0], p[1]) {
            (Letter::E(i), Letter::F(j)) => Ok((i, j)),
            _ => Err(Failure::Usage(format!("tail blocks must be e_i f_j pairs: `{s}`"))),
        })
        .collect()
}

fn dilate(args: &DilateArgs, cfg: &Config) -> Result<(), Failure> {
    if args.depth > cfg.max_depth {
        return Err(Failure::Usage(format!("depth {} exceeds max_depth {}", args.depth, cfg.max_depth)));
    }
    let out = args.out.as_deref();
    let text = match args.mode {
        Mode::Atomic => {
            let a = read_json::<AtomicRepJson>(&args.rep, ATOMIC_HELP)?.to_rep()?;
            io::to_string(&AtomicDilationJson::from(&atomic_star_dilate(&a, args.depth)?))
        }
        mode => {
            let rep = read_json::<FiniteRepJson>(&args.rep, REP_HELP)?.to_rep()?;
            match mode {
                Mode::Fbp => {
                    let ops: Vec<CMatrix> = match args.family {
                        Family::E => rep.es().to_vec(),
                        Family::F => rep.fs().to_vec(),
                        Family::Products => (0..rep.rel().m())
                            .flat_map(|i| (0..rep.rel().n()).map(move |j| (i, j)))
                            .map(|(i, j)| rep.letters(&[Letter::E(i), Letter::F(j)]))
                            .collect(),
                    };
                    io::to_string(&DilationJson::new("fbp", &fbp_dilate(&ops, args.depth)?))
                }
                Mode::Solel => {
                    let r = solel_dilate(&rep, args.depth)?;
                    let iso = r.diagnostics.isometry_residual;
                    if iso > cfg.tau_int {
                        eprintln!("warning: interior isometry residual {} exceeds tau_int", fmt_num(iso));
                    }
                    io::to_string(&DilationJson::new("solel", &r))
                }
                Mode::Star => io::to_string(&LevelChainJson::new(&star_dilate_defect_free(&rep, args.depth)?)),
                Mode::Atomic => unreachable!(),
            }
        }
    };
    emit(&text, out)
}

fn atomic(args: &AtomicArgs, seed: u64) -> Result<(), Failure> {
    let mut a = match (&args.graph, args.random) {
        (Some(p), _) => read_json::<AtomicRepJson>(p, ATOMIC_HELP)?.to_rep()?,
        (None, Some(max)) => {
            let rel = read_perm(args.theta.as_deref().expect("clap requires --theta"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            AtomicRep::random_defect_free(&rel, max.max(1), &mut rng)
                .ok_or_else(|| Failure::Invalid("no defect-free graph found for this relation".into()))?
        }
        (None, None) => return Err(Failure::Usage("give --graph or --random".into())),
    };
    if let Some(depth) = args.dilate {
        a = atomic_star_dilate(&a, depth)?.graph;
    }
    if args.json {
        println!("{}", io::to_string(&AtomicRepJson::from(&a)));
    } else {
        print!("{}", a.to_dot());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg: Config = match &cli.config {
        Some(p) => read_json(p, "config JSON: {\"tau_rel\":1e-9,\"tau_unitary\":1e-10,\"tau_int\":1e-8,\"max_depth\":8,\"max_basis\":200000,\"format\":\"text\"}")?,
        None => Config::default(),
    };
    cfg.check()?;
    if std::env::var_os(MAX_BASIS_ENV).is_none() {
        // The environment variable takes precedence over the config file.
        std::env::set_var(MAX_BASIS_ENV, cfg.max_basis.to_string());
    }
    match cli.cmd {
        Cmd::Normalize { theta, word, star } => {
            let rel = read_relation(&theta)?;
            if star {
                println!("{}", reduce(&rel, &parse_star(&word)?)?);
            } else {
                let letters = parse_letters(&word)?;
                match rel.perm() {
                    Some(p) => println!("{}", p.normalize(&letters)?),
                    None => println!("{}", format_linear(&normalize_linear(&rel, &letters)?)),
                }
            }
        }
        Cmd::Classify { m, n, json } => {
            let classes = classify(m, n)?;
            if json || cfg.format == Format::Json {
                #[derive(Serialize)]
                struct Class {
                    representative: ThetaJson,
                    members: usize,
                }
                let out: Vec<Class> = classes
                    .iter()
                    .map(|c| Class { representative: (&c.representative).into(), members: c.members.len() })
                    .collect();
                println!("{}", io::to_string(&out));
            } else {
                for c in &classes {
                    println!("{}  [{} members]", theta_line(&c.representative), c.members.len());
                }
            }
        }
        Cmd::ValidateRep { rep } => {
            let rep = read_json::<FiniteRepJson>(&rep, REP_HELP)?.to_rep()?;
            let report = validate(&rep, cfg.tau_rel);
            println!("{}", io::to_string(&report));
            if !report.is_representation {
                return Err(Failure::Invalid("not a representation".into()));
            }
        }
        Cmd::Dilate(args) => dilate(&args, &cfg)?,
        Cmd::Norm { theta, poly, max_cutoff } => {
            if max_cutoff > cfg.max_depth {
                return Err(Failure::Usage(format!("max-cutoff {max_cutoff} exceeds max_depth {}", cfg.max_depth)));
            }
            let rel = read_relation(&theta)?;
            let terms: Vec<TermJson> = read_json(&poly, POLY_HELP)?;
            let x = io::poly_from_json(&rel, &terms)?;
            println!("cutoff,lower_bound");
            for (k, b) in norm_lower_seq(&rel, &x, max_cutoff)?.iter().enumerate() {
                println!("{},{}", k + 1, fmt_num(*b));
            }
        }
        Cmd::Paperlab { only, json, text: _, grid, fock_depth } => {
            let mut opts = LabOptions::default();
            opts.grid = grid.unwrap_or(opts.grid).max(1);
            opts.fock_depth = fock_depth.unwrap_or(opts.fock_depth).max(1);
            let reports = match only {
                Some(id) => vec![paperlab::run(&id, &opts)
                    .ok_or_else(|| Failure::Usage(format!("unknown example `{id}`; known: {}", paperlab::IDS.join(", "))))?],
                None => paperlab::run_all(&opts),
            };
            if json || (cfg.format == Format::Json) {
                println!("{}", io::to_string(&reports));
            } else {
                for r in &reports {
                    println!("{r}");
                }
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
            if !failed.is_empty() {
                return Err(Failure::Invalid(format!("failing reports: {}", failed.join(", "))));
            }
        }
        Cmd::TailRep { theta, cycle, prefix, depth, cutoff } => {
            let rel = read_perm(&theta)?;
            let tail = Tail::new(parse_blocks(&prefix)?, parse_blocks(&cycle)?)?;
            let tr = tail_rep(&rel, &tail, depth, cutoff)?;
            println!("{}", io::to_string(&FiniteRepJson::from(tr.rep())));
        }
        Cmd::Atomic(args) => atomic(&args, cli.seed)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
