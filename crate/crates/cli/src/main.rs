use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use sl2morph::bbfield::KField;
use sl2morph::blackbox::BBGroup;
use sl2morph::matrix;
use sl2morph::par::Execution;
use sl2morph::pgl2::SetupPGL2Output;
use sl2morph::pipeline::PipelineContext;
use sl2morph::session;
use sl2morph::sharp_flat::ChangeOfBasis;
use sl2morph::toolbox::{self, ToolBox};
use sl2morph::verify::{self, Suite};
use sl2morph::Error;

#[derive(Parser, Debug)]
#[command(name = "sl2morph", version, about = "Morphisms from SL2(p) into a black box group encrypting it")]
struct Cli {
    /// Odd prime, at least 13.
    #[arg(long, global = true)]
    p: Option<u64>,
    /// Seed for the black box oracle and every randomized stage.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Letter pairs per random torus word.
    #[arg(long, global = true, default_value_t = 10)]
    word_length: usize,
    /// Cases per verification suite.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Print stage details.
    #[arg(long, global = true)]
    trace: bool,
    /// Directory for cached set-up, toolbox and change of basis.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Run suites on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the black box group and the PGL2 set-up.
    Setup,
    /// Build the toolbox and print its twelve items.
    Toolbox,
    /// Compute the change of basis between the sharp and flat models.
    Basis,
    /// Map a matrix "a,b;c,d" of SL2(p) into the black box group.
    Map { matrix: String },
    /// Run verification suites.
    Verify {
        /// Suites to run (orders, homomorphism, steinberg); all by default.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPrime(_)
            | Error::ModulusTooSmall(_)
            | Error::ModulusTooLarge(_)
            | Error::NotSpecial
            | Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(format!("cache: {e}"))
    }
}

struct Stages<'a> {
    cli: &'a Cli,
    p: u64,
    group: Arc<BBGroup>,
}

impl<'a> Stages<'a> {
    fn cache_file(&self, name: &str) -> Option<PathBuf> {
        self.cli.cache_dir.as_ref().map(|d| d.join(format!("p{}-seed{}", self.p, self.cli.seed)).join(name))
    }

    fn load(&self, name: &str) -> Option<String> {
        self.cache_file(name).and_then(|f| fs::read_to_string(f).ok())
    }

    fn store(&self, name: &str, text: &str) -> Result<(), Failure> {
        if let Some(f) = self.cache_file(name) {
            fs::create_dir_all(f.parent().unwrap_or(Path::new(".")))?;
            fs::write(f, text)?;
        }
        Ok(())
    }

    fn setup(&self) -> Result<SetupPGL2Output, Failure> {
        if let Some(text) = self.load("setup.txt") {
            if let Ok(s) = toolbox::setup_from_text(&text, &self.group) {
                return Ok(s);
            }
        }
        let s = session::build_setup(&self.group, self.cli.seed)?;
        self.store("setup.txt", &toolbox::setup_to_text(&s, &self.group))?;
        Ok(s)
    }

    fn toolbox(&self) -> Result<Arc<ToolBox>, Failure> {
        if let Some(text) = self.load("toolbox.txt") {
            if let Ok(tb) = ToolBox::from_text(&text, self.group.clone()) {
                if tb.pgl2().word_pairs() == self.cli.word_length {
                    return Ok(Arc::new(tb));
                }
            }
        }
        let tb = session::build_toolbox(&self.group, self.setup()?, self.cli.seed, self.cli.word_length)?;
        self.store("toolbox.txt", &tb.to_text())?;
        Ok(Arc::new(tb))
    }

    fn basis(&self, k: &KField, say: &mut dyn FnMut(String)) -> Result<ChangeOfBasis, Failure> {
        if let Some(text) = self.load("basis.txt") {
            if let Ok(cob) = ChangeOfBasis::from_text(&text, k) {
                say("basis loaded from cache".into());
                return Ok(cob);
            }
        }
        let cob = session::build_basis(k, self.cli.seed, &mut |ev| {
            say(format!("basis stage={} attempt={}", ev.stage, ev.attempt));
        })?;
        self.store("basis.txt", &cob.to_text())?;
        Ok(cob)
    }

    fn context(&self) -> Result<PipelineContext, Failure> {
        let tb = self.toolbox()?;
        let k = KField::new(tb.clone())?;
        let trace = self.cli.trace;
        let cob = self.basis(&k, &mut |line| {
            if trace {
                eprintln!("{line}");
            }
        })?;
        Ok(PipelineContext::new(tb, k, cob)?)
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let p = cli.p.ok_or_else(|| Failure::Usage("--p is required".into()))?;
    if cli.word_length == 0 {
        return Err(Failure::Usage("--word-length must be positive".into()));
    }
    if cli.samples == 0 {
        return Err(Failure::Usage("--samples must be positive".into()));
    }
    let group = session::build_group(p, cli.seed)?;
    let st = Stages { cli, p, group };
    match &cli.command {
        Command::Setup => {
            let s = st.setup()?;
            println!("setup p={} seed={}", p, cli.seed);
            println!("involution {}", s.involution_i);
            println!(
                "gens={} centralizer={} torus_s={}",
                s.gens.len(),
                s.centralizer_list.len(),
                s.torus_s.len()
            );
            if cli.trace {
                print!("{}", toolbox::setup_to_text(&s, &st.group));
            }
        }
        Command::Toolbox => {
            let tb = st.toolbox()?;
            print!("{}", tb.to_text());
            let problems = tb.check_invariants()?;
            for pr in &problems {
                println!("INVARIANT FAILED {pr}");
            }
            return Ok(problems.is_empty());
        }
        Command::Basis => {
            let tb = st.toolbox()?;
            let k = KField::new(tb)?;
            let cob = st.basis(&k, &mut |line| println!("{line}"))?;
            println!("M {}", cob.to_text());
        }
        Command::Map { matrix: text } => {
            let pm = st.group.modulus();
            let g = matrix::parse_mat2(text, &pm)?;
            g.require_sl2(&pm)?;
            let ctx = st.context()?;
            let (x, trace) = ctx.map_element(&g)?;
            println!("{x}");
            if cli.trace {
                print!("{}", trace.render());
            }
        }
        Command::Verify { suites } => {
            let chosen: Vec<Suite> = if suites.is_empty() {
                Suite::ALL.to_vec()
            } else {
                suites
                    .iter()
                    .map(|s| Suite::from_name(s).ok_or_else(|| Failure::Usage(format!("unknown suite {s}"))))
                    .collect::<Result<_, _>>()?
            };
            let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
            let ctx = st.context()?;
            let mut ok = true;
            for suite in chosen {
                let report = match suite {
                    Suite::Orders => verify::check_orders(&ctx, cli.samples, cli.seed, exec)?,
                    Suite::Homomorphism => verify::check_homomorphism(&ctx, cli.samples, cli.seed, exec)?,
                    Suite::Steinberg => verify::check_steinberg(&ctx, cli.samples, cli.seed, exec)?,
                };
                println!("{report}");
                for f in &report.failures {
                    println!("FAIL {} case={} case_seed={} {}", suite.name(), f.case, f.case_seed, f.detail);
                }
                if cli.trace {
                    println!("time {} {:.3}s", suite.name(), report.wall_time.as_secs_f64());
                }
                ok &= report.passed();
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
