//! `sseq`: exact computations with spectral sequences, filtered complexes and
//! multicomplexes from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 parse or invariant failure, 3 counterexample.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use sseq_core::bigraded::{BigradedModule, Bidegree};
use sseq_core::field::{Field, Fp, Rational};
use sseq_core::filtered::{lambda_fc, spectral_sequence};
use sseq_core::format::{self, Kind, Object};
use sseq_core::harness::{self, Check, GenSpec, Mutation};
use sseq_core::multicomplex::{eprime, lambda_mc, tot};
use sseq_core::paths::{find_r_homotopy, lambda, mapping_path};
use sseq_core::representables::{acyclic_rfib_via_rlp, disk, rfib_via_rlp, sphere};
use sseq_core::spectral::{fixtures, is_acyclic_r_fibration, is_er_quasi_iso, is_r_fibration, is_surjection};
use sseq_core::{SpectralMorphism, SseqError, Ss};

const FIELDS: &str = "Fp:2, Fp:3, Fp:5, Fp:7, Fp:11, Fp:13, Q";

#[derive(Parser, Debug)]
#[command(name = "sseq", version, about = "Exact spectral sequence computations")]
struct Cli {
    /// Coefficient field (Fp:<prime> or Q). Documents carry their own field;
    /// when this is set they must agree with it.
    #[arg(long, global = true, env = "SSEQ_FIELD")]
    field: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimension tables of every stored page, or of one page.
    Pages {
        file: PathBuf,
        #[arg(long)]
        page: Option<usize>,
    },
    /// Parses and validates a document.
    Validate { file: PathBuf },
    /// Factors f as a weak equivalence i followed by an r-fibration p.
    Factor {
        file: PathBuf,
        #[arg(long)]
        r: usize,
        /// Directory for the three output documents.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Surjection, E_r-quasi-isomorphism, r-fibration and acyclicity verdicts.
    Predicates {
        file: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Compares the direct fibration tests with the lifting characterisation.
    Rlp {
        file: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Searches for an r-homotopy between two morphisms.
    Homotopy {
        f: PathBuf,
        g: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Total filtered complex of a multicomplex.
    Tot { file: PathBuf },
    /// Spectral sequence of a filtered complex or multicomplex.
    Ss { file: PathBuf },
    /// Runs a randomized harness check.
    Fuzz {
        /// A check name, or `all`.
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value = "none")]
        mutation: String,
        #[arg(long, default_value_t = 4)]
        window: i32,
        #[arg(long, default_value_t = 3)]
        max_dim: usize,
        /// Include counterexample documents in the report.
        #[arg(long)]
        documents: bool,
    },
    /// Prints a named fixture: R p n, S, T, f, pi_T, lambda r, disk r p n,
    /// sphere r p n, lambda_fc r, lambda_mc r.
    Fixture {
        name: String,
        #[arg(allow_negative_numbers = true)]
        params: Vec<i32>,
    },
}

enum Failure {
    Usage(String),
    Invalid(String),
    Counterexample(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Counterexample(_) => 3,
        }
    }
}

impl From<SseqError> for Failure {
    fn from(e: SseqError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Out = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load<F: Field>(path: &Path) -> Result<Object<F>, Failure> {
    format::parse::<F>(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn expect_kind(path: &Path, found: Kind, wanted: &[Kind]) -> Failure {
    let names: Vec<&str> = wanted.iter().map(|k| k.name()).collect();
    Failure::Invalid(format!("{}: expected {}, found {}", path.display(), names.join(" or "), found.name()))
}

fn load_morphism<F: Field>(path: &Path) -> Result<SpectralMorphism<F>, Failure> {
    match load::<F>(path)? {
        Object::Morphism(f) => Ok(f),
        other => Err(expect_kind(path, other.kind(), &[Kind::SpectralMorphism])),
    }
}

/// Anything with a spectral sequence: itself, or `E` / `E'` of it.
fn load_spectral<F: Field>(path: &Path) -> Result<Ss<F>, Failure> {
    Ok(match load::<F>(path)? {
        Object::Spectral(s) => s,
        Object::Filtered(c) => spectral_sequence(&c)?,
        Object::Multicomplex(m) => eprime(&m)?,
        other => return Err(expect_kind(path, other.kind(), &[Kind::SpectralSequence, Kind::FilteredComplex, Kind::Multicomplex])),
    })
}

fn table(out: &mut String, m: &BigradedModule) {
    if m.is_zero() {
        out.push_str("  0\n");
        return;
    }
    let ps: Vec<i32> = m.support().map(|x| x.p).collect();
    let qs: Vec<i32> = m.support().map(|x| x.q).collect();
    let (p0, p1) = (*ps.iter().min().unwrap(), *ps.iter().max().unwrap());
    let (q0, q1) = (*qs.iter().min().unwrap(), *qs.iter().max().unwrap());
    let w = (p0..=p1).chain(q0..=q1).map(|v| v.to_string().len()).max().unwrap().max(3) + 1;
    write!(out, "{:>w$}", "q\\p").unwrap();
    for p in p0..=p1 {
        write!(out, "{p:>w$}").unwrap();
    }
    out.push('\n');
    for q in (q0..=q1).rev() {
        write!(out, "{q:>w$}").unwrap();
        for p in p0..=p1 {
            match m.dim(Bidegree::new(p, q)) {
                0 => write!(out, "{:>w$}", ".").unwrap(),
                d => write!(out, "{d:>w$}").unwrap(),
            }
        }
        out.push('\n');
    }
}

fn pages<F: Field>(file: &Path, page: Option<usize>) -> Out {
    let s = load_spectral::<F>(file)?;
    let mut out = String::new();
    let range = match page {
        Some(m) => m..=m,
        None => 0..=s.stable_index(),
    };
    for m in range {
        writeln!(out, "page {m}{}", if m >= s.stable_index() { " (stable)" } else { "" }).unwrap();
        table(&mut out, s.module(m));
    }
    Ok(out)
}

fn validate<F: Field>(file: &Path) -> Out {
    let obj = load::<F>(file)?;
    if let Object::Spectral(s) = &obj {
        s.validate().map_err(SseqError::from)?;
    }
    Ok(format!("ok: {}\n", obj.kind().name()))
}

fn factor<F: Field>(file: &Path, r: usize, out_dir: &Path) -> Out {
    let f = load_morphism::<F>(file)?;
    let mp = mapping_path(r, &f);
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("f");
    fs::create_dir_all(out_dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut out = String::new();
    for (suffix, obj) in [
        ("Pbar", Object::Spectral(mp.object.clone())),
        ("i", Object::Morphism(mp.i.clone())),
        ("p", Object::Morphism(mp.p.clone())),
    ] {
        let path = out_dir.join(format!("{stem}.{suffix}.txt"));
        fs::write(&path, format::print(&obj)).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        writeln!(out, "wrote {}", path.display()).unwrap();
    }
    let i_weq = is_er_quasi_iso(&mp.i, r);
    let p_fib = is_r_fibration(&mp.p, r);
    let composite = mp.p.compose(&mp.i) == f;
    writeln!(out, "i E_{r}-quasi-isomorphism: {i_weq}").unwrap();
    writeln!(out, "p r-fibration: {p_fib}").unwrap();
    writeln!(out, "p ∘ i = f: {composite}").unwrap();
    if i_weq && p_fib && composite {
        Ok(out)
    } else {
        Err(Failure::Counterexample(out))
    }
}

fn predicates<F: Field>(file: &Path, r: usize) -> Out {
    let f = load_morphism::<F>(file)?;
    Ok(format!(
        "surjection: {}\nE_{r}-quasi-isomorphism: {}\nr-fibration: {}\nacyclic r-fibration: {}\n",
        is_surjection(&f),
        is_er_quasi_iso(&f, r),
        is_r_fibration(&f, r),
        is_acyclic_r_fibration(&f, r)
    ))
}

fn rlp<F: Field>(file: &Path, r: usize) -> Out {
    let f = load_morphism::<F>(file)?;
    let (fib, fib_rlp) = (is_r_fibration(&f, r), rfib_via_rlp(&f, r));
    let (acyc, acyc_rlp) = (is_acyclic_r_fibration(&f, r), acyclic_rfib_via_rlp(&f, r));
    let out = format!(
        "r-fibration: direct {fib}, lifting {fib_rlp}, agree {}\nacyclic r-fibration: direct {acyc}, lifting {acyc_rlp}, agree {}\n",
        fib == fib_rlp,
        acyc == acyc_rlp
    );
    if fib == fib_rlp && acyc == acyc_rlp {
        Ok(out)
    } else {
        Err(Failure::Counterexample(out))
    }
}

fn homotopy<F: Field>(f: &Path, g: &Path, r: usize) -> Out {
    let (f, g) = (load_morphism::<F>(f)?, load_morphism::<F>(g)?);
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Failure::Invalid("f and g have different source or target".into()));
    }
    Ok(match find_r_homotopy(r, &f, &g) {
        Some(h) => {
            let mut out = format!("{r}-homotopic: true\nh_0:\n");
            if h.map(0).is_zero() {
                out.push_str("  (zero)\n");
            }
            for (x, block) in h.map(0).blocks() {
                let rows: Vec<String> = (0..block.rows())
                    .map(|i| block.row(i).iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
                    .collect();
                writeln!(out, "  {x} {}x{} : {}", block.rows(), block.cols(), rows.join(" | ")).unwrap();
            }
            out
        }
        None => format!("{r}-homotopic: false\n"),
    })
}

fn tot_cmd<F: Field>(file: &Path) -> Out {
    match load::<F>(file)? {
        Object::Multicomplex(m) => Ok(format::print(&Object::<F>::Filtered(Arc::new(tot(&m)?)))),
        other => Err(expect_kind(file, other.kind(), &[Kind::Multicomplex])),
    }
}

fn ss_cmd<F: Field>(file: &Path) -> Out {
    match load::<F>(file)? {
        Object::Filtered(c) => Ok(format::print(&Object::Spectral(spectral_sequence(&c)?))),
        Object::Multicomplex(m) => Ok(format::print(&Object::Spectral(eprime(&m)?))),
        other => Err(expect_kind(file, other.kind(), &[Kind::FilteredComplex, Kind::Multicomplex])),
    }
}

#[allow(clippy::too_many_arguments)]
fn fuzz<F: Field>(check: &str, seed: u64, trials: usize, r: usize, mutation: &str, window: i32, max_dim: usize, documents: bool) -> Out {
    let checks: Vec<Check> = if check == "all" {
        Check::ALL.to_vec()
    } else {
        vec![Check::from_name(check).ok_or_else(|| {
            let names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
            Failure::Usage(format!("unknown check `{check}`; expected all, {}", names.join(", ")))
        })?]
    };
    let mutation = Mutation::from_name(mutation)
        .ok_or_else(|| Failure::Usage(format!("unknown mutation `{mutation}`; expected none, negate-weq, no-fibrations")))?;
    let spec = GenSpec { seed, window, max_dim, trials };
    let mut out = String::new();
    let mut clean = true;
    for c in checks {
        let report = harness::run::<F>(c, &spec, r, mutation);
        clean &= report.passed();
        out.push_str(&report.render(documents));
    }
    if clean {
        Ok(out)
    } else {
        Err(Failure::Counterexample(out))
    }
}

fn fixture<F: Field>(name: &str, params: &[i32]) -> Out {
    let arity = |n: usize| -> Result<(), Failure> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Failure::Usage(format!("fixture {name} takes {n} parameter(s), got {}", params.len())))
        }
    };
    let nonneg = |v: i32| usize::try_from(v).map_err(|_| Failure::Usage(format!("r must be nonnegative, got {v}")));
    let obj: Object<F> = match name {
        "R" => {
            arity(2)?;
            Object::Spectral(fixtures::unit(params[0], params[1]))
        }
        "S" => {
            arity(0)?;
            Object::Spectral(fixtures::s())
        }
        "T" => {
            arity(0)?;
            Object::Spectral(fixtures::t())
        }
        "f" => {
            arity(0)?;
            Object::Morphism(fixtures::f_into_s())
        }
        "pi_T" => {
            arity(0)?;
            Object::Morphism(fixtures::pi_t())
        }
        "lambda" => {
            arity(1)?;
            Object::Spectral(lambda(nonneg(params[0])?))
        }
        "disk" => {
            arity(3)?;
            Object::Spectral(disk(nonneg(params[0])?, params[1], params[2]))
        }
        "sphere" => {
            arity(3)?;
            Object::Spectral(sphere(nonneg(params[0])?, params[1], params[2]).map_err(|e| Failure::Usage(e.to_string()))?)
        }
        "lambda_fc" => {
            arity(1)?;
            Object::Filtered(lambda_fc(nonneg(params[0])?))
        }
        "lambda_mc" => {
            arity(1)?;
            Object::Multicomplex(Arc::new(lambda_mc(nonneg(params[0])?)))
        }
        _ => {
            return Err(Failure::Usage(format!(
                "unknown fixture `{name}`; expected R, S, T, f, pi_T, lambda, disk, sphere, lambda_fc, lambda_mc"
            )))
        }
    };
    Ok(format::print(&obj))
}

fn run<F: Field>(cmd: &Command) -> Out {
    match cmd {
        Command::Pages { file, page } => pages::<F>(file, *page),
        Command::Validate { file } => validate::<F>(file),
        Command::Factor { file, r, out_dir } => factor::<F>(file, *r, out_dir),
        Command::Predicates { file, r } => predicates::<F>(file, *r),
        Command::Rlp { file, r } => rlp::<F>(file, *r),
        Command::Homotopy { f, g, r } => homotopy::<F>(f, g, *r),
        Command::Tot { file } => tot_cmd::<F>(file),
        Command::Ss { file } => ss_cmd::<F>(file),
        Command::Fuzz {
            check,
            seed,
            trials,
            r,
            mutation,
            window,
            max_dim,
            documents,
        } => fuzz::<F>(check, *seed, *trials, *r, mutation, *window, *max_dim, *documents),
        Command::Fixture { name, params } => fixture::<F>(name, params),
    }
}

/// The first input document, whose header names its field.
fn first_input(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Pages { file, .. }
        | Command::Validate { file }
        | Command::Factor { file, .. }
        | Command::Predicates { file, .. }
        | Command::Rlp { file, .. }
        | Command::Tot { file }
        | Command::Ss { file } => Some(file),
        Command::Homotopy { f, .. } => Some(f),
        Command::Fuzz { .. } | Command::Fixture { .. } => None,
    }
}

fn dispatch(field: &str, cmd: &Command) -> Out {
    match field {
        "Fp:2" => run::<Fp<2>>(cmd),
        "Fp:3" => run::<Fp<3>>(cmd),
        "Fp:5" => run::<Fp<5>>(cmd),
        "Fp:7" => run::<Fp<7>>(cmd),
        "Fp:11" => run::<Fp<11>>(cmd),
        "Fp:13" => run::<Fp<13>>(cmd),
        "Q" => run::<Rational>(cmd),
        other => Err(Failure::Usage(format!("unsupported field `{other}`; expected one of {FIELDS}"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let field = match (&cli.field, first_input(&cli.command)) {
        (Some(f), _) => Ok(f.clone()),
        (None, Some(path)) => read(path).and_then(|text| {
            format::read_header(&text).map(|h| h.field).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
        }),
        (None, None) => Ok("Fp:7".to_string()),
    };
    match field.and_then(|f| dispatch(&f, &cli.command)) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            match &failure {
                Failure::Counterexample(out) => print!("{out}"),
                Failure::Usage(msg) | Failure::Invalid(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
