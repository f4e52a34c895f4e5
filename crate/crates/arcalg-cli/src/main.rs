//! `arcalg`: command-line access to arc algebras, their Koszul duals,
//! reduction systems and bigraded Hochschild cohomology.
//!
//! Exit codes: 0 success, 1 certification failure, 2 usage or domain error,
//! 3 capacity or fuel exhaustion.

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use arcalg::arc_algebra::{
    dimension, enumerate_basis, graded_dimension, multiply_basis, AlgebraElement, SurgeryOrder,
};
use arcalg::combinatorics::{enumerate_weights, WeightRecord};
use arcalg::hochschild::{hh2_bar_oracle, Hochschild};
use arcalg::koszul::{
    build_dual_system, certify_dual_system, dual_presentation, verify_long_relations, KlTable,
};
use arcalg::presentation::{build_quiver, relations_k, verify_rho};
use arcalg::rewrite::{rule_record, DiamondReport, OverlapStatus, DEFAULT_FUEL};
use arcalg::{scalar, Error};

#[derive(Parser)]
#[command(name = "arcalg", version, about = "Arc algebras, Koszul duals and Hochschild cohomology")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Budget of basic reductions for each normal-form computation.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Type {
    /// Number of down marks.
    m: usize,
    /// Number of up marks.
    n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// List the weights of type (m, n) with height and defect.
    Weights(Type),
    /// Dimension of K_m^n and its graded pieces.
    Dim(Type),
    /// The quiver Q_m^n (or its opposite with --dual).
    Quiver {
        #[command(flatten)]
        t: Type,
        #[arg(long)]
        dual: bool,
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
    },
    /// Quadratic relations I_2 of K (or the orthogonal relations with --dual).
    Relations {
        #[command(flatten)]
        t: Type,
        #[arg(long)]
        dual: bool,
    },
    /// The reduction system of the Koszul dual with rule types.
    ReductionSystem(Type),
    /// Diamond check and Kazhdan–Lusztig dimension comparison.
    Diamond(Type),
    /// Kazhdan–Lusztig polynomials P_{λ,μ}.
    Kl {
        #[command(flatten)]
        t: Type,
        /// Print P_{λ,μ}(1) instead of the polynomials.
        #[arg(long)]
        at_one: bool,
    },
    /// dim HH²_q in Adams degree q.
    Hh2 {
        #[command(flatten)]
        t: Type,
        #[arg(long, allow_negative_numbers = true)]
        adams: i64,
        /// Also run an independent oracle (`bar`).
        #[arg(long)]
        oracle: Option<Oracle>,
    },
    /// HH²_q for every q from 0 to 2mn.
    Hh2Table(Type),
    /// Deform the reduction system by a nontrivial cocycle.
    Deform {
        #[command(flatten)]
        t: Type,
        /// Scale of the cocycle (rational, e.g. 1 or -3/2).
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        alpha2: String,
        /// Adams degree of the cocycle (default 2mn − 6).
        #[arg(long, allow_negative_numbers = true)]
        adams: Option<i64>,
        /// Print the full deformed relation set as JSON.
        #[arg(long)]
        emit_relations: bool,
    },
    /// Run every invariant check for type (m, n).
    Verify(Type),
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Oracle {
    Bar,
}

/// Failure of a command with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Certification(_) => 1,
            Error::Domain(_) => 2,
            Error::Capacity(_) | Error::FuelExhausted(_) => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn certification(message: String) -> Failure {
    Failure { code: 1, message }
}

/// Writes a line to stdout, exiting quietly if the reader has gone away.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($t)*).is_err() {
            std::process::exit(0);
        }
    }};
}

/// Failure for a diamond report that did not pass: exhausted fuel is a capacity
/// problem, a genuine ambiguity is a certification failure.
fn diamond_failure(report: &DiamondReport, what: String) -> Failure {
    let inconclusive = report.failures().iter().all(|(_, s)| *s == OverlapStatus::Inconclusive);
    if inconclusive {
        Failure { code: 3, message: format!("{what}: fuel exhausted while resolving overlaps") }
    } else {
        certification(what)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_json(v: &serde_json::Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Weights(t) => weights(cli, *t),
        Command::Dim(t) => dim(cli, *t),
        Command::Quiver { t, dual, dot } => quiver(cli, *t, *dual, *dot),
        Command::Relations { t, dual } => relations(cli, *t, *dual),
        Command::ReductionSystem(t) => reduction_system(cli, *t),
        Command::Diamond(t) => diamond(cli, *t),
        Command::Kl { t, at_one } => kl(cli, *t, *at_one),
        Command::Hh2 { t, adams, oracle } => hh2(cli, *t, *adams, *oracle),
        Command::Hh2Table(t) => hh2_table(cli, *t),
        Command::Deform { t, alpha2, adams, emit_relations } => {
            deform(cli, *t, alpha2, *adams, *emit_relations)
        }
        Command::Verify(t) => verify(cli, *t),
    }
}

fn weights(cli: &Cli, t: Type) -> CmdResult {
    let ws = enumerate_weights(t.m, t.n)?;
    if cli.json {
        let recs: Vec<WeightRecord> = ws.iter().map(WeightRecord::from).collect();
        print_json(&json!(recs));
    } else {
        for w in &ws {
            out!("{w}\theight {}\tdefect {}", w.height(), w.defect());
        }
    }
    Ok(())
}

fn dim(cli: &Cli, t: Type) -> CmdResult {
    let graded = graded_dimension(t.m, t.n)?;
    let total: usize = graded.iter().sum();
    if total != dimension(t.m, t.n)? {
        return Err(certification("graded and orientation counts disagree".into()));
    }
    if cli.json {
        print_json(&json!({"m": t.m, "n": t.n, "total": total, "graded": graded}));
    } else {
        out!("total {total}");
        out!("graded {graded:?}");
    }
    Ok(())
}

fn quiver(cli: &Cli, t: Type, dual: bool, dot: bool) -> CmdResult {
    let qv = build_quiver(t.m, t.n, dual)?;
    if dot {
        out!("{}", qv.to_dot().trim_end());
    } else if cli.json {
        print_json(&qv.to_json());
    } else {
        out!("vertices {}", qv.num_vertices());
        out!("arrows {}", qv.arrows.len());
        for a in 0..qv.arrows.len() as u32 {
            out!("{}", qv.arrow_name(a));
        }
    }
    Ok(())
}

fn relations(cli: &Cli, t: Type, dual: bool) -> CmdResult {
    let (qv, rs) = if dual {
        let dp = dual_presentation(t.m, t.n)?;
        (dp.dual_quiver, dp.dual_relations)
    } else {
        relations_k(t.m, t.n)?
    };
    if cli.json {
        print_json(&rs.to_json(&qv));
    } else {
        out!("relations {}", rs.total_dim());
        for r in rs.relations() {
            out!("{} = 0", qv.lincomb_name(&r));
        }
    }
    Ok(())
}

fn reduction_system(cli: &Cli, t: Type) -> CmdResult {
    let ds = build_dual_system(t.m, t.n)?;
    if cli.json {
        print_json(&ds.to_json());
    } else {
        let qb = ds.qbar();
        for (r, ty) in ds.system.rules.iter().zip(&ds.types) {
            out!("{ty:?}\t{} -> {}", qb.path_name(&r.lhs), qb.lincomb_name(&r.rhs));
        }
    }
    Ok(())
}

fn diamond(cli: &Cli, t: Type) -> CmdResult {
    let ds = build_dual_system(t.m, t.n)?;
    let cert = certify_dual_system(&ds, cli.fuel)?;
    let qb = ds.qbar();
    let failures: Vec<String> =
        cert.diamond.failures().iter().map(|(ov, st)| format!("{} {st:?}", qb.path_name(&ov.path))).collect();
    let types: serde_json::Map<String, serde_json::Value> =
        cert.rule_types.iter().map(|(k, v)| (format!("{k:?}"), json!(v))).collect();
    let report = json!({
        "m": t.m,
        "n": t.n,
        "rules": cert.rules,
        "rule_types": types,
        "overlaps": cert.diamond.overlaps.len(),
        "unresolved": failures,
        "irreducible_paths": cert.irreducible_total,
        "count_mismatches": cert.count_mismatches.len(),
        "kl_mismatches": cert.kl_mismatches.len(),
        "graded_mismatches": cert.graded_mismatches.len(),
        "passed": cert.passed(),
    });
    if cli.json {
        print_json(&report);
    } else {
        out!("rules {} overlaps {}", cert.rules, cert.diamond.overlaps.len());
        out!("irreducible paths {}", cert.irreducible_total);
        for f in &failures {
            out!("unresolved {f}");
        }
        for (a, b, got, want) in &cert.count_mismatches {
            out!("block {a} -> {b}: {got} irreducible paths, KL sum {want}");
        }
        for (a, b, k, x, y) in &cert.kl_mismatches {
            out!("P_{{{a},{b}}} coefficient {k}: recursion {x}, enumeration {y}");
        }
        out!("{}", if cert.passed() { "PASS" } else { "FAIL" });
    }
    if cert.passed() {
        Ok(())
    } else {
        let what = format!("reduction system of type ({},{}) is not certified", t.m, t.n);
        if cert.diamond.passed() {
            Err(certification(what))
        } else {
            Err(diamond_failure(&cert.diamond, what))
        }
    }
}

fn poly_string(p: &[u64]) -> String {
    let terms: Vec<String> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(k, c)| match (k, c) {
            (0, c) => c.to_string(),
            (1, 1) => "q".into(),
            (1, c) => format!("{c}q"),
            (k, 1) => format!("q^{k}"),
            (k, c) => format!("{c}q^{k}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

fn kl(cli: &Cli, t: Type, at_one: bool) -> CmdResult {
    let ws = enumerate_weights(t.m, t.n)?;
    let mut table = KlTable::new();
    let mut rows = Vec::new();
    for a in &ws {
        for b in &ws {
            let p = table.poly(a, b);
            if !p.is_empty() {
                rows.push((*a, *b, p));
            }
        }
    }
    if cli.json {
        let v: Vec<_> = rows
            .iter()
            .map(|(a, b, p)| {
                if at_one {
                    json!({"lambda": a.to_string(), "mu": b.to_string(), "value": p.iter().sum::<u64>()})
                } else {
                    json!({"lambda": a.to_string(), "mu": b.to_string(), "coefficients": p})
                }
            })
            .collect();
        print_json(&json!(v));
    } else {
        for (a, b, p) in &rows {
            let v = if at_one { p.iter().sum::<u64>().to_string() } else { poly_string(p) };
            out!("{a}\t{b}\t{v}");
        }
    }
    Ok(())
}

fn hh2(cli: &Cli, t: Type, q: i64, oracle: Option<Oracle>) -> CmdResult {
    let h = Hochschild::new(t.m, t.n)?;
    let cert = h.hh2(q, cli.fuel)?;
    let bar = match oracle {
        Some(Oracle::Bar) => Some(hh2_bar_oracle(t.m, t.n, q, cli.fuel)?),
        None => None,
    };
    if cli.json {
        let mut v = serde_json::to_value(&cert).expect("serializable");
        if let Some(b) = bar {
            v["bar_oracle"] = json!(b);
        }
        print_json(&v);
    } else {
        out!("HH^2_{q}(K_{}^{}) = {}", t.m, t.n, cert.dim);
        out!("{}", serde_json::to_string(&cert).expect("serializable"));
        if let Some(b) = bar {
            out!("bar oracle {b}");
        }
    }
    match bar {
        Some(b) if b != cert.dim => {
            Err(certification(format!("bar complex gives {b}, reduction system gives {}", cert.dim)))
        }
        _ => Ok(()),
    }
}

fn hh2_table(cli: &Cli, t: Type) -> CmdResult {
    let h = Hochschild::new(t.m, t.n)?;
    let top = 2 * (t.m * t.n) as i64;
    let mut rows = Vec::new();
    for q in 0..=top {
        let start = Instant::now();
        let c = h.hh2(q, cli.fuel)?;
        rows.push((q, c.dim, start.elapsed().as_secs_f64() * 1000.0));
    }
    if cli.json {
        let v: Vec<_> = rows.iter().map(|(q, d, _)| json!({"q": q, "dim": d})).collect();
        print_json(&json!(v));
    } else {
        out!("q\tdim\tms");
        for (q, d, ms) in rows {
            out!("{q}\t{d}\t{ms:.1}");
        }
    }
    Ok(())
}

fn deform(cli: &Cli, t: Type, alpha2: &str, adams: Option<i64>, emit: bool) -> CmdResult {
    let scale = scalar::parse(alpha2)
        .ok_or_else(|| Failure { code: 2, message: format!("cannot parse {alpha2} as a rational") })?;
    let h = Hochschild::new(t.m, t.n)?;
    let q = match adams {
        Some(q) => q,
        None if t.m >= 2 && t.n >= 2 => h.top_q(),
        None => return Err(Failure { code: 2, message: "--adams is required when m or n is 1".into() }),
    };
    let mut c = h.extract_cocycle(q, cli.fuel)?;
    for v in c.values.values_mut() {
        *v = v.scale(&scale);
    }
    let d = h.deformed_algebra(&c, cli.fuel)?;
    let qb = h.ds.qbar();
    let changed: Vec<String> = d
        .changed
        .iter()
        .map(|&i| {
            let (l, r) = d.relation(&h.ds.system, i);
            format!("{} = {}", qb.lincomb_name(&l), qb.lincomb_name(&r))
        })
        .collect();
    if emit || cli.json {
        let rules: Vec<_> = d
            .system
            .rules
            .iter()
            .zip(&h.ds.types)
            .map(|(r, ty)| rule_record(r, &|a| qb.arrow_name(a), Some(format!("{ty:?}"))))
            .collect();
        print_json(&json!({
            "m": t.m,
            "n": t.n,
            "adams": q,
            "changed": changed,
            "rules": rules,
            "diamond": d.diamond.passed(),
            "a_infinity": d.a_infinity,
        }));
    }
    if !cli.json {
        for c in &changed {
            out!("{c}");
        }
        if let Some(a) = &d.a_infinity {
            out!("higher product on K: {a}");
        }
        out!("diamond {}", if d.diamond.passed() { "PASS" } else { "FAIL" });
    }
    if d.diamond.passed() {
        Ok(())
    } else {
        Err(diamond_failure(&d.diamond, "the deformed system is not reduction-unique".into()))
    }
}

fn verify(cli: &Cli, t: Type) -> CmdResult {
    let step = |name: &str| out!("ok {name}");
    let graded = graded_dimension(t.m, t.n)?;
    if graded.iter().sum::<usize>() != dimension(t.m, t.n)? {
        return Err(certification("dimension counts disagree".into()));
    }
    step("dimension");
    let basis = enumerate_basis(t.m, t.n)?;
    let triples = associativity_triples(&basis);
    for (a, b, c) in triples {
        let (a, b, c) = (&basis[a], &basis[b], &basis[c]);
        let (ea, eb, ec) = (AlgebraElement::basis(*a), AlgebraElement::basis(*b), AlgebraElement::basis(*c));
        if ea.mul(&eb).mul(&ec) != ea.mul(&eb.mul(&ec)) {
            return Err(certification(format!("associativity fails for {a}, {b}, {c}")));
        }
        if multiply_basis(a, b, SurgeryOrder::LeftFirst) != multiply_basis(a, b, SurgeryOrder::RightFirst) {
            return Err(certification(format!("surgery order matters for {a} * {b}")));
        }
    }
    step("associativity");
    let rho = verify_rho(t.m, t.n)?;
    if let Some((a, b, x, y)) = rho.mismatches.first() {
        return Err(certification(format!("block {a} -> {b}: quotient {x}, algebra {y}")));
    }
    step("presentation");
    let ds = build_dual_system(t.m, t.n)?;
    let cert = certify_dual_system(&ds, cli.fuel)?;
    if let Some((ov, st)) = cert.diamond.failures().first() {
        let what = format!("overlap {} {st:?}", ds.qbar().path_name(&ov.path));
        return Err(diamond_failure(&cert.diamond, what));
    }
    step("diamond");
    if let Some((a, b, k, x, y)) = cert.kl_mismatches.first() {
        return Err(certification(format!("P_{{{a},{b}}} coefficient {k}: {x} vs {y}")));
    }
    if let Some((a, b, x, y)) = cert.count_mismatches.first() {
        return Err(certification(format!("block {a} -> {b}: {x} vs {y}")));
    }
    if let Some((a, b, k, x, y, z)) = cert.graded_mismatches.first() {
        return Err(certification(format!("block {a} -> {b} length {k}: {x}, {y}, {z}")));
    }
    step("kazhdan-lusztig");
    if t.m >= t.n && t.n >= 2 {
        for c in verify_long_relations(&ds, cli.fuel)? {
            if !c.holds {
                return Err(certification(format!("long relation {} fails", c.name)));
            }
        }
        step("long relations");
    }
    let h = Hochschild::from_system(ds);
    for q in 0..=2 * (t.m * t.n) as i64 {
        h.hh2(q, cli.fuel)?;
    }
    step("coboundaries are cocycles");
    out!("PASS");
    Ok(())
}

/// All composable triples when there are few, otherwise a deterministic sample.
fn associativity_triples(basis: &[arcalg::arc_algebra::ArcDiagram]) -> Vec<(usize, usize, usize)> {
    let n = basis.len();
    let mut out = Vec::new();
    if n <= 60 {
        for a in 0..n {
            for b in (0..n).filter(|&b| basis[b].cup == basis[a].cap) {
                for c in (0..n).filter(|&c| basis[c].cup == basis[b].cap) {
                    out.push((a, b, c));
                }
            }
        }
        return out;
    }
    let mut x: usize = 1;
    while out.len() < 300 {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let a = (x >> 33) % n;
        let bs: Vec<usize> = (0..n).filter(|&b| basis[b].cup == basis[a].cap).collect();
        let b = bs[(x >> 17) % bs.len()];
        let cs: Vec<usize> = (0..n).filter(|&c| basis[c].cup == basis[b].cap).collect();
        let c = cs[(x >> 5) % cs.len()];
        out.push((a, b, c));
    }
    out
}
