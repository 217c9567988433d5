//! Subcommands. Each one turns a resolved configuration into the text of a
//! single artifact; writing it is left to the caller.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use isoent::basis::orthonormality_residual;
use isoent::equivalence::{classify, fit_to_general, FitOptions};
use isoent::families::{closed_form_tangle, gen_family, iso_residuals, FamilyParams};
use isoent::highdim::{
    conditional_product_basis, fourier, robust_hadamard, shift_multiply, trace_orthogonality_residual,
    LatinMethod, LatinSquare,
};
use isoent::io::{self, format_sig12, BasisFile};
use isoent::network::{
    finner_margin, opi_summary, scan_p1p3, triangle_distribution, Curve, EdgeKind, ScanOptions, TriangleConfig,
    Wiring,
};
use isoent::oracle::canonicalize;
use isoent::qla::schmidt_spectrum;
use isoent::{rng, Basis};

use crate::config::{parse_run_config, resolve_seed, Construction, MatrixKind, RunConfig, TriangleFormat};
use crate::CliError;

/// Inputs whose orthonormality residual exceeds this are rejected with exit 3.
pub const INPUT_ORTHONORMALITY_TOL: f64 = 1e-8;

const SCAN_HEADER: [&str; 6] = ["param", "p1", "p2", "p3", "finner_margin", "max_deviation"];

#[derive(Debug, Parser)]
#[command(name = "isoent", version, about = "Iso-entangled two-qubit bases and joint measurements")]
pub struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every stochastic step; overrides ISOENT_SEED and the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a family member with its tangle report.
    Gen(FamilyFlags),
    /// Per-column tangles of a basis file.
    Tangle { basis: PathBuf },
    /// Orthonormality and iso-entanglement residuals of a basis file.
    Check { basis: PathBuf },
    /// Assign a basis file to a family.
    Classify(FitFlags),
    /// Local-unitary reduction of a basis file to the six-angle general form.
    Canonicalize { basis: PathBuf },
    /// Output distribution of the triangle network.
    Triangle(TriangleFlags),
    /// OPI constants along a curve, as CSV.
    Scan(ScanFlags),
    /// Fits of the EJM–BSM interpolation into the General family, as CSV.
    Embed(EmbedFlags),
    /// Shift-and-multiply and conditional product bases in dimension d.
    Highdim(HighdimFlags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Tangle { .. } => "tangle",
            Command::Check { .. } => "check",
            Command::Classify(_) => "classify",
            Command::Canonicalize { .. } => "canonicalize",
            Command::Triangle(_) => "triangle",
            Command::Scan(_) => "scan",
            Command::Embed(_) => "embed",
            Command::Highdim(_) => "highdim",
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct FamilyFlags {
    /// skewed, elegant, bell, general, bell-canonical or i5.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Branch of the General family, 1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<i8>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    /// Phase branch of the Bell canonical form, 1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub phase_sign: Option<i8>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitFlags {
    pub basis: PathBuf,
    /// Multistart count of the General-family fit.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Gram-cost acceptance threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct TriangleFlags {
    /// Basis file measured by every party; EJM when absent.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Depolarizing noise on every edge.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_parser = parse_edge)]
    pub edge_state: Option<EdgeKind>,
    #[arg(long, value_parser = parse_wiring)]
    pub wiring: Option<Wiring>,
    /// One OPI summary row instead of the full distribution.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Debug, Args, Default)]
pub struct ScanFlags {
    /// ejm-noise or elegant-opi.
    #[arg(long, value_parser = parse_curve)]
    pub curve: Option<Curve>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_parser = parse_edge)]
    pub edge_state: Option<EdgeKind>,
    #[arg(long, value_parser = parse_wiring)]
    pub wiring: Option<Wiring>,
}

#[derive(Debug, Args, Default)]
pub struct EmbedFlags {
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct HighdimFlags {
    #[arg(long)]
    pub d: Option<usize>,
    /// shift-multiply or conditional.
    #[arg(long, value_parser = parse_kebab::<Construction>)]
    pub construction: Option<Construction>,
    /// cyclic or seeded.
    #[arg(long, value_parser = parse_kebab::<LatinMethod>)]
    pub latin: Option<LatinMethod>,
    /// Integer CSV Latin square to use instead of generating one.
    #[arg(long)]
    pub latin_file: Option<PathBuf>,
    /// Also write the Latin square as integer CSV.
    #[arg(long)]
    pub latin_out: Option<PathBuf>,
    /// fourier or robust.
    #[arg(long, value_parser = parse_kebab::<MatrixKind>)]
    pub matrix: Option<MatrixKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub chi: Option<f64>,
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_curve(s: &str) -> Result<Curve, String> {
    parse_kebab(s)
}

fn parse_edge(s: &str) -> Result<EdgeKind, String> {
    parse_kebab(s)
}

fn parse_wiring(s: &str) -> Result<Wiring, String> {
    parse_kebab(s)
}

/// The artifact a command produces, plus any side files it requested.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub text: String,
    pub out: Option<PathBuf>,
    pub side_files: Vec<(PathBuf, String)>,
}

pub fn execute(cli: Cli, env_seed: Option<&str>) -> Result<Artifact, CliError> {
    let cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            parse_run_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = &cfg.command {
        if c != cli.command.name() {
            return Err(CliError::config(format!(
                "config is for `{c}` but `{}` was run",
                cli.command.name()
            )));
        }
    }
    let seed = resolve_seed(cli.seed, env_seed, cfg.seed)?;
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let mut side_files = Vec::new();
    let text = match cli.command {
        Command::Gen(f) => cmd_gen(&cfg, &f)?,
        Command::Tangle { basis } => cmd_tangle(&basis)?,
        Command::Check { basis } => cmd_check(&basis)?,
        Command::Classify(f) => cmd_classify(&cfg, &f, seed)?,
        Command::Canonicalize { basis } => cmd_canonicalize(&basis)?,
        Command::Triangle(f) => cmd_triangle(&cfg, &f)?,
        Command::Scan(f) => cmd_scan(&cfg, &f)?,
        Command::Embed(f) => cmd_embed(&cfg, &f, seed)?,
        Command::Highdim(f) => cmd_highdim(&cfg, &f, seed, &mut side_files)?,
    };
    Ok(Artifact { text, out, side_files })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("finite values serialize");
    s.push('\n');
    s
}

/// Merges flag values into the config's parameter record. A `--family` that
/// differs from the config's family starts from an empty record.
pub fn family_params(cfg: Option<&FamilyParams>, f: &FamilyFlags) -> Result<FamilyParams, CliError> {
    let mut obj = match cfg {
        Some(p) => match serde_json::to_value(p).expect("params serialize") {
            Value::Object(m) => m,
            _ => Map::new(),
        },
        None => Map::new(),
    };
    if let Some(fam) = &f.family {
        if obj.get("family").and_then(Value::as_str) != Some(fam.as_str()) {
            obj = Map::new();
        }
        obj.insert("family".into(), Value::String(fam.clone()));
    }
    let angles = [
        ("theta", f.theta),
        ("zeta", f.zeta),
        ("delta", f.delta),
        ("tau", f.tau),
        ("beta", f.beta),
        ("x", f.x),
        ("y", f.y),
        ("z", f.z),
        ("phi", f.phi),
    ];
    for (k, v) in angles {
        if let Some(v) = v {
            if !v.is_finite() {
                return Err(CliError::config(format!("--{k} must be finite")));
            }
            obj.insert(k.into(), json!(v));
        }
    }
    if let Some(s) = f.sign {
        obj.insert("sign".into(), json!(s));
    }
    if let Some(s) = f.phase_sign {
        obj.insert("phase_sign".into(), json!(s));
    }
    if !obj.contains_key("family") {
        return Err(CliError::config("no family given (use --family or the config's `gen` section)"));
    }
    io::parse_family_params(&Value::Object(obj).to_string()).map_err(|e| CliError::config(e.to_string()))
}

fn cmd_gen(cfg: &RunConfig, f: &FamilyFlags) -> Result<String, CliError> {
    let params = family_params(cfg.gen.as_ref(), f)?;
    let b = gen_family(&params).map_err(CliError::from_params)?;
    let tangles = b.tangles().map_err(CliError::from_params)?;
    let report = json!({
        "params": params,
        "tangle": tangles.iter().sum::<f64>() / tangles.len() as f64,
        "tangles": tangles,
        "closed_form_tangle": closed_form_tangle(&params).map_err(CliError::from_params)?,
        "iso_residuals": iso_residuals(&b).map_err(CliError::from_params)?,
        "orthonormality_residual": orthonormality_residual(&b),
        "basis": BasisFile::from_basis(&b),
    });
    Ok(to_json(&report))
}

/// Reads a basis file; parse failures and non-orthonormal matrices exit 3.
pub fn read_basis(path: &Path, require_orthonormal: bool) -> Result<Basis, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let b = parse_basis_or_report(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if require_orthonormal {
        let r = orthonormality_residual(&b);
        if !(r <= INPUT_ORTHONORMALITY_TOL) {
            return Err(CliError::input(format!(
                "{}: not orthonormal (residual {r:e} > {INPUT_ORTHONORMALITY_TOL:e})",
                path.display()
            )));
        }
    }
    Ok(b)
}

/// Accepts a bare basis document or a report (`gen`, `highdim`) carrying one under `basis`.
fn parse_basis_or_report(text: &str) -> isoent::Result<Basis> {
    let bare = io::parse_basis_json(text);
    if bare.is_ok() {
        return bare;
    }
    match serde_json::from_str::<serde_json::Value>(text) {
        Ok(serde_json::Value::Object(mut doc)) if doc.contains_key("basis") => {
            io::parse_basis_json(&doc.remove("basis").unwrap_or_default().to_string())
        }
        _ => bare,
    }
}

fn require_qubits(b: &Basis) -> Result<(), CliError> {
    if b.dims() != (2, 2) {
        return Err(CliError::input(format!("expected a two-qubit basis, got dims {:?}", b.dims())));
    }
    Ok(())
}

/// Linear entropy `2(1 − Σλ⁴)` of every column; equals the tangle for qubits.
fn column_entropies(b: &Basis) -> Result<Vec<f64>, CliError> {
    if b.dims() == (2, 2) {
        return b.tangles().map_err(CliError::from_input);
    }
    b.columns()
        .iter()
        .map(|c| {
            schmidt_spectrum(c, b.dims())
                .map(|s| s.linear_entropy())
                .map_err(CliError::from_input)
        })
        .collect()
}

fn cmd_tangle(path: &Path) -> Result<String, CliError> {
    let b = read_basis(path, false)?;
    let t = column_entropies(&b)?;
    Ok(to_json(&json!({ "dims": [b.dims().0, b.dims().1], "tangles": t })))
}

fn cmd_check(path: &Path) -> Result<String, CliError> {
    let b = read_basis(path, false)?;
    let ortho = orthonormality_residual(&b);
    let t = column_entropies(&b)?;
    let spread = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t.iter().copied().fold(f64::INFINITY, f64::min);
    let iso = if b.dims() == (2, 2) {
        Some(iso_residuals(&b).map_err(CliError::from_input)?)
    } else {
        None
    };
    Ok(to_json(&json!({
        "dims": [b.dims().0, b.dims().1],
        "orthonormality_residual": ortho,
        "orthonormal": ortho <= INPUT_ORTHONORMALITY_TOL,
        "tangles": t,
        "iso_residuals": iso,
        "iso_entangled": ortho <= INPUT_ORTHONORMALITY_TOL && spread <= isoent::equivalence::SIGNATURE_TOL,
    })))
}

fn fit_options(cfg: &RunConfig, starts: Option<usize>, threshold: Option<f64>, seed: u64) -> Result<FitOptions, CliError> {
    let mut o = FitOptions { seed, ..cfg.fit };
    if let Some(s) = starts {
        o.starts = s;
    }
    if let Some(t) = threshold {
        o.threshold = t;
    }
    if o.starts == 0 || !(o.threshold > 0.0) {
        return Err(CliError::config("fit needs starts ≥ 1 and a positive threshold"));
    }
    Ok(o)
}

fn cmd_classify(cfg: &RunConfig, f: &FitFlags, seed: u64) -> Result<String, CliError> {
    let b = read_basis(&f.basis, true)?;
    require_qubits(&b)?;
    let opts = fit_options(cfg, f.starts, f.threshold, seed)?;
    let c = classify(&b, &opts).map_err(CliError::from_input)?;
    Ok(to_json(&c))
}

fn cmd_canonicalize(path: &Path) -> Result<String, CliError> {
    let b = read_basis(path, true)?;
    require_qubits(&b)?;
    let c = canonicalize(&b).map_err(CliError::from_input)?;
    Ok(to_json(&c))
}

fn cmd_triangle(cfg: &RunConfig, f: &TriangleFlags) -> Result<String, CliError> {
    let t = &cfg.triangle;
    let basis_file = f.basis.clone().or_else(|| t.basis_file.clone());
    let basis = match (basis_file, t.params) {
        (Some(_), Some(_)) if f.basis.is_none() => {
            return Err(CliError::config("triangle: give either `params` or `basis_file`, not both"))
        }
        (Some(path), _) => {
            let b = read_basis(&path, true)?;
            require_qubits(&b)?;
            b
        }
        (None, Some(p)) => gen_family(&p).map_err(CliError::from_params)?,
        (None, None) => gen_family(&FamilyParams::ejm()).map_err(CliError::from_params)?,
    };
    let epsilon = f.eps.unwrap_or(t.epsilon);
    let wiring = f.wiring.unwrap_or(t.wiring);
    wiring.validate().map_err(CliError::from_params)?;
    let config = TriangleConfig {
        edge_state: f.edge_state.unwrap_or(t.edge_state).into(),
        wiring,
        ..TriangleConfig::symmetric(basis.to_computational()).with_epsilon(epsilon)
    };
    let d = triangle_distribution(&config).map_err(CliError::from_params)?;
    let format = if f.summary { TriangleFormat::Summary } else { t.format };
    let rows: Vec<Vec<String>> = match format {
        TriangleFormat::Distribution => (0..64)
            .map(|k| {
                vec![
                    (k / 16).to_string(),
                    (k / 4 % 4).to_string(),
                    (k % 4).to_string(),
                    format_sig12(d.p[k]),
                ]
            })
            .collect(),
        TriangleFormat::Summary => {
            let s = opi_summary(&d);
            vec![[epsilon, s.p1, s.p2, s.p3, finner_margin(&d), s.max_deviation]
                .iter()
                .map(|&v| format_sig12(v))
                .collect()]
        }
    };
    Ok(match format {
        TriangleFormat::Distribution => io::write_csv(&["a", "b", "c", "p"], &rows),
        TriangleFormat::Summary => io::write_csv(&SCAN_HEADER, &rows),
    })
}

fn cmd_scan(cfg: &RunConfig, f: &ScanFlags) -> Result<String, CliError> {
    let s = &cfg.scan;
    let opts = ScanOptions {
        grid: f.grid.unwrap_or(s.grid),
        wiring: f.wiring.unwrap_or(s.wiring),
        edge_state: f.edge_state.unwrap_or(s.edge_state),
    };
    opts.wiring.validate().map_err(CliError::from_params)?;
    let rows = scan_p1p3(f.curve.unwrap_or(s.curve), &opts).map_err(CliError::from_params)?;
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            [r.param, r.p1, r.p2, r.p3, r.finner_margin, r.max_deviation]
                .iter()
                .map(|&v| format_sig12(v))
                .collect()
        })
        .collect();
    Ok(io::write_csv(&SCAN_HEADER, &cells))
}

fn cmd_embed(cfg: &RunConfig, f: &EmbedFlags, seed: u64) -> Result<String, CliError> {
    let grid = f.grid.unwrap_or(cfg.embed.grid);
    if grid < 2 {
        return Err(CliError::config(format!("embed: grid must be ≥ 2, got {grid}")));
    }
    let opts = fit_options(cfg, f.starts, f.threshold, seed)?;
    let mut rows = Vec::with_capacity(grid);
    for k in 0..grid {
        let phi = FRAC_PI_2 * k as f64 / (grid - 1) as f64;
        let b = gen_family(&FamilyParams::I5 { phi }).map_err(CliError::from_params)?;
        let r = fit_to_general(&b, &opts).map_err(CliError::from_params)?;
        let a = r.fitted;
        let mut row: Vec<String> = [phi, a.beta, a.theta, a.delta, r.cost]
            .iter()
            .map(|&v| format_sig12(v))
            .collect();
        // rows above the threshold stay in the table, marked
        row.push(if r.accepted { "ok" } else { "flagged" }.to_string());
        rows.push(row);
    }
    Ok(io::write_csv(&["phi", "beta", "theta", "delta", "cost", "status"], &rows))
}

fn cmd_highdim(
    cfg: &RunConfig,
    f: &HighdimFlags,
    seed: u64,
    side_files: &mut Vec<(PathBuf, String)>,
) -> Result<String, CliError> {
    let h = &cfg.highdim;
    let d = f.d.unwrap_or(h.d);
    if !(2..=8).contains(&d) {
        return Err(CliError::config(format!("highdim: d must be in 2..=8, got {d}")));
    }
    let construction = f.construction.unwrap_or(h.construction);
    let mut report = Map::new();
    report.insert("d".into(), json!(d));
    report.insert("construction".into(), serde_json::to_value(construction).expect("enum"));
    let basis = match construction {
        Construction::Conditional => {
            let mut r = rng::seeded(seed);
            let us: Vec<_> = (0..d).map(|_| rng::haar_unitary(&mut r, d)).collect();
            conditional_product_basis(&us).map_err(CliError::from_params)?
        }
        Construction::ShiftMultiply => {
            let ls = match f.latin_file.clone().or_else(|| h.latin_file.clone()) {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
                    let ls = io::parse_latin_csv(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                    if ls.d() != d {
                        return Err(CliError::input(format!("Latin square has d = {}, expected {d}", ls.d())));
                    }
                    ls
                }
                None => LatinSquare::generate(d, f.latin.unwrap_or(h.latin), seed).map_err(CliError::from_params)?,
            };
            if let Some(path) = f.latin_out.clone().or_else(|| h.latin_out.clone()) {
                side_files.push((path, io::latin_csv(&ls)));
            }
            let m = match f.matrix.unwrap_or(h.matrix) {
                MatrixKind::Fourier => fourier(d),
                MatrixKind::Robust => {
                    let chi = f.chi.unwrap_or(h.chi);
                    if !chi.is_finite() {
                        return Err(CliError::config("highdim: chi must be finite"));
                    }
                    let r = robust_hadamard(d, chi).map_err(CliError::from_params)?;
                    report.insert("a".into(), json!(r.a));
                    report.insert("b".into(), json!(r.b));
                    r.matrix
                }
            };
            let smb = shift_multiply(&ls, &vec![m; d]).map_err(CliError::from_params)?;
            report.insert("latin".into(), json!(ls.rows()));
            report.insert("unitary".into(), json!(smb.unitary));
            report.insert("trace_orthogonality_residual".into(), json!(trace_orthogonality_residual(&smb)));
            smb.vectorized().map_err(CliError::from_params)?
        }
    };
    let spectra = basis
        .columns()
        .iter()
        .map(|c| schmidt_spectrum(c, (d, d)).map_err(CliError::from_params))
        .collect::<Result<Vec<_>, _>>()?;
    report.insert("orthonormality_residual".into(), json!(orthonormality_residual(&basis)));
    report.insert(
        "schmidt_spectra".into(),
        json!(spectra.iter().map(|s| s.coefficients().to_vec()).collect::<Vec<_>>()),
    );
    report.insert(
        "linear_entropies".into(),
        json!(spectra.iter().map(|s| s.linear_entropy()).collect::<Vec<_>>()),
    );
    report.insert("basis".into(), serde_json::to_value(BasisFile::from_basis(&basis)).expect("finite"));
    Ok(to_json(&Value::Object(report)))
}
