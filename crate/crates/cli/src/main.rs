use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use solvspec_core::coexact::{certify_lambda1_star, Lambda1Config};
use solvspec_core::dirac::{dirac_kernel, dirac_kernel_odd_under, DiracConfig, KernelReport};
use solvspec_core::report::{lspace_report, to_stable_json, ReportConfig, COVER_POWER};
use solvspec_core::scalar::scalar_spectrum_on_grid;
use solvspec_core::solvlat::{
    anosov_eigendata, build_cover, build_lattice, dual_lattice, enumerate_modes, fiber_threshold, AnosovMatrix,
    BasisChoice, SolvLattice, SpinStructure,
};
use solvspec_core::{Error, Result};

#[derive(Parser)]
#[command(name = "solvspec", version, about = "Spectral certificates for Solv 3-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice, dual lattice, fiber threshold and mode orbits.
    Lattice(Common),
    /// Laplacian spectrum on functions up to a cutoff.
    Scalar(Common),
    /// The λ₁* = 1 certificate on coexact 1-forms.
    Coexact(Common),
    /// Harmonic spinor count for the base or twisted structure.
    Dirac {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Structure::Twisted)]
        structure: Structure,
    },
    /// Full criterion report.
    Certify(Common),
}

#[derive(Args)]
struct Common {
    /// Monodromy entries, row-major: a,b,c,d.
    #[arg(long, default_value = "2,1,1,1")]
    matrix: String,
    /// Fiber scale t.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Norm or eigenvalue cutoff; the meaning depends on the command.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Finite-difference grid intervals.
    #[arg(long)]
    grid: Option<usize>,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Structure {
    Base,
    Twisted,
}

impl Common {
    fn lattice(&self) -> Result<SolvLattice> {
        let m = AnosovMatrix::parse(&self.matrix)?;
        build_lattice(&anosov_eigendata(&m), self.scale, BasisChoice::Canonical)
    }

    fn config(&self) -> Result<(ReportConfig, Option<String>)> {
        let text = match &self.config {
            Some(path) => Some(
                fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?,
            ),
            None => None,
        };
        let mut cfg = match &text {
            Some(t) => ReportConfig::from_text(t)?,
            None => ReportConfig::default(),
        };
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(c) = self.cutoff {
            cfg.coexact_cutoff = c;
        }
        Ok((cfg, text))
    }

    fn emit(&self, body: &[u8]) -> Result<()> {
        let io = |e: io::Error| Error::InvalidArgument(format!("write failed: {e}"));
        match &self.out {
            Some(path) => fs::write(path, body).map_err(io),
            None => io::stdout().write_all(body).map_err(io),
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit(to_stable_json(value)?.as_bytes())
    }

    fn emit_csv<R: Serialize>(&self, rows: &[R]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
        self.emit(&bytes)
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ModeRow {
    m1: i64,
    m2: i64,
    mu: f64,
    mu_prime: f64,
    norm: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct LatticeSummary {
    schema_version: &'static str,
    lattice: SolvLattice,
    dual: solvspec_core::solvlat::DualLattice,
    threshold: solvspec_core::solvlat::FiberThreshold,
    orbits: Vec<solvspec_core::solvlat::DualMode>,
}

fn lattice_cmd(c: &Common) -> Result<ExitCode> {
    let lattice = c.lattice()?;
    let dual = dual_lattice(&lattice)?;
    let threshold = fiber_threshold(&dual, lattice.a)?;
    let cutoff = c.cutoff.unwrap_or(2.0 * threshold.min_norm);
    let orbits = enumerate_modes(&dual, lattice.a, cutoff)?;
    match c.format {
        Format::Json => c.emit_json(&LatticeSummary {
            schema_version: solvspec_core::SCHEMA_VERSION,
            lattice,
            dual,
            threshold,
            orbits,
        })?,
        Format::Csv => c.emit_csv(
            &orbits
                .iter()
                .map(|m| ModeRow { m1: m.m1, m2: m.m2, mu: m.mu, mu_prime: m.mu_prime, norm: m.norm })
                .collect::<Vec<_>>(),
        )?,
    }
    Ok(ExitCode::SUCCESS)
}

fn scalar_cmd(c: &Common) -> Result<ExitCode> {
    let lattice = c.lattice()?;
    let (cfg, _) = c.config()?;
    let cutoff = c.cutoff.unwrap_or(50.0);
    let report = scalar_spectrum_on_grid(&lattice, cutoff, 0, c.grid.unwrap_or(cfg.grid.min(2000)))?;
    match c.format {
        Format::Json => c.emit_json(&report)?,
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            c.emit(&buf)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct EvidenceRow {
    m1: i64,
    m2: i64,
    abs_norm: f64,
    bound: bool,
    min_lambda_sq: Option<f64>,
    error: Option<f64>,
}

fn coexact_cmd(c: &Common) -> Result<ExitCode> {
    let lattice = c.lattice()?;
    let (cfg, _) = c.config()?;
    let lc = Lambda1Config { grid: cfg.grid, norm_cutoff: cfg.coexact_cutoff, numeric: cfg.numeric_confirmation };
    let cert = match certify_lambda1_star(&lattice, &lc) {
        Ok(cert) => cert,
        Err(e @ Error::CertificateUnavailable(_)) => {
            eprintln!("not certified: {e}");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e),
    };
    match c.format {
        Format::Json => c.emit_json(&cert)?,
        Format::Csv => c.emit_csv(
            &cert
                .per_mode_evidence
                .iter()
                .map(|e| EvidenceRow {
                    m1: e.orbit.m1,
                    m2: e.orbit.m2,
                    abs_norm: e.abs_norm,
                    bound: e.bound,
                    min_lambda_sq: e.numeric.map(|n| n.min_lambda_sq),
                    error: e.numeric.map(|n| n.error),
                })
                .collect::<Vec<_>>(),
        )?,
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct KernelRow {
    m1: i64,
    m2: i64,
    abs_norm: f64,
    kernel_dim: u32,
    evidence: &'static str,
    reduction_min: f64,
    mismatch_det: Option<f64>,
    max_drift: f64,
}

fn dirac_cmd(c: &Common, structure: Structure) -> Result<ExitCode> {
    let lattice = c.lattice()?;
    let (cfg, _) = c.config()?;
    let dc = DiracConfig {
        det_floor: cfg.det_floor,
        norm_cutoff: c.cutoff.unwrap_or(cfg.dirac_cutoff),
        always_match: true,
    };
    let report: KernelReport = match structure {
        Structure::Base => dirac_kernel(&lattice, &SpinStructure::base(), &dc)?,
        Structure::Twisted => {
            let cover = build_cover(&lattice, COVER_POWER, [[2, 0], [0, 1]])?;
            dirac_kernel_odd_under(&cover, lattice.v, &dc)?
        }
    };
    match c.format {
        Format::Json => c.emit_json(&report)?,
        Format::Csv => c.emit_csv(
            &report
                .per_mode
                .iter()
                .map(|k| KernelRow {
                    m1: k.mode.m1,
                    m2: k.mode.m2,
                    abs_norm: k.mode.abs_norm(),
                    kernel_dim: k.kernel_dim,
                    evidence: match k.evidence {
                        solvspec_core::dirac::KernelEvidence::Constants => "constants",
                        solvspec_core::dirac::KernelEvidence::Positivity { .. } => "positivity",
                        solvspec_core::dirac::KernelEvidence::Mismatch { .. } => "mismatch",
                        solvspec_core::dirac::KernelEvidence::CompanionPositivity { .. } => "companion-positivity",
                    },
                    reduction_min: k.reduction_min,
                    mismatch_det: k.mismatch_det,
                    max_drift: k.max_drift,
                })
                .collect::<Vec<_>>(),
        )?,
    }
    Ok(if report.is_conclusive() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn certify_cmd(c: &Common) -> Result<ExitCode> {
    let matrix = AnosovMatrix::parse(&c.matrix)?;
    let (cfg, text) = c.config()?;
    if c.format == Format::Csv {
        return Err(Error::InvalidArgument("certify writes JSON only".into()));
    }
    let report = lspace_report(&matrix, c.scale, &cfg, text)?;
    c.emit(report.to_json()?.as_bytes())?;
    for reason in &report.verdict.reasons {
        eprintln!("not certified: {reason}");
    }
    Ok(if report.satisfied() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Lattice(c) => lattice_cmd(c),
        Command::Scalar(c) => scalar_cmd(c),
        Command::Coexact(c) => coexact_cmd(c),
        Command::Dirac { common, structure } => dirac_cmd(common, *structure),
        Command::Certify(c) => certify_cmd(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(1)
        }
    }
}
