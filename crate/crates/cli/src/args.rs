use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cohlim::charts::Chart;
use cohlim::limits::Operand;
use cohlim::HamiltonianPolynomial;

#[derive(Debug, Parser)]
#[command(
    name = "cohlim",
    version,
    about = "SU(1,1) coherent states and the large-N classical limit",
    args_override_self = true
)]
pub struct Cli {
    /// Print summaries and tables as JSON.
    #[arg(long, global = true)]
    pub json: bool,

    /// Directory for CSV and JSON result files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// INI file with default flag values; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a phase-space point between charts.
    Transform(TransformArgs),
    /// Coherent-state symbols of the generators: matrix route, closed form, (v, w) route.
    Symbols(SymbolsArgs),
    /// Overlap of two coherent states, closed form against the truncated basis.
    Overlap(OverlapArgs),
    /// Quadrature check of the resolution of the identity.
    ResolutionCheck(ResolutionArgs),
    /// Large-N limit studies swept over N.
    LimitCheck(LimitArgs),
    /// Quantum and/or classical time evolution.
    Evolve(EvolveArgs),
    /// Analytic free-particle motion against the integrator.
    Freeparticle(FreeParticleArgs),
    /// Brute-force N-oscillator check of the Casimir identity and the L² spectrum.
    CasimirCheck(CasimirArgs),
}

/// `re,im` or `x,y`.
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// A list of particle numbers: comma-separated integers or ranges, where
/// `a..b` steps by one and `a..b:x2` doubles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<u32>);

impl std::str::FromStr for NList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            let int = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad N value `{t}`"));
            if let Some((a, rest)) = item.split_once("..") {
                let (b, step) = match rest.split_once(':') {
                    Some((b, step)) => (b, Some(step)),
                    None => (rest, None),
                };
                let (a, b) = (int(a)?, int(b)?);
                if a == 0 || b < a {
                    return Err(format!("bad N range `{item}`"));
                }
                match step {
                    None => out.extend(a..=b),
                    Some(m) => {
                        let factor = m
                            .strip_prefix('x')
                            .and_then(|f| f.parse::<u32>().ok())
                            .filter(|f| *f >= 2)
                            .ok_or_else(|| format!("bad N range step `{m}`, expected x2, x3, ..."))?;
                        let mut n = a;
                        while n <= b {
                            out.push(n);
                            n = match n.checked_mul(factor) {
                                Some(next) => next,
                                None => break,
                            };
                        }
                    }
                }
            } else {
                out.push(int(item)?);
            }
        }
        Ok(NList(out))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Study {
    OverlapDecay,
    Factorization,
    Bracket,
    Hamiltonian,
    Injectivity,
    Correspondence,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::OverlapDecay,
        Study::Factorization,
        Study::Bracket,
        Study::Hamiltonian,
        Study::Injectivity,
        Study::Correspondence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::OverlapDecay => "overlap-decay",
            Study::Factorization => "factorization",
            Study::Bracket => "bracket",
            Study::Hamiltonian => "hamiltonian",
            Study::Injectivity => "injectivity",
            Study::Correspondence => "correspondence",
        }
    }

    pub fn from_name(s: &str) -> Option<Study> {
        Study::ALL.into_iter().find(|st| st.name() == s)
    }
}

/// `all` or a comma-separated list of study names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudyList(pub Vec<Study>);

impl std::str::FromStr for StudyList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "all" {
            return Ok(StudyList(Study::ALL.to_vec()));
        }
        let mut out = Vec::new();
        for name in s.split(',').map(str::trim) {
            let st = Study::from_name(name).ok_or_else(|| {
                let known: Vec<&str> = Study::ALL.iter().map(|s| s.name()).collect();
                format!("unknown study `{name}` (known: all, {})", known.join(", "))
            })?;
            if !out.contains(&st) {
                out.push(st);
            }
        }
        Ok(StudyList(out))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// Chart of the input point: xi, zeta, tau, polar, halfplane, canonical.
    #[arg(long, default_value = "tau")]
    pub chart: Chart,

    /// Input coordinates `x,y`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub coords: (f64, f64),

    /// Rescaled Bargmann index, needed by the canonical chart.
    #[arg(long)]
    pub k: Option<f64>,

    /// Comma-separated target charts (default: all).
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SymbolsArgs {
    /// Coherent-state label `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tau: (f64, f64),

    #[arg(long, default_value_t = 1.0)]
    pub k: f64,

    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,

    /// Basis cutoff (default: sized from the coherent-state tail).
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OverlapArgs {
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tau: (f64, f64),

    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tau2: (f64, f64),

    #[arg(long, default_value_t = 1.0)]
    pub k: f64,

    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,
}

#[derive(Debug, Clone, Args)]
pub struct ResolutionArgs {
    /// Unscaled Bargmann index; overrides --N and --k.
    #[arg(long = "J")]
    pub j: Option<f64>,

    #[arg(long = "N", default_value_t = 1)]
    pub n: u32,

    #[arg(long, default_value_t = 1.0)]
    pub k: f64,

    /// Largest basis index n, n' checked.
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,

    /// Gauss-Legendre order.
    #[arg(long, default_value_t = 64)]
    pub order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    /// `all` or comma-separated studies: overlap-decay, factorization,
    /// bracket, hamiltonian, injectivity, correspondence.
    #[arg(long, default_value = "all")]
    pub study: StudyList,

    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tau: Option<(f64, f64)>,

    /// Second point of the overlap-decay study.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tau2: Option<(f64, f64)>,

    #[arg(long)]
    pub k: Option<f64>,

    /// Particle numbers, e.g. `2,4,8` or `2..256:x2`.
    #[arg(long = "N")]
    pub n: Option<NList>,

    /// First operand: generator name or polynomial in A, B, C.
    #[arg(long)]
    pub x: Option<Operand>,

    /// Second operand.
    #[arg(long)]
    pub y: Option<Operand>,

    /// Hamiltonian polynomial, e.g. `C + 0.5*A^2`.
    #[arg(long)]
    pub h: Option<HamiltonianPolynomial>,

    /// Injectivity grid: this many radii times this many angles.
    #[arg(long)]
    pub grid: Option<usize>,

    #[arg(long)]
    pub tmax: Option<f64>,

    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Quantum,
    Classical,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,

    /// Hamiltonian polynomial in A, B, C; the quantum generator is N·h.
    #[arg(long, default_value = "C")]
    pub h: HamiltonianPolynomial,

    /// Start point on the disk, `re,im`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub tau0: Option<(f64, f64)>,

    /// Start point in canonical coordinates, `v,w`; takes precedence over --tau0.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub start: Option<(f64, f64)>,

    #[arg(long, default_value_t = 1.0)]
    pub k: f64,

    #[arg(long = "N", default_value_t = 8)]
    pub n: u32,

    #[arg(long, default_value_t = 1.0)]
    pub tmax: f64,

    #[arg(long, default_value_t = 10)]
    pub steps: usize,

    /// Classical integrator tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// Quantum basis cutoff (default: sized from the classical orbit).
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FreeParticleArgs {
    /// Start point `v,w`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true, default_value = "0,1")]
    pub start: (f64, f64),

    #[arg(long, default_value_t = 1.0)]
    pub k: f64,

    #[arg(long, default_value_t = 5.0)]
    pub tmax: f64,

    #[arg(long, default_value_t = 10)]
    pub steps: usize,

    /// Integrator tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CasimirArgs {
    /// Number of oscillator modes (1 to 3).
    #[arg(long = "N", default_value_t = 2)]
    pub n: u32,

    /// Per-mode cutoff.
    #[arg(long, default_value_t = 12)]
    pub d: usize,

    /// Largest allowed total dimension d^N.
    #[arg(long)]
    pub ceiling: Option<usize>,
}
