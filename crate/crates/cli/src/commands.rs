use std::path::Path;

use ambiq_core::{
    ambiguity_from_density, ambiguity_to_wigner, density_from_wavefunction, evolve_const_force_closed,
    evolve_generator_const_force, evolve_kernel, evolve_linear_canonical, expectation_polynomial,
    gaussian_wavefunction, hamiltonian_matrix_banded, make_centered_grid, marginal, reconstruct_density,
    superposition_state, verify_continuum_identities, verify_discrete_identities, verify_discrete_identities_seeded,
    wigner_to_ambiguity, AxisSpec, ComplexField, ConstantForceParams, DensityMatrix, Direction, DocumentKind,
    FieldDocument, Grid1D, LinearCanonicalMap, MarginalAxis, PhysicalConstants, PolynomialOperator, Stencil,
    wigner_from_density, SCHEMA_VERSION,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

/// Command failure, split by exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or arguments (exit 1).
    Validation(String),
    /// A numerical self-check did not hold (exit 2).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<ambiq_core::Error> for Failure {
    fn from(e: ambiq_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

/// Write to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> Outcome {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Validation(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Validation(msg.into()))
}

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    let hbar = cli.hbar;
    match cli.command {
        Command::State { kind } => state(kind, constants(hbar)?),
        Command::Transform { input, to, out } => transform(&load(&input, hbar)?, to, &out),
        Command::Expect { state, op, accuracy } => expect(&load(&state, hbar)?, &op, accuracy),
        Command::Evolve(args) => evolve(&load(&args.input, hbar)?, &args),
        Command::Marginal { input, axis, output, csv } => {
            marginal_cmd(&load(&input, hbar)?, axis, output.as_deref(), csv.as_deref())
        }
        Command::Verify(args) => verify(&args, constants(hbar)?),
        Command::Info => info(),
    }
}

fn constants(hbar: Option<f64>) -> Result<PhysicalConstants, Failure> {
    Ok(PhysicalConstants::new(hbar.unwrap_or(DEFAULT_HBAR))?)
}

fn load(path: &Path, hbar: Option<f64>) -> Result<FieldDocument, Failure> {
    let doc = FieldDocument::read(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    if let Some(h) = hbar {
        if h != doc.hbar {
            return invalid(format!("--hbar {h} disagrees with hbar = {} in {}", doc.hbar, path.display()));
        }
    }
    Ok(doc)
}

fn save(doc: FieldDocument, out: &Output) -> Outcome {
    doc.write(&out.output)?;
    if let Some(csv) = &out.csv {
        std::fs::write(csv, doc.to_csv()?).map_err(ambiq_core::Error::from)?;
    }
    Ok(())
}

fn state(kind: StateKind, c: PhysicalConstants) -> Outcome {
    let (psi, spec, rho, out) = match kind {
        StateKind::Gaussian {
            x,
            k,
            delta,
            grid,
            rho,
            out,
        } => {
            let g = make_centered_grid(grid.n, grid.step)?;
            let spec = ambiq_core::GaussianSpec::new(x, k, delta)?;
            let psi = gaussian_wavefunction(&spec, &g, &c)?;
            let meta = json!({"type": "gaussian", "x": x, "k": k, "delta": delta});
            (psi, meta, rho, out)
        }
        StateKind::Superposition {
            terms,
            width,
            grid,
            rho,
            out,
        } => {
            let g = make_centered_grid(grid.n, grid.step)?;
            let parsed = terms.iter().map(|t| parse_term(t)).collect::<Result<Vec<_>, _>>()?;
            let psi = superposition_state(&parsed, width, &g, &c)?;
            let list: Vec<Value> = parsed
                .iter()
                .map(|(a, x)| json!({"center": x, "re": a.re, "im": a.im}))
                .collect();
            (psi, json!({"type": "superposition", "width": width, "terms": list}), rho, out)
        }
    };
    let doc = if rho {
        FieldDocument::from_density(&density_from_wavefunction(&psi))
    } else {
        FieldDocument::from_wavefunction(&psi)
    };
    save(doc.with_metadata("state", spec), &out)
}

/// `center:re:im`, with `re` and `im` optional (defaults 1 and 0).
fn parse_term(s: &str) -> Result<(Complex64, f64), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.is_empty() || parts.len() > 3 {
        return invalid(format!("term {s:?} is not of the form center:re:im"));
    }
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|_| Failure::Validation(format!("term {s:?}: {p:?} is not a number")))
    };
    let center = num(parts[0])?;
    let re = parts.get(1).map(|p| num(p)).transpose()?.unwrap_or(1.0);
    let im = parts.get(2).map(|p| num(p)).transpose()?.unwrap_or(0.0);
    Ok((Complex64::new(re, im), center))
}

fn to_density(doc: &FieldDocument) -> Result<DensityMatrix, Failure> {
    match doc.kind {
        DocumentKind::Psi => Ok(density_from_wavefunction(&doc.to_wavefunction()?)),
        DocumentKind::Rho => Ok(doc.to_density()?),
        DocumentKind::Ambiguity => Ok(reconstruct_density(&doc.to_field()?)?),
        DocumentKind::Wigner => Ok(reconstruct_density(&wigner_to_ambiguity(&doc.to_field()?)?)?),
    }
}

fn to_ambiguity(doc: &FieldDocument) -> Result<ComplexField, Failure> {
    match doc.kind {
        DocumentKind::Psi | DocumentKind::Rho => Ok(ambiguity_from_density(&to_density(doc)?)?),
        DocumentKind::Ambiguity => Ok(doc.to_field()?),
        DocumentKind::Wigner => Ok(wigner_to_ambiguity(&doc.to_field()?)?),
    }
}

fn carry(doc: &FieldDocument, mut out: FieldDocument) -> FieldDocument {
    out.metadata = doc.metadata.clone();
    out
}

fn transform(doc: &FieldDocument, to: Target, out: &Output) -> Outcome {
    let result = match (doc.kind, to) {
        (_, Target::Rho) => FieldDocument::from_density(&to_density(doc)?),
        (DocumentKind::Psi | DocumentKind::Rho, Target::Wigner) => {
            FieldDocument::from_field(&wigner_from_density(&to_density(doc)?)?)
        }
        (_, Target::Wigner) => FieldDocument::from_field(&ambiguity_to_wigner(&to_ambiguity(doc)?)?),
        (_, Target::Ambiguity) => FieldDocument::from_field(&to_ambiguity(doc)?),
    };
    save(carry(doc, result), out)
}

fn expect(doc: &FieldDocument, op: &str, accuracy: usize) -> Outcome {
    let op: PolynomialOperator = op.parse()?;
    let field = to_ambiguity(doc)?;
    let stencil = Stencil {
        field: &field,
        accuracy,
    };
    let v = expectation_polynomial(&stencil, &op, field.constants())?;
    if v.im.abs() <= 1e-9 * v.re.abs().max(1.0) {
        emit(&format!("{:.10}", v.re))
    } else {
        emit(&format!("{:.10} {:+.10}i", v.re, v.im))
    }
}

fn position_grid(field: &ComplexField) -> Result<Grid1D, Failure> {
    let xi = field.grid().axis2;
    Ok(make_centered_grid(xi.count(), xi.step())?)
}

fn steps(args: &EvolveArgs) -> Result<usize, Failure> {
    if !(args.t > 0.0 && args.t.is_finite()) || !(args.dt > 0.0 && args.dt.is_finite()) {
        return invalid(format!("need t > 0 and dt > 0, got t = {}, dt = {}", args.t, args.dt));
    }
    let n = (args.t / args.dt).round();
    if n < 1.0 || (n * args.dt - args.t).abs() > 1e-9 * args.t {
        return invalid(format!("t = {} is not a whole number of steps dt = {}", args.t, args.dt));
    }
    Ok(n as usize)
}

fn evolve(doc: &FieldDocument, args: &EvolveArgs) -> Outcome {
    let field = to_ambiguity(doc)?;
    let c = *field.constants();
    let constant_force = || -> Result<ConstantForceParams, Failure> {
        if args.potential != Potential::Free {
            return invalid("closed and generator methods take a constant force only (use --potential free)");
        }
        Ok(ConstantForceParams::new(args.mass, args.force)?)
    };
    let out = match args.method {
        Method::Closed => evolve_const_force_closed(&field, &constant_force()?, args.t)?,
        Method::Generator => evolve_generator_const_force(&field, &constant_force()?, args.dt, steps(args)?)?,
        Method::Kernel => {
            let q = position_grid(&field)?;
            let (m, f, w, depth) = (args.mass, args.force, args.omega, args.depth);
            let h = match args.potential {
                Potential::Free => hamiltonian_matrix_banded(&q, &c, m, DEFAULT_ACCURACY, |x| -f * x)?,
                Potential::Harmonic => {
                    hamiltonian_matrix_banded(&q, &c, m, DEFAULT_ACCURACY, |x| 0.5 * m * w * w * x * x - f * x)?
                }
                Potential::Well => hamiltonian_matrix_banded(&q, &c, m, DEFAULT_ACCURACY, |x| {
                    -depth * (-(w * x).powi(2) / 2.0).exp() - f * x
                })?,
            };
            let hf = ambiguity_from_density(&h.to_kernel())?;
            evolve_kernel(&field, &hf, args.dt, steps(args)?, Direction::State)?
        }
        Method::Canonical => {
            if args.force != 0.0 {
                return invalid("the canonical method covers free and harmonic motion only (force must be 0)");
            }
            let map = match args.potential {
                Potential::Free => LinearCanonicalMap::free_shear(args.t, args.mass)?,
                Potential::Harmonic => LinearCanonicalMap::rotation(args.omega * args.t, args.mass, args.omega)?,
                Potential::Well => return invalid("the canonical method needs a quadratic Hamiltonian"),
            };
            evolve_linear_canonical(&field, &map)?
        }
    };
    let params = json!({
        "method": format!("{:?}", args.method).to_lowercase(),
        "t": args.t,
        "dt": args.dt,
        "mass": args.mass,
        "force": args.force,
        "potential": format!("{:?}", args.potential).to_lowercase(),
        "omega": args.omega,
        "depth": args.depth,
    });
    save(carry(doc, FieldDocument::from_field(&out)).with_metadata("evolution", params), &args.out)
}

#[derive(Serialize)]
struct MarginalDocument {
    schema_version: u32,
    hbar: f64,
    integrated: &'static str,
    axis: AxisSpec,
    data: Vec<[f64; 2]>,
}

fn marginal_cmd(doc: &FieldDocument, axis: AxisChoice, output: Option<&Path>, csv: Option<&Path>) -> Outcome {
    let field = to_ambiguity(doc)?;
    let (which, remaining, name, integrated) = match axis {
        AxisChoice::Eta => (MarginalAxis::Eta, field.grid().axis2, "xi", "eta"),
        AxisChoice::Xi => (MarginalAxis::Xi, field.grid().axis1, "eta", "xi"),
    };
    let values = marginal(&field, which)?;
    let out = MarginalDocument {
        schema_version: SCHEMA_VERSION,
        hbar: field.constants().hbar(),
        integrated,
        axis: AxisSpec {
            label: name.to_string(),
            count: remaining.count(),
            step: remaining.step(),
            anchor: remaining.anchor(),
        },
        data: values.iter().map(|z| [z.re, z.im]).collect(),
    };
    let text = serde_json::to_string_pretty(&out).map_err(ambiq_core::Error::from)?;
    match output {
        Some(p) => std::fs::write(p, text).map_err(ambiq_core::Error::from)?,
        None => emit(&text)?,
    }
    if let Some(p) = csv {
        let mut s = String::from("axis1,axis2,re,im\n");
        for (i, z) in values.iter().enumerate() {
            s.push_str(&format!("{:?},,{:?},{:?}\n", remaining.value(i), z.re, z.im));
        }
        std::fs::write(p, s).map_err(ambiq_core::Error::from)?;
    }
    Ok(())
}

fn verify(args: &VerifyArgs, c: PhysicalConstants) -> Outcome {
    let (text, passed) = if let Some(d) = args.mode.dim {
        let report = match args.seed {
            Some(seed) => verify_discrete_identities_seeded(d, seed)?,
            None => verify_discrete_identities(d)?,
        };
        (serde_json::to_string_pretty(&report), report.passed)
    } else {
        let grid = make_centered_grid(args.n, args.step)?;
        let report = verify_continuum_identities(&grid, &c)?;
        (serde_json::to_string_pretty(&report), report.passed)
    };
    emit(&text.map_err(ambiq_core::Error::from)?)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Numerical("identity check failed".into()))
    }
}

fn info() -> Outcome {
    let defaults = json!({
        "hbar": DEFAULT_HBAR,
        "n": DEFAULT_COUNT,
        "step": DEFAULT_STEP,
        "delta": DEFAULT_DELTA,
        "width": DEFAULT_WIDTH,
        "mass": DEFAULT_MASS,
        "force": DEFAULT_FORCE,
        "omega": DEFAULT_OMEGA,
        "dt": DEFAULT_DT,
        "accuracy": DEFAULT_ACCURACY,
        "verify_continuum_n": DEFAULT_CONTINUUM_COUNT,
        "verify_continuum_step": DEFAULT_CONTINUUM_STEP,
    });
    let text = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "defaults": defaults,
        "document_kinds": ["psi", "rho", "ambiguity", "wigner"],
        "evolve_methods": ["closed", "generator", "kernel", "canonical"],
        "potentials": ["free", "harmonic", "well"],
        "exit_codes": {"0": "success", "1": "validation error", "2": "numerical-consistency failure", "64": "usage error"},
    });
    emit(&serde_json::to_string_pretty(&text).expect("static JSON"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_parsing() {
        let (a, x) = parse_term("-1.5:0.5:-2").unwrap();
        assert_eq!((a, x), (Complex64::new(0.5, -2.0), -1.5));
        let (a, x) = parse_term("2").unwrap();
        assert_eq!((a, x), (Complex64::new(1.0, 0.0), 2.0));
        assert!(parse_term("1:x").is_err());
        assert!(parse_term("1:2:3:4").is_err());
    }

    #[test]
    fn failure_codes() {
        let e: Failure = ambiq_core::Error::ConsistencyFailure("x".into()).into();
        assert_eq!(e.exit_code(), 2);
        let e: Failure = ambiq_core::Error::InvalidArgument("x".into()).into();
        assert_eq!(e.exit_code(), 1);
    }
}
