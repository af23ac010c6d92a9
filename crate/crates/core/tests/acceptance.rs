//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use ambiq_core::discrete_weyl::random_hermitian;
use ambiq_core::oracle::wigner_seed_with_defect;
use ambiq_core::stencil::DEFAULT_ACCURACY;
use ambiq_core::{
    ambiguity_from_density, ambiguity_to_wigner, density_from_wavefunction, discrete_ambiguity,
    evolve_const_force_closed, evolve_density_exact, evolve_generator_const_force, evolve_kernel,
    evolve_linear_canonical, expectation_polynomial, gaussian_ambiguity_closed, gaussian_wavefunction,
    hamiltonian_matrix_banded, make_centered_grid, marginal, polynomial_matrix, reconstruct_discrete, trace_product,
    verify_discrete_identities, wigner_at, wigner_from_density, wigner_to_ambiguity, ClosedFormAmbiguity,
    ComplexField, ConstantForceParams, DensityMatrix, Direction, GaussianSpec, Grid1D, LinearCanonicalMap, Letter,
    MarginalAxis, PhaseGrid, PhysicalConstants, PolynomialOperator, Stencil, WaveFunction,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<Vec<Measure>, String>;

/// One measured quantity against its bound.
struct Measure {
    label: String,
    value: f64,
    bound: f64,
}

impl Measure {
    fn new(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Measure {
            label: label.into(),
            value,
            bound,
        }
    }

    fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.bound
    }
}

fn c1() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn gaussian(n: usize, h: f64, x: f64, k: f64, delta: f64) -> Result<WaveFunction, String> {
    let g = make_centered_grid(n, h).map_err(|e| e.to_string())?;
    gaussian_wavefunction(&GaussianSpec::new(x, k, delta).map_err(|e| e.to_string())?, &g, &c1()).map_err(|e| e.to_string())
}

fn anchor_state() -> Result<DensityMatrix, String> {
    Ok(density_from_wavefunction(&gaussian(256, 0.1, 1.0, 2.0, 1.0)?))
}

fn closed(x: f64, k: f64, delta: f64) -> ClosedFormAmbiguity {
    gaussian_ambiguity_closed(&GaussianSpec::new(x, k, delta).unwrap(), &c1()).unwrap().into()
}

fn phase_grid(n: usize, h: f64) -> PhaseGrid {
    PhaseGrid::ambiguity_for(&make_centered_grid(n, h).unwrap(), &c1())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn elapsed(label: &str, t: Instant, limit: Duration) -> Measure {
    Measure::new(format!("{label} runtime [s]"), t.elapsed().as_secs_f64(), limit.as_secs_f64())
}

fn diff_l2(a: &ComplexField, b: &ComplexField) -> Result<f64, String> {
    let d = ComplexField::new(*a.grid(), a.values() - b.values(), *a.constants()).map_err(err)?;
    Ok(d.l2_norm())
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let rho = anchor_state()?;
    let a = ambiguity_from_density(&rho).map_err(err)?;
    let want = closed(1.0, 2.0, 1.0).sample(*a.grid());
    let e = a.max_abs_diff(&want).map_err(err)?;
    Ok(vec![
        Measure::new("max |A - closed form|", e, 1e-6),
        elapsed("transform", t, Duration::from_secs(5)),
    ])
}

fn criterion_2() -> Outcome {
    let rho = anchor_state()?;
    let peak = wigner_at(&rho, 1.0, 2.0).map_err(err)?;
    let w = wigner_from_density(&rho).map_err(err)?;
    Ok(vec![
        Measure::new("|W(1,2) - 1/pi|", (peak - 1.0 / PI).norm(), 1e-6),
        Measure::new("|int W - 1|", (w.integral() - 1.0).norm(), 1e-6),
    ])
}

fn criterion_3() -> Outcome {
    let rho = anchor_state()?;
    let a = ambiguity_from_density(&rho).map_err(err)?;
    let bridged = ambiguity_to_wigner(&a).map_err(err)?;
    let direct = wigner_from_density(&rho).map_err(err)?;
    let back = wigner_to_ambiguity(&bridged).map_err(err)?;
    let again = ambiguity_to_wigner(&back).map_err(err)?;
    Ok(vec![
        Measure::new("max |F[A] - W|", bridged.max_abs_diff(&direct).map_err(err)?, 1e-7),
        Measure::new("max |A -> W -> A - A|", back.max_abs_diff(&a).map_err(err)?, 1e-10),
        Measure::new("max |W -> A -> W - W|", again.max_abs_diff(&bridged).map_err(err)?, 1e-10),
    ])
}

fn criterion_4() -> Outcome {
    let psi1 = gaussian(256, 0.1, 1.0, 2.0, 1.0)?;
    let psi2 = gaussian(256, 0.1, 0.2, 1.5, 0.8)?;
    let a1 = ambiguity_from_density(&density_from_wavefunction(&psi1)).map_err(err)?;
    let a2 = ambiguity_from_density(&density_from_wavefunction(&psi2)).map_err(err)?;
    let purity = trace_product(&a1, &a1).map_err(err)?;
    let overlap = trace_product(&a1, &a2).map_err(err)?;
    let oracle = psi1.inner(&psi2).norm_sqr();
    Ok(vec![
        Measure::new("|purity - 1|", (purity - 1.0).norm(), 1e-6),
        Measure::new(format!("|overlap - {oracle:.6}|"), (overlap - oracle).norm(), 1e-6),
    ])
}

fn random_polynomial(rng: &mut ChaCha8Rng) -> PolynomialOperator {
    let mut op = PolynomialOperator::identity().scaled(Complex64::new(0.0, 0.0));
    for _ in 0..rng.random_range(1..=4) {
        let len = rng.random_range(0..=4);
        let word: Vec<Letter> = (0..len)
            .map(|_| if rng.random_bool(0.5) { Letter::Q } else { Letter::P })
            .collect();
        let coef = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        op = op.add(&PolynomialOperator::monomial(coef, &word));
    }
    op
}

fn criterion_5() -> Outcome {
    let c = c1();
    let psi = gaussian(256, 0.1, 1.0, 2.0, 1.0)?;
    let field = ambiguity_from_density(&density_from_wavefunction(&psi)).map_err(err)?;
    let analytic = closed(1.0, 2.0, 1.0);
    let stencil = Stencil {
        field: &field,
        accuracy: DEFAULT_ACCURACY,
    };
    let h = PolynomialOperator::constant_force_hamiltonian(1.0, 3.0);
    let e_analytic = expectation_polynomial(&analytic, &h, &c).map_err(err)?;
    let e_stencil = expectation_polynomial(&stencil, &h, &c).map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(20_260_501);
    let (mut worst_analytic, mut worst_stencil) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let op = random_polynomial(&mut rng);
        let oracle = polynomial_matrix(&op, psi.grid(), &c).map_err(err)?.expectation(&psi);
        let a = expectation_polynomial(&analytic, &op, &c).map_err(err)?;
        let s = expectation_polynomial(&stencil, &op, &c).map_err(err)?;
        worst_analytic = worst_analytic.max((a - oracle).norm());
        worst_stencil = worst_stencil.max((s - oracle).norm());
    }
    Ok(vec![
        Measure::new("|<H> analytic + 0.75|", (e_analytic + 0.75).norm(), 1e-5),
        Measure::new("|<H> stencil + 0.75|", (e_stencil + 0.75).norm(), 1e-5),
        Measure::new("50 polynomials, analytic vs oracle", worst_analytic, 1e-5),
        Measure::new("50 polynomials, stencil vs oracle", worst_stencil, 1e-5),
    ])
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let c = c1();
    let (x, k, m, force) = (1.0, 2.0, 1.0, 3.0);
    let params = ConstantForceParams::new(m, force).map_err(err)?;
    let p0 = closed(x, k, 1.0);
    let pg = phase_grid(256, 0.15);
    let q = PolynomialOperator::monomial(Complex64::new(1.0, 0.0), &[Letter::Q]);
    let p = PolynomialOperator::monomial(Complex64::new(1.0, 0.0), &[Letter::P]);
    let dt = 1e-3;
    let mut field = p0.sample(pg);
    let mut elapsed_t = 0.0f64;
    let (mut sup, mut ehrenfest) = (0.0f64, 0.0f64);
    for t in [0.25, 0.5, 1.0] {
        let steps = ((t - elapsed_t) / dt).round() as usize;
        field = evolve_generator_const_force(&field, &params, dt, steps).map_err(err)?;
        elapsed_t = t;
        let want = evolve_const_force_closed(&p0, &params, t).map_err(err)?;
        if t == 1.0 {
            sup = field.max_abs_diff(&want.sample(pg)).map_err(err)?;
        }
        let q_want = x + k * t / m + force * t * t / (2.0 * m);
        let p_want = k + force * t;
        for src in [&field as &dyn Probe, &want as &dyn Probe] {
            ehrenfest = ehrenfest.max((src.expect(&q, &c)? - q_want).norm());
            ehrenfest = ehrenfest.max((src.expect(&p, &c)? - p_want).norm());
        }
    }
    Ok(vec![
        Measure::new("sup |RK4 - closed form| at t=1", sup, 1e-6),
        Measure::new("Ehrenfest <q>, <p> at t=0.25,0.5,1", ehrenfest, 1e-4),
        elapsed("evolution", t0, Duration::from_secs(60)),
    ])
}

trait Probe {
    fn expect(&self, op: &PolynomialOperator, c: &PhysicalConstants) -> Result<Complex64, String>;
}

impl Probe for ComplexField {
    fn expect(&self, op: &PolynomialOperator, c: &PhysicalConstants) -> Result<Complex64, String> {
        expectation_polynomial(self, op, c).map_err(err)
    }
}

impl Probe for ClosedFormAmbiguity {
    fn expect(&self, op: &PolynomialOperator, c: &PhysicalConstants) -> Result<Complex64, String> {
        expectation_polynomial(&self.form, op, c).map_err(err)
    }
}

fn well(q: f64) -> f64 {
    -2.0 * (-q * q / 2.0).exp()
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let c = c1();
    let q = make_centered_grid(64, 0.3).map_err(err)?;
    let h = hamiltonian_matrix_banded(&q, &c, 1.0, DEFAULT_ACCURACY, well).map_err(err)?;
    let hf = ambiguity_from_density(&h.to_kernel()).map_err(err)?;
    let psi = gaussian(64, 0.3, 0.5, 0.0, 1.0)?;
    let rho = density_from_wavefunction(&psi);
    let p0 = ambiguity_from_density(&rho).map_err(err)?;
    let t = 0.1;
    let run = |dt: f64| evolve_kernel(&p0, &hf, dt, (t / dt).round() as usize, Direction::State).map_err(err);

    let oracle = ambiguity_from_density(&evolve_density_exact(&rho, &h, t).map_err(err)?).map_err(err)?;
    let rel = diff_l2(&run(1e-3)?, &oracle)? / oracle.l2_norm();

    let reference = run(2.5e-3 / 8.0)?;
    let dts = [1e-2f64, 5e-3, 2.5e-3];
    let mut logs = Vec::new();
    for dt in dts {
        logs.push((dt.ln(), diff_l2(&run(dt)?, &reference)?.ln()));
    }
    let slope = fit_slope(&logs);
    Ok(vec![
        Measure::new("relative L2 error vs dense oracle", rel, 1e-3),
        Measure::new(format!("|RK4 slope {slope:.3} - 4|"), (slope - 4.0).abs(), 0.3),
        elapsed("kernel evolution", t0, Duration::from_secs(300)),
    ])
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut failed = Vec::new();
    for d in [2, 3, 4, 5, 8, 16, 32, 64] {
        let report = verify_discrete_identities(d).map_err(err)?;
        if !report.passed {
            failed.push(d);
        }
        worst = report.checks.iter().map(|c| c.max_error).fold(worst, f64::max);
    }
    let a = random_hermitian(16, 16);
    let back = reconstruct_discrete(&discrete_ambiguity(&a).map_err(err)?);
    let recon = (&back - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out = vec![
        Measure::new("worst discrete identity residual", worst, 1e-12),
        Measure::new("d=16 random Hermitian reconstruction", recon, 1e-10),
        elapsed("discrete verification", t0, Duration::from_secs(30)),
    ];
    if !failed.is_empty() {
        out.push(Measure::new(format!("failing dimensions {failed:?}"), 1.0, 0.0));
    }
    Ok(out)
}

fn criterion_9() -> Outcome {
    let g: Grid1D = make_centered_grid(128, 0.25).map_err(err)?;
    let c = c1();
    let mut worst = 0.0f64;
    for qi in [40usize, 52, 64, 76, 88] {
        for pi in [40usize, 52, 64, 76, 88] {
            let (_, defect) = wigner_seed_with_defect(&g, qi, pi, &c).map_err(err)?;
            worst = worst.max(defect);
        }
    }
    Ok(vec![Measure::new("max |seed path a - path b| over 5x5 points", worst, 1e-5)])
}

fn criterion_10() -> Outcome {
    let n = 256;
    let f = closed(0.0, 0.0, 1.0).sample(phase_grid(n, (2.0 * PI / n as f64).sqrt()));
    let mut rot = 0.0f64;
    for theta in [0.3, 1.1, 2.5] {
        let map = LinearCanonicalMap::rotation(theta, 1.0, 1.0).map_err(err)?;
        rot = rot.max(evolve_linear_canonical(&f, &map).map_err(err)?.max_abs_diff(&f).map_err(err)?);
    }
    let pg = phase_grid(256, 0.1);
    let g = closed(0.3, 0.5, 1.0);
    let t = 0.5;
    let sheared = evolve_linear_canonical(&g.sample(pg), &LinearCanonicalMap::free_shear(t, 1.0).map_err(err)?).map_err(err)?;
    let free = ConstantForceParams::new(1.0, 0.0).map_err(err)?;
    let want = evolve_const_force_closed(&g, &free, t).map_err(err)?.sample(pg);
    Ok(vec![
        Measure::new("rotation of ground state", rot, 1e-4),
        Measure::new("free shear vs closed form", sheared.max_abs_diff(&want).map_err(err)?, 1e-6),
    ])
}

fn criterion_11() -> Outcome {
    let psi = gaussian(256, 0.1, 1.0, 2.0, 1.0)?;
    let rho = density_from_wavefunction(&psi);
    let a = ambiguity_from_density(&rho).map_err(err)?;
    let n = rho.grid().count();
    let half = (n / 2) as i64;

    // <q = xi/2| rho |q = -xi/2>; both points lie on the grid for odd xi/h
    let position = marginal(&a, MarginalAxis::Eta).map_err(err)?;
    let mut worst_q = 0.0f64;
    for (s, m) in position.iter().enumerate() {
        let sigma = s as i64 - half;
        if sigma.rem_euclid(2) == 1 {
            let j = ((sigma + n as i64 - 1) / 2) as usize;
            worst_q = worst_q.max((m - rho.entries()[(j, n - 1 - j)]).norm());
        }
    }

    // <p = -eta/2| rho |p = eta/2>
    let momentum = marginal(&a, MarginalAxis::Xi).map_err(err)?;
    let mut worst_p = 0.0f64;
    for (i, m) in momentum.iter().enumerate() {
        let eta = a.grid().axis1.value(i);
        let direct = psi.momentum_amplitude(-eta / 2.0) * psi.momentum_amplitude(eta / 2.0).conj();
        worst_p = worst_p.max((m - direct).norm());
    }
    Ok(vec![
        Measure::new("position marginal vs anti-diagonal", worst_q, 1e-6),
        Measure::new("momentum marginal vs anti-diagonal", worst_p, 1e-6),
    ])
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Gaussian ambiguity anchor", criterion_1),
        ("Gaussian Wigner anchor", criterion_2),
        ("Fourier bridge", criterion_3),
        ("trace-product rule", criterion_4),
        ("integration-free expectation", criterion_5),
        ("constant-force dynamics", criterion_6),
        ("general kernel evolution", criterion_7),
        ("exact discrete identities", criterion_8),
        ("Wigner seed consistency", criterion_9),
        ("canonical substitution", criterion_10),
        ("marginals", criterion_11),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(measures) => {
                let passed = measures.iter().all(Measure::passed);
                all &= passed;
                let detail: Vec<String> = measures
                    .iter()
                    .map(|m| format!("{} = {:.3e} (< {:.0e})", m.label, m.value, m.bound))
                    .collect();
                println!(
                    "criterion {:>2} {}: {name} [{secs:.2} s] {}",
                    i + 1,
                    if passed { "PASS" } else { "FAIL" },
                    detail.join("; ")
                );
            }
            Err(e) => {
                all = false;
                println!("criterion {:>2} FAIL: {name} [{secs:.2} s] error: {e}", i + 1);
            }
        }
    }
    if !all {
        std::process::exit(1);
    }
}
