use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use iterexp::export::write_curve_csv;
use iterexp::layers::GRAD_CHECK_TOLERANCE;
use iterexp::pattern_shift::all_instances;
use iterexp::{
    domain_grid, evaluate_analytic, grad_check_with, interpolation_curve, train_on_shift_task, AdditiveLayer, AddiplicationLayer, Backend, Branch, CMatrix,
    Error, ExpIterate, GridQuantity, GridSpec, InterpolationCurve, Layer, ProductLayer, SampleFlag, Schroeder, SchroederConfig, ShiftInit, ShiftInstance,
    ShiftTrainConfig, SplitIterateLayer, Transfer,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::{BackendKind, EvalArgs, GradcheckArgs, GridArgs, InitKind, InterpArgs, LayerKind, QuantityKind, SchroederOpts, ShiftArgs, ShiftMode};

/// Largest pattern length evaluated by the analytic network.
const MAX_ANALYTIC_N: usize = 32;

pub enum Failure {
    /// A self-check ran and did not pass; the report is already printed.
    Check,
    Numeric(Error),
    Io(io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check | Failure::Io(_) => 1,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> Option<String> {
        match self {
            Failure::Check => None,
            Failure::Numeric(e) => Some(e.to_string()),
            Failure::Io(e) => Some(format!("i/o: {e}")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<(), Failure>;

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn schroeder(opts: &SchroederOpts) -> Result<Schroeder, Error> {
    Schroeder::new(SchroederConfig { branch: Branch::new(opts.beta)?, r0: opts.r0, ..Default::default() })
}

fn backend(kind: BackendKind, opts: &SchroederOpts) -> Result<Backend, Error> {
    Ok(match kind {
        BackendKind::Abel => Backend::abel(),
        BackendKind::Schroeder => Backend::SchroederComplex(schroeder(opts)?),
    })
}

fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?} {sign} {:?}i", z.re, z.im.abs())
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn eval(args: &EvalArgs) -> Outcome {
    let b = backend(args.backend, &args.schroeder)?;
    let z = args.z.unwrap_or_else(|| Complex64::new(args.x.unwrap_or_default(), 0.0));
    let value = b.iterate(z, args.n)?;
    let grads = b.iterate_with_grads(z, args.n).ok();
    let d_dz = grads.map(|g| g.d_dz);
    let d_dn = grads.and_then(|g| g.d_dn);
    let show = |d: Option<Complex64>| d.map_or_else(|| "undefined".to_string(), fmt_complex);

    let mut out = io::stdout().lock();
    writeln!(out, "backend  {}", b.name())?;
    writeln!(out, "z        {}", fmt_complex(z))?;
    writeln!(out, "n        {:?}", args.n)?;
    writeln!(out, "value    {}", fmt_complex(value))?;
    writeln!(out, "d/dz     {}", show(d_dz))?;
    writeln!(out, "d/dn     {}", show(d_dn))?;
    let record = json!({
        "backend": b.name(),
        "z": complex_json(z),
        "n": args.n,
        "value": complex_json(value),
        "d_dz": d_dz.map(complex_json),
        "d_dn": d_dn.map(complex_json),
    });
    writeln!(out, "{record}")?;
    Ok(())
}

pub fn grid(args: &GridArgs) -> Outcome {
    let spec = GridSpec { re_range: (args.re_min, args.re_max), im_range: (args.im_min, args.im_max), resolution: (args.nx, args.ny) };
    let quantity = match args.quantity {
        QuantityKind::Chi => GridQuantity::Chi,
        QuantityKind::ExpIter => GridQuantity::ExpIter(args.n),
    };
    let grid = domain_grid(spec, quantity, &schroeder(&args.schroeder)?)?;
    let mut out = open_output(args.output.as_deref())?;
    grid.write_csv(&mut out)?;
    out.flush()?;
    let counts: Vec<String> = [SampleFlag::Ok, SampleFlag::Domain, SampleFlag::Overflow, SampleFlag::NoConvergence]
        .iter()
        .map(|&f| format!("{}={}", f.as_str(), grid.count(f)))
        .collect();
    eprintln!("grid {}x{}: {}", args.nx, args.ny, counts.join(" "));
    Ok(())
}

fn curve_summary(c: &InterpolationCurve) -> String {
    // maxima over no successful samples are reported as "none"
    let show = |v: f64| if v.is_finite() { format!("{v:?}") } else { "none".to_string() };
    format!("{0}_max={1} {0}_argmax_n={2} {0}_interior_max={3}", c.backend, show(c.max_abs), show(c.argmax_n), show(c.interior_max_abs))
}

pub fn interp(args: &InterpArgs) -> Outcome {
    let abel = interpolation_curve(args.x, args.y, args.samples, &Backend::abel())?;
    let complex = interpolation_curve(args.x, args.y, args.samples, &backend(BackendKind::Schroeder, &args.schroeder)?)?;
    let mut out = open_output(args.output.as_deref())?;
    write_curve_csv(&mut out, &[&abel, &complex], true)?;
    out.flush()?;
    let summary = format!("summary {} {}", curve_summary(&abel), curve_summary(&complex));
    if args.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

const GRAD_INPUTS: usize = 3;
const GRAD_OUTPUTS: usize = 2;
const MAX_DRAWS: usize = 16;

/// A random layer of the requested kind with an input where it is smooth:
/// arbitrary complex inputs for the additive layer, inputs off the log branch
/// cut for the product layer and positive reals for the iterate layers.
fn random_layer(args: &GradcheckArgs, rng: &mut ChaCha8Rng) -> Result<(Layer, Vec<Complex64>), Error> {
    let mut w = CMatrix::random_real(GRAD_OUTPUTS, GRAD_INPUTS, rng);
    let order = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    let positive = |rng: &mut ChaCha8Rng| (0..GRAD_INPUTS).map(|_| Complex64::new(rng.gen_range(0.3..3.0), 0.0)).collect::<Vec<_>>();
    Ok(match args.layer {
        LayerKind::Additive | LayerKind::Product => {
            for i in 0..GRAD_OUTPUTS {
                for j in 0..GRAD_INPUTS {
                    w.set(i, j, Complex64::new(w.get(i, j).re, rng.gen_range(-0.5..0.5)));
                }
            }
            if args.layer == LayerKind::Additive {
                let x = (0..GRAD_INPUTS).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                (Layer::Additive(AdditiveLayer::new(w, Transfer::Identity)?), x)
            } else {
                let beta = Branch::default().beta();
                let x = (0..GRAD_INPUTS)
                    .map(|_| Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(beta + 0.3..beta + std::f64::consts::TAU - 0.3)))
                    .collect();
                (Layer::Product(ProductLayer::new(w)?), x)
            }
        }
        LayerKind::Addiplication => {
            let b = backend(args.backend, &SchroederOpts { beta: Branch::default().beta(), r0: 1e-6 })?;
            let n = (0..GRAD_OUTPUTS).map(|_| order(rng)).collect();
            (Layer::Addiplication(AddiplicationLayer::new(w, n, Transfer::Logistic, b)?), positive(rng))
        }
        LayerKind::Split => {
            let b = backend(args.backend, &SchroederOpts { beta: Branch::default().beta(), r0: 1e-6 })?;
            let n_hat = (0..GRAD_OUTPUTS).map(|_| order(rng)).collect();
            let n_tilde = (0..GRAD_INPUTS).map(|_| order(rng)).collect();
            (Layer::Split(SplitIterateLayer::new(w, n_hat, n_tilde, Transfer::Logistic, b)?), positive(rng))
        }
    })
}

pub fn gradcheck(args: &GradcheckArgs) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    // redraw from the same stream until the forward pass is defined; the
    // last draw is checked regardless, so a layer that never evaluates fails
    let mut draw = 1;
    let (layer, x) = loop {
        let (layer, x) = random_layer(args, &mut rng)?;
        if draw == MAX_DRAWS || layer.forward(&x).is_ok() {
            break (layer, x);
        }
        draw += 1;
    };
    let real = layer_is_real(&layer);
    let seed: Vec<Complex64> = (0..GRAD_OUTPUTS)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), if real { 0.0 } else { rng.gen_range(-1.0..1.0) }))
        .collect();
    let report = grad_check_with(&layer, &x, &seed, args.eps, |g| {
        if args.corrupt {
            let w = g.weights.get(0, 0);
            g.weights.set(0, 0, w + Complex64::new(0.5, 0.0));
        }
    })?;

    let passed = report.passed(GRAD_CHECK_TOLERANCE) && report.entries.iter().any(|e| !e.singular);
    let mut out = io::stdout().lock();
    let backend = match &layer {
        Layer::Addiplication(l) => l.backend.name(),
        Layer::Split(l) => l.backend.name(),
        _ => "none",
    };
    writeln!(out, "layer     {} ({GRAD_INPUTS} -> {GRAD_OUTPUTS}, backend {backend}, seed {}, draw {draw}, eps {:?})", layer.kind(), args.seed, args.eps)?;
    writeln!(out, "group     worst rel_error")?;
    for (group, worst) in report.worst_by_group() {
        writeln!(out, "{group:<9} {worst:.3e}")?;
    }
    let singular = report.entries.iter().filter(|e| e.singular).count();
    writeln!(out, "singular  {singular} of {} entries", report.entries.len())?;
    if let Some(msg) = &report.failure {
        writeln!(out, "failure   {msg}")?;
    }
    writeln!(out, "result    {} (tolerance {GRAD_CHECK_TOLERANCE:e})", if passed { "pass" } else { "FAIL" })?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn layer_is_real(layer: &Layer) -> bool {
    match layer {
        Layer::Addiplication(l) => l.backend.is_real(),
        Layer::Split(l) => l.backend.is_real(),
        _ => false,
    }
}

pub fn shift(args: &ShiftArgs) -> Outcome {
    let record = match args.mode {
        ShiftMode::Analytic => shift_analytic(args)?,
        ShiftMode::Train => shift_train(args)?,
    };
    let mut out = open_output(args.output.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &record).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn shift_analytic(args: &ShiftArgs) -> Result<serde_json::Value, Error> {
    if args.n == 0 || args.n > MAX_ANALYTIC_N {
        return Err(Error::InvalidConfig(format!("analytic mode needs 1 <= N <= {MAX_ANALYTIC_N}, got {}", args.n)));
    }
    let instances = if args.exhaustive {
        all_instances(args.n)?
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        (0..args.samples.unwrap_or(100)).map(|_| ShiftInstance::generate_with(args.n, &mut rng)).collect::<Result<_, _>>()?
    };
    let net = iterexp::build_analytic_network(args.n)?;
    let (mut max_abs_error, mut max_imag) = (0.0f64, 0.0f64);
    for inst in &instances {
        let e = evaluate_analytic(&net, inst)?;
        max_abs_error = max_abs_error.max(e.max_abs_error);
        max_imag = max_imag.max(e.max_imag);
    }
    Ok(json!({
        "mode": "analytic",
        "n": args.n,
        "exhaustive": args.exhaustive,
        "seed": args.seed,
        "instances": instances.len(),
        "max_abs_error": max_abs_error,
        "max_imag": max_imag,
    }))
}

fn shift_train(args: &ShiftArgs) -> Result<serde_json::Value, Error> {
    let config = ShiftTrainConfig {
        n: args.n,
        trials: args.trials,
        epochs: args.epochs,
        learning_rate: args.lr,
        seed: args.seed,
        samples: args.samples.unwrap_or(64),
        batch_size: args.batch_size,
        init: match args.init {
            InitKind::Random => ShiftInit::Random,
            InitKind::Analytic => ShiftInit::Analytic,
        },
    };
    let report = train_on_shift_task(&config)?;
    Ok(json!({
        "mode": "train",
        "n": args.n,
        "decreased": report.decreased_count,
        "trials": report.trials.len(),
        "report": report,
    }))
}

