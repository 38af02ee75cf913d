use std::fs;
use std::path::Path;

use so3fft::correlation::{multichannel_correlate, rotate_s2_spectral, rotate_so3_spectral};
use so3fft::gft::*;
use so3fft::grids::{Bandwidth, Rotation};
use so3fft::harmonics::WignerTables;
use so3fft::harness::{run_bench, run_equivariance_with_cap, EquivarianceConfig, EquivarianceReport};
use so3fft::signals::{molecule_channels, project_image, read_container, read_header, write_container, MoleculeSpec, Object, PlanarImage};
use so3fft::{oracle, Error};

use crate::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(Error::ImaginaryResidue(_) | Error::NonFinite(_) | Error::SingularPotential { .. }) => 3,
            CliError::Lib(_) => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    match cli.command {
        Command::Transform(a) => transform(a),
        Command::Correlate(a) => correlate(a),
        Command::Rotate(a) => rotate(a),
        Command::Equivariance(a) => equivariance(a),
        Command::Bench(a) => bench(a),
        Command::ProjectImage(a) => {
            check_paths(&a.input, Some(&a.output))?;
            let img = PlanarImage::from_pgm(&a.input)?;
            save(&a.output, Object::S2(project_image(&img, bandwidth(a.bandwidth)?)))
        }
        Command::ProjectMolecule(a) => {
            check_paths(&a.input, Some(&a.output))?;
            let m = MoleculeSpec::parse(&fs::read_to_string(&a.input).map_err(Error::from)?, a.radius)?;
            let s = molecule_channels(&m, a.center, bandwidth(a.bandwidth)?)?;
            println!("{} channels for charges {:?} at b={}", s.channels, m.types(), a.bandwidth);
            save(&a.output, Object::S2(s))
        }
        Command::Info { input } => {
            check_paths(&input, None)?;
            let header = read_header(&input)?;
            println!("{}", serde_json::to_string(&header).expect("header serializes"));
            Ok(())
        }
    }
}

fn bandwidth(b: usize) -> Result<Bandwidth> {
    Bandwidth::new(b).map_err(|_| CliError::Usage(format!("bandwidth must be at least 1, got {b}")))
}

/// Validates paths up front so no work is wasted on an unwritable destination.
fn check_paths(input: &Path, output: Option<&Path>) -> Result<()> {
    if !input.is_file() {
        return Err(Error::Invalid(format!("input {} is not a readable file", input.display())).into());
    }
    output.map_or(Ok(()), check_output)
}

fn type_name(obj: &Object) -> String {
    match serde_json::to_value(obj.header().object_type) {
        Ok(serde_json::Value::String(s)) => s,
        _ => unreachable!("object types serialize as strings"),
    }
}

fn save(path: &Path, obj: Object) -> Result<()> {
    let h = obj.header();
    write_container(path, &obj)?;
    println!(
        "wrote {} (b={}, channels={}) to {}",
        type_name(&obj),
        h.bandwidth,
        h.channels,
        path.display()
    );
    Ok(())
}

fn mismatch(expected: &str, found: &Object) -> CliError {
    Error::Invalid(format!("expected {expected}, found {}", type_name(found))).into()
}

fn load_signal(path: &Path) -> Result<Signal> {
    let obj = read_container(path)?;
    match obj {
        Object::S2(_) | Object::SO3(_) => Ok(obj.into_signal().expect("signal object")),
        other => Err(mismatch("a signal", &other)),
    }
}

fn transform(a: TransformArgs) -> Result<()> {
    check_paths(&a.input, Some(&a.output))?;
    let obj = read_container(&a.input)?;
    let fast = a.path == PathArg::Fast;
    let out = match (a.kind, a.dir, obj) {
        (KindArg::S2, Direction::Forward, Object::S2(f)) => {
            let t = WignerTables::new(f.bandwidth)?;
            Object::S2Spectrum(if fast { s2_fft_forward(&f, &t)? } else { s2_dft_forward(&f, &t)? })
        }
        (KindArg::S2, Direction::Inverse, Object::S2Spectrum(s)) => {
            let t = WignerTables::new(s.bandwidth)?;
            Object::S2(if fast { s2_fft_inverse(&s, &t)? } else { s2_dft_inverse(&s, &t)? })
        }
        (KindArg::So3, Direction::Forward, Object::SO3(f)) => {
            let t = WignerTables::new(f.bandwidth)?;
            Object::SO3Spectrum(if fast { so3_fft_forward(&f, &t)? } else { so3_dft_forward(&f, &t)? })
        }
        (KindArg::So3, Direction::Inverse, Object::SO3Spectrum(s)) => {
            let t = WignerTables::new(s.bandwidth)?;
            Object::SO3(if fast { so3_fft_inverse(&s, &t)? } else { so3_dft_inverse(&s, &t)? })
        }
        (kind, dir, other) => {
            let want = match (kind, dir) {
                (KindArg::S2, Direction::Forward) => "s2",
                (KindArg::S2, Direction::Inverse) => "s2spec",
                (KindArg::So3, Direction::Forward) => "so3",
                (KindArg::So3, Direction::Inverse) => "so3spec",
            };
            return Err(mismatch(want, &other));
        }
    };
    save(&a.output, out)
}

fn correlate(a: CorrelateArgs) -> Result<()> {
    check_paths(&a.input, Some(&a.output))?;
    check_paths(&a.filters, None)?;
    if a.out_channels == 0 {
        return Err(CliError::Usage("--out-channels must be at least 1".into()));
    }
    let f = load_signal(&a.input)?;
    let bank = load_signal(&a.filters)?;
    let k_in = f.channels();
    if bank.channels() != a.out_channels * k_in {
        return Err(Error::Shape(format!(
            "filter file has {} channels, expected {} output x {} input channels",
            bank.channels(),
            a.out_channels,
            k_in
        ))
        .into());
    }
    let split: Vec<Signal> = (0..a.out_channels)
        .map(|o| {
            let idx: Vec<usize> = (o * k_in..(o + 1) * k_in).collect();
            match &bank {
                Signal::S2(s) => Signal::S2(s.select(&idx)),
                Signal::SO3(s) => Signal::SO3(s.select(&idx)),
            }
        })
        .collect();
    let b_out = match a.out_bandwidth {
        Some(b) => bandwidth(b)?,
        None => f.bandwidth(),
    };
    save(&a.output, Object::SO3(multichannel_correlate(&split, &f, b_out)?))
}

fn rotate(a: RotateArgs) -> Result<()> {
    check_paths(&a.input, Some(&a.output))?;
    let r = Rotation::new(a.alpha, a.beta, a.gamma);
    let f = load_signal(&a.input)?;
    let t = WignerTables::new(f.bandwidth())?;
    let out = match (f, a.method) {
        (Signal::S2(f), RotationArg::Spectral) => Object::S2(rotate_s2_spectral(&f, &r, &t)?),
        (Signal::S2(f), RotationArg::Resampling) => Object::S2(oracle::rotate_s2_by_resampling(&f, &r, &t)?),
        (Signal::SO3(f), RotationArg::Spectral) => Object::SO3(rotate_so3_spectral(&f, &r, &t)?),
        (Signal::SO3(f), RotationArg::Resampling) => Object::SO3(oracle::rotate_so3_by_resampling(&f, &r, &t)?),
    };
    save(&a.output, out)
}

fn equivariance(a: EquivarianceArgs) -> Result<()> {
    let mut configs = Vec::new();
    for &b in &a.bandwidth {
        for &layers in &a.layers {
            let mut cfg = EquivarianceConfig::new(bandwidth(b)?, layers);
            cfg.channels = a.channels;
            cfg.trials = a.trials;
            cfg.with_relu = a.relu;
            cfg.rotation_source = a.rotation.into();
            cfg.seed = a.seed;
            cfg.zero_input = a.zero_input;
            cfg.validate()?;
            configs.push(cfg);
        }
    }
    if let Some(csv) = &a.csv {
        check_output(csv)?;
    }
    let mut csv = String::from(EquivarianceReport::CSV_HEADER);
    csv.push('\n');
    for cfg in &configs {
        let report = run_equivariance_with_cap(cfg, a.memory_cap)?;
        println!("{}", report.to_json_line());
        csv.push_str(&report.to_csv_row());
        csv.push('\n');
    }
    if let Some(path) = &a.csv {
        fs::write(path, csv).map_err(Error::from)?;
    }
    Ok(())
}

fn check_output(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("output directory {} does not exist", parent.display())).into())
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    if let Some(csv) = &a.csv {
        check_output(csv)?;
    }
    let kind = match a.kind {
        KindArg::S2 => Kind::S2,
        KindArg::So3 => Kind::SO3,
    };
    let report = run_bench(&a.bandwidth, kind, a.reps)?;
    println!("{} repetitions, {} threads", report.repetitions, report.threads);
    println!("{:>4} {:>4} {:>10} {:>6} {:>14}  note", "b", "kind", "op", "path", "median [s]");
    for row in &report.rows {
        let time = row.median_seconds.map_or_else(|| "-".to_string(), |t| format!("{t:.6}"));
        println!(
            "{:>4} {:>4} {:>10} {:>6} {:>14}  {}",
            row.b,
            row.kind,
            row.op,
            row.path,
            time,
            row.note.as_deref().unwrap_or("")
        );
    }
    if let Some(path) = &a.csv {
        fs::write(path, report.to_csv()).map_err(Error::from)?;
    }
    Ok(())
}
