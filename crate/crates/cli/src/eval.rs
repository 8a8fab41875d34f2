use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use hsikit_core::cube::read_cube;
use hsikit_core::metrics::{total_loss, MetricsReport, LOSS_CSV_HEADER, METRICS_CSV_HEADER};

use crate::failure::{io_failure, Failure};
use crate::synth::MANIFEST_HEADER;
use crate::EvalArgs;

/// Appends `rows` to `path`, writing `header` first when the file is new or
/// empty.
fn append_rows(path: &Path, header: &str, rows: &[String]) -> Result<(), Failure> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_failure(path, e))?;
    let mut text = String::new();
    if fresh {
        text.push_str(header);
        text.push('\n');
    }
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    file.write_all(text.as_bytes())
        .map_err(|e| io_failure(path, e))
}

/// `(reference, test)` pairs of a synth manifest: ground truth against the
/// degraded cube.
fn manifest_pairs(path: &Path) -> Result<Vec<(PathBuf, PathBuf)>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(Failure::data(format!(
            "{}: not a synth manifest",
            path.display()
        )));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != MANIFEST_HEADER.split(',').count() {
                return Err(Failure::data(format!(
                    "{}: malformed line {}",
                    path.display(),
                    i + 2
                )));
            }
            Ok((base.join(fields[1]), base.join(fields[2])))
        })
        .collect()
}

fn default_losses_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.losses.csv"))
}

pub fn run(args: &EvalArgs) -> Result<(), Failure> {
    if !(args.range > 0.0 && args.range.is_finite()) {
        return Err(Failure::usage(format!(
            "--range must be positive, got {}",
            args.range
        )));
    }
    let pairs = match (&args.manifest, &args.reference, &args.test) {
        (Some(m), _, _) => manifest_pairs(m)?,
        (None, Some(r), Some(t)) => vec![(r.clone(), t.clone())],
        _ => return Err(Failure::usage("give --reference and --test, or --manifest")),
    };
    let mut metric_rows = Vec::with_capacity(pairs.len());
    let mut loss_rows = Vec::new();
    for (reference, test) in &pairs {
        let r = read_cube(reference)?;
        let t = read_cube(test)?;
        if !r.same_shape(&t) {
            return Err(Failure::data(format!(
                "shape mismatch: reference {} is {}, test {} is {}",
                reference.display(),
                r.shape_string(),
                test.display(),
                t.shape_string()
            )));
        }
        let report = MetricsReport::compute(&r, &t, args.range)?;
        println!("{}", report.csv_row());
        metric_rows.push(report.csv_row());
        if args.losses {
            let losses = total_loss(&r, &t)?;
            println!("{}", losses.csv_row());
            loss_rows.push(losses.csv_row());
        }
    }
    append_rows(&args.out, METRICS_CSV_HEADER, &metric_rows)?;
    eprintln!(
        "eval: {} row(s) appended to {} (data_range={})",
        metric_rows.len(),
        args.out.display(),
        args.range
    );
    if args.losses {
        let path = args
            .losses_out
            .clone()
            .unwrap_or_else(|| default_losses_path(&args.out));
        append_rows(&path, LOSS_CSV_HEADER, &loss_rows)?;
        eprintln!("eval: loss rows appended to {}", path.display());
    }
    Ok(())
}
