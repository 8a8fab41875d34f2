use std::fs;

use hsikit_core::cube::{read_cube, write_cube, write_pgm};
use hsikit_core::freq::{
    fit_affine_model, invert_affine_model, residual_spectrum, AffineFreqModel,
};
use hsikit_core::metrics::psnr;

use crate::failure::{io_failure, Failure};
use crate::{AnalyzeArgs, RestoreArgs};

pub fn analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    if args.bins == 0 {
        return Err(Failure::usage("--bins must be at least 1"));
    }
    let clean = read_cube(&args.clean)?;
    let degraded = read_cube(&args.degraded)?;
    if !clean.same_shape(&degraded) {
        return Err(Failure::data(format!(
            "shape mismatch: clean {} is {}, degraded {} is {}",
            args.clean.display(),
            clean.shape_string(),
            args.degraded.display(),
            degraded.shape_string()
        )));
    }
    let model = fit_affine_model(&clean, &degraded, args.bins)?;
    model.write_csv(&args.out)?;
    eprintln!("analyze: wrote {}", args.out.display());

    if let Some(dir) = &args.spectra_dir {
        fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
        for &band in &args.bands {
            let spectrum = residual_spectrum(&clean, &degraded, band)?;
            let path = dir.join(format!("residual_band{band}.pgm"));
            write_pgm(spectrum.view(), &path)?;
            eprintln!("analyze: wrote {}", path.display());
        }
    }
    let flagged = model.non_invertible_bins(hsikit_core::freq::DEFAULT_EPSILON);
    println!("bins={} non_invertible={}", model.n_bins(), flagged.len());
    Ok(())
}

pub fn restore(args: &RestoreArgs) -> Result<(), Failure> {
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(Failure::usage(format!(
            "--epsilon must be positive, got {}",
            args.epsilon
        )));
    }
    let model = AffineFreqModel::read_csv(&args.model)?;
    let degraded = read_cube(&args.degraded)?;
    let flagged = model.non_invertible_bins(args.epsilon);
    if !flagged.is_empty() {
        eprintln!(
            "warning: bins {flagged:?} are not invertible (|1 + lambda|^2 < {}); the epsilon guard is used there",
            args.epsilon
        );
    }
    let restored = invert_affine_model(&degraded, &model, args.epsilon)?;
    write_cube(&restored, &args.out)?;
    eprintln!("restore: wrote {}", args.out.display());
    if let Some(reference) = &args.reference {
        let clean = read_cube(reference)?;
        let before = psnr(&clean, &degraded, 1.0)?;
        let after = psnr(&clean, &restored, 1.0)?;
        eprintln!("restore: psnr degraded {before:.4} dB, restored {after:.4} dB");
        println!("psnr_degraded={before:?} psnr_restored={after:?}");
    }
    Ok(())
}
