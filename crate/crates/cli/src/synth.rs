use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hsikit_core::cube::{read_cube, synth_scene, write_cube};
use hsikit_core::degrade::{degrade_pipeline, Family, RecipeSampler};
use hsikit_core::seed::mix64;
use hsikit_core::{HsiCube, SceneSpec};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::failure::{io_failure, Failure};
use crate::SynthArgs;

pub const MANIFEST_NAME: &str = "index.csv";
pub const MANIFEST_HEADER: &str =
    "item,gt_path,deg_path,prompt_path,recipe_path,fired_families,recipe_hash";

enum Source {
    Procedural {
        height: usize,
        width: usize,
        bands: usize,
        materials: usize,
    },
    Files(Vec<PathBuf>),
}

impl Source {
    fn clean_cube(&self, item: usize, item_seed: u64) -> Result<HsiCube, Failure> {
        match self {
            Source::Procedural {
                height,
                width,
                bands,
                materials,
            } => {
                let mut spec = SceneSpec::new(*height, *width, *bands, item_seed);
                spec.n_materials = *materials;
                Ok(synth_scene(&spec)?)
            }
            Source::Files(files) => {
                let path = &files[item % files.len()];
                Ok(read_cube(path)?)
            }
        }
    }
}

struct ItemRecord {
    fired: Vec<Family>,
    recipe_hash: String,
}

fn input_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| io_failure(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_failure(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "hsc") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Failure::io(format!(
            "{}: no .hsc cubes found",
            dir.display()
        )));
    }
    Ok(files)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn synth_item(args: &SynthArgs, source: &Source, item: usize) -> Result<ItemRecord, Failure> {
    let item_seed = mix64(args.seed, item as u64);
    let clean = source.clean_cube(item, item_seed)?;
    let recipe = RecipeSampler::new(args.prob, clean.bands()).sample(item_seed)?;
    let (degraded, prompt) = degrade_pipeline(&clean, &recipe)?;
    let recipe_text = recipe.to_text();
    write_cube(&clean, args.out.join(format!("{item}_gt.hsc")))?;
    write_cube(&degraded, args.out.join(format!("{item}_deg.hsc")))?;
    write_text(
        &args.out.join(format!("{item}_prompt.txt")),
        &format!("{}\n", prompt.text(args.format)),
    )?;
    write_text(&args.out.join(format!("{item}_recipe.txt")), &recipe_text)?;
    Ok(ItemRecord {
        fired: recipe.fired(),
        recipe_hash: hex::encode(Sha256::digest(recipe_text.as_bytes())),
    })
}

pub fn run(args: &SynthArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.prob) {
        return Err(Failure::usage(format!(
            "--prob must lie in [0, 1], got {}",
            args.prob
        )));
    }
    let source = match (&args.procedural, &args.input) {
        (Some(dims), None) => {
            let bands = dims
                .get(2)
                .copied()
                .unwrap_or(hsikit_core::degrade::DEFAULT_BANDS);
            if dims[0] == 0 || dims[1] == 0 || bands == 0 {
                return Err(Failure::usage("--procedural dimensions must be positive"));
            }
            Source::Procedural {
                height: dims[0],
                width: dims[1],
                bands,
                materials: args.materials,
            }
        }
        (None, Some(dir)) => Source::Files(input_files(dir)?),
        _ => {
            return Err(Failure::usage(
                "exactly one of --procedural and --input is required",
            ))
        }
    };
    let count = args.count.unwrap_or(match &source {
        Source::Procedural { .. } => 1,
        Source::Files(f) => f.len(),
    });
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;

    let records: Vec<ItemRecord> = (0..count)
        .into_par_iter()
        .map(|i| {
            let r = synth_item(args, &source, i).map_err(|f| f.context(format!("item {i}")));
            if r.is_ok() {
                eprintln!("synth: item {i} done");
            }
            r
        })
        .collect::<Result<_, _>>()?;

    let mut manifest = format!("{MANIFEST_HEADER}\n");
    let mut fired_counts = [0usize; 4];
    for (i, r) in records.iter().enumerate() {
        let fired = if r.fired.is_empty() {
            "none".to_string()
        } else {
            r.fired.iter().map(|f| f.id()).collect::<Vec<_>>().join(";")
        };
        for f in &r.fired {
            fired_counts[Family::ALL.iter().position(|g| g == f).unwrap()] += 1;
        }
        let _ = writeln!(
            manifest,
            "{i},{i}_gt.hsc,{i}_deg.hsc,{i}_prompt.txt,{i}_recipe.txt,{fired},{}",
            r.recipe_hash
        );
    }
    write_text(&args.out.join(MANIFEST_NAME), &manifest)?;
    let summary: Vec<String> = Family::ALL
        .iter()
        .zip(fired_counts)
        .map(|(f, n)| format!("{}={n}", f.id()))
        .collect();
    println!("items={count} {}", summary.join(" "));
    Ok(())
}
