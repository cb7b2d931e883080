use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use kanbar::{execute, parse_range, render, BoundsDesc, Command, Invocation, Source, FIXTURES};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Validate,
    Homology,
    Bar,
    Kan,
    Prop,
    Compare,
    Report,
    /// List the bundled fixtures.
    Fixtures,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Emit {
    #[default]
    Summary,
    Full,
}

/// Batch computations on presentation files.
#[derive(Debug, Parser)]
#[command(name = "kanbar", version)]
struct Args {
    command: Cmd,
    /// Presentation file (JSON, schema kanbar/1).
    #[arg(long, conflicts_with = "fixture")]
    file: Option<String>,
    /// A bundled presentation instead of a file.
    #[arg(long)]
    fixture: Option<String>,
    /// Restrict the command to one object.
    #[arg(long)]
    object: Option<String>,
    /// Bound overrides, e.g. `n_max=4,arity_max=3,degree_window=0..2`.
    #[arg(long)]
    bounds: Option<String>,
    /// Inclusive degree range `a..b`.
    #[arg(long)]
    degrees: Option<String>,
    /// phi | telescope | hv | completion | sequence | continuation
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    emit: Emit,
    /// Include wall-clock timings (reports are then not reproducible).
    #[arg(long)]
    timing: bool,
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Fixtures => {
            for (n, _) in FIXTURES {
                println!("{n}");
            }
            return ExitCode::SUCCESS;
        }
        c => Command::parse(&format!("{c:?}").to_lowercase()).expect("same names"),
    };
    let source = match (args.file, args.fixture) {
        (Some(f), _) => Source::File(f),
        (None, Some(n)) => Source::Fixture(n),
        (None, None) => return fail("one of --file and --fixture is required"),
    };
    let mut inv = Invocation::new(command, source);
    inv.object = args.object;
    inv.scenario = args.scenario;
    inv.full = matches!(args.emit, Emit::Full);
    inv.timing = args.timing;
    if let Some(d) = args.degrees {
        match parse_range(&d) {
            Ok(r) => inv.degrees = Some(r),
            Err(e) => return fail(&e),
        }
    }
    if let Some(b) = args.bounds {
        match BoundsDesc::parse_overrides(&b) {
            Ok(b) => inv.bounds = b,
            Err(e) => return fail(&e),
        }
    }
    match execute(&inv) {
        Ok(out) => {
            print!("{}", render(&out.report));
            ExitCode::from(out.code as u8)
        }
        Err(e) => fail(&e.to_string()),
    }
}
