//! Reference generator backend speaking the wire protocol on its standard
//! streams: answers every request with the nearest-upsampled latest
//! semantic map and exits 0 when the driver closes its input.
//!
//! `--fail-after N` makes it die mid-frame while answering request `N`
//! (0-based); tests use this to exercise the driver's crash handling.

use std::io::{stdin, stdout, BufReader, BufWriter};
use std::process::ExitCode;

use maiv::generator::serve_echo;

fn main() -> ExitCode {
    let mut fail_after = None;
    let mut args = std::env::args().skip(1);
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--fail-after" => {
                let value = args.next().and_then(|v| v.parse::<usize>().ok());
                match value {
                    Some(n) => fail_after = Some(n),
                    None => {
                        eprintln!("maiv-echo: --fail-after needs a frame count");
                        return ExitCode::from(2);
                    }
                }
            }
            other => {
                eprintln!("maiv-echo: unknown argument {other:?}");
                return ExitCode::from(2);
            }
        }
    }

    let mut reader = BufReader::new(stdin().lock());
    let mut writer = BufWriter::new(stdout().lock());
    match serve_echo(&mut reader, &mut writer, fail_after) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("maiv-echo: {e}");
            ExitCode::FAILURE
        }
    }
}
