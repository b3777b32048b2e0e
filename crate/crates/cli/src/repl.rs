//! Line-oriented query session over a graph loaded once.

use std::io::{BufRead, IsTerminal, Write};

use hetfs_core::engine::EngineKind;
use hetfs_core::ContentMode;

use crate::commands::{render, run_query, summary_line, Session, Target};
use crate::config::ProjectConfig;
use crate::{CliError, CliResult};

const HELP: &str = "\
queries:
  <node> <metapaths>     e.g. `a12 APA,APVPA`
  <node> --free <len>    every symmetric meta-path up to <len>
directives:
  \\help                  this text
  \\quit                  end the session
  \\mode node|pair|off    content mode
  \\k <n>                 result count
  \\engine exact|mc       scoring engine
";

enum Step {
    Continue,
    Quit,
}

pub fn run(cfg: &ProjectConfig, json: bool, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let prompt = std::io::stdin().is_terminal();
    session(cfg, json, prompt, input, out, &mut std::io::stderr())
}

/// Errors on individual lines go to `err` and the session continues; only a
/// failure to load the graph ends it.
pub fn session(
    cfg: &ProjectConfig,
    json: bool,
    prompt: bool,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let session = Session::load(cfg)?;
    let mut cfg = cfg.clone();
    let mut wm = session.model(cfg.decay, cfg.content_mode)?;
    writeln!(out, "# {}", summary_line(&session.dataset.hin))?;
    let mut load_ms = session.load_ms;
    let mut line = String::new();
    loop {
        if prompt {
            write!(out, "hetfs> ")?;
        }
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let step = if let Some(directive) = text.strip_prefix('\\') {
            directive_step(directive, &mut cfg, out).and_then(|step| {
                wm = session.model(cfg.decay, cfg.content_mode)?;
                Ok(step)
            })
        } else {
            query_line(text, &wm, &cfg, json, out).and_then(|()| {
                writeln!(out, "# load_ms={load_ms:.3}")?;
                // the graph and weights stay resident for later queries
                load_ms = 0.0;
                Ok(Step::Continue)
            })
        };
        match step {
            Ok(Step::Quit) => break,
            Ok(Step::Continue) => {}
            Err(e) => writeln!(err, "error: {e}")?,
        }
    }
    Ok(())
}

fn directive_step(directive: &str, cfg: &mut ProjectConfig, out: &mut dyn Write) -> CliResult<Step> {
    let mut parts = directive.split_whitespace();
    let name = parts.next().unwrap_or("");
    let arg = parts.next();
    if parts.next().is_some() {
        return Err(CliError::Usage(format!("too many arguments to \\{name}")));
    }
    let need = |what: &str| CliError::Usage(format!("\\{name} needs {what}"));
    match name {
        "quit" | "q" | "exit" => return Ok(Step::Quit),
        "help" | "h" | "?" => out.write_all(HELP.as_bytes())?,
        "mode" => {
            let mode: ContentMode = arg.ok_or_else(|| need("node, pair or off"))?.parse()?;
            cfg.content_mode = mode;
            writeln!(out, "# content mode {}", mode.name())?;
        }
        "k" => {
            let k = arg.ok_or_else(|| need("a count"))?;
            cfg.set("k", k, "\\k", "".as_ref())?;
            writeln!(out, "# k {}", cfg.k)?;
        }
        "engine" => {
            let e: EngineKind = arg.ok_or_else(|| need("exact or mc"))?.parse()?;
            cfg.engine = e;
            writeln!(out, "# engine {}", crate::commands::engine_of(cfg))?;
        }
        _ => return Err(CliError::Usage(format!("unknown directive \\{name}; try \\help"))),
    }
    Ok(Step::Continue)
}

fn query_line(
    text: &str,
    wm: &hetfs_core::WeightModel<'_>,
    cfg: &ProjectConfig,
    json: bool,
    out: &mut dyn Write,
) -> CliResult {
    let mut parts = text.split_whitespace();
    let node = parts.next().unwrap_or_default();
    let target = match (parts.next(), parts.next(), parts.next()) {
        (Some("--free"), Some(len), None) => Target::Free(
            len.parse()
                .map_err(|_| CliError::Usage(format!("bad meta-path length `{len}`")))?,
        ),
        (Some(mps), None, None) => Target::Paths(mps),
        _ => {
            return Err(CliError::Usage(
                "expected `<node> <metapaths>` or `<node> --free <len>`".into(),
            ))
        }
    };
    let result = run_query(wm, cfg, node, target)?;
    render(&result, json, out)
}
