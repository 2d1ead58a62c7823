//! Line-based text format for a generated environment.
//!
//! ```text
//! horizon-irl environment 1
//! kind gridworld
//! width 10
//! height 10
//! seed 42
//! n_states 100
//! n_actions 9
//! r_max 1.0000000000000000e0
//! goals 3 17 58 90
//! objects
//! n_colors 0
//! expert 3 3 4 ...
//! rewards
//! <one line per state, n_actions values>
//! transitions
//! <one line per (state, action) in row-major order, n_states values>
//! end
//! ```
//!
//! Objects are written as `cell:outer:inner`. Features are rebuilt from the
//! objects on load. Reals use 17 significant digits so that a round trip is
//! exact.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{indicator_features, objectworld_features, EnvKind, Environment, Object};
use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_real, write_text};
use crate::mdp::{DeterministicPolicy, Dynamics, TabularMdp};

const HEADER: &str = "horizon-irl environment 1";

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn render_environment(env: &Environment) -> String {
    let mdp = &env.mdp;
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "kind {}", env.kind.name());
    let _ = writeln!(out, "width {}", env.width);
    let _ = writeln!(out, "height {}", env.height);
    let _ = writeln!(out, "seed {}", env.seed);
    let _ = writeln!(out, "n_states {n}");
    let _ = writeln!(out, "n_actions {m}");
    let _ = writeln!(out, "r_max {}", fmt_real(mdp.r_max()));
    let _ = writeln!(out, "goals {}", join(&env.goals));
    let objects = env.objects.iter().map(|o| format!("{}:{}:{}", o.cell, o.outer, o.inner));
    let _ = writeln!(out, "objects {}", join(objects));
    let _ = writeln!(out, "n_colors {}", env.n_colors);
    let _ = writeln!(out, "expert {}", join(&env.expert.actions));
    out.push_str("rewards\n");
    for s in 0..n {
        let _ = writeln!(out, "{}", join((0..m).map(|a| fmt_real(mdp.rewards()[(s, a)]))));
    }
    out.push_str("transitions\n");
    let p = mdp.dynamics();
    for s in 0..n {
        for a in 0..m {
            let _ = writeln!(out, "{}", join((0..n).map(|t| fmt_real(p.prob(s, a, t)))));
        }
    }
    out.push_str("end\n");
    // trailing spaces appear for empty lists; strip them for tidier files
    out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}

pub fn write_environment(path: &Path, env: &Environment) -> Result<()> {
    write_text(path, &render_environment(env))
}

pub fn read_environment(path: &Path) -> Result<Environment> {
    parse_environment(&std::fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => Err(Error::Parse { line: self.line + 1, msg: "unexpected end of file".into() }),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn key(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.trim()),
            None if l == key => Ok(""),
            _ => Err(self.err(format!("expected `{key}`"))),
        }
    }

    fn key_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.key(key)?;
        v.parse().map_err(|_| self.err(format!("bad integer for `{key}`")))
    }

    fn usizes(&self, text: &str) -> Result<Vec<usize>> {
        text.split_whitespace().map(|t| t.parse().map_err(|_| self.err(format!("bad integer `{t}`")))).collect()
    }

    fn reals(&self, text: &str, expected: usize) -> Result<Vec<f64>> {
        let v: Vec<f64> = text
            .split_whitespace()
            .map(|t| parse_real(t).ok_or_else(|| self.err(format!("bad number `{t}`"))))
            .collect::<Result<_>>()?;
        if v.len() != expected {
            return Err(self.err(format!("expected {expected} values, found {}", v.len())));
        }
        Ok(v)
    }
}

pub fn parse_environment(text: &str) -> Result<Environment> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    if lines.next()? != HEADER {
        return Err(lines.err("missing environment header"));
    }
    let kind_name = lines.key("kind")?;
    let kind = EnvKind::from_name(kind_name).ok_or_else(|| lines.err(format!("unknown kind `{kind_name}`")))?;
    let width = lines.key_usize("width")?;
    let height = lines.key_usize("height")?;
    let seed_text = lines.key("seed")?;
    let seed: u64 = seed_text.parse().map_err(|_| lines.err("bad seed"))?;
    let n = lines.key_usize("n_states")?;
    let m = lines.key_usize("n_actions")?;
    if n != width * height {
        return Err(lines.err("n_states must equal width × height"));
    }
    let r_max_text = lines.key("r_max")?;
    let r_max = parse_real(r_max_text).ok_or_else(|| lines.err("bad r_max"))?;
    let goals_text = lines.key("goals")?;
    let goals = lines.usizes(goals_text)?;
    let objects_text = lines.key("objects")?;
    let objects = objects_text
        .split_whitespace()
        .map(|t| {
            let parts = lines.usizes(&t.replace(':', " "))?;
            match parts[..] {
                [cell, outer, inner] if cell < n => Ok(Object { cell, outer, inner }),
                _ => Err(lines.err(format!("bad object `{t}`"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let n_colors = lines.key_usize("n_colors")?;
    if objects.iter().any(|o| o.outer >= n_colors || o.inner >= n_colors) {
        return Err(lines.err("object colour out of range"));
    }
    let expert_text = lines.key("expert")?;
    let expert_actions = lines.usizes(expert_text)?;
    if expert_actions.len() != n {
        return Err(lines.err("expert must list one action per state"));
    }

    lines.key("rewards")?;
    let mut rewards = DMatrix::zeros(n, m);
    for s in 0..n {
        let row = lines.next()?;
        let row = lines.reals(row, m)?;
        for (a, r) in row.into_iter().enumerate() {
            rewards[(s, a)] = r;
        }
    }
    lines.key("transitions")?;
    let mut data = Vec::with_capacity(n * m * n);
    for _ in 0..n * m {
        let row = lines.next()?;
        data.extend(lines.reals(row, n)?);
    }
    lines.key("end")?;

    let dynamics = Dynamics::from_row_major(n, m, &data)?;
    let mdp = TabularMdp::new(dynamics, rewards, r_max)?;
    let expert = DeterministicPolicy::new(expert_actions, m)?;
    let features = match kind {
        EnvKind::Gridworld => indicator_features(n),
        _ => objectworld_features(width, height, n_colors, &objects),
    };
    Ok(Environment { kind, width, height, seed, mdp, expert, goals, objects, n_colors, features })
}
