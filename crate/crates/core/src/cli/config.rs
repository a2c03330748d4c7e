//! Flat `key = value` configuration files and flag overrides.
//!
//! ```text
//! # comment
//! num_rb = 106
//! snr_db = [0, 5, 10]
//! channel = ideal
//! ```
//!
//! Values are bare or double-quoted scalars, or bracketed comma-separated
//! lists. Precedence: defaults < file < flags; a preset then pins its fixed
//! settings.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use super::{Args, ConfigError, Preset};
use crate::channel::ChannelVector;
use crate::scheduler::SchedulerMode;
use crate::sim::{snr_range, ChannelMode, LinkModelKind, SimConfig};

pub const DEFAULT_OUT: &str = "results.csv";

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub preset: Option<Preset>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ChannelChoice {
    Ideal,
    Rayleigh,
    Forced,
}

/// Settings given explicitly by a file or by flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    num_rb: Option<u32>,
    scs_khz: Option<u32>,
    channel: Option<ChannelChoice>,
    h1: Option<[f64; 4]>,
    h2: Option<[f64; 4]>,
    snr_db: Option<Vec<f64>>,
    mcs: Option<Vec<u8>>,
    scheduler: Option<SchedulerMode>,
    tb_per_point: Option<u32>,
    seed: Option<u64>,
    link_model: Option<LinkModelKind>,
    epsilon: Option<f64>,
    threshold_margin_db: Option<f64>,
    data_re_per_rb: Option<u32>,
    slots_per_drop: Option<u32>,
    csirs_length: Option<usize>,
    max_harq_attempts: Option<u8>,
    threads: Option<usize>,
    preset: Option<Preset>,
    out: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($base:ident, $over:ident; $($f:ident),* $(,)?) => {
        Overrides { $($f: $over.$f.or($base.$f)),* }
    };
}

impl Overrides {
    /// Fields set in `over` win.
    pub fn merge(self, over: Overrides) -> Overrides {
        let base = self;
        merge_fields!(base, over; num_rb, scs_khz, channel, h1, h2, snr_db, mcs, scheduler,
            tb_per_point, seed, link_model, epsilon, threshold_margin_db, data_re_per_rb,
            slots_per_drop, csirs_length, max_harq_attempts, threads, preset, out)
    }

    /// Applies the overrides on top of the defaults and validates the result.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let mut sim = SimConfig::default();
        macro_rules! set {
            ($($f:ident => $g:ident),* $(,)?) => { $(if let Some(v) = self.$f.clone() { sim.$g = v; })* };
        }
        set!(num_rb => num_rb, scs_khz => scs_khz, snr_db => snr_grid_db, mcs => mcs_list,
            scheduler => scheduler_mode, tb_per_point => tb_per_point, seed => seed,
            link_model => link_model, epsilon => epsilon, threshold_margin_db => threshold_margin_db,
            data_re_per_rb => data_re_per_rb, slots_per_drop => slots_per_drop,
            csirs_length => csirs_length, max_harq_attempts => max_harq_attempts, threads => threads);
        sim.channel_mode = match self.channel {
            None | Some(ChannelChoice::Ideal) => ChannelMode::Ideal,
            Some(ChannelChoice::Rayleigh) => ChannelMode::Rayleigh,
            Some(ChannelChoice::Forced) => {
                let h = |key: &str, v: Option<[f64; 4]>, id| {
                    v.map(|e| ChannelVector::new(id, [Complex64::new(e[0], e[1]), Complex64::new(e[2], e[3])]))
                        .ok_or_else(|| invalid(key, "required when channel = forced"))
                };
                ChannelMode::Forced(h("h1", self.h1, 1)?, h("h2", self.h2, 2)?)
            }
        };
        if let Some(p) = self.preset {
            p.force(&mut sim);
        }
        sim.validate()?;
        Ok(RunConfig {
            sim,
            preset: self.preset,
            out: self.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

fn num<T: FromStr>(key: &str, s: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| invalid(key, format!("`{s}`: {e}")))
}

fn finite(key: &str, s: &str) -> Result<f64, ConfigError> {
    let v: f64 = num(key, s)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("`{s}` is not finite")))
    }
}

fn parse_channel(key: &str, s: &str, allow_forced: bool) -> Result<ChannelChoice, ConfigError> {
    match s {
        "ideal" => Ok(ChannelChoice::Ideal),
        "rayleigh" => Ok(ChannelChoice::Rayleigh),
        "forced" if allow_forced => Ok(ChannelChoice::Forced),
        _ => Err(invalid(key, format!("unknown channel model `{s}`"))),
    }
}

fn parse_sched(key: &str, s: &str) -> Result<SchedulerMode, ConfigError> {
    SchedulerMode::from_name(s).ok_or_else(|| invalid(key, format!("expected mumimo, pf or su, got `{s}`")))
}

fn parse_link(key: &str, s: &str) -> Result<LinkModelKind, ConfigError> {
    match s {
        "bdd" => Ok(LinkModelKind::Bdd),
        "threshold" => Ok(LinkModelKind::Threshold),
        _ => Err(invalid(key, format!("expected bdd or threshold, got `{s}`"))),
    }
}

fn parse_preset(key: &str, s: &str) -> Result<Preset, ConfigError> {
    Preset::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Preset::ALL.iter().map(Preset::name).collect();
        invalid(
            key,
            format!("unknown preset `{s}` (expected one of {})", names.join(", ")),
        )
    })
}

/// MCS items; `a-b` expands to an inclusive range.
fn parse_mcs_items<'a>(key: &str, items: impl IntoIterator<Item = &'a str>) -> Result<Vec<u8>, ConfigError> {
    let mut out = Vec::new();
    for item in items {
        let item = item.trim();
        match item.split_once('-') {
            Some((a, b)) if !a.is_empty() => {
                let (a, b): (u8, u8) = (num(key, a)?, num(key, b)?);
                if a > b {
                    return Err(invalid(key, format!("empty range `{item}`")));
                }
                out.extend(a..=b);
            }
            _ => out.push(num(key, item)?),
        }
    }
    if out.is_empty() {
        return Err(invalid(key, "no MCS given"));
    }
    if let Some(bad) = out.iter().find(|&&m| m > crate::mcs::MAX_MCS) {
        return Err(invalid(key, format!("MCS {bad} outside 0..=28")));
    }
    Ok(out)
}

fn parse_snr_flag(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![finite(key, v)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (finite(key, lo)?, finite(key, hi)?, finite(key, step)?);
            if step <= 0.0 || hi < lo {
                return Err(invalid(key, format!("`{s}` needs MIN <= MAX and STEP > 0")));
            }
            Ok(snr_range(lo, hi, step))
        }
        _ => Err(invalid(key, format!("expected MIN:MAX:STEP, got `{s}`"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('"').and_then(|r| r.strip_suffix('"')).unwrap_or(s)
}

fn parse_value(raw: &str) -> Option<Value> {
    let raw = raw.trim();
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner.strip_suffix(']')?;
        let items: Vec<String> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|i| unquote(i).to_string()).collect()
        };
        return Some(Value::List(items));
    }
    if raw.is_empty() {
        return None;
    }
    Some(Value::Scalar(unquote(raw).to_string()))
}

fn scalar<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    match v {
        Value::Scalar(s) => Ok(s),
        Value::List(_) => Err(invalid(key, "expected a single value, not a list")),
    }
}

fn list(v: &Value) -> Result<Vec<&str>, ConfigError> {
    match v {
        Value::List(items) => Ok(items.iter().map(String::as_str).collect()),
        Value::Scalar(s) => Ok(vec![s.as_str()]),
    }
}

fn channel_entries(key: &str, v: &Value) -> Result<[f64; 4], ConfigError> {
    let items = list(v)?;
    if items.len() != 4 {
        return Err(invalid(key, "expected [re0, im0, re1, im1]"));
    }
    let mut out = [0.0; 4];
    for (o, i) in out.iter_mut().zip(items) {
        *o = finite(key, i)?;
    }
    Ok(out)
}

/// Parses config file text. `path` is only used in error messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax {
            path: path.to_path_buf(),
            message: format!("line {}: {message}", lineno + 1),
        };
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let v = parse_value(raw).ok_or_else(|| syntax(format!("bad value for `{key}`")))?;
        match key {
            "num_rb" => o.num_rb = Some(num(key, scalar(key, &v)?)?),
            "scs_khz" => o.scs_khz = Some(num(key, scalar(key, &v)?)?),
            "channel" => o.channel = Some(parse_channel(key, scalar(key, &v)?, true)?),
            "h1" => o.h1 = Some(channel_entries(key, &v)?),
            "h2" => o.h2 = Some(channel_entries(key, &v)?),
            "snr_db" => {
                let items = list(&v)?;
                if items.is_empty() {
                    return Err(invalid(key, "empty SNR grid"));
                }
                o.snr_db = Some(items.into_iter().map(|i| finite(key, i)).collect::<Result<_, _>>()?);
            }
            "mcs" => o.mcs = Some(parse_mcs_items(key, list(&v)?)?),
            "scheduler" => o.scheduler = Some(parse_sched(key, scalar(key, &v)?)?),
            "tb_per_point" => o.tb_per_point = Some(num(key, scalar(key, &v)?)?),
            "seed" => o.seed = Some(num(key, scalar(key, &v)?)?),
            "link_model" => o.link_model = Some(parse_link(key, scalar(key, &v)?)?),
            "epsilon" => o.epsilon = Some(finite(key, scalar(key, &v)?)?),
            "threshold_margin_db" => o.threshold_margin_db = Some(finite(key, scalar(key, &v)?)?),
            "data_re_per_rb" => o.data_re_per_rb = Some(num(key, scalar(key, &v)?)?),
            "slots_per_drop" => o.slots_per_drop = Some(num(key, scalar(key, &v)?)?),
            "csirs_length" => o.csirs_length = Some(num(key, scalar(key, &v)?)?),
            "max_harq_attempts" => o.max_harq_attempts = Some(num(key, scalar(key, &v)?)?),
            "threads" => o.threads = Some(num(key, scalar(key, &v)?)?),
            "preset" => o.preset = Some(parse_preset(key, scalar(key, &v)?)?),
            "out" => o.out = Some(PathBuf::from(scalar(key, &v)?)),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
    }
    Ok(o)
}

fn flag_overrides(args: &Args) -> Result<Overrides, ConfigError> {
    let mut o = Overrides::default();
    if let Some(s) = &args.preset {
        o.preset = Some(parse_preset("--preset", s)?);
    }
    if let Some(s) = &args.snr {
        o.snr_db = Some(parse_snr_flag("--snr", s)?);
    }
    if let Some(s) = &args.mcs {
        o.mcs = Some(parse_mcs_items("--mcs", s.split(','))?);
    }
    if let Some(s) = &args.channel {
        o.channel = Some(parse_channel("--channel", s, false)?);
    }
    if let Some(s) = &args.sched {
        o.scheduler = Some(parse_sched("--sched", s)?);
    }
    if let Some(s) = &args.rb {
        o.num_rb = Some(num("--rb", s)?);
    }
    if let Some(s) = &args.seed {
        o.seed = Some(num("--seed", s)?);
    }
    if let Some(s) = &args.tb_per_point {
        o.tb_per_point = Some(num("--tb-per-point", s)?);
    }
    if let Some(s) = &args.link_model {
        o.link_model = Some(parse_link("--link-model", s)?);
    }
    if let Some(s) = &args.epsilon {
        o.epsilon = Some(finite("--epsilon", s)?);
    }
    if let Some(s) = &args.threads {
        o.threads = Some(num("--threads", s)?);
    }
    o.out = args.out.clone();
    Ok(o)
}

/// Resolves defaults, the optional config file and flags into a run.
pub fn parse_config(args: &Args) -> Result<RunConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config_str(&text, path)?
        }
        None => Overrides::default(),
    };
    file.merge(flag_overrides(args)?).resolve()
}
