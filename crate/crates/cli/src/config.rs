//! INI-style configuration: `[section]` headers and `key = value` lines,
//! hand-parsed so fixtures stay diff-friendly and error messages carry line
//! numbers.

use std::fmt;

use delwave_core::profile::Mode;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// All tunables with their documented defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    // [function]
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    // [profile]
    pub l: f64,
    pub n: usize,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub mode: Mode,
    pub alpha: f64,
    // [continuation]
    pub tau_max: f64,
    pub dtau: f64,
    // [sim]
    pub l_sim: f64,
    pub dx: f64,
    pub dt_target: f64,
    pub t_final: f64,
    // [spectrum]
    pub xi_max: f64,
    pub n_xi: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kappa: 0.0,
            a: 1.2,
            b: 3.0,
            l: 60.0,
            n: 2401,
            newton_tol: 1e-10,
            max_iter: 40,
            mode: Mode::Pinned,
            alpha: 0.5,
            tau_max: 2.0,
            dtau: 0.1,
            l_sim: 150.0,
            dx: 0.05,
            dt_target: 0.01,
            t_final: 200.0,
            xi_max: 20.0,
            n_xi: 4001,
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| err(line, format!("{key}: expected a decimal number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(err(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| err(line, format!("{key}: expected a positive integer, got `{value}`")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find(['#', ';']) {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(lineno, "unterminated section header"))?
                    .trim();
                match name {
                    "function" | "profile" | "continuation" | "sim" | "spectrum" => {
                        section = name.to_string();
                    }
                    other => return Err(err(lineno, format!("unknown section [{other}]"))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            match (section.as_str(), key) {
                ("function", "kappa") => {
                    let v = parse_f64(lineno, key, value)?;
                    if !(0.0..1.0).contains(&v) {
                        return Err(err(lineno, format!("kappa must lie in [0, 1), got {v}")));
                    }
                    cfg.kappa = v;
                }
                ("function", "a") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, format!("a must be positive, got {v}")));
                    }
                    cfg.a = v;
                }
                ("function", "b") => cfg.b = parse_f64(lineno, key, value)?,
                ("profile", "L") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "L must be positive"));
                    }
                    cfg.l = v;
                }
                ("profile", "n") => {
                    let v = parse_usize(lineno, key, value)?;
                    if v < 9 || (v - 1) % 8 != 0 {
                        return Err(err(
                            lineno,
                            format!("n must satisfy n >= 9 with n - 1 divisible by 8, got {v}"),
                        ));
                    }
                    cfg.n = v;
                }
                ("profile", "newton_tol") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "newton_tol must be positive"));
                    }
                    cfg.newton_tol = v;
                }
                ("profile", "max_iter") => {
                    let v = parse_usize(lineno, key, value)?;
                    if v == 0 {
                        return Err(err(lineno, "max_iter must be at least 1"));
                    }
                    cfg.max_iter = v;
                }
                ("profile", "mode") => {
                    cfg.mode = match value {
                        "pinned" => Mode::Pinned,
                        "operator" => Mode::Operator,
                        other => {
                            return Err(err(
                                lineno,
                                format!("mode must be `pinned` or `operator`, got `{other}`"),
                            ))
                        }
                    };
                }
                ("profile", "alpha") => {
                    let v = parse_f64(lineno, key, value)?;
                    if !(0.0 < v && v < 1.0) {
                        return Err(err(lineno, "alpha must lie in (0, 1)"));
                    }
                    cfg.alpha = v;
                }
                ("continuation", "tau_max") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v < 0.0 {
                        return Err(err(lineno, "tau_max must be nonnegative"));
                    }
                    cfg.tau_max = v;
                }
                ("continuation", "dtau") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "dtau must be positive"));
                    }
                    cfg.dtau = v;
                }
                ("sim", "L_sim") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "L_sim must be positive"));
                    }
                    cfg.l_sim = v;
                }
                ("sim", "dx") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "dx must be positive"));
                    }
                    cfg.dx = v;
                }
                ("sim", "dt_target") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "dt_target must be positive"));
                    }
                    cfg.dt_target = v;
                }
                ("sim", "t_final") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "t_final must be positive"));
                    }
                    cfg.t_final = v;
                }
                ("spectrum", "xi_max") => {
                    let v = parse_f64(lineno, key, value)?;
                    if v <= 0.0 {
                        return Err(err(lineno, "xi_max must be positive"));
                    }
                    cfg.xi_max = v;
                }
                ("spectrum", "n_xi") => {
                    let v = parse_usize(lineno, key, value)?;
                    if v < 3 {
                        return Err(err(lineno, "n_xi must be at least 3"));
                    }
                    cfg.n_xi = v;
                }
                ("", k) => {
                    return Err(err(
                        lineno,
                        format!("key `{k}` appears before any [section] header"),
                    ))
                }
                (s, k) => return Err(err(lineno, format!("unknown key `{k}` in section [{s}]"))),
            }
        }
        Ok(cfg)
    }
}
