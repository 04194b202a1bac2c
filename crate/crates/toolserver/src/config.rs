use std::collections::BTreeSet;
use std::path::Path;
use std::time::Duration;

/// Environment variable that overrides the allowlist file path.
pub const ALLOWLIST_ENV: &str = "RANDCRYPTO_TOOL_ALLOWLIST";

/// Packages an agent may install when no allowlist file is given.
pub const DEFAULT_ALLOWLIST: &[&str] = &["cryptography", "ecdsa", "gmpy2", "pycryptodome", "sympy"];

#[derive(Debug, Clone)]
pub struct Limits {
    pub timeout: Duration,
    pub memory_bytes: u64,
    pub max_output_bytes: usize,
    /// Tool calls allowed per session. `None` disables the budget.
    pub call_budget: Option<u32>,
    pub allow_network: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            timeout: Duration::from_secs(10),
            memory_bytes: 512 * 1024 * 1024,
            max_output_bytes: 64 * 1024,
            call_budget: Some(4),
            allow_network: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub limits: Limits,
    pub allowlist: Allowlist,
    pub python: String,
    /// Install command; `{target}` and `{package}` are substituted per argument.
    pub installer: Vec<String>,
    pub install_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            limits: Limits::default(),
            allowlist: Allowlist::default(),
            python: "python3".into(),
            installer: ["python3", "-m", "pip", "install", "--quiet", "--no-input", "--target", "{target}", "{package}"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            install_timeout: Duration::from_secs(300),
        }
    }
}

/// Normalized package names permitted for `install_package`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allowlist(BTreeSet<String>);

impl Default for Allowlist {
    fn default() -> Self {
        Allowlist::from_names(DEFAULT_ALLOWLIST.iter().copied())
    }
}

impl Allowlist {
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Allowlist {
        Allowlist(names.into_iter().map(normalize_package).collect())
    }

    /// One name per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Allowlist {
        Allowlist::from_names(
            text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()),
        )
    }

    pub fn load(path: &Path) -> std::io::Result<Allowlist> {
        Ok(Allowlist::parse(&std::fs::read_to_string(path)?))
    }

    /// `explicit`, unless the override variable is set.
    pub fn resolve(explicit: Option<&Path>) -> std::io::Result<Allowlist> {
        match std::env::var_os(ALLOWLIST_ENV) {
            Some(p) => Allowlist::load(Path::new(&p)),
            None => match explicit {
                Some(p) => Allowlist::load(p),
                None => Ok(Allowlist::default()),
            },
        }
    }

    pub fn permits(&self, package: &str) -> bool {
        self.0.contains(&normalize_package(package_name(package)))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

/// Lowercase with runs of `-`, `_` and `.` collapsed to `-`.
pub fn normalize_package(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut sep = false;
    for ch in name.chars() {
        if matches!(ch, '-' | '_' | '.') {
            sep = true;
        } else {
            if sep && !out.is_empty() {
                out.push('-');
            }
            sep = false;
            out.push(ch.to_ascii_lowercase());
        }
    }
    out
}

/// The distribution name part of `name[==version]`.
pub fn package_name(spec: &str) -> &str {
    spec.split("==").next().unwrap_or(spec)
}

/// Accepts `name` or `name==version` where name follows the usual
/// distribution-name rules and version is dotted alphanumerics.
pub fn valid_package_spec(spec: &str) -> bool {
    let (name, version) = match spec.split_once("==") {
        Some((n, v)) => (n, Some(v)),
        None => (spec, None),
    };
    let edge_ok = |s: &str| {
        s.chars().next().is_some_and(|c| c.is_ascii_alphanumeric())
            && s.chars().last().is_some_and(|c| c.is_ascii_alphanumeric())
    };
    let name_ok = !name.is_empty()
        && name.len() <= 100
        && edge_ok(name)
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    let version_ok = version.map_or(true, |v| {
        !v.is_empty() && v.len() <= 40 && edge_ok(v) && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '.')
    });
    name_ok && version_ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn package_grammar() {
        for ok in ["sympy", "pycryptodome", "z3-solver", "gmpy2==2.1.5", "zope.interface"] {
            assert!(valid_package_spec(ok), "{ok}");
        }
        for bad in ["pkg; rm -rf /", "", "-e", "a b", "../x", "x==", "x==1;2", "https://evil/x.whl", "x[extra]"] {
            assert!(!valid_package_spec(bad), "{bad:?}");
        }
    }

    #[test]
    fn allowlist_normalizes() {
        let list = Allowlist::parse("# crypto\nPyCryptodome\nz3_solver  # smt\n\n");
        assert!(list.permits("pycryptodome"));
        assert!(list.permits("Z3-Solver==4.12.0"));
        assert!(!list.permits("requests"));
        assert_eq!(list.names().collect::<Vec<_>>(), ["pycryptodome", "z3-solver"]);
    }
}
