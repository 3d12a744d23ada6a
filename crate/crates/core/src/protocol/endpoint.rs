use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("missing base_url")]
    MissingBaseUrl,
    #[error("malformed url `{url}`: {reason}")]
    BadUrl { url: String, reason: String },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

/// Game functions a bot service listens for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndpointFn {
    Select,
    Update,
    Chat,
    Test,
}

impl EndpointFn {
    pub const ALL: [EndpointFn; 4] =
        [EndpointFn::Select, EndpointFn::Update, EndpointFn::Chat, EndpointFn::Test];

    pub fn name(self) -> &'static str {
        match self {
            EndpointFn::Select => "select",
            EndpointFn::Update => "update",
            EndpointFn::Chat => "chat",
            EndpointFn::Test => "test",
        }
    }
}

impl fmt::Display for EndpointFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EndpointFn {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        EndpointFn::ALL.into_iter().find(|f| f.name() == s).ok_or(())
    }
}

/// Resolved URL for every game function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointConfig {
    base_url: String,
    endpoints: BTreeMap<EndpointFn, Url>,
}

fn parse_http(url: &str) -> Result<Url, ConfigError> {
    let bad = |reason: String| ConfigError::BadUrl { url: url.to_string(), reason };
    let parsed = Url::parse(url).map_err(|e| bad(e.to_string()))?;
    match parsed.scheme() {
        "http" | "https" => {}
        other => return Err(bad(format!("unsupported scheme `{other}`"))),
    }
    if parsed.host_str().is_none() {
        return Err(bad("no host".into()));
    }
    Ok(parsed)
}

impl EndpointConfig {
    /// Every function at `<base_url>/<function>`.
    pub fn from_base_url(base_url: &str) -> Result<Self, ConfigError> {
        Self::with_overrides(base_url, &BTreeMap::new())
    }

    fn with_overrides(
        base_url: &str,
        overrides: &BTreeMap<EndpointFn, String>,
    ) -> Result<Self, ConfigError> {
        parse_http(base_url)?;
        let base = base_url.trim_end_matches('/').to_string();
        let mut endpoints = BTreeMap::new();
        for function in EndpointFn::ALL {
            let url = match overrides.get(&function) {
                Some(value) if value.contains("://") => parse_http(value)?,
                Some(relative) => parse_http(&format!("{base}/{}", relative.trim_start_matches('/')))?,
                None => parse_http(&format!("{base}/{}", function.name()))?,
            };
            endpoints.insert(function, url);
        }
        Ok(EndpointConfig { base_url: base, endpoints })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn url(&self, function: EndpointFn) -> &Url {
        &self.endpoints[&function]
    }
}

fn unquote(value: &str) -> &str {
    let v = value.trim();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

/// Parse the line-oriented endpoint config:
///
/// ```text
/// # where the bot listens
/// base_url=http://localhost:8080/Dota2AIService
/// update=http://127.0.0.1:9999/u
/// ```
///
/// Functions without an entry resolve to `<base_url>/<function>`; relative
/// entries are appended to the base URL.
pub fn load_endpoint_config(text: &str) -> Result<EndpointConfig, ConfigError> {
    let mut base_url = None;
    let mut overrides = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |reason: String| ConfigError::Syntax { line: i + 1, reason };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected key=value".into()))?;
        let key = key.trim();
        let value = unquote(value).to_string();
        if value.is_empty() {
            return Err(syntax(format!("empty value for `{key}`")));
        }
        if key == "base_url" {
            base_url = Some(value);
        } else if let Ok(function) = key.parse::<EndpointFn>() {
            overrides.insert(function, value);
        } else {
            return Err(syntax(format!("unknown key `{key}`")));
        }
    }
    let base_url = base_url.ok_or(ConfigError::MissingBaseUrl)?;
    EndpointConfig::with_overrides(&base_url, &overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pair_function_names_with_base() {
        let cfg = load_endpoint_config("base_url=http://localhost:8080/Dota2AIService\n").unwrap();
        assert_eq!(
            cfg.url(EndpointFn::Select).as_str(),
            "http://localhost:8080/Dota2AIService/select"
        );
        assert_eq!(
            cfg.url(EndpointFn::Test).as_str(),
            "http://localhost:8080/Dota2AIService/test"
        );
    }

    #[test]
    fn trailing_slash_on_base() {
        let cfg = EndpointConfig::from_base_url("http://localhost:8080/Dota2AIService/").unwrap();
        assert_eq!(
            cfg.url(EndpointFn::Update).as_str(),
            "http://localhost:8080/Dota2AIService/update"
        );
    }

    #[test]
    fn empty_file_is_missing_base() {
        assert_eq!(load_endpoint_config(""), Err(ConfigError::MissingBaseUrl));
        assert_eq!(load_endpoint_config("# nothing\n\n"), Err(ConfigError::MissingBaseUrl));
    }

    #[test]
    fn absolute_and_relative_overrides() {
        let text = "# bot\nbase_url = \"http://localhost:8080/Dota2AIService\"\n\
                    update=http://127.0.0.1:9999/u\nchat=talk\n";
        let cfg = load_endpoint_config(text).unwrap();
        assert_eq!(cfg.url(EndpointFn::Update).as_str(), "http://127.0.0.1:9999/u");
        assert_eq!(cfg.url(EndpointFn::Chat).as_str(), "http://localhost:8080/Dota2AIService/talk");
        assert_eq!(
            cfg.url(EndpointFn::Select).as_str(),
            "http://localhost:8080/Dota2AIService/select"
        );
        assert_eq!(
            cfg.url(EndpointFn::Test).as_str(),
            "http://localhost:8080/Dota2AIService/test"
        );
    }

    #[test]
    fn malformed_urls() {
        assert!(matches!(load_endpoint_config("base_url=not a url"), Err(ConfigError::BadUrl { .. })));
        assert!(matches!(
            load_endpoint_config("base_url=ftp://host/x"),
            Err(ConfigError::BadUrl { .. })
        ));
        assert!(matches!(
            load_endpoint_config("base_url=http://h/x\nselect=http://[bad"),
            Err(ConfigError::BadUrl { .. })
        ));
        assert!(matches!(load_endpoint_config("nonsense"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(
            load_endpoint_config("base_url=http://h\nfly=x"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
    }
}
