use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Text with markup removed, restricted to printable ASCII and whitespace,
/// whitespace runs collapsed. Only [`clean_text`] constructs it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CleanText(String);

impl CleanText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl AsRef<str> for CleanText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CleanText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn tag_pattern() -> &'static Regex {
    static TAG: OnceLock<Regex> = OnceLock::new();
    TAG.get_or_init(|| Regex::new(r"<[A-Za-z/!?][^<>]*>").expect("valid tag regex"))
}

const ENTITIES: [(&str, &str); 6] = [
    ("&amp;", "&"),
    ("&lt;", "<"),
    ("&gt;", ">"),
    ("&quot;", "\""),
    ("&nbsp;", " "),
    ("&apos;", "'"),
];

/// One left-to-right pass over the named entity set.
fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        match ENTITIES.iter().find(|(name, _)| rest.starts_with(name)) {
            Some((name, repl)) => {
                out.push_str(repl);
                rest = &rest[name.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Strips markup and non-ASCII characters from raw policy text.
///
/// Tags become a single space; `&amp; &lt; &gt; &quot; &nbsp; &apos;` are
/// decoded. Stripping and decoding repeat until neither changes anything,
/// so escaped markup such as `&lt;b&gt;` is removed too and the function is
/// idempotent.
pub fn clean_text(raw: &str) -> CleanText {
    let mut text: String = raw
        .chars()
        .filter(|c| c.is_ascii_graphic() || c.is_ascii_whitespace() || *c == ' ')
        .collect();
    loop {
        let stripped = tag_pattern().replace_all(&text, " ");
        let decoded = decode_entities(&stripped);
        if decoded == text {
            break;
        }
        text = decoded;
    }
    CleanText(text.split_ascii_whitespace().collect::<Vec<_>>().join(" "))
}
