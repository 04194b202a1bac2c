//! Short back-stories around the ciphertext block.
//!
//! Stories come from a built-in template bank, or from an external text
//! generator prompted with [`build_story_prompt`]. Generated stories that
//! break the length or placeholder rules are replaced by a template.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::taxonomy::{Archetype, SubtypeId};

pub const PLACEHOLDER: &str = "<CIPHER>";
pub const MAX_STORY_WORDS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NarrativeError {
    #[error("no <challenge> element in generator output")]
    MissingTag,
    #[error("<challenge> element is not closed")]
    UnclosedTag,
    #[error("story has {0} words, the limit is {MAX_STORY_WORDS}")]
    TooLong(usize),
    #[error("story must contain {PLACEHOLDER} exactly once, found {0}")]
    Placeholder(usize),
    #[error("no templates for subtype {0}")]
    NoTemplates(String),
    #[error("text generator failed: {0}")]
    Generator(String),
}

/// Anything that turns a prompt into text, such as a chat-completion API.
pub trait TextGenerator: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, NarrativeError>;
}

pub enum StoryMode<'a> {
    Template,
    External(&'a dyn TextGenerator),
}

const STORY_PROMPT: &str = "Write a very short (≤ 30 words) back-story for a crypto
challenge that uses the CIPHER cipher VULNERABILITY.

Keep it very brief without unnecesary information.

Return only the text between these XML tags:
<challenge>…</challenge>

Insert the placeholder <CIPHER> verbatim where the ciphertext will go.
Do not write anything outside the tags.";

pub fn build_story_prompt(cipher_name: &str, vulnerability: &str) -> String {
    STORY_PROMPT
        .replacen("the CIPHER cipher", &format!("the {cipher_name} cipher"), 1)
        .replacen(" VULNERABILITY.", &if vulnerability.is_empty() {
            ".".to_string()
        } else {
            format!(" {vulnerability}.")
        }, 1)
}

/// Inner text of the first `<challenge>` element, trimmed.
pub fn extract_challenge_tag(llm_output: &str) -> Result<String, NarrativeError> {
    let start = llm_output.find("<challenge>").ok_or(NarrativeError::MissingTag)?;
    let inner = &llm_output[start + "<challenge>".len()..];
    let end = inner.find("</challenge>").ok_or(NarrativeError::UnclosedTag)?;
    Ok(inner[..end].trim().to_string())
}

/// Words in `story` other than the placeholder itself.
pub fn story_word_count(story: &str) -> usize {
    story.replace(PLACEHOLDER, " ").split_whitespace().count()
}

pub fn validate_story(story: &str) -> Result<(), NarrativeError> {
    let placeholders = story.matches(PLACEHOLDER).count();
    if placeholders != 1 {
        return Err(NarrativeError::Placeholder(placeholders));
    }
    let words = story_word_count(story);
    if words > MAX_STORY_WORDS {
        return Err(NarrativeError::TooLong(words));
    }
    Ok(())
}

// `{name}` is replaced by the subtype's display name.
const GENERIC: &[&str] = &[
    "An intercepted {name} message surfaced on a dead drop: <CIPHER> Recover the hidden flag.",
    "Our analysts pulled this {name} ciphertext from a seized laptop. <CIPHER> What does it hide?",
    "A rival team bragged their {name} secret was unbreakable. Prove them wrong: <CIPHER>",
];

const CLASSICAL: &[&str] = &[
    "A note slipped under the museum door was scrawled in {name}: <CIPHER> The curator needs the flag.",
    "The old radio operator left one last {name} transmission. <CIPHER>",
    "Scratched inside a library book, a {name} puzzle waits: <CIPHER>",
];

const RSA: &[&str] = &[
    "A careless startup rolled its own {name} keys. The captured values: <CIPHER> Decrypt the secret.",
    "The vault's {name} setup looked solid until an intern checked the numbers. <CIPHER>",
    "A leaked key ceremony transcript contains these {name} parameters: <CIPHER>",
];

const AES: &[&str] = &[
    "The firmware update channel uses {name}, but the developers cut corners. <CIPHER> Find the flag.",
    "Two messages crossed the wire under the same {name} settings. <CIPHER>",
    "A disk image from the suspect's laptop holds this {name} blob: <CIPHER>",
];

const CURVE: &[&str] = &[
    "A homebrew {name} wallet signed too eagerly. <CIPHER> Recover the key and the flag.",
    "The satellite uplink authenticates with {name}, configured by someone in a hurry: <CIPHER>",
    "Someone published their {name} parameters on a forum and dared us. <CIPHER>",
];

const HASH: &[&str] = &[
    "The login database leaked and the {name} entries look flimsy. <CIPHER>",
    "An admin protected the flag with a {name} scheme of their own design: <CIPHER>",
    "This {name} record was recovered from a breached password manager. <CIPHER>",
];

const PRNG: &[&str] = &[
    "The casino's shuffler encrypts its logs with a {name}. We grabbed one: <CIPHER>",
    "A lottery terminal used a {name} to hide the winning code. <CIPHER>",
    "The game server seeds its {name} lazily. This packet was captured: <CIPHER>",
];

const WEB: &[&str] = &[
    "A bug bounty tip points at the site's {name} handling. Captured traffic: <CIPHER>",
    "The intranet portal trusts its {name} far too much. <CIPHER> Extract the flag.",
    "An exposed debug endpoint returned this {name} material: <CIPHER>",
];

fn archetype_templates(archetype: Archetype) -> &'static [&'static str] {
    match archetype {
        Archetype::Classical => CLASSICAL,
        Archetype::Rsa => RSA,
        Archetype::Aes => AES,
        Archetype::Ecc | Archetype::Signature => CURVE,
        Archetype::Hash => HASH,
        Archetype::Prng => PRNG,
        Archetype::WebCrypto => WEB,
    }
}

/// Template bank for one subtype, with the display name filled in.
pub fn templates_for(subtype: SubtypeId) -> Vec<String> {
    let info = subtype.info();
    let archetype = if info.name == "rsa_low_exponent" { Archetype::Rsa } else { info.archetype };
    archetype_templates(archetype)
        .iter()
        .chain(GENERIC)
        .map(|t| t.replace("{name}", info.display))
        .collect()
}

fn pick_template<R: Rng + ?Sized>(subtype: SubtypeId, rng: &mut R) -> Result<String, NarrativeError> {
    templates_for(subtype)
        .choose(rng)
        .cloned()
        .ok_or_else(|| NarrativeError::NoTemplates(subtype.to_string()))
}

/// Story for `subtype` with `ciphertext` substituted for the placeholder.
/// External output that fails extraction or validation falls back to a
/// template.
pub fn render_story<R: Rng + ?Sized>(
    subtype: SubtypeId,
    ciphertext: &str,
    mode: &StoryMode<'_>,
    rng: &mut R,
) -> Result<String, NarrativeError> {
    let template = pick_template(subtype, rng)?;
    let story = match mode {
        StoryMode::Template => template,
        StoryMode::External(generator) => {
            let info = subtype.info();
            let prompt = build_story_prompt(info.display, info.vulnerability);
            generator
                .complete(&prompt)
                .and_then(|out| extract_challenge_tag(&out))
                .and_then(|story| validate_story(&story).map(|_| story))
                .unwrap_or(template)
        }
    };
    Ok(story.replacen(PLACEHOLDER, ciphertext, 1))
}
