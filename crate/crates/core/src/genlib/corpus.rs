//! Word lists and stock sentences used to dress up generated plaintexts.

/// Each sentence uses all 26 letters, so a substitution key applied to one
/// of them is fully exposed by a successful word-pattern attack.
pub const PANGRAMS: &[&str] = &[
    "the quick brown fox jumps over the lazy dog",
    "pack my box with five dozen liquor jugs",
    "sphinx of black quartz judge my vow",
    "how vexingly quick daft zebras jump",
    "the five boxing wizards jump quickly",
    "jackdaws love my big sphinx of quartz",
    "waltz bad nymph for quick jigs vex",
    "quick zephyrs blow vexing daft jim",
    "amazingly few discotheques provide jukeboxes",
    "crazy fredrick bought many very exquisite opal jewels",
    "we promptly judged antique ivory buckles for the next prize",
    "a wizard job is to vex chumps quickly in fog",
];

/// Cover text for the transposition subtype.
pub const COVER_SENTENCES: &[&str] = &[
    "meet me at the old mill after midnight and bring the package",
    "the shipment leaves the harbor at dawn so keep this message safe",
    "our agent in the north reports that the bridge is still open",
    "burn this note after reading and tell no one about the meeting",
    "the vault code changes every week so act before the end of the month",
    "keep the lights off and wait for the signal from the tower",
    "the courier will wear a red scarf and carry a black umbrella",
    "trust nobody at the embassy and use the back door after nine",
];

/// Known plaintexts for keystream-reuse subtypes. All are at least 16 bytes.
pub const KNOWN_MESSAGES: &[&str] = &[
    "Transfer 500 credits to account 4411 before noon.",
    "Weekly status report: all systems nominal.",
    "Reminder: the backup server reboots at midnight.",
    "Invoice #2231 has been paid in full, thank you!",
    "Meeting moved to conference room B at 3pm.",
    "Your one-time password expires in ten minutes.",
    "Shipment 77 delayed by customs, new ETA Friday.",
    "Please rotate the staging credentials this week.",
];

/// Messages signed by the ECDSA subtypes.
pub const SIGNED_MESSAGES: &[&str] = &[
    "withdraw 10 coins",
    "withdraw 250 coins",
    "approve firmware update 1.4.2",
    "approve firmware update 1.4.3",
    "login request from alice",
    "login request from bob",
    "rotate signing key next quarter",
    "publish release notes",
];

pub const PLAYFAIR_KEYWORDS: &[&str] = &[
    "monarchy", "keyword", "crypto", "examples", "playfair", "wheatstone", "charles",
    "harbor", "midnight", "treasure", "lighthouse", "quantum", "broken", "silver",
];

pub const USERNAMES: &[&str] = &[
    "alice", "bob", "carol", "dave", "eve", "mallory", "trent", "peggy", "victor", "walter",
];
