//! Small English word list for scoring candidate decryptions.

use std::collections::HashSet;
use std::sync::OnceLock;

const WORDS: &str = "
a about above across act after again against agent ago air all almost alone along already also always
am amazingly among an and another antique any anyone anything are around art as ask at away back bad
be because been before began behind being below best better between big black blow board boat body book
both bought box boxes boxing bridge bring broken brown buckles burn business but by call came can card
carry case change changes charge check chumps city close code cold come coins company conference could
country courier crazy credentials crypto daft dark dawn day days dead did discotheques do does dog
door down dozen during each early east embassy end enough even evening ever every exquisite eye face
fact far fast few fifty find fire first five fog follow for found four fox fredrick friday from full
game gate get give go gold good got great green group had hand harbor has have he head hear her here
high him his hold home house how however i if important in inside into is it its ivory jackdaws jewels
jigs jim job judge judged jugs jukeboxes jumps jump just keep key kind king knew know land large last
late later lazy learn leave leaves left less let letter life light lights like line liquor list little
live long look love made make man many map may me meet meeting men message middle midnight might mile
mill money month more morning most move much must my name near need never new next night nine no nobody
none north not note nothing now number nymph of off often old on once one only open opal or order other
our out over own pack package page paper part pass past people phone place plan point promptly provide
prize put quartz quick quickly quiet read reading red remember report reports rest right river road room
round run safe said same saw say scarf sea second secret see send sent set several she ship shipment
should show side signal since small so some something soon sphinx stand start still stop story street
such sun sure table take tell ten than that the their them then there these they thing think this those
three through time to today together told tomorrow too took tower town train trust turn two umbrella under
until up upon us use very vault vex vexing vow wait walk waltz wall want war was watch water way we
wear week well went were west what when where which while white who whole why will window with without
vexingly wizard wizards word work world would write year yes yet you young your zebras zephyrs
";

pub fn words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| WORDS.split_whitespace().collect())
}

pub fn contains(word: &str) -> bool {
    words().contains(word)
}

/// Letter-repetition pattern: "hello" -> [0, 1, 2, 2, 3].
pub fn pattern(word: &str) -> Vec<u8> {
    let mut seen: Vec<u8> = Vec::new();
    word.bytes()
        .map(|b| match seen.iter().position(|&s| s == b) {
            Some(i) => i as u8,
            None => {
                seen.push(b);
                (seen.len() - 1) as u8
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genlib::corpus::{COVER_SENTENCES, PANGRAMS};

    #[test]
    fn covers_generator_text() {
        for sentence in PANGRAMS.iter().chain(COVER_SENTENCES) {
            for w in sentence.split_whitespace() {
                assert!(contains(w), "{w:?} from {sentence:?}");
            }
        }
    }

    #[test]
    fn pangrams_are_pangrams() {
        for s in PANGRAMS {
            for c in 'a'..='z' {
                assert!(s.contains(c), "{s:?} lacks {c}");
            }
        }
    }

    #[test]
    fn patterns() {
        assert_eq!(pattern("hello"), vec![0, 1, 2, 2, 3]);
        assert_eq!(pattern("abc"), pattern("xyz"));
        assert_ne!(pattern("aab"), pattern("abb"));
    }
}
