use randcrypto_core::solvers::{solve, solve_challenge, work_ceiling, SolveError};
use randcrypto_core::challenge::render_artifact_block;
use randcrypto_core::{generate, GenSeed, PublicChallenge, SubtypeId};

const SEEDS: u64 = 12;

#[test]
fn every_subtype_is_solvable_from_public_text() {
    let mut failures = Vec::new();
    for subtype in SubtypeId::all() {
        for seed in 0..SEEDS {
            let challenge = generate(subtype, GenSeed(seed));
            match solve_challenge(&challenge) {
                Ok(out) if out.flag == challenge.expected_flag => {
                    if out.steps > work_ceiling(subtype) {
                        failures.push(format!("{}: {} steps > {}", challenge.id, out.steps, work_ceiling(subtype)));
                    }
                }
                Ok(out) => failures.push(format!("{}: wrong flag {}", challenge.id, out.flag)),
                Err(e) => failures.push(format!("{}: {e}", challenge.id)),
            }
        }
    }
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn solvers_reject_tampered_text() {
    for name in ["caesar", "small_primes", "aes_gcm", "lcg_flaw", "jwt_none"] {
        let subtype = SubtypeId::by_name(name).unwrap();
        let challenge = generate(subtype, GenSeed(7));
        let mut artifacts = challenge.public_artifacts.clone();
        let first = artifacts.keys().next().unwrap().clone();
        artifacts.remove(&first);
        let question = format!("Story.\n{}\n", render_artifact_block(&artifacts).unwrap());
        let broken =
            PublicChallenge::new(challenge.id.clone(), subtype, challenge.difficulty, question, challenge.hint.clone())
                .unwrap();
        assert!(solve(&broken).is_err(), "{name} solved without {first}");
    }
}

#[test]
fn missing_block_is_reported() {
    let challenge = generate(SubtypeId::by_name("hex").unwrap(), GenSeed(1));
    let mut c = challenge.clone();
    c.question = "no block here".into();
    assert!(matches!(solve_challenge(&c), Err(SolveError::Artifacts(_))));
}
