use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Guard, GuardKind, Scalar, FAIL, PASS};

use super::{SimError, Token};

/// Everything guard evaluation consumes: the seeded random stream, run
/// scripts overriding model guards, and one cursor per scripted guard.
#[derive(Debug, Clone)]
pub struct GuardState {
    rng: ChaCha8Rng,
    scripts: BTreeMap<String, Vec<String>>,
    cursors: BTreeMap<String, usize>,
}

impl GuardState {
    pub fn new(seed: u64, scripts: BTreeMap<String, Vec<String>>) -> GuardState {
        GuardState { rng: ChaCha8Rng::seed_from_u64(seed), scripts, cursors: BTreeMap::new() }
    }

    fn next_scripted(&mut self, guard: &str, script: &[String]) -> String {
        let cursor = self.cursors.entry(guard.to_string()).or_insert(0);
        let out = script[*cursor % script.len()].clone();
        *cursor += 1;
        out
    }
}

/// Outcome of `guard` for `token`. A run script for the guard wins over the
/// guard's own kind.
pub fn evaluate_guard(guard: &Guard, token: &Token, state: &mut GuardState) -> Result<String, SimError> {
    if let Some(script) = state.scripts.get(&guard.id).cloned() {
        return Ok(state.next_scripted(&guard.id, &script));
    }
    match &guard.kind {
        GuardKind::RangeCheck { attribute, min, max } => match token.attributes.get(attribute) {
            Some(Scalar::Int(v)) => Ok(if (*min..=*max).contains(v) { PASS } else { FAIL }.to_string()),
            _ => Err(SimError::MissingAttribute {
                instance: token.instance,
                guard: guard.id.clone(),
                attribute: attribute.clone(),
            }),
        },
        GuardKind::Scripted(script) => Ok(state.next_scripted(&guard.id, script)),
        GuardKind::Bernoulli(p) => {
            let draw: f64 = state.rng.random();
            Ok(if draw < *p { PASS } else { FAIL }.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Location;

    fn token(attrs: &[(&str, Scalar)]) -> Token {
        Token {
            instance: 1,
            sort: "time".into(),
            attributes: attrs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            location: Location::Sink,
        }
    }

    fn range() -> Guard {
        Guard::new("second_ok", GuardKind::RangeCheck { attribute: "second".into(), min: 0, max: 60 })
    }

    #[test]
    fn range_check_is_inclusive() {
        let mut st = GuardState::new(0, BTreeMap::new());
        let g = range();
        for (v, want) in [(6, PASS), (0, PASS), (60, PASS), (61, FAIL), (-1, FAIL)] {
            assert_eq!(evaluate_guard(&g, &token(&[("second", Scalar::Int(v))]), &mut st).unwrap(), want);
        }
        let err = evaluate_guard(&g, &token(&[]), &mut st).unwrap_err();
        assert_eq!(err.code(), "MISSING_ATTRIBUTE");
    }

    #[test]
    fn scripts_cycle() {
        let mut st = GuardState::new(0, BTreeMap::new());
        let g = Guard::new("s", GuardKind::Scripted(vec!["fail".into(), "pass".into()]));
        let t = token(&[]);
        let got: Vec<String> = (0..5).map(|_| evaluate_guard(&g, &t, &mut st).unwrap()).collect();
        assert_eq!(got, ["fail", "pass", "fail", "pass", "fail"]);
    }

    #[test]
    fn run_script_overrides_bernoulli() {
        let scripts = BTreeMap::from([("b".to_string(), vec!["fail".to_string()])]);
        let mut st = GuardState::new(0, scripts);
        let g = Guard::new("b", GuardKind::Bernoulli(1.0));
        assert_eq!(evaluate_guard(&g, &token(&[]), &mut st).unwrap(), FAIL);
    }

    #[test]
    fn bernoulli_extremes_and_seeding() {
        let t = token(&[]);
        let mut st = GuardState::new(7, BTreeMap::new());
        let always = Guard::new("a", GuardKind::Bernoulli(1.0));
        let never = Guard::new("n", GuardKind::Bernoulli(0.0));
        for _ in 0..1000 {
            assert_eq!(evaluate_guard(&always, &t, &mut st).unwrap(), PASS);
            assert_eq!(evaluate_guard(&never, &t, &mut st).unwrap(), FAIL);
        }
        let half = Guard::new("h", GuardKind::Bernoulli(0.5));
        let draw = |seed| {
            let mut st = GuardState::new(seed, BTreeMap::new());
            (0..64).map(|_| evaluate_guard(&half, &t, &mut st).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        let passes = draw(3).iter().filter(|o| *o == PASS).count();
        assert!((16..=48).contains(&passes));
    }
}
