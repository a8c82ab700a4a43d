use thiserror::Error;

use super::{Lane, MachineId, Model, StageKey, StageKind, StageRef};

/// What a dotted path names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    /// The empty path: the top-level scope holding every root machine.
    Root,
    Machine(MachineId),
    Stage(StageKey),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("PATH_NOT_FOUND: `{path}` does not resolve (longest resolvable prefix: `{prefix}`)")]
    NotFound { path: String, prefix: String },
    #[error("PATH_NOT_FOUND: `{path}` names several {kind} stages on different lanes; add @lane")]
    Ambiguous { path: String, kind: StageKind },
}

impl PathError {
    pub fn code(&self) -> &'static str {
        "PATH_NOT_FOUND"
    }
}

impl Model {
    fn child_named(&self, parent: Option<MachineId>, name: &str) -> Option<MachineId> {
        match parent {
            None => self.roots().find(|id| self.machines[id.0].name == name),
            Some(p) => self.machines[p.0]
                .submachines
                .iter()
                .copied()
                .find(|c| c.0 < self.machines.len() && self.machines[c.0].name == name),
        }
    }

    /// Resolves a dotted machine path such as `Time.hour`.
    pub fn resolve_machine(&self, path: &str) -> Result<MachineId, PathError> {
        match self.resolve_path(path)? {
            Resolved::Machine(id) => Ok(id),
            _ => Err(PathError::NotFound { path: path.to_string(), prefix: String::new() }),
        }
    }

    /// Resolves a stage reference. Without an explicit lane the `default`
    /// lane wins; otherwise the machine's only stage of that kind is used.
    pub fn resolve_stage(&self, r: &StageRef) -> Result<StageKey, PathError> {
        let full = r.to_string();
        let machine = match self.resolve_path(&r.machine) {
            Ok(Resolved::Machine(id)) => id,
            Ok(_) => return Err(PathError::NotFound { path: full, prefix: String::new() }),
            Err(PathError::NotFound { prefix, .. }) => {
                return Err(PathError::NotFound { path: full, prefix })
            }
            Err(e) => return Err(e),
        };
        self.stage_in(machine, r.kind, r.lane.as_ref(), &full)
    }

    fn stage_in(
        &self,
        machine: MachineId,
        kind: StageKind,
        lane: Option<&Lane>,
        full: &str,
    ) -> Result<StageKey, PathError> {
        let m = &self.machines[machine.0];
        let not_found = || PathError::NotFound {
            path: full.to_string(),
            prefix: self.machine_path(machine),
        };
        match lane {
            Some(lane) => m
                .stage(kind, lane)
                .map(|s| StageKey { machine, kind, lane: s.lane.clone() })
                .ok_or_else(not_found),
            None => {
                if m.stage(kind, &Lane::default()).is_some() {
                    return Ok(StageKey { machine, kind, lane: Lane::default() });
                }
                let mut of_kind = m.stages.iter().filter(|s| s.kind == kind);
                match (of_kind.next(), of_kind.next()) {
                    (Some(s), None) => Ok(StageKey { machine, kind, lane: s.lane.clone() }),
                    (None, _) => Err(not_found()),
                    (Some(_), Some(_)) => {
                        Err(PathError::Ambiguous { path: full.to_string(), kind })
                    }
                }
            }
        }
    }

    /// Resolves `""`, `Machine.sub` or `Machine.sub.kind[@lane]`.
    pub fn resolve_path(&self, path: &str) -> Result<Resolved, PathError> {
        if path.is_empty() {
            return Ok(Resolved::Root);
        }
        let (body, lane) = match path.split_once('@') {
            Some((b, l)) => (b, Some(Lane::new(l))),
            None => (path, None),
        };
        let segments: Vec<&str> = body.split('.').collect();
        let mut cur: Option<MachineId> = None;
        let mut prefix = String::new();
        for (i, seg) in segments.iter().enumerate() {
            let last = i + 1 == segments.len();
            if last {
                if let (Some(kind), Some(m)) = (StageKind::from_keyword(seg), cur) {
                    return self.stage_in(m, kind, lane.as_ref(), path).map(Resolved::Stage);
                }
            }
            match self.child_named(cur, seg) {
                Some(id) => {
                    cur = Some(id);
                    if !prefix.is_empty() {
                        prefix.push('.');
                    }
                    prefix.push_str(seg);
                }
                None => {
                    return Err(PathError::NotFound { path: path.to_string(), prefix });
                }
            }
        }
        if lane.is_some() {
            // a lane suffix only makes sense on a stage
            return Err(PathError::NotFound { path: path.to_string(), prefix });
        }
        Ok(cur.map(Resolved::Machine).unwrap_or(Resolved::Root))
    }
}
