use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nlflow_core::Session;
use parking_lot::{Mutex, MutexGuard, RwLock};

/// One session plus its single-writer gate.
#[derive(Debug)]
pub struct Slot {
    session: RwLock<Session>,
    writer: Mutex<()>,
    last_active: Mutex<Instant>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Busy;

impl Slot {
    fn new(session: Session) -> Slot {
        Slot {
            session: RwLock::new(session),
            writer: Mutex::new(()),
            last_active: Mutex::new(Instant::now()),
        }
    }

    pub fn read<T>(&self, f: impl FnOnce(&Session) -> T) -> T {
        f(&self.session.read())
    }

    /// Runs a mutating request, or fails fast if another one is in flight.
    pub fn write<T>(&self, f: impl FnOnce(&mut Session) -> T) -> Result<T, Busy> {
        let _gate = self.writer.try_lock().ok_or(Busy)?;
        Ok(f(&mut self.session.write()))
    }

    /// Holds the writer gate; other writes fail with `Busy` until dropped.
    pub fn lock_writer(&self) -> Option<MutexGuard<'_, ()>> {
        self.writer.try_lock()
    }

    fn touch(&self, now: Instant) {
        *self.last_active.lock() = now;
    }

    fn idle(&self, now: Instant) -> Duration {
        now.saturating_duration_since(*self.last_active.lock())
    }
}

/// All live sessions. Idle ones are dropped lazily on access.
#[derive(Debug)]
pub struct SessionStore {
    ttl: Duration,
    slots: RwLock<HashMap<String, Arc<Slot>>>,
}

impl SessionStore {
    pub fn new(ttl: Duration) -> SessionStore {
        SessionStore {
            ttl,
            slots: RwLock::new(HashMap::new()),
        }
    }

    pub fn create(&self, session: Session) -> String {
        self.sweep();
        let mut slots = self.slots.write();
        let id = loop {
            let id = format!("{:016x}", rand::random::<u64>());
            if !slots.contains_key(&id) {
                break id;
            }
        };
        slots.insert(id.clone(), Arc::new(Slot::new(session)));
        id
    }

    pub fn get(&self, id: &str) -> Option<Arc<Slot>> {
        self.sweep();
        let slot = self.slots.read().get(id).cloned()?;
        slot.touch(Instant::now());
        Some(slot)
    }

    pub fn remove(&self, id: &str) -> bool {
        self.slots.write().remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.slots.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sweep(&self) {
        let now = Instant::now();
        self.slots.write().retain(|_, s| s.idle(now) < self.ttl);
    }
}
