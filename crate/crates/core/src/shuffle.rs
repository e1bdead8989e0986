//! One-round shuffle model execution.
//!
//! Every party applies its local randomizer; a trusted shuffler hands the
//! analyzer the multiset of messages with sender identity and order removed.
//! [`MessageBag`] keeps messages sorted by `(tag, value)`, which is exactly the
//! information a uniformly random permutation leaves, so analyzers cannot
//! depend on arrival order.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use rand::seq::index::sample;
use rand::RngCore;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Message {
    /// Logical counter the message belongs to.
    pub tag: u32,
    pub value: u64,
}

impl Message {
    pub fn new(tag: u32, value: u64) -> Message {
        Message { tag, value }
    }
}

/// Canonical multiset of messages.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MessageBag {
    messages: Vec<Message>,
}

impl MessageBag {
    pub fn new() -> MessageBag {
        MessageBag::default()
    }

    pub fn from_messages(mut messages: Vec<Message>) -> MessageBag {
        messages.sort_unstable();
        MessageBag { messages }
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn as_slice(&self) -> &[Message] {
        &self.messages
    }

    pub fn iter(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter()
    }

    /// Messages carrying `tag`.
    pub fn with_tag(&self, tag: u32) -> &[Message] {
        let start = self.messages.partition_point(|m| m.tag < tag);
        let end = self.messages.partition_point(|m| m.tag <= tag);
        &self.messages[start..end]
    }

    /// Distinct messages with their multiplicities, in canonical order.
    pub fn multiplicities(&self) -> Vec<(Message, usize)> {
        let mut out: Vec<(Message, usize)> = Vec::new();
        for &m in &self.messages {
            match out.last_mut() {
                Some((last, count)) if *last == m => *count += 1,
                _ => out.push((m, 1)),
            }
        }
        out
    }

    /// Whether `other` is a sub-multiset of `self`.
    pub fn contains_all(&self, other: &MessageBag) -> bool {
        let mut mine = self.messages.iter();
        'outer: for m in &other.messages {
            while let Some(&candidate) = mine.next() {
                if candidate == *m {
                    continue 'outer;
                }
                if candidate > *m {
                    return false;
                }
            }
            return false;
        }
        true
    }
}

impl FromIterator<Message> for MessageBag {
    fn from_iter<I: IntoIterator<Item = Message>>(iter: I) -> MessageBag {
        MessageBag::from_messages(iter.into_iter().collect())
    }
}

/// Which parties follow the protocol. Dishonest parties send nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyStatus {
    honest: Vec<bool>,
}

impl PartyStatus {
    pub fn all_honest(parties: usize) -> PartyStatus {
        PartyStatus {
            honest: vec![true; parties],
        }
    }

    pub fn from_flags(honest: Vec<bool>) -> PartyStatus {
        PartyStatus { honest }
    }

    pub fn with_dropped(parties: usize, dropped: &[usize]) -> Result<PartyStatus> {
        let mut status = PartyStatus::all_honest(parties);
        for &i in dropped {
            if i >= parties {
                return Err(Error::param("dropped", format!("party {i} >= {parties}")));
            }
            status.honest[i] = false;
        }
        Ok(status)
    }

    /// Drops a uniformly random set of `dropped` parties; fixed before the
    /// execution starts.
    pub fn random_dropout(parties: usize, dropped: usize, rng: &mut dyn RngCore) -> Result<PartyStatus> {
        if dropped > parties {
            return Err(Error::param("dropped", format!("{dropped} > {parties} parties")));
        }
        let chosen = sample(rng, parties, dropped).into_vec();
        PartyStatus::with_dropped(parties, &chosen)
    }

    pub fn len(&self) -> usize {
        self.honest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.honest.is_empty()
    }

    pub fn is_honest(&self, party: usize) -> bool {
        self.honest[party]
    }

    pub fn honest_count(&self) -> usize {
        self.honest.iter().filter(|&&h| h).count()
    }

    pub fn honest_fraction(&self) -> f64 {
        if self.honest.is_empty() {
            return 0.0;
        }
        self.honest_count() as f64 / self.honest.len() as f64
    }
}

/// A party's local randomizer: maps one input to zero or more messages.
pub trait LocalRandomizer<I: ?Sized> {
    fn randomize(&self, input: &I, out: &mut Vec<Message>, rng: &mut dyn RngCore);
}

/// Post-processing of the shuffled multiset.
pub trait Analyzer {
    type Output;

    fn analyze(&self, bag: &MessageBag) -> Self::Output;
}

impl<O, T: Fn(&MessageBag) -> O> Analyzer for T {
    type Output = O;

    fn analyze(&self, bag: &MessageBag) -> O {
        self(bag)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// All parties of a one-round execution at once.
    Round,
    Prefix,
    Online,
    Suffix,
}

/// Messages added to the shuffler state by one step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptStep {
    pub kind: StepKind,
    /// Input positions whose randomizers ran in this step (honest or not).
    pub parties: Vec<usize>,
    pub added: MessageBag,
}

/// The sequence of shuffler states of one execution.
///
/// State `t` is the union of the first `t + 1` steps; each step's additions
/// are stored once and states are materialized on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutionTranscript {
    steps: Vec<TranscriptStep>,
    final_bag: MessageBag,
    honest_fraction: f64,
}

impl ExecutionTranscript {
    fn from_steps(steps: Vec<TranscriptStep>, honest_fraction: f64) -> ExecutionTranscript {
        let all: Vec<Message> = steps
            .iter()
            .flat_map(|s| s.added.iter().copied())
            .collect();
        ExecutionTranscript {
            steps,
            final_bag: MessageBag::from_messages(all),
            honest_fraction,
        }
    }

    pub fn steps(&self) -> &[TranscriptStep] {
        &self.steps
    }

    pub fn state_count(&self) -> usize {
        self.steps.len()
    }

    /// Shuffler state after step `t`.
    pub fn state(&self, t: usize) -> MessageBag {
        self.steps[..=t]
            .iter()
            .flat_map(|s| s.added.iter().copied())
            .collect()
    }

    pub fn final_bag(&self) -> &MessageBag {
        &self.final_bag
    }

    pub fn honest_fraction(&self) -> f64 {
        self.honest_fraction
    }

    pub fn count_kind(&self, kind: StepKind) -> usize {
        self.steps
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.parties.len())
            .sum()
    }

    /// Writes one line per state: `step<TAB>tag:value:multiplicity ...`.
    pub fn write_states<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut acc: Vec<Message> = Vec::new();
        for (t, step) in self.steps.iter().enumerate() {
            acc.extend(step.added.iter().copied());
            acc.sort_unstable();
            let mut line = format!("{t}\t");
            let bag = MessageBag {
                messages: acc.clone(),
            };
            for (i, (m, count)) in bag.multiplicities().into_iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{}:{}:{}", m.tag, m.value, count);
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Parses the output of [`ExecutionTranscript::write_states`].
pub fn read_states<R: BufRead>(input: R) -> io::Result<Vec<(usize, MessageBag)>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut states = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (step, rest) = line
            .split_once('\t')
            .ok_or_else(|| bad(format!("missing tab in `{line}`")))?;
        let step: usize = step.parse().map_err(|e| bad(format!("step: {e}")))?;
        let mut messages = Vec::new();
        for triple in rest.split_whitespace() {
            let mut parts = triple.split(':');
            let mut field = |name: &str| -> io::Result<u64> {
                parts
                    .next()
                    .ok_or_else(|| bad(format!("missing {name} in `{triple}`")))?
                    .parse()
                    .map_err(|e| bad(format!("{name} in `{triple}`: {e}")))
            };
            let tag = field("tag")? as u32;
            let value = field("value")?;
            let count = field("multiplicity")?;
            messages.extend(std::iter::repeat_n(Message::new(tag, value), count as usize));
        }
        states.push((step, MessageBag::from_messages(messages)));
    }
    Ok(states)
}

/// Phases of an incremental execution: a padding prefix fed in one batch,
/// online parties fed one at a time, and a padding suffix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InjectionSchedule {
    pub prefix: usize,
    pub online: usize,
    pub suffix: usize,
}

impl InjectionSchedule {
    pub fn total(&self) -> usize {
        self.prefix + self.online + self.suffix
    }
}

fn check_lengths(randomizers: usize, inputs: usize) -> Result<()> {
    if randomizers != inputs {
        return Err(Error::LengthMismatch {
            what: "inputs",
            expected: randomizers,
            actual: inputs,
        });
    }
    Ok(())
}

fn apply<I>(
    randomizers: &[&dyn LocalRandomizer<I>],
    inputs: &[I],
    parties: std::ops::Range<usize>,
    status: Option<&PartyStatus>,
    rng: &mut dyn RngCore,
) -> MessageBag {
    let mut out = Vec::new();
    for i in parties {
        if status.is_none_or(|s| s.is_honest(i)) {
            randomizers[i].randomize(&inputs[i], &mut out, rng);
        }
    }
    MessageBag::from_messages(out)
}

/// `A(S(R_1(x_1), ..., R_n(x_n)))` with dishonest parties silent.
pub fn run_round<I, A: Analyzer>(
    randomizers: &[&dyn LocalRandomizer<I>],
    inputs: &[I],
    status: &PartyStatus,
    analyzer: &A,
    rng: &mut dyn RngCore,
) -> Result<(A::Output, ExecutionTranscript)> {
    check_lengths(randomizers.len(), inputs.len())?;
    if status.len() != inputs.len() {
        return Err(Error::LengthMismatch {
            what: "party status",
            expected: inputs.len(),
            actual: status.len(),
        });
    }
    let added = apply(randomizers, inputs, 0..inputs.len(), Some(status), rng);
    let step = TranscriptStep {
        kind: StepKind::Round,
        parties: (0..inputs.len()).collect(),
        added,
    };
    let transcript = ExecutionTranscript::from_steps(vec![step], status.honest_fraction());
    let output = analyzer.analyze(transcript.final_bag());
    Ok((output, transcript))
}

/// Feeds parties into the shuffler following `schedule`, recording every
/// intermediate state. Randomizer `i` is applied to input `i`.
pub fn run_incremental<I, A: Analyzer>(
    randomizers: &[&dyn LocalRandomizer<I>],
    inputs: &[I],
    schedule: &InjectionSchedule,
    analyzer: &A,
    rng: &mut dyn RngCore,
) -> Result<(A::Output, ExecutionTranscript)> {
    check_lengths(randomizers.len(), inputs.len())?;
    if schedule.total() != inputs.len() {
        return Err(Error::ScheduleMismatch {
            scheduled: schedule.total(),
            parties: inputs.len(),
        });
    }
    let mut steps = Vec::with_capacity(schedule.online + 2);
    let prefix = 0..schedule.prefix;
    steps.push(TranscriptStep {
        kind: StepKind::Prefix,
        parties: prefix.clone().collect(),
        added: apply(randomizers, inputs, prefix, None, rng),
    });
    for i in schedule.prefix..schedule.prefix + schedule.online {
        steps.push(TranscriptStep {
            kind: StepKind::Online,
            parties: vec![i],
            added: apply(randomizers, inputs, i..i + 1, None, rng),
        });
    }
    let suffix = schedule.prefix + schedule.online..inputs.len();
    steps.push(TranscriptStep {
        kind: StepKind::Suffix,
        parties: suffix.clone().collect(),
        added: apply(randomizers, inputs, suffix, None, rng),
    });
    let transcript = ExecutionTranscript::from_steps(steps, 1.0);
    let output = analyzer.analyze(transcript.final_bag());
    Ok((output, transcript))
}
