//! Fixed algorithm corpus: sorting routines in iterative and recursive form,
//! plus classic routines paired with near-identical variants.
//!
//! Sources are embedded verbatim from `assets/algorithms` and already use
//! anonymised function names (`main`, `f1`, ... for sorting; `f`/`g` for the
//! classic pairs). Ground truth comes from native transliterations, not from
//! textbook semantics.

mod anonymise;
mod classic;
mod sorting;

use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anonymise::{anonymise, defined_functions, AnonymiseError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Iterative,
    Recursive,
}

impl fmt::Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::Iterative => "iterative",
            Style::Recursive => "recursive",
        })
    }
}

impl std::str::FromStr for Style {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterative" => Ok(Style::Iterative),
            "recursive" => Ok(Style::Recursive),
            _ => Err(format!("unknown style `{s}`")),
        }
    }
}

/// Declared asymptotic costs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Complexity {
    pub worst: &'static str,
    pub average: &'static str,
    pub best: &'static str,
    pub space: &'static str,
}

/// Identifies the native implementation behind an entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleId {
    RecursiveMinSelection,
    RecursiveBubble,
    RecursiveAdaptiveBubble,
    RecursiveQuick,
    RecursiveMerge,
    RecursiveTim,
    RecursiveHeap,
    IterativeInsertion,
    IterativeBubble,
    IterativeAdaptiveBubble,
    IterativeQuick,
    IterativeMerge,
    IterativeTim,
    IterativeHeap,
    Fibonacci,
    Padovan,
    BubbleAscending,
    BubbleDescending,
    GaussSum,
    GaussAlternating,
    IsPrime,
    IsPrimeSuccessor,
    CollatzSum,
    CollatzEvenSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    Vector,
    Integer,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmEntry {
    pub name: &'static str,
    pub style: Style,
    pub complexity: Complexity,
    pub source_text: &'static str,
    #[serde(skip)]
    pub oracle_id: OracleId,
    #[serde(skip)]
    pub input: InputKind,
    /// Name of the entry-point function in `source_text`.
    #[serde(skip)]
    pub entry_point: &'static str,
}

impl AlgorithmEntry {
    pub fn line_count(&self) -> usize {
        self.source_text.lines().count()
    }

    /// Python call expression for `input`, e.g. `main([3, 1, 2], 3)`.
    pub fn call_expression(&self, input: &OracleInput) -> String {
        format!("{}({})", self.entry_point, self.arguments(input))
    }

    /// Argument list for `input` as it would appear in a call.
    pub fn arguments(&self, input: &OracleInput) -> String {
        match (input, self.input) {
            (OracleInput::Vector(v), InputKind::Vector) if self.entry_point == "main" => {
                format!("{}, {}", format_list(v), v.len())
            }
            (OracleInput::Vector(v), _) => format_list(v),
            (OracleInput::Integer(n), _) => n.to_string(),
        }
    }
}

pub fn format_list(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleInput {
    Vector(Vec<i64>),
    Integer(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleOutput {
    Vector(Vec<i64>),
    Integer(i64),
    Bool(bool),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("input kind does not match the routine's signature")]
    InputMismatch,
    /// The source would raise for this input.
    #[error("the routine raises: {0}")]
    Raised(String),
    #[error("the routine does not terminate for this input")]
    NonTerminating,
    #[error("intermediate value exceeds 64 bits")]
    Overflow,
}

const QUADRATIC: &str = "O(n^2)";
const QUADRATIC_AVG: &str = "Θ(n^2)";
const LOGLINEAR: &str = "O(n log(n))";
const LOGLINEAR_AVG: &str = "Θ(n log(n))";
const LOGLINEAR_BEST: &str = "Ω(n log(n))";

const fn cx(worst: &'static str, average: &'static str, best: &'static str, space: &'static str) -> Complexity {
    Complexity {
        worst,
        average,
        best,
        space,
    }
}

macro_rules! asset {
    ($file:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/assets/algorithms/", $file))
    };
}

const fn sort_entry(
    name: &'static str,
    style: Style,
    complexity: Complexity,
    source_text: &'static str,
    oracle_id: OracleId,
) -> AlgorithmEntry {
    AlgorithmEntry {
        name,
        style,
        complexity,
        source_text,
        oracle_id,
        input: InputKind::Vector,
        entry_point: "main",
    }
}

use OracleId as O;
use Style::{Iterative as It, Recursive as Rec};

static SORTING: LazyLock<Vec<AlgorithmEntry>> = LazyLock::new(|| {
    let insertion = |space| cx(QUADRATIC, QUADRATIC_AVG, "Ω(n)", space);
    let selection = |space| cx(QUADRATIC, QUADRATIC_AVG, "Ω(n^2)", space);
    let bubble = |space| cx(QUADRATIC, QUADRATIC_AVG, "Ω(n^2)", space);
    let adaptive = |space| cx(QUADRATIC, QUADRATIC_AVG, "Ω(n)", space);
    let quick = |space| cx(QUADRATIC, LOGLINEAR_AVG, LOGLINEAR_BEST, space);
    let merge = |space| cx(LOGLINEAR, LOGLINEAR_AVG, LOGLINEAR_BEST, space);
    let tim = |space| cx(LOGLINEAR, LOGLINEAR_AVG, "Ω(n)", space);
    let heap = |space| cx(LOGLINEAR, LOGLINEAR_AVG, LOGLINEAR_BEST, space);
    vec![
        sort_entry("insertion", Rec, insertion("O(n)"), asset!("rec_insertion.py"), O::RecursiveMinSelection),
        sort_entry("selection", Rec, selection("O(n)"), asset!("rec_selection.py"), O::RecursiveMinSelection),
        sort_entry("bubble", Rec, bubble("O(n)"), asset!("rec_bubble.py"), O::RecursiveBubble),
        sort_entry("adaptive_bubble", Rec, adaptive("O(n)"), asset!("rec_adaptive_bubble.py"), O::RecursiveAdaptiveBubble),
        sort_entry("quick", Rec, quick("O(n)"), asset!("rec_quick.py"), O::RecursiveQuick),
        sort_entry("merge", Rec, merge("O(n)"), asset!("rec_merge.py"), O::RecursiveMerge),
        sort_entry("tim", Rec, tim("O(n)"), asset!("rec_tim.py"), O::RecursiveTim),
        sort_entry("heap", Rec, heap("O(log n)"), asset!("rec_heap.py"), O::RecursiveHeap),
        sort_entry("insertion", It, insertion("O(1)"), asset!("it_insertion.py"), O::IterativeInsertion),
        sort_entry("selection", It, selection("O(1)"), asset!("it_selection.py"), O::IterativeBubble),
        sort_entry("bubble", It, bubble("O(1)"), asset!("it_bubble.py"), O::IterativeBubble),
        sort_entry("adaptive_bubble", It, adaptive("O(1)"), asset!("it_adaptive_bubble.py"), O::IterativeAdaptiveBubble),
        sort_entry("quick", It, quick("O(n)"), asset!("it_quick.py"), O::IterativeQuick),
        sort_entry("merge", It, merge("O(n)"), asset!("it_merge.py"), O::IterativeMerge),
        sort_entry("tim", It, tim("O(1)"), asset!("it_tim.py"), O::IterativeTim),
        sort_entry("heap", It, heap("O(1)"), asset!("it_heap.py"), O::IterativeHeap),
    ]
});

static CLASSIC: LazyLock<Vec<AlgorithmEntry>> = LazyLock::new(|| {
    let linear = cx("O(n)", "Θ(n)", "Ω(1)", "O(1)");
    let quadratic = cx(QUADRATIC, QUADRATIC_AVG, "Ω(n^2)", "O(1)");
    let root = cx("O(sqrt(n))", "O(sqrt(n))", "Ω(1)", "O(1)");
    // T(n): total stopping time of the Collatz sequence from n
    let collatz = cx("O(T(n))", "Θ(T(n))", "Ω(T(n))", "O(1)");
    let classic = |name, complexity, source_text, oracle_id, input, entry_point| AlgorithmEntry {
        name,
        style: It,
        complexity,
        source_text,
        oracle_id,
        input,
        entry_point,
    };
    use InputKind::{Integer as I, Vector as V};
    vec![
        classic("fibonacci", linear, asset!("fibonacci.py"), O::Fibonacci, I, "f"),
        classic("padovan", linear, asset!("padovan.py"), O::Padovan, I, "g"),
        classic("bubble_ascending", quadratic, asset!("bubble_ascending.py"), O::BubbleAscending, V, "f"),
        classic("bubble_descending", quadratic, asset!("bubble_descending.py"), O::BubbleDescending, V, "g"),
        classic("gauss_sum", linear, asset!("gauss_sum.py"), O::GaussSum, I, "f"),
        classic("gauss_alternating", linear, asset!("gauss_alternating.py"), O::GaussAlternating, I, "g"),
        classic("is_prime", root, asset!("is_prime.py"), O::IsPrime, I, "f"),
        classic("is_prime_successor", root, asset!("is_prime_successor.py"), O::IsPrimeSuccessor, I, "g"),
        classic("collatz_sum", collatz, asset!("collatz_sum.py"), O::CollatzSum, I, "f"),
        classic("collatz_even_sum", collatz, asset!("collatz_even_sum.py"), O::CollatzEvenSum, I, "g"),
    ]
});

/// The sixteen sorting entries: eight routines, each iterative and recursive.
pub fn corpus() -> &'static [AlgorithmEntry] {
    &SORTING
}

/// The ten classic/variant entries, base before variant.
pub fn classic_corpus() -> &'static [AlgorithmEntry] {
    &CLASSIC
}

pub fn entry(name: &str, style: Style) -> Option<&'static AlgorithmEntry> {
    SORTING
        .iter()
        .chain(CLASSIC.iter())
        .find(|e| e.name == name && e.style == style)
}

/// Runs the native transliteration of `entry` on `input`.
pub fn oracle_run(entry: &AlgorithmEntry, input: &OracleInput) -> Result<OracleOutput, OracleError> {
    run_oracle(entry.oracle_id, input)
}

pub fn run_oracle(id: OracleId, input: &OracleInput) -> Result<OracleOutput, OracleError> {
    use OracleInput::{Integer, Vector};
    let out = match (id, input) {
        (O::RecursiveMinSelection, Vector(v)) => OracleOutput::Vector(sorting::recursive_min_selection(v.clone())?),
        (O::RecursiveBubble, Vector(v)) => OracleOutput::Vector(sorting::recursive_bubble(v.clone())?),
        (O::RecursiveAdaptiveBubble, Vector(v)) => OracleOutput::Vector(sorting::recursive_adaptive_bubble(v.clone())?),
        (O::RecursiveQuick, Vector(v)) => OracleOutput::Vector(sorting::recursive_quick(v.clone())?),
        (O::RecursiveMerge, Vector(v)) => OracleOutput::Vector(sorting::recursive_merge(v.clone())?),
        (O::RecursiveTim, Vector(v)) => OracleOutput::Vector(sorting::recursive_tim(v.clone())?),
        (O::RecursiveHeap, Vector(v)) => OracleOutput::Vector(sorting::recursive_heap(v.clone())?),
        (O::IterativeInsertion, Vector(v)) => OracleOutput::Vector(sorting::iterative_insertion(v.clone())?),
        (O::IterativeBubble, Vector(v)) => OracleOutput::Vector(sorting::iterative_bubble(v.clone())?),
        (O::IterativeAdaptiveBubble, Vector(v)) => OracleOutput::Vector(sorting::iterative_adaptive_bubble(v.clone())?),
        (O::IterativeQuick, Vector(v)) => OracleOutput::Vector(sorting::iterative_quick(v.clone())?),
        (O::IterativeMerge, Vector(v)) => OracleOutput::Vector(sorting::iterative_merge(v.clone())?),
        (O::IterativeTim, Vector(v)) => OracleOutput::Vector(sorting::iterative_tim(v.clone())?),
        (O::IterativeHeap, Vector(v)) => OracleOutput::Vector(sorting::iterative_heap(v.clone())?),
        (O::BubbleAscending, Vector(v)) => OracleOutput::Vector(classic::bubble_ascending(v.clone())),
        (O::BubbleDescending, Vector(v)) => OracleOutput::Vector(classic::bubble_descending(v.clone())),
        (O::Fibonacci, Integer(n)) => OracleOutput::Integer(classic::fibonacci(*n)?),
        (O::Padovan, Integer(n)) => OracleOutput::Integer(classic::padovan(*n)?),
        (O::GaussSum, Integer(n)) => OracleOutput::Integer(classic::gauss_sum(*n)?),
        (O::GaussAlternating, Integer(n)) => OracleOutput::Integer(classic::gauss_alternating(*n)?),
        (O::IsPrime, Integer(n)) => OracleOutput::Bool(classic::is_prime(*n)),
        (O::IsPrimeSuccessor, Integer(n)) => OracleOutput::Bool(classic::is_prime_successor(*n)),
        (O::CollatzSum, Integer(n)) => OracleOutput::Integer(classic::collatz_sum(*n)?),
        (O::CollatzEvenSum, Integer(n)) => OracleOutput::Integer(classic::collatz_even_sum(*n)?),
        _ => return Err(OracleError::InputMismatch),
    };
    Ok(out)
}

/// A classic routine and a variant with the same length and complexity but
/// different semantics.
#[derive(Clone, Debug)]
pub struct VariantPair {
    pub base: &'static AlgorithmEntry,
    pub variant: &'static AlgorithmEntry,
    /// First input, in enumeration order, on which the two outputs differ.
    pub divergence_witness: OracleInput,
}

/// Inputs searched for divergence witnesses: integers 0..=20, or vectors over
/// {0, 1, 2} ordered by length then lexicographically, up to length 4.
pub fn witness_candidates(kind: InputKind) -> Vec<OracleInput> {
    match kind {
        InputKind::Integer => (0..=20).map(OracleInput::Integer).collect(),
        InputKind::Vector => {
            let mut out = vec![OracleInput::Vector(vec![])];
            let mut layer: Vec<Vec<i64>> = vec![vec![]];
            for _ in 0..4 {
                layer = layer
                    .iter()
                    .flat_map(|prefix| {
                        (0..3).map(move |x| {
                            let mut v = prefix.clone();
                            v.push(x);
                            v
                        })
                    })
                    .collect();
                out.extend(layer.iter().cloned().map(OracleInput::Vector));
            }
            out
        }
    }
}

fn find_witness(base: &AlgorithmEntry, variant: &AlgorithmEntry) -> Option<OracleInput> {
    witness_candidates(base.input).into_iter().find(|input| {
        match (oracle_run(base, input), oracle_run(variant, input)) {
            (Ok(a), Ok(b)) => a != b,
            _ => false,
        }
    })
}

static PAIRS: LazyLock<Vec<VariantPair>> = LazyLock::new(|| {
    CLASSIC
        .chunks(2)
        .map(|pair| {
            let (base, variant) = (&pair[0], &pair[1]);
            let divergence_witness = find_witness(base, variant)
                .unwrap_or_else(|| panic!("no divergence witness for {}", base.name));
            VariantPair {
                base,
                variant,
                divergence_witness,
            }
        })
        .collect()
});

/// Fibonacci/Padovan, ascending/descending bubble sort, Gauss sum/alternating
/// sum, primality/primality of successor, Collatz sum/even-step sum.
pub fn variant_pairs() -> &'static [VariantPair] {
    &PAIRS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        assert_eq!(corpus().len(), 16);
        for style in [It, Rec] {
            assert_eq!(corpus().iter().filter(|e| e.style == style).count(), 8);
        }
        assert_eq!(entry("bubble", It).unwrap().complexity.worst, "O(n^2)");
        assert_eq!(entry("merge", Rec).unwrap().complexity.worst, "O(n log(n))");
        assert_eq!(entry("heap", Rec).unwrap().complexity.space, "O(log n)");
    }

    #[test]
    fn sources_use_anonymised_names() {
        for e in corpus() {
            let defs = defined_functions(e.source_text);
            assert_eq!(defs[0], "main", "{} {}", e.name, e.style);
            assert!(defs[1..].iter().all(|d| d.starts_with('f')), "{} {}", e.name, e.style);
        }
        for e in classic_corpus() {
            assert_eq!(defined_functions(e.source_text), vec![e.entry_point]);
        }
    }

    #[test]
    fn printed_duplicates_are_kept() {
        assert_eq!(entry("insertion", Rec).unwrap().source_text, entry("selection", Rec).unwrap().source_text);
        assert_eq!(entry("bubble", It).unwrap().source_text, entry("selection", It).unwrap().source_text);
    }

    #[test]
    fn oracle_examples() {
        let bubble = entry("bubble", It).unwrap();
        assert_eq!(
            oracle_run(bubble, &OracleInput::Vector(vec![3, 1, 2])).unwrap(),
            OracleOutput::Vector(vec![1, 2, 3])
        );
        let gauss = entry("gauss_sum", It).unwrap();
        assert_eq!(oracle_run(gauss, &OracleInput::Integer(5)).unwrap(), OracleOutput::Integer(10));
        let fib = entry("fibonacci", It).unwrap();
        assert_eq!(oracle_run(fib, &OracleInput::Integer(10)).unwrap(), OracleOutput::Integer(55));
        assert_eq!(oracle_run(fib, &OracleInput::Vector(vec![1])), Err(OracleError::InputMismatch));
    }

    #[test]
    fn pair_examples() {
        let pairs = variant_pairs();
        assert_eq!(pairs.len(), 5);
        let prime = &pairs[3];
        assert_eq!(oracle_run(prime.base, &OracleInput::Integer(4)).unwrap(), OracleOutput::Bool(false));
        assert_eq!(oracle_run(prime.variant, &OracleInput::Integer(4)).unwrap(), OracleOutput::Bool(true));
        let bubble = &pairs[1];
        assert_eq!(
            oracle_run(bubble.variant, &OracleInput::Vector(vec![1, 2, 3])).unwrap(),
            OracleOutput::Vector(vec![3, 2, 1])
        );
        assert_eq!(pairs[0].divergence_witness, OracleInput::Integer(0));
        assert_eq!(bubble.divergence_witness, OracleInput::Vector(vec![0, 1]));
        assert_eq!(pairs[2].divergence_witness, OracleInput::Integer(2));
        assert_eq!(prime.divergence_witness, OracleInput::Integer(1));
        assert_eq!(pairs[4].divergence_witness, OracleInput::Integer(3));
    }

    #[test]
    fn pairs_have_matching_shape() {
        for p in variant_pairs() {
            assert!(p.base.line_count().abs_diff(p.variant.line_count()) <= 2, "{}", p.base.name);
            assert_eq!(p.base.complexity, p.variant.complexity);
        }
    }

    #[test]
    fn call_expressions() {
        let e = entry("quick", Rec).unwrap();
        assert_eq!(e.call_expression(&OracleInput::Vector(vec![3, 1])), "main([3, 1], 2)");
        let f = entry("fibonacci", It).unwrap();
        assert_eq!(f.call_expression(&OracleInput::Integer(7)), "f(7)");
    }
}
